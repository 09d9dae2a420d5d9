//! Minimal-L1 solutions of `R gamma = u` through the LASSO homotopy path of
//! `min 1/2 |R gamma - u|^2 + lambda |gamma|_1`.

mod path;
mod qr;
mod solution;

use serde::{Deserialize, Serialize};

pub use path::{lars_path, solve_path, PathOptions};
pub use solution::{
    exact_solution, interpolate_solutions, kkt_check, kkt_check_matrix, solution_at_l1, tradeoff_curve, KktReport,
    Solution,
};

pub const ZERO_THRESHOLD: f64 = 1e-12;
pub const KKT_TOL: f64 = 1e-8;
pub const EXACT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ExactReached,
    LambdaFloor,
    MaxIterations,
}

/// What happened at a breakpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathEvent {
    Start,
    Enter(usize),
    Leave(usize),
    /// The path reached `lambda = 0` or the floor.
    End,
}

/// Degenerate situations resolved along the path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathNote {
    /// Several indices reached the boundary together; they entered in ascending order.
    Tie { breakpoint: usize, indices: Vec<usize> },
    /// Index reached the boundary but its column lies in the span of the active set.
    RankDeficient { breakpoint: usize, index: usize },
    /// Events past this breakpoint fell below the rounding floor of the correlations
    /// and were not resolved; the final segment keeps the active set.
    NoiseFloor { breakpoint: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub lambda: f64,
    pub gamma: Vec<f64>,
    pub residual: f64,
    pub l1_norm: f64,
    /// Active set after the events at this breakpoint, in order of entry.
    pub active_set: Vec<usize>,
    pub events: Vec<PathEvent>,
}

impl Breakpoint {
    pub fn sparsity(&self) -> usize {
        self.gamma.iter().filter(|g| g.abs() > ZERO_THRESHOLD).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionPath {
    pub breakpoints: Vec<Breakpoint>,
    pub termination: Termination,
    pub notes: Vec<PathNote>,
    /// `|u|_2` of the problem the path was computed for.
    pub target_norm: f64,
}

impl SolutionPath {
    pub fn last(&self) -> &Breakpoint {
        self.breakpoints.last().expect("paths have at least one breakpoint")
    }

    pub fn best_residual(&self) -> f64 {
        self.breakpoints.iter().map(|b| b.residual).fold(f64::INFINITY, f64::min)
    }

    /// CSV with one row per breakpoint.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("breakpoint,lambda,residual,l1_norm,sparsity\n");
        for (i, b) in self.breakpoints.iter().enumerate() {
            s.push_str(&format!("{i},{:e},{:e},{:e},{}\n", b.lambda, b.residual, b.l1_norm, b.sparsity()));
        }
        s
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
