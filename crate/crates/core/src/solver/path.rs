//! LASSO-modified LARS homotopy.
//!
//! Along the path the active coefficients satisfy the equicorrelation system
//! `R_A^T (u - R_A gamma_A) = lambda s_A`. Between breakpoints `gamma_A` moves
//! linearly in `lambda` along `w = (R_A^T R_A)^{-1} s_A`; a breakpoint occurs when
//! an inactive correlation reaches `lambda` or an active coefficient reaches zero.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};

use super::qr::ActiveQr;
use super::{Breakpoint, PathEvent, PathNote, SolutionPath, Termination, EXACT_REL_TOL};
use crate::design::DesignProblem;
use crate::error::{Error, Result};

/// Relative diagonal below which an entering column counts as linearly dependent.
const RANK_TOL: f64 = 1e-10;
/// Denominators `1 - sigma a_j` at or below this never reach the boundary.
const SLOPE_TOL: f64 = 1e-12;
/// Early exit when the residual vanishes before `lambda` does.
const ZERO_RESIDUAL_REL: f64 = 1e-12;
/// Steps shorter than this multiple of `lambda_0` are merged into the previous breakpoint.
const TIE_REL: f64 = 1e-17;
/// Below this multiple of `lambda_0` correlations are dominated by rounding, so
/// events are no longer resolved and the last segment runs to the floor.
const NOISE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOptions {
    pub lambda_floor: f64,
    pub max_breakpoints: usize,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions { lambda_floor: 0.0, max_breakpoints: 10_000 }
    }
}

pub fn solve_path(p: &DesignProblem, lambda_floor: f64, max_breakpoints: usize) -> Result<SolutionPath> {
    lars_path(p.matrix(), p.target(), &PathOptions { lambda_floor, max_breakpoints })
}

enum Step {
    Enter { j: usize, sigma: f64 },
    Leave { pos: usize },
    End,
}

pub fn lars_path(r: &DMatrix<f64>, u: &DVector<f64>, opts: &PathOptions) -> Result<SolutionPath> {
    if r.nrows() != u.len() {
        return Err(Error::DimensionMismatch { expected: r.nrows(), got: u.len() });
    }
    if r.iter().chain(u.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("design problem contains non-finite values".into()));
    }
    if !(opts.lambda_floor >= 0.0) || !opts.lambda_floor.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda floor {} must be finite and >= 0", opts.lambda_floor)));
    }
    if opts.max_breakpoints == 0 {
        return Err(Error::InvalidArgument("max_breakpoints must be at least 1".into()));
    }
    let n = r.ncols();
    let unorm = u.norm();
    let mut c = r.tr_mul(u);
    let lambda0 = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let start = Breakpoint {
        lambda: lambda0,
        gamma: vec![0.0; n],
        residual: unorm,
        l1_norm: 0.0,
        active_set: Vec::new(),
        events: vec![PathEvent::Start],
    };
    if unorm == 0.0 || lambda0 == 0.0 || lambda0 <= opts.lambda_floor {
        let termination = if unorm == 0.0 { Termination::ExactReached } else { Termination::LambdaFloor };
        return Ok(SolutionPath { breakpoints: vec![start], termination, notes: Vec::new(), target_norm: unorm });
    }

    let tie_tol = TIE_REL * lambda0;
    let noise_floor = NOISE_REL * lambda0;
    let col_norms: Vec<f64> = r.column_iter().map(|c| c.norm()).collect();
    let mut qr = ActiveQr::new(r.nrows());
    let mut active: Vec<usize> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    let mut gamma = vec![0.0; n];
    let mut lambda = lambda0;
    let mut breakpoints = vec![start];
    let mut notes: Vec<PathNote> = Vec::new();
    let mut noted_dependent: HashSet<usize> = HashSet::new();
    let mut just_added: Option<usize> = None;
    let mut just_dropped: Option<usize> = None;
    let mut entered_here: Vec<usize> = Vec::new();
    let max_loops = 50 * opts.max_breakpoints.min(1 << 20) + 10 * n + 100;
    let mut termination = Termination::MaxIterations;

    for _ in 0..max_loops {
        let z = qr.solve_rt(&signs);
        let w = qr.solve_r(&z);
        let a = r.tr_mul(&qr.q_times(&z));

        // Entry candidates: (step, index, sign, dependent).
        let mut best_enter: Option<(f64, usize, f64)> = None;
        let mut dependent_hits: Vec<(f64, usize)> = Vec::new();
        let in_active: HashSet<usize> = active.iter().copied().collect();
        for j in 0..n {
            if in_active.contains(&j) || col_norms[j] == 0.0 || noted_dependent.contains(&j) {
                continue;
            }
            let mut step: Option<(f64, f64)> = None;
            for sigma in [1.0, -1.0] {
                let denom = 1.0 - sigma * a[j];
                if denom > SLOPE_TOL {
                    let d = ((lambda - sigma * c[j]) / denom).max(0.0);
                    // A column that just left may not re-enter without moving.
                    if Some(j) == just_dropped && d <= tie_tol {
                        continue;
                    }
                    if step.is_none_or(|(s, _)| d < s) {
                        step = Some((d, sigma));
                    }
                }
            }
            let Some((d, sigma)) = step else { continue };
            let dependent = qr.len() > 0 && qr.orthogonal_norm(r.column(j)) <= RANK_TOL * col_norms[j];
            if dependent {
                dependent_hits.push((d, j));
            } else if best_enter.is_none_or(|(s, bj, _)| d < s - tie_tol || (d <= s + tie_tol && j < bj)) {
                best_enter = Some((d, j, sigma));
            }
        }
        // Crossings are measured from the active-set solution at the current lambda,
        // not the stored iterate, which may predate the last entry.
        let qtu = qr.qt(u);
        let g_now = qr.solve_r(&qtu.iter().zip(&z).map(|(q, zi)| q - lambda * zi).collect::<Vec<_>>());
        let mut best_leave: Option<(f64, usize)> = None;
        for (pos, &j) in active.iter().enumerate() {
            // Only coefficients heading against their sign can reach zero. Rounding may
            // leave such a coefficient a hair past zero, so the crossing is clamped.
            if signs[pos] * w[pos] >= 0.0 {
                continue;
            }
            // Coefficients that entered at this breakpoint start from zero exactly.
            let g = if entered_here.contains(&j) { 0.0 } else { g_now[pos] };
            let d = (-g / w[pos]).max(0.0);
            if Some(j) == just_added && d <= tie_tol {
                continue;
            }
            if best_leave.is_none_or(|(s, _)| d < s) {
                best_leave = Some((d, pos));
            }
        }
        let to_end = lambda - opts.lambda_floor;
        let d_enter = best_enter.map_or(f64::INFINITY, |b| b.0);
        let d_leave = best_leave.map_or(f64::INFINITY, |b| b.0);
        let below_noise = lambda - d_enter.min(d_leave) < noise_floor && opts.lambda_floor < noise_floor;
        if below_noise && to_end > d_enter.min(d_leave) {
            notes.push(PathNote::NoiseFloor { breakpoint: breakpoints.len() });
        }
        let (delta, step) = if (to_end <= d_enter && to_end <= d_leave) || below_noise {
            (to_end, Step::End)
        } else if d_leave <= d_enter {
            (d_leave, Step::Leave { pos: best_leave.unwrap().1 })
        } else {
            let (d, j, sigma) = best_enter.unwrap();
            (d, Step::Enter { j, sigma })
        };
        for &(d, j) in &dependent_hits {
            if d <= delta + tie_tol && noted_dependent.insert(j) {
                notes.push(PathNote::RankDeficient { breakpoint: breakpoints.len(), index: j });
            }
        }

        let new_lambda = if matches!(step, Step::End) { opts.lambda_floor } else { lambda - delta };
        let moved: Vec<(usize, f64)> = if active.is_empty() {
            Vec::new()
        } else {
            let y: Vec<f64> = qtu.iter().zip(&z).map(|(q, zi)| q - new_lambda * zi).collect();
            active.iter().copied().zip(qr.solve_r(&y)).collect()
        };
        let event = match step {
            Step::Enter { j, sigma } => {
                if !qr.push(r.column(j), RANK_TOL) {
                    // Orthogonal part vanished after the screen; treat as dependent.
                    if noted_dependent.insert(j) {
                        notes.push(PathNote::RankDeficient { breakpoint: breakpoints.len(), index: j });
                    }
                    continue;
                }
                active.push(j);
                signs.push(sigma);
                just_added = Some(j);
                just_dropped = None;
                PathEvent::Enter(j)
            }
            Step::Leave { pos } => {
                let j = active.remove(pos);
                signs.remove(pos);
                qr.remove(pos);
                just_dropped = Some(j);
                just_added = None;
                noted_dependent.clear();
                PathEvent::Leave(j)
            }
            Step::End => PathEvent::End,
        };
        for (j, g) in moved {
            gamma[j] = g;
        }
        if let PathEvent::Enter(j) | PathEvent::Leave(j) = event {
            gamma[j] = 0.0;
        }
        lambda = new_lambda;
        let resid_vec = u - r * DVector::from_column_slice(&gamma);
        c = r.tr_mul(&resid_vec);
        let residual = resid_vec.norm();
        let l1_norm = gamma.iter().map(|g| g.abs()).sum();

        let merged = delta <= tie_tol;
        if !merged {
            entered_here.clear();
        }
        if let PathEvent::Enter(j) = event {
            entered_here.push(j);
        }
        if merged {
            let idx = breakpoints.len() - 1;
            let last = breakpoints.last_mut().unwrap();
            last.gamma.clone_from(&gamma);
            last.residual = residual;
            last.l1_norm = l1_norm;
            last.active_set.clone_from(&active);
            last.events.push(event.clone());
            if matches!(event, PathEvent::Enter(_)) {
                let entered: Vec<usize> = last
                    .events
                    .iter()
                    .filter_map(|e| if let PathEvent::Enter(j) = e { Some(*j) } else { None })
                    .collect();
                if entered.len() > 1 {
                    notes.retain(|note| !matches!(note, PathNote::Tie { breakpoint, .. } if *breakpoint == idx));
                    notes.push(PathNote::Tie { breakpoint: idx, indices: entered });
                }
            }
        } else {
            breakpoints.push(Breakpoint {
                lambda,
                gamma: gamma.clone(),
                residual,
                l1_norm,
                active_set: active.clone(),
                events: vec![event.clone()],
            });
        }

        if residual <= ZERO_RESIDUAL_REL * unorm {
            termination = Termination::ExactReached;
            break;
        }
        if matches!(event, PathEvent::End) {
            termination = if lambda == 0.0 && residual <= EXACT_REL_TOL * unorm {
                Termination::ExactReached
            } else {
                Termination::LambdaFloor
            };
            break;
        }
        if breakpoints.len() >= opts.max_breakpoints {
            termination = Termination::MaxIterations;
            break;
        }
    }
    Ok(SolutionPath { breakpoints, termination, notes, target_norm: unorm })
}
