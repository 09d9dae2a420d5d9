//! Solutions extracted from a path, optimality certificates and tradeoff curves.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{SolutionPath, Termination, EXACT_REL_TOL, KKT_TOL, ZERO_THRESHOLD};
use crate::design::DesignProblem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub gamma: Vec<f64>,
    pub lambda: f64,
    pub residual: f64,
    pub l1_norm: f64,
    pub sparsity: usize,
}

impl Solution {
    /// Recomputes residual, norm and sparsity from `gamma`.
    pub fn new(p: &DesignProblem, gamma: Vec<f64>, lambda: f64) -> Result<Self> {
        let residual = p.residual(&gamma)?;
        let l1_norm = gamma.iter().map(|g| g.abs()).sum();
        let sparsity = gamma.iter().filter(|g| g.abs() > ZERO_THRESHOLD).count();
        Ok(Solution { gamma, lambda, residual, l1_norm, sparsity })
    }

    /// Indices with `|gamma| > 1e-12`, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.gamma.len()).filter(|&i| self.gamma[i].abs() > ZERO_THRESHOLD).collect()
    }

    pub fn overhead(&self) -> f64 {
        self.l1_norm - 1.0
    }

    pub fn sum(&self) -> f64 {
        self.gamma.iter().sum()
    }
}

/// Minimal-norm exact solution on the path.
pub fn exact_solution(p: &DesignProblem, path: &SolutionPath) -> Result<Solution> {
    let tol = EXACT_REL_TOL * path.target_norm;
    let best = path
        .breakpoints
        .iter()
        .filter(|b| b.residual <= tol)
        .min_by(|a, b| a.l1_norm.total_cmp(&b.l1_norm));
    match (path.termination, best) {
        (Termination::ExactReached, Some(b)) => Solution::new(p, b.gamma.clone(), b.lambda),
        _ => Err(Error::NotExact { best_residual: path.best_residual() }),
    }
}

/// Point on the path with `|gamma|_1 = target_l1`, interpolated linearly inside the
/// attaining segment; the lowest-residual crossing wins.
pub fn solution_at_l1(p: &DesignProblem, path: &SolutionPath, target_l1: f64) -> Result<Solution> {
    let bps = &path.breakpoints;
    let mut best: Option<Solution> = None;
    let mut consider = |s: Solution| {
        if best.as_ref().is_none_or(|b| s.residual < b.residual) {
            best = Some(s);
        }
    };
    if bps.len() == 1 && bps[0].l1_norm == target_l1 {
        consider(Solution::new(p, bps[0].gamma.clone(), bps[0].lambda)?);
    }
    for w in bps.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (lo, hi) = (a.l1_norm.min(b.l1_norm), a.l1_norm.max(b.l1_norm));
        if target_l1 < lo || target_l1 > hi {
            continue;
        }
        let t = if hi == lo { 1.0 } else { (target_l1 - a.l1_norm) / (b.l1_norm - a.l1_norm) };
        let gamma: Vec<f64> = a.gamma.iter().zip(&b.gamma).map(|(x, y)| (1.0 - t) * x + t * y).collect();
        consider(Solution::new(p, gamma, (1.0 - t) * a.lambda + t * b.lambda)?);
    }
    best.ok_or_else(|| {
        let min = bps.iter().map(|b| b.l1_norm).fold(f64::INFINITY, f64::min);
        let max = bps.iter().map(|b| b.l1_norm).fold(f64::NEG_INFINITY, f64::max);
        Error::L1NotAttained { target: target_l1, min, max }
    })
}

/// `(1 - t) a + t b`, with residual and norm recomputed.
pub fn interpolate_solutions(p: &DesignProblem, a: &Solution, b: &Solution, t: f64) -> Result<Solution> {
    if a.gamma.len() != b.gamma.len() {
        return Err(Error::DimensionMismatch { expected: a.gamma.len(), got: b.gamma.len() });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("interpolation parameter {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(a.clone());
    }
    if t == 1.0 {
        return Ok(b.clone());
    }
    let gamma = a.gamma.iter().zip(&b.gamma).map(|(x, y)| (1.0 - t) * x + t * y).collect();
    Solution::new(p, gamma, (1.0 - t) * a.lambda + t * b.lambda)
}

/// `(residual, l1_norm)` pairs: breakpoints plus `samples_per_segment` interior
/// points per segment, pruned to the nondominated staircase (l1 ascending,
/// residual strictly descending).
pub fn tradeoff_curve(p: &DesignProblem, path: &SolutionPath, samples_per_segment: usize) -> Result<Vec<(f64, f64)>> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (k, b) in path.breakpoints.iter().enumerate() {
        pts.push((b.residual, b.l1_norm));
        if let Some(next) = path.breakpoints.get(k + 1) {
            for s in 1..=samples_per_segment {
                let t = s as f64 / (samples_per_segment + 1) as f64;
                let gamma: Vec<f64> = b.gamma.iter().zip(&next.gamma).map(|(x, y)| (1.0 - t) * x + t * y).collect();
                pts.push((p.residual(&gamma)?, gamma.iter().map(|g| g.abs()).sum()));
            }
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let mut curve: Vec<(f64, f64)> = Vec::new();
    for pt in pts {
        if curve.last().is_none_or(|last| pt.0 < last.0) {
            curve.push(pt);
        }
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub passed: bool,
    pub worst_violation: f64,
    /// Index attaining the worst violation.
    pub worst_index: Option<usize>,
    pub max_abs_correlation: f64,
    pub lambda: f64,
    pub tolerance: f64,
}

/// First-order optimality of `gamma` for `1/2 |R gamma - u|^2 + lambda |gamma|_1`.
pub fn kkt_check(p: &DesignProblem, gamma: &[f64], lambda: f64) -> Result<KktReport> {
    if gamma.len() != p.cols() {
        return Err(Error::DimensionMismatch { expected: p.cols(), got: gamma.len() });
    }
    Ok(kkt_check_matrix(p.matrix(), p.target(), gamma, lambda))
}

pub fn kkt_check_matrix(r: &DMatrix<f64>, u: &DVector<f64>, gamma: &[f64], lambda: f64) -> KktReport {
    let resid = u - r * DVector::from_column_slice(gamma);
    let c = r.tr_mul(&resid);
    let mut worst = 0.0f64;
    let mut worst_index = None;
    for (l, (&cl, &gl)) in c.iter().zip(gamma).enumerate() {
        let v = if gl.abs() > ZERO_THRESHOLD { (cl - lambda * gl.signum()).abs() } else { (cl.abs() - lambda).max(0.0) };
        if v > worst {
            worst = v;
            worst_index = Some(l);
        }
    }
    KktReport {
        passed: worst <= KKT_TOL && lambda >= 0.0,
        worst_violation: worst,
        worst_index,
        max_abs_correlation: c.iter().fold(0.0, |m, v| m.max(v.abs())),
        lambda,
        tolerance: KKT_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_path, PathEvent};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(rows_blocks: usize, cols: usize, seed: u64) -> DesignProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = 16 * rows_blocks;
        let m = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
        let u = DVector::from_fn(rows, |_, _| rng.random_range(-1.0..1.0));
        let labels = (0..cols).map(|j| format!("c{j}")).collect();
        DesignProblem::new(1, m, u, labels, (0..rows_blocks).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn null_vector_certificate() {
        let p = random_problem(1, 20, 1);
        let lambda0 = p.matrix().tr_mul(p.target()).amax();
        assert!(kkt_check(&p, &[0.0; 20], lambda0).unwrap().passed);
        assert!(kkt_check(&p, &[0.0; 20], lambda0 + 1.0).unwrap().passed);
        assert!(!kkt_check(&p, &[0.0; 20], 0.5 * lambda0).unwrap().passed);
    }

    #[test]
    fn perturbed_breakpoint_fails_certificate() {
        let p = random_problem(1, 30, 2);
        let path = solve_path(&p, 0.0, 1000).unwrap();
        let b = &path.breakpoints[path.breakpoints.len() / 2];
        assert!(kkt_check(&p, &b.gamma, b.lambda).unwrap().passed);
        let mut g = b.gamma.clone();
        let j = b.active_set[0];
        g[j] += 1e-3;
        assert!(!kkt_check(&p, &g, b.lambda).unwrap().passed);
    }

    #[test]
    fn exact_and_unit_norm_extraction() {
        let p = random_problem(1, 30, 3);
        let path = solve_path(&p, 0.0, 1000).unwrap();
        let exact = exact_solution(&p, &path).unwrap();
        assert!(exact.residual <= 1e-10 * p.target().norm());
        let zero = solution_at_l1(&p, &path, 0.0).unwrap();
        assert_eq!(zero.l1_norm, 0.0);
        let half = solution_at_l1(&p, &path, 0.5 * exact.l1_norm).unwrap();
        assert!((half.l1_norm - 0.5 * exact.l1_norm).abs() < 1e-12);
        match solution_at_l1(&p, &path, 10.0 * exact.l1_norm) {
            Err(Error::L1NotAttained { max, .. }) => assert!((max - exact.l1_norm).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn interpolation_endpoints_and_convexity() {
        let p = random_problem(1, 30, 4);
        let path = solve_path(&p, 0.0, 1000).unwrap();
        let a = Solution::new(&p, path.breakpoints[2].gamma.clone(), path.breakpoints[2].lambda).unwrap();
        let b = exact_solution(&p, &path).unwrap();
        assert_eq!(interpolate_solutions(&p, &a, &b, 0.0).unwrap(), a);
        assert_eq!(interpolate_solutions(&p, &a, &b, 1.0).unwrap(), b);
        for k in 1..10 {
            let t = k as f64 / 10.0;
            let s = interpolate_solutions(&p, &a, &b, t).unwrap();
            assert!(s.residual <= (1.0 - t) * a.residual + t * b.residual + 1e-12);
            assert!(s.l1_norm <= (1.0 - t) * a.l1_norm + t * b.l1_norm + 1e-12);
        }
        assert!(interpolate_solutions(&p, &a, &b, 1.5).is_err());
    }

    #[test]
    fn tradeoff_curve_endpoints() {
        let p = random_problem(1, 30, 5);
        let path = solve_path(&p, 0.0, 1000).unwrap();
        let curve = tradeoff_curve(&p, &path, 4).unwrap();
        assert_eq!(curve[0], (p.target().norm(), 0.0));
        let last = curve.last().unwrap();
        assert!(last.0 <= 1e-10 * p.target().norm());
        assert!((last.1 - path.last().l1_norm).abs() < 1e-12);
        for w in curve.windows(2) {
            assert!(w[1].0 < w[0].0 && w[1].1 >= w[0].1);
        }
        let single = random_problem(1, 3, 6);
        let zero = DesignProblem::new(1, single.matrix().clone(), DVector::zeros(16), single.column_labels().to_vec(), vec![0.0])
            .unwrap();
        let path = solve_path(&zero, 0.0, 10).unwrap();
        assert_eq!(path.breakpoints[0].events, vec![PathEvent::Start]);
        assert_eq!(tradeoff_curve(&zero, &path, 4).unwrap(), vec![(0.0, 0.0)]);
    }

    #[test]
    fn inexact_path_reports_best_residual() {
        let p = random_problem(2, 5, 7);
        let path = solve_path(&p, 0.0, 1000).unwrap();
        match exact_solution(&p, &path) {
            Err(Error::NotExact { best_residual }) => assert!(best_residual > 0.1),
            other => panic!("{other:?}"),
        }
    }
}
