//! End-to-end runs for the three applications: discrete-angle interpolation,
//! Clifford+T synthesis and broadband or band-selective control pulses.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::design::{build_band_selective, build_broadband, build_single_target, DesignProblem, Diagnostics};
use crate::error::{Error, Result};
use crate::library::clifford_t::clifford_recovery_entries;
use crate::library::{
    append_frame_variants, clifford_group_1q, enumerate_clifford_t, notch_angle, pai_library, pulse_library, GateLibrary, LibraryEntry,
    OptimizeOptions, OptimizedPulse, Payload, Provenance, Target,
};
use crate::pauli::{Axis, PauliObservable};
use crate::ptm::{rotation_gate, unitary_from_ptm_1q, DensityMatrix, PauliTransferMatrix};
use crate::sampler::{
    estimate_expectation, ideal_signal, nmr_estimate_signal, scheme_from_gamma, Circuit, EstimatorMode,
    EstimatorResult, NmrSignals,
};
use crate::solver::{
    exact_solution, interpolate_solutions, kkt_check, solution_at_l1, solve_path, tradeoff_curve, Solution,
    SolutionPath,
};

/// Path, certificates and the solutions every application reports.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub path: SolutionPath,
    pub exact: Option<Solution>,
    /// Minimal-residual solution with `|gamma|_1 = 1`.
    pub unit_norm: Option<Solution>,
    pub tradeoff: Vec<(f64, f64)>,
    /// Worst KKT violation over all breakpoints.
    pub kkt_worst_violation: f64,
    pub kkt_passed: bool,
}

impl SolveReport {
    pub fn exact(&self) -> Result<&Solution> {
        self.exact.as_ref().ok_or(Error::NotExact { best_residual: self.path.best_residual() })
    }

    pub fn unit_norm(&self) -> Result<&Solution> {
        self.unit_norm.as_ref().ok_or_else(|| {
            let l1: Vec<f64> = self.path.breakpoints.iter().map(|b| b.l1_norm).collect();
            Error::L1NotAttained {
                target: 1.0,
                min: l1.iter().copied().fold(f64::INFINITY, f64::min),
                max: l1.iter().copied().fold(0.0, f64::max),
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub lambda_floor: f64,
    pub max_breakpoints: usize,
    pub tradeoff_samples: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { lambda_floor: 0.0, max_breakpoints: 10_000, tradeoff_samples: 8 }
    }
}

pub fn solve_and_certify(p: &DesignProblem, opts: &SolveOptions) -> Result<SolveReport> {
    let path = solve_path(p, opts.lambda_floor, opts.max_breakpoints)?;
    let mut worst = 0.0f64;
    let mut passed = true;
    for b in &path.breakpoints {
        let r = kkt_check(p, &b.gamma, b.lambda)?;
        worst = worst.max(r.worst_violation);
        passed &= r.passed;
    }
    let exact = exact_solution(p, &path).ok();
    let unit_norm = solution_at_l1(p, &path, 1.0).ok();
    let tradeoff = tradeoff_curve(p, &path, opts.tradeoff_samples)?;
    Ok(SolveReport { path, exact, unit_norm, tradeoff, kkt_worst_violation: worst, kkt_passed: passed })
}

/// Smallest `|gamma|_1` reaching `residual` on a tradeoff curve, interpolating linearly between samples.
/// The true frontier is convex, so the chord is an upper bound.
pub fn l1_at_residual(curve: &[(f64, f64)], residual: f64) -> Option<f64> {
    let mut best = curve.iter().filter(|(r, _)| *r <= residual).map(|(_, l1)| *l1).reduce(f64::min)?;
    for w in curve.windows(2) {
        let ((r0, l0), (r1, l1)) = (w[0], w[1]);
        let (lo, hi) = if r0 <= r1 { ((r0, l0), (r1, l1)) } else { ((r1, l1), (r0, l0)) };
        if lo.0 <= residual && residual <= hi.0 && hi.0 > lo.0 {
            let t = (hi.0 - residual) / (hi.0 - lo.0);
            best = best.min(hi.1 + t * (lo.1 - hi.1));
        }
    }
    Some(best)
}

/// True when `a` needs no more overhead than `b` at every residual `b` reaches.
pub fn curve_dominates(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    b.iter().all(|&(r, l1)| l1_at_residual(a, r).is_some_and(|x| x <= l1 + 1e-12))
}

/// Monte Carlo check of a circuit against its exact expectation value.
#[derive(Debug, Clone, Serialize)]
pub struct Validation {
    pub exact: f64,
    pub result: EstimatorResult,
    /// `|mean - exact| / standard_error` (infinite if the error is nonzero at zero SE).
    pub z_score: f64,
    pub within_4se: bool,
    pub variance_within_bound: bool,
}

pub fn validate_circuit(
    circuit: &Circuit,
    rho0: &DensityMatrix,
    obs: &PauliObservable,
    shots: u64,
    mode: EstimatorMode,
    seed: u64,
) -> Result<Validation> {
    let exact = circuit.exact_expectation(rho0, obs)?;
    let result = estimate_expectation(circuit, rho0, obs, shots, mode, seed)?;
    let err = (result.mean - exact).abs();
    let z_score = if err == 0.0 { 0.0 } else { err / result.standard_error };
    Ok(Validation {
        exact,
        within_4se: err <= 4.0 * result.standard_error,
        variance_within_bound: result.population_variance() <= result.variance_bound,
        z_score,
        result,
    })
}

fn rotation_target(axis: Axis, angle: f64) -> Target {
    Target::rotation(axis, angle)
}

fn clifford_only_library(target: Target) -> Result<GateLibrary> {
    let entries = clifford_group_1q()
        .into_iter()
        .map(|c| {
            let label = if c.word.is_empty() { "clifford-I".to_string() } else { format!("clifford-{}", c.word) };
            LibraryEntry::new(label, Provenance::Clifford, Payload::Word(c.word))
        })
        .collect::<Result<Vec<_>>>()?;
    GateLibrary::new(entries, Some(target), None)
}

/// Baseline system of the same target over a Clifford-only library.
#[derive(Debug, Clone, Serialize)]
pub struct Baseline {
    pub library: GateLibrary,
    pub solve: SolveReport,
}

fn baseline(library: GateLibrary, desired: &PauliTransferMatrix, opts: &SolveOptions) -> Result<Baseline> {
    let p = build_single_target(&library, desired)?;
    Ok(Baseline { solve: solve_and_certify(&p, opts)?, library })
}

// ---------------------------------------------------------------------------
// Discrete-angle interpolation

#[derive(Debug, Clone, PartialEq)]
pub struct PaiConfig {
    pub bits: u32,
    pub axis: Axis,
    pub theta: f64,
    pub solve: SolveOptions,
    /// Interpolation points between the unit-norm and exact solutions.
    pub interpolation_steps: usize,
    pub clifford_baseline: bool,
    pub shots: u64,
    pub seed: u64,
}

impl PaiConfig {
    pub fn new(bits: u32, axis: Axis, theta: f64) -> Self {
        PaiConfig {
            bits,
            axis,
            theta,
            solve: SolveOptions::default(),
            interpolation_steps: 11,
            clifford_baseline: false,
            shots: 100_000,
            seed: 0,
        }
    }
}

/// Angle halfway between notches `k` and `k + 1`.
pub fn pai_midpoint(bits: u32, k: u64) -> f64 {
    0.5 * (notch_angle(bits, k) + notch_angle(bits, k + 1))
}

#[derive(Debug, Clone, Serialize)]
pub struct PaiReport {
    pub library: GateLibrary,
    #[serde(skip)]
    pub problem: DesignProblem,
    pub diagnostics: Diagnostics,
    pub solve: SolveReport,
    pub interpolation: Vec<Solution>,
    pub baseline: Option<Baseline>,
    /// Sampled exact scheme followed by a fixed rotation completing a quarter turn.
    pub validation: Option<Validation>,
}

/// Circuit `R(pi/2 - theta) * [scheme for R(theta)]`, whose `Z` expectation on `|0>` is
/// zero for `X` and `Y` axes.
pub fn quarter_turn_circuit(
    lib: &GateLibrary,
    gamma: &[f64],
    axis: Axis,
    theta: f64,
    copies: usize,
) -> Result<Circuit> {
    let ptms = lib.ptms()?;
    let mut c = Circuit::new(lib.n_qubits())?;
    for _ in 0..copies {
        c = c.push_scheme(scheme_from_gamma(gamma, lib)?, ptms.clone())?;
    }
    c.push_fixed(rotation_gate(axis, FRAC_PI_2 - copies as f64 * theta))
}

pub fn run_pai(cfg: &PaiConfig) -> Result<PaiReport> {
    if !cfg.theta.is_finite() {
        return Err(Error::InvalidArgument("theta must be finite".into()));
    }
    let target = rotation_target(cfg.axis, cfg.theta);
    let library = pai_library(cfg.bits, cfg.axis)?.with_target(target.clone())?;
    let problem = build_single_target(&library, &target.ptm)?;
    problem.check_column_norms()?;
    let solve = solve_and_certify(&problem, &cfg.solve)?;
    let interpolation = match (&solve.unit_norm, &solve.exact) {
        (Some(a), Some(b)) if cfg.interpolation_steps >= 2 => (0..cfg.interpolation_steps)
            .map(|i| interpolate_solutions(&problem, a, b, i as f64 / (cfg.interpolation_steps - 1) as f64))
            .collect::<Result<_>>()?,
        _ => Vec::new(),
    };
    let baseline = if cfg.clifford_baseline {
        Some(baseline(clifford_only_library(target.clone())?, &target.ptm, &cfg.solve)?)
    } else {
        None
    };
    let validation = match &solve.exact {
        Some(s) if cfg.shots > 0 => {
            let c = quarter_turn_circuit(&library, &s.gamma, cfg.axis, cfg.theta, 1)?;
            let rho0 = DensityMatrix::basis_state(1, 0)?;
            let z = PauliObservable::pauli("Z")?;
            Some(validate_circuit(&c, &rho0, &z, cfg.shots, EstimatorMode::FullShot, cfg.seed)?)
        }
        _ => None,
    };
    Ok(PaiReport { diagnostics: problem.diagnostics(), library, problem, solve, interpolation, baseline, validation })
}

// ---------------------------------------------------------------------------
// Clifford+T

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordTConfig {
    pub theta: f64,
    pub t_budget: usize,
    pub epsilon: f64,
    pub max_entries: usize,
    /// Append `C * U_best` for the 23 non-identity Cliffords.
    pub clifford_recovery: bool,
    pub solve: SolveOptions,
    pub shots: u64,
    pub seed: u64,
}

impl CliffordTConfig {
    pub fn new(theta: f64, t_budget: usize, epsilon: f64) -> Self {
        CliffordTConfig {
            theta,
            t_budget,
            epsilon,
            max_entries: 20,
            clifford_recovery: true,
            solve: SolveOptions::default(),
            shots: 100_000,
            seed: 0,
        }
    }
}

/// Residual error `E = R_target^-1 U` of an entry as a rotation by `angle` about
/// the axis with polar angle `theta` and azimuth `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overrotation {
    pub angle: f64,
    pub theta: f64,
    pub phi: f64,
}

pub fn overrotation(entry: &PauliTransferMatrix, target: &PauliTransferMatrix) -> Result<Overrotation> {
    let e = target.transpose().compose(entry)?;
    let u = unitary_from_ptm_1q(&e)?;
    // u = w I - i (x X + y Y + z Z)
    let w = u[(0, 0)].re;
    let (x, y, z) = (-u[(1, 0)].im, u[(1, 0)].re, -u[(0, 0)].im);
    let s = if w < 0.0 { -1.0 } else { 1.0 };
    let (w, x, y, z) = (w * s, x * s, y * s, z * s);
    let n = (x * x + y * y + z * z).sqrt();
    let angle = 2.0 * n.atan2(w);
    if n < 1e-15 {
        return Ok(Overrotation { angle: 0.0, theta: 0.0, phi: 0.0 });
    }
    Ok(Overrotation { angle, theta: (z / n).clamp(-1.0, 1.0).acos(), phi: y.atan2(x) })
}

#[derive(Debug, Clone, Serialize)]
pub struct CliffordTReport {
    pub library: GateLibrary,
    #[serde(skip)]
    pub problem: DesignProblem,
    pub diagnostics: Diagnostics,
    pub solve: SolveReport,
    pub overrotations: Vec<Overrotation>,
    /// Entries with nonzero and zero exact coefficients.
    pub support: Vec<usize>,
    pub zero: Vec<usize>,
    pub baseline: Baseline,
    pub validation: Option<Validation>,
}

pub fn run_clifford_t(cfg: &CliffordTConfig) -> Result<CliffordTReport> {
    let seqs = enumerate_clifford_t(cfg.theta, cfg.t_budget, cfg.epsilon, cfg.max_entries)?;
    let target = seqs.target().cloned().expect("enumeration sets its target");
    let best = match &seqs.entries()[0].payload {
        Payload::Word(w) => w.clone(),
        _ => unreachable!("enumerated entries carry words"),
    };
    let recovery = clifford_recovery_entries(&best, "rec")?;
    let library = if cfg.clifford_recovery { seqs.extend(recovery[1..].to_vec())? } else { seqs };
    let problem = build_single_target(&library, &target.ptm)?;
    problem.check_column_norms()?;
    let solve = solve_and_certify(&problem, &cfg.solve)?;
    let overrotations = library.ptms()?.iter().map(|p| overrotation(p, &target.ptm)).collect::<Result<_>>()?;
    let (support, zero) = match &solve.exact {
        Some(s) => (0..library.len()).partition(|&l| s.gamma[l].abs() > crate::solver::ZERO_THRESHOLD),
        None => (Vec::new(), (0..library.len()).collect()),
    };
    let baseline = baseline(GateLibrary::new(recovery, Some(target.clone()), None)?, &target.ptm, &cfg.solve)?;
    let validation = match &solve.exact {
        Some(s) if cfg.shots > 0 => {
            // H R_z(theta) H is an X rotation, so the quarter-turn check applies after conjugation.
            let h = crate::library::word_ptm("H")?;
            let ptms = library.ptms()?;
            let c = Circuit::new(1)?
                .push_fixed(h.clone())?
                .push_scheme(scheme_from_gamma(&s.gamma, &library)?, ptms)?
                .push_fixed(h)?
                .push_fixed(rotation_gate(Axis::X, FRAC_PI_2 - cfg.theta))?;
            let rho0 = DensityMatrix::basis_state(1, 0)?;
            let z = PauliObservable::pauli("Z")?;
            Some(validate_circuit(&c, &rho0, &z, cfg.shots, EstimatorMode::FullShot, cfg.seed)?)
        }
        _ => None,
    };
    Ok(CliffordTReport {
        diagnostics: problem.diagnostics(),
        library,
        problem,
        solve,
        overrotations,
        support,
        zero,
        baseline,
        validation,
    })
}

// ---------------------------------------------------------------------------
// Control pulses

#[derive(Debug, Clone, PartialEq)]
pub struct ControlConfig {
    pub n_pulses: usize,
    pub q: usize,
    pub range: (f64, f64),
    pub band: Option<f64>,
    /// Also append `Rz(phi) U(d)` for each pulse. Phase-shifted copies alone share the
    /// Z-invariant part of their base pulse, which caps the rank of the design.
    pub frame_variants: bool,
    pub optimize: OptimizeOptions,
    pub solve: SolveOptions,
    pub shots: u64,
    pub n_times: usize,
    pub t_max: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig {
            n_pulses: 20,
            q: 7,
            range: (-2.0, 2.0),
            band: None,
            frame_variants: true,
            optimize: OptimizeOptions::default(),
            solve: SolveOptions::default(),
            shots: 10_000,
            n_times: 32,
            t_max: 4.0,
        }
    }
}

/// `q` evenly spaced offsets over `[lo, hi]`; the midpoint when `q = 1`.
pub fn offset_grid(q: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if q == 0 || !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::InvalidArgument(format!("bad offset grid q={q} over [{lo}, {hi}]")));
    }
    if q == 1 {
        return Ok(vec![0.5 * (lo + hi)]);
    }
    Ok((0..q).map(|i| lo + (hi - lo) * i as f64 / (q - 1) as f64).collect())
}

/// Evenly spaced sample times `0, t_max / n, ...` (`n` points).
pub fn sample_times(n: usize, t_max: f64) -> Vec<f64> {
    (0..n).map(|k| t_max * k as f64 / n.max(1) as f64).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct NmrValidation {
    #[serde(skip)]
    pub signals: NmrSignals,
    /// Per offset, the largest `|S_est - S_ideal| / SE` over time points.
    pub max_z: Vec<f64>,
    pub within_4se: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlReport {
    pub library: GateLibrary,
    #[serde(skip)]
    pub runs: Vec<OptimizedPulse>,
    #[serde(skip)]
    pub problem: DesignProblem,
    pub diagnostics: Diagnostics,
    pub solve: SolveReport,
    /// Per-offset Hilbert-Schmidt error of every library column.
    pub column_errors: Vec<Vec<f64>>,
    pub exact_errors: Option<Vec<f64>>,
    pub unit_norm_errors: Option<Vec<f64>>,
    pub nmr: Option<NmrValidation>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl ControlReport {
    /// Grid-averaged error of the best single library pulse.
    pub fn best_column_error(&self) -> f64 {
        self.column_errors.iter().map(|e| mean(e)).fold(f64::INFINITY, f64::min)
    }

    pub fn unit_norm_mean_error(&self) -> Option<f64> {
        self.unit_norm_errors.as_deref().map(mean)
    }

    /// Unit-norm solution strictly beats every individual library entry on average.
    pub fn unit_norm_dominates(&self) -> bool {
        self.unit_norm_mean_error().is_some_and(|e| e < self.best_column_error())
    }
}

/// NMR check of a scheme over `lib` against the ideal signal per offset.
pub fn validate_nmr(
    lib: &GateLibrary,
    gamma: &[f64],
    desired: &[PauliTransferMatrix],
    times: &[f64],
    shots: u64,
    seed: u64,
) -> Result<NmrValidation> {
    let offsets = lib.offsets();
    if desired.len() != offsets.len() {
        return Err(Error::DimensionMismatch { expected: offsets.len(), got: desired.len() });
    }
    let scheme = scheme_from_gamma(gamma, lib)?;
    let signals = nmr_estimate_signal(&scheme, lib, &offsets, times, shots, seed)?;
    let mut max_z = Vec::with_capacity(offsets.len());
    let mut ok = true;
    for (i, &d) in offsets.iter().enumerate() {
        let mut worst = 0.0f64;
        for (k, &t) in times.iter().enumerate() {
            let err = (signals.mean[i][k] - ideal_signal(&desired[i], d, t)?).norm();
            let se = signals.se[i][k];
            ok &= err <= 4.0 * se;
            worst = worst.max(if err == 0.0 { 0.0 } else { err / se });
        }
        max_z.push(worst);
    }
    Ok(NmrValidation { signals, max_z, within_4se: ok })
}

/// Target `Rx(pi/2)` over the grid, optionally applied only inside `|d| <= band`.
pub fn run_control(cfg: &ControlConfig) -> Result<ControlReport> {
    let offsets = offset_grid(cfg.q, cfg.range.0, cfg.range.1)?;
    let target = rotation_target(Axis::X, FRAC_PI_2);
    let (mut library, runs) = pulse_library(&target, &offsets, cfg.n_pulses, &cfg.optimize)?;
    if cfg.frame_variants {
        library = append_frame_variants(library)?;
    }
    let problem = match cfg.band {
        Some(b) => build_band_selective(&library, &target.ptm, b)?,
        None => build_broadband(&library, &target.ptm)?,
    };
    problem.check_column_norms()?;
    let solve = solve_and_certify(&problem, &cfg.solve)?;
    let column_errors = (0..library.len()).map(|j| problem.column_block_errors(j)).collect::<Result<_>>()?;
    let exact_errors = solve.exact.as_ref().map(|s| problem.block_errors(&s.gamma)).transpose()?;
    let unit_norm_errors = solve.unit_norm.as_ref().map(|s| problem.block_errors(&s.gamma)).transpose()?;
    let identity = PauliTransferMatrix::identity(1)?;
    let desired: Vec<PauliTransferMatrix> = offsets
        .iter()
        .map(|d| match cfg.band {
            Some(b) if d.abs() > b => identity.clone(),
            _ => target.ptm.clone(),
        })
        .collect();
    let nmr = match &solve.exact {
        Some(s) if cfg.shots > 0 && cfg.n_times > 0 => Some(validate_nmr(
            &library,
            &s.gamma,
            &desired,
            &sample_times(cfg.n_times, cfg.t_max),
            cfg.shots,
            cfg.optimize.seed,
        )?),
        _ => None,
    };
    Ok(ControlReport {
        diagnostics: problem.diagnostics(),
        library,
        runs,
        problem,
        solve,
        column_errors,
        exact_errors,
        unit_norm_errors,
        nmr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn curve_dominance_examples() {
        let a = vec![(0.0, 1.1), (0.5, 1.0), (1.0, 0.0)];
        let b = vec![(0.0, 1.5), (0.6, 1.0), (1.0, 0.0)];
        assert!(curve_dominates(&a, &b));
        assert!(!curve_dominates(&b, &a));
        assert!((l1_at_residual(&a, 0.2).unwrap() - 1.06).abs() < 1e-12);
        assert_eq!(l1_at_residual(&a, 1.5), Some(0.0));
        assert_eq!(l1_at_residual(&b, -1.0), None);
    }

    #[test]
    fn overrotation_of_exact_entry_is_zero_and_recovers_angle() {
        let t = rotation_gate(Axis::Z, 0.3);
        assert_eq!(overrotation(&t, &t).unwrap().angle, 0.0);
        let o = overrotation(&rotation_gate(Axis::Z, 0.5), &t).unwrap();
        assert!((o.angle - 0.2).abs() < 1e-12 && o.theta.abs() < 1e-12);
        let o = overrotation(&rotation_gate(Axis::X, 0.1).compose(&t).unwrap(), &t).unwrap();
        // R_t^-1 Rx R_t is a rotation by 0.1 about an equatorial axis.
        assert!((o.angle - 0.1).abs() < 1e-12);
        assert!((o.theta - FRAC_PI_2).abs() < 1e-12);
        assert!((o.phi + 0.3).abs() < 1e-12);
    }

    #[test]
    fn grids_and_times() {
        assert_eq!(offset_grid(1, -2.0, 2.0).unwrap(), vec![0.0]);
        assert_eq!(offset_grid(5, -2.0, 2.0).unwrap(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(offset_grid(0, 0.0, 1.0).is_err());
        assert_eq!(sample_times(4, 2.0), vec![0.0, 0.5, 1.0, 1.5]);
    }

    #[test]
    fn pai_on_notch_is_one_sparse() {
        let mut cfg = PaiConfig::new(7, Axis::X, notch_angle(7, 9));
        cfg.shots = 2000;
        let r = run_pai(&cfg).unwrap();
        let exact = r.solve.exact().unwrap();
        assert_eq!(exact.support(), vec![9]);
        assert!((exact.l1_norm - 1.0).abs() < 1e-12);
        assert!(r.solve.kkt_passed);
    }

    #[test]
    fn clifford_t_quarter_pi_is_t() {
        let mut cfg = CliffordTConfig::new(FRAC_PI_4, 1, 1e-10);
        cfg.shots = 1000;
        let r = run_clifford_t(&cfg).unwrap();
        let exact = r.solve.exact().unwrap();
        assert_eq!(exact.support().len(), 1);
        assert_eq!(r.library.entries()[exact.support()[0]].label, "T");
        assert!(r.validation.unwrap().within_4se);
    }

    #[test]
    fn single_offset_control_is_nearly_one_sparse() {
        let cfg = ControlConfig {
            n_pulses: 2,
            q: 1,
            optimize: OptimizeOptions { max_iterations: 300, ..OptimizeOptions::default() },
            shots: 500,
            n_times: 4,
            ..ControlConfig::default()
        };
        let r = run_control(&cfg).unwrap();
        let u = r.solve.unit_norm().unwrap();
        assert!(u.residual <= r.best_column_error() + 1e-12);
        assert_eq!(r.column_errors.len(), 14);
        assert!(r.library.labels().iter().any(|l| l.ends_with("-frame-180")));
    }
}
