//! Piecewise-constant single-qubit control pulses.
//!
//! Each segment evolves under `H(t_k, d) = d Z + Re[h_k] X + Im[h_k] Y` for a
//! duration `dt`; the total gate is `U(d) = U_n ... U_2 U_1` (later segments on
//! the left). The drift operator is the Pauli Z matrix.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GateLibrary, LibraryEntry, Payload, Provenance, Target};
use crate::error::{Error, Result};
use crate::hexf;
use crate::ptm::{unitary_from_ptm_1q, PauliTransferMatrix};
use crate::rng::derive_seed;

type M2 = Matrix2<Complex64>;

const CAP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPulse", into = "RawPulse")]
pub struct PulseSequence {
    amplitudes: Vec<Complex64>,
    dt: f64,
    cap: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPulse {
    #[serde(with = "hexf")]
    dt: f64,
    #[serde(with = "hexf")]
    cap: f64,
    #[serde(with = "hexf::vec")]
    re: Vec<f64>,
    #[serde(with = "hexf::vec")]
    im: Vec<f64>,
}

impl From<PulseSequence> for RawPulse {
    fn from(p: PulseSequence) -> Self {
        RawPulse {
            dt: p.dt,
            cap: p.cap,
            re: p.amplitudes.iter().map(|h| h.re).collect(),
            im: p.amplitudes.iter().map(|h| h.im).collect(),
        }
    }
}

impl TryFrom<RawPulse> for PulseSequence {
    type Error = Error;

    fn try_from(raw: RawPulse) -> Result<Self> {
        if raw.re.len() != raw.im.len() {
            return Err(Error::DimensionMismatch { expected: raw.re.len(), got: raw.im.len() });
        }
        let amps = raw.re.iter().zip(&raw.im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        PulseSequence::new(amps, raw.dt, raw.cap)
    }
}

impl PulseSequence {
    pub fn new(amplitudes: Vec<Complex64>, dt: f64, cap: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !(cap > 0.0 && cap.is_finite()) {
            return Err(Error::InvalidArgument("pulse dt and cap must be positive and finite".into()));
        }
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("pulse has no segments".into()));
        }
        if let Some(h) = amplitudes.iter().find(|h| !(h.norm() <= cap * (1.0 + CAP_SLACK))) {
            return Err(Error::InvalidArgument(format!("amplitude |{h}| exceeds cap {cap}")));
        }
        Ok(PulseSequence { amplitudes, dt, cap })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn n_steps(&self) -> usize {
        self.amplitudes.len()
    }

    /// Gate unitary `U(d)`.
    pub fn unitary(&self, d: f64) -> M2 {
        self.amplitudes
            .iter()
            .fold(M2::identity(), |acc, h| segment(h.re, h.im, d, self.dt).0 * acc)
    }
}

pub fn propagate_pulse(p: &PulseSequence, d: f64) -> PauliTransferMatrix {
    let u = p.unitary(d);
    let dm = nalgebra::DMatrix::from_fn(2, 2, |i, j| u[(i, j)]);
    PauliTransferMatrix::from_unitary(&dm).expect("segment products are unitary")
}

/// `h_k -> e^{i phi} h_k`; at every offset the gate becomes `Rz(phi) U Rz(-phi)`.
pub fn phase_shift_pulse(p: &PulseSequence, phi: f64) -> PulseSequence {
    let rot = Complex64::from_polar(1.0, phi);
    PulseSequence { amplitudes: p.amplitudes.iter().map(|h| h * rot).collect(), dt: p.dt, cap: p.cap }
}

fn pauli_x() -> M2 {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    M2::new(z, o, o, z)
}

fn pauli_y() -> M2 {
    let (i, z) = (Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0));
    M2::new(z, -i, i, z)
}

fn pauli_z() -> M2 {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    M2::new(o, z, z, -o)
}

/// `exp(-i dt (a X + b Y + d Z))` and its exact derivatives with respect to `a` and `b`.
fn segment(a: f64, b: f64, d: f64, dt: f64) -> (M2, M2, M2) {
    let v = [dt * a, dt * b, dt * d];
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let r = r2.sqrt();
    let (sinc, f) = if r < 1e-4 {
        // Series of sin r / r and (r cos r - sin r) / r^3.
        (1.0 - r2 / 6.0 + r2 * r2 / 120.0, -1.0 / 3.0 + r2 / 30.0 - r2 * r2 / 840.0)
    } else {
        (r.sin() / r, (r * r.cos() - r.sin()) / (r2 * r))
    };
    let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
    let id = M2::identity();
    let minus_i = Complex64::new(0.0, -1.0);
    let vs = x * Complex64::new(v[0], 0.0) + y * Complex64::new(v[1], 0.0) + z * Complex64::new(v[2], 0.0);
    let u = id * Complex64::new(r.cos(), 0.0) + vs * (minus_i * sinc);
    let dv = |j: usize, sigma: &M2| -> M2 {
        (id * Complex64::new(-sinc * v[j], 0.0) + (vs * Complex64::new(f * v[j], 0.0) + sigma * Complex64::new(sinc, 0.0)) * minus_i)
            * Complex64::new(dt, 0.0)
    };
    (u, dv(0, &x), dv(1, &y))
}

fn trace(m: &M2) -> Complex64 {
    m[(0, 0)] + m[(1, 1)]
}

/// Mean fidelity `mean_d |Tr[V^dagger U(d)]|` and its gradient with respect to
/// `(Re h_0, Im h_0, Re h_1, Im h_1, ...)`.
pub fn objective_and_gradient(p: &PulseSequence, target: &PauliTransferMatrix, offsets: &[f64]) -> Result<(f64, Vec<f64>)> {
    let v = unitary_from_ptm_1q(target)?;
    Ok(objective_with_unitary(&p.amplitudes, p.dt, &v, offsets, true))
}

fn objective_with_unitary(amps: &[Complex64], dt: f64, v: &M2, offsets: &[f64], want_grad: bool) -> (f64, Vec<f64>) {
    let n = amps.len();
    let vd = v.adjoint();
    let mut total = 0.0;
    let mut grad = vec![0.0; if want_grad { 2 * n } else { 0 }];
    for &d in offsets {
        let segs: Vec<(M2, M2, M2)> = amps.iter().map(|h| segment(h.re, h.im, d, dt)).collect();
        // prefix[k] = U_{k-1} ... U_1
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(M2::identity());
        for s in &segs {
            let next = s.0 * prefix.last().unwrap();
            prefix.push(next);
        }
        let g = trace(&(vd * prefix[n]));
        let fid = g.norm();
        total += fid;
        if !want_grad || fid == 0.0 {
            continue;
        }
        // back = V^dagger U_n ... U_{k+1}
        let mut back = vd;
        for k in (0..n).rev() {
            let right = prefix[k] * back;
            let dg_re = trace(&(right * segs[k].1));
            let dg_im = trace(&(right * segs[k].2));
            grad[2 * k] += (g.conj() * dg_re).re / fid;
            grad[2 * k + 1] += (g.conj() * dg_im).re / fid;
            back *= segs[k].0;
        }
    }
    let q = offsets.len() as f64;
    grad.iter_mut().for_each(|x| *x /= q);
    (total / q, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub n_steps: usize,
    pub dt: f64,
    pub cap: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions { n_steps: 32, dt: 0.1, cap: 6.0, max_iterations: 2000, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizedPulse {
    pub pulse: PulseSequence,
    pub mean_fidelity: f64,
    /// Mean of `1 - F(d) / 2^n` over the grid.
    pub mean_infidelity: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Objective after each accepted iteration.
    pub history: Vec<f64>,
}

fn project(x: &mut [f64], cap: f64) {
    for pair in x.chunks_mut(2) {
        let norm = (pair[0] * pair[0] + pair[1] * pair[1]).sqrt();
        if norm > cap {
            pair[0] *= cap / norm;
            pair[1] *= cap / norm;
        }
    }
}

fn to_amps(x: &[f64]) -> Vec<Complex64> {
    x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// Projected gradient ascent with backtracking line search on the mean fidelity
/// over `offsets`, from a seeded random start.
pub fn optimize_pulse(target: &PauliTransferMatrix, offsets: &[f64], opts: &OptimizeOptions) -> Result<OptimizedPulse> {
    if offsets.is_empty() {
        return Err(Error::InvalidArgument("offset grid is empty".into()));
    }
    if opts.n_steps == 0 || !(opts.cap > 0.0) || !(opts.dt > 0.0) {
        return Err(Error::InvalidArgument("n_steps, cap and dt must be positive".into()));
    }
    let v = unitary_from_ptm_1q(target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<f64> = (0..opts.n_steps)
        .flat_map(|_| {
            let r = 0.5 * opts.cap * rng.random::<f64>().sqrt();
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            [r * phi.cos(), r * phi.sin()]
        })
        .collect();
    project(&mut x, opts.cap);

    let eval = |x: &[f64], want_grad: bool| objective_with_unitary(&to_amps(x), opts.dt, &v, offsets, want_grad);
    let (mut value, mut grad) = eval(&x, true);
    let mut history = vec![value];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    let optimum = 2.0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let mut accepted = None;
        while step > 1e-14 {
            let mut cand: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            project(&mut cand, opts.cap);
            let ascent: f64 = cand.iter().zip(&x).zip(&grad).map(|((c, a), g)| (c - a) * g).sum();
            let (cv, _) = eval(&cand, false);
            if cv >= value + 1e-4 * ascent && cv >= value {
                accepted = Some((cand, cv, ascent));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, cv, ascent)) = accepted else {
            converged = true;
            break;
        };
        let gain = cv - value;
        x = cand;
        value = cv;
        history.push(value);
        if gain <= 1e-14 * value.max(1.0) || ascent <= 1e-20 || optimum - value <= 1e-13 {
            converged = true;
            break;
        }
        grad = eval(&x, true).1;
        step = (step * 2.0).min(1e3);
    }
    let pulse = PulseSequence::new(to_amps(&x), opts.dt, opts.cap)?;
    Ok(OptimizedPulse {
        pulse,
        mean_fidelity: value,
        mean_infidelity: 1.0 - value / optimum,
        converged,
        iterations,
        history,
    })
}

/// Phase shifts appended for every optimised pulse.
pub const APPENDED_PHASES: [f64; 3] =
    [std::f64::consts::FRAC_PI_2, std::f64::consts::PI, 3.0 * std::f64::consts::FRAC_PI_2];

/// Library of `n_pulses` independently seeded optimised pulses, each followed by
/// its phase-shifted variants at `pi/2`, `pi` and `3 pi/2`.
pub fn pulse_library(
    target: &Target,
    offsets: &[f64],
    n_pulses: usize,
    opts: &OptimizeOptions,
) -> Result<(GateLibrary, Vec<OptimizedPulse>)> {
    if n_pulses == 0 {
        return Err(Error::InvalidArgument("need at least one pulse".into()));
    }
    let runs: Vec<OptimizedPulse> = (0..n_pulses)
        .into_par_iter()
        .map(|i| {
            let o = OptimizeOptions { seed: derive_seed(opts.seed, i as u64), ..opts.clone() };
            optimize_pulse(&target.ptm, offsets, &o)
        })
        .collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(4 * n_pulses);
    for (i, run) in runs.iter().enumerate() {
        let base = format!("pulse-{i:03}");
        entries.push(LibraryEntry::new(base.clone(), Provenance::Pulse, Payload::Pulse(run.pulse.clone()))?);
        for (k, phase) in APPENDED_PHASES.iter().enumerate() {
            let pulse = phase_shift_pulse(&run.pulse, *phase);
            entries.push(LibraryEntry::new(
                format!("{base}-phase-{}", 90 * (k + 1)),
                Provenance::PulsePhaseShifted,
                Payload::PhaseShifted { base: base.clone(), phase: *phase, pulse },
            )?);
        }
    }
    let lib = GateLibrary::new(entries, Some(target.clone()), Some(offsets.to_vec()))?;
    Ok((lib, runs))
}

/// For every plain pulse entry, append `Rz(phi) U(d)` for each appended phase,
/// labelled `<base>-frame-<degrees>`.
pub fn append_frame_variants(lib: GateLibrary) -> Result<GateLibrary> {
    let mut more = Vec::new();
    for e in lib.entries() {
        if let Payload::Pulse(p) = &e.payload {
            for (k, phase) in APPENDED_PHASES.iter().enumerate() {
                more.push(LibraryEntry::new(
                    format!("{}-frame-{}", e.label, 90 * (k + 1)),
                    Provenance::PulseFrameShifted,
                    Payload::FrameShifted { base: e.label.clone(), phase: *phase, pulse: p.clone() },
                )?);
            }
        }
    }
    lib.extend(more)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Axis;
    use crate::ptm::{hs_distance, rotation_gate};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn random_pulse(seed: u64, n: usize, cap: f64) -> PulseSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..n)
            .map(|_| Complex64::new(rng.random_range(-0.7..0.7) * cap, rng.random_range(-0.7..0.7) * cap))
            .map(|h| if h.norm() > cap { h * (cap / h.norm()) } else { h })
            .collect();
        PulseSequence::new(amps, 0.1, cap).unwrap()
    }

    /// Scaling-and-squaring Taylor exponential of a 2x2 complex matrix.
    fn expm(a: &M2) -> M2 {
        let norm = a.iter().map(|z| z.norm()).sum::<f64>();
        let s = (norm.max(1e-300).log2().ceil() as i32 + 4).max(0);
        let scaled = a * Complex64::new(0.5f64.powi(s), 0.0);
        let mut term = M2::identity();
        let mut sum = M2::identity();
        for k in 1..30 {
            term = term * scaled * Complex64::new(1.0 / k as f64, 0.0);
            sum += term;
        }
        for _ in 0..s {
            sum = sum * sum;
        }
        sum
    }

    #[test]
    fn zero_pulse_is_identity() {
        let p = PulseSequence::new(vec![Complex64::new(0.0, 0.0); 5], 0.1, 6.0).unwrap();
        assert_eq!(propagate_pulse(&p, 0.0), PauliTransferMatrix::identity(1).unwrap());
    }

    #[test]
    fn single_segment_gives_rx_half_pi() {
        let dt = 0.2;
        let p = PulseSequence::new(vec![Complex64::new(FRAC_PI_4 / dt, 0.0)], dt, 6.0).unwrap();
        let d = hs_distance(&propagate_pulse(&p, 0.0), &rotation_gate(Axis::X, FRAC_PI_2)).unwrap();
        assert!(d < 1e-14, "{d}");
    }

    #[test]
    fn matches_dense_exponential_oracle() {
        for seed in 0..5 {
            let p = random_pulse(seed, 16, 6.0);
            for d in [-2.0, -0.3, 0.0, 1.7] {
                let mut u = M2::identity();
                for h in p.amplitudes() {
                    let gen = pauli_x() * Complex64::new(h.re, 0.0)
                        + pauli_y() * Complex64::new(h.im, 0.0)
                        + pauli_z() * Complex64::new(d, 0.0);
                    u = expm(&(gen * Complex64::new(0.0, -p.dt()))) * u;
                }
                let oracle = PauliTransferMatrix::from_unitary(&nalgebra::DMatrix::from_fn(2, 2, |i, j| u[(i, j)])).unwrap();
                let diff = hs_distance(&propagate_pulse(&p, d), &oracle).unwrap();
                assert!(diff < 1e-10, "seed {seed} d {d}: {diff:e}");
            }
        }
    }

    #[test]
    fn cap_is_validated() {
        assert!(PulseSequence::new(vec![Complex64::new(6.5, 0.0)], 0.1, 6.0).is_err());
        assert!(PulseSequence::new(vec![Complex64::new(1.0, 0.0)], 0.0, 6.0).is_err());
    }

    #[test]
    fn phase_shift_examples() {
        let p = random_pulse(3, 8, 6.0);
        assert_eq!(phase_shift_pulse(&p, 0.0), p);
        let neg = phase_shift_pulse(&p, PI);
        for (a, b) in neg.amplitudes().iter().zip(p.amplitudes()) {
            assert!((a + b).norm() < 1e-14);
        }
        // Conjugation identity, at zero and nonzero offsets.
        let phi = 0.83;
        let shifted = phase_shift_pulse(&p, phi);
        for d in [0.0, 1.3] {
            let expected = rotation_gate(Axis::Z, phi)
                .compose(&propagate_pulse(&p, d))
                .unwrap()
                .compose(&rotation_gate(Axis::Z, -phi))
                .unwrap();
            assert!(hs_distance(&propagate_pulse(&shifted, d), &expected).unwrap() < 1e-12);
        }
        // Rx(pi/2) pulse shifted by pi/2 generates Ry(pi/2).
        let dt = 0.2;
        let rx = PulseSequence::new(vec![Complex64::new(FRAC_PI_4 / dt, 0.0)], dt, 6.0).unwrap();
        let ry = propagate_pulse(&phase_shift_pulse(&rx, FRAC_PI_2), 0.0);
        assert!(hs_distance(&ry, &rotation_gate(Axis::Y, FRAC_PI_2)).unwrap() < 1e-14);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let target = rotation_gate(Axis::X, FRAC_PI_2);
        let offsets = [-2.0, -1.0, 0.0, 0.5, 2.0];
        for seed in 0..4 {
            let p = random_pulse(100 + seed, 12, 6.0);
            let (_, g) = objective_and_gradient(&p, &target, &offsets).unwrap();
            let mut x: Vec<f64> = p.amplitudes().iter().flat_map(|h| [h.re, h.im]).collect();
            let v = unitary_from_ptm_1q(&target).unwrap();
            let h = 1e-6;
            let fd: Vec<f64> = (0..x.len())
                .map(|k| {
                    let orig = x[k];
                    x[k] = orig + h;
                    let up = objective_with_unitary(&to_amps(&x), p.dt(), &v, &offsets, false).0;
                    x[k] = orig - h;
                    let down = objective_with_unitary(&to_amps(&x), p.dt(), &v, &offsets, false).0;
                    x[k] = orig;
                    (up - down) / (2.0 * h)
                })
                .collect();
            let num: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = fd.iter().map(|b| b * b).sum::<f64>().sqrt();
            assert!(num / den < 1e-4, "relative gradient error {}", num / den);
        }
    }

    #[test]
    fn single_segment_optimum() {
        let target = rotation_gate(Axis::X, FRAC_PI_2);
        let opts = OptimizeOptions { n_steps: 1, dt: 0.25, cap: 6.0, max_iterations: 2000, seed: 7 };
        let run = optimize_pulse(&target, &[0.0], &opts).unwrap();
        assert!((run.mean_fidelity - 2.0).abs() < 1e-6, "{}", run.mean_fidelity);
        let h = run.pulse.amplitudes()[0];
        assert!((h.norm() * opts.dt - FRAC_PI_4).abs() < 1e-3, "{h}");
        assert!(h.re > 0.0 && h.im.abs() < 1e-2);
    }

    #[test]
    fn objective_history_is_monotone_and_deterministic() {
        let target = rotation_gate(Axis::X, FRAC_PI_2);
        let opts = OptimizeOptions { n_steps: 16, max_iterations: 200, seed: 11, ..Default::default() };
        let a = optimize_pulse(&target, &[-1.0, 0.0, 1.0], &opts).unwrap();
        assert!(a.history.windows(2).all(|w| w[1] >= w[0]));
        assert!(a.pulse.amplitudes().iter().all(|h| h.norm() <= opts.cap * (1.0 + 1e-12)));
        let b = optimize_pulse(&target, &[-1.0, 0.0, 1.0], &opts).unwrap();
        assert_eq!(a.pulse, b.pulse);
    }

    #[test]
    fn different_seeds_reach_different_optima() {
        let target = rotation_gate(Axis::X, FRAC_PI_2);
        let offsets = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let a = optimize_pulse(&target, &offsets, &OptimizeOptions { seed: 1, ..Default::default() }).unwrap();
        let b = optimize_pulse(&target, &offsets, &OptimizeOptions { seed: 2, ..Default::default() }).unwrap();
        let d = hs_distance(&propagate_pulse(&a.pulse, 1.0), &propagate_pulse(&b.pulse, 1.0)).unwrap();
        assert!(d > 1e-6, "{d}");
    }

    #[test]
    fn frame_variants_apply_z_after_the_pulse() {
        let p = random_pulse(4, 6, 6.0);
        let e = LibraryEntry::new("p", Provenance::Pulse, Payload::Pulse(p.clone())).unwrap();
        let w = LibraryEntry::new("w", Provenance::Clifford, Payload::Word("H".into())).unwrap();
        let lib = GateLibrary::new(vec![e, w], None, Some(vec![-1.0, 0.5])).unwrap();
        let lib = append_frame_variants(lib).unwrap();
        assert_eq!(lib.labels(), vec!["p", "w", "p-frame-90", "p-frame-180", "p-frame-270"]);
        for (k, phase) in [FRAC_PI_2, PI, 1.5 * PI].iter().enumerate() {
            let entry = &lib.entries()[2 + k];
            assert!(entry.is_offset_dependent());
            for d in [-1.0, 0.5] {
                let want = rotation_gate(Axis::Z, *phase).compose(&propagate_pulse(&p, d)).unwrap();
                assert!(hs_distance(&entry.ptm_at(d).unwrap(), &want).unwrap() < 1e-12);
            }
        }
    }
}
