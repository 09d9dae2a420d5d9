//! Unbiased estimation of `Tr[O C(rho)]` for circuits mixing fixed and
//! probabilistically sampled gates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{blocks, Moments};
use super::{variance_factor, QuasiprobabilityScheme};
use crate::error::{Error, Result};
use crate::pauli::{string_matrices, PauliObservable};
use crate::ptm::{DensityMatrix, PauliTransferMatrix};
use crate::rng::slot_rng;

#[derive(Debug, Clone)]
pub enum Slot {
    Fixed(PauliTransferMatrix),
    Probabilistic { scheme: QuasiprobabilityScheme, ptms: Vec<PauliTransferMatrix> },
}

/// Gates applied in order, slot 0 first.
#[derive(Debug, Clone)]
pub struct Circuit {
    n_qubits: usize,
    slots: Vec<Slot>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        crate::pauli::check_qubits(n_qubits)?;
        Ok(Circuit { n_qubits, slots: Vec::new() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn push_fixed(mut self, ptm: PauliTransferMatrix) -> Result<Self> {
        self.check(&ptm)?;
        self.slots.push(Slot::Fixed(ptm));
        Ok(self)
    }

    pub fn push_scheme(mut self, scheme: QuasiprobabilityScheme, ptms: Vec<PauliTransferMatrix>) -> Result<Self> {
        if ptms.len() != scheme.len() {
            return Err(Error::DimensionMismatch { expected: scheme.len(), got: ptms.len() });
        }
        for p in &ptms {
            self.check(p)?;
        }
        self.slots.push(Slot::Probabilistic { scheme, ptms });
        Ok(self)
    }

    fn check(&self, p: &PauliTransferMatrix) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, got: p.n_qubits() });
        }
        Ok(())
    }

    /// `|gamma|_1` of every probabilistic slot.
    pub fn norms(&self) -> Vec<f64> {
        self.slots
            .iter()
            .filter_map(|s| match s {
                Slot::Probabilistic { scheme, .. } => Some(scheme.norm()),
                Slot::Fixed(_) => None,
            })
            .collect()
    }

    /// Expectation of the averaged circuit, computed without sampling.
    pub fn exact_expectation(&self, rho0: &DensityMatrix, obs: &PauliObservable) -> Result<f64> {
        self.check_inputs(rho0, obs)?;
        let mut v = DVector::from_vec(rho0.pauli_vector());
        for s in &self.slots {
            let m = match s {
                Slot::Fixed(p) => p.clone(),
                Slot::Probabilistic { scheme, ptms } => scheme.mean_ptm(ptms)?,
            };
            v = m.matrix() * v;
        }
        Ok(DVector::from_vec(obs.vector()).dot(&v))
    }

    fn check_inputs(&self, rho0: &DensityMatrix, obs: &PauliObservable) -> Result<()> {
        if rho0.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, got: rho0.n_qubits() });
        }
        if obs.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, got: obs.n_qubits() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    /// Shot value is the weight times the exact expectation of the sampled circuit.
    AnalyticWeight,
    /// Shot value is the weight times a sampled eigenvalue of the observable.
    FullShot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub mean: f64,
    pub standard_error: f64,
    /// Unbiased sample variance of the single-shot values.
    pub variance: f64,
    pub shots: u64,
    /// `max_k |gamma_k|_1^(2 nu) |O|^2`.
    pub variance_bound: f64,
    pub rng_seed: u64,
    pub mode: EstimatorMode,
}

impl EstimatorResult {
    /// Second central moment of the single-shot values (divides by `n`, not `n - 1`).
    /// Unlike the unbiased variance this never exceeds `max |x|^2`.
    pub fn population_variance(&self) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        self.variance * (self.shots - 1) as f64 / self.shots as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&serde_json::json!({
            "mean": self.mean,
            "se": self.standard_error,
            "shots": self.shots,
            "bound": self.variance_bound,
            "seed": self.rng_seed,
        }))?)
    }
}

/// Projective measurement of `O`: eigenvalues and `<e_b| P_i / sqrt(2^n) |e_b>`.
struct Measurement {
    eigenvalues: Vec<f64>,
    overlaps: DMatrix<f64>,
}

impl Measurement {
    fn new(obs: &PauliObservable) -> Measurement {
        let n = obs.n_qubits();
        let eig = obs.matrix().symmetric_eigen();
        let scale = 1.0 / ((1usize << n) as f64).sqrt();
        let paulis = string_matrices(n);
        let dim = eig.eigenvalues.len();
        let overlaps = DMatrix::from_fn(dim, paulis.len(), |b, i| {
            let e = eig.eigenvectors.column(b);
            let pe = &paulis[i] * e;
            let z: Complex64 = e.iter().zip(pe.iter()).map(|(a, b)| a.conj() * b).sum();
            z.re * scale
        });
        Measurement { eigenvalues: eig.eigenvalues.iter().copied().collect(), overlaps }
    }

    fn sample<R: Rng>(&self, v: &DVector<f64>, rng: &mut R) -> f64 {
        let probs = &self.overlaps * v;
        let total: f64 = probs.iter().map(|p| p.max(0.0)).sum();
        let mut u = rng.random::<f64>() * total;
        for (b, p) in probs.iter().enumerate() {
            u -= p.max(0.0);
            if u < 0.0 {
                return self.eigenvalues[b];
            }
        }
        let last = probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1);
        self.eigenvalues[last]
    }
}

/// Monte Carlo estimate with an independent random stream per `(shot, slot)`;
/// the measurement draw uses the stream slot after the last gate.
pub fn estimate_expectation(
    circuit: &Circuit,
    rho0: &DensityMatrix,
    obs: &PauliObservable,
    shots: u64,
    mode: EstimatorMode,
    seed: u64,
) -> Result<EstimatorResult> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    circuit.check_inputs(rho0, obs)?;
    let v0 = DVector::from_vec(rho0.pauli_vector());
    let o = DVector::from_vec(obs.vector());
    let mats: Vec<Vec<DMatrix<f64>>> = circuit
        .slots
        .iter()
        .map(|s| match s {
            Slot::Fixed(p) => vec![p.matrix().clone()],
            Slot::Probabilistic { ptms, .. } => ptms.iter().map(|p| p.matrix().clone()).collect(),
        })
        .collect();
    let measurement = (mode == EstimatorMode::FullShot).then(|| Measurement::new(obs));
    let n_slots = circuit.slots.len();

    let shot_value = |shot: u64| -> f64 {
        let mut v = v0.clone();
        let mut weight = 1.0;
        for (k, slot) in circuit.slots.iter().enumerate() {
            match slot {
                Slot::Fixed(_) => v = &mats[k][0] * v,
                Slot::Probabilistic { scheme, .. } => {
                    let (l, w) = scheme.sample(&mut slot_rng(seed, shot, k));
                    v = &mats[k][l] * v;
                    weight *= w;
                }
            }
        }
        match &measurement {
            None => weight * o.dot(&v),
            Some(m) => weight * m.sample(&v, &mut slot_rng(seed, shot, n_slots)),
        }
    };
    let ranges: Vec<_> = blocks(shots).collect();
    let moments = ranges
        .into_par_iter()
        .map(|r| {
            let mut m = Moments::default();
            r.for_each(|shot| m.push(shot_value(shot)));
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::default(), Moments::merge);
    Ok(EstimatorResult {
        mean: moments.mean,
        standard_error: moments.standard_error(),
        variance: moments.variance(),
        shots,
        variance_bound: variance_factor(&circuit.norms()) * obs.norm_inf().powi(2),
        rng_seed: seed,
        mode,
    })
}
