//! Sampling schemes built from quasiprobability coefficients and the Monte Carlo
//! estimators that use them.

mod estimator;
mod nmr;
mod stats;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::library::GateLibrary;
use crate::ptm::PauliTransferMatrix;

pub use estimator::{estimate_expectation, Circuit, EstimatorMode, EstimatorResult, Slot};
pub use nmr::{ideal_signal, nmr_estimate_signal, NmrSignals};

/// Draw `l` with probability `|gamma_l| / |gamma|_1` and weight the outcome by
/// `|gamma|_1 sign(gamma_l)`.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiprobabilityScheme {
    gamma: Vec<f64>,
    probabilities: Vec<f64>,
    signs: Vec<f64>,
    norm: f64,
    labels: Vec<String>,
    #[serde(skip)]
    dist: WeightedIndex<f64>,
}

impl QuasiprobabilityScheme {
    pub fn new(gamma: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if gamma.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), got: gamma.len() });
        }
        if gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        let norm: f64 = gamma.iter().map(|g| g.abs()).sum();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("coefficient vector is zero".into()));
        }
        let probabilities: Vec<f64> = gamma.iter().map(|g| g.abs() / norm).collect();
        let signs = gamma.iter().map(|&g| if g > 0.0 { 1.0 } else if g < 0.0 { -1.0 } else { 0.0 }).collect();
        let dist = WeightedIndex::new(&probabilities).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(QuasiprobabilityScheme { gamma, probabilities, signs, norm, labels, dist })
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn weight(&self, l: usize) -> f64 {
        self.norm * self.signs[l]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let l = self.dist.sample(rng);
        (l, self.weight(l))
    }

    /// `sum_l p(l) weight(l) U_l`, which equals `sum_l gamma_l U_l`.
    pub fn mean_ptm(&self, ptms: &[PauliTransferMatrix]) -> Result<PauliTransferMatrix> {
        if ptms.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: ptms.len() });
        }
        let mut m = nalgebra::DMatrix::zeros(ptms[0].dim(), ptms[0].dim());
        for (l, p) in ptms.iter().enumerate() {
            if self.probabilities[l] > 0.0 {
                m += p.matrix() * (self.probabilities[l] * self.weight(l));
            }
        }
        PauliTransferMatrix::from_matrix(ptms[0].n_qubits(), m)
    }
}

pub fn scheme_from_gamma(gamma: &[f64], lib: &GateLibrary) -> Result<QuasiprobabilityScheme> {
    if gamma.len() != lib.len() {
        return Err(Error::DimensionMismatch { expected: lib.len(), got: gamma.len() });
    }
    QuasiprobabilityScheme::new(gamma.to_vec(), lib.labels())
}

pub fn sample_gate<R: Rng + ?Sized>(s: &QuasiprobabilityScheme, rng: &mut R) -> (usize, f64) {
    s.sample(rng)
}

/// Shots sufficient for precision `epsilon`: `epsilon^-2 |O|^2 max_k |gamma_k|_1^(2 nu)`.
pub fn shot_bound(epsilon: f64, norms: &[f64], o_norm: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    Ok(o_norm * o_norm * variance_factor(norms) / (epsilon * epsilon))
}

/// `max_k |gamma_k|_1^(2 nu)` for a circuit of `nu` probabilistic gates.
pub fn variance_factor(norms: &[f64]) -> f64 {
    let max = norms.iter().copied().fold(0.0f64, f64::max);
    max.powi(2 * norms.len() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::slot_rng;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("g{i}")).collect()
    }

    #[test]
    fn scheme_examples() {
        let s = QuasiprobabilityScheme::new(vec![0.0, 1.0, 0.0], labels(3)).unwrap();
        assert_eq!(s.probabilities(), &[0.0, 1.0, 0.0]);
        assert_eq!(s.norm(), 1.0);
        let mut rng = slot_rng(0, 0, 0);
        for _ in 0..100 {
            assert_eq!(s.sample(&mut rng), (1, 1.0));
        }
        let s = QuasiprobabilityScheme::new(vec![0.5, 0.5], labels(2)).unwrap();
        assert_eq!((s.probabilities(), s.norm()), (&[0.5, 0.5][..], 1.0));
        let s = QuasiprobabilityScheme::new(vec![1.5, -0.5], labels(2)).unwrap();
        assert_eq!(s.probabilities(), &[0.75, 0.25]);
        assert_eq!(s.norm(), 2.0);
        assert_eq!(s.signs(), &[1.0, -1.0]);
        assert_eq!((s.weight(0), s.weight(1)), (2.0, -2.0));
        assert!(QuasiprobabilityScheme::new(vec![0.0, 0.0], labels(2)).is_err());
    }

    #[test]
    fn empirical_frequencies_match() {
        let gamma = vec![0.7, -0.2, 0.0, 0.4, -0.05];
        let s = QuasiprobabilityScheme::new(gamma, labels(5)).unwrap();
        let n = 100_000;
        let mut counts = [0usize; 5];
        for shot in 0..n {
            counts[s.sample(&mut slot_rng(17, shot, 0)).0] += 1;
        }
        assert_eq!(counts[2], 0);
        for (c, p) in counts.iter().zip(s.probabilities()) {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - n as f64 * p).abs() <= 4.0 * sigma + 1e-9, "{c} vs {p}");
        }
    }

    #[test]
    fn weighted_average_reproduces_combination() {
        use crate::pauli::Axis;
        use crate::ptm::rotation_gate;
        let ptms: Vec<_> = [0.1, 0.9, 2.0].iter().map(|&a| rotation_gate(Axis::X, a)).collect();
        let gamma = vec![0.6, -0.3, 0.7];
        let s = QuasiprobabilityScheme::new(gamma.clone(), labels(3)).unwrap();
        let mean = s.mean_ptm(&ptms).unwrap();
        let mut direct = nalgebra::DMatrix::zeros(4, 4);
        for (g, p) in gamma.iter().zip(&ptms) {
            direct += p.matrix() * *g;
        }
        assert!((mean.matrix() - direct).abs().max() < 1e-15);
    }

    #[test]
    fn shot_bound_examples() {
        assert!((shot_bound(0.1, &[1.0], 1.0).unwrap() - 100.0).abs() < 1e-9);
        let n = shot_bound(0.01, &[1.1; 10], 1.0).unwrap();
        assert!((n - 1e4 * 1.1f64.powi(20)).abs() < 1e-6);
        assert_eq!(n.round(), 67275.0);
        let one = variance_factor(&[1.3; 3]);
        assert!((variance_factor(&[1.3; 6]) - one * one).abs() < 1e-12);
        assert!(shot_bound(0.0, &[1.0], 1.0).is_err());
    }
}
