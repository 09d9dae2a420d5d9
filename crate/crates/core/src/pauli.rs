//! Pauli operators, Pauli-string indexing and Pauli-basis observables.
//!
//! Pauli strings on `n` qubits are indexed lexicographically over `(I, X, Y, Z)^n`
//! with qubit 0 as the most significant base-4 digit, so index 0 is the all-identity
//! string. Tensor products follow the same convention: qubit 0 is the left factor.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Pauli {
        Self::ALL[i & 3]
    }

    pub fn matrix(self) -> DMatrix<Complex64> {
        let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
        match self {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        ['I', 'X', 'Y', 'Z'][self.index()]
    }
}

/// Rotation axis for single-qubit rotation gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "X" => Ok(Axis::X),
            "Y" => Ok(Axis::Y),
            "Z" => Ok(Axis::Z),
            _ => Err(Error::InvalidArgument(format!("unknown axis `{s}`"))),
        }
    }
}

pub fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::QubitCount(n_qubits));
    }
    Ok(())
}

/// Number of Pauli strings on `n_qubits` qubits.
pub fn basis_len(n_qubits: usize) -> usize {
    1 << (2 * n_qubits)
}

/// Decompose a Pauli-string index into its per-qubit factors.
pub fn string_of(index: usize, n_qubits: usize) -> Vec<Pauli> {
    (0..n_qubits)
        .map(|k| Pauli::from_index(index >> (2 * (n_qubits - 1 - k))))
        .collect()
}

pub fn index_of(string: &[Pauli]) -> usize {
    string.iter().fold(0, |acc, p| (acc << 2) | p.index())
}

pub fn label_of(index: usize, n_qubits: usize) -> String {
    string_of(index, n_qubits).into_iter().map(Pauli::as_char).collect()
}

pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// Unnormalised Pauli-string matrix `P_s`.
pub fn string_matrix(index: usize, n_qubits: usize) -> DMatrix<Complex64> {
    string_of(index, n_qubits)
        .into_iter()
        .map(Pauli::matrix)
        .reduce(|acc, m| kron(&acc, &m))
        .expect("n_qubits >= 1")
}

/// All Pauli-string matrices for `n_qubits`, in basis order.
pub fn string_matrices(n_qubits: usize) -> Vec<DMatrix<Complex64>> {
    (0..basis_len(n_qubits))
        .map(|i| string_matrix(i, n_qubits))
        .collect()
}

/// A Hermitian observable `O = sum_s c_s P_s` with real coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliObservable {
    n_qubits: usize,
    terms: Vec<(String, f64)>,
    norm_inf: f64,
}

impl PauliObservable {
    pub fn new(n_qubits: usize, terms: &[(&str, f64)]) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut owned = Vec::with_capacity(terms.len());
        for (s, c) in terms {
            if s.chars().count() != n_qubits || s.chars().any(|ch| Pauli::from_char(ch).is_none()) {
                return Err(Error::InvalidArgument(format!(
                    "`{s}` is not a {n_qubits}-qubit Pauli string"
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidArgument("non-finite observable coefficient".into()));
            }
            owned.push((s.to_ascii_uppercase(), *c));
        }
        let mut obs = PauliObservable { n_qubits, terms: owned, norm_inf: 0.0 };
        let eig = obs.matrix().symmetric_eigen();
        obs.norm_inf = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(obs)
    }

    /// Single Pauli-string observable such as `"Z"` or `"XZ"`.
    pub fn pauli(string: &str) -> Result<Self> {
        Self::new(string.chars().count(), &[(string, 1.0)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(String, f64)] {
        &self.terms
    }

    /// Operator norm `||O||_inf`.
    pub fn norm_inf(&self) -> f64 {
        self.norm_inf
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let d = 1 << self.n_qubits;
        let mut m = DMatrix::zeros(d, d);
        for (s, c) in &self.terms {
            let idx = index_of(&s.chars().filter_map(Pauli::from_char).collect::<Vec<_>>());
            m += string_matrix(idx, self.n_qubits) * Complex64::new(*c, 0.0);
        }
        m
    }

    /// Coefficients in the orthonormal basis `P_s / sqrt(2^n)`, so that
    /// `Tr[O rho] = <vec(O), vec(rho)>`.
    pub fn vector(&self) -> Vec<f64> {
        let scale = ((1usize << self.n_qubits) as f64).sqrt();
        let mut v = vec![0.0; basis_len(self.n_qubits)];
        for (s, c) in &self.terms {
            let idx = index_of(&s.chars().filter_map(Pauli::from_char).collect::<Vec<_>>());
            v[idx] += c * scale;
        }
        v
    }
}
