//! Pauli transfer matrices of few-qubit unitary channels.
//!
//! Vectors live in the orthonormal basis `P_s / sqrt(2^n)`, so the Euclidean inner
//! product of two vectorised operators equals their Hilbert-Schmidt inner product.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{self, basis_len, check_qubits, Axis};

pub const UNITARITY_TOL: f64 = 1e-10;
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPtm", into = "RawPtm")]
pub struct PauliTransferMatrix {
    n_qubits: usize,
    m: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPtm {
    n_qubits: usize,
    entries: Vec<f64>,
}

impl From<PauliTransferMatrix> for RawPtm {
    fn from(p: PauliTransferMatrix) -> Self {
        RawPtm { n_qubits: p.n_qubits, entries: p.row_major() }
    }
}

impl TryFrom<RawPtm> for PauliTransferMatrix {
    type Error = Error;

    fn try_from(raw: RawPtm) -> Result<Self> {
        PauliTransferMatrix::from_row_major(raw.n_qubits, &raw.entries)
    }
}

impl PauliTransferMatrix {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let d = basis_len(n_qubits);
        Ok(PauliTransferMatrix { n_qubits, m: DMatrix::identity(d, d) })
    }

    /// PTM of the channel `rho -> U rho U^dagger`, with entries
    /// `M_ij = Tr[P_i U P_j U^dagger] / 2^n`.
    pub fn from_unitary(u: &DMatrix<Complex64>) -> Result<Self> {
        let dim = u.nrows();
        if u.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::DimensionMismatch { expected: dim.next_power_of_two().max(2), got: u.ncols() });
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let deviation = unitarity_deviation(u);
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }

        let paulis = pauli::string_matrices(n_qubits);
        let ud = u.adjoint();
        let images: Vec<DMatrix<Complex64>> = paulis.iter().map(|p| u * p * &ud).collect();
        let d = paulis.len();
        let scale = 1.0 / dim as f64;
        let mut m = DMatrix::zeros(d, d);
        for (j, img) in images.iter().enumerate() {
            for (i, p) in paulis.iter().enumerate() {
                m[(i, j)] = trace_product(p, img).re * scale;
            }
        }
        Ok(PauliTransferMatrix { n_qubits, m })
    }

    pub fn from_matrix(n_qubits: usize, m: DMatrix<f64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        let d = basis_len(n_qubits);
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: m.nrows() });
        }
        Ok(PauliTransferMatrix { n_qubits, m })
    }

    pub fn from_row_major(n_qubits: usize, entries: &[f64]) -> Result<Self> {
        check_qubits(n_qubits)?;
        let d = basis_len(n_qubits);
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: entries.len() });
        }
        Ok(PauliTransferMatrix { n_qubits, m: DMatrix::from_row_slice(d, d, entries) })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.m[(row, col)]
    }

    pub fn row_major(&self) -> Vec<f64> {
        self.m.transpose().as_slice().to_vec()
    }

    /// Column-stacked vectorisation.
    pub fn vectorize(&self) -> VectorizedProcess {
        VectorizedProcess { data: self.m.as_slice().to_vec(), block: self.m.len() }
    }

    /// `self * other`: `other` is applied first.
    pub fn compose(&self, other: &PauliTransferMatrix) -> Result<PauliTransferMatrix> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(PauliTransferMatrix { n_qubits: self.n_qubits, m: &self.m * &other.m })
    }

    pub fn transpose(&self) -> PauliTransferMatrix {
        PauliTransferMatrix { n_qubits: self.n_qubits, m: self.m.transpose() }
    }

    /// Act on a Pauli-basis state vector.
    pub fn apply_vector(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for j in 0..d {
            let vj = v[j];
            if vj == 0.0 {
                continue;
            }
            let col = self.m.column(j);
            for i in 0..d {
                out[i] += col[i] * vj;
            }
        }
        out
    }

    /// Worst violation of the unitary-channel invariants: first row `(1, 0, ..., 0)`,
    /// orthogonality and entries bounded by one.
    pub fn invariant_violation(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..d {
            let expected = if j == 0 { 1.0 } else { 0.0 };
            worst = worst.max((self.m[(0, j)] - expected).abs());
        }
        let mtm = self.m.transpose() * &self.m;
        for i in 0..d {
            for j in 0..d {
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((mtm[(i, j)] - expected).abs());
            }
        }
        for v in self.m.iter() {
            worst = worst.max(v.abs() - 1.0);
        }
        worst
    }

    /// Apply the channel to a density matrix.
    pub fn apply_to_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << self.n_qubits, got: rho.dim() });
        }
        let v = self.apply_vector(&rho.pauli_vector());
        Ok(DensityMatrix { n_qubits: self.n_qubits, m: operator_from_pauli_vector(&v, self.n_qubits) })
    }
}

/// Single-qubit rotation `exp(-i angle P / 2)` as a PTM.
pub fn rotation_gate(axis: Axis, angle: f64) -> PauliTransferMatrix {
    // Closed form: rotation by `angle` about `axis` on the Bloch-vector block.
    let (c, s) = (angle.cos(), angle.sin());
    let mut m = DMatrix::identity(4, 4);
    let (a, b) = match axis {
        Axis::X => (2, 3),
        Axis::Y => (3, 1),
        Axis::Z => (1, 2),
    };
    m[(a, a)] = c;
    m[(a, b)] = -s;
    m[(b, a)] = s;
    m[(b, b)] = c;
    PauliTransferMatrix { n_qubits: 1, m }
}

pub fn rotation_unitary(axis: Axis, angle: f64) -> DMatrix<Complex64> {
    let p = axis.pauli().matrix();
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    DMatrix::identity(2, 2) * Complex64::new(c, 0.0) - p * Complex64::new(0.0, s)
}

pub fn hadamard() -> DMatrix<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(2, 2, &[h, h, h, -h]).map(|x| Complex64::new(x, 0.0))
}

pub fn phase_s() -> DMatrix<Complex64> {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    DMatrix::from_row_slice(2, 2, &[o, z, z, Complex64::new(0.0, 1.0)])
}

pub fn phase_t() -> DMatrix<Complex64> {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    DMatrix::from_row_slice(2, 2, &[o, z, z, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)])
}

pub fn unitarity_deviation(u: &DMatrix<Complex64>) -> f64 {
    let prod = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - Complex64::new(expected, 0.0)).norm());
        }
    }
    worst
}

/// SU(2) representative of a single-qubit unital PTM, recovered from its
/// rotation block as a unit quaternion `U = w I - i (x X + y Y + z Z)`.
pub fn unitary_from_ptm_1q(ptm: &PauliTransferMatrix) -> Result<nalgebra::Matrix2<Complex64>> {
    if ptm.n_qubits != 1 {
        return Err(Error::QubitCount(ptm.n_qubits));
    }
    let deviation = ptm.invariant_violation();
    if deviation > 1e-8 {
        return Err(Error::NotUnitary { deviation });
    }
    let block = ptm.m.view((1, 1), (3, 3)).into_owned();
    if block.determinant() < 0.0 {
        return Err(Error::NotUnitary { deviation: 2.0 });
    }
    let r = |i: usize, j: usize| ptm.m[(i + 1, j + 1)];
    let tr = r(0, 0) + r(1, 1) + r(2, 2);
    let diag = [r(0, 0), r(1, 1), r(2, 2)];
    let (w, x, y, z);
    if tr >= diag[0].max(diag[1]).max(diag[2]) {
        let t = 0.5 * (1.0 + tr).max(0.0).sqrt();
        w = t;
        x = (r(2, 1) - r(1, 2)) / (4.0 * t);
        y = (r(0, 2) - r(2, 0)) / (4.0 * t);
        z = (r(1, 0) - r(0, 1)) / (4.0 * t);
    } else if diag[0] >= diag[1] && diag[0] >= diag[2] {
        let t = 0.5 * (1.0 + 2.0 * diag[0] - tr).max(0.0).sqrt();
        x = t;
        w = (r(2, 1) - r(1, 2)) / (4.0 * t);
        y = (r(0, 1) + r(1, 0)) / (4.0 * t);
        z = (r(0, 2) + r(2, 0)) / (4.0 * t);
    } else if diag[1] >= diag[2] {
        let t = 0.5 * (1.0 + 2.0 * diag[1] - tr).max(0.0).sqrt();
        y = t;
        w = (r(0, 2) - r(2, 0)) / (4.0 * t);
        x = (r(0, 1) + r(1, 0)) / (4.0 * t);
        z = (r(1, 2) + r(2, 1)) / (4.0 * t);
    } else {
        let t = 0.5 * (1.0 + 2.0 * diag[2] - tr).max(0.0).sqrt();
        z = t;
        w = (r(1, 0) - r(0, 1)) / (4.0 * t);
        x = (r(0, 2) + r(2, 0)) / (4.0 * t);
        y = (r(1, 2) + r(2, 1)) / (4.0 * t);
    }
    let norm = (w * w + x * x + y * y + z * z).sqrt();
    let (w, x, y, z) = (w / norm, x / norm, y / norm, z / norm);
    let c = Complex64::new;
    Ok(nalgebra::Matrix2::new(c(w, -z), c(-y, -x), c(y, -x), c(w, z)))
}

fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    let d = a.nrows();
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

/// Column-stacked process vector, possibly a stack of `q` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedProcess {
    data: Vec<f64>,
    block: usize,
}

impl VectorizedProcess {
    pub fn stack(blocks: &[VectorizedProcess]) -> Result<VectorizedProcess> {
        let first = blocks.first().ok_or_else(|| Error::InvalidArgument("no blocks to stack".into()))?;
        let block = first.data.len();
        let mut data = Vec::with_capacity(block * blocks.len());
        for b in blocks {
            if b.data.len() != block {
                return Err(Error::DimensionMismatch { expected: block, got: b.data.len() });
            }
            data.extend_from_slice(&b.data);
        }
        Ok(VectorizedProcess { data, block })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of stacked `4^{2n}` blocks.
    pub fn blocks(&self) -> usize {
        self.data.len() / self.block
    }
}

/// Anything with a vectorised process representation.
pub trait ProcessVector {
    fn process_data(&self) -> std::borrow::Cow<'_, [f64]>;
}

impl ProcessVector for PauliTransferMatrix {
    fn process_data(&self) -> std::borrow::Cow<'_, [f64]> {
        std::borrow::Cow::Borrowed(self.m.as_slice())
    }
}

impl ProcessVector for VectorizedProcess {
    fn process_data(&self) -> std::borrow::Cow<'_, [f64]> {
        std::borrow::Cow::Borrowed(&self.data)
    }
}

/// Hilbert-Schmidt distance `||vec(A) - vec(B)||_2`.
pub fn hs_distance<P: ProcessVector + ?Sized>(a: &P, b: &P) -> Result<f64> {
    let (a, b) = (a.process_data(), b.process_data());
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(euclidean_distance(&a, &b))
}

pub(crate) fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidState(format!("{}x{} is not a qubit operator", m.nrows(), m.ncols())));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let herm = (&m - m.adjoint()).iter().fold(0.0f64, |w, z| w.max(z.norm()));
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min_eig = m.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(DensityMatrix { n_qubits, m })
    }

    /// Pure state `|psi><psi|` from a (normalised) state vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    /// Computational basis state `|index>` on `n_qubits`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let d = 1 << n_qubits;
        if index >= d {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        let mut m = DMatrix::zeros(d, d);
        m[(index, index)] = Complex64::new(1.0, 0.0);
        Ok(DensityMatrix { n_qubits, m })
    }

    /// Parse interleaved `(re, im)` row-major entries.
    pub fn from_interleaved(entries: &[f64]) -> Result<Self> {
        let n = entries.len() / 2;
        let dim = (n as f64).sqrt().round() as usize;
        if entries.len() % 2 != 0 || dim * dim != n {
            return Err(Error::Format(format!("{} values do not form a square complex matrix", entries.len())));
        }
        let vals: Vec<Complex64> = entries.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        Self::new(DMatrix::from_row_slice(dim, dim, &vals))
    }

    pub fn to_interleaved(&self) -> Vec<f64> {
        self.m.transpose().iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn pauli_vector(&self) -> Vec<f64> {
        pauli_vector_of(&self.m, self.n_qubits)
    }
}

/// Coefficients `Tr[P_s A] / sqrt(2^n)` of a Hermitian operator.
pub fn pauli_vector_of(a: &DMatrix<Complex64>, n_qubits: usize) -> Vec<f64> {
    let scale = 1.0 / ((1usize << n_qubits) as f64).sqrt();
    pauli::string_matrices(n_qubits)
        .iter()
        .map(|p| trace_product(p, a).re * scale)
        .collect()
}

pub fn operator_from_pauli_vector(v: &[f64], n_qubits: usize) -> DMatrix<Complex64> {
    let d = 1usize << n_qubits;
    let scale = 1.0 / (d as f64).sqrt();
    let mut m = DMatrix::zeros(d, d);
    for (i, p) in pauli::string_matrices(n_qubits).into_iter().enumerate() {
        if v[i] != 0.0 {
            m += p * Complex64::new(v[i] * scale, 0.0);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn assert_matrix_close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) {
        let diff = (a - b).abs().max();
        assert!(diff <= tol, "max entry difference {diff:e}\n{a}\n{b}");
    }

    #[test]
    fn identity_unitary_gives_identity_ptm() {
        let p = PauliTransferMatrix::from_unitary(&DMatrix::identity(2, 2)).unwrap();
        assert_matrix_close(p.matrix(), &DMatrix::identity(4, 4), 1e-15);
    }

    #[test]
    fn phase_gate_maps_x_to_y() {
        let p = PauliTransferMatrix::from_unitary(&phase_s()).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, -1.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ]);
        assert_matrix_close(p.matrix(), &expected, 1e-15);
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        let p = PauliTransferMatrix::from_unitary(&hadamard()).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, -1.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
        ]);
        assert_matrix_close(p.matrix(), &expected, 1e-15);
    }

    #[test]
    fn non_unitary_is_rejected() {
        let mut u = DMatrix::<Complex64>::identity(2, 2);
        u[(0, 0)] = Complex64::new(1.0 + 1e-6, 0.0);
        match PauliTransferMatrix::from_unitary(&u) {
            Err(Error::NotUnitary { deviation }) => assert!(deviation > 1e-7),
            other => panic!("expected unitarity violation, got {other:?}"),
        }
    }

    #[test]
    fn rotation_examples() {
        assert_matrix_close(rotation_gate(Axis::Z, 0.0).matrix(), &DMatrix::identity(4, 4), 0.0);
        let zpi = rotation_gate(Axis::Z, PI);
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, -1.0, 1.0]));
        assert_matrix_close(zpi.matrix(), &expected, 1e-15);

        // Rx(pi/2): Y -> Z, Z -> -Y, X -> X (columns are images).
        let rx = rotation_gate(Axis::X, FRAC_PI_2);
        assert!((rx.get(3, 2) - 1.0).abs() < 1e-15);
        assert!((rx.get(2, 3) + 1.0).abs() < 1e-15);
        assert!((rx.get(1, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_rotation_matches_unitary_route() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for angle in [0.1, 1.3, -2.7, 0.234234] {
                let direct = PauliTransferMatrix::from_unitary(&rotation_unitary(axis, angle)).unwrap();
                assert_matrix_close(direct.matrix(), rotation_gate(axis, angle).matrix(), 1e-14);
            }
        }
    }

    #[test]
    fn compose_examples() {
        let h = PauliTransferMatrix::from_unitary(&hadamard()).unwrap();
        let id = PauliTransferMatrix::identity(1).unwrap();
        assert_eq!(h.compose(&id).unwrap(), h);
        assert_matrix_close(h.compose(&h).unwrap().matrix(), id.matrix(), 1e-15);
        let sum = rotation_gate(Axis::Z, 0.4).compose(&rotation_gate(Axis::Z, 1.1)).unwrap();
        assert_matrix_close(sum.matrix(), rotation_gate(Axis::Z, 1.5).matrix(), 1e-12);
        let two = PauliTransferMatrix::identity(2).unwrap();
        assert!(h.compose(&two).is_err());
    }

    #[test]
    fn hs_distance_examples() {
        let id = PauliTransferMatrix::identity(1).unwrap();
        assert_eq!(hs_distance(&id, &id).unwrap(), 0.0);
        let d = hs_distance(&id, &rotation_gate(Axis::Z, PI)).unwrap();
        assert!((d - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        let (theta, delta) = (0.7, 1e-3);
        let d = hs_distance(&rotation_gate(Axis::Z, theta), &rotation_gate(Axis::Z, theta + delta)).unwrap();
        let expected = 2.0 * (delta / 2.0).sin().abs() * 2f64.sqrt();
        assert!((d - expected).abs() < 1e-9);
        assert!(hs_distance(&id, &PauliTransferMatrix::identity(2).unwrap()).is_err());
    }

    #[test]
    fn apply_to_state_examples() {
        let zero = DensityMatrix::basis_state(1, 0).unwrap();
        let id = PauliTransferMatrix::identity(1).unwrap();
        let out = id.apply_to_state(&zero).unwrap();
        assert!((out.matrix() - zero.matrix()).iter().all(|z| z.norm() < 1e-15));

        let h = PauliTransferMatrix::from_unitary(&hadamard()).unwrap();
        let plus = h.apply_to_state(&zero).unwrap();
        for z in plus.matrix().iter() {
            assert!((z.re - 0.5).abs() < 1e-14 && z.im.abs() < 1e-14);
        }

        // Rx(pi/2) sends the Z component of a state to -Y.
        let rotated = rotation_gate(Axis::X, FRAC_PI_2).apply_to_state(&zero).unwrap();
        let v = rotated.pauli_vector();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - s).abs() < 1e-14 && v[1].abs() < 1e-14 && (v[2] + s).abs() < 1e-14 && v[3].abs() < 1e-14);
    }

    #[test]
    fn invalid_states_are_rejected() {
        let z = Pauli::Z.matrix();
        assert!(DensityMatrix::new(z.clone()).is_err());
        let neg = (DMatrix::identity(2, 2) - z * Complex64::new(3.0, 0.0)) * Complex64::new(0.5, 0.0);
        assert!(matches!(DensityMatrix::new(neg), Err(Error::InvalidState(_))));
        let rho = DensityMatrix::basis_state(1, 1).unwrap();
        let back = DensityMatrix::from_interleaved(&rho.to_interleaved()).unwrap();
        assert_eq!(back, rho);
    }

    use crate::pauli::Pauli;

    #[test]
    fn su2_representative_reproduces_ptm() {
        let angles = [0.0, 0.3, 1.9, std::f64::consts::PI, 4.4, -2.2];
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for &a in &angles {
                for &b in &angles {
                    let p = rotation_gate(axis, a).compose(&rotation_gate(Axis::X, b)).unwrap();
                    let u = unitary_from_ptm_1q(&p).unwrap();
                    let dm = DMatrix::from_fn(2, 2, |i, j| u[(i, j)]);
                    let back = PauliTransferMatrix::from_unitary(&dm).unwrap();
                    assert!(hs_distance(&back, &p).unwrap() < 1e-12, "{axis:?} {a} {b}");
                    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
                    assert!((det - Complex64::new(1.0, 0.0)).norm() < 1e-12);
                }
            }
        }
        let flip = PauliTransferMatrix::from_row_major(1, &[1., 0., 0., 0., 0., -1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1.]).unwrap();
        assert!(unitary_from_ptm_1q(&flip).is_err());
    }
}
