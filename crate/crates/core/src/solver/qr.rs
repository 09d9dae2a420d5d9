//! Thin QR factorisation of the active columns, updated one column at a time.

use nalgebra::{DMatrix, DVector, DVectorView};

/// `A = Q R` with `Q` having orthonormal columns and `R` upper triangular.
#[derive(Debug, Clone)]
pub(crate) struct ActiveQr {
    rows: usize,
    q: Vec<DVector<f64>>,
    r: DMatrix<f64>,
}

impl ActiveQr {
    pub fn new(rows: usize) -> Self {
        ActiveQr { rows, q: Vec::new(), r: DMatrix::zeros(0, 0) }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    /// Norm of the part of `a` orthogonal to the current column space.
    pub fn orthogonal_norm(&self, a: DVectorView<f64>) -> f64 {
        self.orthogonalize(a).1.norm()
    }

    /// Classical Gram-Schmidt with one reorthogonalisation pass.
    fn orthogonalize(&self, a: DVectorView<f64>) -> (Vec<f64>, DVector<f64>) {
        let mut v = a.into_owned();
        let mut coef = vec![0.0; self.q.len()];
        for _ in 0..2 {
            let h: Vec<f64> = self.q.iter().map(|qi| qi.dot(&v)).collect();
            for (i, qi) in self.q.iter().enumerate() {
                v.axpy(-h[i], qi, 1.0);
                coef[i] += h[i];
            }
        }
        (coef, v)
    }

    /// Append a column; returns `false` (leaving the factorisation unchanged)
    /// when its new diagonal entry is at most `rel_tol * |a|`.
    pub fn push(&mut self, a: DVectorView<f64>, rel_tol: f64) -> bool {
        debug_assert_eq!(a.len(), self.rows);
        let anorm = a.norm();
        let (coef, v) = self.orthogonalize(a);
        let diag = v.norm();
        if !(diag > rel_tol * anorm) || anorm == 0.0 {
            return false;
        }
        let k = self.q.len();
        let mut r = DMatrix::zeros(k + 1, k + 1);
        r.view_mut((0, 0), (k, k)).copy_from(&self.r);
        for (i, c) in coef.iter().enumerate() {
            r[(i, k)] = *c;
        }
        r[(k, k)] = diag;
        self.r = r;
        self.q.push(v / diag);
        true
    }

    /// Delete column `pos`, restoring triangularity with Givens rotations.
    pub fn remove(&mut self, pos: usize) {
        let k = self.q.len();
        assert!(pos < k);
        let mut h = self.r.clone().remove_column(pos);
        for i in pos..k - 1 {
            let (a, b) = (h[(i, i)], h[(i + 1, i)]);
            let rho = a.hypot(b);
            if rho == 0.0 {
                continue;
            }
            let (c, s) = (a / rho, b / rho);
            for j in 0..k - 1 {
                let (x, y) = (h[(i, j)], h[(i + 1, j)]);
                h[(i, j)] = c * x + s * y;
                h[(i + 1, j)] = -s * x + c * y;
            }
            h[(i + 1, i)] = 0.0;
            let (qi, qn) = (self.q[i].clone(), self.q[i + 1].clone());
            self.q[i] = &qi * c + &qn * s;
            self.q[i + 1] = &qi * (-s) + &qn * c;
        }
        self.q.pop();
        self.r = h.remove_row(k - 1);
    }

    /// Solves `R^T z = s`.
    pub fn solve_rt(&self, s: &[f64]) -> Vec<f64> {
        let k = self.len();
        let mut z = vec![0.0; k];
        for i in 0..k {
            let mut acc = s[i];
            for j in 0..i {
                acc -= self.r[(j, i)] * z[j];
            }
            z[i] = acc / self.r[(i, i)];
        }
        z
    }

    /// Solves `R w = y`.
    pub fn solve_r(&self, y: &[f64]) -> Vec<f64> {
        let k = self.len();
        let mut w = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = y[i];
            for j in i + 1..k {
                acc -= self.r[(i, j)] * w[j];
            }
            w[i] = acc / self.r[(i, i)];
        }
        w
    }

    /// `Q^T x`.
    pub fn qt(&self, x: &DVector<f64>) -> Vec<f64> {
        self.q.iter().map(|qi| qi.dot(x)).collect()
    }

    /// `Q z`.
    pub fn q_times(&self, z: &[f64]) -> DVector<f64> {
        let mut v = DVector::zeros(self.rows);
        for (qi, zi) in self.q.iter().zip(z) {
            v.axpy(*zi, qi, 1.0);
        }
        v
    }

    #[cfg(test)]
    fn reconstruct(&self) -> DMatrix<f64> {
        let mut qm = DMatrix::zeros(self.rows, self.len());
        for (i, qi) in self.q.iter().enumerate() {
            qm.set_column(i, qi);
        }
        qm * &self.r
    }
}
