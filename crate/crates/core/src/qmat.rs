//! Dense complex matrices of dimension 2 and 4, plus a cyclic Jacobi
//! eigensolver for Hermitian inputs.
//!
//! Everything downstream manipulates two-qubit operators (4x4) and
//! single-qubit factors (2x2), so matrices live in a fixed 4x4 block with an
//! explicit dimension and never allocate. The eigensolver applies complex
//! Givens rotations that annihilate one off-diagonal pair at a time and
//! sweeps cyclically until the largest off-diagonal magnitude drops below
//! tolerance. At these sizes it converges in a handful of sweeps and keeps
//! the accumulated eigenvector matrix unitary to machine precision, which is
//! what the Fisher-information sums downstream care about.

use num_complex::Complex64;

use crate::{Error, Result};

/// Shorthand used throughout the crate.
pub type C64 = Complex64;

/// Hermiticity tolerance applied before eigendecomposition.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Off-diagonal target for the Jacobi sweep.
pub const JACOBI_TOL: f64 = 1e-13;

/// Cyclic sweep budget. Four-dimensional Hermitian problems settle in five
/// to ten sweeps; anything near the budget indicates corrupt input.
pub const JACOBI_MAX_SWEEPS: usize = 128;

/// Square complex matrix of dimension 2 or 4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    a: [[C64; 4]; 4],
}

impl CMatrix {
    pub fn zero(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "supported dimensions are 2 and 4");
        CMatrix {
            dim,
            a: [[C64::new(0.0, 0.0); 4]; 4],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zero(dim);
        for i in 0..dim {
            m.a[i][i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix entry by entry from `f(row, col)`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMatrix::zero(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    /// Builds a 2x2 matrix from rows.
    pub fn mat2(rows: [[C64; 2]; 2]) -> Self {
        CMatrix::from_fn(2, |i, j| rows[i][j])
    }

    /// Builds a diagonal matrix from real entries.
    pub fn diag(dim: usize, d: &[f64]) -> Self {
        assert_eq!(d.len(), dim);
        CMatrix::from_fn(dim, |i, j| {
            if i == j {
                C64::new(d[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.a[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        debug_assert!(i < self.dim && j < self.dim);
        self.a[i][j] = v;
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix::from_fn(self.dim, |i, j| self.a[i][j] + rhs.a[i][j])
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix::from_fn(self.dim, |i, j| self.a[i][j] - rhs.a[i][j])
    }

    pub fn scale(&self, f: f64) -> CMatrix {
        CMatrix::from_fn(self.dim, |i, j| self.a[i][j] * f)
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = CMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i][k];
                if aik == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.a[i][j] += aik * rhs.a[k][j];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, |i, j| self.a[j][i].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    /// Largest magnitude of `A - A†`, zero for exactly Hermitian input.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            worst = worst.max(self.a[i][i].im.abs());
            for j in (i + 1)..self.dim {
                worst = worst.max((self.a[i][j] - self.a[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise magnitude of the difference, for tests and
    /// cross-route checks.
    pub fn max_abs_diff(&self, rhs: &CMatrix) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.a[i][j] - rhs.a[i][j]).norm());
            }
        }
        worst
    }
}

/// Pauli matrix `sigma_k` for `k` in 1..=3.
pub fn pauli(k: usize) -> CMatrix {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match k {
        1 => CMatrix::mat2([[z, one], [one, z]]),
        2 => CMatrix::mat2([[z, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), z]]),
        3 => CMatrix::mat2([[one, z], [z, -one]]),
        _ => panic!("pauli index must be 1, 2, or 3"),
    }
}

/// Kronecker product of two 2x2 matrices; the left factor indexes the
/// 2x2 block structure of the result (A acts on the first qubit).
pub fn kron2(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.dim != 2 || b.dim != 2 {
        return Err(Error::DimensionMismatch("kron2 expects two 2x2 factors"));
    }
    Ok(CMatrix::from_fn(4, |i, j| {
        a.a[i / 2][j / 2] * b.a[i % 2][j % 2]
    }))
}

/// One Kraus term `K rho K†`.
pub fn sandwich(k: &CMatrix, rho: &CMatrix) -> Result<CMatrix> {
    if k.dim != rho.dim {
        return Err(Error::DimensionMismatch("sandwich factors must share a dimension"));
    }
    Ok(k.mul(rho).mul(&k.dagger()))
}

/// `<bra| op |ket>` for state vectors of the operator's dimension.
pub fn matrix_element(bra: &[C64], op: &CMatrix, ket: &[C64]) -> Result<C64> {
    if bra.len() != op.dim || ket.len() != op.dim {
        return Err(Error::DimensionMismatch("matrix_element vector lengths must match the operator"));
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..op.dim {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..op.dim {
            row += op.a[i][j] * ket[j];
        }
        acc += bra[i].conj() * row;
    }
    Ok(acc)
}

/// Eigendecomposition of a Hermitian matrix. Values are sorted in
/// descending order, ties keep the solver's output order, and `vectors`
/// holds the matching orthonormal eigenvectors as columns.
#[derive(Clone, Copy, Debug)]
pub struct Eigen {
    pub dim: usize,
    pub values: [f64; 4],
    pub vectors: CMatrix,
}

impl Eigen {
    /// Eigenvector for the k-th eigenvalue, padded with zeros beyond `dim`.
    pub fn vector(&self, k: usize) -> [C64; 4] {
        let mut v = [C64::new(0.0, 0.0); 4];
        for i in 0..self.dim {
            v[i] = self.vectors.a[i][k];
        }
        v
    }
}

/// Eigendecomposition with default tolerance and sweep budget.
pub fn hermitian_eigen(a: &CMatrix) -> Result<Eigen> {
    hermitian_eigen_with(a, JACOBI_TOL, JACOBI_MAX_SWEEPS)
}

/// Cyclic Jacobi for complex Hermitian matrices.
///
/// Each rotation zeroes the pivot pair (p, q): with the pivot written as
/// `|apq| e^{i phi}`, the classic real-symmetric tangent formula applied to
/// `(app - aqq) / (2 |apq|)` fixes the rotation angle, and the phase is
/// folded into the off-diagonal entries of the unitary. Rotations therefore
/// stay exactly unitary and the diagonal stays real.
pub fn hermitian_eigen_with(a: &CMatrix, tol: f64, max_sweeps: usize) -> Result<Eigen> {
    let defect = a.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let n = a.dim;
    let mut m = *a;
    /* fold numerical asymmetry away so the iteration sees an exactly
     * Hermitian matrix */
    for p in 0..n {
        m.a[p][p] = C64::new(m.a[p][p].re, 0.0);
        for q in (p + 1)..n {
            let avg = (m.a[p][q] + m.a[q][p].conj()) * 0.5;
            m.a[p][q] = avg;
            m.a[q][p] = avg.conj();
        }
    }
    let mut v = CMatrix::identity(n);

    let mut sweeps_used = max_sweeps;
    for sweep in 0..max_sweeps {
        if off_diagonal_max(&m) <= tol {
            sweeps_used = sweep;
            break;
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    let off = off_diagonal_max(&m);
    if off > tol {
        return Err(Error::NoConvergence(off, sweeps_used));
    }

    /* sort descending; Vec::sort_by is stable so ties keep solver order */
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.a[j][j].re.partial_cmp(&m.a[i][i].re).unwrap());
    let mut values = [0.0; 4];
    let mut vectors = CMatrix::zero(n);
    for (slot, &src) in order.iter().enumerate() {
        values[slot] = m.a[src][src].re;
        for row in 0..n {
            vectors.a[row][slot] = v.a[row][src];
        }
    }
    Ok(Eigen { dim: n, values, vectors })
}

fn off_diagonal_max(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.dim {
        for j in 0..m.dim {
            if i != j {
                worst = worst.max(m.a[i][j].norm());
            }
        }
    }
    worst
}

fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = m.a[p][q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = m.a[p][p].re;
    let aqq = m.a[q][q].re;
    /* smaller-angle root of tan(2 theta) = 2 |apq| / (app - aqq) */
    let tau = (app - aqq) / (2.0 * mag);
    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let u = apq / mag * s; // s times the pivot phase

    let n = m.dim;
    for k in 0..n {
        let akp = m.a[k][p];
        let akq = m.a[k][q];
        m.a[k][p] = akp * c + akq * u.conj();
        m.a[k][q] = akq * c - akp * u;
        let vkp = v.a[k][p];
        let vkq = v.a[k][q];
        v.a[k][p] = vkp * c + vkq * u.conj();
        v.a[k][q] = vkq * c - vkp * u;
    }
    for k in 0..n {
        let apk = m.a[p][k];
        let aqk = m.a[q][k];
        m.a[p][k] = apk * c + aqk * u;
        m.a[q][k] = aqk * c - apk * u.conj();
    }
    m.a[p][p] = C64::new(m.a[p][p].re, 0.0);
    m.a[q][q] = C64::new(m.a[q][q].re, 0.0);
    m.a[p][q] = C64::new(0.0, 0.0);
    m.a[q][p] = C64::new(0.0, 0.0);
}
