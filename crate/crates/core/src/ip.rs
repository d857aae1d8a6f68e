//! Interferometric power of two-qubit states, with three independent routes.
//!
//! The interferometric power of a probe state `rho` is the worst-case
//! quantum Fisher information over local phase generators on the first
//! qubit, `IP(rho) = (1/4) min_n F(rho, n . sigma x I)` with `n` a unit
//! vector. The minimization collapses to the smallest eigenvalue of a 3x3
//! matrix `M` built from the spectral decomposition of `rho`:
//!
//! ```text
//! M_mn = sum_{i<l} (q_i - q_l)^2 / (q_i + q_l)
//!        Re( <psi_i| sigma_m x I |psi_l> <psi_l| sigma_n x I |psi_i> )
//! ```
//!
//! For X states `M` is diagonal and its entries come in closed form from
//! the block eigenstructure, so the crate carries three routes with very
//! different failure modes and cross-checks them constantly:
//!
//! * [`ip_general`]: dense eigensolver, assemble `M`, smallest eigenvalue.
//!   Works for any two-qubit state.
//! * [`ip_xstate`]: closed-form branch values `M11, M22, M33` from the
//!   block slopes. Falls back to the dense diagonal when a block
//!   off-diagonal vanishes and the slope form degenerates.
//! * [`ip_bruteforce`]: direct minimization of the Fisher information over
//!   a Fibonacci sphere of generator directions plus golden-section
//!   refinement. No 3x3 eigenproblem involved, which makes it the referee
//!   when the other two disagree.
//!
//! On the Bell-diagonal slice the branch values reduce to rational
//! expressions in the correlations alone ([`bell_branch_values`]), and the
//! minimum collapses to a single-expression form ([`ip_bell_norm_form`]).

use std::fmt;

use crate::exec;
use crate::qmat::{hermitian_eigen, kron2, matrix_element, pauli, CMatrix, C64};
use crate::states::{XBlocks, XState};
use crate::{Error, Result};

/// Eigenvalue pairs whose sum is at or below this threshold are dropped
/// from Fisher-information sums; their weight is zero in exact arithmetic
/// and numerically ill-defined.
pub const PAIR_SUM_FLOOR: f64 = 1e-12;

/// Denominators `1 - c^2` below this make the Bell-diagonal closed form
/// unusable; callers should take the general route instead.
pub const BELL_SINGULAR_TOL: f64 = 1e-9;

/// Which closed-form branch carries the minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    M11,
    M22,
    M33,
}

impl Branch {
    pub fn index(self) -> usize {
        match self {
            Branch::M11 => 0,
            Branch::M22 => 1,
            Branch::M33 => 2,
        }
    }

    fn from_index(k: usize) -> Branch {
        [Branch::M11, Branch::M22, Branch::M33][k]
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Branch::M11 => "M11",
            Branch::M22 => "M22",
            Branch::M33 => "M33",
        };
        f.write_str(name)
    }
}

/// Branch values of the X-state interferometric power at one point.
#[derive(Clone, Copy, Debug)]
pub struct IPBranches {
    pub m11: f64,
    pub m22: f64,
    pub m33: f64,
    /// Branch holding the minimum (smallest index on exact ties).
    pub active: Branch,
    /// The interferometric power, `min(m11, m22, m33)` clamped at zero.
    pub value: f64,
    /// True when a degenerate block forced the dense fallback.
    pub fallback: bool,
    /// The correlation comparison `|c1|` vs `|c2|` singles out two branch
    /// candidates; this is set when the actual minimum lies outside that
    /// candidate set by more than 1e-12.
    pub rule_violation: bool,
}

impl IPBranches {
    pub fn branch_values(&self) -> [f64; 3] {
        [self.m11, self.m22, self.m33]
    }
}

/// Symmetric 3x3 matrix of Fisher-information quadratic-form coefficients.
#[derive(Clone, Copy, Debug)]
pub struct MMatrix(pub [[f64; 3]; 3]);

impl MMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.0[0][0], self.0[1][1], self.0[2][2]]
    }

    /// Largest magnitude off the diagonal, a diagnostic for the X-state
    /// cancellation.
    pub fn off_diagonal_max(&self) -> f64 {
        self.0[0][1]
            .abs()
            .max(self.0[0][2].abs())
            .max(self.0[1][2].abs())
    }

    /// Eigenvalues in descending order via the trigonometric closed form
    /// for symmetric 3x3 matrices.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let m = &self.0;
        let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
        if p1 == 0.0 {
            let mut d = [m[0][0], m[1][1], m[2][2]];
            d.sort_by(|a, b| b.partial_cmp(a).unwrap());
            return d;
        }
        let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b = |i: usize, j: usize| (m[i][j] - if i == j { q } else { 0.0 }) / p;
        let det_b = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
            - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
            + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
        let phi = (det_b / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
        /* phi lies in [0, pi/3]: the cosine at phi is the largest root,
         * the one at phi + 2pi/3 the smallest */
        let e0 = q + 2.0 * p * phi.cos();
        let e2 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
        let e1 = 3.0 * q - e0 - e2;
        [e0, e1, e2]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[2]
    }
}

/// Quantum Fisher information of `rho` for the generator `h`, in the
/// convention where a pure state gives four times the variance of `h`.
pub fn qfi(rho: &CMatrix, h: &CMatrix) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch("qfi operands must share a dimension"));
    }
    let e = hermitian_eigen(rho)?;
    let n = e.dim;
    let mut f = 0.0;
    for i in 0..n {
        for l in (i + 1)..n {
            let sum = e.values[i] + e.values[l];
            if sum <= PAIR_SUM_FLOOR {
                continue;
            }
            let gap = e.values[i] - e.values[l];
            let amp = matrix_element(&e.vector(i), h, &e.vector(l))?;
            f += 4.0 * gap * gap / sum * amp.norm_sqr();
        }
    }
    Ok(f)
}

/// Spectral data shared by the `M` assembly and the brute-force search:
/// one weight and one vector of Pauli transition amplitudes per
/// non-degenerate eigenpair.
struct PairData {
    weight: f64,
    g: [C64; 3],
}

fn pair_data(rho: &CMatrix) -> Result<Vec<PairData>> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch("probe states are two-qubit, 4x4"));
    }
    let e = hermitian_eigen(rho)?;
    let id = CMatrix::identity(2);
    let probes = [
        kron2(&pauli(1), &id)?,
        kron2(&pauli(2), &id)?,
        kron2(&pauli(3), &id)?,
    ];
    let mut pairs = Vec::with_capacity(6);
    for i in 0..4 {
        for l in (i + 1)..4 {
            let sum = e.values[i] + e.values[l];
            if sum <= PAIR_SUM_FLOOR {
                continue;
            }
            let gap = e.values[i] - e.values[l];
            let vi = e.vector(i);
            let vl = e.vector(l);
            let mut g = [C64::new(0.0, 0.0); 3];
            for (m, probe) in probes.iter().enumerate() {
                g[m] = matrix_element(&vi, probe, &vl)?;
            }
            pairs.push(PairData { weight: gap * gap / sum, g });
        }
    }
    Ok(pairs)
}

/// Assembles the 3x3 `M` matrix from the spectral decomposition of `rho`.
pub fn m_matrix(rho: &CMatrix) -> Result<MMatrix> {
    let pairs = pair_data(rho)?;
    let mut m = [[0.0; 3]; 3];
    for pair in &pairs {
        for a in 0..3 {
            for b in a..3 {
                m[a][b] += pair.weight * (pair.g[a] * pair.g[b].conj()).re;
            }
        }
    }
    for a in 0..3 {
        for b in 0..a {
            m[a][b] = m[b][a];
        }
    }
    Ok(MMatrix(m))
}

/// Interferometric power of an arbitrary two-qubit state: smallest
/// eigenvalue of `M`, clamped at zero against eigensolver undershoot.
pub fn ip_general(rho: &CMatrix) -> Result<f64> {
    let min = m_matrix(rho)?.min_eigenvalue();
    debug_assert!(min > -1e-8, "M must be positive semidefinite, got {min}");
    Ok(min.max(0.0))
}

fn weight(a: f64, b: f64) -> f64 {
    let sum = a + b;
    if sum <= PAIR_SUM_FLOOR {
        0.0
    } else {
        (a - b) * (a - b) / sum
    }
}

/// Closed-form branch values from the block eigenstructure, or `None` when
/// a slope pair is degenerate.
///
/// Writing the inner eigenpairs as `(lambda_i, x_i)` and the outer ones as
/// `(mu_j, y_j)`, the diagonal of `M` is
///
/// ```text
/// M11 = sum_ij W(lambda_i, mu_j) (x_i + y_j)^2 / ((1 + x_i^2)(1 + y_j^2))
/// M22 = sum_ij W(lambda_i, mu_j) (x_i - y_j)^2 / ((1 + x_i^2)(1 + y_j^2))
/// M33 = 4 W(lambda_1, lambda_2) / ((1 + x_1^2)(1 + x_2^2))
///     + 4 W(mu_1, mu_2) / ((1 + y_1^2)(1 + y_2^2))
/// ```
///
/// with `W(a, b) = (a - b)^2 / (a + b)`. The third line already uses
/// `x_1 x_2 = y_1 y_2 = -1`.
pub fn xstate_branch_values(blocks: &XBlocks) -> Option<[f64; 3]> {
    let (x, y) = match (blocks.x, blocks.y) {
        (Some(x), Some(y)) => (x, y),
        _ => return None,
    };
    let lam = [blocks.inner.0, blocks.inner.1];
    let mu = [blocks.outer.0, blocks.outer.1];
    let xs = [x.0, x.1];
    let ys = [y.0, y.1];
    let mut m11 = 0.0;
    let mut m22 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let w = weight(lam[i], mu[j]);
            let denom = (1.0 + xs[i] * xs[i]) * (1.0 + ys[j] * ys[j]);
            let plus = xs[i] + ys[j];
            let minus = xs[i] - ys[j];
            m11 += w * plus * plus / denom;
            m22 += w * minus * minus / denom;
        }
    }
    let m33 = 4.0 * weight(lam[0], lam[1]) / ((1.0 + xs[0] * xs[0]) * (1.0 + xs[1] * xs[1]))
        + 4.0 * weight(mu[0], mu[1]) / ((1.0 + ys[0] * ys[0]) * (1.0 + ys[1] * ys[1]));
    Some([m11, m22, m33])
}

fn assemble(state: &XState, triple: [f64; 3], fallback: bool) -> IPBranches {
    let mut active = 0;
    for k in 1..3 {
        if triple[k] < triple[active] {
            active = k;
        }
    }
    let value = triple[active].max(0.0);
    /* the comparison of |c1| and |c2| singles out which in-plane branch can
     * compete with M33 */
    let candidates: &[usize] = if state.c1().abs() < state.c2().abs() {
        &[1, 2]
    } else if state.c1().abs() > state.c2().abs() {
        &[0, 2]
    } else {
        &[0, 1, 2]
    };
    let candidate_min = candidates
        .iter()
        .map(|&k| triple[k])
        .fold(f64::INFINITY, f64::min);
    IPBranches {
        m11: triple[0],
        m22: triple[1],
        m33: triple[2],
        active: Branch::from_index(active),
        value,
        fallback,
        rule_violation: candidate_min > triple[active] + 1e-12,
    }
}

/// Interferometric power of an X state through the closed-form branches,
/// with a dense-diagonal fallback for degenerate blocks.
pub fn ip_xstate(state: &XState) -> Result<IPBranches> {
    let blocks = state.blocks();
    if let Some(triple) = xstate_branch_values(&blocks) {
        Ok(assemble(state, triple, false))
    } else {
        let m = m_matrix(&state.to_density_matrix())?;
        Ok(assemble(state, m.diagonal(), true))
    }
}

/// Branch values on the Bell-diagonal slice as rational functions of the
/// correlations:
///
/// ```text
/// M11 = (c2^2 + c3^2 + 2 c1 c2 c3) / (1 - c1^2)   and cyclic.
/// ```
pub fn bell_branch_values(c: [f64; 3]) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    let det2 = 2.0 * c[0] * c[1] * c[2];
    for k in 0..3 {
        let denom = 1.0 - c[k] * c[k];
        if denom <= BELL_SINGULAR_TOL {
            return Err(Error::ClosedFormSingular(format!(
                "1 - c{}^2 = {denom:.3e}",
                k + 1
            )));
        }
        let (a, b) = (c[(k + 1) % 3], c[(k + 2) % 3]);
        out[k] = (a * a + b * b + det2) / denom;
    }
    Ok(out)
}

/// Single-expression closed form on the Bell-diagonal slice, stated with
/// the norms of the correlation matrix `C = diag(c1, c2, c3)`:
/// `(|C|_HS^2 - |C|_op^2 + 2 det C) / (1 - |C|_op^2)`. It always equals the
/// branch value picked by the largest `|c_k|`, which is where the minimum
/// sits on this slice.
pub fn ip_bell_norm_form(state: &XState) -> Result<f64> {
    if !state.is_bell_diagonal() {
        return Err(Error::InvalidState(
            "the norm closed form needs a Bell-diagonal state".into(),
        ));
    }
    let op_sq = state.correlation_op_norm().powi(2);
    let denom = 1.0 - op_sq;
    if denom <= BELL_SINGULAR_TOL {
        return Err(Error::ClosedFormSingular(format!("1 - |C|_op^2 = {denom:.3e}")));
    }
    Ok((state.correlation_hs_norm_sq() - op_sq + 2.0 * state.correlation_det()) / denom)
}

/// Interferometric power of a Bell-diagonal state via
/// [`bell_branch_values`]. Errors on non-Bell-diagonal input and near the
/// pure-state boundary where the closed form is singular.
pub fn ip_bell_diagonal(state: &XState) -> Result<IPBranches> {
    if !state.is_bell_diagonal() {
        return Err(Error::InvalidState(
            "ip_bell_diagonal needs r = s = 0".into(),
        ));
    }
    let triple = bell_branch_values(state.c)?;
    Ok(assemble(state, triple, false))
}

/// Route dispatch shared by the CLI and the trajectory code: the
/// Bell-diagonal closed form where it is regular, the X-state branch form
/// otherwise. Every consumer of per-point values goes through here so that
/// a trajectory sample and a one-shot evaluation agree bit for bit.
pub fn ip_point(state: &XState) -> Result<IPBranches> {
    if state.is_bell_diagonal() {
        let op = state.correlation_op_norm();
        if op * op < 1.0 - BELL_SINGULAR_TOL {
            return ip_bell_diagonal(state);
        }
    }
    ip_xstate(state)
}

/// Options for the direct generator-space search.
#[derive(Clone, Copy, Debug)]
pub struct BruteForceOpts {
    /// Fibonacci sphere resolution; the grid holds `directions^2` points.
    pub directions: usize,
    /// Golden-section refinement alternations over the two angles.
    pub refine: usize,
}

impl Default for BruteForceOpts {
    fn default() -> Self {
        BruteForceOpts { directions: 64, refine: 40 }
    }
}

/// Result of the brute-force minimization.
#[derive(Clone, Copy, Debug)]
pub struct BruteForceResult {
    pub value: f64,
    /// Generator direction achieving the minimum.
    pub direction: [f64; 3],
}

fn golden_section(center: f64, half: f64, iters: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut a = center - half;
    let mut b = center + half;
    let mut c = b - (b - a) * INVPHI;
    let mut d = a + (b - a) * INVPHI;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INVPHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INVPHI;
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Minimizes the Fisher information directly over generator directions.
///
/// The quadratic form per direction reuses the spectral pair data, so a
/// single eigendecomposition serves the whole search. The sphere scan runs
/// in parallel with an index-ordered reduction; refinement is sequential
/// golden-section descent alternating between the polar and azimuthal
/// angles with a shrinking bracket.
pub fn ip_bruteforce(rho: &CMatrix, opts: &BruteForceOpts) -> Result<BruteForceResult> {
    let directions = opts.directions.max(32);
    let pairs = pair_data(rho)?;
    let eval = |n: [f64; 3]| -> f64 {
        let mut acc = 0.0;
        for pair in &pairs {
            let dot = pair.g[0] * n[0] + pair.g[1] * n[1] + pair.g[2] * n[2];
            acc += pair.weight * dot.norm_sqr();
        }
        acc
    };
    let total = directions * directions;
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    let point = |k: usize| -> [f64; 3] {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / total as f64;
        let rho_xy = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden_angle * k as f64;
        [rho_xy * phi.cos(), rho_xy * phi.sin(), z]
    };
    let (grid_value, grid_k) = exec::min_by_index(total, |k| eval(point(k)));

    let n0 = point(grid_k);
    let mut theta = n0[2].clamp(-1.0, 1.0).acos();
    let mut phi = n0[1].atan2(n0[0]);
    let mut half = 2.0 * std::f64::consts::PI / directions as f64;
    let spherical = |theta: f64, phi: f64| -> [f64; 3] {
        [
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ]
    };
    let mut best = grid_value;
    for _ in 0..opts.refine {
        let (t, _) = golden_section(theta, half, 26, |t| eval(spherical(t, phi)));
        theta = t;
        let (p, v) = golden_section(phi, half, 26, |p| eval(spherical(theta, p)));
        phi = p;
        best = best.min(v);
        half = (half * 0.75).max(1e-9);
    }
    let refined = eval(spherical(theta, phi));
    let value = refined.min(best).max(0.0);
    Ok(BruteForceResult {
        value,
        direction: spherical(theta, phi),
    })
}
