//! Two-qubit X states and their exact block eigenstructure.
//!
//! An X state is fixed by five real numbers: the local polarizations `r`
//! (first qubit) and `s` (second qubit) along the computational axis, and
//! the diagonal correlations `c = (c1, c2, c3)`,
//!
//! ```text
//! rho = (1/4) (I + r sigma3 x I + s I x sigma3 + sum_j c_j sigma_j x sigma_j)
//! ```
//!
//! In the computational basis the density matrix splits into two 2x2 blocks,
//! the inner block on span{|01>, |10>} and the outer block on
//! span{|00>, |11>}. Eigenvalues and eigenvectors of both blocks come in
//! closed form, which is what makes the closed-form interferometric power
//! branches possible. Bell-diagonal states are the `r = s = 0` slice.

use std::fmt;
use std::str::FromStr;

use crate::qmat::{kron2, pauli, CMatrix, C64};
use crate::{Error, Result};

/// Eigenvalues may undershoot zero by at most this much before a state is
/// rejected as unphysical.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Below this magnitude a block off-diagonal counts as zero and the
/// eigenvector slope parametrization is dropped in favor of `None`.
pub const BLOCK_DEGENERACY_TOL: f64 = 1e-14;

/// Forbidden density-matrix entries larger than this fail X-shape detection.
pub const X_SHAPE_TOL: f64 = 1e-12;

/// A two-qubit X state in the Bloch-style parametrization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XState {
    pub r: f64,
    pub s: f64,
    pub c: [f64; 3],
}

/// Closed-form spectral data of the two 2x2 blocks.
///
/// `inner` are the descending eigenvalues on span{|01>, |10>} and `outer`
/// the descending eigenvalues on span{|00>, |11>}. `x` and `y` hold the
/// eigenvector slope parameters: the inner eigenvector for `inner.0` is
/// `(x.0 |01> + |10>) / sqrt(1 + x.0^2)` and likewise for the rest. The
/// slopes satisfy `x.0 * x.1 = -1` and `y.0 * y.1 = -1` exactly. A slope
/// pair is `None` when the block off-diagonal vanishes, in which case the
/// eigenvectors are the basis states themselves and the slope form is
/// ill-defined.
#[derive(Clone, Copy, Debug)]
pub struct XBlocks {
    pub inner: (f64, f64),
    pub outer: (f64, f64),
    pub x: Option<(f64, f64)>,
    pub y: Option<(f64, f64)>,
}

impl XBlocks {
    /// True when either slope pair is unavailable.
    pub fn degenerate(&self) -> bool {
        self.x.is_none() || self.y.is_none()
    }
}

/// Descending eigenvalues of a 2x2 symmetric block `[[a, w], [w, b]]`
/// together with the stabilized slope pair.
fn block_eigen(a: f64, b: f64, w: f64) -> ((f64, f64), Option<(f64, f64)>) {
    let mean = 0.5 * (a + b);
    let half = 0.5 * (a - b);
    let delta = (half * half + w * w).sqrt();
    let values = (mean + delta, mean - delta);
    if w.abs() <= BLOCK_DEGENERACY_TOL {
        return (values, None);
    }
    /* Slopes solve lambda = b + w x. Evaluating the difference lambda - b
     * on the side away from b avoids cancellation; the partner follows
     * from the exact product x0 x1 = -1. */
    let slopes = if half >= 0.0 {
        let x0 = (half + delta) / w;
        (x0, -1.0 / x0)
    } else {
        let x1 = (half - delta) / w;
        (-1.0 / x1, x1)
    };
    (values, Some(slopes))
}

impl XState {
    /// Validated constructor.
    pub fn new(r: f64, s: f64, c1: f64, c2: f64, c3: f64) -> Result<Self> {
        let state = XState { r, s, c: [c1, c2, c3] };
        state.validate()?;
        Ok(state)
    }

    /// Constructor that skips physicality checks, for internal ramps and
    /// perturbative probes.
    pub fn new_unchecked(r: f64, s: f64, c1: f64, c2: f64, c3: f64) -> Self {
        XState { r, s, c: [c1, c2, c3] }
    }

    /// Bell-diagonal state, the maximally mixed marginal slice.
    pub fn bell_diagonal(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        XState::new(0.0, 0.0, c1, c2, c3)
    }

    pub fn c1(&self) -> f64 {
        self.c[0]
    }

    pub fn c2(&self) -> f64 {
        self.c[1]
    }

    pub fn c3(&self) -> f64 {
        self.c[2]
    }

    pub fn is_bell_diagonal(&self) -> bool {
        self.r.abs() <= 1e-14 && self.s.abs() <= 1e-14
    }

    /// Index in 1..=3 of the largest `|c_k|`, smallest index on ties.
    pub fn argmax_correlation(&self) -> usize {
        let mags = [self.c[0].abs(), self.c[1].abs(), self.c[2].abs()];
        let mut best = 0;
        for k in 1..3 {
            if mags[k] > mags[best] {
                best = k;
            }
        }
        best + 1
    }

    /// Squared Hilbert-Schmidt norm of the correlation vector.
    pub fn correlation_hs_norm_sq(&self) -> f64 {
        self.c.iter().map(|v| v * v).sum()
    }

    /// Operator norm of the diagonal correlation matrix, `max_k |c_k|`.
    pub fn correlation_op_norm(&self) -> f64 {
        self.c.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Determinant of the diagonal correlation matrix.
    pub fn correlation_det(&self) -> f64 {
        self.c[0] * self.c[1] * self.c[2]
    }

    /// Block spectral data, see [`XBlocks`].
    pub fn blocks(&self) -> XBlocks {
        let (r, s, [c1, c2, c3]) = (self.r, self.s, self.c);
        let (inner, x) = block_eigen(
            (1.0 + r - s - c3) / 4.0,
            (1.0 - r + s - c3) / 4.0,
            (c1 + c2) / 4.0,
        );
        let (outer, y) = block_eigen(
            (1.0 + r + s + c3) / 4.0,
            (1.0 - r - s + c3) / 4.0,
            (c1 - c2) / 4.0,
        );
        XBlocks { inner, outer, x, y }
    }

    /// All four eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let b = self.blocks();
        let mut v = [b.inner.0, b.inner.1, b.outer.0, b.outer.1];
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let b = self.blocks();
        b.inner.1.min(b.outer.1)
    }

    /// Checks physicality: finite parameters and a positive semidefinite
    /// density matrix (within [`POSITIVITY_TOL`]).
    pub fn validate(&self) -> Result<()> {
        let mut faults = Vec::new();
        let finite = self.r.is_finite()
            && self.s.is_finite()
            && self.c.iter().all(|v| v.is_finite());
        if !finite {
            faults.push("non-finite parameter".to_string());
        } else {
            let min = self.min_eigenvalue();
            if min < -POSITIVITY_TOL {
                faults.push(format!("density matrix has eigenvalue {min:.3e}"));
            }
        }
        if faults.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidState(faults.join("; ")))
        }
    }

    /// The 4x4 density matrix in the computational basis |00>, |01>, |10>,
    /// |11| with the first qubit as the interferometric probe.
    pub fn to_density_matrix(&self) -> CMatrix {
        let (r, s, [c1, c2, c3]) = (self.r, self.s, self.c);
        let mut rho = CMatrix::diag(
            4,
            &[
                (1.0 + r + s + c3) / 4.0,
                (1.0 + r - s - c3) / 4.0,
                (1.0 - r + s - c3) / 4.0,
                (1.0 - r - s + c3) / 4.0,
            ],
        );
        rho.set(0, 3, C64::new((c1 - c2) / 4.0, 0.0));
        rho.set(3, 0, C64::new((c1 - c2) / 4.0, 0.0));
        rho.set(1, 2, C64::new((c1 + c2) / 4.0, 0.0));
        rho.set(2, 1, C64::new((c1 + c2) / 4.0, 0.0));
        rho
    }

    /// Recovers the five parameters from a density matrix.
    ///
    /// Fails with `NotHermitian` for non-Hermitian input, `NotXShaped` when
    /// any entry outside the X pattern (or the imaginary part of an
    /// anti-diagonal entry, which the real parametrization cannot carry)
    /// exceeds tolerance, and `InvalidState` for trace or positivity
    /// violations.
    pub fn from_density_matrix(rho: &CMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch("X states need a 4x4 density matrix"));
        }
        let defect = rho.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::NotHermitian(defect));
        }
        let mut off: f64 = 0.0;
        for (i, j) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            off = off.max(rho.get(i, j).norm());
            off = off.max(rho.get(j, i).norm());
        }
        off = off.max(rho.get(0, 3).im.abs());
        off = off.max(rho.get(1, 2).im.abs());
        if off > X_SHAPE_TOL {
            return Err(Error::NotXShaped(off));
        }
        let trace = rho.trace().re;
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {trace} is not 1")));
        }
        let d: Vec<f64> = (0..4).map(|i| rho.get(i, i).re).collect();
        let r = d[0] + d[1] - d[2] - d[3];
        let s = d[0] - d[1] + d[2] - d[3];
        let c3 = d[0] - d[1] - d[2] + d[3];
        let f = rho.get(0, 3).re;
        let g = rho.get(1, 2).re;
        XState::new(r, s, 2.0 * (g + f), 2.0 * (g - f), c3)
    }

    /// True when `rho` carries no quantum correlations at all: a classical
    /// state diagonal in a product basis. For X states that means the
    /// anti-diagonal couplings vanish (up to a local basis choice this is
    /// `c1 = c2 = 0`).
    pub fn is_classical(&self) -> bool {
        self.c[0].abs() <= 1e-14 && self.c[1].abs() <= 1e-14
    }
}

impl fmt::Display for XState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "r={} s={} c=({}, {}, {})",
            self.r, self.s, self.c[0], self.c[1], self.c[2]
        )
    }
}

impl FromStr for XState {
    type Err = Error;

    /// Parses `"c1,c2,c3"` (Bell-diagonal) or `"r,s,c1,c2,c3"`.
    fn from_str(text: &str) -> Result<Self> {
        let fields: Vec<f64> = text
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number {:?} in state literal", tok.trim())))
            })
            .collect::<Result<_>>()?;
        match fields.len() {
            3 => XState::bell_diagonal(fields[0], fields[1], fields[2]),
            5 => XState::new(fields[0], fields[1], fields[2], fields[3], fields[4]),
            n => Err(Error::Parse(format!(
                "state literal needs 3 or 5 comma-separated numbers, got {n}"
            ))),
        }
    }
}

/// Builds the observable `n . sigma x I` for a unit vector `n`, the probe
/// Hamiltonian class the interferometric power minimizes over.
pub fn probe_hamiltonian(n: [f64; 3]) -> CMatrix {
    let mut h = CMatrix::zero(2);
    for k in 0..3 {
        h = h.add(&pauli(k + 1).scale(n[k]));
    }
    kron2(&h, &CMatrix::identity(2)).expect("2x2 factors")
}
