//! Seeded random generators for states, local unitaries, and one-sided
//! channels.
//!
//! Everything here is driven by an explicit ChaCha stream so that the
//! self-check suites are reproducible across runs and platforms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::qmat::{kron2, CMatrix, C64};
use crate::states::XState;

/// The deterministic RNG used by all sampling helpers.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform rejection sample of a valid X state.
pub fn random_x_state(rng: &mut ChaCha8Rng) -> XState {
    loop {
        let r = rng.random_range(-1.0..1.0);
        let s = rng.random_range(-1.0..1.0);
        let c1 = rng.random_range(-1.0..1.0);
        let c2 = rng.random_range(-1.0..1.0);
        let c3 = rng.random_range(-1.0..1.0);
        if let Ok(st) = XState::new(r, s, c1, c2, c3) {
            return st;
        }
    }
}

/// Uniform rejection sample from the Bell-diagonal tetrahedron.
pub fn random_bell_diagonal(rng: &mut ChaCha8Rng) -> XState {
    loop {
        let c1 = rng.random_range(-1.0..1.0);
        let c2 = rng.random_range(-1.0..1.0);
        let c3 = rng.random_range(-1.0..1.0);
        if let Ok(st) = XState::bell_diagonal(c1, c2, c3) {
            return st;
        }
    }
}

/// Random classical (diagonal) two-qubit state in X form.
pub fn random_classical_x_state(rng: &mut ChaCha8Rng) -> XState {
    loop {
        let r = rng.random_range(-1.0..1.0);
        let s = rng.random_range(-1.0..1.0);
        let c3 = rng.random_range(-1.0..1.0);
        if let Ok(st) = XState::new(r, s, 0.0, 0.0, c3) {
            return st;
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    /* Box-Muller; u1 bounded away from 0 to keep the log finite */
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(standard_normal(rng), standard_normal(rng))
}

/// Haar-random 2x2 unitary from Euler angles.
pub fn random_local_unitary(rng: &mut ChaCha8Rng) -> CMatrix {
    let alpha = rng.random_range(0.0..2.0 * std::f64::consts::PI);
    let gamma = rng.random_range(0.0..2.0 * std::f64::consts::PI);
    /* cos^2(beta/2) uniform gives the Haar polar angle */
    let u: f64 = rng.random_range(0.0..1.0);
    let beta = 2.0 * u.sqrt().acos();
    let (cb, sb) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let e = |t: f64| C64::new(t.cos(), t.sin());
    CMatrix::mat2([
        [e(-(alpha + gamma) / 2.0) * cb, -e(-(alpha - gamma) / 2.0) * sb],
        [e((alpha - gamma) / 2.0) * sb, e((alpha + gamma) / 2.0) * cb],
    ])
}

/// Product of independent Haar-random local unitaries, as a 4x4 matrix.
pub fn random_product_unitary(rng: &mut ChaCha8Rng) -> CMatrix {
    let ua = random_local_unitary(rng);
    let ub = random_local_unitary(rng);
    kron2(&ua, &ub).expect("2x2 factors")
}

/// Haar-random 4x4 unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary4(rng: &mut ChaCha8Rng) -> CMatrix {
    let mut cols: Vec<[C64; 4]> = (0..4)
        .map(|_| {
            let mut v = [C64::new(0.0, 0.0); 4];
            for entry in &mut v {
                *entry = random_c64(rng);
            }
            v
        })
        .collect();
    for j in 0..4 {
        for k in 0..j {
            let mut proj = C64::new(0.0, 0.0);
            for i in 0..4 {
                proj += cols[k][i].conj() * cols[j][i];
            }
            for i in 0..4 {
                let sub = proj * cols[k][i];
                cols[j][i] -= sub;
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for entry in &mut cols[j] {
            *entry /= norm;
        }
    }
    CMatrix::from_fn(4, |i, j| cols[j][i])
}

/// Density matrix of `cos(chi)|00> + sin(chi)|11>`.
pub fn pure_schmidt_density(chi: f64) -> CMatrix {
    let amp = [
        C64::new(chi.cos(), 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(chi.sin(), 0.0),
    ];
    CMatrix::from_fn(4, |i, j| amp[i] * amp[j].conj())
}

/// Random two-qubit pure state: a Schmidt pair rotated by local unitaries.
/// Returns the density matrix together with the Schmidt angle.
pub fn random_pure_density(rng: &mut ChaCha8Rng) -> (CMatrix, f64) {
    let chi = rng.random_range(0.0..std::f64::consts::FRAC_PI_4);
    let u = random_product_unitary(rng);
    let rho = u.mul(&pure_schmidt_density(chi)).mul(&u.dagger());
    (rho, chi)
}

/// Random trace-preserving channel acting on qubit B only, returned as
/// lifted 4x4 Kraus operators `I (x) k_e`. Built from the Stinespring
/// dilation of a Haar-random unitary on B plus a qubit environment.
pub fn random_b_side_kraus(rng: &mut ChaCha8Rng) -> Vec<CMatrix> {
    let u = random_unitary4(rng);
    let mut ops = Vec::with_capacity(2);
    for e in 0..2 {
        let k = CMatrix::mat2([
            [u.get(e, 0), u.get(e, 2)],
            [u.get(2 + e, 0), u.get(2 + e, 2)],
        ]);
        ops.push(kron2(&CMatrix::identity(2), &k).expect("lift"));
    }
    ops
}

/// Apply a set of Kraus operators to a density matrix.
pub fn apply_operators(rho: &CMatrix, ops: &[CMatrix]) -> CMatrix {
    let mut out = CMatrix::zero(rho.dim());
    for k in ops {
        out = out.add(&k.mul(rho).mul(&k.dagger()));
    }
    out
}
