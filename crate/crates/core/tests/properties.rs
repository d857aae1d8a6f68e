//! Randomized invariants over the public API.
//!
//! States are drawn through a block parameterization that is valid by
//! construction (positive block diagonals plus off-diagonal fractions below
//! the geometric-mean bound), so no generator output is ever rejected.

use proptest::prelude::*;

use xip::channels::{bath_gamma, ChannelFamily, KrausChannel};
use xip::discord::{discord_xstate, DiscordOpts, Side};
use xip::ip::{ip_bell_diagonal, ip_general, ip_point, ip_xstate, m_matrix, qfi};
use xip::qmat::{hermitian_eigen, kron2, C64, CMatrix};
use xip::sampling::{random_unitary4, rng_from_seed};
use xip::states::{probe_hamiltonian, XState};

fn state_from_blocks(masses: [f64; 4], f_inner: f64, f_outer: f64) -> XState {
    let total: f64 = masses.iter().map(|u| -(1.0 - u).ln()).sum();
    let p: Vec<f64> = masses.iter().map(|u| -(1.0 - u).ln() / total).collect();
    let inner = f_inner * (p[1] * p[2]).sqrt();
    let outer = f_outer * (p[0] * p[3]).sqrt();
    let r = p[0] + p[1] - p[2] - p[3];
    let s = p[0] - p[1] + p[2] - p[3];
    let c3 = p[0] - p[1] - p[2] + p[3];
    let c1 = 2.0 * (inner + outer);
    let c2 = 2.0 * (inner - outer);
    XState::new(r, s, c1, c2, c3).expect("blockwise construction is valid")
}

fn valid_x_state() -> impl Strategy<Value = XState> {
    (
        prop::array::uniform4(0.001..0.999f64),
        -0.999..0.999f64,
        -0.999..0.999f64,
    )
        .prop_map(|(masses, f1, f2)| state_from_blocks(masses, f1, f2))
}

fn classical_x_state() -> impl Strategy<Value = XState> {
    prop::array::uniform4(0.001..0.999f64).prop_map(|m| state_from_blocks(m, 0.0, 0.0))
}

fn bell_diagonal_state() -> impl Strategy<Value = XState> {
    prop::array::uniform4(0.001..0.999f64).prop_map(|masses| {
        let total: f64 = masses.iter().map(|u| -(1.0 - u).ln()).sum();
        let w: Vec<f64> = masses.iter().map(|u| -(1.0 - u).ln() / total).collect();
        /* mixture over the four Bell states, written out on the corner
           correlation triples */
        let c1 = w[0] + w[1] - w[2] - w[3];
        let c2 = -w[0] + w[1] + w[2] - w[3];
        let c3 = w[0] - w[1] + w[2] - w[3];
        XState::bell_diagonal(c1, c2, c3).expect("bell mixture is valid")
    })
}

fn hermitian4() -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16).prop_map(|entries| {
        let raw = CMatrix::from_fn(4, |i, j| {
            let (re, im) = entries[4 * i + j];
            C64::new(re, im)
        });
        raw.add(&raw.dagger()).scale(0.5)
    })
}

fn complex2() -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 4).prop_map(|entries| {
        CMatrix::from_fn(2, |i, j| {
            let (re, im) = entries[2 * i + j];
            C64::new(re, im)
        })
    })
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn assert_fields_close(a: &XState, b: &XState, eps: f64) {
    let fa = [a.r, a.s, a.c1(), a.c2(), a.c3()];
    let fb = [b.r, b.s, b.c1(), b.c2(), b.c3()];
    for k in 0..5 {
        assert!(
            (fa[k] - fb[k]).abs() <= eps,
            "field {k}: {} vs {} (eps {eps})",
            fa[k],
            fb[k]
        );
    }
}

proptest! {
    #[test]
    fn eigenvalue_sums_match_traces(h in hermitian4()) {
        let e = hermitian_eigen(&h).unwrap();
        let sum: f64 = e.values.iter().sum();
        prop_assert!((sum - h.trace().re).abs() <= 1e-11);
    }

    #[test]
    fn spectra_are_unitarily_covariant(h in hermitian4(), seed in any::<u64>()) {
        let u = random_unitary4(&mut rng_from_seed(seed));
        let rotated = u.mul(&h).mul(&u.dagger());
        let a = sorted_desc(hermitian_eigen(&h).unwrap().values.to_vec());
        let b = sorted_desc(hermitian_eigen(&rotated).unwrap().values.to_vec());
        for k in 0..4 {
            prop_assert!((a[k] - b[k]).abs() <= 1e-10);
        }
    }

    #[test]
    fn kron_trace_is_multiplicative(a in complex2(), b in complex2()) {
        let lhs = kron2(&a, &b).unwrap().trace();
        let rhs = a.trace() * b.trace();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn block_eigenvalues_match_dense(st in valid_x_state()) {
        let analytic = sorted_desc(st.eigenvalues().to_vec());
        let dense = sorted_desc(
            hermitian_eigen(&st.to_density_matrix()).unwrap().values.to_vec(),
        );
        for k in 0..4 {
            prop_assert!((analytic[k] - dense[k]).abs() <= 1e-11);
        }
    }

    #[test]
    fn density_roundtrip_is_identity(st in valid_x_state()) {
        let back = XState::from_density_matrix(&st.to_density_matrix()).unwrap();
        assert_fields_close(&st, &back, 1e-13);
    }

    #[test]
    fn bell_diagonal_spectrum_formula(st in bell_diagonal_state()) {
        let (c1, c2, c3) = (st.c1(), st.c2(), st.c3());
        let expected = sorted_desc(vec![
            (1.0 + c1 - c2 + c3) / 4.0,
            (1.0 + c1 + c2 - c3) / 4.0,
            (1.0 - c1 + c2 + c3) / 4.0,
            (1.0 - c1 - c2 - c3) / 4.0,
        ]);
        let got = sorted_desc(st.eigenvalues().to_vec());
        for k in 0..4 {
            prop_assert!((expected[k] - got[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn channel_maps_agree_with_kraus_routes(st in valid_x_state(), t in 0.0..5.0f64) {
        let families = [
            ChannelFamily::Amplitude { tau: 1.0 },
            ChannelFamily::Phase { tau: 1.0 },
            ChannelFamily::Depolarizing { tau: 1.0 },
            ChannelFamily::Colored { a: 1.0, tau: 0.5 },
            ChannelFamily::CommonBath { s: 4.0, wc: 1.0 },
        ];
        for family in families {
            let ch = family.at(t).unwrap();
            prop_assert!(ch.completeness_defect() <= 1e-10);
            let mapped = ch.map_state(&st);
            prop_assert!(
                XState::new(mapped.r, mapped.s, mapped.c1(), mapped.c2(), mapped.c3()).is_ok()
            );
            /* from_density_matrix only succeeds on X-shaped input, so this
               doubles as the shape-preservation check */
            let dense = XState::from_density_matrix(&ch.apply(&st.to_density_matrix()).unwrap());
            assert_fields_close(&mapped, &dense.unwrap(), 1e-11);
        }
    }

    #[test]
    fn amplitude_damping_composes_as_a_semigroup(
        st in valid_x_state(),
        eta1 in 0.05..1.0f64,
        eta2 in 0.05..1.0f64,
    ) {
        let two_step = KrausChannel::amplitude(eta2)
            .unwrap()
            .map_state(&KrausChannel::amplitude(eta1).unwrap().map_state(&st));
        let one_step = KrausChannel::amplitude(eta1 * eta2).unwrap().map_state(&st);
        assert_fields_close(&two_step, &one_step, 1e-11);
    }

    #[test]
    fn bath_coherence_map_matches_its_decoherence_function(t in 0.0..5.0f64) {
        let gamma = bath_gamma(t, 4.0, 1.0).unwrap();
        let ch = KrausChannel::common_bath(t, 4.0, 1.0).unwrap();
        let st = XState::bell_diagonal(0.4, -0.1, 0.16).unwrap();
        let mapped = ch.map_state(&st);
        let m = (st.c1() + st.c2()) / 2.0;
        let d = (st.c1() - st.c2()) / 2.0;
        let xi4 = (-4.0 * gamma).exp();
        prop_assert!((mapped.c1() - (m + xi4 * d)).abs() <= 1e-12);
        prop_assert!((mapped.c2() - (m - xi4 * d)).abs() <= 1e-12);
    }

    #[test]
    fn power_routes_agree_and_stay_in_range(st in valid_x_state()) {
        let closed = ip_xstate(&st).unwrap();
        let general = ip_general(&st.to_density_matrix()).unwrap();
        prop_assert!((closed.value - general).abs() <= 1e-7);
        prop_assert!(closed.value >= -1e-12);
        prop_assert!(closed.value <= 1.0 + 1e-9);
    }

    #[test]
    fn bell_branch_order_follows_correlations(st in bell_diagonal_state()) {
        let b = ip_bell_diagonal(&st).unwrap();
        let order = (b.m11 - b.m22) * (st.c2().abs() - st.c1().abs());
        prop_assert!(order >= -1e-12);
    }

    #[test]
    fn classical_states_have_no_power(st in classical_x_state()) {
        let b = ip_point(&st).unwrap();
        prop_assert!(b.value <= 1e-10);
    }

    #[test]
    fn quadratic_form_matches_fisher_information(
        st in valid_x_state(),
        raw in prop::array::uniform3(-1.0..1.0f64),
    ) {
        let norm = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt();
        prop_assume!(norm > 0.1);
        let n = [raw[0] / norm, raw[1] / norm, raw[2] / norm];
        let rho = st.to_density_matrix();
        let f = qfi(&rho, &probe_hamiltonian(n)).unwrap() / 4.0;
        let m = m_matrix(&rho).unwrap();
        let mut quad = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                quad += n[i] * m.get(i, j) * n[j];
            }
        }
        prop_assert!((f - quad).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn discord_is_nonnegative_and_bounded(st in valid_x_state()) {
        let opts = DiscordOpts { side: Side::A, grid: 16, refine: 12 };
        let d = discord_xstate(&st, &opts).unwrap();
        prop_assert!(d.value >= -1e-10);
        prop_assert!(d.value <= d.mutual_information + 1e-9);
        prop_assert!(d.classical_correlation >= -1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bell_diagonal_discord_is_side_symmetric(st in bell_diagonal_state()) {
        let a = discord_xstate(&st, &DiscordOpts { side: Side::A, grid: 24, refine: 16 })
            .unwrap()
            .value;
        let b = discord_xstate(&st, &DiscordOpts { side: Side::B, grid: 24, refine: 16 })
            .unwrap()
            .value;
        prop_assert!((a - b).abs() <= 1e-8);
    }
}
