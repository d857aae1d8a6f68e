//! Randomized self-checks tying the closed forms, the dense route, and
//! the physical axioms together.
//!
//! Every suite returns a named pass/fail result with a short numeric
//! detail. The `canary` option deliberately corrupts one comparison (the
//! sign of the determinant term in the Bell-diagonal norm form) so that
//! operators can confirm the gate actually bites.

use crate::channels::{
    bath_gamma, bath_gamma_quadrature, ChannelFamily, KrausChannel,
};
use crate::discord::{discord_xstate, DiscordOpts, Side};
use crate::dynamics::{
    detect_kinks, evolve, predict_bath_kink, predict_colored_nu, predict_phase_t0, TimeGrid,
};
use crate::ip::{
    ip_bell_diagonal, ip_bell_norm_form, ip_bruteforce, ip_general, ip_point, ip_xstate,
    m_matrix, BruteForceOpts,
};
use crate::sampling::{
    apply_operators, pure_schmidt_density, random_b_side_kraus, random_bell_diagonal,
    random_classical_x_state, random_product_unitary, random_x_state, rng_from_seed,
};
use crate::states::{probe_hamiltonian, XState};
use crate::{Error, Result};

use rand::Rng;

/// Options for the self-check run.
#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Sample count for the heavier randomized suites.
    pub samples: usize,
    /// Corrupt the Bell-diagonal norm form to prove the gate can fail.
    pub canary: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, samples: 1000, canary: false }
    }
}

/// One named check outcome.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check<F>(name: &'static str, f: F) -> CheckResult
where
    F: FnOnce() -> Result<(bool, String)>,
{
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: format!("error: {e}") },
    }
}

/// Run every suite and collect the outcomes.
pub fn run_all(opts: &VerifyOptions) -> Vec<CheckResult> {
    vec![
        route_agreement_x(opts),
        route_agreement_bell(opts),
        channel_algebra(opts),
        classical_states(opts),
        local_unitary_invariance(opts),
        b_side_monotonicity(opts),
        benchmarks(opts),
        kink_predictors(opts),
        quadratic_form_identity(opts),
    ]
}

fn route_agreement_x(opts: &VerifyOptions) -> CheckResult {
    let samples = opts.samples.max(10);
    let seed = opts.seed;
    check("route agreement (X states)", move || {
        let mut rng = rng_from_seed(seed);
        let mut max_dense = 0.0f64;
        let mut violations = 0usize;
        for _ in 0..samples {
            let st = random_x_state(&mut rng);
            let closed = ip_xstate(&st)?;
            let dense = ip_general(&st.to_density_matrix())?;
            max_dense = max_dense.max((closed.value - dense).abs());
            if closed.rule_violation {
                violations += 1;
            }
        }
        let brute_n = (samples / 20).clamp(5, 50);
        let mut rng = rng_from_seed(seed.wrapping_add(101));
        let mut max_brute = 0.0f64;
        let bopts = BruteForceOpts::default();
        for _ in 0..brute_n {
            let st = random_x_state(&mut rng);
            let closed = ip_xstate(&st)?;
            let brute = ip_bruteforce(&st.to_density_matrix(), &bopts)?;
            max_brute = max_brute.max((closed.value - brute.value).abs());
        }
        let passed = max_dense <= 1e-7 && max_brute <= 1e-6;
        Ok((
            passed,
            format!(
                "closed vs dense max {max_dense:.2e} over {samples}; \
                 brute max {max_brute:.2e} over {brute_n}; \
                 candidate-rule violations {violations}"
            ),
        ))
    })
}

fn route_agreement_bell(opts: &VerifyOptions) -> CheckResult {
    let samples = opts.samples.max(10);
    let seed = opts.seed.wrapping_add(1);
    let canary = opts.canary;
    check("route agreement (Bell slice)", move || {
        let mut rng = rng_from_seed(seed);
        let mut max_route = 0.0f64;
        let mut max_diag = 0.0f64;
        let mut max_norm = 0.0f64;
        let mut order_ok = true;
        let mut used = 0usize;
        while used < samples {
            let st = random_bell_diagonal(&mut rng);
            if st.correlation_op_norm() > 0.95 {
                continue;
            }
            used += 1;
            let closed = ip_bell_diagonal(&st)?;
            let dense = ip_general(&st.to_density_matrix())?;
            max_route = max_route.max((closed.value - dense).abs());

            let m = m_matrix(&st.to_density_matrix())?;
            let diag = m.diagonal();
            for (k, v) in closed.branch_values().iter().enumerate() {
                max_diag = max_diag.max((v - diag[k]).abs());
            }

            let norm_form = if canary {
                let hs = st.correlation_hs_norm_sq();
                let op = st.correlation_op_norm();
                let det = st.correlation_det();
                (hs - op * op - 2.0 * det) / (1.0 - op * op)
            } else {
                ip_bell_norm_form(&st)?
            };
            max_norm = max_norm.max((norm_form - closed.value).abs());

            if (closed.m11 - closed.m22) * (st.c2().abs() - st.c1().abs()) < -1e-12 {
                order_ok = false;
            }
        }
        let passed = max_route <= 1e-9 && max_diag <= 1e-9 && max_norm <= 1e-9 && order_ok;
        Ok((
            passed,
            format!(
                "closed vs dense max {max_route:.2e}; branch vs M diag max {max_diag:.2e}; \
                 norm form max {max_norm:.2e}; ordering consistent: {order_ok}; {used} states"
            ),
        ))
    })
}

fn channel_algebra(opts: &VerifyOptions) -> CheckResult {
    let samples = opts.samples.max(10);
    let seed = opts.seed.wrapping_add(2);
    check("channel algebra", move || {
        let mut rng = rng_from_seed(seed);
        let mut max_complete = 0.0f64;
        let mut max_map = 0.0f64;
        let mut max_xshape = 0.0f64;
        for kind in 0..5 {
            for _ in 0..samples / 5 {
                let u: f64 = rng.random_range(0.0..1.0);
                let ch = match kind {
                    0 => KrausChannel::amplitude(u)?,
                    1 => KrausChannel::phase(u)?,
                    2 => KrausChannel::depolarizing(u)?,
                    3 => KrausChannel::colored_from_lambda(2.0 * u - 1.0)?,
                    _ => KrausChannel::common_bath_from_xi4(u.max(1e-6))?,
                };
                max_complete = max_complete.max(ch.completeness_defect());
                let st = random_x_state(&mut rng);
                let dense = ch.apply(&st.to_density_matrix())?;
                let mapped = ch.map_state(&st).to_density_matrix();
                max_map = max_map.max(dense.max_abs_diff(&mapped));
                for (i, j) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
                    max_xshape = max_xshape.max(dense.get(i, j).norm());
                }
            }
        }
        let mut max_semi = 0.0f64;
        for _ in 0..200 {
            let e1: f64 = rng.random_range(0.0..1.0);
            let e2: f64 = rng.random_range(0.0..1.0);
            let st = random_x_state(&mut rng);
            let two_step = KrausChannel::amplitude(e1)?
                .map_state(&KrausChannel::amplitude(e2)?.map_state(&st));
            let one_step = KrausChannel::amplitude(e1 * e2)?.map_state(&st);
            let d = (two_step.r - one_step.r)
                .abs()
                .max((two_step.s - one_step.s).abs())
                .max((two_step.c[0] - one_step.c[0]).abs())
                .max((two_step.c[1] - one_step.c[1]).abs())
                .max((two_step.c[2] - one_step.c[2]).abs());
            max_semi = max_semi.max(d);
        }
        let mut max_gamma = 0.0f64;
        for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let closed = bath_gamma(t, 4.0, 1.0)?;
            let quad = bath_gamma_quadrature(t, 4.0, 1.0)?;
            max_gamma = max_gamma.max((closed - quad).abs());
        }
        let passed = max_complete <= 1e-10
            && max_map <= 1e-11
            && max_xshape <= 1e-13
            && max_semi <= 1e-11
            && max_gamma <= 1e-9;
        Ok((
            passed,
            format!(
                "completeness max {max_complete:.2e}; map vs Kraus max {max_map:.2e}; \
                 X-shape leak max {max_xshape:.2e}; semigroup max {max_semi:.2e}; \
                 dephasing integral max {max_gamma:.2e}"
            ),
        ))
    })
}

fn classical_states(opts: &VerifyOptions) -> CheckResult {
    let seed = opts.seed.wrapping_add(3);
    check("classical states carry no power", move || {
        let mut rng = rng_from_seed(seed);
        let mut max_ip = 0.0f64;
        for _ in 0..200 {
            let st = random_classical_x_state(&mut rng);
            max_ip = max_ip.max(ip_point(&st)?.value);
        }
        Ok((max_ip <= 1e-10, format!("max power {max_ip:.2e} over 200 states")))
    })
}

fn local_unitary_invariance(opts: &VerifyOptions) -> CheckResult {
    let seed = opts.seed.wrapping_add(4);
    check("local unitary invariance", move || {
        let mut rng = rng_from_seed(seed);
        let mut max_diff = 0.0f64;
        for _ in 0..200 {
            let st = random_x_state(&mut rng);
            let u = random_product_unitary(&mut rng);
            let rotated = u.mul(&st.to_density_matrix()).mul(&u.dagger());
            let diff = (ip_general(&rotated)? - ip_point(&st)?.value).abs();
            max_diff = max_diff.max(diff);
        }
        Ok((max_diff <= 1e-9, format!("max drift {max_diff:.2e} over 200 rotations")))
    })
}

fn b_side_monotonicity(opts: &VerifyOptions) -> CheckResult {
    let seed = opts.seed.wrapping_add(5);
    check("B-side monotonicity", move || {
        let mut rng = rng_from_seed(seed);
        let mut worst = f64::NEG_INFINITY;
        for k in 0..200 {
            let st = random_x_state(&mut rng);
            let rho = st.to_density_matrix();
            let before = ip_general(&rho)?;
            let u: f64 = rng.random_range(0.0..1.0);
            let after_rho = match k % 4 {
                0 => {
                    let ops = random_b_side_kraus(&mut rng);
                    apply_operators(&rho, &ops)
                }
                1 => KrausChannel::amplitude(u)?
                    .mirror()
                    .expect("one-sided")
                    .apply(&rho)?,
                2 => KrausChannel::phase(u)?
                    .mirror()
                    .expect("one-sided")
                    .apply(&rho)?,
                _ => KrausChannel::depolarizing(u)?
                    .mirror()
                    .expect("one-sided")
                    .apply(&rho)?,
            };
            let after = ip_general(&after_rho)?;
            worst = worst.max(after - before);
        }
        Ok((
            worst <= 1e-9,
            format!("max power increase {worst:.2e} over 200 B-side channels"),
        ))
    })
}

fn benchmarks(opts: &VerifyOptions) -> CheckResult {
    let _ = opts;
    check("pure-state and discord benchmarks", move || {
        let mut fails = Vec::new();

        let pure = XState::bell_diagonal(1.0, -1.0, 1.0)?;
        let ip_pure = ip_point(&pure)?.value;
        if (ip_pure - 1.0).abs() > 1e-9 {
            fails.push(format!("maximally entangled power {ip_pure}"));
        }

        let mut prev = -1.0f64;
        for k in 0..=6 {
            let chi = 0.05 + 0.116 * k as f64;
            let v = ip_general(&pure_schmidt_density(chi))?;
            if v <= prev {
                fails.push(format!("Schmidt ladder not increasing at chi={chi:.3}"));
            }
            prev = v;
        }

        let dopts = DiscordOpts::default();
        let d_pure = discord_xstate(&pure, &dopts)?.value;
        if (d_pure - 1.0).abs() > 1e-8 {
            fails.push(format!("maximally entangled discord {d_pure}"));
        }
        let bell = XState::bell_diagonal(0.4, 0.2, 0.3)?;
        let da = discord_xstate(&bell, &dopts)?.value;
        if (da - 0.1784333812176363).abs() > 1e-7 {
            fails.push(format!("bell-diagonal discord {da}"));
        }
        let db = discord_xstate(&bell, &DiscordOpts { side: Side::B, ..dopts })?.value;
        if (da - db).abs() > 1e-7 {
            fails.push(format!("side asymmetry {da} vs {db}"));
        }
        let werner = XState::bell_diagonal(-0.7, -0.7, -0.7)?;
        let dw = discord_xstate(&werner, &dopts)?.value;
        if (dw - 0.48403091304112555).abs() > 1e-6 {
            fails.push(format!("isotropic mixture discord {dw}"));
        }
        let product = XState::new(0.3, -0.5, 0.0, 0.0, -0.15)?;
        let dp = discord_xstate(&product, &dopts)?.value;
        if dp.abs() > 1e-9 {
            fails.push(format!("product discord {dp}"));
        }

        let passed = fails.is_empty();
        let detail = if passed {
            "power and discord benchmarks reproduced".to_string()
        } else {
            fails.join("; ")
        };
        Ok((passed, detail))
    })
}

fn kink_predictors(opts: &VerifyOptions) -> CheckResult {
    let seed = opts.seed.wrapping_add(6);
    check("kink predictors", move || {
        let mut fails = Vec::new();
        let mut rng = rng_from_seed(seed);

        /* phase: exact kink time from the coefficient crossing */
        let fam: ChannelFamily = "phase".parse()?;
        let grid = TimeGrid::uniform(5.0, 2001)?;
        let mut tested = 0usize;
        while tested < 10 {
            let st = random_bell_diagonal(&mut rng);
            let t0 = match predict_phase_t0(st.c, 1.0) {
                Some(t0) if t0 > 0.2 && t0 < 4.0 => t0,
                _ => continue,
            };
            tested += 1;
            let events = detect_kinks(&evolve(fam, &st, &grid)?)?;
            match events.iter().min_by(|a, b| {
                (a.t_star - t0).abs().total_cmp(&(b.t_star - t0).abs())
            }) {
                Some(e) if (e.t_star - t0).abs() <= 1e-6 => {}
                Some(e) => fails.push(format!(
                    "phase kink {} vs predicted {t0}",
                    e.t_star
                )),
                None => fails.push(format!("phase kink missing, predicted {t0}")),
            }
        }

        /* colored: first envelope crossing */
        let fam: ChannelFamily = "colored:a=1,tau=0.5".parse()?;
        let st = XState::bell_diagonal(0.3, 0.4, 0.2)?;
        let grid_c = TimeGrid::uniform(fam.default_horizon(), 2001)?;
        let events = detect_kinks(&evolve(fam, &st, &grid_c)?)?;
        let nu_pred = predict_colored_nu(st.c, 1.0, 0.5)?.ok_or_else(|| {
            Error::InvalidState("colored predictor returned nothing".into())
        })?;
        match events.first() {
            Some(e) => {
                let nu_star = fam.nu_of(e.t_star).unwrap_or(f64::NAN);
                if (nu_star - nu_pred).abs() > 1e-3 {
                    fails.push(format!("colored kink nu {nu_star} vs predicted {nu_pred}"));
                }
            }
            None => fails.push("colored kink missing".to_string()),
        }

        /* common bath: crossing for c3 = 0.16, silence for 0.14 */
        let fam: ChannelFamily = "bath".parse()?;
        let grid_b = TimeGrid::uniform(5.0, 2001)?;
        let st = XState::bell_diagonal(0.4, -0.1, 0.16)?;
        let events = detect_kinks(&evolve(fam, &st, &grid_b)?)?;
        let pred = predict_bath_kink(st.c, 4.0, 1.0)?;
        match (events.first(), pred) {
            (Some(e), Some(p)) => {
                if (e.t_star - 0.286).abs() > 0.005 {
                    fails.push(format!("bath kink at {}", e.t_star));
                }
                if (e.t_star - p).abs() > 1e-3 {
                    fails.push(format!("bath kink {} vs predicted {p}", e.t_star));
                }
            }
            _ => fails.push("bath kink missing".to_string()),
        }
        let st = XState::bell_diagonal(0.4, -0.1, 0.14)?;
        if !detect_kinks(&evolve(fam, &st, &grid_b)?)?.is_empty() {
            fails.push("bath kink below the envelope floor".to_string());
        }
        if predict_bath_kink(st.c, 4.0, 1.0)?.is_some() {
            fails.push("bath predictor fired below the floor".to_string());
        }
        let st = XState::bell_diagonal(0.3, 0.3, 0.1)?;
        let tr = evolve(fam, &st, &grid_b)?;
        let spread = tr.ip.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        if spread.1 - spread.0 > 1e-10 {
            fails.push(format!("symmetric bath state moved by {:.2e}", spread.1 - spread.0));
        }
        if !matches!(predict_bath_kink(st.c, 4.0, 1.0), Err(Error::ConstantIp)) {
            fails.push("symmetric bath state not flagged as constant".to_string());
        }

        /* depolarizing never kinks */
        let fam: ChannelFamily = "depolarizing".parse()?;
        let grid_d = TimeGrid::uniform(5.0, 501)?;
        for _ in 0..10 {
            let st = random_bell_diagonal(&mut rng);
            if !detect_kinks(&evolve(fam, &st, &grid_d)?)?.is_empty() {
                fails.push(format!("depolarizing kink for c={:?}", st.c));
            }
        }

        /* amplitude: long-time decay and the two reference behaviours */
        let fam: ChannelFamily = "amplitude".parse()?;
        let st = XState::bell_diagonal(0.4, 0.2, 0.3)?;
        let late = fam.map_at(40.0, &st)?;
        let ip_late = ip_point(&late)?.value;
        if ip_late > 1e-8 {
            fails.push(format!("late-time power {ip_late:.2e}"));
        }
        if late.c.iter().any(|v| v.abs() > 1e-8) {
            fails.push("late-time correlations survive".to_string());
        }
        let grid_a = TimeGrid::uniform(5.0, 2001)?;
        let n1 = detect_kinks(&evolve(fam, &st, &grid_a)?)?.len();
        let st2 = XState::bell_diagonal(0.3, 0.2, 0.301)?;
        let n2 = detect_kinks(&evolve(fam, &st2, &grid_a)?)?.len();
        if n1 != 1 || n2 != 2 {
            fails.push(format!("amplitude kink counts {n1} and {n2}"));
        }

        let passed = fails.is_empty();
        let detail = if passed {
            "phase, colored, bath, depolarizing, amplitude predictors agree".to_string()
        } else {
            fails.join("; ")
        };
        Ok((passed, detail))
    })
}

fn quadratic_form_identity(opts: &VerifyOptions) -> CheckResult {
    let seed = opts.seed.wrapping_add(7);
    check("quadratic form identity", move || {
        let mut rng = rng_from_seed(seed);
        let mut max_diff = 0.0f64;
        for _ in 0..100 {
            let st = random_x_state(&mut rng);
            let u = random_product_unitary(&mut rng);
            let rho = u.mul(&st.to_density_matrix()).mul(&u.dagger());
            let m = m_matrix(&rho)?;
            let mut n = [0.0f64; 3];
            let mut norm = 0.0;
            for v in &mut n {
                *v = rng.random_range(-1.0..1.0);
                norm += *v * *v;
            }
            let norm = norm.sqrt().max(1e-6);
            for v in &mut n {
                *v /= norm;
            }
            let f = crate::ip::qfi(&rho, &probe_hamiltonian(n))? / 4.0;
            let mut quad = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    quad += n[i] * m.get(i, j) * n[j];
                }
            }
            max_diff = max_diff.max((f - quad).abs());
        }
        Ok((
            max_diff <= 1e-9,
            format!("max |F/4 - nMn| {max_diff:.2e} over 100 rotated states"),
        ))
    })
}
