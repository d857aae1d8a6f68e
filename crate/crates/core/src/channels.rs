//! The five decoherence channels, each as a Kraus set plus an equivalent
//! closed-form coefficient map on X states.
//!
//! Three channels act on the probe qubit alone (amplitude damping toward
//! |1>, phase damping, depolarizing), one dephases both qubits through the
//! same classical telegraph process (colored dephasing), and one couples
//! both qubits to a common bosonic bath. Every channel is held in two
//! redundant representations:
//!
//! * a Kraus operator set, applied by matrix sandwiching, and
//! * the induced map on the five X-state coefficients.
//!
//! The two routes are checked against each other constantly (unit tests,
//! the verify suites, and five spot checks per trajectory run), because
//! most bugs in this kind of code are sign or factor slips that exactly one
//! representation catches.
//!
//! Time parameterization lives in [`ChannelFamily`], which turns a physical
//! time into channel parameters: `eta = exp(-tau t / 2)` for amplitude,
//! `gamma = exp(-tau t / 2)` for phase, `p = 1 - exp(-tau t)` for
//! depolarizing, the telegraph envelope `Lambda(nu)` with `nu = t / (2
//! tau)` for colored dephasing, and `xi^4 = exp(-4 Gamma(t))` for the
//! common bath, where `Gamma` integrates the bath spectral density.

use std::str::FromStr;

use crate::qmat::{kron2, pauli, CMatrix, C64};
use crate::states::XState;
use crate::{Error, Result};

/// Completeness defect ceiling for a usable Kraus set.
pub const CPTP_TOL: f64 = 1e-10;

/// Which physical process a channel implements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelKind {
    Amplitude,
    Phase,
    Depolarizing,
    ColoredDephasing,
    CommonBath,
}

impl ChannelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Amplitude => "amplitude",
            ChannelKind::Phase => "phase",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::ColoredDephasing => "colored",
            ChannelKind::CommonBath => "bath",
        }
    }
}

/// Channel parameters after time conversion, one variant per kind.
#[derive(Clone, Copy, Debug)]
pub enum ChannelParams {
    /// `eta` multiplies coherences; populations contract toward |1> on A.
    Amplitude { eta: f64 },
    /// `gamma` multiplies the anti-diagonal coherences; `alpha = (1 +
    /// gamma) / 2` is the identity Kraus weight.
    Phase { gamma: f64, alpha: f64 },
    /// Uniform contraction of the A-side Bloch vector by `1 - p`.
    Depolarizing { p: f64 },
    /// Telegraph envelope; both in-plane correlations scale by `lambda^2`,
    /// `beta = (1 + lambda) / 2` is the per-qubit identity weight.
    Colored { lambda: f64, beta: f64 },
    /// Common-bath coherence survival `xi4 = exp(-4 Gamma(t))` and the
    /// Kraus weight `chi = (1 + xi4) / 2`.
    CommonBath { xi4: f64, chi: f64 },
}

/// A CPTP map on the two-qubit state, as Kraus operators plus the matching
/// coefficient map.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    kind: ChannelKind,
    params: ChannelParams,
    operators: Vec<CMatrix>,
    /// 2x2 A-side factors for one-sided channels, kept so the channel can
    /// be mirrored onto qubit B.
    local_factors: Option<Vec<CMatrix>>,
    /// True for a B-side mirror of a one-sided channel.
    mirrored: bool,
}

fn check_param(name: &str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_finite() && (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange(format!(
            "{name} = {value} outside [{lo}, {hi}]"
        )))
    }
}

fn lift_a_side(factors: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let id = CMatrix::identity(2);
    factors.iter().map(|k| kron2(k, &id)).collect()
}

impl KrausChannel {
    fn build(
        kind: ChannelKind,
        params: ChannelParams,
        operators: Vec<CMatrix>,
        local_factors: Option<Vec<CMatrix>>,
    ) -> Result<Self> {
        let ch = KrausChannel { kind, params, operators, local_factors, mirrored: false };
        let defect = ch.completeness_defect();
        if defect > CPTP_TOL {
            return Err(Error::NotCptp(defect));
        }
        Ok(ch)
    }

    /// Amplitude damping on qubit A with coherence factor `eta`:
    /// `K1 = diag(eta, 1) x I`, `K2 = [[0, 0], [sqrt(1 - eta^2), 0]] x I`.
    pub fn amplitude(eta: f64) -> Result<Self> {
        check_param("eta", eta, 0.0, 1.0)?;
        let z = C64::new(0.0, 0.0);
        let k1 = CMatrix::mat2([[C64::new(eta, 0.0), z], [z, C64::new(1.0, 0.0)]]);
        let k2 = CMatrix::mat2([
            [z, z],
            [C64::new((1.0 - eta * eta).max(0.0).sqrt(), 0.0), z],
        ]);
        let factors = vec![k1, k2];
        KrausChannel::build(
            ChannelKind::Amplitude,
            ChannelParams::Amplitude { eta },
            lift_a_side(&factors)?,
            Some(factors),
        )
    }

    /// Phase damping on qubit A with coherence factor `gamma`:
    /// `K1 = sqrt(alpha) I`, `K2 = sqrt(1 - alpha) sigma3`, `alpha = (1 +
    /// gamma) / 2`.
    pub fn phase(gamma: f64) -> Result<Self> {
        check_param("gamma", gamma, 0.0, 1.0)?;
        let alpha = (1.0 + gamma) / 2.0;
        let factors = vec![
            CMatrix::identity(2).scale(alpha.sqrt()),
            pauli(3).scale((1.0 - alpha).max(0.0).sqrt()),
        ];
        KrausChannel::build(
            ChannelKind::Phase,
            ChannelParams::Phase { gamma, alpha },
            lift_a_side(&factors)?,
            Some(factors),
        )
    }

    /// Depolarizing channel on qubit A with strength `p`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_param("p", p, 0.0, 1.0)?;
        let mut factors = vec![CMatrix::identity(2).scale((1.0 - 0.75 * p).max(0.0).sqrt())];
        for k in 1..=3 {
            factors.push(pauli(k).scale((p / 4.0).max(0.0).sqrt()));
        }
        KrausChannel::build(
            ChannelKind::Depolarizing,
            ChannelParams::Depolarizing { p },
            lift_a_side(&factors)?,
            Some(factors),
        )
    }

    /// Two-sided telegraph dephasing at envelope value `lambda`, as the
    /// four products of the per-qubit factors `M1 = sqrt(beta) I`,
    /// `M2 = sqrt(1 - beta) sigma3`, `beta = (1 + lambda) / 2`.
    pub fn colored_from_lambda(lambda: f64) -> Result<Self> {
        check_param("lambda", lambda, -1.0, 1.0)?;
        let beta = (1.0 + lambda) / 2.0;
        let m = [
            CMatrix::identity(2).scale(beta.sqrt()),
            pauli(3).scale((1.0 - beta).max(0.0).sqrt()),
        ];
        let mut ops = Vec::with_capacity(4);
        for mi in &m {
            for mj in &m {
                ops.push(kron2(mi, mj)?);
            }
        }
        KrausChannel::build(
            ChannelKind::ColoredDephasing,
            ChannelParams::Colored { lambda, beta },
            ops,
            None,
        )
    }

    /// Two-sided telegraph dephasing at dimensionless time `nu`, with
    /// coin-flip rate `a` and memory time `tau`.
    pub fn colored_dephasing(nu: f64, a: f64, tau: f64) -> Result<Self> {
        KrausChannel::colored_from_lambda(colored_dephasing_lambda(nu, a, tau)?)
    }

    /// Common-bath channel at coherence survival `xi4`.
    pub fn common_bath_from_xi4(xi4: f64) -> Result<Self> {
        check_param("xi4", xi4, 0.0, 1.0)?;
        let chi = (1.0 + xi4) / 2.0;
        let rt = 0.5_f64.sqrt();
        let c = chi.sqrt();
        let d = (1.0 - chi).max(0.0).sqrt();
        let k1 = CMatrix::diag(4, &[c, rt, rt, c]);
        let mut k2 = CMatrix::diag(4, &[d, rt, rt, d]);
        k2.set(3, 3, C64::new(-d, 0.0));
        KrausChannel::build(
            ChannelKind::CommonBath,
            ChannelParams::CommonBath { xi4, chi },
            vec![k1, k2],
            None,
        )
    }

    /// Common-bath channel at physical time `t` for a bath with spectral
    /// exponent `s` and cutoff `wc`.
    pub fn common_bath(t: f64, s: f64, wc: f64) -> Result<Self> {
        let gamma_t = bath_gamma(t, s, wc)?;
        KrausChannel::common_bath_from_xi4((-4.0 * gamma_t).exp())
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn params(&self) -> ChannelParams {
        self.params
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    /// Largest entrywise magnitude of `sum K† K - I`.
    pub fn completeness_defect(&self) -> f64 {
        let mut acc = CMatrix::zero(4);
        for k in &self.operators {
            acc = acc.add(&k.dagger().mul(k));
        }
        acc.max_abs_diff(&CMatrix::identity(4))
    }

    /// Applies the channel to a density matrix via the Kraus sum.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch("channels act on 4x4 density matrices"));
        }
        let mut out = CMatrix::zero(4);
        for k in &self.operators {
            out = out.add(&k.mul(rho).mul(&k.dagger()));
        }
        Ok(out)
    }

    /// The closed-form coefficient map equivalent to [`apply`] on X states.
    ///
    /// [`apply`]: KrausChannel::apply
    pub fn map_state(&self, st: &XState) -> XState {
        let (mut r, mut s, [mut c1, mut c2, mut c3]) = (st.r, st.s, st.c);
        match self.params {
            ChannelParams::Amplitude { eta } => {
                let e2 = eta * eta;
                if self.mirrored {
                    s = e2 * (1.0 + s) - 1.0;
                    c3 = e2 * c3 + (e2 - 1.0) * r;
                } else {
                    r = e2 * (1.0 + r) - 1.0;
                    c3 = e2 * c3 + (e2 - 1.0) * s;
                }
                c1 *= eta;
                c2 *= eta;
            }
            ChannelParams::Phase { gamma, .. } => {
                c1 *= gamma;
                c2 *= gamma;
            }
            ChannelParams::Depolarizing { p } => {
                let f = 1.0 - p;
                if self.mirrored {
                    s *= f;
                } else {
                    r *= f;
                }
                c1 *= f;
                c2 *= f;
                c3 *= f;
            }
            ChannelParams::Colored { lambda, .. } => {
                let l2 = lambda * lambda;
                c1 *= l2;
                c2 *= l2;
            }
            ChannelParams::CommonBath { xi4, .. } => {
                let (m, d) = ((c1 + c2) / 2.0, (c1 - c2) / 2.0);
                c1 = m + xi4 * d;
                c2 = m - xi4 * d;
            }
        }
        XState::new_unchecked(r, s, c1, c2, c3)
    }

    /// B-side copy of a one-sided channel (the 2x2 factors moved to the
    /// second tensor slot). `None` for intrinsically two-sided channels.
    pub fn mirror(&self) -> Option<KrausChannel> {
        let factors = self.local_factors.as_ref()?;
        let id = CMatrix::identity(2);
        let operators = factors
            .iter()
            .map(|k| kron2(&id, k).expect("2x2 factors"))
            .collect();
        Some(KrausChannel {
            kind: self.kind,
            params: self.params,
            operators,
            local_factors: None,
            mirrored: true,
        })
    }
}

/// Telegraph-noise dephasing envelope.
///
/// For `4 a tau > 1` (underdamped), `Lambda(nu) = exp(-nu) [cos(mu nu) +
/// sin(mu nu) / mu]` with `mu = sqrt((4 a tau)^2 - 1)`. For `4 a tau < 1`
/// the square root turns imaginary and the trigonometric functions continue
/// to hyperbolic ones; exactly at `4 a tau = 1` the limit is
/// `exp(-nu) (1 + nu)`.
pub fn colored_dephasing_lambda(nu: f64, a: f64, tau: f64) -> Result<f64> {
    if !(a > 0.0) || !(tau > 0.0) {
        return Err(Error::ParamOutOfRange(format!(
            "colored dephasing needs a > 0 and tau > 0, got a = {a}, tau = {tau}"
        )));
    }
    if !(nu >= 0.0) {
        return Err(Error::ParamOutOfRange(format!("nu = {nu} must be >= 0")));
    }
    let x = 4.0 * a * tau;
    let envelope = (-nu).exp();
    let lam = if (x - 1.0).abs() < 1e-9 {
        envelope * (1.0 + nu)
    } else if x > 1.0 {
        let mu = (x * x - 1.0).sqrt();
        envelope * ((mu * nu).cos() + (mu * nu).sin() / mu)
    } else {
        let mu = (1.0 - x * x).sqrt();
        envelope * ((mu * nu).cosh() + (mu * nu).sinh() / mu)
    };
    Ok(lam)
}

/* Adaptive Simpson refinement of one panel. `whole` is the three-point
 * estimate over [a, b]; the recursion keeps the classic 15x error model. */
#[allow(clippy::too_many_arguments)]
fn refine_panel(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let sum = left + right;
    if (sum - whole).abs() <= 15.0 * tol {
        return Some(sum + (sum - whole) / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = refine_panel(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1)?;
    let r = refine_panel(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}

/// Integrates `f` over panels of width at most `max_panel` on `[0, upper]`
/// to a relative tolerance of about 1e-10.
fn adaptive_integral(
    f: &dyn Fn(f64) -> f64,
    upper: f64,
    max_panel: f64,
    what: &str,
) -> Result<f64> {
    let panels = (upper / max_panel).ceil().max(1.0) as usize;
    let width = upper / panels as f64;
    /* coarse pass to size the absolute tolerance */
    let mut coarse = 0.0;
    let mut nodes = Vec::with_capacity(panels);
    for i in 0..panels {
        let a = i as f64 * width;
        let b = a + width;
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        coarse += whole;
        nodes.push((a, b, fa, fm, fb, whole));
    }
    let tol_total = 1e-10 * coarse.abs().max(1e-8);
    let tol_panel = (tol_total / panels as f64).max(1e-17);
    let mut total = 0.0;
    for (a, b, fa, fm, fb, whole) in nodes {
        match refine_panel(f, a, b, fa, fb, fm, whole, tol_panel, 40) {
            Some(v) => total += v,
            None => {
                return Err(Error::QuadratureFailure(format!(
                    "{what} on [{a:.3}, {b:.3}]"
                )))
            }
        }
    }
    Ok(total)
}

/// Common-bath decoherence function.
///
/// `Gamma(t)` integrates `(1 - cos(w t)) / w^2` against the spectral
/// density `J(w) = w^s / wc^(s-1) exp(-w / wc)`; substituting `u = w / wc`
/// leaves a dimensionless integral in `T = wc t`. For `s = 4` the integral
/// has the closed form `2 - 2 (1 - 3 T^2) / (1 + T^2)^3`, used as a fast
/// path; anything else goes through adaptive quadrature, and the fast path
/// is itself cross-checked against the quadrature in the verify suite.
pub fn bath_gamma(t: f64, s: f64, wc: f64) -> Result<f64> {
    check_bath_params(t, s, wc)?;
    if (s - 4.0).abs() < 1e-12 {
        let t2 = (wc * t) * (wc * t);
        let denom = (1.0 + t2).powi(3);
        return Ok(2.0 - 2.0 * (1.0 - 3.0 * t2) / denom);
    }
    bath_gamma_quadrature(t, s, wc)
}

/// Quadrature route for `Gamma(t)`, exposed for cross-checks.
pub fn bath_gamma_quadrature(t: f64, s: f64, wc: f64) -> Result<f64> {
    check_bath_params(t, s, wc)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let big_t = wc * t;
    /* 1 - cos(Tu) written as 2 sin^2(Tu/2): no cancellation for small Tu,
     * and the u^(s-2) prefactor is tamed at u = 0 by the sin^2 zero */
    let f = move |u: f64| -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let sh = (0.5 * big_t * u).sin();
        2.0 * sh * sh * u.powf(s - 2.0) * (-u).exp()
    };
    let upper = (20.0 * s).max(60.0);
    let max_panel = (std::f64::consts::PI / big_t.max(1e-9)).min(1.0);
    adaptive_integral(&f, upper, max_panel, "bath gamma")
}

/// Large-time limit of `Gamma(t)`: the oscillation averages out and the
/// integral of `u^(s-2) exp(-u)` remains. The unit interval is summed as
/// an alternating series (which also absorbs the `s < 2` endpoint
/// singularity); the tail is quadrature.
pub fn bath_gamma_infinity(s: f64) -> Result<f64> {
    check_bath_params(0.0, s, 1.0)?;
    let mut head = 0.0;
    let mut factorial = 1.0;
    for k in 0..48 {
        if k > 0 {
            factorial *= k as f64;
        }
        let term = 1.0 / (factorial * (s - 1.0 + k as f64));
        head += if k % 2 == 0 { term } else { -term };
    }
    let f = move |u: f64| -> f64 { u.powf(s - 2.0) * (-u).exp() };
    let upper = (20.0 * s).max(60.0);
    let shifted = move |v: f64| f(v + 1.0);
    let tail = adaptive_integral(&shifted, upper - 1.0, 1.0, "bath gamma tail")?;
    Ok(head + tail)
}

fn check_bath_params(t: f64, s: f64, wc: f64) -> Result<()> {
    if !(t >= 0.0) || !(s > 1.0) || !(wc > 0.0) {
        return Err(Error::ParamOutOfRange(format!(
            "bath needs t >= 0, s > 1, wc > 0, got t = {t}, s = {s}, wc = {wc}"
        )));
    }
    Ok(())
}

/// A time-parameterized channel family, the unit the CLI and the dynamics
/// code work with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelFamily {
    Amplitude { tau: f64 },
    Phase { tau: f64 },
    Depolarizing { tau: f64 },
    Colored { a: f64, tau: f64 },
    CommonBath { s: f64, wc: f64 },
}

impl ChannelFamily {
    pub fn kind(&self) -> ChannelKind {
        match self {
            ChannelFamily::Amplitude { .. } => ChannelKind::Amplitude,
            ChannelFamily::Phase { .. } => ChannelKind::Phase,
            ChannelFamily::Depolarizing { .. } => ChannelKind::Depolarizing,
            ChannelFamily::Colored { .. } => ChannelKind::ColoredDephasing,
            ChannelFamily::CommonBath { .. } => ChannelKind::CommonBath,
        }
    }

    /// The channel at physical time `t`.
    pub fn at(&self, t: f64) -> Result<KrausChannel> {
        if !(t >= 0.0) {
            return Err(Error::ParamOutOfRange(format!("time t = {t} must be >= 0")));
        }
        match *self {
            ChannelFamily::Amplitude { tau } => KrausChannel::amplitude((-0.5 * tau * t).exp()),
            ChannelFamily::Phase { tau } => KrausChannel::phase((-0.5 * tau * t).exp()),
            ChannelFamily::Depolarizing { tau } => {
                KrausChannel::depolarizing(1.0 - (-tau * t).exp())
            }
            ChannelFamily::Colored { a, tau } => {
                KrausChannel::colored_dephasing(t / (2.0 * tau), a, tau)
            }
            ChannelFamily::CommonBath { s, wc } => KrausChannel::common_bath(t, s, wc),
        }
    }

    /// Closed-form evolved coefficients at time `t`, skipping the Kraus
    /// machinery. This is the route trajectories take.
    pub fn map_at(&self, t: f64, initial: &XState) -> Result<XState> {
        Ok(self.at(t)?.map_state(initial))
    }

    /// Dimensionless time for the colored channel, `nu = t / (2 tau)`.
    pub fn nu_of(&self, t: f64) -> Option<f64> {
        match self {
            ChannelFamily::Colored { tau, .. } => Some(t / (2.0 * tau)),
            _ => None,
        }
    }

    /// Default trajectory horizon: five decay times for the rate-based
    /// channels, `nu` up to 3 for colored dephasing, `t` up to 5 for the
    /// common bath.
    pub fn default_horizon(&self) -> f64 {
        match *self {
            ChannelFamily::Amplitude { tau }
            | ChannelFamily::Phase { tau }
            | ChannelFamily::Depolarizing { tau } => 5.0 / tau,
            ChannelFamily::Colored { tau, .. } => 6.0 * tau,
            ChannelFamily::CommonBath { .. } => 5.0,
        }
    }

    /// Whether the family keeps `r = s = 0` input on the Bell-diagonal
    /// slice (all but amplitude damping do).
    pub fn preserves_bell_diagonal(&self) -> bool {
        !matches!(self, ChannelFamily::Amplitude { .. })
    }
}

impl FromStr for ChannelFamily {
    type Err = Error;

    /// Parses channel specs like `"amplitude:tau=1"`,
    /// `"colored:a=1,tau=0.5"`, `"bath:s=4,wc=1"`. Omitted parameters take
    /// the defaults `tau=1` (rate channels), `a=1, tau=0.5` (colored),
    /// `s=4, wc=1` (bath).
    fn from_str(text: &str) -> Result<Self> {
        let (name, rest) = match text.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (text.trim(), None),
        };
        let mut pairs: Vec<(String, f64)> = Vec::new();
        if let Some(rest) = rest {
            for item in rest.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let (k, v) = item.split_once('=').ok_or_else(|| {
                    Error::Parse(format!("channel parameter {item:?} is not key=value"))
                })?;
                let value: f64 = v.trim().parse().map_err(|_| {
                    Error::Parse(format!("bad number {:?} for channel parameter {}", v.trim(), k.trim()))
                })?;
                pairs.push((k.trim().to_string(), value));
            }
        }
        let lookup = |key: &str, default: f64| -> f64 {
            pairs
                .iter()
                .rev()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .unwrap_or(default)
        };
        let allow = |allowed: &[&str]| -> Result<()> {
            for (k, _) in &pairs {
                if !allowed.contains(&k.as_str()) {
                    return Err(Error::Parse(format!(
                        "unknown parameter `{k}` for channel `{name}`"
                    )));
                }
            }
            Ok(())
        };
        let family = match name {
            "amplitude" => {
                allow(&["tau"])?;
                ChannelFamily::Amplitude { tau: lookup("tau", 1.0) }
            }
            "phase" => {
                allow(&["tau"])?;
                ChannelFamily::Phase { tau: lookup("tau", 1.0) }
            }
            "depolarizing" => {
                allow(&["tau"])?;
                ChannelFamily::Depolarizing { tau: lookup("tau", 1.0) }
            }
            "colored" => {
                allow(&["a", "tau"])?;
                ChannelFamily::Colored { a: lookup("a", 1.0), tau: lookup("tau", 0.5) }
            }
            "bath" => {
                allow(&["s", "wc"])?;
                ChannelFamily::CommonBath { s: lookup("s", 4.0), wc: lookup("wc", 1.0) }
            }
            other => return Err(Error::UnknownChannel(other.to_string())),
        };
        let ok = match family {
            ChannelFamily::Amplitude { tau }
            | ChannelFamily::Phase { tau }
            | ChannelFamily::Depolarizing { tau } => tau > 0.0,
            ChannelFamily::Colored { a, tau } => a > 0.0 && tau > 0.0,
            ChannelFamily::CommonBath { s, wc } => s > 1.0 && wc > 0.0,
        };
        if !ok {
            return Err(Error::ParamOutOfRange(format!("channel spec {text:?}")));
        }
        Ok(family)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::XState;

    fn assert_close(a: f64, b: f64, eps: f64) {
        assert!((a - b).abs() <= eps, "{a} vs {b} (eps {eps})");
    }

    fn assert_state_close(a: &XState, b: &XState, eps: f64) {
        assert_close(a.r, b.r, eps);
        assert_close(a.s, b.s, eps);
        for k in 0..3 {
            assert_close(a.c[k], b.c[k], eps);
        }
    }

    fn map_vs_kraus(ch: &KrausChannel, st: &XState) -> f64 {
        let mapped = ch.map_state(st);
        let routed = XState::from_density_matrix(&ch.apply(&st.to_density_matrix()).unwrap())
            .expect("channel must preserve X shape");
        [
            (mapped.r - routed.r).abs(),
            (mapped.s - routed.s).abs(),
            (mapped.c[0] - routed.c[0]).abs(),
            (mapped.c[1] - routed.c[1]).abs(),
            (mapped.c[2] - routed.c[2]).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    #[test]
    fn amplitude_matches_printed_map() {
        let st = XState::bell_diagonal(0.4, 0.2, 0.3).unwrap();
        let ch = KrausChannel::amplitude(0.5).unwrap();
        let out = ch.map_state(&st);
        assert_state_close(&out, &XState::new_unchecked(-0.75, 0.0, 0.2, 0.1, 0.075), 1e-15);
        assert!(map_vs_kraus(&ch, &st) < 1e-15);
        /* full decay parks qubit A in |1> */
        let dead = KrausChannel::amplitude(0.0).unwrap().map_state(&st);
        assert_state_close(&dead, &XState::new_unchecked(-1.0, 0.0, 0.0, 0.0, 0.0), 1e-15);
        /* identity at eta = 1 */
        let same = KrausChannel::amplitude(1.0).unwrap().map_state(&st);
        assert_state_close(&same, &st, 0.0);
    }

    #[test]
    fn amplitude_handles_polarized_input() {
        let st = XState::new(0.3, -0.4, 0.25, 0.15, -0.2).unwrap();
        let ch = KrausChannel::amplitude(0.7).unwrap();
        let out = ch.map_state(&st);
        assert_state_close(
            &out,
            &XState::new_unchecked(-0.363, -0.4, 0.175, 0.105, 0.106),
            1e-15,
        );
        assert!(map_vs_kraus(&ch, &st) < 1e-15);
    }

    #[test]
    fn amplitude_composes_as_semigroup() {
        let st = XState::new(0.1, 0.2, 0.3, -0.25, 0.15).unwrap();
        let once = KrausChannel::amplitude(0.8 * 0.6).unwrap().map_state(&st);
        let twice = KrausChannel::amplitude(0.6)
            .unwrap()
            .map_state(&KrausChannel::amplitude(0.8).unwrap().map_state(&st));
        assert_state_close(&once, &twice, 1e-14);
    }

    #[test]
    fn phase_scales_in_plane_correlations() {
        let st = XState::bell_diagonal(0.4, 0.1, 0.3).unwrap();
        let out = KrausChannel::phase(0.5).unwrap().map_state(&st);
        assert_state_close(&out, &XState::new_unchecked(0.0, 0.0, 0.2, 0.05, 0.3), 1e-15);
        let gone = KrausChannel::phase(0.0).unwrap().map_state(&st);
        assert_close(gone.c[0], 0.0, 0.0);
        assert_close(gone.c[1], 0.0, 0.0);
        assert_close(gone.c[2], 0.3, 0.0);
        assert!(map_vs_kraus(&KrausChannel::phase(0.37).unwrap(), &st) < 1e-15);
    }

    #[test]
    fn depolarizing_contracts_everything_on_a() {
        let st = XState::bell_diagonal(0.4, 0.3, 0.2).unwrap();
        let out = KrausChannel::depolarizing(0.5).unwrap().map_state(&st);
        assert_state_close(&out, &XState::new_unchecked(0.0, 0.0, 0.2, 0.15, 0.1), 1e-15);
        let polarized = XState::new(0.4, -0.3, 0.2, 0.1, 0.15).unwrap();
        let wiped = KrausChannel::depolarizing(1.0).unwrap().map_state(&polarized);
        assert_state_close(&wiped, &XState::new_unchecked(0.0, -0.3, 0.0, 0.0, 0.0), 1e-15);
        assert!(map_vs_kraus(&KrausChannel::depolarizing(0.31).unwrap(), &polarized) < 1e-15);
    }

    #[test]
    fn colored_dephasing_squares_the_envelope() {
        let st = XState::bell_diagonal(0.3, 0.4, 0.2).unwrap();
        let ch = KrausChannel::colored_from_lambda(0.5).unwrap();
        let out = ch.map_state(&st);
        assert_state_close(&out, &XState::new_unchecked(0.0, 0.0, 0.075, 0.1, 0.2), 1e-15);
        assert!(map_vs_kraus(&ch, &st) < 1e-15);
        /* populations are fixed points of dephasing */
        let polarized = XState::new(0.2, -0.1, 0.3, 0.2, 0.1).unwrap();
        let out = ch.map_state(&polarized);
        assert_close(out.r, 0.2, 0.0);
        assert_close(out.s, -0.1, 0.0);
        assert!(map_vs_kraus(&ch, &polarized) < 1e-15);
    }

    #[test]
    fn telegraph_envelope_values() {
        /* underdamped, mu = sqrt(3) */
        assert_close(
            colored_dephasing_lambda(0.455, 1.0, 0.5).unwrap(),
            0.7071231141286923,
            1e-15,
        );
        assert_close(
            colored_dephasing_lambda(1.0, 1.0, 0.5).unwrap(),
            0.15057436514588762,
            1e-15,
        );
        /* overdamped, 4 a tau = 0.6 */
        assert_close(
            colored_dephasing_lambda(0.5, 0.3, 0.5).unwrap(),
            0.9671208878228795,
            1e-15,
        );
        /* critical boundary, 4 a tau = 1 */
        assert_close(
            colored_dephasing_lambda(0.5, 0.5, 0.5).unwrap(),
            1.5 * (-0.5_f64).exp(),
            1e-12,
        );
        assert_close(colored_dephasing_lambda(0.0, 2.0, 0.5).unwrap(), 1.0, 0.0);
    }

    #[test]
    fn common_bath_mixes_in_plane_correlations() {
        let st = XState::bell_diagonal(0.4, -0.1, 0.16).unwrap();
        let ch = KrausChannel::common_bath_from_xi4(0.04).unwrap();
        let out = ch.map_state(&st);
        assert_state_close(&out, &XState::new_unchecked(0.0, 0.0, 0.16, 0.14, 0.16), 1e-15);
        assert!(map_vs_kraus(&ch, &st) < 1e-15);
        /* c1 = c2 is a fixed line */
        let fixed = XState::bell_diagonal(0.3, 0.3, 0.1).unwrap();
        let out = ch.map_state(&fixed);
        assert_state_close(&out, &fixed, 0.0);
    }

    #[test]
    fn bath_gamma_closed_form_and_quadrature() {
        assert_close(bath_gamma(0.0, 4.0, 1.0).unwrap(), 0.0, 0.0);
        assert_close(bath_gamma(1.0, 4.0, 1.0).unwrap(), 2.5, 1e-14);
        let table = [
            (0.1, 0.11705511302037008),
            (0.5, 1.744),
            (2.0, 2.176),
            (5.0, 2.008420573509331),
        ];
        for (t, want) in table {
            assert_close(bath_gamma(t, 4.0, 1.0).unwrap(), want, 1e-13);
            assert_close(bath_gamma_quadrature(t, 4.0, 1.0).unwrap(), want, 1e-9);
        }
        /* long-time tail approaches the asymptote */
        assert_close(bath_gamma_quadrature(50.0, 4.0, 1.0).unwrap(), 2.0000009587210745, 1e-7);
        /* an off-family point with a hand-computable value: s = 3, wc = 2,
         * t = 1 gives Gamma(2)[1 - cos(2 atan 2) / 5] = 1.12 */
        assert_close(bath_gamma_quadrature(1.0, 3.0, 2.0).unwrap(), 1.12, 1e-9);
        assert_close(bath_gamma(1.0, 3.0, 2.0).unwrap(), 1.12, 1e-9);
    }

    #[test]
    fn bath_gamma_limits() {
        assert_close(bath_gamma_infinity(4.0).unwrap(), 2.0, 1e-10);
        assert_close(bath_gamma_infinity(3.0).unwrap(), 1.0, 1e-10);
        assert_close(bath_gamma_infinity(2.0).unwrap(), 1.0, 1e-10);
        assert_close(
            bath_gamma_infinity(1.5).unwrap(),
            std::f64::consts::PI.sqrt(),
            1e-10,
        );
    }

    #[test]
    fn channels_are_complete_and_preserve_x_shape() {
        let st = XState::new(0.2, -0.3, 0.35, -0.2, 0.25).unwrap();
        let channels = [
            KrausChannel::amplitude(0.6).unwrap(),
            KrausChannel::phase(0.4).unwrap(),
            KrausChannel::depolarizing(0.7).unwrap(),
            KrausChannel::colored_from_lambda(-0.3).unwrap(),
            KrausChannel::common_bath(0.8, 4.0, 1.0).unwrap(),
        ];
        for ch in &channels {
            assert!(ch.completeness_defect() < 1e-12, "{:?}", ch.kind());
            let out = ch.apply(&st.to_density_matrix()).unwrap();
            assert_close(out.trace().re, 1.0, 1e-12);
            let back = XState::from_density_matrix(&out).unwrap();
            back.validate().unwrap();
            assert!(map_vs_kraus(ch, &st) < 1e-13, "{:?}", ch.kind());
        }
    }

    #[test]
    fn mirrored_channels_act_on_the_second_qubit() {
        let st = XState::new(0.3, -0.4, 0.25, 0.15, -0.2).unwrap();
        let b_side = KrausChannel::amplitude(0.7).unwrap().mirror().unwrap();
        let out = b_side.map_state(&st);
        /* roles of r and s swap relative to the A-side map */
        assert_state_close(
            &out,
            &XState::new_unchecked(0.3, 0.49 * 0.6 - 1.0, 0.175, 0.105, 0.49 * (-0.2) + (0.49 - 1.0) * 0.3),
            1e-15,
        );
        assert!(map_vs_kraus(&b_side, &st) < 1e-15);
        assert!(KrausChannel::colored_from_lambda(0.5)
            .unwrap()
            .mirror()
            .is_none());
        let depol_b = KrausChannel::depolarizing(0.4).unwrap().mirror().unwrap();
        assert!(map_vs_kraus(&depol_b, &st) < 1e-15);
        let phase_b = KrausChannel::phase(0.6).unwrap().mirror().unwrap();
        assert!(map_vs_kraus(&phase_b, &st) < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(
            KrausChannel::amplitude(1.5),
            Err(Error::ParamOutOfRange(_))
        ));
        assert!(matches!(
            KrausChannel::phase(-0.1),
            Err(Error::ParamOutOfRange(_))
        ));
        assert!(matches!(
            KrausChannel::depolarizing(f64::NAN),
            Err(Error::ParamOutOfRange(_))
        ));
        assert!(matches!(
            colored_dephasing_lambda(-0.5, 1.0, 0.5),
            Err(Error::ParamOutOfRange(_))
        ));
        assert!(matches!(
            bath_gamma(1.0, 0.9, 1.0),
            Err(Error::ParamOutOfRange(_))
        ));
    }

    #[test]
    fn family_time_conversion() {
        let amp = ChannelFamily::Amplitude { tau: 1.0 };
        match amp.at(2.0).unwrap().params() {
            ChannelParams::Amplitude { eta } => assert_close(eta, (-1.0_f64).exp(), 1e-15),
            other => panic!("wrong params {other:?}"),
        }
        let dep = ChannelFamily::Depolarizing { tau: 2.0 };
        match dep.at(1.0).unwrap().params() {
            ChannelParams::Depolarizing { p } => assert_close(p, 1.0 - (-2.0_f64).exp(), 1e-15),
            other => panic!("wrong params {other:?}"),
        }
        let col = ChannelFamily::Colored { a: 1.0, tau: 0.5 };
        assert_close(col.nu_of(0.455).unwrap(), 0.455, 0.0);
        match col.at(0.455).unwrap().params() {
            ChannelParams::Colored { lambda, .. } => {
                assert_close(lambda, 0.7071231141286923, 1e-15)
            }
            other => panic!("wrong params {other:?}"),
        }
        let bath = ChannelFamily::CommonBath { s: 4.0, wc: 1.0 };
        match bath.at(1.0).unwrap().params() {
            ChannelParams::CommonBath { xi4, .. } => assert_close(xi4, (-10.0_f64).exp(), 1e-14),
            other => panic!("wrong params {other:?}"),
        }
        /* identity at t = 0 for every family */
        let st = XState::new(0.2, -0.3, 0.35, -0.2, 0.25).unwrap();
        for family in [
            amp,
            ChannelFamily::Phase { tau: 1.0 },
            dep,
            col,
            bath,
        ] {
            let out = family.map_at(0.0, &st).unwrap();
            assert_state_close(&out, &st, 1e-15);
        }
    }

    #[test]
    fn parses_channel_specs() {
        assert_eq!(
            "amplitude:tau=1".parse::<ChannelFamily>().unwrap(),
            ChannelFamily::Amplitude { tau: 1.0 }
        );
        assert_eq!(
            "colored:a=1,tau=0.5".parse::<ChannelFamily>().unwrap(),
            ChannelFamily::Colored { a: 1.0, tau: 0.5 }
        );
        assert_eq!(
            "bath:s=4,wc=1".parse::<ChannelFamily>().unwrap(),
            ChannelFamily::CommonBath { s: 4.0, wc: 1.0 }
        );
        /* defaults fill omitted parameters */
        assert_eq!(
            "colored".parse::<ChannelFamily>().unwrap(),
            ChannelFamily::Colored { a: 1.0, tau: 0.5 }
        );
        assert_eq!(
            "phase".parse::<ChannelFamily>().unwrap(),
            ChannelFamily::Phase { tau: 1.0 }
        );
        assert!(matches!(
            "teleport:tau=1".parse::<ChannelFamily>(),
            Err(Error::UnknownChannel(_))
        ));
        assert!(matches!(
            "phase:tau".parse::<ChannelFamily>(),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            "phase:rate=2".parse::<ChannelFamily>(),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            "phase:tau=-1".parse::<ChannelFamily>(),
            Err(Error::ParamOutOfRange(_))
        ));
        assert!(matches!(
            "bath:s=1,wc=1".parse::<ChannelFamily>(),
            Err(Error::ParamOutOfRange(_))
        ));
    }

    #[test]
    fn horizons_and_slice_preservation() {
        assert_close(ChannelFamily::Amplitude { tau: 2.0 }.default_horizon(), 2.5, 0.0);
        assert_close(
            ChannelFamily::Colored { a: 1.0, tau: 0.5 }.default_horizon(),
            3.0,
            0.0,
        );
        assert_close(ChannelFamily::CommonBath { s: 4.0, wc: 1.0 }.default_horizon(), 5.0, 0.0);
        assert!(!ChannelFamily::Amplitude { tau: 1.0 }.preserves_bell_diagonal());
        assert!(ChannelFamily::Phase { tau: 1.0 }.preserves_bell_diagonal());
    }
}
