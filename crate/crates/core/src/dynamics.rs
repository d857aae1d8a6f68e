//! Trajectories of X states under the noise families and detection of
//! sudden changes.
//!
//! A sudden change is a slope discontinuity in an otherwise continuous
//! figure of merit. For interferometric power it happens when the active
//! closed-form branch switches; for discord it happens when the optimal
//! measurement basis jumps between basins. Both are located by bisection
//! after a coarse scan over a time grid, and confirmed by comparing
//! one-sided slopes so that tangential branch touchings are not reported.

use crate::channels::{bath_gamma, colored_dephasing_lambda, ChannelFamily};
use crate::discord::{discord_xstate, DiscordOpts};
use crate::exec;
use crate::ip::{ip_point, xstate_branch_values, Branch};
use crate::states::XState;
use crate::{Error, Result};

/// Minimum one-sided slope difference for a reported kink.
pub const SLOPE_JUMP_TOL: f64 = 1e-6;

/// Axis rotation (radians) between neighbouring grid points that flags a
/// possible measurement-basis switch.
pub const AXIS_JUMP_TOL: f64 = 0.3;

/// Bisection window width at which kink location stops.
pub const KINK_TIME_TOL: f64 = 1e-10;

/// Strictly increasing evaluation times.
#[derive(Clone, Debug)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// Uniform grid over `[0, t_max]` with `points >= 2` samples.
    pub fn uniform(t_max: f64, points: usize) -> Result<TimeGrid> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::ParamOutOfRange(format!(
                "grid horizon must be positive, got {t_max}"
            )));
        }
        if points < 2 {
            return Err(Error::ParamOutOfRange(format!(
                "grid needs at least 2 points, got {points}"
            )));
        }
        let n = points - 1;
        let times = (0..points)
            .map(|i| t_max * i as f64 / n as f64)
            .collect();
        Ok(TimeGrid { times })
    }

    /// Explicit times; must be finite, nonnegative, strictly increasing.
    pub fn from_times(times: Vec<f64>) -> Result<TimeGrid> {
        if times.is_empty() {
            return Err(Error::ParamOutOfRange("empty time grid".into()));
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::ParamOutOfRange(format!("bad grid time {t}")));
            }
            if i > 0 && t <= times[i - 1] {
                return Err(Error::ParamOutOfRange(
                    "grid times must be strictly increasing".into(),
                ));
            }
        }
        Ok(TimeGrid { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Evolved state data along a time grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub family: ChannelFamily,
    pub initial: XState,
    pub times: Vec<f64>,
    pub states: Vec<XState>,
    /// Interferometric power at each time.
    pub ip: Vec<f64>,
    /// Active closed-form branch at each time.
    pub branches: Vec<Branch>,
    pub discord: Option<Vec<f64>>,
    pub discord_axes: Option<Vec<[f64; 3]>>,
}

/// What kind of nonanalyticity an event marks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    IpBranchSwitch,
    DiscordBasisSwitch,
}

/// A located slope discontinuity.
#[derive(Clone, Copy, Debug)]
pub struct SuddenChangeEvent {
    pub t_star: f64,
    pub kind: EventKind,
    /// Branch labels around an interferometric-power switch; `None` for
    /// discord events.
    pub branch_before: Option<Branch>,
    pub branch_after: Option<Branch>,
    /// Value of the figure of merit at the kink.
    pub value: f64,
    pub left_slope: f64,
    pub right_slope: f64,
}

impl SuddenChangeEvent {
    pub fn slope_jump(&self) -> f64 {
        (self.left_slope - self.right_slope).abs()
    }
}

/// Evolve an initial X state along `grid` and record state, power, and
/// active branch at every point. The closed coefficient maps drive the
/// evolution; a handful of points are cross-checked against the full
/// Kraus action and a disagreement aborts with `RouteMismatch`.
pub fn evolve(family: ChannelFamily, initial: &XState, grid: &TimeGrid) -> Result<Trajectory> {
    initial.validate()?;
    let init = *initial;
    let times = grid.times().to_vec();
    let n = times.len();

    let mapped = exec::map_collect(n, |i| family.map_at(times[i], &init));
    let mut states = Vec::with_capacity(n);
    for st in mapped {
        states.push(st?);
    }

    let mut probe = vec![0usize];
    if n > 1 {
        for k in 1..=4 {
            probe.push(k * (n - 1) / 4);
        }
        probe.dedup();
    }
    let rho0 = init.to_density_matrix();
    for &i in &probe {
        let dense = family.at(times[i])?.apply(&rho0)?;
        let diff = dense.max_abs_diff(&states[i].to_density_matrix());
        if diff > 1e-9 {
            return Err(Error::RouteMismatch(diff));
        }
    }

    let points = exec::map_collect(n, |i| ip_point(&states[i]));
    let mut ip = Vec::with_capacity(n);
    let mut branches = Vec::with_capacity(n);
    for p in points {
        let p = p?;
        ip.push(p.value);
        branches.push(p.active);
    }

    Ok(Trajectory {
        family,
        initial: init,
        times,
        states,
        ip,
        branches,
        discord: None,
        discord_axes: None,
    })
}

/// Like [`evolve`] but also computes discord and its optimal measurement
/// axis at every grid point. Much slower; meant for coarser grids.
pub fn evolve_with_discord(
    family: ChannelFamily,
    initial: &XState,
    grid: &TimeGrid,
    opts: &DiscordOpts,
) -> Result<Trajectory> {
    let mut tr = evolve(family, initial, grid)?;
    let results = exec::map_collect(tr.states.len(), |i| discord_xstate(&tr.states[i], opts));
    let mut values = Vec::with_capacity(tr.states.len());
    let mut axes = Vec::with_capacity(tr.states.len());
    for r in results {
        let d = r?;
        values.push(d.value);
        axes.push(d.axis);
    }
    tr.discord = Some(values);
    tr.discord_axes = Some(axes);
    Ok(tr)
}

fn branch_triple(family: &ChannelFamily, initial: &XState, t: f64) -> Result<Option<[f64; 3]>> {
    let st = family.map_at(t, initial)?;
    Ok(xstate_branch_values(&st.blocks()))
}

fn ip_value_at(family: &ChannelFamily, initial: &XState, t: f64) -> Result<f64> {
    Ok(ip_point(&family.map_at(t, initial)?)?.value)
}

/* Locate the branch crossing inside [a, b]. The difference of the two
 * swapping branch values changes sign across the kink; if a degenerate
 * block denies the closed branch values anywhere, fall back to bisecting
 * on the active label itself. */
fn locate_ip_switch(
    family: &ChannelFamily,
    initial: &XState,
    mut a: f64,
    mut b: f64,
    before: Branch,
    after: Branch,
) -> Result<f64> {
    let ib = before.index();
    let ia = after.index();
    let ga = branch_triple(family, initial, a)?.map(|v| v[ia] - v[ib]);
    let gb = branch_triple(family, initial, b)?.map(|v| v[ia] - v[ib]);
    if let (Some(ga), Some(gb)) = (ga, gb) {
        if ga >= 0.0 && gb <= 0.0 {
            let (mut lo, mut hi) = (a, b);
            let mut clean = true;
            while hi - lo > KINK_TIME_TOL {
                let mid = 0.5 * (lo + hi);
                match branch_triple(family, initial, mid)? {
                    Some(v) => {
                        if v[ia] - v[ib] >= 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    None => {
                        clean = false;
                        break;
                    }
                }
            }
            if clean {
                return Ok(0.5 * (lo + hi));
            }
        }
    }
    while b - a > KINK_TIME_TOL {
        let mid = 0.5 * (a + b);
        let active = ip_point(&family.map_at(mid, initial)?)?.active;
        if active == before {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/* One-sided derivative with a single Richardson step: evaluating at
 * delta and delta/2 cancels the leading error term. */
fn richardson_slope<F: Fn(f64) -> Result<f64>>(
    f: F,
    t: f64,
    delta: f64,
    sign: f64,
) -> Result<f64> {
    let f0 = f(t)?;
    let d_full = sign * (f(t + sign * delta)? - f0) / delta;
    let d_half = sign * (f(t + sign * delta / 2.0)? - f0) / (delta / 2.0);
    Ok(2.0 * d_half - d_full)
}

fn side_slopes<F: Fn(f64) -> Result<f64> + Copy>(
    f: F,
    t_star: f64,
    h: f64,
) -> Result<(f64, f64, f64)> {
    let mut delta = h / 8.0;
    if t_star > 0.0 {
        delta = delta.min(t_star / 2.0);
    }
    delta = delta.max(1e-9);
    let value = f(t_star)?;
    let right = richardson_slope(f, t_star, delta, 1.0)?;
    let left = richardson_slope(f, t_star, delta, -1.0)?;
    Ok((left, right, value))
}

/// Find interferometric-power kinks along a trajectory. Each switch of
/// the active branch between neighbouring grid points is refined by
/// bisection and kept only when the one-sided slopes genuinely disagree.
pub fn detect_kinks(tr: &Trajectory) -> Result<Vec<SuddenChangeEvent>> {
    let mut events = Vec::new();
    if tr.times.len() < 2 {
        return Ok(events);
    }
    for i in 0..tr.times.len() - 1 {
        let before = tr.branches[i];
        let after = tr.branches[i + 1];
        if before == after {
            continue;
        }
        let t_star = locate_ip_switch(
            &tr.family,
            &tr.initial,
            tr.times[i],
            tr.times[i + 1],
            before,
            after,
        )?;
        let h = tr.times[i + 1] - tr.times[i];
        let f = |t: f64| ip_value_at(&tr.family, &tr.initial, t);
        let (left_slope, right_slope, value) = side_slopes(&f, t_star, h)?;
        if (left_slope - right_slope).abs() > SLOPE_JUMP_TOL {
            events.push(SuddenChangeEvent {
                t_star,
                kind: EventKind::IpBranchSwitch,
                branch_before: Some(before),
                branch_after: Some(after),
                value,
                left_slope,
                right_slope,
            });
        }
    }
    Ok(events)
}

fn folded_angle(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dot = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).abs().clamp(0.0, 1.0);
    dot.acos()
}

/// Find discord kinks along a trajectory that carries discord data.
/// A jump of the optimal measurement axis between neighbouring points is
/// refined by bisecting on which basin the probe's axis falls into, with
/// a full re-minimization per probe, then confirmed by one-sided slopes.
pub fn detect_discord_kinks(
    tr: &Trajectory,
    opts: &DiscordOpts,
) -> Result<Vec<SuddenChangeEvent>> {
    let axes = tr.discord_axes.as_ref().ok_or_else(|| {
        Error::InvalidState("trajectory carries no discord data".into())
    })?;
    let mut events = Vec::new();
    for i in 0..axes.len().saturating_sub(1) {
        let basin_a = axes[i];
        let basin_b = axes[i + 1];
        if folded_angle(basin_a, basin_b) <= AXIS_JUMP_TOL {
            continue;
        }
        let (mut lo, mut hi) = (tr.times[i], tr.times[i + 1]);
        for _ in 0..40 {
            if hi - lo <= KINK_TIME_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let probe = discord_xstate(&tr.family.map_at(mid, &tr.initial)?, opts)?;
            if folded_angle(probe.axis, basin_a) <= folded_angle(probe.axis, basin_b) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_star = 0.5 * (lo + hi);
        let h = tr.times[i + 1] - tr.times[i];
        let f = |t: f64| -> Result<f64> {
            Ok(discord_xstate(&tr.family.map_at(t, &tr.initial)?, opts)?.value)
        };
        let (left_slope, right_slope, value) = side_slopes(&f, t_star, h)?;
        let threshold = (1e-3 * left_slope.abs().max(right_slope.abs())).max(SLOPE_JUMP_TOL);
        if (left_slope - right_slope).abs() > threshold {
            events.push(SuddenChangeEvent {
                t_star,
                kind: EventKind::DiscordBasisSwitch,
                branch_before: None,
                branch_after: None,
                value,
                left_slope,
                right_slope,
            });
        }
    }
    Ok(events)
}

/// Kink time of phase damping with rate `tau`, if any: the instant where
/// the shrinking transverse correlations meet the static `c3`.
pub fn predict_phase_t0(c: [f64; 3], tau: f64) -> Option<f64> {
    if !(tau > 0.0) {
        return None;
    }
    let max12 = c[0].abs().max(c[1].abs());
    let c3 = c[2].abs();
    if c3 <= 1e-14 || c3 >= max12 {
        return None;
    }
    Some(-(2.0 / tau) * (c3 / max12).ln())
}

/// Sufficient condition for an amplitude-damping kink. The converse does
/// not hold: the drifting populations can still force branch switches
/// when this returns false.
pub fn predict_amplitude_kink(c: [f64; 3]) -> bool {
    c[2].abs() < c[0].abs().max(c[1].abs())
}

/// First `nu` at which the colored-dephasing envelope squared crosses
/// `|c3| / max(|c1|, |c2|)`, scanned over `(0, 20]`.
pub fn predict_colored_nu(c: [f64; 3], a: f64, tau: f64) -> Result<Option<f64>> {
    let max12 = c[0].abs().max(c[1].abs());
    let target = c[2].abs();
    if target <= 1e-14 || max12 <= 1e-14 || target >= max12 {
        return Ok(None);
    }
    let g = |nu: f64| -> Result<f64> {
        let lam = colored_dephasing_lambda(nu, a, tau)?;
        Ok(lam * lam * max12 - target)
    };
    let steps = 20_000usize;
    let mut prev_nu = 0.0;
    for k in 1..=steps {
        let nu = 20.0 * k as f64 / steps as f64;
        if g(nu)? <= 0.0 {
            let (mut lo, mut hi) = (prev_nu, nu);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if g(mid)? > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev_nu = nu;
    }
    Ok(None)
}

/// First time at which the common-bath transverse envelope
/// `|m| + |d| exp(-4 Gamma(t))` meets `|c3|`, scanned over `(0, 50]`.
/// States with `c1 = c2` never move under this family, hence the error.
pub fn predict_bath_kink(c: [f64; 3], s: f64, wc: f64) -> Result<Option<f64>> {
    let m = 0.5 * (c[0] + c[1]);
    let d = 0.5 * (c[0] - c[1]);
    if d.abs() <= 1e-14 {
        return Err(Error::ConstantIp);
    }
    let target = c[2].abs();
    let g = |t: f64| -> Result<f64> {
        Ok(m.abs() + d.abs() * (-4.0 * bath_gamma(t, s, wc)?).exp() - target)
    };
    if g(0.0)? <= 1e-15 {
        /* the envelope only decreases from its t = 0 value */
        return Ok(None);
    }
    let steps = 5_000usize;
    let mut prev_t = 0.0;
    for k in 1..=steps {
        let t = 50.0 * k as f64 / steps as f64;
        if g(t)? <= 0.0 {
            let (mut lo, mut hi) = (prev_t, t);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if g(mid)? > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev_t = t;
    }
    Ok(None)
}
