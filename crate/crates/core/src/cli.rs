//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or self-check failure, 2 argument or
//! config parse error, 3 invalid state, 4 channel specification error.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::channels::ChannelFamily;
use crate::discord::{discord_xstate, DiscordOpts, Side};
use crate::dynamics::{
    detect_discord_kinks, detect_kinks, evolve, evolve_with_discord, SuddenChangeEvent,
    TimeGrid, Trajectory,
};
use crate::ip::{ip_bruteforce, ip_point, BruteForceOpts};
use crate::states::XState;
use crate::verify::{run_all, VerifyOptions};
use crate::Error;

/// Formats a value with twelve significant digits, zero as a bare `0`.
/// Used for every number the tool emits so output is byte-stable.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.11e}")
    }
}

/// Render a trajectory as CSV. Columns are `t,r,s,c1,c2,c3,ip,branch`
/// plus a trailing `discord` column when the trajectory carries one.
pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut out = String::new();
    out.push_str("t,r,s,c1,c2,c3,ip,branch");
    if tr.discord.is_some() {
        out.push_str(",discord");
    }
    out.push('\n');
    for i in 0..tr.times.len() {
        let st = &tr.states[i];
        out.push_str(&fmt_sig(tr.times[i]));
        for v in [st.r, st.s, st.c[0], st.c[1], st.c[2], tr.ip[i]] {
            out.push(',');
            out.push_str(&fmt_sig(v));
        }
        out.push(',');
        out.push_str(&tr.branches[i].to_string());
        if let Some(d) = &tr.discord {
            out.push(',');
            out.push_str(&fmt_sig(d[i]));
        }
        out.push('\n');
    }
    out
}

#[derive(Parser)]
#[command(
    name = "xip",
    version,
    about = "Interferometric power of two-qubit X states under noise"
)]
struct Cli {
    /// File with key=value defaults; explicit flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interferometric power of one X state
    Ip(IpArgs),
    /// Quantum discord of one X state
    Discord(DiscordArgs),
    /// Evolve a state under a noise family and emit a CSV trajectory
    Evolve(EvolveArgs),
    /// Locate sudden changes along a trajectory
    Kinks(KinksArgs),
    /// Run the randomized self-check suites
    Verify(VerifyArgs),
    /// Scan a Bell-diagonal grid for kink presence
    Sweep(SweepArgs),
}

/// State given as `c1,c2,c3` (Bell diagonal) or `r,s,c1,c2,c3`.
#[derive(Args)]
struct IpArgs {
    state: String,
    /// Cross-check against the direction-scan minimizer
    #[arg(long)]
    oracle: bool,
    /// Scan resolution for --oracle
    #[arg(long)]
    directions: Option<usize>,
}

#[derive(Args)]
struct DiscordArgs {
    state: String,
    /// Measured qubit, A or B
    #[arg(long)]
    side: Option<String>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    refine: Option<usize>,
}

#[derive(Args)]
struct EvolveArgs {
    state: String,
    /// Noise family, e.g. "amplitude:tau=1" or "bath:s=4,wc=1"
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Also compute discord along the trajectory
    #[arg(long)]
    discord: bool,
    #[arg(long)]
    side: Option<String>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    refine: Option<usize>,
    /// Write the CSV here instead of stdout
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct KinksArgs {
    state: String,
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Also search for discord measurement-basis switches
    #[arg(long)]
    discord: bool,
    #[arg(long)]
    side: Option<String>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    refine: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Corrupt one comparison to prove the gate can fail
    #[arg(long)]
    canary: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Axes as "c1=lo:hi:n,c2=lo:hi:n,c3=value"; single values allowed
    axes: String,
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn state_error(e: Error) -> Failure {
    match e {
        Error::Parse(_) => fail(2, e.to_string()),
        _ => fail(3, e.to_string()),
    }
}

fn runtime_error(e: Error) -> Failure {
    fail(1, e.to_string())
}

type Config = HashMap<String, String>;

fn load_config(path: &Path) -> CliResult<Config> {
    let text = fs::read_to_string(path)
        .map_err(|e| fail(2, format!("config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(fail(2, format!("config line {}: expected key=value", ln + 1)));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn cfg<T: std::str::FromStr>(map: &Config, key: &str) -> CliResult<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| fail(2, format!("config key {key}: cannot parse {v:?}"))),
    }
}

fn parse_state(spec: &str) -> CliResult<XState> {
    spec.parse::<XState>().map_err(state_error)
}

fn parse_side(spec: Option<String>, map: &Config) -> CliResult<Side> {
    let raw = match spec.or_else(|| map.get("side").cloned()) {
        Some(s) => s,
        None => return Ok(Side::A),
    };
    match raw.as_str() {
        "A" | "a" => Ok(Side::A),
        "B" | "b" => Ok(Side::B),
        other => Err(fail(2, format!("side must be A or B, got {other:?}"))),
    }
}

fn resolve_family(channel: Option<String>, map: &Config) -> CliResult<ChannelFamily> {
    let spec = channel
        .or_else(|| map.get("channel").cloned())
        .ok_or_else(|| fail(2, "missing --channel"))?;
    spec.parse::<ChannelFamily>().map_err(|e| fail(4, e.to_string()))
}

fn resolve_grid(
    tmax: Option<f64>,
    points: Option<usize>,
    map: &Config,
    family: &ChannelFamily,
) -> CliResult<TimeGrid> {
    let tmax = match tmax.or(cfg(map, "tmax")?) {
        Some(t) => t,
        None => family.default_horizon(),
    };
    let points = points.or(cfg(map, "points")?).unwrap_or(2001);
    if points == 1 {
        return TimeGrid::from_times(vec![0.0]).map_err(|e| fail(2, e.to_string()));
    }
    TimeGrid::uniform(tmax, points).map_err(|e| fail(2, e.to_string()))
}

fn discord_opts(
    side: Option<String>,
    grid: Option<usize>,
    refine: Option<usize>,
    map: &Config,
) -> CliResult<DiscordOpts> {
    let defaults = DiscordOpts::default();
    Ok(DiscordOpts {
        side: parse_side(side, map)?,
        grid: grid.or(cfg(map, "grid")?).unwrap_or(defaults.grid),
        refine: refine.or(cfg(map, "refine")?).unwrap_or(defaults.refine),
    })
}

fn family_label(f: &ChannelFamily) -> String {
    match f {
        ChannelFamily::Amplitude { tau } => format!("amplitude (tau={tau})"),
        ChannelFamily::Phase { tau } => format!("phase (tau={tau})"),
        ChannelFamily::Depolarizing { tau } => format!("depolarizing (tau={tau})"),
        ChannelFamily::Colored { a, tau } => format!("colored (a={a}, tau={tau})"),
        ChannelFamily::CommonBath { s, wc } => format!("bath (s={s}, wc={wc})"),
    }
}

/// The figure this family reproduces labels the kink cases the other way
/// around; emitted so plots built from this tool are not "corrected" back.
const BATH_CAPTION_NOTE: &str = "note: kink/no-kink assignment follows the \
coefficient-crossing analysis and contradicts the reference figure caption \
for this parameter family";

fn cmd_ip(args: IpArgs, map: &Config) -> CliResult<()> {
    let st = parse_state(&args.state)?;
    let b = ip_point(&st).map_err(runtime_error)?;
    println!("state: {st}");
    println!(
        "branch values: M11={} M22={} M33={}",
        fmt_sig(b.m11),
        fmt_sig(b.m22),
        fmt_sig(b.m33)
    );
    println!("active branch: {}", b.active);
    println!("power: {}", fmt_sig(b.value));
    if b.fallback {
        println!("note: degenerate blocks, dense spectral route used");
    }
    if b.rule_violation {
        println!("note: minimum lies outside the two-branch candidate set");
    }
    if args.oracle {
        let mut opts = BruteForceOpts::default();
        if let Some(d) = args.directions.or(cfg(map, "directions")?) {
            opts.directions = d;
        }
        let scan = ip_bruteforce(&st.to_density_matrix(), &opts).map_err(runtime_error)?;
        println!("scan power: {}", fmt_sig(scan.value));
        println!(
            "scan direction: ({}, {}, {})",
            fmt_sig(scan.direction[0]),
            fmt_sig(scan.direction[1]),
            fmt_sig(scan.direction[2])
        );
        println!("route difference: {}", fmt_sig((scan.value - b.value).abs()));
    }
    Ok(())
}

fn cmd_discord(args: DiscordArgs, map: &Config) -> CliResult<()> {
    let st = parse_state(&args.state)?;
    let opts = discord_opts(args.side, args.grid, args.refine, map)?;
    let d = discord_xstate(&st, &opts).map_err(runtime_error)?;
    println!("state: {st}");
    println!("discord: {}", fmt_sig(d.value));
    println!("mutual information: {}", fmt_sig(d.mutual_information));
    println!("classical correlation: {}", fmt_sig(d.classical_correlation));
    println!("side: {}", d.side);
    println!(
        "axis: ({}, {}, {})",
        fmt_sig(d.axis[0]),
        fmt_sig(d.axis[1]),
        fmt_sig(d.axis[2])
    );
    println!("theta: {}", fmt_sig(d.theta));
    println!("phi: {}", fmt_sig(d.phi));
    Ok(())
}

fn cmd_evolve(args: EvolveArgs, map: &Config) -> CliResult<()> {
    let st = parse_state(&args.state)?;
    let family = resolve_family(args.channel, map)?;
    let grid = resolve_grid(args.tmax, args.points, map, &family)?;
    let tr = if args.discord {
        let opts = discord_opts(args.side, args.grid, args.refine, map)?;
        evolve_with_discord(family, &st, &grid, &opts).map_err(runtime_error)?
    } else {
        evolve(family, &st, &grid).map_err(runtime_error)?
    };
    let csv = trajectory_csv(&tr);
    match args.output {
        Some(path) => fs::write(&path, csv)
            .map_err(|e| fail(1, format!("writing {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn print_ip_event(e: &SuddenChangeEvent, family: &ChannelFamily) {
    let before = e.branch_before.map(|b| b.to_string()).unwrap_or_default();
    let after = e.branch_after.map(|b| b.to_string()).unwrap_or_default();
    let mut line = format!(
        "kink at t={}: {} -> {}, value={}, left={}, right={}, jump={}",
        fmt_sig(e.t_star),
        before,
        after,
        fmt_sig(e.value),
        fmt_sig(e.left_slope),
        fmt_sig(e.right_slope),
        fmt_sig(e.slope_jump())
    );
    if let Some(nu) = family.nu_of(e.t_star) {
        line.push_str(&format!(", nu={}", fmt_sig(nu)));
    }
    println!("{line}");
}

fn cmd_kinks(args: KinksArgs, map: &Config) -> CliResult<()> {
    let st = parse_state(&args.state)?;
    let family = resolve_family(args.channel, map)?;
    let grid = resolve_grid(args.tmax, args.points, map, &family)?;
    println!("state: {st}");
    println!("channel: {}", family_label(&family));
    let (tr, dopts) = if args.discord {
        let opts = discord_opts(args.side, args.grid, args.refine, map)?;
        (
            evolve_with_discord(family, &st, &grid, &opts).map_err(runtime_error)?,
            Some(opts),
        )
    } else {
        (evolve(family, &st, &grid).map_err(runtime_error)?, None)
    };
    let events = detect_kinks(&tr).map_err(runtime_error)?;
    if events.is_empty() {
        println!("no sudden changes of power on this horizon");
    }
    for e in &events {
        print_ip_event(e, &family);
    }
    if let Some(opts) = dopts {
        let devents = detect_discord_kinks(&tr, &opts).map_err(runtime_error)?;
        if devents.is_empty() {
            println!("no sudden changes of discord on this horizon");
        }
        for e in &devents {
            println!(
                "discord kink at t={}: value={}, left={}, right={}, jump={}",
                fmt_sig(e.t_star),
                fmt_sig(e.value),
                fmt_sig(e.left_slope),
                fmt_sig(e.right_slope),
                fmt_sig(e.slope_jump())
            );
        }
    }
    if matches!(family, ChannelFamily::CommonBath { .. }) {
        println!("{BATH_CAPTION_NOTE}");
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs, map: &Config) -> CliResult<()> {
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        seed: args.seed.or(cfg(map, "seed")?).unwrap_or(defaults.seed),
        samples: args.samples.or(cfg(map, "samples")?).unwrap_or(defaults.samples),
        canary: args.canary,
    };
    let results = run_all(&opts);
    let mut failed = 0usize;
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", r.name, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} checks, {} passed, {} failed", results.len(), results.len() - failed, failed);
    if failed > 0 {
        return Err(fail(1, format!("{failed} self-checks failed")));
    }
    Ok(())
}

fn parse_axis_values(spec: &str) -> CliResult<Vec<f64>> {
    if let Some((lo, rest)) = spec.split_once(':') {
        let Some((hi, n)) = rest.split_once(':') else {
            return Err(fail(2, format!("axis {spec:?}: expected lo:hi:count")));
        };
        let lo: f64 = lo.parse().map_err(|_| fail(2, format!("axis bound {lo:?}")))?;
        let hi: f64 = hi.parse().map_err(|_| fail(2, format!("axis bound {hi:?}")))?;
        let n: usize = n.parse().map_err(|_| fail(2, format!("axis count {n:?}")))?;
        if n < 2 {
            return Err(fail(2, "axis count must be at least 2"));
        }
        Ok((0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect())
    } else {
        let v: f64 = spec
            .parse()
            .map_err(|_| fail(2, format!("axis value {spec:?}")))?;
        Ok(vec![v])
    }
}

fn parse_axes(spec: &str) -> CliResult<[Vec<f64>; 3]> {
    let mut axes: [Option<Vec<f64>>; 3] = [None, None, None];
    for part in spec.split(',') {
        let Some((key, vals)) = part.split_once('=') else {
            return Err(fail(2, format!("sweep axis {part:?}: expected c<k>=...")));
        };
        let idx = match key.trim() {
            "c1" => 0,
            "c2" => 1,
            "c3" => 2,
            other => return Err(fail(2, format!("unknown sweep axis {other:?}"))),
        };
        if axes[idx].is_some() {
            return Err(fail(2, format!("duplicate sweep axis {key:?}")));
        }
        axes[idx] = Some(parse_axis_values(vals.trim())?);
    }
    match axes {
        [Some(a), Some(b), Some(c)] => Ok([a, b, c]),
        _ => Err(fail(2, "sweep needs all of c1, c2, c3")),
    }
}

fn cmd_sweep(args: SweepArgs, map: &Config) -> CliResult<()> {
    let [a1, a2, a3] = parse_axes(&args.axes)?;
    let family = resolve_family(args.channel, map)?;
    let tmax = match args.tmax.or(cfg(map, "tmax")?) {
        Some(t) => t,
        None => family.default_horizon(),
    };
    let points = args.points.or(cfg(map, "points")?).unwrap_or(1001);
    let grid = TimeGrid::uniform(tmax, points).map_err(|e| fail(2, e.to_string()))?;

    let mut csv = String::from("c1,c2,c3,hasKink,tStar\n");
    let mut swept = 0usize;
    let mut skipped = 0usize;
    for &c1 in &a1 {
        for &c2 in &a2 {
            for &c3 in &a3 {
                let Ok(st) = XState::bell_diagonal(c1, c2, c3) else {
                    skipped += 1;
                    continue;
                };
                let tr = evolve(family, &st, &grid).map_err(runtime_error)?;
                let events = detect_kinks(&tr).map_err(runtime_error)?;
                swept += 1;
                let (has, t_star) = match events.first() {
                    Some(e) => ("1", fmt_sig(e.t_star)),
                    None => ("0", String::new()),
                };
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_sig(c1),
                    fmt_sig(c2),
                    fmt_sig(c3),
                    has,
                    t_star
                ));
            }
        }
    }
    match args.output {
        Some(path) => fs::write(&path, csv)
            .map_err(|e| fail(1, format!("writing {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    eprintln!("swept {swept} states ({skipped} skipped as unphysical)");
    Ok(())
}

/// Parse arguments, run the chosen command, and return the process exit
/// code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let map = match cli.config.as_deref().map(load_config) {
        Some(Ok(m)) => m,
        Some(Err(f)) => {
            eprintln!("error: {}", f.message);
            return f.code;
        }
        None => Config::new(),
    };
    let outcome = match cli.command {
        Command::Ip(a) => cmd_ip(a, &map),
        Command::Discord(a) => cmd_discord(a, &map),
        Command::Evolve(a) => cmd_evolve(a, &map),
        Command::Kinks(a) => cmd_kinks(a, &map),
        Command::Verify(a) => cmd_verify(a, &map),
        Command::Sweep(a) => cmd_sweep(a, &map),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(0.15), "1.50000000000e-1");
        assert_eq!(fmt_sig(-2.5), "-2.50000000000e0");
        assert_eq!(fmt_sig(0.28965597260992715), "2.89655972610e-1");
    }

    #[test]
    fn csv_layout() {
        let st = XState::bell_diagonal(0.4, 0.2, 0.3).unwrap();
        let grid = TimeGrid::uniform(1.0, 3).unwrap();
        let fam: ChannelFamily = "phase".parse().unwrap();
        let tr = evolve(fam, &st, &grid).unwrap();
        let csv = trajectory_csv(&tr);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "t,r,s,c1,c2,c3,ip,branch");
        assert!(lines[1].starts_with("0,0,0,4.00000000000e-1,2.00000000000e-1,3.00000000000e-1,"));
        assert!(lines[1].ends_with(",M11"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn axis_specs() {
        let vals = parse_axis_values("-1:1:5").unwrap();
        assert_eq!(vals, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(parse_axis_values("0.25").unwrap(), vec![0.25]);
        assert!(parse_axis_values("0:1:1").is_err());
        assert!(parse_axis_values("a:b:c").is_err());
        let axes = parse_axes("c1=0:1:3,c2=0.5,c3=-0.25").unwrap();
        assert_eq!(axes[0].len(), 3);
        assert_eq!(axes[1], vec![0.5]);
        assert!(parse_axes("c1=0,c2=0").is_err());
        assert!(parse_axes("c1=0,c1=1,c2=0,c3=0").is_err());
        assert!(parse_axes("c4=0,c1=0,c2=0,c3=0").is_err());
    }

    #[test]
    fn config_round_trip() {
        let dir = std::env::temp_dir().join("xip-config-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("defaults.conf");
        fs::write(&path, "# defaults\npoints = 11\nchannel = phase\n").unwrap();
        let map = load_config(&path).unwrap();
        assert_eq!(cfg::<usize>(&map, "points").unwrap(), Some(11));
        assert_eq!(map.get("channel").map(String::as_str), Some("phase"));
        assert_eq!(cfg::<usize>(&map, "missing").unwrap(), None);
        fs::write(&path, "no equals sign\n").unwrap();
        assert!(load_config(&path).is_err());
    }
}
