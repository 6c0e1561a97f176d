use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spinnet::config::NetworkConfig;
use spinnet::dynamics::{
    mirroring_time, run_schedule, write_trace_csv, KickEvent, Propagator, Schedule,
};
use spinnet::linalg::StateVector;
use spinnet::montecarlo::{
    default_error_scales, default_theta_grid, run_sweep_on, write_csv, write_metadata, Protocol,
    SweepConfig,
};
use spinnet::network::{
    apply_disorder, designed_network, DisorderKind, DisorderSpec, Distribution, NetworkHamiltonian,
};
use spinnet::protocols::{entangler_eofs, estimate_phase, router_fidelities, sense_with};
use spinnet::rng::substream;

type BoxResult<T> = std::result::Result<T, Box<dyn std::error::Error>>;

/// Spin-network simulator: spectra, occupation traces, the three protocols
/// and static-disorder sweeps. Times are in mirroring times t_m, angles in
/// degrees (or pi expressions such as `pi/2`).
#[derive(Parser, Debug)]
#[command(name = "spinnet", version)]
struct Cli {
    /// Coupling strength J of the designed six-site network.
    #[arg(long, global = true, default_value_t = 1.0)]
    j: f64,

    /// Network definition file (TOML); replaces the designed network.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues and eigenvectors of the network.
    Spectrum,
    /// Per-site occupation probabilities over time.
    Trace(TraceArgs),
    /// Router fidelity against site 4.
    Route(ProtocolArgs),
    /// Entanglement of formation between sites 1 and 4.
    Entangle(ProtocolArgs),
    /// Return fidelities and phase estimates for given phases.
    Sense(SenseArgs),
    /// Monte Carlo sweep over static disorder.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct TraceArgs {
    /// Initially excited site (from 1).
    #[arg(long, default_value_t = 1)]
    initial: usize,
    /// Phase kick, e.g. `site=6,phase=pi,at=1`; repeatable, applied in time order.
    #[arg(long = "kick", value_parser = parse_kick)]
    kicks: Vec<KickArg>,
    /// End of the trace, in mirroring times.
    #[arg(long, default_value_t = 6.0)]
    tmax: f64,
    /// Sampling step, in mirroring times.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
}

#[derive(Args, Debug)]
struct DisorderArgs {
    /// Disorder type: diagonal or offdiag.
    #[arg(long, default_value = "diagonal", value_parser = parse_kind)]
    disorder: DisorderKind,
    /// Distribution: flat or gauss.
    #[arg(long, default_value = "gaussian", value_parser = parse_distribution)]
    dist: Distribution,
    /// Base seed of the random streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ProtocolArgs {
    /// Readouts at 2, 4, ..., 2n mirroring times.
    #[arg(long, default_value_t = 3)]
    periods: usize,
    /// Error scale of a single disorder realization.
    #[arg(long, default_value_t = 0.0)]
    scale: f64,
    #[command(flatten)]
    disorder: DisorderArgs,
}

#[derive(Args, Debug)]
struct SenseArgs {
    /// Phases to sense; comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, required = true, allow_hyphen_values = true)]
    theta: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    scale: f64,
    #[command(flatten)]
    disorder: DisorderArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// router, entangler or sensor.
    #[arg(long, value_parser = parse_protocol)]
    protocol: Protocol,
    /// Error scales; comma separated. Default 0 to 0.4 in steps of 0.05.
    #[arg(long, value_delimiter = ',')]
    scale: Vec<f64>,
    /// Disorder realizations per error scale.
    #[arg(long, default_value_t = 1000)]
    realizations: usize,
    /// Readout times for router and entangler; comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
    times: Vec<f64>,
    /// Phases for the sensor; comma separated. Default 0 to 355 in steps of 5.
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    theta: Vec<f64>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Metadata sidecar; defaults to the output path with a .json extension.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Disorder type: diagonal or offdiag.
    #[arg(long, default_value = "diagonal", value_parser = parse_kind)]
    disorder: DisorderKind,
    /// Distributions, comma separated (e.g. `flat,gauss`); one block of rows each.
    #[arg(long, value_delimiter = ',', default_value = "gaussian", value_parser = parse_distribution)]
    dist: Vec<Distribution>,
    /// Base seed of the random streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug)]
struct KickArg {
    site: usize,
    phase: f64,
    at: f64,
}

fn parse_kind(s: &str) -> Result<DisorderKind, String> {
    s.parse().map_err(|e: spinnet::Error| e.to_string())
}

fn parse_distribution(s: &str) -> Result<Distribution, String> {
    s.parse().map_err(|e: spinnet::Error| e.to_string())
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse().map_err(|e: spinnet::Error| e.to_string())
}

/// Degrees, or radians written with `pi`: `pi`, `-pi/2`, `3pi/4`, `0.5*pi`.
fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    let bad = || format!("cannot read angle '{s}'");
    let value = match t.find("pi") {
        None => t.parse::<f64>().map_err(|_| bad())?.to_radians(),
        Some(at) => {
            let coef = t[..at].trim_end_matches('*');
            let coef = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            let rest = &t[at + 2..];
            let den = match rest.strip_prefix('/') {
                Some(d) => d.parse::<f64>().map_err(|_| bad())?,
                None if rest.is_empty() => 1.0,
                None => return Err(bad()),
            };
            coef * PI / den
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn parse_kick(s: &str) -> Result<KickArg, String> {
    let (mut site, mut phase, mut at) = (None, None, None);
    for part in s.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value in '{part}'"))?;
        match key.trim() {
            "site" => {
                site = Some(
                    value
                        .trim()
                        .parse::<usize>()
                        .map_err(|e| format!("site: {e}"))?,
                )
            }
            "phase" => phase = Some(parse_angle(value)?),
            "at" => {
                at = Some(
                    value
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| format!("at: {e}"))?,
                )
            }
            other => return Err(format!("unknown kick field '{other}'")),
        }
    }
    let site = site.ok_or("kick needs site=")?;
    if site == 0 {
        return Err("sites are numbered from 1".into());
    }
    Ok(KickArg {
        site,
        phase: phase.ok_or("kick needs phase=")?,
        at: at.ok_or("kick needs at=")?,
    })
}

fn network(cli: &Cli) -> BoxResult<NetworkHamiltonian> {
    Ok(match &cli.config {
        Some(path) => NetworkConfig::load(path)?.build()?,
        None => designed_network(cli.j)?,
    })
}

fn output(path: Option<&Path>) -> BoxResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| format!("{}: {e}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn realization(
    h: &NetworkHamiltonian,
    scale: f64,
    d: &DisorderArgs,
) -> BoxResult<NetworkHamiltonian> {
    let spec = DisorderSpec::new(scale, d.dist, d.disorder)?;
    Ok(apply_disorder(h, &spec, &mut substream(d.seed, &[0, 0])))
}

fn readout_times(periods: usize) -> BoxResult<Vec<f64>> {
    if periods == 0 {
        return Err("--periods must be at least 1".into());
    }
    Ok((1..=periods).map(|k| 2.0 * k as f64).collect())
}

fn spectrum(h: &NetworkHamiltonian, out: &mut dyn Write) -> BoxResult<()> {
    let spec = h.operator().eig()?;
    let n = spec.dim();
    let mut header = vec!["eigenvalue".to_string()];
    for site in 1..=n {
        header.push(format!("re{site}"));
        header.push(format!("im{site}"));
    }
    writeln!(out, "{}", header.join(","))?;
    for (k, &lambda) in spec.eigenvalues().iter().enumerate() {
        let v = spec.eigenvector(k);
        let mut row = vec![format!("{lambda:?}")];
        for z in &v {
            row.push(format!("{:?}", z.re));
            row.push(format!("{:?}", z.im));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn trace(h: NetworkHamiltonian, args: &TraceArgs, out: &mut dyn Write) -> BoxResult<()> {
    if args.initial == 0 {
        return Err("sites are numbered from 1".into());
    }
    let tm = mirroring_time(h.base_scale())?;
    let mut kicks = args.kicks.clone();
    kicks.sort_by(|a, b| a.at.total_cmp(&b.at));
    let kicks = kicks
        .iter()
        .map(|k| KickEvent::new(k.at * tm, k.site - 1, k.phase))
        .collect();
    let initial = StateVector::basis(h.dim(), args.initial - 1)?;
    let schedule = Schedule::new(initial, kicks, h)?;
    let samples = run_schedule(&schedule, args.tmax * tm, args.dt * tm)?;
    write_trace_csv(out, &samples, tm)?;
    Ok(())
}

fn run(cli: Cli) -> BoxResult<()> {
    let h = network(&cli)?;
    let tm = mirroring_time(h.base_scale())?;
    let mut out = output(cli.out.as_deref())?;
    match &cli.command {
        Command::Spectrum => spectrum(&h, &mut out)?,
        Command::Trace(args) => trace(h, args, &mut out)?,
        Command::Route(args) | Command::Entangle(args) => {
            let times = readout_times(args.periods)?;
            let prop = Propagator::new(&realization(&h, args.scale, &args.disorder)?)?;
            let (label, values) = match cli.command {
                Command::Route(_) => ("fidelity", router_fidelities(&prop, tm, &times)?),
                _ => ("eof", entangler_eofs(&prop, tm, &times)?),
            };
            writeln!(out, "t,{label}")?;
            for (t, v) in times.iter().zip(values) {
                writeln!(out, "{t:?},{v:?}")?;
            }
        }
        Command::Sense(args) => {
            let prop = Propagator::new(&realization(&h, args.scale, &args.disorder)?)?;
            writeln!(out, "theta,f1,f2,estimate1,estimate2")?;
            for &theta in &args.theta {
                let s = sense_with(&prop, &prop, tm, theta)?;
                let e = estimate_phase(s);
                writeln!(
                    out,
                    "{:?},{:?},{:?},{:?},{:?}",
                    theta.to_degrees(),
                    s.f1,
                    s.f2,
                    e.theta1.to_degrees(),
                    e.theta2.to_degrees()
                )?;
            }
        }
        Command::Sweep(args) => {
            let results = args
                .dist
                .iter()
                .map(|&distribution| {
                    let cfg = SweepConfig {
                        protocol: args.protocol,
                        kind: args.disorder,
                        distribution,
                        error_scales: if args.scale.is_empty() {
                            default_error_scales()
                        } else {
                            args.scale.clone()
                        },
                        realizations: args.realizations,
                        base_seed: args.seed,
                        measurement_times: args.times.clone(),
                        theta_grid: if args.theta.is_empty() {
                            default_theta_grid()
                        } else {
                            args.theta.clone()
                        },
                        workers: args.workers,
                    };
                    run_sweep_on(&cfg, &h)
                })
                .collect::<spinnet::Result<Vec<_>>>()?;
            write_csv(&mut out, &results)?;
            let meta = args
                .meta
                .clone()
                .or_else(|| cli.out.as_ref().map(|p| p.with_extension("json")));
            if let Some(path) = meta {
                let mut file = output(Some(&path))?;
                write_metadata(&mut file, &results)?;
                file.flush()?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn angles() {
        let close = |s: &str, v: f64| assert!((parse_angle(s).unwrap() - v).abs() < 1e-15, "{s}");
        close("pi", PI);
        close("-pi/2", -PI / 2.0);
        close("3pi/4", 0.75 * PI);
        close("0.5*pi", 0.5 * PI);
        close("90", PI / 2.0);
        close("-45", -PI / 4.0);
        for bad in ["", "pie", "pi/", "x", "pi/0", "1e999"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn kicks() {
        let k = parse_kick("site=6,phase=pi,at=1").unwrap();
        assert_eq!((k.site, k.at), (6, 1.0));
        assert!((k.phase - PI).abs() < 1e-15);
        let k = parse_kick("at=2, site=3, phase=90").unwrap();
        assert!((k.phase - PI / 2.0).abs() < 1e-15);
        for bad in [
            "site=6,phase=pi",
            "site=0,phase=1,at=1",
            "site=6,phase=1,at=1,x=2",
            "site6",
        ] {
            assert!(parse_kick(bad).is_err(), "{bad}");
        }
    }
}
