//! Static-disorder sweeps.
//!
//! Realization `r` at error-scale index `k` draws from
//! `substream(base_seed, [k, r])`, so every number in a sweep depends only on
//! the configuration, never on the worker count or scheduling order. Results
//! are collected per realization and reduced in index order.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{mirroring_time, Propagator};
use crate::error::{invalid, Error, Result};
use crate::network::{
    apply_disorder, designed_network, DisorderKind, DisorderSpec, Distribution, NetworkHamiltonian,
};
use crate::protocols::{
    aggregate, entangler_eofs, estimate_phase, router_fidelities, sense_with, AggregateEstimate,
    PhaseEstimate,
};
use crate::rng::{substream, ALGORITHM};

pub const CSV_HEADER: &str =
    "protocol,disorder_kind,distribution,error_scale,time_or_theta,mean,sample_std,stderr,n";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Router,
    Entangler,
    Sensor,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Router => "router",
            Protocol::Entangler => "entangler",
            Protocol::Sensor => "sensor",
        }
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "router" | "route" => Ok(Protocol::Router),
            "entangler" | "entangle" => Ok(Protocol::Entangler),
            "sensor" | "sense" => Ok(Protocol::Sensor),
            other => Err(invalid(format!(
                "unknown protocol '{other}' (expected router, entangler or sensor)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub protocol: Protocol,
    pub kind: DisorderKind,
    pub distribution: Distribution,
    /// Error scales `E`, in units of the network's largest coupling.
    pub error_scales: Vec<f64>,
    pub realizations: usize,
    pub base_seed: u64,
    /// Readout times in units of `t_m`, non-decreasing (router, entangler).
    pub measurement_times: Vec<f64>,
    /// Phases to sense, radians (sensor).
    pub theta_grid: Vec<f64>,
    /// Thread count; 0 uses every core. Has no effect on the results.
    pub workers: usize,
}

/// `0, 0.05, ..., 0.4`.
pub fn default_error_scales() -> Vec<f64> {
    (0..=8).map(|k| k as f64 * 0.05).collect()
}

/// `0, 5, ..., 355` degrees, in radians.
pub fn default_theta_grid() -> Vec<f64> {
    (0..72).map(|k| (5 * k) as f64 * PI / 180.0).collect()
}

impl SweepConfig {
    pub fn new(protocol: Protocol, kind: DisorderKind, distribution: Distribution) -> Self {
        Self {
            protocol,
            kind,
            distribution,
            error_scales: default_error_scales(),
            realizations: 1000,
            base_seed: 0,
            measurement_times: vec![2.0, 4.0, 6.0],
            theta_grid: default_theta_grid(),
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(invalid("realizations must be at least 1"));
        }
        if self.error_scales.is_empty() {
            return Err(invalid("no error scales given"));
        }
        for &e in &self.error_scales {
            DisorderSpec::new(e, self.distribution, self.kind)?;
        }
        match self.protocol {
            Protocol::Router | Protocol::Entangler => {
                if self.measurement_times.is_empty() {
                    return Err(invalid("no measurement times given"));
                }
                if self
                    .measurement_times
                    .iter()
                    .any(|t| !(t.is_finite() && *t >= 0.0))
                {
                    return Err(invalid("measurement times must be finite and >= 0"));
                }
                if self.measurement_times.windows(2).any(|w| w[1] < w[0]) {
                    return Err(invalid("measurement times must be non-decreasing"));
                }
            }
            Protocol::Sensor => {
                if self.theta_grid.is_empty() {
                    return Err(invalid("no phases given"));
                }
                if self.theta_grid.iter().any(|t| !t.is_finite()) {
                    return Err(invalid("phases must be finite"));
                }
            }
        }
        Ok(())
    }

    fn coordinates(&self) -> &[f64] {
        match self.protocol {
            Protocol::Sensor => &self.theta_grid,
            _ => &self.measurement_times,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    /// With the `n - 1` denominator; zero when `n == 1`.
    pub sample_std: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Stats {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sample_std = if n < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self {
            mean,
            sample_std,
            stderr: sample_std / (n as f64).sqrt(),
            n,
        }
    }
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    /// `router`, `entangler`, `sensor`, `sensor_f1` or `sensor_f2`.
    pub protocol: &'static str,
    pub error_scale: f64,
    /// Time in units of `t_m`, or for sensor rows the true phase in degrees.
    pub time_or_theta: f64,
    pub stats: Stats,
}

/// Full sensor statistics at one `(E, theta)` point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorPoint {
    pub error_scale: f64,
    /// Radians.
    pub theta: f64,
    pub estimate: AggregateEstimate,
    pub f1: Stats,
    pub f2: Stats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    /// Empty unless the protocol is the sensor.
    pub sensor: Vec<SensorPoint>,
}

#[cfg(feature = "parallel")]
fn map_indexed<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn map_indexed<T, F>(n: usize, _workers: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    (0..n).map(f).collect()
}

enum Realization {
    Values(Vec<f64>),
    Sensed(Vec<(f64, f64, PhaseEstimate)>),
}

fn realize(
    h: &NetworkHamiltonian,
    cfg: &SweepConfig,
    spec: &DisorderSpec,
    tm: f64,
    scale_index: usize,
    r: usize,
) -> Result<Realization> {
    let mut rng = substream(cfg.base_seed, &[scale_index as u64, r as u64]);
    let prop = Propagator::new(&apply_disorder(h, spec, &mut rng))?;
    Ok(match cfg.protocol {
        Protocol::Router => {
            Realization::Values(router_fidelities(&prop, tm, &cfg.measurement_times)?)
        }
        Protocol::Entangler => {
            Realization::Values(entangler_eofs(&prop, tm, &cfg.measurement_times)?)
        }
        Protocol::Sensor => Realization::Sensed(
            cfg.theta_grid
                .iter()
                .map(|&theta| {
                    let s = sense_with(&prop, &prop, tm, theta)?;
                    Ok((s.f1, s.f2, estimate_phase(s)))
                })
                .collect::<Result<_>>()?,
        ),
    })
}

/// Sweep over the designed six-site network with coupling `j`.
pub fn run_sweep(cfg: &SweepConfig, j: f64) -> Result<SweepResult> {
    run_sweep_on(cfg, &designed_network(j)?)
}

/// Sweep over an arbitrary network with at least six sites. Times and kicks
/// use the ideal `t_m` of the undisordered coupling scale.
pub fn run_sweep_on(cfg: &SweepConfig, h: &NetworkHamiltonian) -> Result<SweepResult> {
    cfg.validate()?;
    if h.dim() < 6 {
        return Err(invalid(format!(
            "protocols need at least 6 sites, network has {}",
            h.dim()
        )));
    }
    let tm = mirroring_time(h.base_scale())?;
    let mut rows = Vec::new();
    let mut sensor = Vec::new();
    for (k, &e) in cfg.error_scales.iter().enumerate() {
        let spec = DisorderSpec::new(e, cfg.distribution, cfg.kind)?;
        let runs = map_indexed(cfg.realizations, cfg.workers, |r| {
            realize(h, cfg, &spec, tm, k, r)
        })?;
        for (c, &coord) in cfg.coordinates().iter().enumerate() {
            match cfg.protocol {
                Protocol::Router | Protocol::Entangler => {
                    let xs: Vec<f64> = runs
                        .iter()
                        .map(|run| match run {
                            Realization::Values(v) => v[c],
                            Realization::Sensed(_) => unreachable!(),
                        })
                        .collect();
                    rows.push(SweepRow {
                        protocol: cfg.protocol.name(),
                        error_scale: e,
                        time_or_theta: coord,
                        stats: Stats::from_samples(&xs),
                    });
                }
                Protocol::Sensor => {
                    let column: Vec<(f64, f64, PhaseEstimate)> = runs
                        .iter()
                        .map(|run| match run {
                            Realization::Sensed(v) => v[c],
                            Realization::Values(_) => unreachable!(),
                        })
                        .collect();
                    let estimates: Vec<PhaseEstimate> = column.iter().map(|x| x.2).collect();
                    let f1: Vec<f64> = column.iter().map(|x| x.0).collect();
                    let f2: Vec<f64> = column.iter().map(|x| x.1).collect();
                    let point = SensorPoint {
                        error_scale: e,
                        theta: coord,
                        estimate: aggregate(&estimates)?,
                        f1: Stats::from_samples(&f1),
                        f2: Stats::from_samples(&f2),
                    };
                    let deg = coord.to_degrees();
                    let est = &point.estimate;
                    rows.push(SweepRow {
                        protocol: "sensor",
                        error_scale: e,
                        time_or_theta: deg,
                        stats: Stats {
                            mean: est.value.to_degrees(),
                            sample_std: est.chosen_std().to_degrees(),
                            stderr: est.chosen_stderr().to_degrees(),
                            n: est.n,
                        },
                    });
                    for (name, stats) in [("sensor_f1", point.f1), ("sensor_f2", point.f2)] {
                        rows.push(SweepRow {
                            protocol: name,
                            error_scale: e,
                            time_or_theta: deg,
                            stats,
                        });
                    }
                    sensor.push(point);
                }
            }
        }
    }
    Ok(SweepResult {
        config: cfg.clone(),
        rows,
        sensor,
    })
}

/// Writes the header once, then the rows of every result in order.
pub fn write_csv<W: Write + ?Sized>(out: &mut W, results: &[SweepResult]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for res in results {
        for row in &res.rows {
            let s = &row.stats;
            writeln!(
                out,
                "{},{},{},{:?},{:?},{:?},{:?},{:?},{}",
                row.protocol,
                res.config.kind.name(),
                res.config.distribution.name(),
                row.error_scale,
                row.time_or_theta,
                s.mean,
                s.sample_std,
                s.stderr,
                s.n
            )?;
        }
    }
    Ok(())
}

/// Sidecar describing how a CSV of `results` was produced.
pub fn metadata(results: &[SweepResult]) -> serde_json::Value {
    let configs: Vec<&SweepConfig> = results.iter().map(|r| &r.config).collect();
    let sensor = configs.iter().any(|c| c.protocol == Protocol::Sensor);
    serde_json::json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "rng": ALGORITHM,
        "seed": configs.first().map(|c| c.base_seed),
        "stream_indices": ["error_scale_index", "realization_index"],
        "configs": configs,
        "units": {
            "error_scale": "largest coupling",
            "time_or_theta": if sensor { "degrees" } else { "mirroring times" },
            "sensor_mean": "degrees",
        },
        "rows": results.iter().map(|r| r.rows.len()).sum::<usize>(),
    })
}

pub fn write_metadata<W: Write + ?Sized>(out: &mut W, results: &[SweepResult]) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, &metadata(results))?;
    writeln!(out)
}

impl SweepResult {
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        write_csv(out, std::slice::from_ref(self))
    }

    pub fn metadata(&self) -> serde_json::Value {
        metadata(std::slice::from_ref(self))
    }

    pub fn rows_for(
        &self,
        protocol: &str,
        time_or_theta: f64,
    ) -> impl Iterator<Item = &SweepRow> + '_ {
        let protocol = protocol.to_owned();
        self.rows.iter().filter(move |r| {
            r.protocol == protocol && (r.time_or_theta - time_or_theta).abs() < 1e-9
        })
    }
}
