//! Free evolution interrupted by instantaneous phase kicks.

use std::f64::consts::{PI, SQRT_2};
use std::io::{self, Write};

use crate::error::{invalid, Error, Result};
use crate::linalg::{Spectrum, StateVector, C64};
use crate::network::NetworkHamiltonian;

/// `pi / (sqrt 2 J)`: the transfer time across a uniform trimer.
pub fn mirroring_time(j: f64) -> Result<f64> {
    if !(j > 0.0 && j.is_finite()) {
        return Err(invalid(format!("coupling must be positive, got {j}")));
    }
    Ok(PI / (SQRT_2 * j))
}

/// Multiplies the amplitude on `site` by `exp(i theta)`.
pub fn phase_kick(psi: &StateVector, site: usize, theta: f64) -> Result<StateVector> {
    if site >= psi.dim() {
        return Err(Error::IndexOutOfRange {
            index: site,
            dim: psi.dim(),
        });
    }
    let mut out = psi.clone();
    out.amplitudes_mut()[site] *= C64::from_polar(1.0, theta);
    Ok(out)
}

/// `|<desired|actual>|^2`, clipped to `[0, 1]` against round-off.
pub fn fidelity(desired: &StateVector, actual: &StateVector) -> Result<f64> {
    Ok(desired.inner(actual)?.norm_sqr().clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KickEvent {
    /// Absolute time in units of `1/J`.
    pub time: f64,
    pub site: usize,
    pub phase: f64,
}

impl KickEvent {
    pub fn new(time: f64, site: usize, phase: f64) -> Self {
        Self { time, site, phase }
    }
}

/// Spectral propagator for a fixed Hamiltonian.
#[derive(Clone, Debug)]
pub struct Propagator {
    spectrum: Spectrum,
}

impl Propagator {
    pub fn new(h: &NetworkHamiltonian) -> Result<Self> {
        Ok(Self {
            spectrum: h.operator().eig()?,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        self.spectrum.propagate(psi, t)
    }

    /// States at each of `times` (non-decreasing). A kick scheduled exactly at
    /// a requested time is applied before that sample is taken.
    pub fn run(
        &self,
        initial: &StateVector,
        kicks: &[KickEvent],
        times: &[f64],
    ) -> Result<Vec<StateVector>> {
        let mut state = initial.clone();
        let mut now = 0.0;
        let mut pending = kicks.iter().peekable();
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if t < now {
                return Err(invalid(format!(
                    "sample times must be non-decreasing ({t} after {now})"
                )));
            }
            while let Some(k) = pending.next_if(|k| k.time <= t) {
                if k.time > now {
                    state = self.evolve(&state, k.time - now)?;
                    now = k.time;
                }
                state = phase_kick(&state, k.site, k.phase)?;
            }
            if t > now {
                state = self.evolve(&state, t - now)?;
                now = t;
            }
            out.push(state.clone());
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct Schedule {
    initial: StateVector,
    kicks: Vec<KickEvent>,
    hamiltonian: NetworkHamiltonian,
}

impl Schedule {
    /// Kicks must be ordered by time; kicks sharing a time apply in list order.
    pub fn new(
        initial: StateVector,
        kicks: Vec<KickEvent>,
        hamiltonian: NetworkHamiltonian,
    ) -> Result<Self> {
        if initial.dim() != hamiltonian.dim() {
            return Err(Error::DimensionMismatch {
                expected: hamiltonian.dim(),
                found: initial.dim(),
            });
        }
        for k in &kicks {
            if !(k.time >= 0.0 && k.time.is_finite()) {
                return Err(invalid(format!(
                    "kick time must be finite and >= 0, got {}",
                    k.time
                )));
            }
            if k.site >= hamiltonian.dim() {
                return Err(Error::IndexOutOfRange {
                    index: k.site,
                    dim: hamiltonian.dim(),
                });
            }
        }
        if kicks.windows(2).any(|w| w[1].time < w[0].time) {
            return Err(invalid("kicks must be ordered by time"));
        }
        Ok(Self {
            initial,
            kicks,
            hamiltonian,
        })
    }

    pub fn initial(&self) -> &StateVector {
        &self.initial
    }

    pub fn kicks(&self) -> &[KickEvent] {
        &self.kicks
    }

    pub fn hamiltonian(&self) -> &NetworkHamiltonian {
        &self.hamiltonian
    }

    pub fn states_at(&self, times: &[f64]) -> Result<Vec<StateVector>> {
        Propagator::new(&self.hamiltonian)?.run(&self.initial, &self.kicks, times)
    }
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub time: f64,
    pub state: StateVector,
}

/// Samples on the grid `0, dt, 2 dt, ...` up to `t_end`, plus every kick time
/// and `t_end` itself.
pub fn run_schedule(s: &Schedule, t_end: f64, dt: f64) -> Result<Vec<Sample>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(invalid(format!(
            "t_end must be finite and >= 0, got {t_end}"
        )));
    }
    if let Some(k) = s.kicks.iter().find(|k| k.time > t_end) {
        return Err(invalid(format!(
            "kick at t = {} lies beyond t_end = {t_end}",
            k.time
        )));
    }
    let steps = (t_end / dt * (1.0 + 1e-12)).floor() as usize;
    let mut times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    times.extend(s.kicks.iter().map(|k| k.time));
    times.push(t_end);
    times.sort_by(f64::total_cmp);
    let merge = 1e-9 * dt;
    times.dedup_by(|b, a| (*b - *a).abs() <= merge);
    times.retain(|&t| t <= t_end + merge);

    let states = s.states_at(&times)?;
    Ok(times
        .into_iter()
        .zip(states)
        .map(|(time, state)| Sample { time, state })
        .collect())
}

/// Writes `t,site,probability` rows, one per sample per site. Times are
/// divided by `time_unit`; sites are labelled from 1.
pub fn write_trace_csv<W: Write + ?Sized>(
    out: &mut W,
    samples: &[Sample],
    time_unit: f64,
) -> io::Result<()> {
    writeln!(out, "t,site,probability")?;
    for s in samples {
        let t = s.time / time_unit;
        for (site, p) in s.state.probabilities().into_iter().enumerate() {
            writeln!(out, "{t:?},{},{p:?}", site + 1)?;
        }
    }
    Ok(())
}
