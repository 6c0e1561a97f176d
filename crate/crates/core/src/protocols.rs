//! Router, entangler and phase sensor on the six-site network.
//!
//! All three start from an excitation on site 1 and act with a single sudden
//! phase on site 6 at the mirroring time `t_m`; they differ in the phase and in
//! what is read out afterwards. Times passed in and reported are multiples of
//! `t_m`, which is taken from the unperturbed coupling scale of the network so
//! disordered realizations are probed at the ideal times.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::dynamics::{fidelity, mirroring_time, KickEvent, Propagator};
use crate::entanglement::{eof, reduce_two_sites};
use crate::error::{invalid, Result};
use crate::linalg::StateVector;
use crate::network::NetworkHamiltonian;

/// Site 1: where the excitation is injected.
pub const INPUT_SITE: usize = 0;
/// Site 4: the router's destination and the entangler's partner site.
pub const OUTPUT_SITE: usize = 3;
/// Site 6: where phases are applied.
pub const KICK_SITE: usize = 5;

/// Spreads closer than this (radians) count as a tie in `aggregate`.
const SPREAD_TIE: f64 = 1e-12;

/// Known shift added to the unknown phase in the second sensing experiment.
pub const SENSOR_SHIFT: f64 = -FRAC_PI_2;

#[derive(Clone, Debug, PartialEq)]
pub struct RouterResult {
    /// Measurement times in units of `t_m`.
    pub times: Vec<f64>,
    /// Fidelity against `|r_4>` at each time.
    pub fidelities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntanglerResult {
    pub times: Vec<f64>,
    /// EOF between sites 1 and 4 at each time.
    pub eof: Vec<f64>,
}

fn t_m(h: &NetworkHamiltonian) -> Result<f64> {
    mirroring_time(h.base_scale())
}

fn even_periods(n_periods: usize) -> Result<Vec<f64>> {
    if n_periods == 0 {
        return Err(invalid("n_periods must be at least 1"));
    }
    Ok((1..=n_periods).map(|k| 2.0 * k as f64).collect())
}

fn kicked_states(
    prop: &Propagator,
    tm: f64,
    phase: f64,
    times: &[f64],
) -> Result<Vec<StateVector>> {
    let dim = prop.spectrum().dim();
    let initial = StateVector::basis(dim, INPUT_SITE)?;
    let kick = [KickEvent::new(tm, KICK_SITE, phase)];
    let abs: Vec<f64> = times.iter().map(|t| t * tm).collect();
    prop.run(&initial, &kick, &abs)
}

/// Router readout: `|r_1>`, a pi flip on site 6 at `t_m`, fidelity against
/// `|r_4>` at each of `times` (units of `t_m`, non-decreasing).
pub fn router_fidelities(prop: &Propagator, tm: f64, times: &[f64]) -> Result<Vec<f64>> {
    let target = StateVector::basis(prop.spectrum().dim(), OUTPUT_SITE)?;
    kicked_states(prop, tm, PI, times)?
        .iter()
        .map(|s| fidelity(&target, s))
        .collect()
}

/// Router fidelities at `2 t_m, 4 t_m, ..., 2 n t_m`.
pub fn run_router(h: &NetworkHamiltonian, n_periods: usize) -> Result<RouterResult> {
    let times = even_periods(n_periods)?;
    let fidelities = router_fidelities(&Propagator::new(h)?, t_m(h)?, &times)?;
    Ok(RouterResult { times, fidelities })
}

/// Entangler readout: `|r_1>`, a pi/2 phase on site 6 at `t_m`, EOF of
/// sites (1, 4) at each of `times`.
pub fn entangler_eofs(prop: &Propagator, tm: f64, times: &[f64]) -> Result<Vec<f64>> {
    kicked_states(prop, tm, FRAC_PI_2, times)?
        .iter()
        .map(|s| eof(&reduce_two_sites(s, INPUT_SITE, OUTPUT_SITE)?))
        .collect()
}

pub fn run_entangler(h: &NetworkHamiltonian, n_periods: usize) -> Result<EntanglerResult> {
    let times = even_periods(n_periods)?;
    let eof = entangler_eofs(&Propagator::new(h)?, t_m(h)?, &times)?;
    Ok(EntanglerResult { times, eof })
}

/// Return fidelities of the two sensing experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SenseSample {
    /// Against `|r_1>` at `2 t_m` with phase `theta`; ideally `(1 + cos theta) / 2`.
    pub f1: f64,
    /// Same with phase `theta - pi/2`; ideally `(1 + sin theta) / 2`.
    pub f2: f64,
}

/// Runs both experiments: the first on `p1`, the shifted one on `p2`.
pub fn sense_with(p1: &Propagator, p2: &Propagator, tm: f64, theta: f64) -> Result<SenseSample> {
    let return_fidelity = |p: &Propagator, phase: f64| -> Result<f64> {
        let target = StateVector::basis(p.spectrum().dim(), INPUT_SITE)?;
        let state = kicked_states(p, tm, phase, &[2.0])?;
        fidelity(&target, &state[0])
    };
    Ok(SenseSample {
        f1: return_fidelity(p1, theta)?,
        f2: return_fidelity(p2, theta + SENSOR_SHIFT)?,
    })
}

pub fn sense_once(
    h1: &NetworkHamiltonian,
    h2: &NetworkHamiltonian,
    theta: f64,
) -> Result<SenseSample> {
    sense_with(
        &Propagator::new(h1)?,
        &Propagator::new(h2)?,
        t_m(h1)?,
        theta,
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseEstimate {
    /// From `f1` via arccos; in `[0, 2 pi)`.
    pub theta1: f64,
    /// From `f2` via arcsin; in `[-pi/2, 3 pi/2]`, not yet wrapped.
    pub theta2: f64,
}

/// Inverts one sample. `f2` picks the half-plane for the arccos branch and
/// `f1` the one for the arcsin branch; ties at 0.5 take the `>=` side.
pub fn estimate_phase(s: SenseSample) -> PhaseEstimate {
    let f1 = s.f1.clamp(0.0, 1.0);
    let f2 = s.f2.clamp(0.0, 1.0);
    let acos = (2.0 * f1 - 1.0).clamp(-1.0, 1.0).acos();
    let asin = (2.0 * f2 - 1.0).clamp(-1.0, 1.0).asin();
    let mut theta1 = if f2 >= 0.5 { acos } else { TAU - acos };
    if theta1 >= TAU {
        theta1 -= TAU;
    }
    let theta2 = if f1 >= 0.5 { asin } else { PI - asin };
    PhaseEstimate { theta1, theta2 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    /// arccos of `f1`
    Cosine,
    /// arcsin of `f2`
    Sine,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Cosine => "estimator1",
            Estimator::Sine => "estimator2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AggregateEstimate {
    pub mean1: f64,
    pub mean2: f64,
    /// Sample standard deviations (zero for a single estimate).
    pub std1: f64,
    pub std2: f64,
    pub chosen: Estimator,
    /// Mean of the chosen estimator, in `[0, 2 pi)`.
    pub value: f64,
    pub n: usize,
}

impl AggregateEstimate {
    pub fn chosen_std(&self) -> f64 {
        match self.chosen {
            Estimator::Cosine => self.std1,
            Estimator::Sine => self.std2,
        }
    }

    /// Standard deviation of the chosen mean, `std / sqrt(n)`.
    pub fn chosen_stderr(&self) -> f64 {
        self.chosen_std() / (self.n as f64).sqrt()
    }
}

fn mean_and_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let (sum, n) = xs.clone().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    let mean = sum / n as f64;
    if n < 2 {
        return (mean, 0.0, n);
    }
    let ss: f64 = xs.map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt(), n)
}

/// Averages each estimator separately and keeps the one with the smaller
/// spread. On an exact tie (zero spread, in practice) the estimator whose mean
/// sits further from its own branch points wins: arccos loses precision near
/// 0 and pi, arcsin near pi/2 and 3 pi/2.
pub fn aggregate(estimates: &[PhaseEstimate]) -> Result<AggregateEstimate> {
    if estimates.is_empty() {
        return Err(invalid("cannot aggregate an empty set of phase estimates"));
    }
    let (mean1, std1, n) = mean_and_std(estimates.iter().map(|e| e.theta1));
    let (mut mean2, std2, _) = mean_and_std(estimates.iter().map(|e| e.theta2));
    if mean2 < 0.0 {
        mean2 += TAU;
    }
    let prefer_sine = if (std1 - std2).abs() <= SPREAD_TIE {
        mean2.cos().abs() > mean1.sin().abs()
    } else {
        std2 < std1
    };
    let (chosen, value) = if prefer_sine {
        (Estimator::Sine, mean2)
    } else {
        (Estimator::Cosine, mean1)
    };
    Ok(AggregateEstimate {
        mean1,
        mean2,
        std1,
        std2,
        chosen,
        value: value.rem_euclid(TAU),
        n,
    })
}

/// Smallest signed difference `a - b` on the circle, in `(-pi, pi]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}
