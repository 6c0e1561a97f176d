//! WebAssembly bindings for the browser demo. Every export returns a flat
//! `Float64Array` of fixed-width rows; the layout is given on each function.

use spinnet::dynamics::{mirroring_time, run_schedule, KickEvent, Schedule};
use spinnet::linalg::StateVector;
use spinnet::montecarlo::{run_sweep, Protocol, SweepConfig};
use spinnet::network::designed_network;
use spinnet::protocols::{angle_difference, INPUT_SITE, KICK_SITE};
use spinnet::{Error, Result};
use wasm_bindgen::prelude::*;

pub const TRACE_WIDTH: usize = 7;
pub const CURVE_WIDTH: usize = 3;
pub const SENSOR_WIDTH: usize = 5;

fn to_js(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Rows `[t, p1, ..., p6]` with `t` in mirroring times: site 1 excited, one
/// kick of `phase_deg` on site 6 at `kick_at`.
pub fn trace_rows(j: f64, phase_deg: f64, kick_at: f64, tmax: f64, dt: f64) -> Result<Vec<f64>> {
    let h = designed_network(j)?;
    let tm = mirroring_time(h.base_scale())?;
    let initial = StateVector::basis(h.dim(), INPUT_SITE)?;
    let kick = KickEvent::new(kick_at * tm, KICK_SITE, phase_deg.to_radians());
    let schedule = Schedule::new(initial, vec![kick], h)?;
    let mut out = Vec::new();
    for s in run_schedule(&schedule, tmax * tm, dt * tm)? {
        out.push(s.time / tm);
        out.extend(s.state.probabilities());
    }
    Ok(out)
}

/// Rows `[E, mean, stderr]` for `steps + 1` error scales from 0 to
/// `max_scale`, read out at `time` mirroring times.
#[allow(clippy::too_many_arguments)]
pub fn curve_rows(
    protocol: &str,
    kind: &str,
    dist: &str,
    max_scale: f64,
    steps: usize,
    realizations: usize,
    seed: u64,
    time: f64,
) -> Result<Vec<f64>> {
    let protocol: Protocol = protocol.parse()?;
    if protocol == Protocol::Sensor {
        return Err(Error::InvalidParameter(
            "use sensor_curve for the sensor".into(),
        ));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one step".into()));
    }
    let cfg = SweepConfig {
        error_scales: (0..=steps)
            .map(|k| max_scale * k as f64 / steps as f64)
            .collect(),
        realizations,
        base_seed: seed,
        measurement_times: vec![time],
        workers: 1,
        ..SweepConfig::new(protocol, kind.parse()?, dist.parse()?)
    };
    let res = run_sweep(&cfg, 1.0)?;
    Ok(res
        .rows
        .iter()
        .flat_map(|r| [r.error_scale, r.stats.mean, r.stats.stderr])
        .collect())
}

/// Rows `[theta, estimate, stderr, f1, f2]`, angles in degrees, on a grid of
/// `step_deg`. The estimate is unwrapped to lie within 180 degrees of theta.
pub fn sensor_rows(
    kind: &str,
    dist: &str,
    scale: f64,
    realizations: usize,
    seed: u64,
    step_deg: f64,
) -> Result<Vec<f64>> {
    if !(step_deg > 0.0 && step_deg <= 360.0) {
        return Err(Error::InvalidParameter(format!(
            "step must be in (0, 360], got {step_deg}"
        )));
    }
    let n = (360.0 / step_deg).round().max(1.0) as usize;
    let cfg = SweepConfig {
        error_scales: vec![scale],
        realizations,
        base_seed: seed,
        theta_grid: (0..n).map(|k| (k as f64 * step_deg).to_radians()).collect(),
        workers: 1,
        ..SweepConfig::new(Protocol::Sensor, kind.parse()?, dist.parse()?)
    };
    let res = run_sweep(&cfg, 1.0)?;
    Ok(res
        .sensor
        .iter()
        .flat_map(|p| {
            let est = p.theta + angle_difference(p.estimate.value, p.theta);
            [
                p.theta.to_degrees(),
                est.to_degrees(),
                p.estimate.chosen_stderr().to_degrees(),
                p.f1.mean,
                p.f2.mean,
            ]
        })
        .collect())
}

#[wasm_bindgen]
pub fn occupation_trace(
    phase_deg: f64,
    kick_at: f64,
    tmax: f64,
    dt: f64,
) -> std::result::Result<Vec<f64>, JsValue> {
    trace_rows(1.0, phase_deg, kick_at, tmax, dt).map_err(to_js)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn disorder_curve(
    protocol: &str,
    kind: &str,
    dist: &str,
    max_scale: f64,
    steps: usize,
    realizations: usize,
    seed: u32,
    time: f64,
) -> std::result::Result<Vec<f64>, JsValue> {
    curve_rows(
        protocol,
        kind,
        dist,
        max_scale,
        steps,
        realizations,
        seed.into(),
        time,
    )
    .map_err(to_js)
}

#[wasm_bindgen]
pub fn sensor_curve(
    kind: &str,
    dist: &str,
    scale: f64,
    realizations: usize,
    seed: u32,
    step_deg: f64,
) -> std::result::Result<Vec<f64>, JsValue> {
    sensor_rows(kind, dist, scale, realizations, seed.into(), step_deg).map_err(to_js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_reaches_site_four() {
        let rows = trace_rows(1.0, 180.0, 1.0, 2.0, 0.5).unwrap();
        assert_eq!(rows.len() % TRACE_WIDTH, 0);
        let last = &rows[rows.len() - TRACE_WIDTH..];
        assert!((last[0] - 2.0).abs() < 1e-12);
        assert!((last[4] - 1.0).abs() < 1e-10, "{last:?}");
        for row in rows.chunks(TRACE_WIDTH) {
            let total: f64 = row[1..].iter().sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn curve_starts_ideal_and_decays() {
        let rows = curve_rows("router", "offdiag", "gauss", 0.4, 4, 100, 1, 6.0).unwrap();
        assert_eq!(rows.len(), 5 * CURVE_WIDTH);
        assert!((rows[1] - 1.0).abs() < 1e-10);
        assert!(rows[rows.len() - 2] < rows[1]);
        let eof = curve_rows("entangler", "diagonal", "flat", 0.2, 2, 50, 1, 2.0).unwrap();
        assert!((eof[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sensor_curve_is_exact_without_disorder() {
        let rows = sensor_rows("offdiag", "gauss", 0.0, 3, 0, 30.0).unwrap();
        assert_eq!(rows.len(), 12 * SENSOR_WIDTH);
        for row in rows.chunks(SENSOR_WIDTH) {
            assert!((row[1] - row[0]).abs() < 1e-6, "{row:?}");
            assert!(row[2].abs() < 1e-6);
        }
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(curve_rows("sensor", "diag", "flat", 0.1, 2, 10, 0, 2.0).is_err());
        assert!(curve_rows("router", "sideways", "flat", 0.1, 2, 10, 0, 2.0).is_err());
        assert!(curve_rows("router", "diag", "flat", 0.1, 0, 10, 0, 2.0).is_err());
        assert!(sensor_rows("diag", "flat", 0.1, 10, 0, 0.0).is_err());
        assert!(trace_rows(1.0, 180.0, 3.0, 2.0, 0.1).is_err());
    }
}
