//! Closed-orbit detection in the quotient, period and arc-length
//! measurement, and the orbit-length scan toward the bad set.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{MetricEval, VectorField};
use crate::flow::{sample_orbit, IntegratorConfig, Stepper};
use crate::point::ChartPoint;
use crate::thurston::{self, quotient_distance};

use std::f64::consts::PI;

/// A detected closed orbit: period, frame-metric length, closure residual
/// and a uniform-time sampling of one turn.
#[derive(Clone)]
pub struct OrbitRecord {
    pub initial: ChartPoint,
    pub field: VectorField,
    /// Smallest detected return time (flow-time units).
    pub period: f64,
    /// Frame-metric arc length over one period.
    pub length: f64,
    /// Quotient distance between the endpoint and the start.
    pub closure_residual: f64,
    /// `n + 1` states at uniform times over `[0, period]` (`n` even).
    pub samples: Vec<ChartPoint>,
    /// Maximum drift of the conserved `u` coordinate over the samples.
    pub u_drift: f64,
}

impl std::fmt::Debug for OrbitRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrbitRecord")
            .field("initial", &self.initial)
            .field("period", &self.period)
            .field("length", &self.length)
            .field("closure_residual", &self.closure_residual)
            .field("n_samples", &(self.samples.len() - 1))
            .field("u_drift", &self.u_drift)
            .finish()
    }
}

/// One row of an orbit scan.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanRow {
    pub u: f64,
    pub period: f64,
    pub length: f64,
    pub closure_residual: f64,
    pub u_drift: f64,
}

/// Composite Simpson over `values` sampled at spacing `h`
/// (`values.len()` odd).
pub(crate) fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(
        n >= 2 && n.is_multiple_of(2),
        "Simpson needs an even interval count"
    );
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += v * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn golden_min<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid)?;
    Ok((mid, fm))
}

/// Finds the smallest `T > 0` with `quotient_distance(φ_T(p0), p0) <
/// close_tol`, by coarse sampling of the distance function followed by
/// golden-section refinement of each candidate dip. A candidate only counts
/// as a return when the refined distance crosses below `close_tol / 10`,
/// which rejects near-returns on long orbits.
pub fn find_period(
    field: &VectorField,
    p0: &ChartPoint,
    cfg: &IntegratorConfig,
) -> Result<OrbitRecord> {
    find_period_with_guess(field, p0, cfg, None)
}

/// [`find_period`] with a prior guess of the period, used only to size the
/// coarse scan step (`h_scan = min(0.05, guess/100)`), never to bias the
/// measured value.
pub fn find_period_with_guess(
    field: &VectorField,
    p0: &ChartPoint,
    cfg: &IntegratorConfig,
    guess: Option<f64>,
) -> Result<OrbitRecord> {
    cfg.validate()?;
    if field.dim() != thurston::DIM || p0.dim() != thurston::DIM {
        return Err(Error::contract(
            "closed-orbit detection runs on the 5-dimensional quotient chart".to_string(),
        ));
    }
    let h_scan = match guess {
        Some(t) if t > 0.0 => (t / 100.0).clamp(1e-4, 0.05),
        _ => 0.05,
    };
    let escape_radius = (20.0 * cfg.close_tol).max(0.05);
    let capture_radius: f64 = 0.25;
    let accept = cfg.close_tol / 10.0;

    let mut stepper = Stepper::new(field, p0, cfg.method);
    let mut armed = false;
    let mut hist: Vec<(f64, DVector<f64>, f64)> = vec![(0.0, p0.coords().clone(), 0.0)];
    let mut best_d = f64::INFINITY;
    let mut best_t = 0.0;

    while stepper.t < cfg.max_time {
        stepper.step(h_scan)?;
        let t = stepper.t;
        let state = stepper.y.clone();
        let d = quotient_distance(&ChartPoint::from_vector(state.clone()), p0);
        if !armed {
            if d > escape_radius {
                armed = true;
            }
        } else if d < best_d {
            best_d = d;
            best_t = t;
        }
        hist.push((t, state, d));
        if hist.len() > 3 {
            hist.remove(0);
        }
        if armed && hist.len() == 3 {
            let (t0, d0) = (hist[0].0, hist[0].2);
            let (_t1, d1) = (hist[1].0, hist[1].2);
            let (t2, d2) = (hist[2].0, hist[2].2);
            if d1 < d0 && d1 <= d2 && d1 < capture_radius {
                let anchor_t = t0;
                let anchor_y = hist[0].1.clone();
                let evaluate = |tau: f64| -> Result<f64> {
                    let mut s = Stepper::new(
                        field,
                        &ChartPoint::from_vector(anchor_y.clone()),
                        cfg.method,
                    );
                    s.t = anchor_t;
                    s.advance_to(tau)?;
                    Ok(quotient_distance(&s.point(), p0))
                };
                let (t_star, d_star) = golden_min(evaluate, t0, t2, 1e-10)?;
                if d_star < accept {
                    return build_record(field, p0, t_star, d_star, cfg);
                }
            }
        }
    }
    Err(Error::PeriodNotFound {
        max_time: cfg.max_time,
        min_distance: best_d,
        at_time: best_t,
    })
}

fn build_record(
    field: &VectorField,
    p0: &ChartPoint,
    period: f64,
    residual: f64,
    cfg: &IntegratorConfig,
) -> Result<OrbitRecord> {
    let n = cfg.even_samples();
    let samples = sample_orbit(field, p0, period, n, cfg)?;
    let u0 = p0[4];
    let u_drift = samples
        .iter()
        .map(|s| (s[4] - u0).abs())
        .fold(0.0_f64, f64::max);
    let mut record = OrbitRecord {
        initial: p0.clone(),
        field: field.clone(),
        period,
        length: 0.0,
        closure_residual: residual,
        samples,
        u_drift,
    };
    record.length = orbit_length(&record, &thurston::frame_metric())?;
    Ok(record)
}

/// Arc length of one period in the given metric: composite Simpson of the
/// pointwise speed over the stored uniform-time samples.
pub fn orbit_length(record: &OrbitRecord, metric: &MetricEval) -> Result<f64> {
    let n = record.samples.len() - 1;
    let h = record.period / n as f64;
    let mut speeds = Vec::with_capacity(n + 1);
    for p in &record.samples {
        let v = record.field.eval(p)?;
        speeds.push(metric.norm(p, &v)?);
    }
    Ok(simpson(&speeds, h))
}

/// Expected period of the flow field at latitude `u`: `π / sin²u` away from
/// the bad set, and 1 on it (where the field is `−∂z` and the orbit closes
/// through the lattice).
pub fn expected_period(u: f64) -> f64 {
    if thurston::distance_to_bad_set(u) == 0.0 {
        1.0
    } else {
        let s = u.sin();
        PI / (s * s)
    }
}

/// Runs [`find_period`] for each `u`, starting every orbit at
/// `(x0, y0, z0, t0, u)`. Rows are computed concurrently and returned in
/// input order; any detection failure propagates.
pub fn orbit_scan(
    u_values: &[f64],
    base: (f64, f64, f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Vec<ScanRow>> {
    let field = thurston::field_x();
    u_values
        .par_iter()
        .map(|&u| {
            let p0 = ChartPoint::new(&[base.0, base.1, base.2, base.3, u]);
            let record = find_period_with_guess(&field, &p0, cfg, Some(expected_period(u)))?;
            Ok(ScanRow {
                u,
                period: record.period,
                length: record.length,
                closure_residual: record.closure_residual,
                u_drift: record.u_drift,
            })
        })
        .collect()
}

/// True when lengths strictly increase along the scan order.
pub fn lengths_strictly_increasing(rows: &[ScanRow]) -> bool {
    rows.windows(2).all(|w| w[1].length > w[0].length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thurston::{field_w, field_x, DEFAULT_BAD_BAND};

    #[test]
    fn w_closes_after_two_pi() {
        let w = field_w(DEFAULT_BAD_BAND);
        let cfg = IntegratorConfig::default();
        for u in [PI / 6.0, PI / 4.0, PI / 2.0] {
            let p0 = ChartPoint::new(&[0.2, 0.3, 0.1, 0.5, u]);
            let record = find_period_with_guess(&w, &p0, &cfg, Some(2.0 * PI)).unwrap();
            assert!(
                (record.period - 2.0 * PI).abs() < 1e-6,
                "u = {u}: period {} vs 2π",
                record.period
            );
        }
    }

    #[test]
    fn x_period_follows_the_reparametrization() {
        // oracle: the 2π period of W divided by the constant factor 2 sin²u
        let x = field_x();
        let cfg = IntegratorConfig::default();
        for u in [0.6, 1.0, PI / 2.0] {
            let p0 = ChartPoint::new(&[0.0, 0.0, 0.0, 0.0, u]);
            let record = find_period_with_guess(&x, &p0, &cfg, Some(expected_period(u))).unwrap();
            let expected = PI / (u.sin() * u.sin());
            let rel = (record.period - expected).abs() / expected;
            assert!(rel < 1e-5, "u = {u}: relative period error {rel:.3e}");
        }
    }

    #[test]
    fn period_at_the_bad_set_is_one() {
        // X = -∂z there; closure through the lattice element (0,0,1)
        let x = field_x();
        let cfg = IntegratorConfig::default();
        let p0 = ChartPoint::new(&[0.4, 0.7, 0.2, 1.1, 0.0]);
        let record = find_period_with_guess(&x, &p0, &cfg, Some(1.0)).unwrap();
        assert!((record.period - 1.0).abs() < 1e-8);
        assert!((record.length - 1.0).abs() < 1e-8);
    }

    #[test]
    fn lengths_match_the_closed_form() {
        // oracle: ℓ(u) = sqrt(sin²2u + 4 sin⁴u + cos⁴u) · π / sin²u
        let x = field_x();
        let cfg = IntegratorConfig::default();
        // at the equator the closed form reduces to |X| = 2, T = π, ℓ = 2π
        for u in [0.5, 1.2, PI / 2.0] {
            let p0 = ChartPoint::new(&[0.1, 0.9, 0.4, 0.0, u]);
            let record = find_period_with_guess(&x, &p0, &cfg, Some(expected_period(u))).unwrap();
            let expected = thurston::speed_sq(u).sqrt() * PI / (u.sin() * u.sin());
            let rel = (record.length - expected).abs() / expected;
            assert!(rel < 1e-6, "u = {u}: relative length error {rel:.3e}");
            assert!(record.u_drift < 1e-9);
            // the measured length is also reproducible through orbit_length
            let re = orbit_length(&record, &thurston::frame_metric()).unwrap();
            assert!((re - record.length).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_reports_monotone_blowup() {
        let cfg = IntegratorConfig::default();
        let rows = orbit_scan(&[0.5, 0.25], (0.0, 0.0, 0.0, 0.0), &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(lengths_strictly_increasing(&rows));
        assert!(rows[0].closure_residual < cfg.close_tol);
        assert!(rows[1].closure_residual < cfg.close_tol);
    }

    #[test]
    fn empty_scan_is_empty() {
        let cfg = IntegratorConfig::default();
        let rows = orbit_scan(&[], (0.0, 0.0, 0.0, 0.0), &cfg).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn period_not_found_reports_the_bound() {
        let x = field_x();
        let cfg = IntegratorConfig {
            max_time: 3.0, // shorter than the period π/sin²(0.6) ≈ 9.86
            ..Default::default()
        };
        let p0 = ChartPoint::new(&[0.0, 0.0, 0.0, 0.0, 0.6]);
        match find_period(&x, &p0, &cfg) {
            Err(Error::PeriodNotFound { max_time, .. }) => assert_eq!(max_time, 3.0),
            other => panic!("expected PeriodNotFound, got {other:?}"),
        }
    }

    #[test]
    fn reparametrization_consistency() {
        // T_X(u) · 2 sin²u = T_W = 2π on the same orbit
        let x = field_x();
        let w = field_w(DEFAULT_BAD_BAND);
        let cfg = IntegratorConfig::default();
        let u = 0.9;
        let p0 = ChartPoint::new(&[0.3, 0.3, 0.3, 0.3, u]);
        let tx = find_period_with_guess(&x, &p0, &cfg, Some(expected_period(u)))
            .unwrap()
            .period;
        let tw = find_period_with_guess(&w, &p0, &cfg, Some(2.0 * PI))
            .unwrap()
            .period;
        assert!((tx * 2.0 * u.sin().powi(2) - tw).abs() < 1e-5);
        assert!((tw - 2.0 * PI).abs() < 1e-6);
    }
}
