//! ODE integration of vector fields in the universal cover.
//!
//! Integration never canonicalizes: trajectories stay in the cover so they
//! remain smooth across fundamental-domain boundaries, and only the
//! closed-orbit detector (see [`period`]) reduces to the quotient inside its
//! distance checks.

pub mod period;
pub mod transport;

pub use period::{
    find_period, find_period_with_guess, orbit_length, orbit_scan, OrbitRecord, ScanRow,
};
pub use transport::flow_transport_lie_derivative;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::exterior::VectorField;
use crate::point::ChartPoint;

/// Integration method: classical fixed-step RK4 or adaptive
/// Dormand–Prince 5(4).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Rk4 { step: f64 },
    Rk45 { abs_tol: f64, rel_tol: f64 },
}

/// Integrator and orbit-detection configuration.
#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Detection gives up past this flow time.
    pub max_time: f64,
    /// Quotient-distance threshold for accepting an orbit closure.
    pub close_tol: f64,
    /// Number of uniform-time subintervals stored per closed orbit
    /// (rounded up to even so Simpson quadrature applies).
    pub n_samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk45 {
                abs_tol: 1e-10,
                rel_tol: 1e-10,
            },
            max_time: 20_000.0,
            close_tol: 1e-6,
            n_samples: 512,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::Rk4 { step } if step <= 0.0 => {
                return Err(Error::contract("RK4 step must be positive".to_string()))
            }
            Method::Rk45 { abs_tol, rel_tol } if abs_tol <= 0.0 || rel_tol <= 0.0 => {
                return Err(Error::contract(
                    "RK45 tolerances must be positive".to_string(),
                ))
            }
            _ => {}
        }
        if self.max_time <= 0.0 {
            return Err(Error::contract("max_time must be positive".to_string()));
        }
        if self.close_tol <= 0.0 {
            return Err(Error::contract("close_tol must be positive".to_string()));
        }
        Ok(())
    }

    pub fn even_samples(&self) -> usize {
        let n = self.n_samples.max(8);
        if n.is_multiple_of(2) {
            n
        } else {
            n + 1
        }
    }
}

/// A trajectory in the universal cover: accepted step endpoints, starting at
/// t = 0.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ChartPoint>,
}

impl Trajectory {
    pub fn end(&self) -> &ChartPoint {
        self.states.last().expect("trajectory is never empty")
    }
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Step-by-step integrator with a step-size cap, shared by the public
/// integration entry points and the period detector.
pub(crate) struct Stepper<'f> {
    field: &'f VectorField,
    method: Method,
    pub t: f64,
    pub y: DVector<f64>,
    h: f64,
}

impl<'f> Stepper<'f> {
    pub fn new(field: &'f VectorField, start: &ChartPoint, method: Method) -> Self {
        let h = match method {
            Method::Rk4 { step } => step,
            Method::Rk45 { .. } => 1e-3,
        };
        Stepper {
            field,
            method,
            t: 0.0,
            y: start.coords().clone(),
            h,
        }
    }

    fn eval(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.field.eval(&ChartPoint::from_vector(y.clone()))
    }

    pub fn point(&self) -> ChartPoint {
        ChartPoint::from_vector(self.y.clone())
    }

    /// Advances by one accepted step of size at most `h_cap`; returns the
    /// actual step taken.
    pub fn step(&mut self, h_cap: f64) -> Result<f64> {
        match self.method {
            Method::Rk4 { step } => {
                let h = step.min(h_cap);
                self.rk4_step(h)?;
                Ok(h)
            }
            Method::Rk45 { abs_tol, rel_tol } => self.rk45_step(h_cap, abs_tol, rel_tol),
        }
    }

    fn rk4_step(&mut self, h: f64) -> Result<()> {
        let k1 = self.eval(&self.y)?;
        let k2 = self.eval(&(&self.y + &k1 * (h / 2.0)))?;
        let k3 = self.eval(&(&self.y + &k2 * (h / 2.0)))?;
        let k4 = self.eval(&(&self.y + &k3 * h))?;
        self.y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        self.t += h;
        Ok(())
    }

    fn rk45_step(&mut self, h_cap: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
        let n = self.y.len();
        let mut h = self.h.min(h_cap).max(1e-14);
        loop {
            if h < 1e-13 * self.t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t: self.t, h });
            }
            let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
            k.push(self.eval(&self.y)?);
            for a_row in &A {
                let mut yy = self.y.clone();
                for (j, kj) in k.iter().enumerate() {
                    let a = a_row[j];
                    if a != 0.0 {
                        yy.axpy(a * h, kj, 1.0);
                    }
                }
                k.push(self.eval(&yy)?);
            }
            let mut y5 = self.y.clone();
            let mut err = DVector::zeros(n);
            for (j, kj) in k.iter().enumerate() {
                if B5[j] != 0.0 {
                    y5.axpy(B5[j] * h, kj, 1.0);
                }
                let db = B5[j] - B4[j];
                if db != 0.0 {
                    err.axpy(db * h, kj, 1.0);
                }
            }
            let mut norm_sq = 0.0;
            for i in 0..n {
                let scale = abs_tol + rel_tol * self.y[i].abs().max(y5[i].abs());
                let e = err[i] / scale;
                norm_sq += e * e;
            }
            let err_norm = (norm_sq / n as f64).sqrt();
            if err_norm <= 1.0 {
                self.t += h;
                self.y = y5;
                let grow = if err_norm == 0.0 {
                    5.0
                } else {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                self.h = (h * grow).min(h_cap.max(self.h));
                return Ok(h);
            }
            h *= (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    /// Integrates until exactly `t_target` (which must be >= current t).
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target {
            let remaining = t_target - self.t;
            if remaining <= 1e-14 * t_target.abs().max(1.0) {
                break;
            }
            self.step(remaining)?;
        }
        Ok(())
    }
}

/// Integrates `field` from `start` for time `t_final`, recording accepted
/// steps. The trajectory stays in the universal cover.
pub fn integrate(
    field: &VectorField,
    start: &ChartPoint,
    t_final: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if t_final < 0.0 {
        return Err(Error::contract(
            "integration time must be nonnegative (reverse the field to flow backward)".to_string(),
        ));
    }
    if t_final > cfg.max_time {
        return Err(Error::contract(format!(
            "integration time {t_final} exceeds max_time {}",
            cfg.max_time
        )));
    }
    let mut stepper = Stepper::new(field, start, cfg.method);
    let mut times = vec![0.0];
    let mut states = vec![start.clone()];
    while stepper.t < t_final {
        let remaining = t_final - stepper.t;
        if remaining <= 1e-14 * t_final.max(1.0) {
            break;
        }
        stepper.step(remaining)?;
        times.push(stepper.t);
        states.push(stepper.point());
    }
    Ok(Trajectory { times, states })
}

/// Flows `start` for time `t` and returns the endpoint.
pub fn flow_point(
    field: &VectorField,
    start: &ChartPoint,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<ChartPoint> {
    Ok(integrate(field, start, t, cfg)?.end().clone())
}

/// `n + 1` states at uniform times `i · t_final / n`.
pub fn sample_orbit(
    field: &VectorField,
    start: &ChartPoint,
    t_final: f64,
    n: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<ChartPoint>> {
    cfg.validate()?;
    let mut stepper = Stepper::new(field, start, cfg.method);
    let mut out = Vec::with_capacity(n + 1);
    out.push(start.clone());
    for i in 1..=n {
        stepper.advance_to(t_final * i as f64 / n as f64)?;
        out.push(stepper.point());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thurston;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_translates() {
        let field = VectorField::constant(5, &[0.0, 0.0, -1.0, 0.0, 0.0]);
        let p = ChartPoint::new(&[0.1, 0.2, 0.3, 0.4, 0.5]);
        let cfg = IntegratorConfig::default();
        let end = flow_point(&field, &p, 1.0, &cfg).unwrap();
        assert!((end[2] - (0.3 - 1.0)).abs() < 1e-12);
        for i in [0usize, 1, 3, 4] {
            assert!((end[i] - p[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn at_the_equator_t_advances_at_rate_two() {
        let x = thurston::field_x();
        let p = ChartPoint::new(&[0.0, 0.0, 0.0, 0.0, PI / 2.0]);
        let cfg = IntegratorConfig::default();
        let end = flow_point(&x, &p, 0.7, &cfg).unwrap();
        assert!((end[3] - 1.4).abs() < 1e-9);
        assert!((end[4] - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn forward_then_backward_returns_within_tolerance() {
        let x = thurston::field_x();
        let p = ChartPoint::new(&[0.3, 0.1, 0.9, 1.0, 0.8]);
        let cfg = IntegratorConfig::default();
        let fwd = flow_point(&x, &p, 2.5, &cfg).unwrap();
        let back_field = x.scale(-1.0);
        let back = flow_point(&back_field, &fwd, 2.5, &cfg).unwrap();
        let err: f64 = (back.coords() - p.coords()).abs().max();
        assert!(err < 10.0 * 1e-10, "round-trip error {err:.3e}");
    }

    #[test]
    fn u_is_conserved_along_x_orbits() {
        let x = thurston::field_x();
        let p = ChartPoint::new(&[0.0, 0.0, 0.0, 0.0, 0.6]);
        let cfg = IntegratorConfig::default();
        let traj = integrate(&x, &p, 20.0, &cfg).unwrap();
        for state in &traj.states {
            assert!((state[4] - 0.6).abs() < 1e-10);
        }
    }

    #[test]
    fn speed_is_constant_along_orbits() {
        let x = thurston::field_x();
        let g = thurston::frame_metric();
        let p = ChartPoint::new(&[0.2, 0.4, 0.1, 0.3, 0.9]);
        let cfg = IntegratorConfig::default();
        let traj = integrate(&x, &p, 15.0, &cfg).unwrap();
        let v0 = x.eval(&traj.states[0]).unwrap();
        let s0 = g.norm(&traj.states[0], &v0).unwrap();
        for state in &traj.states {
            let v = x.eval(state).unwrap();
            let s = g.norm(state, &v).unwrap();
            assert!((s - s0).abs() < 1e-8, "speed drift {:.3e}", (s - s0).abs());
        }
    }

    #[test]
    fn exceeding_max_time_is_rejected() {
        let field = VectorField::constant(2, &[1.0, 0.0]);
        let cfg = IntegratorConfig {
            max_time: 1.0,
            ..Default::default()
        };
        assert!(matches!(
            integrate(&field, &ChartPoint::new(&[0.0, 0.0]), 2.0, &cfg),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn rk4_matches_rk45_on_a_smooth_orbit() {
        let x = thurston::field_x();
        let p = ChartPoint::new(&[0.0, 0.0, 0.0, 0.0, 1.0]);
        let a = flow_point(&x, &p, 3.0, &IntegratorConfig::default()).unwrap();
        let cfg4 = IntegratorConfig {
            method: Method::Rk4 { step: 1e-3 },
            ..Default::default()
        };
        let b = flow_point(&x, &p, 3.0, &cfg4).unwrap();
        assert!((a.coords() - b.coords()).abs().max() < 1e-8);
    }
}
