//! Numerical 1-currents and tangent 2-chains.
//!
//! Leaves are closed orbits; a moving family of leaves sweeps a cylinder
//! (tangent 2-chain), parametrized by the family parameter `s` and the
//! normalized time `θ̂ = τ / T(s)` so the grid is rectangular. Boundary
//! orientation is `∂T = L_{s_end} − L_{s_start}`; the flux of a 2-form is
//! `∫ ds ∫ dθ̂ ω(∂_s Φ, T(s)·X)`, by composite Simpson in `s` and trapezoid
//! in the periodic `θ̂` direction.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{Frame, KForm, ScalarField, VectorField, DEFAULT_FD_STEP};
use crate::flow::{find_period_with_guess, IntegratorConfig, OrbitRecord};
use crate::point::ChartPoint;

use std::f64::consts::PI;

/// The Dirac 1-current of a point: `α ↦ α_p(X_p)`.
#[derive(Clone)]
pub struct DiracCurrent {
    pub point: ChartPoint,
    pub field: VectorField,
}

impl DiracCurrent {
    pub fn new(point: ChartPoint, field: VectorField) -> Self {
        DiracCurrent { point, field }
    }

    pub fn eval(&self, alpha: &KForm) -> Result<f64> {
        dirac_eval(&self.point, &self.field, alpha)
    }
}

/// `α_p(X_p)`.
pub fn dirac_eval(p: &ChartPoint, field: &VectorField, alpha: &KForm) -> Result<f64> {
    alpha.eval(p, &[&field.eval(p)?])
}

/// `∫_L α` over one period of a closed orbit, by composite Simpson on the
/// stored uniform-time samples.
pub fn leaf_integral(alpha: &KForm, orbit: &OrbitRecord) -> Result<f64> {
    let n = orbit.samples.len() - 1;
    let h = orbit.period / n as f64;
    let mut values = Vec::with_capacity(n + 1);
    for p in &orbit.samples {
        values.push(alpha.eval(p, &[&orbit.field.eval(p)?])?);
    }
    Ok(crate::flow::period::simpson(&values, h))
}

type BasePointFn = Arc<dyn Fn(f64) -> ChartPoint + Send + Sync>;
type PeriodHintFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A one-parameter family of closed leaves `s ↦ L_s`, given by a base point
/// on each leaf. The optional period hint only sizes the detection scan.
#[derive(Clone)]
pub struct LeafFamily {
    pub s_start: f64,
    pub s_end: f64,
    base_point: BasePointFn,
    period_hint: Option<PeriodHintFn>,
}

impl LeafFamily {
    pub fn new<F>(s_start: f64, s_end: f64, base_point: F) -> Self
    where
        F: Fn(f64) -> ChartPoint + Send + Sync + 'static,
    {
        LeafFamily {
            s_start,
            s_end,
            base_point: Arc::new(base_point),
            period_hint: None,
        }
    }

    pub fn with_period_hint<F>(mut self, hint: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.period_hint = Some(Arc::new(hint));
        self
    }

    /// The moving-leaf family of the nilmanifold flow: `p_s = (x0,y0,z0,t0,s)`
    /// with `s` the conserved latitude, and the reparametrization period as
    /// detection hint.
    pub fn thurston(base: (f64, f64, f64, f64), s_start: f64, s_end: f64) -> Self {
        LeafFamily::new(s_start, s_end, move |s| {
            ChartPoint::new(&[base.0, base.1, base.2, base.3, s])
        })
        .with_period_hint(crate::flow::period::expected_period)
    }

    pub fn base_point(&self, s: f64) -> ChartPoint {
        (self.base_point)(s)
    }

    fn hint(&self, s: f64) -> Option<f64> {
        self.period_hint.as_ref().map(|f| f(s))
    }
}

/// A tangent-cylinder mesh swept by a moving leaf family.
///
/// Grid lines are leaves at `s_j`; grid columns are the normalized times
/// `θ̂_k = k / N_θ`. Tangents: `∂_θ Φ = T(s_j) · X` exactly, `∂_s Φ` by
/// 2nd-order differences across lines (one-sided at the ends). All points
/// live in the universal cover, which keeps the s-differences smooth.
pub struct CylinderMesh {
    pub s_values: Vec<f64>,
    pub theta_values: Vec<f64>,
    /// `points[j][k]` = Φ(s_j, θ̂_k)
    pub points: Vec<Vec<ChartPoint>>,
    pub d_s: Vec<Vec<DVector<f64>>>,
    pub d_theta: Vec<Vec<DVector<f64>>>,
    /// Detected period per grid line.
    pub periods: Vec<f64>,
    /// Leaf normalizations `n_j = ceil(T(s_j) / 2π)`.
    pub wraps: Vec<u64>,
    /// Full orbit records of the boundary leaves (start, end).
    pub boundary: (OrbitRecord, OrbitRecord),
}

impl CylinderMesh {
    pub fn n_s(&self) -> usize {
        self.s_values.len() - 1
    }

    pub fn n_theta(&self) -> usize {
        self.theta_values.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.s_values.len() == 1 || self.s_values.first() == self.s_values.last()
    }

    /// Normalization of the deeper boundary leaf: `ceil(T_max / 2π)`.
    pub fn deep_wrap(&self) -> u64 {
        let t_max = self
            .periods
            .first()
            .copied()
            .unwrap_or(0.0)
            .max(self.periods.last().copied().unwrap_or(0.0));
        (t_max / (2.0 * PI)).ceil() as u64
    }
}

/// Builds the cylinder mesh; periods are detected per grid line
/// (concurrently) and any detection failure propagates.
pub fn build_cylinder(
    field: &VectorField,
    family: &LeafFamily,
    n_s: usize,
    n_theta: usize,
    cfg: &IntegratorConfig,
) -> Result<CylinderMesh> {
    if n_theta < 8 || !n_theta.is_multiple_of(2) {
        return Err(Error::contract(
            "n_theta must be even and at least 8".to_string(),
        ));
    }
    let degenerate = family.s_start == family.s_end;
    if !degenerate && (n_s < 2 || !n_s.is_multiple_of(2)) {
        return Err(Error::contract(
            "n_s must be even and at least 2 for Simpson quadrature".to_string(),
        ));
    }
    let lines = if degenerate { 1 } else { n_s + 1 };
    let ds = if degenerate {
        0.0
    } else {
        (family.s_end - family.s_start) / n_s as f64
    };
    let s_values: Vec<f64> = (0..lines).map(|j| family.s_start + ds * j as f64).collect();

    let line_cfg = IntegratorConfig {
        n_samples: n_theta,
        ..*cfg
    };
    let records: Vec<OrbitRecord> = s_values
        .par_iter()
        .map(|&s| {
            let p = family.base_point(s);
            find_period_with_guess(field, &p, &line_cfg, family.hint(s))
        })
        .collect::<Result<_>>()?;

    let theta_values: Vec<f64> = (0..n_theta).map(|k| k as f64 / n_theta as f64).collect();
    let mut points: Vec<Vec<ChartPoint>> = Vec::with_capacity(lines);
    let mut d_theta: Vec<Vec<DVector<f64>>> = Vec::with_capacity(lines);
    let mut periods = Vec::with_capacity(lines);
    let mut wraps = Vec::with_capacity(lines);
    for record in &records {
        let row: Vec<ChartPoint> = record.samples[..n_theta].to_vec();
        let mut tangents = Vec::with_capacity(n_theta);
        for p in &row {
            tangents.push(field.eval(p)? * record.period);
        }
        points.push(row);
        d_theta.push(tangents);
        periods.push(record.period);
        wraps.push((record.period / (2.0 * PI)).ceil() as u64);
    }

    // ∂_s Φ by differences across grid lines at fixed θ̂
    let mut d_s: Vec<Vec<DVector<f64>>> = Vec::with_capacity(lines);
    for j in 0..lines {
        let row = (0..n_theta)
            .map(|k| {
                if degenerate {
                    DVector::zeros(field.dim())
                } else if j == 0 {
                    (points[1][k].coords() * 4.0
                        - points[2][k].coords()
                        - points[0][k].coords() * 3.0)
                        / (2.0 * ds)
                } else if j == lines - 1 {
                    (points[j][k].coords() * 3.0 - points[j - 1][k].coords() * 4.0
                        + points[j - 2][k].coords())
                        / (2.0 * ds)
                } else {
                    (points[j + 1][k].coords() - points[j - 1][k].coords()) / (2.0 * ds)
                }
            })
            .collect();
        d_s.push(row);
    }

    let boundary = (
        records.first().expect("at least one line").clone(),
        records.last().expect("at least one line").clone(),
    );
    Ok(CylinderMesh {
        s_values,
        theta_values,
        points,
        d_s,
        d_theta,
        periods,
        wraps,
        boundary,
    })
}

/// `∫_mesh ω` for a 2-form, with the `∂T = L_end − L_start` orientation.
pub fn chain_flux(omega: &KForm, mesh: &CylinderMesh) -> Result<f64> {
    if omega.degree() != 2 {
        return Err(Error::contract(
            "chain flux integrates 2-forms over the cylinder".to_string(),
        ));
    }
    if mesh.is_degenerate() {
        return Ok(0.0);
    }
    let lines = mesh.s_values.len();
    let n_s = lines - 1;
    let ds = (mesh.s_values[n_s] - mesh.s_values[0]) / n_s as f64;
    let n_theta = mesh.n_theta() as f64;
    let mut flux = 0.0;
    for j in 0..lines {
        // composite Simpson weight in s (signed spacing)
        let w_s = ds / 3.0
            * if j == 0 || j == n_s {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
        let mut line_sum = 0.0;
        for k in 0..mesh.n_theta() {
            line_sum += omega.eval(&mesh.points[j][k], &[&mesh.d_s[j][k], &mesh.d_theta[j][k]])?;
        }
        flux += w_s * line_sum / n_theta;
    }
    Ok(flux)
}

/// `|∫ dα − (∫_{L_end} α − ∫_{L_start} α)|`: the discrete boundary-operator
/// identity on the cylinder.
pub fn stokes_residual(alpha: &KForm, mesh: &CylinderMesh) -> Result<f64> {
    let d_alpha = alpha.exterior_derivative(DEFAULT_FD_STEP)?;
    let flux = chain_flux(&d_alpha, mesh)?;
    let start = leaf_integral(alpha, &mesh.boundary.0)?;
    let end = leaf_integral(alpha, &mesh.boundary.1)?;
    Ok((flux - (end - start)).abs())
}

/// Flux measurements of one cylinder.
#[derive(Clone, Debug, Serialize)]
pub struct FluxReport {
    pub s_start: f64,
    pub s_end: f64,
    pub n_s: usize,
    pub n_theta: usize,
    pub period_start: f64,
    pub period_end: f64,
    /// `∫ dα` over the mesh.
    pub flux: f64,
    /// `∫_{L_start} α`, `∫_{L_end} α`.
    pub boundary_start: f64,
    pub boundary_end: f64,
    /// Leaf normalization of the deeper boundary, `n = ceil(T_max/2π)`.
    pub normalization: u64,
    /// `(1/n) ∫ dα`.
    pub normalized_flux: f64,
    /// Normalized boundary pairings `(1/n_j) ∫_{L_j} α`.
    pub normalized_boundary_start: f64,
    pub normalized_boundary_end: f64,
    /// `|flux − (boundary_end − boundary_start)|`.
    pub stokes_residual: f64,
    /// Residual of a mesh with both grid steps halved, when requested.
    pub refined_stokes_residual: Option<f64>,
}

/// Builds a cylinder for `alpha` over the family and measures the flux of
/// `dα`, the boundary pairings and the Stokes residual. With
/// `refine = true` the measurement is repeated on a mesh with both steps
/// halved to estimate the convergence order.
pub fn flux_report(
    field: &VectorField,
    family: &LeafFamily,
    alpha: &KForm,
    n_s: usize,
    n_theta: usize,
    cfg: &IntegratorConfig,
    refine: bool,
) -> Result<FluxReport> {
    Ok(flux_report_with_mesh(field, family, alpha, n_s, n_theta, cfg, refine)?.0)
}

/// [`flux_report`] returning the measured mesh as well (for dumping).
pub fn flux_report_with_mesh(
    field: &VectorField,
    family: &LeafFamily,
    alpha: &KForm,
    n_s: usize,
    n_theta: usize,
    cfg: &IntegratorConfig,
    refine: bool,
) -> Result<(FluxReport, CylinderMesh)> {
    let mesh = build_cylinder(field, family, n_s, n_theta, cfg)?;
    let d_alpha = alpha.exterior_derivative(DEFAULT_FD_STEP)?;
    let flux = chain_flux(&d_alpha, &mesh)?;
    let boundary_start = leaf_integral(alpha, &mesh.boundary.0)?;
    let boundary_end = leaf_integral(alpha, &mesh.boundary.1)?;
    let normalization = mesh.deep_wrap().max(1);
    let stokes = (flux - (boundary_end - boundary_start)).abs();
    let refined = if refine && !mesh.is_degenerate() {
        let fine = build_cylinder(field, family, 2 * n_s, 2 * n_theta, cfg)?;
        Some(stokes_residual(alpha, &fine)?)
    } else {
        None
    };
    let wrap_start = *mesh.wraps.first().unwrap() as f64;
    let wrap_end = *mesh.wraps.last().unwrap() as f64;
    let report = FluxReport {
        s_start: family.s_start,
        s_end: family.s_end,
        n_s: mesh.n_s(),
        n_theta: mesh.n_theta(),
        period_start: *mesh.periods.first().unwrap(),
        period_end: *mesh.periods.last().unwrap(),
        flux,
        boundary_start,
        boundary_end,
        normalization,
        normalized_flux: flux / normalization as f64,
        normalized_boundary_start: boundary_start / wrap_start.max(1.0),
        normalized_boundary_end: boundary_end / wrap_end.max(1.0),
        stokes_residual: stokes,
        refined_stokes_residual: refined,
    };
    Ok((report, mesh))
}

/// The decomposition `dα = −λ∧dB + ω` with `λ = α/α(X)`, together with the
/// pointwise residuals that vanish exactly when `(α, B)` solves the
/// stationary one-form equation `ι_X dα = −dB`.
pub struct Decomposition {
    pub lambda: KForm,
    pub omega: KForm,
    /// max over samples and frame vectors of `|(ι_X ω)(v)|`
    pub max_iota_x_omega: f64,
    /// max over samples and frame vectors of `|(ι_X dα + dB)(v)|`
    pub max_euler_residual: f64,
}

/// Decomposes `dα` against a Bernoulli candidate `B`, reporting the
/// residuals over the given samples (evaluated on the frame so restricted
/// charts like the sphere are handled).
pub fn decompose_dalpha(
    alpha: &KForm,
    bernoulli: &ScalarField,
    field: &VectorField,
    samples: &[ChartPoint],
    frame: &Frame,
) -> Result<Decomposition> {
    let alpha_c = alpha.clone();
    let field_c = field.clone();
    let lambda = alpha.scale_fn(move |p| {
        let pairing = alpha_c.eval(p, &[&field_c.eval(p)?])?;
        if pairing <= 0.0 {
            return Err(Error::contract(format!(
                "α(X) = {pairing:.6e} is not positive at {:?}",
                p.coords().as_slice()
            )));
        }
        Ok(1.0 / pairing)
    });
    let d_alpha = alpha.exterior_derivative(DEFAULT_FD_STEP)?;
    let db = bernoulli.differential(DEFAULT_FD_STEP);
    let omega = d_alpha.add(&lambda.wedge(&db)?)?;

    let iota_omega = omega.interior_product(field)?;
    let iota_dalpha = d_alpha.interior_product(field)?;
    let euler_form = iota_dalpha.add(&db)?;

    let mut max_iota_x_omega: f64 = 0.0;
    let mut max_euler_residual: f64 = 0.0;
    for p in samples {
        for v in frame.basis_at(p)? {
            max_iota_x_omega = max_iota_x_omega.max(iota_omega.eval(p, &[&v])?.abs());
            max_euler_residual = max_euler_residual.max(euler_form.eval(p, &[&v])?.abs());
        }
    }
    Ok(Decomposition {
        lambda,
        omega,
        max_iota_x_omega,
        max_euler_residual,
    })
}

/// Label carried by [`AdaptedProbe`]: the probe checks necessary conditions
/// only.
pub const NECESSARY_CONDITIONS_ONLY: &str = "necessary conditions only: a failure refutes strong \
     adaptedness of this one-form; success does not prove it";

/// Result of the strongly-adapted-form probe.
#[derive(Clone, Debug, Serialize)]
pub struct AdaptedProbe {
    /// min over samples of α(X); condition (i) needs this positive.
    pub min_pairing: f64,
    /// max over samples of the coefficients of `d(ι_X dα)`; condition (ii)
    /// (closedness, necessary for exactness) needs this below tolerance.
    pub max_closedness_coeff: f64,
    pub positivity_ok: bool,
    pub closedness_ok: bool,
    pub tolerance: f64,
    pub note: &'static str,
}

/// Tests the necessary conditions for `alpha` to be strongly adapted to
/// `field`: positivity of `α(X)` on the samples, and closedness of
/// `ι_X dα` (a necessary condition for exactness).
pub fn strongly_adapted_probe(
    alpha: &KForm,
    field: &VectorField,
    samples: &[ChartPoint],
    tolerance: f64,
) -> Result<AdaptedProbe> {
    let d_alpha = alpha.exterior_derivative(DEFAULT_FD_STEP)?;
    let contracted = d_alpha.interior_product(field)?;
    let d_contracted = contracted.exterior_derivative(DEFAULT_FD_STEP)?;
    let mut min_pairing = f64::INFINITY;
    let mut max_coeff: f64 = 0.0;
    for p in samples {
        min_pairing = min_pairing.min(alpha.eval(p, &[&field.eval(p)?])?);
        max_coeff = max_coeff.max(d_contracted.coeffs_at(p)?.abs().max());
    }
    Ok(AdaptedProbe {
        min_pairing,
        max_closedness_coeff: max_coeff,
        positivity_ok: min_pairing > 0.0,
        closedness_ok: max_coeff < tolerance,
        tolerance,
        note: NECESSARY_CONDITIONS_ONLY,
    })
}
