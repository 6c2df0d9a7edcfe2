//! Aggregated verification suites.
//!
//! Every suite returns a list of [`CheckResult`]s with pinned tolerances, so
//! the command-line runner and the acceptance tests share one source of
//! truth. Each check carries the identity it verifies as its anchor string.

use serde::Serialize;

use crate::chains::{self, LeafFamily};
use crate::error::{Error, Result};
use crate::exterior::{lie_derivative_form, KForm, VectorField, DEFAULT_FD_STEP};
use crate::flow::{self, flow_transport_lie_derivative, orbit_scan, IntegratorConfig, ScanRow};
use crate::point::ChartPoint;
use crate::rng::SplitMix64;
use crate::sampling;
use crate::thurston;
use crate::wadsley::{self, sphere};

use std::f64::consts::PI;

/// Identity strings attached to every check.
pub mod anchors {
    pub const BETA_X: &str = "β(X) = sin²u + cos²u = 1";
    pub const DBETA_SQ: &str = "(dβ)² = 0";
    pub const VOLUME_PRESERVED: &str = "dι_Xμ = 0 (μ is preserved by X)";
    pub const DESCENT: &str = "descend to the quotient";
    pub const W_PERIOD: &str = "orbits of W are all closed of period 2π";
    pub const X_EXTENDS: &str = "X extends as −∂/∂z along u = 0 mod π";
    pub const LARGE_PERIODS: &str = "orbits of X have arbitrarily large periods";
    pub const MONOTONE_LENGTHS: &str = "length(L_{t_i}) ≥ length(L_t)";
    pub const BOUNDARY_OP: &str = "∂c(ω) = c(dω)";
    pub const FLUX_EQ: &str = "A_i(dα) = (1/n_i) ∫_{T_i} dα";
    pub const POSITIVE_PAIRING: &str = "z(α) > 0 for foliation currents";
    pub const ADAPTED: &str = "α(X) > 0 and ι_X dα is exact";
    pub const AVERAGE: &str = "g₂ = ∫ ρ*g₁";
    pub const KILLING: &str = "X̃ is a Killing vector field";
    pub const UNIT_PAIRING: &str = "α(X̃) = 1 and ι_{X̃} dα = 0";
    pub const CURL_EQ: &str = "ι_ω μ = (dα)ⁿ";
    pub const BELTRAMI: &str = "ω = fX (parallel to its curl)";
    pub const DD_ZERO: &str = "d∘d = 0";
    pub const LEIBNIZ: &str = "d(α∧β) = dα∧β + (−1)^{deg α} α∧dβ";
    pub const CARTAN: &str = "L_Xω = ι_X dω + d ι_X ω";
    pub const IOTA_IOTA: &str = "ι_X∘ι_X = 0";
    pub const ANTISYMMETRY: &str = "eval is antisymmetric in the arguments";
    pub const NATURALITY: &str = "pullback commutes with d";
}

/// Direction of the pass predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Comparison {
    /// pass ⇔ measured ≤ tolerance
    #[serde(rename = "<=")]
    Le,
    /// pass ⇔ measured ≥ tolerance (negative controls, ratios)
    #[serde(rename = ">=")]
    Ge,
    /// pass ⇔ measured > tolerance (strict positivity)
    #[serde(rename = ">")]
    Gt,
}

/// One verified identity with its measured value and pinned tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub description: String,
    pub measured: f64,
    pub tolerance: f64,
    pub op: Comparison,
    pub pass: bool,
    pub anchor: String,
}

impl CheckResult {
    pub fn le(id: &str, description: &str, anchor: &str, measured: f64, tolerance: f64) -> Self {
        CheckResult {
            id: id.to_string(),
            description: description.to_string(),
            measured,
            tolerance,
            op: Comparison::Le,
            pass: measured <= tolerance,
            anchor: anchor.to_string(),
        }
    }

    pub fn ge(id: &str, description: &str, anchor: &str, measured: f64, tolerance: f64) -> Self {
        CheckResult {
            id: id.to_string(),
            description: description.to_string(),
            measured,
            tolerance,
            op: Comparison::Ge,
            pass: measured >= tolerance,
            anchor: anchor.to_string(),
        }
    }

    pub fn gt(id: &str, description: &str, anchor: &str, measured: f64, tolerance: f64) -> Self {
        CheckResult {
            id: id.to_string(),
            description: description.to_string(),
            measured,
            tolerance,
            op: Comparison::Gt,
            pass: measured > tolerance,
            anchor: anchor.to_string(),
        }
    }
}

pub fn all_pass(checks: &[CheckResult]) -> bool {
    checks.iter().all(|c| c.pass)
}

fn max_abs_coeffs(form: &KForm, points: &[ChartPoint]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        worst = worst.max(form.coeffs_at(p)?.abs().max());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// identity suite
// ---------------------------------------------------------------------------

/// The pointwise identities of the nilmanifold flow: `β(X) = 1`,
/// `(dβ)² = 0`, `d ι_X μ = 0`.
pub fn identity_suite(
    seed: u64,
    pairing_samples: usize,
    coeff_samples: usize,
    tol_override: Option<f64>,
) -> Result<Vec<CheckResult>> {
    let mut rng = SplitMix64::new(seed);
    let x = thurston::field_x();
    let beta = thurston::form_beta();
    let mu = thurston::form_mu();

    let mut worst_pairing: f64 = 0.0;
    for _ in 0..pairing_samples {
        let p = sampling::thurston_point(&mut rng);
        let v = beta.eval(&p, &[&x.eval(&p)?])?;
        worst_pairing = worst_pairing.max((v - 1.0).abs());
    }

    let points: Vec<ChartPoint> = (0..coeff_samples)
        .map(|_| sampling::thurston_point(&mut rng))
        .collect();
    let dbeta = beta.exterior_derivative(DEFAULT_FD_STEP)?;
    let dbeta_sq = dbeta.wedge(&dbeta)?;
    let worst_dbeta_sq = max_abs_coeffs(&dbeta_sq, &points)?;

    let d_iota_mu = mu
        .interior_product(&x)?
        .exterior_derivative(DEFAULT_FD_STEP)?;
    let worst_volume = max_abs_coeffs(&d_iota_mu, &points)?;

    Ok(vec![
        CheckResult::le(
            "identity.beta-pairing",
            &format!("max |β(X) − 1| over {pairing_samples} quotient points"),
            anchors::BETA_X,
            worst_pairing,
            tol_override.unwrap_or(1e-12),
        ),
        CheckResult::le(
            "identity.dbeta-squared",
            &format!("max coefficient of (dβ)² over {coeff_samples} points"),
            anchors::DBETA_SQ,
            worst_dbeta_sq,
            tol_override.unwrap_or(1e-9),
        ),
        CheckResult::le(
            "identity.volume-preservation",
            &format!("max coefficient of d ι_X μ over {coeff_samples} points"),
            anchors::VOLUME_PRESERVED,
            worst_volume,
            tol_override.unwrap_or(1e-9),
        ),
    ])
}

// ---------------------------------------------------------------------------
// property suite (exterior-calculus laws on random analytic data)
// ---------------------------------------------------------------------------

pub fn property_suite(seed: u64, tol_override: Option<f64>) -> Result<Vec<CheckResult>> {
    let mut rng = SplitMix64::new(seed);
    let configs = [(4usize, 1usize), (4, 2), (5, 1), (5, 2)];

    let mut worst_dd: f64 = 0.0;
    let mut worst_leibniz: f64 = 0.0;
    let mut worst_iota: f64 = 0.0;
    let mut worst_antisym: f64 = 0.0;
    let mut worst_naturality: f64 = 0.0;
    for &(dim, degree) in &configs {
        let omega = sampling::random_kform(dim, degree, &mut rng);
        let field = sampling::random_vector_field(dim, &mut rng);
        let points: Vec<ChartPoint> = (0..20)
            .map(|_| {
                ChartPoint::from_vector(nalgebra::DVector::from_fn(dim, |_, _| {
                    rng.uniform(-2.0, 2.0)
                }))
            })
            .collect();

        // d∘d = 0 on analytic forms
        let dd = omega
            .exterior_derivative(DEFAULT_FD_STEP)?
            .exterior_derivative(DEFAULT_FD_STEP)?;
        worst_dd = worst_dd.max(max_abs_coeffs(&dd, &points)?);

        // Leibniz rule
        let eta = sampling::random_kform(dim, 1, &mut rng);
        let product = omega.wedge(&eta)?;
        let lhs = product.exterior_derivative(DEFAULT_FD_STEP)?;
        let sign = if degree % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = omega
            .exterior_derivative(DEFAULT_FD_STEP)?
            .wedge(&eta)?
            .add(
                &omega
                    .wedge(&eta.exterior_derivative(DEFAULT_FD_STEP)?)?
                    .scale(sign),
            )?;
        let leibniz_defect = lhs.add(&rhs.scale(-1.0))?;
        worst_leibniz = worst_leibniz.max(max_abs_coeffs(&leibniz_defect, &points)?);

        // ι_X ∘ ι_X = 0 exactly
        if degree >= 2 {
            let twice = omega.interior_product(&field)?.interior_product(&field)?;
            worst_iota = worst_iota.max(max_abs_coeffs(&twice, &points)?);
        }

        // exact antisymmetry of evaluation under a transposition
        if degree == 2 {
            for p in &points {
                let v1 = nalgebra::DVector::from_fn(dim, |_, _| rng.uniform(-1.0, 1.0));
                let v2 = nalgebra::DVector::from_fn(dim, |_, _| rng.uniform(-1.0, 1.0));
                let forward = omega.eval(p, &[&v1, &v2])?;
                let swapped = omega.eval(p, &[&v2, &v1])?;
                worst_antisym = worst_antisym.max((forward + swapped).abs());
                worst_antisym = worst_antisym.max(omega.eval(p, &[&v1, &v1])?.abs());
            }
        }

        // pullback naturality through a nonlinear diffeomorphism
        let phi = sampling::random_diffeo(dim, &mut rng);
        let pull_then_d = phi.pullback(&omega)?.exterior_derivative(DEFAULT_FD_STEP)?;
        let d_then_pull = phi.pullback(&omega.exterior_derivative(DEFAULT_FD_STEP)?)?;
        let naturality_defect = pull_then_d.add(&d_then_pull.scale(-1.0))?;
        worst_naturality = worst_naturality.max(max_abs_coeffs(&naturality_defect, &points)?);
    }

    // Cartan formula against flow transport on a 4-chart
    let mut worst_cartan: f64 = 0.0;
    for _ in 0..6 {
        let field = sampling::random_vector_field(4, &mut rng);
        let omega = sampling::random_kform(4, 2, &mut rng);
        let p =
            ChartPoint::from_vector(nalgebra::DVector::from_fn(4, |_, _| rng.uniform(-1.0, 1.0)));
        let v1 = nalgebra::DVector::from_fn(4, |_, _| rng.uniform(-1.0, 1.0));
        let v2 = nalgebra::DVector::from_fn(4, |_, _| rng.uniform(-1.0, 1.0));
        let cartan = lie_derivative_form(&field, &omega, DEFAULT_FD_STEP)?.eval(&p, &[&v1, &v2])?;
        let transported = flow_transport_lie_derivative(&field, &omega, &p, &[&v1, &v2], 1e-3, 4)?;
        worst_cartan = worst_cartan.max((cartan - transported).abs());
    }

    Ok(vec![
        CheckResult::le(
            "property.dd-zero",
            "max coefficient of d(dω) on random analytic forms",
            anchors::DD_ZERO,
            worst_dd,
            tol_override.unwrap_or(1e-8),
        ),
        CheckResult::le(
            "property.leibniz",
            "max coefficient defect of the graded Leibniz rule",
            anchors::LEIBNIZ,
            worst_leibniz,
            tol_override.unwrap_or(1e-8),
        ),
        CheckResult::le(
            "property.cartan",
            "Cartan formula vs finite-difference flow transport",
            anchors::CARTAN,
            worst_cartan,
            tol_override.unwrap_or(1e-5),
        ),
        CheckResult::le(
            "property.iota-iota",
            "max coefficient of ι_X ι_X ω (exactly zero by construction)",
            anchors::IOTA_IOTA,
            worst_iota,
            tol_override.unwrap_or(0.0),
        ),
        CheckResult::le(
            "property.antisymmetry",
            "exact sign flip under transposition and zero on repeats",
            anchors::ANTISYMMETRY,
            worst_antisym,
            tol_override.unwrap_or(0.0),
        ),
        CheckResult::le(
            "property.naturality",
            "max coefficient of φ*(dω) − d(φ*ω)",
            anchors::NATURALITY,
            worst_naturality,
            tol_override.unwrap_or(1e-7),
        ),
    ])
}

// ---------------------------------------------------------------------------
// descent suite
// ---------------------------------------------------------------------------

/// Pushforward/pullback residuals over all lattice elements with
/// `|a|,|b|,|c| ≤ gamma_max`. With `broken = true` the invariant flow field
/// is replaced by `x ∂z` (which does not descend) as a negative control.
pub fn descent_suite(
    seed: u64,
    gamma_max: i64,
    samples: usize,
    tol: f64,
    broken: bool,
) -> Result<Vec<CheckResult>> {
    if gamma_max < 0 {
        return Err(Error::contract(
            "gamma range is empty (gamma_max < 0)".to_string(),
        ));
    }
    let mut rng = SplitMix64::new(seed);
    let field = if broken {
        VectorField::from_fn(thurston::DIM, |p| {
            Ok(nalgebra::DVector::from_vec(vec![0.0, 0.0, p[0], 0.0, 0.0]))
        })
    } else {
        thurston::field_x()
    };
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for a in -gamma_max..=gamma_max {
        for b in -gamma_max..=gamma_max {
            for c in -gamma_max..=gamma_max {
                let gamma = thurston::LatticeElement::new(a, b, c);
                let report = thurston::verify_descent(gamma, &field, samples, &mut rng)?;
                worst = worst.max(report.max_residual());
                count += 1;
            }
        }
    }
    let label = if broken {
        "max descent residual over lattice elements (broken-field control)"
    } else {
        "max descent residual over lattice elements"
    };
    Ok(vec![CheckResult::le(
        "descent.residual",
        &format!("{label}: {count} elements × {samples} samples"),
        anchors::DESCENT,
        worst,
        tol,
    )])
}

// ---------------------------------------------------------------------------
// period and length suites
// ---------------------------------------------------------------------------

pub fn period_suite(cfg: &IntegratorConfig) -> Result<Vec<CheckResult>> {
    let w = thurston::field_w(thurston::DEFAULT_BAD_BAND);
    let x = thurston::field_x();

    let mut worst_w: f64 = 0.0;
    for u in [PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0] {
        let p0 = ChartPoint::new(&[0.1, 0.2, 0.3, 0.4, u]);
        let record = flow::find_period_with_guess(&w, &p0, cfg, Some(2.0 * PI))?;
        worst_w = worst_w.max((record.period - 2.0 * PI).abs());
    }

    let mut worst_x_rel: f64 = 0.0;
    for u in [0.3, 0.6, 1.0, PI / 2.0] {
        let p0 = ChartPoint::new(&[0.0, 0.0, 0.0, 0.0, u]);
        let expected = PI / (u.sin() * u.sin());
        let record = flow::find_period_with_guess(&x, &p0, cfg, Some(expected))?;
        worst_x_rel = worst_x_rel.max((record.period - expected).abs() / expected);
    }

    let p0 = ChartPoint::new(&[0.4, 0.7, 0.2, 1.1, 0.0]);
    let record_u0 = flow::find_period_with_guess(&x, &p0, cfg, Some(1.0))?;

    Ok(vec![
        CheckResult::le(
            "period.w-two-pi",
            "max |T_W − 2π| over u ∈ {π/6, π/4, π/3, π/2}",
            anchors::W_PERIOD,
            worst_w,
            1e-6,
        ),
        CheckResult::le(
            "period.x-reparametrization",
            "max relative error of T_X against π/sin²u over u ∈ {0.3, 0.6, 1.0, π/2}",
            anchors::W_PERIOD,
            worst_x_rel,
            1e-5,
        ),
        CheckResult::le(
            "period.x-bad-set",
            "|T_X − 1| on the bad set (X = −∂z closing through the lattice)",
            anchors::X_EXTENDS,
            (record_u0.period - 1.0).abs(),
            1e-8,
        ),
    ])
}

/// Scan artifacts plus the blow-up checks at `u = 0.5, 0.25, 0.1, 0.05`.
pub struct LengthSuite {
    pub rows: Vec<ScanRow>,
    pub checks: Vec<CheckResult>,
}

pub fn length_suite(cfg: &IntegratorConfig) -> Result<LengthSuite> {
    let u_values = [0.5, 0.25, 0.1, 0.05];
    let rows = orbit_scan(&u_values, (0.0, 0.0, 0.0, 0.0), cfg)?;
    let min_increment = rows
        .windows(2)
        .map(|w| w[1].length - w[0].length)
        .fold(f64::INFINITY, f64::min);
    let ratio = rows.last().unwrap().length / rows.first().unwrap().length;
    let checks = vec![
        CheckResult::gt(
            "length.monotone-blowup",
            "min length increment along u = 0.5, 0.25, 0.1, 0.05 (strictly increasing)",
            anchors::MONOTONE_LENGTHS,
            min_increment,
            0.0,
        ),
        CheckResult::ge(
            "length.ratio",
            "ℓ(0.05) / ℓ(0.5) (closed form gives ≈ 75)",
            anchors::LARGE_PERIODS,
            ratio,
            50.0,
        ),
    ];
    Ok(LengthSuite { rows, checks })
}

// ---------------------------------------------------------------------------
// flux suite
// ---------------------------------------------------------------------------

pub struct FluxSuite {
    pub report: chains::FluxReport,
    pub checks: Vec<CheckResult>,
    pub mesh: chains::CylinderMesh,
}

/// Builds the moving-leaf cylinder over `[s_start, s_end]` for the invariant
/// 1-form and checks the boundary-operator identity, the refinement order
/// (optional) and — on deep scans, where the start leaf is negligible
/// against the end leaf — the 2π law for the normalized flux.
pub fn flux_suite(
    s_start: f64,
    s_end: f64,
    n_s: usize,
    n_theta: usize,
    cfg: &IntegratorConfig,
    refine: bool,
    label: &str,
) -> Result<FluxSuite> {
    let x = thurston::field_x();
    let beta = thurston::form_beta();
    let family = LeafFamily::thurston((0.0, 0.0, 0.0, 0.0), s_start, s_end);
    let (report, mesh) =
        chains::flux_report_with_mesh(&x, &family, &beta, n_s, n_theta, cfg, refine)?;

    let mut checks = Vec::new();
    let boundary_diff = report.boundary_end - report.boundary_start;
    let scale = boundary_diff.abs().max(1e-30);
    checks.push(CheckResult::le(
        &format!("flux.{label}.stokes-relative"),
        &format!("|∫dβ − (T(end) − T(start))| / |…| on a {n_s}×{n_theta} mesh"),
        anchors::BOUNDARY_OP,
        report.stokes_residual / scale,
        1e-3,
    ));
    if let Some(refined) = report.refined_stokes_residual {
        let ratio = if refined > 0.0 {
            report.stokes_residual / refined
        } else {
            f64::INFINITY
        };
        checks.push(CheckResult::ge(
            &format!("flux.{label}.refinement-order"),
            "Stokes residual ratio after halving both grid steps",
            anchors::BOUNDARY_OP,
            ratio,
            3.0,
        ));
    }
    // the 2π law is only decisive when the start leaf is negligible
    let deep = report.period_start / report.period_end < 0.02;
    if deep && !report.flux.is_nan() && report.normalization > 0 {
        let offset = (report.normalized_flux - 2.0 * PI).abs() / (2.0 * PI);
        checks.push(CheckResult::le(
            &format!("flux.{label}.normalized-two-pi"),
            &format!(
                "relative offset of (1/n)∫dβ from 2π at s = {s_end} (n = {})",
                report.normalization
            ),
            anchors::FLUX_EQ,
            offset,
            0.05,
        ));
    }
    // normalized boundary pairing stays bounded away from zero
    let n = report.normalization as f64;
    let deep_pairing = report
        .normalized_boundary_end
        .abs()
        .max(report.normalized_boundary_start.abs());
    checks.push(CheckResult::ge(
        &format!("flux.{label}.positive-pairing"),
        "normalized boundary pairing (1/n)∫β against its lower bound 2π(1 − 1/n)",
        anchors::POSITIVE_PAIRING,
        deep_pairing,
        (2.0 * PI * (1.0 - 1.0 / n) - 1e-9).max(0.0),
    ));
    Ok(FluxSuite {
        report,
        checks,
        mesh,
    })
}

// ---------------------------------------------------------------------------
// strongly-adapted probe suite
// ---------------------------------------------------------------------------

pub fn adapted_suite(seed: u64, samples: usize, tol: f64) -> Result<Vec<CheckResult>> {
    let mut rng = SplitMix64::new(seed);

    // the invariant one-form of the nilmanifold flow: positivity holds,
    // closedness of ι_X dβ fails with coefficient 2 at (u, t) = (0, 0)
    let x = thurston::field_x();
    let beta = thurston::form_beta();
    let mut points = vec![ChartPoint::new(&[0.0, 0.0, 0.0, 0.0, 0.0])];
    points.extend((0..samples).map(|_| sampling::thurston_point(&mut rng)));
    let beta_probe = chains::strongly_adapted_probe(&beta, &x, &points, tol)?;

    // the contact form of the Hopf field: both conditions pass
    let hopf = sphere::hopf_field();
    let alpha = sphere::hopf_dual_form();
    let sphere_points: Vec<ChartPoint> = (0..samples)
        .map(|_| sampling::sphere_point(&mut rng))
        .collect();
    let hopf_probe = chains::strongly_adapted_probe(&alpha, &hopf, &sphere_points, tol)?;

    Ok(vec![
        CheckResult::gt(
            "adapted.beta-positivity",
            "min β(X) over quotient samples",
            anchors::ADAPTED,
            beta_probe.min_pairing,
            0.0,
        ),
        CheckResult::ge(
            "adapted.beta-closedness-control",
            "max coefficient of d(ι_X dβ): the necessary condition must fail (analytic value 2)",
            anchors::ADAPTED,
            beta_probe.max_closedness_coeff,
            1.9,
        ),
        CheckResult::gt(
            "adapted.hopf-positivity",
            "min α(X) for the Hopf contact form",
            anchors::ADAPTED,
            hopf_probe.min_pairing,
            0.0,
        ),
        CheckResult::le(
            "adapted.hopf-closedness",
            "max coefficient of d(ι_X dα) for the Hopf contact form",
            anchors::ADAPTED,
            hopf_probe.max_closedness_coeff,
            tol,
        ),
    ])
}

// ---------------------------------------------------------------------------
// averaging pipeline and curl suites
// ---------------------------------------------------------------------------

pub fn wadsley_pipeline_suite(
    seed: u64,
    n_nodes: usize,
    samples: usize,
) -> Result<Vec<CheckResult>> {
    let mut rng = SplitMix64::new(seed);
    let action = sphere::hopf_action();
    let x = sphere::hopf_field();
    let frame = sphere::tangent_frame();
    let points: Vec<ChartPoint> = (0..samples)
        .map(|_| sampling::sphere_point(&mut rng))
        .collect();

    let g1 = sphere::perturbed_round_metric(0.1);
    let before = wadsley::killing_residual(&x, &g1, &points)?;
    let g2 = wadsley::average_metric(&g1, &action, n_nodes)?;
    let after = wadsley::killing_residual(&x, &g2, &points)?;
    let g3 = wadsley::normalize_metric(&g2, &x);
    let g3_killing = wadsley::killing_residual(&x, &g3, &points)?;

    // averaging an already invariant metric changes nothing
    let g2_again = wadsley::average_metric(&g2, &action, n_nodes)?;
    let mut idempotence: f64 = 0.0;
    for p in points.iter().take(12) {
        idempotence = idempotence.max((g2_again.eval(p)? - g2.eval(p)?).abs().max());
    }

    let alpha = wadsley::dual_one_form(&g3, &x);
    let mut worst_unit: f64 = 0.0;
    for p in &points {
        let v = alpha.eval(p, &[&x.eval(p)?])?;
        worst_unit = worst_unit.max((v - 1.0).abs());
    }
    let geod = wadsley::geodesibility_check(&alpha, &x, &points, &frame)?;

    // Beltrami-type Euler metric from the pipeline output
    let mu = {
        // intrinsic volume of g2: scale the unit normal-contraction form by
        // sqrt(det of g2 on the tangent frame)
        let base = sphere::round_volume();
        let g2_inner = g2.clone();
        let frame_inner = frame.clone();
        base.scale_fn(move |p| {
            let basis = frame_inner.basis_at(p)?;
            let mut m = nalgebra::DMatrix::zeros(3, 3);
            for (i, fi) in basis.iter().enumerate() {
                for (j, fj) in basis.iter().enumerate() {
                    m[(i, j)] = g2_inner.inner(p, fi, fj)?;
                }
            }
            let det = m.determinant();
            if det <= 0.0 {
                return Err(Error::contract("degenerate averaged metric".to_string()));
            }
            Ok(det.sqrt())
        })
    };
    let g_euler = wadsley::build_euler_metric(&alpha, &x, &mu, &g3, &frame)?;
    let mut worst_dual: f64 = 0.0;
    let mut worst_vol: f64 = 0.0;
    for p in points.iter().take(samples.min(24)) {
        let basis = frame.basis_at(p)?;
        // g(X, v) = α(v) on the tangent frame
        let xv = x.eval(p)?;
        for v in &basis {
            let lhs = g_euler.inner(p, &xv, v)?;
            let rhs = alpha.eval(p, &[v])?;
            worst_dual = worst_dual.max((lhs - rhs).abs());
        }
        // Riemannian volume matches μ on the frame
        let mut m = nalgebra::DMatrix::zeros(3, 3);
        for (i, fi) in basis.iter().enumerate() {
            for (j, fj) in basis.iter().enumerate() {
                m[(i, j)] = g_euler.inner(p, fi, fj)?;
            }
        }
        let refs: Vec<&nalgebra::DVector<f64>> = basis.iter().collect();
        let mu_val = mu.eval(p, &refs)?;
        worst_vol = worst_vol.max((m.determinant().max(0.0).sqrt() - mu_val.abs()).abs());
    }
    let curl_field = wadsley::curl(&x, &g_euler, &mu, &frame)?;
    let beltrami =
        wadsley::beltrami_residual(&x, &curl_field, &g_euler, &points[..points.len().min(24)])?;

    Ok(vec![
        CheckResult::ge(
            "wadsley.unaveraged-control",
            "Killing residual of the perturbed metric before averaging",
            anchors::KILLING,
            before,
            1e-2,
        ),
        CheckResult::le(
            "wadsley.averaged-killing",
            &format!("Killing residual after averaging with N = {n_nodes}"),
            anchors::AVERAGE,
            after,
            1e-6,
        ),
        CheckResult::le(
            "wadsley.average-idempotent",
            "max pointwise change when averaging the averaged metric again",
            anchors::AVERAGE,
            idempotence,
            1e-9,
        ),
        CheckResult::le(
            "wadsley.normalized-killing",
            "Killing residual after conformal normalization",
            anchors::KILLING,
            g3_killing,
            1e-6,
        ),
        CheckResult::le(
            "wadsley.unit-pairing",
            "max |α(X̃) − 1| (unit by construction)",
            anchors::UNIT_PAIRING,
            worst_unit,
            1e-14,
        ),
        CheckResult::le(
            "wadsley.iota-dalpha",
            "max |(ι_X̃ dα)(v)| on the tangent frame",
            anchors::UNIT_PAIRING,
            geod.max_iota_dalpha,
            1e-6,
        ),
        CheckResult::le(
            "wadsley.euler-dual",
            "max |g(X,·) − α| on the tangent frame of the built metric",
            anchors::CURL_EQ,
            worst_dual,
            1e-10,
        ),
        CheckResult::le(
            "wadsley.euler-volume",
            "max |vol(g) − μ| on the tangent frame of the built metric",
            anchors::CURL_EQ,
            worst_vol,
            1e-8,
        ),
        CheckResult::le(
            "wadsley.beltrami",
            "orthogonal component of the curl against the field",
            anchors::BELTRAMI,
            beltrami,
            1e-5,
        ),
    ])
}

pub fn curl_suite(
    seed: u64,
    thurston_samples: usize,
    hopf_samples: usize,
) -> Result<Vec<CheckResult>> {
    let mut rng = SplitMix64::new(seed);

    // nilmanifold flow with the metric built from the invariant one-form:
    // (dβ)² = 0 forces a vanishing curl
    let x = thurston::field_x();
    let beta = thurston::form_beta();
    let mu = thurston::form_mu();
    let frame = thurston::chart_frame();
    let g = wadsley::build_euler_metric(&beta, &x, &mu, &thurston::frame_metric(), &frame)?;
    let curl_thurston = wadsley::curl(&x, &g, &mu, &frame)?;
    let mut worst_thurston: f64 = 0.0;
    for _ in 0..thurston_samples {
        let p = sampling::thurston_point(&mut rng);
        worst_thurston = worst_thurston.max(curl_thurston.eval(&p)?.abs().max());
    }

    // Hopf field with the round metric: curl = 2X
    let hopf = sphere::hopf_field();
    let curl_hopf = wadsley::curl(
        &hopf,
        &sphere::round_metric(),
        &sphere::round_volume(),
        &sphere::tangent_frame(),
    )?;
    let mut worst_hopf_rel: f64 = 0.0;
    for _ in 0..hopf_samples {
        let p = sampling::sphere_point(&mut rng);
        let w = curl_hopf.eval(&p)?;
        let expected = hopf.eval(&p)? * 2.0;
        worst_hopf_rel = worst_hopf_rel.max((&w - &expected).norm() / expected.norm());
    }

    Ok(vec![
        CheckResult::le(
            "curl.thurston-vanishing",
            &format!("max curl component of the built Euler metric over {thurston_samples} points"),
            anchors::CURL_EQ,
            worst_thurston,
            1e-8,
        ),
        CheckResult::le(
            "curl.hopf-contact",
            &format!("max relative error of curl = 2X over {hopf_samples} sphere points"),
            anchors::CURL_EQ,
            worst_hopf_rel,
            1e-6,
        ),
    ])
}

// ---------------------------------------------------------------------------
// current positivity (discrete analogue)
// ---------------------------------------------------------------------------

pub fn positivity_suite(cfg: &IntegratorConfig) -> Result<Vec<CheckResult>> {
    let x = thurston::field_x();
    let beta = thurston::form_beta();
    let mut min_pairing = f64::INFINITY;
    for u in [0.0, 0.4, 0.9, PI / 2.0] {
        let p0 = ChartPoint::new(&[0.2, 0.1, 0.7, 0.3, u]);
        let record =
            flow::find_period_with_guess(&x, &p0, cfg, Some(flow::period::expected_period(u)))?;
        min_pairing = min_pairing.min(chains::leaf_integral(&beta, &record)?);
    }
    Ok(vec![CheckResult::gt(
        "chains.leaf-positivity",
        "min ∫_L β over leaves at u ∈ {0, 0.4, 0.9, π/2} (positive pairing)",
        anchors::POSITIVE_PAIRING,
        min_pairing,
        0.0,
    )])
}
