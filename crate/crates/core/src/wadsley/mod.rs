//! Metric averaging over a circle action and the Beltrami-type Euler metric.
//!
//! The pipeline: average any metric over the action (trapezoid quadrature of
//! the pullbacks — spectrally accurate on the periodic integrand), check the
//! generator is Killing, normalize conformally to unit generator length,
//! extract the dual 1-form and the geodesibility pair `α(X) > 0`,
//! `ι_X dα = 0`, then build the metric whose dual form is a prescribed `α`,
//! whose Riemannian volume is a prescribed `μ`, and compute curls through
//! the odd-dimensional defining equation `ι_ω μ = (dα)^n`.

pub mod sphere;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::{
    lie_derivative_metric, Frame, KForm, MetricEval, VectorField, DEFAULT_FD_STEP,
};
use crate::point::ChartPoint;

use std::f64::consts::PI;

type ActFn = Arc<dyn Fn(f64, &ChartPoint) -> Result<ChartPoint> + Send + Sync>;
type ActJacobianFn = Arc<dyn Fn(f64, &ChartPoint) -> Result<DMatrix<f64>> + Send + Sync>;

/// A circle action `ρ: S¹ × M → M` with its spatial jacobian and generator
/// `X̃ = d/dθ ρ_θ |_{θ=0}`.
#[derive(Clone)]
pub struct CircleAction {
    dim: usize,
    act: ActFn,
    jacobian: ActJacobianFn,
    generator: VectorField,
}

impl CircleAction {
    pub fn new<A, J>(dim: usize, act: A, jacobian: J, generator: VectorField) -> Self
    where
        A: Fn(f64, &ChartPoint) -> Result<ChartPoint> + Send + Sync + 'static,
        J: Fn(f64, &ChartPoint) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    {
        CircleAction {
            dim,
            act: Arc::new(act),
            jacobian: Arc::new(jacobian),
            generator,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn act(&self, theta: f64, p: &ChartPoint) -> Result<ChartPoint> {
        (self.act)(theta, p)
    }

    pub fn jacobian(&self, theta: f64, p: &ChartPoint) -> Result<DMatrix<f64>> {
        (self.jacobian)(theta, p)
    }

    pub fn generator(&self) -> &VectorField {
        &self.generator
    }

    /// Max residual of the action axioms (identity at 0, additivity mod 2π)
    /// over the given samples.
    pub fn axiom_residual(&self, samples: &[ChartPoint]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in samples {
            let id = self.act(0.0, p)?;
            worst = worst.max((id.coords() - p.coords()).abs().max());
            let two_step = self.act(0.7, &self.act(1.9, p)?)?;
            let one_step = self.act((0.7 + 1.9) % (2.0 * PI), p)?;
            worst = worst.max((two_step.coords() - one_step.coords()).abs().max());
        }
        Ok(worst)
    }
}

/// Haar average of a metric over the action:
/// `g₂(p) = (1/N) Σ_k Dρ_{θ_k}ᵀ g₁(ρ_{θ_k} p) Dρ_{θ_k}`, `θ_k = 2πk/N`.
///
/// Composite trapezoid on the periodic integrand, exact for trigonometric
/// polynomials of degree below `N`. Positive definiteness is checked at
/// every evaluation.
pub fn average_metric(g1: &MetricEval, action: &CircleAction, n: usize) -> Result<MetricEval> {
    if n < 8 {
        return Err(Error::contract(
            "metric averaging needs at least 8 quadrature nodes".to_string(),
        ));
    }
    if g1.dim() != action.dim() {
        return Err(Error::contract(
            "metric and action live on different charts".to_string(),
        ));
    }
    let g1 = g1.clone();
    let action = action.clone();
    let dim = action.dim();
    Ok(MetricEval::from_fn(dim, move |p| {
        let mut acc = DMatrix::zeros(dim, dim);
        for k in 0..n {
            let theta = 2.0 * PI * k as f64 / n as f64;
            let image = action.act(theta, p)?;
            let jac = action.jacobian(theta, p)?;
            acc += jac.transpose() * g1.eval(&image)? * jac;
        }
        acc /= n as f64;
        // symmetrize away rounding and check the average stayed a metric
        let sym = (&acc + acc.transpose()) * 0.5;
        if nalgebra::Cholesky::new(sym.clone()).is_none() {
            return Err(Error::NotPositiveDefinite(format!(
                "averaged metric lost positive definiteness at {:?}",
                p.coords().as_slice()
            )));
        }
        Ok(sym)
    }))
}

/// Max over samples and index pairs of `|(L_X g)_ij|`.
pub fn killing_residual(
    field: &VectorField,
    metric: &MetricEval,
    samples: &[ChartPoint],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in samples {
        let l = lie_derivative_metric(field, metric, p, DEFAULT_FD_STEP)?;
        worst = worst.max(l.abs().max());
    }
    Ok(worst)
}

/// Conformal normalization `g₃ = g₂ / g₂(X̃, X̃)`: the generator gets unit
/// length by construction, and stays Killing because the conformal factor
/// is invariant along an already-Killing generator.
pub fn normalize_metric(g2: &MetricEval, field: &VectorField) -> MetricEval {
    let g2 = g2.clone();
    let field = field.clone();
    MetricEval::from_fn(g2.dim(), move |p| {
        let g = g2.eval(p)?;
        let x = field.eval(p)?;
        let q = (x.transpose() * &g * &x)[(0, 0)];
        if q <= 0.0 {
            return Err(Error::contract(format!(
                "g(X,X) = {q:.6e} is not positive at {:?} (the generator must not vanish)",
                p.coords().as_slice()
            )));
        }
        Ok(g / q)
    })
}

/// The dual 1-form `α = g(X, ·)`, with analytic coefficient partials when
/// both the metric and the field carry derivative data.
pub fn dual_one_form(metric: &MetricEval, field: &VectorField) -> KForm {
    let g = metric.clone();
    let x = field.clone();
    let dim = metric.dim();
    let mut out = KForm::from_fn(dim, 1, move |p| Ok(g.eval(p)? * x.eval(p)?));
    if metric.has_partials() && field.has_jacobian() {
        let g = metric.clone();
        let x = field.clone();
        out = out.with_partials(move |p| {
            let gm = g.eval(p)?;
            let dg = g.partials_at(p, DEFAULT_FD_STEP)?;
            let xv = x.eval(p)?;
            let jac = x.jacobian_at(p, DEFAULT_FD_STEP)?;
            let mut m = DMatrix::zeros(dim, dim);
            for (r, dg_r) in dg.iter().enumerate() {
                let col = dg_r * &xv + &gm * jac.column(r);
                m.set_column(r, &col);
            }
            Ok(m)
        });
    }
    out
}

/// The geodesibility pair of a candidate 1-form: `min α(X)` and
/// `max |(ι_X dα)(v)|` over samples, with `v` running through the tangent
/// frame (which restricts the check to the manifold on embedded charts).
#[derive(Clone, Debug)]
pub struct GeodesibilityReport {
    pub min_pairing: f64,
    pub max_iota_dalpha: f64,
}

impl GeodesibilityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_pairing > 0.0 && self.max_iota_dalpha < tol
    }
}

pub fn geodesibility_check(
    alpha: &KForm,
    field: &VectorField,
    samples: &[ChartPoint],
    frame: &Frame,
) -> Result<GeodesibilityReport> {
    let d_alpha = alpha.exterior_derivative(DEFAULT_FD_STEP)?;
    let contracted = d_alpha.interior_product(field)?;
    let mut min_pairing = f64::INFINITY;
    let mut max_iota: f64 = 0.0;
    for p in samples {
        min_pairing = min_pairing.min(alpha.eval(p, &[&field.eval(p)?])?);
        for v in frame.basis_at(p)? {
            max_iota = max_iota.max(contracted.eval(p, &[&v])?.abs());
        }
    }
    Ok(GeodesibilityReport {
        min_pairing,
        max_iota_dalpha: max_iota,
    })
}

/// Builds the metric determined by the three conditions: `g(X,·) = α`, `X`
/// orthogonal to `ker α`, and the conformal factor on `ker α` (relative to
/// `base_g`) chosen so the Riemannian volume equals `μ`.
///
/// Pointwise, in the tangent frame: `G = aaᵀ/α(X) + c · QᵀBQ` with `a` the
/// frame components of `α`, `B` the base metric on the frame, and `Q` the
/// projection onto `ker α` along `X`. Since `det G = κ·c^{m-1}` with
/// `κ = det(G at c=1)`, the volume condition is a monomial equation solved
/// in closed form. On embedded charts the result is completed to an ambient
/// metric by the identity on the normal space.
pub fn build_euler_metric(
    alpha: &KForm,
    field: &VectorField,
    mu: &KForm,
    base_g: &MetricEval,
    frame: &Frame,
) -> Result<MetricEval> {
    let m = frame.dim_manifold();
    if mu.degree() != m {
        return Err(Error::contract(
            "volume form degree must match the manifold dimension".to_string(),
        ));
    }
    let alpha = alpha.clone();
    let field = field.clone();
    let mu = mu.clone();
    let base_g = base_g.clone();
    let frame = frame.clone();
    let dim = frame.dim_ambient();
    Ok(MetricEval::from_fn(dim, move |p| {
        let basis = frame.basis_at(p)?;
        let x = field.eval(p)?;
        let pairing = alpha.eval(p, &[&x])?;
        if pairing <= 0.0 {
            return Err(Error::contract(format!(
                "α(X) = {pairing:.6e} is not positive at {:?}",
                p.coords().as_slice()
            )));
        }
        // frame data
        let mut a = DVector::zeros(m);
        for (i, f) in basis.iter().enumerate() {
            a[i] = alpha.eval(p, &[f])?;
        }
        let mut x_frame = DVector::zeros(m);
        for (i, f) in basis.iter().enumerate() {
            x_frame[i] = f.dot(&x);
        }
        let mut b = DMatrix::zeros(m, m);
        for (i, fi) in basis.iter().enumerate() {
            for (j, fj) in basis.iter().enumerate() {
                b[(i, j)] = base_g.inner(p, fi, fj)?;
            }
        }
        let refs: Vec<&DVector<f64>> = basis.iter().collect();
        let mvol = mu.eval(p, &refs)?;
        if mvol == 0.0 {
            return Err(Error::contract(format!(
                "volume form vanishes at {:?}",
                p.coords().as_slice()
            )));
        }

        let g0 = &a * a.transpose() / pairing;
        let q = DMatrix::identity(m, m) - &x_frame * a.transpose() / pairing;
        let restricted = q.transpose() * &b * &q;
        let kappa = (&g0 + &restricted).determinant();
        if kappa <= 0.0 {
            return Err(Error::contract(format!(
                "degenerate restriction of the base metric at {:?}",
                p.coords().as_slice()
            )));
        }
        // det(G(c)) = κ c^{m-1}; volume condition det(G) = μ(frame)²
        let c = (mvol * mvol / kappa).powf(1.0 / (m as f64 - 1.0));
        let g_frame = g0 + restricted * c;

        // ambient completion: identity on the normal space
        let mut f_mat = DMatrix::zeros(dim, m);
        for (i, f) in basis.iter().enumerate() {
            f_mat.set_column(i, f);
        }
        let tangent_part = &f_mat * g_frame * f_mat.transpose();
        let normal_part = DMatrix::identity(dim, dim) - &f_mat * f_mat.transpose();
        Ok(tangent_part + normal_part)
    }))
}

/// The curl of `X` in `(g, μ)` on an odd-dimensional manifold `m = 2n+1`:
/// the unique field `ω` with `ι_ω μ = (dα)^n`, `α = g(X,·)`. Solved
/// pointwise as an `m×m` linear system on the tangent frame.
pub fn curl(
    field: &VectorField,
    metric: &MetricEval,
    mu: &KForm,
    frame: &Frame,
) -> Result<VectorField> {
    let m = frame.dim_manifold();
    if m.is_multiple_of(2) || m < 3 {
        return Err(Error::unsupported(format!(
            "curl needs odd manifold dimension >= 3, got {m}"
        )));
    }
    let n = (m - 1) / 2;
    let alpha = dual_one_form(metric, field);
    let d_alpha = alpha.exterior_derivative(DEFAULT_FD_STEP)?;
    let power = d_alpha.wedge_power(n)?;
    let mu = mu.clone();
    let frame = frame.clone();
    let dim = frame.dim_ambient();
    Ok(VectorField::from_fn(dim, move |p| {
        let basis = frame.basis_at(p)?;
        let tuples = crate::multi_index::multi_indices(m, 2 * n);
        let mut a = DMatrix::zeros(tuples.len(), m);
        let mut rhs = DVector::zeros(tuples.len());
        for (row, tuple) in tuples.iter().enumerate() {
            let frame_tuple: Vec<&DVector<f64>> = tuple.iter().map(|&j| &basis[j]).collect();
            rhs[row] = power.eval(p, &frame_tuple)?;
            for (col, f) in basis.iter().enumerate() {
                let mut args: Vec<&DVector<f64>> = Vec::with_capacity(m);
                args.push(f);
                args.extend(frame_tuple.iter().copied());
                a[(row, col)] = mu.eval(p, &args)?;
            }
        }
        let lu = a.lu();
        let omega_frame = lu.solve(&rhs).ok_or_else(|| {
            Error::contract(format!(
                "curl system is singular at {:?} (volume form vanishing?)",
                p.coords().as_slice()
            ))
        })?;
        let mut out = DVector::zeros(dim);
        for (i, f) in basis.iter().enumerate() {
            out += f * omega_frame[i];
        }
        Ok(out)
    }))
}

/// Max over samples of the g-norm of the component of `curl` orthogonal to
/// `X`: zero exactly when the two fields are pointwise parallel.
pub fn beltrami_residual(
    field: &VectorField,
    curl_field: &VectorField,
    metric: &MetricEval,
    samples: &[ChartPoint],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in samples {
        let x = field.eval(p)?;
        let w = curl_field.eval(p)?;
        let xx = metric.inner(p, &x, &x)?;
        if xx <= 0.0 {
            return Err(Error::contract(
                "beltrami residual needs a non-vanishing field".to_string(),
            ));
        }
        let coeff = metric.inner(p, &w, &x)? / xx;
        let off = &w - &x * coeff;
        worst = worst.max(metric.norm(p, &off)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::sphere::*;
    use super::*;
    use crate::rng::SplitMix64;
    use crate::sampling::{self, SampleDomain};

    fn sphere_samples(count: usize, seed: u64) -> Vec<ChartPoint> {
        let mut rng = SplitMix64::new(seed);
        (0..count)
            .map(|_| sampling::sphere_point(&mut rng))
            .collect()
    }

    #[test]
    fn round_metric_is_a_fixed_point_of_averaging() {
        let round = round_metric();
        let averaged = average_metric(&round, &hopf_action(), 16).unwrap();
        for p in sphere_samples(20, 10) {
            let d = (averaged.eval(&p).unwrap() - round.eval(&p).unwrap())
                .abs()
                .max();
            assert!(d < 1e-14);
        }
    }

    #[test]
    fn too_few_nodes_is_a_contract_violation() {
        let round = round_metric();
        assert!(matches!(
            average_metric(&round, &hopf_action(), 4),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn hopf_field_is_killing_for_the_round_metric() {
        let samples = sphere_samples(50, 11);
        let r = killing_residual(&hopf_field(), &round_metric(), &samples).unwrap();
        assert!(r < 1e-10, "killing residual {r:.3e}");
    }

    #[test]
    fn averaging_restores_the_killing_property() {
        let samples = sphere_samples(30, 12);
        let g1 = perturbed_round_metric(0.1);
        let before = killing_residual(&hopf_field(), &g1, &samples).unwrap();
        assert!(before > 1e-2, "unaveraged residual {before:.3e}");
        let g2 = average_metric(&g1, &hopf_action(), 64).unwrap();
        let after = killing_residual(&hopf_field(), &g2, &samples).unwrap();
        assert!(after < 1e-6, "averaged residual {after:.3e}");
        // spectral convergence: doubling the nodes changes nothing visible
        let g2b = average_metric(&g1, &hopf_action(), 128).unwrap();
        let p = &samples[0];
        let d = (g2.eval(p).unwrap() - g2b.eval(p).unwrap()).abs().max();
        assert!(d < 1e-12, "trapezoid tail {d:.3e}");
    }

    #[test]
    fn averaging_is_idempotent() {
        let g1 = perturbed_round_metric(0.1);
        let action = hopf_action();
        let g2 = average_metric(&g1, &action, 64).unwrap();
        let g22 = average_metric(&g2, &action, 64).unwrap();
        for p in sphere_samples(10, 13) {
            let d = (g22.eval(&p).unwrap() - g2.eval(&p).unwrap()).abs().max();
            assert!(d < 1e-9, "idempotence defect {d:.3e}");
        }
    }

    #[test]
    fn normalization_gives_unit_generator_exactly() {
        let g1 = perturbed_round_metric(0.1);
        let action = hopf_action();
        let g2 = average_metric(&g1, &action, 64).unwrap();
        let g3 = normalize_metric(&g2, action.generator());
        let x = hopf_field();
        for p in sphere_samples(20, 14) {
            let xv = x.eval(&p).unwrap();
            let unit = g3.inner(&p, &xv, &xv).unwrap();
            assert!((unit - 1.0).abs() < 1e-14, "g3(X,X) = {unit}");
        }
        // Hopf/round: already unit, so normalization is the identity
        let round3 = normalize_metric(&round_metric(), &x);
        for p in sphere_samples(10, 15) {
            let d = (round3.eval(&p).unwrap() - round_metric().eval(&p).unwrap())
                .abs()
                .max();
            assert!(d < 1e-14);
        }
    }

    #[test]
    fn dual_form_of_the_hopf_field_is_the_contact_form() {
        let alpha = dual_one_form(&round_metric(), &hopf_field());
        let reference = hopf_dual_form();
        for p in sphere_samples(20, 16) {
            let d = (alpha.coeffs_at(&p).unwrap() - reference.coeffs_at(&p).unwrap())
                .abs()
                .max();
            assert!(d < 1e-15);
        }
    }

    #[test]
    fn geodesibility_pair_for_hopf_and_scaling_behaviour() {
        let domain = SampleDomain::sphere();
        let samples = sphere_samples(40, 17);
        let x = hopf_field();
        let alpha = dual_one_form(&round_metric(), &x);
        let report = geodesibility_check(&alpha, &x, &samples, &domain.frame).unwrap();
        assert!((report.min_pairing - 1.0).abs() < 1e-12);
        assert!(report.max_iota_dalpha < 1e-8);
        assert!(report.passes(1e-8));

        // scaled metric: the pairing quadruples, no silent normalization
        let scaled = MetricEval::from_fn(4, |_| Ok(DMatrix::identity(4, 4) * 4.0))
            .with_partials(|_| Ok(vec![DMatrix::zeros(4, 4); 4]));
        let alpha4 = dual_one_form(&scaled, &x);
        let report4 = geodesibility_check(&alpha4, &x, &samples, &domain.frame).unwrap();
        assert!((report4.min_pairing - 4.0).abs() < 1e-12);
    }

    #[test]
    fn euler_metric_recovers_the_round_metric_for_hopf() {
        let x = hopf_field();
        let alpha = hopf_dual_form();
        let mu = round_volume();
        let g = build_euler_metric(&alpha, &x, &mu, &round_metric(), &tangent_frame()).unwrap();
        for p in sphere_samples(30, 18) {
            let d = (g.eval(&p).unwrap() - DMatrix::identity(4, 4)).abs().max();
            assert!(d < 1e-8, "deviation from round {d:.3e}");
        }
    }

    #[test]
    fn hopf_curl_is_twice_the_field() {
        let x = hopf_field();
        let curl_x = curl(&x, &round_metric(), &round_volume(), &tangent_frame()).unwrap();
        for p in sphere_samples(100, 19) {
            let w = curl_x.eval(&p).unwrap();
            let expected = x.eval(&p).unwrap() * 2.0;
            let rel = (&w - &expected).norm() / expected.norm();
            assert!(rel < 1e-6, "relative curl error {rel:.3e}");
        }
        // Beltrami: curl parallel to the field
        let samples = sphere_samples(50, 20);
        let r = beltrami_residual(&x, &curl_x, &round_metric(), &samples).unwrap();
        assert!(r < 1e-8);
    }

    #[test]
    fn doubling_the_volume_halves_the_curl() {
        let x = hopf_field();
        let mu = round_volume();
        let mu2 = mu.scale(2.0);
        let c1 = curl(&x, &round_metric(), &mu, &tangent_frame()).unwrap();
        let c2 = curl(&x, &round_metric(), &mu2, &tangent_frame()).unwrap();
        for p in sphere_samples(20, 21) {
            let w1 = c1.eval(&p).unwrap();
            let w2 = c2.eval(&p).unwrap();
            assert!((w1 * 0.5 - w2).abs().max() < 1e-10);
        }
    }

    #[test]
    fn transverse_field_fails_the_beltrami_test() {
        // negative control: compare the Hopf field against the curl of a
        // transverse frame field
        let x = hopf_field();
        let j_field =
            VectorField::from_fn(4, |p| Ok(DVector::from_vec(vec![-p[2], p[3], p[0], -p[1]])))
                .with_jacobian(|_| {
                    Ok(DMatrix::from_row_slice(
                        4,
                        4,
                        &[
                            0.0, 0.0, -1.0, 0.0, //
                            0.0, 0.0, 0.0, 1.0, //
                            1.0, 0.0, 0.0, 0.0, //
                            0.0, -1.0, 0.0, 0.0,
                        ],
                    ))
                });
        let curl_j = curl(&j_field, &round_metric(), &round_volume(), &tangent_frame()).unwrap();
        let samples = sphere_samples(30, 22);
        let r = beltrami_residual(&x, &curl_j, &round_metric(), &samples).unwrap();
        assert!(r > 0.5, "transverse control residual {r:.3e}");
    }

    #[test]
    fn curl_sees_the_dual_form_only_through_its_derivative() {
        // build the Euler metric from α + df instead of α: the dual form
        // changes by an exact term, dα does not, so the curl is unchanged
        let x = hopf_field();
        let f = crate::exterior::ScalarField::from_fn(4, |p| Ok(0.05 * p[0].sin() * p[2].cos()))
            .with_partials(|p| {
                Ok(DVector::from_vec(vec![
                    0.05 * p[0].cos() * p[2].cos(),
                    0.0,
                    -0.05 * p[0].sin() * p[2].sin(),
                    0.0,
                ]))
            });
        let shifted = hopf_dual_form()
            .add(&f.differential(crate::exterior::DEFAULT_FD_STEP))
            .unwrap();
        let mu = round_volume();
        let g = build_euler_metric(&shifted, &x, &mu, &round_metric(), &tangent_frame()).unwrap();
        let curl_shifted = curl(&x, &g, &mu, &tangent_frame()).unwrap();
        for p in sphere_samples(30, 23) {
            let w = curl_shifted.eval(&p).unwrap();
            let expected = x.eval(&p).unwrap() * 2.0;
            let err = (&w - &expected).norm() / expected.norm();
            assert!(err < 1e-8, "exact-shift curl deviation {err:.3e}");
        }
    }

    #[test]
    fn even_dimension_is_unsupported() {
        let frame = Frame::coordinate(4);
        let x = VectorField::constant(4, &[1.0, 0.0, 0.0, 0.0]);
        let mu = KForm::basis(4, &[0, 1, 2, 3]);
        assert!(matches!(
            curl(&x, &MetricEval::euclidean(4), &mu, &frame),
            Err(Error::Unsupported(_))
        ));
    }
}
