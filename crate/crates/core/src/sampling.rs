//! Seeded sampling of chart points and analytic test data.
//!
//! Random forms and fields are built from a small family of trigonometric
//! expressions with closed-form partial derivatives, so the property suites
//! (d∘d, Leibniz, Cartan, naturality) can run on analytic data.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::exterior::{Diffeo, Frame, KForm, ScalarField, VectorField};
use crate::multi_index::multi_indices;
use crate::point::ChartPoint;
use crate::rng::SplitMix64;

/// A random point of the fundamental cell of the 5-chart: `x, y, z ∈ [0,1)`,
/// `t, u ∈ [0, 2π)`.
pub fn thurston_point(rng: &mut SplitMix64) -> ChartPoint {
    ChartPoint::new(&[
        rng.next_f64(),
        rng.next_f64(),
        rng.next_f64(),
        rng.uniform(0.0, 2.0 * PI),
        rng.uniform(0.0, 2.0 * PI),
    ])
}

/// Like [`thurston_point`] but with `u` kept at least `margin` away from the
/// bad set `u ≡ 0 mod π`.
pub fn thurston_point_off_bad_set(rng: &mut SplitMix64, margin: f64) -> ChartPoint {
    loop {
        let p = thurston_point(rng);
        if crate::thurston::distance_to_bad_set(p[4]) > margin {
            return p;
        }
    }
}

/// A uniform random point of the unit three-sphere in ambient ℝ⁴.
pub fn sphere_point(rng: &mut SplitMix64) -> ChartPoint {
    loop {
        let v = DVector::from_vec(vec![rng.normal(), rng.normal(), rng.normal(), rng.normal()]);
        let n = v.norm();
        if n > 1e-6 {
            return ChartPoint::from_vector(v / n);
        }
    }
}

/// A chart together with its point sampler and tangent frame; evaluation of
/// restricted objects (forms and metrics on the sphere) happens through the
/// frame.
#[derive(Clone)]
pub struct SampleDomain {
    pub label: &'static str,
    pub dim: usize,
    pub frame: Frame,
    sampler: std::sync::Arc<dyn Fn(&mut SplitMix64) -> ChartPoint + Send + Sync>,
}

impl SampleDomain {
    pub fn sample(&self, rng: &mut SplitMix64) -> ChartPoint {
        (self.sampler)(rng)
    }

    pub fn sample_many(&self, rng: &mut SplitMix64, count: usize) -> Vec<ChartPoint> {
        (0..count).map(|_| self.sample(rng)).collect()
    }

    /// The 5-dimensional nilmanifold chart with the coordinate frame.
    pub fn thurston() -> Self {
        SampleDomain {
            label: "thurston-chart",
            dim: crate::thurston::DIM,
            frame: Frame::coordinate(crate::thurston::DIM),
            sampler: std::sync::Arc::new(thurston_point),
        }
    }

    /// The unit three-sphere in ambient ℝ⁴ with the quaternion tangent frame.
    pub fn sphere() -> Self {
        SampleDomain {
            label: "three-sphere",
            dim: 4,
            frame: crate::wadsley::sphere::tangent_frame(),
            sampler: std::sync::Arc::new(sphere_point),
        }
    }
}

// ---------------------------------------------------------------------------
// analytic random expressions
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
enum Trig {
    Sin,
    Cos,
}

impl Trig {
    fn eval(self, x: f64) -> f64 {
        match self {
            Trig::Sin => x.sin(),
            Trig::Cos => x.cos(),
        }
    }

    fn derivative(self, x: f64) -> f64 {
        match self {
            Trig::Sin => x.cos(),
            Trig::Cos => -x.sin(),
        }
    }
}

#[derive(Clone, Debug)]
struct Term {
    amplitude: f64,
    factors: Vec<(usize, Trig)>, // at most two
}

/// A short sum of products of `sin`/`cos` of single coordinates; smooth,
/// bounded, with exact partial derivatives.
#[derive(Clone, Debug)]
pub struct TrigExpr {
    terms: Vec<Term>,
}

impl TrigExpr {
    pub fn random(dim: usize, rng: &mut SplitMix64) -> Self {
        let n_terms = 2 + (rng.next_u64() % 2) as usize;
        let mut terms = Vec::with_capacity(n_terms + 1);
        terms.push(Term {
            amplitude: rng.uniform(-1.0, 1.0),
            factors: vec![],
        });
        for _ in 0..n_terms {
            let n_factors = 1 + (rng.next_u64() % 2) as usize;
            let mut factors = Vec::with_capacity(n_factors);
            for _ in 0..n_factors {
                let var = (rng.next_u64() as usize) % dim;
                let trig = if rng.next_u64().is_multiple_of(2) {
                    Trig::Sin
                } else {
                    Trig::Cos
                };
                factors.push((var, trig));
            }
            terms.push(Term {
                amplitude: rng.uniform(-1.0, 1.0),
                factors,
            });
        }
        TrigExpr { terms }
    }

    pub fn eval(&self, p: &ChartPoint) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .fold(t.amplitude, |acc, &(var, trig)| acc * trig.eval(p[var]))
            })
            .sum()
    }

    pub fn partial(&self, p: &ChartPoint, direction: usize) -> f64 {
        let mut acc = 0.0;
        for term in &self.terms {
            for (slot, &(var, trig)) in term.factors.iter().enumerate() {
                if var != direction {
                    continue;
                }
                let mut prod = term.amplitude * trig.derivative(p[var]);
                for (other, &(v2, t2)) in term.factors.iter().enumerate() {
                    if other != slot {
                        prod *= t2.eval(p[v2]);
                    }
                }
                acc += prod;
            }
        }
        acc
    }
}

/// A random k-form with analytic coefficient partials.
pub fn random_kform(dim: usize, degree: usize, rng: &mut SplitMix64) -> KForm {
    let count = multi_indices(dim, degree).len();
    let exprs: Vec<TrigExpr> = (0..count).map(|_| TrigExpr::random(dim, rng)).collect();
    let exprs_partials = exprs.clone();
    KForm::from_fn(dim, degree, move |p| {
        Ok(DVector::from_fn(exprs.len(), |i, _| exprs[i].eval(p)))
    })
    .with_partials(move |p| {
        Ok(DMatrix::from_fn(exprs_partials.len(), dim, |i, j| {
            exprs_partials[i].partial(p, j)
        }))
    })
}

/// A random vector field with analytic jacobian.
pub fn random_vector_field(dim: usize, rng: &mut SplitMix64) -> VectorField {
    let exprs: Vec<TrigExpr> = (0..dim).map(|_| TrigExpr::random(dim, rng)).collect();
    let exprs_jac = exprs.clone();
    VectorField::from_fn(dim, move |p| {
        Ok(DVector::from_fn(exprs.len(), |i, _| exprs[i].eval(p)))
    })
    .with_jacobian(move |p| {
        Ok(DMatrix::from_fn(dim, dim, |i, j| {
            exprs_jac[i].partial(p, j)
        }))
    })
}

/// A random scalar field with analytic gradient.
pub fn random_scalar_field(dim: usize, rng: &mut SplitMix64) -> ScalarField {
    let expr = TrigExpr::random(dim, rng);
    let expr_grad = expr.clone();
    ScalarField::from_fn(dim, move |p| Ok(expr.eval(p)))
        .with_partials(move |p| Ok(DVector::from_fn(dim, |j, _| expr_grad.partial(p, j))))
}

/// A random small-amplitude nonlinear diffeomorphism of the chart:
/// `x_i ↦ x_i + ε sin(x_{i+1})`, with explicit inverse by fixed-point
/// iteration seeded from the shifted point.
pub fn random_diffeo(dim: usize, rng: &mut SplitMix64) -> Diffeo {
    let eps: Vec<f64> = (0..dim).map(|_| rng.uniform(-0.2, 0.2)).collect();
    let eps_jac = eps.clone();
    let eps_inv = eps.clone();
    Diffeo::new(
        dim,
        move |p: &ChartPoint| {
            let mut coords: Vec<f64> = (0..dim).map(|i| p[i]).collect();
            for i in 0..dim {
                coords[i] = p[i] + eps[i] * p[(i + 1) % dim].sin();
            }
            Ok(ChartPoint::new(&coords))
        },
        move |p: &ChartPoint| {
            let mut j = DMatrix::identity(dim, dim);
            for i in 0..dim {
                j[(i, (i + 1) % dim)] += eps_jac[i] * p[(i + 1) % dim].cos();
            }
            Ok(j)
        },
    )
    .with_inverse(move |q: &ChartPoint| {
        // contraction mapping: |eps| < 0.5 makes the iteration converge
        let mut guess: Vec<f64> = (0..dim).map(|i| q[i]).collect();
        for _ in 0..100 {
            let prev = guess.clone();
            for i in 0..dim {
                guess[i] = q[i] - eps_inv[i] * prev[(i + 1) % dim].sin();
            }
        }
        Ok(ChartPoint::new(&guess))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_expr_partials_match_finite_differences() {
        let mut rng = SplitMix64::new(100);
        for _ in 0..20 {
            let expr = TrigExpr::random(4, &mut rng);
            let p = ChartPoint::new(&[0.3, -1.1, 2.2, 0.7]);
            for dir in 0..4 {
                let h = 1e-5;
                let fd =
                    (expr.eval(&p.shifted(dir, h)) - expr.eval(&p.shifted(dir, -h))) / (2.0 * h);
                assert!((expr.partial(&p, dir) - fd).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn random_diffeo_inverse_round_trips() {
        let mut rng = SplitMix64::new(200);
        let phi = random_diffeo(5, &mut rng);
        for _ in 0..20 {
            let p = thurston_point(&mut rng);
            let q = phi.apply(&p).unwrap();
            let back = phi.inverse_apply(&q).unwrap();
            assert!((back.coords() - p.coords()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn sphere_points_have_unit_norm() {
        let mut rng = SplitMix64::new(300);
        for _ in 0..100 {
            let p = sphere_point(&mut rng);
            assert!((p.coords().norm() - 1.0).abs() < 1e-12);
        }
    }
}
