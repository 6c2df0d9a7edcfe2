//! The Sullivan–Thurston flow on `M = H/Λ × S¹ × S¹`.
//!
//! `H` is the Heisenberg group with chart coordinates `(x, y, z)`; the
//! integer lattice `Λ` acts on the left by
//! `(x, y, z) ↦ (x + a, y + b, z + a·y + c)`, and two extra circle
//! coordinates `t, u` (both of period 2π) complete the 5-dimensional chart
//! `(x, y, z, t, u)`.
//!
//! The module constructs the frame fields `V₁, V₂`, the flow field
//! `X = sin(2u)·V₁ + 2sin²u·∂t − cos²u·∂z` (which extends as `−∂z` along
//! `u ≡ 0 mod π`), its unit-period reparametrization `W = X / (2 sin²u)`,
//! the invariant 1-form `β = ½dt − dz + x dy`, the volume form
//! `μ = dx∧dy∧dz∧dt∧du`, the lattice-invariant frame metric, and residual
//! checks that all of these descend to the quotient.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::{Diffeo, Frame, KForm, MetricEval, VectorField};
use crate::point::ChartPoint;

use std::f64::consts::PI;

/// Chart dimension.
pub const DIM: usize = 5;

/// Default half-width of the excluded band around `u ≡ 0 mod π` where the
/// reparametrized field `W` blows up.
pub const DEFAULT_BAD_BAND: f64 = 1e-3;

/// Circle periods and the fundamental-domain reduction order.
///
/// The Heisenberg coordinates reduce in the order `b` (on `y`), then `a`
/// (on `x`, which shifts `z` by `a·y`), then `c` (on `z`); the order is part
/// of the convention because the `c` correction depends on the already
/// reduced `y`. Both circle factors use period 2π.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuotientConvention {
    pub t_period: f64,
    pub u_period: f64,
}

impl Default for QuotientConvention {
    fn default() -> Self {
        QuotientConvention {
            t_period: 2.0 * PI,
            u_period: 2.0 * PI,
        }
    }
}

/// An element `(a, b, c)` of the integer Heisenberg lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeElement {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl LatticeElement {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        LatticeElement { a, b, c }
    }

    pub fn identity() -> Self {
        LatticeElement::new(0, 0, 0)
    }

    /// Group product (`self` applied after `first`): matrix multiplication
    /// of upper-triangular unipotent matrices gives
    /// `(a₂,b₂,c₂)·(a₁,b₁,c₁) = (a₁+a₂, b₁+b₂, c₁+c₂+a₂·b₁)`.
    pub fn compose(self, first: LatticeElement) -> LatticeElement {
        LatticeElement {
            a: first.a + self.a,
            b: first.b + self.b,
            c: first.c + self.c + self.a * first.b,
        }
    }

    pub fn inverse(self) -> LatticeElement {
        LatticeElement {
            a: -self.a,
            b: -self.b,
            c: self.a * self.b - self.c,
        }
    }
}

/// Left lattice action on the chart: `(x+a, y+b, z+a·y+c, t, u)`.
pub fn lattice_act(gamma: LatticeElement, p: &ChartPoint) -> ChartPoint {
    let (a, b, c) = (gamma.a as f64, gamma.b as f64, gamma.c as f64);
    ChartPoint::new(&[p[0] + a, p[1] + b, p[2] + a * p[1] + c, p[3], p[4]])
}

/// The lattice action as a diffeomorphism of the chart, with jacobian and
/// inverse.
pub fn lattice_diffeo(gamma: LatticeElement) -> Diffeo {
    let inv = gamma.inverse();
    let a = gamma.a as f64;
    Diffeo::new(
        DIM,
        move |p: &ChartPoint| Ok(lattice_act(gamma, p)),
        move |_| {
            let mut j = DMatrix::identity(DIM, DIM);
            j[(2, 1)] = a;
            Ok(j)
        },
    )
    .with_inverse(move |p: &ChartPoint| Ok(lattice_act(inv, p)))
}

/// Canonical form of `canonicalize`: the representative, the lattice element
/// carrying the input onto it, and the torus wrap counts on `(t, u)`.
#[derive(Clone, Debug)]
pub struct Canonicalized {
    pub point: ChartPoint,
    pub gamma: LatticeElement,
    pub wraps: (i64, i64),
}

/// Reduces a cover point to the fundamental-domain representative with
/// `y ∈ [0,1)`, then `x ∈ [0,1)`, then `z ∈ [0,1)`, and `t, u` reduced
/// modulo their periods. The returned lattice element and wrap counts carry
/// the input onto the representative:
/// `point = lattice_act(γ, p) + (0, 0, 0, wraps.0·t_period, wraps.1·u_period)`.
pub fn canonicalize(p: &ChartPoint, convention: &QuotientConvention) -> Canonicalized {
    let b = -(p[1].floor() as i64);
    let y = p[1] + b as f64;
    let a = -(p[0].floor() as i64);
    let x = p[0] + a as f64;
    let z_mid = p[2] + a as f64 * y;
    let c = -(z_mid.floor() as i64);
    let z = z_mid + c as f64;
    let (t, wt) = reduce_mod(p[3], convention.t_period);
    let (u, wu) = reduce_mod(p[4], convention.u_period);
    // the three elementary shifts compose to (a, b, a*b + c)
    let gamma = LatticeElement::new(a, b, a * b + c);
    Canonicalized {
        point: ChartPoint::new(&[x, y, z, t, u]),
        gamma,
        wraps: (wt, wu),
    }
}

/// Reduces into [0, period), returning the representative and the additive
/// wrap count `w` with `reduced = value + w * period`.
fn reduce_mod(value: f64, period: f64) -> (f64, i64) {
    let k = (value / period).floor();
    let mut reduced = value - k * period;
    let mut w = -(k as i64);
    // guard the half-open interval against rounding at either edge
    if reduced >= period {
        reduced -= period;
        w -= 1;
    }
    if reduced < 0.0 {
        reduced += period;
        w += 1;
    }
    (reduced, w)
}

/// The lattice-invariant metric making the global frame
/// `{∂x, ∂y + x∂z, ∂z, ∂t, ∂u}` orthonormal:
/// `g = dx² + dy² + (dz − x dy)² + dt² + du²`.
pub fn frame_metric() -> MetricEval {
    MetricEval::from_fn(DIM, |p| {
        let x = p[0];
        let mut g = DMatrix::identity(DIM, DIM);
        g[(1, 1)] = 1.0 + x * x;
        g[(1, 2)] = -x;
        g[(2, 1)] = -x;
        Ok(g)
    })
    .with_partials(|p| {
        let x = p[0];
        let mut dx = DMatrix::zeros(DIM, DIM);
        dx[(1, 1)] = 2.0 * x;
        dx[(1, 2)] = -1.0;
        dx[(2, 1)] = -1.0;
        Ok(vec![
            dx,
            DMatrix::zeros(DIM, DIM),
            DMatrix::zeros(DIM, DIM),
            DMatrix::zeros(DIM, DIM),
            DMatrix::zeros(DIM, DIM),
        ])
    })
}

/// Squared frame-metric norm of the difference vector `q − p`, with the
/// shear term evaluated at the midpoint so the distance is symmetric.
fn frame_dist_sq(p: &ChartPoint, q: &ChartPoint, dt_extra: f64, du_extra: f64) -> f64 {
    let dx = q[0] - p[0];
    let dy = q[1] - p[1];
    let dz = q[2] - p[2];
    let dt = q[3] - p[3] + dt_extra;
    let du = q[4] - p[4] + du_extra;
    let x_mid = 0.5 * (p[0] + q[0]);
    let sheared = dz - x_mid * dy;
    dx * dx + dy * dy + sheared * sheared + dt * dt + du * du
}

fn directed_min_sq(pc: &ChartPoint, qc: &ChartPoint, convention: &QuotientConvention) -> f64 {
    let mut best = f64::INFINITY;
    for a in -1..=1 {
        for b in -1..=1 {
            for c in -1..=1 {
                let moved = lattice_act(LatticeElement::new(a, b, c), qc);
                for wt in -1..=1 {
                    for wu in -1..=1 {
                        let d2 = frame_dist_sq(
                            pc,
                            &moved,
                            wt as f64 * convention.t_period,
                            wu as f64 * convention.u_period,
                        );
                        if d2 < best {
                            best = d2;
                        }
                    }
                }
            }
        }
    }
    best
}

/// Quotient distance: both points are canonicalized and the frame-metric
/// separation is minimized over the lattice elements with
/// `|a|,|b|,|c| ≤ 1` and torus wraps in `{-1, 0, 1}`, in both directions
/// (which makes the result exactly symmetric). Accurate for small
/// separations, which is all that orbit-closure detection needs.
pub fn quotient_distance(p: &ChartPoint, q: &ChartPoint) -> f64 {
    let convention = QuotientConvention::default();
    let pc = canonicalize(p, &convention).point;
    let qc = canonicalize(q, &convention).point;
    directed_min_sq(&pc, &qc, &convention)
        .min(directed_min_sq(&qc, &pc, &convention))
        .sqrt()
}

/// The frame field `V₁ = cos t ∂x + sin t (∂y + x ∂z)`.
pub fn field_v1() -> VectorField {
    VectorField::from_fn(DIM, |p| {
        let (x, t) = (p[0], p[3]);
        Ok(DVector::from_vec(vec![
            t.cos(),
            t.sin(),
            x * t.sin(),
            0.0,
            0.0,
        ]))
    })
    .with_jacobian(|p| {
        let (x, t) = (p[0], p[3]);
        let mut j = DMatrix::zeros(DIM, DIM);
        j[(0, 3)] = -t.sin();
        j[(1, 3)] = t.cos();
        j[(2, 0)] = t.sin();
        j[(2, 3)] = x * t.cos();
        Ok(j)
    })
}

/// The frame field `V₂ = −sin t ∂x + cos t (∂y + x ∂z)`.
pub fn field_v2() -> VectorField {
    VectorField::from_fn(DIM, |p| {
        let (x, t) = (p[0], p[3]);
        Ok(DVector::from_vec(vec![
            -t.sin(),
            t.cos(),
            x * t.cos(),
            0.0,
            0.0,
        ]))
    })
    .with_jacobian(|p| {
        let (x, t) = (p[0], p[3]);
        let mut j = DMatrix::zeros(DIM, DIM);
        j[(0, 3)] = -t.cos();
        j[(1, 3)] = -t.sin();
        j[(2, 0)] = t.cos();
        j[(2, 3)] = -x * t.sin();
        Ok(j)
    })
}

/// The flow field
/// `X = sin(2u) cos t ∂x + sin(2u) sin t (∂y + x∂z) + 2sin²u ∂t − cos²u ∂z`.
///
/// Its `u`-component vanishes identically, so `u` is conserved along
/// orbits; along `u ≡ 0 mod π` the field reduces to `−∂z`.
pub fn field_x() -> VectorField {
    VectorField::from_fn(DIM, |p| {
        let (x, t, u) = (p[0], p[3], p[4]);
        let s2u = (2.0 * u).sin();
        let sin_u = u.sin();
        let cos_u = u.cos();
        Ok(DVector::from_vec(vec![
            s2u * t.cos(),
            s2u * t.sin(),
            x * s2u * t.sin() - cos_u * cos_u,
            2.0 * sin_u * sin_u,
            0.0,
        ]))
    })
    .with_jacobian(|p| {
        let (x, t, u) = (p[0], p[3], p[4]);
        let s2u = (2.0 * u).sin();
        let c2u = (2.0 * u).cos();
        let mut j = DMatrix::zeros(DIM, DIM);
        j[(0, 3)] = -s2u * t.sin();
        j[(0, 4)] = 2.0 * c2u * t.cos();
        j[(1, 3)] = s2u * t.cos();
        j[(1, 4)] = 2.0 * c2u * t.sin();
        j[(2, 0)] = s2u * t.sin();
        j[(2, 3)] = x * s2u * t.cos();
        // ∂z-component: x sin2u sin t − cos²u
        j[(2, 4)] = 2.0 * x * c2u * t.sin() + s2u;
        // ∂t-component: 2 sin²u = 1 − cos 2u
        j[(3, 4)] = 2.0 * s2u;
        Ok(j)
    })
}

/// Distance from `u` to the bad set `u ≡ 0 mod π`.
pub fn distance_to_bad_set(u: f64) -> f64 {
    let r = u.rem_euclid(PI);
    r.min(PI - r)
}

/// The reparametrized field `W = X / (2 sin²u)`, whose orbits all close with
/// period 2π. Evaluation inside the band of half-width `eps_u` around
/// `u ≡ 0 mod π` is a domain error.
pub fn field_w(eps_u: f64) -> VectorField {
    let x_field = field_x();
    VectorField::from_fn(DIM, move |p| {
        let u = p[4];
        if distance_to_bad_set(u) <= eps_u {
            return Err(Error::domain(format!(
                "W is undefined within {eps_u:.1e} of the bad set u ≡ 0 mod π (u = {u:.6})"
            )));
        }
        let sin_u = u.sin();
        Ok(x_field.eval(p)? / (2.0 * sin_u * sin_u))
    })
}

/// The invariant 1-form `β = ½ dt − dz + x dy`, with analytic coefficient
/// partials.
pub fn form_beta() -> KForm {
    KForm::from_fn(DIM, 1, |p| {
        Ok(DVector::from_vec(vec![0.0, p[0], -1.0, 0.5, 0.0]))
    })
    .with_partials(|_| {
        let mut m = DMatrix::zeros(DIM, DIM);
        m[(1, 0)] = 1.0; // ∂(x)/∂x on the dy coefficient
        Ok(m)
    })
}

/// The volume form `μ = dx∧dy∧dz∧dt∧du`.
pub fn form_mu() -> KForm {
    KForm::constant(DIM, DIM, vec![1.0])
}

/// The coordinate frame of the 5-chart.
pub fn chart_frame() -> Frame {
    Frame::coordinate(DIM)
}

/// Squared frame-metric speed of `X` as a function of `u`:
/// `sin²(2u) + 4sin⁴u + cos⁴u`.
pub fn speed_sq(u: f64) -> f64 {
    let s2u = (2.0 * u).sin();
    let sin_u = u.sin();
    let cos_u = u.cos();
    s2u * s2u + 4.0 * sin_u.powi(4) + cos_u.powi(4)
}

/// Result of the descent checks for one lattice element.
#[derive(Clone, Debug)]
pub struct DescentReport {
    pub gamma: LatticeElement,
    pub samples: usize,
    /// max |(φ_γ)_* X − X ∘ φ_γ| (Euclidean component norm)
    pub field_residual: f64,
    /// max coefficient residual of φ_γ* β − β
    pub beta_residual: f64,
    /// max coefficient residual of φ_γ* μ − μ
    pub mu_residual: f64,
}

impl DescentReport {
    pub fn max_residual(&self) -> f64 {
        self.field_residual
            .max(self.beta_residual)
            .max(self.mu_residual)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() < tol
    }
}

/// Verifies that a field and the forms `β, μ` descend under `γ`, sampling
/// `samples` seeded points of the fundamental cell. `field` is usually
/// [`field_x`]; a deliberately non-invariant field makes a negative control.
pub fn verify_descent(
    gamma: LatticeElement,
    field: &VectorField,
    samples: usize,
    rng: &mut crate::rng::SplitMix64,
) -> Result<DescentReport> {
    if samples == 0 {
        return Err(Error::contract(
            "descent check needs samples > 0".to_string(),
        ));
    }
    let phi = lattice_diffeo(gamma);
    let pushed = phi.pushforward(field)?;
    let beta = form_beta();
    let mu = form_mu();
    let beta_pulled = phi.pullback(&beta)?;
    let mu_pulled = phi.pullback(&mu)?;

    let mut field_residual: f64 = 0.0;
    let mut beta_residual: f64 = 0.0;
    let mut mu_residual: f64 = 0.0;
    for _ in 0..samples {
        let p = crate::sampling::thurston_point(rng);
        let image = phi.apply(&p)?;
        let diff = pushed.eval(&image)? - field.eval(&image)?;
        field_residual = field_residual.max(diff.abs().max());
        let db = beta_pulled.coeffs_at(&p)? - beta.coeffs_at(&p)?;
        beta_residual = beta_residual.max(db.abs().max());
        let dm = mu_pulled.coeffs_at(&p)? - mu.coeffs_at(&p)?;
        mu_residual = mu_residual.max(dm.abs().max());
    }
    Ok(DescentReport {
        gamma,
        samples,
        field_residual,
        beta_residual,
        mu_residual,
    })
}
