//! The unit three-sphere in ambient ℝ⁴: Hopf field, Hopf circle action,
//! quaternion tangent frame, round metric and volume.
//!
//! Everything is expressed in ambient coordinates and restricted to the
//! sphere by evaluating on tangent vectors; the quaternion frame
//! `{i·p, j·p, k·p}` is a global orthonormal tangent frame at unit `p`.

use nalgebra::{DMatrix, DVector};

use crate::exterior::{Frame, KForm, MetricEval, VectorField};
use crate::wadsley::CircleAction;

/// The Hopf field `X(p) = i·p = (−x₂, x₁, −x₄, x₃)`.
pub fn hopf_field() -> VectorField {
    VectorField::from_fn(4, |p| Ok(DVector::from_vec(vec![-p[1], p[0], -p[3], p[2]])))
        .with_jacobian(|_| {
            Ok(DMatrix::from_row_slice(
                4,
                4,
                &[
                    0.0, -1.0, 0.0, 0.0, //
                    1.0, 0.0, 0.0, 0.0, //
                    0.0, 0.0, 0.0, -1.0, //
                    0.0, 0.0, 1.0, 0.0,
                ],
            ))
        })
}

fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            c, -s, 0.0, 0.0, //
            s, c, 0.0, 0.0, //
            0.0, 0.0, c, -s, //
            0.0, 0.0, s, c,
        ],
    )
}

/// The Hopf circle action: simultaneous rotation in the (1,2) and (3,4)
/// planes, whose generator is [`hopf_field`].
pub fn hopf_action() -> CircleAction {
    CircleAction::new(
        4,
        |theta, p| {
            let m = rotation(theta);
            Ok(crate::point::ChartPoint::from_vector(m * p.coords()))
        },
        |theta, _| Ok(rotation(theta)),
        hopf_field(),
    )
}

/// The quaternion tangent frame `{i·p, j·p, k·p}`, orthonormal at `|p| = 1`.
pub fn tangent_frame() -> Frame {
    Frame::from_fn(4, 3, |p| {
        Ok(vec![
            DVector::from_vec(vec![-p[1], p[0], -p[3], p[2]]),
            DVector::from_vec(vec![-p[2], p[3], p[0], -p[1]]),
            DVector::from_vec(vec![-p[3], -p[2], p[1], p[0]]),
        ])
    })
}

/// The round metric: restriction of the ambient Euclidean metric.
pub fn round_metric() -> MetricEval {
    MetricEval::euclidean(4)
}

/// The radial field `p ↦ p` (outward normal on the unit sphere).
pub fn radial_field() -> VectorField {
    VectorField::from_fn(4, |p| Ok(p.coords().clone()))
        .with_jacobian(|_| Ok(DMatrix::identity(4, 4)))
}

/// The round volume 3-form `ι_N (dx₁∧dx₂∧dx₃∧dx₄)` with `N` the outward
/// normal; on the quaternion frame it evaluates to ±1.
pub fn round_volume() -> KForm {
    KForm::basis(4, &[0, 1, 2, 3])
        .interior_product(&radial_field())
        .expect("degree 4 > 0")
}

/// The ambient dual 1-form of the Hopf field in the round metric:
/// `x₁dx₂ − x₂dx₁ + x₃dx₄ − x₄dx₃` (the standard contact form).
pub fn hopf_dual_form() -> KForm {
    KForm::from_fn(4, 1, |p| {
        Ok(DVector::from_vec(vec![-p[1], p[0], -p[3], p[2]]))
    })
    .with_partials(|_| {
        Ok(DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, -1.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, -1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        ))
    })
}

/// A fixed smooth symmetric perturbation of the round metric, scaled by
/// `amplitude`; positive definite for `amplitude ≤ 0.15`. Used as the
/// non-invariant starting metric of the averaging pipeline.
pub fn perturbed_round_metric(amplitude: f64) -> MetricEval {
    MetricEval::from_fn(4, move |p| {
        let mut g = DMatrix::identity(4, 4);
        let f1 = (3.0 * p[0] + p[2]).sin();
        let f2 = (2.0 * p[1] - p[3]).cos();
        let e1 = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.5, 0.0, 0.3, //
                0.5, -0.6, 0.4, 0.0, //
                0.0, 0.4, 0.8, -0.2, //
                0.3, 0.0, -0.2, 0.5,
            ],
        );
        let e2 = DMatrix::from_row_slice(
            4,
            4,
            &[
                -0.4, 0.2, 0.6, 0.0, //
                0.2, 0.9, 0.0, -0.5, //
                0.6, 0.0, -0.3, 0.1, //
                0.0, -0.5, 0.1, 0.7,
            ],
        );
        g += e1 * (amplitude * f1) + e2 * (amplitude * f2);
        Ok(g)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::DEFAULT_PD_EPSILON;
    use crate::rng::SplitMix64;
    use crate::sampling::sphere_point;

    #[test]
    fn quaternion_frame_is_orthonormal_and_tangent() {
        let frame = tangent_frame();
        let mut rng = SplitMix64::new(1);
        for _ in 0..50 {
            let p = sphere_point(&mut rng);
            let basis = frame.basis_at(&p).unwrap();
            for (i, vi) in basis.iter().enumerate() {
                assert!(vi.dot(p.coords()).abs() < 1e-14, "not tangent");
                for (j, vj) in basis.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((vi.dot(vj) - expected).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn hopf_action_generates_the_hopf_field() {
        let action = hopf_action();
        let mut rng = SplitMix64::new(2);
        let x = hopf_field();
        for _ in 0..20 {
            let p = sphere_point(&mut rng);
            // identity at θ = 0
            let p0 = action.act(0.0, &p).unwrap();
            assert!((p0.coords() - p.coords()).abs().max() < 1e-15);
            // additivity
            let a = action.act(0.4, &action.act(1.1, &p).unwrap()).unwrap();
            let b = action.act(1.5, &p).unwrap();
            assert!((a.coords() - b.coords()).abs().max() < 1e-12);
            // derivative at zero
            let h = 1e-6;
            let plus = action.act(h, &p).unwrap();
            let minus = action.act(-h, &p).unwrap();
            let fd = (plus.coords() - minus.coords()) / (2.0 * h);
            assert!((fd - x.eval(&p).unwrap()).abs().max() < 1e-9);
        }
    }

    #[test]
    fn round_volume_is_unit_on_the_frame() {
        let vol = round_volume();
        let frame = tangent_frame();
        let mut rng = SplitMix64::new(3);
        for _ in 0..20 {
            let p = sphere_point(&mut rng);
            let basis = frame.basis_at(&p).unwrap();
            let refs: Vec<&DVector<f64>> = basis.iter().collect();
            let v = vol.eval(&p, &refs).unwrap();
            assert!((v.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbed_metric_is_positive_definite_but_not_invariant() {
        let g = perturbed_round_metric(0.1);
        let mut rng = SplitMix64::new(4);
        for _ in 0..50 {
            let p = sphere_point(&mut rng);
            g.check_positive_definite(&p, DEFAULT_PD_EPSILON).unwrap();
        }
    }
}
