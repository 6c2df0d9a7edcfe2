//! Lie derivatives by finite-difference flow transport.
//!
//! Independent route for checking the Cartan-formula implementation: the Lie
//! derivative of a form is the derivative at time zero of the pulled-back
//! form along the flow, realized here by integrating the flow and its
//! variational equation over a short time `±eps` and central-differencing.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::exterior::{KForm, VectorField};
use crate::point::ChartPoint;

/// Flows `(p, frame)` for time `t` under `field`, transporting the frame by
/// the variational equation `V̇ = J_X(φ_τ) V` with fixed-step RK4.
fn transport(
    field: &VectorField,
    p: &ChartPoint,
    frame: &DMatrix<f64>,
    t: f64,
    steps: usize,
) -> Result<(ChartPoint, DMatrix<f64>)> {
    let h = t / steps as f64;
    let mut y = p.coords().clone();
    let mut v = frame.clone();
    let rhs = |y: &DVector<f64>, v: &DMatrix<f64>| -> Result<(DVector<f64>, DMatrix<f64>)> {
        let point = ChartPoint::from_vector(y.clone());
        let dy = field.eval(&point)?;
        let jac = field.jacobian_at(&point, crate::exterior::DEFAULT_FD_STEP)?;
        Ok((dy, jac * v))
    };
    for _ in 0..steps {
        let (k1y, k1v) = rhs(&y, &v)?;
        let (k2y, k2v) = rhs(&(&y + &k1y * (h / 2.0)), &(&v + &k1v * (h / 2.0)))?;
        let (k3y, k3v) = rhs(&(&y + &k2y * (h / 2.0)), &(&v + &k2v * (h / 2.0)))?;
        let (k4y, k4v) = rhs(&(&y + &k3y * h), &(&v + &k3v * h))?;
        y += (k1y + k2y * 2.0 + k3y * 2.0 + k4y) * (h / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
    }
    Ok((ChartPoint::from_vector(y), v))
}

/// `(L_X ω)(v₁..v_k)(p)` through flow transport:
/// central difference of `ω_{φ_s(p)}(Dφ_s v₁, ..., Dφ_s v_k)` at `s = ±eps`.
pub fn flow_transport_lie_derivative(
    field: &VectorField,
    omega: &KForm,
    p: &ChartPoint,
    vectors: &[&DVector<f64>],
    eps: f64,
    steps: usize,
) -> Result<f64> {
    let dim = field.dim();
    let mut frame = DMatrix::zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        frame.set_column(j, v);
    }
    let backward_field = field.scale(-1.0);
    let (p_plus, v_plus) = transport(field, p, &frame, eps, steps)?;
    let (p_minus, v_minus) = transport(&backward_field, p, &frame, eps, steps)?;
    let cols_plus: Vec<DVector<f64>> = (0..vectors.len())
        .map(|j| v_plus.column(j).into_owned())
        .collect();
    let cols_minus: Vec<DVector<f64>> = (0..vectors.len())
        .map(|j| v_minus.column(j).into_owned())
        .collect();
    let f_plus = omega.eval(&p_plus, &cols_plus.iter().collect::<Vec<_>>())?;
    let f_minus = omega.eval(&p_minus, &cols_minus.iter().collect::<Vec<_>>())?;
    Ok((f_plus - f_minus) / (2.0 * eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::lie_derivative_form;
    use crate::rng::SplitMix64;
    use crate::sampling;

    #[test]
    fn cartan_formula_agrees_with_flow_transport() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..10 {
            let field = sampling::random_vector_field(4, &mut rng);
            let omega = sampling::random_kform(4, 2, &mut rng);
            let p = ChartPoint::new(&[
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
            ]);
            let v1 = DVector::from_vec(vec![
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
            ]);
            let v2 = DVector::from_vec(vec![
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
            ]);
            let cartan = lie_derivative_form(&field, &omega, crate::exterior::DEFAULT_FD_STEP)
                .unwrap()
                .eval(&p, &[&v1, &v2])
                .unwrap();
            let transported =
                flow_transport_lie_derivative(&field, &omega, &p, &[&v1, &v2], 1e-3, 4).unwrap();
            assert!(
                (cartan - transported).abs() < 1e-5,
                "cartan {cartan} vs transport {transported}"
            );
        }
    }
}
