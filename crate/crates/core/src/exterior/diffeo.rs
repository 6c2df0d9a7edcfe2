//! Diffeomorphisms of a chart with pullback and pushforward transforms.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::field::VectorField;
use crate::exterior::form::KForm;
use crate::multi_index::multi_indices;
use crate::point::ChartPoint;

pub type MapFn = Arc<dyn Fn(&ChartPoint) -> Result<ChartPoint> + Send + Sync>;
pub type MapJacobianFn = Arc<dyn Fn(&ChartPoint) -> Result<DMatrix<f64>> + Send + Sync>;

/// Default lower bound on |det Dφ| below which the map is treated as
/// singular at the evaluated point.
pub const DEFAULT_JAC_EPSILON: f64 = 1e-12;

/// A diffeomorphism given by its map and jacobian, with an optional inverse
/// map (required for pushing vector fields forward).
#[derive(Clone)]
pub struct Diffeo {
    dim: usize,
    map: MapFn,
    jacobian: MapJacobianFn,
    inverse: Option<MapFn>,
    jac_epsilon: f64,
}

impl Diffeo {
    pub fn new<M, J>(dim: usize, map: M, jacobian: J) -> Self
    where
        M: Fn(&ChartPoint) -> Result<ChartPoint> + Send + Sync + 'static,
        J: Fn(&ChartPoint) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    {
        Diffeo {
            dim,
            map: Arc::new(map),
            jacobian: Arc::new(jacobian),
            inverse: None,
            jac_epsilon: DEFAULT_JAC_EPSILON,
        }
    }

    pub fn with_inverse<I>(mut self, inverse: I) -> Self
    where
        I: Fn(&ChartPoint) -> Result<ChartPoint> + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn with_jac_epsilon(mut self, eps: f64) -> Self {
        self.jac_epsilon = eps;
        self
    }

    pub fn identity(dim: usize) -> Self {
        Diffeo::new(
            dim,
            |p: &ChartPoint| Ok(p.clone()),
            move |_| Ok(DMatrix::identity(dim, dim)),
        )
        .with_inverse(|p: &ChartPoint| Ok(p.clone()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, p: &ChartPoint) -> Result<ChartPoint> {
        (self.map)(p)
    }

    pub fn inverse_apply(&self, p: &ChartPoint) -> Result<ChartPoint> {
        match &self.inverse {
            Some(inv) => inv(p),
            None => Err(Error::unsupported(
                "diffeomorphism has no inverse map".to_string(),
            )),
        }
    }

    /// Jacobian at `p`, checked against the nonsingularity bound.
    pub fn jacobian_at(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        let j = (self.jacobian)(p)?;
        let det = j.clone().determinant();
        if det.abs() <= self.jac_epsilon {
            return Err(Error::contract(format!(
                "jacobian determinant {det:.3e} within epsilon {:.3e} of zero",
                self.jac_epsilon
            )));
        }
        Ok(j)
    }

    /// Pullback of a form: `(φ*ω)_I(p) = Σ_J ω_J(φ(p)) det(Dφ(p)[J, I])`.
    pub fn pullback(&self, omega: &KForm) -> Result<KForm> {
        if omega.dim() != self.dim {
            return Err(Error::contract(
                "pullback of a form on a different chart".to_string(),
            ));
        }
        let phi = self.clone();
        let omega = omega.clone();
        let dim = self.dim;
        let degree = omega.degree();
        let indices = multi_indices(dim, degree);
        Ok(KForm::from_fn(dim, degree, move |p| {
            let image = phi.apply(p)?;
            let jac = phi.jacobian_at(p)?;
            let source = omega.coeffs_at(&image)?;
            let mut out = DVector::zeros(indices.len());
            if degree == 0 {
                out[0] = source[0];
                return Ok(out);
            }
            let mut minor = DMatrix::zeros(degree, degree);
            for (slot, i_idx) in indices.iter().enumerate() {
                let mut acc = 0.0;
                for (rank, j_idx) in indices.iter().enumerate() {
                    let c = source[rank];
                    if c == 0.0 {
                        continue;
                    }
                    for (r, &row) in j_idx.iter().enumerate() {
                        for (s, &col) in i_idx.iter().enumerate() {
                            minor[(r, s)] = jac[(row, col)];
                        }
                    }
                    acc += c * minor.clone().determinant();
                }
                out[slot] = acc;
            }
            Ok(out)
        }))
    }

    /// Pushforward of a vector field; requires the inverse map.
    pub fn pushforward(&self, field: &VectorField) -> Result<VectorField> {
        if field.dim() != self.dim {
            return Err(Error::contract(
                "pushforward of a field on a different chart".to_string(),
            ));
        }
        if self.inverse.is_none() {
            return Err(Error::unsupported(
                "pushforward requires the inverse map".to_string(),
            ));
        }
        let phi = self.clone();
        let field = field.clone();
        Ok(VectorField::from_fn(self.dim, move |q| {
            let p = phi.inverse_apply(q)?;
            let jac = phi.jacobian_at(&p)?;
            Ok(jac * field.eval(&p)?)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shear() -> Diffeo {
        // (x, y) -> (x + 2y, y), linear with unit determinant
        Diffeo::new(
            2,
            |p: &ChartPoint| Ok(ChartPoint::new(&[p[0] + 2.0 * p[1], p[1]])),
            |_| Ok(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])),
        )
        .with_inverse(|p: &ChartPoint| Ok(ChartPoint::new(&[p[0] - 2.0 * p[1], p[1]])))
    }

    #[test]
    fn identity_pullback_is_identity() {
        let omega = KForm::from_fn(2, 1, |p| Ok(DVector::from_vec(vec![p[0], p[1] * p[0]])));
        let back = Diffeo::identity(2).pullback(&omega).unwrap();
        let p = ChartPoint::new(&[0.7, -0.3]);
        assert_eq!(back.coeffs_at(&p).unwrap(), omega.coeffs_at(&p).unwrap());
    }

    #[test]
    fn shear_pulls_back_dx() {
        // φ*(dx') = dx + 2 dy
        let dx = KForm::basis(2, &[0]);
        let pulled = shear().pullback(&dx).unwrap();
        let c = pulled.coeffs_at(&ChartPoint::new(&[0.4, 1.1])).unwrap();
        assert_eq!(c[0], 1.0);
        assert_eq!(c[1], 2.0);
    }

    #[test]
    fn pushforward_needs_inverse() {
        let no_inverse = Diffeo::new(
            2,
            |p: &ChartPoint| Ok(p.clone()),
            |_| Ok(DMatrix::identity(2, 2)),
        );
        let x = VectorField::constant(2, &[1.0, 0.0]);
        assert!(matches!(
            no_inverse.pushforward(&x),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn pushforward_transforms_by_the_jacobian() {
        // shear_* (∂/∂y) = 2 ∂/∂x' + ∂/∂y'
        let y_field = VectorField::constant(2, &[0.0, 1.0]);
        let pushed = shear().pushforward(&y_field).unwrap();
        let v = pushed.eval(&ChartPoint::new(&[3.0, -1.0])).unwrap();
        assert_eq!(v[0], 2.0);
        assert_eq!(v[1], 1.0);
    }

    #[test]
    fn singular_jacobian_is_rejected() {
        let collapse = Diffeo::new(
            2,
            |p: &ChartPoint| Ok(ChartPoint::new(&[p[0], 0.0])),
            |_| Ok(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])),
        );
        assert!(matches!(
            collapse.jacobian_at(&ChartPoint::new(&[0.0, 0.0])),
            Err(Error::Contract(_))
        ));
    }
}
