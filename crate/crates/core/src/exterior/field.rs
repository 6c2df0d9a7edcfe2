//! Vector and scalar fields over a chart.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::form::KForm;
use crate::point::ChartPoint;

pub type FieldFn = Arc<dyn Fn(&ChartPoint) -> Result<DVector<f64>> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&ChartPoint) -> Result<DMatrix<f64>> + Send + Sync>;

/// A vector field given by a component evaluator, with optional analytic
/// jacobian (`J[i][j] = ∂X^i/∂x_j`).
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    eval: FieldFn,
    jacobian: Option<JacobianFn>,
}

impl VectorField {
    pub fn from_fn<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&ChartPoint) -> Result<DVector<f64>> + Send + Sync + 'static,
    {
        VectorField {
            dim,
            eval: Arc::new(eval),
            jacobian: None,
        }
    }

    pub fn with_jacobian<F>(mut self, jacobian: F) -> Self
    where
        F: Fn(&ChartPoint) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn constant(dim: usize, components: &[f64]) -> Self {
        assert_eq!(components.len(), dim);
        let v = DVector::from_column_slice(components);
        VectorField::from_fn(dim, move |_| Ok(v.clone()))
            .with_jacobian(move |_| Ok(DMatrix::zeros(dim, dim)))
    }

    /// The coordinate field `∂/∂x_axis`.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[axis] = 1.0;
        VectorField::constant(dim, &c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<DVector<f64>> {
        if p.dim() != self.dim {
            return Err(Error::contract(format!(
                "point dimension {} does not match field dimension {}",
                p.dim(),
                self.dim
            )));
        }
        let v = (self.eval)(p)?;
        if v.len() != self.dim {
            return Err(Error::contract(
                "field evaluator returned wrong dimension".to_string(),
            ));
        }
        Ok(v)
    }

    /// Jacobian at `p`: analytic when present, otherwise 4th-order central
    /// differences with step `h`.
    pub fn jacobian_at(&self, p: &ChartPoint, h: f64) -> Result<DMatrix<f64>> {
        if let Some(jac) = &self.jacobian {
            return jac(p);
        }
        if h <= 0.0 {
            return Err(Error::contract(
                "finite-difference step must be positive".to_string(),
            ));
        }
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let m2 = self.eval(&p.shifted(j, -2.0 * h))?;
            let m1 = self.eval(&p.shifted(j, -h))?;
            let p1 = self.eval(&p.shifted(j, h))?;
            let p2 = self.eval(&p.shifted(j, 2.0 * h))?;
            for i in 0..self.dim {
                out[(i, j)] = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h);
            }
        }
        Ok(out)
    }

    /// Pointwise scale by a constant.
    pub fn scale(&self, factor: f64) -> VectorField {
        let base = self.clone();
        let mut out = VectorField::from_fn(self.dim, move |p| Ok(base.eval(p)? * factor));
        if let Some(jac) = self.jacobian.clone() {
            out = out.with_jacobian(move |p| Ok(jac(p)? * factor));
        }
        out
    }
}

pub type ScalarFn = Arc<dyn Fn(&ChartPoint) -> Result<f64> + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&ChartPoint) -> Result<DVector<f64>> + Send + Sync>;

/// A scalar function on the chart with optional analytic gradient.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: ScalarFn,
    partials: Option<GradientFn>,
}

impl ScalarField {
    pub fn from_fn<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&ChartPoint) -> Result<f64> + Send + Sync + 'static,
    {
        ScalarField {
            dim,
            eval: Arc::new(eval),
            partials: None,
        }
    }

    pub fn with_partials<F>(mut self, partials: F) -> Self
    where
        F: Fn(&ChartPoint) -> Result<DVector<f64>> + Send + Sync + 'static,
    {
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        ScalarField::from_fn(dim, move |_| Ok(value))
            .with_partials(move |_| Ok(DVector::zeros(dim)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<f64> {
        (self.eval)(p)
    }

    pub fn has_partials(&self) -> bool {
        self.partials.is_some()
    }

    /// Gradient at `p`, analytic or by 4th-order central differences.
    pub fn gradient_at(&self, p: &ChartPoint, h: f64) -> Result<DVector<f64>> {
        if let Some(partials) = &self.partials {
            return partials(p);
        }
        let mut out = DVector::zeros(self.dim);
        for j in 0..self.dim {
            let m2 = self.eval(&p.shifted(j, -2.0 * h))?;
            let m1 = self.eval(&p.shifted(j, -h))?;
            let p1 = self.eval(&p.shifted(j, h))?;
            let p2 = self.eval(&p.shifted(j, 2.0 * h))?;
            out[j] = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        }
        Ok(out)
    }

    /// The differential as a 1-form (analytic coefficients when the gradient
    /// is analytic, finite differences with step `h` otherwise).
    pub fn differential(&self, h: f64) -> KForm {
        let me = self.clone();
        KForm::from_fn(self.dim, 1, move |p| me.gradient_at(p, h))
    }

    /// The field as a 0-form.
    pub fn as_zero_form(&self) -> KForm {
        let me = self.clone();
        let mut out = KForm::from_fn(self.dim, 0, move |p| {
            Ok(DVector::from_vec(vec![me.eval(p)?]))
        });
        if self.has_partials() {
            let me = self.clone();
            out = out.with_partials(move |p| {
                let g = me.gradient_at(p, 0.0)?;
                Ok(DMatrix::from_fn(1, me.dim, |_, j| g[j]))
            });
        }
        out
    }
}
