//! Pointwise Riemannian metrics and metric Lie derivatives.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::field::VectorField;
use crate::point::ChartPoint;

pub type MetricFn = Arc<dyn Fn(&ChartPoint) -> Result<DMatrix<f64>> + Send + Sync>;
pub type MetricPartialsFn = Arc<dyn Fn(&ChartPoint) -> Result<Vec<DMatrix<f64>>> + Send + Sync>;

/// Default lower bound on the smallest eigenvalue when checking positive
/// definiteness.
pub const DEFAULT_PD_EPSILON: f64 = 1e-10;

/// A Riemannian metric given by a symmetric matrix evaluator, with optional
/// analytic partials `∂g/∂x_r`.
#[derive(Clone)]
pub struct MetricEval {
    dim: usize,
    eval: MetricFn,
    partials: Option<MetricPartialsFn>,
}

impl MetricEval {
    pub fn from_fn<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&ChartPoint) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    {
        MetricEval {
            dim,
            eval: Arc::new(eval),
            partials: None,
        }
    }

    pub fn with_partials<F>(mut self, partials: F) -> Self
    where
        F: Fn(&ChartPoint) -> Result<Vec<DMatrix<f64>>> + Send + Sync + 'static,
    {
        self.partials = Some(Arc::new(partials));
        self
    }

    /// The flat metric δ_ij.
    pub fn euclidean(dim: usize) -> Self {
        MetricEval::from_fn(dim, move |_| Ok(DMatrix::identity(dim, dim)))
            .with_partials(move |_| Ok(vec![DMatrix::zeros(dim, dim); dim]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        let g = (self.eval)(p)?;
        if g.nrows() != self.dim || g.ncols() != self.dim {
            return Err(Error::contract(
                "metric evaluator returned wrong shape".to_string(),
            ));
        }
        Ok(g)
    }

    pub fn inner(&self, p: &ChartPoint, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        let g = self.eval(p)?;
        Ok((v.transpose() * g * w)[(0, 0)])
    }

    pub fn norm(&self, p: &ChartPoint, v: &DVector<f64>) -> Result<f64> {
        Ok(self.inner(p, v, v)?.max(0.0).sqrt())
    }

    /// Partials `∂g/∂x_r`, analytic or by 4th-order central differences.
    pub fn partials_at(&self, p: &ChartPoint, h: f64) -> Result<Vec<DMatrix<f64>>> {
        if let Some(partials) = &self.partials {
            return partials(p);
        }
        let mut out = Vec::with_capacity(self.dim);
        for r in 0..self.dim {
            let m2 = self.eval(&p.shifted(r, -2.0 * h))?;
            let m1 = self.eval(&p.shifted(r, -h))?;
            let p1 = self.eval(&p.shifted(r, h))?;
            let p2 = self.eval(&p.shifted(r, 2.0 * h))?;
            out.push((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h));
        }
        Ok(out)
    }

    /// Fails unless the metric is symmetric and has all eigenvalues above
    /// `eps_pd` at `p`.
    pub fn check_positive_definite(&self, p: &ChartPoint, eps_pd: f64) -> Result<()> {
        let g = self.eval(p)?;
        let asym = (&g - g.transpose()).abs().max();
        if asym > 1e-9 {
            return Err(Error::NotPositiveDefinite(format!(
                "matrix is not symmetric (asymmetry {asym:.3e})"
            )));
        }
        let sym = nalgebra::SymmetricEigen::new(g);
        let min = sym.eigenvalues.min();
        if min <= eps_pd {
            return Err(Error::NotPositiveDefinite(format!(
                "smallest eigenvalue {min:.3e} <= {eps_pd:.3e}"
            )));
        }
        Ok(())
    }
}

/// Metric Lie derivative along `X` at `p`:
/// `(L_X g)_ij = Σ_k X^k ∂_k g_ij + g_kj ∂_i X^k + g_ik ∂_j X^k`
/// (the coordinate form of `X(g(Y,Z)) - g([X,Y],Z) - g(Y,[X,Z])` on
/// coordinate fields, with brackets expressed through the jacobian).
pub fn lie_derivative_metric(
    field: &VectorField,
    metric: &MetricEval,
    p: &ChartPoint,
    h: f64,
) -> Result<DMatrix<f64>> {
    if field.dim() != metric.dim() {
        return Err(Error::contract(
            "field and metric live on different charts".to_string(),
        ));
    }
    let x = field.eval(p)?;
    let jac = field.jacobian_at(p, h)?;
    let g = metric.eval(p)?;
    let dg = metric.partials_at(p, h)?;
    let mut advect = DMatrix::zeros(metric.dim(), metric.dim());
    for (k, dgk) in dg.iter().enumerate() {
        advect += dgk * x[k];
    }
    Ok(advect + jac.transpose() * &g + &g * jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_is_positive_definite() {
        let g = MetricEval::euclidean(4);
        let p = ChartPoint::new(&[0.0; 4]);
        g.check_positive_definite(&p, DEFAULT_PD_EPSILON).unwrap();
        let v = DVector::from_vec(vec![3.0, 4.0, 0.0, 0.0]);
        assert_eq!(g.norm(&p, &v).unwrap(), 5.0);
    }

    #[test]
    fn rotation_fields_are_euclidean_killing() {
        // planar rotation generator in 2d
        let rot = VectorField::from_fn(2, |p| Ok(DVector::from_vec(vec![-p[1], p[0]])))
            .with_jacobian(|_| Ok(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])));
        let g = MetricEval::euclidean(2);
        let l = lie_derivative_metric(&rot, &g, &ChartPoint::new(&[0.4, -1.7]), 1e-4).unwrap();
        assert!(l.abs().max() < 1e-14);
    }

    #[test]
    fn dilation_is_not_killing() {
        let dil = VectorField::from_fn(2, |p| Ok(DVector::from_vec(vec![p[0], p[1]])));
        let g = MetricEval::euclidean(2);
        let l = lie_derivative_metric(&dil, &g, &ChartPoint::new(&[1.0, 2.0]), 1e-4).unwrap();
        // L_X g = 2g for the Euler field
        assert!((l[(0, 0)] - 2.0).abs() < 1e-9);
        assert!((l[(1, 1)] - 2.0).abs() < 1e-9);
        assert!(l[(0, 1)].abs() < 1e-9);
    }

    #[test]
    fn indefinite_matrix_fails_the_pd_check() {
        let g = MetricEval::from_fn(2, |_| {
            Ok(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]))
        });
        assert!(matches!(
            g.check_positive_definite(&ChartPoint::new(&[0.0, 0.0]), DEFAULT_PD_EPSILON),
            Err(Error::NotPositiveDefinite(_))
        ));
    }
}
