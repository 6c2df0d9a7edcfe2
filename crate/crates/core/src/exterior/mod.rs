//! Chart-level exterior calculus.
//!
//! Forms, fields, diffeomorphisms and metrics are all pointwise evaluators
//! over an explicit chart; see [`form::KForm`] for the coefficient
//! conventions (strictly increasing multi-indices, determinant-normalized
//! wedge, 4th-order finite-difference fallback for coefficient derivatives).

pub mod diffeo;
pub mod field;
pub mod form;
pub mod frame;
pub mod metric;

pub use diffeo::Diffeo;
pub use field::{ScalarField, VectorField};
pub use form::{KForm, DEFAULT_FD_STEP};
pub use frame::Frame;
pub use metric::{lie_derivative_metric, MetricEval, DEFAULT_PD_EPSILON};

use crate::error::Result;

/// Lie derivative of a form along a field, through the Cartan formula
/// `L_X ω = ι_X dω + d ι_X ω` (dropping whichever term is undefined at the
/// degree boundaries).
pub fn lie_derivative_form(field: &VectorField, omega: &KForm, h: f64) -> Result<KForm> {
    let n = omega.dim();
    let k = omega.degree();
    if k == 0 {
        // L_X f = ι_X df
        let df = omega.exterior_derivative(h)?;
        let contracted = df.interior_product(field)?;
        return Ok(contracted);
    }
    let d_inner = omega.interior_product(field)?.exterior_derivative(h)?;
    if k == n {
        return Ok(d_inner);
    }
    let inner_d = omega.exterior_derivative(h)?.interior_product(field)?;
    d_inner.add(&inner_d)
}
