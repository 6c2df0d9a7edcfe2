//! Tangent frames: a basis of the tangent space at each point.
//!
//! For a plain coordinate chart the frame is the coordinate basis. For the
//! three-sphere embedded in ℝ⁴ the frame spans the 3-dimensional tangent
//! space inside the 4-dimensional ambient space, which is how forms and
//! metrics get restricted to the manifold.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::Result;
use crate::point::ChartPoint;

pub type FrameFn = Arc<dyn Fn(&ChartPoint) -> Result<Vec<DVector<f64>>> + Send + Sync>;

#[derive(Clone)]
pub struct Frame {
    dim_ambient: usize,
    dim_manifold: usize,
    basis: FrameFn,
}

impl Frame {
    /// Frames are expected to be orthonormal for the ambient Euclidean dot
    /// product; both frames used in this crate (coordinate basis, quaternion
    /// frame on the unit sphere) satisfy this.
    pub fn from_fn<F>(dim_ambient: usize, dim_manifold: usize, basis: F) -> Self
    where
        F: Fn(&ChartPoint) -> Result<Vec<DVector<f64>>> + Send + Sync + 'static,
    {
        Frame {
            dim_ambient,
            dim_manifold,
            basis: Arc::new(basis),
        }
    }

    /// The coordinate basis of an n-dimensional chart.
    pub fn coordinate(dim: usize) -> Self {
        Frame::from_fn(dim, dim, move |_| {
            Ok((0..dim)
                .map(|i| {
                    let mut v = DVector::zeros(dim);
                    v[i] = 1.0;
                    v
                })
                .collect())
        })
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    pub fn dim_manifold(&self) -> usize {
        self.dim_manifold
    }

    pub fn basis_at(&self, p: &ChartPoint) -> Result<Vec<DVector<f64>>> {
        (self.basis)(p)
    }
}
