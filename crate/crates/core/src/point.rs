//! Points of an explicit coordinate chart.

use nalgebra::DVector;

/// A point in a coordinate chart (the universal cover for the nilmanifold
/// chart, ambient ℝ⁴ for the three-sphere).
///
/// Coordinates are required to be finite; construction panics otherwise
/// since a non-finite coordinate is always a programming error upstream.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    coords: DVector<f64>,
}

impl ChartPoint {
    pub fn new(coords: &[f64]) -> Self {
        assert!(
            coords.iter().all(|c| c.is_finite()),
            "chart point has non-finite coordinate: {coords:?}"
        );
        ChartPoint {
            coords: DVector::from_column_slice(coords),
        }
    }

    pub fn from_vector(coords: DVector<f64>) -> Self {
        assert!(
            coords.iter().all(|c| c.is_finite()),
            "chart point has non-finite coordinate"
        );
        ChartPoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    /// The point shifted by `h` along coordinate axis `axis`.
    pub fn shifted(&self, axis: usize, h: f64) -> Self {
        let mut coords = self.coords.clone();
        coords[axis] += h;
        ChartPoint { coords }
    }
}

impl std::ops::Index<usize> for ChartPoint {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl From<&[f64]> for ChartPoint {
    fn from(coords: &[f64]) -> Self {
        ChartPoint::new(coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifting_moves_one_axis() {
        let p = ChartPoint::new(&[1.0, 2.0, 3.0]);
        let q = p.shifted(1, 0.5);
        assert_eq!(q[0], 1.0);
        assert_eq!(q[1], 2.5);
        assert_eq!(q[2], 3.0);
    }

    #[test]
    #[should_panic]
    fn non_finite_coordinates_are_rejected() {
        let _ = ChartPoint::new(&[0.0, f64::NAN]);
    }
}
