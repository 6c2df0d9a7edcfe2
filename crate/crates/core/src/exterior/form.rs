//! Differential k-forms as coefficient functions over a chart.
//!
//! A k-form stores one real coefficient per strictly increasing multi-index
//! (lexicographic order, no 1/k! normalization: `dx∧dy` evaluated on
//! `(e_x, e_y)` is exactly 1). Wedge products, exterior derivatives and
//! interior products act symbolically on the coefficient functions; only
//! coefficient differentiation may fall back to finite differences, using
//! 4th-order central stencils with a configurable step.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::field::VectorField;
use crate::multi_index::{multi_indices, rank_of, splits};
use crate::point::ChartPoint;

/// Default finite-difference step for coefficient derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

pub type CoeffFn = Arc<dyn Fn(&ChartPoint) -> Result<DVector<f64>> + Send + Sync>;
/// Rows are multi-index ranks, columns are partial directions.
pub type PartialsFn = Arc<dyn Fn(&ChartPoint) -> Result<DMatrix<f64>> + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Coeffs {
        coeffs: CoeffFn,
        partials: Option<PartialsFn>,
    },
    /// `ι_{F_m} ... ι_{F_1} base`, kept structural so that repeated
    /// contraction by the same field vanishes exactly.
    Contracted {
        base: Arc<KForm>,
        fields: Vec<VectorField>,
    },
}

/// A differential form of fixed degree on an n-dimensional chart.
#[derive(Clone)]
pub struct KForm {
    dim: usize,
    degree: usize,
    repr: Repr,
}

impl KForm {
    /// Builds a form from a coefficient function (one value per increasing
    /// multi-index, lexicographic order).
    pub fn from_fn<F>(dim: usize, degree: usize, coeffs: F) -> Self
    where
        F: Fn(&ChartPoint) -> Result<DVector<f64>> + Send + Sync + 'static,
    {
        assert!(degree <= dim, "form degree exceeds chart dimension");
        KForm {
            dim,
            degree,
            repr: Repr::Coeffs {
                coeffs: Arc::new(coeffs),
                partials: None,
            },
        }
    }

    /// Attaches analytic coefficient partials (rows: multi-index rank,
    /// columns: derivative direction).
    pub fn with_partials<F>(mut self, partials: F) -> Self
    where
        F: Fn(&ChartPoint) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    {
        match &mut self.repr {
            Repr::Coeffs { partials: slot, .. } => *slot = Some(Arc::new(partials)),
            Repr::Contracted { .. } => {
                panic!("analytic partials can only be attached to coefficient forms")
            }
        }
        self
    }

    /// A form with constant coefficients.
    pub fn constant(dim: usize, degree: usize, values: Vec<f64>) -> Self {
        let count = multi_indices(dim, degree).len();
        assert_eq!(values.len(), count, "coefficient count mismatch");
        let stored = DVector::from_vec(values);
        let stored_p = stored.clone();
        KForm::from_fn(dim, degree, move |_| Ok(stored.clone()))
            .with_partials(move |_| Ok(DMatrix::zeros(stored_p.len(), dim)))
    }

    /// The coordinate basis form `dx_{i1} ∧ ... ∧ dx_{ik}` for an increasing
    /// index tuple.
    pub fn basis(dim: usize, index: &[usize]) -> Self {
        assert!(index.windows(2).all(|w| w[0] < w[1]), "index must increase");
        let degree = index.len();
        let mut values = vec![0.0; multi_indices(dim, degree).len()];
        values[rank_of(dim, index)] = 1.0;
        KForm::constant(dim, degree, values)
    }

    pub fn zero(dim: usize, degree: usize) -> Self {
        KForm::constant(dim, degree, vec![0.0; multi_indices(dim, degree).len()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficient_count(&self) -> usize {
        multi_indices(self.dim, self.degree).len()
    }

    /// True when coefficient derivatives are available without finite
    /// differences.
    pub fn has_analytic_partials(&self) -> bool {
        match &self.repr {
            Repr::Coeffs { partials, .. } => partials.is_some(),
            Repr::Contracted { base, fields } => {
                base.has_analytic_partials() && fields.iter().all(|f| f.has_jacobian())
            }
        }
    }

    /// Coefficient vector at a point (lexicographic multi-index order).
    pub fn coeffs_at(&self, p: &ChartPoint) -> Result<DVector<f64>> {
        if p.dim() != self.dim {
            return Err(Error::contract(format!(
                "point dimension {} does not match form dimension {}",
                p.dim(),
                self.dim
            )));
        }
        match &self.repr {
            Repr::Coeffs { coeffs, .. } => {
                let c = coeffs(p)?;
                if c.len() != self.coefficient_count() {
                    return Err(Error::contract(format!(
                        "coefficient function returned {} values, expected {}",
                        c.len(),
                        self.coefficient_count()
                    )));
                }
                Ok(c)
            }
            Repr::Contracted { base, fields } => {
                let fvals: Vec<DVector<f64>> =
                    fields.iter().map(|f| f.eval(p)).collect::<Result<_>>()?;
                // a repeated contraction field kills the form identically
                for i in 0..fvals.len() {
                    for j in (i + 1)..fvals.len() {
                        if bitwise_eq(&fvals[i], &fvals[j]) {
                            return Ok(DVector::zeros(self.coefficient_count()));
                        }
                    }
                }
                let base_coeffs = base.coeffs_at(p)?;
                self.contracted_coeffs(&fvals, &base_coeffs, base.degree)
            }
        }
    }

    fn contracted_coeffs(
        &self,
        fvals: &[DVector<f64>],
        base_coeffs: &DVector<f64>,
        base_degree: usize,
    ) -> Result<DVector<f64>> {
        let n = self.dim;
        let own_indices = multi_indices(n, self.degree);
        let base_indices = multi_indices(n, base_degree);
        let mut out = DVector::zeros(own_indices.len());
        for (slot, j_idx) in own_indices.iter().enumerate() {
            let mut acc = 0.0;
            for (rank, i_idx) in base_indices.iter().enumerate() {
                let c = base_coeffs[rank];
                if c == 0.0 {
                    continue;
                }
                let d = det_with_basis_columns(i_idx, fvals, j_idx);
                acc += c * d;
            }
            out[slot] = acc;
        }
        Ok(out)
    }

    /// Analytic coefficient partials, when the representation supports them.
    pub fn analytic_partials_at(&self, p: &ChartPoint) -> Option<Result<DMatrix<f64>>> {
        match &self.repr {
            Repr::Coeffs { partials, .. } => partials.as_ref().map(|f| {
                let m = f(p)?;
                if m.nrows() != self.coefficient_count() || m.ncols() != self.dim {
                    return Err(Error::contract(
                        "partials function returned a wrong shape".to_string(),
                    ));
                }
                Ok(m)
            }),
            Repr::Contracted { base, fields } => {
                if !self.has_analytic_partials() {
                    return None;
                }
                Some(self.contracted_partials(p, base, fields))
            }
        }
    }

    fn contracted_partials(
        &self,
        p: &ChartPoint,
        base: &KForm,
        fields: &[VectorField],
    ) -> Result<DMatrix<f64>> {
        let n = self.dim;
        let fvals: Vec<DVector<f64>> = fields.iter().map(|f| f.eval(p)).collect::<Result<_>>()?;
        let fjacs: Vec<DMatrix<f64>> = fields
            .iter()
            .map(|f| f.jacobian_at(p, DEFAULT_FD_STEP))
            .collect::<Result<_>>()?;
        let base_coeffs = base.coeffs_at(p)?;
        let base_partials = base
            .analytic_partials_at(p)
            .expect("checked by has_analytic_partials")?;
        let own_indices = multi_indices(n, self.degree);
        let base_indices = multi_indices(n, base.degree);
        let mut out = DMatrix::zeros(own_indices.len(), n);
        for (slot, j_idx) in own_indices.iter().enumerate() {
            for r in 0..n {
                let mut acc = 0.0;
                for (rank, i_idx) in base_indices.iter().enumerate() {
                    // product rule: derivative of the base coefficient ...
                    let dc = base_partials[(rank, r)];
                    if dc != 0.0 {
                        acc += dc * det_with_basis_columns(i_idx, &fvals, j_idx);
                    }
                    // ... plus derivative of each contraction column
                    let c = base_coeffs[rank];
                    if c != 0.0 {
                        for q in 0..fvals.len() {
                            let mut cols = fvals.to_vec();
                            cols[q] = fjacs[q].column(r).into_owned();
                            acc += c * det_with_basis_columns(i_idx, &cols, j_idx);
                        }
                    }
                }
                out[(slot, r)] = acc;
            }
        }
        Ok(out)
    }

    /// Coefficient partials at `p`: analytic when available, otherwise
    /// 4th-order central differences with step `h`.
    pub fn partials_at(&self, p: &ChartPoint, h: f64) -> Result<DMatrix<f64>> {
        if let Some(res) = self.analytic_partials_at(p) {
            return res;
        }
        if h <= 0.0 {
            return Err(Error::contract(
                "finite-difference step must be positive".to_string(),
            ));
        }
        let rows = self.coefficient_count();
        let mut out = DMatrix::zeros(rows, self.dim);
        for r in 0..self.dim {
            let c_m2 = self.coeffs_at(&p.shifted(r, -2.0 * h))?;
            let c_m1 = self.coeffs_at(&p.shifted(r, -h))?;
            let c_p1 = self.coeffs_at(&p.shifted(r, h))?;
            let c_p2 = self.coeffs_at(&p.shifted(r, 2.0 * h))?;
            for row in 0..rows {
                out[(row, r)] =
                    (c_m2[row] - 8.0 * c_m1[row] + 8.0 * c_p1[row] - c_p2[row]) / (12.0 * h);
            }
        }
        Ok(out)
    }

    /// Evaluates the form on `degree` tangent vectors.
    ///
    /// Computed as `Σ_I coeff_I(p) · det(rows I of the column matrix)` after
    /// sorting the input vectors into a canonical order, so the result is
    /// exactly antisymmetric under argument transpositions and exactly zero
    /// on repeated arguments.
    pub fn eval(&self, p: &ChartPoint, vectors: &[&DVector<f64>]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(Error::contract(format!(
                "form of degree {} evaluated on {} vectors",
                self.degree,
                vectors.len()
            )));
        }
        for v in vectors {
            if v.len() != self.dim {
                return Err(Error::contract(format!(
                    "vector dimension {} does not match form dimension {}",
                    v.len(),
                    self.dim
                )));
            }
        }
        if self.degree == 0 {
            return Ok(self.coeffs_at(p)?[0]);
        }
        let mut order: Vec<usize> = (0..vectors.len()).collect();
        let mut parity = 1.0;
        for i in 1..order.len() {
            let mut j = i;
            while j > 0 && lex_gt(vectors[order[j - 1]], vectors[order[j]]) {
                order.swap(j - 1, j);
                parity = -parity;
                j -= 1;
            }
        }
        for w in order.windows(2) {
            if bitwise_eq(vectors[w[0]], vectors[w[1]]) {
                return Ok(0.0);
            }
        }
        let coeffs = self.coeffs_at(p)?;
        let indices = multi_indices(self.dim, self.degree);
        let k = self.degree;
        let mut minor = DMatrix::zeros(k, k);
        let mut acc = 0.0;
        for (rank, idx) in indices.iter().enumerate() {
            let c = coeffs[rank];
            if c == 0.0 {
                continue;
            }
            for (col, &vi) in order.iter().enumerate() {
                for (row, &i) in idx.iter().enumerate() {
                    minor[(row, col)] = vectors[vi][i];
                }
            }
            acc += c * minor.clone().determinant();
        }
        Ok(parity * acc)
    }

    /// Wedge product with the shuffle-sum sign convention (no factorials).
    pub fn wedge(&self, other: &KForm) -> Result<KForm> {
        if self.dim != other.dim {
            return Err(Error::contract(
                "wedge of forms on different charts".to_string(),
            ));
        }
        let degree = self.degree + other.degree;
        if degree > self.dim {
            return Err(Error::contract(format!(
                "wedge degree {} exceeds chart dimension {}",
                degree, self.dim
            )));
        }
        let dim = self.dim;
        let (ka, kb) = (self.degree, other.degree);
        let a = self.clone();
        let b = other.clone();
        let analytic = self.has_analytic_partials() && other.has_analytic_partials();

        let plan = WedgePlan::new(dim, ka, kb);
        let plan_c = plan.clone();
        let (a_c, b_c) = (a.clone(), b.clone());
        let mut out = KForm::from_fn(dim, degree, move |p| {
            let ca = a_c.coeffs_at(p)?;
            let cb = b_c.coeffs_at(p)?;
            Ok(plan_c.combine(&ca, &cb))
        });
        if analytic {
            out = out.with_partials(move |p| {
                let ca = a.coeffs_at(p)?;
                let cb = b.coeffs_at(p)?;
                let pa = a.analytic_partials_at(p).expect("analytic")?;
                let pb = b.analytic_partials_at(p).expect("analytic")?;
                let mut m = DMatrix::zeros(multi_indices(dim, ka + kb).len(), dim);
                for r in 0..dim {
                    let da = pa.column(r).into_owned();
                    let db = pb.column(r).into_owned();
                    let col = plan.combine_product_rule(&ca, &cb, &da, &db);
                    m.set_column(r, &col);
                }
                Ok(m)
            });
        }
        Ok(out)
    }

    /// Iterated wedge power `self ∧ ... ∧ self` (`power` factors).
    pub fn wedge_power(&self, power: usize) -> Result<KForm> {
        assert!(power >= 1);
        let mut acc = self.clone();
        for _ in 1..power {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    /// Exterior derivative; coefficient derivatives use analytic partials
    /// when present and 4th-order central differences with step `h`
    /// otherwise.
    pub fn exterior_derivative(&self, h: f64) -> Result<KForm> {
        if self.degree >= self.dim {
            return Err(Error::contract(
                "exterior derivative of a top-degree form".to_string(),
            ));
        }
        let dim = self.dim;
        let degree = self.degree;
        let source = self.clone();
        let out_indices = multi_indices(dim, degree + 1);
        Ok(KForm::from_fn(dim, degree + 1, move |p| {
            let partials = source.partials_at(p, h)?;
            let mut out = DVector::zeros(out_indices.len());
            for (slot, k_idx) in out_indices.iter().enumerate() {
                let mut acc = 0.0;
                let mut sign = 1.0;
                for (drop, &direction) in k_idx.iter().enumerate() {
                    let mut reduced: Vec<usize> = k_idx.clone();
                    reduced.remove(drop);
                    let rank = rank_of(dim, &reduced);
                    acc += sign * partials[(rank, direction)];
                    sign = -sign;
                }
                out[slot] = acc;
            }
            Ok(out)
        }))
    }

    /// Exterior derivative with the default finite-difference step.
    pub fn d(&self) -> Result<KForm> {
        self.exterior_derivative(DEFAULT_FD_STEP)
    }

    /// Interior product `ι_X`. Contractions stack structurally, so
    /// `ι_X ∘ ι_X` is exactly zero.
    pub fn interior_product(&self, field: &VectorField) -> Result<KForm> {
        if self.degree == 0 {
            return Err(Error::contract("interior product of a 0-form".to_string()));
        }
        if field.dim() != self.dim {
            return Err(Error::contract(
                "interior product with a field on a different chart".to_string(),
            ));
        }
        let repr = match &self.repr {
            Repr::Contracted { base, fields } => {
                let mut fields = fields.clone();
                fields.push(field.clone());
                Repr::Contracted {
                    base: base.clone(),
                    fields,
                }
            }
            Repr::Coeffs { .. } => Repr::Contracted {
                base: Arc::new(self.clone()),
                fields: vec![field.clone()],
            },
        };
        Ok(KForm {
            dim: self.dim,
            degree: self.degree - 1,
            repr,
        })
    }

    /// Pointwise sum.
    pub fn add(&self, other: &KForm) -> Result<KForm> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(Error::contract(
                "sum of forms with different dimension or degree".to_string(),
            ));
        }
        let (a, b) = (self.clone(), other.clone());
        let analytic = a.has_analytic_partials() && b.has_analytic_partials();
        let (a2, b2) = (a.clone(), b.clone());
        let mut out = KForm::from_fn(self.dim, self.degree, move |p| {
            Ok(a2.coeffs_at(p)? + b2.coeffs_at(p)?)
        });
        if analytic {
            out = out.with_partials(move |p| {
                Ok(a.analytic_partials_at(p).expect("analytic")?
                    + b.analytic_partials_at(p).expect("analytic")?)
            });
        }
        Ok(out)
    }

    /// Pointwise scale by a constant.
    pub fn scale(&self, factor: f64) -> KForm {
        let a = self.clone();
        let analytic = a.has_analytic_partials();
        let a2 = a.clone();
        let mut out = KForm::from_fn(
            self.dim,
            self.degree,
            move |p| Ok(a2.coeffs_at(p)? * factor),
        );
        if analytic {
            out = out
                .with_partials(move |p| Ok(a.analytic_partials_at(p).expect("analytic")? * factor));
        }
        out
    }

    /// Pointwise scale by a scalar function (no derivative data propagated).
    pub fn scale_fn<F>(&self, factor: F) -> KForm
    where
        F: Fn(&ChartPoint) -> Result<f64> + Send + Sync + 'static,
    {
        let a = self.clone();
        KForm::from_fn(self.dim, self.degree, move |p| {
            Ok(a.coeffs_at(p)? * factor(p)?)
        })
    }
}

/// Shared index bookkeeping for wedge products.
#[derive(Clone)]
struct WedgePlan {
    dim: usize,
    out_count: usize,
    // per output slot: list of (rank in a, rank in b, sign)
    terms: Vec<Vec<(usize, usize, f64)>>,
}

impl WedgePlan {
    fn new(dim: usize, ka: usize, kb: usize) -> Self {
        let out_indices = multi_indices(dim, ka + kb);
        let terms = out_indices
            .iter()
            .map(|merged| {
                splits(merged, ka)
                    .into_iter()
                    .map(|(left, right, sign)| (rank_of(dim, &left), rank_of(dim, &right), sign))
                    .collect()
            })
            .collect::<Vec<_>>();
        WedgePlan {
            dim,
            out_count: out_indices.len(),
            terms,
        }
    }

    fn combine(&self, ca: &DVector<f64>, cb: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.out_count);
        for (slot, terms) in self.terms.iter().enumerate() {
            let mut acc = 0.0;
            for &(ra, rb, sign) in terms {
                acc += sign * (ca[ra] * cb[rb]);
            }
            out[slot] = acc;
        }
        let _ = self.dim;
        out
    }

    fn combine_product_rule(
        &self,
        ca: &DVector<f64>,
        cb: &DVector<f64>,
        da: &DVector<f64>,
        db: &DVector<f64>,
    ) -> DVector<f64> {
        let mut out = DVector::zeros(self.out_count);
        for (slot, terms) in self.terms.iter().enumerate() {
            let mut acc = 0.0;
            for &(ra, rb, sign) in terms {
                acc += sign * (da[ra] * cb[rb] + ca[ra] * db[rb]);
            }
            out[slot] = acc;
        }
        out
    }
}

fn lex_gt(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    for i in 0..a.len() {
        match a[i].total_cmp(&b[i]) {
            std::cmp::Ordering::Greater => return true,
            std::cmp::Ordering::Less => return false,
            std::cmp::Ordering::Equal => continue,
        }
    }
    false
}

fn bitwise_eq(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    a.len() == b.len() && (0..a.len()).all(|i| a[i].total_cmp(&b[i]).is_eq())
}

/// det(rows `i_idx` of the matrix whose columns are `fvals` followed by the
/// coordinate basis vectors `e_{j}` for `j` in `j_idx`).
fn det_with_basis_columns(i_idx: &[usize], fvals: &[DVector<f64>], j_idx: &[usize]) -> f64 {
    let size = i_idx.len();
    debug_assert_eq!(size, fvals.len() + j_idx.len());
    let mut m = DMatrix::zeros(size, size);
    for (col, f) in fvals.iter().enumerate() {
        for (row, &i) in i_idx.iter().enumerate() {
            m[(row, col)] = f[i];
        }
    }
    for (q, &j) in j_idx.iter().enumerate() {
        let col = fvals.len() + q;
        for (row, &i) in i_idx.iter().enumerate() {
            m[(row, col)] = if i == j { 1.0 } else { 0.0 };
        }
    }
    m.determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::field::VectorField;

    fn e(dim: usize, axis: usize) -> DVector<f64> {
        let mut v = DVector::zeros(dim);
        v[axis] = 1.0;
        v
    }

    fn p5() -> ChartPoint {
        ChartPoint::new(&[0.3, -0.7, 1.2, 0.4, 2.1])
    }

    #[test]
    fn basis_two_form_is_a_determinant() {
        let dxdy = KForm::basis(5, &[0, 1]);
        let p = p5();
        let v1 = e(5, 0);
        let v2 = e(5, 1);
        assert_eq!(dxdy.eval(&p, &[&v1, &v2]).unwrap(), 1.0);
        assert_eq!(dxdy.eval(&p, &[&v2, &v1]).unwrap(), -1.0);
    }

    #[test]
    fn eval_is_exactly_antisymmetric() {
        // degree-3 form with several coefficients
        let omega = KForm::constant(
            5,
            3,
            vec![1.5, -0.25, 2.0, 0.0, 3.0, -1.0, 0.5, 0.75, 4.0, -2.5],
        );
        let p = p5();
        let a = DVector::from_vec(vec![0.3, 1.7, -2.2, 0.9, 0.1]);
        let b = DVector::from_vec(vec![-1.3, 0.4, 2.5, -0.6, 1.9]);
        let c = DVector::from_vec(vec![0.8, -0.2, 0.0, 1.4, -3.1]);
        let base = omega.eval(&p, &[&a, &b, &c]).unwrap();
        assert_eq!(omega.eval(&p, &[&b, &a, &c]).unwrap(), -base);
        assert_eq!(omega.eval(&p, &[&c, &b, &a]).unwrap(), -base);
        assert_eq!(omega.eval(&p, &[&a, &c, &b]).unwrap(), -base);
        assert_eq!(omega.eval(&p, &[&a, &b, &a]).unwrap(), 0.0);
    }

    #[test]
    fn wedge_of_one_form_with_itself_vanishes() {
        let alpha = KForm::from_fn(5, 1, |p| {
            Ok(DVector::from_vec(vec![
                p[0].sin(),
                p[1] * p[2],
                1.5,
                p[3].cos(),
                p[4],
            ]))
        });
        let sq = alpha.wedge(&alpha).unwrap();
        let c = sq.coeffs_at(&p5()).unwrap();
        for v in c.iter() {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn exterior_derivative_of_x_dy() {
        // d(x dy) = dx ∧ dy
        let form = KForm::from_fn(5, 1, |p| {
            Ok(DVector::from_vec(vec![0.0, p[0], 0.0, 0.0, 0.0]))
        })
        .with_partials(|_| {
            let mut m = DMatrix::zeros(5, 5);
            m[(1, 0)] = 1.0; // ∂(x)/∂x on the dy slot
            Ok(m)
        });
        let d = form.d().unwrap();
        let c = d.coeffs_at(&p5()).unwrap();
        let dxdy_rank = rank_of(5, &[0, 1]);
        for (rank, v) in c.iter().enumerate() {
            if rank == dxdy_rank {
                assert!((v - 1.0).abs() < 1e-14);
            } else {
                assert!(v.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn finite_difference_matches_analytic_partials() {
        let analytic = KForm::from_fn(4, 1, |p| {
            Ok(DVector::from_vec(vec![
                (2.0 * p[0]).sin(),
                p[1] * p[1],
                p[2].cos() * p[0],
                0.0,
            ]))
        })
        .with_partials(|p| {
            let mut m = DMatrix::zeros(4, 4);
            m[(0, 0)] = 2.0 * (2.0 * p[0]).cos();
            m[(1, 1)] = 2.0 * p[1];
            m[(2, 0)] = p[2].cos();
            m[(2, 2)] = -p[2].sin() * p[0];
            Ok(m)
        });
        let numeric = KForm::from_fn(4, 1, |p| {
            Ok(DVector::from_vec(vec![
                (2.0 * p[0]).sin(),
                p[1] * p[1],
                p[2].cos() * p[0],
                0.0,
            ]))
        });
        let p = ChartPoint::new(&[0.4, -0.9, 1.3, 0.2]);
        let exact = analytic.partials_at(&p, DEFAULT_FD_STEP).unwrap();
        let fd = numeric.partials_at(&p, DEFAULT_FD_STEP).unwrap();
        assert!((exact - fd).abs().max() < 1e-10);
    }

    #[test]
    fn double_interior_product_is_exactly_zero() {
        let omega = KForm::from_fn(5, 3, |p| {
            let n = multi_indices(5, 3).len();
            Ok(DVector::from_fn(n, |i, _| {
                (p[0] + i as f64).sin() + p[3] * 0.25
            }))
        });
        let x = VectorField::from_fn(5, |p| {
            Ok(DVector::from_vec(vec![
                p[1].cos(),
                0.7,
                p[0] * p[4],
                -1.2,
                p[2].sin(),
            ]))
        });
        let once = omega.interior_product(&x).unwrap();
        let twice = once.interior_product(&x).unwrap();
        let c = twice.coeffs_at(&p5()).unwrap();
        for v in c.iter() {
            assert_eq!(*v, 0.0);
        }
        // and evaluation of the once-contracted form inserts the field
        let v1 = e(5, 1);
        let v2 = e(5, 3);
        let direct = omega
            .eval(&p5(), &[&x.eval(&p5()).unwrap(), &v1, &v2])
            .unwrap();
        let via = once.eval(&p5(), &[&v1, &v2]).unwrap();
        assert!((direct - via).abs() < 1e-13);
    }

    #[test]
    fn degree_mismatch_is_a_contract_violation() {
        let dxdy = KForm::basis(3, &[0, 1]);
        let p = ChartPoint::new(&[0.0, 0.0, 0.0]);
        let v = e(3, 0);
        assert!(matches!(dxdy.eval(&p, &[&v]), Err(Error::Contract(_))));
        let zero_form = KForm::constant(3, 0, vec![1.0]);
        let x = VectorField::constant(3, &[1.0, 0.0, 0.0]);
        assert!(matches!(
            zero_form.interior_product(&x),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn wedge_overflow_is_rejected() {
        let a = KForm::basis(3, &[0, 1]);
        let b = KForm::basis(3, &[0, 2]);
        assert!(matches!(a.wedge(&b), Err(Error::Contract(_))));
    }
}
