//! Right-linear relations (multivalued operators) on `V = (R_n)^d`.
//!
//! A relation is a right submodule of `V × V`, stored as an orthonormal
//! basis of pair vectors `(v, w)` in embedding coordinates. Right
//! submodules of `V` are exactly the real subspaces stable under right
//! multiplication by every basis blade, which is enforced on construction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordElement, MAX_DIM};
use crate::error::{Error, Result};
use crate::linalg::{left_block, null_space, orth, right_block, RightLinearOperator, Svd};

/// Rank threshold for bases built from null-space solves.
pub const REL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawRelation", into = "RawRelation")]
pub struct LinearRelation {
    n: usize,
    d: usize,
    /// `2D x k`, orthonormal columns `[v; w]`.
    basis: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawRelation {
    n: usize,
    d: usize,
    span: Vec<Vec<f64>>,
}

impl TryFrom<RawRelation> for LinearRelation {
    type Error = Error;
    fn try_from(raw: RawRelation) -> Result<Self> {
        let dim = check_shape(raw.n, raw.d)?;
        if raw.span.iter().any(|v| v.len() != 2 * dim) {
            return Err(Error::DimensionMismatch(format!(
                "pair vectors must have length {}",
                2 * dim
            )));
        }
        let m = DMatrix::from_fn(2 * dim, raw.span.len(), |i, j| raw.span[j][i]);
        Ok(Self::from_generators(raw.n, raw.d, &m))
    }
}

impl From<LinearRelation> for RawRelation {
    fn from(r: LinearRelation) -> Self {
        RawRelation {
            n: r.n,
            d: r.d,
            span: r
                .basis
                .column_iter()
                .map(|c| c.iter().copied().collect())
                .collect(),
        }
    }
}

fn check_shape(n: usize, d: usize) -> Result<usize> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    if d == 0 {
        return Err(Error::DimensionMismatch(
            "module rank d must be positive".into(),
        ));
    }
    Ok(d << n)
}

/// Right multiplication by every generator `e_i`, acting on one component.
fn generator_actions(n: usize, d: usize) -> Vec<DMatrix<f64>> {
    (1..=n)
        .map(|i| {
            right_block(
                &CliffordElement::generator(n, i).expect("valid generator"),
                d,
            )
        })
        .collect()
}

/// Smallest `e_i`-stable subspace containing the columns of `m`.
fn right_span(n: usize, d: usize, m: &DMatrix<f64>, pair: bool) -> DMatrix<f64> {
    let mut q = orth(m, REL_TOL);
    let acts = generator_actions(n, d);
    let dim = d << n;
    loop {
        if q.ncols() == 0 {
            return q;
        }
        let mut cols: Vec<DVector<f64>> = q.column_iter().map(|c| c.into_owned()).collect();
        for r in &acts {
            for c in q.column_iter() {
                let image = if pair {
                    let mut out = DVector::zeros(2 * dim);
                    out.rows_mut(0, dim).copy_from(&(r * c.rows(0, dim)));
                    out.rows_mut(dim, dim).copy_from(&(r * c.rows(dim, dim)));
                    out
                } else {
                    r * c
                };
                cols.push(image);
            }
        }
        let next = orth(&DMatrix::from_columns(&cols), REL_TOL);
        if next.ncols() == q.ncols() {
            return q;
        }
        q = next;
    }
}

/// `sin` of the largest principal angle from `span(a)` into `span(b)`,
/// i.e. `‖(I - P_b) a‖` for orthonormal `a`.
pub fn containment_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 {
        return 0.0;
    }
    let resid = a - b * (b.transpose() * a);
    crate::linalg::spectral_norm(&resid).min(1.0)
}

fn projector(q: &DMatrix<f64>) -> DMatrix<f64> {
    q * q.transpose()
}

impl LinearRelation {
    /// Span of the given pair vectors (columns of length `2 d 2^n`),
    /// completed to a right submodule.
    pub fn from_generators(n: usize, d: usize, m: &DMatrix<f64>) -> Self {
        let basis = right_span(n, d, m, true);
        Self { n, d, basis }
    }

    /// Pair vectors `(v_k, w_k)` from separate component matrices.
    pub fn from_pairs(n: usize, d: usize, v: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<Self> {
        let dim = check_shape(n, d)?;
        if v.nrows() != dim || w.nrows() != dim || v.ncols() != w.ncols() {
            return Err(Error::DimensionMismatch(
                "pair component shapes differ".into(),
            ));
        }
        let mut m = DMatrix::zeros(2 * dim, v.ncols());
        m.view_mut((0, 0), (dim, v.ncols())).copy_from(v);
        m.view_mut((dim, 0), (dim, v.ncols())).copy_from(w);
        Ok(Self::from_generators(n, d, &m))
    }

    /// Graph of `t`, restricted to the span of `domain` (columns in
    /// embedding coordinates) when given.
    pub fn from_operator(t: &RightLinearOperator, domain: Option<&DMatrix<f64>>) -> Result<Self> {
        let (n, d) = (t.n(), t.d());
        let dim = t.dim();
        let v = match domain {
            None => DMatrix::identity(dim, dim),
            Some(b) => {
                if b.nrows() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "domain vectors of length {} for a module of real dimension {dim}",
                        b.nrows()
                    )));
                }
                let q = orth(b, REL_TOL);
                let closed = right_span(n, d, &q, false);
                if closed.ncols() != q.ncols() {
                    let gap = containment_gap(&closed, &q);
                    return Err(Error::NonSubmoduleDomain(gap));
                }
                q
            }
        };
        let w = t.embedding() * &v;
        Self::from_pairs(n, d, &v, &w)
    }

    pub fn zero_space(n: usize, d: usize) -> Result<Self> {
        let dim = check_shape(n, d)?;
        Ok(Self {
            n,
            d,
            basis: DMatrix::zeros(2 * dim, 0),
        })
    }

    /// `{(0, w)}` for `w` in the span of the given columns.
    pub fn vertical(n: usize, d: usize, w: &DMatrix<f64>) -> Result<Self> {
        let dim = check_shape(n, d)?;
        Self::from_pairs(n, d, &DMatrix::zeros(dim, w.ncols()), w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Real dimension of `V`.
    pub fn module_dim(&self) -> usize {
        self.d << self.n
    }

    /// Real dimension of the relation.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    fn v_part(&self) -> DMatrix<f64> {
        let dim = self.module_dim();
        self.basis.rows(0, dim).into_owned()
    }

    fn w_part(&self) -> DMatrix<f64> {
        let dim = self.module_dim();
        self.basis.rows(dim, dim).into_owned()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::DimensionMismatch(format!(
                "relations on (n, d) = ({}, {}) and ({}, {})",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(())
    }

    /// `{(v, w1 + w2) : (v, w1) ∈ self, (v, w2) ∈ other}`.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let (av, aw, bv, bw) = (self.v_part(), self.w_part(), other.v_part(), other.w_part());
        let (ka, kb) = (av.ncols(), bv.ncols());
        let mut stacked = DMatrix::zeros(av.nrows(), ka + kb);
        stacked.view_mut((0, 0), (av.nrows(), ka)).copy_from(&av);
        stacked
            .view_mut((0, ka), (av.nrows(), kb))
            .copy_from(&(-&bv));
        let z = null_space(&stacked, REL_TOL);
        let (x, y) = (z.rows(0, ka), z.rows(ka, kb));
        let v = &av * x;
        let w = &aw * x + &bw * y;
        Self::from_pairs(self.n, self.d, &v, &w)
    }

    /// `self ∘ inner = {(v, u) : ∃ w, (v, w) ∈ inner, (w, u) ∈ self}`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.check_same(inner)?;
        let (av, aw, bv, bw) = (self.v_part(), self.w_part(), inner.v_part(), inner.w_part());
        let (ka, kb) = (av.ncols(), bv.ncols());
        let mut stacked = DMatrix::zeros(av.nrows(), kb + ka);
        stacked.view_mut((0, 0), (av.nrows(), kb)).copy_from(&bw);
        stacked
            .view_mut((0, kb), (av.nrows(), ka))
            .copy_from(&(-&av));
        let z = null_space(&stacked, REL_TOL);
        let (x, y) = (z.rows(0, kb), z.rows(kb, ka));
        let v = &bv * x;
        let u = &aw * y;
        Self::from_pairs(self.n, self.d, &v, &u)
    }

    /// `{(v, s w) : (v, w) ∈ self}`.
    pub fn scale_left(&self, s: &CliffordElement) -> Result<Self> {
        if s.n() != self.n {
            return Err(Error::DimensionMismatch(
                "scalar from a different algebra".into(),
            ));
        }
        let w = left_block(s, self.d) * self.w_part();
        Self::from_pairs(self.n, self.d, &self.v_part(), &w)
    }

    /// `{(w, v) : (v, w) ∈ self}`.
    pub fn inverse(&self) -> Self {
        let dim = self.module_dim();
        let mut b = DMatrix::zeros(2 * dim, self.dim());
        b.rows_mut(0, dim).copy_from(&self.basis.rows(dim, dim));
        b.rows_mut(dim, dim).copy_from(&self.basis.rows(0, dim));
        Self {
            n: self.n,
            d: self.d,
            basis: b,
        }
    }

    /// Every subspace of a finite-dimensional space is closed, so the
    /// closure is the canonical re-orthonormalized span.
    pub fn closure(&self) -> Self {
        Self {
            n: self.n,
            d: self.d,
            basis: orth(&self.basis, REL_TOL),
        }
    }

    /// Orthonormal basis of `{v : ∃ w, (v, w) ∈ self}`.
    pub fn domain(&self) -> DMatrix<f64> {
        orth(&self.v_part(), REL_TOL)
    }

    /// Orthonormal basis of `{w : ∃ v, (v, w) ∈ self}`.
    pub fn range(&self) -> DMatrix<f64> {
        orth(&self.w_part(), REL_TOL)
    }

    /// Orthonormal basis of `{w : (0, w) ∈ self}`.
    pub fn multivalued_part(&self) -> DMatrix<f64> {
        let z = null_space(&self.v_part(), REL_TOL);
        orth(&(self.w_part() * z), REL_TOL)
    }

    /// Orthonormal basis of `{v : (v, 0) ∈ self}`.
    pub fn kernel(&self) -> DMatrix<f64> {
        self.inverse().multivalued_part()
    }

    pub fn is_operator(&self) -> bool {
        self.multivalued_part().ncols() == 0
    }

    pub fn has_full_domain(&self) -> bool {
        self.domain().ncols() == self.module_dim()
    }

    /// The operator whose graph this is; requires single-valuedness and a
    /// full domain.
    pub fn to_operator(&self) -> Result<RightLinearOperator> {
        if !self.is_operator() {
            return Err(Error::InvalidParameter(format!(
                "relation is multivalued (multivalued part of dimension {})",
                self.multivalued_part().ncols()
            )));
        }
        if !self.has_full_domain() {
            return Err(Error::InvalidParameter(format!(
                "relation domain has dimension {} < {}",
                self.domain().ncols(),
                self.module_dim()
            )));
        }
        let v = self.v_part();
        let m = self.w_part() * Svd::thin(&v).pseudo_inverse(REL_TOL);
        RightLinearOperator::from_embedding(self.n, self.d, &m)
    }

    /// Image of `v`, when `v` is in the domain and the relation is single
    /// valued there; returns `None` otherwise.
    pub fn apply(&self, v: &DVector<f64>) -> Option<DVector<f64>> {
        if !self.is_operator() {
            return None;
        }
        let av = self.v_part();
        let coeffs = Svd::thin(&av).pseudo_inverse(REL_TOL) * v;
        if (&av * &coeffs - v).norm() > 1e-8 * (1.0 + v.norm()) {
            return None;
        }
        Some(self.w_part() * coeffs)
    }

    pub fn projector(&self) -> DMatrix<f64> {
        projector(&self.basis)
    }

    /// Frobenius distance between the orthogonal projectors.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok((self.projector() - other.projector()).norm())
    }

    /// Projector distance below `1e-10`.
    pub fn rel_eq(&self, other: &Self) -> bool {
        self.distance(other).map(|x| x < 1e-10).unwrap_or(false)
    }

    /// Largest principal angle gap (sine) of `self` inside `other`; zero
    /// means `self ⊆ other`.
    pub fn containment_gap(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(containment_gap(&self.basis, &other.basis))
    }

    /// Gram residual and `e_i`-stability residual of the stored basis.
    pub fn invariant_residuals(&self) -> (f64, f64) {
        let k = self.dim();
        let gram = (self.basis.transpose() * &self.basis - DMatrix::identity(k, k))
            .abs()
            .max();
        let dim = self.module_dim();
        let mut stab = 0.0f64;
        for r in generator_actions(self.n, self.d) {
            let mut moved = DMatrix::zeros(2 * dim, k);
            moved
                .rows_mut(0, dim)
                .copy_from(&(&r * self.basis.rows(0, dim)));
            moved
                .rows_mut(dim, dim)
                .copy_from(&(&r * self.basis.rows(dim, dim)));
            stab = stab.max(containment_gap(&moved, &self.basis));
        }
        (if k == 0 { 0.0 } else { gram }, stab)
    }
}
