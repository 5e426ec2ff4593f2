//! Right-linear operators on the Clifford module `V = (R_n)^d`.
//!
//! Every operator is stored both as its `d x d` Clifford entries and as the
//! real embedding of size `2^n d`, built from left-regular blocks. A module
//! vector embeds by stacking coefficient vectors, entry `i` occupying rows
//! `i * 2^n .. (i + 1) * 2^n`.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordElement, SpectralSphere};
use crate::error::{Error, Result};

/// Largest supported embedding dimension `2^n d`.
pub const MAX_EMBEDDING: usize = 512;

/// Relative singular value threshold used for rank decisions.
pub const RANK_TOL: f64 = 1e-12;

/// An element of `V = (R_n)^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleVector {
    n: usize,
    d: usize,
    entries: Vec<CliffordElement>,
}

impl ModuleVector {
    pub fn new(entries: Vec<CliffordElement>) -> Result<Self> {
        let d = entries.len();
        if d == 0 {
            return Err(Error::InvalidParameter("empty module vector".into()));
        }
        let n = entries[0].n();
        if entries.iter().any(|e| e.n() != n) {
            return Err(Error::DimensionMismatch(
                "entries from different algebras".into(),
            ));
        }
        Ok(Self { n, d, entries })
    }

    pub fn zero(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            entries: vec![CliffordElement::zero(n); d],
        }
    }

    pub fn from_embedding(n: usize, d: usize, x: &DVector<f64>) -> Result<Self> {
        let b = 1 << n;
        if x.len() != b * d {
            return Err(Error::DimensionMismatch(format!(
                "embedding of length {} for (n, d) = ({n}, {d})",
                x.len()
            )));
        }
        let entries = (0..d)
            .map(|i| CliffordElement::from_coeffs(n, x.rows(i * b, b).iter().copied().collect()))
            .collect::<Result<_>>()?;
        Ok(Self { n, d, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[CliffordElement] {
        &self.entries
    }

    pub fn embed(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.d << self.n,
            self.entries.iter().flat_map(|e| e.coeffs().iter().copied()),
        )
    }

    /// `sqrt(sum_i |v_i|^2)`.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sq()).sum::<f64>().sqrt()
    }

    /// `v s`, componentwise right multiplication.
    pub fn scale_right(&self, s: &CliffordElement) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.mul(s))
            .collect::<Result<_>>()?;
        Ok(Self { entries, ..*self })
    }

    /// `s v`, componentwise left multiplication.
    pub fn scale_left(&self, s: &CliffordElement) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| s.mul(e))
            .collect::<Result<_>>()?;
        Ok(Self { entries, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self { entries, ..*self })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { entries, ..*self })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if (self.n, self.d) != (other.n, other.d) {
            return Err(Error::DimensionMismatch(format!(
                "vectors over (n, d) = ({}, {}) and ({}, {})",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(())
    }
}

/// `I_d ⊗ L(a)`: entrywise left multiplication of module vectors by `a`.
pub fn left_block(a: &CliffordElement, d: usize) -> DMatrix<f64> {
    let l = a.left_matrix();
    let b = l.nrows();
    let mut m = DMatrix::zeros(b * d, b * d);
    for i in 0..d {
        m.view_mut((i * b, i * b), (b, b)).copy_from(&l);
    }
    m
}

/// `I_d ⊗ R(a)`: entrywise right multiplication of module vectors by `a`.
pub fn right_block(a: &CliffordElement, d: usize) -> DMatrix<f64> {
    let r = a.right_matrix();
    let b = r.nrows();
    let mut m = DMatrix::zeros(b * d, b * d);
    for i in 0..d {
        m.view_mut((i * b, i * b), (b, b)).copy_from(&r);
    }
    m
}

/// Eigenvalues of a real square matrix. Francis iterations can stall on
/// matrices with repeated imaginary pairs (companion matrices, Jordan
/// blocks); those are retried after a fixed orthogonal similarity and then
/// after a real shift.
pub fn eigenvalues(m: &DMatrix<f64>, max_iter: usize) -> Result<Vec<Complex<f64>>> {
    let dim = m.nrows();
    if let Some(s) = m.clone().try_schur(f64::EPSILON, max_iter) {
        return Ok(s.complex_eigenvalues().iter().copied().collect());
    }
    for seed in 1..=3 {
        let r = DMatrix::from_fn(dim, dim, |i, j| {
            ((i * 7 + j * 3 + seed * 11) as f64 * 0.37).sin()
        });
        let q = r.qr().q();
        let mm = q.transpose() * m * &q;
        if let Some(s) = mm.try_schur(f64::EPSILON, max_iter) {
            return Ok(s.complex_eigenvalues().iter().copied().collect());
        }
    }
    let shift = 0.1234 * (1.0 + m.norm() / (dim.max(1) as f64).sqrt());
    let shifted = m + DMatrix::identity(dim, dim) * shift;
    let s = shifted
        .try_schur(f64::EPSILON, max_iter)
        .ok_or(Error::EigenNonConvergence)?;
    Ok(s.complex_eigenvalues().iter().map(|z| z - shift).collect())
}

/// Full singular value decomposition `m = u diag(s) v^T`, singular values
/// in non-increasing order.
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn new(m: &DMatrix<f64>) -> Self {
        Self::compute(m, false)
    }

    /// Economy form: `u` is `r x k` and `v` is `c x k` with `k = min(r, c)`.
    pub fn thin(m: &DMatrix<f64>) -> Self {
        Self::compute(m, true)
    }

    fn compute(m: &DMatrix<f64>, thin: bool) -> Self {
        let (r, c) = m.shape();
        let k = r.min(c);
        if k == 0 {
            let (ur, vc) = if thin { (0, 0) } else { (r, c) };
            return Self {
                u: DMatrix::identity(r, ur),
                s: DVector::zeros(0),
                v: DMatrix::identity(c, vc),
            };
        }
        let scale = m.amax();
        if scale == 0.0 || !scale.is_finite() {
            let (uc, vc) = if thin { (k, k) } else { (r, c) };
            return Self {
                u: DMatrix::identity(r, uc),
                s: DVector::from_element(k, if scale == 0.0 { 0.0 } else { f64::NAN }),
                v: DMatrix::identity(c, vc),
            };
        }
        // nalgebra's bidiagonal iteration deflates too early on clustered
        // singular values, which every e_i-stable subspace produces; faer's
        // convergence test is not scale invariant, hence the normalization
        let fm = faer::Mat::<f64>::from_fn(r, c, |i, j| m[(i, j)] / scale);
        let (u, s, v) = factor(fm.as_ref(), thin)
            .or_else(|| factor(fm.transpose(), thin).map(|(u, s, v)| (v, s, u)))
            .expect("SVD converges");
        Self {
            u: DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
            s: DVector::from_fn(k, |i, _| s[i] * scale),
            v: DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]),
        }
    }

    pub fn max(&self) -> f64 {
        self.s.iter().copied().fold(0.0, f64::max)
    }

    /// Number of singular values above `tol * max(1, sigma_max)`.
    pub fn rank(&self, tol: f64) -> usize {
        let cut = tol * self.max().max(1.0);
        self.s.iter().filter(|&&x| x > cut).count()
    }

    /// Pseudo-inverse, dropping singular values at or below
    /// `tol * max(1, sigma_max)`.
    pub fn pseudo_inverse(&self, tol: f64) -> DMatrix<f64> {
        let k = self.rank(tol);
        let mut vs = self.v.columns(0, k).into_owned();
        for (j, mut col) in vs.column_iter_mut().enumerate() {
            col /= self.s[j];
        }
        vs * self.u.columns(0, k).transpose()
    }
}

type Factors = (faer::Mat<f64>, faer::Col<f64>, faer::Mat<f64>);

fn factor(m: faer::MatRef<'_, f64>, thin: bool) -> Option<Factors> {
    if thin {
        let svd = m.thin_svd().ok()?;
        Some((
            svd.U().to_owned(),
            svd.S().column_vector().to_owned(),
            svd.V().to_owned(),
        ))
    } else {
        let svd = m.svd().ok()?;
        Some((
            svd.U().to_owned(),
            svd.S().column_vector().to_owned(),
            svd.V().to_owned(),
        ))
    }
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    Svd::thin(m).s
}

/// Orthonormal basis (columns) of the column space; singular values at or
/// below `tol * max(1, sigma_max)` are dropped.
pub fn orth(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = Svd::thin(m);
    svd.u.columns(0, svd.rank(tol)).into_owned()
}

/// Orthonormal basis (columns) of the null space, same threshold as [`orth`].
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let c = m.ncols();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    let svd = Svd::new(m);
    let rank = svd.rank(tol);
    svd.v.columns(rank, c - rank).into_owned()
}

/// Smallest over largest singular value; `0` for the zero matrix.
pub fn reciprocal_condition(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = singular_values(m);
    let smax = sv[0];
    if smax == 0.0 {
        0.0
    } else {
        sv[sv.len() - 1] / smax
    }
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    singular_values(m)[0]
}

/// A bounded right-linear operator on `(R_n)^d`, `(Tv)_i = sum_j T_ij v_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator", into = "RawOperator")]
pub struct RightLinearOperator {
    n: usize,
    d: usize,
    entries: Vec<CliffordElement>,
    embedding: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawOperator {
    n: usize,
    d: usize,
    entries: Vec<Vec<CliffordElement>>,
}

impl TryFrom<RawOperator> for RightLinearOperator {
    type Error = Error;
    fn try_from(raw: RawOperator) -> Result<Self> {
        let op = RightLinearOperator::new(raw.entries)?;
        if op.n != raw.n || op.d != raw.d {
            return Err(Error::DimensionMismatch(format!(
                "declared (n, d) = ({}, {}) but entries give ({}, {})",
                raw.n, raw.d, op.n, op.d
            )));
        }
        Ok(op)
    }
}

impl From<RightLinearOperator> for RawOperator {
    fn from(op: RightLinearOperator) -> Self {
        RawOperator {
            n: op.n,
            d: op.d,
            entries: op.entries.chunks(op.d).map(|row| row.to_vec()).collect(),
        }
    }
}

impl RightLinearOperator {
    /// Builds an operator from its rows of Clifford entries.
    pub fn new(rows: Vec<Vec<CliffordElement>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::InvalidParameter(
                "operator needs at least one row".into(),
            ));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(
                "operator entries must be square".into(),
            ));
        }
        let n = rows[0][0].n();
        if rows.iter().flatten().any(|e| e.n() != n) {
            return Err(Error::DimensionMismatch(
                "entries from different algebras".into(),
            ));
        }
        Self::from_flat(n, d, rows.into_iter().flatten().collect())
    }

    fn from_flat(n: usize, d: usize, entries: Vec<CliffordElement>) -> Result<Self> {
        let b = 1usize << n;
        if b * d > MAX_EMBEDDING {
            return Err(Error::InvalidParameter(format!(
                "embedding dimension {} exceeds {MAX_EMBEDDING}",
                b * d
            )));
        }
        let mut embedding = DMatrix::zeros(b * d, b * d);
        for i in 0..d {
            for j in 0..d {
                let l = entries[i * d + j].left_matrix();
                embedding.view_mut((i * b, j * b), (b, b)).copy_from(&l);
            }
        }
        Ok(Self {
            n,
            d,
            entries,
            embedding,
        })
    }

    /// Reads an operator back from a real matrix commuting with right
    /// multiplication; entry `(i, j)` is the block column acting on `e_∅`.
    pub fn from_embedding(n: usize, d: usize, m: &DMatrix<f64>) -> Result<Self> {
        let b = 1usize << n;
        if m.nrows() != b * d || m.ncols() != b * d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for (n, d) = ({n}, {d})",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let col: Vec<f64> = (0..b).map(|a| m[(i * b + a, j * b)]).collect();
                entries.push(CliffordElement::from_coeffs(n, col)?);
            }
        }
        Self::from_flat(n, d, entries)
    }

    pub fn identity(n: usize, d: usize) -> Self {
        Self::scalar(n, d, 1.0)
    }

    pub fn zero(n: usize, d: usize) -> Self {
        Self::scalar(n, d, 0.0)
    }

    pub fn scalar(n: usize, d: usize, x: f64) -> Self {
        let entries = (0..d * d)
            .map(|k| {
                if k / d == k % d {
                    CliffordElement::scalar(n, x)
                } else {
                    CliffordElement::zero(n)
                }
            })
            .collect();
        Self::from_flat(n, d, entries).expect("scalar operator within size limits")
    }

    pub fn diagonal(diag: Vec<CliffordElement>) -> Result<Self> {
        let d = diag.len();
        if d == 0 {
            return Err(Error::InvalidParameter("empty diagonal".into()));
        }
        let n = diag[0].n();
        let rows = diag
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                (0..d)
                    .map(|j| {
                        if i == j {
                            a.clone()
                        } else {
                            CliffordElement::zero(n)
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `2^n d`.
    pub fn dim(&self) -> usize {
        self.d << self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &CliffordElement {
        &self.entries[i * self.d + j]
    }

    pub fn embedding(&self) -> &DMatrix<f64> {
        &self.embedding
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if (self.n, self.d) != (other.n, other.d) {
            return Err(Error::DimensionMismatch(format!(
                "operators over (n, d) = ({}, {}) and ({}, {})",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(())
    }

    pub fn apply(&self, v: &ModuleVector) -> Result<ModuleVector> {
        if (self.n, self.d) != (v.n, v.d) {
            return Err(Error::DimensionMismatch(format!(
                "operator over ({}, {}) applied to vector over ({}, {})",
                self.n, self.d, v.n, v.d
            )));
        }
        let entries = (0..self.d)
            .map(|i| {
                let mut acc = CliffordElement::zero(self.n);
                for j in 0..self.d {
                    acc += &(self.entry(i, j) * &v.entries[j]);
                }
                acc
            })
            .collect();
        Ok(ModuleVector {
            n: self.n,
            d: self.d,
            entries,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Self::from_flat(self.n, self.d, entries)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Self::from_flat(self.n, self.d, entries)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let d = self.d;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = CliffordElement::zero(self.n);
                for k in 0..d {
                    acc += &(self.entry(i, k) * other.entry(k, j));
                }
                entries.push(acc);
            }
        }
        Self::from_flat(self.n, d, entries)
    }

    /// `a T`: every entry multiplied by `a` from the left.
    pub fn scale_left(&self, a: &CliffordElement) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| a.mul(e))
            .collect::<Result<_>>()?;
        Self::from_flat(self.n, self.d, entries)
    }

    /// `T a`: every entry multiplied by `a` from the right, i.e. `v -> T(a v)`.
    pub fn scale_right(&self, a: &CliffordElement) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.mul(a))
            .collect::<Result<_>>()?;
        Self::from_flat(self.n, self.d, entries)
    }

    pub fn scale(&self, x: f64) -> Self {
        let entries = self.entries.iter().map(|e| e.scale(x)).collect();
        Self::from_flat(self.n, self.d, entries).expect("same shape")
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.n, self.d);
        for _ in 0..k {
            acc = acc.compose(self).expect("same shape");
        }
        acc
    }

    /// Two-sided inverse through the embedding.
    pub fn inverse(&self) -> Result<Self> {
        let rcond = reciprocal_condition(&self.embedding);
        if rcond <= RANK_TOL {
            return Err(Error::SingularOperator { rcond });
        }
        let inv = self
            .embedding
            .clone()
            .try_inverse()
            .ok_or(Error::SingularOperator { rcond })?;
        Self::from_embedding(self.n, self.d, &inv)
    }

    pub fn reciprocal_condition(&self) -> f64 {
        reciprocal_condition(&self.embedding)
    }

    /// Spectral norm of the embedding.
    pub fn norm(&self) -> f64 {
        spectral_norm(&self.embedding)
    }

    /// Distance between operators in the embedding norm.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Spheres `(Re μ, |Im μ|)` over the eigenvalues `μ` of the embedding,
    /// sorted by center then radius, duplicates merged.
    pub fn eigen_spheres(&self) -> Result<Vec<SpectralSphere>> {
        let dim = self.dim();
        let eig = eigenvalues(&self.embedding, 1000 * dim.max(10))?;
        let scale = eig.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        // defective eigenvalues split by roughly sqrt(eps)
        let tol = 1e-6 * scale;
        let mut raw: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im.abs())).collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut clusters: Vec<(f64, f64, usize)> = Vec::new();
        for (c, r) in raw {
            match clusters
                .iter_mut()
                .find(|(cc, rr, k)| ((cc / *k as f64 - c).hypot(rr / *k as f64 - r)) <= tol)
            {
                Some(cl) => {
                    cl.0 += c;
                    cl.1 += r;
                    cl.2 += 1;
                }
                None => clusters.push((c, r, 1)),
            }
        }
        let mut spheres: Vec<SpectralSphere> = clusters
            .into_iter()
            .map(|(c, r, k)| {
                let (c, r) = (c / k as f64, r / k as f64);
                let r = if r <= tol { 0.0 } else { r };
                SpectralSphere {
                    center: if r == 0.0 && c.abs() <= tol { 0.0 } else { c },
                    radius: r,
                }
            })
            .collect();
        spheres.sort_by(|a, b| {
            a.center
                .total_cmp(&b.center)
                .then(a.radius.total_cmp(&b.radius))
        });
        Ok(spheres)
    }

    fn svd_split(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let dim = self.dim();
        let svd = Svd::new(&self.embedding);
        let smax = svd.max();
        let rank = svd
            .s
            .iter()
            .filter(|&&s| smax > 0.0 && s > RANK_TOL * smax)
            .count();
        let range = svd.u.columns(0, rank).into_owned();
        let kernel = svd.v.columns(rank, dim - rank).into_owned();
        (kernel, range)
    }

    /// Orthonormal kernel basis in embedding coordinates (columns).
    pub fn kernel_matrix(&self) -> DMatrix<f64> {
        self.svd_split().0
    }

    /// Orthonormal range basis in embedding coordinates (columns).
    pub fn range_matrix(&self) -> DMatrix<f64> {
        self.svd_split().1
    }

    pub fn kernel_basis(&self) -> Vec<ModuleVector> {
        columns_to_vectors(self.n, self.d, &self.kernel_matrix())
    }

    pub fn range_basis(&self) -> Vec<ModuleVector> {
        columns_to_vectors(self.n, self.d, &self.range_matrix())
    }

    pub fn is_injective(&self) -> bool {
        self.kernel_matrix().ncols() == 0
    }
}

fn columns_to_vectors(n: usize, d: usize, m: &DMatrix<f64>) -> Vec<ModuleVector> {
    m.column_iter()
        .map(|c| ModuleVector::from_embedding(n, d, &c.into_owned()).expect("shape"))
        .collect()
}
