//! Real Clifford algebra `R_n` with `e_i^2 = -1` and `e_i e_j = -e_j e_i`.
//!
//! Elements are stored as `2^n` coefficients over the basis blades `e_A`,
//! `A ⊆ {1..n}`, ordered by (cardinality, lexicographic). For `n = 2` the
//! order is `1, e1, e2, e12`; for `n = 3` it is
//! `1, e1, e2, e3, e12, e13, e23, e123`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported algebra dimension.
pub const MAX_DIM: usize = 5;

/// Multiplication table of one algebra `R_n`.
#[derive(Debug)]
pub(crate) struct BasisTable {
    /// Blade index -> sorted generator indices (1-based).
    pub blades: Vec<Vec<u8>>,
    /// Bitmask (bit i-1 set for e_i) -> blade index.
    pub index_of_mask: Vec<usize>,
    /// Blade index -> bitmask.
    pub masks: Vec<u32>,
    /// `prod[a * dim + b] = (c, sign)` with `e_a e_b = sign * e_c`.
    pub prod: Vec<(usize, f64)>,
}

impl BasisTable {
    fn build(n: usize) -> Self {
        let dim = 1usize << n;
        let mut blades: Vec<Vec<u8>> = (0..dim as u32)
            .map(|mask| {
                (1..=n as u8)
                    .filter(|i| mask & (1 << (i - 1)) != 0)
                    .collect()
            })
            .collect();
        blades.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let masks: Vec<u32> = blades
            .iter()
            .map(|b| b.iter().fold(0u32, |m, &i| m | (1 << (i - 1))))
            .collect();
        let mut index_of_mask = vec![0; dim];
        for (idx, &m) in masks.iter().enumerate() {
            index_of_mask[m as usize] = idx;
        }
        let mut prod = Vec::with_capacity(dim * dim);
        for a in &blades {
            for b in &blades {
                let (word, sign) = reduce_word(a, b);
                let mask = word.iter().fold(0u32, |m, &i| m | (1 << (i - 1)));
                prod.push((index_of_mask[mask as usize], sign));
            }
        }
        BasisTable {
            blades,
            index_of_mask,
            masks,
            prod,
        }
    }

    pub fn dim(&self) -> usize {
        self.masks.len()
    }
}

/// Reduces the concatenated generator word `a ++ b` to canonical form.
///
/// Bubble sort counts transpositions of anticommuting generators; each
/// adjacent duplicate pair `e_i e_i` then contributes a factor `-1`.
fn reduce_word(a: &[u8], b: &[u8]) -> (Vec<u8>, f64) {
    let mut word: Vec<u8> = a.iter().chain(b).copied().collect();
    let mut swaps = 0usize;
    for pass in 0..word.len() {
        for k in 0..word.len().saturating_sub(1 + pass) {
            if word[k] > word[k + 1] {
                word.swap(k, k + 1);
                swaps += 1;
            }
        }
    }
    let mut sign = if swaps.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut out = Vec::with_capacity(word.len());
    let mut k = 0;
    while k < word.len() {
        if k + 1 < word.len() && word[k] == word[k + 1] {
            sign = -sign;
            k += 2;
        } else {
            out.push(word[k]);
            k += 1;
        }
    }
    (out, sign)
}

pub(crate) fn table(n: usize) -> &'static BasisTable {
    static TABLES: [OnceLock<BasisTable>; MAX_DIM + 1] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    TABLES[n].get_or_init(|| BasisTable::build(n))
}

fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// An element of `R_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawElement", into = "RawElement")]
pub struct CliffordElement {
    n: usize,
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawElement {
    n: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<RawElement> for CliffordElement {
    type Error = Error;
    fn try_from(raw: RawElement) -> Result<Self> {
        CliffordElement::from_coeffs(raw.n, raw.coeffs)
    }
}

impl From<CliffordElement> for RawElement {
    fn from(e: CliffordElement) -> Self {
        RawElement {
            n: e.n,
            coeffs: e.coeffs,
        }
    }
}

impl CliffordElement {
    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if coeffs.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "R_{n} needs {} coefficients, got {}",
                1 << n,
                coeffs.len()
            )));
        }
        Ok(Self { n, coeffs })
    }

    pub fn zero(n: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&n),
            "unsupported algebra dimension {n}"
        );
        Self {
            n,
            coeffs: vec![0.0; 1 << n],
        }
    }

    pub fn scalar(n: usize, x: f64) -> Self {
        let mut e = Self::zero(n);
        e.coeffs[0] = x;
        e
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    /// The basis blade `e_{i_1} ... e_{i_k}` for an arbitrary generator word
    /// (repeats and any order allowed; the sign is reduced).
    pub fn blade(n: usize, word: &[u8]) -> Result<Self> {
        check_dim(n)?;
        if let Some(&bad) = word.iter().find(|&&i| i == 0 || i as usize > n) {
            return Err(Error::InvalidParameter(format!(
                "generator e_{bad} does not exist in R_{n}"
            )));
        }
        let (canon, sign) = reduce_word(word, &[]);
        let mask = canon.iter().fold(0u32, |m, &i| m | (1 << (i - 1)));
        let mut e = Self::zero(n);
        e.coeffs[table(n).index_of_mask[mask as usize]] = sign;
        Ok(e)
    }

    /// Generator `e_i` (1-based).
    pub fn generator(n: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::InvalidParameter(format!(
                "generator e_{i} does not exist in R_{n}"
            )));
        }
        Self::blade(n, &[i as u8])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    /// Sorted generator indices of each basis position.
    pub fn basis_labels(n: usize) -> &'static [Vec<u8>] {
        &table(n).blades
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "R_{} times R_{}",
                self.n, other.n
            )));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let t = table(self.n);
        let dim = t.dim();
        let mut out = vec![0.0; dim];
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let row = &t.prod[a * dim..(a + 1) * dim];
            for (b, &y) in other.coeffs.iter().enumerate() {
                if y == 0.0 {
                    continue;
                }
                let (c, sign) = row[b];
                out[c] += sign * x * y;
            }
        }
        Self {
            n: self.n,
            coeffs: out,
        }
    }

    /// Conjugation: the coefficient of `e_A` is multiplied by
    /// `(-1)^{|A|(|A|+1)/2}`.
    pub fn conj(&self) -> Self {
        let t = table(self.n);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&t.blades)
            .map(|(&c, blade)| {
                let k = blade.len();
                if (k * (k + 1) / 2) % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .collect();
        Self { n: self.n, coeffs }
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn abs(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, x: f64) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * x).collect(),
        }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs[1..].iter().all(|c| c.abs() <= tol)
    }

    pub fn is_paravector(&self, tol: f64) -> bool {
        self.coeffs[self.n + 1..].iter().all(|c| c.abs() <= tol)
    }

    /// Matrix of `x -> self * x` on the coefficient space.
    pub fn left_matrix(&self) -> DMatrix<f64> {
        let t = table(self.n);
        let dim = t.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for b in 0..dim {
                let (c, sign) = t.prod[a * dim + b];
                m[(c, b)] += sign * x;
            }
        }
        m
    }

    /// Matrix of `x -> x * self` on the coefficient space.
    pub fn right_matrix(&self) -> DMatrix<f64> {
        let t = table(self.n);
        let dim = t.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (b, &y) in self.coeffs.iter().enumerate() {
            if y == 0.0 {
                continue;
            }
            for a in 0..dim {
                let (c, sign) = t.prod[a * dim + b];
                m[(c, a)] += sign * y;
            }
        }
        m
    }

    /// Two-sided inverse. Paravectors use `conj(s)/|s|^2`; general elements
    /// solve `self * x = 1` through the left-regular matrix.
    pub fn inverse(&self) -> Result<Self> {
        let nsq = self.norm_sq();
        if self.is_paravector(0.0) {
            if nsq == 0.0 {
                return Err(Error::SingularOperator { rcond: 0.0 });
            }
            return Ok(self.conj().scale(1.0 / nsq));
        }
        let m = self.left_matrix();
        let rcond = crate::linalg::reciprocal_condition(&m);
        if rcond <= 1e-12 {
            return Err(Error::SingularOperator { rcond });
        }
        let mut rhs = nalgebra::DVector::zeros(m.nrows());
        rhs[0] = 1.0;
        let x = m
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularOperator { rcond })?;
        Ok(Self {
            n: self.n,
            coeffs: x.iter().copied().collect(),
        })
    }

    /// Parses literals like `2`, `e2`, `1+2e1-0.5e12`, `-e123`.
    ///
    /// A term is an optional number followed by an optional blade `e<digits>`
    /// where each digit is one generator index.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        check_dim(n)?;
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty Clifford literal".into()));
        }
        let mut out = Self::zero(n);
        let bytes = s.as_bytes();
        let mut pos = 0;
        while pos < bytes.len() {
            let mut sign = 1.0;
            if bytes[pos] == b'+' || bytes[pos] == b'-' {
                if bytes[pos] == b'-' {
                    sign = -1.0;
                }
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len()
                && (bytes[pos].is_ascii_digit()
                    || bytes[pos] == b'.'
                    || ((bytes[pos] == b'E')
                        || (bytes[pos] == b'-' || bytes[pos] == b'+')
                            && pos > start
                            && bytes[pos - 1] == b'E'))
            {
                pos += 1;
            }
            let number = if pos > start {
                s[start..pos]
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number in '{text}': {e}")))?
            } else {
                1.0
            };
            let mut word = Vec::new();
            if pos < bytes.len() && bytes[pos] == b'e' {
                pos += 1;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    word.push(bytes[pos] - b'0');
                    pos += 1;
                }
                if word.is_empty() {
                    return Err(Error::Parse(format!("blade without indices in '{text}'")));
                }
            } else if pos == start {
                return Err(Error::Parse(format!("unexpected character in '{text}'")));
            }
            let blade = Self::blade(n, &word)?;
            out = &out + &blade.scale(sign * number);
            if pos < bytes.len() && bytes[pos] != b'+' && bytes[pos] != b'-' {
                return Err(Error::Parse(format!("unexpected character in '{text}'")));
            }
        }
        Ok(out)
    }
}

impl fmt::Display for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = table(self.n);
        let mut first = true;
        for (c, blade) in self.coeffs.iter().zip(&t.blades) {
            if *c == 0.0 {
                continue;
            }
            let label: String = blade.iter().map(|i| i.to_string()).collect();
            let sep = if first {
                if *c < 0.0 {
                    "-"
                } else {
                    ""
                }
            } else if *c < 0.0 {
                " - "
            } else {
                " + "
            };
            if blade.is_empty() {
                write!(f, "{sep}{}", c.abs())?;
            } else {
                write!(f, "{sep}{}e{label}", c.abs())?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for &CliffordElement {
    type Output = CliffordElement;
    fn add(self, rhs: &CliffordElement) -> CliffordElement {
        assert_eq!(self.n, rhs.n, "algebra dimension mismatch");
        CliffordElement {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl AddAssign<&CliffordElement> for CliffordElement {
    fn add_assign(&mut self, rhs: &CliffordElement) {
        assert_eq!(self.n, rhs.n, "algebra dimension mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Sub for &CliffordElement {
    type Output = CliffordElement;
    fn sub(self, rhs: &CliffordElement) -> CliffordElement {
        assert_eq!(self.n, rhs.n, "algebra dimension mismatch");
        CliffordElement {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &CliffordElement {
    type Output = CliffordElement;
    fn neg(self) -> CliffordElement {
        self.scale(-1.0)
    }
}

/// Panics on mismatched dimensions; use [`CliffordElement::mul`] for a
/// checked product.
impl Mul for &CliffordElement {
    type Output = CliffordElement;
    fn mul(self, rhs: &CliffordElement) -> CliffordElement {
        assert_eq!(self.n, rhs.n, "algebra dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

/// A paravector `s0 + s1 e1 + ... + sn en`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Paravector {
    pub n: usize,
    pub s0: f64,
    pub v: Vec<f64>,
}

impl Paravector {
    pub fn new(s0: f64, v: Vec<f64>) -> Result<Self> {
        check_dim(v.len())?;
        Ok(Self { n: v.len(), s0, v })
    }

    pub fn real(n: usize, x: f64) -> Self {
        Self {
            n,
            s0: x,
            v: vec![0.0; n],
        }
    }

    /// `x + J y`.
    pub fn on_slice(x: f64, y: f64, j: &ImaginaryUnit) -> Self {
        Self {
            n: j.n(),
            s0: x,
            v: j.components().iter().map(|c| c * y).collect(),
        }
    }

    pub fn from_element(e: &CliffordElement, tol: f64) -> Result<Self> {
        if !e.is_paravector(tol) {
            return Err(Error::InvalidParameter(format!("{e} is not a paravector")));
        }
        Ok(Self {
            n: e.n(),
            s0: e.coeffs()[0],
            v: e.coeffs()[1..=e.n()].to_vec(),
        })
    }

    pub fn to_element(&self) -> CliffordElement {
        let mut e = CliffordElement::zero(self.n);
        e.coeffs_mut()[0] = self.s0;
        e.coeffs_mut()[1..=self.n].copy_from_slice(&self.v);
        e
    }

    pub fn conj(&self) -> Self {
        Self {
            n: self.n,
            s0: self.s0,
            v: self.v.iter().map(|x| -x).collect(),
        }
    }

    pub fn abs(&self) -> f64 {
        (self.s0 * self.s0 + self.imag_abs().powi(2)).sqrt()
    }

    /// `|Im(s)|`.
    pub fn imag_abs(&self) -> f64 {
        self.v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Splits `s = x + J y` with `y = |Im(s)| >= 0`. For real `s` the unit
    /// is `None`.
    pub fn slice_decomposition(&self) -> (f64, f64, Option<ImaginaryUnit>) {
        let y = self.imag_abs();
        if y == 0.0 {
            return (self.s0, 0.0, None);
        }
        let j = ImaginaryUnit {
            j: self.v.iter().map(|c| c / y).collect(),
        };
        (self.s0, y, Some(j))
    }

    pub fn sphere(&self) -> SpectralSphere {
        SpectralSphere {
            center: self.s0,
            radius: self.imag_abs(),
        }
    }

    /// Angular distance from the real axis, in `[0, pi/2]`; zero for `0`.
    pub fn phase(&self) -> f64 {
        self.sphere().phase()
    }
}

/// A unit imaginary paravector `J` (so `J^2 = -1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ImaginaryUnit {
    j: Vec<f64>,
}

impl TryFrom<Vec<f64>> for ImaginaryUnit {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ImaginaryUnit::new(v)
    }
}

impl From<ImaginaryUnit> for Vec<f64> {
    fn from(j: ImaginaryUnit) -> Self {
        j.j
    }
}

impl ImaginaryUnit {
    /// Requires `|j| = 1` to within `1e-12`.
    pub fn new(j: Vec<f64>) -> Result<Self> {
        check_dim(j.len())?;
        let norm = j.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "imaginary unit must have modulus 1, got {norm}"
            )));
        }
        Ok(Self { j })
    }

    /// Normalizes any nonzero vector.
    pub fn normalized(v: Vec<f64>) -> Result<Self> {
        check_dim(v.len())?;
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("zero imaginary direction".into()));
        }
        Ok(Self {
            j: v.into_iter().map(|x| x / norm).collect(),
        })
    }

    /// `e_i` (1-based).
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        check_dim(n)?;
        if i == 0 || i > n {
            return Err(Error::InvalidParameter(format!("e_{i} not in R_{n}")));
        }
        let mut j = vec![0.0; n];
        j[i - 1] = 1.0;
        Ok(Self { j })
    }

    pub fn n(&self) -> usize {
        self.j.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.j
    }

    pub fn negate(&self) -> Self {
        Self {
            j: self.j.iter().map(|x| -x).collect(),
        }
    }

    pub fn to_element(&self) -> CliffordElement {
        Paravector::on_slice(0.0, 1.0, self).to_element()
    }

    /// The element `x + J y` of `C_J`.
    pub fn complex(&self, x: f64, y: f64) -> CliffordElement {
        Paravector::on_slice(x, y, self).to_element()
    }
}

/// The sphere `[s] = { s0 + J |Im s| : J in S }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSphere {
    pub center: f64,
    pub radius: f64,
}

impl SpectralSphere {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !center.is_finite() || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sphere needs finite center and radius >= 0, got ({center}, {radius})"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn sample(&self, j: &ImaginaryUnit) -> Paravector {
        Paravector::on_slice(self.center, self.radius, j)
    }

    /// Angle between the sphere's points and the real axis, in `[0, pi/2]`.
    pub fn phase(&self) -> f64 {
        if self.center == 0.0 && self.radius == 0.0 {
            0.0
        } else {
            self.radius.atan2(self.center.abs())
        }
    }

    pub fn is_origin(&self) -> bool {
        self.center == 0.0 && self.radius == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(n: usize, s: &str) -> CliffordElement {
        CliffordElement::parse(n, s).unwrap()
    }

    fn close(a: &CliffordElement, b: &CliffordElement) -> bool {
        (a - b).abs() < 1e-14
    }

    #[test]
    fn basis_order_is_grade_then_lex() {
        let labels = CliffordElement::basis_labels(3);
        let expect: Vec<Vec<u8>> = vec![
            vec![],
            vec![1],
            vec![2],
            vec![3],
            vec![1, 2],
            vec![1, 3],
            vec![2, 3],
            vec![1, 2, 3],
        ];
        assert_eq!(labels, expect.as_slice());
    }

    #[test]
    fn generator_products() {
        assert!(close(&(&el(2, "e1") * &el(2, "e2")), &el(2, "e12")));
        assert!(close(&(&el(2, "1+e1") * &el(2, "1-e1")), &el(2, "2")));
        assert!(close(&(&el(2, "e12") * &el(2, "e12")), &el(2, "-1")));
        assert!(close(&(&el(3, "e2") * &el(3, "e1")), &el(3, "-e12")));
        assert!(close(&(&el(3, "e13") * &el(3, "e2")), &el(3, "-e123")));
    }

    #[test]
    fn conjugation_signs() {
        assert_eq!(el(1, "1+e1").conj(), el(1, "1-e1"));
        assert_eq!(el(2, "e12").conj(), el(2, "-e12"));
        assert_eq!(el(2, "5").conj(), el(2, "5"));
        // grade 3: (-1)^{6} = +1
        assert_eq!(el(3, "e123").conj(), el(3, "e123"));
    }

    #[test]
    fn modulus() {
        assert!((el(2, "1+e1+e2").abs() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(CliffordElement::zero(2).abs(), 0.0);
        assert_eq!(el(2, "e12").abs(), 1.0);
    }

    #[test]
    fn mismatched_dimensions_error() {
        let r = el(1, "e1").mul(&el(2, "e1"));
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn rejects_bad_coefficient_count() {
        assert!(CliffordElement::from_coeffs(2, vec![0.0; 3]).is_err());
        assert!(CliffordElement::from_coeffs(6, vec![0.0; 64]).is_err());
    }

    #[test]
    fn slice_points() {
        let e1 = ImaginaryUnit::basis(2, 1).unwrap();
        assert_eq!(
            Paravector::on_slice(2.0, 1.0, &e1).to_element(),
            el(2, "2+e1")
        );
        assert_eq!(Paravector::on_slice(0.0, 0.0, &e1).to_element(), el(2, "0"));
        let j = ImaginaryUnit::normalized(vec![1.0, 1.0]).unwrap();
        let s = Paravector::on_slice(1.0, 2.0, &j).to_element();
        let r = 2f64.sqrt();
        assert!(
            (&s - &CliffordElement::from_coeffs(2, vec![1.0, r, r, 0.0]).unwrap()).abs() < 1e-15
        );
    }

    #[test]
    fn spheres() {
        let s = Paravector::from_element(&el(2, "2+e1"), 0.0).unwrap();
        assert_eq!(s.sphere(), SpectralSphere::new(2.0, 1.0).unwrap());
        let e2 = ImaginaryUnit::basis(2, 2).unwrap();
        assert_eq!(
            SpectralSphere::new(2.0, 1.0)
                .unwrap()
                .sample(&e2)
                .to_element(),
            el(2, "2+e2")
        );
        assert_eq!(
            Paravector::real(2, 3.0).sphere(),
            SpectralSphere::new(3.0, 0.0).unwrap()
        );
    }

    #[test]
    fn imaginary_unit_squares_to_minus_one() {
        let j = ImaginaryUnit::normalized(vec![0.3, -1.0, 2.0]).unwrap();
        let je = j.to_element();
        assert!(close(&(&je * &je), &CliffordElement::scalar(3, -1.0)));
        assert!(ImaginaryUnit::new(vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn inverse_of_general_element() {
        let a = el(3, "1+0.5e12-0.25e123+2e3");
        let inv = a.inverse().unwrap();
        assert!((&(&a * &inv) - &CliffordElement::one(3)).abs() < 1e-13);
        assert!((&(&inv * &a) - &CliffordElement::one(3)).abs() < 1e-13);
        // 1 + e123 is a zero divisor in R_3: (e123)^2 = 1.
        assert!(el(3, "1+e123").inverse().is_err());
    }

    #[test]
    fn parse_literals() {
        assert_eq!(el(2, "-e12").coeffs(), &[0.0, 0.0, 0.0, -1.0]);
        assert_eq!(el(2, "2.5").coeffs(), &[2.5, 0.0, 0.0, 0.0]);
        assert_eq!(el(2, "e21").coeffs(), &[0.0, 0.0, 0.0, -1.0]);
        assert_eq!(el(1, "1E-3").coeffs(), &[1e-3, 0.0]);
        assert!(CliffordElement::parse(2, "e3").is_err());
        assert!(CliffordElement::parse(2, "x").is_err());
    }

    #[test]
    fn serde_shape() {
        let e = el(1, "2-e1");
        let js = serde_json::to_string(&e).unwrap();
        assert_eq!(js, r#"{"n":1,"coeffs":[2.0,-1.0]}"#);
        let back: CliffordElement = serde_json::from_str(&js).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<CliffordElement>(r#"{"n":2,"coeffs":[1]}"#).is_err());
    }
}
