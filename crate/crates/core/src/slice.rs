//! Slice hyperholomorphic functions on double sectors.
//!
//! A function is given by its stem `(x, y) -> (f0, f1)` and evaluated on
//! `s = x + J y` as `f0 + J f1` (left, intrinsic) or `f0 + f1 J` (right).
//! Flavor and growth are declared by the constructor; [`SliceFunction::validate`]
//! samples the compatibility and Cauchy-Riemann conditions.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordElement, ImaginaryUnit, Paravector, SpectralSphere};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Left,
    Right,
    Intrinsic,
}

impl Flavor {
    /// Usable with the left calculus (left or intrinsic).
    pub fn is_left(self) -> bool {
        matches!(self, Flavor::Left | Flavor::Intrinsic)
    }

    pub fn is_right(self) -> bool {
        matches!(self, Flavor::Right | Flavor::Intrinsic)
    }
}

/// Which side scalars act on: polynomial coefficients, calculus variant,
/// scaling side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(Error::Parse(format!(
                "side must be left|right, got '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthClass {
    /// Bounded with `∫ |f(r e^{Jφ})| dr/r < ∞` on every ray of the sector.
    Decaying,
    /// `|f(s)| <= C (|s|^α + |s|^{-α})`.
    PolyBounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub class: GrowthClass,
    pub alpha: f64,
}

impl Growth {
    pub fn decaying() -> Self {
        Self {
            class: GrowthClass::Decaying,
            alpha: 0.0,
        }
    }

    pub fn poly(alpha: f64) -> Self {
        Self {
            class: GrowthClass::PolyBounded,
            alpha,
        }
    }
}

/// Order of a product with an intrinsic factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductOrder {
    /// `f(s) g(s)`, intrinsic factor on the right (keeps right functions right).
    FG,
    /// `g(s) f(s)`, intrinsic factor on the left (keeps left functions left).
    GF,
}

/// Exact form `p(s) q(s)^{-1}` (right numerator) or `q(s)^{-1} p(s)` (left
/// numerator) with Clifford numerator coefficients and a real denominator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalForm {
    pub n: usize,
    /// `num[k]` multiplies `s^k`.
    pub num: Vec<CliffordElement>,
    /// `Right` means `sum num[k] s^k`, `Left` means `sum s^k num[k]`.
    pub num_side: Side,
    pub den: Vec<f64>,
}

fn trim_real(mut v: Vec<f64>) -> Vec<f64> {
    while v.len() > 1 && *v.last().unwrap() == 0.0 {
        v.pop();
    }
    v
}

fn trim_clifford(mut v: Vec<CliffordElement>) -> Vec<CliffordElement> {
    while v.len() > 1 && v.last().unwrap().abs() == 0.0 {
        v.pop();
    }
    v
}

fn real_conv(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Lowest index with a nonzero coefficient.
fn order_at_zero<T>(v: &[T], is_zero: impl Fn(&T) -> bool) -> usize {
    v.iter().position(|c| !is_zero(c)).unwrap_or(0)
}

/// Powers `(x + iy)^k` for `k = 0..=deg` as `(re, im)`.
fn complex_powers(x: f64, y: f64, deg: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(deg + 1);
    let (mut a, mut b) = (1.0, 0.0);
    out.push((a, b));
    for _ in 0..deg {
        let (na, nb) = (a * x - b * y, a * y + b * x);
        a = na;
        b = nb;
        out.push((a, b));
    }
    out
}

impl RationalForm {
    pub fn polynomial(coeffs: Vec<CliffordElement>, side: Side) -> Result<Self> {
        let n = coeffs.first().map(|c| c.n()).ok_or_else(|| {
            Error::InvalidParameter("polynomial needs at least one coefficient".into())
        })?;
        if coeffs.iter().any(|c| c.n() != n) {
            return Err(Error::DimensionMismatch(
                "coefficients from different algebras".into(),
            ));
        }
        Ok(Self {
            n,
            num: trim_clifford(coeffs),
            num_side: side,
            den: vec![1.0],
        })
    }

    pub fn num_degree(&self) -> usize {
        self.num.len() - 1
    }

    pub fn den_degree(&self) -> usize {
        self.den.len() - 1
    }

    pub fn num_is_real(&self) -> bool {
        self.num.iter().all(|c| c.is_real(0.0))
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.len() == 1 && self.den[0] == 1.0
    }

    pub fn flavor(&self) -> Flavor {
        if self.num_is_real() {
            Flavor::Intrinsic
        } else {
            match self.num_side {
                Side::Right => Flavor::Right,
                Side::Left => Flavor::Left,
            }
        }
    }

    /// Growth from degrees and orders at zero: `α = max(0, deg p - deg q,
    /// ord q - ord p)`; decaying when both ends vanish.
    pub fn growth(&self) -> Growth {
        if self.num.iter().all(|c| c.abs() == 0.0) {
            return Growth::decaying();
        }
        let dp = self.num_degree() as i64;
        let dq = self.den_degree() as i64;
        let op = order_at_zero(&self.num, |c| c.abs() == 0.0) as i64;
        let oq = order_at_zero(&self.den, |c| *c == 0.0) as i64;
        if dp < dq && op > oq {
            return Growth::decaying();
        }
        Growth::poly((dp - dq).max(oq - op).max(0) as f64)
    }

    /// Stem values `(f0, f1)` at `(x, y)` by complex arithmetic on the
    /// slice.
    pub fn stem(&self, x: f64, y: f64) -> (CliffordElement, CliffordElement) {
        let deg = self.num_degree().max(self.den_degree());
        let pw = complex_powers(x, y, deg);
        let mut n0 = CliffordElement::zero(self.n);
        let mut n1 = CliffordElement::zero(self.n);
        for (k, c) in self.num.iter().enumerate() {
            n0 += &c.scale(pw[k].0);
            n1 += &c.scale(pw[k].1);
        }
        let (mut qa, mut qb) = (0.0, 0.0);
        for (k, c) in self.den.iter().enumerate() {
            qa += c * pw[k].0;
            qb += c * pw[k].1;
        }
        let q2 = qa * qa + qb * qb;
        let f0 = &n0.scale(qa / q2) + &n1.scale(qb / q2);
        let f1 = &n1.scale(qa / q2) - &n0.scale(qb / q2);
        (f0, f1)
    }

    /// Direct Clifford evaluation: powers of `s`, Clifford products and the
    /// inverse of the paravector `q(s)`.
    pub fn eval_exact(&self, s: &Paravector) -> Result<CliffordElement> {
        let se = s.to_element();
        let deg = self.num_degree().max(self.den_degree());
        let mut powers = vec![CliffordElement::one(self.n)];
        for k in 1..=deg {
            powers.push(powers[k - 1].mul(&se)?);
        }
        let mut p = CliffordElement::zero(self.n);
        for (k, c) in self.num.iter().enumerate() {
            p += &match self.num_side {
                Side::Right => c.mul(&powers[k])?,
                Side::Left => powers[k].mul(c)?,
            };
        }
        let mut q = CliffordElement::zero(self.n);
        for (k, c) in self.den.iter().enumerate() {
            q += &powers[k].scale(*c);
        }
        let qinv = q.inverse()?;
        match self.num_side {
            Side::Right => p.mul(&qinv),
            Side::Left => qinv.mul(&p),
        }
    }

    /// Product with a form whose numerator is real.
    fn mul_with_intrinsic(&self, g: &RationalForm, order: ProductOrder) -> RationalForm {
        let mut num = vec![CliffordElement::zero(self.n); self.num.len() + g.num.len() - 1];
        for (i, a) in self.num.iter().enumerate() {
            for (j, b) in g.num.iter().enumerate() {
                num[i + j] += &a.scale(b.scalar_part());
            }
        }
        let side = if self.num_is_real() {
            match order {
                ProductOrder::FG => Side::Right,
                ProductOrder::GF => Side::Left,
            }
        } else {
            self.num_side
        };
        RationalForm {
            n: self.n,
            num: trim_clifford(num),
            num_side: side,
            den: trim_real(real_conv(&self.den, &g.den)),
        }
    }

    fn add(&self, g: &RationalForm) -> Option<RationalForm> {
        let side = match (self.num_is_real(), g.num_is_real()) {
            (true, _) => g.num_side,
            (false, true) => self.num_side,
            (false, false) if self.num_side == g.num_side => self.num_side,
            _ => return None,
        };
        let a = self.mul_real_poly(&g.den);
        let b = g.mul_real_poly(&self.den);
        let len = a.len().max(b.len());
        let mut num = vec![CliffordElement::zero(self.n); len];
        for (k, c) in a.iter().chain(b.iter()).enumerate() {
            let idx = if k < a.len() { k } else { k - a.len() };
            num[idx] += c;
        }
        let den = if self.den == g.den {
            // keep the common denominator unsquared
            return Some(RationalForm {
                n: self.n,
                num: trim_clifford(
                    (0..self.num.len().max(g.num.len()))
                        .map(|k| {
                            let z = CliffordElement::zero(self.n);
                            self.num.get(k).unwrap_or(&z) + g.num.get(k).unwrap_or(&z)
                        })
                        .collect(),
                ),
                num_side: side,
                den: self.den.clone(),
            });
        } else {
            real_conv(&self.den, &g.den)
        };
        Some(RationalForm {
            n: self.n,
            num: trim_clifford(num),
            num_side: side,
            den: trim_real(den),
        })
    }

    fn mul_real_poly(&self, r: &[f64]) -> Vec<CliffordElement> {
        let mut out = vec![CliffordElement::zero(self.n); self.num.len() + r.len() - 1];
        for (i, a) in self.num.iter().enumerate() {
            for (j, b) in r.iter().enumerate() {
                out[i + j] += &a.scale(*b);
            }
        }
        out
    }

    fn scaled(&self, a: &CliffordElement, side: Side) -> Result<RationalForm> {
        let num = self
            .num
            .iter()
            .map(|c| match side {
                Side::Left => a.mul(c),
                Side::Right => c.mul(a),
            })
            .collect::<Result<Vec<_>>>()?;
        let num_side = if self.num_is_real() {
            // a real numerator absorbs `a` on either side; the product
            // `a f` is right, `f a` is left
            match side {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            }
        } else {
            self.num_side
        };
        Ok(RationalForm {
            n: self.n,
            num: trim_clifford(num),
            num_side,
            den: self.den.clone(),
        })
    }
}

pub type StemFn = dyn Fn(f64, f64) -> (CliffordElement, CliffordElement) + Send + Sync;

/// A slice hyperholomorphic function with declared flavor and growth.
#[derive(Clone)]
pub struct SliceFunction {
    n: usize,
    stem: Arc<StemFn>,
    flavor: Flavor,
    growth: Growth,
    symbolic: Option<RationalForm>,
    /// `None` for entire functions; otherwise the open double sector `D_θ`.
    domain_angle: Option<f64>,
    label: String,
}

impl fmt::Debug for SliceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SliceFunction")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("flavor", &self.flavor)
            .field("growth", &self.growth)
            .field("domain_angle", &self.domain_angle)
            .field("symbolic", &self.symbolic)
            .finish()
    }
}

impl SliceFunction {
    /// A user function from its stem. The stem must be pure.
    pub fn from_stem(
        n: usize,
        stem: impl Fn(f64, f64) -> (CliffordElement, CliffordElement) + Send + Sync + 'static,
        flavor: Flavor,
        growth: Growth,
        domain_angle: Option<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if let Some(t) = domain_angle {
            if !(t > 0.0 && t <= FRAC_PI_2) {
                return Err(Error::InvalidParameter(format!(
                    "domain angle {t} not in (0, pi/2]"
                )));
            }
        }
        if !(growth.alpha >= 0.0) {
            return Err(Error::InvalidParameter(
                "growth exponent must be >= 0".into(),
            ));
        }
        Ok(Self {
            n,
            stem: Arc::new(stem),
            flavor,
            growth,
            symbolic: None,
            domain_angle,
            label: label.into(),
        })
    }

    fn from_rational(form: RationalForm, domain_angle: Option<f64>, label: String) -> Self {
        let flavor = form.flavor();
        let growth = form.growth();
        let f = form.clone();
        Self {
            n: form.n,
            stem: Arc::new(move |x, y| f.stem(x, y)),
            flavor,
            growth,
            symbolic: Some(form),
            domain_angle,
            label,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn symbolic(&self) -> Option<&RationalForm> {
        self.symbolic.as_ref()
    }

    pub fn domain_angle(&self) -> Option<f64> {
        self.domain_angle
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_decaying(&self) -> bool {
        self.growth.class == GrowthClass::Decaying
    }

    pub fn stem(&self, x: f64, y: f64) -> (CliffordElement, CliffordElement) {
        (self.stem)(x, y)
    }

    fn check_domain(&self, s: &Paravector) -> Result<()> {
        if let Some(theta) = self.domain_angle {
            let r = s.abs();
            if r == 0.0 || s.phase() >= theta {
                return Err(Error::DomainViolation(format!(
                    "|s| = {r:.3e}, phase {:.6} outside the double sector of angle {theta:.6}",
                    s.phase()
                )));
            }
        }
        Ok(())
    }

    /// `f(s)` with `s = x + J y`, `y = |Im s|`.
    pub fn eval(&self, s: &Paravector) -> Result<CliffordElement> {
        if s.n != self.n {
            return Err(Error::DimensionMismatch(format!(
                "function on R_{} evaluated at a paravector of R_{}",
                self.n, s.n
            )));
        }
        self.check_domain(s)?;
        let (x, y, j) = s.slice_decomposition();
        match j {
            None => Ok(self.stem(x, 0.0).0),
            Some(j) => Ok(self.combine(x, y, &j)),
        }
    }

    /// `f(x + J y)` for a given unit, allowing negative `y`; no domain check.
    pub fn eval_on_slice(&self, x: f64, y: f64, j: &ImaginaryUnit) -> CliffordElement {
        self.combine(x, y, j)
    }

    fn combine(&self, x: f64, y: f64, j: &ImaginaryUnit) -> CliffordElement {
        let (f0, f1) = self.stem(x, y);
        let je = j.to_element();
        match self.flavor {
            Flavor::Left | Flavor::Intrinsic => &f0 + &(&je * &f1),
            Flavor::Right => &f0 + &(&f1 * &je),
        }
    }

    /// Pointwise product with an intrinsic `g`.
    pub fn mul_intrinsic(&self, g: &SliceFunction, order: ProductOrder) -> Result<Self> {
        if self.n != g.n {
            return Err(Error::DimensionMismatch(
                "functions on different algebras".into(),
            ));
        }
        if g.flavor != Flavor::Intrinsic {
            return Err(Error::FlavorMismatch(format!(
                "second factor '{}' must be intrinsic",
                g.label
            )));
        }
        let flavor = match (self.flavor, order) {
            (Flavor::Intrinsic, _) => Flavor::Intrinsic,
            (Flavor::Right, ProductOrder::FG) => Flavor::Right,
            (Flavor::Left, ProductOrder::GF) => Flavor::Left,
            (fl, ord) => {
                return Err(Error::FlavorMismatch(format!(
                    "{fl:?} function with intrinsic factor in order {ord:?}"
                )))
            }
        };
        let label = match order {
            ProductOrder::FG => format!("({})*({})", self.label, g.label),
            ProductOrder::GF => format!("({})*({})", g.label, self.label),
        };
        let domain = min_angle(self.domain_angle, g.domain_angle);
        if let (Some(a), Some(b)) = (&self.symbolic, &g.symbolic) {
            let mut out = Self::from_rational(a.mul_with_intrinsic(b, order), domain, label);
            if self.flavor == Flavor::Intrinsic && out.flavor != Flavor::Intrinsic {
                out.flavor = Flavor::Intrinsic;
            }
            return Ok(out);
        }
        let (fa, ga) = (self.stem.clone(), g.stem.clone());
        let stem = move |x: f64, y: f64| {
            let (f0, f1) = fa(x, y);
            let (g0, g1) = ga(x, y);
            let (g0, g1) = (g0.scalar_part(), g1.scalar_part());
            (&f0.scale(g0) - &f1.scale(g1), &f0.scale(g1) + &f1.scale(g0))
        };
        let growth = product_growth(self.growth, g.growth);
        Ok(Self {
            n: self.n,
            stem: Arc::new(stem),
            flavor,
            growth,
            symbolic: None,
            domain_angle: domain,
            label,
        })
    }

    /// Pointwise sum; intrinsic combines with either flavor.
    pub fn add(&self, g: &SliceFunction) -> Result<Self> {
        if self.n != g.n {
            return Err(Error::DimensionMismatch(
                "functions on different algebras".into(),
            ));
        }
        let flavor = match (self.flavor, g.flavor) {
            (a, b) if a == b => a,
            (Flavor::Intrinsic, b) => b,
            (a, Flavor::Intrinsic) => a,
            (a, b) => {
                return Err(Error::FlavorMismatch(format!(
                    "cannot add {a:?} and {b:?} functions"
                )))
            }
        };
        let label = format!("{} + {}", self.label, g.label);
        let domain = min_angle(self.domain_angle, g.domain_angle);
        if let (Some(a), Some(b)) = (&self.symbolic, &g.symbolic) {
            if let Some(sum) = a.add(b) {
                let mut out = Self::from_rational(sum, domain, label);
                out.flavor = flavor;
                return Ok(out);
            }
        }
        let (fa, ga) = (self.stem.clone(), g.stem.clone());
        let stem = move |x: f64, y: f64| {
            let (f0, f1) = fa(x, y);
            let (g0, g1) = ga(x, y);
            (&f0 + &g0, &f1 + &g1)
        };
        let growth = match (self.growth.class, g.growth.class) {
            (GrowthClass::Decaying, GrowthClass::Decaying) => Growth::decaying(),
            _ => Growth::poly(self.growth.alpha.max(g.growth.alpha)),
        };
        Ok(Self {
            n: self.n,
            stem: Arc::new(stem),
            flavor,
            growth,
            symbolic: None,
            domain_angle: domain,
            label,
        })
    }

    /// `a f` (`Side::Left`, for right or intrinsic `f`) or `f a`
    /// (`Side::Right`, for left or intrinsic `f`).
    pub fn scale(&self, a: &CliffordElement, side: Side) -> Result<Self> {
        if a.n() != self.n {
            return Err(Error::DimensionMismatch(
                "scalar from a different algebra".into(),
            ));
        }
        let real = a.is_real(0.0);
        let flavor = match (self.flavor, side) {
            (Flavor::Intrinsic, _) if real => Flavor::Intrinsic,
            (Flavor::Intrinsic, Side::Left) | (Flavor::Right, Side::Left) => Flavor::Right,
            (Flavor::Intrinsic, Side::Right) | (Flavor::Left, Side::Right) => Flavor::Left,
            (fl, sd) => {
                return Err(Error::FlavorMismatch(format!(
                    "{fl:?} function scaled from the {sd:?}"
                )))
            }
        };
        let label = match side {
            Side::Left => format!("({a})*({})", self.label),
            Side::Right => format!("({})*({a})", self.label),
        };
        if let Some(form) = &self.symbolic {
            let mut out = Self::from_rational(form.scaled(a, side)?, self.domain_angle, label);
            out.flavor = flavor;
            return Ok(out);
        }
        let fa = self.stem.clone();
        let a = a.clone();
        let stem = move |x: f64, y: f64| {
            let (f0, f1) = fa(x, y);
            match side {
                Side::Left => (&a * &f0, &a * &f1),
                Side::Right => (&f0 * &a, &f1 * &a),
            }
        };
        Ok(Self {
            n: self.n,
            stem: Arc::new(stem),
            flavor,
            growth: self.growth,
            symbolic: None,
            domain_angle: self.domain_angle,
            label,
        })
    }

    /// Samples compatibility, Cauchy-Riemann and (for intrinsic functions)
    /// realness on a 20 x 20 log-polar grid of the double sector `D_θ`.
    pub fn validate(&self, theta: f64) -> ValidationReport {
        let theta = match self.domain_angle {
            Some(t) => theta.min(t * 0.999),
            None => theta,
        };
        let radii: Vec<f64> = (0..20)
            .map(|k| 10f64.powf(-2.0 + 4.0 * k as f64 / 19.0))
            .collect();
        let mut angles: Vec<f64> = (0..10)
            .map(|k| -theta + 2.0 * theta * (k as f64 + 0.5) / 10.0)
            .collect();
        let right: Vec<f64> = angles.iter().map(|a| std::f64::consts::PI + a).collect();
        angles.extend(right);

        let mut report = ValidationReport::default();
        for &r in &radii {
            for &phi in &angles {
                let (x, y) = (r * phi.cos(), r * phi.sin());
                let (f0, f1) = self.stem(x, y);
                let (g0, g1) = self.stem(x, -y);
                let scale = 1.0 + f0.abs().max(f1.abs());
                let compat = ((&f0 - &g0).abs() + (&f1 + &g1).abs()) / scale;
                report.compatibility = report.compatibility.max(compat);

                let h = 1e-5 * r.max(1e-3);
                let (fxp0, fxp1) = self.stem(x + h, y);
                let (fxm0, fxm1) = self.stem(x - h, y);
                let (fyp0, fyp1) = self.stem(x, y + h);
                let (fym0, fym1) = self.stem(x, y - h);
                let inv = 1.0 / (2.0 * h);
                let dx0 = (&fxp0 - &fxm0).scale(inv);
                let dx1 = (&fxp1 - &fxm1).scale(inv);
                let dy0 = (&fyp0 - &fym0).scale(inv);
                let dy1 = (&fyp1 - &fym1).scale(inv);
                let dscale = 1.0 + dx0.abs().max(dx1.abs()).max(dy0.abs()).max(dy1.abs());
                let cr = ((&dx0 - &dy1).abs() + (&dy0 + &dx1).abs()) / dscale;
                report.cauchy_riemann = report.cauchy_riemann.max(cr);

                if self.flavor == Flavor::Intrinsic {
                    let imag = (f0.abs() - f0.scalar_part().abs()).abs()
                        + (f1.abs() - f1.scalar_part().abs()).abs();
                    report.intrinsic = report.intrinsic.max(imag / scale);
                }
                report.max_abs = report.max_abs.max(f0.abs() + f1.abs());
            }
        }
        if self.is_decaying() {
            let mut tail = 0.0f64;
            for &phi in &angles {
                for r in [1e-8, 1e8] {
                    let (f0, f1) = self.stem(r * phi.cos(), r * phi.sin());
                    tail = tail.max(f0.abs() + f1.abs());
                }
            }
            report.decay_tail = tail / report.max_abs.max(f64::MIN_POSITIVE);
        }
        report.passed = report.compatibility <= 1e-10
            && report.cauchy_riemann <= 1e-6
            && report.intrinsic <= 1e-10
            && report.max_abs.is_finite()
            && (!self.is_decaying() || report.decay_tail <= 1e-3);
        report
    }
}

fn min_angle(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn product_growth(a: Growth, b: Growth) -> Growth {
    use GrowthClass::*;
    match (a.class, b.class) {
        (Decaying, Decaying) => Growth::decaying(),
        (Decaying, PolyBounded) if b.alpha == 0.0 => Growth::decaying(),
        (PolyBounded, Decaying) if a.alpha == 0.0 => Growth::decaying(),
        _ => Growth::poly(a.alpha + b.alpha),
    }
}

/// Worst residuals found by [`SliceFunction::validate`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub compatibility: f64,
    pub cauchy_riemann: f64,
    pub intrinsic: f64,
    pub max_abs: f64,
    pub decay_tail: f64,
    pub passed: bool,
}

/// `sum p_k s^k` (`Side::Right`, coefficients on the left of the powers) or
/// `sum s^k p_k` (`Side::Left`).
pub fn make_polynomial(coeffs: Vec<CliffordElement>, side: Side) -> Result<SliceFunction> {
    let form = RationalForm::polynomial(coeffs, side)?;
    let label = format!(
        "poly:[{}]:{}",
        form.num
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(","),
        match side {
            Side::Left => "left",
            Side::Right => "right",
        }
    );
    let deg = form.num_degree() as f64;
    let mut f = SliceFunction::from_rational(form, None, label);
    f.growth = Growth::poly(deg);
    Ok(f)
}

/// Real-coefficient polynomial.
pub fn make_real_polynomial(n: usize, coeffs: &[f64]) -> Result<SliceFunction> {
    make_polynomial(
        coeffs
            .iter()
            .map(|&c| CliffordElement::scalar(n, c))
            .collect(),
        Side::Right,
    )
}

/// Roots of a real polynomial (`coeffs[k]` multiplies `x^k`) through the
/// companion matrix.
pub fn real_poly_roots(coeffs: &[f64]) -> Result<Vec<nalgebra::Complex<f64>>> {
    let c = trim_real(coeffs.to_vec());
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[deg];
    let mut m = DMatrix::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -c[i] / lead;
    }
    crate::linalg::eigenvalues(&m, 10_000)
}

/// Zero spheres of an intrinsic polynomial.
pub fn zero_spheres(den: &[f64]) -> Result<Vec<SpectralSphere>> {
    Ok(real_poly_roots(den)?
        .into_iter()
        .map(|z| SpectralSphere {
            center: z.re,
            radius: if z.im.abs() < 1e-7 * (1.0 + z.norm()) {
                0.0
            } else {
                z.im.abs()
            },
        })
        .collect())
}

/// `p(s) q(s)^{-1}` for a polynomial `p` and an intrinsic polynomial `q`
/// with no zero sphere in the closed double sector of angle `theta`.
pub fn make_rational(p: &SliceFunction, q: &SliceFunction, theta: f64) -> Result<SliceFunction> {
    let pf = p
        .symbolic
        .as_ref()
        .filter(|f| f.is_polynomial())
        .ok_or_else(|| Error::InvalidParameter(format!("'{}' is not a polynomial", p.label)))?;
    let qf = q
        .symbolic
        .as_ref()
        .filter(|f| f.is_polynomial() && f.num_is_real())
        .ok_or_else(|| {
            Error::FlavorMismatch(format!("'{}' is not an intrinsic polynomial", q.label))
        })?;
    if p.n != q.n {
        return Err(Error::DimensionMismatch(
            "functions on different algebras".into(),
        ));
    }
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sector angle {theta} must be positive"
        )));
    }
    let den: Vec<f64> = qf.num.iter().map(|c| c.scalar_part()).collect();
    check_zeros_outside(&den, theta)?;
    let form = RationalForm {
        n: p.n,
        num: pf.num.clone(),
        num_side: pf.num_side,
        den: trim_real(den),
    };
    let label = format!("rat:({})/({})", p.label, q.label);
    Ok(SliceFunction::from_rational(
        form,
        Some(theta.min(FRAC_PI_2)),
        label,
    ))
}

pub(crate) fn check_zeros_outside(den: &[f64], theta: f64) -> Result<()> {
    for sp in zero_spheres(den)? {
        if sp.is_origin() || sp.center.hypot(sp.radius) < 1e-14 || sp.phase() <= theta {
            return Err(Error::ZeroInSector {
                center: sp.center,
                radius: sp.radius,
                theta,
            });
        }
    }
    Ok(())
}

/// `e(s) = s^m (1 + s^2)^{-m}`.
pub fn regularizer(n: usize, m: u32) -> Result<SliceFunction> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "regularizer exponent must be >= 1".into(),
        ));
    }
    let mut num = vec![CliffordElement::zero(n); m as usize + 1];
    num[m as usize] = CliffordElement::one(n);
    let mut den = vec![1.0];
    for _ in 0..m {
        den = real_conv(&den, &[1.0, 0.0, 1.0]);
    }
    let form = RationalForm {
        n,
        num,
        num_side: Side::Right,
        den,
    };
    Ok(SliceFunction::from_rational(
        form,
        Some(FRAC_PI_2),
        format!("reg:{m}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordElement as El;

    fn el(n: usize, s: &str) -> El {
        El::parse(n, s).unwrap()
    }

    fn pv(n: usize, s: &str) -> Paravector {
        Paravector::from_element(&el(n, s), 0.0).unwrap()
    }

    fn close(a: &El, b: &El, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn identity_and_square() {
        let id = make_real_polynomial(2, &[0.0, 1.0]).unwrap();
        assert_eq!(id.flavor(), Flavor::Intrinsic);
        assert!(close(
            &id.eval(&pv(2, "2+e1")).unwrap(),
            &el(2, "2+e1"),
            1e-15
        ));
        let sq = make_real_polynomial(2, &[0.0, 0.0, 1.0]).unwrap();
        assert!(close(
            &sq.eval(&pv(2, "2+e1")).unwrap(),
            &el(2, "3+4e1"),
            1e-14
        ));
    }

    #[test]
    fn regularizer_values() {
        let e1 = regularizer(2, 1).unwrap();
        assert_eq!(e1.flavor(), Flavor::Intrinsic);
        assert!(e1.is_decaying());
        assert!(close(&e1.eval(&pv(2, "2")).unwrap(), &el(2, "0.4"), 1e-15));
        let e2 = regularizer(2, 2).unwrap();
        assert!(close(&e2.eval(&pv(2, "1")).unwrap(), &el(2, "0.25"), 1e-15));
        let far = e1.eval(&Paravector::real(2, 1e6)).unwrap().scalar_part();
        assert!((far - 1e-6).abs() < 1e-17);
    }

    #[test]
    fn polynomial_examples() {
        let p = make_polynomial(vec![el(2, "0"), el(2, "e2")], Side::Right).unwrap();
        assert_eq!(p.flavor(), Flavor::Right);
        assert!(close(&p.eval(&pv(2, "2")).unwrap(), &el(2, "2e2"), 1e-15));
        let q = make_real_polynomial(2, &[1.0, 0.0, 1.0]).unwrap();
        assert!(close(&q.eval(&pv(2, "e1")).unwrap(), &El::zero(2), 1e-15));
        assert_eq!(q.growth(), Growth::poly(2.0));
    }

    #[test]
    fn rational_examples() {
        let p = make_real_polynomial(2, &[0.0, 1.0]).unwrap();
        let q = make_real_polynomial(2, &[1.0, 0.0, 1.0]).unwrap();
        let f = make_rational(&p, &q, 1.2).unwrap();
        assert!(close(&f.eval(&pv(2, "1")).unwrap(), &el(2, "0.5"), 1e-15));
        // (2+e1)/(1+(2+e1)^2) = (2+e1)/(4+4e1) = (2+e1)(4-4e1)/32
        let expect = (&el(2, "2+e1") * &el(2, "4-4e1")).scale(1.0 / 32.0);
        assert!(close(&f.eval(&pv(2, "2+e1")).unwrap(), &expect, 1e-15));
        assert!(matches!(
            make_rational(&p, &q, FRAC_PI_2),
            Err(Error::ZeroInSector { .. })
        ));
        assert!(matches!(
            make_rational(&p, &make_real_polynomial(2, &[0.0, 1.0]).unwrap(), 0.5),
            Err(Error::ZeroInSector { .. })
        ));
    }

    #[test]
    fn rational_growth_bookkeeping() {
        let p = make_polynomial(vec![el(2, "0"), el(2, "e2"), el(2, "1")], Side::Right).unwrap();
        let q = make_real_polynomial(2, &[1.0, 0.0, 2.0, 0.0, 1.0]).unwrap();
        let f = make_rational(&p, &q, 1.0).unwrap();
        assert_eq!(f.growth(), Growth::decaying());
        assert_eq!(f.flavor(), Flavor::Right);
        let q1 = make_real_polynomial(2, &[0.0, 0.0, 1.0]).unwrap();
        assert!(make_rational(&p, &q1, 1.0).is_err());
        let s3 = make_real_polynomial(2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        let g = make_rational(
            &s3,
            &make_real_polynomial(2, &[1.0, 0.0, 1.0]).unwrap(),
            1.0,
        )
        .unwrap();
        assert_eq!(g.growth(), Growth::poly(1.0));
    }

    #[test]
    fn products_sums_scaling() {
        let s = make_real_polynomial(2, &[0.0, 1.0]).unwrap();
        let e2 = regularizer(2, 2).unwrap();
        let es = s.mul_intrinsic(&e2, ProductOrder::GF).unwrap();
        let x = pv(2, "0.7+0.3e2");
        // s^3/(1+s^2)^2 evaluated by hand through Clifford arithmetic
        let se = x.to_element();
        let s2 = &se * &se;
        let s3 = &s2 * &se;
        let q = &El::one(2) + &s2;
        let qq = &q * &q;
        let expect = &s3 * &qq.inverse().unwrap();
        assert!(close(&es.eval(&x).unwrap(), &expect, 1e-14));

        let scaled = s.scale(&el(2, "e2"), Side::Left).unwrap();
        assert_eq!(scaled.flavor(), Flavor::Right);
        assert!(close(
            &scaled.eval(&pv(2, "3")).unwrap(),
            &el(2, "3e2"),
            1e-15
        ));

        let sq = make_real_polynomial(2, &[0.0, 0.0, 1.0]).unwrap();
        let sum = s.add(&sq).unwrap();
        assert!(close(
            &sum.eval(&pv(2, "2+e1")).unwrap(),
            &el(2, "5+5e1"),
            1e-14
        ));
    }

    #[test]
    fn flavor_rules() {
        let right = make_polynomial(vec![el(2, "0"), el(2, "e2")], Side::Right).unwrap();
        let left = make_polynomial(vec![el(2, "0"), el(2, "e2")], Side::Left).unwrap();
        let e = regularizer(2, 1).unwrap();
        assert!(right.mul_intrinsic(&e, ProductOrder::FG).is_ok());
        assert!(matches!(
            right.mul_intrinsic(&e, ProductOrder::GF),
            Err(Error::FlavorMismatch(_))
        ));
        assert!(left.mul_intrinsic(&e, ProductOrder::GF).is_ok());
        assert!(matches!(left.add(&right), Err(Error::FlavorMismatch(_))));
        assert!(matches!(
            e.mul_intrinsic(&right, ProductOrder::FG),
            Err(Error::FlavorMismatch(_))
        ));
        assert!(matches!(
            right.scale(&el(2, "e1"), Side::Right),
            Err(Error::FlavorMismatch(_))
        ));
    }

    #[test]
    fn left_and_right_numerators_differ() {
        let right = make_polynomial(vec![el(2, "0"), el(2, "e2")], Side::Right).unwrap();
        let left = make_polynomial(vec![el(2, "0"), el(2, "e2")], Side::Left).unwrap();
        let x = pv(2, "1+e1");
        assert!(close(&right.eval(&x).unwrap(), &el(2, "e2-e12"), 1e-15));
        assert!(close(&left.eval(&x).unwrap(), &el(2, "e2+e12"), 1e-15));
    }

    #[test]
    fn domain_violation() {
        let f = make_rational(
            &make_real_polynomial(1, &[0.0, 1.0]).unwrap(),
            &make_real_polynomial(1, &[1.0, 0.0, 1.0]).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(matches!(
            f.eval(&pv(1, "0.1+e1")),
            Err(Error::DomainViolation(_))
        ));
        assert!(matches!(
            f.eval(&Paravector::real(1, 0.0)),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn builtins_validate() {
        let n = 2;
        let fns = vec![
            regularizer(n, 1).unwrap(),
            regularizer(n, 3).unwrap(),
            make_polynomial(vec![el(n, "1"), el(n, "e12"), el(n, "e2")], Side::Right).unwrap(),
            make_polynomial(vec![el(n, "e1"), el(n, "2")], Side::Left).unwrap(),
        ];
        for f in fns {
            let r = f.validate(1.2);
            assert!(r.passed, "{}: {r:?}", f.label());
        }
    }

    #[test]
    fn validation_rejects_non_slice_stem() {
        // f0 = x*y is not even in y
        let bad = SliceFunction::from_stem(
            1,
            |x, y| (El::scalar(1, x * y), El::scalar(1, y)),
            Flavor::Intrinsic,
            Growth::poly(2.0),
            None,
            "bad",
        )
        .unwrap();
        assert!(!bad.validate(1.0).passed);
        // f(s) = conj(s) violates Cauchy-Riemann
        let conj = SliceFunction::from_stem(
            1,
            |x, y| (El::scalar(1, x), El::scalar(1, -y)),
            Flavor::Intrinsic,
            Growth::poly(1.0),
            None,
            "conj",
        )
        .unwrap();
        let r = conj.validate(1.0);
        assert!(r.compatibility < 1e-12 && r.cauchy_riemann > 0.1);
    }

    #[test]
    fn roots_of_companion() {
        let spheres = zero_spheres(&[1.0, 0.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(spheres
            .iter()
            .all(|s| s.center.abs() < 1e-6 && (s.radius - 1.0).abs() < 1e-6));
        let r = real_poly_roots(&[-6.0, 1.0, 1.0]).unwrap();
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 3.0).abs() < 1e-12 && (re[1] - 2.0).abs() < 1e-12);
    }
}
