//! S-spectrum, S-resolvents, bisectoriality certificates and the
//! ω-functional calculus on double-sector contours.
//!
//! Right multiplication of an operator by a scalar `c` acts entrywise,
//! `(T c) v = T (c v)`, which in the embedding is `T · (I_d ⊗ L(c))`; left
//! multiplication is `(I_d ⊗ L(c)) · T`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordElement, ImaginaryUnit, Paravector, SpectralSphere};
use crate::error::{Error, Result};
use crate::linalg::{left_block, singular_values, spectral_norm, RightLinearOperator};
use crate::quadrature::GaussLegendre;
use crate::slice::{Side, SliceFunction};

/// Reciprocal condition (1-norm estimate) below which `Q_s[T]` counts as
/// singular.
pub const SINGULAR_RCOND: f64 = 1e-15;

/// Largest `|t|` the contour truncation may be extended to.
pub const T_LIMIT: f64 = 40.0;

/// Angles `0 < omega < phi < theta < π/2`: spectral containment, contour
/// and function domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub omega: f64,
    pub phi: f64,
    pub theta: f64,
}

impl SectorSpec {
    pub fn new(omega: f64, phi: f64, theta: f64) -> Result<Self> {
        let s = Self { omega, phi, theta };
        s.validate()?;
        Ok(s)
    }

    /// Sector triple for a contour angle alone: `omega = phi / 2` and
    /// `theta` halfway between `phi` and `pi/2` unless given.
    pub fn around(phi: f64, theta: Option<f64>) -> Result<Self> {
        Self::new(0.5 * phi, phi, theta.unwrap_or(0.5 * (phi + FRAC_PI_2)))
    }

    pub fn validate(&self) -> Result<()> {
        if 0.0 < self.omega
            && self.omega < self.phi
            && self.phi < self.theta
            && self.theta < FRAC_PI_2
        {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "sector angles must satisfy 0 < omega < phi < theta < pi/2, got ({}, {}, {})",
                self.omega, self.phi, self.theta
            )))
        }
    }
}

/// Quadrature of `∂D_φ ∩ C_J` in the variable `t = ln |s|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub sector: SectorSpec,
    pub j: ImaginaryUnit,
    pub t_min: f64,
    pub t_max: f64,
    pub nodes_per_panel: usize,
    /// Initial panel count over `[t_min, t_max]`; doubled until converged.
    pub panels: usize,
    pub tol: f64,
    /// Refinement ceiling.
    pub max_panels: usize,
}

impl ContourSpec {
    pub fn new(sector: SectorSpec, j: ImaginaryUnit) -> Self {
        Self {
            sector,
            j,
            t_min: -14.0,
            t_max: 14.0,
            nodes_per_panel: 32,
            panels: 8,
            tol: 1e-10,
            max_panels: 1024,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.sector.phi = phi;
        self
    }

    pub fn with_j(mut self, j: ImaginaryUnit) -> Self {
        self.j = j;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.sector.validate()?;
        if !(self.t_min < self.t_max) || !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(
                "contour needs t_min < t_max and tol > 0".into(),
            ));
        }
        if self.nodes_per_panel == 0 || self.panels == 0 || self.max_panels < self.panels {
            return Err(Error::InvalidParameter(
                "invalid panel configuration".into(),
            ));
        }
        Ok(())
    }
}

fn check_point(t: &RightLinearOperator, s: &Paravector) -> Result<()> {
    if s.n != t.n() {
        return Err(Error::DimensionMismatch(format!(
            "paravector of R_{} for an operator over R_{}",
            s.n,
            t.n()
        )));
    }
    Ok(())
}

/// `T^2 - 2 s0 T + |s|^2` in the embedding.
fn qs_matrix(t: &DMatrix<f64>, t2: &DMatrix<f64>, s0: f64, abs2: f64) -> DMatrix<f64> {
    let mut q = t2 - t * (2.0 * s0);
    for i in 0..q.nrows() {
        q[(i, i)] += abs2;
    }
    q
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max)
}

/// Inverse with a 1-norm condition check.
fn checked_inverse(q: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let qn = one_norm(&q);
    let inv = q.try_inverse().ok_or(Error::SInSpectrum { rcond: 0.0 })?;
    let rcond = 1.0 / (qn * one_norm(&inv));
    if !(rcond > SINGULAR_RCOND) {
        return Err(Error::SInSpectrum { rcond });
    }
    Ok(inv)
}

/// `Q_s[T]^{-1}` in the embedding. Depends on `s` only through `s0` and
/// `|s|`.
pub fn qs_inverse_matrix(t: &RightLinearOperator, s0: f64, abs: f64) -> Result<DMatrix<f64>> {
    let e = t.embedding();
    checked_inverse(qs_matrix(e, &(e * e), s0, abs * abs))
}

pub fn qs_inverse(t: &RightLinearOperator, s: &Paravector) -> Result<RightLinearOperator> {
    check_point(t, s)?;
    let inv = qs_inverse_matrix(t, s.s0, s.abs())?;
    RightLinearOperator::from_embedding(t.n(), t.d(), &inv)
}

fn resolvent_left_matrix(
    t: &RightLinearOperator,
    s: &Paravector,
    qinv: &DMatrix<f64>,
) -> DMatrix<f64> {
    let sbar = s.conj().to_element();
    qinv * left_block(&sbar, t.d()) - t.embedding() * qinv
}

fn resolvent_right_matrix(
    t: &RightLinearOperator,
    s: &Paravector,
    qinv: &DMatrix<f64>,
) -> DMatrix<f64> {
    let sbar = s.conj().to_element();
    (left_block(&sbar, t.d()) - t.embedding()) * qinv
}

/// `S_L^{-1}(s, T) = Q_s[T]^{-1} s̄ - T Q_s[T]^{-1}`.
pub fn s_resolvent_left(t: &RightLinearOperator, s: &Paravector) -> Result<RightLinearOperator> {
    check_point(t, s)?;
    let qinv = qs_inverse_matrix(t, s.s0, s.abs())?;
    RightLinearOperator::from_embedding(t.n(), t.d(), &resolvent_left_matrix(t, s, &qinv))
}

/// `S_R^{-1}(s, T) = (s̄ - T) Q_s[T]^{-1}`.
pub fn s_resolvent_right(t: &RightLinearOperator, s: &Paravector) -> Result<RightLinearOperator> {
    check_point(t, s)?;
    let qinv = qs_inverse_matrix(t, s.s0, s.abs())?;
    RightLinearOperator::from_embedding(t.n(), t.d(), &resolvent_right_matrix(t, s, &qinv))
}

/// Truncated series `sum_{k=0}^{K} T^k s^{-k-1}`, valid for `‖T‖ < |s|`.
pub fn neumann_resolvent(
    t: &RightLinearOperator,
    s: &Paravector,
    terms: usize,
) -> Result<RightLinearOperator> {
    check_point(t, s)?;
    let sinv = s.to_element().inverse()?;
    let mut power = sinv.clone();
    let mut tk = DMatrix::identity(t.dim(), t.dim());
    let mut acc = DMatrix::zeros(t.dim(), t.dim());
    for _ in 0..=terms {
        acc += &tk * left_block(&power, t.d());
        tk = t.embedding() * tk;
        power = power.mul(&sinv)?;
    }
    RightLinearOperator::from_embedding(t.n(), t.d(), &acc)
}

/// S-spectrum as spheres; each sphere is confirmed by the near-singularity
/// of `Q_s[T]` at one of its points.
pub fn s_spectrum(t: &RightLinearOperator) -> Result<Vec<SpectralSphere>> {
    let spheres = t.eigen_spheres()?;
    let e = t.embedding();
    let e2 = e * e;
    let j = ImaginaryUnit::basis(t.n(), 1)?;
    let tn = spectral_norm(e);
    for sp in &spheres {
        let s = sp.sample(&j);
        let q = qs_matrix(e, &e2, s.s0, s.abs().powi(2));
        // smallest singular value against the size of the three terms
        let scale = tn * tn + 2.0 * s.s0.abs() * tn + s.abs().powi(2);
        let smin = singular_values(&q).min();
        if smin > 1e-5 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::EigenNonConvergence);
        }
    }
    Ok(spheres)
}

/// Checks that every non-origin sphere lies strictly inside `D_φ`.
pub fn check_spectrum_in_sector(spheres: &[SpectralSphere], phi: f64) -> Result<()> {
    for sp in spheres {
        if !sp.is_origin() && sp.phase() >= phi {
            return Err(Error::SpectrumOutsideSector {
                phase: sp.phase(),
                phi,
            });
        }
    }
    Ok(())
}

/// Sampling pattern for certificates. Radii are multiples of `‖T‖` (of
/// `1` for the zero operator), which makes certificates scale invariant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub radii_per_decade: usize,
    /// Ray angles spread evenly over `[φ, π - φ]`.
    pub angles: usize,
    /// Imaginary units; closed under negation so that conjugates are sampled.
    pub units: Vec<ImaginaryUnit>,
}

impl CertificationGrid {
    pub fn standard(n: usize) -> Self {
        let mut units = Vec::new();
        for i in 1..=n {
            let e = ImaginaryUnit::basis(n, i).expect("valid generator");
            units.push(e.negate());
            units.push(e);
        }
        if n > 1 {
            let mixed = ImaginaryUnit::normalized((1..=n).map(|i| i as f64).collect())
                .expect("nonzero vector");
            units.push(mixed.negate());
            units.push(mixed);
        }
        Self {
            r_min: 1e-6,
            r_max: 1e6,
            radii_per_decade: 4,
            angles: 9,
            units,
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        let (a, b) = (self.r_min.log10(), self.r_max.log10());
        let count = ((b - a) * self.radii_per_decade as f64).round() as usize + 1;
        (0..count)
            .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1).max(1) as f64))
            .collect()
    }

    pub fn angle_list(&self, phi: f64) -> Vec<f64> {
        if self.angles == 1 {
            return vec![FRAC_PI_2];
        }
        (0..self.angles)
            .map(|k| phi + (PI - 2.0 * phi) * k as f64 / (self.angles - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventSample {
    pub s: Paravector,
    pub radius: f64,
    pub angle: f64,
    /// `|s| ‖S_L^{-1}(s, T)‖`.
    pub scaled_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectorialCertificate {
    pub phi: f64,
    pub c_phi: f64,
    pub samples: Vec<ResolventSample>,
    pub passed: bool,
    pub injective: bool,
    pub failure: Option<String>,
}

/// Samples `|s| ‖S_L^{-1}(s, T)‖` outside `D_φ` and records the empirical
/// constant. Fails on a growth trend at either end of the radius range.
pub fn certify_bisectorial(
    t: &RightLinearOperator,
    phi: f64,
    grid: &CertificationGrid,
) -> Result<BisectorialCertificate> {
    if !(phi > 0.0 && phi < FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "phi = {phi} not in (0, pi/2)"
        )));
    }
    if grid.units.iter().any(|j| j.n() != t.n()) {
        return Err(Error::DimensionMismatch(
            "certificate units from another algebra".into(),
        ));
    }
    check_spectrum_in_sector(&s_spectrum(t)?, phi)?;
    let tn = t.norm();
    let unit = if tn > 0.0 { tn } else { 1.0 };
    let radii: Vec<f64> = grid.radii().iter().map(|r| r * unit).collect();
    let angles = grid.angle_list(phi);
    let mut points = Vec::with_capacity(radii.len() * angles.len() * grid.units.len());
    for j in &grid.units {
        for &a in &angles {
            for &r in &radii {
                points.push((j.clone(), a, r));
            }
        }
    }
    let values: Vec<(ResolventSample, Option<String>)> = points
        .par_iter()
        .map(|(j, a, r)| {
            let s = Paravector::on_slice(r * a.cos(), r * a.sin(), j);
            let (scaled, err) = match qs_inverse_matrix(t, s.s0, s.abs()) {
                Ok(qinv) => (
                    r * spectral_norm(&resolvent_left_matrix(t, &s, &qinv)),
                    None,
                ),
                Err(e) => (
                    f64::INFINITY,
                    Some(format!("|s| = {r:.3e}, angle {a:.4}: {e}")),
                ),
            };
            (
                ResolventSample {
                    s,
                    radius: *r,
                    angle: *a,
                    scaled_norm: scaled,
                },
                err,
            )
        })
        .collect();

    let mut failure = values.iter().find_map(|(_, e)| e.clone());
    let samples: Vec<ResolventSample> = values.into_iter().map(|(s, _)| s).collect();
    let c_phi = samples.iter().map(|s| s.scaled_norm).fold(0.0, f64::max);
    if failure.is_none() && !c_phi.is_finite() {
        failure = Some("non-finite resolvent norm".into());
    }
    if failure.is_none() {
        for ray in samples.chunks(radii.len()) {
            let k = ray.len();
            if k < 2 {
                continue;
            }
            // near the origin Q_s has condition about (1 + ‖T‖/|s|)^2, so the
            // computed norms carry that much relative rounding; compare the
            // smallest pair of radii where that is still small
            let slack = |r: f64| 1e-3f64.max(10.0 * f64::EPSILON * (1.0 + tn / r).powi(2));
            let grows = |a: &ResolventSample, b: &ResolventSample| {
                let tol = slack(a.radius.min(b.radius));
                a.scaled_norm > b.scaled_norm * (1.0 + tol) + 1e-12
            };
            let low = (0..k - 1).find(|&i| slack(ray[i].radius) < 0.1);
            if let Some(i) = low.filter(|&i| grows(&ray[i], &ray[i + 1])) {
                failure = Some(format!(
                    "|s| ‖S_L‖ grows as |s| -> 0 along angle {:.4} ({:.3e} at |s| = {:.1e})",
                    ray[i].angle, ray[i].scaled_norm, ray[i].radius
                ));
                break;
            }
            if grows(&ray[k - 1], &ray[k - 2]) {
                failure = Some(format!(
                    "|s| ‖S_L‖ grows as |s| -> oo along angle {:.4} ({:.3e} at |s| = {:.1e})",
                    ray[k - 1].angle,
                    ray[k - 1].scaled_norm,
                    ray[k - 1].radius
                ));
                break;
            }
        }
    }
    Ok(BisectorialCertificate {
        phi,
        c_phi,
        samples,
        passed: failure.is_none(),
        injective: t.is_injective(),
        failure,
    })
}

/// Values and bounds of the four resolvent estimates at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateValues {
    /// `‖S_R^{-1}‖`, `‖Q_s^{-1}‖`, `‖T Q_s^{-1}‖`, `‖T^2 Q_s^{-1}‖`.
    pub values: [f64; 4],
    /// `2C/|s|`, `2C^2/|s|^2`, `(2C^2 + C)/|s|`, `1 + 2C + 2C^2`.
    pub bounds: [f64; 4],
}

fn estimates_at(t: &RightLinearOperator, s: &Paravector, c: f64) -> Result<EstimateValues> {
    let qinv = qs_inverse_matrix(t, s.s0, s.abs())?;
    let e = t.embedding();
    let tq = e * &qinv;
    let ttq = e * &tq;
    let r = s.abs();
    Ok(EstimateValues {
        values: [
            spectral_norm(&resolvent_right_matrix(t, s, &qinv)),
            spectral_norm(&qinv),
            spectral_norm(&tq),
            spectral_norm(&ttq),
        ],
        bounds: [
            2.0 * c / r,
            2.0 * c * c / (r * r),
            (2.0 * c * c + c) / r,
            1.0 + 2.0 * c + 2.0 * c * c,
        ],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub samples: usize,
    pub violations: [usize; 4],
    /// Largest `value / bound` per estimate.
    pub worst_ratio: [f64; 4],
}

impl EstimateReport {
    pub fn total_violations(&self) -> usize {
        self.violations.iter().sum()
    }
}

/// Evaluates the four resolvent estimates at every certificate sample with
/// the certificate's constant.
pub fn resolvent_estimates(
    t: &RightLinearOperator,
    cert: &BisectorialCertificate,
) -> Result<EstimateReport> {
    let c = cert.c_phi;
    let all: Vec<EstimateValues> = cert
        .samples
        .par_iter()
        .map(|smp| estimates_at(t, &smp.s, c))
        .collect::<Result<_>>()?;
    let mut report = EstimateReport {
        samples: all.len(),
        violations: [0; 4],
        worst_ratio: [0.0; 4],
    };
    for ev in &all {
        for k in 0..4 {
            let ratio = ev.values[k] / ev.bounds[k];
            report.worst_ratio[k] = report.worst_ratio[k].max(ratio);
            if ev.values[k] > ev.bounds[k] * (1.0 + 1e-9) {
                report.violations[k] += 1;
            }
        }
    }
    Ok(report)
}

/// Residual norms of the conjugate-pair identities and of
/// `T S_L^{-1}(s,T) - S_L^{-1}(s,T) s + I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventIdentityReport {
    /// `‖S_L(s) + S_L(s̄) - 2(s0 - T) Q_s^{-1}‖`.
    pub left_sum: f64,
    /// `‖S_R(s) + S_R(s̄) - 2(s0 - T) Q_s^{-1}‖`.
    pub right_sum: f64,
    /// `‖S_R(s) - S_R(s̄) + 2 Im(s) Q_s^{-1}‖`.
    pub right_difference: f64,
    /// `‖S_R(s) - S_R(s̄) + J (S_L(s) - S_L(s̄)) J‖`.
    pub left_right_difference: f64,
    /// `‖T S_L(s) - S_L(s) s + I‖`.
    pub resolvent: f64,
    pub estimates: Option<EstimateValues>,
}

impl ResolventIdentityReport {
    pub fn max_identity_residual(&self) -> f64 {
        self.left_sum
            .max(self.right_sum)
            .max(self.right_difference)
            .max(self.left_right_difference)
            .max(self.resolvent)
    }
}

pub fn resolvent_identities_check(
    t: &RightLinearOperator,
    s: &Paravector,
    c_phi: Option<f64>,
) -> Result<ResolventIdentityReport> {
    check_point(t, s)?;
    let (n, d, dim) = (t.n(), t.d(), t.dim());
    let e = t.embedding();
    let qinv = qs_inverse_matrix(t, s.s0, s.abs())?;
    let sb = s.conj();
    let sl = resolvent_left_matrix(t, s, &qinv);
    let sl_bar = resolvent_left_matrix(t, &sb, &qinv);
    let sr = resolvent_right_matrix(t, s, &qinv);
    let sr_bar = resolvent_right_matrix(t, &sb, &qinv);
    let two_s0_minus_t = (DMatrix::identity(dim, dim) * s.s0 - e) * 2.0;
    let sum_target = &two_s0_minus_t * &qinv;
    let (_, _, unit) = s.slice_decomposition();
    let j = match unit {
        Some(j) => j,
        None => ImaginaryUnit::basis(n, 1)?,
    };
    let jb = left_block(&j.to_element(), d);
    let imag = Paravector {
        n,
        s0: 0.0,
        v: s.v.clone(),
    }
    .to_element();
    let im_q = left_block(&imag, d) * &qinv * 2.0;
    let sl_diff = &sl - &sl_bar;
    let jsj = &jb * &sl_diff * &jb;
    let resolvent = e * &sl - &sl * left_block(&s.to_element(), d) + DMatrix::identity(dim, dim);
    Ok(ResolventIdentityReport {
        left_sum: spectral_norm(&(&sl + &sl_bar - &sum_target)),
        right_sum: spectral_norm(&(&sr + &sr_bar - &sum_target)),
        right_difference: spectral_norm(&(&sr - &sr_bar + &im_q)),
        left_right_difference: spectral_norm(&(&sr - &sr_bar + &jsj)),
        resolvent: spectral_norm(&resolvent),
        estimates: match c_phi {
            Some(c) => Some(estimates_at(t, s, c)?),
            None => None,
        },
    })
}

/// Kernel and range of `T` with the smallest principal angle between them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub dim: usize,
    pub kernel_dim: usize,
    pub range_dim: usize,
    pub min_angle: f64,
}

pub fn kernel_range_decomposition(t: &RightLinearOperator) -> Decomposition {
    let k = t.kernel_matrix();
    let r = t.range_matrix();
    let min_angle = if k.ncols() == 0 || r.ncols() == 0 {
        FRAC_PI_2
    } else {
        let cos = spectral_norm(&(k.transpose() * &r)).min(1.0);
        cos.acos()
    };
    Decomposition {
        dim: t.dim(),
        kernel_dim: k.ncols(),
        range_dim: r.ncols(),
        min_angle,
    }
}

/// `‖T^2 Q_s^{-1} v‖` for growing `|s|` and `‖|s|^2 Q_s^{-1} v‖` for
/// shrinking `|s|` along one ray outside the sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitTrend {
    pub radii_large: Vec<f64>,
    pub at_infinity: Vec<f64>,
    pub radii_small: Vec<f64>,
    pub at_zero: Vec<f64>,
    pub passed: bool,
}

fn trends_to_zero(values: &[f64]) -> bool {
    let first = values[0];
    let monotone = values
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-300);
    monotone && *values.last().unwrap() <= 1e-6 * first + 1e-14
}

/// Samples the two limits over six decades each; `v` should lie in the
/// range of `T`.
pub fn limit_check(
    t: &RightLinearOperator,
    angle: f64,
    j: &ImaginaryUnit,
    v: &DVector<f64>,
) -> Result<LimitTrend> {
    let e = t.embedding();
    let e2 = e * e;
    let radii_large: Vec<f64> = (0..=6).map(|k| 10f64.powi(k)).collect();
    let radii_small: Vec<f64> = (0..=6).map(|k| 10f64.powi(-k)).collect();
    let mut at_infinity = Vec::new();
    for &r in &radii_large {
        let s = Paravector::on_slice(r * angle.cos(), r * angle.sin(), j);
        let qinv = qs_inverse_matrix(t, s.s0, r)?;
        at_infinity.push((&e2 * (&qinv * v)).norm());
    }
    let mut at_zero = Vec::new();
    for &r in &radii_small {
        let s = Paravector::on_slice(r * angle.cos(), r * angle.sin(), j);
        let qinv = qs_inverse_matrix(t, s.s0, r)?;
        at_zero.push((&qinv * v).norm() * r * r);
    }
    let passed = trends_to_zero(&at_infinity) && trends_to_zero(&at_zero);
    Ok(LimitTrend {
        radii_large,
        at_infinity,
        radii_small,
        at_zero,
        passed,
    })
}

/// Outcome of a converged contour quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaOutcome {
    pub operator: RightLinearOperator,
    pub panels: usize,
    pub nodes: usize,
    pub t_min: f64,
    pub t_max: f64,
    /// Relative operator-norm change of the last refinement.
    pub change: f64,
}

/// Per-node data: the two rays of each sector share `Q_s^{-1}` because
/// their points are conjugate.
struct Integrand<'a> {
    f: &'a SliceFunction,
    t: &'a RightLinearOperator,
    t2: DMatrix<f64>,
    j: ImaginaryUnit,
    phi: f64,
    side: Side,
}

impl Integrand<'_> {
    /// Returns `(X, Y)` with the node contribution `X - T Y` (left) or
    /// `X - Y` (right), already multiplied by `weight / 2π`.
    fn node(&self, tt: f64, weight: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let dim = self.t.dim();
        let d = self.t.d();
        let n = self.t.n();
        let r = tt.exp();
        let scale = weight / (2.0 * PI);
        let minus_j = self.j.negate().to_element();
        let mut x = DMatrix::zeros(dim, dim);
        let mut y = DMatrix::zeros(dim, dim);
        // right sector: in along +φ, out along -φ; left sector: out along
        // π - φ, in along π + φ
        for (beta, sigma_upper) in [(self.phi, -1.0), (PI - self.phi, 1.0)] {
            let (s0, s1) = (r * beta.cos(), r * beta.sin());
            let upper = Paravector::on_slice(s0, s1, &self.j);
            let lower = upper.conj();
            let qinv = qs_matrix(self.t.embedding(), &self.t2, s0, r * r)
                .try_inverse()
                .unwrap_or_else(|| DMatrix::from_element(dim, dim, f64::NAN));
            let mut a = CliffordElement::zero(n);
            let mut c = CliffordElement::zero(n);
            for (point, sigma, ybar) in [(&upper, sigma_upper, s1), (&lower, -sigma_upper, -s1)] {
                let pe = point.to_element();
                let fs = self.f.eval_on_slice(s0, ybar, &self.j);
                let conj_pt = point.conj().to_element();
                match self.side {
                    Side::Left => {
                        // S_L(s) L(c) = Q^{-1} L(s̄ c) - T Q^{-1} L(c), c = -J s f(s)
                        let cs = (&(&minus_j * &pe) * &fs).scale(sigma * scale);
                        a += &(&conj_pt * &cs);
                        c += &cs;
                    }
                    Side::Right => {
                        // L(c) S_R(s) = L(c s̄) Q^{-1} - L(c) T Q^{-1}, c = f(s) (-J) s
                        let cs = (&fs * &(&minus_j * &pe)).scale(sigma * scale);
                        a += &(&cs * &conj_pt);
                        c += &cs;
                    }
                }
            }
            match self.side {
                Side::Left => {
                    x += &qinv * left_block(&a, d);
                    y += &qinv * left_block(&c, d);
                }
                Side::Right => {
                    x += left_block(&a, d) * &qinv;
                    y += left_block(&c, d) * (self.t.embedding() * &qinv);
                }
            }
        }
        (x, y)
    }

    fn finish(&self, x: DMatrix<f64>, y: DMatrix<f64>) -> DMatrix<f64> {
        match self.side {
            Side::Left => x - self.t.embedding() * y,
            Side::Right => x - y,
        }
    }

    fn magnitude(&self, tt: f64) -> f64 {
        let (x, y) = self.node(tt, 1.0);
        self.finish(x, y).norm()
    }

    fn integrate(&self, rule: &GaussLegendre, a: f64, b: f64, panels: usize) -> DMatrix<f64> {
        let dim = self.t.dim();
        let nodes = rule.composite(a, b, panels);
        // fixed chunking keeps the summation order independent of the pool
        let partial: Vec<(DMatrix<f64>, DMatrix<f64>)> = nodes
            .par_chunks(16)
            .map(|chunk| {
                let mut x = DMatrix::zeros(dim, dim);
                let mut y = DMatrix::zeros(dim, dim);
                for &(tt, w) in chunk {
                    let (nx, ny) = self.node(tt, w);
                    x += nx;
                    y += ny;
                }
                (x, y)
            })
            .collect();
        let mut x = DMatrix::zeros(dim, dim);
        let mut y = DMatrix::zeros(dim, dim);
        for (px, py) in partial {
            x += px;
            y += py;
        }
        self.finish(x, y)
    }
}

/// `f(T)` from the contour integral over `∂D_φ ∩ C_J` with `ds_J = -J ds`.
pub fn omega_calc(
    f: &SliceFunction,
    t: &RightLinearOperator,
    cfg: &ContourSpec,
    side: Side,
) -> Result<RightLinearOperator> {
    Ok(omega_calc_detailed(f, t, cfg, side)?.operator)
}

pub fn omega_calc_detailed(
    f: &SliceFunction,
    t: &RightLinearOperator,
    cfg: &ContourSpec,
    side: Side,
) -> Result<OmegaOutcome> {
    cfg.validate()?;
    if f.n() != t.n() || cfg.j.n() != t.n() {
        return Err(Error::DimensionMismatch(
            "function, operator and contour unit must share the algebra".into(),
        ));
    }
    let ok = match side {
        Side::Left => f.flavor().is_left(),
        Side::Right => f.flavor().is_right(),
    };
    if !ok {
        return Err(Error::FlavorMismatch(format!(
            "{:?} function '{}' in the {side:?} calculus",
            f.flavor(),
            f.label()
        )));
    }
    if !f.is_decaying() {
        return Err(Error::NonDecayingFunction);
    }
    let phi = cfg.sector.phi;
    if let Some(theta) = f.domain_angle() {
        if phi >= theta {
            return Err(Error::DomainViolation(format!(
                "contour angle {phi} not inside the function domain angle {theta}"
            )));
        }
    }
    check_spectrum_in_sector(&s_spectrum(t)?, phi)?;

    let integrand = Integrand {
        f,
        t,
        t2: t.embedding() * t.embedding(),
        j: cfg.j.clone(),
        phi,
        side,
    };

    // widen the truncation until the endpoint integrand is negligible
    let (mut a, mut b) = (cfg.t_min, cfg.t_max);
    let peak = (0..=64)
        .map(|k| integrand.magnitude(a + (b - a) * k as f64 / 64.0))
        .fold(0.0, f64::max);
    let cut = 1e-3 * cfg.tol * peak;
    while integrand.magnitude(b) > cut && b < T_LIMIT {
        b = (b + 2.0).min(T_LIMIT);
    }
    while integrand.magnitude(a) > cut && a > -T_LIMIT {
        a = (a - 2.0).max(-T_LIMIT);
    }

    let rule = GaussLegendre::new(cfg.nodes_per_panel);
    let base_width = cfg.t_max - cfg.t_min;
    let mut panels = ((cfg.panels as f64) * (b - a) / base_width).ceil() as usize;
    let max_panels = ((cfg.max_panels as f64) * (b - a) / base_width).ceil() as usize;
    let mut prev = integrand.integrate(&rule, a, b, panels);
    loop {
        let next_panels = panels * 2;
        if next_panels > max_panels {
            let change = relative_change(&prev, &integrand.integrate(&rule, a, b, panels));
            return Err(Error::QuadratureNotConverged {
                change,
                tol: cfg.tol,
            });
        }
        let next = integrand.integrate(&rule, a, b, next_panels);
        let change = relative_change(&prev, &next);
        if !change.is_finite() {
            return Err(Error::QuadratureNotConverged {
                change,
                tol: cfg.tol,
            });
        }
        if change < cfg.tol {
            return Ok(OmegaOutcome {
                operator: RightLinearOperator::from_embedding(t.n(), t.d(), &next)?,
                panels: next_panels,
                nodes: next_panels * cfg.nodes_per_panel,
                t_min: a,
                t_max: b,
                change,
            });
        }
        prev = next;
        panels = next_panels;
    }
}

fn relative_change(prev: &DMatrix<f64>, next: &DMatrix<f64>) -> f64 {
    let diff = spectral_norm(&(next - prev));
    let size = spectral_norm(next);
    if diff == 0.0 {
        0.0
    } else {
        diff / size.max(f64::MIN_POSITIVE)
    }
}
