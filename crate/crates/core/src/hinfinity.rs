//! Regularized calculi for functions of polynomial growth.
//!
//! With `e(s) = s^m (1 + s^2)^{-m}` and `m` above the growth exponent:
//! left `f(T) = e(T)^{-1} (ef)(T)`, right `f(T)` the relation closure of
//! `(fe)(T) e(T)^{-1}`. Both need `T` injective.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::calculus::{
    certify_bisectorial, omega_calc, qs_inverse_matrix, CertificationGrid, ContourSpec,
};
use crate::clifford::CliffordElement;
use crate::error::{Error, Result};
use crate::linalg::RightLinearOperator;
use crate::relations::LinearRelation;
use crate::slice::{make_rational, regularizer, GrowthClass, ProductOrder, Side, SliceFunction};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizerChoice {
    pub m: u32,
    pub alpha: f64,
}

/// Smallest integer `m > alpha`.
pub fn choose_regularizer(f: &SliceFunction) -> Result<RegularizerChoice> {
    let alpha = f.growth().alpha;
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::UnclassifiedGrowth);
    }
    let alpha = match f.growth().class {
        GrowthClass::Decaying => 0.0,
        GrowthClass::PolyBounded => alpha,
    };
    Ok(RegularizerChoice {
        m: alpha.floor() as u32 + 1,
        alpha,
    })
}

fn resolve_m(f: &SliceFunction, m: Option<u32>) -> Result<u32> {
    let choice = choose_regularizer(f)?;
    match m {
        None => Ok(choice.m),
        Some(m) if (m as f64) > choice.alpha => Ok(m),
        Some(m) => Err(Error::InvalidParameter(format!(
            "regularizer exponent {m} must exceed the growth exponent {}",
            choice.alpha
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub m: u32,
    pub phi: f64,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    pub tol: f64,
    pub side: Side,
}

impl Provenance {
    fn new(m: u32, cfg: &ContourSpec, side: Side) -> Self {
        Self {
            m,
            phi: cfg.sector.phi,
            j: cfg.j.components().to_vec(),
            tol: cfg.tol,
            side,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HinftyResult {
    pub relation: LinearRelation,
    /// Present when the relation is the graph of an everywhere defined
    /// operator.
    pub as_operator: Option<RightLinearOperator>,
    pub provenance: Provenance,
}

/// `T^m (I + T^2)^{-m}`.
pub fn regularizer_operator(t: &RightLinearOperator, m: u32) -> Result<RightLinearOperator> {
    // I + T^2 = Q_J[T] for any unit J
    let qinv = qs_inverse_matrix(t, 0.0, 1.0)?;
    let qinv = RightLinearOperator::from_embedding(t.n(), t.d(), &qinv)?;
    Ok(t.compose(&qinv)?.pow(m))
}

/// Relative distance between the algebraic regularizer and its contour
/// integral.
pub fn regularizer_cross_check(t: &RightLinearOperator, m: u32, cfg: &ContourSpec) -> Result<f64> {
    let exact = regularizer_operator(t, m)?;
    let e = regularizer(t.n(), m)?;
    let quad = omega_calc(&e, t, cfg, Side::Left)?;
    Ok(exact.distance(&quad)? / exact.norm().max(1.0))
}

fn require_injective(t: &RightLinearOperator) -> Result<()> {
    let k = t.kernel_matrix().ncols();
    if k > 0 {
        return Err(Error::NotInjective(k));
    }
    Ok(())
}

fn require_certified(t: &RightLinearOperator, cfg: &ContourSpec) -> Result<()> {
    let cert = certify_bisectorial(t, cfg.sector.phi, &CertificationGrid::standard(t.n()))?;
    if !cert.passed {
        return Err(Error::CertificationFailed(
            cert.failure
                .unwrap_or_else(|| "resolvent estimate not certified".into()),
        ));
    }
    Ok(())
}

/// `e(T)^{-1} (ef)(T)` for left or intrinsic `f`.
pub fn hinf_left(
    f: &SliceFunction,
    t: &RightLinearOperator,
    cfg: &ContourSpec,
    m: Option<u32>,
) -> Result<RightLinearOperator> {
    if !f.flavor().is_left() {
        return Err(Error::FlavorMismatch(format!(
            "left calculus of the {:?} function '{}'",
            f.flavor(),
            f.label()
        )));
    }
    require_injective(t)?;
    require_certified(t, cfg)?;
    let m = resolve_m(f, m)?;
    let e = regularizer(t.n(), m)?;
    let ef = f.mul_intrinsic(&e, ProductOrder::GF)?;
    if !ef.is_decaying() {
        return Err(Error::NonDecayingFunction);
    }
    let ef_t = omega_calc(&ef, t, cfg, Side::Left)?;
    let e_t = regularizer_operator(t, m)?;
    e_t.inverse()?.compose(&ef_t)
}

/// Closure of `graph((fe)(T)) ∘ graph(e(T))^{-1}` for right or intrinsic `f`.
pub fn hinf_right(
    f: &SliceFunction,
    t: &RightLinearOperator,
    cfg: &ContourSpec,
    m: Option<u32>,
) -> Result<HinftyResult> {
    if !f.flavor().is_right() {
        return Err(Error::FlavorMismatch(format!(
            "right calculus of the {:?} function '{}'",
            f.flavor(),
            f.label()
        )));
    }
    require_injective(t)?;
    require_certified(t, cfg)?;
    let m = resolve_m(f, m)?;
    let e = regularizer(t.n(), m)?;
    let fe = f.mul_intrinsic(&e, ProductOrder::FG)?;
    if !fe.is_decaying() {
        return Err(Error::NonDecayingFunction);
    }
    let fe_t = omega_calc(&fe, t, cfg, Side::Right)?;
    let e_t = regularizer_operator(t, m)?;
    let relation = LinearRelation::from_operator(&fe_t, None)?
        .compose(&LinearRelation::from_operator(&e_t, None)?.inverse())?
        .closure();
    Ok(finish(relation, Provenance::new(m, cfg, Side::Right)))
}

fn finish(relation: LinearRelation, provenance: Provenance) -> HinftyResult {
    let as_operator = relation.to_operator().ok();
    HinftyResult {
        relation,
        as_operator,
        provenance,
    }
}

/// `r_n[T] = n^2 T^2 Q_{Jn}[T]^{-1} Q_{J/n}[T]^{-1}`.
pub fn rn_operator(t: &RightLinearOperator, n: f64) -> Result<RightLinearOperator> {
    if !(n > 0.0) {
        return Err(Error::InvalidParameter("r_n needs n > 0".into()));
    }
    let big = qs_inverse_matrix(t, 0.0, n)?;
    let small = qs_inverse_matrix(t, 0.0, 1.0 / n)?;
    let e = t.embedding();
    let m = (e * e) * (n * n) * big * small;
    RightLinearOperator::from_embedding(t.n(), t.d(), &m)
}

/// `p[T] = sum p_k T^k` with coefficients acting from the left.
pub fn poly_calc_right(
    coeffs: &[CliffordElement],
    t: &RightLinearOperator,
) -> Result<RightLinearOperator> {
    let mut acc = RightLinearOperator::zero(t.n(), t.d());
    let mut power = RightLinearOperator::identity(t.n(), t.d());
    for (k, c) in coeffs.iter().enumerate() {
        if k > 0 {
            power = power.compose(t)?;
        }
        acc = acc.add(&power.scale_left(c)?)?;
    }
    Ok(acc)
}

fn polynomial_coefficients(p: &SliceFunction) -> Result<Vec<CliffordElement>> {
    match p.symbolic() {
        Some(form)
            if form.is_polynomial() && (form.num_is_real() || form.num_side == Side::Right) =>
        {
            Ok(form.num.clone())
        }
        _ => Err(Error::InvalidParameter(format!(
            "'{}' is not a right polynomial",
            p.label()
        ))),
    }
}

/// Both routes of the rational calculus.
#[derive(Clone, Debug)]
pub struct RationalOutcome {
    pub hinf: HinftyResult,
    /// Closure of `graph(p[T]) ∘ graph(q[T])^{-1}`.
    pub direct: LinearRelation,
    pub discrepancy: f64,
}

pub fn rational_calc_right(
    p: &SliceFunction,
    q: &SliceFunction,
    t: &RightLinearOperator,
    cfg: &ContourSpec,
    m: Option<u32>,
) -> Result<RationalOutcome> {
    let f = make_rational(p, q, cfg.sector.theta)?;
    let pc = polynomial_coefficients(p)?;
    let qc = polynomial_coefficients(q)?;
    let hinf = hinf_right(&f, t, cfg, m)?;
    let p_t = poly_calc_right(&pc, t)?;
    let q_t = poly_calc_right(&qc, t)?;
    let direct = LinearRelation::from_operator(&p_t, None)?
        .compose(&LinearRelation::from_operator(&q_t, None)?.inverse())?
        .closure();
    let discrepancy = relation_discrepancy(&hinf.relation, &direct)?;
    Ok(RationalOutcome {
        hinf,
        direct,
        discrepancy,
    })
}

/// Relative operator distance when both relations are everywhere defined
/// operators, otherwise the projector distance; the larger of the two if
/// both apply.
pub fn relation_discrepancy(a: &LinearRelation, b: &LinearRelation) -> Result<f64> {
    let proj = a.distance(b)?;
    match (a.to_operator(), b.to_operator()) {
        (Ok(x), Ok(y)) => Ok(proj.max(x.distance(&y)? / y.norm().max(1.0))),
        _ => Ok(proj),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatementKind {
    Equality,
    Inclusion,
}

/// One checked identity or inclusion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatementCheck {
    pub name: String,
    pub kind: StatementKind,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl StatementCheck {
    fn equality(name: &str, discrepancy: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            kind: StatementKind::Equality,
            discrepancy,
            tolerance,
            passed: discrepancy <= tolerance,
        }
    }

    fn inclusion(name: &str, gap: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            kind: StatementKind::Inclusion,
            discrepancy: gap,
            tolerance,
            passed: gap <= tolerance,
        }
    }
}

pub const EQUALITY_TOL: f64 = 1e-7;
pub const INCLUSION_TOL: f64 = 1e-8;

fn graph(t: &RightLinearOperator) -> Result<LinearRelation> {
    LinearRelation::from_operator(t, None)
}

/// Entrywise left multiplication by `a`, as an operator.
fn scalar_operator(a: &CliffordElement, d: usize) -> Result<RightLinearOperator> {
    RightLinearOperator::diagonal(vec![a.clone(); d])
}

/// Sum and scalar rules. `Side::Left`: `f` left (polynomial growth), `g`
/// left decaying, `(f+g)(T) = f(T) + g(T)` and `(fa)(T) = f(T) a`.
/// `Side::Right`: `f` right, `g` right decaying, `(f+g)(T) = f(T) + g(T)`
/// and `(af)(T) = a f(T)`.
pub fn hinf_linearity_check(
    f: &SliceFunction,
    g: &SliceFunction,
    a: &CliffordElement,
    t: &RightLinearOperator,
    cfg: &ContourSpec,
    side: Side,
) -> Result<Vec<StatementCheck>> {
    if !g.is_decaying() {
        return Err(Error::NonDecayingFunction);
    }
    let d = t.d();
    let fg = f.add(g)?;
    match side {
        Side::Left => {
            let f_t = hinf_left(f, t, cfg, None)?;
            let g_t = omega_calc(g, t, cfg, Side::Left)?;
            let sum_t = hinf_left(&fg, t, cfg, None)?;
            let rhs = graph(&f_t)?.sum(&graph(&g_t)?)?;
            let fa = f.scale(a, Side::Right)?;
            let fa_t = hinf_left(&fa, t, cfg, None)?;
            let rhs_a = graph(&f_t)?.compose(&graph(&scalar_operator(a, d)?)?)?;
            Ok(vec![
                StatementCheck::equality(
                    "left-sum",
                    relation_discrepancy(&graph(&sum_t)?, &rhs)?,
                    EQUALITY_TOL,
                ),
                StatementCheck::equality(
                    "left-scalar",
                    relation_discrepancy(&graph(&fa_t)?, &rhs_a)?,
                    EQUALITY_TOL,
                ),
            ])
        }
        Side::Right => {
            let f_t = hinf_right(f, t, cfg, None)?;
            let g_t = omega_calc(g, t, cfg, Side::Right)?;
            let sum_t = hinf_right(&fg, t, cfg, None)?;
            let rhs = f_t.relation.sum(&graph(&g_t)?)?;
            let af = f.scale(a, Side::Left)?;
            let af_t = hinf_right(&af, t, cfg, None)?;
            let rhs_a = f_t.relation.scale_left(a)?;
            Ok(vec![
                StatementCheck::equality(
                    "right-sum",
                    relation_discrepancy(&sum_t.relation, &rhs)?,
                    EQUALITY_TOL,
                ),
                StatementCheck::equality(
                    "right-scalar",
                    relation_discrepancy(&af_t.relation, &rhs_a)?,
                    EQUALITY_TOL,
                ),
            ])
        }
    }
}

/// Product rules with an intrinsic factor.
///
/// Left (`f` intrinsic, `g` left): if `f` decays, `(fg)(T) ⊇ f(T) g(T)`;
/// if `g` decays, `(fg)(T) = f(T) g(T)`.
/// Right (`f` right, `g` intrinsic): if `f` decays,
/// `(fg)(T) = closure(f(T) g(T))`; if `g` decays, `(fg)(T) ⊆ f(T) g(T)`.
pub fn hinf_product_check(
    f: &SliceFunction,
    g: &SliceFunction,
    t: &RightLinearOperator,
    cfg: &ContourSpec,
    side: Side,
) -> Result<Vec<StatementCheck>> {
    let mut out = Vec::new();
    match side {
        Side::Left => {
            // fg with the intrinsic factor f on the left
            let prod = g.mul_intrinsic(f, ProductOrder::GF)?;
            let lhs = graph(&hinf_left(&prod, t, cfg, None)?)?;
            let g_t = if g.is_decaying() {
                omega_calc(g, t, cfg, Side::Left)?
            } else {
                hinf_left(g, t, cfg, None)?
            };
            let f_t = if f.is_decaying() {
                omega_calc(f, t, cfg, Side::Left)?
            } else {
                hinf_left(f, t, cfg, None)?
            };
            let rhs = graph(&f_t)?.compose(&graph(&g_t)?)?;
            if f.is_decaying() {
                out.push(StatementCheck::inclusion(
                    "left-product-decaying-intrinsic",
                    rhs.containment_gap(&lhs)?,
                    INCLUSION_TOL,
                ));
            }
            if g.is_decaying() {
                out.push(StatementCheck::equality(
                    "left-product-decaying-left",
                    relation_discrepancy(&lhs, &rhs)?,
                    EQUALITY_TOL,
                ));
            }
        }
        Side::Right => {
            let prod = f.mul_intrinsic(g, ProductOrder::FG)?;
            let lhs = hinf_right(&prod, t, cfg, None)?.relation;
            let f_rel = if f.is_decaying() {
                graph(&omega_calc(f, t, cfg, Side::Right)?)?
            } else {
                hinf_right(f, t, cfg, None)?.relation
            };
            let g_rel = if g.is_decaying() {
                graph(&omega_calc(g, t, cfg, Side::Right)?)?
            } else {
                hinf_right(g, t, cfg, None)?.relation
            };
            let rhs = f_rel.compose(&g_rel)?.closure();
            if f.is_decaying() {
                out.push(StatementCheck::equality(
                    "right-product-decaying-right",
                    relation_discrepancy(&lhs, &rhs)?,
                    EQUALITY_TOL,
                ));
            }
            if g.is_decaying() {
                out.push(StatementCheck::inclusion(
                    "right-product-decaying-intrinsic",
                    lhs.containment_gap(&rhs)?,
                    INCLUSION_TOL,
                ));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter(
            "product rules need one decaying factor".into(),
        ));
    }
    Ok(out)
}

/// `‖(fe)(T) e(T)^{-1} v_n - f(T) v_n‖` with `v_n = r_n[T]^m v`, where the
/// reference `f(T)` comes from the direct rational route.
pub fn approximant_residual(
    p: &SliceFunction,
    q: &SliceFunction,
    t: &RightLinearOperator,
    cfg: &ContourSpec,
    v: &DVector<f64>,
    n: f64,
) -> Result<f64> {
    let f = make_rational(p, q, cfg.sector.theta)?;
    let m = resolve_m(&f, None)?;
    let e = regularizer(t.n(), m)?;
    let fe_t = omega_calc(&f.mul_intrinsic(&e, ProductOrder::FG)?, t, cfg, Side::Right)?;
    let e_t = regularizer_operator(t, m)?;
    let r = rn_operator(t, n)?.pow(m);
    let vn = r.embedding() * v;
    let lhs = fe_t.embedding() * (e_t.inverse()?.embedding() * &vn);
    let pc = polynomial_coefficients(p)?;
    let qc = polynomial_coefficients(q)?;
    let direct = poly_calc_right(&pc, t)?.compose(&poly_calc_right(&qc, t)?.inverse()?)?;
    let rhs = direct.embedding() * &vn;
    Ok((lhs - &rhs).norm() / rhs.norm().max(1.0))
}
