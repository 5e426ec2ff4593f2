//! Verification suites over generated operators and the report they emit.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{
    certify_bisectorial, kernel_range_decomposition, limit_check, neumann_resolvent, omega_calc,
    qs_inverse, resolvent_estimates, resolvent_identities_check, s_resolvent_left, s_spectrum,
    CertificationGrid, ContourSpec,
};
use crate::clifford::{CliffordElement, Paravector};
use crate::error::{Error, Result};
use crate::hinfinity::{
    approximant_residual, hinf_left, hinf_linearity_check, hinf_product_check, hinf_right,
    poly_calc_right, rational_calc_right, regularizer_cross_check, relation_discrepancy,
    rn_operator, StatementKind,
};
use crate::linalg::{singular_values, RightLinearOperator, Svd};
use crate::relations::LinearRelation;
use crate::scenario::{
    generate_operator_indexed, parse_function, random_element, random_operator, random_unit,
    stream_rng, GeneratedOperator, ScenarioConfig, Suite,
};
use crate::slice::{
    make_polynomial, make_rational, make_real_polynomial, regularizer, Side, SliceFunction,
};

/// Statement names carried by report records.
pub const ANCHORS: &[&str] = &[
    "clifford-relations",
    "conjugation",
    "paravector-norm",
    "right-linearity",
    "module-norm",
    "real-embedding",
    "s-spectrum",
    "resolvent-series",
    "resolvent-identities",
    "resolvent-estimates",
    "kernel-range-decomposition",
    "resolvent-limits",
    "rn-approximants",
    "rn-range",
    "omega-calculus",
    "omega-independence",
    "slice-hyperholomorphy",
    "left-hinfty",
    "regularizer",
    "right-hinfty",
    "right-hinfty-well-defined",
    "dense-domain",
    "right-polynomial-calculus",
    "multivalued-operators",
    "hinfty-linearity",
    "hinfty-product-rule",
    "rational-calculus",
    "approximant-identity",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// Whether the residual must stay below or above the tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub suite: Suite,
    pub anchor: String,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub bound: Bound,
    pub runtime_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub rng: String,
    pub suites: Vec<Suite>,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn records_for(&self, suite: Suite) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(move |r| r.suite == suite)
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("name,suite,anchor,status,residual,tolerance,bound,runtime_ms\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{:e},{},{:.3}\n",
                r.name,
                r.suite.name(),
                r.anchor,
                serde_json::to_value(r.status).unwrap().as_str().unwrap(),
                r.residual.map(|x| format!("{x:e}")).unwrap_or_default(),
                r.tolerance,
                serde_json::to_value(r.bound).unwrap().as_str().unwrap(),
                r.runtime_ms
            ));
        }
        out
    }
}

/// One measured quantity.
struct Measure {
    name: String,
    anchor: &'static str,
    residual: f64,
    tolerance: f64,
    bound: Bound,
    /// Extra pass conditions beyond the residual bound.
    ok: bool,
    skip: bool,
    detail: Option<String>,
}

impl Measure {
    fn upper(name: impl Into<String>, anchor: &'static str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            anchor,
            residual,
            tolerance,
            bound: Bound::Upper,
            ok: true,
            skip: false,
            detail: None,
        }
    }

    fn lower(name: impl Into<String>, anchor: &'static str, residual: f64, tolerance: f64) -> Self {
        Self {
            bound: Bound::Lower,
            ..Self::upper(name, anchor, residual, tolerance)
        }
    }

    fn require(mut self, ok: bool) -> Self {
        self.ok &= ok;
        self
    }

    fn detail(mut self, text: impl Into<String>) -> Self {
        self.detail = Some(text.into());
        self
    }
}

type Runner = Box<dyn Fn() -> Result<Vec<Measure>> + Send + Sync>;

/// A unit of work; an error becomes a failed record under `name`.
struct Check {
    name: String,
    suite: Suite,
    anchor: &'static str,
    tolerance: f64,
    skip: Option<String>,
    run: Runner,
}

impl Check {
    fn new(
        suite: Suite,
        name: impl Into<String>,
        anchor: &'static str,
        tolerance: f64,
        run: impl Fn() -> Result<Vec<Measure>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: format!("{}/{}", suite.name(), name.into()),
            suite,
            anchor,
            tolerance,
            skip: None,
            run: Box::new(run),
        }
    }

    fn skipped(suite: Suite, name: impl Into<String>, anchor: &'static str, reason: &str) -> Self {
        let mut c = Self::new(suite, name, anchor, 0.0, || Ok(Vec::new()));
        c.skip = Some(reason.to_string());
        c
    }

    fn execute(&self, timing: bool) -> Vec<CheckRecord> {
        let start = Instant::now();
        if let Some(reason) = &self.skip {
            return vec![CheckRecord {
                name: self.name.clone(),
                suite: self.suite,
                anchor: self.anchor.into(),
                status: Status::Skip,
                residual: None,
                tolerance: self.tolerance,
                bound: Bound::Upper,
                runtime_ms: 0.0,
                detail: Some(reason.clone()),
            }];
        }
        let result = (self.run)();
        let runtime_ms = if timing {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        match result {
            Ok(measures) => measures
                .into_iter()
                .map(|m| {
                    let within = match m.bound {
                        Bound::Upper => m.residual <= m.tolerance,
                        Bound::Lower => m.residual > m.tolerance,
                    };
                    let status = if m.skip {
                        Status::Skip
                    } else if within && m.ok {
                        Status::Pass
                    } else {
                        Status::Fail
                    };
                    CheckRecord {
                        name: format!("{}/{}", self.suite.name(), m.name),
                        suite: self.suite,
                        anchor: m.anchor.into(),
                        status,
                        residual: Some(m.residual),
                        tolerance: m.tolerance,
                        bound: m.bound,
                        runtime_ms,
                        detail: m.detail,
                    }
                })
                .collect(),
            Err(e) => vec![CheckRecord {
                name: self.name.clone(),
                suite: self.suite,
                anchor: self.anchor.into(),
                status: Status::Fail,
                residual: None,
                tolerance: self.tolerance,
                bound: Bound::Upper,
                runtime_ms,
                detail: Some(e.to_string()),
            }],
        }
    }
}

/// Shared inputs of all suites.
struct Context {
    cfg: ScenarioConfig,
    contour: ContourSpec,
    ops: Vec<Arc<GeneratedOperator>>,
    p: Arc<SliceFunction>,
    q: Arc<SliceFunction>,
}

impl Context {
    fn rng(&self, suite: Suite, index: u64) -> rand_chacha::ChaCha8Rng {
        stream_rng(self.cfg.seed, (1 + suite.index()) << 32 | index)
    }

    fn equality_tol(&self) -> f64 {
        (10.0 * self.cfg.quadrature.tol).max(1e-7)
    }
}

fn rel(a: &RightLinearOperator, b: &RightLinearOperator) -> Result<f64> {
    Ok(a.distance(b)? / b.norm().max(1.0))
}

fn op_name(k: usize) -> String {
    format!("op{k}")
}

/// Runs the configured suites. Check failures are report entries; only an
/// invalid configuration is an error.
pub fn run_suite(cfg: &ScenarioConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let ops = (0..cfg.operators as u64)
        .map(|k| generate_operator_indexed(cfg, k).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    let theta = cfg.sector.theta;
    let default_p = if cfg.n >= 2 {
        "poly:[0,e2,1]:right"
    } else {
        "poly:[0,e1,1]:right"
    };
    let p_id = cfg.rational.p.clone().unwrap_or_else(|| default_p.into());
    let q_id = cfg
        .rational
        .q
        .clone()
        .unwrap_or_else(|| "poly:[1,0,2,0,1]".into());
    let ctx = Arc::new(Context {
        cfg: cfg.clone(),
        contour: cfg.contour()?,
        ops,
        p: Arc::new(parse_function(cfg.n, &p_id, theta)?),
        q: Arc::new(parse_function(cfg.n, &q_id, theta)?),
    });
    let mut suites = cfg.suites.clone();
    suites.sort();
    suites.dedup();
    let mut checks = Vec::new();
    for &suite in &suites {
        checks.extend(match suite {
            Suite::Algebra => algebra_checks(&ctx),
            Suite::Resolvent => resolvent_checks(&ctx),
            Suite::LemmaEstimates => estimate_checks(&ctx),
            Suite::Decomposition => decomposition_checks(&ctx),
            Suite::RnDensity => rn_checks(&ctx),
            Suite::Omega => omega_checks(&ctx),
            Suite::HinftyLeft => hinf_left_checks(&ctx),
            Suite::HinftyRight => hinf_right_checks(&ctx),
            Suite::Relations => relation_checks(&ctx),
            Suite::ProductRules => product_checks(&ctx),
            Suite::Rational => rational_checks(&ctx),
        });
    }
    let timing = cfg.timing;
    let mut records: Vec<CheckRecord> = checks
        .par_iter()
        .flat_map_iter(|c| c.execute(timing))
        .collect();
    records.sort_by(|a, b| a.name.cmp(&b.name));
    let mut summary = Summary {
        total: records.len(),
        ..Summary::default()
    };
    for r in &records {
        match r.status {
            Status::Pass => summary.passed += 1,
            Status::Fail => summary.failed += 1,
            Status::Skip => summary.skipped += 1,
        }
    }
    Ok(VerificationReport {
        seed: cfg.seed,
        rng: cfg.rng.clone(),
        suites,
        records,
        summary,
    })
}

/// Number of random samples per algebra identity and dimension.
pub const ALGEBRA_SAMPLES: usize = 10_000;

fn random_paravector(n: usize, rng: &mut impl Rng) -> Paravector {
    Paravector {
        n,
        s0: rng.random_range(-1.0..1.0),
        v: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
    }
}

fn random_module_vector(dim: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0))
}

fn algebra_checks(ctx: &Arc<Context>) -> Vec<Check> {
    let suite = Suite::Algebra;
    let mut out = Vec::new();
    for n in 1..=3usize {
        let c = ctx.clone();
        out.push(Check::new(
            suite,
            format!("identities/n{n}"),
            "clifford-relations",
            1e-12,
            move || {
                let mut rng = c.rng(suite, n as u64);
                let (mut assoc, mut anti, mut conj, mut norm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
                for i in 1..=n {
                    for j in 1..=n {
                        let (a, b) = (
                            CliffordElement::generator(n, i)?,
                            CliffordElement::generator(n, j)?,
                        );
                        let want = if i == j {
                            CliffordElement::scalar(n, -2.0)
                        } else {
                            CliffordElement::zero(n)
                        };
                        anti = anti.max((&(&a.mul(&b)? + &b.mul(&a)?) - &want).abs());
                    }
                }
                for _ in 0..ALGEBRA_SAMPLES {
                    let (a, b, cc) = (
                        random_element(n, &mut rng),
                        random_element(n, &mut rng),
                        random_element(n, &mut rng),
                    );
                    let lhs = a.mul(&b)?.mul(&cc)?;
                    let rhs = a.mul(&b.mul(&cc)?)?;
                    assoc = assoc.max((&lhs - &rhs).abs() / (a.abs() * b.abs() * cc.abs()));

                    let (x, y) = (
                        random_paravector(n, &mut rng),
                        random_paravector(n, &mut rng),
                    );
                    let (xv, yv) = (
                        Paravector {
                            n,
                            s0: 0.0,
                            v: x.v.clone(),
                        }
                        .to_element(),
                        Paravector {
                            n,
                            s0: 0.0,
                            v: y.v.clone(),
                        }
                        .to_element(),
                    );
                    let dot: f64 = x.v.iter().zip(&y.v).map(|(p, q)| p * q).sum();
                    let sym =
                        &(&xv.mul(&yv)? + &yv.mul(&xv)?) + &CliffordElement::scalar(n, 2.0 * dot);
                    anti = anti.max(sym.abs() / (xv.abs() * yv.abs()));

                    let (xs, ys) = (x.to_element(), y.to_element());
                    let c1 = xs.mul(&ys)?.conj();
                    let c2 = ys.conj().mul(&xs.conj())?;
                    conj = conj.max((&c1 - &c2).abs() / (xs.abs() * ys.abs()));

                    let sa = xs.mul(&a)?;
                    norm = norm.max((sa.abs() - x.abs() * a.abs()).abs() / (x.abs() * a.abs()));
                    let ss = &xs.mul(&xs.conj())? - &CliffordElement::scalar(n, x.abs() * x.abs());
                    norm = norm.max(ss.abs() / (x.abs() * x.abs()));
                }
                Ok(vec![
                    Measure::upper(
                        format!("associativity/n{n}"),
                        "clifford-relations",
                        assoc,
                        1e-12,
                    ),
                    Measure::upper(
                        format!("anticommutation/n{n}"),
                        "clifford-relations",
                        anti,
                        1e-12,
                    ),
                    Measure::upper(format!("conjugation/n{n}"), "conjugation", conj, 1e-12),
                    Measure::upper(
                        format!("paravector-norm/n{n}"),
                        "paravector-norm",
                        norm,
                        1e-12,
                    ),
                ])
            },
        ));
    }
    for (k, g) in ctx.ops.iter().enumerate() {
        let c = ctx.clone();
        let g = g.clone();
        out.push(Check::new(
            suite,
            format!("module/{}", op_name(k)),
            "right-linearity",
            1e-12,
            move || {
                let t = &g.operator;
                let (n, d) = (t.n(), t.d());
                let mut rng = c.rng(suite, 100 + k as u64);
                let (mut lin, mut iso, mut bound_ok) = (0.0f64, 0.0f64, true);
                let growth = 2f64.powf(n as f64 / 2.0);
                for _ in 0..100 {
                    let v = crate::linalg::ModuleVector::new(
                        (0..d).map(|_| random_element(n, &mut rng)).collect(),
                    )?;
                    let s = random_element(n, &mut rng);
                    let lhs = t.apply(&v.scale_right(&s)?)?;
                    let rhs = t.apply(&v)?.scale_right(&s)?;
                    lin = lin.max(lhs.sub(&rhs)?.norm() / (t.norm() * v.norm() * s.abs() * growth));

                    let p = random_paravector(n, &mut rng);
                    let pe = p.to_element();
                    let scale = p.abs() * v.norm();
                    iso = iso.max((v.scale_right(&pe)?.norm() - scale).abs() / scale);
                    iso = iso.max((v.scale_left(&pe)?.norm() - scale).abs() / scale);
                    bound_ok &=
                        v.scale_left(&s)?.norm() <= growth * s.abs() * v.norm() * (1.0 + 1e-12);
                }
                // entrywise Clifford products against the embedding product
                let other = random_operator(n, d, &mut rng)?;
                let mut rows = Vec::with_capacity(d);
                for i in 0..d {
                    let mut row = Vec::with_capacity(d);
                    for j in 0..d {
                        let mut acc = CliffordElement::zero(n);
                        for l in 0..d {
                            acc += &t.entry(i, l).mul(other.entry(l, j))?;
                        }
                        row.push(acc);
                    }
                    rows.push(row);
                }
                let direct = RightLinearOperator::new(rows)?;
                let hom = (direct.embedding() - t.embedding() * other.embedding()).norm()
                    / (t.norm() * other.norm()).max(1.0);
                Ok(vec![
                    Measure::upper(
                        format!("right-linearity/{}", op_name(k)),
                        "right-linearity",
                        lin,
                        1e-12,
                    ),
                    Measure::upper(
                        format!("module-norm/{}", op_name(k)),
                        "module-norm",
                        iso,
                        1e-12,
                    )
                    .require(bound_ok),
                    Measure::upper(
                        format!("embedding-homomorphism/{}", op_name(k)),
                        "real-embedding",
                        hom,
                        1e-12,
                    ),
                ])
            },
        ));
        let c = ctx.clone();
        let g = ctx.ops[k].clone();
        out.push(Check::new(
            suite,
            format!("eigen-spheres/{}", op_name(k)),
            "s-spectrum",
            1e-8,
            move || {
                let t = &g.operator;
                let n = t.n();
                let spheres = t.eigen_spheres()?;
                let tn = t.norm();
                let mut rng = c.rng(suite, 200 + k as u64);
                let sigma_min = |s: &Paravector| -> Result<(f64, f64)> {
                    let q = t.embedding() * t.embedding() - t.embedding() * (2.0 * s.s0)
                        + DMatrix::identity(t.dim(), t.dim()) * (s.abs() * s.abs());
                    let scale = tn * tn + 2.0 * s.s0.abs() * tn + s.abs() * s.abs();
                    Ok((singular_values(&q).min(), scale.max(f64::MIN_POSITIVE)))
                };
                let mut on = 0.0f64;
                for sp in &spheres {
                    let (smin, scale) = sigma_min(&sp.sample(&random_unit(n, &mut rng)))?;
                    on = on.max(smin / scale);
                }
                let mut off_ok = true;
                let mut tested = 0;
                while tested < 20 {
                    let (x, y) = (
                        rng.random_range(-1.5..1.5) * tn.max(1.0),
                        rng.random_range(0.0..1.5) * tn.max(1.0),
                    );
                    if spheres
                        .iter()
                        .any(|sp| (sp.center - x).hypot(sp.radius - y) < 0.1)
                    {
                        continue;
                    }
                    tested += 1;
                    let (smin, scale) =
                        sigma_min(&Paravector::on_slice(x, y, &random_unit(n, &mut rng)))?;
                    off_ok &= smin > 1e-8 * scale;
                }
                Ok(vec![Measure::upper(
                    format!("eigen-spheres/{}", op_name(k)),
                    "s-spectrum",
                    on,
                    1e-8,
                )
                .require(off_ok)
                .detail(format!("{} spheres", spheres.len()))])
            },
        ));
    }
    out
}

fn resolvent_checks(ctx: &Arc<Context>) -> Vec<Check> {
    let suite = Suite::Resolvent;
    let mut out = Vec::new();
    for (k, base) in ctx.ops.iter().enumerate() {
        let (c, g) = (ctx.clone(), base.clone());
        out.push(Check::new(
            suite,
            format!("series/{}", op_name(k)),
            "resolvent-series",
            1e-9,
            move || {
                let t = &g.operator;
                let n = t.n();
                let mut rng = c.rng(suite, k as u64);
                let mut worst = 0.0f64;
                for _ in 0..20 {
                    let r = t.norm().max(1e-3) * rng.random_range(2.2..6.0);
                    let a = rng.random_range(0.0..PI);
                    let s =
                        Paravector::on_slice(r * a.cos(), r * a.sin(), &random_unit(n, &mut rng));
                    let exact = s_resolvent_left(t, &s)?;
                    let series = neumann_resolvent(t, &s, 60)?;
                    worst = worst.max(series.distance(&exact)? / exact.norm());
                }
                Ok(vec![Measure::upper(
                    format!("series/{}", op_name(k)),
                    "resolvent-series",
                    worst,
                    1e-9,
                )])
            },
        ));
        let (c, g) = (ctx.clone(), base.clone());
        out.push(Check::new(
            suite,
            format!("identities/{}", op_name(k)),
            "resolvent-identities",
            1e-10,
            move || {
                let t = &g.operator;
                let n = t.n();
                let phi = c.cfg.sector.phi;
                let mut rng = c.rng(suite, 100 + k as u64);
                let (mut worst, mut axial) = (0.0f64, 0.0f64);
                for _ in 0..50 {
                    let r = 10f64.powf(rng.random_range(-1.5..1.5));
                    let a = rng.random_range(phi..PI - phi);
                    let s =
                        Paravector::on_slice(r * a.cos(), r * a.sin(), &random_unit(n, &mut rng));
                    let report = resolvent_identities_check(t, &s, None)?;
                    let sl = s_resolvent_left(t, &s)?;
                    let scale = (sl.norm() * (t.norm() + s.abs())).max(1.0);
                    worst = worst.max(report.max_identity_residual() / scale);
                    let other = Paravector::on_slice(s.s0, s.imag_abs(), &random_unit(n, &mut rng));
                    let (q1, q2) = (qs_inverse(t, &s)?, qs_inverse(t, &other)?);
                    axial = axial.max(rel(&q1, &q2)?);
                }
                Ok(vec![
                    Measure::upper(
                        format!("identities/{}", op_name(k)),
                        "resolvent-identities",
                        worst,
                        1e-10,
                    ),
                    Measure::upper(
                        format!("axial-symmetry/{}", op_name(k)),
                        "s-spectrum",
                        axial,
                        1e-12,
                    ),
                ])
            },
        ));
        match &base.spheres {
            Some(want) => {
                let (want, g) = (want.clone(), base.clone());
                out.push(Check::new(
                    suite,
                    format!("s-spectrum/{}", op_name(k)),
                    "s-spectrum",
                    1e-8,
                    move || {
                        let key = |s: &crate::clifford::SpectralSphere| (s.center, s.radius);
                        let mut want: Vec<(f64, f64)> = want.iter().map(key).collect();
                        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
                        want.dedup_by(|a, b| {
                            (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12
                        });
                        let mut got: Vec<(f64, f64)> =
                            s_spectrum(&g.operator)?.iter().map(key).collect();
                        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
                        let same = want.len() == got.len();
                        let worst = want
                            .iter()
                            .zip(&got)
                            .map(|(a, b)| (a.0 - b.0).abs() + (a.1 - b.1).abs())
                            .fold(0.0, f64::max);
                        Ok(vec![Measure::upper(
                            format!("s-spectrum/{}", op_name(k)),
                            "s-spectrum",
                            worst,
                            1e-8,
                        )
                        .require(same)
                        .detail(format!(
                            "{} spheres expected, {} found",
                            want.len(),
                            got.len()
                        ))])
                    },
                ));
            }
            None => out.push(Check::skipped(
                suite,
                format!("s-spectrum/{}", op_name(k)),
                "s-spectrum",
                "generator has no reference spectrum",
            )),
        }
    }
    out
}

/// Minimum number of certificate samples per operator.
pub const MIN_ESTIMATE_SAMPLES: usize = 500;

fn estimate_checks(ctx: &Arc<Context>) -> Vec<Check> {
    let suite = Suite::LemmaEstimates;
    ctx.ops
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let (c, g) = (ctx.clone(), g.clone());
            Check::new(
                suite,
                format!("estimates/{}", op_name(k)),
                "resolvent-estimates",
                0.0,
                move || {
                    let t = &g.operator;
                    let cert = certify_bisectorial(
                        t,
                        c.cfg.sector.phi,
                        &CertificationGrid::standard(t.n()),
                    )?;
                    if !cert.passed {
                        return Err(Error::CertificationFailed(cert.failure.unwrap_or_default()));
                    }
                    let est = resolvent_estimates(t, &cert)?;
                    let enough = est.samples >= MIN_ESTIMATE_SAMPLES;
                    Ok(vec![Measure::upper(
                        format!("estimates/{}", op_name(k)),
                        "resolvent-estimates",
                        est.total_violations() as f64,
                        0.0,
                    )
                    .require(enough)
                    .detail(format!(
                        "C_phi = {:.6}, samples = {}, worst ratios = {:?}",
                        cert.c_phi, est.samples, est.worst_ratio
                    ))])
                },
            )
        })
        .collect()
}

fn decomposition_checks(ctx: &Arc<Context>) -> Vec<Check> {
    let suite = Suite::Decomposition;
    let mut out = Vec::new();
    for (k, g) in ctx.ops.iter().enumerate() {
        let (c, g) = (ctx.clone(), g.clone());
        out.push(Check::new(
            suite,
            format!("kernel-range/{}", op_name(k)),
            "kernel-range-decomposition",
            1e-6,
            move || {
                let t = &g.operator;
                let dec = kernel_range_decomposition(t);
                let mut rng = c.rng(suite, k as u64);
                let u = random_module_vector(t.dim(), &mut rng);
                let v = t.embedding() * u;
                let trend = limit_check(t, PI / 2.0, &c.contour.j, &v)?;
                let ratio = |xs: &[f64]| xs.last().unwrap() / xs[0].max(f64::MIN_POSITIVE);
                Ok(vec![
                    Measure::lower(
                        format!("kernel-range/{}", op_name(k)),
                        "kernel-range-decomposition",
                        dec.min_angle,
                        1e-6,
                    )
                    .require(dec.kernel_dim + dec.range_dim == dec.dim)
                    .detail(format!(
                        "dim {} = kernel {} + range {}",
                        dec.dim, dec.kernel_dim, dec.range_dim
                    )),
                    Measure::upper(
                        format!("limits/{}", op_name(k)),
                        "resolvent-limits",
                        ratio(&trend.at_infinity).max(ratio(&trend.at_zero)),
                        1e-6,
                    )
                    .require(trend.passed),
                ])
            },
        ));
    }
    out
}

fn rn_checks(ctx: &Arc<Context>) -> Vec<Check> {
    let suite = Suite::RnDensity;
    let mut out = Vec::new();
    for (k, g) in ctx.ops.iter().enumerate() {
        if !g.is_injective() {
            out.push(Check::skipped(
                suite,
                format!("approximants/{}", op_name(k)),
                "rn-approximants",
                "operator has a kernel",
            ));
            continue;
        }
        let (c, g) = (ctx.clone(), g.clone());
        out.push(Check::new(
            suite,
            format!("approximants/{}", op_name(k)),
            "rn-approximants",
            1e-6,
            move || {
                let t = &g.operator;
                let mut rng = c.rng(suite, k as u64);
                let vs: Vec<DVector<f64>> = (0..10)
                    .map(|_| random_module_vector(t.dim(), &mut rng))
                    .collect();
                let mut measures = Vec::new();
                for m in [1u32, 2] {
                    let mut errors = vec![Vec::new(); vs.len()];
                    let mut full_rank = true;
                    for e in 1..=6 {
                        let r = rn_operator(t, 10f64.powi(e))?.pow(m);
                        let rank = r.embedding().rank(1e-12 * r.norm());
                        full_rank &= rank == t.dim();
                        for (i, v) in vs.iter().enumerate() {
                            errors[i].push((r.embedding() * v - v).norm() / v.norm());
                        }
                    }
                    let monotone = errors.iter().all(|e| e.windows(2).all(|w| w[1] <= w[0]));
                    let last = errors
                        .iter()
                        .map(|e| *e.last().unwrap())
                        .fold(0.0, f64::max);
                    measures.push(
                        Measure::upper(
                            format!("approximants/m{m}/{}", op_name(k)),
                            "rn-approximants",
                            last,
                            1e-6,
                        )
                        .require(monotone)
                        .detail(format!("monotone decrease over n = 1e1..1e6: {monotone}")),
                    );
                    measures.push(Measure::upper(
                        format!("range/m{m}/{}", op_name(k)),
                        "rn-range",
                        if full_rank { 0.0 } else { 1.0 },
                        0.0,
                    ));
                }
                Ok(measures)
            },
        ));
    }
    out
}

/// `T^a (I + T^2)^{-b}` by direct matrix algebra.
fn algebraic_power_ratio(t: &RightLinearOperator, a: u32, b: u32) -> Result<RightLinearOperator> {
    let e = t.embedding();
    let dim = t.dim();
    let q = DMatrix::identity(dim, dim) + e * e;
    let qinv = q
        .try_inverse()
        .ok_or(Error::SingularOperator { rcond: 0.0 })?;
    let mut m = DMatrix::identity(dim, dim);
    for _ in 0..a {
        m = e * m;
    }
    for _ in 0..b {
        m = &qinv * m;
    }
    RightLinearOperator::from_embedding(t.n(), t.d(), &m)
}

fn s_over_q2(n: usize, theta: f64) -> Result<SliceFunction> {
    make_rational(
        &make_real_polynomial(n, &[0.0, 1.0])?,
        &make_real_polynomial(n, &[1.0, 0.0, 2.0, 0.0, 1.0])?,
        theta,
    )
}

fn omega_checks(ctx: &Arc<Context>) -> Vec<Check> {
    let suite = Suite::Omega;
    let mut out = Vec::new();
    let n = ctx.cfg.n;
    let theta = ctx.cfg.sector.theta;
    for (k, g) in ctx.ops.iter().enumerate() {
        for (label, a, b) in [("s-over-q2", 1u32, 2u32), ("s3-over-q3", 3, 3)] {
            let (c, g) = (ctx.clone(), g.clone());
            out.push(Check::new(
                suite,
                format!("oracle/{label}/{}", op_name(k)),
                "omega-calculus",
                1e-8,
                move || {
                    let t = &g.operator;
                    let f = if a == 1 {
                        s_over_q2(t.n(), theta)?
                    } else {
                        regularizer(t.n(), 3)?
                    };
                    let oracle = algebraic_power_ratio(t, a, b)?;
                    let mut measures = Vec::new();
                    for side in [Side::Left, Side::Right] {
                        let got = omega_calc(&f, t, &c.contour, side)?;
                        measures.push(Measure::upper(
                            format!("oracle/{label}/{}/{}", op_name(k), side_name(side)),
                            "omega-calculus",
                            rel(&got, &oracle)?,
                            1e-8,
                        ));
                    }
                    Ok(measures)
                },
            ));
        }
        let (c, g) = (ctx.clone(), g.clone());
        let tol = ctx.equality_tol();
        out.push(Check::new(
            suite,
            format!("contour-invariance/{}", op_name(k)),
            "omega-independence",
            tol,
            move || {
                let t = &g.operator;
                let f = s_over_q2(t.n(), theta)?;
                let base = omega_calc(&f, t, &c.contour, Side::Left)?;
                let mut rng = c.rng(suite, k as u64);
                let phis = [c.cfg.sector.phi, 0.5 * (c.cfg.sector.phi + theta)];
                let mut units = vec![c.contour.j.clone()];
                units.extend((0..2).map(|_| random_unit(t.n(), &mut rng)));
                let mut worst = 0.0f64;
                for &phi in &phis {
                    for j in &units {
                        let cfg = c.contour.clone().with_phi(phi).with_j(j.clone());
                        for side in [Side::Left, Side::Right] {
                            worst = worst.max(rel(&omega_calc(&f, t, &cfg, side)?, &base)?);
                        }
                    }
                }
                Ok(vec![Measure::upper(
                    format!("contour-invariance/{}", op_name(k)),
                    "omega-independence",
                    worst,
                    tol,
                )])
            },
        ));
    }
    let c = ctx.clone();
    out.push(Check::new(
        suite,
        "slice-functions",
        "slice-hyperholomorphy",
        1e-10,
        move || {
            let builtins: Vec<SliceFunction> = vec![
                make_real_polynomial(n, &[0.0, 1.0])?,
                make_polynomial(
                    vec![CliffordElement::one(n), CliffordElement::generator(n, n)?],
                    Side::Left,
                )?,
                (*c.p).clone(),
                make_rational(&c.p, &c.q, theta)?,
                regularizer(n, 2)?,
            ];
            let mut rng = c.rng(suite, 1000);
            let mut measures = Vec::new();
            for (i, f) in builtins.iter().enumerate() {
                let (mut jc, mut comm, mut sym) = (0.0f64, 0.0f64, 0.0f64);
                for _ in 0..100 {
                    let j = random_unit(n, &mut rng);
                    let r = 10f64.powf(rng.random_range(-1.0..1.0));
                    let a = rng.random_range(-0.95..0.95) * theta;
                    let a = if rng.random_bool(0.5) { a } else { PI - a };
                    let (x, y) = (r * a.cos(), r * a.sin());
                    let v1 = f.eval_on_slice(x, y, &j);
                    let v2 = f.eval_on_slice(x, -y, &j.negate());
                    jc = jc.max((&v1 - &v2).abs() / v1.abs().max(1.0));
                    let s = Paravector::on_slice(x, y, &j);
                    let se = s.to_element();
                    if f.flavor() == crate::slice::Flavor::Intrinsic {
                        comm = comm.max(
                            (&v1.mul(&se)? - &se.mul(&v1)?).abs() / (v1.abs() * s.abs()).max(1.0),
                        );
                    }
                    if let Some(form) = f.symbolic() {
                        let exact = form.eval_exact(&s)?;
                        sym = sym.max((&f.eval(&s)? - &exact).abs() / exact.abs().max(1.0));
                    }
                }
                let val = f.validate(theta);
                let name = format!("slice/{i}-{}", f.label());
                measures.push(Measure::upper(
                    format!("{name}/j-consistency"),
                    "slice-hyperholomorphy",
                    jc,
                    1e-12,
                ));
                measures.push(Measure::upper(
                    format!("{name}/intrinsic-commute"),
                    "slice-hyperholomorphy",
                    comm,
                    1e-12,
                ));
                measures.push(Measure::upper(
                    format!("{name}/symbolic"),
                    "slice-hyperholomorphy",
                    sym,
                    1e-10,
                ));
                measures.push(
                    Measure::upper(
                        format!("{name}/validation"),
                        "slice-hyperholomorphy",
                        val.compatibility,
                        1e-10,
                    )
                    .require(val.passed)
                    .detail(format!(
                        "cauchy-riemann {:.3e}, intrinsic {:.3e}, decay tail {:.3e}",
                        val.cauchy_riemann, val.intrinsic, val.decay_tail
                    )),
                );
            }
            Ok(measures)
        },
    ));
    out
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn injective_or_skip(
    ctx: &Arc<Context>,
    suite: Suite,
    name: &str,
    anchor: &'static str,
    tol: f64,
    run: impl Fn(&Context, &RightLinearOperator, usize) -> Result<Vec<Measure>>
        + Send
        + Sync
        + Clone
        + 'static,
) -> Vec<Check> {
    ctx.ops
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let full = format!("{name}/{}", op_name(k));
            if !g.is_injective() {
                return Check::skipped(suite, full, anchor, "operator has a kernel");
            }
            let (c, g, run) = (ctx.clone(), g.clone(), run.clone());
            Check::new(suite, full, anchor, tol, move || run(&c, &g.operator, k))
        })
        .collect()
}

fn hinf_left_checks(ctx: &Arc<Context>) -> Vec<Check> {
    let suite = Suite::HinftyLeft;
    let tol = ctx.equality_tol();
    injective_or_skip(
        ctx,
        suite,
        "reproduction",
        "left-hinfty",
        1e-7,
        move |c, t, k| {
            let n = t.n();
            let s = make_real_polynomial(n, &[0.0, 1.0])?;
            let s2 = make_real_polynomial(n, &[0.0, 0.0, 1.0])?;
            let f = s_over_q2(n, c.cfg.sector.theta)?;
            let id = rel(&hinf_left(&s, t, &c.contour, None)?, t)?;
            let sq = rel(&hinf_left(&s2, t, &c.contour, None)?, &t.pow(2))?;
            let dec = rel(
                &hinf_left(&f, t, &c.contour, None)?,
                &omega_calc(&f, t, &c.contour, Side::Left)?,
            )?;
            let reg = (1..=3)
                .map(|m| regularizer_cross_check(t, m, &c.contour))
                .collect::<Result<Vec<_>>>()?;
            let op = op_name(k);
            Ok(vec![
                Measure::upper(format!("identity/{op}"), "left-hinfty", id, 1e-7),
                Measure::upper(format!("square/{op}"), "left-hinfty", sq, 1e-7),
                Measure::upper(
                    format!("decaying-consistency/{op}"),
                    "left-hinfty",
                    dec,
                    tol,
                ),
                Measure::upper(
                    format!("regularizer-paths/{op}"),
                    "regularizer",
                    reg.into_iter().fold(0.0, f64::max),
                    1e-8,
                ),
            ])
        },
    )
}

fn random_right_poly(n: usize, rng: &mut impl Rng) -> Result<SliceFunction> {
    make_polynomial(
        (0..3).map(|_| random_element(n, rng)).collect(),
        Side::Right,
    )
}

fn hinf_right_checks(ctx: &Arc<Context>) -> Vec<Check> {
    let suite = Suite::HinftyRight;
    let tol = ctx.equality_tol();
    injective_or_skip(
        ctx,
        suite,
        "well-defined",
        "right-hinfty-well-defined",
        1e-7,
        move |c, t, k| {
            let n = t.n();
            let cfg = &c.contour;
            let theta = c.cfg.sector.theta;
            let mut rng = c.rng(suite, k as u64);
            let op = op_name(k);

            let p = random_right_poly(n, &mut rng)?;
            let auto = hinf_right(&p, t, cfg, None)?;
            let bumped = hinf_right(&p, t, cfg, Some(auto.provenance.m + 2))?;
            let m_indep = relation_discrepancy(&auto.relation, &bumped.relation)?;
            let poly = rel(
                auto.as_operator.as_ref().ok_or(Error::NotInjective(0))?,
                &poly_calc_right(&p.symbolic().unwrap().num, t)?,
            )?;
            let domain_gap = (t.dim() - auto.relation.domain().ncols()) as f64;

            let intrinsic = make_real_polynomial(n, &[1.0, 0.0, 1.0])?;
            let hr = hinf_right(&intrinsic, t, cfg, None)?;
            let intr = rel(
                hr.as_operator.as_ref().ok_or(Error::NotInjective(0))?,
                &hinf_left(&intrinsic, t, cfg, None)?,
            )?;

            let f = s_over_q2(n, theta)?;
            let a = random_element(n, &mut rng);
            let af = f.scale(&a, Side::Left)?;
            let hd = hinf_right(&af, t, cfg, None)?;
            let dec = rel(
                hd.as_operator.as_ref().ok_or(Error::NotInjective(0))?,
                &omega_calc(&af, t, cfg, Side::Right)?,
            )?;

            let ladder = [
                omega_calc(&f, t, cfg, Side::Left)?,
                omega_calc(&f, t, cfg, Side::Right)?,
                hinf_left(&f, t, cfg, None)?,
                hinf_right(&f, t, cfg, None)?.relation.to_operator()?,
            ];
            let mut lad = 0.0f64;
            for i in 0..ladder.len() {
                for j in i + 1..ladder.len() {
                    lad = lad.max(rel(&ladder[i], &ladder[j])?);
                }
            }
            let rat = rational_calc_right(&c.p, &c.q, t, cfg, None)?;
            Ok(vec![
                Measure::upper(
                    format!("m-independence/{op}"),
                    "right-hinfty-well-defined",
                    m_indep,
                    1e-7,
                )
                .detail(format!(
                    "m = {} and {}",
                    auto.provenance.m,
                    auto.provenance.m + 2
                )),
                Measure::upper(
                    format!("intrinsic-agreement/{op}"),
                    "right-hinfty-well-defined",
                    intr,
                    1e-7,
                ),
                Measure::upper(
                    format!("decaying-agreement/{op}"),
                    "right-hinfty-well-defined",
                    dec,
                    1e-7,
                ),
                Measure::upper(
                    format!("polynomial/{op}"),
                    "right-polynomial-calculus",
                    poly,
                    1e-7,
                ),
                Measure::upper(
                    format!("dense-domain/{op}"),
                    "dense-domain",
                    domain_gap,
                    0.0,
                ),
                Measure::upper(format!("agreement-ladder/{op}"), "right-hinfty", lad, tol),
                Measure::upper(
                    format!("rational/{op}"),
                    "rational-calculus",
                    rat.discrepancy,
                    1e-7,
                ),
            ])
        },
    )
}

/// Number of brute-force relation instances.
pub const RELATION_CASES: usize = 8;

/// Real generators of the module spanned by integer pairs, closed under
/// right multiplication by `e_1` (algebra `R_1`).
fn integer_relation(d: usize, gens: usize, rng: &mut impl Rng) -> Result<Vec<Vec<i64>>> {
    let e1 = CliffordElement::generator(1, 1)?;
    let mut out = Vec::new();
    for _ in 0..gens {
        let entries: Vec<CliffordElement> = (0..2 * d)
            .map(|_| {
                CliffordElement::from_coeffs(
                    1,
                    vec![
                        rng.random_range(-1..=1) as f64,
                        rng.random_range(-1..=1) as f64,
                    ],
                )
            })
            .collect::<Result<_>>()?;
        let flat = |es: &[CliffordElement]| -> Vec<i64> {
            es.iter()
                .flat_map(|e| e.coeffs().iter().map(|&x| x as i64))
                .collect()
        };
        let times_e1: Vec<CliffordElement> =
            entries.iter().map(|e| e.mul(&e1)).collect::<Result<_>>()?;
        out.push(flat(&entries));
        out.push(flat(&times_e1));
    }
    Ok(out)
}

const GRID: i64 = 4;

/// Every integer combination with coefficients in `[-GRID, GRID]`.
fn combinations(gens: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let len = gens.first().map_or(0, Vec::len);
    let mut out = vec![vec![0i64; len]];
    for g in gens {
        let mut next = Vec::with_capacity(out.len() * (2 * GRID as usize + 1));
        for base in &out {
            for c in -GRID..=GRID {
                next.push(base.iter().zip(g).map(|(b, x)| b + c * x).collect());
            }
        }
        out = next;
    }
    out
}

/// Brute-force `A + B` or `B ∘ A` by matching enumerated pairs exactly.
fn brute_force(a: &[Vec<i64>], b: &[Vec<i64>], dim: usize, compose: bool) -> DMatrix<f64> {
    let a_all = combinations(a);
    let b_all = combinations(b);
    let mut index: HashMap<&[i64], Vec<&[i64]>> = HashMap::new();
    for x in &b_all {
        index.entry(&x[..dim]).or_default().push(&x[dim..]);
    }
    let mut found: Vec<Vec<f64>> = Vec::new();
    for x in &a_all {
        let (v, w) = (&x[..dim], &x[dim..]);
        let key = if compose { w } else { v };
        if let Some(tails) = index.get(key) {
            for z in tails {
                let out: Vec<f64> = if compose {
                    v.iter().chain(z.iter()).map(|&q| q as f64).collect()
                } else {
                    v.iter()
                        .chain(
                            w.iter()
                                .zip(z.iter())
                                .map(|(p, q)| p + q)
                                .collect::<Vec<_>>()
                                .iter(),
                        )
                        .map(|&q| q as f64)
                        .collect()
                };
                found.push(out);
            }
        }
    }
    if found.is_empty() {
        return DMatrix::zeros(2 * dim, 0);
    }
    let m = DMatrix::from_fn(2 * dim, found.len(), |i, j| found[j][i]);
    let svd = Svd::thin(&m);
    let cut = 1e-9 * svd.max();
    let rank = svd.s.iter().filter(|&&s| s > cut).count();
    svd.u.columns(0, rank).into_owned()
}

fn span_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let pa = a * a.transpose();
    let pb = b * b.transpose();
    (pa - pb).norm()
}

fn to_relation(d: usize, gens: &[Vec<i64>]) -> LinearRelation {
    let m = DMatrix::from_fn(4 * d, gens.len(), |i, j| gens[j][i] as f64);
    LinearRelation::from_generators(1, d, &m)
}

fn relation_checks(ctx: &Arc<Context>) -> Vec<Check> {
    let suite = Suite::Relations;
    let mut out = Vec::new();
    for case in 0..RELATION_CASES {
        let c = ctx.clone();
        out.push(Check::new(
            suite,
            format!("brute-force/case{case}"),
            "multivalued-operators",
            1e-10,
            move || {
                let mut rng = c.rng(suite, case as u64);
                let d = 1 + case % 2;
                let ga = integer_relation(d, 1 + (case / 2) % 2, &mut rng)?;
                let gb = integer_relation(d, 2, &mut rng)?;
                let (ra, rb) = (to_relation(d, &ga), to_relation(d, &gb));
                let dim = 2 * d;
                let sum = ra.sum(&rb)?;
                let comp = rb.compose(&ra)?;
                let sum_oracle = brute_force(&ga, &gb, dim, false);
                let comp_oracle = brute_force(&ga, &gb, dim, true);
                let stability = [&ra, &rb, &sum, &comp, &comp.inverse(), &comp.closure()]
                    .iter()
                    .map(|r| r.invariant_residuals().1)
                    .fold(0.0, f64::max);
                Ok(vec![
                    Measure::upper(
                        format!("brute-force/sum/case{case}"),
                        "multivalued-operators",
                        span_distance(sum.basis(), &sum_oracle),
                        1e-10,
                    )
                    .detail(format!(
                        "d = {d}, dim {} vs oracle {}",
                        sum.dim(),
                        sum_oracle.ncols()
                    )),
                    Measure::upper(
                        format!("brute-force/compose/case{case}"),
                        "multivalued-operators",
                        span_distance(comp.basis(), &comp_oracle),
                        1e-10,
                    )
                    .detail(format!(
                        "d = {d}, dim {} vs oracle {}",
                        comp.dim(),
                        comp_oracle.ncols()
                    )),
                    Measure::upper(
                        format!("stability/case{case}"),
                        "multivalued-operators",
                        stability,
                        1e-10,
                    ),
                ])
            },
        ));
    }
    for (k, g) in ctx.ops.iter().enumerate() {
        let (c, g) = (ctx.clone(), g.clone());
        out.push(Check::new(
            suite,
            format!("faithful/{}", op_name(k)),
            "multivalued-operators",
            1e-10,
            move || {
                let t = &g.operator;
                let mut rng = c.rng(suite, 100 + k as u64);
                let s = random_operator(t.n(), t.d(), &mut rng)?;
                let a = random_element(t.n(), &mut rng);
                let gt = LinearRelation::from_operator(t, None)?;
                let gs = LinearRelation::from_operator(&s, None)?;
                let graph = |x: &RightLinearOperator| LinearRelation::from_operator(x, None);
                let worst = [
                    relation_discrepancy(&gt.sum(&gs)?, &graph(&t.add(&s)?)?)?,
                    relation_discrepancy(&gt.compose(&gs)?, &graph(&t.compose(&s)?)?)?,
                    relation_discrepancy(&gt.scale_left(&a)?, &graph(&t.scale_left(&a)?)?)?,
                ]
                .into_iter()
                .fold(0.0, f64::max);
                Ok(vec![Measure::upper(
                    format!("faithful/{}", op_name(k)),
                    "multivalued-operators",
                    worst,
                    1e-10,
                )])
            },
        ));
    }
    out
}

fn product_checks(ctx: &Arc<Context>) -> Vec<Check> {
    let suite = Suite::ProductRules;
    injective_or_skip(
        ctx,
        suite,
        "statements",
        "hinfty-product-rule",
        1e-7,
        move |c, t, k| {
            let n = t.n();
            let cfg = &c.contour;
            let mut rng = c.rng(suite, k as u64);
            let (a, b) = (random_element(n, &mut rng), random_element(n, &mut rng));
            let one = CliffordElement::one(n);
            let e = regularizer(n, 1)?;
            let s = make_real_polynomial(n, &[0.0, 1.0])?;
            let left_poly = make_polynomial(vec![one.clone(), a.clone()], Side::Left)?;
            let right_poly = make_polynomial(vec![one, a.clone()], Side::Right)?;
            let left_dec = e.scale(&b, Side::Right)?;
            let right_dec = e.scale(&b, Side::Left)?;
            let mut all = hinf_linearity_check(&left_poly, &left_dec, &a, t, cfg, Side::Left)?;
            all.extend(hinf_linearity_check(
                &right_poly,
                &right_dec,
                &a,
                t,
                cfg,
                Side::Right,
            )?);
            all.extend(hinf_product_check(&e, &left_poly, t, cfg, Side::Left)?);
            all.extend(hinf_product_check(&s, &left_dec, t, cfg, Side::Left)?);
            all.extend(hinf_product_check(&right_dec, &s, t, cfg, Side::Right)?);
            all.extend(hinf_product_check(&right_poly, &e, t, cfg, Side::Right)?);
            Ok(all
                .into_iter()
                .map(|st| {
                    let anchor = if st.name.ends_with("sum") || st.name.ends_with("scalar") {
                        "hinfty-linearity"
                    } else {
                        "hinfty-product-rule"
                    };
                    let kind = match st.kind {
                        StatementKind::Equality => "equality",
                        StatementKind::Inclusion => "inclusion",
                    };
                    Measure::upper(
                        format!("{}/{}", st.name, op_name(k)),
                        anchor,
                        st.discrepancy,
                        st.tolerance,
                    )
                    .detail(kind)
                })
                .collect())
        },
    )
}

fn rational_checks(ctx: &Arc<Context>) -> Vec<Check> {
    let suite = Suite::Rational;
    let mut out = injective_or_skip(
        ctx,
        suite,
        "routes",
        "rational-calculus",
        1e-7,
        move |c, t, k| {
            let cfg = &c.contour;
            let out = rational_calc_right(&c.p, &c.q, t, cfg, None)?;
            let mut rng = c.rng(suite, k as u64);
            let mut worst = 0.0f64;
            for _ in 0..3 {
                let v = random_module_vector(t.dim(), &mut rng);
                for n in [10.0, 100.0, 1000.0] {
                    worst = worst.max(approximant_residual(&c.p, &c.q, t, cfg, &v, n)?);
                }
            }
            let op = op_name(k);
            Ok(vec![
                Measure::upper(
                    format!("routes/{op}"),
                    "rational-calculus",
                    out.discrepancy,
                    1e-7,
                ),
                Measure::upper(
                    format!("approximant/{op}"),
                    "approximant-identity",
                    worst,
                    1e-8,
                ),
            ])
        },
    );
    let c = ctx.clone();
    out.push(Check::new(
        suite,
        "zero-in-sector",
        "rational-calculus",
        0.0,
        move || {
            let n = c.cfg.n;
            let q = make_real_polynomial(n, &[-1.0, 0.0, 1.0])?;
            let rejected = matches!(
                make_rational(&c.p, &q, c.cfg.sector.theta),
                Err(Error::ZeroInSector { .. })
            );
            Ok(vec![Measure::upper(
                "zero-in-sector",
                "rational-calculus",
                if rejected { 0.0 } else { 1.0 },
                0.0,
            )])
        },
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::SectorSpec;
    use crate::scenario::GeneratorSpec;
    use std::collections::BTreeSet;

    fn small(suites: Vec<Suite>) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::new(
            GeneratorSpec::DiagonalModel(Default::default()),
            2,
            2,
            SectorSpec::new(0.5, 0.8, 1.2).unwrap(),
            1,
        );
        cfg.suites = suites;
        cfg.operators = 1;
        cfg.timing = false;
        cfg
    }

    #[test]
    fn algebra_suite_passes() {
        let report = run_suite(&small(vec![Suite::Algebra])).unwrap();
        assert!(report.passed(), "{:#?}", report.records);
        assert!(report.summary.total >= 15);
    }

    #[test]
    fn relations_suite_matches_brute_force() {
        let report = run_suite(&small(vec![Suite::Relations])).unwrap();
        assert!(report.passed(), "{:#?}", report.records);
    }

    #[test]
    fn all_suites_cover_every_anchor_and_repeat_exactly() {
        let cfg = small(Suite::ALL.to_vec());
        let a = run_suite(&cfg).unwrap();
        let failures: Vec<_> = a
            .records
            .iter()
            .filter(|r| r.status == Status::Fail)
            .collect();
        assert!(failures.is_empty(), "{failures:#?}");
        let seen: BTreeSet<&str> = a.records.iter().map(|r| r.anchor.as_str()).collect();
        for anchor in ANCHORS {
            assert!(seen.contains(anchor), "anchor {anchor} not covered");
        }
        let b = run_suite(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn kernel_operators_are_skipped_by_calculus_suites() {
        let mut cfg = small(vec![Suite::HinftyLeft, Suite::Decomposition]);
        cfg.generator = GeneratorSpec::DiagonalModel(crate::scenario::DiagonalParams {
            zero_entries: 1,
            phase_fraction: 0.9,
        });
        let report = run_suite(&cfg).unwrap();
        assert!(report.passed(), "{:#?}", report.records);
        assert!(report
            .records_for(Suite::HinftyLeft)
            .all(|r| r.status == Status::Skip));
        let dec = report
            .records
            .iter()
            .find(|r| r.name.starts_with("decomposition/kernel-range"))
            .unwrap();
        assert!(dec.detail.as_ref().unwrap().contains("kernel 4"));
    }
}
