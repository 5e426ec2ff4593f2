//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero
//! exit status if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use slicecalc::calculus::SectorSpec;
use slicecalc::harness::{run_suite, CheckRecord, Status, VerificationReport, ALGEBRA_SAMPLES};
use slicecalc::scenario::{DiagonalParams, GeneratorSpec, ScenarioConfig, SimilarityParams, Suite};

struct Outcome {
    passed: bool,
    summary: String,
}

impl Outcome {
    fn new(passed: bool, summary: impl Into<String>) -> Self {
        Self {
            passed,
            summary: summary.into(),
        }
    }
}

fn diagonal() -> GeneratorSpec {
    GeneratorSpec::DiagonalModel(DiagonalParams::default())
}

fn similarity() -> GeneratorSpec {
    GeneratorSpec::SimilarityModel(SimilarityParams::default())
}

fn config(
    generator: GeneratorSpec,
    n: usize,
    d: usize,
    ops: usize,
    seed: u64,
    suites: &[Suite],
) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(
        generator,
        n,
        d,
        SectorSpec::new(0.5, 0.8, 1.2).unwrap(),
        seed,
    );
    cfg.operators = ops;
    cfg.suites = suites.to_vec();
    cfg
}

fn run(cfg: &ScenarioConfig) -> Result<VerificationReport, String> {
    run_suite(cfg).map_err(|e| e.to_string())
}

fn prefixed<'a>(report: &'a VerificationReport, prefix: &str) -> Vec<&'a CheckRecord> {
    report
        .records
        .iter()
        .filter(|r| r.name.starts_with(prefix))
        .collect()
}

/// Every record under `prefix` passed with residual at most `tol`; returns
/// the count and the worst residual.
fn bounded(records: &[&CheckRecord], tol: f64) -> Result<(usize, f64), String> {
    if records.is_empty() {
        return Err("no records".into());
    }
    let mut worst = 0.0f64;
    for r in records {
        let residual = r
            .residual
            .ok_or_else(|| format!("{} has no residual", r.name))?;
        if r.status != Status::Pass || !(residual <= tol) {
            return Err(format!(
                "{} residual {residual:e} (limit {tol:e}, {:?})",
                r.name, r.status
            ));
        }
        worst = worst.max(residual);
    }
    Ok((records.len(), worst))
}

fn all_pass(records: &[&CheckRecord]) -> Result<usize, String> {
    if records.is_empty() {
        return Err("no records".into());
    }
    match records.iter().find(|r| r.status != Status::Pass) {
        Some(r) => Err(format!(
            "{} is {:?}: {}",
            r.name,
            r.status,
            r.detail.clone().unwrap_or_default()
        )),
        None => Ok(records.len()),
    }
}

fn algebra() -> Result<String, String> {
    let cfg = config(diagonal(), 2, 2, 1, 101, &[Suite::Algebra]);
    let start = Instant::now();
    let report = run(&cfg)?;
    let secs = start.elapsed().as_secs_f64();
    let mut worst = 0.0f64;
    for id in [
        "associativity",
        "anticommutation",
        "conjugation",
        "paravector-norm",
    ] {
        for n in 1..=3 {
            let (_, w) = bounded(&prefixed(&report, &format!("algebra/{id}/n{n}")), 1e-12)?;
            worst = worst.max(w);
        }
    }
    if ALGEBRA_SAMPLES < 10_000 {
        return Err(format!("{ALGEBRA_SAMPLES} samples"));
    }
    if secs >= 5.0 {
        return Err(format!("took {secs:.2} s"));
    }
    Ok(format!(
        "{ALGEBRA_SAMPLES} samples x n in 1..=3, worst {worst:.1e}, {secs:.2} s"
    ))
}

fn resolvent() -> Result<String, String> {
    let report = run(&config(similarity(), 2, 2, 1, 102, &[Suite::Resolvent]))?;
    let (_, series) = bounded(&prefixed(&report, "resolvent/series"), 1e-9)?;
    let ids = prefixed(&report, "resolvent/identities");
    let (_, identities) = bounded(&ids, 1e-10)?;
    if identities >= 1e-10 {
        return Err(format!("identity residual {identities:e}"));
    }
    Ok(format!(
        "20 pairs, series {series:.1e}, identities {identities:.1e}"
    ))
}

fn estimates() -> Result<String, String> {
    let mut reports = vec![run(&config(
        diagonal(),
        2,
        2,
        2,
        103,
        &[Suite::LemmaEstimates],
    ))?];
    reports.push(run(&config(
        similarity(),
        2,
        3,
        3,
        104,
        &[Suite::LemmaEstimates],
    ))?);
    let mut ops = 0;
    let mut min_samples = usize::MAX;
    for report in &reports {
        for r in prefixed(report, "lemma-estimates/estimates") {
            all_pass(&[r])?;
            let samples = r
                .detail
                .as_deref()
                .and_then(|d| d.split("samples = ").nth(1))
                .and_then(|s| s.split(',').next())
                .and_then(|s| s.trim().parse::<usize>().ok())
                .ok_or_else(|| format!("{} lacks a sample count", r.name))?;
            if samples < 500 {
                return Err(format!("{} used {samples} samples", r.name));
            }
            min_samples = min_samples.min(samples);
            ops += 1;
        }
    }
    if ops < 5 {
        return Err(format!("{ops} operators"));
    }
    Ok(format!(
        "{ops} operators, >= {min_samples} samples each, no violations"
    ))
}

fn decomposition() -> Result<String, String> {
    let plain = run(&config(similarity(), 2, 2, 9, 105, &[Suite::Decomposition]))?;
    let kernel_gen = GeneratorSpec::DiagonalModel(DiagonalParams {
        zero_entries: 1,
        ..DiagonalParams::default()
    });
    let suites = [Suite::Decomposition, Suite::HinftyLeft, Suite::HinftyRight];
    let with_kernel = run(&config(kernel_gen, 2, 2, 1, 106, &suites))?;
    let mut ops = 0;
    let mut smallest = f64::INFINITY;
    for report in [&plain, &with_kernel] {
        let records = prefixed(report, "decomposition/kernel-range");
        all_pass(&records)?;
        for r in records {
            let angle = r.residual.unwrap_or(0.0);
            if !(angle > 1e-6) {
                return Err(format!("{} angle {angle:e}", r.name));
            }
            smallest = smallest.min(angle);
            ops += 1;
        }
    }
    let kernel_detail = prefixed(&with_kernel, "decomposition/kernel-range")[0]
        .detail
        .clone()
        .unwrap_or_default();
    if kernel_detail.contains("kernel 0") {
        return Err(format!("expected a kernel: {kernel_detail}"));
    }
    let hinf: Vec<_> = with_kernel
        .records
        .iter()
        .filter(|r| r.name.starts_with("hinfty"))
        .collect();
    if hinf.is_empty() || hinf.iter().any(|r| r.status != Status::Skip) {
        return Err("calculus suites were not skipped for the operator with a kernel".into());
    }
    Ok(format!(
        "{ops} operators ({kernel_detail}), smallest angle {smallest:.2e}"
    ))
}

fn rn_density() -> Result<String, String> {
    let report = run(&config(similarity(), 2, 2, 1, 107, &[Suite::RnDensity]))?;
    let mut worst = 0.0f64;
    for m in [1, 2] {
        let records = prefixed(&report, &format!("rn-density/approximants/m{m}"));
        let (_, w) = bounded(&records, 1e-6)?;
        for r in records {
            if !r.detail.as_deref().unwrap_or("").ends_with("true") {
                return Err(format!("{} is not monotone", r.name));
            }
        }
        worst = worst.max(w);
    }
    Ok(format!(
        "m = 1, 2 over 10 vectors, worst {worst:.1e} at n = 1e6, monotone"
    ))
}

fn omega() -> Result<String, String> {
    let mut worst = (0.0f64, 0.0f64);
    let mut slowest = 0.0f64;
    for (generator, seed) in [(diagonal(), 108), (similarity(), 109)] {
        let cfg = config(generator, 2, 2, 2, seed, &[Suite::Omega]);
        let report = run(&cfg)?;
        let (_, o) = bounded(&prefixed(&report, "omega/oracle/"), 1e-8)?;
        let (_, c) = bounded(&prefixed(&report, "omega/contour-invariance"), 1e-7)?;
        worst = (worst.0.max(o), worst.1.max(c));
        for k in 0..cfg.operators {
            let tag = format!("/op{k}");
            let ms: f64 = report
                .records
                .iter()
                .filter(|r| r.name.ends_with(&tag))
                .map(|r| r.runtime_ms)
                .sum();
            slowest = slowest.max(ms / 1e3);
        }
    }
    if slowest >= 30.0 {
        return Err(format!("{slowest:.1} s for one operator"));
    }
    Ok(format!(
        "oracle {:.1e}, phi/J invariance {:.1e}, slowest operator {slowest:.2} s",
        worst.0, worst.1
    ))
}

fn hinf_left() -> Result<String, String> {
    let report = run(&config(similarity(), 2, 2, 2, 110, &[Suite::HinftyLeft]))?;
    let (_, a) = bounded(&prefixed(&report, "hinfty-left/identity"), 1e-7)?;
    let (_, b) = bounded(&prefixed(&report, "hinfty-left/square"), 1e-7)?;
    Ok(format!("f = s {a:.1e}, f = s^2 {b:.1e}"))
}

fn hinf_right() -> Result<String, String> {
    let report = run(&config(similarity(), 2, 2, 2, 111, &[Suite::HinftyRight]))?;
    let (_, m) = bounded(&prefixed(&report, "hinfty-right/m-independence"), 1e-7)?;
    let (_, i) = bounded(&prefixed(&report, "hinfty-right/intrinsic-agreement"), 1e-7)?;
    let (_, d) = bounded(&prefixed(&report, "hinfty-right/decaying-agreement"), 1e-7)?;
    Ok(format!(
        "m-independence {m:.1e}, intrinsic {i:.1e}, decaying {d:.1e}"
    ))
}

fn rational() -> Result<String, String> {
    let mut cfg = config(similarity(), 2, 2, 5, 112, &[Suite::Rational]);
    cfg.rational.p = Some("poly:[0,e2,1]:right".into());
    cfg.rational.q = Some("poly:[1,0,2,0,1]".into());
    let report = run(&cfg)?;
    let (ops, worst) = bounded(&prefixed(&report, "rational/routes"), 1e-7)?;
    if ops < 5 {
        return Err(format!("{ops} operators"));
    }
    Ok(format!("{ops} operators, worst {worst:.1e}"))
}

fn relations() -> Result<String, String> {
    let report = run(&config(diagonal(), 1, 2, 1, 113, &[Suite::Relations]))?;
    let brute = prefixed(&report, "relations/brute-force/");
    let (cases, worst) = bounded(&brute, 1e-10)?;
    for d in [1, 2] {
        let tag = format!("d = {d},");
        if !brute
            .iter()
            .any(|r| r.detail.as_deref().unwrap_or("").starts_with(&tag))
        {
            return Err(format!("no case with {tag}"));
        }
    }
    let (_, stab) = bounded(&prefixed(&report, "relations/stability"), 1e-10)?;
    Ok(format!(
        "{cases} cases, worst {worst:.1e}, stability {stab:.1e}"
    ))
}

fn product_rules() -> Result<String, String> {
    let mut worst = (0.0f64, 0.0f64);
    let mut count = 0;
    for (generator, seed) in [(diagonal(), 114), (similarity(), 115)] {
        let report = run(&config(generator, 2, 2, 2, seed, &[Suite::ProductRules]))?;
        for r in prefixed(&report, "product-rules/") {
            let (limit, slot) = match r.detail.as_deref() {
                Some("equality") => (1e-7, &mut worst.0),
                Some("inclusion") => (1e-8, &mut worst.1),
                other => return Err(format!("{} has kind {other:?}", r.name)),
            };
            let (_, w) = bounded(&[r], limit)?;
            *slot = slot.max(w);
            count += 1;
        }
    }
    Ok(format!(
        "{count} statements, equalities {:.1e}, inclusions {:.1e}",
        worst.0, worst.1
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<String, String>); 11] = [
        ("algebra identities", algebra),
        ("resolvent series and identities", resolvent),
        ("resolvent estimates", estimates),
        ("kernel/range decomposition", decomposition),
        ("approximant density", rn_density),
        ("contour calculus oracles", omega),
        ("left regularized calculus", hinf_left),
        ("right regularized calculus", hinf_right),
        ("rational calculus routes", rational),
        ("relation arithmetic", relations),
        ("product and linearity rules", product_rules),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = match check() {
            Ok(summary) => Outcome::new(true, summary),
            Err(why) => Outcome::new(false, why),
        };
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {}", i + 1, outcome.summary);
        failed += usize::from(!outcome.passed);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
