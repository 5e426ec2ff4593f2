use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use slicecalc::calculus::{
    certify_bisectorial, omega_calc_detailed, resolvent_identities_check, s_resolvent_left,
    s_resolvent_right, s_spectrum, CertificationGrid, ContourSpec, SectorSpec,
};
use slicecalc::harness::run_suite;
use slicecalc::hinfinity::{
    choose_regularizer, hinf_left, hinf_right, rational_calc_right, regularizer_cross_check,
};
use slicecalc::scenario::{discretized_dirac, parse_function, parse_operator, ScenarioConfig};
use slicecalc::slice::Side;
use slicecalc::{CliffordElement, Error, ImaginaryUnit, Paravector, Result, RightLinearOperator};

const THREADS_ENV: &str = "SLICECALC_THREADS";

#[derive(Parser)]
#[command(
    name = "slicecalc",
    version,
    about = "S-spectrum functional calculus for Clifford-module operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct ContourArgs {
    /// Opening angle of the integration contour.
    #[arg(long, default_value_t = 0.8)]
    phi: f64,
    /// Imaginary unit of the integration slice, as comma-separated components.
    #[arg(long = "J")]
    j: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Domain angle assigned to rational function ids; defaults to the
    /// midpoint of phi and pi/2.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// S-spectrum as spheres (center, radius).
    Spectrum { op: PathBuf },
    /// Left and right S-resolvents at a paravector.
    Resolvent {
        op: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
    },
    /// Samples the scaled resolvent outside the double sector of angle phi.
    Certify {
        op: PathBuf,
        #[arg(long)]
        phi: f64,
        /// Writes the samples as CSV (|s|, angle, |s| * resolvent norm).
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Contour-integral calculus of a decaying function.
    Calc {
        op: PathBuf,
        #[arg(long = "f")]
        f: String,
        #[arg(long, default_value = "left")]
        side: Side,
        #[command(flatten)]
        contour: ContourArgs,
    },
    /// Regularized calculus of a polynomially bounded function.
    Hinf {
        op: PathBuf,
        #[arg(long = "f")]
        f: String,
        #[arg(long, default_value = "right")]
        side: Side,
        /// Regularizer exponent, or `auto`.
        #[arg(long, default_value = "auto")]
        m: String,
        #[command(flatten)]
        contour: ContourArgs,
    },
    /// Runs the verification suites of a scenario file.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Exploratory models.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// Central-difference `e_1 a(x) d/dx` on a periodic grid.
    Dirac {
        #[arg(long, default_value_t = 8)]
        points: usize,
        #[arg(long, default_value_t = 0.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0.8)]
        phi: f64,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_operator(path: &Path) -> Result<RightLinearOperator> {
    parse_operator(&read(path)?)
}

fn contour_for(t: &RightLinearOperator, args: &ContourArgs) -> Result<ContourSpec> {
    let j = match &args.j {
        Some(text) => {
            let v = text
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad component '{x}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            ImaginaryUnit::normalized(v)?
        }
        None => ImaginaryUnit::basis(t.n(), 1)?,
    };
    let sector = SectorSpec::around(args.phi, args.theta)?;
    let cfg = ContourSpec::new(sector, j).with_tol(args.tol);
    cfg.validate()?;
    Ok(cfg)
}

fn emit_text(text: &str) {
    use std::io::Write;
    // a closed pipe is not an error for a report printer
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn emit(value: &Value) {
    emit_text(&format!("{value:#}"));
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn spectrum_json(t: &RightLinearOperator) -> Result<Value> {
    Ok(json!({
        "n": t.n(),
        "d": t.d(),
        "spheres": to_json(&s_spectrum(t)?),
        "injective": t.is_injective(),
    }))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Spectrum { op } => {
            emit(&spectrum_json(&load_operator(&op)?)?);
            Ok(true)
        }
        Command::Resolvent { op, s } => {
            let t = load_operator(&op)?;
            let s = Paravector::from_element(&CliffordElement::parse(t.n(), &s)?, 0.0)?;
            let report = resolvent_identities_check(&t, &s, None)?;
            emit(&json!({
                "s": to_json(&s),
                "left": to_json(&s_resolvent_left(&t, &s)?),
                "right": to_json(&s_resolvent_right(&t, &s)?),
                "identities": to_json(&report),
            }));
            Ok(true)
        }
        Command::Certify { op, phi, profile } => {
            let t = load_operator(&op)?;
            let cert = certify_bisectorial(&t, phi, &CertificationGrid::standard(t.n()))?;
            if let Some(path) = profile {
                let mut csv = String::from("abs_s,angle,scaled_norm\n");
                for smp in &cert.samples {
                    csv.push_str(&format!(
                        "{:e},{},{:e}\n",
                        smp.radius, smp.angle, smp.scaled_norm
                    ));
                }
                std::fs::write(&path, csv)?;
            }
            emit(&json!({
                "phi": cert.phi,
                "c_phi": cert.c_phi,
                "samples": cert.samples.len(),
                "passed": cert.passed,
                "injective": cert.injective,
                "failure": cert.failure,
            }));
            Ok(cert.passed)
        }
        Command::Calc {
            op,
            f,
            side,
            contour,
        } => {
            let t = load_operator(&op)?;
            let cfg = contour_for(&t, &contour)?;
            let func = parse_function(t.n(), &f, cfg.sector.theta)?;
            let out = omega_calc_detailed(&func, &t, &cfg, side)?;
            emit(&json!({
                "function": func.label(),
                "side": side,
                "phi": cfg.sector.phi,
                "J": cfg.j.components(),
                "tol": cfg.tol,
                "operator": to_json(&out.operator),
                "quadrature": {
                    "panels": out.panels,
                    "nodes": out.nodes,
                    "t_min": out.t_min,
                    "t_max": out.t_max,
                    "last_change": out.change,
                },
            }));
            Ok(true)
        }
        Command::Hinf {
            op,
            f,
            side,
            m,
            contour,
        } => {
            let t = load_operator(&op)?;
            let cfg = contour_for(&t, &contour)?;
            let func = parse_function(t.n(), &f, cfg.sector.theta)?;
            let m = match m.as_str() {
                "auto" => None,
                other => Some(
                    other
                        .parse::<u32>()
                        .map_err(|_| Error::Parse(format!("bad --m '{other}'")))?,
                ),
            };
            let chosen = match m {
                Some(m) => m,
                None => choose_regularizer(&func)?.m,
            };
            let regularizer_paths = regularizer_cross_check(&t, chosen, &cfg)?;
            let mut out = match side {
                Side::Left => {
                    let op = hinf_left(&func, &t, &cfg, m)?;
                    json!({
                        "operator": to_json(&op),
                        "provenance": {
                            "m": chosen, "phi": cfg.sector.phi, "J": cfg.j.components(),
                            "tol": cfg.tol, "side": side,
                        },
                    })
                }
                Side::Right => {
                    let r = hinf_right(&func, &t, &cfg, m)?;
                    json!({
                        "operator": r.as_operator.as_ref().map(to_json),
                        "relation": to_json(&r.relation),
                        "provenance": to_json(&r.provenance),
                    })
                }
            };
            let mut metrics = json!({ "regularizer_paths": regularizer_paths });
            if let (Side::Right, Some(rest)) = (side, f.trim().strip_prefix("rat:")) {
                if let Some((p, q)) = rest.trim_end_matches(":right").split_once("]/[") {
                    let p = parse_function(t.n(), &format!("poly:{p}]:right"), cfg.sector.theta)?;
                    let q = parse_function(t.n(), &format!("poly:[{q}"), cfg.sector.theta)?;
                    metrics["rational_routes"] =
                        json!(rational_calc_right(&p, &q, &t, &cfg, m)?.discrepancy);
                }
            }
            out["function"] = json!(func.label());
            out["discrepancy"] = metrics;
            emit(&out);
            Ok(true)
        }
        Command::Verify { config, out, csv } => {
            let cfg = ScenarioConfig::from_json(&read(&config)?)?;
            let report = run_suite(&cfg)?;
            let text = serde_json::to_string_pretty(&report)?;
            match out {
                Some(path) => std::fs::write(&path, text)?,
                None => emit_text(&text),
            }
            if let Some(path) = csv {
                std::fs::write(&path, report.to_csv())?;
            }
            eprintln!(
                "{} checks: {} passed, {} failed, {} skipped",
                report.summary.total,
                report.summary.passed,
                report.summary.failed,
                report.summary.skipped
            );
            Ok(report.passed())
        }
        Command::Demo {
            which:
                Demo::Dirac {
                    points,
                    amplitude,
                    n,
                    phi,
                },
        } => {
            let t = discretized_dirac(n, points, amplitude)?;
            let cert = match certify_bisectorial(&t, phi, &CertificationGrid::standard(n)) {
                Ok(c) => json!({
                    "passed": c.passed, "c_phi": c.c_phi, "samples": c.samples.len(),
                    "injective": c.injective, "failure": c.failure,
                }),
                Err(e) => json!({ "passed": false, "failure": e.to_string() }),
            };
            emit(&json!({
                "points": points,
                "amplitude": amplitude,
                "spectrum": spectrum_json(&t)?,
                "certificate": cert,
            }));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    if let Some(k) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .ok();
    }
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
