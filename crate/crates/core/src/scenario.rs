//! Scenario configuration, seeded test-operator generators, function ids
//! and operator files.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{ContourSpec, SectorSpec};
use crate::clifford::{CliffordElement, ImaginaryUnit, SpectralSphere};
use crate::error::{Error, Result};
use crate::linalg::{singular_values, RightLinearOperator};
use crate::slice::{make_polynomial, make_rational, regularizer, Side, SliceFunction};

/// Name of the only supported generator stream.
pub const RNG_NAME: &str = "chacha8-v1";

/// Upper bound on the condition number of similarity transforms.
pub const MAX_SIMILARITY_CONDITION: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Algebra,
    Resolvent,
    LemmaEstimates,
    Decomposition,
    RnDensity,
    Omega,
    HinftyLeft,
    HinftyRight,
    Relations,
    ProductRules,
    Rational,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Algebra,
        Suite::Resolvent,
        Suite::LemmaEstimates,
        Suite::Decomposition,
        Suite::RnDensity,
        Suite::Omega,
        Suite::HinftyLeft,
        Suite::HinftyRight,
        Suite::Relations,
        Suite::ProductRules,
        Suite::Rational,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Resolvent => "resolvent",
            Suite::LemmaEstimates => "lemma-estimates",
            Suite::Decomposition => "decomposition",
            Suite::RnDensity => "rn-density",
            Suite::Omega => "omega",
            Suite::HinftyLeft => "hinfty-left",
            Suite::HinftyRight => "hinfty-right",
            Suite::Relations => "relations",
            Suite::ProductRules => "product-rules",
            Suite::Rational => "rational",
        }
    }

    pub fn index(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap() as u64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagonalParams {
    /// Trailing diagonal entries set to zero.
    pub zero_entries: usize,
    /// Sphere phases are drawn from `[0, phase_fraction * omega)`.
    pub phase_fraction: f64,
}

impl Default for DiagonalParams {
    fn default() -> Self {
        Self {
            zero_entries: 0,
            phase_fraction: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilarityParams {
    pub zero_entries: usize,
    pub phase_fraction: f64,
    /// `S = I + spread * G / ‖G‖`, so `cond(S) <= (1 + spread) / (1 - spread)`.
    pub spread: f64,
}

impl Default for SimilarityParams {
    fn default() -> Self {
        let base = DiagonalParams::default();
        Self {
            zero_entries: base.zero_entries,
            phase_fraction: base.phase_fraction,
            spread: 0.5,
        }
    }
}

impl SimilarityParams {
    pub fn diagonal(&self) -> DiagonalParams {
        DiagonalParams {
            zero_entries: self.zero_entries,
            phase_fraction: self.phase_fraction,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiracParams {
    /// Grid points; overrides `d`.
    pub points: usize,
    /// `a(x) = 1 + amplitude * sin(2 pi x)`.
    pub amplitude: f64,
}

impl Default for DiracParams {
    fn default() -> Self {
        Self {
            points: 8,
            amplitude: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum GeneratorSpec {
    DiagonalModel(DiagonalParams),
    SimilarityModel(SimilarityParams),
    DiscretizedDirac(DiracParams),
}

/// Contour settings; `j` defaults to `e_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSettings {
    pub tol: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub nodes_per_panel: usize,
    pub panels: usize,
    pub max_panels: usize,
    pub j: Option<Vec<f64>>,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            t_min: -14.0,
            t_max: 14.0,
            nodes_per_panel: 32,
            panels: 8,
            max_panels: 1024,
            j: None,
        }
    }
}

/// Numerator and denominator ids for the rational checks. The defaults are
/// `e_2 s + s^2` (`e_1 s + s^2` when `n = 1`) over `(1 + s^2)^2`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RationalPair {
    pub p: Option<String>,
    pub q: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub generator: GeneratorSpec,
    pub n: usize,
    pub d: usize,
    pub sector: SectorSpec,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    pub suites: Vec<Suite>,
    pub seed: u64,
    #[serde(default = "default_rng")]
    pub rng: String,
    /// Generated operators per suite.
    #[serde(default = "default_operators")]
    pub operators: usize,
    #[serde(default)]
    pub rational: RationalPair,
    /// Record wall-clock runtimes; reports are bit-reproducible only
    /// without them.
    #[serde(default = "default_timing")]
    pub timing: bool,
}

fn default_rng() -> String {
    RNG_NAME.into()
}

fn default_operators() -> usize {
    3
}

fn default_timing() -> bool {
    true
}

impl ScenarioConfig {
    pub fn new(
        generator: GeneratorSpec,
        n: usize,
        d: usize,
        sector: SectorSpec,
        seed: u64,
    ) -> Self {
        Self {
            generator,
            n,
            d,
            sector,
            quadrature: QuadratureSettings::default(),
            suites: Suite::ALL.to_vec(),
            seed,
            rng: default_rng(),
            operators: default_operators(),
            rational: RationalPair::default(),
            timing: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rng != RNG_NAME {
            return Err(Error::InvalidParameter(format!(
                "unknown generator stream '{}', expected '{RNG_NAME}'",
                self.rng
            )));
        }
        if self.n == 0 || self.n > crate::clifford::MAX_DIM {
            return Err(Error::UnsupportedDimension(self.n));
        }
        if self.d == 0 || self.operators == 0 {
            return Err(Error::InvalidParameter(
                "d and operators must be positive".into(),
            ));
        }
        self.sector.validate()?;
        match &self.generator {
            GeneratorSpec::DiagonalModel(p) => p.validate(self.d)?,
            GeneratorSpec::SimilarityModel(p) => {
                p.diagonal().validate(self.d)?;
                let bound = (1.0 + p.spread) / (1.0 - p.spread);
                if !(p.spread >= 0.0 && p.spread < 1.0) || bound > MAX_SIMILARITY_CONDITION {
                    return Err(Error::InvalidParameter(format!(
                        "spread {} allows condition numbers above {MAX_SIMILARITY_CONDITION}",
                        p.spread
                    )));
                }
            }
            GeneratorSpec::DiscretizedDirac(p) => {
                if p.points < 3 || !p.amplitude.is_finite() || p.amplitude.abs() >= 1.0 {
                    return Err(Error::InvalidParameter(
                        "Dirac model needs at least 3 points and |amplitude| < 1".into(),
                    ));
                }
            }
        }
        self.contour()?.validate()
    }

    pub fn contour(&self) -> Result<ContourSpec> {
        let q = &self.quadrature;
        let j = match &q.j {
            Some(v) => ImaginaryUnit::new(v.clone())?,
            None => ImaginaryUnit::basis(self.n, 1)?,
        };
        if j.n() != self.n {
            return Err(Error::DimensionMismatch(
                "contour unit from another algebra".into(),
            ));
        }
        let mut c = ContourSpec::new(self.sector, j).with_tol(q.tol);
        c.t_min = q.t_min;
        c.t_max = q.t_max;
        c.nodes_per_panel = q.nodes_per_panel;
        c.panels = q.panels;
        c.max_panels = q.max_panels;
        Ok(c)
    }

    /// Module dimension of generated operators.
    pub fn module_dim(&self) -> usize {
        match &self.generator {
            GeneratorSpec::DiscretizedDirac(p) => p.points,
            _ => self.d,
        }
    }
}

impl DiagonalParams {
    fn validate(&self, d: usize) -> Result<()> {
        if self.zero_entries > d {
            return Err(Error::InvalidParameter(
                "more zero entries than rows".into(),
            ));
        }
        if !(self.phase_fraction >= 0.0 && self.phase_fraction < 1.0) {
            return Err(Error::InvalidParameter(
                "phase_fraction must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Independent generator stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn random_unit(n: usize, rng: &mut impl Rng) -> ImaginaryUnit {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 {
            return ImaginaryUnit::normalized(v).expect("nonzero vector");
        }
    }
}

pub fn random_element(n: usize, rng: &mut impl Rng) -> CliffordElement {
    let coeffs = (0..1usize << n)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    CliffordElement::from_coeffs(n, coeffs).expect("valid dimension")
}

pub fn random_operator(n: usize, d: usize, rng: &mut impl Rng) -> Result<RightLinearOperator> {
    RightLinearOperator::new(
        (0..d)
            .map(|_| (0..d).map(|_| random_element(n, rng)).collect())
            .collect(),
    )
}

/// A generated operator with the spheres it was built from, when known.
#[derive(Clone, Debug)]
pub struct GeneratedOperator {
    pub operator: RightLinearOperator,
    pub spheres: Option<Vec<SpectralSphere>>,
}

impl GeneratedOperator {
    pub fn is_injective(&self) -> bool {
        match &self.spheres {
            Some(s) => s.iter().all(|s| !s.is_origin()),
            None => self.operator.is_injective(),
        }
    }
}

fn diagonal_entries(
    n: usize,
    d: usize,
    omega: f64,
    p: &DiagonalParams,
    rng: &mut impl Rng,
) -> (Vec<CliffordElement>, Vec<SpectralSphere>) {
    let mut entries = Vec::with_capacity(d);
    let mut spheres = Vec::with_capacity(d);
    for k in 0..d {
        let magnitude = rng.random_range(0.5..4.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let phase = rng.random_range(0.0..1.0) * p.phase_fraction * omega;
        let j = random_unit(n, rng);
        if k >= d - p.zero_entries {
            entries.push(CliffordElement::zero(n));
            spheres.push(SpectralSphere {
                center: 0.0,
                radius: 0.0,
            });
            continue;
        }
        let c = sign * magnitude;
        let r = magnitude * phase.tan();
        entries.push(j.complex(c, r));
        spheres.push(SpectralSphere {
            center: c,
            radius: r,
        });
    }
    (entries, spheres)
}

/// The `index`-th operator of the scenario; the same `(seed, index)` always
/// yields the same operator.
pub fn generate_operator_indexed(cfg: &ScenarioConfig, index: u64) -> Result<GeneratedOperator> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, index);
    let (n, d, omega) = (cfg.n, cfg.d, cfg.sector.omega);
    match &cfg.generator {
        GeneratorSpec::DiagonalModel(p) => {
            let (entries, spheres) = diagonal_entries(n, d, omega, p, &mut rng);
            Ok(GeneratedOperator {
                operator: RightLinearOperator::diagonal(entries)?,
                spheres: Some(spheres),
            })
        }
        GeneratorSpec::SimilarityModel(p) => {
            let (entries, spheres) = diagonal_entries(n, d, omega, &p.diagonal(), &mut rng);
            let diag = RightLinearOperator::diagonal(entries)?;
            let g = random_operator(n, d, &mut rng)?;
            let s = RightLinearOperator::identity(n, d).add(&g.scale(p.spread / g.norm()))?;
            let sv = singular_values(s.embedding());
            let cond = sv.max() / sv.min();
            if cond > MAX_SIMILARITY_CONDITION {
                return Err(Error::InvalidParameter(format!(
                    "similarity condition {cond:.3} exceeds {MAX_SIMILARITY_CONDITION}"
                )));
            }
            Ok(GeneratedOperator {
                operator: s.compose(&diag)?.compose(&s.inverse()?)?,
                spheres: Some(spheres),
            })
        }
        GeneratorSpec::DiscretizedDirac(p) => Ok(GeneratedOperator {
            operator: discretized_dirac(n, p.points, p.amplitude)?,
            spheres: None,
        }),
    }
}

pub fn generate_operator(cfg: &ScenarioConfig) -> Result<GeneratedOperator> {
    generate_operator_indexed(cfg, 0)
}

/// Central differences for `e_1 a(x) d/dx` on a periodic grid of `points`
/// nodes over `[0, 1)`.
pub fn discretized_dirac(n: usize, points: usize, amplitude: f64) -> Result<RightLinearOperator> {
    if points < 3 {
        return Err(Error::InvalidParameter(
            "Dirac model needs at least 3 points".into(),
        ));
    }
    let h = 1.0 / points as f64;
    let e1 = CliffordElement::generator(n, 1)?;
    let mut rows = vec![vec![CliffordElement::zero(n); points]; points];
    for k in 0..points {
        let x = k as f64 * h;
        let a = 1.0 + amplitude * (2.0 * PI * x).sin();
        let c = e1.scale(a / (2.0 * h));
        rows[k][(k + 1) % points] = &rows[k][(k + 1) % points] + &c;
        rows[k][(k + points - 1) % points] = &rows[k][(k + points - 1) % points] - &c;
    }
    RightLinearOperator::new(rows)
}

fn bracket_list(text: &str) -> Result<Vec<&str>> {
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected a bracketed list, got '{text}'")))?;
    let items: Vec<&str> = inner.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(Error::Parse(format!("empty coefficient in '{text}'")));
    }
    Ok(items)
}

fn clifford_list(n: usize, text: &str) -> Result<Vec<CliffordElement>> {
    bracket_list(text)?
        .into_iter()
        .map(|s| CliffordElement::parse(n, s))
        .collect()
}

fn split_side(text: &str) -> Result<(&str, Side)> {
    match text.rsplit_once(':') {
        Some((body, side)) if body.ends_with(']') => Ok((body, side.parse()?)),
        _ => Ok((text, Side::Right)),
    }
}

/// Parses `poly:[c0,c1,..][:left|right]`, `rat:[p0,..]/[q0,..][:left|right]`
/// and `reg:m`. Coefficients are Clifford literals; denominators must be
/// real. `theta` is the declared domain angle of rational functions.
pub fn parse_function(n: usize, id: &str, theta: f64) -> Result<SliceFunction> {
    let id = id.trim();
    if let Some(rest) = id.strip_prefix("poly:") {
        let (body, side) = split_side(rest)?;
        return make_polynomial(clifford_list(n, body)?, side);
    }
    if let Some(rest) = id.strip_prefix("rat:") {
        let (body, side) = split_side(rest)?;
        let (p, q) = body
            .split_once("]/[")
            .ok_or_else(|| Error::Parse(format!("expected '[p]/[q]' in '{id}'")))?;
        let p = make_polynomial(clifford_list(n, &format!("{p}]"))?, side)?;
        let q = make_polynomial(clifford_list(n, &format!("[{q}"))?, Side::Right)?;
        return make_rational(&p, &q, theta);
    }
    if let Some(rest) = id.strip_prefix("reg:") {
        let m: u32 = rest
            .parse()
            .map_err(|_| Error::Parse(format!("bad regularizer exponent in '{id}'")))?;
        return regularizer(n, m);
    }
    Err(Error::Parse(format!(
        "unknown function id '{id}' (expected poly:, rat: or reg:)"
    )))
}

/// Operator files hold either the serialized form
/// `{"n", "d", "entries": [[{"n", "coeffs"}]]}` or literal rows
/// `{"n", "entries": [["2+e1", "0"], ["0", "-2"]]}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum OperatorFile {
    Full(RightLinearOperator),
    Literal { n: usize, entries: Vec<Vec<String>> },
}

pub fn parse_operator(text: &str) -> Result<RightLinearOperator> {
    match serde_json::from_str::<OperatorFile>(text) {
        Ok(OperatorFile::Full(op)) => Ok(op),
        Ok(OperatorFile::Literal { n, entries }) => RightLinearOperator::new(
            entries
                .iter()
                .map(|row| row.iter().map(|s| CliffordElement::parse(n, s)).collect())
                .collect::<Result<_>>()?,
        ),
        Err(e) => Err(Error::Parse(format!("operator file: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::s_spectrum;
    use crate::slice::Flavor;

    fn sector() -> SectorSpec {
        SectorSpec::new(0.5, 0.8, 1.2).unwrap()
    }

    #[test]
    fn diagonal_model_is_reproducible() {
        let cfg = ScenarioConfig::new(
            GeneratorSpec::DiagonalModel(Default::default()),
            1,
            2,
            sector(),
            1,
        );
        let a = generate_operator(&cfg).unwrap();
        let b = generate_operator(&cfg).unwrap();
        assert_eq!(a.operator, b.operator);
        for s in a.spheres.unwrap() {
            assert!(s.phase() < 0.5 && s.center.abs() >= 0.5 && s.center.abs() <= 4.0);
        }
        let other = generate_operator_indexed(&cfg, 1).unwrap();
        assert_ne!(a.operator, other.operator);
    }

    #[test]
    fn similarity_keeps_spectrum() {
        let cfg = ScenarioConfig::new(
            GeneratorSpec::SimilarityModel(Default::default()),
            2,
            3,
            sector(),
            7,
        );
        let g = generate_operator(&cfg).unwrap();
        let mut want: Vec<f64> = g.spheres.unwrap().iter().map(|s| s.center).collect();
        let mut got: Vec<f64> = s_spectrum(&g.operator)
            .unwrap()
            .iter()
            .map(|s| s.center)
            .collect();
        want.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        assert_eq!(want.len(), got.len());
        for (w, g) in want.iter().zip(&got) {
            assert!((w - g).abs() < 1e-8);
        }
    }

    #[test]
    fn bad_spread_rejected() {
        let p = SimilarityParams {
            spread: 0.95,
            ..Default::default()
        };
        let cfg = ScenarioConfig::new(GeneratorSpec::SimilarityModel(p), 1, 2, sector(), 1);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn dirac_has_real_spectrum() {
        // e_1 times a skew difference matrix embeds symmetrically
        let t = discretized_dirac(1, 8, 0.0).unwrap();
        let e = t.embedding();
        assert!((e - e.transpose()).norm() < 1e-12);
        assert!(s_spectrum(&t).unwrap().iter().all(|s| s.radius < 1e-8));
        assert!(!t.is_injective());
    }

    #[test]
    fn function_ids() {
        let f = parse_function(2, "poly:[0,e2,1]:right", 1.2).unwrap();
        assert_eq!(f.flavor(), Flavor::Right);
        let f = parse_function(2, "poly:[1,e2]:left", 1.2).unwrap();
        assert_eq!(f.flavor(), Flavor::Left);
        let f = parse_function(2, "rat:[0,1]/[1,0,2,0,1]", 1.2).unwrap();
        assert!(f.is_decaying());
        assert_eq!(f.flavor(), Flavor::Intrinsic);
        let f = parse_function(2, "reg:2", 1.2).unwrap();
        assert_eq!(f.label(), "reg:2");
        assert!(parse_function(2, "sin", 1.2).is_err());
        assert!(parse_function(2, "rat:[1]/[e1]", 1.2).is_err());
    }

    #[test]
    fn operator_files() {
        let lit = r#"{"n": 1, "entries": [["2+e1", "0"], ["0", "-2"]]}"#;
        let t = parse_operator(lit).unwrap();
        assert_eq!(t.d(), 2);
        let full = serde_json::to_string(&t).unwrap();
        assert_eq!(parse_operator(&full).unwrap(), t);
    }

    #[test]
    fn config_round_trip() {
        let text = r#"{
            "generator": {"kind": "DiagonalModel", "params": {"zero_entries": 1}},
            "n": 1, "d": 2,
            "sector": {"omega": 0.5, "phi": 0.8, "theta": 1.2},
            "suites": ["algebra", "lemma-estimates"],
            "seed": 3
        }"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(cfg.rng, RNG_NAME);
        assert_eq!(cfg.suites, vec![Suite::Algebra, Suite::LemmaEstimates]);
        let back = ScenarioConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(ScenarioConfig::from_json(
            &text.replace("\"seed\": 3", "\"seed\": 3, \"rng\": \"pcg\"")
        )
        .is_err());
    }
}
