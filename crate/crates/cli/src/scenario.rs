//! Scenario documents (TOML).
//!
//! A scenario names one command, a `[wave]` block, an optional `[turbulence]`
//! block and the block belonging to the command. Unknown keys are rejected.

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Greens,
    Validity,
    Rytov,
    TimeReversal,
    Apodize,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Greens => "greens",
            Command::Validity => "validity",
            Command::Rytov => "rytov",
            Command::TimeReversal => "time-reversal",
            Command::Apodize => "apodize",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionTag {
    #[default]
    Gaussian,
    Paper,
}

impl From<ConventionTag> for rytov_core::Convention {
    fn from(c: ConventionTag) -> Self {
        match c {
            ConventionTag::Gaussian => rytov_core::Convention::Gaussian,
            ConventionTag::Paper => rytov_core::Convention::Paper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub convention: ConventionTag,
    /// Output directory, relative to the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave: Option<WaveBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turbulence: Option<TurbulenceBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greens: Option<GreensBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validity: Option<ValidityBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rytov: Option<RytovBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "time-reversal")]
    pub time_reversal: Option<TimeReversalBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apodize: Option<ApodizeBlock>,
}

/// Exactly one of the two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveBlock {
    /// Metres.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<f64>,
    /// 1/m; zero is allowed (static limit).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavenumber: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceBlock {
    pub delta: f64,
    /// White-noise strength, m^(3/2). Defaults to the value that puts
    /// `δ²σ²k₀⁴·ℓ` (ℓ the field box diagonal) at [`DEFAULT_CLOSURE_STRENGTH`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub grid: GridBlock,
}

pub const DEFAULT_CLOSURE_STRENGTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleTag {
    #[default]
    Midpoint,
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridBlock {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub counts: [usize; 3],
    #[serde(default)]
    pub rule: RuleTag,
    /// Defaults to the cell diagonal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreensModel {
    #[default]
    Free,
    Turbulent,
    Mean,
    Paraxial,
    ParaxialTurbulent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensBlock {
    pub observation: [f64; 3],
    pub source: [f64; 3],
    #[serde(default)]
    pub model: GreensModel,
    /// Realizations for the sampled models.
    #[serde(default = "one")]
    pub realizations: u64,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityBlock {
    /// `"standard"` for the built-in height table, or a path to a two-column
    /// (height km, Cₙ) file relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    /// Constant `Cₙ²` in m^(−2/3), instead of `profile`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_cn2: Option<f64>,
    /// Path lengths in metres.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
    /// `[first, last, count]`, log-spaced, instead of `lengths`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_range: Option<(f64, f64, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackgroundTag {
    #[default]
    Plane,
    Beam,
    Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RytovMethod {
    #[default]
    Full,
    Parabolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RytovBlock {
    #[serde(default)]
    pub background: BackgroundTag,
    /// Beam parameter α (1/m²) for `background = "beam"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam_alpha: Option<f64>,
    /// Source position for `background = "point"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<[f64; 3]>,
    #[serde(default)]
    pub method: RytovMethod,
    pub points: Vec<[f64; 3]>,
    #[serde(default = "one")]
    pub realizations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefocusMode {
    /// One frozen realization (realization 0 of the scenario seed).
    Single,
    #[default]
    Mean,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorBlock {
    /// Square array of `n × n` elements in the plane `x = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch: Option<f64>,
    /// Explicit elements (unit weights), instead of `n`/`pitch`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<[f64; 3]>>,
}

/// Square grid of evaluation points in the plane through the source normal
/// to x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalBlock {
    pub half_width: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeReversalBlock {
    pub source: [f64; 3],
    pub mirror: MirrorBlock,
    pub eval: EvalBlock,
    #[serde(default)]
    pub mode: RefocusMode,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelTag {
    #[default]
    Focused,
    Spherical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationTag {
    #[default]
    Unitary,
    Green,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApodizeBlock {
    pub a: f64,
    pub b: f64,
    pub z: f64,
    /// `[radial, angular]` node counts.
    pub pupil_nodes: [usize; 2],
    /// Defaults to `pupil_nodes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_nodes: Option<[usize; 2]>,
    #[serde(default)]
    pub kernel: KernelTag,
    #[serde(default)]
    pub normalization: NormalizationTag,
    /// Solve the amplitude eigenproblem too (needs `a = b`).
    #[serde(default)]
    pub alpha: bool,
}

impl Scenario {
    /// Parses and validates a scenario.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::new(text);
        let mut unknown = Vec::new();
        let parsed: Result<Scenario, _> = serde_ignored::deserialize(de, |path| unknown.push(path.to_string().replace(".?", "")));
        if !unknown.is_empty() {
            return Err(CliError::UnknownKeys(unknown));
        }
        let s = parsed.map_err(|e| CliError::Config(e.to_string().trim().to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    fn validate(&self) -> Result<(), CliError> {
        let wave = self.wave.as_ref().ok_or(CliError::MissingBlock("wave"))?;
        match (wave.wavelength, wave.wavenumber) {
            (Some(l), None) => positive("wave.wavelength", l)?,
            (None, Some(k)) => non_negative("wave.wavenumber", k)?,
            _ => return Err(CliError::Config("[wave] needs exactly one of `wavelength`, `wavenumber`".into())),
        }
        if let Some(t) = &self.turbulence {
            non_negative("turbulence.delta", t.delta)?;
            if let Some(s) = t.sigma {
                non_negative("turbulence.sigma", s)?;
            }
            for i in 0..3 {
                if !(t.grid.hi[i] > t.grid.lo[i]) || !t.grid.lo[i].is_finite() || !t.grid.hi[i].is_finite() {
                    return Err(CliError::Unit(format!("turbulence.grid: axis {i} needs lo < hi")));
                }
                if t.grid.counts[i] == 0 {
                    return Err(CliError::Unit(format!("turbulence.grid: axis {i} needs a positive count")));
                }
            }
            if let Some(r) = t.grid.exclusion_radius {
                non_negative("turbulence.grid.exclusion_radius", r)?;
            }
        }
        let needs_turbulence = |what: &'static str| {
            if self.turbulence.is_none() {
                Err(CliError::MissingBlock(what))
            } else {
                Ok(())
            }
        };
        match self.command {
            Command::Greens => {
                let g = self.greens.as_ref().ok_or(CliError::MissingBlock("greens"))?;
                finite_point("greens.observation", g.observation)?;
                finite_point("greens.source", g.source)?;
                if g.observation == g.source {
                    return Err(CliError::Config("greens.observation and greens.source coincide".into()));
                }
                if g.realizations == 0 {
                    return Err(CliError::Unit("greens.realizations must be >= 1".into()));
                }
                if matches!(g.model, GreensModel::Turbulent | GreensModel::Mean | GreensModel::ParaxialTurbulent) {
                    needs_turbulence("turbulence")?;
                }
            }
            Command::Validity => {
                let v = self.validity.as_ref().ok_or(CliError::MissingBlock("validity"))?;
                if v.profile.is_some() == v.constant_cn2.is_some() {
                    return Err(CliError::Config("[validity] needs exactly one of `profile`, `constant_cn2`".into()));
                }
                if let Some(c) = v.constant_cn2 {
                    non_negative("validity.constant_cn2", c)?;
                }
                match (&v.lengths, &v.log_range) {
                    (Some(ls), None) => {
                        if ls.is_empty() {
                            return Err(CliError::Unit("validity.lengths is empty".into()));
                        }
                        for l in ls {
                            positive("validity.lengths", *l)?;
                        }
                    }
                    (None, Some((a, b, n))) => {
                        positive("validity.log_range", *a)?;
                        positive("validity.log_range", *b)?;
                        if *n < 1 || b < a {
                            return Err(CliError::Unit("validity.log_range needs first <= last and count >= 1".into()));
                        }
                    }
                    _ => return Err(CliError::Config("[validity] needs exactly one of `lengths`, `log_range`".into())),
                }
            }
            Command::Rytov => {
                let r = self.rytov.as_ref().ok_or(CliError::MissingBlock("rytov"))?;
                needs_turbulence("turbulence")?;
                if r.points.is_empty() {
                    return Err(CliError::Unit("rytov.points is empty".into()));
                }
                for p in &r.points {
                    finite_point("rytov.points", *p)?;
                }
                if r.realizations == 0 {
                    return Err(CliError::Unit("rytov.realizations must be >= 1".into()));
                }
                match r.background {
                    BackgroundTag::Beam => positive("rytov.beam_alpha", r.beam_alpha.ok_or(CliError::MissingBlock("rytov.beam_alpha"))?)?,
                    BackgroundTag::Point => finite_point("rytov.source", r.source.ok_or(CliError::MissingBlock("rytov.source"))?)?,
                    BackgroundTag::Plane => {}
                }
            }
            Command::TimeReversal => {
                let t = self.time_reversal.as_ref().ok_or(CliError::MissingBlock("time-reversal"))?;
                finite_point("time-reversal.source", t.source)?;
                match (&t.mirror.elements, t.mirror.n, t.mirror.pitch) {
                    (Some(e), None, None) if !e.is_empty() => {
                        for p in e {
                            finite_point("time-reversal.mirror.elements", *p)?;
                        }
                    }
                    (None, Some(n), Some(p)) if n >= 1 => positive("time-reversal.mirror.pitch", p)?,
                    _ => {
                        return Err(CliError::Config(
                            "[time-reversal.mirror] needs either `elements` or both `n` and `pitch`".into(),
                        ))
                    }
                }
                positive("time-reversal.eval.half_width", t.eval.half_width)?;
                if t.eval.n < 1 {
                    return Err(CliError::Unit("time-reversal.eval.n must be >= 1".into()));
                }
                if t.mode == RefocusMode::MonteCarlo && t.samples < 2 {
                    return Err(CliError::Unit("time-reversal.samples must be >= 2".into()));
                }
                needs_turbulence("turbulence")?;
            }
            Command::Apodize => {
                let a = self.apodize.as_ref().ok_or(CliError::MissingBlock("apodize"))?;
                positive("apodize.a", a.a)?;
                positive("apodize.b", a.b)?;
                positive("apodize.z", a.z)?;
                for n in a.pupil_nodes.iter().chain(a.image_nodes.iter().flatten()) {
                    if *n == 0 {
                        return Err(CliError::Unit("apodize node counts must be positive".into()));
                    }
                }
                if a.alpha && a.a != a.b {
                    return Err(CliError::Config("apodize.alpha needs a = b".into()));
                }
            }
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Unit(format!("{name} must be positive and finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<(), CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Unit(format!("{name} must be non-negative and finite, got {v}")))
    }
}

fn finite_point(name: &str, p: [f64; 3]) -> Result<(), CliError> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Unit(format!("{name} has a non-finite coordinate")))
    }
}
