//! Job description, loaded from JSON and/or assembled from flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mingraph_core::entire::{build_odd_pair, Block, BlockSpec};
use mingraph_core::{Ambient, Frequency, Mat, SpectralBlock};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Example,
    Solve,
    Verify,
    EntireCheck,
    Integrate,
    Export,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    Rotation,
    Tan,
    #[default]
    All,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AmbientKind {
    #[default]
    Euclidean,
    Lorentzian,
}

impl From<AmbientKind> for Ambient {
    fn from(a: AmbientKind) -> Self {
        match a {
            AmbientKind::Euclidean => Ambient::Euclidean,
            AmbientKind::Lorentzian => Ambient::Lorentzian,
        }
    }
}

/// A frequency written either as `"p/q"` (exact) or as a plain number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda(pub Frequency);

impl FromStr for Lambda {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in {s:?}"))?;
            let q: u64 = q
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in {s:?}"))?;
            return Ok(Lambda(Frequency::rational(p, q)));
        }
        if let Ok(p) = s.parse::<u64>() {
            return Ok(Lambda(Frequency::rational(p, 1)));
        }
        s.parse::<f64>()
            .map(|x| Lambda(Frequency::Real(x)))
            .map_err(|_| format!("cannot read {s:?} as a frequency"))
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Frequency::Rational { num, den: 1 } => write!(f, "{num}"),
            Frequency::Rational { num, den } => write!(f, "{num}/{den}"),
            Frequency::Real(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Lambda {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Lambda {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(p) => Ok(Lambda(Frequency::rational(p, 1))),
            Raw::Num(x) => Ok(Lambda(Frequency::Real(x))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockConfig {
    pub lambda: Lambda,
    /// `(a, b)` for each `2 x 2` cell `[[a, b], [-b, a]]`.
    pub cells: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub schema_version: u32,
    pub mode: Mode,
    #[serde(default)]
    pub which: Which,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub lambdas: Vec<Lambda>,
    /// Odd-dimension construction; replaces `lambdas` and `b`.
    #[serde(default)]
    pub blocks: Vec<BlockConfig>,
    /// Row-major `(n-1) x m` values; zero when absent.
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    #[serde(default = "defaults::t_range")]
    pub t_range: [f64; 2],
    #[serde(default = "defaults::t_samples")]
    pub t_samples: usize,
    #[serde(default = "defaults::x_range")]
    pub x_range: [f64; 2],
    #[serde(default = "defaults::x_samples")]
    pub x_samples: usize,
    /// Random points drawn from `[-box_half_width, box_half_width]^n`.
    #[serde(default = "defaults::points")]
    pub points: usize,
    #[serde(default = "defaults::box_half_width")]
    pub box_half_width: f64,
    #[serde(default = "defaults::step")]
    pub step: f64,
    #[serde(default)]
    pub ambient: AmbientKind,
    #[serde(default = "defaults::grid_points")]
    pub grid_points: usize,
    /// Explicit positivity scan interval; one common period when absent.
    #[serde(default)]
    pub scan: Option<[f64; 2]>,
    /// Three ambient coordinates for OBJ output, e.g. `["x1", "x2", "y1"]`.
    #[serde(default)]
    pub projection: Option<[String; 3]>,
    #[serde(default)]
    pub faces: bool,
    #[serde(default)]
    pub seed: u64,
    /// Not echoed into reports, so output location never changes their bytes.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

mod defaults {
    pub fn t_range() -> [f64; 2] {
        [0.0, std::f64::consts::TAU]
    }
    pub fn t_samples() -> usize {
        64
    }
    pub fn x_range() -> [f64; 2] {
        [-1.0, 1.0]
    }
    pub fn x_samples() -> usize {
        8
    }
    pub fn points() -> usize {
        100
    }
    pub fn box_half_width() -> f64 {
        10.0
    }
    pub fn step() -> f64 {
        1e-3
    }
    pub fn grid_points() -> usize {
        mingraph_core::entire::DEFAULT_GRID_POINTS
    }
}

impl JobConfig {
    pub fn new(mode: Mode) -> Self {
        JobConfig {
            schema_version: SCHEMA_VERSION,
            mode,
            which: Which::default(),
            n: None,
            m: None,
            lambdas: Vec::new(),
            blocks: Vec::new(),
            b: None,
            t_range: defaults::t_range(),
            t_samples: defaults::t_samples(),
            x_range: defaults::x_range(),
            x_samples: defaults::x_samples(),
            points: defaults::points(),
            box_half_width: defaults::box_half_width(),
            step: defaults::step(),
            ambient: AmbientKind::default(),
            grid_points: defaults::grid_points(),
            scan: None,
            projection: None,
            faces: false,
            seed: 0,
            out: None,
        }
    }

    /// Parses a config file; syntax errors carry `path:line:column`.
    pub fn from_json(path: &Path, text: &str) -> Result<Self, CliError> {
        let cfg: JobConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let msg = match msg.rfind(" at line ") {
                Some(i) => msg[..i].to_string(),
                None => msg,
            };
            CliError::Config(format!(
                "{}:{}:{}: {msg}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "{}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
                path.display(),
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(path, &text)
    }

    pub fn dims(&self) -> Result<(usize, usize), CliError> {
        match (self.n, self.m) {
            (Some(n), Some(m)) => Ok((n, m)),
            _ => Err(field("n/m", "both dimensions are required for this mode")),
        }
    }

    /// `(Λ̃, B)` from either the block description or `lambdas` + `b`.
    pub fn pair(&self) -> Result<(SpectralBlock, Mat), CliError> {
        let (n, m) = self.dims()?;
        if !self.blocks.is_empty() {
            if !self.lambdas.is_empty() || self.b.is_some() {
                return Err(field("blocks", "give either blocks or lambdas/b, not both"));
            }
            let spec = BlockSpec {
                n,
                m,
                blocks: self
                    .blocks
                    .iter()
                    .map(|b| Block {
                        lambda: b.lambda.0,
                        cells: b.cells.clone(),
                    })
                    .collect(),
            };
            return build_odd_pair(&spec).map_err(|e| field("blocks", e));
        }
        let spec = self.spectral()?;
        let b = match &self.b {
            None => Mat::zeros(n - 1, m),
            Some(v) => Mat::from_vec(n - 1, m, v.clone()).map_err(|e| {
                field(
                    "b",
                    format!("{e}; expected {} row-major values", (n - 1) * m),
                )
            })?,
        };
        Ok((spec, b))
    }

    pub fn spectral(&self) -> Result<SpectralBlock, CliError> {
        let (n, m) = self.dims()?;
        SpectralBlock::new(n, m, self.lambdas.iter().map(|l| l.0).collect())
            .map_err(|e| field("lambdas", e))
    }

    /// Checks that apply to every mode.
    pub fn validate(&self) -> Result<(), CliError> {
        let range = |name: &str, r: [f64; 2]| {
            if r[0].is_finite() && r[1].is_finite() && r[0] <= r[1] {
                Ok(())
            } else {
                Err(field(
                    name,
                    format!("[{}, {}] is not a finite interval", r[0], r[1]),
                ))
            }
        };
        range("t_range", self.t_range)?;
        range("x_range", self.x_range)?;
        if let Some(s) = self.scan {
            range("scan", s)?;
        }
        if self.t_samples == 0 {
            return Err(field("t_samples", "must be positive"));
        }
        if self.x_samples == 0 {
            return Err(field("x_samples", "must be positive"));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(field("step", "must be positive"));
        }
        if !(self.box_half_width > 0.0 && self.box_half_width.is_finite()) {
            return Err(field("box_half_width", "must be positive"));
        }
        Ok(())
    }
}

pub(crate) fn field(name: &str, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("field `{name}`: {msg}"))
}
