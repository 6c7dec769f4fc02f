//! Experiment configuration: JSON in, validated and defaulted before any
//! computation.

use std::path::{Path, PathBuf};

use pdm_core::{ParamBox, Sampler};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CONFIG_SCHEMA: &str = "pdm-config/v1";

/// Conductivity range of the thermal block.
pub const THERMAL_RANGE: (f64, f64) = (1.0, 10.0);

/// `[−1,1]² × [1,3]² × [−0.8,0.8]` for `(μ₁, μ₂, σ₁, σ₂, ρ)`.
pub fn gaussian_box() -> ParamBox {
    ParamBox::new(
        vec![-1.0, -1.0, 1.0, 1.0, -0.8],
        vec![1.0, 1.0, 3.0, 3.0, 0.8],
    )
    .expect("gaussian box")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pdm,
    Gsm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Pdm => "pdm",
            Method::Gsm => "gsm",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveId {
    #[serde(rename = "fill")]
    Fill,
    #[serde(rename = "rb-thermal")]
    RbThermal,
    #[serde(rename = "rb-gaussian")]
    RbGaussian,
    #[serde(rename = "eim-gaussian")]
    EimGaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub id: ObjectiveId,
    /// Nodes per axis of the spatial grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// `rb-gaussian` only: first build an EIM basis of the source to this
    /// tolerance with the same method, then run RB on the EIM-affine model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eim_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdmSection {
    #[serde(default)]
    pub initial_point: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub reevaluate_all: bool,
}

impl Default for PdmSection {
    fn default() -> Self {
        Self {
            initial_point: None,
            reevaluate_all: true,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsmSection {
    #[serde(default = "random")]
    pub sampler: Sampler,
    /// Defaults to `2^d`.
    #[serde(default)]
    pub sample_size: Option<usize>,
}

impl Default for GsmSection {
    fn default() -> Self {
        Self {
            sampler: Sampler::Random,
            sample_size: None,
        }
    }
}

fn random() -> Sampler {
    Sampler::Random
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Per-step division snapshots (PDM, d = 2).
    #[serde(default)]
    pub svg: bool,
    /// Flat binary export of the snapshots of `γ` (RB objectives).
    #[serde(default)]
    pub snapshots: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub dims: Vec<usize>,
    #[serde(default = "both")]
    pub methods: Vec<Method>,
}

fn both() -> Vec<Method> {
    vec![Method::Pdm, Method::Gsm]
}

fn schema() -> String {
    CONFIG_SCHEMA.to_string()
}

fn thousand() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema")]
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    pub objective: ObjectiveConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bounds: Option<ParamBox>,
    pub tol: f64,
    #[serde(default = "thousand")]
    pub max_iters: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub pdm: PdmSection,
    #[serde(default)]
    pub gsm: GsmSection,
    /// Size of the verification sample; 0 disables verification.
    #[serde(default)]
    pub verify: usize,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
}

/// A semantic error tied to a config key.
#[derive(Debug)]
pub struct KeyError {
    pub key: &'static str,
    pub msg: String,
}

fn bad<T>(key: &'static str, msg: impl Into<String>) -> Result<T, KeyError> {
    Err(KeyError {
        key,
        msg: msg.into(),
    })
}

/// 1-based line of the first `"key":` in `text`.
pub fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    let mut from = 0;
    while let Some(pos) = text[from..].find(&quoted) {
        let at = from + pos;
        let rest = text[at + quoted.len()..].trim_start();
        if rest.starts_with(':') {
            return Some(text[..at].matches('\n').count() + 1);
        }
        from = at + quoted.len();
    }
    None
}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> CliResult<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg = Self::parse(&text, &path.display().to_string())?;
        Ok((cfg, text))
    }

    /// Turns a [`KeyError`] into a message pointing at the key's line.
    pub fn locate(err: KeyError, text: &str, origin: &str) -> CliError {
        match line_of_key(text, err.key) {
            Some(line) => CliError::Config(format!("{origin}:{line}: {}: {}", err.key, err.msg)),
            None => CliError::Config(format!("{origin}: {}: {}", err.key, err.msg)),
        }
    }

    pub fn dim_or_default(&self) -> Option<usize> {
        self.dim.or_else(|| self.bounds.as_ref().map(ParamBox::dim)).or(
            match self.objective.id {
                ObjectiveId::RbGaussian | ObjectiveId::EimGaussian => Some(5),
                _ => None,
            },
        )
    }

    /// Validates and fills every default. The result serializes to the
    /// full configuration needed for replay.
    pub fn resolve(&self) -> Result<ExperimentConfig, KeyError> {
        let mut out = self.clone();
        if self.schema != CONFIG_SCHEMA {
            return bad("schema", format!("expected {CONFIG_SCHEMA:?}, got {:?}", self.schema));
        }
        if !(self.tol >= 0.0) || !self.tol.is_finite() {
            return bad("tol", format!("must be finite and >= 0, got {}", self.tol));
        }
        if self.max_iters == 0 {
            return bad("max_iters", "must be at least 1");
        }
        let sweep_first = self.compare.as_ref().and_then(|c| c.dims.first().copied());
        let Some(d) = self.dim_or_default().or(sweep_first) else {
            return bad("dim", "required (or give a box)");
        };
        if d == 0 {
            return bad("dim", "must be at least 1");
        }
        if let Some(b) = &self.bounds {
            if b.dim() != d {
                return bad("box", format!("has {} axes but dim is {d}", b.dim()));
            }
        }
        let id = self.objective.id;
        if self.objective.eim_tol.is_some() && id != ObjectiveId::RbGaussian {
            return bad("eim_tol", "only used by rb-gaussian");
        }
        let root = match id {
            ObjectiveId::Fill => {
                if self.objective.grid.is_some() {
                    return bad("grid", "not used by fill");
                }
                self.bounds.clone().unwrap_or_else(|| ParamBox::unit(d))
            }
            ObjectiveId::RbThermal => {
                if d % 2 != 0 {
                    return bad("dim", format!("rb-thermal needs an even dimension, got {d}"));
                }
                let grid = self.objective.grid.unwrap_or(33);
                if grid < 3 {
                    return bad("grid", "must be at least 3");
                }
                out.objective.grid = Some(grid);
                let (lo, hi) = THERMAL_RANGE;
                let b = self
                    .bounds
                    .clone()
                    .unwrap_or_else(|| ParamBox::cube(d, lo, hi).expect("thermal box"));
                if b.lower().iter().any(|&l| l <= 0.0) {
                    return bad("box", "conductivities must be positive");
                }
                b
            }
            ObjectiveId::RbGaussian | ObjectiveId::EimGaussian => {
                if d != 5 {
                    return bad("dim", format!("gaussian objectives have 5 parameters, got {d}"));
                }
                let grid = self.objective.grid.unwrap_or(41);
                if grid < 3 {
                    return bad("grid", "must be at least 3");
                }
                out.objective.grid = Some(grid);
                let b = self.bounds.clone().unwrap_or_else(gaussian_box);
                if b.lower()[2] <= 0.0 || b.lower()[3] <= 0.0 {
                    return bad("box", "sigma bounds must be positive");
                }
                if b.lower()[4] <= -1.0 || b.upper()[4] >= 1.0 {
                    return bad("box", "rho bounds must lie inside (-1, 1)");
                }
                if let Some(t) = self.objective.eim_tol {
                    if !(t > 0.0) || !t.is_finite() {
                        return bad("eim_tol", format!("must be finite and > 0, got {t}"));
                    }
                }
                b
            }
        };
        if let Some(p) = &self.pdm.initial_point {
            if p.len() != d {
                return bad("initial_point", format!("has {} entries, need {d}", p.len()));
            }
            let tol = 1e-9 * root.diameter();
            if !root.contains_strictly(p, tol) {
                return bad("initial_point", "must lie strictly inside the box");
            }
        }
        let sample_size = match self.gsm.sample_size {
            Some(0) => return bad("sample_size", "must be at least 1"),
            Some(n) => n,
            None => match u32::try_from(d).ok().and_then(|s| 1usize.checked_shl(s)) {
                Some(n) if d < 31 => n,
                _ => return bad("sample_size", format!("2^{d} is too large; set it explicitly")),
            },
        };
        if let Some(c) = &self.compare {
            if c.dims.is_empty() {
                return bad("dims", "need at least one dimension");
            }
            if c.methods.is_empty() {
                return bad("methods", "need at least one method");
            }
        }
        out.dim = Some(d);
        out.bounds = Some(root);
        out.gsm.sample_size = Some(sample_size);
        Ok(out)
    }

    /// Copy with the dimension replaced, for sweeps. Derived defaults (box,
    /// sample size) are recomputed unless they were given explicitly.
    pub fn with_dim(&self, d: usize) -> ExperimentConfig {
        let mut c = self.clone();
        c.dim = Some(d);
        c.compare = None;
        c
    }

    /// Single-line JSON for embedding in output headers. The output
    /// directory is left out: it does not affect results.
    pub fn embed(&self) -> String {
        let mut c = self.clone();
        c.output.dir = None;
        serde_json::to_string(&c).expect("config serializes")
    }

    pub fn root(&self) -> ParamBox {
        self.bounds.clone().expect("resolved config has a box")
    }

    pub fn grid(&self) -> usize {
        self.objective.grid.unwrap_or(0)
    }

    pub fn sample_size(&self) -> usize {
        self.gsm.sample_size.unwrap_or(0)
    }
}
