//! Experiment configuration and its `key = value` file format.
//!
//! ```text
//! # every orthogonalizer on mostly light tails
//! eta = 6*8, 2.1, 2.1
//! mixing = random
//! N = 1000, 10000
//! trials = 10
//! seed = 42
//! methods = centroid, covariance, oracle, identity
//! contrasts = pow3, tanh
//! damping = on
//! ```
//!
//! List values are comma-separated and `v*k` repeats `v` k times. Blank
//! lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::damping::DampingParams;
use crate::error::{Error, Result};
use crate::ica::{ContrastFunction, PipelineConfig};
use crate::orthogonalize::{BodySource, OrthMethod};
use crate::sampling::{MixingKind, TailExponents};

/// Where each trial's mixing matrix comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MixingSpec {
    /// Fresh Gaussian matrix with unit columns per trial.
    RandomUnitColumns,
    /// Fresh random orthogonal matrix per trial.
    Orthogonal,
    /// The same fixed matrix for every trial.
    Fixed(DMatrix<f64>),
}

impl MixingSpec {
    pub fn kind(&self) -> Option<MixingKind> {
        match self {
            MixingSpec::RandomUnitColumns => Some(MixingKind::RandomUnitColumns),
            MixingSpec::Orthogonal => Some(MixingKind::Orthogonal),
            MixingSpec::Fixed(_) => None,
        }
    }
}

/// Which damping settings to cross with methods and contrasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingChoice {
    On,
    Off,
    Both,
}

impl DampingChoice {
    fn flags(self) -> &'static [bool] {
        match self {
            DampingChoice::On => &[true],
            DampingChoice::Off => &[false],
            DampingChoice::Both => &[false, true],
        }
    }
}

impl FromStr for DampingChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "on" | "true" | "yes" | "damped" => Ok(DampingChoice::On),
            "off" | "false" | "no" | "undamped" => Ok(DampingChoice::Off),
            "both" => Ok(DampingChoice::Both),
            other => Err(Error::InvalidParameter(format!(
                "unknown damping setting `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub eta: TailExponents,
    pub mixing: MixingSpec,
    /// Strictly increasing sample sizes.
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub pipelines: Vec<PipelineConfig>,
    /// Rescale sources to unit first absolute moment.
    pub normalize: bool,
    /// Record wall-clock time per pipeline. Off by default because timings
    /// break byte-identical output.
    pub timing: bool,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::InvalidParameter("sample-size grid is empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "sample-size grid must be strictly increasing".into(),
            ));
        }
        if self.n_grid[0] <= self.dim() {
            return Err(Error::InvalidParameter(format!(
                "every sample size must exceed the dimension {}",
                self.dim()
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.pipelines.is_empty() {
            return Err(Error::InvalidParameter("no pipelines configured".into()));
        }
        if let MixingSpec::Fixed(m) = &self.mixing {
            if m.nrows() != self.dim() || m.ncols() != self.dim() {
                return Err(Error::InvalidParameter(format!(
                    "mixing matrix is {}x{} but η has {} entries",
                    m.nrows(),
                    m.ncols(),
                    self.dim()
                )));
            }
        }
        for p in &self.pipelines {
            p.validate()?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        ConfigBuilder::from_str(&text)?.build(base)
    }
}

/// Raw `key = value` settings, applied in order so later keys override
/// earlier ones.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    values: BTreeMap<String, (usize, String)>,
}

const KNOWN_KEYS: &[&str] = &[
    "n",
    "eta",
    "mixing",
    "mixing_file",
    "N",
    "trials",
    "seed",
    "methods",
    "contrasts",
    "damping",
    "pipelines",
    "target_rejection",
    "tolerance",
    "max_restarts",
    "convergence_tol",
    "max_iter",
    "body_rows",
    "fit_rows",
    "normalize",
    "timing",
    "output",
];

impl FromStr for ConfigBuilder {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut b = ConfigBuilder::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            b.set_at(k.trim(), v.trim(), idx + 1)?;
        }
        Ok(b)
    }
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn set_at(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Parse {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        self.values
            .insert(key.to_string(), (line, value.to_string()));
        Ok(())
    }

    /// Overrides one setting, e.g. from a command-line flag.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        self.set_at(key, &value.into(), 0)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(_, v)| v.as_str())
    }

    fn err(&self, key: &str, message: String) -> Error {
        let line = self.values.get(key).map(|(l, _)| *l).unwrap_or(0);
        Error::Parse {
            line,
            message: format!("{key}: {message}"),
        }
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| self.err(key, format!("`{v}`: {e}"))),
        }
    }

    fn list<T: FromStr + Clone>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => parse_list(v).map(Some).map_err(|e| self.err(key, e)),
        }
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key).map(|v| v.to_ascii_lowercase()) {
            None => Ok(false),
            Some(v) => match v.as_str() {
                "true" | "on" | "yes" | "1" => Ok(true),
                "false" | "off" | "no" | "0" => Ok(false),
                _ => Err(self.err(key, format!("`{v}` is not a boolean"))),
            },
        }
    }

    /// Resolves the settings; relative file paths are taken from `base`.
    pub fn build(&self, base: &Path) -> Result<ExperimentConfig> {
        let eta_values: Vec<f64> = self
            .list("eta")?
            .ok_or_else(|| self.err("eta", "missing".into()))?;
        let eta = TailExponents::new(eta_values)?;
        if let Some(n) = self.parsed::<usize>("n")? {
            if n != eta.len() {
                return Err(self.err("n", format!("n = {n} but η has {} entries", eta.len())));
            }
        }

        let mixing = match (self.get("mixing"), self.get("mixing_file")) {
            (_, Some(file)) => {
                let (m, _) = crate::io::load_matrix(&base.join(file))?;
                MixingSpec::Fixed(m)
            }
            (None, None) => MixingSpec::RandomUnitColumns,
            (Some(v), None) => match v.to_ascii_lowercase().as_str() {
                "random" | "random-unit-columns" => MixingSpec::RandomUnitColumns,
                "orthogonal" => MixingSpec::Orthogonal,
                other => return Err(self.err("mixing", format!("unknown mixing `{other}`"))),
            },
        };

        let n_grid: Vec<usize> = self
            .list("N")?
            .ok_or_else(|| self.err("N", "missing".into()))?;
        let trials = self.parsed("trials")?.unwrap_or(1);
        let seed = self.parsed("seed")?.unwrap_or(0);

        let defaults = PipelineConfig::default();
        let params = DampingParams {
            target_rejection: self
                .parsed("target_rejection")?
                .unwrap_or(DampingParams::default().target_rejection),
            tolerance: self
                .parsed("tolerance")?
                .unwrap_or(DampingParams::default().tolerance),
        };
        let body = match self.parsed::<usize>("body_rows")? {
            None | Some(0) => BodySource::SameSamples,
            Some(k) => BodySource::FirstRows(k),
        };
        let template = PipelineConfig {
            body,
            fit_rows: self.parsed::<usize>("fit_rows")?.filter(|&k| k > 0),
            max_restarts: self
                .parsed("max_restarts")?
                .unwrap_or(defaults.max_restarts),
            convergence_tol: self
                .parsed("convergence_tol")?
                .unwrap_or(defaults.convergence_tol),
            max_iter: self.parsed("max_iter")?.unwrap_or(defaults.max_iter),
            ..defaults
        };

        let pipelines = if let Some(spec) = self.get("pipelines") {
            spec.split(',')
                .map(|p| parse_pipeline(p, &template, params))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| self.err("pipelines", e.to_string()))?
        } else {
            let methods: Vec<OrthMethod> = self
                .list("methods")?
                .unwrap_or_else(|| vec![OrthMethod::Centroid]);
            let contrasts: Vec<ContrastFunction> = self
                .list("contrasts")?
                .unwrap_or_else(|| vec![ContrastFunction::Pow3]);
            let damping: DampingChoice = self.parsed("damping")?.unwrap_or(DampingChoice::On);
            let mut out = Vec::new();
            for &m in &methods {
                for &c in &contrasts {
                    for &d in damping.flags() {
                        out.push(PipelineConfig {
                            orthogonalizer: m,
                            contrast: c,
                            damping: d.then_some(params),
                            ..template.clone()
                        });
                    }
                }
            }
            out
        };

        let config = ExperimentConfig {
            eta,
            mixing,
            n_grid,
            trials,
            seed,
            pipelines,
            normalize: self.flag("normalize")?,
            timing: self.flag("timing")?,
            output: self.get("output").map(|p| base.join(p)),
        };
        config.validate()?;
        Ok(config)
    }
}

/// `method/contrast/damped|undamped`, the format of
/// [`PipelineConfig::label`].
fn parse_pipeline(
    spec: &str,
    template: &PipelineConfig,
    params: DampingParams,
) -> Result<PipelineConfig> {
    let parts: Vec<&str> = spec.trim().split('/').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "pipeline `{}` is not method/contrast/damping",
            spec.trim()
        )));
    }
    let damping: DampingChoice = parts[2].parse()?;
    let damped = match damping {
        DampingChoice::On => true,
        DampingChoice::Off => false,
        DampingChoice::Both => {
            return Err(Error::InvalidParameter(
                "a single pipeline is damped or not".into(),
            ))
        }
    };
    Ok(PipelineConfig {
        orthogonalizer: parts[0].parse()?,
        contrast: parts[1].parse()?,
        damping: damped.then_some(params),
        ..template.clone()
    })
}

/// Comma-separated values; `v*k` stands for `k` copies of `v`.
pub fn parse_list<T: FromStr + Clone>(text: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err("empty list entry".into());
        }
        let (value, count) = match item.rsplit_once('*') {
            Some((v, k)) => {
                let k: usize = k
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad repeat count in `{item}`"))?;
                (v.trim(), k)
            }
            None => (item, 1),
        };
        let parsed: T = value.parse().map_err(|e| format!("`{value}`: {e}"))?;
        out.extend(std::iter::repeat_n(parsed, count));
    }
    Ok(out)
}
