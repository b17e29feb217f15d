//! TOML run configuration.
//!
//! ```toml
//! output_dir = "out"
//!
//! [pipeline]
//! k = 3
//! budget = 40
//!
//! [pipeline.mapper]
//! n_intervals = 6
//! overlap_frac = 0.3
//! metric = "euclidean"
//! lens = { kind = "pca", index = 0 }
//! cluster = { kind = "single_linkage_gap", n_bins = 10 }
//!
//! [generator]
//! seed = 7
//!
//! [anomaly]
//! stage = 8
//! count = 20
//! ```
//!
//! `[input]` with `stages = ["a.csv", ...]` replaces the generator. Relative
//! paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use soq_core::pipeline::PipelineConfig;
use soq_core::synthgen::GeneratorConfig;
use soq_core::Error;

use crate::error::{Result, SoqError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnomalyConfig {
    /// Defaults to the last stage.
    #[serde(default)]
    pub stage: Option<usize>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// One point-cloud CSV per stage, in stage order.
    pub stages: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub generator: Option<GeneratorConfig>,
    #[serde(default)]
    pub anomaly: Option<AnomalyConfig>,
    #[serde(default)]
    pub input: Option<InputConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("soq-out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: default_output_dir(),
            pipeline: PipelineConfig::default(),
            generator: None,
            anomaly: None,
            input: None,
        }
    }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

impl RunConfig {
    /// Parses and validates; `base` anchors relative paths.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let at = e
                .span()
                .map(|s| {
                    let (l, c) = line_col(text, s.start);
                    format!("line {l}, column {c}: ")
                })
                .unwrap_or_default();
            Error::BadConfig(format!("{at}{}", e.message()))
        })?;
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if let Some(input) = cfg.input.as_mut() {
            for p in input.stages.iter_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| SoqError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SoqError::from(Error::BadConfig(m)));
        self.pipeline.validate().map_err(|e| match e {
            Error::BadConfig(m) => Error::BadConfig(format!("pipeline: {m}")),
            other => other,
        })?;
        if self.generator.is_some() && self.input.is_some() {
            return bad("`generator` and `input` are mutually exclusive".into());
        }
        self.generator_config().validate().map_err(|e| match e {
            Error::BadConfig(m) => Error::BadConfig(format!("generator: {m}")),
            other => other,
        })?;
        if let Some(input) = &self.input {
            if input.stages.len() < 2 {
                return bad("input.stages: at least two stage files are required".into());
            }
            if let Some(missing) = input.stages.iter().find(|p| !p.is_file()) {
                return bad(format!("input.stages: {} does not exist", missing.display()));
            }
            if self.anomaly.is_some() {
                return bad("`anomaly` needs the generator, not `input`".into());
            }
        }
        if let Some(a) = &self.anomaly {
            let n = self.generator_config().n_stages;
            if let Some(stage) = a.stage {
                if stage == 0 || stage > n {
                    return bad(format!("anomaly.stage: {stage} is outside 1..={n}"));
                }
            }
        }
        Ok(())
    }

    /// The configured generator, or the default one when no input files are given.
    pub fn generator_config(&self) -> GeneratorConfig {
        self.generator.clone().unwrap_or_default()
    }
}
