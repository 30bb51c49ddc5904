//! Run configuration shared by the pipeline, evaluation and CLI.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dcorr::GoalEncoding;
use crate::error::{Error, Result};
use crate::lah::IntermediateMode;
use crate::ldt::{EmptyBranch, Lid3Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    /// Self-organised hierarchy over distance-correlation clusters.
    #[default]
    Solah,
    /// One LDT over every attribute.
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    /// Labels per continuous attribute.
    pub labels: usize,
    /// Preset cluster count.
    pub k: usize,
    /// Same-level threshold on cluster-average goal correlation.
    pub theta: f64,
    /// LID3 purity threshold.
    pub threshold: f64,
    pub folds: usize,
    pub seed: u64,
    pub structure: Structure,
    pub encoding: GoalEncoding,
    pub empty_branch: EmptyBranch,
    pub intermediate: IntermediateMode,
    /// Worker threads for fold-level parallelism; 0 uses every core.
    pub jobs: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            labels: 3,
            k: 4,
            theta: 0.02,
            threshold: 1.0,
            folds: 10,
            seed: 1,
            structure: Structure::Solah,
            encoding: GoalEncoding::ClassCode,
            empty_branch: EmptyBranch::Parent,
            intermediate: IntermediateMode::MassVector,
            jobs: 0,
            out: None,
        }
    }
}

const KEYS: &[&str] = &[
    "dataset",
    "labels",
    "k",
    "theta",
    "threshold",
    "folds",
    "seed",
    "structure",
    "encoding",
    "empty-branch",
    "intermediate",
    "jobs",
    "out",
];

fn kebab<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn from_kebab<T: for<'de> Deserialize<'de>>(key: &str, value: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|_| Error::invalid(format!("bad value {value:?} for {key}")))
}

impl RunConfig {
    pub fn lid3(&self) -> Lid3Params {
        Lid3Params {
            threshold: self.threshold,
            empty_branch: self.empty_branch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=20).contains(&self.labels) {
            return Err(Error::invalid(format!("labels must be in 2..=20, got {}", self.labels)));
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::invalid(format!("theta must be >= 0, got {}", self.theta)));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::invalid(format!("threshold must be in (0, 1], got {}", self.threshold)));
        }
        if self.folds < 2 {
            return Err(Error::invalid(format!("folds must be at least 2, got {}", self.folds)));
        }
        Ok(())
    }

    /// `(key, value)` pairs in a fixed order; unset paths are `-`.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("-".to_string(), |p| p.display().to_string());
        let values = [
            path(&self.dataset),
            self.labels.to_string(),
            self.k.to_string(),
            self.theta.to_string(),
            self.threshold.to_string(),
            self.folds.to_string(),
            self.seed.to_string(),
            kebab(&self.structure),
            kebab(&self.encoding),
            kebab(&self.empty_branch),
            kebab(&self.intermediate),
            self.jobs.to_string(),
            path(&self.out),
        ];
        KEYS.iter().copied().zip(values).collect()
    }

    /// Plain `key = value` lines, readable by [`RunConfig::merge_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// The same lines behind a comment marker, for embedding in artifacts.
    pub fn header(&self, comment: &str) -> String {
        self.to_text().lines().map(|l| format!("{comment} {l}\n")).collect()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<usize> {
            v.parse().map_err(|_| Error::invalid(format!("bad value {v:?} for {key}")))
        };
        let float = |v: &str| -> Result<f64> {
            v.parse().map_err(|_| Error::invalid(format!("bad value {v:?} for {key}")))
        };
        let path = |v: &str| (v != "-").then(|| PathBuf::from(v));
        match key.replace('_', "-").as_str() {
            "dataset" => self.dataset = path(value),
            "labels" => self.labels = num(value)?,
            "k" => self.k = num(value)?,
            "theta" => self.theta = float(value)?,
            "threshold" => self.threshold = float(value)?,
            "folds" => self.folds = num(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad value {value:?} for seed")))?
            }
            "structure" => self.structure = from_kebab(key, value)?,
            "encoding" => self.encoding = from_kebab(key, value)?,
            "empty-branch" => self.empty_branch = from_kebab(key, value)?,
            "intermediate" => self.intermediate = from_kebab(key, value)?,
            "jobs" => self.jobs = num(value)?,
            "out" => self.out = path(value),
            _ => return Err(Error::invalid(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines are skipped; inside `#`
    /// comments only known keys are read, so an artifact header can be fed
    /// back as a config file.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let trimmed = raw.trim();
            let commented = trimmed.starts_with('#');
            let line = trimmed.trim_start_matches('#').trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim();
                    if commented && !KEYS.contains(&k.replace('_', "-").as_str()) {
                        continue;
                    }
                    self.set(k, v.trim())?;
                }
                None if commented => {}
                None => {
                    return Err(Error::Parse {
                        row: i + 1,
                        msg: format!("expected key = value, got {raw:?}"),
                    })
                }
            }
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        cfg.merge_text(text)?;
        Ok(cfg)
    }
}
