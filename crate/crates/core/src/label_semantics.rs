//! Fuzzy labels and mass assignments over focal sets.
//!
//! A continuous attribute described by `n` labels has a chain of `2n - 1`
//! focal sets `{L1}, {L1,L2}, {L2}, ..., {Ln}`. Each focal set owns an anchor
//! point; the mass of a focal set is a triangle that peaks at its anchor and
//! vanishes at the neighbouring anchors, so any value carries mass on at most
//! two adjacent focal sets. Discrete attributes use one singleton focal set
//! per value.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeKind, AttributeMeta};
use crate::error::{Error, Result};

/// Contiguous run of label indices `first..=last`, of size one or two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FocalSet {
    pub first: usize,
    pub last: usize,
}

impl FocalSet {
    pub fn singleton(label: usize) -> Self {
        FocalSet {
            first: label,
            last: label,
        }
    }

    pub fn pair(label: usize) -> Self {
        FocalSet {
            first: label,
            last: label + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, label: usize) -> bool {
        (self.first..=self.last).contains(&label)
    }

    pub fn render(&self, labels: &[String]) -> String {
        let names: Vec<&str> = (self.first..=self.last).map(|l| labels[l].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PartitionShape {
    Continuous { anchors: Vec<f64> },
    Discrete,
    /// Constant attribute: a single focal set carries all mass.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyPartition {
    pub attribute: usize,
    pub name: String,
    pub labels: Vec<String>,
    pub focal_sets: Vec<FocalSet>,
    pub shape: PartitionShape,
}

/// Sparse distribution over focal-set indices; only nonzero masses are kept.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MassAssignment {
    pub entries: Vec<(usize, f64)>,
}

impl MassAssignment {
    pub fn point(focal: usize) -> Self {
        MassAssignment {
            entries: vec![(focal, 1.0)],
        }
    }

    /// From a dense vector, dropping zero entries.
    pub fn from_dense(masses: &[f64]) -> Self {
        MassAssignment {
            entries: masses
                .iter()
                .enumerate()
                .filter(|(_, &m)| m != 0.0)
                .map(|(f, &m)| (f, m))
                .collect(),
        }
    }

    pub fn mass(&self, focal: usize) -> f64 {
        self.entries
            .iter()
            .find(|(f, _)| *f == focal)
            .map_or(0.0, |&(_, m)| m)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, m)| m).sum()
    }

    pub fn to_dense(&self, focal_count: usize) -> Vec<f64> {
        let mut out = vec![0.0; focal_count];
        for &(f, m) in &self.entries {
            out[f] += m;
        }
        out
    }
}

pub fn default_label_names(n: usize) -> Vec<String> {
    match n {
        2 => vec!["low".into(), "high".into()],
        3 => vec!["small".into(), "medium".into(), "large".into()],
        _ => (1..=n).map(|i| format!("L{i}")).collect(),
    }
}

impl FuzzyPartition {
    /// Builds the partition for one attribute. Continuous attributes get
    /// `2 * n_labels - 1` uniformly spaced anchors across `[lo, hi]`.
    pub fn build(meta: &AttributeMeta, n_labels: usize) -> Result<FuzzyPartition> {
        match meta.kind {
            AttributeKind::Discrete => {
                if meta.values.is_empty() {
                    return Err(Error::AllMissing(meta.index));
                }
                Ok(FuzzyPartition {
                    attribute: meta.index,
                    name: meta.name.clone(),
                    labels: meta.values.clone(),
                    focal_sets: (0..meta.values.len()).map(FocalSet::singleton).collect(),
                    shape: PartitionShape::Discrete,
                })
            }
            AttributeKind::Continuous => {
                if n_labels < 2 {
                    return Err(Error::invalid(format!(
                        "continuous attribute {} needs at least 2 labels, got {n_labels}",
                        meta.name
                    )));
                }
                if !(meta.lo.is_finite() && meta.hi.is_finite()) || meta.lo > meta.hi {
                    return Err(Error::invalid(format!(
                        "attribute {} has invalid range [{}, {}]",
                        meta.name, meta.lo, meta.hi
                    )));
                }
                if meta.lo == meta.hi {
                    log::debug!("attribute {} is constant; degenerate partition", meta.name);
                    return Ok(FuzzyPartition {
                        attribute: meta.index,
                        name: meta.name.clone(),
                        labels: vec![format!("={}", meta.lo)],
                        focal_sets: vec![FocalSet::singleton(0)],
                        shape: PartitionShape::Degenerate,
                    });
                }
                let count = 2 * n_labels - 1;
                let step = (meta.hi - meta.lo) / (count - 1) as f64;
                let mut anchors: Vec<f64> =
                    (0..count).map(|j| meta.lo + j as f64 * step).collect();
                anchors[count - 1] = meta.hi;
                let focal_sets = (0..count)
                    .map(|j| {
                        if j % 2 == 0 {
                            FocalSet::singleton(j / 2)
                        } else {
                            FocalSet::pair(j / 2)
                        }
                    })
                    .collect();
                Ok(FuzzyPartition {
                    attribute: meta.index,
                    name: meta.name.clone(),
                    labels: default_label_names(n_labels),
                    focal_sets,
                    shape: PartitionShape::Continuous { anchors },
                })
            }
        }
    }

    pub fn focal_count(&self) -> usize {
        self.focal_sets.len()
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.shape, PartitionShape::Degenerate)
    }

    pub fn anchors(&self) -> Option<&[f64]> {
        match &self.shape {
            PartitionShape::Continuous { anchors } => Some(anchors),
            _ => None,
        }
    }

    pub fn focal_name(&self, focal: usize) -> String {
        self.focal_sets[focal].render(&self.labels)
    }

    /// Mass assignment of one value. Values outside the anchor range put all
    /// of their mass on the nearest end of the chain.
    pub fn mass_assignment(&self, x: f64) -> Result<MassAssignment> {
        match &self.shape {
            PartitionShape::Continuous { anchors } => {
                if !x.is_finite() {
                    return Err(Error::invalid(format!(
                        "non-finite value {x} for attribute {}",
                        self.name
                    )));
                }
                let last = anchors.len() - 1;
                if x <= anchors[0] {
                    return Ok(MassAssignment::point(0));
                }
                if x >= anchors[last] {
                    return Ok(MassAssignment::point(last));
                }
                // anchors[j] <= x < anchors[j + 1]
                let j = anchors.partition_point(|&t| t <= x) - 1;
                let w = (x - anchors[j]) / (anchors[j + 1] - anchors[j]);
                if w == 0.0 {
                    Ok(MassAssignment::point(j))
                } else {
                    Ok(MassAssignment {
                        entries: vec![(j, 1.0 - w), (j + 1, w)],
                    })
                }
            }
            PartitionShape::Discrete => {
                let code = x as usize;
                if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && code < self.labels.len() {
                    Ok(MassAssignment::point(code))
                } else {
                    Err(Error::UnknownValue {
                        attribute: self.attribute,
                        value: x.to_string(),
                    })
                }
            }
            PartitionShape::Degenerate => {
                if x.is_finite() {
                    Ok(MassAssignment::point(0))
                } else {
                    Err(Error::invalid(format!(
                        "non-finite value {x} for attribute {}",
                        self.name
                    )))
                }
            }
        }
    }

    /// Appropriateness of a single label: total mass of the focal sets that
    /// contain it.
    pub fn appropriateness(&self, masses: &MassAssignment, label: usize) -> f64 {
        masses
            .entries
            .iter()
            .filter(|(f, _)| self.focal_sets[*f].contains(label))
            .map(|&(_, m)| m)
            .sum()
    }
}

impl fmt::Display for FuzzyPartition {
    /// One line: attribute index and name, anchors (if any), focal-set chain.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "attribute {} ({})", self.attribute, self.name)?;
        match &self.shape {
            PartitionShape::Continuous { anchors } => {
                let a: Vec<String> = anchors.iter().map(|t| format!("{t}")).collect();
                write!(f, " anchors [{}]", a.join(", "))?;
            }
            PartitionShape::Discrete => write!(f, " discrete")?,
            PartitionShape::Degenerate => write!(f, " degenerate")?,
        }
        let chain: Vec<String> = (0..self.focal_count()).map(|j| self.focal_name(j)).collect();
        write!(f, " focal sets {}", chain.join(" "))
    }
}
