//! End-to-end fitting: partitions, correlations, clusters, hierarchy and
//! slot training on a set of training rows, plus persistence.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::{dcc_cluster, ClusterSet};
use crate::config::{RunConfig, Structure};
use crate::dataset::{AttributeKind, AttributeMeta, Dataset};
use crate::dcorr::DCorrMatrix;
use crate::error::{Error, Result};
use crate::lah::{Hierarchy, HierarchyNaming, LahDocument, TrainedLah};
use crate::label_semantics::{FuzzyPartition, MassAssignment};
use crate::ldt::MassColumn;

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: RunConfig,
    pub attributes: Vec<AttributeMeta>,
    pub goal_name: String,
    pub classes: Vec<String>,
    pub partitions: Vec<FuzzyPartition>,
    /// Attribute-to-goal correlations on the training rows (self-organised
    /// models only).
    pub goal_dcorr: Option<Vec<f64>>,
    pub clusters: Option<ClusterSet>,
    pub lah: TrainedLah,
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    config: RunConfig,
    attributes: Vec<AttributeMeta>,
    goal_name: String,
    classes: Vec<String>,
    partitions: Vec<FuzzyPartition>,
    goal_dcorr: Option<Vec<f64>>,
    clusters: Option<ClusterSet>,
    lah: LahDocument,
}

/// Fuzzy partitions fitted to the value ranges seen on `rows`.
pub fn fit_partitions(d: &Dataset, rows: &[usize], labels: usize) -> Result<Vec<FuzzyPartition>> {
    (0..d.n_attributes())
        .map(|a| FuzzyPartition::build(&d.meta_over(a, rows), labels))
        .collect()
}

/// Self-organised hierarchy for the given rows, with the correlations and
/// clusters it was built from.
pub fn build_hierarchy(d: &Dataset, rows: &[usize], cfg: &RunConfig) -> Result<(Hierarchy, DCorrMatrix, ClusterSet)> {
    let m = DCorrMatrix::compute(d, rows, cfg.encoding)?;
    let clusters = dcc_cluster(&m.clustering_input(), cfg.k)?;
    let h = Hierarchy::build_solah(&clusters, &m.goal, cfg.theta)?;
    Ok((h, m, clusters))
}

fn mass_columns(d: &Dataset, rows: &[usize], partitions: &[FuzzyPartition]) -> Result<Vec<MassColumn>> {
    partitions
        .iter()
        .enumerate()
        .map(|(a, p)| {
            let masses = rows
                .iter()
                .map(|&i| p.mass_assignment(d.value(i, a)))
                .collect::<Result<Vec<_>>>()?;
            Ok(MassColumn {
                id: a,
                focal_count: p.focal_count(),
                masses,
            })
        })
        .collect()
}

impl Model {
    /// Fits on `rows` of an imputed dataset using the structure named in
    /// the config.
    pub fn fit(d: &Dataset, rows: &[usize], cfg: &RunConfig) -> Result<Model> {
        cfg.validate_model()?;
        match cfg.structure {
            Structure::Flat => Model::fit_with(d, rows, cfg, Hierarchy::flat(d.n_attributes()), None, None),
            Structure::Solah => {
                let (h, m, clusters) = build_hierarchy(d, rows, cfg)?;
                Model::fit_with(d, rows, cfg, h, Some(m.goal), Some(clusters))
            }
        }
    }

    /// Fits a fixed hierarchy.
    pub fn fit_hierarchy(d: &Dataset, rows: &[usize], cfg: &RunConfig, h: Hierarchy) -> Result<Model> {
        cfg.validate_model()?;
        if h.n_attributes != d.n_attributes() {
            return Err(Error::Dimension(format!(
                "hierarchy over {} attributes, dataset has {}",
                h.n_attributes,
                d.n_attributes()
            )));
        }
        Model::fit_with(d, rows, cfg, h, None, None)
    }

    fn fit_with(
        d: &Dataset,
        rows: &[usize],
        cfg: &RunConfig,
        h: Hierarchy,
        goal_dcorr: Option<Vec<f64>>,
        clusters: Option<ClusterSet>,
    ) -> Result<Model> {
        if rows.is_empty() {
            return Err(Error::Empty);
        }
        let partitions = fit_partitions(d, rows, cfg.labels)?;
        let columns = mass_columns(d, rows, &partitions)?;
        let goal: Vec<usize> = rows.iter().map(|&i| d.goal()[i]).collect();
        let lah = TrainedLah::train(&h, &columns, &goal, d.n_classes(), cfg.lid3(), cfg.intermediate)?;
        Ok(Model {
            config: cfg.clone(),
            attributes: d.attributes.clone(),
            goal_name: d.goal_name.clone(),
            classes: d.classes.clone(),
            partitions,
            goal_dcorr,
            clusters,
            lah,
        })
    }

    pub fn n_attributes(&self) -> usize {
        self.partitions.len()
    }

    pub fn rule_count(&self) -> usize {
        self.lah.rule_count()
    }

    pub fn levels(&self) -> usize {
        self.lah.levels()
    }

    /// Realised cluster count; a flat model counts as one cluster.
    pub fn cluster_count(&self) -> usize {
        self.clusters.as_ref().map_or(1, ClusterSet::len)
    }

    pub fn naming(&self) -> HierarchyNaming<'_> {
        HierarchyNaming {
            partitions: &self.partitions,
            classes: &self.classes,
            mode: self.lah.mode,
        }
    }

    fn row_masses(&self, values: &[f64]) -> Result<Vec<MassAssignment>> {
        if values.len() != self.n_attributes() {
            return Err(Error::Dimension(format!(
                "expected {} attribute values, got {}",
                self.n_attributes(),
                values.len()
            )));
        }
        self.partitions
            .iter()
            .zip(values)
            .map(|(p, &v)| p.mass_assignment(v))
            .collect()
    }

    /// Class masses for one row of coded attribute values.
    pub fn predict_masses(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.lah.infer(&self.row_masses(values)?)
    }

    /// Most massive class; ties go to the lowest code.
    pub fn predict(&self, values: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_masses(values)?))
    }

    /// Fired branches of every slot for one row.
    pub fn explain(&self, values: &[f64]) -> Result<String> {
        self.lah.explain(&self.row_masses(values)?, &self.naming())
    }

    /// Codes raw text cells the way the training data was coded.
    pub fn encode_row(&self, cells: &[&str]) -> Result<Vec<f64>> {
        if cells.len() != self.n_attributes() {
            return Err(Error::Dimension(format!(
                "expected {} attribute values, got {}",
                self.n_attributes(),
                cells.len()
            )));
        }
        self.attributes
            .iter()
            .zip(cells)
            .map(|(meta, cell)| {
                let cell = cell.trim();
                match meta.kind {
                    AttributeKind::Continuous => cell
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::invalid(format!("non-numeric value {cell:?} for {}", meta.name))),
                    AttributeKind::Discrete => meta
                        .values
                        .iter()
                        .position(|v| v == cell)
                        .map(|c| c as f64)
                        .ok_or_else(|| Error::UnknownValue {
                            attribute: meta.index,
                            value: cell.to_string(),
                        }),
                }
            })
            .collect()
    }

    /// Rule document: one list for a flat model, slot blocks and
    /// composition templates otherwise.
    pub fn semantics(&self) -> String {
        self.lah.semantics(&self.naming())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            config: self.config.clone(),
            attributes: self.attributes.clone(),
            goal_name: self.goal_name.clone(),
            classes: self.classes.clone(),
            partitions: self.partitions.clone(),
            goal_dcorr: self.goal_dcorr.clone(),
            clusters: self.clusters.clone(),
            lah: self.lah.to_document(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        let lah = TrainedLah::from_document(&doc.lah)?;
        if doc.partitions.len() != lah.hierarchy.n_attributes || doc.attributes.len() != doc.partitions.len() {
            return Err(Error::Dimension("partitions do not match the hierarchy".into()));
        }
        if lah.n_classes() != doc.classes.len() {
            return Err(Error::Dimension("class list does not match the trained slots".into()));
        }
        Ok(Model {
            config: doc.config,
            attributes: doc.attributes,
            goal_name: doc.goal_name,
            classes: doc.classes,
            partitions: doc.partitions,
            goal_dcorr: doc.goal_dcorr,
            clusters: doc.clusters,
            lah,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Model::from_json(&text)
    }
}

pub fn argmax(masses: &[f64]) -> usize {
    let mut best = 0;
    for (i, &m) in masses.iter().enumerate() {
        if m > masses[best] {
            best = i;
        }
    }
    best
}

impl RunConfig {
    fn validate_model(&self) -> Result<()> {
        // fold count is irrelevant to a single fit
        RunConfig { folds: 2, ..self.clone() }.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Schema;

    fn toy() -> Dataset {
        let text = "a,b,c,y\n0,0,5,n\n1,0,4,n\n2,1,5,n\n3,1,4,n\n7,0,5,p\n8,1,4,p\n9,0,5,p\n10,1,4,p\n";
        Dataset::parse_csv("toy", text, &Schema::default()).unwrap()
    }

    #[test]
    fn flat_and_solah_fit_and_predict() {
        let d = toy();
        let rows: Vec<usize> = (0..d.len()).collect();
        for structure in [Structure::Flat, Structure::Solah] {
            let cfg = RunConfig { structure, k: 2, ..RunConfig::default() };
            let m = Model::fit(&d, &rows, &cfg).unwrap();
            for i in 0..d.len() {
                assert_eq!(m.predict(&d.row(i)).unwrap(), d.goal()[i]);
            }
            assert!(m.rule_count() >= 1);
        }
    }

    #[test]
    fn json_roundtrip_preserves_predictions() {
        let d = toy();
        let rows: Vec<usize> = (0..d.len()).collect();
        let m = Model::fit(&d, &rows, &RunConfig { k: 2, ..RunConfig::default() }).unwrap();
        let back = Model::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn encode_row_checks_arity_and_values() {
        let d = toy();
        let rows: Vec<usize> = (0..d.len()).collect();
        let m = Model::fit(&d, &rows, &RunConfig::default()).unwrap();
        assert_eq!(m.encode_row(&["2.5", "1", "4"]).unwrap(), vec![2.5, 1.0, 1.0]);
        let err = m.encode_row(&["1", "2"]).unwrap_err().to_string();
        assert!(err.contains("expected 3"), "{err}");
        assert!(m.encode_row(&["x", "0", "5"]).is_err());
    }

    #[test]
    fn argmax_prefers_lowest_on_ties() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.3, 0.5]), 2);
    }
}
