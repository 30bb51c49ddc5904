//! Label-semantics decision trees arranged in self-organised linguistic
//! attribute hierarchies.
//!
//! The pipeline: [`dataset`] loads a CSV, [`label_semantics`] turns values
//! into mass assignments over focal sets, [`dcorr`] and [`cluster`] group
//! correlated attributes, [`lah`] arranges one LID3 tree ([`ldt`]) per
//! cluster into a hierarchy, and [`eval`] cross-validates the whole thing.

pub mod cli;
pub mod cluster;
pub mod config;
pub mod dataset;
pub mod dcorr;
pub mod error;
pub mod eval;
pub mod label_semantics;
pub mod lah;
pub mod ldt;
pub mod model;

pub use cluster::{dcc_cluster, ClusterSet};
pub use config::{RunConfig, Structure};
pub use dataset::{AttributeKind, AttributeMeta, Dataset, FoldPlan, Schema};
pub use dcorr::{dcorr, DCorr, DCorrMatrix, GoalEncoding};
pub use error::{Error, Result};
pub use eval::{accuracy, auc, crossval, ksweep, EvalReport, RocCurve};
pub use label_semantics::{FuzzyPartition, MassAssignment};
pub use lah::{Hierarchy, IntermediateMode, TrainedLah};
pub use ldt::{Ldt, Lid3Params};
pub use model::Model;
