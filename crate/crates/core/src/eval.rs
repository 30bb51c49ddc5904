//! Accuracy, ROC/AUC and k-fold cross-validation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::dataset::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::model::{argmax, Model};

pub fn accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Empty);
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)` from threshold +inf down.
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    /// Sweeps the threshold over the distinct scores, highest first. Tied
    /// scores move both rates in one step. `None` if either class is absent.
    pub fn from_scores(scores: &[f64], positive: &[bool]) -> Option<RocCurve> {
        assert_eq!(scores.len(), positive.len(), "scores and labels differ in length");
        let p = positive.iter().filter(|&&b| b).count();
        let n = positive.len() - p;
        if p == 0 || n == 0 {
            return None;
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let mut points = vec![(0.0, 0.0)];
        let (mut tp, mut fp) = (0usize, 0usize);
        let mut i = 0;
        while i < order.len() {
            let s = scores[order[i]];
            while i < order.len() && scores[order[i]] == s {
                if positive[order[i]] {
                    tp += 1;
                } else {
                    fp += 1;
                }
                i += 1;
            }
            points.push((fp as f64 / n as f64, tp as f64 / p as f64));
        }
        Some(RocCurve { points })
    }

    /// Trapezoidal area.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (x, y) in &self.points {
            let _ = writeln!(out, "{x},{y}");
        }
        out
    }
}

/// Binary AUC; `None` when one class is absent.
pub fn auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    RocCurve::from_scores(scores, positive).map(|r| r.area())
}

/// AUC over class masses. Binary goals score class 1; otherwise the
/// one-vs-rest AUCs of the classes present are averaged.
pub fn class_auc(masses: &[Vec<f64>], truth: &[usize], n_classes: usize) -> Option<f64> {
    let one_vs_rest = |c: usize| {
        let scores: Vec<f64> = masses.iter().map(|m| m[c]).collect();
        let positive: Vec<bool> = truth.iter().map(|&t| t == c).collect();
        auc(&scores, &positive)
    };
    if n_classes == 2 {
        return one_vs_rest(1);
    }
    let aucs: Vec<f64> = (0..n_classes).filter_map(one_vs_rest).collect();
    (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport {
    pub fold: usize,
    pub accuracy: f64,
    pub auc: Option<f64>,
    /// Total branch count over all slots.
    pub rules: usize,
    pub levels: usize,
    pub clusters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub config: RunConfig,
    pub dataset: String,
    pub folds: Vec<FoldReport>,
    /// Out-of-fold class masses, indexed by sample.
    pub masses: Vec<Vec<f64>>,
    pub truth: Vec<usize>,
    /// Wall-clock milliseconds for the whole loop.
    pub time_ms: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Most frequent value, smallest on ties.
fn mode(xs: impl Iterator<Item = usize>) -> usize {
    let mut counts = BTreeMap::new();
    for x in xs {
        *counts.entry(x).or_insert(0usize) += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    counts.into_iter().find(|&(_, c)| c == best).map_or(0, |(x, _)| x)
}

impl EvalReport {
    pub fn accuracy(&self) -> f64 {
        mean(self.folds.iter().map(|f| f.accuracy))
    }

    /// Mean of the per-fold AUCs that are defined.
    pub fn auc(&self) -> Option<f64> {
        let m = mean(self.folds.iter().filter_map(|f| f.auc));
        (!m.is_nan()).then_some(m)
    }

    pub fn rules(&self) -> f64 {
        mean(self.folds.iter().map(|f| f.rules as f64))
    }

    pub fn levels(&self) -> usize {
        mode(self.folds.iter().map(|f| f.levels))
    }

    pub fn clusters(&self) -> usize {
        mode(self.folds.iter().map(|f| f.clusters))
    }

    pub fn predictions(&self) -> Vec<usize> {
        self.masses.iter().map(|m| argmax(m)).collect()
    }

    /// ROC of pooled out-of-fold masses for one class against the rest.
    pub fn roc(&self, class: usize) -> Option<RocCurve> {
        let scores: Vec<f64> = self.masses.iter().map(|m| m[class]).collect();
        let positive: Vec<bool> = self.truth.iter().map(|&t| t == class).collect();
        RocCurve::from_scores(&scores, &positive)
    }

    pub fn to_text(&self) -> String {
        let fmt_auc = |a: Option<f64>| a.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        let mut out = self.config.header("#");
        let _ = writeln!(out, "dataset: {}", self.dataset);
        let _ = writeln!(out, "seed: {}", self.config.seed);
        let _ = writeln!(out, "folds: {}", self.folds.len());
        let _ = writeln!(out, "accuracy: {:.4}", self.accuracy());
        let _ = writeln!(out, "auc: {}", fmt_auc(self.auc()));
        let _ = writeln!(out, "rules: {:.1}", self.rules());
        let _ = writeln!(out, "levels: {}", self.levels());
        let _ = writeln!(out, "clusters: {}", self.clusters());
        let _ = writeln!(out, "time_ms: {:.0}", self.time_ms);
        out.push_str("fold,accuracy,auc,rules,levels,clusters\n");
        for f in &self.folds {
            let _ = writeln!(
                out,
                "{},{:.4},{},{},{},{}",
                f.fold,
                f.accuracy,
                fmt_auc(f.auc),
                f.rules,
                f.levels,
                f.clusters
            );
        }
        out
    }

    pub const CSV_HEADER: &'static str = "k,K,A,AUC,beta,iota,T";

    /// One sweep-table row keyed by the preset k.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.4},{},{:.1},{},{:.0}",
            self.config.k,
            self.clusters(),
            self.accuracy(),
            self.auc().map_or("".to_string(), |a| format!("{a:.4}")),
            self.rules(),
            self.levels(),
            self.time_ms
        )
    }
}

fn run_fold(d: &Dataset, plan: &FoldPlan, fold: usize, cfg: &RunConfig) -> Result<(FoldReport, Vec<(usize, Vec<f64>)>)> {
    let train = plan.train(fold);
    let test = plan.test(fold);
    let model = Model::fit(d, &train, cfg)?;
    let mut out = Vec::with_capacity(test.len());
    for &i in test {
        out.push((i, model.predict_masses(&d.row(i))?));
    }
    let masses: Vec<Vec<f64>> = out.iter().map(|(_, m)| m.clone()).collect();
    let truth: Vec<usize> = test.iter().map(|&i| d.goal()[i]).collect();
    let preds: Vec<usize> = masses.iter().map(|m| argmax(m)).collect();
    let report = FoldReport {
        fold,
        accuracy: accuracy(&preds, &truth)?,
        auc: class_auc(&masses, &truth, d.n_classes()),
        rules: model.rule_count(),
        levels: model.levels(),
        clusters: model.cluster_count(),
    };
    log::info!(
        "fold {fold}: accuracy {:.4}, rules {}, levels {}",
        report.accuracy,
        report.rules,
        report.levels
    );
    Ok((report, out))
}

/// Stratified k-fold cross-validation. Missing values are imputed up
/// front; each fold then fits partitions, correlations, clusters and the
/// hierarchy on its own training rows.
pub fn crossval(d: &Dataset, cfg: &RunConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let start = Instant::now();
    let d = d.impute_missing()?;
    let plan = FoldPlan::stratified(&d, cfg.folds, cfg.seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let results = pool.install(|| {
        (0..plan.len())
            .into_par_iter()
            .map(|f| run_fold(&d, &plan, f, cfg))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut masses = vec![Vec::new(); d.len()];
    let mut folds = Vec::with_capacity(results.len());
    for (report, outs) in results {
        for (i, m) in outs {
            masses[i] = m;
        }
        folds.push(report);
    }
    Ok(EvalReport {
        config: cfg.clone(),
        dataset: d.name.clone(),
        folds,
        masses,
        truth: d.goal().to_vec(),
        time_ms: start.elapsed().as_secs_f64() * 1000.0,
    })
}

/// Cross-validates once per preset k, in ascending order.
pub fn ksweep(d: &Dataset, cfg: &RunConfig, ks: std::ops::RangeInclusive<usize>) -> Result<Vec<EvalReport>> {
    if ks.is_empty() {
        return Err(Error::invalid("empty k range"));
    }
    ks.map(|k| crossval(d, &RunConfig { k, ..cfg.clone() })).collect()
}

pub fn ksweep_csv(reports: &[EvalReport]) -> String {
    let mut out = reports.first().map(|r| r.config.header("#")).unwrap_or_default();
    out.push_str(EvalReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
