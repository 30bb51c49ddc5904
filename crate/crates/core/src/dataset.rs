//! Tabular classification data: CSV loading, missing-value repair and
//! stratified fold plans.
//!
//! Values are stored column-major as `f64`. Continuous attributes hold the
//! parsed number, discrete attributes hold the code of the value in
//! [`AttributeMeta::values`]. Missing cells are `NaN` until
//! [`Dataset::impute_missing`] runs.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributeMeta {
    pub index: usize,
    pub name: String,
    pub kind: AttributeKind,
    /// Observed range; only meaningful for continuous attributes.
    pub lo: f64,
    pub hi: f64,
    /// Value names for discrete attributes, in first-appearance order.
    pub values: Vec<String>,
}

impl PartialEq for AttributeMeta {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index
            && self.name == other.name
            && self.kind == other.kind
            && self.lo.to_bits() == other.lo.to_bits()
            && self.hi.to_bits() == other.hi.to_bits()
            && self.values == other.values
    }
}

/// Loader overrides. Attribute indices are positions after the goal column
/// has been removed.
#[derive(Debug, Clone, Default)]
pub struct Schema {
    /// CSV column holding the goal; defaults to the last one.
    pub goal_column: Option<usize>,
    pub kinds: HashMap<usize, AttributeKind>,
    /// Force header presence instead of auto-detecting it.
    pub header: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub attributes: Vec<AttributeMeta>,
    columns: Vec<Vec<f64>>,
    goal: Vec<usize>,
    pub goal_name: String,
    pub classes: Vec<String>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        let same_bits = |a: &Vec<f64>, b: &Vec<f64>| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        };
        self.name == other.name
            && self.attributes == other.attributes
            && self.columns.len() == other.columns.len()
            && self.columns.iter().zip(&other.columns).all(|(a, b)| same_bits(a, b))
            && self.goal == other.goal
            && self.goal_name == other.goal_name
            && self.classes == other.classes
    }
}

pub(crate) fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "?"
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

impl Dataset {
    /// Builds a dataset from already-coded columns. Used by tests and the
    /// Python bindings; `columns[a][i]` is attribute `a` of sample `i`.
    pub fn from_columns(
        name: impl Into<String>,
        attributes: Vec<AttributeMeta>,
        columns: Vec<Vec<f64>>,
        goal: Vec<usize>,
        classes: Vec<String>,
    ) -> Result<Self> {
        if attributes.is_empty() || attributes.len() != columns.len() {
            return Err(Error::Dimension(format!(
                "{} attribute descriptors for {} columns",
                attributes.len(),
                columns.len()
            )));
        }
        if goal.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(col) = columns.iter().find(|c| c.len() != goal.len()) {
            return Err(Error::Dimension(format!(
                "column of length {} for {} goal values",
                col.len(),
                goal.len()
            )));
        }
        if classes.len() < 2 {
            return Err(Error::SingleClass);
        }
        if let Some(&c) = goal.iter().find(|&&c| c >= classes.len()) {
            return Err(Error::invalid(format!("class code {c} out of range")));
        }
        Ok(Dataset {
            name: name.into(),
            attributes,
            columns,
            goal,
            goal_name: "class".to_string(),
            classes,
        })
    }

    pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse_csv(&name, &text, schema)
    }

    pub fn parse_csv(name: &str, text: &str, schema: &Schema) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows: Vec<Vec<String>> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse {
                row: i + 1,
                msg: e.to_string(),
            })?;
            if record.iter().all(|c| c.is_empty()) {
                continue;
            }
            let row: Vec<String> = record.iter().map(str::to_string).collect();
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::Parse {
                        row: i + 1,
                        msg: format!("expected {} cells, found {}", first.len(), row.len()),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Empty);
        }
        let width = rows[0].len();
        if width < 2 {
            return Err(Error::Parse {
                row: 1,
                msg: "need at least one attribute and a goal column".into(),
            });
        }
        let goal_col = schema.goal_column.unwrap_or(width - 1);
        if goal_col >= width {
            return Err(Error::invalid(format!(
                "goal column {goal_col} out of range for {width} columns"
            )));
        }

        let has_header = schema.header.unwrap_or_else(|| detect_header(&rows));
        let (header, body) = if has_header {
            (Some(&rows[0]), &rows[1..])
        } else {
            (None, &rows[..])
        };
        if body.is_empty() {
            return Err(Error::Empty);
        }
        let line_of = |i: usize| i + 1 + usize::from(has_header);

        let mut classes: Vec<String> = Vec::new();
        let mut goal = Vec::with_capacity(body.len());
        for (i, row) in body.iter().enumerate() {
            let cell = &row[goal_col];
            if is_missing(cell) {
                return Err(Error::Parse {
                    row: line_of(i),
                    msg: "missing goal value".into(),
                });
            }
            let code = match classes.iter().position(|c| c == cell) {
                Some(code) => code,
                None => {
                    classes.push(cell.clone());
                    classes.len() - 1
                }
            };
            goal.push(code);
        }
        if classes.len() < 2 {
            return Err(Error::SingleClass);
        }

        let mut attributes = Vec::new();
        let mut columns = Vec::new();
        for (index, col) in (0..width).filter(|&c| c != goal_col).enumerate() {
            let cells: Vec<&str> = body.iter().map(|r| r[col].as_str()).collect();
            let kind = match schema.kinds.get(&index) {
                Some(&k) => k,
                None => infer_kind(&cells),
            };
            let name = header
                .map(|h| h[col].clone())
                .unwrap_or_else(|| format!("x{index}"));
            let (meta, values) = match kind {
                AttributeKind::Continuous => {
                    let mut values = Vec::with_capacity(cells.len());
                    for (i, cell) in cells.iter().enumerate() {
                        if is_missing(cell) {
                            values.push(f64::NAN);
                        } else {
                            let v = parse_number(cell).ok_or_else(|| Error::Parse {
                                row: line_of(i),
                                msg: format!("non-numeric value {cell:?} in continuous attribute {name}"),
                            })?;
                            values.push(v);
                        }
                    }
                    let (lo, hi) = observed_range(values.iter().copied());
                    let meta = AttributeMeta {
                        index,
                        name,
                        kind,
                        lo,
                        hi,
                        values: Vec::new(),
                    };
                    (meta, values)
                }
                AttributeKind::Discrete => {
                    let mut names: Vec<String> = Vec::new();
                    let mut values = Vec::with_capacity(cells.len());
                    for cell in &cells {
                        if is_missing(cell) {
                            values.push(f64::NAN);
                            continue;
                        }
                        let code = match names.iter().position(|v| v == cell) {
                            Some(code) => code,
                            None => {
                                names.push(cell.to_string());
                                names.len() - 1
                            }
                        };
                        values.push(code as f64);
                    }
                    let meta = AttributeMeta {
                        index,
                        name,
                        kind,
                        lo: 0.0,
                        hi: names.len().saturating_sub(1) as f64,
                        values: names,
                    };
                    (meta, values)
                }
            };
            attributes.push(meta);
            columns.push(values);
        }

        Ok(Dataset {
            name: name.to_string(),
            attributes,
            columns,
            goal,
            goal_name: header
                .map(|h| h[goal_col].clone())
                .unwrap_or_else(|| "class".to_string()),
            classes,
        })
    }

    /// Writes the dataset back as CSV with a header row and the goal last.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header: Vec<&str> = self.attributes.iter().map(|a| a.name.as_str()).collect();
        header.push(&self.goal_name);
        writer.write_record(&header).expect("in-memory write");
        for i in 0..self.len() {
            let mut record: Vec<String> = self
                .attributes
                .iter()
                .zip(&self.columns)
                .map(|(meta, col)| {
                    let v = col[i];
                    if v.is_nan() {
                        "?".to_string()
                    } else {
                        match meta.kind {
                            AttributeKind::Continuous => format!("{v}"),
                            AttributeKind::Discrete => meta.values[v as usize].clone(),
                        }
                    }
                })
                .collect();
            record.push(self.classes[self.goal[i]].clone());
            writer.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn len(&self) -> usize {
        self.goal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goal.is_empty()
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn column(&self, attribute: usize) -> &[f64] {
        &self.columns[attribute]
    }

    pub fn goal(&self) -> &[usize] {
        &self.goal
    }

    pub fn value(&self, sample: usize, attribute: usize) -> f64 {
        self.columns[attribute][sample]
    }

    pub fn row(&self, sample: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[sample]).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &c in &self.goal {
            counts[c] += 1;
        }
        counts
    }

    pub fn missing_count(&self) -> usize {
        self.columns.iter().flatten().filter(|v| v.is_nan()).count()
    }

    /// Attribute metadata with the continuous range re-observed over `rows`.
    /// Discrete value sets are kept whole.
    pub fn meta_over(&self, attribute: usize, rows: &[usize]) -> AttributeMeta {
        let mut meta = self.attributes[attribute].clone();
        if meta.kind == AttributeKind::Continuous {
            let col = &self.columns[attribute];
            let (lo, hi) = observed_range(rows.iter().map(|&i| col[i]));
            meta.lo = lo;
            meta.hi = hi;
        }
        meta
    }

    /// Fills continuous gaps with the attribute mean and discrete gaps with
    /// the mode (lowest code wins ties).
    pub fn impute_missing(&self) -> Result<Dataset> {
        let mut out = self.clone();
        for (a, col) in out.columns.iter_mut().enumerate() {
            if !col.iter().any(|v| v.is_nan()) {
                continue;
            }
            let present: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
            if present.is_empty() {
                return Err(Error::AllMissing(a));
            }
            let fill = match self.attributes[a].kind {
                AttributeKind::Continuous => present.iter().sum::<f64>() / present.len() as f64,
                AttributeKind::Discrete => {
                    let mut counts = vec![0usize; self.attributes[a].values.len()];
                    for &v in &present {
                        counts[v as usize] += 1;
                    }
                    let mut best = 0;
                    for (code, &n) in counts.iter().enumerate() {
                        if n > counts[best] {
                            best = code;
                        }
                    }
                    best as f64
                }
            };
            for v in col.iter_mut().filter(|v| v.is_nan()) {
                *v = fill;
            }
        }
        Ok(out)
    }

    /// New dataset holding only `rows`, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let mut out = self.clone();
        out.columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&i| c[i]).collect())
            .collect();
        out.goal = rows.iter().map(|&i| self.goal[i]).collect();
        for a in 0..out.attributes.len() {
            let all: Vec<usize> = (0..rows.len()).collect();
            out.attributes[a] = out.meta_over(a, &all);
        }
        out
    }
}

fn observed_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| !v.is_nan()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

/// Numeric columns with at most two distinct values are treated as discrete
/// (binary) attributes; other numeric columns are continuous.
fn infer_kind(cells: &[&str]) -> AttributeKind {
    let mut distinct: Vec<f64> = Vec::new();
    for cell in cells.iter().filter(|c| !is_missing(c)) {
        match parse_number(cell) {
            Some(v) => {
                if distinct.len() <= 2 && !distinct.contains(&v) {
                    distinct.push(v);
                }
            }
            None => return AttributeKind::Discrete,
        }
    }
    if distinct.len() <= 2 {
        AttributeKind::Discrete
    } else {
        AttributeKind::Continuous
    }
}

/// A header is present iff some column is numeric below the first row while
/// its first cell is not. Without any numeric column, the first row is a
/// header iff none of its cells reappears further down its column.
fn detect_header(rows: &[Vec<String>]) -> bool {
    if rows.len() < 2 {
        return false;
    }
    let width = rows[0].len();
    let mut any_numeric = false;
    for c in 0..width {
        let below: Vec<&str> = rows[1..]
            .iter()
            .map(|r| r[c].as_str())
            .filter(|s| !is_missing(s))
            .collect();
        if below.is_empty() || !below.iter().all(|s| parse_number(s).is_some()) {
            continue;
        }
        any_numeric = true;
        let first = rows[0][c].as_str();
        if !is_missing(first) && parse_number(first).is_none() {
            return true;
        }
    }
    if any_numeric {
        return false;
    }
    (0..width).all(|c| {
        let first = &rows[0][c];
        !is_missing(first) && rows[1..].iter().all(|r| &r[c] != first)
    })
}

/// Test-set assignment for κ-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    /// Stratified plan: each class is shuffled with the seeded RNG and dealt
    /// round-robin, continuing where the previous class stopped, so per-class
    /// and total fold sizes differ by at most one.
    pub fn stratified(d: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
        if k < 2 {
            return Err(Error::invalid(format!("fold count must be at least 2, got {k}")));
        }
        if k > d.len() {
            return Err(Error::invalid(format!(
                "fold count {k} exceeds sample count {}",
                d.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); d.n_classes()];
        for (i, &c) in d.goal().iter().enumerate() {
            by_class[c].push(i);
        }
        let mut folds = vec![Vec::new(); k];
        let mut next = 0;
        for (class, members) in by_class.iter_mut().enumerate() {
            if !members.is_empty() && members.len() < k {
                log::warn!(
                    "class {} has {} members, fewer than {k} folds",
                    d.classes[class],
                    members.len()
                );
            }
            members.shuffle(&mut rng);
            for &i in members.iter() {
                folds[next].push(i);
                next = (next + 1) % k;
            }
        }
        for fold in &mut folds {
            fold.sort_unstable();
        }
        Ok(FoldPlan { seed, folds })
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    pub fn test(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    pub fn train(&self, fold: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, t)| t.iter().copied())
            .collect();
        rows.sort_unstable();
        rows
    }

    /// Plain-text listing: a `seed` line then one `fold <i>:` line per fold.
    pub fn to_text(&self) -> String {
        let mut out = format!("seed {}\n", self.seed);
        for (f, test) in self.folds.iter().enumerate() {
            let _ = write!(out, "fold {f}:");
            for i in test {
                let _ = write!(out, " {i}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<FoldPlan> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let bad = |row: usize, msg: &str| Error::Parse {
            row: row + 1,
            msg: msg.to_string(),
        };
        let (row, first) = lines.next().ok_or(Error::Empty)?;
        let seed = first
            .strip_prefix("seed ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad(row, "expected `seed <n>`"))?;
        let mut folds = Vec::new();
        for (row, line) in lines {
            let (head, rest) = line.split_once(':').ok_or_else(|| bad(row, "expected `fold <i>:`"))?;
            if head.trim() != format!("fold {}", folds.len()) {
                return Err(bad(row, "fold lines out of order"));
            }
            let test = rest
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad(row, "non-integer sample index"))?;
            folds.push(test);
        }
        Ok(FoldPlan { seed, folds })
    }
}
