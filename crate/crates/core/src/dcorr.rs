//! Sample distance correlation between attribute columns and between each
//! attribute and the goal.

use ndarray::{Array1, Array2, Axis, Zip};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// How the goal column enters the distance computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoalEncoding {
    /// Class code used as a number.
    #[default]
    ClassCode,
    /// One-hot rows; distinct classes are sqrt(2) apart.
    OneHot,
}

/// Doubly centred distance matrix: every row and column sums to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredDistances(Array2<f64>);

impl CenteredDistances {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }
}

pub fn pairwise_distances(col: &[f64]) -> Array2<f64> {
    let n = col.len();
    Array2::from_shape_fn((n, n), |(i, j)| (col[i] - col[j]).abs())
}

fn goal_distances(goal: &[usize], encoding: GoalEncoding) -> Array2<f64> {
    match encoding {
        GoalEncoding::ClassCode => {
            let col: Vec<f64> = goal.iter().map(|&c| c as f64).collect();
            pairwise_distances(&col)
        }
        GoalEncoding::OneHot => {
            let n = goal.len();
            Array2::from_shape_fn((n, n), |(i, j)| {
                if goal[i] == goal[j] {
                    0.0
                } else {
                    std::f64::consts::SQRT_2
                }
            })
        }
    }
}

pub fn double_center(a: &Array2<f64>) -> CenteredDistances {
    let n = a.nrows();
    if n == 0 {
        return CenteredDistances(a.clone());
    }
    let row_means: Array1<f64> = a.mean_axis(Axis(1)).expect("non-empty");
    let col_means: Array1<f64> = a.mean_axis(Axis(0)).expect("non-empty");
    let grand = row_means.sum() / n as f64;
    let mut out = a.clone();
    for ((i, j), v) in out.indexed_iter_mut() {
        *v = *v - row_means[i] - col_means[j] + grand;
    }
    CenteredDistances(out)
}

/// Squared sample distance covariance, floored at zero.
pub fn dcov2(a: &CenteredDistances, b: &CenteredDistances) -> Result<f64> {
    if a.0.dim() != b.0.dim() {
        return Err(Error::Dimension(format!(
            "centred matrices {:?} and {:?}",
            a.0.dim(),
            b.0.dim()
        )));
    }
    let n = a.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    Zip::from(&a.0).and(&b.0).for_each(|&x, &y| sum += x * y);
    Ok((sum / (n * n) as f64).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DCorr {
    pub value: f64,
    /// Set when either column has zero distance variance (constant column);
    /// the value is then 0.
    pub degenerate: bool,
}

fn dcorr_centered(a: &CenteredDistances, b: &CenteredDistances) -> Result<DCorr> {
    let xy = dcov2(a, b)?;
    let xx = dcov2(a, a)?;
    let yy = dcov2(b, b)?;
    if xx == 0.0 || yy == 0.0 {
        return Ok(DCorr {
            value: 0.0,
            degenerate: true,
        });
    }
    // dCov / sqrt(dVar_x dVar_y) with dCov = sqrt(xy), dVar = sqrt(xx)
    let value = (xy.sqrt() / (xx.sqrt() * yy.sqrt()).sqrt()).clamp(0.0, 1.0);
    Ok(DCorr {
        value,
        degenerate: false,
    })
}

pub fn dcorr(x: &[f64], y: &[f64]) -> Result<DCorr> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "columns of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::invalid("distance correlation needs at least 2 samples"));
    }
    let a = double_center(&pairwise_distances(x));
    let b = double_center(&pairwise_distances(y));
    dcorr_centered(&a, &b)
}

/// Attribute-by-attribute distance correlations plus the attribute-to-goal
/// vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DCorrMatrix {
    pub matrix: Vec<Vec<f64>>,
    pub goal: Vec<f64>,
    /// Attributes that are constant over the rows used.
    pub degenerate: Vec<bool>,
}

impl DCorrMatrix {
    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    /// Copy of the attribute matrix with the diagonal zeroed, as consumed by
    /// the clustering step.
    pub fn clustering_input(&self) -> Vec<Vec<f64>> {
        let mut m = self.matrix.clone();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        m
    }

    /// CSV with one row per attribute followed by a `goal` row.
    pub fn to_csv(&self, names: &[String]) -> String {
        let mut out = String::from("attribute");
        for n in names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (name, row) in names.iter().zip(&self.matrix) {
            out.push_str(name);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out.push_str("goal");
        for v in &self.goal {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
        out
    }

    /// Computes the matrix over the given sample rows of an imputed dataset.
    pub fn compute(d: &Dataset, rows: &[usize], encoding: GoalEncoding) -> Result<DCorrMatrix> {
        if rows.len() < 2 {
            return Err(Error::invalid("distance correlation needs at least 2 samples"));
        }
        let centered: Vec<CenteredDistances> = (0..d.n_attributes())
            .into_par_iter()
            .map(|a| {
                let col: Vec<f64> = rows.iter().map(|&i| d.value(i, a)).collect();
                double_center(&pairwise_distances(&col))
            })
            .collect();
        let goal: Vec<usize> = rows.iter().map(|&i| d.goal()[i]).collect();
        let goal_centered = double_center(&goal_distances(&goal, encoding));

        let n = d.n_attributes();
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let values: Vec<DCorr> = pairs
            .par_iter()
            .map(|&(i, j)| dcorr_centered(&centered[i], &centered[j]))
            .collect::<Result<_>>()?;
        let mut matrix = vec![vec![0.0; n]; n];
        let mut degenerate = vec![false; n];
        for (&(i, j), v) in pairs.iter().zip(&values) {
            matrix[i][j] = v.value;
            matrix[j][i] = v.value;
            if i == j && v.degenerate {
                degenerate[i] = true;
                log::debug!("attribute {i} is constant on these rows; dCorr set to 0");
            }
        }
        let goal = centered
            .par_iter()
            .map(|c| dcorr_centered(c, &goal_centered).map(|v| v.value))
            .collect::<Result<Vec<f64>>>()?;
        Ok(DCorrMatrix {
            matrix,
            goal,
            degenerate,
        })
    }
}
