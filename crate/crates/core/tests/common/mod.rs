//! Brute-force reference implementations and random fixtures shared by the
//! integration tests. Everything here is written from the definitions with
//! plain loops and shares no code with the library.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use solah::label_semantics::MassAssignment;
use solah::lah::LahDocument;
use solah::ldt::{Branch, MassColumn};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distance correlation straight from the definitions: distance matrices,
/// double centring by explicit means, then
/// `dCor = dCov / sqrt(dVar_x * dVar_y)` with every quantity a square root
/// of a mean of products.
pub fn dcorr_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let centred = |v: &[f64]| -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (v[i] - v[j]).abs();
            }
        }
        let mut row = vec![0.0; n];
        let mut col = vec![0.0; n];
        let mut all = 0.0;
        for i in 0..n {
            for j in 0..n {
                row[i] += a[i][j] / n as f64;
                col[j] += a[i][j] / n as f64;
                all += a[i][j] / (n * n) as f64;
            }
        }
        let mut c = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                c[i][j] = a[i][j] - row[i] - col[j] + all;
            }
        }
        c
    };
    let a = centred(x);
    let b = centred(y);
    let mean_prod = |p: &Vec<Vec<f64>>, q: &Vec<Vec<f64>>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += p[i][j] * q[i][j];
            }
        }
        (s / (n * n) as f64).max(0.0)
    };
    let dcov = mean_prod(&a, &b).sqrt();
    let dvar_x = mean_prod(&a, &a).sqrt();
    let dvar_y = mean_prod(&b, &b).sqrt();
    if dvar_x == 0.0 || dvar_y == 0.0 {
        return 0.0;
    }
    (dcov / (dvar_x * dvar_y).sqrt()).clamp(0.0, 1.0)
}

/// AUC as the probability that a random positive outscores a random
/// negative, ties counted half.
pub fn mann_whitney_auc(scores: &[f64], positive: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        if !positive[i] {
            continue;
        }
        for j in 0..scores.len() {
            if positive[j] {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

/// Information gain of every input at the root of a table, from the
/// definitions: class probabilities weighted by focal-set masses.
pub fn root_gains(inputs: &[MassColumn], goal: &[usize], n_classes: usize) -> Vec<f64> {
    let n = goal.len() as f64;
    let mut prior = vec![0.0; n_classes];
    for &c in goal {
        prior[c] += 1.0 / n;
    }
    let base = entropy(&prior);
    inputs
        .iter()
        .map(|col| {
            let mut expected = 0.0;
            for f in 0..col.focal_count {
                let mut by_class = vec![0.0; n_classes];
                for (s, &c) in goal.iter().enumerate() {
                    by_class[c] += col.masses[s].mass(f);
                }
                let pf: f64 = by_class.iter().sum();
                if pf > 0.0 {
                    let cond: Vec<f64> = by_class.iter().map(|v| v / pf).collect();
                    expected += pf / n * entropy(&cond);
                }
            }
            base - expected
        })
        .collect()
}

fn mass_of(m: &MassAssignment, focal: usize) -> f64 {
    m.entries
        .iter()
        .filter(|(f, _)| *f == focal)
        .map(|(_, v)| v)
        .sum()
}

/// Jeffrey's rule over a branch table: every branch's class masses weighted
/// by the product of the input masses along it. `inputs[p]` belongs to
/// attribute `ids[p]`.
pub fn jeffrey_oracle(branches: &[Branch], ids: &[usize], inputs: &[MassAssignment], n_classes: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_classes];
    for b in branches {
        let mut w = 1.0;
        for &(id, f) in &b.path {
            let p = ids.iter().position(|&i| i == id).expect("known input");
            w *= mass_of(&inputs[p], f);
        }
        for c in 0..n_classes {
            out[c] += w * b.masses[c];
        }
    }
    out
}

/// Synthesised-rule evaluation: pick one branch from every slot, multiply
/// the attribute masses on all chosen branches with the child conclusion
/// masses each parent branch tests, and add the root branch's conclusion
/// weighted by that product. Summed over every combination.
pub fn composition_oracle(doc: &LahDocument, n_attributes: usize, attributes: &[MassAssignment], n_classes: usize) -> Vec<f64> {
    let slots: Vec<(usize, Vec<Branch>)> = doc.slots.iter().map(|(z, d)| (*z, d.branches.clone())).collect();
    let root = slots.last().expect("slots").0;
    let mut out = vec![0.0; n_classes];
    let mut choice = vec![0usize; slots.len()];
    loop {
        let chosen = |z: usize| -> &Branch {
            let p = slots.iter().position(|(id, _)| *id == z).expect("slot");
            &slots[p].1[choice[p]]
        };
        let mut w = 1.0;
        for (p, (_, branches)) in slots.iter().enumerate() {
            for &(id, f) in &branches[choice[p]].path {
                w *= if id < n_attributes {
                    mass_of(&attributes[id], f)
                } else {
                    chosen(id).masses[f]
                };
            }
        }
        let top = chosen(root);
        for c in 0..n_classes {
            out[c] += w * top.masses[c];
        }
        // odometer over branch choices
        let mut p = 0;
        loop {
            if p == slots.len() {
                return out;
            }
            choice[p] += 1;
            if choice[p] < slots[p].1.len() {
                break;
            }
            choice[p] = 0;
            p += 1;
        }
    }
}

/// A mass assignment shaped like a continuous value: a point on one focal
/// set or a split between two neighbours.
pub fn random_masses(rng: &mut impl Rng, focal_count: usize) -> MassAssignment {
    let j = rng.gen_range(0..focal_count);
    if j + 1 < focal_count && rng.gen_bool(0.6) {
        let w: f64 = rng.gen_range(0.01..0.99);
        MassAssignment {
            entries: vec![(j, 1.0 - w), (j + 1, w)],
        }
    } else {
        MassAssignment::point(j)
    }
}

pub fn random_column(rng: &mut impl Rng, id: usize, focal_count: usize, n: usize) -> MassColumn {
    MassColumn {
        id,
        focal_count,
        masses: (0..n).map(|_| random_masses(rng, focal_count)).collect(),
    }
}

/// Small labelled table where the class depends on the first inputs plus
/// noise, so trees neither stop at the root nor grow uniformly.
pub fn random_table(rng: &mut impl Rng, n_inputs: usize, n: usize, n_classes: usize) -> (Vec<MassColumn>, Vec<usize>) {
    let focal: Vec<usize> = (0..n_inputs).map(|_| rng.gen_range(2..=5)).collect();
    let columns: Vec<MassColumn> = (0..n_inputs).map(|a| random_column(rng, a, focal[a], n)).collect();
    let goal = (0..n)
        .map(|s| {
            if rng.gen_bool(0.2) {
                rng.gen_range(0..n_classes)
            } else {
                let (f, _) = columns[0].masses[s].entries[0];
                (f * n_classes) / focal[0]
            }
        })
        .collect();
    (columns, goal)
}

pub fn total(v: &[f64]) -> f64 {
    v.iter().sum()
}
