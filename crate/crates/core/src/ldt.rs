//! Linguistic decision trees: LID3 induction, inference by Jeffrey's rule
//! and rule extraction.
//!
//! Every split node has one child per focal set of its attribute, so the
//! branches of a tree are mutually exclusive and exhaustive: for any input
//! the branch appropriateness values sum to one.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label_semantics::MassAssignment;

/// One input of an LDT: per-sample masses over `focal_count` focal sets.
#[derive(Debug, Clone, PartialEq)]
pub struct MassColumn {
    /// Attribute id (input attribute index, or intermediate id).
    pub id: usize,
    pub focal_count: usize,
    pub masses: Vec<MassAssignment>,
}

/// Training data for one tree.
#[derive(Debug, Clone)]
pub struct TrainingTable {
    pub inputs: Vec<MassColumn>,
    pub goal: Vec<usize>,
    pub n_classes: usize,
}

impl TrainingTable {
    pub fn new(mut inputs: Vec<MassColumn>, goal: Vec<usize>, n_classes: usize) -> Result<Self> {
        if goal.is_empty() {
            return Err(Error::Empty);
        }
        if inputs.is_empty() {
            return Err(Error::invalid("an LDT needs at least one input attribute"));
        }
        inputs.sort_by_key(|c| c.id);
        for w in inputs.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::invalid(format!("input {} given twice", w[0].id)));
            }
        }
        for c in &inputs {
            if c.masses.len() != goal.len() {
                return Err(Error::Dimension(format!(
                    "input {} has {} rows, goal has {}",
                    c.id,
                    c.masses.len(),
                    goal.len()
                )));
            }
            if c.focal_count == 0 {
                return Err(Error::invalid(format!("input {} has no focal sets", c.id)));
            }
        }
        if let Some(&c) = goal.iter().find(|&&c| c >= n_classes) {
            return Err(Error::invalid(format!("class code {c} out of range")));
        }
        Ok(TrainingTable {
            inputs,
            goal,
            n_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.goal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goal.is_empty()
    }
}

/// What a branch without training support predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmptyBranch {
    #[default]
    Parent,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lid3Params {
    /// Purity threshold: a branch stops once some class reaches it.
    pub threshold: f64,
    pub empty_branch: EmptyBranch,
}

impl Default for Lid3Params {
    fn default() -> Self {
        Lid3Params {
            threshold: 1.0,
            empty_branch: EmptyBranch::Parent,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(Vec<f64>),
    /// `input` is a position in [`Ldt::inputs`]; one child per focal set.
    Split { input: usize, children: Vec<usize> },
}

/// A root-to-leaf path: `(attribute id, focal set index)` pairs and the
/// class masses conditional on the path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub path: Vec<(usize, usize)>,
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ldt {
    inputs: Vec<usize>,
    focal_counts: Vec<usize>,
    n_classes: usize,
    threshold: f64,
    nodes: Vec<Node>,
}

/// Serialisable branch table of an [`Ldt`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdtDocument {
    pub inputs: Vec<usize>,
    pub focal_counts: Vec<usize>,
    pub n_classes: usize,
    pub threshold: f64,
    pub branches: Vec<Branch>,
}

pub fn entropy(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum()
}

/// Branch appropriateness: product of the input's masses on the branch's
/// focal sets. `masses_of(id)` supplies the mass assignment of an attribute.
pub fn branch_appropriateness<'a>(
    branch: &[(usize, usize)],
    mut masses_of: impl FnMut(usize) -> Option<&'a MassAssignment>,
) -> Result<f64> {
    let mut mu = 1.0;
    for &(id, focal) in branch {
        let m = masses_of(id)
            .ok_or_else(|| Error::invalid(format!("no mass assignment for attribute {id}")))?;
        mu *= m.mass(focal);
    }
    Ok(mu)
}

struct Trainer<'t> {
    table: &'t TrainingTable,
    params: Lid3Params,
    nodes: Vec<Node>,
}

impl Trainer<'_> {
    fn class_weights(&self, support: &[(usize, f64)]) -> Vec<f64> {
        let mut acc = vec![0.0; self.table.n_classes];
        for &(s, w) in support {
            acc[self.table.goal[s]] += w;
        }
        acc
    }

    /// Information gain of splitting `support` on input position `pos`.
    fn gain(&self, support: &[(usize, f64)], total: f64, base: f64, pos: usize) -> f64 {
        let col = &self.table.inputs[pos];
        let mut acc = vec![vec![0.0; self.table.n_classes]; col.focal_count];
        for &(s, w) in support {
            let c = self.table.goal[s];
            for &(f, m) in &col.masses[s].entries {
                acc[f][c] += w * m;
            }
        }
        let expected: f64 = acc
            .iter()
            .map(|a| {
                let p_focal = a.iter().sum::<f64>() / total;
                if p_focal > 0.0 {
                    p_focal * entropy(a)
                } else {
                    0.0
                }
            })
            .sum();
        base - expected
    }

    fn grow(&mut self, support: Vec<(usize, f64)>, remaining: &[usize], parent: &[f64]) -> usize {
        let weights = self.class_weights(&support);
        let total: f64 = weights.iter().sum();
        let dist: Vec<f64> = if total > 0.0 {
            weights.iter().map(|w| w / total).collect()
        } else {
            match self.params.empty_branch {
                EmptyBranch::Parent => parent.to_vec(),
                EmptyBranch::Uniform => {
                    vec![1.0 / self.table.n_classes as f64; self.table.n_classes]
                }
            }
        };
        let purest = dist.iter().copied().fold(0.0, f64::max);
        if total <= 0.0 || remaining.is_empty() || purest >= self.params.threshold - 1e-12 {
            self.nodes.push(Node::Leaf(dist));
            return self.nodes.len() - 1;
        }

        let base = entropy(&weights);
        let mut best = remaining[0];
        let mut best_gain = f64::NEG_INFINITY;
        for &pos in remaining {
            let g = self.gain(&support, total, base, pos);
            debug_assert!(g >= -1e-9, "negative information gain {g}");
            if g > best_gain {
                best_gain = g;
                best = pos;
            }
        }

        let col = &self.table.inputs[best];
        let mut child_support: Vec<Vec<(usize, f64)>> = vec![Vec::new(); col.focal_count];
        for &(s, w) in &support {
            for &(f, m) in &col.masses[s].entries {
                let wm = w * m;
                if wm > 0.0 {
                    child_support[f].push((s, wm));
                }
            }
        }
        drop(support);
        let rest: Vec<usize> = remaining.iter().copied().filter(|&p| p != best).collect();

        let me = self.nodes.len();
        self.nodes.push(Node::Split {
            input: best,
            children: Vec::new(),
        });
        let mut children = Vec::with_capacity(child_support.len());
        for sup in child_support {
            children.push(self.grow(sup, &rest, &dist));
        }
        self.nodes[me] = Node::Split {
            input: best,
            children,
        };
        me
    }
}

impl Ldt {
    /// LID3: grows the branch with the highest information gain attribute
    /// until some class reaches the purity threshold or the branch has used
    /// every input. Gain ties go to the lowest attribute id.
    pub fn train(table: &TrainingTable, params: Lid3Params) -> Result<Ldt> {
        if !(params.threshold > 0.0 && params.threshold <= 1.0) {
            return Err(Error::invalid(format!(
                "purity threshold must lie in (0, 1], got {}",
                params.threshold
            )));
        }
        if table.is_empty() {
            return Err(Error::Empty);
        }
        let mut trainer = Trainer {
            table,
            params,
            nodes: Vec::new(),
        };
        let support: Vec<(usize, f64)> = (0..table.len()).map(|s| (s, 1.0)).collect();
        let all: Vec<usize> = (0..table.inputs.len()).collect();
        let uniform = vec![1.0 / table.n_classes as f64; table.n_classes];
        trainer.grow(support, &all, &uniform);
        Ok(Ldt {
            inputs: table.inputs.iter().map(|c| c.id).collect(),
            focal_counts: table.inputs.iter().map(|c| c.focal_count).collect(),
            n_classes: table.n_classes,
            threshold: params.threshold,
            nodes: trainer.nodes,
        })
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn focal_counts(&self) -> &[usize] {
        &self.focal_counts
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Number of branches (rules).
    pub fn branch_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    /// Longest branch length.
    pub fn depth(&self) -> usize {
        self.branches().iter().map(|b| b.path.len()).max().unwrap_or(0)
    }

    pub fn branches(&self) -> Vec<Branch> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect(0, &mut path, &mut out);
        out
    }

    fn collect(&self, node: usize, path: &mut Vec<(usize, usize)>, out: &mut Vec<Branch>) {
        match &self.nodes[node] {
            Node::Leaf(dist) => out.push(Branch {
                path: path.clone(),
                masses: dist.clone(),
            }),
            Node::Split { input, children } => {
                for (f, &child) in children.iter().enumerate() {
                    path.push((self.inputs[*input], f));
                    self.collect(child, path, out);
                    path.pop();
                }
            }
        }
    }

    /// Jeffrey's rule: class masses = sum over branches of branch
    /// appropriateness times the branch's conditional class masses.
    /// `inputs[i]` is the mass assignment of `self.inputs()[i]`.
    pub fn infer(&self, inputs: &[MassAssignment]) -> Result<Vec<f64>> {
        if inputs.len() != self.inputs.len() {
            return Err(Error::Dimension(format!(
                "LDT expects {} inputs, got {}",
                self.inputs.len(),
                inputs.len()
            )));
        }
        let mut out = vec![0.0; self.n_classes];
        self.accumulate(0, 1.0, inputs, &mut out);
        Ok(out)
    }

    fn accumulate(&self, node: usize, weight: f64, inputs: &[MassAssignment], out: &mut [f64]) {
        match &self.nodes[node] {
            Node::Leaf(dist) => {
                for (o, p) in out.iter_mut().zip(dist) {
                    *o += weight * p;
                }
            }
            Node::Split { input, children } => {
                for &(f, m) in &inputs[*input].entries {
                    if m != 0.0 {
                        self.accumulate(children[f], weight * m, inputs, out);
                    }
                }
            }
        }
    }

    pub fn to_document(&self) -> LdtDocument {
        LdtDocument {
            inputs: self.inputs.clone(),
            focal_counts: self.focal_counts.clone(),
            n_classes: self.n_classes,
            threshold: self.threshold,
            branches: self.branches(),
        }
    }

    /// Rebuilds the tree from its branch table. The branches must form a
    /// complete tree: every split lists all focal sets of its attribute.
    pub fn from_document(doc: &LdtDocument) -> Result<Ldt> {
        if doc.inputs.len() != doc.focal_counts.len() {
            return Err(Error::Dimension("inputs and focal counts differ in length".into()));
        }
        if doc.branches.is_empty() {
            return Err(Error::invalid("LDT document has no branches"));
        }
        // Pending marks a node not yet resolved to a leaf or split.
        enum Slot {
            Pending,
            Leaf(Vec<f64>),
            Split(usize, Vec<usize>),
        }
        let mut slots = vec![Slot::Pending];
        for b in &doc.branches {
            if b.masses.len() != doc.n_classes {
                return Err(Error::Dimension(format!(
                    "branch with {} class masses, expected {}",
                    b.masses.len(),
                    doc.n_classes
                )));
            }
            let mut node = 0;
            for &(id, focal) in &b.path {
                let pos = doc
                    .inputs
                    .iter()
                    .position(|&i| i == id)
                    .ok_or_else(|| Error::invalid(format!("branch uses unknown input {id}")))?;
                if focal >= doc.focal_counts[pos] {
                    return Err(Error::invalid(format!("focal set {focal} out of range for input {id}")));
                }
                if matches!(slots[node], Slot::Pending) {
                    let base = slots.len();
                    let children: Vec<usize> = (base..base + doc.focal_counts[pos]).collect();
                    slots.extend((0..doc.focal_counts[pos]).map(|_| Slot::Pending));
                    slots[node] = Slot::Split(pos, children);
                }
                node = match &slots[node] {
                    Slot::Split(p, children) if *p == pos => children[focal],
                    _ => return Err(Error::invalid("branches disagree on tree structure")),
                };
            }
            match slots[node] {
                Slot::Pending => slots[node] = Slot::Leaf(b.masses.clone()),
                _ => return Err(Error::invalid("duplicate or overlapping branch")),
            }
        }
        let nodes = slots
            .into_iter()
            .map(|s| match s {
                Slot::Pending => Err(Error::invalid("branch table is not exhaustive")),
                Slot::Leaf(d) => Ok(Node::Leaf(d)),
                Slot::Split(input, children) => Ok(Node::Split { input, children }),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut ordered = Vec::with_capacity(nodes.len());
        relayout(&nodes, 0, &mut ordered);
        Ok(Ldt {
            inputs: doc.inputs.clone(),
            focal_counts: doc.focal_counts.clone(),
            n_classes: doc.n_classes,
            threshold: doc.threshold,
            nodes: ordered,
        })
    }

    /// One line per branch: `antecedent → class:mass ...`. The root-only tree
    /// renders its antecedent as `⊤`.
    pub fn rules(&self, naming: &dyn Naming) -> Vec<String> {
        self.branches()
            .iter()
            .map(|b| render_rule(b, naming))
            .collect()
    }
}

/// Names attributes, their focal sets and the goal classes for rule text.
pub trait Naming {
    fn attribute(&self, id: usize) -> String;
    fn focal(&self, id: usize, focal: usize) -> String;
    fn class(&self, class: usize) -> String;
}

/// Fallback naming: `x<id>`, `F<j>` and `c<k>`.
pub struct PlainNaming;

impl Naming for PlainNaming {
    fn attribute(&self, id: usize) -> String {
        format!("x{id}")
    }

    fn focal(&self, _id: usize, focal: usize) -> String {
        format!("F{focal}")
    }

    fn class(&self, class: usize) -> String {
        format!("c{class}")
    }
}

/// Copies the subtree at `node` in preorder, the layout training produces.
fn relayout(nodes: &[Node], node: usize, out: &mut Vec<Node>) -> usize {
    let me = out.len();
    match &nodes[node] {
        Node::Leaf(d) => out.push(Node::Leaf(d.clone())),
        Node::Split { input, children } => {
            out.push(Node::Split {
                input: *input,
                children: Vec::new(),
            });
            let moved = children.iter().map(|&c| relayout(nodes, c, out)).collect();
            out[me] = Node::Split {
                input: *input,
                children: moved,
            };
        }
    }
    me
}

pub fn render_antecedent(path: &[(usize, usize)], naming: &dyn Naming) -> String {
    if path.is_empty() {
        return "⊤".to_string();
    }
    let terms: Vec<String> = path
        .iter()
        .map(|&(id, f)| format!("{} is {}", naming.attribute(id), naming.focal(id, f)))
        .collect();
    terms.join(" ∧ ")
}

pub fn render_rule(branch: &Branch, naming: &dyn Naming) -> String {
    let mut out = render_antecedent(&branch.path, naming);
    out.push_str(" →");
    for (c, m) in branch.masses.iter().enumerate() {
        let _ = write!(out, " {}:{:.4}", naming.class(c), m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(id: usize, focal_count: usize, masses: Vec<Vec<(usize, f64)>>) -> MassColumn {
        MassColumn {
            id,
            focal_count,
            masses: masses
                .into_iter()
                .map(|entries| MassAssignment { entries })
                .collect(),
        }
    }

    #[test]
    fn single_class_stops_at_root() {
        let table = TrainingTable::new(
            vec![column(0, 2, vec![vec![(0, 1.0)], vec![(1, 1.0)]])],
            vec![0, 0],
            3,
        )
        .unwrap();
        let t = Ldt::train(&table, Lid3Params::default()).unwrap();
        assert_eq!(t.branch_count(), 1);
        assert_eq!(t.branches()[0].masses, vec![1.0, 0.0, 0.0]);
        assert_eq!(t.rules(&PlainNaming), vec!["⊤ → c0:1.0000 c1:0.0000 c2:0.0000"]);
        let out = t.infer(&[MassAssignment::point(1)]).unwrap();
        assert_eq!(out, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn informative_attribute_is_chosen() {
        // x0 is noise, x1 separates the classes
        let x0 = column(0, 2, vec![vec![(0, 1.0)], vec![(0, 1.0)], vec![(1, 1.0)], vec![(1, 1.0)]]);
        let x1 = column(1, 2, vec![vec![(0, 1.0)], vec![(1, 1.0)], vec![(0, 1.0)], vec![(1, 1.0)]]);
        let table = TrainingTable::new(vec![x1, x0], vec![0, 1, 0, 1], 2).unwrap();
        let t = Ldt::train(&table, Lid3Params::default()).unwrap();
        let b = t.branches();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].path, vec![(1, 0)]);
        assert_eq!(b[0].masses, vec![1.0, 0.0]);
        assert_eq!(b[1].masses, vec![0.0, 1.0]);
    }

    #[test]
    fn unsupported_branch_inherits_parent() {
        // focal set 2 of x0 never occurs
        let x0 = column(0, 3, vec![vec![(0, 1.0)], vec![(0, 1.0)], vec![(1, 1.0)], vec![(1, 0.5), (0, 0.5)]]);
        let table = TrainingTable::new(vec![x0.clone()], vec![0, 1, 1, 0], 2).unwrap();
        let t = Ldt::train(&table, Lid3Params::default()).unwrap();
        let b = t.branches();
        assert_eq!(b.len(), 3);
        assert_eq!(b[2].masses, vec![0.5, 0.5]);

        let uniform = Lid3Params {
            empty_branch: EmptyBranch::Uniform,
            ..Lid3Params::default()
        };
        let table = TrainingTable::new(vec![x0], vec![0, 0, 0, 1], 2).unwrap();
        let t = Ldt::train(&table, uniform).unwrap();
        assert_eq!(t.branches()[2].masses, vec![0.5, 0.5]);
    }

    #[test]
    fn threshold_outside_range_is_rejected() {
        let table = TrainingTable::new(vec![column(0, 1, vec![vec![(0, 1.0)]])], vec![0], 2).unwrap();
        for bad in [0.0, 1.5, f64::NAN] {
            let p = Lid3Params {
                threshold: bad,
                ..Lid3Params::default()
            };
            assert!(Ldt::train(&table, p).is_err());
        }
    }

    #[test]
    fn table_validation() {
        assert!(matches!(TrainingTable::new(vec![], vec![], 2), Err(Error::Empty)));
        assert!(TrainingTable::new(vec![], vec![0], 2).is_err());
        let c = column(0, 1, vec![vec![(0, 1.0)]]);
        assert!(TrainingTable::new(vec![c.clone(), c.clone()], vec![0], 2).is_err());
        assert!(TrainingTable::new(vec![c], vec![0, 1], 2).is_err());
    }

    #[test]
    fn branch_appropriateness_products() {
        let a = MassAssignment {
            entries: vec![(0, 0.5), (1, 0.5)],
        };
        let b = MassAssignment {
            entries: vec![(2, 0.5), (3, 0.5)],
        };
        let lookup = |id: usize| match id {
            0 => Some(&a),
            1 => Some(&b),
            _ => None,
        };
        assert_eq!(branch_appropriateness(&[], lookup).unwrap(), 1.0);
        assert_eq!(branch_appropriateness(&[(0, 1), (1, 3)], lookup).unwrap(), 0.25);
        assert!(branch_appropriateness(&[(7, 0)], lookup).is_err());
    }

    #[test]
    fn document_rejects_incomplete_table() {
        let doc = LdtDocument {
            inputs: vec![0],
            focal_counts: vec![2],
            n_classes: 2,
            threshold: 1.0,
            branches: vec![Branch {
                path: vec![(0, 0)],
                masses: vec![1.0, 0.0],
            }],
        };
        assert!(Ldt::from_document(&doc).is_err());
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[1.0, 1.0]), 1.0);
        assert_eq!(entropy(&[3.0, 0.0]), 0.0);
        assert_eq!(entropy(&[0.0, 0.0]), 0.0);
    }
}
