//! Linguistic attribute hierarchies: a DAG of LDT slots over attribute
//! clusters and intermediate attributes.
//!
//! Input attributes are numbered `0..n`; intermediate attributes (slot
//! outputs) take ids `n, n + 1, ...` in construction order. An intermediate
//! attribute lives in the goal's domain: its mass assignment is the class
//! mass vector produced by its LDT.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::{average_dcorr, ClusterSet};
use crate::error::{Error, Result};
use crate::label_semantics::{FuzzyPartition, MassAssignment};
use crate::ldt::{render_antecedent, Ldt, LdtDocument, Lid3Params, MassColumn, Naming, TrainingTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeRef {
    Attribute(usize),
    Intermediate(usize),
}

impl NodeRef {
    pub fn id(self) -> usize {
        match self {
            NodeRef::Attribute(i) | NodeRef::Intermediate(i) => i,
        }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Attribute(i) => write!(f, "x{i}"),
            NodeRef::Intermediate(z) => write!(f, "z{z}"),
        }
    }
}

impl FromStr for NodeRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("bad node reference {s:?}"));
        let (head, num) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        let id: usize = num.parse().map_err(|_| bad())?;
        match head {
            "x" => Ok(NodeRef::Attribute(id)),
            "z" => Ok(NodeRef::Intermediate(id)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    /// Id of the intermediate attribute this slot produces.
    pub z: usize,
    pub inputs: Vec<NodeRef>,
}

impl Slot {
    pub fn attributes(&self) -> impl Iterator<Item = usize> + '_ {
        self.inputs.iter().filter_map(|r| match r {
            NodeRef::Attribute(a) => Some(*a),
            NodeRef::Intermediate(_) => None,
        })
    }

    pub fn children(&self) -> impl Iterator<Item = usize> + '_ {
        self.inputs.iter().filter_map(|r| match r {
            NodeRef::Intermediate(z) => Some(*z),
            NodeRef::Attribute(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    pub n_attributes: usize,
    /// Preset cluster count and same-level threshold used to build it, if
    /// it was self-organised.
    pub preset_k: Option<usize>,
    pub theta: Option<f64>,
    pub slots: Vec<Slot>,
    pub root: usize,
}

impl Hierarchy {
    /// A single LDT over every attribute.
    pub fn flat(n_attributes: usize) -> Hierarchy {
        Hierarchy {
            n_attributes,
            preset_k: None,
            theta: None,
            slots: vec![Slot {
                z: n_attributes,
                inputs: (0..n_attributes).map(NodeRef::Attribute).collect(),
            }],
            root: n_attributes,
        }
    }

    /// Self-organisation: clusters are sorted by mean goal correlation,
    /// lowest first. A cluster whose mean is within `theta` of the current
    /// level's first cluster joins that level; otherwise it opens a new
    /// level and its slot also takes every output of the previous level.
    /// Leftover outputs of a shared top level feed one extra top slot.
    pub fn build_solah(clusters: &ClusterSet, goal_dcorr: &[f64], theta: f64) -> Result<Hierarchy> {
        if clusters.is_empty() {
            return Err(Error::invalid("no clusters"));
        }
        if !(theta >= 0.0) {
            return Err(Error::invalid(format!("same-level threshold must be >= 0, got {theta}")));
        }
        let n = goal_dcorr.len();
        let averages = clusters
            .clusters
            .iter()
            .map(|c| average_dcorr(c, goal_dcorr))
            .collect::<Result<Vec<f64>>>()?;
        let mut order: Vec<usize> = (0..clusters.len()).collect();
        order.sort_by(|&a, &b| averages[a].total_cmp(&averages[b]));

        let mut slots = Vec::new();
        let mut z = n;
        let mut queued: Vec<usize> = Vec::new();
        let mut anchor: Option<f64> = None;
        for &c in &order {
            let r = averages[c];
            let attrs = clusters.clusters[c].iter().map(|&a| NodeRef::Attribute(a));
            match anchor {
                Some(ra) if r - ra >= theta => {
                    anchor = Some(r);
                    let mut inputs: Vec<NodeRef> =
                        queued.iter().map(|&q| NodeRef::Intermediate(q)).collect();
                    inputs.extend(attrs);
                    slots.push(Slot { z, inputs });
                    queued = vec![z];
                }
                _ => {
                    anchor.get_or_insert(r);
                    slots.push(Slot {
                        z,
                        inputs: attrs.collect(),
                    });
                    queued.push(z);
                }
            }
            z += 1;
        }
        let root = if queued.len() > 1 {
            slots.push(Slot {
                z,
                inputs: queued.iter().map(|&q| NodeRef::Intermediate(q)).collect(),
            });
            z
        } else {
            queued[0]
        };
        let h = Hierarchy {
            n_attributes: n,
            preset_k: Some(clusters.preset_k),
            theta: Some(theta),
            slots,
            root,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn slot(&self, z: usize) -> Option<&Slot> {
        self.slots.iter().find(|s| s.z == z)
    }

    /// Checks that every attribute feeds exactly one slot, every non-root
    /// slot output is consumed exactly once, and the graph is acyclic.
    pub fn validate(&self) -> Result<()> {
        let mut attr_uses = vec![0usize; self.n_attributes];
        let mut z_uses: HashMap<usize, usize> = HashMap::new();
        for s in &self.slots {
            if s.z < self.n_attributes {
                return Err(Error::invalid(format!("slot id z{} collides with an attribute", s.z)));
            }
            if s.inputs.is_empty() {
                return Err(Error::invalid(format!("slot z{} has no inputs", s.z)));
            }
            for r in &s.inputs {
                match *r {
                    NodeRef::Attribute(a) => {
                        *attr_uses
                            .get_mut(a)
                            .ok_or_else(|| Error::invalid(format!("unknown attribute x{a}")))? += 1;
                    }
                    NodeRef::Intermediate(z) => {
                        if self.slot(z).is_none() {
                            return Err(Error::invalid(format!("unknown intermediate z{z}")));
                        }
                        *z_uses.entry(z).or_default() += 1;
                    }
                }
            }
        }
        if let Some(a) = attr_uses.iter().position(|&u| u != 1) {
            return Err(Error::invalid(format!(
                "attribute x{a} feeds {} slots, expected exactly 1",
                attr_uses[a]
            )));
        }
        if self.slot(self.root).is_none() {
            return Err(Error::invalid(format!("root z{} is not a slot", self.root)));
        }
        for s in &self.slots {
            let uses = z_uses.get(&s.z).copied().unwrap_or(0);
            let expected = usize::from(s.z != self.root);
            if uses != expected {
                return Err(Error::invalid(format!(
                    "output z{} is consumed {uses} times, expected {expected}",
                    s.z
                )));
            }
        }
        self.postorder().map(|_| ())
    }

    /// Slot ids with every child before its parent, the root last.
    pub fn postorder(&self) -> Result<Vec<usize>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        fn visit(h: &Hierarchy, z: usize, marks: &mut HashMap<usize, Mark>, out: &mut Vec<usize>) -> Result<()> {
            match marks.get(&z).copied().unwrap_or(Mark::New) {
                Mark::Done => return Ok(()),
                Mark::Active => return Err(Error::Cycle(z)),
                Mark::New => {}
            }
            marks.insert(z, Mark::Active);
            let slot = h
                .slot(z)
                .ok_or_else(|| Error::invalid(format!("unknown intermediate z{z}")))?;
            for child in slot.children() {
                visit(h, child, marks, out)?;
            }
            marks.insert(z, Mark::Done);
            out.push(z);
            Ok(())
        }
        let mut marks = HashMap::new();
        let mut out = Vec::new();
        visit(self, self.root, &mut marks, &mut out)?;
        Ok(out)
    }

    /// Number of LDT levels: slots on the longest path from a bottom slot to
    /// the root.
    pub fn levels(&self) -> usize {
        fn depth(h: &Hierarchy, z: usize) -> usize {
            let slot = h.slot(z).expect("validated hierarchy");
            1 + slot.children().map(|c| depth(h, c)).max().unwrap_or(0)
        }
        depth(self, self.root)
    }

    /// Structured text: header lines, then one `z<id> <- {inputs}` line per
    /// slot in construction order, then `root z<id>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "attributes {}", self.n_attributes);
        if let Some(k) = self.preset_k {
            let _ = writeln!(out, "k {k}");
        }
        if let Some(theta) = self.theta {
            let _ = writeln!(out, "theta {theta}");
        }
        for s in &self.slots {
            let inputs: Vec<String> = s.inputs.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "z{} <- {{{}}}", s.z, inputs.join(", "));
        }
        let _ = writeln!(out, "root z{}", self.root);
        out
    }

    pub fn from_text(text: &str) -> Result<Hierarchy> {
        let mut n_attributes = None;
        let mut preset_k = None;
        let mut theta = None;
        let mut slots = Vec::new();
        let mut root = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse {
                row: i + 1,
                msg: msg.to_string(),
            };
            if let Some((lhs, rhs)) = line.split_once("<-") {
                let z = match lhs.trim().parse::<NodeRef>()? {
                    NodeRef::Intermediate(z) => z,
                    NodeRef::Attribute(_) => return Err(bad("slot must be named z<id>")),
                };
                let body = rhs
                    .trim()
                    .strip_prefix('{')
                    .and_then(|b| b.strip_suffix('}'))
                    .ok_or_else(|| bad("expected {inputs}"))?;
                let inputs = body
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<Vec<NodeRef>>>()?;
                slots.push(Slot { z, inputs });
                continue;
            }
            let (key, value) = line.split_once(char::is_whitespace).ok_or_else(|| bad("expected `key value`"))?;
            let value = value.trim();
            match key {
                "attributes" => n_attributes = Some(value.parse().map_err(|_| bad("bad attribute count"))?),
                "k" => preset_k = Some(value.parse().map_err(|_| bad("bad k"))?),
                "theta" => theta = Some(value.parse().map_err(|_| bad("bad theta"))?),
                "root" => match value.parse::<NodeRef>()? {
                    NodeRef::Intermediate(z) => root = Some(z),
                    NodeRef::Attribute(_) => return Err(bad("root must be a slot")),
                },
                _ => return Err(bad("unknown key")),
            }
        }
        let h = Hierarchy {
            n_attributes: n_attributes.ok_or_else(|| Error::invalid("missing `attributes` line"))?,
            preset_k,
            theta,
            slots,
            root: root.ok_or_else(|| Error::invalid("missing `root` line"))?,
        };
        h.validate()?;
        Ok(h)
    }
}

/// How a slot's output is presented to its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntermediateMode {
    /// The class mass vector, over goal-singleton focal sets.
    #[default]
    MassVector,
    /// Binary goals only: the positive-class mass re-fuzzified with two
    /// labels on [0, 1], giving focal sets {c0}, {c0,c1}, {c1}.
    Refuzzified,
}

impl IntermediateMode {
    pub fn focal_count(self, n_classes: usize) -> usize {
        match self {
            IntermediateMode::MassVector => n_classes,
            IntermediateMode::Refuzzified => 3,
        }
    }

    pub fn encode(self, class_masses: &[f64]) -> MassAssignment {
        match self {
            IntermediateMode::MassVector => MassAssignment::from_dense(class_masses),
            IntermediateMode::Refuzzified => {
                let p = class_masses[1].clamp(0.0, 1.0);
                let t = 2.0 * p;
                if t >= 2.0 {
                    MassAssignment::point(2)
                } else {
                    let j = t.floor() as usize;
                    let w = t - j as f64;
                    if w == 0.0 {
                        MassAssignment::point(j)
                    } else {
                        MassAssignment {
                            entries: vec![(j, 1.0 - w), (j + 1, w)],
                        }
                    }
                }
            }
        }
    }

    pub fn focal_name(self, focal: usize, classes: &[String]) -> String {
        match self {
            IntermediateMode::MassVector => format!("{{{}}}", classes[focal]),
            IntermediateMode::Refuzzified => match focal {
                0 => format!("{{{}}}", classes[0]),
                1 => format!("{{{},{}}}", classes[0], classes[1]),
                _ => format!("{{{}}}", classes[1]),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedLah {
    pub hierarchy: Hierarchy,
    pub mode: IntermediateMode,
    /// Trained slots in postorder; the root is last.
    pub slots: Vec<(usize, Ldt)>,
}

/// Serialisable form of a trained hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LahDocument {
    pub hierarchy: String,
    pub mode: IntermediateMode,
    pub slots: Vec<(usize, LdtDocument)>,
}

impl TrainedLah {
    /// Trains every slot bottom-up. `attributes[a]` holds the training-row
    /// masses of input attribute `a`; each slot learns the goal, and its
    /// outputs on the training rows become the values of its intermediate
    /// attribute for the parent.
    pub fn train(
        hierarchy: &Hierarchy,
        attributes: &[MassColumn],
        goal: &[usize],
        n_classes: usize,
        params: Lid3Params,
        mode: IntermediateMode,
    ) -> Result<TrainedLah> {
        if attributes.len() != hierarchy.n_attributes {
            return Err(Error::Dimension(format!(
                "hierarchy over {} attributes, {} columns given",
                hierarchy.n_attributes,
                attributes.len()
            )));
        }
        if mode == IntermediateMode::Refuzzified && n_classes != 2 {
            return Err(Error::invalid("re-fuzzified intermediates need a binary goal"));
        }
        let order = hierarchy.postorder()?;
        let mut produced: HashMap<usize, MassColumn> = HashMap::new();
        let mut slots = Vec::with_capacity(order.len());
        for &z in &order {
            let slot = hierarchy.slot(z).expect("postorder yields known slots");
            let inputs: Vec<MassColumn> = slot
                .inputs
                .iter()
                .map(|r| match *r {
                    NodeRef::Attribute(a) => attributes[a].clone(),
                    NodeRef::Intermediate(c) => produced[&c].clone(),
                })
                .collect();
            let table = TrainingTable::new(inputs, goal.to_vec(), n_classes)?;
            let ldt = Ldt::train(&table, params)?;
            if z != hierarchy.root {
                let masses = (0..goal.len())
                    .map(|s| {
                        let row: Vec<MassAssignment> =
                            table.inputs.iter().map(|c| c.masses[s].clone()).collect();
                        ldt.infer(&row).map(|out| mode.encode(&out))
                    })
                    .collect::<Result<Vec<_>>>()?;
                produced.insert(
                    z,
                    MassColumn {
                        id: z,
                        focal_count: mode.focal_count(n_classes),
                        masses,
                    },
                );
            }
            slots.push((z, ldt));
        }
        Ok(TrainedLah {
            hierarchy: hierarchy.clone(),
            mode,
            slots,
        })
    }

    pub fn ldt(&self, z: usize) -> Option<&Ldt> {
        self.slots.iter().find(|(id, _)| *id == z).map(|(_, t)| t)
    }

    pub fn root(&self) -> &Ldt {
        &self.slots.last().expect("at least one slot").1
    }

    /// Total rule count over every slot.
    pub fn rule_count(&self) -> usize {
        self.slots.iter().map(|(_, t)| t.branch_count()).sum()
    }

    pub fn levels(&self) -> usize {
        self.hierarchy.levels()
    }

    pub fn n_classes(&self) -> usize {
        self.root().n_classes()
    }

    /// Propagates attribute masses up the hierarchy and returns the root's
    /// class masses. `attributes[a]` is the mass assignment of attribute `a`.
    pub fn infer(&self, attributes: &[MassAssignment]) -> Result<Vec<f64>> {
        if attributes.len() != self.hierarchy.n_attributes {
            return Err(Error::Dimension(format!(
                "expected {} attribute masses, got {}",
                self.hierarchy.n_attributes,
                attributes.len()
            )));
        }
        let n = self.hierarchy.n_attributes;
        let mut produced: HashMap<usize, MassAssignment> = HashMap::new();
        let mut last = Vec::new();
        for (z, ldt) in &self.slots {
            let inputs: Vec<MassAssignment> = ldt
                .inputs()
                .iter()
                .map(|&id| {
                    if id < n {
                        attributes[id].clone()
                    } else {
                        produced[&id].clone()
                    }
                })
                .collect();
            let out = ldt.infer(&inputs)?;
            produced.insert(*z, self.mode.encode(&out));
            last = out;
        }
        Ok(last)
    }

    pub fn to_document(&self) -> LahDocument {
        LahDocument {
            hierarchy: self.hierarchy.to_text(),
            mode: self.mode,
            slots: self.slots.iter().map(|(z, t)| (*z, t.to_document())).collect(),
        }
    }

    pub fn from_document(doc: &LahDocument) -> Result<TrainedLah> {
        let hierarchy = Hierarchy::from_text(&doc.hierarchy)?;
        let order = hierarchy.postorder()?;
        let ids: Vec<usize> = doc.slots.iter().map(|(z, _)| *z).collect();
        if ids != order {
            return Err(Error::invalid("slot models are not in postorder of the hierarchy"));
        }
        let slots = doc
            .slots
            .iter()
            .map(|(z, d)| Ldt::from_document(d).map(|t| (*z, t)))
            .collect::<Result<Vec<_>>>()?;
        for (z, t) in &slots {
            let slot = hierarchy.slot(*z).expect("checked above");
            let mut expected: Vec<usize> = slot.inputs.iter().map(|r| r.id()).collect();
            expected.sort_unstable();
            if t.inputs() != expected.as_slice() {
                return Err(Error::invalid(format!("model for z{z} does not match its slot inputs")));
            }
        }
        Ok(TrainedLah {
            hierarchy,
            mode: doc.mode,
            slots,
        })
    }

    /// Per-slot rule blocks followed by composition templates linking child
    /// slot branches to parent antecedents. A single-slot hierarchy renders
    /// exactly as its LDT's rule list.
    pub fn semantics(&self, naming: &dyn Naming) -> String {
        if self.slots.len() == 1 {
            let mut out = self.root().rules(naming).join("\n");
            out.push('\n');
            return out;
        }
        let mut out = String::new();
        for (z, ldt) in &self.slots {
            let inputs: Vec<String> = ldt.inputs().iter().map(|&i| naming.attribute(i)).collect();
            let role = if *z == self.hierarchy.root { " (root)" } else { "" };
            let _ = writeln!(
                out,
                "[{}]{role} LDT over {}: {} rules",
                naming.attribute(*z),
                inputs.join(", "),
                ldt.branch_count()
            );
            for (i, rule) in ldt.rules(naming).iter().enumerate() {
                let _ = writeln!(out, "  B{}.{}: {rule}", z, i + 1);
            }
        }
        out.push_str("composition:\n");
        for (z, ldt) in &self.slots {
            let slot = self.hierarchy.slot(*z).expect("trained slots exist");
            let children: Vec<usize> = slot.children().collect();
            if children.is_empty() {
                continue;
            }
            let lhs: Vec<String> = children.iter().map(|c| format!("(B{c}.*)")).collect();
            let attrs: Vec<String> = slot.attributes().map(|a| naming.attribute(a)).collect();
            let attr_part = if attrs.is_empty() {
                String::new()
            } else {
                format!(" with {}", attrs.join(", "))
            };
            let _ = writeln!(
                out,
                "  {} → B{z}.*{attr_part} → F:ν(F|B{z}.*)  [{} branches]",
                lhs.join(" ∨ "),
                ldt.branch_count()
            );
        }
        out
    }

    /// Renders the synthesized rule for one row: the branches of every slot
    /// that fire on it, composed child-first.
    pub fn explain(&self, attributes: &[MassAssignment], naming: &dyn Naming) -> Result<String> {
        self.infer(attributes)?;
        let n = self.hierarchy.n_attributes;
        let mut produced: HashMap<usize, MassAssignment> = HashMap::new();
        let mut out = String::new();
        for (z, ldt) in &self.slots {
            let inputs: Vec<MassAssignment> = ldt
                .inputs()
                .iter()
                .map(|&id| if id < n { attributes[id].clone() } else { produced[&id].clone() })
                .collect();
            let lookup = |id: usize| ldt.inputs().iter().position(|&i| i == id).map(|p| &inputs[p]);
            let mut fired: Vec<(f64, String)> = Vec::new();
            for b in ldt.branches() {
                let mu = crate::ldt::branch_appropriateness(&b.path, lookup)?;
                if mu > 0.0 {
                    fired.push((mu, render_antecedent(&b.path, naming)));
                }
            }
            fired.sort_by(|a, b| b.0.total_cmp(&a.0));
            let _ = writeln!(out, "{}:", naming.attribute(*z));
            for (mu, text) in fired {
                let _ = writeln!(out, "  {mu:.4}  {text}");
            }
            produced.insert(*z, self.mode.encode(&ldt.infer(&inputs)?));
        }
        Ok(out)
    }
}

/// Naming for rule text over partitions and intermediates.
pub struct HierarchyNaming<'a> {
    pub partitions: &'a [FuzzyPartition],
    pub classes: &'a [String],
    pub mode: IntermediateMode,
}

impl Naming for HierarchyNaming<'_> {
    fn attribute(&self, id: usize) -> String {
        match self.partitions.get(id) {
            Some(p) => p.name.clone(),
            None => format!("z{id}"),
        }
    }

    fn focal(&self, id: usize, focal: usize) -> String {
        match self.partitions.get(id) {
            Some(p) => p.focal_name(focal),
            None => self.mode.focal_name(focal, self.classes),
        }
    }

    fn class(&self, class: usize) -> String {
        self.classes[class].clone()
    }
}
