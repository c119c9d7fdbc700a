//! Trajectory graphs, the weak-decoherence two-path diagnostic, and the
//! no-recurrence sum.
//!
//! A trajectory graph has one column per time plus an initial column; every
//! listed branch is a path across the columns. The DOT emitter is
//! deterministic: identical graphs yield byte-identical text.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::family::{HistoryFamily, TimeSlot};
use crate::hilbert::{matmul, Matrix, Projector};

/// Node identifier: column 0 is the initial column (single node), column
/// `k ≥ 1` is time `k−1` of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct NodeId {
    pub column: usize,
    pub slot: usize,
}

impl NodeId {
    fn dot_id(&self) -> String {
        if self.column == 0 {
            "t0".to_string()
        } else {
            format!("t{}_s{}", self.column, self.slot)
        }
    }
}

/// Layered graph of a family's branches.
#[derive(Debug, Clone)]
pub struct TrajectoryGraph {
    /// Column 0 holds the single initial label; column `k ≥ 1` the outcome
    /// labels of time `k−1`.
    pub columns: Vec<Vec<String>>,
    pub edges: BTreeSet<(NodeId, NodeId)>,
}

impl TrajectoryGraph {
    pub fn node_count(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Build the trajectory graph: all slot outcomes become nodes; edges are the
/// consecutive-time pairs appearing in at least one listed branch, plus the
/// initial-node edges into each branch's first outcome.
pub fn build_graph(f: &HistoryFamily) -> Result<TrajectoryGraph> {
    let branches = f.branch_list()?;
    let mut columns = Vec::with_capacity(f.num_times() + 1);
    columns.push(vec!["0".to_string()]);
    for slot in f.times() {
        columns.push(slot.outcome_labels().to_vec());
    }
    let mut edges = BTreeSet::new();
    for h in &branches {
        let mut prev = NodeId { column: 0, slot: 0 };
        for (t, &idx) in h.indices().iter().enumerate() {
            let node = NodeId { column: t + 1, slot: idx };
            edges.insert((prev, node));
            prev = node;
        }
    }
    Ok(TrajectoryGraph { columns, edges })
}

fn escape_label(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Deterministic DOT text: one `rank=same` cluster per column, nodes
/// time-major and slot-minor, edges in sorted order.
pub fn to_dot(g: &TrajectoryGraph) -> String {
    let mut out = String::from("digraph histories {\n  rankdir=LR;\n");
    for (column, labels) in g.columns.iter().enumerate() {
        if column == 0 {
            out.push_str(&format!("  t0 [label=\"{}\"];\n", escape_label(&labels[0])));
            continue;
        }
        out.push_str("  { rank=same;");
        for (slot, label) in labels.iter().enumerate() {
            let id = NodeId { column, slot }.dot_id();
            out.push_str(&format!(" {id} [label=\"{}\"];", escape_label(label)));
        }
        out.push_str(" }\n");
    }
    for (from, to) in &g.edges {
        out.push_str(&format!("  {} -> {};\n", from.dot_id(), to.dot_id()));
    }
    out.push_str("}\n");
    out
}

/// Per final-slot index, the number of listed branches ending there with a
/// nonvanishing chain amplitude. Weak decoherence allows at most two; the
/// count alone is a diagnostic, not a verdict.
///
/// Requires every projector to be rank 1, since the underlying bound is
/// about scalar amplitudes.
pub fn two_path_counts(f: &HistoryFamily) -> Result<BTreeMap<usize, usize>> {
    for (t, slot) in f.times().iter().enumerate() {
        for (i, p) in slot.projectors().iter().enumerate() {
            if p.rank() != 1 {
                return Err(Error::NonRankOneSlot { time: t, index: i, rank: p.rank() });
            }
        }
    }
    let eps = f.tolerance().eps_zero();
    let mut counts = BTreeMap::new();
    if f.num_times() == 0 {
        return Ok(counts);
    }
    for h in f.branch_list()? {
        let p = f.probability(&h)?;
        // |z_h| > eps for the amplitude z_h means probability > eps².
        if p.sqrt() > eps {
            let last = *h.indices().last().expect("nonempty branch");
            *counts.entry(last).or_insert(0) += 1;
        }
    }
    Ok(counts)
}

fn find_projector(slot: &TimeSlot, p: &Projector, eps: f64) -> Option<usize> {
    slot.projectors().iter().position(|q| q.same_as(p, eps))
}

/// Sum over intermediate fine branches of the probability that projector `p`
/// fires at both `t1` and `t2`, with every time outside `[t1, t2]`
/// coarse-grained to its full block.
///
/// Projection sum rules force this to zero whenever at least two
/// intermediate states connect the recurrence, which is what rules out
/// cyclic histories.
pub fn recurrence_sum(f: &HistoryFamily, p: &Projector, t1: usize, t2: usize) -> Result<f64> {
    let eps = f.tolerance().eps_zero();
    if t1 >= t2 || t2 >= f.num_times() {
        return Err(Error::PreconditionViolated(format!(
            "need t1 < t2 < number of times, got t1={t1}, t2={t2}"
        )));
    }
    if p.rank() != 1 {
        return Err(Error::PreconditionViolated(format!(
            "recurring projector must be rank 1, got rank {}",
            p.rank()
        )));
    }
    for t in [t1, t2] {
        if find_projector(&f.times()[t], p, eps).is_none() {
            return Err(Error::PreconditionViolated(format!(
                "projector is not a member of the slot at time {t}"
            )));
        }
    }
    for t in (t1 + 1)..t2 {
        if find_projector(&f.times()[t], p, eps).is_some() {
            return Err(Error::PreconditionViolated(format!(
                "projector also occurs at intermediate time {t}"
            )));
        }
    }

    // Chain factors: full slot block outside [t1, t2], p at the endpoints,
    // one fine projector per intermediate time.
    let rho = f.initial().density();
    let intermediate: Vec<&TimeSlot> = ((t1 + 1)..t2).map(|t| &f.times()[t]).collect();
    let mut total = 0.0f64;
    let mut odometer = vec![0usize; intermediate.len()];
    loop {
        let mut chain = Matrix::identity(f.dim());
        for (t, slot) in f.times().iter().enumerate() {
            let factor: Matrix = if t < t1 || t > t2 {
                slot.sum_matrix()
            } else if t == t1 || t == t2 {
                p.matrix().clone()
            } else {
                intermediate[t - t1 - 1].projectors()[odometer[t - t1 - 1]].matrix().clone()
            };
            chain = matmul(&factor, &chain)?;
        }
        // tr(C ρ C†) via the Frobenius inner product of Cρ with C.
        let c_rho = matmul(&chain, &rho)?;
        let mut term = 0.0;
        for i in 0..f.dim() {
            for j in 0..f.dim() {
                term += (c_rho.entry(i, j) * chain.entry(i, j).conj()).re;
            }
        }
        total += term;

        let mut t = intermediate.len();
        let mut done = true;
        while t > 0 {
            t -= 1;
            odometer[t] += 1;
            if odometer[t] < intermediate[t].len() {
                done = false;
                break;
            }
            odometer[t] = 0;
        }
        if done {
            break;
        }
    }
    Ok(total)
}
