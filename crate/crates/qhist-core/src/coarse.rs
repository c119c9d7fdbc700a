//! Coarse-graining machinery and the decoherence deciders.
//!
//! A coarse-graining partitions each time's slot indices into blocks; each
//! block becomes the summed projector. Minimal decoherence demands that every
//! coarse probability equal the sum of its fine probabilities (projection sum
//! rules); weak decoherence demands vanishing real parts of all off-diagonal
//! decoherence-functional entries; medium decoherence demands the entries
//! vanish outright.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::{Branch, Branches, HistoryFamily, TimeSlot};
use crate::hilbert::Projector;

/// Cap on the number of combined coarse-grainings enumerated per family.
pub const DEFAULT_GRAINING_CAP: u128 = 100_000;

/// A partition of `{0, …, n−1}` into disjoint nonempty blocks, kept in
/// canonical form: blocks ordered by least element, elements ascending.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::PreconditionViolated("empty partition block".into()));
            }
            for &i in block {
                if i >= n || seen[i] {
                    return Err(Error::PreconditionViolated(format!(
                        "partition does not cover {{0..{n}}} exactly once"
                    )));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::PreconditionViolated(format!(
                "partition does not cover {{0..{n}}} exactly once"
            )));
        }
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { blocks })
    }

    pub fn singletons(n: usize) -> Self {
        Self { blocks: (0..n).map(|i| vec![i]).collect() }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    /// Block index containing `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(&i))
            .expect("index covered by partition")
    }
}

/// All set partitions of `{0, …, n−1}` in lexicographic restricted-growth
/// order (single block first, all singletons last).
pub fn set_partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut rgs = vec![0usize; n];
    loop {
        let num_blocks = rgs.iter().copied().max().unwrap_or(0) + 1;
        let mut blocks = vec![Vec::new(); num_blocks];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        out.push(Partition { blocks });

        // Advance the restricted growth string: rightmost position that can
        // still grow (bounded by 1 + max of its prefix).
        let mut pos = n;
        loop {
            if pos <= 1 {
                return out;
            }
            pos -= 1;
            let prefix_max = rgs[..pos].iter().copied().max().unwrap_or(0);
            if rgs[pos] <= prefix_max {
                rgs[pos] += 1;
                for entry in rgs.iter_mut().skip(pos + 1) {
                    *entry = 0;
                }
                break;
            }
        }
    }
}

/// Bell number `B(n)` (number of set partitions).
pub fn bell_number(n: usize) -> u128 {
    // Bell triangle.
    let mut row = vec![1u128];
    for _ in 1..=n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("nonempty"));
        for &x in &row {
            let last = *next.last().expect("nonempty");
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

/// One partition of slot indices per time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoarseGraining {
    partitions: Vec<Partition>,
}

impl CoarseGraining {
    pub fn new(partitions: Vec<Partition>, f: &HistoryFamily) -> Result<Self> {
        if partitions.len() != f.num_times() {
            return Err(Error::PreconditionViolated(format!(
                "expected {} partitions, got {}",
                f.num_times(),
                partitions.len()
            )));
        }
        for (partition, slot) in partitions.iter().zip(f.times()) {
            let covered: usize = partition.blocks().iter().map(|b| b.len()).sum();
            if covered != slot.len()
                || partition.blocks().iter().flatten().any(|&i| i >= slot.len())
            {
                return Err(Error::PreconditionViolated(
                    "partition does not match slot size".into(),
                ));
            }
        }
        Ok(Self { partitions })
    }

    pub fn identity(f: &HistoryFamily) -> Self {
        Self { partitions: f.times().iter().map(|s| Partition::singletons(s.len())).collect() }
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn is_identity(&self) -> bool {
        self.partitions.iter().all(|p| p.is_identity())
    }

    /// Image of a fine branch: the block index at each time.
    pub fn map_branch(&self, h: &Branch) -> Branch {
        Branch(
            h.indices()
                .iter()
                .zip(&self.partitions)
                .map(|(&i, p)| p.block_of(i))
                .collect(),
        )
    }

    /// Compact text form, e.g. `{0}{1} | {0,1}{2}`.
    pub fn describe(&self) -> String {
        let per_time: Vec<String> = self
            .partitions
            .iter()
            .map(|p| {
                p.blocks()
                    .iter()
                    .map(|b| {
                        let inner: Vec<String> = b.iter().map(|i| i.to_string()).collect();
                        format!("{{{}}}", inner.join(","))
                    })
                    .collect::<String>()
            })
            .collect();
        per_time.join(" | ")
    }
}

/// All combined coarse-grainings of a family (identity excluded), in
/// lexicographic order with the earliest time most significant.
pub fn enumerate_grainings(f: &HistoryFamily) -> Result<Vec<CoarseGraining>> {
    enumerate_grainings_capped(f, DEFAULT_GRAINING_CAP)
}

pub fn enumerate_grainings_capped(f: &HistoryFamily, cap: u128) -> Result<Vec<CoarseGraining>> {
    let count: u128 = f.times().iter().map(|s| bell_number(s.len())).product();
    if count > cap {
        return Err(Error::TooManyGrainings { count, cap });
    }
    let per_time: Vec<Vec<Partition>> =
        f.times().iter().map(|s| set_partitions(s.len())).collect();
    let mut out = Vec::with_capacity((count.saturating_sub(1)) as usize);
    let mut indices = vec![0usize; per_time.len()];
    loop {
        let graining = CoarseGraining {
            partitions: indices.iter().zip(&per_time).map(|(&i, ps)| ps[i].clone()).collect(),
        };
        if !graining.is_identity() {
            out.push(graining);
        }
        // Odometer with the last time fastest, so the combined order is
        // lexicographic in the per-time partition order.
        let mut t = per_time.len();
        loop {
            if t == 0 {
                return Ok(out);
            }
            t -= 1;
            indices[t] += 1;
            if indices[t] < per_time[t].len() {
                break;
            }
            indices[t] = 0;
        }
    }
}

/// Replace each block by its summed projector. Coarse outcome labels join
/// the fine labels with `+`. A coarse branch is kept iff a listed fine
/// branch maps into it.
pub fn coarse_family(f: &HistoryFamily, g: &CoarseGraining) -> Result<HistoryFamily> {
    check_graining(f, g)?;
    let tol = *f.tolerance();
    let mut times = Vec::with_capacity(f.num_times());
    for (slot, partition) in f.times().iter().zip(g.partitions()) {
        let mut outcomes = Vec::with_capacity(partition.num_blocks());
        for block in partition.blocks() {
            let parts: Vec<&Projector> = block.iter().map(|&i| &slot.projectors()[i]).collect();
            let label: Vec<&str> =
                block.iter().map(|&i| slot.outcome_labels()[i].as_str()).collect();
            outcomes.push((label.join("+"), Projector::sum(&parts, &tol)?));
        }
        times.push(TimeSlot::new(slot.label(), outcomes, &tol)?);
    }
    let branches = match f.branches() {
        Branches::All => Branches::All,
        Branches::Listed(list) => {
            let mut coarse: Vec<Branch> = Vec::new();
            for h in list {
                let mapped = g.map_branch(h);
                if !coarse.contains(&mapped) {
                    coarse.push(mapped);
                }
            }
            Branches::Listed(coarse)
        }
    };
    HistoryFamily::new(f.initial().clone(), times, branches, tol)
}

fn check_graining(f: &HistoryFamily, g: &CoarseGraining) -> Result<()> {
    if g.partitions().len() != f.num_times() {
        return Err(Error::PreconditionViolated(format!(
            "graining has {} partitions, family has {} times",
            g.partitions().len(),
            f.num_times()
        )));
    }
    for (partition, slot) in g.partitions().iter().zip(f.times()) {
        let covered: usize = partition.blocks().iter().map(|b| b.len()).sum();
        if covered != slot.len() {
            return Err(Error::PreconditionViolated("partition does not match slot size".into()));
        }
    }
    Ok(())
}

/// One projection sum rule: a coarse cell's probability against the sum of
/// its fine probabilities.
#[derive(Debug, Clone)]
pub struct SumRuleRow {
    /// Block index per time identifying the coarse cell.
    pub cell: Branch,
    /// Probability computed with the summed projectors.
    pub coarse_probability: f64,
    /// Sum of fine probabilities over the full Cartesian cell, excluded
    /// branches included.
    pub fine_sum: f64,
    /// `coarse_probability − fine_sum`.
    pub residual: f64,
    /// Listed fine branches mapping into the cell.
    pub fine_branches: Vec<Branch>,
}

/// Result of checking every projection sum rule of one coarse-graining.
#[derive(Debug, Clone)]
pub struct SumRuleReport {
    pub graining: CoarseGraining,
    pub rows: Vec<SumRuleRow>,
    pub max_abs_residual: f64,
    pub pass: bool,
}

/// Check the projection sum rules of one graining: every cell of the coarse
/// Cartesian product is compared against its fine-branch probability sum.
pub fn check_sum_rule(f: &HistoryFamily, g: &CoarseGraining) -> Result<SumRuleReport> {
    check_graining(f, g)?;
    let coarse = coarse_family(f, g)?;
    let listed: Option<Vec<Branch>> = match f.branches() {
        Branches::Listed(list) => Some(list.clone()),
        Branches::All => None,
    };

    let root = f.chain_root();
    let coarse_root = coarse.chain_root();
    let mut rows = Vec::new();
    let mut max_abs_residual = 0.0f64;

    for cell in coarse.product_branches() {
        let coarse_probability = coarse.half_chain(&cell, &coarse_root)?.norm_squared();

        // Sum fine probabilities over the full Cartesian product of the
        // cell's blocks.
        let blocks: Vec<&Vec<usize>> = cell
            .indices()
            .iter()
            .zip(g.partitions())
            .map(|(&b, p)| &p.blocks()[b])
            .collect();
        let mut fine_sum = 0.0f64;
        let mut fine_branches = Vec::new();
        let mut odometer = vec![0usize; blocks.len()];
        loop {
            let fine = Branch(
                odometer.iter().zip(&blocks).map(|(&k, block)| block[k]).collect(),
            );
            fine_sum += f.half_chain(&fine, &root)?.norm_squared();
            if listed.as_ref().map(|l| l.contains(&fine)).unwrap_or(true) {
                fine_branches.push(fine);
            }
            let mut t = blocks.len();
            let mut done = true;
            while t > 0 {
                t -= 1;
                odometer[t] += 1;
                if odometer[t] < blocks[t].len() {
                    done = false;
                    break;
                }
                odometer[t] = 0;
            }
            if done {
                break;
            }
        }

        let residual = coarse_probability - fine_sum;
        max_abs_residual = max_abs_residual.max(residual.abs());
        rows.push(SumRuleRow { cell, coarse_probability, fine_sum, residual, fine_branches });
    }

    let pass = max_abs_residual <= f.tolerance().eps_zero();
    Ok(SumRuleReport { graining: g.clone(), rows, max_abs_residual, pass })
}

/// The three decoherence conditions, ordered by strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoherenceLevel {
    Minimal,
    Weak,
    Medium,
}

impl std::fmt::Display for DecoherenceLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DecoherenceLevel::Minimal => write!(f, "minimal"),
            DecoherenceLevel::Weak => write!(f, "weak"),
            DecoherenceLevel::Medium => write!(f, "medium"),
        }
    }
}

/// A witness for a verdict: the graining or branch pair carrying the largest
/// violation magnitude.
#[derive(Debug, Clone)]
pub enum Witness {
    Graining { graining: CoarseGraining, magnitude: f64 },
    Pair { a: Branch, b: Branch, value: Complex64, magnitude: f64 },
}

impl Witness {
    pub fn magnitude(&self) -> f64 {
        match self {
            Witness::Graining { magnitude, .. } => *magnitude,
            Witness::Pair { magnitude, .. } => *magnitude,
        }
    }
}

/// Verdict of one decoherence decider.
#[derive(Debug, Clone)]
pub struct DecoherenceVerdict {
    pub level: DecoherenceLevel,
    pub pass: bool,
    /// Largest-magnitude term, present whenever at least one graining or
    /// pair exists; ties resolve to the earliest in enumeration order.
    pub worst_witness: Option<Witness>,
    /// Every term whose magnitude exceeds the tolerance.
    pub violations: Vec<Witness>,
}

/// Minimal decoherence: every projection sum rule over every combined
/// coarse-graining holds.
pub fn check_minimal(f: &HistoryFamily) -> Result<DecoherenceVerdict> {
    check_minimal_capped(f, DEFAULT_GRAINING_CAP)
}

pub fn check_minimal_capped(f: &HistoryFamily, cap: u128) -> Result<DecoherenceVerdict> {
    let eps = f.tolerance().eps_zero();
    let grainings = enumerate_grainings_capped(f, cap)?;
    let mut worst: Option<Witness> = None;
    let mut violations = Vec::new();
    for g in grainings {
        let report = check_sum_rule(f, &g)?;
        let witness =
            Witness::Graining { graining: g, magnitude: report.max_abs_residual };
        if report.max_abs_residual > eps {
            violations.push(witness.clone());
        }
        if worst.as_ref().map(|w| witness.magnitude() > w.magnitude()).unwrap_or(true) {
            worst = Some(witness);
        }
    }
    Ok(DecoherenceVerdict {
        level: DecoherenceLevel::Minimal,
        pass: violations.is_empty(),
        worst_witness: worst,
        violations,
    })
}

fn offdiagonal_verdict(
    f: &HistoryFamily,
    level: DecoherenceLevel,
    term: impl Fn(Complex64) -> f64,
) -> Result<DecoherenceVerdict> {
    let eps = f.tolerance().eps_zero();
    let d = f.decoherence_matrix()?;
    let mut worst: Option<Witness> = None;
    let mut violations = Vec::new();
    for i in 0..d.len() {
        for j in (i + 1)..d.len() {
            let value = d.entry(i, j);
            let magnitude = term(value);
            let witness = Witness::Pair {
                a: d.branches()[i].clone(),
                b: d.branches()[j].clone(),
                value,
                magnitude,
            };
            if magnitude > eps {
                violations.push(witness.clone());
            }
            if worst.as_ref().map(|w| magnitude > w.magnitude()).unwrap_or(true) {
                worst = Some(witness);
            }
        }
    }
    Ok(DecoherenceVerdict { level, pass: violations.is_empty(), worst_witness: worst, violations })
}

/// Weak decoherence: `Re D(h,h′) = 0` for all distinct listed branches.
pub fn check_weak(f: &HistoryFamily) -> Result<DecoherenceVerdict> {
    offdiagonal_verdict(f, DecoherenceLevel::Weak, |z| z.re.abs())
}

/// Medium decoherence: `D(h,h′) = 0` for all distinct listed branches.
pub fn check_medium(f: &HistoryFamily) -> Result<DecoherenceVerdict> {
    offdiagonal_verdict(f, DecoherenceLevel::Medium, |z| z.norm())
}

/// `tr((Σ_{h∈S} C_h) ρ (Σ_{h∈S} C_h)†)`: the history-sum quantity. It is a
/// squared norm, hence nonnegative, but it is generally *not* a probability
/// computed from a projector at each time.
pub fn history_sum_quantity(f: &HistoryFamily, set: &[Branch]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let root = f.chain_root();
    let halves: Vec<_> = set.iter().map(|h| f.half_chain(h, &root)).collect::<Result<_>>()?;
    let mut total = Complex64::new(0.0, 0.0);
    for a in &halves {
        for b in &halves {
            total += crate::family::HalfChain::pair(a, b);
        }
    }
    Ok(total.re)
}

/// Comparison of a history-sum quantity against the plain probability sum.
#[derive(Debug, Clone)]
pub struct HistorySumRuleReport {
    pub quantity: f64,
    pub prob_sum: f64,
    pub residual: f64,
    pub pass: bool,
}

/// History sum rule for a branch set: residual is the quantity minus the sum
/// of the member probabilities (equal to the sum of cross real parts).
pub fn check_history_sum_rule(f: &HistoryFamily, set: &[Branch]) -> Result<HistorySumRuleReport> {
    let quantity = history_sum_quantity(f, set)?;
    let mut prob_sum = 0.0;
    for h in set {
        prob_sum += f.probability(h)?;
    }
    let residual = quantity - prob_sum;
    Ok(HistorySumRuleReport {
        quantity,
        prob_sum,
        residual,
        pass: residual.abs() <= f.tolerance().eps_zero(),
    })
}
