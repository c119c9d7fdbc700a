//! The history-family data model: time slots of orthogonal projectors,
//! branches, chain operators, the decoherence functional, branch
//! probabilities, and sequential-measurement sampling.
//!
//! A family is immutable once constructed; every operation here is a pure
//! function of it.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{adjoint, apply, matmul, trace, Matrix, Projector, Tolerance, Vector};

/// Cap on expanding `Branches::All` into an explicit list.
pub const DEFAULT_BRANCH_CAP: u128 = 1_000_000;

/// Initial condition: a pure state vector or a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum StateDescriptor {
    Pure(Vector),
    Mixed(Matrix),
}

impl StateDescriptor {
    pub fn dim(&self) -> usize {
        match self {
            StateDescriptor::Pure(v) => v.dim(),
            StateDescriptor::Mixed(m) => m.dim(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, StateDescriptor::Pure(_))
    }

    /// The density matrix: `|ψ⟩⟨ψ|` for pure states, `ρ` itself otherwise.
    pub fn density(&self) -> Matrix {
        match self {
            StateDescriptor::Pure(v) => Matrix::outer(v, v).expect("same dim"),
            StateDescriptor::Mixed(m) => m.clone(),
        }
    }
}

/// One time: an ordered list of labelled, mutually orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSlot {
    label: String,
    outcome_labels: Vec<String>,
    projectors: Vec<Projector>,
    complete: bool,
}

impl TimeSlot {
    /// Orthogonality between the projectors is *not* enforced here; it is a
    /// reported check in [`HistoryFamily::validate`], so malformed slots can
    /// still be inspected.
    pub fn new(label: impl Into<String>, outcomes: Vec<(String, Projector)>, tol: &Tolerance) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptySet);
        }
        let dim = outcomes[0].1.dim();
        for (_, p) in &outcomes {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
        }
        let (outcome_labels, projectors): (Vec<String>, Vec<Projector>) = outcomes.into_iter().unzip();
        for (i, l) in outcome_labels.iter().enumerate() {
            if outcome_labels[..i].contains(l) {
                return Err(Error::DuplicateLabel { time: 0, label: l.clone() });
            }
        }
        let mut slot = Self { label: label.into(), outcome_labels, projectors, complete: false };
        slot.complete = slot.sum_matrix().distance(&Matrix::identity(dim)).expect("same dim")
            <= tol.eps_zero();
        Ok(slot)
    }

    /// Build each outcome's projector from a group of orthonormal vectors.
    pub fn from_vector_groups(
        label: impl Into<String>,
        groups: Vec<(String, Vec<Vector>)>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let mut outcomes = Vec::with_capacity(groups.len());
        for (name, vectors) in groups {
            let p = crate::hilbert::projector_from_vectors(&vectors, tol)?;
            outcomes.push((name, p));
        }
        Self::new(label, outcomes, tol)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn outcome_labels(&self) -> &[String] {
        &self.outcome_labels
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.outcome_labels.iter().position(|l| l == label)
    }

    /// True iff the projectors sum to the identity within tolerance.
    pub fn complete(&self) -> bool {
        self.complete
    }

    /// `Σ_a P_a` as a plain matrix.
    pub fn sum_matrix(&self) -> Matrix {
        let dim = self.projectors[0].dim();
        let mut acc = Matrix::zeros(dim);
        for p in &self.projectors {
            acc = acc.add(p.matrix()).expect("same dim");
        }
        acc
    }

    /// Largest `‖P_a P_b‖_max` over distinct pairs.
    pub fn orthogonality_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, pa) in self.projectors.iter().enumerate() {
            for pb in &self.projectors[a + 1..] {
                let prod = matmul(pa.matrix(), pb.matrix()).expect("same dim");
                worst = worst.max(prod.max_norm());
            }
        }
        worst
    }
}

/// A history: one slot index per time, earliest first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Branch(pub Vec<usize>);

impl Branch {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("▷"))
    }
}

/// Branch set: the full Cartesian product or an explicit list.
#[derive(Debug, Clone, PartialEq)]
pub enum Branches {
    All,
    Listed(Vec<Branch>),
}

/// Iterator over the full Cartesian product of slot indices, last time
/// varying fastest. Zero times yields the single empty branch.
pub struct ProductBranches {
    sizes: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl ProductBranches {
    fn new(sizes: Vec<usize>) -> Self {
        let current = if sizes.iter().all(|&s| s > 0) { Some(vec![0; sizes.len()]) } else { None };
        Self { sizes, current }
    }
}

impl Iterator for ProductBranches {
    type Item = Branch;

    fn next(&mut self) -> Option<Branch> {
        let current = self.current.as_mut()?;
        let item = Branch(current.clone());
        let mut t = self.sizes.len();
        loop {
            if t == 0 {
                self.current = None;
                break;
            }
            t -= 1;
            current[t] += 1;
            if current[t] < self.sizes[t] {
                break;
            }
            current[t] = 0;
        }
        Some(item)
    }
}

/// Outcome of one validation check.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct ValidationCheck {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

/// Pass/fail record for every family invariant.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

/// Counts from sequential-measurement sampling. Runs that leave the family
/// (an incomplete slot fails to fire) land in `out_of_family`.
#[derive(Debug, Clone)]
pub struct SampleReport {
    pub counts: BTreeMap<Branch, u64>,
    pub out_of_family: u64,
    pub n: u64,
}

impl SampleReport {
    pub fn frequency(&self, h: &Branch) -> f64 {
        *self.counts.get(h).unwrap_or(&0) as f64 / self.n as f64
    }
}

/// The Hermitian matrix `D[h,h′]` of decoherence-functional values over an
/// ordered branch list.
#[derive(Debug, Clone)]
pub struct DecoherenceMatrix {
    branches: Vec<Branch>,
    entries: Matrix,
}

impl DecoherenceMatrix {
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries.entry(row, col)
    }

    /// `‖D − D†‖_max`.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.entries.distance(&adjoint(&self.entries)).expect("square")
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        self.entries
            .hermitian_eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    /// `Σ_{h,h′} D[h,h′]`; equals `tr ρ` for a complete product family.
    pub fn sum_all(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.len() {
            for j in 0..self.len() {
                acc += self.entry(i, j);
            }
        }
        acc
    }
}

/// Chain factor shared by every branch: `|ψ⟩` for a pure initial state, the
/// Hermitian square root of `ρ` otherwise.
#[derive(Debug, Clone)]
pub(crate) enum ChainRoot {
    Pure(DVector<Complex64>),
    Mixed(DMatrix<Complex64>),
}

/// A branch's chain operator applied to the chain root. The decoherence
/// functional is the Frobenius inner product of two of these.
#[derive(Debug, Clone)]
pub(crate) enum HalfChain {
    Pure(DVector<Complex64>),
    Mixed(DMatrix<Complex64>),
}

impl HalfChain {
    pub(crate) fn norm_squared(&self) -> f64 {
        match self {
            HalfChain::Pure(v) => v.norm_squared(),
            HalfChain::Mixed(m) => m.norm_squared(),
        }
    }

    /// `tr(C_a ρ C_b†)` given the two half chains.
    pub(crate) fn pair(a: &HalfChain, b: &HalfChain) -> Complex64 {
        match (a, b) {
            (HalfChain::Pure(x), HalfChain::Pure(y)) => y.dotc(x),
            (HalfChain::Mixed(x), HalfChain::Mixed(y)) => y.dotc(x),
            _ => unreachable!("half chains come from one root"),
        }
    }
}

/// A consistent-histories family: dimension, initial state, ordered time
/// slots, and a branch set.
#[derive(Debug, Clone)]
pub struct HistoryFamily {
    dim: usize,
    initial: StateDescriptor,
    times: Vec<TimeSlot>,
    branches: Branches,
    tol: Tolerance,
}

impl HistoryFamily {
    pub fn new(
        initial: StateDescriptor,
        times: Vec<TimeSlot>,
        branches: Branches,
        tol: Tolerance,
    ) -> Result<Self> {
        let dim = initial.dim();
        for slot in &times {
            for p in slot.projectors() {
                if p.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
                }
            }
        }
        let family = Self { dim, initial, times, branches, tol };
        if let Branches::Listed(list) = &family.branches {
            for (i, h) in list.iter().enumerate() {
                family.check_branch(h)?;
                if list[..i].contains(h) {
                    return Err(Error::DuplicateBranch { branch: h.0.clone() });
                }
            }
        }
        Ok(family)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn initial(&self) -> &StateDescriptor {
        &self.initial
    }

    pub fn times(&self) -> &[TimeSlot] {
        &self.times
    }

    pub fn num_times(&self) -> usize {
        self.times.len()
    }

    pub fn branches(&self) -> &Branches {
        &self.branches
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    /// Same family with a different branch set.
    pub fn with_branches(&self, branches: Branches) -> Result<Self> {
        Self::new(self.initial.clone(), self.times.clone(), branches, self.tol)
    }

    /// Number of branches in the full Cartesian product.
    pub fn product_count(&self) -> u128 {
        self.times.iter().map(|s| s.len() as u128).product()
    }

    /// Iterate the full Cartesian product of slot indices.
    pub fn product_branches(&self) -> ProductBranches {
        ProductBranches::new(self.times.iter().map(|s| s.len()).collect())
    }

    /// The explicit branch list; `All` is expanded up to `cap`.
    pub fn branch_list_capped(&self, cap: u128) -> Result<Vec<Branch>> {
        match &self.branches {
            Branches::Listed(list) => Ok(list.clone()),
            Branches::All => {
                let count = self.product_count();
                if count > cap {
                    return Err(Error::TooManyBranches { count, cap });
                }
                Ok(self.product_branches().collect())
            }
        }
    }

    pub fn branch_list(&self) -> Result<Vec<Branch>> {
        self.branch_list_capped(DEFAULT_BRANCH_CAP)
    }

    fn check_branch(&self, h: &Branch) -> Result<()> {
        if h.len() != self.times.len() {
            return Err(Error::InvalidBranch {
                branch: h.0.clone(),
                reason: format!("expected {} indices, got {}", self.times.len(), h.len()),
            });
        }
        for (t, (&idx, slot)) in h.indices().iter().zip(&self.times).enumerate() {
            if idx >= slot.len() {
                return Err(Error::InvalidBranch {
                    branch: h.0.clone(),
                    reason: format!("index {idx} out of range at time {t}"),
                });
            }
        }
        Ok(())
    }

    /// Branch rendered with outcome labels, e.g. `1▷3▷6`.
    pub fn branch_label_string(&self, h: &Branch) -> String {
        let parts: Vec<&str> = h
            .indices()
            .iter()
            .zip(&self.times)
            .map(|(&idx, slot)| slot.outcome_labels()[idx].as_str())
            .collect();
        parts.join("▷")
    }

    /// Time-ordered product of the branch's projectors, latest factor
    /// leftmost.
    pub fn chain_operator(&self, h: &Branch) -> Result<Matrix> {
        self.check_branch(h)?;
        let mut acc = Matrix::identity(self.dim);
        for (&idx, slot) in h.indices().iter().zip(&self.times) {
            acc = matmul(slot.projectors()[idx].matrix(), &acc)?;
        }
        Ok(acc)
    }

    pub(crate) fn chain_root(&self) -> ChainRoot {
        match &self.initial {
            StateDescriptor::Pure(v) => ChainRoot::Pure(v.as_dvector().clone()),
            StateDescriptor::Mixed(m) => ChainRoot::Mixed(m.hermitian_sqrt().as_dmatrix().clone()),
        }
    }

    pub(crate) fn half_chain(&self, h: &Branch, root: &ChainRoot) -> Result<HalfChain> {
        self.check_branch(h)?;
        match root {
            ChainRoot::Pure(psi) => {
                let mut state = psi.clone();
                for (&idx, slot) in h.indices().iter().zip(&self.times) {
                    state = self.times_projector(slot, idx) * state;
                }
                Ok(HalfChain::Pure(state))
            }
            ChainRoot::Mixed(sqrt_rho) => {
                let mut state = sqrt_rho.clone();
                for (&idx, slot) in h.indices().iter().zip(&self.times) {
                    state = self.times_projector(slot, idx) * state;
                }
                Ok(HalfChain::Mixed(state))
            }
        }
    }

    fn times_projector<'a>(&self, slot: &'a TimeSlot, idx: usize) -> &'a DMatrix<Complex64> {
        slot.projectors()[idx].matrix().as_dmatrix()
    }

    /// `D(h, h₂) = tr(C_h ρ C_{h₂}†)`.
    pub fn decoherence_functional(&self, h: &Branch, h2: &Branch) -> Result<Complex64> {
        let root = self.chain_root();
        let a = self.half_chain(h, &root)?;
        let b = self.half_chain(h2, &root)?;
        Ok(HalfChain::pair(&a, &b))
    }

    /// Branch probability `Re D(h,h)`; computed as a norm square, so it is
    /// exactly real and nonnegative.
    pub fn probability(&self, h: &Branch) -> Result<f64> {
        let root = self.chain_root();
        Ok(self.half_chain(h, &root)?.norm_squared())
    }

    pub fn decoherence_matrix(&self) -> Result<DecoherenceMatrix> {
        self.decoherence_matrix_capped(DEFAULT_BRANCH_CAP)
    }

    pub fn decoherence_matrix_capped(&self, cap: u128) -> Result<DecoherenceMatrix> {
        let branches = self.branch_list_capped(cap)?;
        let root = self.chain_root();
        let halves: Vec<HalfChain> =
            branches.iter().map(|h| self.half_chain(h, &root)).collect::<Result<_>>()?;
        let m = branches.len();
        let mut entries = DMatrix::zeros(m.max(1), m.max(1));
        for i in 0..m {
            for j in 0..m {
                entries[(i, j)] = HalfChain::pair(&halves[i], &halves[j]);
            }
        }
        Ok(DecoherenceMatrix { branches, entries: Matrix::from_dmatrix(entries) })
    }

    /// `tr(P_a ρ P_a)` for each final-slot index, the probability computed
    /// with only the final-time projector.
    pub fn final_state_probabilities(&self) -> Vec<f64> {
        let Some(last) = self.times.last() else {
            return Vec::new();
        };
        let rho = self.initial.density();
        last.projectors()
            .iter()
            .map(|p| {
                // tr(P ρ P) = tr(P ρ), real for Hermitian inputs.
                trace(&matmul(p.matrix(), &rho).expect("same dim")).re
            })
            .collect()
    }

    /// Check every invariant and report per-check outcomes. Construction is
    /// deliberately lenient so malformed families can be diagnosed here.
    pub fn validate(&self) -> ValidationReport {
        let eps = self.tol.eps_zero();
        let mut checks = Vec::new();

        match &self.initial {
            StateDescriptor::Pure(v) => {
                let dev = (v.norm() - 1.0).abs();
                checks.push(ValidationCheck {
                    name: "initial state normalized".into(),
                    status: if dev <= eps { CheckStatus::Pass } else { CheckStatus::Fail },
                    detail: format!("norm deviation {dev:.3e}"),
                });
            }
            StateDescriptor::Mixed(m) => {
                let herm = m.distance(&adjoint(m)).expect("square");
                let tr = trace(m);
                let tr_dev = ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt();
                let min_eig = m.hermitian_eigenvalues().first().copied().unwrap_or(0.0);
                let ok = herm <= eps && tr_dev <= eps && min_eig >= -eps;
                checks.push(ValidationCheck {
                    name: "initial density matrix valid".into(),
                    status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                    detail: format!(
                        "hermiticity {herm:.3e}, trace deviation {tr_dev:.3e}, min eigenvalue {min_eig:.3e}"
                    ),
                });
            }
        }

        for (t, slot) in self.times.iter().enumerate() {
            let ortho = slot.orthogonality_deviation();
            checks.push(ValidationCheck {
                name: format!("time {t} ({}) projectors pairwise orthogonal", slot.label()),
                status: if ortho <= eps { CheckStatus::Pass } else { CheckStatus::Fail },
                detail: format!("max ‖P_a P_b‖ {ortho:.3e}"),
            });
            let sum = slot.sum_matrix();
            let status = match Projector::from_matrix(sum, &self.tol) {
                Ok(_) => CheckStatus::Pass,
                Err(_) => CheckStatus::Fail,
            };
            checks.push(ValidationCheck {
                name: format!("time {t} ({}) summed projector valid", slot.label()),
                status,
                detail: String::new(),
            });
        }

        checks.push(self.excluded_branch_check());
        ValidationReport { checks }
    }

    /// Every product branch missing from an explicit list must carry
    /// probability at most `eps_prob`, so exclusions are innocuous.
    fn excluded_branch_check(&self) -> ValidationCheck {
        let name = "excluded branches innocuous".to_string();
        let Branches::Listed(list) = &self.branches else {
            return ValidationCheck {
                name,
                status: CheckStatus::Pass,
                detail: "branch set is the full product".into(),
            };
        };
        if self.product_count() > DEFAULT_BRANCH_CAP {
            return ValidationCheck {
                name,
                status: CheckStatus::Skipped,
                detail: format!("product of slot sizes exceeds {DEFAULT_BRANCH_CAP}"),
            };
        }
        let root = self.chain_root();
        let mut worst: Option<(Branch, f64)> = None;
        let mut excluded = 0usize;
        for h in self.product_branches() {
            if list.contains(&h) {
                continue;
            }
            excluded += 1;
            let p = self.half_chain(&h, &root).expect("valid product branch").norm_squared();
            if worst.as_ref().map(|(_, w)| p > *w).unwrap_or(true) {
                worst = Some((h, p));
            }
        }
        match worst {
            None => ValidationCheck {
                name,
                status: CheckStatus::Pass,
                detail: "no excluded branches".into(),
            },
            Some((h, p)) => ValidationCheck {
                name,
                status: if p <= self.tol.eps_prob() { CheckStatus::Pass } else { CheckStatus::Fail },
                detail: format!("{excluded} excluded; worst {h} with probability {p:.3e}"),
            },
        }
    }

    /// Conjugate every projector and the initial state by the same unitary.
    pub fn conjugated(&self, u: &Matrix) -> Result<Self> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: u.dim() });
        }
        let udag = adjoint(u);
        let initial = match &self.initial {
            StateDescriptor::Pure(v) => StateDescriptor::Pure(apply(u, v)?),
            StateDescriptor::Mixed(m) => StateDescriptor::Mixed(matmul(&matmul(u, m)?, &udag)?),
        };
        let mut times = Vec::with_capacity(self.times.len());
        for slot in &self.times {
            let mut outcomes = Vec::with_capacity(slot.len());
            for (label, p) in slot.outcome_labels().iter().zip(slot.projectors()) {
                let conj = matmul(&matmul(u, p.matrix())?, &udag)?;
                outcomes.push((label.clone(), Projector::from_matrix(conj, &self.tol)?));
            }
            times.push(TimeSlot::new(slot.label(), outcomes, &self.tol)?);
        }
        Self::new(initial, times, self.branches.clone(), self.tol)
    }

    /// Simulate `n` runs of sequential projective measurement with Lüders
    /// updates. Deterministic for a fixed seed.
    pub fn sample_branches(&self, n: u64, seed: u64) -> SampleReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<Branch, u64> = BTreeMap::new();
        let mut out_of_family = 0u64;

        enum Running {
            Pure(DVector<Complex64>),
            Mixed(DMatrix<Complex64>),
        }

        let start = match &self.initial {
            StateDescriptor::Pure(v) => {
                let mut psi = v.as_dvector().clone();
                let norm = psi.norm();
                if norm > 0.0 {
                    psi /= Complex64::new(norm, 0.0);
                }
                Running::Pure(psi)
            }
            StateDescriptor::Mixed(m) => {
                let mut rho = m.as_dmatrix().clone();
                let tr = rho.trace().re;
                if tr > 0.0 {
                    rho /= Complex64::new(tr, 0.0);
                }
                Running::Mixed(rho)
            }
        };

        'runs: for _ in 0..n {
            let mut state = match &start {
                Running::Pure(psi) => Running::Pure(psi.clone()),
                Running::Mixed(rho) => Running::Mixed(rho.clone()),
            };
            let mut indices = Vec::with_capacity(self.times.len());
            for slot in &self.times {
                let u: f64 = rng.gen();
                let mut cumulative = 0.0;
                let mut chosen: Option<usize> = None;
                for (a, p) in slot.projectors().iter().enumerate() {
                    let weight = match &state {
                        Running::Pure(psi) => (p.matrix().as_dmatrix() * psi).norm_squared(),
                        Running::Mixed(rho) => (p.matrix().as_dmatrix() * rho).trace().re,
                    };
                    cumulative += weight.max(0.0);
                    if u < cumulative {
                        chosen = Some(a);
                        break;
                    }
                }
                let Some(a) = chosen else {
                    // Fell through every projector: the slot is incomplete
                    // and this run leaves the family.
                    out_of_family += 1;
                    continue 'runs;
                };
                let p = slot.projectors()[a].matrix().as_dmatrix();
                state = match state {
                    Running::Pure(psi) => {
                        let mut next = p * psi;
                        let norm = next.norm();
                        next /= Complex64::new(norm, 0.0);
                        Running::Pure(next)
                    }
                    Running::Mixed(rho) => {
                        let mut next = p * rho * p.adjoint();
                        let tr = next.trace().re;
                        next /= Complex64::new(tr, 0.0);
                        Running::Mixed(next)
                    }
                };
                indices.push(a);
            }
            *counts.entry(Branch(indices)).or_insert(0) += 1;
        }

        SampleReport { counts, out_of_family, n }
    }
}

/// Free-function form of [`HistoryFamily::validate`].
pub fn validate_family(f: &HistoryFamily) -> ValidationReport {
    f.validate()
}
