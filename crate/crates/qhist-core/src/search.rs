//! Builders and generators: the built-in reference family, random
//! rank-one families, perturbations, and a stochastic search for families
//! that satisfy every projection sum rule while violating weak decoherence.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coarse::{bell_number, set_partitions, DEFAULT_GRAINING_CAP};
use crate::error::{Error, Result};
use crate::family::{Branch, Branches, HistoryFamily, StateDescriptor, TimeSlot};
use crate::hilbert::{gram_schmidt, Matrix, Tolerance, Vector};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The built-in ten-branch example on a three-dimensional space: a family
/// that is minimally but not weakly decoherent.
///
/// Three times. The first holds two orthonormal states spanning the
/// subspace containing the initial state, the second a complete basis, and
/// the third a complete basis rotated against the second; the ten branches
/// omit the eight zero-amplitude paths.
pub fn example_family() -> HistoryFamily {
    let tol = Tolerance::default();
    let s = std::f64::consts::FRAC_1_SQRT_2;

    let v1 = Vector::new(vec![c(0.5, 0.0), c(0.5, 0.0), c(s, 0.0)]).unwrap();
    let v2 = Vector::new(vec![c(0.5, 0.0), c(0.5, 0.0), c(-s, 0.0)]).unwrap();
    let v3 = Vector::basis(3, 0).unwrap();
    let v4 = Vector::basis(3, 1).unwrap();
    let v5 = Vector::basis(3, 2).unwrap();
    let v6 = Vector::new(vec![c(0.5, -0.5), c(0.5, 0.5), c(0.0, 0.0)]).unwrap();
    let v7 = Vector::new(vec![c(0.5, 0.5), c(0.5, -0.5), c(0.0, 0.0)]).unwrap();
    let v8 = Vector::basis(3, 2).unwrap();
    // |0⟩ = (1/√2)|1⟩ + (i/√2)|2⟩
    let v0 = Vector::new(vec![
        c(0.5 * s, 0.5 * s),
        c(0.5 * s, 0.5 * s),
        c(0.5, -0.5),
    ])
    .unwrap();

    let slot_j = TimeSlot::from_vector_groups(
        "j",
        vec![("1".into(), vec![v1]), ("2".into(), vec![v2])],
        &tol,
    )
    .unwrap();
    let slot_k = TimeSlot::from_vector_groups(
        "k",
        vec![("3".into(), vec![v3]), ("4".into(), vec![v4]), ("5".into(), vec![v5])],
        &tol,
    )
    .unwrap();
    let slot_f = TimeSlot::from_vector_groups(
        "f",
        vec![("6".into(), vec![v6]), ("7".into(), vec![v7]), ("8".into(), vec![v8])],
        &tol,
    )
    .unwrap();

    let branches = vec![
        Branch(vec![0, 0, 0]), // 1▷3▷6
        Branch(vec![0, 1, 0]), // 1▷4▷6
        Branch(vec![1, 0, 0]), // 2▷3▷6
        Branch(vec![1, 1, 0]), // 2▷4▷6
        Branch(vec![0, 0, 1]), // 1▷3▷7
        Branch(vec![0, 1, 1]), // 1▷4▷7
        Branch(vec![1, 0, 1]), // 2▷3▷7
        Branch(vec![1, 1, 1]), // 2▷4▷7
        Branch(vec![0, 2, 2]), // 1▷5▷8
        Branch(vec![1, 2, 2]), // 2▷5▷8
    ];

    HistoryFamily::new(
        StateDescriptor::Pure(v0),
        vec![slot_j, slot_k, slot_f],
        Branches::Listed(branches),
        tol,
    )
    .unwrap()
}

fn random_complex_vectors(dim: usize, cols: usize, rng: &mut ChaCha8Rng) -> Vec<Vector> {
    (0..cols)
        .map(|_| {
            let entries: Vec<Complex64> = (0..dim)
                .map(|_| {
                    // Box-Muller from uniform draws keeps the generator
                    // stream identical across platforms.
                    let (u1, u2): (f64, f64) = (rng.gen(), rng.gen());
                    let (u3, u4): (f64, f64) = (rng.gen(), rng.gen());
                    let re = (-2.0 * u1.max(1e-300).ln()).sqrt()
                        * (2.0 * std::f64::consts::PI * u2).cos();
                    let im = (-2.0 * u3.max(1e-300).ln()).sqrt()
                        * (2.0 * std::f64::consts::PI * u4).cos();
                    c(re, im)
                })
                .collect();
            Vector::new(entries).unwrap()
        })
        .collect()
}

fn random_frame(dim: usize, cols: usize, rng: &mut ChaCha8Rng, tol: &Tolerance) -> Vec<Vector> {
    loop {
        let candidate = random_complex_vectors(dim, cols, rng);
        if let Ok(frame) = gram_schmidt(&candidate, tol) {
            return frame;
        }
        // Degenerate Gaussian draws have measure zero; redraw.
    }
}

fn random_unit_vector(dim: usize, rng: &mut ChaCha8Rng, tol: &Tolerance) -> Vector {
    random_frame(dim, 1, rng, tol).pop().expect("one column")
}

/// Random rank-one family: each slot is the first `k` columns of an
/// orthonormalized Gaussian matrix, the initial state a random unit vector,
/// branches the full product. Deterministic per seed.
pub fn random_family(dim: usize, slot_sizes: &[usize], seed: u64) -> Result<HistoryFamily> {
    let tol = Tolerance::default();
    for &k in slot_sizes {
        if k == 0 || k > dim {
            return Err(Error::InvalidSearchParams(format!(
                "slot size {k} impossible at dimension {dim}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = random_unit_vector(dim, &mut rng, &tol);
    let mut times = Vec::with_capacity(slot_sizes.len());
    for (t, &k) in slot_sizes.iter().enumerate() {
        let frame = random_frame(dim, k, &mut rng, &tol);
        let groups = frame
            .into_iter()
            .enumerate()
            .map(|(i, v)| (i.to_string(), vec![v]))
            .collect();
        times.push(TimeSlot::from_vector_groups(format!("t{}", t + 1), groups, &tol)?);
    }
    HistoryFamily::new(StateDescriptor::Pure(initial), times, Branches::All, tol)
}

fn random_hermitian_unit(dim: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let cols = random_complex_vectors(dim, dim, rng);
    let mut entries = vec![c(0.0, 0.0); dim * dim];
    for (j, v) in cols.iter().enumerate() {
        for i in 0..dim {
            entries[i * dim + j] = v.entries()[i];
        }
    }
    let a = Matrix::from_rows(dim, entries).expect("finite Gaussian entries");
    let h = a.add(&crate::hilbert::adjoint(&a)).expect("same dim").scale(c(0.5, 0.0));
    let max = h.max_norm();
    if max > 0.0 {
        h.scale(c(1.0 / max, 0.0))
    } else {
        h
    }
}

/// Apply an independent random unitary `exp(i·magnitude·H)` to each slot
/// frame, leaving the initial state alone. `magnitude` zero returns the
/// family unchanged.
pub fn perturb_family(f: &HistoryFamily, magnitude: f64, seed: u64) -> Result<HistoryFamily> {
    if magnitude < 0.0 {
        return Err(Error::InvalidSearchParams("perturbation magnitude must be ≥ 0".into()));
    }
    if magnitude == 0.0 {
        return Ok(f.clone());
    }
    let tol = *f.tolerance();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::with_capacity(f.num_times());
    for slot in f.times() {
        let u = random_hermitian_unit(f.dim(), &mut rng).unitary_exp(magnitude);
        let udag = crate::hilbert::adjoint(&u);
        let mut outcomes = Vec::with_capacity(slot.len());
        for (label, p) in slot.outcome_labels().iter().zip(slot.projectors()) {
            let rotated =
                crate::hilbert::matmul(&crate::hilbert::matmul(&u, p.matrix())?, &udag)?;
            outcomes.push((label.clone(), crate::hilbert::Projector::from_matrix(rotated, &tol)?));
        }
        times.push(TimeSlot::new(slot.label(), outcomes, &tol)?);
    }
    HistoryFamily::new(f.initial().clone(), times, f.branches().clone(), tol)
}

/// Parameters of the minimal-not-weak search.
#[derive(Debug, Clone)]
pub struct SearchParams {
    pub dim: usize,
    pub slot_sizes: Vec<usize>,
    pub seed: u64,
    /// Max objective evaluations.
    pub budget: u64,
    /// A candidate counts as found when its worst sum-rule residual is at
    /// most this.
    pub residual_target: f64,
    /// … and its largest `|Re D(h,h′)|` is at least this.
    pub violation_floor: f64,
    /// Optional family to evaluate and refine first, before random
    /// restarts.
    pub start: Option<HistoryFamily>,
}

impl SearchParams {
    pub fn new(dim: usize, slot_sizes: Vec<usize>, seed: u64, budget: u64) -> Result<Self> {
        let params = Self {
            dim,
            slot_sizes,
            seed,
            budget,
            residual_target: 1e-8,
            violation_floor: 1e-2,
            start: None,
        };
        params.check()?;
        Ok(params)
    }

    fn check(&self) -> Result<()> {
        if self.budget < 1 {
            return Err(Error::InvalidSearchParams("budget must be ≥ 1".into()));
        }
        if self.slot_sizes.is_empty() {
            return Err(Error::InvalidSearchParams("need at least one time slot".into()));
        }
        for &k in &self.slot_sizes {
            if k == 0 || k > self.dim {
                return Err(Error::InvalidSearchParams(format!(
                    "slot size {k} impossible at dimension {}",
                    self.dim
                )));
            }
        }
        if !(self.residual_target > 0.0 && self.residual_target < self.violation_floor) {
            return Err(Error::InvalidSearchParams(
                "need 0 < residual_target < violation_floor".into(),
            ));
        }
        Ok(())
    }
}

/// Search result. `found` implies the two thresholds hold for `family`;
/// otherwise `family` is the best candidate seen.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub found: bool,
    pub family: HistoryFamily,
    pub minimal_residual: f64,
    pub max_weak_violation: f64,
    pub evaluations_used: u64,
}

/// Weight of the capped violation reward against the squared residuals.
const VIOLATION_WEIGHT: f64 = 1e-2;
/// Refinement stops once the perturbation step shrinks below this.
const MIN_STEP: f64 = 1e-12;
const INITIAL_STEP: f64 = 0.2;

#[derive(Debug, Clone)]
struct Evaluation {
    objective: f64,
    minimal_residual: f64,
    max_weak_violation: f64,
}

/// Search point: rank-one frames per slot plus the initial vector.
#[derive(Clone)]
struct Candidate {
    initial: DVector<Complex64>,
    frames: Vec<Vec<DVector<Complex64>>>,
}

impl Candidate {
    fn from_family(f: &HistoryFamily) -> Result<Self> {
        let StateDescriptor::Pure(psi) = f.initial() else {
            return Err(Error::InvalidSearchParams("search requires a pure initial state".into()));
        };
        let mut frames = Vec::with_capacity(f.num_times());
        for (t, slot) in f.times().iter().enumerate() {
            let mut frame = Vec::with_capacity(slot.len());
            for (i, p) in slot.projectors().iter().enumerate() {
                if p.rank() != 1 {
                    return Err(Error::NonRankOneSlot { time: t, index: i, rank: p.rank() });
                }
                frame.push(principal_vector(p.matrix()));
            }
            frames.push(frame);
        }
        Ok(Self { initial: psi.as_dvector().clone(), frames })
    }

    fn to_family(&self, tol: &Tolerance) -> Result<HistoryFamily> {
        let mut times = Vec::with_capacity(self.frames.len());
        for (t, frame) in self.frames.iter().enumerate() {
            let groups = frame
                .iter()
                .enumerate()
                .map(|(i, v)| (i.to_string(), vec![Vector::from_dvector(v.clone())]))
                .collect();
            times.push(TimeSlot::from_vector_groups(format!("t{}", t + 1), groups, tol)?);
        }
        HistoryFamily::new(
            StateDescriptor::Pure(Vector::from_dvector(self.initial.clone())),
            times,
            Branches::All,
            *tol,
        )
    }

    /// Coordinates: one elementary Hermitian generator per frame plus one
    /// set for the initial vector.
    fn coordinate_count(&self, dim: usize) -> usize {
        (self.frames.len() + 1) * dim * dim
    }

    /// Apply `exp(i·step·G)` to one frame (or the initial vector), where `G`
    /// is the elementary Hermitian generator selected by `coord`.
    fn nudged(&self, dim: usize, coord: usize, step: f64) -> Self {
        let per = dim * dim;
        let target = coord / per;
        let u = hermitian_generator(dim, coord % per).unitary_exp(step);
        let u = u.as_dmatrix();
        let mut next = self.clone();
        if target == 0 {
            next.initial = u * &next.initial;
        } else {
            for v in &mut next.frames[target - 1] {
                *v = u * &*v;
            }
        }
        next
    }

    /// Restore exact orthonormality lost to float drift across many nudges.
    fn reorthonormalized(&self, tol: &Tolerance) -> Result<Self> {
        let mut next = self.clone();
        let norm = next.initial.norm();
        if norm > 0.0 {
            next.initial /= c(norm, 0.0);
        }
        for frame in &mut next.frames {
            let wrapped: Vec<Vector> =
                frame.iter().map(|v| Vector::from_dvector(v.clone())).collect();
            let clean = gram_schmidt(&wrapped, tol)?;
            *frame = clean.into_iter().map(|v| v.as_dvector().clone()).collect();
        }
        Ok(next)
    }

    /// Chain amplitudes of every product branch, last time fastest. Needs
    /// orthonormal frames; the final-time overlap matrix is then the
    /// identity, so `D(h,h′) = z_h·conj(z_{h′})·δ(final)`.
    fn amplitudes(&self, sizes: &[usize]) -> Vec<Complex64> {
        // Per-time transfer inner products.
        let first: Vec<Complex64> =
            self.frames[0].iter().map(|v| v.dotc(&self.initial)).collect();
        let transfer: Vec<Vec<Vec<Complex64>>> = (1..self.frames.len())
            .map(|t| {
                self.frames[t]
                    .iter()
                    .map(|v| self.frames[t - 1].iter().map(|w| v.dotc(w)).collect())
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(sizes.iter().product());
        let mut odometer = vec![0usize; sizes.len()];
        loop {
            let mut z = first[odometer[0]];
            for t in 1..sizes.len() {
                z *= transfer[t - 1][odometer[t]][odometer[t - 1]];
            }
            out.push(z);
            let mut t = sizes.len();
            let mut done = true;
            while t > 0 {
                t -= 1;
                odometer[t] += 1;
                if odometer[t] < sizes[t] {
                    done = false;
                    break;
                }
                odometer[t] = 0;
            }
            if done {
                return out;
            }
        }
    }
}

/// Dominant eigenvector of a rank-one projector.
fn principal_vector(p: &Matrix) -> DVector<Complex64> {
    let eig = p.as_dmatrix().clone().symmetric_eigen();
    let mut best = 0;
    for (i, l) in eig.eigenvalues.iter().enumerate() {
        if l > &eig.eigenvalues[best] {
            best = i;
        }
    }
    let mut v: DVector<Complex64> = eig.eigenvectors.column(best).into();
    let norm = v.norm();
    if norm > 0.0 {
        v /= c(norm, 0.0);
    }
    v
}

/// Elementary Hermitian basis matrix number `index`: diagonal units first,
/// then real and imaginary off-diagonal pairs.
fn hermitian_generator(dim: usize, index: usize) -> Matrix {
    let mut entries = vec![c(0.0, 0.0); dim * dim];
    if index < dim {
        entries[index * dim + index] = c(1.0, 0.0);
        return Matrix::from_rows(dim, entries).expect("finite");
    }
    let k = index - dim;
    let pair = k / 2;
    let imaginary = k % 2 == 1;
    let mut count = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            if count == pair {
                if imaginary {
                    entries[i * dim + j] = c(0.0, -1.0);
                    entries[j * dim + i] = c(0.0, 1.0);
                } else {
                    entries[i * dim + j] = c(1.0, 0.0);
                    entries[j * dim + i] = c(1.0, 0.0);
                }
                return Matrix::from_rows(dim, entries).expect("finite");
            }
            count += 1;
        }
    }
    Matrix::from_rows(dim, entries).expect("finite")
}

/// Objective geometry precomputed from the slot sizes: for every combined
/// coarse-graining, the same-final branch pairs of every multi-branch cell.
/// The sum-rule residual of a cell is exactly the sum of its cross
/// decoherence terms `2·Re z_i conj(z_j)` over those pairs.
struct Geometry {
    sizes: Vec<usize>,
    finals: Vec<usize>,
    /// Per graining, per cell: index pairs `(i, j)` with matching finals.
    grainings: Vec<Vec<Vec<(usize, usize)>>>,
}

fn product_index(indices: &[usize], sizes: &[usize]) -> usize {
    let mut acc = 0;
    for (&i, &s) in indices.iter().zip(sizes) {
        acc = acc * s + i;
    }
    acc
}

impl Geometry {
    fn new(sizes: &[usize], cap: u128) -> Result<Self> {
        let count: u128 = sizes.iter().map(|&s| bell_number(s)).product();
        if count > cap {
            return Err(Error::TooManyGrainings { count, cap });
        }
        let total: usize = sizes.iter().product();
        let mut finals = vec![0usize; total];
        {
            let mut odometer = vec![0usize; sizes.len()];
            for slot in finals.iter_mut() {
                *slot = *odometer.last().expect("at least one time");
                let mut t = sizes.len();
                while t > 0 {
                    t -= 1;
                    odometer[t] += 1;
                    if odometer[t] < sizes[t] {
                        break;
                    }
                    odometer[t] = 0;
                }
            }
        }

        let per_time: Vec<Vec<crate::coarse::Partition>> =
            sizes.iter().map(|&s| set_partitions(s)).collect();
        let mut grainings = Vec::new();
        let mut indices = vec![0usize; per_time.len()];
        loop {
            let parts: Vec<&crate::coarse::Partition> =
                indices.iter().zip(&per_time).map(|(&i, ps)| &ps[i]).collect();
            if parts.iter().any(|p| !p.is_identity()) {
                let mut cells = Vec::new();
                let block_counts: Vec<usize> = parts.iter().map(|p| p.num_blocks()).collect();
                let mut cell_odo = vec![0usize; block_counts.len()];
                loop {
                    // Members of this cell: the Cartesian product of blocks.
                    let blocks: Vec<&Vec<usize>> = cell_odo
                        .iter()
                        .zip(&parts)
                        .map(|(&b, p)| &p.blocks()[b])
                        .collect();
                    let mut members = Vec::new();
                    let mut member_odo = vec![0usize; blocks.len()];
                    loop {
                        let branch: Vec<usize> = member_odo
                            .iter()
                            .zip(&blocks)
                            .map(|(&k, block)| block[k])
                            .collect();
                        members.push(product_index(&branch, sizes));
                        let mut t = blocks.len();
                        let mut done = true;
                        while t > 0 {
                            t -= 1;
                            member_odo[t] += 1;
                            if member_odo[t] < blocks[t].len() {
                                done = false;
                                break;
                            }
                            member_odo[t] = 0;
                        }
                        if done {
                            break;
                        }
                    }
                    if members.len() > 1 {
                        let mut pairs = Vec::new();
                        for (a, &i) in members.iter().enumerate() {
                            for &j in &members[a + 1..] {
                                if finals[i] == finals[j] {
                                    pairs.push((i, j));
                                }
                            }
                        }
                        if !pairs.is_empty() {
                            cells.push(pairs);
                        }
                    }
                    let mut t = block_counts.len();
                    let mut done = true;
                    while t > 0 {
                        t -= 1;
                        cell_odo[t] += 1;
                        if cell_odo[t] < block_counts[t] {
                            done = false;
                            break;
                        }
                        cell_odo[t] = 0;
                    }
                    if done {
                        break;
                    }
                }
                grainings.push(cells);
            }
            let mut t = per_time.len();
            let mut done = true;
            while t > 0 {
                t -= 1;
                indices[t] += 1;
                if indices[t] < per_time[t].len() {
                    done = false;
                    break;
                }
                indices[t] = 0;
            }
            if done {
                break;
            }
        }
        Ok(Self { sizes: sizes.to_vec(), finals, grainings })
    }

    fn evaluate(&self, candidate: &Candidate, violation_floor: f64) -> Evaluation {
        let z = candidate.amplitudes(&self.sizes);
        let mut sum_sq = 0.0f64;
        let mut minimal_residual = 0.0f64;
        for cells in &self.grainings {
            let mut worst = 0.0f64;
            for pairs in cells {
                let mut residual = 0.0f64;
                for &(i, j) in pairs {
                    residual += 2.0 * (z[i] * z[j].conj()).re;
                }
                worst = worst.max(residual.abs());
            }
            sum_sq += worst * worst;
            minimal_residual = minimal_residual.max(worst);
        }
        let mut max_weak_violation = 0.0f64;
        for i in 0..z.len() {
            for j in (i + 1)..z.len() {
                if self.finals[i] == self.finals[j] {
                    max_weak_violation = max_weak_violation.max((z[i] * z[j].conj()).re.abs());
                }
            }
        }
        let capped = max_weak_violation.min(violation_floor);
        Evaluation {
            objective: sum_sq - VIOLATION_WEIGHT * capped * capped,
            minimal_residual,
            max_weak_violation,
        }
    }
}

/// Stochastic search for a family that passes every projection sum rule
/// while violating weak decoherence: random restarts refined by coordinate
/// perturbations with a shrinking step. Deterministic per seed; returns the
/// first candidate meeting both thresholds, else the best seen when the
/// budget runs out (`found = false`).
pub fn search_minimal_not_weak(params: &SearchParams) -> Result<SearchOutcome> {
    params.check()?;
    let tol = Tolerance::default();
    let geometry = Geometry::new(&params.slot_sizes, DEFAULT_GRAINING_CAP)?;
    // Slightly stricter internal thresholds keep the found family on the
    // right side of both targets under the independent re-check.
    let found = |eval: &Evaluation| {
        eval.minimal_residual <= 0.99 * params.residual_target
            && eval.max_weak_violation >= 1.01 * params.violation_floor
    };

    let mut evaluations = 0u64;
    let mut restart_rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(Evaluation, Candidate)> = None;
    let mut restart_index = 0u64;

    while evaluations < params.budget {
        let candidate = match (&params.start, restart_index) {
            (Some(start), 0) => Candidate::from_family(start)?,
            _ => {
                let seed = restart_rng.gen::<u64>();
                Candidate::from_family(&random_family(params.dim, &params.slot_sizes, seed)?)?
            }
        };
        restart_index += 1;

        let mut current = candidate;
        let mut current_eval = geometry.evaluate(&current, params.violation_floor);
        evaluations += 1;
        if found(&current_eval) {
            return finish(true, current, current_eval, evaluations, &tol);
        }
        if best.as_ref().map(|(e, _)| current_eval.objective < e.objective).unwrap_or(true) {
            best = Some((current_eval.clone(), current.clone()));
        }

        // Local refinement: adaptive coordinate perturbation, halving the
        // step after a sweep with no improvement.
        let coords = current.coordinate_count(params.dim);
        let mut step = INITIAL_STEP;
        'refine: while step >= MIN_STEP && evaluations < params.budget {
            let mut improved = false;
            for coord in 0..coords {
                for sign in [1.0f64, -1.0] {
                    if evaluations >= params.budget {
                        break 'refine;
                    }
                    let trial = current.nudged(params.dim, coord, sign * step);
                    let eval = geometry.evaluate(&trial, params.violation_floor);
                    evaluations += 1;
                    if found(&eval) {
                        return finish(true, trial, eval, evaluations, &tol);
                    }
                    if eval.objective < current_eval.objective {
                        current = trial;
                        current_eval = eval;
                        improved = true;
                        break;
                    }
                }
            }
            if best.as_ref().map(|(e, _)| current_eval.objective < e.objective).unwrap_or(true) {
                best = Some((current_eval.clone(), current.clone()));
            }
            if !improved {
                step *= 0.5;
                // Accumulated unitary drift would otherwise eat into the
                // deep-residual regime.
                current = current.reorthonormalized(&tol)?;
                current_eval = geometry.evaluate(&current, params.violation_floor);
                evaluations += 1;
                if found(&current_eval) {
                    return finish(true, current, current_eval, evaluations, &tol);
                }
            }
        }
    }

    let (eval, candidate) = best.expect("budget ≥ 1 guarantees one evaluation");
    finish(false, candidate, eval, evaluations, &tol)
}

fn finish(
    found: bool,
    candidate: Candidate,
    eval: Evaluation,
    evaluations_used: u64,
    tol: &Tolerance,
) -> Result<SearchOutcome> {
    Ok(SearchOutcome {
        found,
        family: candidate.to_family(tol)?,
        minimal_residual: eval.minimal_residual,
        max_weak_violation: eval.max_weak_violation,
        evaluations_used,
    })
}
