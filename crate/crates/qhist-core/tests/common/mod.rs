//! Shared test support: an independent brute-force oracle for chain
//! amplitudes over rank-one families, plus small deterministic generators.
//!
//! The oracle deliberately avoids every production code path: hand-rolled
//! complex arithmetic over plain slices, amplitudes multiplied inner product
//! by inner product.

#![allow(dead_code)]

use qhist_core::hilbert::{gram_schmidt, Matrix, Tolerance, Vector};
use num_complex::Complex64;

/// Hand-rolled complex pair, so the oracle shares nothing with the library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C {
    pub re: f64,
    pub im: f64,
}

pub const fn c(re: f64, im: f64) -> C {
    C { re, im }
}

impl C {
    pub fn conj(self) -> C {
        c(self.re, -self.im)
    }

    pub fn mul(self, other: C) -> C {
        c(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )
    }

    pub fn add(self, other: C) -> C {
        c(self.re + other.re, self.im + other.im)
    }

    pub fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// `⟨a|b⟩ = Σ conj(a_i)·b_i`.
pub fn oracle_inner(a: &[C], b: &[C]) -> C {
    let mut acc = c(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc = acc.add(x.conj().mul(*y));
    }
    acc
}

/// Chain amplitude of a rank-one path: `⟨v_T|v_{T−1}⟩ ⋯ ⟨v_1|ψ0⟩`.
pub fn oracle_amplitude(initial: &[C], path: &[&[C]]) -> C {
    let mut amp = c(1.0, 0.0);
    let mut prev = initial;
    for v in path {
        amp = oracle_inner(v, prev).mul(amp);
        prev = v;
    }
    amp
}

/// `|amplitude|²`.
pub fn oracle_probability(initial: &[C], path: &[&[C]]) -> f64 {
    oracle_amplitude(initial, path).abs2()
}

/// Decoherence functional of two rank-one paths:
/// `z_a · conj(z_b) · ⟨last_b|last_a⟩`-free form — for paths ending in the
/// same normalized vector this is `z_a conj(z_b)`; for different final
/// vectors the final overlap enters explicitly.
pub fn oracle_decoherence(initial: &[C], path_a: &[&[C]], path_b: &[&[C]]) -> C {
    let za = oracle_amplitude(initial, path_a);
    let zb = oracle_amplitude(initial, path_b);
    let last_a = path_a.last().expect("nonempty path");
    let last_b = path_b.last().expect("nonempty path");
    za.mul(zb.conj()).mul(oracle_inner(last_b, last_a))
}

/// Linearly positive value of a rank-one path: `Re(⟨0|v_T⟩ · z)`.
pub fn oracle_lp(initial: &[C], path: &[&[C]]) -> f64 {
    let z = oracle_amplitude(initial, path);
    let last = path.last().expect("nonempty path");
    oracle_inner(initial, last).mul(z).re
}

/// `tr((Σ C_h)ρ(Σ C_h)†)` for rank-one paths over a pure state:
/// `Σ_{a,b} z_a conj(z_b) ⟨last_b|last_a⟩`.
pub fn oracle_history_sum(initial: &[C], paths: &[&[&[C]]]) -> f64 {
    let mut acc = c(0.0, 0.0);
    for a in paths {
        for b in paths {
            let za = oracle_amplitude(initial, a);
            let zb = oracle_amplitude(initial, b);
            let cross = oracle_inner(b.last().unwrap(), a.last().unwrap());
            acc = acc.add(za.mul(zb.conj()).mul(cross));
        }
    }
    acc.re
}

/// The reference example's state vectors in the oracle's own representation.
pub struct ExampleVectors {
    pub v0: Vec<C>,
    pub v1: Vec<C>,
    pub v2: Vec<C>,
    pub v3: Vec<C>,
    pub v4: Vec<C>,
    pub v5: Vec<C>,
    pub v6: Vec<C>,
    pub v7: Vec<C>,
    pub v8: Vec<C>,
}

pub fn example_vectors() -> ExampleVectors {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ExampleVectors {
        v0: vec![c(0.5 * s, 0.5 * s), c(0.5 * s, 0.5 * s), c(0.5, -0.5)],
        v1: vec![c(0.5, 0.0), c(0.5, 0.0), c(s, 0.0)],
        v2: vec![c(0.5, 0.0), c(0.5, 0.0), c(-s, 0.0)],
        v3: vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        v4: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        v5: vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        v6: vec![c(0.5, -0.5), c(0.5, 0.5), c(0.0, 0.0)],
        v7: vec![c(0.5, 0.5), c(0.5, -0.5), c(0.0, 0.0)],
        v8: vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
    }
}

impl ExampleVectors {
    /// Vector for a branch position: time 0 → {v1,v2}, time 1 → {v3,v4,v5},
    /// time 2 → {v6,v7,v8}.
    pub fn at(&self, time: usize, index: usize) -> &[C] {
        match (time, index) {
            (0, 0) => &self.v1,
            (0, 1) => &self.v2,
            (1, 0) => &self.v3,
            (1, 1) => &self.v4,
            (1, 2) => &self.v5,
            (2, 0) => &self.v6,
            (2, 1) => &self.v7,
            (2, 2) => &self.v8,
            _ => panic!("no vector at time {time}, index {index}"),
        }
    }

    pub fn path(&self, indices: &[usize]) -> Vec<&[C]> {
        indices.iter().enumerate().map(|(t, &i)| self.at(t, i)).collect()
    }
}

/// Small deterministic generator for test-side randomness, independent of
/// the library's RNG plumbing.
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn next_signed(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

/// Random unitary built test-side: uniform complex entries orthonormalized
/// by the library's Gram–Schmidt.
pub fn random_unitary(dim: usize, seed: u64) -> Matrix {
    let tol = Tolerance::default();
    let mut rng = SplitMix64::new(seed);
    loop {
        let cols: Vec<Vector> = (0..dim)
            .map(|_| {
                Vector::new(
                    (0..dim)
                        .map(|_| Complex64::new(rng.next_signed(), rng.next_signed()))
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        if let Ok(frame) = gram_schmidt(&cols, &tol) {
            let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
            for (j, v) in frame.iter().enumerate() {
                for i in 0..dim {
                    entries[i * dim + j] = v.entries()[i];
                }
            }
            return Matrix::from_rows(dim, entries).unwrap();
        }
    }
}
