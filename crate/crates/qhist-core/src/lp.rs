//! Linearly positive probabilities: `p(h) = Re tr(C_h ρ)` and their
//! comparison against the Born/von Neumann chain probabilities.
//!
//! The formula agrees with the chain probabilities on weakly decoherent
//! families; on merely minimally decoherent ones it can disagree or go
//! negative, which is exactly what the report is for.

use crate::coarse::check_weak;
use crate::error::Result;
use crate::family::{Branch, HistoryFamily};
use crate::hilbert::{matmul, trace};

/// `Re tr(C_h ρ)`. No positivity guarantee; values are reported unclamped
/// because negativity is the diagnostic signal.
pub fn lp_value(f: &HistoryFamily, h: &Branch) -> Result<f64> {
    let chain = f.chain_operator(h)?;
    Ok(trace(&matmul(&chain, &f.initial().density())?).re)
}

/// One branch's linearly positive value next to its Born value.
#[derive(Debug, Clone)]
pub struct LpRow {
    pub branch: Branch,
    pub lp_value: f64,
    pub born_value: f64,
    pub lp_negative: bool,
    pub mismatch: bool,
}

/// Per-branch comparison table plus the family's weak-decoherence verdict.
#[derive(Debug, Clone)]
pub struct LpReport {
    pub rows: Vec<LpRow>,
    pub family_weak: bool,
}

impl LpReport {
    pub fn mismatches(&self) -> usize {
        self.rows.iter().filter(|r| r.mismatch).count()
    }

    pub fn negatives(&self) -> usize {
        self.rows.iter().filter(|r| r.lp_negative).count()
    }
}

pub fn lp_report(f: &HistoryFamily) -> Result<LpReport> {
    let eps = f.tolerance().eps_zero();
    let eps_prob = f.tolerance().eps_prob();
    let family_weak = check_weak(f)?.pass;
    let mut rows = Vec::new();
    for branch in f.branch_list()? {
        let lp = lp_value(f, &branch)?;
        let born = f.probability(&branch)?;
        rows.push(LpRow {
            branch,
            lp_value: lp,
            born_value: born,
            lp_negative: lp < -eps_prob,
            mismatch: (lp - born).abs() > eps,
        });
    }
    Ok(LpReport { rows, family_weak })
}
