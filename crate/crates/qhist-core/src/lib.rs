//! Consistent quantum histories toolkit.
//!
//! Models families of quantum histories (projectors at successive times over
//! an initial state), computes chain probabilities and the decoherence
//! functional, decides minimal / weak / medium decoherence, evaluates
//! linearly positive probabilities, renders trajectory graphs, and searches
//! numerically for families that are minimally but not weakly decoherent.

pub mod coarse;
pub mod error;
pub mod family;
pub mod graphs;
pub mod hilbert;
pub mod lp;
pub mod search;

pub use error::{Error, Result};
pub use family::{
    Branch, Branches, DecoherenceMatrix, HistoryFamily, SampleReport, StateDescriptor, TimeSlot,
    ValidationReport,
};
pub use hilbert::{Matrix, Projector, Tolerance, Vector};
