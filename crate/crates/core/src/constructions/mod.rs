//! Deterministic staged constructions. Every existential choice is the
//! first element in canonical order outside an explicitly described finite
//! forbidden set.

mod blocks;
mod forbidden;
mod infdiv;
mod injective;
mod isolated;
mod sparse;
mod thm_a;

pub use blocks::BlockSet;
pub use infdiv::{build_infdiv, InfDiv, InfDivState};
pub use injective::{build_injective_products, cantor_pair, InjectiveProductFamily};
pub use isolated::{build_isolated_absorbing, IsolatedAbsorbing};
pub use sparse::{build_sparse_chain, SparseChain};
pub use thm_a::{build_thm_a, check_thm_a_state, resume_thm_a, StageStats, ThmA, ThmAState};

use rayon::prelude::*;
use thiserror::Error;

use crate::group::{Element, Group, GroupError};
use crate::lazy_set::SetError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("invariant ({invariant}) fails at stage {stage}: {detail}")]
    Invariant {
        invariant: &'static str,
        stage: usize,
        detail: String,
    },
    #[error("{element} has order at most {budget}")]
    FiniteOrder { element: String, budget: u32 },
    #[error("exponent 2^{0} is beyond the supported range")]
    Exponent(u32),
    #[error("word of length {0} exceeds the packed word limit")]
    WordTooLong(usize),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Set(#[from] SetError),
}

const SCAN_BATCH: usize = 256;

/// First element of length at least `start` (canonical order) that is not
/// forbidden, and the number of forbidden candidates before it.
pub(crate) fn first_allowed(
    group: &Group,
    start: u32,
    forbidden: impl Fn(&Element) -> bool + Sync,
) -> (Element, u64) {
    let mut rejected = 0u64;
    let mut it = group.iter_from(start);
    loop {
        let batch: Vec<Element> = it.by_ref().take(SCAN_BATCH).collect();
        let flags: Vec<bool> = batch.par_iter().map(&forbidden).collect();
        match flags.iter().position(|f| !f) {
            Some(i) => return (batch[i].clone(), rejected + i as u64),
            None => rejected += batch.len() as u64,
        }
    }
}
