use serde::{Deserialize, Serialize};

use super::{first_allowed, ConstructionError};
use crate::group::{Element, Group};
use crate::lazy_set::LazySet;

/// `g₁, g₂, …` with `d(gₙ, {g₁, …, gₙ₋₁}) ≥ n`, each the first element
/// doing so. Element `gᵢ` (1-based) is put on level `1 + v₂(i)`, so the
/// level sets `Aₙ = { gᵢ : level(i) ≤ n }` increase and every difference
/// `Aₙ₊₁ ∖ Aₙ` is infinite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseChain {
    pub elements: Vec<Element>,
    pub levels: Vec<u32>,
}

pub fn level_of(i: usize) -> u32 {
    1 + i.trailing_zeros()
}

pub fn build_sparse_chain(g: &Group, n_max: usize) -> Result<SparseChain, ConstructionError> {
    let mut elements: Vec<Element> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (x, _) = first_allowed(g, 0, |x| {
            elements.iter().any(|p| g.distance(x, p) < n as u32)
        });
        elements.push(x);
    }
    let chain = SparseChain {
        levels: (1..=n_max).map(level_of).collect(),
        elements,
    };
    chain.check(g)?;
    Ok(chain)
}

impl SparseChain {
    /// Every pair satisfies `d(gᵢ, gⱼ) ≥ max(i, j)`.
    pub fn check(&self, g: &Group) -> Result<(), ConstructionError> {
        for (j, y) in self.elements.iter().enumerate() {
            for (i, x) in self.elements[..j].iter().enumerate() {
                if g.distance(x, y) < j as u32 + 1 {
                    return Err(ConstructionError::Invariant {
                        invariant: "d(g_n, earlier) >= n",
                        stage: j + 1,
                        detail: format!("d(g_{}, g_{}) = {}", i + 1, j + 1, g.distance(x, y)),
                    });
                }
            }
        }
        Ok(())
    }

    /// `Aₙ` restricted to the emitted elements.
    pub fn level_set(&self, n: u32) -> Vec<Element> {
        self.elements
            .iter()
            .zip(&self.levels)
            .filter(|(_, &l)| l <= n)
            .map(|(x, _)| x.clone())
            .collect()
    }

    pub fn level_lazy(&self, g: &Group, n: u32) -> LazySet {
        LazySet::finite(g, self.level_set(n))
            .with_provenance(format!("construct:sparse:{}:level{n}", self.elements.len()))
    }
}
