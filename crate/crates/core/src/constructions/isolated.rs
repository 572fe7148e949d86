use serde::{Deserialize, Serialize};

use super::{first_allowed, ConstructionError};
use crate::divisibility::{GapCertificate, GapPair};
use crate::group::{Element, Group};
use crate::lazy_set::{Frontier, LazySet, SetFile};

/// `A = {g₁, g₂, …} ∪ ⋃ₙ ball(n)·hₙ`, absorbing for every finite set yet
/// carrying points of unbounded isolation.
///
/// With `S` the part built so far, `gₙ` is the first element with
/// `d(gₙ, S) ≥ n` (`g₁ = e`) and `hₙ` the first with
/// `d(ball(n)·hₙ, S ∪ {gₙ}) ≥ n + 1`. The extra unit keeps blocks from
/// touching, so `hₙ` is also the first `g` with `ball(n)·g ⊆ A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsolatedAbsorbing {
    pub n: usize,
    pub g: Vec<Element>,
    pub h: Vec<Element>,
    /// Elements in construction order: `gₙ` followed by its block.
    pub elements: Vec<Element>,
}

pub fn build_isolated_absorbing(
    grp: &Group,
    n_max: usize,
) -> Result<IsolatedAbsorbing, ConstructionError> {
    let mut out = IsolatedAbsorbing {
        n: n_max,
        g: Vec::new(),
        h: Vec::new(),
        elements: Vec::new(),
    };
    for n in 1..=n_max as u32 {
        let s = &out.elements;
        let (gn, _) = first_allowed(grp, 0, |x| s.iter().any(|y| grp.distance(x, y) < n));
        out.elements.push(gn.clone());
        let s = &out.elements;
        let (hn, _) = first_allowed(grp, 0, |x| s.iter().any(|y| grp.distance(x, y) <= 2 * n));
        let block = grp.ball(n)?;
        out.elements.extend(block.iter().map(|f| grp.mul(f, &hn)));
        out.g.push(gn);
        out.h.push(hn);
    }
    Ok(out)
}

impl IsolatedAbsorbing {
    pub fn set(&self, grp: &Group) -> LazySet {
        LazySet::finite(grp, self.elements.iter().cloned())
            .with_provenance(format!("construct:isolated:{}", self.n))
    }

    pub fn set_file(&self, grp: &Group) -> SetFile {
        SetFile::new(
            grp,
            format!("construct:isolated:{}", self.n),
            Frontier::Stage(self.n as u32),
            self.elements.clone(),
        )
    }

    /// `isolation(gₙ) ≥ n` for every stage.
    pub fn certificate(&self) -> GapCertificate {
        GapCertificate {
            pairs: self
                .g
                .iter()
                .enumerate()
                .map(|(i, g)| GapPair {
                    g: g.clone(),
                    isolation: i as u32 + 1,
                })
                .collect(),
            frontier: self.n as u32,
        }
    }
}
