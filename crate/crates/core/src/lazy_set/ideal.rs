//! Left G-ideals given by generating sets: the ideal generated by
//! `A₁, A₂, …` contains `B` when `B ∝ Aₙ` for some `n`.

use serde::{Deserialize, Serialize};

use super::{LazySet, Window};
use crate::group::Element;
use crate::relations::{find_witness, Budgets, RelationError};
use crate::verdict::{Budget, Radii, Verdict};

#[derive(Clone, Debug)]
pub struct IdealSpec {
    pub name: String,
    pub generators: Vec<LazySet>,
}

impl IdealSpec {
    pub fn new(name: impl Into<String>, generators: Vec<LazySet>) -> Self {
        IdealSpec {
            name: name.into(),
            generators,
        }
    }

    /// The ideal of finite sets, generated by the balls of radius `1..=n`.
    pub fn finite_sets(group: &crate::group::Group, n: u32) -> Result<Self, RelationError> {
        let mut gens = Vec::new();
        for r in 1..=n {
            gens.push(
                LazySet::finite(group, group.ball(r)?.iter().cloned())
                    .with_provenance(format!("ball({r})")),
            );
        }
        Ok(IdealSpec::new("finite sets", gens))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealWitness {
    /// 1-based index of the generator `Aₙ`.
    pub generator: usize,
    /// `F` with `B ∩ W ⊆ F·Aₙ`.
    pub translators: Vec<Element>,
}

/// Tries the generators in order and returns the first `n` with a bounding
/// witness `B ∩ W ⊆ F·Aₙ`. A finite `B` lying inside the window is a global result.
pub fn ideal_contains(
    m: &IdealSpec,
    b: &LazySet,
    w: Window,
    budgets: Budgets,
) -> Result<Verdict<IdealWitness>, RelationError> {
    let mut last: Option<Verdict<Vec<Element>>> = None;
    for (i, a) in m.generators.iter().enumerate() {
        let v = match find_witness(b, a, w, budgets) {
            Ok(v) => v,
            Err(RelationError::EmptyTarget(_)) => continue,
            Err(e) => return Err(e),
        };
        if v.is_verified() {
            let global = b.is_finite() && b.elements()?.iter().all(|x| w.contains(b.group(), x));
            let mut out = v.map(|f| IdealWitness {
                generator: i + 1,
                translators: f,
            });
            if global {
                out.radii = out.radii.global();
            }
            return Ok(out);
        }
        last = Some(v);
    }
    let budget = last
        .as_ref()
        .and_then(|v| v.budget.clone())
        .unwrap_or(Budget {
            max_norm: Some(budgets.max_norm),
            max_size: Some(budgets.max_size),
            ..Budget::default()
        });
    let radii = last
        .as_ref()
        .map(|v| v.radii.clone())
        .unwrap_or_else(|| Radii::padded(w, budgets.max_norm));
    let mut out = Verdict::no_witness(radii, budget).with_note(format!(
        "no generator among {} of `{}` bounds the set",
        m.generators.len(),
        m.name
    ));
    out.counterexample = last.and_then(|v| v.counterexample);
    Ok(out)
}
