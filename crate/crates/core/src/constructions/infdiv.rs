use serde::{Deserialize, Serialize};

use super::{first_allowed, BlockSet, ConstructionError};
use crate::divisibility::DivisionWitness;
use crate::group::{Element, ElementSet, Group};
use crate::lazy_set::{Frontier, LazySet, SetFile};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfDivState {
    pub group: String,
    pub n: usize,
    pub a: Vec<Element>,
    pub c: Vec<Element>,
    /// `Fₙ` in construction order.
    pub f: Vec<Element>,
}

#[derive(Clone, Debug)]
pub struct InfDiv {
    pub group: Group,
    pub state: InfDivState,
    pub blocks: BlockSet,
}

/// `aₙ₊₁` is the first element outside `Fₙ⁻¹Fₙ` and `cₙ` the first element
/// outside `Fₙ⁻¹Aₙ₋₁`.
pub fn build_infdiv(g: &Group, n_max: usize) -> Result<InfDiv, ConstructionError> {
    let mut f = vec![g.identity()];
    let mut prefix: Vec<Element> = Vec::new();
    let mut blocks = BlockSet {
        a: Vec::new(),
        c: Vec::new(),
    };
    for n in 1..=n_max {
        let fset: ElementSet = f.iter().cloned().collect();
        let (a, _) = first_allowed(g, 0, |x| f.iter().any(|y| fset.contains(&g.mul(y, x))));
        let shifted: Vec<Element> = f.iter().map(|x| g.mul(x, &a)).collect();
        f.extend(shifted);
        let aset: ElementSet = prefix.iter().cloned().collect();
        let (c, _) = first_allowed(g, 0, |x| f.iter().any(|y| aset.contains(&g.mul(y, x))));
        prefix.extend(f.iter().map(|x| g.mul(x, &c)));
        blocks.a.push(a);
        blocks.c.push(c);
        check_stage(&blocks, n, &f, &prefix)?;
    }
    Ok(InfDiv {
        group: g.clone(),
        state: InfDivState {
            group: g.name(),
            n: n_max,
            a: blocks.a.clone(),
            c: blocks.c.clone(),
            f,
        },
        blocks,
    })
}

fn check_stage(
    blocks: &BlockSet,
    n: usize,
    f: &[Element],
    prefix: &[Element],
) -> Result<(), ConstructionError> {
    let distinct: ElementSet = f.iter().cloned().collect();
    if distinct.len() != 1 << n {
        return Err(ConstructionError::Invariant {
            invariant: "|F| = 2^n",
            stage: n,
            detail: format!("|F| = {}", distinct.len()),
        });
    }
    let all: ElementSet = prefix.iter().cloned().collect();
    if all.len() != prefix.len() {
        return Err(ConstructionError::Invariant {
            invariant: "blocks disjoint",
            stage: n,
            detail: format!("c = {}", blocks.c[n - 1]),
        });
    }
    Ok(())
}

impl InfDiv {
    pub fn prefix(&self) -> Vec<Element> {
        self.blocks.prefix(&self.group, self.state.n)
    }

    pub fn set(&self) -> LazySet {
        LazySet::finite(&self.group, self.prefix())
            .with_provenance(format!("construct:infdiv:{}", self.state.n))
    }

    pub fn set_file(&self) -> SetFile {
        SetFile::new(
            &self.group,
            format!("construct:infdiv:{}", self.state.n),
            Frontier::Stage(self.state.n as u32),
            self.prefix(),
        )
    }

    /// Division witnesses for levels `1..n`.
    pub fn division_witnesses(&self) -> Vec<DivisionWitness> {
        (1..self.state.n)
            .filter_map(|l| self.blocks.division_witness(&self.group, l))
            .collect()
    }
}
