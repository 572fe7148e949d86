use serde::{Deserialize, Serialize};

use crate::divisibility::DivisionWitness;
use crate::group::{Element, Group};
use crate::lazy_set::LazySet;

/// The block structure shared by the infinitely divisible constructions:
/// `F₀ = {e}`, `Fₙ = Fₙ₋₁ ∪ Fₙ₋₁·aₙ` and `A = ⋃ₙ Fₙ·cₙ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSet {
    pub a: Vec<Element>,
    pub c: Vec<Element>,
}

impl BlockSet {
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    /// `Fₙ` in construction order.
    pub fn f(&self, g: &Group, n: usize) -> Vec<Element> {
        let mut f = vec![g.identity()];
        for a in &self.a[..n] {
            let shifted: Vec<Element> = f.iter().map(|x| g.mul(x, a)).collect();
            f.extend(shifted);
        }
        f
    }

    /// `Fₘ·cₘ` for `m = 1..=n`.
    pub fn blocks(&self, g: &Group, n: usize) -> Vec<Vec<Element>> {
        (1..=n)
            .map(|m| {
                self.f(g, m)
                    .iter()
                    .map(|x| g.mul(x, &self.c[m - 1]))
                    .collect()
            })
            .collect()
    }

    /// `Aₙ = ⋃_{m ≤ n} Fₘ·cₘ` in construction order.
    pub fn prefix(&self, g: &Group, n: usize) -> Vec<Element> {
        self.blocks(g, n).concat()
    }

    /// `Gₘ = {e, aₗ₊₁}⋯{e, aₘ}`, so that `Fₘ = Fₗ·Gₘ`.
    fn tail_product(&self, g: &Group, level: usize, m: usize) -> Vec<Element> {
        let mut out = vec![g.identity()];
        for a in &self.a[level..m] {
            let shifted: Vec<Element> = out.iter().map(|x| g.mul(x, a)).collect();
            out.extend(shifted);
        }
        out
    }

    /// The `2^level`-division of the prefix `A_N` (`N = self.stages()`,
    /// `level < N`): one part `x·⋃_{level<m≤N} Gₘ·cₘ` for each `x ∈ F_level`,
    /// with bounding witness `F_level·x⁻¹ ∪ A_level·c_{level+1}⁻¹·x⁻¹`.
    /// The witnesses are exact for the infinite set as well.
    pub fn division_witness(&self, g: &Group, level: usize) -> Option<DivisionWitness> {
        let n = self.stages();
        if level >= n {
            return None;
        }
        let tail: Vec<Element> = (level + 1..=n)
            .flat_map(|m| {
                let c = &self.c[m - 1];
                self.tail_product(g, level, m)
                    .into_iter()
                    .map(move |x| (x, c.clone()))
                    .collect::<Vec<_>>()
            })
            .map(|(x, c)| g.mul(&x, &c))
            .collect();
        let fl = self.f(g, level);
        let rest = self.prefix(g, level);
        let cinv = g.inv(&self.c[level]);
        let mut parts = Vec::with_capacity(fl.len());
        let mut witnesses = Vec::with_capacity(fl.len());
        for x in &fl {
            let xinv = g.inv(x);
            parts.push(LazySet::finite(g, tail.iter().map(|b| g.mul(x, b))));
            let mut w: Vec<Element> = fl.iter().map(|f| g.mul(f, &xinv)).collect();
            w.extend(rest.iter().map(|r| g.mul3(r, &cinv, &xinv)));
            g.sort(&mut w);
            w.dedup();
            witnesses.push(w);
        }
        Some(DivisionWitness { parts, witnesses })
    }

    /// `A_N ∖ F_level·B` where `B` is the part at the identity; equals `A_level`.
    pub fn remainder(&self, g: &Group, level: usize) -> Vec<Element> {
        let n = self.stages();
        let covered: std::collections::HashSet<Element> = (level + 1..=n)
            .flat_map(|m| self.f(g, m).into_iter().map(move |x| (x, m)))
            .map(|(x, m)| g.mul(&x, &self.c[m - 1]))
            .collect();
        self.prefix(g, n)
            .into_iter()
            .filter(|x| !covered.contains(x))
            .collect()
    }

    pub fn truncated(&self, n: usize) -> BlockSet {
        BlockSet {
            a: self.a[..n.min(self.a.len())].to_vec(),
            c: self.c[..n.min(self.c.len())].to_vec(),
        }
    }
}
