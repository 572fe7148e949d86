use serde::{Deserialize, Serialize};

use super::ConstructionError;
use crate::group::{Element, ElementSet, Group};

/// Largest exponent bit `k` for which `g^(2^k)` is computed.
pub const MAX_EXPONENT_BIT: u32 = 20;
/// Powers `g^m`, `1 ≤ m ≤ ORDER_BUDGET`, are checked to differ from `e`.
pub const ORDER_BUDGET: u32 = 64;

/// `π(x, y) = (x + y)(x + y + 1)/2 + y`.
pub fn cantor_pair(x: u32, y: u32) -> u32 {
    (x + y) * (x + y + 1) / 2 + y
}

/// Truncated sets `Iₙ = {e, g^m(n,1), …, g^m(n,t)}` with
/// `m(n, j) = 2^π(n−1, j−1)`. All exponents are distinct powers of two, so
/// the product maps `Φₙ(x₁, …, xₙ) = x₁⋯xₙ` are injective whenever `g` has
/// infinite order; `checked` records the per-level exhaustive check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectiveProductFamily {
    pub g: Element,
    pub sets: Vec<Vec<Element>>,
    /// `k(n, j)` for each non-identity member of `Iₙ`.
    pub exponent_bits: Vec<Vec<u32>>,
    /// Number of products checked for each `Φₙ`.
    pub checked: Vec<u64>,
}

fn power(grp: &Group, g: &Element, bit: u32) -> Element {
    let mut x = g.clone();
    for _ in 0..bit {
        x = grp.mul(&x, &x);
    }
    x
}

pub fn build_injective_products(
    grp: &Group,
    g: &Element,
    n_max: usize,
    truncation: usize,
) -> Result<InjectiveProductFamily, ConstructionError> {
    grp.check(g)?;
    let e = grp.identity();
    let mut x = g.clone();
    for _ in 1..=ORDER_BUDGET {
        if x == e {
            return Err(ConstructionError::FiniteOrder {
                element: g.to_string(),
                budget: ORDER_BUDGET,
            });
        }
        x = grp.mul(&x, g);
    }
    let glen = grp.length(g).max(1) as u64;
    let mut fam = InjectiveProductFamily {
        g: g.clone(),
        sets: Vec::new(),
        exponent_bits: Vec::new(),
        checked: Vec::new(),
    };
    for n in 1..=n_max as u32 {
        let bits: Vec<u32> = (1..=truncation as u32)
            .map(|j| cantor_pair(n - 1, j - 1))
            .collect();
        if let Some(&k) = bits
            .iter()
            .find(|&&k| k > MAX_EXPONENT_BIT || glen << k > 1 << 30)
        {
            return Err(ConstructionError::Exponent(k));
        }
        let mut set = vec![e.clone()];
        set.extend(bits.iter().map(|&k| power(grp, g, k)));
        fam.sets.push(set);
        fam.exponent_bits.push(bits);
        fam.checked.push(check_level(grp, &fam.sets)?);
    }
    Ok(fam)
}

/// Exhaustive injectivity of `Φₙ` on `I₁ × ⋯ × Iₙ`.
fn check_level(grp: &Group, sets: &[Vec<Element>]) -> Result<u64, ConstructionError> {
    let mut products = vec![(grp.identity(), Vec::<usize>::new())];
    for s in sets {
        products = products
            .iter()
            .flat_map(|(p, idx)| {
                s.iter().enumerate().map(move |(j, x)| {
                    let mut i = idx.clone();
                    i.push(j);
                    (grp.mul(p, x), i)
                })
            })
            .collect();
    }
    let mut seen = ElementSet::with_capacity(products.len());
    let mut first = std::collections::HashMap::new();
    for (p, idx) in &products {
        if !seen.insert(p.clone()) {
            return Err(ConstructionError::Invariant {
                invariant: "product map injective",
                stage: sets.len(),
                detail: format!("{p} = Φ{:?} = Φ{:?}", first[p], idx),
            });
        }
        first.insert(p.clone(), idx.clone());
    }
    Ok(products.len() as u64)
}

impl InjectiveProductFamily {
    /// `Φₙ` at a tuple of indices into `I₁, …, Iₙ`.
    pub fn product(&self, grp: &Group, idx: &[usize]) -> Element {
        idx.iter()
            .zip(&self.sets)
            .fold(grp.identity(), |acc, (&j, s)| grp.mul(&acc, &s[j]))
    }
}
