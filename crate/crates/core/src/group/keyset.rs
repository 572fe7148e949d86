use std::collections::HashSet;

use super::Element;

/// Hash set of elements; elements that pack are stored as 128-bit keys.
#[derive(Clone, Debug, Default)]
pub struct ElementSet {
    packed: HashSet<u128>,
    plain: HashSet<Element>,
}

impl ElementSet {
    pub fn new() -> Self {
        ElementSet::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        ElementSet {
            packed: HashSet::with_capacity(n),
            plain: HashSet::new(),
        }
    }

    pub fn insert(&mut self, x: Element) -> bool {
        match x.pack() {
            Some(k) => self.packed.insert(k),
            None => self.plain.insert(x),
        }
    }

    pub fn contains(&self, x: &Element) -> bool {
        match x.pack() {
            Some(k) => self.packed.contains(&k),
            None => self.plain.contains(x),
        }
    }

    pub fn len(&self) -> usize {
        self.packed.len() + self.plain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl FromIterator<Element> for ElementSet {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        let mut s = ElementSet::new();
        for x in iter {
            s.insert(x);
        }
        s
    }
}

impl Extend<Element> for ElementSet {
    fn extend<I: IntoIterator<Item = Element>>(&mut self, iter: I) {
        for x in iter {
            self.insert(x);
        }
    }
}

/// Read-only membership index built in parallel from an indexed generator.
/// Uses a sorted vector of packed keys when every element packs, which keeps
/// products with millions of elements at 16 bytes per entry.
#[derive(Clone, Debug)]
pub enum ElementIndex {
    Sorted(Vec<u128>),
    Hashed(HashSet<Element>),
}

impl ElementIndex {
    pub fn build(n: usize, gen: impl Fn(usize) -> Element + Sync) -> Self {
        use rayon::prelude::*;
        let keys: Option<Vec<u128>> = (0..n).into_par_iter().map(|i| gen(i).pack()).collect();
        match keys {
            Some(mut v) => {
                v.par_sort_unstable();
                v.dedup();
                ElementIndex::Sorted(v)
            }
            None => ElementIndex::Hashed((0..n).into_par_iter().map(|i| gen(i)).collect()),
        }
    }

    pub fn contains(&self, x: &Element) -> bool {
        match self {
            ElementIndex::Sorted(v) => x.pack().is_some_and(|k| v.binary_search(&k).is_ok()),
            ElementIndex::Hashed(s) => s.contains(x),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ElementIndex::Sorted(v) => v.len(),
            ElementIndex::Hashed(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
