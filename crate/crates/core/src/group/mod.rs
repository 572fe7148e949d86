//! Finitely generated groups with a word metric and deterministic ball enumeration.
//!
//! The metric is `d(g, h) = |g h⁻¹|`, which is invariant under right
//! multiplication. Elements are ordered by word length first and then
//! lexicographically on the zigzag image of their canonical form
//! (`0, 1, -1, 2, -2, ...`), so `a < a⁻¹ < b < b⁻¹` in free groups and
//! `1 < -1` in ℤ.

mod abelian;
mod custom;
mod free;
mod keyset;
mod spec;

pub use abelian::FreeAbelian;
pub use custom::{infinite_dihedral, CustomGroup};
pub use free::FreeGroup;
pub use keyset::{ElementIndex, ElementSet};
pub use spec::parse_group;

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;
use thiserror::Error;

pub type Coords = SmallVec<[i32; 4]>;

/// Default cap on the number of elements a single ball may hold.
pub const DEFAULT_BALL_BUDGET: usize = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("element `{element}` does not belong to {group}")]
    Foreign { element: String, group: String },
    #[error("cannot parse `{input}` as an element of {group}: {reason}")]
    Parse {
        input: String,
        group: String,
        reason: String,
    },
    #[error("unknown group spec `{0}` (expected Z, Z^d with d <= 4, F_k with k <= 3, or D_inf)")]
    UnknownGroup(String),
    #[error("ball of radius {radius} exceeds the budget of {budget} elements")]
    Budget { radius: u32, budget: usize },
    #[error("invalid group model: {0}")]
    Invalid(String),
}

/// Shape of an element's canonical form; also drives its textual syntax.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElemKind {
    /// Integer vector, printed `5` (rank one) or `(3,-2)`.
    Vector,
    /// Reduced word, letters `±(i+1)`, printed `ab(a^-1)`; identity is `e`.
    Word,
    /// Opaque canonical tuple of an extension group, printed `[1,0]`.
    Tuple,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Element {
    kind: ElemKind,
    data: Coords,
}

impl Element {
    pub fn new(kind: ElemKind, data: Coords) -> Self {
        Element { kind, data }
    }

    pub fn vector(coords: &[i32]) -> Self {
        Element::new(ElemKind::Vector, Coords::from_slice(coords))
    }

    pub fn word(letters: &[i32]) -> Self {
        Element::new(ElemKind::Word, Coords::from_slice(letters))
    }

    pub fn tuple(data: &[i32]) -> Self {
        Element::new(ElemKind::Tuple, Coords::from_slice(data))
    }

    pub fn kind(&self) -> ElemKind {
        self.kind
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }

    /// Injective 128-bit key for vectors of rank at most 4 and words of at
    /// most 42 letters over at most 3 generators. Keys of different kinds or
    /// ranks may collide, so only compare keys from one group.
    pub fn pack(&self) -> Option<u128> {
        match self.kind {
            ElemKind::Vector if self.data.len() <= 4 => {
                let mut k = 0u128;
                for (i, &c) in self.data.iter().enumerate() {
                    k |= (c as u32 as u128) << (32 * i);
                }
                Some(k)
            }
            ElemKind::Word if self.data.len() <= 42 => {
                let mut k = 1u128;
                for &l in self.data.iter() {
                    let code = match l {
                        1..=3 => 2 * l - 2,
                        -3..=-1 => -2 * l - 1,
                        _ => return None,
                    };
                    k = (k << 3) | code as u128;
                }
                Some(k)
            }
            _ => None,
        }
    }

    /// Parses the self-describing syntax produced by `Display`.
    pub fn parse_any(s: &str) -> Result<Element, GroupError> {
        let t = s.trim();
        let err = |reason: &str| GroupError::Parse {
            input: s.to_string(),
            group: "any".into(),
            reason: reason.into(),
        };
        if t.starts_with('[') {
            let inner = t
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| err("unbalanced brackets"))?;
            let v = parse_int_list(inner).map_err(|r| err(&r))?;
            return Ok(Element::tuple(&v));
        }
        if t.starts_with('(') && !t.contains('^') {
            let inner = t
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| err("unbalanced parentheses"))?;
            let v = parse_int_list(inner).map_err(|r| err(&r))?;
            return Ok(Element::vector(&v));
        }
        if let Ok(v) = t.parse::<i32>() {
            return Ok(Element::vector(&[v]));
        }
        let letters = free::parse_letters(t, 26).map_err(|r| err(&r))?;
        Ok(Element::word(&free::reduce(&letters)))
    }
}

pub(crate) fn parse_int_list(s: &str) -> Result<Vec<i32>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<i32>()
                .map_err(|e| format!("bad integer `{}`: {e}", p.trim()))
        })
        .collect()
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ElemKind::Vector if self.data.len() == 1 => write!(f, "{}", self.data[0]),
            ElemKind::Vector | ElemKind::Tuple => {
                let (open, close) = if self.kind == ElemKind::Vector {
                    ('(', ')')
                } else {
                    ('[', ']')
                };
                write!(f, "{open}")?;
                for (i, v) in self.data.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "{close}")
            }
            ElemKind::Word => {
                if self.data.is_empty() {
                    return write!(f, "e");
                }
                for &l in &self.data {
                    let c = free::letter_char(l.unsigned_abs() - 1);
                    if l > 0 {
                        write!(f, "{c}")?;
                    } else {
                        write!(f, "({c}^-1)")?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Element::parse_any(&s).map_err(serde::de::Error::custom)
    }
}

/// Zigzag image used by the canonical order: `0, 1, -1, 2, -2, ...` map to `0, 1, 2, 3, 4, ...`.
pub fn zigzag(v: i32) -> u32 {
    if v > 0 {
        (v as u32) * 2 - 1
    } else {
        v.unsigned_abs() * 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Abelian { rank: usize },
    Free { rank: usize },
    Other,
}

/// Extension interface. Implementations must return canonical forms from
/// `mul` and `inv`; `word_length` may return `None`, in which case lengths
/// come from breadth-first search over the generators.
pub trait GroupModel: Send + Sync {
    fn name(&self) -> String;
    fn kind(&self) -> GroupKind;
    fn identity(&self) -> Element;
    /// Symmetric generating set, identity excluded.
    fn generators(&self) -> Vec<Element>;
    fn contains(&self, x: &Element) -> bool;
    fn mul(&self, a: &Element, b: &Element) -> Element;
    fn inv(&self, a: &Element) -> Element;
    fn word_length(&self, _x: &Element) -> Option<u32> {
        None
    }
    fn parse_element(&self, s: &str) -> Result<Element, GroupError>;
}

#[derive(Default)]
struct BallCache {
    spheres: Vec<Arc<Vec<Element>>>,
    balls: HashMap<u32, Arc<Vec<Element>>>,
    lengths: HashMap<Element, u32>,
    total: usize,
}

/// Shared handle to a group model plus its memoized spheres.
#[derive(Clone)]
pub struct Group {
    model: Arc<dyn GroupModel>,
    cache: Arc<Mutex<BallCache>>,
    budget: usize,
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({})", self.model.name())
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.model, &other.model) || self.model.name() == other.model.name()
    }
}

impl Group {
    pub fn new(model: Arc<dyn GroupModel>) -> Result<Group, GroupError> {
        let gens = model.generators();
        let id = model.identity();
        if gens.is_empty() {
            return Err(GroupError::Invalid("empty generating set".into()));
        }
        for g in &gens {
            if *g == id {
                return Err(GroupError::Invalid(
                    "generating set contains the identity".into(),
                ));
            }
            if !model.contains(g) {
                return Err(GroupError::Invalid(format!(
                    "generator {g} is not an element"
                )));
            }
            if !gens.contains(&model.inv(g)) {
                return Err(GroupError::Invalid(format!(
                    "generating set is not symmetric at {g}"
                )));
            }
        }
        Ok(Group {
            model,
            cache: Arc::new(Mutex::new(BallCache::default())),
            budget: DEFAULT_BALL_BUDGET,
        })
    }

    pub fn integers(rank: usize) -> Group {
        Group::new(Arc::new(FreeAbelian::new(rank).expect("rank in range"))).expect("valid model")
    }

    pub fn free(rank: usize) -> Group {
        Group::new(Arc::new(FreeGroup::new(rank).expect("rank in range"))).expect("valid model")
    }

    pub fn with_budget(mut self, budget: usize) -> Group {
        self.budget = budget;
        self
    }

    pub fn name(&self) -> String {
        self.model.name()
    }

    pub fn kind(&self) -> GroupKind {
        self.model.kind()
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self.kind(), GroupKind::Abelian { .. })
    }

    pub fn identity(&self) -> Element {
        self.model.identity()
    }

    pub fn generators(&self) -> Vec<Element> {
        self.model.generators()
    }

    pub fn contains(&self, x: &Element) -> bool {
        self.model.contains(x)
    }

    pub fn check(&self, x: &Element) -> Result<(), GroupError> {
        if self.model.contains(x) {
            Ok(())
        } else {
            Err(GroupError::Foreign {
                element: x.to_string(),
                group: self.name(),
            })
        }
    }

    /// Product with operand validation.
    pub fn try_mul(&self, a: &Element, b: &Element) -> Result<Element, GroupError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.model.mul(a, b))
    }

    /// Product of operands already known to belong to the group.
    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        self.model.mul(a, b)
    }

    pub fn mul3(&self, a: &Element, b: &Element, c: &Element) -> Element {
        self.model.mul(&self.model.mul(a, b), c)
    }

    pub fn inv(&self, a: &Element) -> Element {
        self.model.inv(a)
    }

    pub fn parse(&self, s: &str) -> Result<Element, GroupError> {
        let x = self.model.parse_element(s)?;
        self.check(&x)?;
        Ok(x)
    }

    pub fn parse_list(&self, s: &str) -> Result<Vec<Element>, GroupError> {
        split_top_level(s)
            .iter()
            .filter(|p| !p.trim().is_empty())
            .map(|p| self.parse(p))
            .collect()
    }

    /// Word length of `x`.
    pub fn length(&self, x: &Element) -> u32 {
        if let Some(l) = self.model.word_length(x) {
            return l;
        }
        let mut r = 0;
        loop {
            {
                let cache = self.cache.lock().expect("ball cache poisoned");
                if let Some(&l) = cache.lengths.get(x) {
                    return l;
                }
            }
            self.sphere(r).expect("element beyond ball budget");
            r += 1;
        }
    }

    pub fn distance(&self, g: &Element, h: &Element) -> u32 {
        self.length(&self.mul(g, &self.inv(h)))
    }

    /// Canonical total order: word length, then zigzag-lexicographic canonical form.
    pub fn cmp(&self, a: &Element, b: &Element) -> Ordering {
        self.length(a)
            .cmp(&self.length(b))
            .then_with(|| cmp_zigzag(a.data(), b.data()))
    }

    pub fn sort(&self, xs: &mut [Element]) {
        xs.sort_by_cached_key(|x| {
            (
                self.length(x),
                x.data().iter().map(|&v| zigzag(v)).collect::<Vec<_>>(),
            )
        });
    }

    /// Elements of word length exactly `r`, in canonical order.
    pub fn sphere(&self, r: u32) -> Result<Arc<Vec<Element>>, GroupError> {
        let mut cache = self.cache.lock().expect("ball cache poisoned");
        while cache.spheres.len() <= r as usize {
            let next = cache.spheres.len() as u32;
            let layer = if next == 0 {
                vec![self.identity()]
            } else {
                self.grow(&mut cache, next)?
            };
            if self.model.word_length(&self.identity()).is_none() {
                for x in &layer {
                    cache.lengths.insert(x.clone(), next);
                }
            }
            cache.total += layer.len();
            cache.spheres.push(Arc::new(layer));
        }
        Ok(cache.spheres[r as usize].clone())
    }

    fn grow(&self, cache: &mut BallCache, r: u32) -> Result<Vec<Element>, GroupError> {
        let prev = cache.spheres[r as usize - 1].clone();
        let gens = self.generators();
        let formula = self.model.word_length(&self.identity()).is_some();
        let mut seen = HashSet::new();
        let mut layer = Vec::new();
        for s in prev.iter() {
            for g in &gens {
                let y = self.model.mul(s, g);
                let fresh = if formula {
                    self.model.word_length(&y) == Some(r)
                } else {
                    !cache.lengths.contains_key(&y)
                };
                if fresh && seen.insert(y.clone()) {
                    layer.push(y);
                }
            }
            if cache.total + layer.len() > self.budget {
                return Err(GroupError::Budget {
                    radius: r,
                    budget: self.budget,
                });
            }
        }
        layer.sort_by(|a, b| cmp_zigzag(a.data(), b.data()));
        Ok(layer)
    }

    /// Elements of word length at most `r`, sorted canonically.
    pub fn ball(&self, r: u32) -> Result<Arc<Vec<Element>>, GroupError> {
        if let Some(b) = self
            .cache
            .lock()
            .expect("ball cache poisoned")
            .balls
            .get(&r)
        {
            return Ok(b.clone());
        }
        let mut out = Vec::new();
        for k in 0..=r {
            out.extend(self.sphere(k)?.iter().cloned());
        }
        let out = Arc::new(out);
        self.cache
            .lock()
            .expect("ball cache poisoned")
            .balls
            .insert(r, out.clone());
        Ok(out)
    }

    /// Number of elements of the sphere of radius `r`, computed without
    /// materializing it where a formula exists.
    pub fn sphere_len(&self, r: u32) -> Result<u64, GroupError> {
        match self.kind() {
            GroupKind::Free { rank } => Ok(free::sphere_len(rank, r)),
            _ => Ok(self.sphere(r)?.len() as u64),
        }
    }

    /// Lazy canonical-order iteration over a sphere; free groups never
    /// materialize it, so long spheres can be scanned for a first hit.
    pub fn sphere_iter(&self, r: u32) -> Box<dyn Iterator<Item = Element> + Send> {
        match self.kind() {
            GroupKind::Free { rank } => Box::new(free::SphereIter::new(rank, r as usize)),
            _ => match self.sphere(r) {
                Ok(s) => Box::new((0..s.len()).map(move |i| s[i].clone())),
                Err(_) => Box::new(std::iter::empty()),
            },
        }
    }

    /// All elements of length at least `start`, in canonical order.
    pub fn iter_from(&self, start: u32) -> impl Iterator<Item = Element> + Send + '_ {
        (start..).flat_map(move |r| self.sphere_iter(r))
    }

    /// First element in canonical order, of length at least `start`, not rejected by `forbidden`.
    pub fn first_outside(
        &self,
        start: u32,
        mut forbidden: impl FnMut(&Element) -> bool,
    ) -> Element {
        self.iter_from(start)
            .find(|x| !forbidden(x))
            .expect("groups here are infinite")
    }

    /// `{ f x : f ∈ F, x ∈ X }`, deduplicated, in first-occurrence order.
    pub fn product(&self, f: &[Element], x: &[Element]) -> Vec<Element> {
        let mut seen = HashSet::with_capacity(f.len() * x.len());
        let mut out = Vec::new();
        for a in f {
            for b in x {
                let y = self.mul(a, b);
                if seen.insert(y.clone()) {
                    out.push(y);
                }
            }
        }
        out
    }

    pub fn inverses(&self, xs: &[Element]) -> Vec<Element> {
        xs.iter().map(|x| self.inv(x)).collect()
    }
}

pub fn cmp_zigzag(a: &[i32], b: &[i32]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match zigzag(*x).cmp(&zigzag(*y)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Splits a comma separated list while respecting parentheses and brackets.
pub(crate) fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | '[' | '{' => {
                depth += 1;
                cur.push(ch);
            }
            ')' | ']' | '}' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_is_injective_on_balls() {
        for g in [Group::integers(2), Group::free(2), Group::free(3)] {
            let ball = g.ball(5).unwrap();
            let keys: HashSet<u128> = ball.iter().map(|x| x.pack().unwrap()).collect();
            assert_eq!(keys.len(), ball.len());
        }
    }

    #[test]
    fn display_round_trip() {
        let z2 = Group::integers(2);
        let f2 = Group::free(2);
        for s in ["(3,-2)", "(0,0)"] {
            assert_eq!(z2.parse(s).unwrap().to_string(), s);
        }
        for s in ["ab(a^-1)", "e", "(b^-1)(a^-1)"] {
            assert_eq!(f2.parse(s).unwrap().to_string(), s);
            assert_eq!(Element::parse_any(s).unwrap(), f2.parse(s).unwrap());
        }
        assert_eq!(f2.parse("aB").unwrap().to_string(), "a(b^-1)");
        assert_eq!(Group::integers(1).parse("-7").unwrap().to_string(), "-7");
    }

    #[test]
    fn zigzag_order() {
        assert_eq!([0, 1, -1, 2, -2].map(zigzag), [0, 1, 2, 3, 4]);
    }

    #[test]
    fn integer_ball_order() {
        let z = Group::integers(1);
        let b: Vec<String> = z.ball(2).unwrap().iter().map(|x| x.to_string()).collect();
        assert_eq!(b, ["0", "1", "-1", "2", "-2"]);
    }

    #[test]
    fn free_sphere_order() {
        let f2 = Group::free(2);
        let s: Vec<String> = f2
            .sphere(1)
            .unwrap()
            .iter()
            .map(|x| x.to_string())
            .collect();
        assert_eq!(s, ["a", "(a^-1)", "b", "(b^-1)"]);
        let lazy: Vec<Element> = f2.sphere_iter(3).collect();
        assert_eq!(lazy, *f2.sphere(3).unwrap());
    }

    #[test]
    fn cross_group_operands_rejected() {
        let z2 = Group::integers(2);
        let w = Element::word(&[1]);
        assert!(matches!(
            z2.try_mul(&z2.identity(), &w),
            Err(GroupError::Foreign { .. })
        ));
    }

    #[test]
    fn ball_budget_enforced() {
        let f3 = Group::free(3).with_budget(1000);
        assert!(matches!(f3.ball(6), Err(GroupError::Budget { .. })));
    }
}
