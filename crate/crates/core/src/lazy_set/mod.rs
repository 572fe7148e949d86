//! Possibly infinite subsets of a group: decidable membership, ordered
//! streams with completeness frontiers, and windowed set algebra.

mod ideal;
mod jsonl;

pub use ideal::{ideal_contains, IdealSpec, IdealWitness};
pub use jsonl::{Frontier, SetFile, SetHeader};

use std::collections::HashSet;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::group::{Element, Group, GroupError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("stream `{set}` is only complete up to word length {frontier:?}; `{element}` lies beyond it")]
    Frontier {
        set: String,
        element: String,
        frontier: Option<u32>,
    },
    #[error("set `{0}` is not finite, so it cannot be enumerated without a radius")]
    NotEnumerable(String),
    #[error("product set `{0}` needs a finite operand")]
    ProductSet(String),
    #[error("stream `{set}` violated its contract: {reason}")]
    Stream { set: String, reason: String },
    #[error("operands live in different groups ({0} vs {1})")]
    GroupMismatch(String, String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("set file: {0}")]
    File(String),
}

/// Finite evaluation domain: the ball of a radius, or everything (only
/// meaningful for finite sets such as construction prefixes).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Window {
    Ball(u32),
    Full,
}

impl Window {
    pub fn radius(&self) -> Option<u32> {
        match self {
            Window::Ball(r) => Some(*r),
            Window::Full => None,
        }
    }

    pub fn padded(&self, pad: u32) -> Window {
        match self {
            Window::Ball(r) => Window::Ball(r + pad),
            Window::Full => Window::Full,
        }
    }

    pub fn contains(&self, g: &Group, x: &Element) -> bool {
        match self {
            Window::Ball(r) => g.length(x) <= *r,
            Window::Full => true,
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Ball(r) => write!(f, "ball({r})"),
            Window::Full => write!(f, "full"),
        }
    }
}

impl Serialize for Window {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Window::Ball(r) => s.serialize_u32(*r),
            Window::Full => s.serialize_str("full"),
        }
    }
}

impl<'de> Deserialize<'de> for Window {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(|r| Window::Ball(r as u32))
                .ok_or_else(|| serde::de::Error::custom("radius must be a non-negative integer")),
            serde_json::Value::String(s) if s == "full" => Ok(Window::Full),
            other => Err(serde::de::Error::custom(format!("bad window {other}"))),
        }
    }
}

/// Item of a set stream. Elements must come in nondecreasing word length;
/// `Frontier(L)` promises that every element of length at most `L` has
/// been emitted. The end of the iterator means the set is exhausted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StreamItem {
    Element(Element),
    Frontier(u32),
}

type Pred = dyn Fn(&Element) -> bool + Send + Sync;
type Source = Box<dyn Iterator<Item = StreamItem> + Send>;

struct StreamState {
    source: Source,
    cache: Vec<Element>,
    index: HashSet<Element>,
    frontier: Option<u32>,
    exhausted: bool,
    last_len: u32,
    cap: u32,
}

pub struct StreamSet {
    state: Mutex<StreamState>,
}

impl StreamSet {
    fn new(source: Source, cap: u32) -> Self {
        StreamSet {
            state: Mutex::new(StreamState {
                source,
                cache: Vec::new(),
                index: HashSet::new(),
                frontier: None,
                exhausted: false,
                last_len: 0,
                cap,
            }),
        }
    }
}

impl StreamState {
    fn complete_to(&self, len: u32) -> bool {
        self.exhausted || self.frontier.is_some_and(|f| f >= len)
    }

    /// Pulls until complete up to `len`; returns false if the cap stops it first.
    fn ensure(&mut self, g: &Group, len: u32, name: &str) -> Result<bool, SetError> {
        let mut stale = 0u32;
        while !self.complete_to(len) {
            if len > self.cap {
                return Ok(false);
            }
            match self.source.next() {
                None => self.exhausted = true,
                Some(StreamItem::Frontier(f)) => {
                    if self.frontier.is_some_and(|old| old >= f) {
                        stale += 1;
                        if stale > STALL_LIMIT {
                            return Err(SetError::Stream {
                                set: name.to_string(),
                                reason: format!("frontier stalled at {f}"),
                            });
                        }
                    } else {
                        stale = 0;
                    }
                    self.frontier = Some(self.frontier.map_or(f, |old| old.max(f)));
                }
                Some(StreamItem::Element(x)) => {
                    let l = g.length(&x);
                    if l < self.last_len || self.frontier.is_some_and(|f| l <= f) {
                        return Err(SetError::Stream {
                            set: name.to_string(),
                            reason: format!("element {x} arrived after the frontier had passed it"),
                        });
                    }
                    if !self.index.insert(x.clone()) {
                        return Err(SetError::Stream {
                            set: name.to_string(),
                            reason: format!("element {x} repeated"),
                        });
                    }
                    if l > 0 && l > self.last_len {
                        let implied = l - 1;
                        self.frontier = Some(self.frontier.map_or(implied, |f| f.max(implied)));
                    }
                    self.last_len = l;
                    self.cache.push(x);
                }
            }
        }
        Ok(true)
    }
}

/// Default word-length cap for pulling from streams.
pub const DEFAULT_STREAM_CAP: u32 = 1 << 20;
const STALL_LIMIT: u32 = 100_000;

enum Node {
    Finite(Arc<Vec<Element>>, Arc<HashSet<Element>>),
    Predicate(Arc<Pred>),
    Stream(StreamSet),
    Dual(Arc<Pred>, StreamSet),
    Left(Element, LazySet),
    Right(Element, LazySet),
    Product(Vec<Element>, LazySet),
    Union(LazySet, LazySet),
    Intersection(LazySet, LazySet),
    Difference(LazySet, LazySet),
    Inverse(LazySet),
    ProductSet(LazySet, LazySet),
}

/// A subset of a group. Cheap to clone; derived sets share their operands.
#[derive(Clone)]
pub struct LazySet {
    group: Group,
    node: Arc<Node>,
    provenance: String,
    subgroup: bool,
}

impl fmt::Debug for LazySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LazySet({} in {})", self.provenance, self.group.name())
    }
}

impl LazySet {
    fn from_node(group: &Group, node: Node, provenance: String) -> LazySet {
        LazySet {
            group: group.clone(),
            node: Arc::new(node),
            provenance,
            subgroup: false,
        }
    }

    pub fn finite(group: &Group, elements: impl IntoIterator<Item = Element>) -> LazySet {
        let mut v: Vec<Element> = elements.into_iter().collect();
        group.sort(&mut v);
        v.dedup();
        let idx: HashSet<Element> = v.iter().cloned().collect();
        let prov = format!("finite[{}]", v.len());
        LazySet::from_node(group, Node::Finite(Arc::new(v), Arc::new(idx)), prov)
    }

    pub fn predicate(
        group: &Group,
        name: impl Into<String>,
        f: impl Fn(&Element) -> bool + Send + Sync + 'static,
    ) -> LazySet {
        LazySet::from_node(group, Node::Predicate(Arc::new(f)), name.into())
    }

    pub fn stream(
        group: &Group,
        name: impl Into<String>,
        source: impl Iterator<Item = StreamItem> + Send + 'static,
    ) -> LazySet {
        LazySet::stream_capped(group, name, source, DEFAULT_STREAM_CAP)
    }

    /// Stream whose frontier is never pulled past word length `cap`.
    pub fn stream_capped(
        group: &Group,
        name: impl Into<String>,
        source: impl Iterator<Item = StreamItem> + Send + 'static,
        cap: u32,
    ) -> LazySet {
        LazySet::from_node(
            group,
            Node::Stream(StreamSet::new(Box::new(source), cap)),
            name.into(),
        )
    }

    /// Membership predicate plus an enumerating stream for the same set.
    pub fn dual(
        group: &Group,
        name: impl Into<String>,
        f: impl Fn(&Element) -> bool + Send + Sync + 'static,
        source: impl Iterator<Item = StreamItem> + Send + 'static,
    ) -> LazySet {
        LazySet::from_node(
            group,
            Node::Dual(
                Arc::new(f),
                StreamSet::new(Box::new(source), DEFAULT_STREAM_CAP),
            ),
            name.into(),
        )
    }

    /// A predicate together with the stream obtained by scanning spheres.
    pub fn scanned(
        group: &Group,
        name: impl Into<String>,
        f: impl Fn(&Element) -> bool + Send + Sync + Clone + 'static,
    ) -> LazySet {
        let g = group.clone();
        let f2 = f.clone();
        let source = (0u32..).flat_map(move |r| {
            let f3 = f2.clone();
            g.sphere_iter(r)
                .filter(move |x| f3(x))
                .map(StreamItem::Element)
                .chain(std::iter::once(StreamItem::Frontier(r)))
        });
        LazySet::dual(group, name, f, source)
    }

    pub fn all(group: &Group) -> LazySet {
        LazySet::predicate(group, "all", |_| true).as_subgroup()
    }

    pub fn empty(group: &Group) -> LazySet {
        LazySet::finite(group, []).with_provenance("empty")
    }

    pub fn with_provenance(mut self, p: impl Into<String>) -> LazySet {
        self.provenance = p.into();
        self
    }

    /// Tags the set as a subgroup (checked on windows by the callers that rely on it).
    pub fn as_subgroup(mut self) -> LazySet {
        self.subgroup = true;
        self
    }

    pub fn is_subgroup(&self) -> bool {
        self.subgroup
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    fn same_group(&self, other: &LazySet) -> Result<(), SetError> {
        if self.group == other.group {
            Ok(())
        } else {
            Err(SetError::GroupMismatch(
                self.group.name(),
                other.group.name(),
            ))
        }
    }

    /// `gA = { g a }`.
    pub fn translate(&self, g: &Element) -> LazySet {
        let p = format!("{}·({})", g, self.provenance);
        LazySet::from_node(&self.group, Node::Left(g.clone(), self.clone()), p)
    }

    /// `A·g = { a g }`; membership `x ∈ A·g ⇔ x g⁻¹ ∈ A`.
    pub fn right_translate(&self, g: &Element) -> LazySet {
        let p = format!("({})·{}", self.provenance, g);
        LazySet::from_node(&self.group, Node::Right(g.clone(), self.clone()), p)
    }

    /// `F·A`, the union of the left translates `fA`.
    pub fn product(&self, f: &[Element]) -> LazySet {
        let p = format!("{{{}}}·({})", join(f), self.provenance);
        LazySet::from_node(&self.group, Node::Product(f.to_vec(), self.clone()), p)
    }

    pub fn union(&self, b: &LazySet) -> Result<LazySet, SetError> {
        self.same_group(b)?;
        let p = format!("({}) ∪ ({})", self.provenance, b.provenance);
        Ok(LazySet::from_node(
            &self.group,
            Node::Union(self.clone(), b.clone()),
            p,
        ))
    }

    pub fn intersect(&self, b: &LazySet) -> Result<LazySet, SetError> {
        self.same_group(b)?;
        let p = format!("({}) ∩ ({})", self.provenance, b.provenance);
        Ok(LazySet::from_node(
            &self.group,
            Node::Intersection(self.clone(), b.clone()),
            p,
        ))
    }

    pub fn minus(&self, b: &LazySet) -> Result<LazySet, SetError> {
        self.same_group(b)?;
        let p = format!("({}) ∖ ({})", self.provenance, b.provenance);
        Ok(LazySet::from_node(
            &self.group,
            Node::Difference(self.clone(), b.clone()),
            p,
        ))
    }

    pub fn inverse(&self) -> LazySet {
        let p = format!("({})⁻¹", self.provenance);
        LazySet::from_node(&self.group, Node::Inverse(self.clone()), p)
    }

    /// `A B⁻¹ = { a b⁻¹ }`; one operand must be finite.
    pub fn product_set(&self, b: &LazySet) -> Result<LazySet, SetError> {
        self.same_group(b)?;
        let p = format!("({})({})⁻¹", self.provenance, b.provenance);
        if !self.is_finite() && !b.is_finite() {
            return Err(SetError::ProductSet(p));
        }
        Ok(LazySet::from_node(
            &self.group,
            Node::ProductSet(self.clone(), b.clone()),
            p,
        ))
    }

    /// True when the set is finite by construction.
    pub fn is_finite(&self) -> bool {
        match &*self.node {
            Node::Finite(..) => true,
            Node::Predicate(_) | Node::Stream(_) | Node::Dual(..) => false,
            Node::Left(_, a) | Node::Right(_, a) | Node::Product(_, a) | Node::Inverse(a) => {
                a.is_finite()
            }
            Node::Union(a, b) | Node::ProductSet(a, b) => a.is_finite() && b.is_finite(),
            Node::Intersection(a, b) => a.is_finite() || b.is_finite(),
            Node::Difference(a, _) => a.is_finite(),
        }
    }

    /// True when enumerating within a radius is cheaper than scanning the ball.
    pub fn is_enumerable(&self) -> bool {
        match &*self.node {
            Node::Stream(_) | Node::Dual(..) => true,
            _ => self.is_finite(),
        }
    }

    /// All elements of a finite set, in canonical order.
    pub fn elements(&self) -> Result<Vec<Element>, SetError> {
        let g = &self.group;
        let mut out = match &*self.node {
            Node::Finite(v, _) => return Ok(v.as_ref().clone()),
            Node::Left(x, a) => a.elements()?.iter().map(|y| g.mul(x, y)).collect(),
            Node::Right(x, a) => a.elements()?.iter().map(|y| g.mul(y, x)).collect(),
            Node::Product(f, a) => g.product(f, &a.elements()?),
            Node::Inverse(a) => g.inverses(&a.elements()?),
            Node::Union(a, b) if self.is_finite() => {
                let mut v = a.elements()?;
                v.extend(b.elements()?);
                v
            }
            Node::Intersection(a, b) if a.is_finite() => filter(a.elements()?, |x| b.contains(x))?,
            Node::Intersection(a, b) if b.is_finite() => filter(b.elements()?, |x| a.contains(x))?,
            Node::Difference(a, b) if a.is_finite() => {
                filter(a.elements()?, |x| Ok(!b.contains(x)?))?
            }
            Node::ProductSet(a, b) if self.is_finite() => {
                g.product(&a.elements()?, &g.inverses(&b.elements()?))
            }
            _ => return Err(SetError::NotEnumerable(self.provenance.clone())),
        };
        g.sort(&mut out);
        out.dedup();
        Ok(out)
    }

    /// Membership test.
    pub fn contains(&self, x: &Element) -> Result<bool, SetError> {
        let g = &self.group;
        match &*self.node {
            Node::Finite(_, idx) => Ok(idx.contains(x)),
            Node::Predicate(f) | Node::Dual(f, _) => Ok(f(x)),
            Node::Stream(s) => {
                let l = g.length(x);
                let mut st = s.state.lock().expect("stream poisoned");
                if !st.ensure(g, l, &self.provenance)? {
                    return Err(SetError::Frontier {
                        set: self.provenance.clone(),
                        element: x.to_string(),
                        frontier: st.frontier,
                    });
                }
                Ok(st.index.contains(x))
            }
            Node::Left(h, a) => a.contains(&g.mul(&g.inv(h), x)),
            Node::Right(h, a) => a.contains(&g.mul(x, &g.inv(h))),
            Node::Product(f, a) => {
                for t in f {
                    if a.contains(&g.mul(&g.inv(t), x))? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Node::Union(a, b) => Ok(a.contains(x)? || b.contains(x)?),
            Node::Intersection(a, b) => Ok(a.contains(x)? && b.contains(x)?),
            Node::Difference(a, b) => Ok(a.contains(x)? && !b.contains(x)?),
            Node::Inverse(a) => a.contains(&g.inv(x)),
            Node::ProductSet(a, b) => {
                if b.is_finite() {
                    for y in b.elements()? {
                        if a.contains(&g.mul(x, &y))? {
                            return Ok(true);
                        }
                    }
                } else {
                    let xi = g.inv(x);
                    for y in a.elements()? {
                        if b.contains(&g.mul(&xi, &y))? {
                            return Ok(true);
                        }
                    }
                }
                Ok(false)
            }
        }
    }

    /// Elements of word length at most `r`, in canonical order.
    pub fn enumerate_upto(&self, r: u32) -> Result<Vec<Element>, SetError> {
        let g = &self.group;
        if self.is_finite() {
            return Ok(self
                .elements()?
                .into_iter()
                .filter(|x| g.length(x) <= r)
                .collect());
        }
        if let Node::Stream(s) | Node::Dual(_, s) = &*self.node {
            let mut st = s.state.lock().expect("stream poisoned");
            if st.ensure(g, r, &self.provenance)? {
                let mut v: Vec<Element> = st
                    .cache
                    .iter()
                    .filter(|x| g.length(x) <= r)
                    .cloned()
                    .collect();
                g.sort(&mut v);
                return Ok(v);
            }
            if matches!(&*self.node, Node::Stream(_)) {
                return Err(SetError::Frontier {
                    set: self.provenance.clone(),
                    element: format!("ball({r})"),
                    frontier: st.frontier,
                });
            }
        }
        let ball = g.ball(r)?;
        let mut out = Vec::new();
        for x in ball.iter() {
            if self.contains(x)? {
                out.push(x.clone());
            }
        }
        Ok(out)
    }

    /// `A ∩ W` in canonical order.
    pub fn restrict(&self, w: Window) -> Result<Vec<Element>, SetError> {
        match w {
            Window::Ball(r) => self.enumerate_upto(r),
            Window::Full => self.elements(),
        }
    }

    /// Current stream frontier, if the set has a stream.
    pub fn frontier(&self) -> Option<u32> {
        match &*self.node {
            Node::Stream(s) | Node::Dual(_, s) => {
                let st = s.state.lock().expect("stream poisoned");
                if st.exhausted {
                    Some(u32::MAX)
                } else {
                    st.frontier
                }
            }
            _ if self.is_finite() => Some(u32::MAX),
            _ => None,
        }
    }

    /// Compares predicate and stream on `ball(r)`; returns the first disagreement.
    pub fn check_consistency(&self, r: u32) -> Result<Option<Element>, SetError> {
        if let Node::Dual(f, _) = &*self.node {
            let streamed: HashSet<Element> = self.enumerate_upto(r)?.into_iter().collect();
            for x in self.group.ball(r)?.iter() {
                if f(x) != streamed.contains(x) {
                    return Ok(Some(x.clone()));
                }
            }
        }
        Ok(None)
    }
}

fn filter(
    v: Vec<Element>,
    mut keep: impl FnMut(&Element) -> Result<bool, SetError>,
) -> Result<Vec<Element>, SetError> {
    let mut out = Vec::with_capacity(v.len());
    for x in v {
        if keep(&x)? {
            out.push(x);
        }
    }
    Ok(out)
}

pub(crate) fn join(xs: &[Element]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
