//! Membership tests for the finite forbidden sets of the staged
//! constructions. Each set is a union of products like `P⁻¹·s·Q` that are
//! never materialized; instead `x` is tested through
//! `∃ p ∈ P : s⁻¹·p·x ∈ Q`.
//!
//! Three backends share these semantics: packed reduced words with
//! prefix pruning for free groups, difference sets for free abelian
//! groups, and a plain hash scan for everything else.

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;

use super::ConstructionError;
use crate::group::{Element, ElementSet, Group, GroupKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Backend {
    Free,
    Abelian,
    Generic,
}

impl Backend {
    pub(crate) fn for_group(g: &Group) -> Backend {
        match g.kind() {
            GroupKind::Free { rank } if rank <= 3 => Backend::Free,
            GroupKind::Abelian { .. } => Backend::Abelian,
            _ => Backend::Generic,
        }
    }
}

/// A finite forbidden set, queried pointwise.
pub(crate) trait Forbidden: Sync {
    fn hit(&self, x: &Element) -> bool;
    /// Cardinalities of the operand sets the test was built from.
    fn operands(&self) -> Vec<usize>;
}

/// `F⁻¹F ∪ ⋃ₖ F⁻¹Tₖ⁻¹{dₖ, dₖ⁻¹}TₖF` with `Tₖ = ball(k)`.
pub(crate) fn a_step(
    backend: Backend,
    g: &Group,
    f: &[Element],
    ds: &[Element],
) -> Result<Box<dyn Forbidden>, ConstructionError> {
    let mut terms = vec![Term::Plain(f.to_vec(), f.to_vec())];
    for (k, d) in ds.iter().enumerate() {
        for s in [d.clone(), g.inv(d)] {
            terms.push(Term::Conj(f.to_vec(), f.to_vec(), s, k as u32 + 1));
        }
    }
    build(backend, g, terms)
}

/// `F⁻¹A ∪ ⋃ₖ F⁻¹Tₖ⁻¹{dₖ, dₖ⁻¹}TₖA` with `Tₖ = ball(k)`.
pub(crate) fn c_step(
    backend: Backend,
    g: &Group,
    f: &[Element],
    a: &[Element],
    ds: &[Element],
) -> Result<Box<dyn Forbidden>, ConstructionError> {
    let mut terms = vec![Term::Plain(f.to_vec(), a.to_vec())];
    for (k, d) in ds.iter().enumerate() {
        for s in [d.clone(), g.inv(d)] {
            terms.push(Term::Conj(f.to_vec(), a.to_vec(), s, k as u32 + 1));
        }
    }
    build(backend, g, terms)
}

/// `Tₖ·A·A⁻¹·Tₖ⁻¹` with `Tₖ = ball(k)`.
pub(crate) fn d_step(
    backend: Backend,
    g: &Group,
    a: &[Element],
    k: u32,
) -> Result<Box<dyn Forbidden>, ConstructionError> {
    build(backend, g, vec![Term::Double(a.to_vec(), k)])
}

/// Largest `r` with `ball(r) ⊆ A·A⁻¹`; then `ball(2k + r) ⊆ Tₖ·A·A⁻¹·Tₖ⁻¹`
/// whenever `Tₖ = ball(k)`.
pub(crate) fn covered_radius(g: &Group, a: &[Element]) -> u32 {
    let set: ElementSet = a.iter().cloned().collect();
    let mut r = 0;
    loop {
        let next = r + 1;
        let covered = g
            .sphere_iter(next)
            .all(|x| a.iter().any(|y| set.contains(&g.mul(&x, y))));
        if !covered {
            return r;
        }
        r = next;
    }
}

enum Term {
    /// `P⁻¹·Q`.
    Plain(Vec<Element>, Vec<Element>),
    /// `P⁻¹·Tₖ⁻¹·s·Tₖ·Q`.
    Conj(Vec<Element>, Vec<Element>, Element, u32),
    /// `Tₖ·A·A⁻¹·Tₖ⁻¹`.
    Double(Vec<Element>, u32),
}

fn build(
    backend: Backend,
    g: &Group,
    terms: Vec<Term>,
) -> Result<Box<dyn Forbidden>, ConstructionError> {
    Ok(match backend {
        Backend::Generic => Box::new(GenericTest::new(g, terms)?),
        Backend::Free => Box::new(FreeTest::new(g, terms)?),
        Backend::Abelian => Box::new(AbelianTest::new(g, terms)?),
    })
}

/// `x ∈ P⁻¹·s⁻¹·Q`-style tests reduced to `∃ p ∈ P : s⁻¹·p·x ∈ Q`;
/// `s = None` means the identity, `double` means `∃ p ∈ P : x⁻¹·p ∈ Q`.
struct GenericTest {
    group: Group,
    terms: Vec<(Vec<Element>, ElementSet, Option<Element>, bool)>,
}

impl GenericTest {
    fn new(g: &Group, terms: Vec<Term>) -> Result<GenericTest, ConstructionError> {
        let mut out = Vec::new();
        for t in terms {
            out.push(match t {
                Term::Plain(p, q) => (p, q.into_iter().collect(), None, false),
                Term::Conj(p, q, s, k) => {
                    let ball = g.ball(k)?;
                    let tq: ElementSet = g.product(&ball, &q).into_iter().collect();
                    (g.product(&ball, &p), tq, Some(g.inv(&s)), false)
                }
                Term::Double(a, k) => {
                    let ta = g.product(&g.ball(k)?, &a);
                    let set: ElementSet = ta.iter().cloned().collect();
                    (ta, set, None, true)
                }
            });
        }
        Ok(GenericTest {
            group: g.clone(),
            terms: out,
        })
    }
}

impl Forbidden for GenericTest {
    fn hit(&self, x: &Element) -> bool {
        let g = &self.group;
        self.terms.iter().any(|(p, q, sinv, double)| {
            if *double {
                let xinv = g.inv(x);
                p.iter().any(|y| q.contains(&g.mul(&xinv, y)))
            } else {
                p.iter().any(|y| {
                    let px = g.mul(y, x);
                    q.contains(&match sinv {
                        Some(s) => g.mul(s, &px),
                        None => px,
                    })
                })
            }
        })
    }

    fn operands(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.0.len()).collect()
    }
}

/// In a free abelian group every term is `D + s + ball(2k)` for a
/// difference set `D = Q − P`.
struct AbelianTest {
    group: Group,
    diffs: Vec<HashSet<Element>>,
    terms: Vec<(usize, Element, u32)>,
    balls: Vec<Arc<Vec<Element>>>,
}

impl AbelianTest {
    fn new(g: &Group, terms: Vec<Term>) -> Result<AbelianTest, ConstructionError> {
        let mut keys: Vec<(Vec<Element>, Vec<Element>)> = Vec::new();
        let mut diffs = Vec::new();
        let mut out = Vec::new();
        let mut max_k = 0;
        for t in terms {
            let (p, q, s, k) = match t {
                Term::Plain(p, q) => (p, q, g.identity(), 0),
                Term::Conj(p, q, s, k) => (p, q, s, k),
                Term::Double(a, k) => (a.clone(), a, g.identity(), k),
            };
            let idx = match keys.iter().position(|(kp, kq)| *kp == p && *kq == q) {
                Some(i) => i,
                None => {
                    let d: HashSet<Element> = g.product(&q, &g.inverses(&p)).into_iter().collect();
                    keys.push((p, q));
                    diffs.push(d);
                    diffs.len() - 1
                }
            };
            max_k = max_k.max(k);
            out.push((idx, s, k));
        }
        let balls = (0..=2 * max_k)
            .map(|r| g.ball(r))
            .collect::<Result<_, _>>()?;
        Ok(AbelianTest {
            group: g.clone(),
            diffs,
            terms: out,
            balls,
        })
    }
}

impl Forbidden for AbelianTest {
    fn hit(&self, x: &Element) -> bool {
        let g = &self.group;
        self.terms.iter().any(|(i, s, k)| {
            let d = &self.diffs[*i];
            let y = g.mul(x, &g.inv(s));
            let ball = &self.balls[2 * *k as usize];
            if ball.len() <= d.len() {
                ball.iter().any(|z| d.contains(&g.mul(&y, &g.inv(z))))
            } else {
                d.iter().any(|v| g.distance(&y, v) <= 2 * k)
            }
        })
    }

    fn operands(&self) -> Vec<usize> {
        self.terms
            .iter()
            .map(|(i, _, _)| self.diffs[*i].len())
            .collect()
    }
}

/// Reduced words packed into a `u128`: letter `i` occupies the three bits
/// starting at `125 - 3i`, the length the low seven bits. Letter codes are
/// `a = 0, a⁻¹ = 1, b = 2, ...`, so the inverse of code `c` is `c ^ 1` and
/// within one length numeric order is canonical order.
pub(crate) mod packed {
    use crate::group::Element;

    pub const MAX_LETTERS: usize = 40;
    pub const BUF: usize = 128;

    pub fn len(w: u128) -> usize {
        (w & 0x7f) as usize
    }

    pub fn code(w: u128, i: usize) -> u8 {
        ((w >> (125 - 3 * i)) & 7) as u8
    }

    pub fn encode(codes: &[u8]) -> Option<u128> {
        if codes.len() > MAX_LETTERS {
            return None;
        }
        let mut w = codes.len() as u128;
        for (i, &c) in codes.iter().enumerate() {
            w |= (c as u128) << (125 - 3 * i);
        }
        Some(w)
    }

    pub fn decode(w: u128, out: &mut [u8]) -> usize {
        let n = len(w);
        for (i, slot) in out.iter_mut().enumerate().take(n) {
            *slot = code(w, i);
        }
        n
    }

    pub fn from_letters(letters: &[i32]) -> Option<u128> {
        let codes: Vec<u8> = letters
            .iter()
            .map(|&l| {
                if l > 0 {
                    2 * (l - 1) as u8
                } else {
                    2 * (-l - 1) as u8 + 1
                }
            })
            .collect();
        encode(&codes)
    }

    pub fn from_element(x: &Element) -> Option<u128> {
        from_letters(x.data())
    }

    #[cfg(test)]
    pub fn to_element(w: u128) -> Element {
        let letters: Vec<i32> = (0..len(w))
            .map(|i| {
                let c = code(w, i) as i32;
                if c % 2 == 0 {
                    c / 2 + 1
                } else {
                    -(c / 2 + 1)
                }
            })
            .collect();
        Element::word(&letters)
    }

    /// Reduced product of two code strings, written into `out`.
    pub fn mul_codes(a: &[u8], b: &[u8], out: &mut [u8; BUF]) -> usize {
        let mut k = 0;
        while k < a.len() && k < b.len() && a[a.len() - 1 - k] == b[k] ^ 1 {
            k += 1;
        }
        let head = a.len() - k;
        out[..head].copy_from_slice(&a[..head]);
        out[head..head + b.len() - k].copy_from_slice(&b[k..]);
        head + b.len() - k
    }

    /// Bounds `[lo, hi)` of the words of length `n` that start with the
    /// first `m` letters of `w` (`m ≥ 1`).
    pub fn prefix_range(w: u128, m: usize, n: usize) -> (u128, u128) {
        let shift = 128 - 3 * m;
        let top = (w >> shift) << shift;
        (top | n as u128, top + (1u128 << shift))
    }
}

/// Sorted packed words bucketed by length.
pub(crate) struct WordIndex {
    buckets: Vec<Vec<u128>>,
}

impl WordIndex {
    pub(crate) fn build(mut words: Vec<u128>) -> WordIndex {
        words.par_sort_unstable();
        words.dedup();
        let max = words.iter().map(|&w| packed::len(w)).max().unwrap_or(0);
        let mut buckets = vec![Vec::new(); max + 1];
        for w in words {
            buckets[packed::len(w)].push(w);
        }
        WordIndex { buckets }
    }

    pub(crate) fn max_len(&self) -> usize {
        self.buckets.len() - 1
    }

    pub(crate) fn len(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    pub(crate) fn contains(&self, w: u128) -> bool {
        self.buckets
            .get(packed::len(w))
            .is_some_and(|b| b.binary_search(&w).is_ok())
    }

    /// Words of length `n` sharing the first `m` letters with `w`.
    fn with_prefix(&self, w: u128, m: usize, n: usize) -> &[u128] {
        let b = &self.buckets[n];
        if m == 0 {
            return b;
        }
        let (lo, hi) = packed::prefix_range(w, m, n);
        let start = b.partition_point(|&v| v < lo);
        let end = b.partition_point(|&v| v < hi);
        &b[start..end]
    }
}

/// Products `P·Q` of packed words, computed in parallel.
pub(crate) fn packed_product(p: &[u128], q: &[u128]) -> Result<Vec<u128>, ConstructionError> {
    let nq = q.len();
    (0..p.len() * nq)
        .into_par_iter()
        .map(|i| {
            let (mut a, mut b, mut out) =
                ([0u8; packed::BUF], [0u8; packed::BUF], [0u8; packed::BUF]);
            let la = packed::decode(p[i / nq], &mut a);
            let lb = packed::decode(q[i % nq], &mut b);
            let n = packed::mul_codes(&a[..la], &b[..lb], &mut out);
            packed::encode(&out[..n]).ok_or(ConstructionError::WordTooLong(n))
        })
        .collect()
}

fn pack_one(x: &Element) -> Result<u128, ConstructionError> {
    packed::from_element(x).ok_or(ConstructionError::WordTooLong(x.data().len()))
}

fn pack_all(xs: &[Element]) -> Result<Vec<u128>, ConstructionError> {
    xs.iter().map(pack_one).collect()
}

enum FreeTerm {
    /// `∃ f ∈ P : f·x ∈ Q` for small `P`.
    Plain(Vec<u128>, HashSet<u128>),
    Conj {
        p: WordIndex,
        q: WordIndex,
        s: u128,
    },
    Double(WordIndex),
}

struct FreeTest {
    terms: Vec<FreeTerm>,
}

impl FreeTest {
    fn new(g: &Group, terms: Vec<Term>) -> Result<FreeTest, ConstructionError> {
        let ball = |k: u32| -> Result<Vec<u128>, ConstructionError> { pack_all(&g.ball(k)?) };
        let mut out = Vec::new();
        for t in terms {
            out.push(match t {
                Term::Plain(p, q) => {
                    FreeTerm::Plain(pack_all(&p)?, pack_all(&q)?.into_iter().collect())
                }
                Term::Conj(p, q, s, k) => {
                    let tk = ball(k)?;
                    FreeTerm::Conj {
                        p: WordIndex::build(packed_product(&tk, &pack_all(&p)?)?),
                        q: WordIndex::build(packed_product(&tk, &pack_all(&q)?)?),
                        s: pack_one(&s)?,
                    }
                }
                Term::Double(a, k) => {
                    FreeTerm::Double(WordIndex::build(packed_product(&ball(k)?, &pack_all(&a)?)?))
                }
            });
        }
        Ok(FreeTest { terms: out })
    }
}

/// `∃ p ∈ P : s⁻¹·p·x ∈ Q`. Only words sharing at least
/// `⌈(|s| + |p| − |x| − L_Q) / 2⌉` leading letters with `s` can land in
/// `Q`, where `L_Q` is the longest word of `Q`.
fn exists(p: &WordIndex, q: &WordIndex, s: u128, x: &[u8]) -> bool {
    let mut sc = [0u8; packed::BUF];
    let ls = packed::decode(s, &mut sc);
    let mut sinv = [0u8; packed::BUF];
    for i in 0..ls {
        sinv[i] = sc[ls - 1 - i] ^ 1;
    }
    let lq = q.max_len() as isize;
    let mut pc = [0u8; packed::BUF];
    let mut t = [0u8; packed::BUF];
    let mut y = [0u8; packed::BUF];
    for n in 0..=p.max_len() {
        let need = (ls as isize + n as isize - x.len() as isize - lq + 1)
            .div_euclid(2)
            .max(0) as usize;
        if need > n.min(ls) {
            continue;
        }
        for &w in p.with_prefix(s, need, n) {
            let lp = packed::decode(w, &mut pc);
            let lt = packed::mul_codes(&sinv[..ls], &pc[..lp], &mut t);
            let ly = packed::mul_codes(&t[..lt], x, &mut y);
            if ly as isize <= lq && packed::encode(&y[..ly]).is_some_and(|v| q.contains(v)) {
                return true;
            }
        }
    }
    false
}

impl Forbidden for FreeTest {
    fn hit(&self, x: &Element) -> bool {
        let Some(xw) = packed::from_element(x) else {
            return false;
        };
        let mut xc = [0u8; packed::BUF];
        let lx = packed::decode(xw, &mut xc);
        let x = &xc[..lx];
        let mut buf = [0u8; packed::BUF];
        let mut fc = [0u8; packed::BUF];
        self.terms.iter().any(|t| match t {
            FreeTerm::Plain(p, q) => p.iter().any(|&f| {
                let lf = packed::decode(f, &mut fc);
                let n = packed::mul_codes(&fc[..lf], x, &mut buf);
                packed::encode(&buf[..n]).is_some_and(|v| q.contains(&v))
            }),
            FreeTerm::Conj { p, q, s } => exists(p, q, *s, x),
            FreeTerm::Double(ta) => exists(ta, ta, xw, &[]),
        })
    }

    fn operands(&self) -> Vec<usize> {
        self.terms
            .iter()
            .map(|t| match t {
                FreeTerm::Plain(p, _) => p.len(),
                FreeTerm::Conj { p, .. } => p.len(),
                FreeTerm::Double(ta) => ta.len(),
            })
            .collect()
    }
}
