//! Translate limits on finite windows. A pattern is the restriction of the
//! right translate `A·g = { x : x·g⁻¹ ∈ A }` to a ball; `A ≿ B` is supported
//! by translates whose patterns match `B` on growing balls. These searches
//! only ever produce evidence, never refutations.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Element, Group, GroupError};
use crate::lazy_set::{LazySet, SetError, Window};
use crate::relations::{check_witness, max_norm, EquivWitness, RelationError};
use crate::verdict::{Budget, Radii, Status, Verdict};

/// Version of the bit layout: bit `i` is the `i`-th element of the ball in
/// canonical order, stored in byte `i / 8` at bit `i % 8`, hex encoded.
pub const PATTERN_ORDER: &str = "length-zigzag/1";

#[derive(Debug, Error)]
pub enum LimitError {
    #[error("composition needs first-step evidence at radius {needed}, the largest available is {available}")]
    InsufficientRadius { needed: u32, available: u32 },
    #[error("supplied B′ is not within the given bounded distance of B: {0}")]
    BadEquivalence(String),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern {
    pub radius: u32,
    #[serde(with = "hex_bits")]
    pub bits: Vec<u8>,
    pub source: Element,
}

mod hex_bits {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bits))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}

fn pack_bits(flags: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; flags.len().div_ceil(8)];
    for (i, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
        out[i / 8] |= 1 << (i % 8);
    }
    out
}

impl Pattern {
    pub fn bit(&self, i: usize) -> bool {
        self.bits.get(i / 8).is_some_and(|b| b >> (i % 8) & 1 == 1)
    }

    pub fn hex(&self) -> String {
        hex::encode(&self.bits)
    }

    /// Elements of the ball whose bit is set.
    pub fn support(&self, g: &Group) -> Result<Vec<Element>, GroupError> {
        let ball = g.ball(self.radius)?;
        Ok(ball
            .iter()
            .enumerate()
            .filter(|(i, _)| self.bit(*i))
            .map(|(_, x)| x.clone())
            .collect())
    }

    /// The pattern on a smaller ball; a prefix since balls nest in canonical order.
    pub fn restrict(&self, g: &Group, r: u32) -> Result<Pattern, GroupError> {
        let n = g.ball(r.min(self.radius))?.len();
        let flags: Vec<bool> = (0..n).map(|i| self.bit(i)).collect();
        Ok(Pattern {
            radius: r.min(self.radius),
            bits: pack_bits(&flags),
            source: self.source.clone(),
        })
    }

    /// Same bits, ignoring the source translate.
    pub fn same_shape(&self, other: &Pattern) -> bool {
        self.radius == other.radius && self.bits == other.bits
    }
}

/// `(A·g) ∩ ball(R)` as a bitmask.
pub fn pattern_of(a: &LazySet, g: &Element, r: u32) -> Result<Pattern, LimitError> {
    let grp = a.group();
    let ball = grp.ball(r)?;
    let ginv = grp.inv(g);
    let flags = ball
        .par_iter()
        .map(|x| a.contains(&grp.mul(x, &ginv)))
        .collect::<Result<Vec<bool>, SetError>>()?;
    Ok(Pattern {
        radius: r,
        bits: pack_bits(&flags),
        source: g.clone(),
    })
}

/// `B ∩ ball(R)` in pattern form (the pattern of `B` at `e`).
fn window_pattern(b: &LazySet, r: u32) -> Result<Pattern, LimitError> {
    pattern_of(b, &b.group().identity(), r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternClass {
    #[serde(with = "hex_bits")]
    pub bits: Vec<u8>,
    pub count: u64,
    /// First few translates realizing the pattern, in canonical order.
    pub samples: Vec<Element>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCensus {
    pub order: String,
    pub radius: u32,
    pub g_range: u32,
    /// Distinct patterns in order of first occurrence.
    pub classes: Vec<PatternClass>,
}

const SAMPLES: usize = 4;

/// All distinct `R`-patterns of translates `A·g`, `g ∈ ball(g_range)`.
pub fn enumerate_patterns(a: &LazySet, r: u32, g_range: u32) -> Result<PatternCensus, LimitError> {
    let grp = a.group();
    let gs = grp.ball(g_range)?;
    let pats = gs
        .par_iter()
        .map(|g| pattern_of(a, g, r))
        .collect::<Result<Vec<Pattern>, LimitError>>()?;
    let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut classes: Vec<PatternClass> = Vec::new();
    for p in pats {
        let i = *index.entry(p.bits.clone()).or_insert_with(|| {
            classes.push(PatternClass {
                bits: p.bits.clone(),
                count: 0,
                samples: Vec::new(),
            });
            classes.len() - 1
        });
        let c = &mut classes[i];
        c.count += 1;
        if c.samples.len() < SAMPLES {
            c.samples.push(p.source);
        }
    }
    Ok(PatternCensus {
        order: PATTERN_ORDER.into(),
        radius: r,
        g_range,
        classes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceStep {
    pub radius: u32,
    pub g: Element,
}

/// Support for `A ≿ B`: at each radius a translate with
/// `(A·g) ∩ ball(R) = B′ ∩ ball(R)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreorderEvidence {
    pub a: String,
    pub b: String,
    pub steps: Vec<EvidenceStep>,
}

impl PreorderEvidence {
    pub fn max_radius(&self) -> Option<u32> {
        self.steps.last().map(|s| s.radius)
    }

    /// Re-checks every step against the two sets.
    pub fn recheck(&self, a: &LazySet, b: &LazySet) -> Result<Option<EvidenceStep>, LimitError> {
        for s in &self.steps {
            if !pattern_of(a, &s.g, s.radius)?.same_shape(&window_pattern(b, s.radius)?) {
                return Ok(Some(s.clone()));
            }
        }
        Ok(None)
    }
}

/// First `g ∈ ball(g_range)` in canonical order whose pattern matches.
fn first_match(a: &LazySet, target: &Pattern, g_range: u32) -> Result<Option<Element>, LimitError> {
    let grp = a.group();
    for r in 0..=g_range {
        let sphere = grp.sphere(r)?;
        let hits = sphere
            .par_iter()
            .map(|g| Ok(pattern_of(a, g, target.radius)?.same_shape(target)))
            .collect::<Result<Vec<bool>, LimitError>>()?;
        if let Some(i) = hits.iter().position(|&h| h) {
            return Ok(Some(sphere[i].clone()));
        }
    }
    Ok(None)
}

/// Evidence for `A ≿ B` along `schedule` (increasing radii). With
/// `b_prime = Some((B′, w))` patterns are matched against `B′`, after
/// checking `B ≈ B′` through `w` on the largest scheduled ball.
pub fn preorder_evidence(
    a: &LazySet,
    b: &LazySet,
    schedule: &[u32],
    g_range: u32,
    b_prime: Option<(&LazySet, &EquivWitness)>,
) -> Result<Verdict<PreorderEvidence>, LimitError> {
    let target = match b_prime {
        Some((bp, w)) => {
            let win = Window::Ball(schedule.iter().copied().max().unwrap_or(0));
            let fw = check_witness(b, bp, &w.forward, win)?;
            let bw = check_witness(bp, b, &w.backward, win)?;
            for v in [fw, bw] {
                if let Some(x) = v.counterexample {
                    return Err(LimitError::BadEquivalence(format!("{x} is not covered")));
                }
            }
            bp
        }
        None => b,
    };
    let mut ev = PreorderEvidence {
        a: a.provenance().to_string(),
        b: target.provenance().to_string(),
        steps: Vec::new(),
    };
    let mut radii: Vec<u32> = schedule.to_vec();
    radii.sort_unstable();
    radii.dedup();
    for &r in &radii {
        match first_match(a, &window_pattern(target, r)?, g_range)? {
            Some(g) => ev.steps.push(EvidenceStep { radius: r, g }),
            None => {
                let reached = ev.max_radius().unwrap_or(0);
                return Ok(Verdict::no_witness(
                    Radii::window(Window::Ball(reached)),
                    Budget {
                        max_norm: Some(g_range),
                        searched: Some(a.group().ball(g_range)?.len() as u64),
                        ..Budget::default()
                    },
                )
                .with_witness(ev)
                .with_note(format!(
                    "no translate in ball({g_range}) matches at radius {r}"
                )));
            }
        }
    }
    let reached = ev.max_radius().unwrap_or(0);
    let mut v = Verdict::consistent(Radii::window(Window::Ball(reached))).with_witness(ev);
    v.status = Status::ConsistentUpTo;
    Ok(v)
}

/// From `A ≿ B` and `B ≿ C` evidence, translates `f = g·h` with
/// `(A·f) ∩ ball(R) = C ∩ ball(R)`: `h` comes from the second evidence at
/// radius `R`, `g` from the first at some radius `≥ R + |h|`. Each step is
/// re-verified directly.
pub fn compose_evidence(
    a: &LazySet,
    c: &LazySet,
    e1: &PreorderEvidence,
    e2: &PreorderEvidence,
    radii: &[u32],
) -> Result<Verdict<PreorderEvidence>, LimitError> {
    let grp = a.group();
    let mut ev = PreorderEvidence {
        a: a.provenance().to_string(),
        b: c.provenance().to_string(),
        steps: Vec::new(),
    };
    for &r in radii {
        let Some(s2) = e2.steps.iter().find(|s| s.radius >= r) else {
            return Err(LimitError::InsufficientRadius {
                needed: r,
                available: e2.max_radius().unwrap_or(0),
            });
        };
        let needed = r + grp.length(&s2.g);
        let Some(s1) = e1.steps.iter().find(|s| s.radius >= needed) else {
            return Err(LimitError::InsufficientRadius {
                needed,
                available: e1.max_radius().unwrap_or(0),
            });
        };
        let f = grp.mul(&s1.g, &s2.g);
        if !pattern_of(a, &f, r)?.same_shape(&window_pattern(c, r)?) {
            return Ok(Verdict::refuted(f, Radii::window(Window::Ball(r)))
                .with_witness(ev)
                .with_note("composed translate does not reproduce the pattern"));
        }
        ev.steps.push(EvidenceStep { radius: r, g: f });
    }
    let reached = ev.max_radius().unwrap_or(0);
    Ok(Verdict::consistent(Radii::window(Window::Ball(reached))).with_witness(ev))
}

/// Compares `(F·A·g) ∩ ball(R)` computed directly with `F·((A·g) ∩ ball(R + |F|)) ∩ ball(R)`.
pub fn translate_action_compat(
    f: &[Element],
    a: &LazySet,
    g: &Element,
    r: u32,
) -> Result<Verdict<()>, LimitError> {
    let grp = a.group();
    let pad = max_norm(grp, f);
    let direct = pattern_of(&a.product(f), g, r)?;
    let wide = pattern_of(a, g, r + pad)?.support(grp)?;
    let lifted: std::collections::HashSet<Element> = grp.product(f, &wide).into_iter().collect();
    let ball = grp.ball(r)?;
    let radii = Radii::padded(Window::Ball(r), pad);
    for (i, x) in ball.iter().enumerate() {
        if direct.bit(i) != lifted.contains(x) {
            return Ok(
                Verdict::refuted(x.clone(), radii).with_note("the two computations disagree")
            );
        }
    }
    Ok(Verdict::verified((), radii))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeEntry {
    #[serde(with = "hex_bits")]
    pub bits: Vec<u8>,
    pub sample: Element,
    /// Translate `h` of the pattern support matching `A` on the reverse radius.
    pub reverse: Option<Element>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalTypeReport {
    pub radius: u32,
    pub g_range: u32,
    /// Radius on which reverse matches are compared.
    pub reverse_radius: u32,
    pub entries: Vec<ProbeEntry>,
    /// Every pattern found reverse evidence.
    pub consistent: bool,
}

/// For each distinct `R`-pattern `P` of `A`, looks for `h ∈ ball(R − r)`
/// with `(P·h) ∩ ball(r) = A ∩ ball(r)`, `r = ⌊R/2⌋`; `P·h` is known on
/// that ball because `|x·h⁻¹| ≤ R`. Patterns without such `h` hint that
/// `A` is not of minimal type. Exploration only.
pub fn minimal_type_probe(
    a: &LazySet,
    r: u32,
    g_range: u32,
) -> Result<MinimalTypeReport, LimitError> {
    let grp = a.group();
    let census = enumerate_patterns(a, r, g_range)?;
    let rr = r / 2;
    let target = window_pattern(a, rr)?;
    let small = grp.ball(rr)?;
    let shifts = grp.ball(r - rr)?;
    let mut entries = Vec::new();
    for class in &census.classes {
        let p = Pattern {
            radius: r,
            bits: class.bits.clone(),
            source: class.samples[0].clone(),
        };
        let supp = LazySet::finite(grp, p.support(grp)?);
        let reverse = shifts
            .iter()
            .find(|h| {
                let hinv = grp.inv(h);
                small.iter().enumerate().all(|(i, x)| {
                    supp.contains(&grp.mul(x, &hinv)).unwrap_or(false) == target.bit(i)
                })
            })
            .cloned();
        entries.push(ProbeEntry {
            bits: class.bits.clone(),
            sample: class.samples[0].clone(),
            reverse,
        });
    }
    Ok(MinimalTypeReport {
        radius: r,
        g_range,
        reverse_radius: rr,
        consistent: entries.iter().all(|e| e.reverse.is_some()),
        entries,
    })
}
