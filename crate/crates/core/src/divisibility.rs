//! n-divisibility witnesses, isolation gaps, principal O-sets and
//! paradoxical decomposition checks.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::Element;
use crate::lazy_set::{LazySet, SetError, Window};
use crate::relations::{affordable_radius, check_witness, max_norm, RelationError};
use crate::verdict::{Budget, Radii, Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DivisionError {
    #[error("malformed witness: {0}")]
    Malformed(String),
    #[error("pieces {first} and {second} overlap at {element}")]
    Overlap {
        element: Element,
        first: usize,
        second: usize,
    },
    #[error(transparent)]
    Relation(#[from] RelationError),
}

impl From<SetError> for DivisionError {
    fn from(e: SetError) -> Self {
        DivisionError::Relation(e.into())
    }
}

/// Pairwise disjoint parts of `A`, each with `A ⊆ Fⱼ·partⱼ`.
#[derive(Clone, Debug)]
pub struct DivisionWitness {
    pub parts: Vec<LazySet>,
    pub witnesses: Vec<Vec<Element>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisionReport {
    pub n: usize,
    /// Size of each part on the checked window.
    pub part_sizes: Vec<usize>,
}

fn first_overlap(pieces: &[Vec<Element>]) -> Option<DivisionError> {
    let mut owner: HashMap<&Element, usize> = HashMap::new();
    for (j, p) in pieces.iter().enumerate() {
        for x in p {
            if let Some(&i) = owner.get(x) {
                return Some(DivisionError::Overlap {
                    element: x.clone(),
                    first: i,
                    second: j,
                });
            }
            owner.insert(x, j);
        }
    }
    None
}

/// Disjointness, containment in `A` and every bounding witness, on `W`.
pub fn check_division(
    a: &LazySet,
    witness: &DivisionWitness,
    w: Window,
) -> Result<Verdict<DivisionReport>, DivisionError> {
    let n = witness.parts.len();
    if n == 0 {
        return Err(DivisionError::Malformed("no parts".into()));
    }
    if witness.witnesses.len() != n {
        return Err(DivisionError::Malformed(format!(
            "{n} parts but {} bounding witnesses",
            witness.witnesses.len()
        )));
    }
    if let Some(j) = witness.witnesses.iter().position(|f| f.is_empty()) {
        return Err(DivisionError::Malformed(format!("witness {j} is empty")));
    }
    let g = a.group();
    let pad = witness
        .witnesses
        .iter()
        .map(|f| max_norm(g, f))
        .max()
        .unwrap_or(0);
    let radii = Radii::padded(w, pad);
    let pieces: Vec<Vec<Element>> = witness
        .parts
        .iter()
        .map(|p| p.restrict(w))
        .collect::<Result<_, SetError>>()?;
    if let Some(e) = first_overlap(&pieces) {
        return Err(e);
    }
    let report = DivisionReport {
        n,
        part_sizes: pieces.iter().map(|p| p.len()).collect(),
    };
    for p in &pieces {
        for x in p {
            if !a.contains(x)? {
                return Ok(Verdict::refuted(x.clone(), radii)
                    .with_witness(report)
                    .with_note("part leaves A"));
            }
        }
    }
    for (j, (part, f)) in witness.parts.iter().zip(&witness.witnesses).enumerate() {
        let v = check_witness(a, part, f, w)?;
        if let Some(x) = v.counterexample {
            return Ok(Verdict::refuted(x, radii)
                .with_witness(report)
                .with_note(format!("A is not covered by F·part {j}")));
        }
    }
    Ok(Verdict::verified(report, radii))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Isolation {
    pub element: Element,
    pub isolation: u32,
    /// Set when no other element was found within the padding, so
    /// `isolation` is only a lower bound.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub lower_bound: bool,
}

/// `d(x, A ∖ {x})` when it is at most `limit`.
pub fn isolation_of(a: &LazySet, x: &Element, limit: u32) -> Result<Option<u32>, SetError> {
    let g = a.group();
    for r in 1..=limit {
        for t in g.sphere_iter(r) {
            if a.contains(&g.mul(&g.inv(&t), x))? {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

/// Isolation of every `a ∈ A ∩ W`, searching neighbours within `padding`
/// (default: the window radius). Sorted by isolation, largest first.
pub fn isolation_profile(
    a: &LazySet,
    w: Window,
    padding: Option<u32>,
) -> Result<Vec<Isolation>, DivisionError> {
    let pad = padding.or(w.radius()).ok_or_else(|| {
        DivisionError::Malformed("isolation over a full window needs a padding".into())
    })?;
    let elems = a.restrict(w)?;
    if elems.is_empty() {
        return Err(RelationError::EmptyRestriction(a.provenance().to_string()).into());
    }
    let mut out: Vec<Isolation> = elems
        .par_iter()
        .map(|x| {
            Ok(match isolation_of(a, x, pad)? {
                Some(d) => Isolation {
                    element: x.clone(),
                    isolation: d,
                    lower_bound: false,
                },
                None => Isolation {
                    element: x.clone(),
                    isolation: pad + 1,
                    lower_bound: true,
                },
            })
        })
        .collect::<Result<_, SetError>>()?;
    out.sort_by(|p, q| q.isolation.cmp(&p.isolation));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapPair {
    pub g: Element,
    pub isolation: u32,
}

/// Elements with strictly increasing isolation. Unbounded isolation rules out 2-divisibility.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub pairs: Vec<GapPair>,
    /// Largest word length scanned for candidates.
    pub frontier: u32,
}

/// For each target `C` finds a fresh `g ∈ A` with isolation above both `C`
/// and the previous entry, scanning `A` in canonical order up to `max_radius`.
pub fn certify_not_2_divisible(
    a: &LazySet,
    targets: &[u32],
    max_radius: u32,
) -> Result<Verdict<GapCertificate>, DivisionError> {
    if targets.windows(2).any(|p| p[1] <= p[0]) {
        return Err(DivisionError::Malformed(
            "targets must be strictly increasing".into(),
        ));
    }
    let g = a.group();
    let mut cert = GapCertificate::default();
    let mut r = 0;
    let mut sphere: Vec<Element> = Vec::new();
    let mut pos = 0;
    for &c in targets {
        let need = cert.pairs.last().map_or(c, |p| p.isolation.max(c));
        loop {
            if pos == sphere.len() {
                if r > max_radius {
                    cert.frontier = max_radius;
                    let budget = Budget {
                        max_norm: Some(max_radius),
                        ..Budget::default()
                    };
                    return Ok(Verdict::no_witness(
                        Radii::window(Window::Ball(max_radius)),
                        budget,
                    )
                    .with_witness(cert)
                    .with_note(format!(
                        "no element of isolation above {need} within radius {max_radius}"
                    )));
                }
                sphere = g.sphere_iter(r).collect();
                let keep: Vec<bool> = sphere.par_iter().map(|x| a.contains(x)).collect::<Result<
                    _,
                    SetError,
                >>(
                )?;
                sphere = sphere
                    .into_iter()
                    .zip(keep)
                    .filter(|p| p.1)
                    .map(|p| p.0)
                    .collect();
                pos = 0;
                r += 1;
                continue;
            }
            let x = sphere[pos].clone();
            pos += 1;
            if isolation_of(a, &x, need)?.is_none() {
                let limit =
                    affordable_radius(g, g.length(&x) + max_radius + need + 1).max(need + 1);
                let iso = isolation_of(a, &x, limit)?.unwrap_or(limit + 1);
                cert.pairs.push(GapPair {
                    g: x,
                    isolation: iso,
                });
                break;
            }
        }
    }
    cert.frontier = r.saturating_sub(1);
    Ok(Verdict::verified(
        cert,
        Radii::window(Window::Ball(r.saturating_sub(1))),
    ))
}

/// Re-checks every pair: `g ∈ A`, no other element of `A` closer than the
/// claimed isolation, and claims strictly increasing. Claims are lower bounds;
/// `certify_not_2_divisible` reports exact values.
pub fn check_gap_certificate(
    a: &LazySet,
    cert: &GapCertificate,
) -> Result<Option<Element>, SetError> {
    let mut prev = None;
    for p in &cert.pairs {
        if !a.contains(&p.g)? || isolation_of(a, &p.g, p.isolation.saturating_sub(1))?.is_some() {
            return Ok(Some(p.g.clone()));
        }
        if prev.is_some_and(|q| p.isolation <= q) {
            return Ok(Some(p.g.clone()));
        }
        prev = Some(p.isolation);
    }
    Ok(None)
}

/// `O(A, h) = A·h⁻¹`, the return-time set of the principal point `h`.
pub fn o_set(a: &LazySet, h: &Element) -> LazySet {
    let g = a.group();
    a.right_translate(&g.inv(h))
        .with_provenance(format!("O({}, {h})", a.provenance()))
}

/// Two families of pieces of `A` with translators; each family's translates must cover `A`.
#[derive(Clone, Debug)]
pub struct ParadoxWitness {
    pub first: Vec<(LazySet, Element)>,
    pub second: Vec<(LazySet, Element)>,
}

pub fn check_paradoxical_witness(
    a: &LazySet,
    wit: &ParadoxWitness,
    w: Window,
) -> Result<Verdict<()>, DivisionError> {
    if wit.first.is_empty() || wit.second.is_empty() {
        return Err(DivisionError::Malformed(
            "both families need at least one piece".into(),
        ));
    }
    let g = a.group();
    let all: Vec<&(LazySet, Element)> = wit.first.iter().chain(&wit.second).collect();
    let pad = all.iter().map(|p| g.length(&p.1)).max().unwrap_or(0);
    let radii = Radii::padded(w, pad);
    let wide = w.padded(pad);
    let pieces: Vec<Vec<Element>> = all
        .iter()
        .map(|p| p.0.restrict(wide))
        .collect::<Result<_, SetError>>()?;
    if let Some(e) = first_overlap(&pieces) {
        return Err(e);
    }
    for p in &pieces {
        for x in p {
            if !a.contains(x)? {
                return Ok(Verdict::refuted(x.clone(), radii).with_note("piece leaves A"));
            }
        }
    }
    let elems = a.restrict(w)?;
    for (name, family) in [("first", &wit.first), ("second", &wit.second)] {
        let inv: Vec<(LazySet, Element)> =
            family.iter().map(|(p, t)| (p.clone(), g.inv(t))).collect();
        let covered: Vec<bool> = elems
            .par_iter()
            .map(|x| {
                for (p, ti) in &inv {
                    if p.contains(&g.mul(ti, x))? {
                        return Ok(true);
                    }
                }
                Ok(false)
            })
            .collect::<Result<_, SetError>>()?;
        if let Some(i) = covered.iter().position(|c| !c) {
            return Ok(Verdict::refuted(elems[i].clone(), radii)
                .with_note(format!("{name} family does not cover A")));
        }
    }
    Ok(Verdict::verified((), radii))
}

/// Words whose reduced form starts with `letter` (a piece of the classical
/// decomposition of a free group).
pub fn starts_with(group: &crate::group::Group, letter: i32) -> LazySet {
    let name = format!("starts:{}", Element::word(&[letter]));
    LazySet::scanned(group, name, move |x: &Element| {
        x.data().first() == Some(&letter)
    })
}

/// Pieces `W(a), W(a⁻¹)` with translators `e, a` and `W(b), W(b⁻¹)` with `e, b`.
pub fn classical_free_paradox(group: &crate::group::Group) -> ParadoxWitness {
    let e = group.identity();
    ParadoxWitness {
        first: vec![
            (starts_with(group, 1), e.clone()),
            (starts_with(group, -1), Element::word(&[1])),
        ],
        second: vec![
            (starts_with(group, 2), e),
            (starts_with(group, -2), Element::word(&[2])),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;
    use crate::verdict::Status;

    fn mult(g: &Group, k: i32, r: i32) -> LazySet {
        LazySet::scanned(g, format!("{k}Z+{r}"), move |x: &Element| {
            x.data()[0].rem_euclid(k) == r
        })
    }

    fn is_square(v: i32) -> Option<i32> {
        if v < 0 {
            return None;
        }
        let s = (v as f64).sqrt().round() as i32;
        (s * s == v).then_some(s)
    }

    fn squares(g: &Group) -> LazySet {
        LazySet::scanned(g, "squares", |x: &Element| is_square(x.data()[0]).is_some())
    }

    fn els(g: &Group, s: &str) -> Vec<Element> {
        g.parse_list(s).unwrap()
    }

    #[test]
    fn division_examples() {
        let z = Group::integers(1);
        let all = LazySet::all(&z);
        let two = DivisionWitness {
            parts: vec![mult(&z, 2, 0), mult(&z, 2, 1)],
            witnesses: vec![els(&z, "0,1"), els(&z, "0,1")],
        };
        assert!(check_division(&all, &two, Window::Ball(40))
            .unwrap()
            .is_verified());
        let four = DivisionWitness {
            parts: (0..4).map(|r| mult(&z, 4, r)).collect(),
            witnesses: vec![els(&z, "0,1,2,3,-1,-2,-3"); 4],
        };
        assert!(check_division(&all, &four, Window::Ball(40))
            .unwrap()
            .is_verified());

        let sq = squares(&z);
        let f = z.ball(5).unwrap().to_vec();
        let halves = DivisionWitness {
            parts: vec![
                LazySet::scanned(&z, "even sq", |x: &Element| {
                    is_square(x.data()[0]).is_some_and(|s| s % 2 == 0)
                }),
                LazySet::scanned(&z, "odd sq", |x: &Element| {
                    is_square(x.data()[0]).is_some_and(|s| s % 2 == 1)
                }),
            ],
            witnesses: vec![f.clone(), f],
        };
        let v = check_division(&sq, &halves, Window::Ball(100)).unwrap();
        assert!(v.is_refuted());
        assert_eq!(v.counterexample.unwrap().to_string(), "25");
    }

    #[test]
    fn overlap_is_an_error() {
        let z = Group::integers(1);
        let w = DivisionWitness {
            parts: vec![mult(&z, 2, 0), mult(&z, 3, 0)],
            witnesses: vec![els(&z, "0,1"), els(&z, "0,1,2")],
        };
        let err = check_division(&LazySet::all(&z), &w, Window::Ball(10)).unwrap_err();
        assert_eq!(
            err,
            DivisionError::Overlap {
                element: z.identity(),
                first: 0,
                second: 1
            }
        );
    }

    #[test]
    fn isolation_examples() {
        let z = Group::integers(1);
        let p = isolation_profile(&mult(&z, 2, 0), Window::Ball(10), None).unwrap();
        assert!(p.iter().all(|i| i.isolation == 2 && !i.lower_bound));
        let sq10 = LazySet::finite(&z, (0..=10).map(|n| Element::vector(&[n * n])));
        let p = isolation_profile(&sq10, Window::Ball(100), None).unwrap();
        assert_eq!(p[0].element.to_string(), "100");
        assert_eq!(p[0].isolation, 19);
        let p = isolation_profile(&LazySet::all(&z), Window::Ball(5), None).unwrap();
        assert!(p.iter().all(|i| i.isolation == 1));
    }

    #[test]
    fn singleton_isolation_is_a_lower_bound() {
        let z = Group::integers(1);
        let p =
            isolation_profile(&LazySet::finite(&z, els(&z, "0")), Window::Ball(4), None).unwrap();
        assert_eq!(p[0].isolation, 5);
        assert!(p[0].lower_bound);
    }

    #[test]
    fn squares_are_not_2_divisible() {
        let z = Group::integers(1);
        let sq = squares(&z);
        let v = certify_not_2_divisible(&sq, &[1, 5, 10], 1000).unwrap();
        let cert = v.witness.unwrap();
        let got: Vec<(String, u32)> = cert
            .pairs
            .iter()
            .map(|p| (p.g.to_string(), p.isolation))
            .collect();
        assert_eq!(got, [("4".into(), 3), ("16".into(), 7), ("36".into(), 11)]);
        assert_eq!(check_gap_certificate(&sq, &cert).unwrap(), None);

        let v = certify_not_2_divisible(&mult(&z, 2, 0), &[3], 200).unwrap();
        assert_eq!(v.status, Status::NoWitnessWithinBudget);
    }

    #[test]
    fn tampered_gap_certificate_is_caught() {
        let z = Group::integers(1);
        let sq = squares(&z);
        let cert = GapCertificate {
            pairs: vec![GapPair {
                g: Element::vector(&[9]),
                isolation: 7,
            }],
            frontier: 9,
        };
        assert_eq!(
            check_gap_certificate(&sq, &cert).unwrap(),
            Some(Element::vector(&[9]))
        );
    }

    #[test]
    fn o_set_examples() {
        let z = Group::integers(1);
        let n = LazySet::scanned(&z, "N", |x: &Element| x.data()[0] >= 1);
        let o = o_set(&n, &Element::vector(&[3]));
        assert_eq!(
            o.restrict(Window::Ball(3)).unwrap(),
            els(&z, "0,1,-1,2,-2,3")
        );
        let o = o_set(&n, &z.identity());
        assert_eq!(
            o.restrict(Window::Ball(6)).unwrap(),
            n.restrict(Window::Ball(6)).unwrap()
        );
    }

    #[test]
    fn free_group_paradox() {
        let f2 = Group::free(2);
        let all = LazySet::all(&f2);
        let wit = classical_free_paradox(&f2);
        assert!(check_paradoxical_witness(&all, &wit, Window::Ball(6))
            .unwrap()
            .is_verified());

        let mut swapped = wit.clone();
        swapped.first[1].1 = Element::word(&[2]);
        let v = check_paradoxical_witness(&all, &swapped, Window::Ball(6)).unwrap();
        assert_eq!(v.counterexample.unwrap().to_string(), "e");

        let overlapping = ParadoxWitness {
            first: vec![(all.clone(), f2.identity())],
            second: vec![(starts_with(&f2, 1), f2.identity())],
        };
        assert!(matches!(
            check_paradoxical_witness(&all, &overlapping, Window::Ball(3)),
            Err(DivisionError::Overlap { .. })
        ));
    }

    #[test]
    fn integers_have_no_paradox() {
        let z = Group::integers(1);
        let all = LazySet::all(&z);
        let wit = ParadoxWitness {
            first: vec![
                (mult(&z, 4, 0), z.identity()),
                (mult(&z, 4, 1), Element::vector(&[-1])),
            ],
            second: vec![
                (mult(&z, 4, 2), Element::vector(&[-2])),
                (mult(&z, 4, 3), Element::vector(&[-3])),
            ],
        };
        assert!(check_paradoxical_witness(&all, &wit, Window::Ball(8))
            .unwrap()
            .is_refuted());
    }
}
