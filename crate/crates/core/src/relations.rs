//! Witness checking and search for `A ∝ B` (`A ⊆ F·B` for a finite `F`)
//! and `A ≈ B`, windowed Hausdorff distances and subgroup coset counts.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Element, Group};
use crate::lazy_set::{LazySet, SetError, Window};
use crate::verdict::{Budget, Radii, Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("{0} has no elements in the window")]
    EmptyRestriction(String),
    #[error("target set {0} is empty on the searched range")]
    EmptyTarget(String),
    #[error("{set} is not a subgroup: {reason}")]
    NotSubgroup { set: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

impl From<crate::group::GroupError> for RelationError {
    fn from(e: crate::group::GroupError) -> Self {
        RelationError::Set(e.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub max_norm: u32,
    pub max_size: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_norm: 8,
            max_size: 16,
        }
    }
}

/// Nodes explored by the exact cover fallback before giving up.
pub const EXACT_SEARCH_BUDGET: u64 = 5_000_000;

/// Balls larger than this are not scanned when measuring `d(a, B)` for reports.
const DISTANCE_SCAN_LIMIT: usize = 200_000;

pub fn max_norm(g: &Group, f: &[Element]) -> u32 {
    f.iter().map(|x| g.length(x)).max().unwrap_or(0)
}

fn par_flags(
    xs: &[Element],
    f: impl Fn(&Element) -> Result<bool, SetError> + Sync + Send,
) -> Result<Vec<bool>, SetError> {
    xs.par_iter().map(f).collect()
}

/// Checks `A ∩ W ⊆ F·B`, evaluating `B` on the window padded by the largest
/// translator norm. Reports the first uncovered element in canonical order.
pub fn check_witness(
    a: &LazySet,
    b: &LazySet,
    f: &[Element],
    w: Window,
) -> Result<Verdict<Vec<Element>>, RelationError> {
    let g = a.group();
    if f.is_empty() {
        return Err(RelationError::Invalid("witness F must be nonempty".into()));
    }
    let pad = max_norm(g, f);
    let radii = Radii::padded(w, pad);
    let elems = a.restrict(w)?;
    let inv: Vec<Element> = g.inverses(f);
    let flags = if b.is_enumerable() {
        let covered: HashSet<Element> = g
            .product(f, &b.restrict(w.padded(pad))?)
            .into_iter()
            .collect();
        elems.iter().map(|x| covered.contains(x)).collect()
    } else {
        par_flags(&elems, |x| {
            for t in &inv {
                if b.contains(&g.mul(t, x))? {
                    return Ok(true);
                }
            }
            Ok(false)
        })?
    };
    let mut witness = f.to_vec();
    g.sort(&mut witness);
    match flags.iter().position(|c| !c) {
        Some(i) => Ok(Verdict::refuted(elems[i].clone(), radii).with_witness(witness)),
        None => Ok(Verdict::verified(witness, radii)),
    }
}

/// `d(x, B)` if it is at most `limit`: the smallest `|t|` with `t⁻¹x ∈ B`.
pub fn distance_to_set(b: &LazySet, x: &Element, limit: u32) -> Result<Option<u32>, SetError> {
    let g = b.group();
    for r in 0..=limit {
        for t in g.sphere_iter(r) {
            if b.contains(&g.mul(&g.inv(&t), x))? {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

/// Largest radius not above `want` whose ball stays below the scan limit.
pub(crate) fn affordable_radius(g: &Group, want: u32) -> u32 {
    let mut total = 0u64;
    for r in 0..=want {
        total += g.sphere_len(r).unwrap_or(u64::MAX / 2);
        if total > DISTANCE_SCAN_LIMIT as u64 {
            return r.saturating_sub(1);
        }
    }
    want
}

/// Greedy search for `F` with `A ∩ W ⊆ F·B`.
///
/// Elements of `A ∩ W` are visited in canonical order; an element already
/// covered by a chosen translator is skipped, otherwise its minimal-norm
/// translator (canonical tie-break) is added. If the greedy set is larger
/// than `max_size`, an exact search over translators in `ball(max_norm)`
/// decides whether a small enough cover exists.
pub fn find_witness(
    a: &LazySet,
    b: &LazySet,
    w: Window,
    budgets: Budgets,
) -> Result<Verdict<Vec<Element>>, RelationError> {
    let g = a.group();
    let radii = Radii::padded(w, budgets.max_norm);
    let elems = a.restrict(w)?;
    if elems.is_empty() {
        return Ok(
            Verdict::verified(vec![g.identity()], radii).with_note("A is empty on the window")
        );
    }
    if b.restrict(w.padded(budgets.max_norm))?.is_empty() {
        return Err(RelationError::EmptyTarget(b.provenance().to_string()));
    }
    let ts = g.ball(budgets.max_norm)?;
    let tinv = g.inverses(&ts);

    let first: Vec<Option<usize>> = elems
        .par_iter()
        .map(|x| {
            for (i, t) in tinv.iter().enumerate() {
                if b.contains(&g.mul(t, x))? {
                    return Ok(Some(i));
                }
            }
            Ok(None)
        })
        .collect::<Result<_, SetError>>()?;

    let mut budget = Budget {
        max_norm: Some(budgets.max_norm),
        max_size: Some(budgets.max_size),
        ..Budget::default()
    };

    if let Some(i) = first.iter().position(|t| t.is_none()) {
        let limit = affordable_radius(g, budgets.max_norm + w.radius().unwrap_or(budgets.max_norm));
        let mut worst = 0;
        let mut unbounded = false;
        for x in &elems {
            match distance_to_set(b, x, limit)? {
                Some(d) => worst = worst.max(d),
                None => unbounded = true,
            }
        }
        budget.observed = Some(if unbounded { limit + 1 } else { worst });
        let note = if unbounded {
            format!("some element is farther than {limit} from B")
        } else {
            format!("max d(a, B) over the window is {worst}")
        };
        return Ok(Verdict::no_witness(radii, budget)
            .with_counterexample(elems[i].clone())
            .with_note(note));
    }
    let observed = first
        .iter()
        .map(|t| g.length(&ts[t.expect("checked above")]))
        .max()
        .unwrap_or(0);
    budget.observed = Some(observed);

    let mut chosen: Vec<usize> = Vec::new();
    for (x, t) in elems.iter().zip(&first) {
        let mut hit = false;
        for &c in &chosen {
            if b.contains(&g.mul(&tinv[c], x))? {
                hit = true;
                break;
            }
        }
        if !hit {
            chosen.push(t.expect("checked above"));
        }
    }
    if chosen.len() <= budgets.max_size {
        let mut f: Vec<Element> = chosen.iter().map(|&i| ts[i].clone()).collect();
        g.sort(&mut f);
        return Ok(Verdict::verified(f, radii).with_budget(budget));
    }

    let covers: Vec<Vec<usize>> = elems
        .par_iter()
        .map(|x| {
            let mut v = Vec::new();
            for (i, t) in tinv.iter().enumerate() {
                if b.contains(&g.mul(t, x))? {
                    v.push(i);
                }
            }
            Ok(v)
        })
        .collect::<Result<_, SetError>>()?;
    let mut search = ExactCover {
        covers: &covers,
        nodes: 0,
    };
    let mut pick = Vec::new();
    match search.run(&mut pick, budgets.max_size) {
        Some(true) => {
            let mut f: Vec<Element> = pick.iter().map(|&i| ts[i].clone()).collect();
            g.sort(&mut f);
            Ok(Verdict::verified(f, radii)
                .with_budget(budget)
                .with_note("found by exact cover search"))
        }
        Some(false) => {
            budget.searched = Some(search.nodes);
            Ok(Verdict::no_witness(radii, budget).with_note(format!(
                "no cover by at most {} translators of norm at most {}",
                budgets.max_size, budgets.max_norm
            )))
        }
        None => {
            budget.searched = Some(search.nodes);
            Ok(Verdict::no_witness(radii, budget).with_note("exact cover search budget exhausted"))
        }
    }
}

/// Depth-first search branching on the translators of the first uncovered element.
struct ExactCover<'a> {
    covers: &'a [Vec<usize>],
    nodes: u64,
}

impl ExactCover<'_> {
    /// `Some(true)` when found, `Some(false)` when exhausted, `None` on budget.
    fn run(&mut self, pick: &mut Vec<usize>, left: usize) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > EXACT_SEARCH_BUDGET {
            return None;
        }
        let open = self
            .covers
            .iter()
            .position(|c| !c.iter().any(|t| pick.contains(t)));
        let Some(i) = open else { return Some(true) };
        if left == 0 {
            return Some(false);
        }
        for &t in &self.covers[i] {
            pick.push(t);
            match self.run(pick, left - 1) {
                Some(false) => {
                    pick.pop();
                }
                other => return other,
            }
        }
        Some(false)
    }
}

/// Windowed Hausdorff distances
/// `(max_{a∈A∩W} d(a, B∩W'), max_{b∈B∩W} d(b, A∩W'))`
/// where `W'` is `W` padded by `padding` (default: the window radius).
pub fn hausdorff_window(
    a: &LazySet,
    b: &LazySet,
    w: Window,
    padding: Option<u32>,
) -> Result<(u32, u32), RelationError> {
    let pad = padding.unwrap_or_else(|| w.radius().unwrap_or(0));
    let aw = a.restrict(w)?;
    let bw = b.restrict(w)?;
    if aw.is_empty() {
        return Err(RelationError::EmptyRestriction(a.provenance().to_string()));
    }
    if bw.is_empty() {
        return Err(RelationError::EmptyRestriction(b.provenance().to_string()));
    }
    let ap = a.restrict(w.padded(pad))?;
    let bp = b.restrict(w.padded(pad))?;
    let g = a.group();
    let one_way = |xs: &[Element], ys: &[Element]| -> u32 {
        xs.par_iter()
            .map(|x| ys.iter().map(|y| g.distance(x, y)).min().expect("nonempty"))
            .max()
            .expect("nonempty")
    };
    Ok((one_way(&aw, &bp), one_way(&bw, &ap)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivWitness {
    /// `A ⊆ forward·B`
    pub forward: Vec<Element>,
    /// `B ⊆ backward·A`
    pub backward: Vec<Element>,
}

pub fn check_equiv(
    a: &LazySet,
    b: &LazySet,
    w: Window,
    budgets: Budgets,
) -> Result<Verdict<EquivWitness>, RelationError> {
    let fw = find_witness(a, b, w, budgets)?;
    let bw = find_witness(b, a, w, budgets)?;
    let radii = fw.radii.clone();
    match (
        fw.witness.clone(),
        bw.witness.clone(),
        fw.is_verified(),
        bw.is_verified(),
    ) {
        (Some(f1), Some(f2), true, true) => Ok(Verdict::verified(
            EquivWitness {
                forward: f1,
                backward: f2,
            },
            radii,
        )),
        _ => {
            let (failed, dir) = if fw.is_verified() {
                (bw, "B ∝ A")
            } else {
                (fw, "A ∝ B")
            };
            let mut v = Verdict::no_witness(radii, failed.budget.unwrap_or_default())
                .with_note(format!("{dir}: {}", failed.note.unwrap_or_default()));
            v.counterexample = failed.counterexample;
            Ok(v)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetWitness {
    /// Coset representatives `F` with `G ∩ W ⊆ F·H`, canonical-minimal.
    pub representatives: Vec<Element>,
    /// Number of representatives found within each radius `0..=R`.
    pub counts: Vec<usize>,
}

/// Pairs examined by the subgroup closure check.
const CLOSURE_SAMPLE: usize = 400;

/// Enumerates canonical-minimal coset representatives of `H` sphere by
/// sphere. If a whole sphere adds no representative, the representatives
/// cover every coset (any `x` of length `m+1` is `s·y` with `|y| = m`), so
/// the verdict is global.
pub fn subgroup_index_witness(
    h: &LazySet,
    w: Window,
    max_reps: usize,
) -> Result<Verdict<CosetWitness>, RelationError> {
    let g = h.group();
    let r_max = w
        .radius()
        .ok_or_else(|| RelationError::Invalid("coset enumeration needs a ball window".into()))?;
    if !h.is_subgroup() {
        return Err(RelationError::NotSubgroup {
            set: h.provenance().to_string(),
            reason: "set is not tagged as a subgroup".into(),
        });
    }
    check_subgroup(h, r_max)?;

    let mut reps: Vec<Element> = Vec::new();
    let mut inv_reps: Vec<Element> = Vec::new();
    let mut counts = Vec::new();
    for r in 0..=r_max {
        let before = reps.len();
        for x in g.sphere_iter(r) {
            let mut found = false;
            for fi in &inv_reps {
                if h.contains(&g.mul(fi, &x))? {
                    found = true;
                    break;
                }
            }
            if !found {
                inv_reps.push(g.inv(&x));
                reps.push(x);
                if reps.len() > max_reps {
                    let budget = Budget {
                        max_size: Some(max_reps),
                        ..Budget::default()
                    };
                    return Ok(Verdict::no_witness(Radii::window(Window::Ball(r)), budget)
                        .with_note("representative budget exhausted"));
                }
            }
        }
        counts.push(reps.len());
        if r > 0 && reps.len() == before {
            let witness = CosetWitness {
                representatives: reps,
                counts,
            };
            return Ok(Verdict::verified(witness, Radii::window(w).global())
                .with_note(format!("no new coset at radius {r}")));
        }
    }
    Ok(Verdict::consistent(Radii::window(w))
        .with_witness(CosetWitness {
            representatives: reps,
            counts,
        })
        .with_note("new cosets appear at every radius"))
}

fn check_subgroup(h: &LazySet, r: u32) -> Result<(), RelationError> {
    let g = h.group();
    let bad = |reason: String| RelationError::NotSubgroup {
        set: h.provenance().to_string(),
        reason,
    };
    if !h.contains(&g.identity())? {
        return Err(bad("identity missing".into()));
    }
    let hw = h.restrict(Window::Ball(r))?;
    let sample = &hw[..hw.len().min(CLOSURE_SAMPLE)];
    let fails: Vec<Option<(Element, Element)>> = sample
        .par_iter()
        .map(|x| {
            for y in sample {
                if !h.contains(&g.mul(x, &g.inv(y)))? {
                    return Ok(Some((x.clone(), y.clone())));
                }
            }
            Ok(None)
        })
        .collect::<Result<_, SetError>>()?;
    if let Some((x, y)) = fails.into_iter().flatten().next() {
        return Err(bad(format!("{x}·({y})⁻¹ is missing")));
    }
    Ok(())
}
