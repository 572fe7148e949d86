//! An infinitely divisible set that is not equivalent to an absorbing set.
//!
//! Stage `n + 1` picks, each as the first element in canonical order
//! outside a finite set (with `Tₖ = ball(k)`):
//!
//! * `aₙ₊₁ ∉ Fₙ⁻¹Fₙ ∪ ⋃ₖ Fₙ⁻¹Tₖ⁻¹{dₖ, dₖ⁻¹}TₖFₙ`,
//! * `cₙ₊₁ ∉ Fₙ₊₁⁻¹Aₙ ∪ ⋃ₖ Fₙ₊₁⁻¹Tₖ⁻¹{dₖ, dₖ⁻¹}TₖAₙ`,
//! * `dₙ₊₁ ∉ Tₙ₊₁Aₙ₊₁Aₙ₊₁⁻¹Tₙ₊₁⁻¹`,
//!
//! and then re-checks the invariants from scratch.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forbidden::{self, Backend, Forbidden};
use super::{first_allowed, BlockSet, ConstructionError};
use crate::absorbing::{AntiAbsorbingCertificate, AntiPair};
use crate::divisibility::DivisionWitness;
use crate::group::{parse_group, Element, ElementIndex, ElementSet, Group};
use crate::lazy_set::{Frontier, LazySet, SetFile};

pub const STATE_FORMAT: &str = "coarse-thmA/1";

/// Candidates rejected before each choice, and the sizes of the
/// structures each forbidden-set test queries (these depend on the backend).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageStats {
    pub stage: usize,
    pub rejected_a: u64,
    pub rejected_c: u64,
    pub rejected_d: u64,
    /// Size of the ball skipped by the d-search because it lies inside
    /// `Tₙ·A·A⁻¹·Tₙ⁻¹` for radius reasons.
    pub skipped_d: u64,
    pub operands_a: Vec<usize>,
    pub operands_c: Vec<usize>,
    pub operands_d: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThmAState {
    pub format: String,
    pub group: String,
    /// Exhaustion schedule; always `ball`, meaning `Tₖ = ball(k)`.
    pub schedule: String,
    pub n: usize,
    pub a: Vec<Element>,
    pub c: Vec<Element>,
    pub d: Vec<Element>,
    pub f_set: Vec<Element>,
    pub a_set: Vec<Element>,
    pub stats: Vec<StageStats>,
}

impl ThmAState {
    pub fn empty(g: &Group) -> ThmAState {
        ThmAState {
            format: STATE_FORMAT.into(),
            group: g.name(),
            schedule: "ball".into(),
            n: 0,
            a: Vec::new(),
            c: Vec::new(),
            d: Vec::new(),
            f_set: vec![g.identity()],
            a_set: Vec::new(),
            stats: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state serializes")
    }

    pub fn from_json(text: &str) -> Result<(Group, ThmAState), ConstructionError> {
        let st: ThmAState =
            serde_json::from_str(text).map_err(|e| ConstructionError::Checkpoint(e.to_string()))?;
        if st.format != STATE_FORMAT {
            return Err(ConstructionError::Checkpoint(format!(
                "unknown format `{}`",
                st.format
            )));
        }
        if st.schedule != "ball" {
            return Err(ConstructionError::Checkpoint(format!(
                "unknown schedule `{}`",
                st.schedule
            )));
        }
        let g = parse_group(&st.group)?;
        Ok((g, st))
    }

    fn blocks(&self) -> BlockSet {
        BlockSet {
            a: self.a.clone(),
            c: self.c.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ThmA {
    pub group: Group,
    pub state: ThmAState,
}

pub fn build_thm_a(g: &Group, n_max: usize) -> Result<ThmA, ConstructionError> {
    resume_thm_a(g, ThmAState::empty(g), n_max, |_| Ok(()))
}

/// Continues from a checked state up to `n_max` stages, calling `on_stage`
/// after every completed stage (for checkpointing).
pub fn resume_thm_a(
    g: &Group,
    state: ThmAState,
    n_max: usize,
    on_stage: impl FnMut(&ThmAState) -> Result<(), ConstructionError>,
) -> Result<ThmA, ConstructionError> {
    run(g, state, n_max, Backend::for_group(g), on_stage)
}

fn run(
    g: &Group,
    mut st: ThmAState,
    n_max: usize,
    backend: Backend,
    mut on_stage: impl FnMut(&ThmAState) -> Result<(), ConstructionError>,
) -> Result<ThmA, ConstructionError> {
    if st.group != g.name() {
        return Err(ConstructionError::Checkpoint(format!(
            "state is for {}, not {}",
            st.group,
            g.name()
        )));
    }
    check_thm_a_state(g, &st)?;
    while st.n < n_max {
        let clock = Instant::now();
        let n = st.n;
        let mut stats = StageStats {
            stage: n + 1,
            ..StageStats::default()
        };

        let test = forbidden::a_step(backend, g, &st.f_set, &st.d)?;
        stats.operands_a = test.operands();
        let (a, rej) = first_allowed(g, 0, |x| test.hit(x));
        drop(test);
        stats.rejected_a = rej;
        let shifted: Vec<Element> = st.f_set.iter().map(|x| g.mul(x, &a)).collect();
        st.f_set.extend(shifted);

        let test = forbidden::c_step(backend, g, &st.f_set, &st.a_set, &st.d)?;
        stats.operands_c = test.operands();
        let (c, rej) = first_allowed(g, 0, |x| test.hit(x));
        drop(test);
        stats.rejected_c = rej;
        st.a_set.extend(st.f_set.iter().map(|x| g.mul(x, &c)));

        let k = n as u32 + 1;
        let start = 2 * k + forbidden::covered_radius(g, &st.a_set) + 1;
        stats.skipped_d = (0..start)
            .map(|r| g.sphere_len(r))
            .sum::<Result<u64, _>>()?;
        let test: Box<dyn Forbidden> = forbidden::d_step(backend, g, &st.a_set, k)?;
        stats.operands_d = test.operands();
        let (d, rej) = first_allowed(g, start, |x| test.hit(x));
        drop(test);
        stats.rejected_d = rej;

        log::info!(
            "thmA {} stage {}: a = {a}, c = {c}, d = {d}, rejected {}/{}/{} (+{} skipped), {:.2?}",
            g.name(),
            n + 1,
            stats.rejected_a,
            stats.rejected_c,
            stats.rejected_d,
            stats.skipped_d,
            clock.elapsed()
        );
        st.a.push(a);
        st.c.push(c);
        st.d.push(d);
        st.stats.push(stats);
        st.n = n + 1;
        check_stage(g, &st, st.n)?;
        on_stage(&st)?;
    }
    Ok(ThmA {
        group: g.clone(),
        state: st,
    })
}

fn violation(invariant: &'static str, stage: usize, detail: String) -> ConstructionError {
    ConstructionError::Invariant {
        invariant,
        stage,
        detail,
    }
}

/// Independent re-check of a whole state: the stored sets match the
/// sequences, and (b), (c), (d) hold at every stage.
pub fn check_thm_a_state(g: &Group, st: &ThmAState) -> Result<(), ConstructionError> {
    let n = st.n;
    if st.a.len() != n || st.c.len() != n || st.d.len() != n {
        return Err(ConstructionError::Checkpoint(format!(
            "sequence lengths differ from n = {n}"
        )));
    }
    for x in
        st.a.iter()
            .chain(&st.c)
            .chain(&st.d)
            .chain(&st.f_set)
            .chain(&st.a_set)
    {
        g.check(x)?;
    }
    let blocks = st.blocks();
    if blocks.f(g, n) != st.f_set {
        return Err(violation(
            "(b)",
            n,
            "stored F differs from the a-sequence".into(),
        ));
    }
    if blocks.prefix(g, n) != st.a_set {
        return Err(violation(
            "(c)",
            n,
            "stored A differs from the blocks F_k c_k".into(),
        ));
    }
    for m in 1..=n {
        check_stage(g, st, m)?;
    }
    Ok(())
}

/// (b) and (c) at stage `m`, and (d) for all `k ≤ m` against `A_m`.
fn check_stage(g: &Group, st: &ThmAState, m: usize) -> Result<(), ConstructionError> {
    let blocks = st.blocks();
    let f: ElementSet = blocks.f(g, m).into_iter().collect();
    if f.len() != 1 << m {
        return Err(violation(
            "(b)",
            m,
            format!("|F| = {} instead of {}", f.len(), 1 << m),
        ));
    }
    let a = blocks.prefix(g, m);
    let aset: ElementSet = a.iter().cloned().collect();
    if aset.len() != (1 << (m + 1)) - 2 {
        return Err(violation(
            "(c)",
            m,
            format!("blocks overlap: |A| = {}", aset.len()),
        ));
    }
    for k in 1..=m {
        if let Some(u) = double_product_witness(g, &a, k as u32, &st.d[k - 1])? {
            return Err(violation(
                "(d)",
                m,
                format!("d_{k} = {} lies in T_k A A^-1 T_k^-1 via {u}", st.d[k - 1]),
            ));
        }
    }
    Ok(())
}

/// Some `u ∈ Tₖ·A` with `d⁻¹·u ∈ Tₖ·A`, if one exists.
fn double_product_witness(
    g: &Group,
    a: &[Element],
    k: u32,
    d: &Element,
) -> Result<Option<Element>, ConstructionError> {
    let t = g.ball(k)?;
    let na = a.len();
    let at = |i: usize| g.mul(&t[i / na], &a[i % na]);
    let total = t.len() * na;
    let index = ElementIndex::build(total, at);
    let dinv = g.inv(d);
    Ok((0..total)
        .into_par_iter()
        .find_first(|&i| index.contains(&g.mul(&dinv, &at(i))))
        .map(at))
}

impl ThmA {
    pub fn blocks(&self) -> BlockSet {
        self.state.blocks()
    }

    pub fn prefix(&self) -> Vec<Element> {
        self.state.a_set.clone()
    }

    pub fn set(&self) -> LazySet {
        LazySet::finite(&self.group, self.prefix())
            .with_provenance(format!("construct:thmA:{}", self.state.n))
    }

    pub fn set_file(&self) -> SetFile {
        SetFile::new(
            &self.group,
            format!("construct:thmA:{}", self.state.n),
            Frontier::Stage(self.state.n as u32),
            self.prefix(),
        )
    }

    /// Pairs `(ball(k), dₖ)`. They are global: invariant (d) at every later
    /// stage keeps `Tₖ·A ∩ dₖ·Tₖ·A` empty for the infinite set.
    pub fn certificate(&self) -> Result<AntiAbsorbingCertificate, ConstructionError> {
        let pairs = self
            .state
            .d
            .iter()
            .enumerate()
            .map(|(i, d)| {
                Ok(AntiPair {
                    t: self.group.ball(i as u32 + 1)?.to_vec(),
                    d: d.clone(),
                    global: true,
                })
            })
            .collect::<Result<_, ConstructionError>>()?;
        Ok(AntiAbsorbingCertificate { pairs })
    }

    pub fn division_witnesses(&self) -> Vec<DivisionWitness> {
        let blocks = self.blocks();
        (1..self.state.n)
            .filter_map(|l| blocks.division_witness(&self.group, l))
            .collect()
    }
}
