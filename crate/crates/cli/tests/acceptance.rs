//! Acceptance suite: one pass/fail line per criterion. Runs as a plain
//! binary (no libtest harness) so the lines are always visible.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use coarse_core::absorbing::{absorb_witness, check_anti_absorbing};
use coarse_core::catalog::parse_set;
use coarse_core::constructions::{
    build_infdiv, build_isolated_absorbing, check_thm_a_state, resume_thm_a, ThmA, ThmAState,
};
use coarse_core::divisibility::{
    check_division, check_gap_certificate, check_paradoxical_witness, classical_free_paradox,
    isolation_of, ParadoxWitness,
};
use coarse_core::group::ElementSet;
use coarse_core::limits::{enumerate_patterns, minimal_type_probe, pattern_of, preorder_evidence};
use coarse_core::relations::{
    check_equiv, check_witness, find_witness, subgroup_index_witness, Budgets,
};
use coarse_core::{Element, Group, LazySet, Status, Window};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(
            proptest::test_runner::RngAlgorithm::ChaCha,
        ),
    )
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!(
            "took {:.1}s, limit {:.0}s",
            t.as_secs_f64(),
            limit.as_secs_f64()
        ))
    } else {
        Ok(())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    for g in [Group::integers(2), Group::free(2)] {
        let ball = g.ball(6).map_err(err)?.to_vec();
        let n = ball.len();
        let mut run = runner(10_000);
        let strat = (0..n, 0..n, 0..n);
        run.run(&strat, |(i, j, k)| {
            let (x, y, z) = (&ball[i], &ball[j], &ball[k]);
            let d = |p: &Element, q: &Element| g.distance(p, q);
            prop_assert_eq!(d(x, y) == 0, x == y);
            prop_assert_eq!(d(x, y), d(y, x));
            prop_assert!(d(x, z) <= d(x, y) + d(y, z));
            prop_assert_eq!(d(&g.mul(x, z), &g.mul(y, z)), d(x, y));
            prop_assert!(g.length(x) <= 6);
            Ok(())
        })
        .map_err(|e| format!("{}: {e}", g.name()))?;
        for r in 0..=6u32 {
            let b = g.ball(r).map_err(err)?;
            ensure!(
                b.iter().all(|x| g.length(x) <= r),
                "ball({r}) of {} holds a longer element",
                g.name()
            );
            let distinct: ElementSet = b.iter().cloned().collect();
            ensure!(
                distinct.len() == b.len(),
                "ball({r}) of {} repeats elements",
                g.name()
            );
        }
    }
    let z2 = Group::integers(2);
    for r in 0..=6usize {
        let got = z2.ball(r as u32).map_err(err)?.len();
        ensure!(got == 2 * r * r + 2 * r + 1, "|ball({r})| = {got} in Z^2");
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!(
        "2x10^4 triples, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

/// Random left translates and unions of a named base set, all ≈ the base.
fn random_family(g: &Group, run: &mut TestRunner, bases: &[&str]) -> Result<[LazySet; 3], String> {
    let ball = g.ball(2).map_err(err)?.to_vec();
    let pick = (0..bases.len(), proptest::collection::vec(0..ball.len(), 5));
    let (b, ix) = pick.new_tree(run).map_err(err)?.current();
    let base = parse_set(g, bases[b]).map_err(err)?;
    let t = |i: usize| base.translate(&ball[ix[i]]);
    let a = t(0).union(&t(1)).map_err(err)?;
    let bb = t(2).union(&t(3)).map_err(err)?;
    Ok([a, bb, t(4)])
}

fn criterion_2() -> Outcome {
    let mut run = runner(1);
    let budgets = Budgets {
        max_norm: 4,
        max_size: 8,
    };
    let mut composed = 0;
    for i in 0..50 {
        let (g, bases): (Group, &[&str]) = if i % 2 == 0 {
            (
                Group::integers(1),
                &[
                    "Z:evens",
                    "Z:squares",
                    "Z:naturals",
                    "Z:mult:3",
                    "Z:nat-negsq",
                ],
            )
        } else {
            (
                Group::free(2),
                &["F:starts:a", "subgroup:b", "subgroup:ab", "F:starts:B"],
            )
        };
        let [a, b, c] = random_family(&g, &mut run, bases)?;
        let r = 5;
        let f1 = find_witness(&a, &b, Window::Ball(r), budgets).map_err(err)?;
        let Some(w1) = f1.witness.clone().filter(|_| f1.is_verified()) else {
            return Err(format!(
                "case {i}: no witness for {} ∝ {}",
                a.provenance(),
                b.provenance()
            ));
        };
        let pad = w1.iter().map(|x| g.length(x)).max().unwrap_or(0);
        let f2 = find_witness(&b, &c, Window::Ball(r + pad), budgets).map_err(err)?;
        let Some(w2) = f2.witness.clone().filter(|_| f2.is_verified()) else {
            return Err(format!(
                "case {i}: no witness for {} ∝ {}",
                b.provenance(),
                c.provenance()
            ));
        };
        let f12 = g.product(&w1, &w2);
        let v = check_witness(&a, &c, &f12, Window::Ball(r)).map_err(err)?;
        ensure!(
            v.is_verified(),
            "case {i}: composed witness fails at {:?}",
            v.counterexample
        );
        composed += 1;

        let ab = check_equiv(&a, &b, Window::Ball(r), budgets).map_err(err)?;
        let ba = check_equiv(&b, &a, Window::Ball(r), budgets).map_err(err)?;
        ensure!(
            ab.status == ba.status,
            "case {i}: equivalence status changes under swap"
        );
        if let (Some(x), Some(y)) = (&ab.witness, &ba.witness) {
            ensure!(
                x.forward == y.backward && x.backward == y.forward,
                "case {i}: witnesses not swapped"
            );
        }
    }
    let z = Group::integers(1);
    let v = subgroup_index_witness(
        &parse_set(&z, "Z:evens").map_err(err)?,
        Window::Ball(6),
        100,
    )
    .map_err(err)?;
    ensure!(v.is_verified() && v.radii.global, "2Z: {:?}", v.status);
    let f2 = Group::free(2);
    let even =
        LazySet::scanned(&f2, "even length", |x: &Element| x.data().len() % 2 == 0).as_subgroup();
    let v = subgroup_index_witness(&even, Window::Ball(5), 1000).map_err(err)?;
    ensure!(
        v.is_verified() && v.witness.as_ref().map(|w| w.representatives.len()) == Some(2),
        "even-length subgroup"
    );
    let cyc = parse_set(&f2, "subgroup:a").map_err(err)?;
    let v = subgroup_index_witness(&cyc, Window::Ball(5), 10_000).map_err(err)?;
    let counts = v.witness.map(|w| w.counts).unwrap_or_default();
    ensure!(v.status == Status::ConsistentUpTo, "<a>: {:?}", v.status);
    ensure!(
        counts.windows(2).all(|p| p[1] > p[0]),
        "<a> counts not growing: {counts:?}"
    );
    Ok(format!("{composed} compositions, <a> counts {counts:?}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let z = Group::integers(1);
    let d = build_infdiv(&z, 3).map_err(err)?;
    let got: HashSet<i32> = d.prefix().iter().map(|x| x.data()[0]).collect();
    ensure!(
        got == (0..=13).collect::<HashSet<i32>>(),
        "stage-3 prefix {got:?}"
    );
    let blocks: Vec<Vec<i32>> = (1..=3)
        .map(|n| {
            let mut b: Vec<i32> = d.blocks.blocks(&z, n)[n - 1]
                .iter()
                .map(|x| x.data()[0])
                .collect();
            b.sort();
            b
        })
        .collect();
    ensure!(
        blocks == [vec![0, 1], vec![2, 3, 4, 5], (6..=13).collect()],
        "blocks {blocks:?}"
    );
    let mut levels = 0;
    for (g, n) in [(Group::integers(1), 12), (Group::free(2), 8)] {
        let d = build_infdiv(&g, n).map_err(err)?;
        for m in 1..=n {
            let f = d.blocks.f(&g, m);
            let distinct: ElementSet = f.iter().cloned().collect();
            ensure!(
                distinct.len() == 1 << m,
                "{}: |F_{m}| = {}",
                g.name(),
                distinct.len()
            );
        }
        let a = d.set();
        for (l, w) in d.division_witnesses().iter().enumerate() {
            let v = check_division(&a, w, Window::Full).map_err(err)?;
            ensure!(
                v.is_verified(),
                "{} level {}: {:?}",
                g.name(),
                l + 1,
                v.counterexample
            );
            levels += 1;
        }
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "{levels} division witnesses, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for g in [Group::integers(1), Group::integers(2), Group::free(2)] {
        let mut states = Vec::new();
        let t = resume_thm_a(&g, ThmAState::empty(&g), 8, |s| {
            states.push(s.clone());
            Ok(())
        })
        .map_err(err)?;
        if g == Group::integers(1) {
            ensure!(
                t.state.d[0] == Element::vector(&[4]),
                "d_1 = {}",
                t.state.d[0]
            );
        }
        check_thm_a_state(&g, &t.state).map_err(|e| format!("{}: {e}", g.name()))?;
        for st in states {
            let stage = ThmA {
                group: g.clone(),
                state: st,
            };
            let cert = stage.certificate().map_err(err)?;
            let v = check_anti_absorbing(&stage.set(), &cert, Window::Full).map_err(err)?;
            ensure!(
                v.is_verified(),
                "{} stage {}: {:?} at {:?}",
                g.name(),
                stage.state.n,
                v.status,
                v.counterexample
            );
            checked += cert.pairs.len();
        }
    }
    within(Duration::from_secs(300), start)?;
    Ok(format!(
        "{checked} certificate pairs, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_5() -> Outcome {
    let z = Group::integers(1);
    let c = build_isolated_absorbing(&z, 20).map_err(err)?;
    let a = c.set(&z);
    if let Some(x) = check_gap_certificate(&a, &c.certificate()).map_err(err)? {
        return Err(format!("gap certificate fails at {x}"));
    }
    for (i, g) in c.g.iter().enumerate() {
        let iso = isolation_of(&a, g, 2 * i as u32 + 2).map_err(err)?;
        ensure!(
            iso.is_none_or(|d| d as usize > i),
            "isolation of g_{} = {g} is {iso:?}",
            i + 1
        );
    }
    for n in 1..=10u32 {
        let ball = z.ball(n).map_err(err)?;
        let v = absorb_witness(&a, &ball, 1000).map_err(err)?;
        ensure!(
            v.is_verified() && v.witness.as_ref() == Some(&c.h[n as usize - 1]),
            "ball({n}) absorbed by {:?}, expected {}",
            v.witness,
            c.h[n as usize - 1]
        );
    }
    Ok(format!(
        "gaps to n = 20, absorbing to n = 10 (h_10 = {})",
        c.h[9]
    ))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let z = Group::integers(1);
    let set = |s: &str| parse_set(&z, s).map_err(err);
    let schedule: Vec<u32> = (1..=64).collect();
    let v =
        preorder_evidence(&set("Z:naturals")?, &set("Z:all")?, &schedule, 70, None).map_err(err)?;
    ensure!(
        v.status == Status::ConsistentUpTo,
        "(a) status {:?}",
        v.status
    );
    let steps = v.witness.map(|w| w.steps).unwrap_or_default();
    ensure!(steps.len() == 64, "(a) {} steps", steps.len());
    for s in &steps {
        ensure!(
            s.g == Element::vector(&[-(s.radius as i32) - 1]),
            "(a) R = {}: g = {}",
            s.radius,
            s.g
        );
    }

    let negsq = set("Z:nat-negsq")?;
    let zero = set("e")?;
    let schedule: Vec<u32> = (1..=32).collect();
    let v = preorder_evidence(&negsq, &zero, &schedule, 400, None).map_err(err)?;
    ensure!(
        v.status == Status::ConsistentUpTo,
        "(b) status {:?}",
        v.status
    );
    for s in v.witness.map(|w| w.steps).unwrap_or_default() {
        let x = s.g.data()[0];
        let n = (x as f64).sqrt().round() as i32;
        ensure!(
            n >= 1 && n * n == x,
            "(b) R = {}: g = {x} is not a square",
            s.radius
        );
        // independent check: the translate meets ball(R) exactly in {0}
        let p = pattern_of(&negsq, &s.g, s.radius).map_err(err)?;
        ensure!(
            p.support(&z).map_err(err)? == vec![z.identity()],
            "(b) R = {}: pattern mismatch",
            s.radius
        );
    }

    let mut counts = Vec::new();
    for k in [2u32, 3, 5] {
        let a = set(&format!("Z:mult:{k}"))?;
        for r in k / 2..=12 {
            let n = enumerate_patterns(&a, r, k + 12)
                .map_err(err)?
                .classes
                .len();
            ensure!(n == k as usize, "(c) {k}Z at R = {r}: {n} patterns");
        }
        let probe = minimal_type_probe(&a, 12, k + 12).map_err(err)?;
        ensure!(
            probe.consistent && probe.entries.len() == k as usize,
            "(c) probe for {k}Z"
        );
        counts.push(k);
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "(a) 64 radii, (b) 32 radii, (c) k in {counts:?}, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn subsets_upto(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for s in &frontier {
            let from = s.last().map_or(0, |&l: &usize| l + 1);
            for i in from..n {
                let mut t: Vec<usize> = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.into_iter().filter(|s| !s.is_empty()).collect()
}

/// Exhaustive: is `A ∩ W ⊆ F·B` for some `F ⊆ ball(2)`, `|F| ≤ 3`?
fn brute_force(g: &Group, a: &LazySet, b: &LazySet, r: u32) -> Result<bool, String> {
    let cands = g.ball(2).map_err(err)?.to_vec();
    let elems = a.restrict(Window::Ball(r)).map_err(err)?;
    for s in subsets_upto(cands.len(), 3) {
        let mut ok = true;
        for x in &elems {
            let mut hit = false;
            for &i in &s {
                if b.contains(&g.mul(&g.inv(&cands[i]), x)).map_err(err)? {
                    hit = true;
                    break;
                }
            }
            if !hit {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

fn criterion_7() -> Outcome {
    let mut run = runner(1);
    let budgets = Budgets {
        max_norm: 2,
        max_size: 3,
    };
    let (mut agree, mut verified) = (0, 0);
    let cases: [(Group, u32, u32); 2] = [(Group::integers(1), 4, 60), (Group::free(2), 3, 40)];
    for (g, rmax, trials) in cases {
        let pool = g.ball(rmax + 2).map_err(err)?.to_vec();
        let strat = (
            1..=rmax,
            proptest::collection::vec(0..pool.len(), 1..8),
            proptest::collection::vec(0..pool.len(), 1..6),
        );
        for t in 0..trials {
            let (r, ia, ib) = strat.new_tree(&mut run).map_err(err)?.current();
            let a = LazySet::finite(&g, ia.iter().map(|&i| pool[i].clone()));
            let b = LazySet::finite(&g, ib.iter().map(|&i| pool[i].clone()));
            let greedy = match find_witness(&a, &b, Window::Ball(r), budgets) {
                Ok(v) => v.is_verified(),
                Err(_) => false,
            };
            let exact = brute_force(&g, &a, &b, r)?;
            ensure!(
                greedy == exact,
                "{} case {t}: greedy {greedy}, brute force {exact}",
                g.name()
            );
            agree += 1;
            verified += exact as usize;
        }
    }
    Ok(format!("{agree} cases agree ({verified} verified)"))
}

fn criterion_8() -> Outcome {
    let f2 = Group::free(2);
    let all = LazySet::all(&f2);
    let w = Window::Ball(6);
    let base = classical_free_paradox(&f2);
    let v = check_paradoxical_witness(&all, &base, w).map_err(err)?;
    ensure!(v.is_verified(), "classical decomposition: {:?}", v.status);

    let mut perturbations: Vec<(String, ParadoxWitness)> = Vec::new();
    for fam in 0..2 {
        for piece in 0..2 {
            let get = |p: &ParadoxWitness| {
                if fam == 0 {
                    p.first[piece].clone()
                } else {
                    p.second[piece].clone()
                }
            };
            let (set, t) = get(&base);
            let first = set.restrict(Window::Ball(1)).map_err(err)?[0].clone();
            let dropped = set
                .minus(&LazySet::finite(&f2, [first.clone()]))
                .map_err(err)?;
            let other = if t == f2.identity() {
                Element::word(&[2 - fam as i32])
            } else {
                f2.identity()
            };
            for (label, replacement) in [
                (
                    format!("drop {first} from piece {fam}.{piece}"),
                    (dropped, t.clone()),
                ),
                (
                    format!("translator {other} for piece {fam}.{piece}"),
                    (set.clone(), other.clone()),
                ),
            ] {
                let mut p = base.clone();
                if fam == 0 {
                    p.first[piece] = replacement;
                } else {
                    p.second[piece] = replacement;
                }
                perturbations.push((label, p));
            }
        }
    }
    let mut named = Vec::new();
    for (label, p) in &perturbations {
        let v = check_paradoxical_witness(&all, p, w).map_err(err)?;
        ensure!(v.status == Status::RefutedUpTo, "{label}: {:?}", v.status);
        let x = v
            .counterexample
            .ok_or(format!("{label}: no counterexample"))?;
        let fam = if label.contains(" 0.") {
            &p.first
        } else {
            &p.second
        };
        let covered = fam
            .iter()
            .any(|(s, t)| s.contains(&f2.mul(&f2.inv(t), &x)).unwrap_or(false));
        ensure!(!covered, "{label}: counterexample {x} is covered");
        named.push(x.to_string());
    }
    Ok(format!(
        "{} perturbations refuted at {named:?}",
        perturbations.len()
    ))
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

const DETERMINISM: &[(&str, &[&str])] = &[
    (
        "construct_infdiv_z",
        &["construct", "infdiv", "--group", "Z", "--stages", "3"],
    ),
    (
        "divisible_infdiv_f2",
        &[
            "check",
            "divisible",
            "--group",
            "F_2",
            "--construct",
            "infdiv",
            "--stages",
            "5",
        ],
    ),
    (
        "construct_thma_z",
        &["construct", "thmA", "--group", "Z", "--stages", "6"],
    ),
    (
        "anti_absorbing_thma_z2",
        &[
            "check",
            "anti-absorbing",
            "--group",
            "Z^2",
            "--construct",
            "thmA",
            "--stages",
            "4",
        ],
    ),
    (
        "construct_isolated_z",
        &["construct", "isolated", "--group", "Z", "--stages", "6"],
    ),
    (
        "absorbing_isolated_z",
        &[
            "check",
            "absorbing",
            "--group",
            "Z",
            "--set",
            "construct:isolated:8",
            "--f-radius",
            "6",
            "--search-radius",
            "100",
        ],
    ),
    (
        "gap_isolated_z",
        &[
            "check",
            "gap",
            "--group",
            "Z",
            "--set",
            "construct:isolated:8",
            "--targets",
            "1,2,3,4,5,6,7",
            "--max-radius",
            "64",
        ],
    ),
    (
        "preorder_naturals_all",
        &[
            "limits",
            "preorder",
            "--group",
            "Z",
            "--a",
            "Z:naturals",
            "--b",
            "Z:all",
            "--schedule",
            "1,2,4,8,16",
            "--g-range",
            "40",
        ],
    ),
    (
        "preorder_negsq_zero",
        &[
            "limits",
            "preorder",
            "--group",
            "Z",
            "--a",
            "Z:nat-negsq",
            "--b",
            "e",
            "--schedule",
            "1,2,4,8",
            "--g-range",
            "40",
        ],
    ),
    (
        "patterns_mult3",
        &[
            "limits",
            "patterns",
            "--group",
            "Z",
            "--set",
            "Z:mult:3",
            "--radius",
            "6",
            "--g-range",
            "12",
        ],
    ),
    (
        "probe_mult3",
        &[
            "limits",
            "minimal-probe",
            "--group",
            "Z",
            "--set",
            "Z:mult:3",
            "--radius",
            "8",
            "--g-range",
            "10",
        ],
    ),
];

fn criterion_9() -> Outcome {
    let run = |args: &[&str]| -> Result<Vec<u8>, String> {
        let o = Command::new(env!("CARGO_BIN_EXE_coarse"))
            .args(args)
            .arg("--no-timestamp")
            .output()
            .map_err(err)?;
        Ok(o.stdout)
    };
    for (name, args) in DETERMINISM {
        let (first, second) = (run(args)?, run(args)?);
        ensure!(first == second, "{name}: two runs differ");
        let golden = std::fs::read(golden_dir().join(format!("{name}.out")))
            .map_err(|e| format!("{name}: {e}"))?;
        ensure!(first == golden, "{name}: output differs from golden file");
    }
    Ok(format!("{} outputs byte-identical", DETERMINISM.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("metric axioms and ball sizes", criterion_1),
        ("relation laws and subgroup examples", criterion_2),
        ("infinite divisibility construction", criterion_3),
        ("anti-absorbing construction", criterion_4),
        ("absorbing set with isolation gaps", criterion_5),
        ("translate-limit ground truths", criterion_6),
        ("greedy search vs brute force", criterion_7),
        ("paradoxical decomposition", criterion_8),
        ("CLI determinism", criterion_9),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        match res {
            Ok(detail) => println!("criterion {id} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id} FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
