use std::fmt::Write as _;

use anyhow::{anyhow, Context};
use clap::ValueEnum;
use coarse_core::absorbing::{
    absorb_witness, absorbing_upto, check_anti_absorbing, subgroup_nonabsorbing_cert,
    AntiAbsorbingCertificate, AntiPair,
};
use coarse_core::catalog::parse_set;
use coarse_core::constructions::{
    build_infdiv, build_injective_products, build_isolated_absorbing, build_sparse_chain,
    build_thm_a, resume_thm_a, ThmA, ThmAState,
};
use coarse_core::divisibility::{
    certify_not_2_divisible, check_division, check_paradoxical_witness, classical_free_paradox,
    DivisionError, DivisionWitness, ParadoxWitness,
};
use coarse_core::group::{parse_group, Element};
use coarse_core::lazy_set::{ideal_contains, IdealSpec};
use coarse_core::limits::{enumerate_patterns, minimal_type_probe, preorder_evidence};
use coarse_core::relations::{check_equiv, check_witness, find_witness, Budgets, EquivWitness};
use coarse_core::verdict::{Status, Verdict};
use coarse_core::{Group, LazySet, Window};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    Budget, CheckCommand, Cli, Command, ConstructArgs, Construction, IdealCommand, LimitsCommand,
};
use crate::output::{worst, write_atomic};

/// Malformed input; reported with exit code 64.
#[derive(Debug, thiserror::Error)]
#[error("{field}: {message}")]
pub struct UsageError {
    pub field: String,
    pub message: String,
}

fn usage<T, E: std::fmt::Display>(field: &str, r: Result<T, E>) -> anyhow::Result<T> {
    r.map_err(|e| {
        UsageError {
            field: field.into(),
            message: e.to_string(),
        }
        .into()
    })
}

fn missing(field: &str, why: &str) -> anyhow::Error {
    UsageError {
        field: field.into(),
        message: why.into(),
    }
    .into()
}

pub struct Outcome {
    pub command: String,
    pub group: String,
    pub status: Status,
    pub result: Value,
}

fn outcome<W: Serialize>(command: &str, g: &Group, v: &Verdict<W>) -> anyhow::Result<Outcome> {
    Ok(Outcome {
        command: command.into(),
        group: g.name(),
        status: v.status,
        result: serde_json::to_value(v)?,
    })
}

struct Ctx {
    g: Group,
}

impl Ctx {
    fn set(&self, field: &str, spec: &str) -> anyhow::Result<LazySet> {
        usage(field, parse_set(&self.g, spec))
    }

    fn elems(&self, field: &str, list: &str) -> anyhow::Result<Vec<Element>> {
        usage(field, self.g.parse_list(list))
    }

    fn elem(&self, field: &str, s: &str) -> anyhow::Result<Element> {
        usage(field, self.g.parse(s))
    }
}

fn budgets(b: &Budget) -> Budgets {
    Budgets {
        max_norm: b.max_norm,
        max_size: b.max_size,
    }
}

pub fn dispatch(cli: &Cli) -> anyhow::Result<Outcome> {
    let ctx = Ctx {
        g: usage("--group", parse_group(&cli.group))?,
    };
    match &cli.command {
        Command::Construct(a) => construct(&ctx, a),
        Command::Check(c) => check(&ctx, c),
        Command::Limits(l) => limits(&ctx, l),
        Command::Ideal(IdealCommand::Contains {
            generators,
            finite,
            b,
            radius,
            budget,
        }) => {
            let spec = match (generators, finite) {
                (Some(gens), _) => {
                    let sets = gens
                        .split(';')
                        .map(|s| ctx.set("--generators", s.trim()))
                        .collect::<anyhow::Result<Vec<_>>>()?;
                    IdealSpec::new(gens.clone(), sets)
                }
                (None, Some(n)) => IdealSpec::finite_sets(&ctx.g, *n)?,
                (None, None) => {
                    return Err(missing("--generators", "give --generators or --finite"))
                }
            };
            let b = ctx.set("--b", b)?;
            let v = ideal_contains(&spec, &b, Window::Ball(*radius), budgets(budget))?;
            outcome("ideal contains", &ctx.g, &v)
        }
    }
}

fn stage_count(stages: Option<usize>) -> anyhow::Result<usize> {
    stages.ok_or_else(|| missing("--stages", "required with --construct"))
}

fn construct(ctx: &Ctx, a: &ConstructArgs) -> anyhow::Result<Outcome> {
    let g = &ctx.g;
    let n = a.stages;
    let (result, file) = match a.name {
        Construction::ThmA => {
            let t = run_thm_a(g, a)?;
            let cert = t.certificate()?;
            let result = json!({
                "stages": t.state.n,
                "a": t.state.a,
                "c": t.state.c,
                "d": t.state.d,
                "stats": t.state.stats,
                "certificate": cert,
                "prefix_size": t.state.a_set.len(),
            });
            (result, t.set_file())
        }
        Construction::Infdiv => {
            let d = build_infdiv(g, n)?;
            let result = json!({
                "stages": n,
                "a": d.state.a,
                "c": d.state.c,
                "f_size": d.state.f.len(),
                "prefix_size": d.prefix().len(),
            });
            (result, d.set_file())
        }
        Construction::Isolated => {
            let c = build_isolated_absorbing(g, n)?;
            let result = json!({
                "stages": n,
                "g": c.g,
                "h": c.h,
                "certificate": c.certificate(),
                "prefix_size": c.elements.len(),
            });
            (result, c.set_file(g))
        }
        Construction::Sparse => {
            let c = build_sparse_chain(g, n)?;
            let file = coarse_core::lazy_set::SetFile::new(
                g,
                format!("construct:sparse:{n}"),
                coarse_core::lazy_set::Frontier::Stage(n as u32),
                c.elements.clone(),
            );
            (serde_json::to_value(&c)?, file)
        }
        Construction::Injective => {
            let x = ctx.elem(
                "--element",
                a.element
                    .as_deref()
                    .ok_or_else(|| missing("--element", "required for injective"))?,
            )?;
            let fam = build_injective_products(g, &x, n, a.truncation)?;
            let file = coarse_core::lazy_set::SetFile::new(
                g,
                format!("construct:injective:{n}"),
                coarse_core::lazy_set::Frontier::Stage(n as u32),
                fam.sets.concat(),
            );
            (serde_json::to_value(&fam)?, file)
        }
    };
    let mut result = result;
    if let Some(out) = &a.out {
        write_atomic(out, file.to_jsonl().as_bytes())?;
        result["set_file"] = json!({ "path": out.display().to_string(), "header": file.header });
    }
    Ok(Outcome {
        command: format!(
            "construct {}",
            a.name.to_possible_value().expect("named").get_name()
        ),
        group: g.name(),
        status: Status::Verified,
        result,
    })
}

fn run_thm_a(g: &Group, a: &ConstructArgs) -> anyhow::Result<ThmA> {
    if a.checkpoint.is_none() && a.resume.is_none() {
        return Ok(build_thm_a(g, a.stages)?);
    }
    let state = match &a.resume {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let (sg, st) = usage("--resume", ThmAState::from_json(&text))?;
            if sg != *g {
                return Err(missing(
                    "--resume",
                    &format!("state is for {}, not {}", sg.name(), g.name()),
                ));
            }
            st
        }
        None => ThmAState::empty(g),
    };
    let ckpt = a.checkpoint.clone();
    let t = resume_thm_a(g, state, a.stages, |st| {
        if let Some(p) = &ckpt {
            write_atomic(p, st.to_json().as_bytes()).map_err(|e| {
                coarse_core::constructions::ConstructionError::Checkpoint(e.to_string())
            })?;
        }
        Ok(())
    })?;
    Ok(t)
}

fn division_from_construction(
    g: &Group,
    c: Construction,
    n: usize,
) -> anyhow::Result<(LazySet, Vec<DivisionWitness>)> {
    match c {
        Construction::Infdiv => {
            let d = build_infdiv(g, n)?;
            Ok((d.set(), d.division_witnesses()))
        }
        Construction::ThmA => {
            let t = build_thm_a(g, n)?;
            Ok((t.set(), t.division_witnesses()))
        }
        _ => Err(missing(
            "--construct",
            "division witnesses come from infdiv or thmA",
        )),
    }
}

fn check(ctx: &Ctx, c: &CheckCommand) -> anyhow::Result<Outcome> {
    let g = &ctx.g;
    match c {
        CheckCommand::Bounded {
            a,
            b,
            radius,
            witness,
            budget,
        } => {
            let (a, b) = (ctx.set("--a", a)?, ctx.set("--b", b)?);
            let w = Window::Ball(*radius);
            let v = match witness {
                Some(f) => check_witness(&a, &b, &ctx.elems("--witness", f)?, w)?,
                None => find_witness(&a, &b, w, budgets(budget))?,
            };
            outcome("check bounded", g, &v)
        }
        CheckCommand::Equiv {
            a,
            b,
            radius,
            budget,
        } => {
            let (a, b) = (ctx.set("--a", a)?, ctx.set("--b", b)?);
            let v = check_equiv(&a, &b, Window::Ball(*radius), budgets(budget))?;
            outcome("check equiv", g, &v)
        }
        CheckCommand::Divisible {
            construct,
            stages,
            set,
            parts,
            translators,
            radius,
        } => {
            let (a, witnesses) = match (construct, set) {
                (Some(c), _) => division_from_construction(g, *c, stage_count(*stages)?)?,
                (None, Some(s)) => {
                    if parts.is_empty() || parts.len() != translators.len() {
                        return Err(missing("--part", "give one --translators list per --part"));
                    }
                    let w = DivisionWitness {
                        parts: parts
                            .iter()
                            .map(|p| ctx.set("--part", p))
                            .collect::<anyhow::Result<_>>()?,
                        witnesses: translators
                            .iter()
                            .map(|t| ctx.elems("--translators", t))
                            .collect::<anyhow::Result<_>>()?,
                    };
                    (ctx.set("--set", s)?, vec![w])
                }
                (None, None) => {
                    return Err(missing("--set", "give --set with parts or --construct"))
                }
            };
            let window = match radius {
                Some(r) => Window::Ball(*r),
                None if a.is_finite() => Window::Full,
                None => return Err(missing("--radius", "required for infinite sets")),
            };
            let mut levels = Vec::new();
            for w in &witnesses {
                levels.push(division_verdict(check_division(&a, w, window))?);
            }
            let status = worst(levels.iter().map(|v| v.status));
            Ok(Outcome {
                command: "check divisible".into(),
                group: g.name(),
                status,
                result: json!({ "set": a.provenance(), "levels": levels }),
            })
        }
        CheckCommand::Absorbing {
            set,
            f,
            f_radius,
            search_radius,
        } => {
            let a = ctx.set("--set", set)?;
            match (f, f_radius) {
                (Some(f), _) => {
                    let v = usage(
                        "--f",
                        absorb_witness(&a, &ctx.elems("--f", f)?, *search_radius),
                    )?;
                    outcome("check absorbing", g, &v)
                }
                (None, Some(r)) => {
                    let v = absorbing_upto(&a, *r, *search_radius)?;
                    outcome("check absorbing", g, &v)
                }
                (None, None) => Err(missing("--f", "give --f or --f-radius")),
            }
        }
        CheckCommand::AntiAbsorbing {
            construct,
            stages,
            set,
            t,
            d,
            subgroup,
            f,
            radius,
            max_reps,
        } => {
            if let Some(h) = subgroup {
                let h = ctx.set("--subgroup", h)?;
                let f = ctx.elems(
                    "--f",
                    f.as_deref()
                        .ok_or_else(|| missing("--f", "required with --subgroup"))?,
                )?;
                let r = radius.ok_or_else(|| missing("--radius", "required with --subgroup"))?;
                let v = usage(
                    "--subgroup",
                    subgroup_nonabsorbing_cert(&h, &f, Window::Ball(r), *max_reps),
                )?;
                return outcome("check anti-absorbing", g, &v);
            }
            let (a, cert) = match (construct, set) {
                (Some(Construction::ThmA), _) => {
                    let th = build_thm_a(g, stage_count(*stages)?)?;
                    (th.set(), th.certificate()?)
                }
                (Some(_), _) => return Err(missing("--construct", "certificates come from thmA")),
                (None, Some(s)) => {
                    let t = t
                        .as_deref()
                        .ok_or_else(|| missing("--t", "required with --set"))?;
                    let d = d
                        .as_deref()
                        .ok_or_else(|| missing("--d", "required with --set"))?;
                    let cert = AntiAbsorbingCertificate {
                        pairs: vec![AntiPair {
                            t: ctx.elems("--t", t)?,
                            d: ctx.elem("--d", d)?,
                            global: false,
                        }],
                    };
                    (ctx.set("--set", s)?, cert)
                }
                (None, None) => {
                    return Err(missing("--set", "give --set, --construct or --subgroup"))
                }
            };
            let window = match radius {
                Some(r) => Window::Ball(*r),
                None if a.is_finite() => Window::Full,
                None => return Err(missing("--radius", "required for infinite sets")),
            };
            let v = check_anti_absorbing(&a, &cert, window)?;
            let mut o = outcome("check anti-absorbing", g, &v)?;
            o.result["certificate"] = serde_json::to_value(&cert)?;
            Ok(o)
        }
        CheckCommand::Gap {
            set,
            targets,
            max_radius,
        } => {
            let a = ctx.set("--set", set)?;
            let v = usage(
                "--targets",
                certify_not_2_divisible(&a, targets, *max_radius),
            )?;
            outcome("check gap", g, &v)
        }
        CheckCommand::Paradoxical {
            set,
            first,
            second,
            radius,
        } => {
            let a = ctx.set("--set", set)?;
            let wit = if first.is_empty() && second.is_empty() {
                if !matches!(g.kind(), coarse_core::group::GroupKind::Free { rank } if rank >= 2) {
                    return Err(missing(
                        "--first",
                        "the default decomposition needs F_2 or F_3",
                    ));
                }
                classical_free_paradox(g)
            } else {
                ParadoxWitness {
                    first: pieces(ctx, "--first", first)?,
                    second: pieces(ctx, "--second", second)?,
                }
            };
            let v = division_verdict(check_paradoxical_witness(&a, &wit, Window::Ball(*radius)))?;
            outcome("check paradoxical", g, &v)
        }
    }
}

fn pieces(ctx: &Ctx, field: &str, specs: &[String]) -> anyhow::Result<Vec<(LazySet, Element)>> {
    specs
        .iter()
        .map(|p| {
            let (s, t) = p
                .rsplit_once(';')
                .ok_or_else(|| missing(field, "expected `SPEC;translator`"))?;
            Ok((ctx.set(field, s.trim())?, ctx.elem(field, t.trim())?))
        })
        .collect()
}

/// Overlapping pieces are a refutation with the shared element as counterexample.
fn division_verdict<W>(r: Result<Verdict<W>, DivisionError>) -> anyhow::Result<Verdict<Value>>
where
    W: Serialize,
{
    match r {
        Ok(v) => {
            let witness = v
                .witness
                .as_ref()
                .map(serde_json::to_value)
                .transpose()?
                .filter(|w| !w.is_null());
            Ok(Verdict {
                status: v.status,
                witness,
                counterexample: v.counterexample,
                radii: v.radii,
                budget: v.budget,
                note: v.note,
            })
        }
        Err(DivisionError::Overlap {
            element,
            first,
            second,
        }) => Ok(
            Verdict::refuted(element, coarse_core::verdict::Radii::window(Window::Full))
                .with_note(format!("pieces {first} and {second} overlap")),
        ),
        Err(e) => Err(anyhow!(e)),
    }
}

fn limits(ctx: &Ctx, l: &LimitsCommand) -> anyhow::Result<Outcome> {
    let g = &ctx.g;
    match l {
        LimitsCommand::Patterns {
            set,
            radius,
            g_range,
            csv,
        } => {
            let a = ctx.set("--set", set)?;
            let census = enumerate_patterns(&a, *radius, *g_range)?;
            if let Some(p) = csv {
                let mut out = String::from("pattern,count,first_sample\n");
                for c in &census.classes {
                    let _ = writeln!(out, "{},{},\"{}\"", hex_of(&c.bits), c.count, c.samples[0]);
                }
                write_atomic(p, out.as_bytes())?;
            }
            Ok(Outcome {
                command: "limits patterns".into(),
                group: g.name(),
                status: Status::Verified,
                result: json!({ "count": census.classes.len(), "census": census }),
            })
        }
        LimitsCommand::Preorder {
            a,
            b,
            schedule,
            g_range,
            b_prime,
            forward,
            backward,
        } => {
            let (a, b) = (ctx.set("--a", a)?, ctx.set("--b", b)?);
            if schedule.is_empty() {
                return Err(missing("--schedule", "needs at least one radius"));
            }
            let bp = match b_prime {
                Some(s) => {
                    let w = EquivWitness {
                        forward: ctx.elems("--forward", forward.as_deref().unwrap_or_default())?,
                        backward: ctx
                            .elems("--backward", backward.as_deref().unwrap_or_default())?,
                    };
                    Some((ctx.set("--b-prime", s)?, w))
                }
                None => None,
            };
            let v = usage(
                "--b-prime",
                preorder_evidence(&a, &b, schedule, *g_range, bp.as_ref().map(|(s, w)| (s, w))),
            )?;
            outcome("limits preorder", g, &v)
        }
        LimitsCommand::MinimalProbe {
            set,
            radius,
            g_range,
        } => {
            let a = ctx.set("--set", set)?;
            let report = minimal_type_probe(&a, *radius, *g_range)?;
            Ok(Outcome {
                command: "limits minimal-probe".into(),
                group: g.name(),
                status: if report.consistent {
                    Status::ConsistentUpTo
                } else {
                    Status::NoWitnessWithinBudget
                },
                result: serde_json::to_value(&report)?,
            })
        }
    }
}

fn hex_of(bits: &[u8]) -> String {
    bits.iter().map(|b| format!("{b:02x}")).collect()
}
