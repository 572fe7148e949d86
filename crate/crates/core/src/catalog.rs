//! Named set builders shared by the CLI and the tests.
//!
//! Syntax: a spec is one or more terms joined by `|` (union). A term is one of
//! `all`, `empty`, `e`, `ball:R`, `{x,y,...}`, `subgroup:<g>`,
//! `Z:evens`, `Z:odds`, `Z:squares`, `Z:naturals`, `Z:all`, `Z:nat-negsq`,
//! `Z:mult:k`, `F:starts:<letter>`, `file:<path>`, `construct:<name>:<stage>`,
//! optionally followed by `@<g>` for the right translate `A·g`.

use thiserror::Error;

use crate::constructions::{
    build_infdiv, build_isolated_absorbing, build_sparse_chain, build_thm_a, ConstructionError,
};
use crate::divisibility::starts_with;
use crate::group::{Element, GroupError, GroupKind};
use crate::lazy_set::{LazySet, SetError, SetFile};
use crate::Group;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown set `{0}`")]
    Unknown(String),
    #[error("`{name}` needs {needs}")]
    WrongGroup { name: String, needs: &'static str },
    #[error("bad parameter in `{0}`")]
    Parameter(String),
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("file group {file} does not match {expected}")]
    GroupMismatch { file: String, expected: String },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

pub const CONSTRUCTIONS: [&str; 4] = ["thmA", "infdiv", "isolated", "sparse"];

pub fn parse_set(g: &Group, spec: &str) -> Result<LazySet, CatalogError> {
    let mut terms = spec.split('|').map(|t| term(g, t.trim()));
    let mut acc = terms
        .next()
        .ok_or_else(|| CatalogError::Unknown(spec.into()))??;
    for t in terms {
        acc = acc.union(&t?)?;
    }
    Ok(acc.with_provenance(spec))
}

fn term(g: &Group, spec: &str) -> Result<LazySet, CatalogError> {
    // `{...}` may contain `@`-free words only, so split on the last `@` after the braces.
    let brace_end = spec.rfind('}').unwrap_or(0);
    if let Some(at) = spec[brace_end..].rfind('@').map(|i| i + brace_end) {
        let base = term(g, &spec[..at])?;
        let x = g.parse(&spec[at + 1..])?;
        return Ok(base.right_translate(&x).with_provenance(spec));
    }
    let set = named(g, spec)?;
    Ok(set.with_provenance(spec))
}

fn integers_only(g: &Group, name: &str) -> Result<(), CatalogError> {
    if g.kind() == (GroupKind::Abelian { rank: 1 }) {
        Ok(())
    } else {
        Err(CatalogError::WrongGroup {
            name: name.into(),
            needs: "the group Z",
        })
    }
}

fn first(x: &Element) -> i32 {
    x.data()[0]
}

fn is_square(v: i64) -> bool {
    v >= 0 && {
        let s = (v as f64).sqrt().round() as i64;
        s * s == v
    }
}

fn named(g: &Group, spec: &str) -> Result<LazySet, CatalogError> {
    match spec {
        "all" => return Ok(LazySet::all(g)),
        "empty" => return Ok(LazySet::empty(g)),
        "e" => return Ok(LazySet::finite(g, [g.identity()]).as_subgroup()),
        _ => {}
    }
    if let Some(inner) = spec.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
        return Ok(LazySet::finite(g, g.parse_list(inner)?));
    }
    if let Some(r) = spec.strip_prefix("ball:") {
        let r: u32 = r
            .parse()
            .map_err(|_| CatalogError::Parameter(spec.into()))?;
        return Ok(LazySet::finite(g, g.ball(r)?.iter().cloned()));
    }
    if let Some(x) = spec.strip_prefix("subgroup:") {
        return Ok(cyclic_subgroup(g, g.parse(x)?));
    }
    if let Some(l) = spec.strip_prefix("F:starts:") {
        if !matches!(g.kind(), GroupKind::Free { .. }) {
            return Err(CatalogError::WrongGroup {
                name: spec.into(),
                needs: "a free group",
            });
        }
        let w = g.parse(l)?;
        if w.data().len() != 1 {
            return Err(CatalogError::Parameter(spec.into()));
        }
        return Ok(starts_with(g, w.data()[0]));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::File {
            path: path.into(),
            source,
        })?;
        let (fg, file) = SetFile::parse(&text)?;
        if fg != *g {
            return Err(CatalogError::GroupMismatch {
                file: fg.name(),
                expected: g.name(),
            });
        }
        return Ok(file.to_set(g));
    }
    if let Some(rest) = spec.strip_prefix("construct:") {
        let (name, stage) = rest
            .rsplit_once(':')
            .ok_or_else(|| CatalogError::Parameter(spec.into()))?;
        let n: usize = stage
            .parse()
            .map_err(|_| CatalogError::Parameter(spec.into()))?;
        return construct(g, name, n);
    }
    if let Some(z) = spec.strip_prefix("Z:") {
        integers_only(g, spec)?;
        let set = match z {
            "evens" => LazySet::scanned(g, spec, |x| first(x) % 2 == 0).as_subgroup(),
            "odds" => LazySet::scanned(g, spec, |x| first(x) % 2 != 0),
            "squares" => LazySet::scanned(g, spec, |x| is_square(first(x) as i64)),
            "naturals" => LazySet::scanned(g, spec, |x| first(x) >= 1),
            "all" => LazySet::all(g),
            "nat-negsq" => LazySet::scanned(g, spec, |x| {
                first(x) >= 1 || (first(x) < 0 && is_square(-(first(x) as i64)))
            }),
            _ => {
                let k: i32 = z
                    .strip_prefix("mult:")
                    .and_then(|k| k.parse().ok())
                    .filter(|&k| k > 0)
                    .ok_or_else(|| CatalogError::Unknown(spec.into()))?;
                LazySet::scanned(g, spec, move |x| first(x) % k == 0).as_subgroup()
            }
        };
        return Ok(set);
    }
    Err(CatalogError::Unknown(spec.into()))
}

/// `⟨x⟩`. Membership searches `xᵐ` for `|m| ≤ |y|`, which is exhaustive in
/// the built-in groups since `|xᵐ| ≥ |m|` there for `x ≠ e`.
fn cyclic_subgroup(g: &Group, x: Element) -> LazySet {
    let grp = g.clone();
    let name = format!("subgroup:{x}");
    let xinv = g.inv(&x);
    let e = g.identity();
    LazySet::scanned(g, name, move |y: &Element| {
        if *y == e {
            return true;
        }
        if x == e {
            return false;
        }
        let bound = grp.length(y);
        let (mut p, mut q) = (x.clone(), xinv.clone());
        for _ in 0..bound {
            if p == *y || q == *y {
                return true;
            }
            p = grp.mul(&p, &x);
            q = grp.mul(&q, &xinv);
        }
        false
    })
    .as_subgroup()
}

/// The finite prefix after `n` stages of a named construction.
pub fn construct(g: &Group, name: &str, n: usize) -> Result<LazySet, CatalogError> {
    let set = match name {
        "thmA" => build_thm_a(g, n)?.set(),
        "infdiv" => build_infdiv(g, n)?.set(),
        "isolated" => build_isolated_absorbing(g, n)?.set(g),
        "sparse" => {
            let c = build_sparse_chain(g, n)?;
            LazySet::finite(g, c.elements).with_provenance(format!("construct:sparse:{n}"))
        }
        _ => return Err(CatalogError::Unknown(format!("construct:{name}"))),
    };
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lazy_set::Window;

    fn window(g: &Group, spec: &str, r: u32) -> Vec<Element> {
        parse_set(g, spec)
            .unwrap()
            .restrict(Window::Ball(r))
            .unwrap()
    }

    #[test]
    fn integer_sets() {
        let z = Group::integers(1);
        assert_eq!(
            window(&z, "Z:evens", 5),
            z.parse_list("0,2,-2,4,-4").unwrap()
        );
        assert_eq!(
            window(&z, "Z:squares", 10),
            z.parse_list("0,1,4,9").unwrap()
        );
        assert_eq!(
            window(&z, "Z:nat-negsq", 4),
            z.parse_list("1,-1,2,3,4,-4").unwrap()
        );
        assert_eq!(
            window(&z, "Z:evens@3", 4),
            z.parse_list("1,-1,3,-3").unwrap()
        );
        assert_eq!(
            window(&z, "Z:naturals | Z:mult:3", 3),
            z.parse_list("0,1,2,3,-3").unwrap()
        );
        assert_eq!(window(&z, "{5,-1}|e", 9), z.parse_list("0,-1,5").unwrap());
        assert_eq!(window(&z, "ball:1", 3).len(), 3);
        assert_eq!(
            window(&z, "subgroup:3", 7),
            z.parse_list("0,3,-3,6,-6").unwrap()
        );
    }

    #[test]
    fn free_sets() {
        let f = Group::free(2);
        assert_eq!(
            window(&f, "subgroup:b@a", 2),
            f.parse_list("a,ba,Ba").unwrap()
        );
        assert_eq!(window(&f, "F:starts:a", 1), f.parse_list("a").unwrap());
        assert!(matches!(
            parse_set(&f, "Z:evens"),
            Err(CatalogError::WrongGroup { .. })
        ));
        assert!(matches!(
            parse_set(&f, "nonsense"),
            Err(CatalogError::Unknown(_))
        ));
    }

    #[test]
    fn constructions_and_files() {
        let z = Group::integers(1);
        assert_eq!(window(&z, "construct:infdiv:3", 20).len(), 14);
        assert_eq!(
            window(&z, "construct:thmA:1", 3),
            z.parse_list("0,1").unwrap()
        );
        let path = std::env::temp_dir().join(format!("catalog-{}.jsonl", std::process::id()));
        let file = crate::constructions::build_infdiv(&z, 2)
            .unwrap()
            .set_file();
        std::fs::write(&path, file.to_jsonl()).unwrap();
        let spec = format!("file:{}", path.display());
        assert_eq!(window(&z, &spec, 10).len(), 6);
        assert!(matches!(
            parse_set(&Group::integers(2), &spec),
            Err(CatalogError::GroupMismatch { .. })
        ));
        std::fs::remove_file(path).unwrap();
    }
}
