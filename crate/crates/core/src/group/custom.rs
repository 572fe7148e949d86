use std::sync::Arc;

use super::{parse_int_list, ElemKind, Element, Group, GroupError, GroupKind, GroupModel};

type BinOp = dyn Fn(&[i32], &[i32]) -> Vec<i32> + Send + Sync;
type UnOp = dyn Fn(&[i32]) -> Vec<i32> + Send + Sync;
type Pred = dyn Fn(&[i32]) -> bool + Send + Sync;

/// User supplied group: canonical tuples, a multiplication that returns
/// canonical tuples, and a symmetric generating set. Word lengths come
/// from breadth-first search.
pub struct CustomGroup {
    name: String,
    identity: Vec<i32>,
    generators: Vec<Vec<i32>>,
    mul: Arc<BinOp>,
    inv: Arc<UnOp>,
    valid: Arc<Pred>,
}

impl CustomGroup {
    pub fn new(
        name: impl Into<String>,
        identity: Vec<i32>,
        generators: Vec<Vec<i32>>,
        mul: impl Fn(&[i32], &[i32]) -> Vec<i32> + Send + Sync + 'static,
        inv: impl Fn(&[i32]) -> Vec<i32> + Send + Sync + 'static,
        valid: impl Fn(&[i32]) -> bool + Send + Sync + 'static,
    ) -> Self {
        CustomGroup {
            name: name.into(),
            identity,
            generators,
            mul: Arc::new(mul),
            inv: Arc::new(inv),
            valid: Arc::new(valid),
        }
    }

    pub fn into_group(self) -> Result<Group, GroupError> {
        Group::new(Arc::new(self))
    }
}

impl GroupModel for CustomGroup {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn kind(&self) -> GroupKind {
        GroupKind::Other
    }

    fn identity(&self) -> Element {
        Element::tuple(&self.identity)
    }

    fn generators(&self) -> Vec<Element> {
        self.generators.iter().map(|g| Element::tuple(g)).collect()
    }

    fn contains(&self, x: &Element) -> bool {
        x.kind() == ElemKind::Tuple && (self.valid)(x.data())
    }

    fn mul(&self, a: &Element, b: &Element) -> Element {
        Element::tuple(&(self.mul)(a.data(), b.data()))
    }

    fn inv(&self, a: &Element) -> Element {
        Element::tuple(&(self.inv)(a.data()))
    }

    fn parse_element(&self, s: &str) -> Result<Element, GroupError> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .unwrap_or(t);
        let v = parse_int_list(inner).map_err(|reason| GroupError::Parse {
            input: s.to_string(),
            group: self.name.clone(),
            reason,
        })?;
        Ok(Element::tuple(&v))
    }
}

/// The infinite dihedral group as pairs `[t, s]` (rotation `t`, flip bit `s`)
/// generated by `r = [1,0]`, `r⁻¹ = [-1,0]` and the involution `f = [0,1]`.
pub fn infinite_dihedral() -> Group {
    CustomGroup::new(
        "D_inf",
        vec![0, 0],
        vec![vec![1, 0], vec![-1, 0], vec![0, 1]],
        |a, b| {
            let t = if a[1] == 0 { a[0] + b[0] } else { a[0] - b[0] };
            vec![t, a[1] ^ b[1]]
        },
        |a| {
            if a[1] == 0 {
                vec![-a[0], 0]
            } else {
                vec![a[0], 1]
            }
        },
        |a| a.len() == 2 && (a[1] == 0 || a[1] == 1),
    )
    .into_group()
    .expect("dihedral model is valid")
}
