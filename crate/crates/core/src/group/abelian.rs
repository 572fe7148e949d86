use super::{parse_int_list, Coords, ElemKind, Element, GroupError, GroupKind, GroupModel};

/// ℤ^d with the standard generators `±e_i`; word length is the ℓ¹ norm.
#[derive(Debug, Clone)]
pub struct FreeAbelian {
    rank: usize,
}

impl FreeAbelian {
    pub fn new(rank: usize) -> Result<Self, GroupError> {
        if !(1..=4).contains(&rank) {
            return Err(GroupError::UnknownGroup(format!("Z^{rank}")));
        }
        Ok(FreeAbelian { rank })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
}

impl GroupModel for FreeAbelian {
    fn name(&self) -> String {
        if self.rank == 1 {
            "Z".into()
        } else {
            format!("Z^{}", self.rank)
        }
    }

    fn kind(&self) -> GroupKind {
        GroupKind::Abelian { rank: self.rank }
    }

    fn identity(&self) -> Element {
        Element::new(ElemKind::Vector, Coords::from_elem(0, self.rank))
    }

    fn generators(&self) -> Vec<Element> {
        let mut out = Vec::with_capacity(2 * self.rank);
        for i in 0..self.rank {
            for s in [1, -1] {
                let mut c = Coords::from_elem(0, self.rank);
                c[i] = s;
                out.push(Element::new(ElemKind::Vector, c));
            }
        }
        out
    }

    fn contains(&self, x: &Element) -> bool {
        x.kind() == ElemKind::Vector && x.data().len() == self.rank
    }

    fn mul(&self, a: &Element, b: &Element) -> Element {
        let c: Coords = a
            .data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| x.checked_add(*y).expect("coordinate overflow"))
            .collect();
        Element::new(ElemKind::Vector, c)
    }

    fn inv(&self, a: &Element) -> Element {
        Element::new(ElemKind::Vector, a.data().iter().map(|x| -x).collect())
    }

    fn word_length(&self, x: &Element) -> Option<u32> {
        Some(x.data().iter().map(|v| v.unsigned_abs()).sum())
    }

    fn parse_element(&self, s: &str) -> Result<Element, GroupError> {
        let t = s.trim();
        let err = |reason: String| GroupError::Parse {
            input: s.to_string(),
            group: self.name(),
            reason,
        };
        let inner = match t.strip_prefix('(') {
            Some(r) => r
                .strip_suffix(')')
                .ok_or_else(|| err("unbalanced parentheses".into()))?,
            None => t,
        };
        let v = parse_int_list(inner).map_err(err)?;
        if v.len() != self.rank {
            return Err(err(format!(
                "expected {} coordinates, got {}",
                self.rank,
                v.len()
            )));
        }
        Ok(Element::vector(&v))
    }
}
