use super::{ElemKind, Element, GroupError, GroupKind, GroupModel};

/// Free group on `rank` letters; letters are stored as `±(i+1)`.
#[derive(Debug, Clone)]
pub struct FreeGroup {
    rank: usize,
}

impl FreeGroup {
    pub fn new(rank: usize) -> Result<Self, GroupError> {
        if !(1..=3).contains(&rank) {
            return Err(GroupError::UnknownGroup(format!("F_{rank}")));
        }
        Ok(FreeGroup { rank })
    }
}

pub(crate) fn letter_char(i: u32) -> char {
    char::from(b'a' + i as u8)
}

/// Freely reduces a letter sequence.
pub fn reduce(letters: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Parses `ab(a^-1)`, `aB`, `a^3b^-2` or `e` into (unreduced) letters.
pub(crate) fn parse_letters(s: &str, rank: usize) -> Result<Vec<i32>, String> {
    let t: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() || t == ['e'] || t == ['1'] {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < t.len() {
        let (c, mut exp, paren) = if t[i] == '(' {
            i += 1;
            let c = *t.get(i).ok_or("dangling `(`")?;
            i += 1;
            (c, 1i64, true)
        } else {
            let c = t[i];
            i += 1;
            (c, 1i64, false)
        };
        if !c.is_ascii_alphabetic() {
            return Err(format!("unexpected character `{c}`"));
        }
        let mut idx = (c.to_ascii_lowercase() as u8 - b'a') as i32 + 1;
        if c.is_ascii_uppercase() {
            idx = -idx;
        }
        if idx.unsigned_abs() as usize > rank {
            return Err(format!("letter `{c}` outside a rank {rank} free group"));
        }
        if t.get(i) == Some(&'^') {
            i += 1;
            let start = i;
            if t.get(i) == Some(&'-') {
                i += 1;
            }
            while i < t.len() && t[i].is_ascii_digit() {
                i += 1;
            }
            let num: String = t[start..i].iter().collect();
            exp = num.parse().map_err(|_| format!("bad exponent `{num}`"))?;
        }
        if paren {
            if t.get(i) != Some(&')') {
                return Err("missing `)`".into());
            }
            i += 1;
        }
        if exp.abs() > 1 << 20 {
            return Err("exponent too large".into());
        }
        let l = if exp < 0 { -idx } else { idx };
        for _ in 0..exp.abs() {
            out.push(l);
        }
    }
    Ok(out)
}

pub(crate) fn sphere_len(rank: usize, r: u32) -> u64 {
    if r == 0 {
        return 1;
    }
    let k = 2 * rank as u64;
    k * (k - 1).pow(r - 1)
}

fn idx_letter(i: u8) -> i32 {
    let base = (i / 2) as i32 + 1;
    if i % 2 == 0 {
        base
    } else {
        -base
    }
}

/// Lexicographic (canonical) enumeration of reduced words of a fixed length.
pub(crate) struct SphereIter {
    rank: usize,
    idx: Vec<u8>,
    done: bool,
}

impl SphereIter {
    pub(crate) fn new(rank: usize, len: usize) -> Self {
        let mut it = SphereIter {
            rank,
            idx: vec![0; len],
            done: false,
        };
        it.fill_from(0);
        it
    }

    fn min_after(prev: Option<u8>) -> u8 {
        match prev {
            Some(p) if p ^ 1 == 0 => 1,
            _ => 0,
        }
    }

    fn fill_from(&mut self, start: usize) {
        for i in start..self.idx.len() {
            let prev = if i == 0 { None } else { Some(self.idx[i - 1]) };
            self.idx[i] = Self::min_after(prev);
        }
    }

    fn advance(&mut self) {
        let top = 2 * self.rank as u8;
        let mut i = self.idx.len();
        while i > 0 {
            i -= 1;
            let mut v = self.idx[i] + 1;
            if i > 0 && v == self.idx[i - 1] ^ 1 {
                v += 1;
            }
            if v < top {
                self.idx[i] = v;
                self.fill_from(i + 1);
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for SphereIter {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        if self.done {
            return None;
        }
        let w: Vec<i32> = self.idx.iter().map(|&i| idx_letter(i)).collect();
        self.advance();
        Some(Element::word(&w))
    }
}

impl GroupModel for FreeGroup {
    fn name(&self) -> String {
        format!("F_{}", self.rank)
    }

    fn kind(&self) -> GroupKind {
        GroupKind::Free { rank: self.rank }
    }

    fn identity(&self) -> Element {
        Element::word(&[])
    }

    fn generators(&self) -> Vec<Element> {
        (1..=self.rank as i32)
            .flat_map(|i| [Element::word(&[i]), Element::word(&[-i])])
            .collect()
    }

    fn contains(&self, x: &Element) -> bool {
        x.kind() == ElemKind::Word
            && x.data()
                .iter()
                .all(|&l| l != 0 && l.unsigned_abs() as usize <= self.rank)
            && x.data().windows(2).all(|w| w[0] != -w[1])
    }

    fn mul(&self, a: &Element, b: &Element) -> Element {
        let (x, y) = (a.data(), b.data());
        let mut k = 0;
        while k < x.len() && k < y.len() && x[x.len() - 1 - k] == -y[k] {
            k += 1;
        }
        let mut out = super::Coords::with_capacity(x.len() + y.len() - 2 * k);
        out.extend_from_slice(&x[..x.len() - k]);
        out.extend_from_slice(&y[k..]);
        Element::new(ElemKind::Word, out)
    }

    fn inv(&self, a: &Element) -> Element {
        Element::new(ElemKind::Word, a.data().iter().rev().map(|l| -l).collect())
    }

    fn word_length(&self, x: &Element) -> Option<u32> {
        Some(x.data().len() as u32)
    }

    fn parse_element(&self, s: &str) -> Result<Element, GroupError> {
        let letters = parse_letters(s, self.rank).map_err(|reason| GroupError::Parse {
            input: s.to_string(),
            group: self.name(),
            reason,
        })?;
        Ok(Element::word(&reduce(&letters)))
    }
}
