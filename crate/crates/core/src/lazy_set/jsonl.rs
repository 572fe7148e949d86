//! JSONL persistence: a JSON header line followed by one element per line
//! in canonical syntax.

use serde::{Deserialize, Serialize};

use super::{LazySet, SetError};
use crate::group::{parse_group, Element, Group};

pub const SET_FORMAT: &str = "coarse-set/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Frontier {
    /// The file holds the whole set.
    Complete,
    /// Every element of word length at most this value is present.
    Length(u32),
    /// Prefix of a staged construction after this many stages.
    Stage(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetHeader {
    pub format: String,
    pub group: String,
    pub provenance: String,
    pub frontier: Frontier,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFile {
    pub header: SetHeader,
    pub elements: Vec<Element>,
}

impl SetFile {
    pub fn new(
        group: &Group,
        provenance: impl Into<String>,
        frontier: Frontier,
        elements: Vec<Element>,
    ) -> Self {
        SetFile {
            header: SetHeader {
                format: SET_FORMAT.into(),
                group: group.name(),
                provenance: provenance.into(),
                frontier,
                count: elements.len(),
            },
            elements,
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for x in &self.elements {
            out.push_str(&x.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<(Group, SetFile), SetError> {
        let mut lines = text.lines();
        let head = lines
            .next()
            .ok_or_else(|| SetError::File("empty file".into()))?;
        let header: SetHeader =
            serde_json::from_str(head).map_err(|e| SetError::File(format!("bad header: {e}")))?;
        if header.format != SET_FORMAT {
            return Err(SetError::File(format!(
                "unsupported format `{}`",
                header.format
            )));
        }
        let group = parse_group(&header.group)?;
        let mut elements = Vec::with_capacity(header.count);
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let x = group
                .parse(line)
                .map_err(|e| SetError::File(format!("line {}: {e}", i + 2)))?;
            elements.push(x);
        }
        if elements.len() != header.count {
            return Err(SetError::File(format!(
                "header announces {} elements, found {}",
                header.count,
                elements.len()
            )));
        }
        Ok((group, SetFile { header, elements }))
    }

    /// The stored elements as a finite set.
    pub fn to_set(&self, group: &Group) -> LazySet {
        LazySet::finite(group, self.elements.iter().cloned())
            .with_provenance(self.header.provenance.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let f2 = Group::free(2);
        let els = f2.parse_list("e,a,ab(a^-1),(b^-1)").unwrap();
        let file = SetFile::new(&f2, "test", Frontier::Stage(3), els);
        let text = file.to_jsonl();
        let (g, back) = SetFile::parse(&text).unwrap();
        assert_eq!(g.name(), "F_2");
        assert_eq!(back, file);
        assert_eq!(back.to_jsonl(), text);
    }

    #[test]
    fn count_mismatch_rejected() {
        let z = Group::integers(1);
        let file = SetFile::new(&z, "t", Frontier::Complete, z.parse_list("1,2").unwrap());
        let text = file.to_jsonl().replace("\"count\":2", "\"count\":3");
        assert!(SetFile::parse(&text).is_err());
    }
}
