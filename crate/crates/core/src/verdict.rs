use serde::{Deserialize, Serialize};

use crate::group::Element;
use crate::lazy_set::Window;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Verified,
    RefutedUpTo,
    ConsistentUpTo,
    NoWitnessWithinBudget,
}

/// Where a verdict was evaluated. `global` is set only when a theorem-backed
/// argument extends the finite check to the whole group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Radii {
    pub window: Window,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub padded: Option<u32>,
    pub global: bool,
}

impl Radii {
    pub fn window(w: Window) -> Radii {
        Radii {
            window: w,
            padded: None,
            global: false,
        }
    }

    pub fn padded(w: Window, pad: u32) -> Radii {
        Radii {
            window: w,
            padded: w.radius().map(|r| r + pad),
            global: false,
        }
    }

    pub fn global(mut self) -> Radii {
        self.global = true;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_norm: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_size: Option<usize>,
    /// Largest distance actually observed (for instance `max d(a, B)`).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub observed: Option<u32>,
    /// Size of the exhausted search space.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub searched: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict<W> {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<W>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<Element>,
    pub radii: Radii,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub budget: Option<Budget>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl<W> Verdict<W> {
    fn base(status: Status, radii: Radii) -> Self {
        Verdict {
            status,
            witness: None,
            counterexample: None,
            radii,
            budget: None,
            note: None,
        }
    }

    pub fn verified(witness: W, radii: Radii) -> Self {
        Verdict {
            witness: Some(witness),
            ..Verdict::base(Status::Verified, radii)
        }
    }

    pub fn refuted(counterexample: Element, radii: Radii) -> Self {
        Verdict {
            counterexample: Some(counterexample),
            ..Verdict::base(Status::RefutedUpTo, radii)
        }
    }

    pub fn consistent(radii: Radii) -> Self {
        Verdict::base(Status::ConsistentUpTo, radii)
    }

    pub fn no_witness(radii: Radii, budget: Budget) -> Self {
        Verdict {
            budget: Some(budget),
            ..Verdict::base(Status::NoWitnessWithinBudget, radii)
        }
    }

    pub fn with_witness(mut self, w: W) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_counterexample(mut self, x: Element) -> Self {
        self.counterexample = Some(x);
        self
    }

    pub fn with_budget(mut self, b: Budget) -> Self {
        self.budget = Some(b);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn is_verified(&self) -> bool {
        self.status == Status::Verified
    }

    pub fn is_refuted(&self) -> bool {
        self.status == Status::RefutedUpTo
    }

    pub fn map<V>(self, f: impl FnOnce(W) -> V) -> Verdict<V> {
        Verdict {
            status: self.status,
            witness: self.witness.map(f),
            counterexample: self.counterexample,
            radii: self.radii,
            budget: self.budget,
            note: self.note,
        }
    }
}
