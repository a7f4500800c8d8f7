use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::density::DensityTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
    PreconditionFailed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Inconclusive => "inconclusive",
            Status::PreconditionFailed => "precondition_failed",
        }
    }

    pub fn from_bool(b: bool) -> Status {
        if b {
            Status::Holds
        } else {
            Status::Fails
        }
    }

    /// Conjunction: any failure wins, then any inconclusive.
    pub fn and(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (PreconditionFailed, _) | (_, PreconditionFailed) => PreconditionFailed,
            (Fails, _) | (_, Fails) => Fails,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Holds,
        }
    }

    pub fn all<I: IntoIterator<Item = Status>>(it: I) -> Status {
        it.into_iter().fold(Status::Holds, Status::and)
    }

    /// Disjunction: any success wins, then any inconclusive.
    pub fn or(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Holds, _) | (_, Holds) => Holds,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (PreconditionFailed, _) | (_, PreconditionFailed) => PreconditionFailed,
            _ => Fails,
        }
    }

    pub fn any<I: IntoIterator<Item = Status>>(it: I) -> Status {
        it.into_iter().fold(Status::Fails, Status::or)
    }

    pub fn negate(self) -> Status {
        match self {
            Status::Holds => Status::Fails,
            Status::Fails => Status::Holds,
            s => s,
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of a test together with whatever per-scale data produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traces: Vec<DensityTrace>,
}

impl Verdict {
    pub fn new(status: Status) -> Self {
        Verdict { status, notes: Vec::new(), values: BTreeMap::new(), traces: Vec::new() }
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn value(mut self, key: impl Into<String>, v: f64) -> Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn with_trace(mut self, t: DensityTrace) -> Self {
        self.traces.push(t);
        self
    }

    pub fn push_note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn set_value(&mut self, key: impl Into<String>, v: f64) {
        self.values.insert(key.into(), v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjunction_order() {
        use Status::*;
        assert_eq!(Holds.and(Holds), Holds);
        assert_eq!(Holds.and(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.and(Fails), Fails);
        assert_eq!(Status::all([Holds, Fails, Inconclusive]), Fails);
        assert_eq!(Status::all(std::iter::empty()), Holds);
    }
}
