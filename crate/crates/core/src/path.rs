use serde::{Deserialize, Serialize};

use crate::state::{AnyState, Cost, Transition};

/// A start state followed by contiguous transitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub start: AnyState,
    pub edges: Vec<Transition>,
}

impl Path {
    pub fn empty(start: AnyState) -> Self {
        Self {
            start,
            edges: Vec::new(),
        }
    }

    pub fn cost(&self) -> Cost {
        self.edges.iter().map(|e| e.cost).sum()
    }

    pub fn end(&self) -> AnyState {
        self.edges.last().map_or(self.start, |e| e.to)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Every waypoint, the start included.
    pub fn states(&self) -> Vec<AnyState> {
        std::iter::once(self.start)
            .chain(self.edges.iter().map(|e| e.to))
            .collect()
    }

    /// Append `other`, which must start where `self` ends.
    pub fn extend(&mut self, other: &Path) {
        assert_eq!(self.end(), other.start, "paths are not contiguous");
        self.edges.extend_from_slice(&other.edges);
    }
}
