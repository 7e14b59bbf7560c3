//! Planning with adaptive dimensionality over several low-dimensional
//! representations of a toy multi-modal robot.

pub mod adaptive;
pub mod domain;
pub mod egraph;
pub mod executive;
pub mod graph;
pub mod grid;
pub mod maps;
pub mod mrmha;
pub mod oracle;
pub mod path;
pub mod state;

pub use domain::{CostTable, GoalSpec, Terrain, World};
pub use graph::{AdaptiveGraph, HdRegion};
pub use path::Path;
pub use state::{AnyState, Controller, Cost, HdState, LdState, RepId, Stance, Transition, TransitionKind};
