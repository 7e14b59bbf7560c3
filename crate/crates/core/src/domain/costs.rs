use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::Cost;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CostTableError {
    #[error("cost `{0}` must be positive")]
    NonPositive(&'static str),
    #[error("walk_step ({walk}) exceeds rubble_substep ({rubble}); WALK would overestimate standing steps")]
    WalkAboveRubble { walk: Cost, rubble: Cost },
    #[error("rep_switch ({switch}) exceeds stance_change ({stance}); representation switches would overestimate stance changes")]
    SwitchAboveStance { switch: Cost, stance: Cost },
}

/// Primitive action costs.
///
/// Low-dimensional actions must never cost more than the full-body motions
/// they abstract, otherwise planning in the projected spaces stops being a
/// lower bound; [`CostTable::new`] rejects tables that break this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct CostTable {
    pub walk_step: Cost,
    pub rotate: Cost,
    pub crawl_step: Cost,
    pub stance_change: Cost,
    pub rep_switch: Cost,
    pub rubble_substep: Cost,
    pub weight_shift: Cost,
    /// Surcharge for re-tagging a full-body successor into a low-dimensional
    /// representation. Zero by default; 1 gives every edge a positive cost.
    pub projection: Cost,
}

impl Default for CostTable {
    fn default() -> Self {
        Self {
            walk_step: 2,
            rotate: 1,
            crawl_step: 3,
            stance_change: 5,
            rep_switch: 5,
            rubble_substep: 4,
            weight_shift: 1,
            projection: 0,
        }
    }
}

impl CostTable {
    pub fn new(table: CostTable) -> Result<CostTable, CostTableError> {
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<(), CostTableError> {
        for (name, v) in [
            ("walk_step", self.walk_step),
            ("rotate", self.rotate),
            ("crawl_step", self.crawl_step),
            ("stance_change", self.stance_change),
            ("rep_switch", self.rep_switch),
            ("rubble_substep", self.rubble_substep),
            ("weight_shift", self.weight_shift),
        ] {
            if v == 0 {
                return Err(CostTableError::NonPositive(name));
            }
        }
        if self.walk_step > self.rubble_substep {
            return Err(CostTableError::WalkAboveRubble {
                walk: self.walk_step,
                rubble: self.rubble_substep,
            });
        }
        if self.rep_switch > self.stance_change {
            return Err(CostTableError::SwitchAboveStance {
                switch: self.rep_switch,
                stance: self.stance_change,
            });
        }
        Ok(())
    }

    /// Cheapest single action of any kind.
    pub fn min_action(&self) -> Cost {
        [
            self.walk_step,
            self.rotate,
            self.crawl_step,
            self.stance_change,
            self.rep_switch,
            self.rubble_substep,
            self.weight_shift,
        ]
        .into_iter()
        .min()
        .unwrap()
    }
}
