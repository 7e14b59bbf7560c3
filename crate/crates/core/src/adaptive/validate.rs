use thiserror::Error;

use crate::domain::{executable_macro_successors, hd_successors, is_goal, CostTable, GoalSpec, World};
use crate::egraph::snap_cost;
use crate::path::Path;
use crate::state::{AnyState, Cost, HdState, Transition, TransitionKind};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Violation {
    #[error("path starts at {found}, expected {expected}")]
    WrongStart { expected: AnyState, found: AnyState },
    #[error("path ends at {0}, which is not a goal state")]
    WrongGoal(AnyState),
    #[error("edge {index} ({edge}) does not start where the previous edge ended")]
    Discontinuous { index: usize, edge: Transition },
    #[error("edge {index} ({edge}) has a non full-body endpoint")]
    NotFullBody { index: usize, edge: Transition },
    #[error("edge {index} ({edge}) has kind {kind}, which is not executable")]
    NotExecutable {
        index: usize,
        edge: Transition,
        kind: TransitionKind,
    },
    #[error("edge {index} ({edge}) is not a legal transition")]
    Illegal { index: usize, edge: Transition },
    #[error("edge {index} ({edge}) costs {found}, expected {expected}")]
    WrongCost {
        index: usize,
        edge: Transition,
        expected: Cost,
        found: Cost,
    },
}

/// Check that `path` is an executable full-body path from `start` to `goal`:
/// every edge a full-body primitive, a controller macro or a snap motion,
/// each with its exact cost.
pub fn validate_path(
    w: &World,
    c: &CostTable,
    path: &Path,
    start: &HdState,
    goal: &GoalSpec,
    snap_cost_per_field: Cost,
) -> Result<(), Violation> {
    if path.start != AnyState::Hd(*start) {
        return Err(Violation::WrongStart {
            expected: (*start).into(),
            found: path.start,
        });
    }
    let mut at = path.start;
    for (index, edge) in path.edges.iter().enumerate() {
        let edge = *edge;
        if edge.from != at {
            return Err(Violation::Discontinuous { index, edge });
        }
        at = edge.to;
        let (AnyState::Hd(from), AnyState::Hd(to)) = (edge.from, edge.to) else {
            return Err(Violation::NotFullBody { index, edge });
        };
        let expected = match edge.kind {
            TransitionKind::HdPrimitive => legal_cost(hd_successors(w, c, &from), &edge),
            TransitionKind::HdMacro(_) => legal_cost(executable_macro_successors(w, c, &from), &edge),
            TransitionKind::Snap => {
                let same_place = (from.x, from.y, from.stance) == (to.x, to.y, to.stance);
                (same_place && from != to).then(|| snap_cost(c, snap_cost_per_field, &from, &to))
            }
            kind => return Err(Violation::NotExecutable { index, edge, kind }),
        };
        match expected {
            None => return Err(Violation::Illegal { index, edge }),
            Some(e) if e != edge.cost => {
                return Err(Violation::WrongCost {
                    index,
                    edge,
                    expected: e,
                    found: edge.cost,
                })
            }
            Some(_) => {}
        }
    }
    if !is_goal(goal, &at) {
        return Err(Violation::WrongGoal(at));
    }
    Ok(())
}

fn legal_cost(candidates: Vec<Transition>, edge: &Transition) -> Option<Cost> {
    candidates
        .iter()
        .filter(|t| t.to == edge.to && t.kind == edge.kind)
        .map(|t| t.cost)
        .min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Terrain;
    use crate::state::{Controller, Stance};

    fn setup() -> (World, CostTable, HdState, GoalSpec) {
        (
            World::filled(6, 3, Terrain::Free),
            CostTable::default(),
            HdState::new(1, 1, 0, Stance::Stand, 0),
            GoalSpec::new(3, 1),
        )
    }

    fn walk(a: HdState, b: HdState) -> Transition {
        Transition::new(a, b, 2, TransitionKind::HdMacro(Controller::Walk))
    }

    #[test]
    fn macro_path_is_valid() {
        let (w, c, s, g) = setup();
        let m = HdState::new(2, 1, 0, Stance::Stand, 0);
        let e = HdState::new(3, 1, 0, Stance::Stand, 0);
        let p = Path {
            start: s.into(),
            edges: vec![walk(s, m), walk(m, e)],
        };
        assert_eq!(validate_path(&w, &c, &p, &s, &g, 1), Ok(()));
    }

    #[test]
    fn teleport_is_named() {
        let (w, c, s, g) = setup();
        let e = HdState::new(3, 1, 0, Stance::Stand, 0);
        let p = Path {
            start: s.into(),
            edges: vec![walk(s, e)],
        };
        assert!(matches!(
            validate_path(&w, &c, &p, &s, &g, 1),
            Err(Violation::Illegal { index: 0, .. })
        ));
    }

    #[test]
    fn wrong_cost_is_reported() {
        let (w, c, s, g) = setup();
        let m = HdState::new(2, 1, 0, Stance::Stand, 0);
        let e = HdState::new(3, 1, 0, Stance::Stand, 0);
        let mut bad = walk(m, e);
        bad.cost = 1;
        let p = Path {
            start: s.into(),
            edges: vec![walk(s, m), bad],
        };
        assert!(matches!(
            validate_path(&w, &c, &p, &s, &g, 1),
            Err(Violation::WrongCost {
                index: 1,
                expected: 2,
                found: 1,
                ..
            })
        ));
    }

    #[test]
    fn snap_and_goal_checks() {
        let (w, c, s, g) = setup();
        let turned = HdState::new(1, 1, 2, Stance::Stand, 3);
        let p = Path {
            start: s.into(),
            edges: vec![Transition::new(s, turned, 3, TransitionKind::Snap)],
        };
        assert_eq!(
            validate_path(&w, &c, &p, &s, &g, 1),
            Err(Violation::WrongGoal(turned.into()))
        );
        let g2 = GoalSpec::new(1, 1);
        assert_eq!(validate_path(&w, &c, &p, &s, &g2, 1), Ok(()));
    }
}
