//! The multi-modal grid domain: terrain, action costs and the primitive
//! transition sets of every representation.
//!
//! Full-body (HD) primitives:
//! * rotate by one heading step, advancing the gait phase;
//! * weight shift in place, advancing the gait phase;
//! * stance change STAND <-> CROUCH on FREE cells, resetting the phase;
//! * a forward step along the heading. Standing steps need FREE cells,
//!   crouched steps go along cardinal headings over FREE or LOW. Any step
//!   touching RUBBLE must be taken standing from phase 3, costs
//!   `rubble_substep` and resets the phase.
//!
//! WALK moves forward over standable cells (FREE or RUBBLE) and turns in
//! place; its controller only runs on FREE ground. CRAWL moves 4-connected
//! over FREE and LOW cells and is always executable.

mod costs;
mod world;

use serde::{Deserialize, Serialize};

pub use costs::{CostTable, CostTableError};
pub use world::{load_map, MapError, Terrain, World};

use crate::graph::{cross_project, project};
use crate::state::{
    rotate_heading, AnyState, Controller, HdState, LdState, RepId, Stance, Transition, TransitionKind, HEADINGS,
    HEADING_OFFSETS, PHASES,
};

/// Goal region: every state whose cell equals `cell`, in any representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoalSpec {
    pub x: i32,
    pub y: i32,
}

impl GoalSpec {
    pub fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn cell(&self) -> (i32, i32) {
        (self.x, self.y)
    }
}

pub fn is_goal(spec: &GoalSpec, s: &AnyState) -> bool {
    s.cell() == spec.cell()
}

/// Whether `s` is a valid configuration on `w`.
pub fn hd_valid(w: &World, s: &HdState) -> bool {
    s.theta < HEADINGS && s.phase < PHASES && w.admits(s.x, s.y, s.stance)
}

/// Whether `l` is a valid state of its representation: WALK states need a
/// standable cell, CRAWL states a crouchable one.
pub fn ld_valid(w: &World, l: &LdState) -> bool {
    match *l {
        LdState::Walk { x, y, theta } => theta < HEADINGS && w.admits(x, y, Stance::Stand),
        LdState::Crawl { x, y } => w.admits(x, y, Stance::Crouch),
    }
}

pub fn state_valid(w: &World, s: &AnyState) -> bool {
    match s {
        AnyState::Hd(h) => hd_valid(w, h),
        AnyState::Ld(l) => ld_valid(w, l),
    }
}

fn next_phase(p: u8) -> u8 {
    (p + 1) % PHASES
}

/// Full-body primitive successors of `s`, in the fixed order
/// rotate-left, rotate-right, weight shift, stance change, forward step.
pub fn hd_successors(w: &World, c: &CostTable, s: &HdState) -> Vec<Transition> {
    let mut out = Vec::with_capacity(5);
    let prim = |to: HdState, cost| Transition::new(*s, to, cost, TransitionKind::HdPrimitive);

    for delta in [-1i8, 1] {
        let to = HdState {
            theta: rotate_heading(s.theta, delta),
            phase: next_phase(s.phase),
            ..*s
        };
        out.push(prim(to, c.rotate));
    }
    out.push(prim(
        HdState {
            phase: next_phase(s.phase),
            ..*s
        },
        c.weight_shift,
    ));
    if w.terrain(s.x, s.y) == Terrain::Free {
        out.push(prim(
            HdState {
                stance: s.stance.flipped(),
                phase: 0,
                ..*s
            },
            c.stance_change,
        ));
    }
    if let Some((to, cost)) = forward_step(w, c, s) {
        out.push(prim(to, cost));
    }
    out
}

fn forward_step(w: &World, c: &CostTable, s: &HdState) -> Option<(HdState, u64)> {
    let (nx, ny) = s.ahead();
    let here = w.terrain(s.x, s.y);
    let there = w.terrain(nx, ny);
    if !there.admits(s.stance) {
        return None;
    }
    let moved = |phase| HdState {
        x: nx,
        y: ny,
        phase,
        ..*s
    };
    if here == Terrain::Rubble || there == Terrain::Rubble {
        return (s.stance == Stance::Stand && s.phase == PHASES - 1).then(|| (moved(0), c.rubble_substep));
    }
    match s.stance {
        Stance::Stand => Some((moved(next_phase(s.phase)), c.walk_step)),
        Stance::Crouch if s.theta.is_multiple_of(2) => Some((moved(next_phase(s.phase)), c.crawl_step)),
        Stance::Crouch => None,
    }
}

const CARDINALS: [u8; 4] = [0, 2, 4, 6];

/// Primitive successors within one low-dimensional representation.
pub fn ld_successors(w: &World, c: &CostTable, s: &LdState) -> Vec<Transition> {
    let prim = |to: LdState, cost| Transition::new(*s, to, cost, TransitionKind::LdPrimitive);
    match *s {
        LdState::Walk { x, y, theta } => {
            let mut out = Vec::with_capacity(3);
            let (dx, dy) = HEADING_OFFSETS[theta as usize];
            if w.admits(x, y, Stance::Stand) && w.admits(x + dx, y + dy, Stance::Stand) {
                out.push(prim(LdState::walk(x + dx, y + dy, theta), c.walk_step));
            }
            for delta in [-1i8, 1] {
                out.push(prim(LdState::walk(x, y, rotate_heading(theta, delta)), c.rotate));
            }
            out
        }
        LdState::Crawl { x, y } => {
            if !w.admits(x, y, Stance::Crouch) {
                return Vec::new();
            }
            CARDINALS
                .iter()
                .map(|&d| HEADING_OFFSETS[d as usize])
                .filter(|&(dx, dy)| w.admits(x + dx, y + dy, Stance::Crouch))
                .map(|(dx, dy)| prim(LdState::crawl(x + dx, y + dy), c.crawl_step))
                .collect()
        }
    }
}

/// Controller able to execute a low-dimensional primitive directly, if any.
/// The walk controller needs FREE ground under both cells it touches.
pub fn ld_controller(w: &World, t: &Transition) -> Option<Controller> {
    let (AnyState::Ld(from), AnyState::Ld(to)) = (t.from, t.to) else {
        return None;
    };
    match (from, to) {
        (LdState::Walk { x, y, .. }, LdState::Walk { x: nx, y: ny, .. }) => {
            (w.terrain(x, y) == Terrain::Free && w.terrain(nx, ny) == Terrain::Free).then_some(Controller::Walk)
        }
        (LdState::Crawl { .. }, LdState::Crawl { .. }) => Some(Controller::Crawl),
        _ => None,
    }
}

/// REP_SWITCH successors: mount/dismount between WALK and CRAWL at the same
/// FREE cell. Targets are exactly the cross-projection of `s`.
pub fn special_projection_successors(w: &World, c: &CostTable, s: &LdState) -> Vec<Transition> {
    let (x, y) = s.cell();
    if w.terrain(x, y) != Terrain::Free {
        return Vec::new();
    }
    let target = match s.rep() {
        RepId::Walk => RepId::Crawl,
        _ => RepId::Walk,
    };
    cross_project(w, s.rep(), target, s)
        .into_iter()
        .map(|t| Transition::new(*s, t, c.rep_switch, TransitionKind::RepSwitch))
        .collect()
}

fn heading_of(dx: i32, dy: i32) -> u8 {
    HEADING_OFFSETS
        .iter()
        .position(|&o| o == (dx, dy))
        .expect("unit offset") as u8
}

/// Full-body macro transitions mirroring the controller-executable actions
/// of the representation native to the current stance. Each lands on the
/// nominal (phase 0) configuration of the low-dimensional target; crawl
/// macros face the direction of motion.
pub fn executable_macro_successors(w: &World, c: &CostTable, s: &HdState) -> Vec<Transition> {
    let rep = s.stance.native_rep();
    let l = project(rep, s);
    ld_successors(w, c, &l)
        .into_iter()
        .filter_map(|t| {
            let ctrl = ld_controller(w, &t)?;
            let AnyState::Ld(target) = t.to else {
                return None;
            };
            let landed = match target {
                LdState::Walk { x, y, theta } => HdState::new(x, y, theta, Stance::Stand, 0),
                LdState::Crawl { x, y } => HdState::new(x, y, heading_of(x - s.x, y - s.y), Stance::Crouch, 0),
            };
            Some(Transition::new(*s, landed, t.cost, TransitionKind::HdMacro(ctrl)))
        })
        .collect()
}
