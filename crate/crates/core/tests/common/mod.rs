#![allow(dead_code)]

//! Reference implementations written directly from the transition rules,
//! sharing no code with the library beyond the state types.

use std::collections::BTreeMap;

use mrplan::maps::{gen_random_map, Densities};
use mrplan::{
    AnyState, CostTable, HdRegion, HdState, LdState, RepId, Stance, Terrain, Transition, TransitionKind, World,
};

pub const OFFSETS: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

pub fn random_map(seed: u64, w: usize, h: usize) -> World {
    let d = Densities {
        wall: 0.15,
        low: 0.12,
        rubble: 0.12,
    };
    gen_random_map(seed, w, h, d, &[(1, 1), (w as i32 - 2, h as i32 - 2)])
}

fn terrain(w: &World, x: i32, y: i32) -> Terrain {
    if w.in_bounds(x, y) {
        w.terrain(x, y)
    } else {
        Terrain::Wall
    }
}

/// Which stances each terrain supports.
pub fn stance_ok(t: Terrain, s: Stance) -> bool {
    matches!(
        (t, s),
        (Terrain::Free, _) | (Terrain::Rubble, Stance::Stand) | (Terrain::Low, Stance::Crouch)
    )
}

pub fn hd_ok(w: &World, s: &HdState) -> bool {
    stance_ok(terrain(w, s.x, s.y), s.stance)
}

pub fn ld_ok(w: &World, l: &LdState) -> bool {
    match *l {
        LdState::Walk { x, y, .. } => stance_ok(terrain(w, x, y), Stance::Stand),
        LdState::Crawl { x, y } => stance_ok(terrain(w, x, y), Stance::Crouch),
    }
}

/// One row of the full-body rule table: a guard on (world, source) and the
/// resulting target and cost.
type HdRule = fn(&World, &CostTable, &HdState) -> Option<(HdState, u64)>;

fn turn(s: &HdState, d: i32) -> HdState {
    HdState {
        theta: ((s.theta as i32 + d).rem_euclid(8)) as u8,
        phase: (s.phase + 1) % 4,
        ..*s
    }
}

const HD_RULES: [HdRule; 5] = [
    |_, c, s| Some((turn(s, -1), c.rotate)),
    |_, c, s| Some((turn(s, 1), c.rotate)),
    |_, c, s| {
        Some((
            HdState {
                phase: (s.phase + 1) % 4,
                ..*s
            },
            c.weight_shift,
        ))
    },
    |w, c, s| {
        (terrain(w, s.x, s.y) == Terrain::Free).then(|| {
            let stance = if s.stance == Stance::Stand {
                Stance::Crouch
            } else {
                Stance::Stand
            };
            (HdState { stance, phase: 0, ..*s }, c.stance_change)
        })
    },
    |w, c, s| {
        let (dx, dy) = OFFSETS[s.theta as usize];
        let (nx, ny) = (s.x + dx, s.y + dy);
        let (here, there) = (terrain(w, s.x, s.y), terrain(w, nx, ny));
        if !stance_ok(there, s.stance) {
            return None;
        }
        let moved = |phase| HdState {
            x: nx,
            y: ny,
            phase,
            ..*s
        };
        if here == Terrain::Rubble || there == Terrain::Rubble {
            return (s.stance == Stance::Stand && s.phase == 3).then(|| (moved(0), c.rubble_substep));
        }
        match s.stance {
            Stance::Stand => Some((moved((s.phase + 1) % 4), c.walk_step)),
            Stance::Crouch => (s.theta % 2 == 0).then(|| (moved((s.phase + 1) % 4), c.crawl_step)),
        }
    },
];

pub fn hd_rules(w: &World, c: &CostTable, s: &HdState) -> Vec<(HdState, u64)> {
    HD_RULES.iter().filter_map(|r| r(w, c, s)).collect()
}

pub fn ld_rules(w: &World, c: &CostTable, l: &LdState) -> Vec<(LdState, u64)> {
    if !ld_ok(w, l) {
        return Vec::new();
    }
    match *l {
        LdState::Walk { x, y, theta } => {
            let (dx, dy) = OFFSETS[theta as usize];
            let mut out = Vec::new();
            let fwd = LdState::walk(x + dx, y + dy, theta);
            if ld_ok(w, &fwd) {
                out.push((fwd, c.walk_step));
            }
            out.push((LdState::walk(x, y, (theta + 7) % 8), c.rotate));
            out.push((LdState::walk(x, y, (theta + 1) % 8), c.rotate));
            out
        }
        LdState::Crawl { x, y } => [(1, 0), (0, 1), (-1, 0), (0, -1)]
            .iter()
            .map(|(dx, dy)| LdState::crawl(x + dx, y + dy))
            .filter(|t| ld_ok(w, t))
            .map(|t| (t, c.crawl_step))
            .collect(),
    }
}

pub fn preimages(w: &World, l: &LdState) -> Vec<HdState> {
    let all: Vec<HdState> = match *l {
        LdState::Walk { x, y, theta } => vec![HdState::new(x, y, theta, Stance::Stand, 0)],
        LdState::Crawl { x, y } => (0..8).map(|t| HdState::new(x, y, t, Stance::Crouch, 0)).collect(),
    };
    all.into_iter().filter(|h| hd_ok(w, h)).collect()
}

pub fn images(h: &HdState) -> [LdState; 2] {
    [LdState::walk(h.x, h.y, h.theta), LdState::crawl(h.x, h.y)]
}

pub fn in_any(regions: &[HdRegion], x: i32, y: i32) -> bool {
    regions
        .iter()
        .any(|r| (r.x - x).abs().max((r.y - y).abs()) <= r.radius as i32)
}

fn kind_rank(k: TransitionKind) -> u8 {
    match k {
        TransitionKind::LdPrimitive => 0,
        TransitionKind::HdPrimitive => 1,
        TransitionKind::HdMacro(_) => 2,
        TransitionKind::Projection => 3,
        TransitionKind::RepSwitch => 4,
        TransitionKind::Snap => 5,
    }
}

type OrderKey = (u8, u8, i32, i32, u8, u8, u8);

fn order_key(t: &Transition) -> OrderKey {
    match t.to {
        AnyState::Hd(h) => (kind_rank(t.kind), 0, h.x, h.y, h.theta, h.stance as u8, h.phase),
        AnyState::Ld(LdState::Walk { x, y, theta }) => (kind_rank(t.kind), 1, x, y, theta, 0, 0),
        AnyState::Ld(LdState::Crawl { x, y }) => (kind_rank(t.kind), 2, x, y, 0, 0, 0),
    }
}

/// Adaptive-graph successors straight from the rule table.
pub fn ad_reference(w: &World, c: &CostTable, regions: &[HdRegion], s: &AnyState) -> Vec<Transition> {
    let mut raw: Vec<Transition> = Vec::new();
    match s {
        AnyState::Hd(h) => {
            for (to, cost) in hd_rules(w, c, h) {
                if in_any(regions, to.x, to.y) {
                    raw.push(Transition::new(*h, to, cost, TransitionKind::HdPrimitive));
                } else {
                    for l in images(&to).into_iter().filter(|l| ld_ok(w, l)) {
                        raw.push(Transition::new(*h, l, cost + c.projection, TransitionKind::Projection));
                    }
                }
            }
        }
        AnyState::Ld(l) => {
            for (to, cost) in ld_rules(w, c, l) {
                let (x, y) = to.cell();
                if in_any(regions, x, y) {
                    for h in preimages(w, &to) {
                        raw.push(Transition::new(*l, h, cost + c.projection, TransitionKind::Projection));
                    }
                } else {
                    raw.push(Transition::new(*l, to, cost, TransitionKind::LdPrimitive));
                }
            }
            for seed in preimages(w, l) {
                for (to, cost) in hd_rules(w, c, &seed) {
                    if in_any(regions, to.x, to.y) {
                        raw.push(Transition::new(*l, to, cost, TransitionKind::HdPrimitive));
                    }
                }
            }
            let (x, y) = l.cell();
            if terrain(w, x, y) == Terrain::Free {
                let targets: Vec<LdState> = match l {
                    LdState::Walk { .. } => vec![LdState::crawl(x, y)],
                    LdState::Crawl { .. } => (0..8).map(|t| LdState::walk(x, y, t)).collect(),
                };
                for t in targets.into_iter().filter(|t| ld_ok(w, t)) {
                    raw.push(Transition::new(*l, t, c.rep_switch, TransitionKind::RepSwitch));
                }
            }
        }
    }
    let mut best: BTreeMap<OrderKey, Transition> = BTreeMap::new();
    for t in raw {
        let k = order_key(&t);
        match best.get(&k) {
            Some(old) if old.cost <= t.cost => {}
            _ => {
                best.insert(k, t);
            }
        }
    }
    best.into_values().collect()
}

/// Every state of the adaptive space for the given regions.
pub fn members(w: &World, regions: &[HdRegion]) -> Vec<AnyState> {
    let mut out = Vec::new();
    for y in 0..w.height() as i32 {
        for x in 0..w.width() as i32 {
            if in_any(regions, x, y) {
                for stance in [Stance::Stand, Stance::Crouch] {
                    for theta in 0..8 {
                        for phase in 0..4 {
                            let h = HdState::new(x, y, theta, stance, phase);
                            if hd_ok(w, &h) {
                                out.push(h.into());
                            }
                        }
                    }
                }
            } else {
                for theta in 0..8 {
                    let l = LdState::walk(x, y, theta);
                    if ld_ok(w, &l) {
                        out.push(l.into());
                    }
                }
                let l = LdState::crawl(x, y);
                if ld_ok(w, &l) {
                    out.push(l.into());
                }
            }
        }
    }
    out
}

pub fn rep_of(s: &AnyState) -> RepId {
    match s {
        AnyState::Hd(_) => RepId::Hd,
        AnyState::Ld(LdState::Walk { .. }) => RepId::Walk,
        AnyState::Ld(LdState::Crawl { .. }) => RepId::Crawl,
    }
}
