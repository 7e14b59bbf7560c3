//! Crafted test maps, the shipped demonstration and a seeded random map
//! generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{GoalSpec, Terrain, World};
use crate::state::{HdState, Stance};

pub const CORRIDOR: &str = include_str!("../assets/maps/corridor.map");
pub const RUBBLE_BAND: &str = include_str!("../assets/maps/rubble-band.map");
pub const LOW_TUNNEL: &str = include_str!("../assets/maps/low-tunnel.map");
pub const WALLED: &str = include_str!("../assets/maps/walled.map");
pub const THREE_ZONE: &str = include_str!("../assets/maps/three-zone.map");
pub const MIXED_6X6: &str = include_str!("../assets/maps/mixed-6x6.map");
pub const RUBBLE_DEMO: &str = include_str!("../assets/demos/rubble-crossing.demo");

/// A crafted map with its reference query.
#[derive(Debug, Clone)]
pub struct Crafted {
    pub name: &'static str,
    pub text: &'static str,
    pub start: HdState,
    pub goal: GoalSpec,
}

impl Crafted {
    pub fn world(&self) -> World {
        World::parse(self.text).expect("shipped map parses")
    }
}

fn standing(x: i32, y: i32) -> HdState {
    HdState::new(x, y, 0, Stance::Stand, 0)
}

pub fn corridor() -> Crafted {
    Crafted {
        name: "corridor",
        text: CORRIDOR,
        start: standing(1, 2),
        goal: GoalSpec::new(158, 2),
    }
}

pub fn rubble_band() -> Crafted {
    Crafted {
        name: "rubble-band",
        text: RUBBLE_BAND,
        start: standing(1, 3),
        goal: GoalSpec::new(12, 3),
    }
}

pub fn low_tunnel() -> Crafted {
    Crafted {
        name: "low-tunnel",
        text: LOW_TUNNEL,
        start: standing(1, 2),
        goal: GoalSpec::new(22, 2),
    }
}

pub fn walled() -> Crafted {
    Crafted {
        name: "walled",
        text: WALLED,
        start: standing(1, 2),
        goal: GoalSpec::new(7, 2),
    }
}

pub fn three_zone() -> Crafted {
    Crafted {
        name: "three-zone",
        text: THREE_ZONE,
        start: standing(2, 2),
        goal: GoalSpec::new(17, 17),
    }
}

/// The crafted maps that come with a single reference query.
pub fn suite() -> Vec<Crafted> {
    vec![corridor(), rubble_band(), low_tunnel(), walled(), three_zone()]
}

pub fn mixed_6x6() -> World {
    World::parse(MIXED_6X6).expect("shipped map parses")
}

/// Terrain probabilities for interior cells; the remainder is FREE.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Densities {
    pub wall: f64,
    pub low: f64,
    pub rubble: f64,
}

/// Reproducible random map. The border is WALL and every cell in `keep_free`
/// is forced FREE.
pub fn gen_random_map(seed: u64, width: usize, height: usize, densities: Densities, keep_free: &[(i32, i32)]) -> World {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = World::filled(width, height, Terrain::Free);
    for (x, y) in w.cells().collect::<Vec<_>>() {
        let border = x == 0 || y == 0 || x as usize + 1 == width || y as usize + 1 == height;
        let r: f64 = rng.gen();
        let t = if border || r < densities.wall {
            Terrain::Wall
        } else if r < densities.wall + densities.low {
            Terrain::Low
        } else if r < densities.wall + densities.low + densities.rubble {
            Terrain::Rubble
        } else {
            Terrain::Free
        };
        w.set(x, y, t);
    }
    for &(x, y) in keep_free {
        if w.in_bounds(x, y) {
            w.set(x, y, Terrain::Free);
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_maps_parse() {
        for c in suite() {
            let w = c.world();
            assert!(w.admits(c.start.x, c.start.y, c.start.stance), "{}", c.name);
            assert_ne!(w.terrain(c.goal.x, c.goal.y), Terrain::Wall, "{}", c.name);
        }
        assert_eq!(mixed_6x6().width(), 6);
    }

    #[test]
    fn same_seed_same_map() {
        let d = Densities {
            wall: 0.2,
            low: 0.1,
            rubble: 0.1,
        };
        assert_eq!(gen_random_map(7, 7, 7, d, &[]), gen_random_map(7, 7, 7, d, &[]));
        assert_ne!(gen_random_map(7, 7, 7, d, &[]), gen_random_map(8, 7, 7, d, &[]));
    }

    #[test]
    fn zero_density_is_free_interior() {
        let w = gen_random_map(1, 6, 5, Densities::default(), &[]);
        for (x, y) in w.cells() {
            let border = x == 0 || y == 0 || x == 5 || y == 4;
            assert_eq!(w.terrain(x, y) == Terrain::Wall, border);
        }
    }

    #[test]
    fn full_wall_density_keeps_endpoints() {
        let d = Densities {
            wall: 1.0,
            ..Densities::default()
        };
        let w = gen_random_map(3, 7, 7, d, &[(1, 1), (5, 5)]);
        let free: Vec<_> = w.cells().filter(|&(x, y)| w.terrain(x, y) == Terrain::Free).collect();
        assert_eq!(free, vec![(1, 1), (5, 5)]);
    }
}
