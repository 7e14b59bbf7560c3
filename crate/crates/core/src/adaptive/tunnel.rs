use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::domain::{executable_macro_successors, hd_successors, CostTable, Terrain, World};
use crate::egraph::{snap_successors, EGraph, EGraphParams};
use crate::graph::{chebyshev, in_regions, HdRegion};
use crate::mrmha::SearchGraph;
use crate::state::{AnyState, Transition};

/// Cells within Chebyshev distance `width` of the phase-one path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "TunnelSpec", into = "TunnelSpec")]
pub struct Tunnel {
    waypoints: Vec<(i32, i32)>,
    width: u32,
    progress: HashMap<(i32, i32), usize>,
}

#[derive(Serialize, Deserialize)]
struct TunnelSpec {
    waypoints: Vec<(i32, i32)>,
    width: u32,
}

impl From<TunnelSpec> for Tunnel {
    fn from(t: TunnelSpec) -> Self {
        Tunnel::new(t.waypoints, t.width)
    }
}

impl From<Tunnel> for TunnelSpec {
    fn from(t: Tunnel) -> Self {
        TunnelSpec {
            waypoints: t.waypoints,
            width: t.width,
        }
    }
}

impl Tunnel {
    /// `waypoints` are cells in path order; consecutive repeats are merged.
    pub fn new(mut waypoints: Vec<(i32, i32)>, width: u32) -> Self {
        waypoints.dedup();
        let r = width as i32;
        let mut progress = HashMap::new();
        for (i, &(x, y)) in waypoints.iter().enumerate() {
            for dy in -r..=r {
                for dx in -r..=r {
                    progress.insert((x + dx, y + dy), i);
                }
            }
        }
        Self {
            waypoints,
            width,
            progress,
        }
    }

    pub fn waypoints(&self) -> &[(i32, i32)] {
        &self.waypoints
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn contains(&self, x: i32, y: i32) -> bool {
        self.progress.contains_key(&(x, y))
    }

    /// Index of the last waypoint within `width` of the cell.
    pub fn progress(&self, x: i32, y: i32) -> Option<usize> {
        self.progress.get(&(x, y)).copied()
    }

    /// Member cells, sorted.
    pub fn cells(&self) -> Vec<(i32, i32)> {
        let mut v: Vec<_> = self.progress.keys().copied().collect();
        v.sort_by_key(|&(x, y)| (y, x));
        v
    }

    /// Member cells that are inside `w` and not WALL.
    pub fn open_cells(&self, w: &World) -> usize {
        self.progress
            .keys()
            .filter(|&&(x, y)| w.in_bounds(x, y) && w.terrain(x, y) != Terrain::Wall)
            .count()
    }

    /// Smallest Chebyshev distance from the cell to the path.
    pub fn distance(&self, x: i32, y: i32) -> Option<i32> {
        self.waypoints.iter().map(|&p| chebyshev(p, (x, y))).min()
    }
}

/// Tunnel around the cells of `pi_ad`; full-body waypoints contribute their
/// own cell.
pub fn build_tunnel(pi_ad: &[AnyState], w: u32) -> Tunnel {
    Tunnel::new(pi_ad.iter().map(AnyState::cell).collect(), w)
}

/// The full-body graph searched while tracking: executable macros and
/// stance changes anywhere in the tunnel, other full-body primitives and
/// snap motions only where they touch an HD region.
#[derive(Debug, Clone, Copy)]
pub struct TrackingGraph<'a> {
    pub world: &'a World,
    pub costs: &'a CostTable,
    pub tunnel: &'a Tunnel,
    pub regions: &'a [HdRegion],
    pub egraph: Option<(&'a EGraph, EGraphParams)>,
}

impl TrackingGraph<'_> {
    fn in_tunnel(&self, s: &AnyState) -> bool {
        let (x, y) = s.cell();
        self.tunnel.contains(x, y)
    }
}

impl SearchGraph for TrackingGraph<'_> {
    fn successors(&self, s: &AnyState, out: &mut Vec<Transition>) {
        let AnyState::Hd(h) = s else { return };
        if !self.tunnel.contains(h.x, h.y) {
            return;
        }
        let src_region = in_regions(self.regions, h.x, h.y);
        out.extend(
            executable_macro_successors(self.world, self.costs, h)
                .into_iter()
                .filter(|t| self.in_tunnel(&t.to)),
        );
        out.extend(hd_successors(self.world, self.costs, h).into_iter().filter(|t| {
            let (x, y) = t.to.cell();
            let AnyState::Hd(to) = t.to else { return false };
            let mount = to.stance != h.stance;
            self.tunnel.contains(x, y) && (mount || src_region || in_regions(self.regions, x, y))
        }));
        if let (Some((eg, p)), true) = (self.egraph, src_region) {
            out.extend(snap_successors(eg, self.costs, h, &p));
        }
    }
}
