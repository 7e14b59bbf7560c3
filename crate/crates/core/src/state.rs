//! State and transition vocabulary shared by every planner component.
//!
//! A full configuration of the toy robot is an [`HdState`]: grid cell,
//! heading, stance and gait phase. Each locomotion mode has its own
//! low-dimensional view ([`LdState`]) that keeps only what its controller
//! needs. [`AnyState`] is the tagged union the adaptive graph searches over.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of discrete headings (45 degree increments).
pub const HEADINGS: u8 = 8;
/// Length of the gait-phase cycle.
pub const PHASES: u8 = 4;

/// Unit step for each heading. Heading 0 points along +x, y grows downward.
pub const HEADING_OFFSETS: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Representation a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RepId {
    Hd,
    Walk,
    Crawl,
}

impl RepId {
    pub const ALL: [RepId; 3] = [RepId::Hd, RepId::Walk, RepId::Crawl];
    pub const LOW_DIMENSIONAL: [RepId; 2] = [RepId::Walk, RepId::Crawl];

    pub fn is_low_dimensional(self) -> bool {
        !matches!(self, RepId::Hd)
    }

    /// Dense index, handy for per-representation tables.
    pub fn index(self) -> usize {
        match self {
            RepId::Hd => 0,
            RepId::Walk => 1,
            RepId::Crawl => 2,
        }
    }
}

impl fmt::Display for RepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepId::Hd => "HD",
            RepId::Walk => "WALK",
            RepId::Crawl => "CRAWL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stance {
    Stand,
    Crouch,
}

impl Stance {
    pub fn flipped(self) -> Stance {
        match self {
            Stance::Stand => Stance::Crouch,
            Stance::Crouch => Stance::Stand,
        }
    }

    /// The low-dimensional representation whose controller owns this stance.
    pub fn native_rep(self) -> RepId {
        match self {
            Stance::Stand => RepId::Walk,
            Stance::Crouch => RepId::Crawl,
        }
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stance::Stand => "STAND",
            Stance::Crouch => "CROUCH",
        })
    }
}

impl FromStr for Stance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "STAND" | "S" => Ok(Stance::Stand),
            "CROUCH" | "C" => Ok(Stance::Crouch),
            other => Err(format!("unknown stance `{other}`")),
        }
    }
}

/// Heading `theta` rotated by `delta` steps, wrapped into `0..8`.
pub fn rotate_heading(theta: u8, delta: i8) -> u8 {
    ((theta as i16 + delta as i16).rem_euclid(HEADINGS as i16)) as u8
}

/// Circular distance between two values on a ring of size `modulus`.
pub fn circular_distance(a: u8, b: u8, modulus: u8) -> u8 {
    let d = (a as i16 - b as i16).rem_euclid(modulus as i16) as u8;
    d.min(modulus - d)
}

/// Full configuration of the robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HdState {
    pub x: i32,
    pub y: i32,
    pub theta: u8,
    pub stance: Stance,
    pub phase: u8,
}

impl HdState {
    pub fn new(x: i32, y: i32, theta: u8, stance: Stance, phase: u8) -> Self {
        debug_assert!(theta < HEADINGS && phase < PHASES);
        Self {
            x,
            y,
            theta,
            stance,
            phase,
        }
    }

    pub fn cell(&self) -> (i32, i32) {
        (self.x, self.y)
    }

    /// Cell one step ahead along the current heading.
    pub fn ahead(&self) -> (i32, i32) {
        let (dx, dy) = HEADING_OFFSETS[self.theta as usize];
        (self.x + dx, self.y + dy)
    }
}

impl fmt::Display for HdState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "HD({},{},{},{},{})",
            self.x, self.y, self.theta, self.stance, self.phase
        )
    }
}

/// A state in one of the low-dimensional representations.
///
/// WALK states carry a heading, CRAWL states never do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "rep", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LdState {
    Walk { x: i32, y: i32, theta: u8 },
    Crawl { x: i32, y: i32 },
}

impl LdState {
    pub fn walk(x: i32, y: i32, theta: u8) -> Self {
        LdState::Walk { x, y, theta }
    }

    pub fn crawl(x: i32, y: i32) -> Self {
        LdState::Crawl { x, y }
    }

    pub fn rep(&self) -> RepId {
        match self {
            LdState::Walk { .. } => RepId::Walk,
            LdState::Crawl { .. } => RepId::Crawl,
        }
    }

    pub fn cell(&self) -> (i32, i32) {
        match *self {
            LdState::Walk { x, y, .. } | LdState::Crawl { x, y } => (x, y),
        }
    }

    pub fn theta(&self) -> Option<u8> {
        match *self {
            LdState::Walk { theta, .. } => Some(theta),
            LdState::Crawl { .. } => None,
        }
    }
}

impl fmt::Display for LdState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LdState::Walk { x, y, theta } => write!(f, "WALK({x},{y},{theta})"),
            LdState::Crawl { x, y } => write!(f, "CRAWL({x},{y})"),
        }
    }
}

/// A state of the adaptive search space: either full-dimensional or a
/// low-dimensional projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyState {
    Hd(HdState),
    Ld(LdState),
}

impl AnyState {
    pub fn rep(&self) -> RepId {
        match self {
            AnyState::Hd(_) => RepId::Hd,
            AnyState::Ld(l) => l.rep(),
        }
    }

    pub fn cell(&self) -> (i32, i32) {
        match self {
            AnyState::Hd(h) => h.cell(),
            AnyState::Ld(l) => l.cell(),
        }
    }

    pub fn as_hd(&self) -> Option<&HdState> {
        match self {
            AnyState::Hd(h) => Some(h),
            AnyState::Ld(_) => None,
        }
    }

    pub fn as_ld(&self) -> Option<&LdState> {
        match self {
            AnyState::Ld(l) => Some(l),
            AnyState::Hd(_) => None,
        }
    }

    /// Ordering key used for deterministic successor lists:
    /// `(rep, x, y, theta, stance, phase)` with absent fields as zero.
    pub fn sort_key(&self) -> (RepId, i32, i32, u8, u8, u8) {
        match *self {
            AnyState::Hd(h) => (RepId::Hd, h.x, h.y, h.theta, h.stance as u8, h.phase),
            AnyState::Ld(LdState::Walk { x, y, theta }) => (RepId::Walk, x, y, theta, 0, 0),
            AnyState::Ld(LdState::Crawl { x, y }) => (RepId::Crawl, x, y, 0, 0, 0),
        }
    }
}

impl From<HdState> for AnyState {
    fn from(h: HdState) -> Self {
        AnyState::Hd(h)
    }
}

impl From<LdState> for AnyState {
    fn from(l: LdState) -> Self {
        AnyState::Ld(l)
    }
}

impl fmt::Display for AnyState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyState::Hd(h) => h.fmt(f),
            AnyState::Ld(l) => l.fmt(f),
        }
    }
}

/// Controllers available on the (simulated) robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Controller {
    #[serde(rename = "WALK_CTRL")]
    Walk,
    #[serde(rename = "CRAWL_CTRL")]
    Crawl,
    #[serde(rename = "FULLBODY_CTRL")]
    FullBody,
}

impl fmt::Display for Controller {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Controller::Walk => "WALK_CTRL",
            Controller::Crawl => "CRAWL_CTRL",
            Controller::FullBody => "FULLBODY_CTRL",
        })
    }
}

/// What kind of edge a [`Transition`] is. Declaration order is the
/// primary sort key of successor lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TransitionKind {
    LdPrimitive,
    HdPrimitive,
    HdMacro(Controller),
    Projection,
    RepSwitch,
    Snap,
}

impl TransitionKind {
    /// Controller that executes an edge of this kind, if it is executable
    /// on the robot at all.
    pub fn controller(self) -> Option<Controller> {
        match self {
            TransitionKind::HdMacro(c) => Some(c),
            TransitionKind::HdPrimitive | TransitionKind::Snap => Some(Controller::FullBody),
            TransitionKind::LdPrimitive | TransitionKind::Projection | TransitionKind::RepSwitch => None,
        }
    }
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionKind::LdPrimitive => f.write_str("LD_PRIMITIVE"),
            TransitionKind::HdPrimitive => f.write_str("HD_PRIMITIVE"),
            TransitionKind::HdMacro(c) => write!(f, "HD_MACRO({c})"),
            TransitionKind::Projection => f.write_str("PROJECTION"),
            TransitionKind::RepSwitch => f.write_str("REP_SWITCH"),
            TransitionKind::Snap => f.write_str("SNAP"),
        }
    }
}

impl From<TransitionKind> for String {
    fn from(k: TransitionKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for TransitionKind {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for TransitionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "LD_PRIMITIVE" => TransitionKind::LdPrimitive,
            "HD_PRIMITIVE" => TransitionKind::HdPrimitive,
            "HD_MACRO(WALK_CTRL)" => TransitionKind::HdMacro(Controller::Walk),
            "HD_MACRO(CRAWL_CTRL)" => TransitionKind::HdMacro(Controller::Crawl),
            "PROJECTION" => TransitionKind::Projection,
            "REP_SWITCH" => TransitionKind::RepSwitch,
            "SNAP" => TransitionKind::Snap,
            other => return Err(format!("unknown transition kind `{other}`")),
        })
    }
}

/// Non-negative integer edge cost.
pub type Cost = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub from: AnyState,
    pub to: AnyState,
    pub cost: Cost,
    pub kind: TransitionKind,
}

impl Transition {
    pub fn new(from: impl Into<AnyState>, to: impl Into<AnyState>, cost: Cost, kind: TransitionKind) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            cost,
            kind,
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -[{} {}]-> {}", self.from, self.kind, self.cost, self.to)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heading_arithmetic_wraps() {
        assert_eq!(rotate_heading(0, -1), 7);
        assert_eq!(rotate_heading(7, 1), 0);
        assert_eq!(circular_distance(0, 6, 8), 2);
        assert_eq!(circular_distance(1, 0, 4), 1);
        assert_eq!(circular_distance(3, 0, 4), 1);
    }

    #[test]
    fn transition_kind_string_roundtrip() {
        for k in [
            TransitionKind::LdPrimitive,
            TransitionKind::HdPrimitive,
            TransitionKind::HdMacro(Controller::Walk),
            TransitionKind::HdMacro(Controller::Crawl),
            TransitionKind::Projection,
            TransitionKind::RepSwitch,
            TransitionKind::Snap,
        ] {
            assert_eq!(k.to_string().parse::<TransitionKind>().unwrap(), k);
        }
    }

    #[test]
    fn any_state_rep_matches_payload() {
        let h = AnyState::from(HdState::new(1, 2, 3, Stance::Stand, 0));
        assert_eq!(h.rep(), RepId::Hd);
        assert_eq!(AnyState::from(LdState::crawl(1, 1)).rep(), RepId::Crawl);
        assert_eq!(AnyState::from(LdState::walk(1, 1, 4)).rep(), RepId::Walk);
    }
}
