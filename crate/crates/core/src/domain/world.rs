//! Grid world and its text format.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::Stance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terrain {
    Free,
    Wall,
    Low,
    Rubble,
}

impl Terrain {
    pub fn from_char(c: char) -> Option<Terrain> {
        match c {
            '.' => Some(Terrain::Free),
            '#' => Some(Terrain::Wall),
            '~' => Some(Terrain::Low),
            '%' => Some(Terrain::Rubble),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Terrain::Free => '.',
            Terrain::Wall => '#',
            Terrain::Low => '~',
            Terrain::Rubble => '%',
        }
    }

    /// Whether a body in `stance` may occupy a cell of this terrain.
    /// Standing is impossible under LOW ceilings; crouching on RUBBLE is never allowed.
    pub fn admits(self, stance: Stance) -> bool {
        match stance {
            Stance::Stand => matches!(self, Terrain::Free | Terrain::Rubble),
            Stance::Crouch => matches!(self, Terrain::Free | Terrain::Low),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("missing header line `width height`")]
    MissingHeader,
    #[error("line 1: malformed header `{0}`")]
    BadHeader(String),
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("line {line}: row length {found} != width {expected}")]
    RowLength { line: usize, expected: usize, found: usize },
    #[error("line {line}, column {column}: unknown terrain character `{ch}`")]
    UnknownTerrain { line: usize, column: usize, ch: char },
}

/// Rectangular terrain grid, row-major. Out-of-bounds cells read as WALL.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct World {
    width: usize,
    height: usize,
    cells: Vec<Terrain>,
}

impl World {
    pub fn new(width: usize, height: usize, cells: Vec<Terrain>) -> Self {
        assert_eq!(width * height, cells.len(), "cell count must equal width*height");
        Self { width, height, cells }
    }

    pub fn filled(width: usize, height: usize, terrain: Terrain) -> Self {
        Self::new(width, height, vec![terrain; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn index(&self, x: i32, y: i32) -> Option<usize> {
        self.in_bounds(x, y).then(|| y as usize * self.width + x as usize)
    }

    pub fn coords(&self, index: usize) -> (i32, i32) {
        ((index % self.width) as i32, (index / self.width) as i32)
    }

    pub fn terrain(&self, x: i32, y: i32) -> Terrain {
        self.index(x, y).map_or(Terrain::Wall, |i| self.cells[i])
    }

    pub fn set(&mut self, x: i32, y: i32, t: Terrain) {
        let i = self.index(x, y).expect("cell out of bounds");
        self.cells[i] = t;
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        (0..self.cells.len()).map(|i| self.coords(i))
    }

    pub fn admits(&self, x: i32, y: i32, stance: Stance) -> bool {
        self.terrain(x, y).admits(stance)
    }

    pub fn parse(text: &str) -> Result<World, MapError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(MapError::MissingHeader)?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| MapError::BadHeader(header.to_string()))?;
        let [width, height] = dims[..] else {
            return Err(MapError::BadHeader(header.to_string()));
        };
        if width == 0 || height == 0 {
            return Err(MapError::BadHeader(header.to_string()));
        }
        let rows: Vec<&str> = lines.filter(|l| !l.trim().is_empty()).collect();
        let mut cells = Vec::with_capacity(width * height);
        for (r, row) in rows.iter().enumerate().take(height) {
            let line = r + 2;
            let row = row.trim_end_matches('\r');
            let n = row.chars().count();
            if n != width {
                return Err(MapError::RowLength {
                    line,
                    expected: width,
                    found: n,
                });
            }
            for (c, ch) in row.chars().enumerate() {
                let t = Terrain::from_char(ch).ok_or(MapError::UnknownTerrain {
                    line,
                    column: c + 1,
                    ch,
                })?;
                cells.push(t);
            }
        }
        if rows.len() != height {
            return Err(MapError::RowCount {
                expected: height,
                found: rows.len(),
            });
        }
        Ok(World::new(width, height, cells))
    }
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.width, self.height)?;
        for row in self.cells.chunks(self.width) {
            let s: String = row.iter().map(|t| t.to_char()).collect();
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Parse the map text format: a `width height` header followed by
/// `height` rows over the alphabet `.#~%`.
pub fn load_map(text: &str) -> Result<World, MapError> {
    World::parse(text)
}
