//! Elevation height field and procedural scenario terrain.
//!
//! Heights are sampled on a regular lattice of nodes at
//! `origin + (i * cell_size, j * cell_size)`; queries between nodes are
//! bilinearly interpolated. Queries outside the lattice are a hard error.

mod scenario;

pub use scenario::{cover_corridor_scenario, generate_scenario, CorridorLayout, Scenario, ScenarioKind, ScenarioSpec};

use crate::error::{Error, Result};
use crate::geom::{Point2, Rect};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElevationGrid {
    width_cells: usize,
    height_cells: usize,
    cell_size: f64,
    origin: Point2,
    heights: Vec<f64>,
}

impl ElevationGrid {
    pub fn new(
        width_cells: usize,
        height_cells: usize,
        cell_size: f64,
        origin: Point2,
        heights: Vec<f64>,
    ) -> Result<Self> {
        if width_cells < 2 || height_cells < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2x2 cells, got {width_cells}x{height_cells}")));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::InvalidGrid(format!("cell size {cell_size} must be positive")));
        }
        if !(origin.x.is_finite() && origin.y.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        if heights.len() != width_cells * height_cells {
            return Err(Error::InvalidGrid(format!(
                "expected {} heights, got {}",
                width_cells * height_cells,
                heights.len()
            )));
        }
        if let Some(bad) = heights.iter().position(|h| !h.is_finite()) {
            return Err(Error::InvalidGrid(format!("height at index {bad} is not finite")));
        }
        Ok(Self { width_cells, height_cells, cell_size, origin, heights })
    }

    pub fn flat(width_cells: usize, height_cells: usize, cell_size: f64, height: f64) -> Result<Self> {
        Self::new(width_cells, height_cells, cell_size, Point2::default(), vec![height; width_cells * height_cells])
    }

    /// Samples `f` at every node.
    pub fn from_fn(
        width_cells: usize,
        height_cells: usize,
        cell_size: f64,
        origin: Point2,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut heights = Vec::with_capacity(width_cells * height_cells);
        for j in 0..height_cells {
            for i in 0..width_cells {
                heights.push(f(origin.x + i as f64 * cell_size, origin.y + j as f64 * cell_size));
            }
        }
        Self::new(width_cells, height_cells, cell_size, origin, heights)
    }

    pub fn width_cells(&self) -> usize {
        self.width_cells
    }

    pub fn height_cells(&self) -> usize {
        self.height_cells
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn node_height(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.width_cells + i]
    }

    pub fn node_position(&self, i: usize, j: usize) -> Point2 {
        Point2::new(self.origin.x + i as f64 * self.cell_size, self.origin.y + j as f64 * self.cell_size)
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(
            self.origin.x,
            self.origin.y,
            self.origin.x + (self.width_cells - 1) as f64 * self.cell_size,
            self.origin.y + (self.height_cells - 1) as f64 * self.cell_size,
        )
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.bounds().contains(Point2::new(x, y))
    }

    /// max(heights) - min(heights)
    pub fn relief(&self) -> f64 {
        let (lo, hi) =
            self.heights.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &h| (lo.min(h), hi.max(h)));
        hi - lo
    }

    /// Fractional lattice coordinate along one axis, snapped onto a node when
    /// within rounding noise of it so node queries are exact.
    fn lattice_coord(&self, value: f64, origin: f64, nodes: usize) -> (usize, f64) {
        let mut f = (value - origin) / self.cell_size;
        let r = f.round();
        if (f - r).abs() <= 1e-9 * r.abs().max(1.0) {
            f = r;
        }
        let f = f.clamp(0.0, (nodes - 1) as f64);
        let i = (f.floor() as usize).min(nodes - 2);
        (i, f - i as f64)
    }

    pub fn elevation_at(&self, x: f64, y: f64) -> Result<f64> {
        if !self.contains(x, y) {
            return Err(Error::OutOfBounds { x, y });
        }
        let (i, tx) = self.lattice_coord(x, self.origin.x, self.width_cells);
        let (j, ty) = self.lattice_coord(y, self.origin.y, self.height_cells);
        let h00 = self.node_height(i, j);
        let h10 = self.node_height(i + 1, j);
        let h01 = self.node_height(i, j + 1);
        let h11 = self.node_height(i + 1, j + 1);
        let lower = lerp(h00, h10, tx);
        let upper = lerp(h01, h11, tx);
        Ok(lerp(lower, upper, ty))
    }

    /// Central differences of the interpolated surface over one cell.
    pub fn gradient_at(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let cs = self.cell_size;
        let b = self.bounds();
        if !(x - cs >= b.min_x && x + cs <= b.max_x && y - cs >= b.min_y && y + cs <= b.max_y) {
            return Err(Error::OutOfBounds { x, y });
        }
        let dz_dx = (self.elevation_at(x + cs, y)? - self.elevation_at(x - cs, y)?) / (2.0 * cs);
        let dz_dy = (self.elevation_at(x, y + cs)? - self.elevation_at(x, y - cs)?) / (2.0 * cs);
        Ok((dz_dx, dz_dy))
    }

    /// Elevation change from `prev` to `cur`: h(cur) - h(prev).
    pub fn delta_h(&self, cur: Point2, prev: Point2) -> Result<f64> {
        Ok(self.elevation_at(cur.x, cur.y)? - self.elevation_at(prev.x, prev.y)?)
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    (1.0 - t) * a + t * b
}
