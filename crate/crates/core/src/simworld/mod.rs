//! Simulated 2D LiDAR worlds.
//!
//! An [`OccupancyGrid`] is a closed binary world (border cells always
//! occupied). A trajectory is a seeded random walk through free space, and
//! each pose yields a [`Scan`]: a fixed-size ring of range returns in the
//! sensor frame. Poses are carried alongside scans in a [`Dataset`] but are
//! consumed only by evaluation and by the supervised training oracle; the
//! self-supervised pipeline reads scans alone.

mod dataset;
mod gen;
mod pgm;
mod scan;
mod trajectory;

pub use dataset::{
    generate_dataset, load_poses, load_scans, Dataset, DatasetManifest, EnvSource, GenerateConfig,
};
pub use gen::generate_environment;
pub use pgm::load_environment;
pub use scan::simulate_scan;
pub use trajectory::sample_trajectory;

pub(crate) use scan::cast_ray;

use crate::error::{Error, Result};

/// Minimum world side length in cells.
pub const MIN_GRID_SIDE: usize = 64;

/// Binary occupancy world. Cell `(cx, cy)` covers `[cx, cx+1) x [cy, cy+1)`
/// in world units; `true` means obstacle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl OccupancyGrid {
    /// Builds a grid from raw cells, enforcing minimum size and forcing the
    /// border occupied.
    pub fn from_cells(width: usize, height: usize, cells: Vec<bool>) -> Result<Self> {
        if width < MIN_GRID_SIDE || height < MIN_GRID_SIDE {
            return Err(Error::config(format!(
                "grid must be at least {MIN_GRID_SIDE}x{MIN_GRID_SIDE}, got {width}x{height}"
            )));
        }
        if cells.len() != width * height {
            return Err(Error::config(format!(
                "cell buffer length {} does not match {width}x{height}",
                cells.len()
            )));
        }
        let mut grid = OccupancyGrid {
            width,
            height,
            cells,
        };
        grid.force_border();
        Ok(grid)
    }

    /// All-free interior with an occupied border.
    pub fn empty_bordered(width: usize, height: usize) -> Result<Self> {
        Self::from_cells(width, height, vec![false; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    fn idx(&self, cx: usize, cy: usize) -> usize {
        cy * self.width + cx
    }

    /// Occupancy lookup; everything outside the grid counts as occupied.
    #[inline]
    pub fn is_occupied(&self, cx: i64, cy: i64) -> bool {
        if cx < 0 || cy < 0 || cx >= self.width as i64 || cy >= self.height as i64 {
            return true;
        }
        self.cells[cy as usize * self.width + cx as usize]
    }

    #[inline]
    pub fn is_free(&self, cx: i64, cy: i64) -> bool {
        !self.is_occupied(cx, cy)
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub(crate) fn set_occupied(&mut self, cx: usize, cy: usize) {
        let i = self.idx(cx, cy);
        self.cells[i] = true;
    }

    fn force_border(&mut self) {
        for x in 0..self.width {
            let (w, h) = (self.width, self.height);
            self.cells[x] = true;
            self.cells[(h - 1) * w + x] = true;
        }
        for y in 0..self.height {
            self.cells[y * self.width] = true;
            self.cells[y * self.width + self.width - 1] = true;
        }
    }

    /// Row-major list of free cells.
    pub fn free_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.cells[self.idx(x, y)] {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Fraction of non-border cells that are occupied.
    pub fn interior_occupied_fraction(&self) -> f64 {
        let mut occ = 0usize;
        let mut total = 0usize;
        for y in 1..self.height - 1 {
            for x in 1..self.width - 1 {
                total += 1;
                if self.cells[self.idx(x, y)] {
                    occ += 1;
                }
            }
        }
        occ as f64 / total.max(1) as f64
    }
}

/// A 2D pose: position in world cells, heading in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// One LiDAR observation: `ray_count` points in the sensor frame, in
/// ascending-bearing ray order. Rays that reached `max_range` without an
/// intersection keep a placeholder point at max range and `hit_mask = false`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub frame_index: u32,
    pub points: Vec<[f64; 2]>,
    pub hit_mask: Vec<bool>,
}

impl Scan {
    pub fn ray_count(&self) -> usize {
        self.points.len()
    }

    pub fn hit_count(&self) -> usize {
        self.hit_mask.iter().filter(|&&m| m).count()
    }

    /// The masked subset of points that actually hit an obstacle.
    pub fn hit_points(&self) -> Vec<[f64; 2]> {
        self.points
            .iter()
            .zip(&self.hit_mask)
            .filter_map(|(p, &m)| if m { Some(*p) } else { None })
            .collect()
    }
}
