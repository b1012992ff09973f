//! Procedural environment generation.

use rand::Rng;

use super::OccupancyGrid;
use crate::error::{Error, Result};
use crate::rng::{seeded_rng, stream};

const MAX_ATTEMPTS: u64 = 16;
/// The largest free component must keep at least this share of the interior,
/// otherwise the attempt is discarded.
const MIN_FREE_SHARE: f64 = 0.25;

/// Generates a closed world with randomly placed rectangular blocks and thin
/// walls until the requested obstacle density is reached, then fills every
/// free component except the largest so free space is connected.
///
/// Deterministic for a given seed. Fails if no attempt out of a bounded
/// number yields a sufficiently large connected free region.
pub fn generate_environment(
    seed: u64,
    width: usize,
    height: usize,
    obstacle_density: f64,
) -> Result<OccupancyGrid> {
    if !(0.0..=0.4).contains(&obstacle_density) {
        return Err(Error::config(format!(
            "obstacle_density must be in [0, 0.4], got {obstacle_density}"
        )));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut grid = OccupancyGrid::empty_bordered(width, height)?;
        let mut rng = seeded_rng(seed, &[stream::ENV, attempt]);
        if obstacle_density > 0.0 {
            scatter_obstacles(&mut grid, &mut rng, obstacle_density);
        }
        let kept = keep_largest_free_component(&mut grid);
        let interior = (width - 2) * (height - 2);
        if kept as f64 >= MIN_FREE_SHARE * interior as f64 {
            return Ok(grid);
        }
    }
    Err(Error::config(format!(
        "could not generate a connected environment at density {obstacle_density} \
         within {MAX_ATTEMPTS} attempts"
    )))
}

fn scatter_obstacles(grid: &mut OccupancyGrid, rng: &mut impl Rng, density: f64) {
    let (w, h) = (grid.width(), grid.height());
    let interior = ((w - 2) * (h - 2)) as f64;
    let target = density * interior;
    let mut occupied = 0.0;
    // Generous cap; each shape adds at least a few cells.
    let max_shapes = (target as usize / 4).max(64) * 4;
    for _ in 0..max_shapes {
        if occupied >= target {
            break;
        }
        let block = rng.gen_bool(0.5);
        let (bw, bh) = if block {
            let side = (w.min(h) / 24).max(4);
            (rng.gen_range(3..=side), rng.gen_range(3..=side))
        } else if rng.gen_bool(0.5) {
            (rng.gen_range(w / 16..=w / 4), rng.gen_range(1..=2))
        } else {
            (rng.gen_range(1..=2), rng.gen_range(h / 16..=h / 4))
        };
        let x0 = rng.gen_range(1..w - 1);
        let y0 = rng.gen_range(1..h - 1);
        for y in y0..(y0 + bh).min(h - 1) {
            for x in x0..(x0 + bw).min(w - 1) {
                if grid.is_free(x as i64, y as i64) {
                    grid.set_occupied(x, y);
                    occupied += 1.0;
                }
            }
        }
    }
}

/// Flood-fills free components (4-connected), keeps the largest, occupies the
/// rest. Returns the size of the kept component.
fn keep_largest_free_component(grid: &mut OccupancyGrid) -> usize {
    let (w, h) = (grid.width(), grid.height());
    let mut label = vec![u32::MAX; w * h];
    let mut sizes: Vec<usize> = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if grid.cells()[start] || label[start] != u32::MAX {
            continue;
        }
        let id = sizes.len() as u32;
        let mut size = 0usize;
        stack.push(start);
        label[start] = id;
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            for (nx, ny) in [
                (x.wrapping_sub(1), y),
                (x + 1, y),
                (x, y.wrapping_sub(1)),
                (x, y + 1),
            ] {
                if nx < w && ny < h {
                    let j = ny * w + nx;
                    if !grid.cells()[j] && label[j] == u32::MAX {
                        label[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
        sizes.push(size);
    }
    let Some((largest, &largest_size)) = sizes
        .iter()
        .enumerate()
        .max_by_key(|&(i, &s)| (s, std::cmp::Reverse(i)))
    else {
        return 0;
    };
    for i in 0..w * h {
        if !grid.cells()[i] && label[i] != largest as u32 {
            grid.set_occupied(i % w, i / w);
        }
    }
    largest_size
}
