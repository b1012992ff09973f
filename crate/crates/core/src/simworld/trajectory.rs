//! Random-walk trajectory sampling.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use super::{cast_ray, OccupancyGrid, Pose};
use crate::error::{Error, Result};
use crate::math::wrap_2pi;
use crate::rng::{seeded_rng, stream};

/// Per-step retries before giving up on a pose.
const MAX_RETRIES: usize = 64;
/// Retries drawn from the bounded turn range before widening to a full
/// circle so the walk can escape corners.
const NARROW_RETRIES: usize = 16;

/// Samples a random walk of `length` poses through free space.
///
/// Each step turns by a uniform angle within `±rot_limit` and advances along
/// the new heading by `step_mean * U[0.5, 1.5]` (mean `step_mean`). Steps
/// whose path would cross an occupied cell are resampled with a fresh
/// heading; after several narrow retries the heading is redrawn from the full
/// circle. Deterministic per seed.
pub fn sample_trajectory(
    grid: &OccupancyGrid,
    length: usize,
    seed: u64,
    step_mean: f64,
    rot_limit: f64,
) -> Result<Vec<Pose>> {
    if length < 2 {
        return Err(Error::config(format!(
            "trajectory length must be at least 2, got {length}"
        )));
    }
    if !(step_mean > 0.0) {
        return Err(Error::config("step_mean must be positive".to_string()));
    }
    if !(0.0..=PI).contains(&rot_limit) {
        return Err(Error::config(format!(
            "rot_limit must be in [0, π], got {rot_limit}"
        )));
    }
    let free = grid.free_cells();
    if free.is_empty() {
        return Err(Error::config("grid has no free space".to_string()));
    }
    let mut rng = seeded_rng(seed, &[stream::TRAJECTORY]);
    let (sx, sy) = free[rng.gen_range(0..free.len())];
    let mut pos = [sx as f64 + 0.5, sy as f64 + 0.5];
    let mut theta = rng.gen_range(0.0..TAU);
    let mut poses = Vec::with_capacity(length);
    poses.push(Pose {
        x: pos[0],
        y: pos[1],
        theta,
    });
    while poses.len() < length {
        let mut accepted = false;
        for retry in 0..MAX_RETRIES {
            let dtheta = if retry < NARROW_RETRIES {
                rng.gen_range(-rot_limit..=rot_limit)
            } else {
                rng.gen_range(-PI..PI)
            };
            let step = step_mean * rng.gen_range(0.5..=1.5);
            let cand_theta = wrap_2pi(theta + dtheta);
            let dir = [cand_theta.cos(), cand_theta.sin()];
            if cast_ray(grid, pos, dir, step).is_none() {
                pos = [pos[0] + step * dir[0], pos[1] + step * dir[1]];
                theta = cand_theta;
                poses.push(Pose {
                    x: pos[0],
                    y: pos[1],
                    theta,
                });
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::config(format!(
                "trajectory boxed in after {} poses; free space too tight for step_mean {step_mean}",
                poses.len()
            )));
        }
    }
    Ok(poses)
}
