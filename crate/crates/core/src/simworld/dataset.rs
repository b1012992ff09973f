//! Dataset assembly and on-disk format.
//!
//! A dataset directory holds four files:
//! - `manifest.json` — generation parameters, seed, and the suggested
//!   evaluation radius.
//! - `scans.f32` — little-endian `[frames × rays × 2]` sensor-frame points.
//! - `mask.u8` — `[frames × rays]` hit flags (1 = obstacle hit).
//! - `poses.f32` — little-endian `[frames × 3]` (x, y, theta). Evaluation
//!   and the supervised oracle read this file; self-supervised training
//!   never does (see [`load_scans`]).
//!
//! Files store f32, so saving quantizes the in-memory f64 values; a loaded
//! dataset re-saves to byte-identical files.

use std::io::Read;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    generate_environment, load_environment, sample_trajectory, simulate_scan, Dataset,
    OccupancyGrid, Pose, Scan,
};
use crate::error::{Error, Result};
use crate::math::{sq_dist, wrap_2pi};
use crate::rng::{seeded_rng, stream};

pub const DATASET_FORMAT_VERSION: u32 = 1;

/// Where the environment comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnvSource {
    Procedural,
    Pgm(PathBuf),
}

/// All generation parameters for one dataset.
#[derive(Debug, Clone)]
pub struct GenerateConfig {
    pub seed: u64,
    pub env: EnvSource,
    pub width: usize,
    pub height: usize,
    pub obstacle_density: f64,
    pub pose_count: usize,
    pub ray_count: usize,
    pub max_range: f64,
    pub step_mean: f64,
    pub rot_limit: f64,
    /// Uniform range-noise amplitude hook; 0 keeps ray casting exact.
    pub noise_std: f64,
    /// Desired mean ground-truth neighborhood size used to pick the
    /// suggested evaluation radius.
    pub target_mean_gt: f64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            seed: 1,
            env: EnvSource::Procedural,
            width: 512,
            height: 512,
            obstacle_density: 0.12,
            pose_count: 1024,
            ray_count: 128,
            max_range: 256.0,
            step_mean: 9.6,
            rot_limit: 10f64.to_radians(),
            noise_std: 0.0,
            target_mean_gt: 20.0,
        }
    }
}

/// Generation metadata persisted with every dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub env_source: String,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub obstacle_density: f64,
    pub pose_count: usize,
    pub ray_count: usize,
    pub max_range: f64,
    pub step_mean: f64,
    pub rot_limit: f64,
    pub noise_std: f64,
    /// Radius at which the mean ground-truth neighborhood hits the target
    /// size; evaluation defaults to this value.
    pub suggested_radius: f64,
    pub mean_gt_size: f64,
}

/// Generates environment, trajectory, and scans, and picks the suggested
/// evaluation radius. Scan simulation runs in parallel; results are ordered
/// by frame index so output does not depend on scheduling.
pub fn generate_dataset(cfg: &GenerateConfig) -> Result<Dataset> {
    let grid = match &cfg.env {
        EnvSource::Procedural => {
            generate_environment(cfg.seed, cfg.width, cfg.height, cfg.obstacle_density)?
        }
        EnvSource::Pgm(path) => load_environment(path)?,
    };
    let poses = sample_trajectory(&grid, cfg.pose_count, cfg.seed, cfg.step_mean, cfg.rot_limit)?;
    let mut scans = poses
        .par_iter()
        .map(|pose| simulate_scan(&grid, pose, cfg.ray_count, cfg.max_range))
        .collect::<Result<Vec<Scan>>>()?;
    for (i, scan) in scans.iter_mut().enumerate() {
        scan.frame_index = i as u32;
        if cfg.noise_std > 0.0 {
            apply_range_noise(scan, cfg.noise_std, cfg.seed, i as u64, cfg.max_range);
        }
    }
    let (suggested_radius, mean_gt_size) = suggest_radius(&poses, cfg.target_mean_gt)?;
    let manifest = DatasetManifest {
        format_version: DATASET_FORMAT_VERSION,
        env_source: match &cfg.env {
            EnvSource::Procedural => "procedural".to_string(),
            EnvSource::Pgm(p) => p.display().to_string(),
        },
        seed: cfg.seed,
        width: grid.width(),
        height: grid.height(),
        obstacle_density: cfg.obstacle_density,
        pose_count: cfg.pose_count,
        ray_count: cfg.ray_count,
        max_range: cfg.max_range,
        step_mean: cfg.step_mean,
        rot_limit: cfg.rot_limit,
        noise_std: cfg.noise_std,
        suggested_radius,
        mean_gt_size,
    };
    Ok(Dataset {
        scans,
        poses,
        manifest,
    })
}

/// Scales each hit return by a uniform factor so range noise has standard
/// deviation `std` per unit range (uniform, not Gaussian: the hook only
/// needs a bounded perturbation).
fn apply_range_noise(scan: &mut Scan, std: f64, seed: u64, frame: u64, max_range: f64) {
    let half_width = std * 3f64.sqrt();
    let mut rng = seeded_rng(seed, &[stream::NOISE, frame]);
    for (p, &m) in scan.points.iter_mut().zip(&scan.hit_mask) {
        let eps: f64 = rng.gen_range(-half_width..=half_width);
        if !m {
            continue;
        }
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let nr = (r + eps).clamp(1e-6, max_range);
        let s = nr / r;
        p[0] *= s;
        p[1] *= s;
    }
}

/// Bisects the radius at which the mean neighborhood size reaches the
/// target, then checks the result lands in the useful 10..=30 band.
fn suggest_radius(poses: &[Pose], target: f64) -> Result<(f64, f64)> {
    let mean_at = |r: f64| {
        let r2 = r * r;
        let mut total = 0usize;
        for i in 0..poses.len() {
            for j in i + 1..poses.len() {
                if sq_dist(poses[i].position(), poses[j].position()) <= r2 {
                    total += 2;
                }
            }
        }
        total as f64 / poses.len() as f64
    };
    let mut lo = 0.25;
    let mut hi = 4.0 * poses
        .iter()
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(1.0, f64::max);
    for _ in 0..48 {
        if hi - lo < 1e-3 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mean_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mean = mean_at(hi);
    if !(10.0..=30.0).contains(&mean) {
        return Err(Error::config(format!(
            "auto radius {hi:.2} gives mean neighborhood {mean:.1}, outside 10..=30; \
             adjust trajectory parameters or set the evaluation radius explicitly"
        )));
    }
    Ok((hi, mean))
}

fn file_path(dir: &Path, name: &str) -> (PathBuf, String) {
    let p = dir.join(name);
    let s = p.display().to_string();
    (p, s)
}

impl Dataset {
    /// Writes the four dataset files, quantizing values to f32.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let (p, s) = file_path(dir, "manifest.json");
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        std::fs::write(&p, json + "\n").map_err(|e| Error::io(s, e))?;

        let ray_count = self.manifest.ray_count;
        let mut scan_bytes = Vec::with_capacity(self.scans.len() * ray_count * 8);
        let mut mask_bytes = Vec::with_capacity(self.scans.len() * ray_count);
        for scan in &self.scans {
            for p in &scan.points {
                scan_bytes.extend_from_slice(&(p[0] as f32).to_le_bytes());
                scan_bytes.extend_from_slice(&(p[1] as f32).to_le_bytes());
            }
            for &m in &scan.hit_mask {
                mask_bytes.push(u8::from(m));
            }
        }
        let (p, s) = file_path(dir, "scans.f32");
        std::fs::write(&p, scan_bytes).map_err(|e| Error::io(s, e))?;
        let (p, s) = file_path(dir, "mask.u8");
        std::fs::write(&p, mask_bytes).map_err(|e| Error::io(s, e))?;

        let mut pose_bytes = Vec::with_capacity(self.poses.len() * 12);
        for pose in &self.poses {
            pose_bytes.extend_from_slice(&(pose.x as f32).to_le_bytes());
            pose_bytes.extend_from_slice(&(pose.y as f32).to_le_bytes());
            pose_bytes.extend_from_slice(&(pose.theta as f32).to_le_bytes());
        }
        let (p, s) = file_path(dir, "poses.f32");
        std::fs::write(&p, pose_bytes).map_err(|e| Error::io(s, e))?;
        Ok(())
    }

    /// Loads a full dataset including poses; fails with a poses-unavailable
    /// error when `poses.f32` is absent.
    pub fn load(dir: impl AsRef<Path>) -> Result<Dataset> {
        let dir = dir.as_ref();
        let (scans, manifest) = load_scans(dir)?;
        let poses = load_poses(dir, scans.len())?;
        Ok(Dataset {
            scans,
            poses,
            manifest,
        })
    }
}

fn read_file(dir: &Path, name: &str) -> Result<Vec<u8>> {
    let (p, s) = file_path(dir, name);
    let mut buf = Vec::new();
    std::fs::File::open(&p)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(s, e))?;
    Ok(buf)
}

/// Loads scans and the manifest only. Training paths use this entry point,
/// which never touches `poses.f32`.
pub fn load_scans(dir: impl AsRef<Path>) -> Result<(Vec<Scan>, DatasetManifest)> {
    let dir = dir.as_ref();
    let manifest_bytes = read_file(dir, "manifest.json")?;
    let manifest: DatasetManifest = serde_json::from_slice(&manifest_bytes).map_err(|e| {
        Error::format(dir.join("manifest.json").display().to_string(), e.to_string())
    })?;
    if manifest.format_version != DATASET_FORMAT_VERSION {
        return Err(Error::format(
            dir.join("manifest.json").display().to_string(),
            format!(
                "format_version {} unsupported (expected {DATASET_FORMAT_VERSION})",
                manifest.format_version
            ),
        ));
    }
    let frames = manifest.pose_count;
    let rays = manifest.ray_count;

    let scan_bytes = read_file(dir, "scans.f32")?;
    let expected = frames * rays * 2 * 4;
    if scan_bytes.len() != expected {
        return Err(Error::format(
            dir.join("scans.f32").display().to_string(),
            format!("expected {expected} bytes, found {}", scan_bytes.len()),
        ));
    }
    let mask_bytes = read_file(dir, "mask.u8")?;
    if mask_bytes.len() != frames * rays {
        return Err(Error::format(
            dir.join("mask.u8").display().to_string(),
            format!("expected {} bytes, found {}", frames * rays, mask_bytes.len()),
        ));
    }
    let mut scans = Vec::with_capacity(frames);
    for i in 0..frames {
        let mut points = Vec::with_capacity(rays);
        for k in 0..rays {
            let off = (i * rays + k) * 8;
            let x = f32::from_le_bytes(scan_bytes[off..off + 4].try_into().unwrap());
            let y = f32::from_le_bytes(scan_bytes[off + 4..off + 8].try_into().unwrap());
            points.push([x as f64, y as f64]);
        }
        let hit_mask = mask_bytes[i * rays..(i + 1) * rays]
            .iter()
            .map(|&b| b != 0)
            .collect();
        scans.push(Scan {
            frame_index: i as u32,
            points,
            hit_mask,
        });
    }
    Ok((scans, manifest))
}

/// Loads ground-truth poses. Only evaluation and the supervised oracle may
/// call this.
pub fn load_poses(dir: impl AsRef<Path>, expected_frames: usize) -> Result<Vec<Pose>> {
    let dir = dir.as_ref();
    let (p, s) = file_path(dir, "poses.f32");
    if !p.exists() {
        return Err(Error::PosesUnavailable(format!(
            "{s} is missing; ground-truth poses are required for evaluation and supervised training"
        )));
    }
    let bytes = read_file(dir, "poses.f32")?;
    if bytes.len() != expected_frames * 12 {
        return Err(Error::format(
            s,
            format!("expected {} bytes, found {}", expected_frames * 12, bytes.len()),
        ));
    }
    let mut poses = Vec::with_capacity(expected_frames);
    for i in 0..expected_frames {
        let off = i * 12;
        let x = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as f64;
        let y = f32::from_le_bytes(bytes[off + 4..off + 8].try_into().unwrap()) as f64;
        let theta = f32::from_le_bytes(bytes[off + 8..off + 12].try_into().unwrap()) as f64;
        poses.push(Pose {
            x,
            y,
            theta: wrap_2pi(theta),
        });
    }
    Ok(poses)
}

/// Convenience for tests and in-process pipelines: the grid belonging to a
/// manifest generated procedurally.
pub fn regenerate_grid(manifest: &DatasetManifest) -> Result<OccupancyGrid> {
    if manifest.env_source != "procedural" {
        return load_environment(&manifest.env_source);
    }
    generate_environment(
        manifest.seed,
        manifest.width,
        manifest.height,
        manifest.obstacle_density,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> GenerateConfig {
        GenerateConfig {
            seed: 3,
            width: 128,
            height: 128,
            obstacle_density: 0.1,
            pose_count: 192,
            ray_count: 32,
            max_range: 80.0,
            step_mean: 4.0,
            ..GenerateConfig::default()
        }
    }

    #[test]
    fn roundtrip_is_byte_stable() {
        let ds = generate_dataset(&small_cfg()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        ds.save(&a).unwrap();
        let loaded = Dataset::load(&a).unwrap();
        loaded.save(&b).unwrap();
        for name in ["manifest.json", "scans.f32", "mask.u8", "poses.f32"] {
            let fa = std::fs::read(a.join(name)).unwrap();
            let fb = std::fs::read(b.join(name)).unwrap();
            assert_eq!(fa, fb, "file {name} changed across save/load/save");
        }
        assert_eq!(loaded.manifest, ds.manifest);
        assert_eq!(loaded.scans.len(), ds.scans.len());
    }

    #[test]
    fn loaded_points_are_f32_quantized() {
        let ds = generate_dataset(&small_cfg()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        ds.save(dir.path()).unwrap();
        let loaded = Dataset::load(dir.path()).unwrap();
        for (a, b) in ds.scans[0].points.iter().zip(&loaded.scans[0].points) {
            assert_eq!(a[0] as f32 as f64, b[0]);
            assert_eq!(a[1] as f32 as f64, b[1]);
        }
    }

    #[test]
    fn scans_load_without_poses() {
        let ds = generate_dataset(&small_cfg()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        ds.save(dir.path()).unwrap();
        std::fs::remove_file(dir.path().join("poses.f32")).unwrap();
        let (scans, manifest) = load_scans(dir.path()).unwrap();
        assert_eq!(scans.len(), manifest.pose_count);
        let err = load_poses(dir.path(), scans.len()).unwrap_err();
        assert!(matches!(err, Error::PosesUnavailable(_)), "{err}");
        assert!(Dataset::load(dir.path()).is_err());
    }

    #[test]
    fn suggested_radius_hits_target_band() {
        let ds = generate_dataset(&small_cfg()).unwrap();
        assert!(
            (10.0..=30.0).contains(&ds.manifest.mean_gt_size),
            "mean gt {}",
            ds.manifest.mean_gt_size
        );
        assert!(ds.manifest.suggested_radius > 0.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_dataset(&small_cfg()).unwrap();
        let b = generate_dataset(&small_cfg()).unwrap();
        assert_eq!(a.manifest, b.manifest);
        assert_eq!(a.scans, b.scans);
        assert_eq!(a.poses, b.poses);
    }
}
