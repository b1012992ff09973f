//! Point-to-point ICP with a closed-form 2D rigid fit, plus multi-start
//! geometric verification.

use std::f64::consts::TAU;

use super::{chamfer_distance, nearest_sq, RigidTransform2D};
use crate::error::{Error, Result};
use crate::simworld::Scan;

/// Outcome of one ICP run.
#[derive(Debug, Clone, Copy)]
pub struct IcpResult {
    pub transform: RigidTransform2D,
    /// Mean squared distance from transformed source points to their nearest
    /// destination points at the final transform.
    pub mean_sq_error: f64,
    /// Iterations consumed. Degenerate fits (collinear points) report
    /// `max_iters` regardless of when they stopped.
    pub iterations_used: u32,
}

/// Result of multi-start geometric verification of a scan pair.
#[derive(Debug, Clone, Copy)]
pub struct VerificationScore {
    /// Symmetric Chamfer distance after the best alignment.
    pub chamfer: f64,
    pub transform: RigidTransform2D,
    pub iterations_used: u32,
}

/// ICP from the identity initialization.
pub fn icp_align(
    src: &[[f64; 2]],
    dst: &[[f64; 2]],
    max_iters: u32,
    tol: f64,
) -> Result<IcpResult> {
    icp_align_from(src, dst, RigidTransform2D::identity(), max_iters, tol)
}

/// ICP from an explicit initial transform.
///
/// Each iteration pairs every transformed source point with its nearest
/// destination point (exact brute force), then applies the closed-form rigid
/// fit that minimizes the paired squared error. The pairing cost sequence is
/// non-increasing; iteration stops when the improvement drops below `tol`.
pub fn icp_align_from(
    src: &[[f64; 2]],
    dst: &[[f64; 2]],
    init: RigidTransform2D,
    max_iters: u32,
    tol: f64,
) -> Result<IcpResult> {
    if src.len() < 2 || dst.len() < 2 {
        return Err(Error::config(format!(
            "icp_align requires at least 2 points per set, got {} and {}",
            src.len(),
            dst.len()
        )));
    }
    if max_iters == 0 {
        return Err(Error::config("icp max_iters must be positive".to_string()));
    }
    let mut transform = init;
    let mut moved: Vec<[f64; 2]> = src.iter().map(|&p| init.apply(p)).collect();
    let mut matched: Vec<[f64; 2]> = vec![[0.0; 2]; src.len()];
    let mut prev_cost = f64::INFINITY;
    let mut degenerate = false;
    let mut iterations = 0u32;
    for iter in 1..=max_iters {
        iterations = iter;
        let mut cost = 0.0;
        for (m, slot) in moved.iter().zip(matched.iter_mut()) {
            let (d2, j) = nearest_sq(*m, dst);
            *slot = dst[j];
            cost += d2;
        }
        cost /= moved.len() as f64;
        if !cost.is_finite() {
            return Err(Error::numeric("icp pairing cost is not finite".to_string()));
        }
        // Optimal per-iteration fits make the pairing cost non-increasing.
        debug_assert!(
            cost <= prev_cost + 1e-9,
            "pairing cost rose from {prev_cost} to {cost}"
        );
        if prev_cost - cost < tol {
            break;
        }
        prev_cost = cost;
        match rigid_fit(&moved, &matched) {
            Some(delta) => {
                for p in &mut moved {
                    *p = delta.apply(*p);
                }
                transform = delta.compose(&transform);
            }
            None => {
                degenerate = true;
                break;
            }
        }
    }
    let final_cost = moved
        .iter()
        .map(|&m| nearest_sq(m, dst).0)
        .sum::<f64>()
        / moved.len() as f64;
    Ok(IcpResult {
        transform,
        mean_sq_error: final_cost,
        iterations_used: if degenerate { max_iters } else { iterations },
    })
}

/// Closed-form 2D rigid fit minimizing the summed squared distance between
/// paired points. Returns `None` when the source points are collinear within
/// 1e-9 (rotation is not identifiable).
fn rigid_fit(from: &[[f64; 2]], to: &[[f64; 2]]) -> Option<RigidTransform2D> {
    let n = from.len() as f64;
    let mut mu_f = [0.0; 2];
    let mut mu_t = [0.0; 2];
    for (f, t) in from.iter().zip(to) {
        mu_f[0] += f[0];
        mu_f[1] += f[1];
        mu_t[0] += t[0];
        mu_t[1] += t[1];
    }
    mu_f[0] /= n;
    mu_f[1] /= n;
    mu_t[0] /= n;
    mu_t[1] /= n;
    let mut dot = 0.0;
    let mut cross = 0.0;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (f, t) in from.iter().zip(to) {
        let fx = f[0] - mu_f[0];
        let fy = f[1] - mu_f[1];
        let tx = t[0] - mu_t[0];
        let ty = t[1] - mu_t[1];
        dot += fx * tx + fy * ty;
        cross += fx * ty - fy * tx;
        sxx += fx * fx;
        sxy += fx * fy;
        syy += fy * fy;
    }
    // Smallest eigenvalue of the source scatter matrix; ~0 means collinear.
    let tr = sxx + syy;
    let det_term = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    let lambda_min = 0.5 * (tr - det_term) / n;
    if lambda_min < 1e-9 {
        return None;
    }
    let theta = cross.atan2(dot);
    let (sin, cos) = theta.sin_cos();
    let t = [
        mu_t[0] - (cos * mu_f[0] - sin * mu_f[1]),
        mu_t[1] - (sin * mu_f[0] + cos * mu_f[1]),
    ];
    Some(RigidTransform2D::new(theta, t))
}

/// Aligns scan `a` onto scan `b` from `starts` rotation initializations
/// evenly spaced over the circle (translation starts at zero) and returns
/// the smallest exact Chamfer distance found, with its transform. Ties keep
/// the earliest start, so the result is deterministic.
pub fn verify_pair(
    a: &Scan,
    b: &Scan,
    starts: u32,
    max_iters: u32,
    tol: f64,
) -> Result<VerificationScore> {
    if starts == 0 {
        return Err(Error::config("verify_pair needs at least one start".to_string()));
    }
    let pa = a.hit_points();
    let pb = b.hit_points();
    if pa.len() < 2 || pb.len() < 2 {
        return Err(Error::config(format!(
            "verify_pair requires at least 2 hit points per scan, got {} and {}",
            pa.len(),
            pb.len()
        )));
    }
    let mut best: Option<VerificationScore> = None;
    let mut aligned = vec![[0.0; 2]; pa.len()];
    for s in 0..starts {
        let init = RigidTransform2D::new(s as f64 * TAU / starts as f64, [0.0, 0.0]);
        let r = icp_align_from(&pa, &pb, init, max_iters, tol)?;
        for (slot, &p) in aligned.iter_mut().zip(&pa) {
            *slot = r.transform.apply(p);
        }
        let chamfer = chamfer_distance(&aligned, &pb)?;
        let better = match &best {
            None => true,
            Some(b) => chamfer < b.chamfer,
        };
        if better {
            best = Some(VerificationScore {
                chamfer,
                transform: r.transform,
                iterations_used: r.iterations_used,
            });
        }
    }
    Ok(best.expect("starts >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointops::rotate_scan;
    use rand::Rng;
    use std::f64::consts::PI;

    fn random_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = crate::rng::seeded_rng(seed, &[0x1c9]);
        (0..n)
            .map(|_| [rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)])
            .collect()
    }

    fn as_scan(points: Vec<[f64; 2]>) -> Scan {
        let n = points.len();
        Scan {
            frame_index: 0,
            points,
            hit_mask: vec![true; n],
        }
    }

    #[test]
    fn identity_on_equal_sets() {
        let pts = random_points(48, 1);
        let r = icp_align(&pts, &pts, 30, 1e-9).unwrap();
        assert!(r.mean_sq_error < 1e-18);
        assert!(r.transform.rotation.abs() < 1e-9);
        assert!(r.transform.translation[0].abs() < 1e-9);
        assert!(r.transform.translation[1].abs() < 1e-9);
    }

    #[test]
    fn recovers_known_transform() {
        let src = random_points(64, 2);
        let t_true = RigidTransform2D::new(30f64.to_radians(), [5.0, 2.0]);
        let dst: Vec<[f64; 2]> = src.iter().map(|&p| t_true.apply(p)).collect();
        let r = icp_align(&src, &dst, 50, 1e-12).unwrap();
        assert!(
            (r.transform.rotation - t_true.rotation).abs() < 1e-3,
            "rotation {} vs {}",
            r.transform.rotation,
            t_true.rotation
        );
        assert!((r.transform.translation[0] - 5.0).abs() < 1e-2);
        assert!((r.transform.translation[1] - 2.0).abs() < 1e-2);
    }

    #[test]
    fn half_turn_needs_multi_start() {
        let src = random_points(72, 3);
        let t_true = RigidTransform2D::new(PI, [0.0, 0.0]);
        let dst: Vec<[f64; 2]> = src.iter().map(|&p| t_true.apply(p)).collect();
        let single = icp_align(&src, &dst, 40, 1e-12).unwrap();
        let multi = verify_pair(
            &as_scan(src.clone()),
            &as_scan(dst.clone()),
            8,
            40,
            1e-12,
        )
        .unwrap();
        assert!(multi.chamfer < 1e-6, "multi-start chamfer {}", multi.chamfer);
        assert!(
            multi.chamfer < single.mean_sq_error,
            "multi-start must beat the stuck single start"
        );
    }

    #[test]
    fn self_pair_under_rotations_verifies_clean() {
        let scan = as_scan(random_points(64, 4));
        for i in 0..4 {
            let angle = i as f64 * TAU / 4.0 + 0.3;
            let rotated = rotate_scan(&scan, angle);
            let score = verify_pair(&scan, &rotated, 8, 30, 1e-9).unwrap();
            assert!(score.chamfer < 1e-6, "angle {angle}: chamfer {}", score.chamfer);
        }
    }

    #[test]
    fn collinear_points_flag_degeneracy() {
        let src: Vec<[f64; 2]> = (0..16).map(|i| [i as f64, 2.0 * i as f64]).collect();
        let dst: Vec<[f64; 2]> = src.iter().map(|&[x, y]| [x + 1.0, y - 0.5]).collect();
        let r = icp_align(&src, &dst, 25, 1e-12).unwrap();
        assert_eq!(r.iterations_used, 25);
    }

    #[test]
    fn rejects_tiny_sets() {
        assert!(icp_align(&[[0.0, 0.0]], &[[1.0, 1.0], [2.0, 2.0]], 10, 1e-9).is_err());
        let s = as_scan(vec![[0.0, 0.0], [1.0, 0.0]]);
        let mut empty = s.clone();
        empty.hit_mask = vec![false, false];
        assert!(verify_pair(&s, &empty, 4, 10, 1e-9).is_err());
    }
}
