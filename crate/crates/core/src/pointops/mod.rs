//! Pure geometric primitives shared by training, mining, and verification:
//! rigid 2D transforms, scan rotation, Chamfer distance, multi-start ICP,
//! and exact KNN over embeddings.

mod icp;
mod knn;

pub use icp::{icp_align, icp_align_from, verify_pair, IcpResult, VerificationScore};
pub use knn::knn_search;

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::math::{sq_dist, wrap_pi};
use crate::simworld::Scan;

/// Rotation followed by translation in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform2D {
    /// Radians, wrapped to `[-π, π)`.
    pub rotation: f64,
    pub translation: [f64; 2],
}

impl RigidTransform2D {
    pub fn identity() -> Self {
        RigidTransform2D {
            rotation: 0.0,
            translation: [0.0, 0.0],
        }
    }

    pub fn new(rotation: f64, translation: [f64; 2]) -> Self {
        RigidTransform2D {
            rotation: wrap_pi(rotation),
            translation,
        }
    }

    #[inline]
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let (sin, cos) = self.rotation.sin_cos();
        [
            cos * p[0] - sin * p[1] + self.translation[0],
            sin * p[0] + cos * p[1] + self.translation[1],
        ]
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform2D) -> RigidTransform2D {
        let (sin, cos) = self.rotation.sin_cos();
        RigidTransform2D::new(
            self.rotation + other.rotation,
            [
                cos * other.translation[0] - sin * other.translation[1] + self.translation[0],
                sin * other.translation[0] + cos * other.translation[1] + self.translation[1],
            ],
        )
    }

    pub fn inverse(&self) -> RigidTransform2D {
        let (sin, cos) = self.rotation.sin_cos();
        let [tx, ty] = self.translation;
        RigidTransform2D::new(-self.rotation, [-(cos * tx + sin * ty), sin * tx - cos * ty])
    }
}

/// Rotates every point about the sensor origin and circularly shifts the ray
/// order by `round(angle / (2π/P))` so points stay in ascending-bearing
/// order. The hit mask shifts identically; the frame index is preserved.
pub fn rotate_scan(scan: &Scan, angle: f64) -> Scan {
    let p = scan.points.len();
    let (sin, cos) = angle.sin_cos();
    let shift = if p == 0 {
        0
    } else {
        let per_ray = TAU / p as f64;
        (angle / per_ray).round() as i64
    };
    let mut points = vec![[0.0; 2]; p];
    let mut hit_mask = vec![false; p];
    for k in 0..p {
        let to = (k as i64 + shift).rem_euclid(p as i64) as usize;
        let [x, y] = scan.points[k];
        points[to] = [cos * x - sin * y, sin * x + cos * y];
        hit_mask[to] = scan.hit_mask[k];
    }
    Scan {
        frame_index: scan.frame_index,
        points,
        hit_mask,
    }
}

/// Symmetric Chamfer distance: mean squared nearest-neighbor distance from
/// `a` to `b` plus the same from `b` to `a`. Mean (not sum) keeps the score
/// comparable across point counts.
pub fn chamfer_distance(a: &[[f64; 2]], b: &[[f64; 2]]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::config(
            "chamfer_distance requires two non-empty point sets".to_string(),
        ));
    }
    Ok(mean_nn_sq(a, b) + mean_nn_sq(b, a))
}

/// Mean over `from` of the squared distance to the nearest point in `to`.
#[inline]
pub(crate) fn mean_nn_sq(from: &[[f64; 2]], to: &[[f64; 2]]) -> f64 {
    let mut acc = 0.0;
    for &p in from {
        acc += nearest_sq(p, to).0;
    }
    acc / from.len() as f64
}

/// Returns (squared distance, index) of the nearest point; ties keep the
/// lowest index. Plain brute force: scans are small enough that this beats
/// building an index, and it is exact.
#[inline]
pub(crate) fn nearest_sq(p: [f64; 2], to: &[[f64; 2]]) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut best_i = 0usize;
    for (i, &q) in to.iter().enumerate() {
        let d = sq_dist(p, q);
        if d < best {
            best = d;
            best_i = i;
        }
    }
    (best, best_i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn demo_scan(n: usize) -> Scan {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(5, &[0x51]);
        let points = (0..n)
            .map(|_| {
                let r = rng.gen_range(2.0..30.0);
                let a = rng.gen_range(0.0..TAU);
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        Scan {
            frame_index: 9,
            points,
            hit_mask: vec![true; n],
        }
    }

    #[test]
    fn transform_identity_and_inverse() {
        let t = RigidTransform2D::new(0.83, [4.0, -2.5]);
        let inv = t.inverse();
        let round = t.compose(&inv);
        assert!(round.rotation.abs() < 1e-9);
        assert!(round.translation[0].abs() < 1e-9 && round.translation[1].abs() < 1e-9);
        let p = [3.3, -7.1];
        let back = inv.apply(t.apply(p));
        assert!((back[0] - p[0]).abs() < 1e-9 && (back[1] - p[1]).abs() < 1e-9);
    }

    #[test]
    fn rotation_wraps_to_half_open_pi() {
        assert!((RigidTransform2D::new(PI, [0.0, 0.0]).rotation + PI).abs() < 1e-12);
        assert!((RigidTransform2D::new(3.0 * PI, [0.0, 0.0]).rotation + PI).abs() < 1e-12);
    }

    #[test]
    fn rotate_zero_is_identity() {
        let s = demo_scan(64);
        assert_eq!(rotate_scan(&s, 0.0), s);
    }

    #[test]
    fn rotate_quarter_turn_axis_case() {
        let mut s = demo_scan(4);
        s.points = vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        s.hit_mask = vec![true, false, true, true];
        let r = rotate_scan(&s, FRAC_PI_2);
        // shift = round((π/2)/(π/2)) = 1: ray 0 moves to slot 1.
        assert!((r.points[1][0]).abs() < 1e-12 && (r.points[1][1] - 1.0).abs() < 1e-12);
        assert!(r.hit_mask[1]);
        assert!(!r.hit_mask[2]);
        assert_eq!(r.frame_index, s.frame_index);
    }

    #[test]
    fn rotate_composition_matches_single_rotation() {
        let s = demo_scan(128);
        let mut rng = crate::rng::seeded_rng(8, &[0x71]);
        use rand::Rng;
        for _ in 0..32 {
            let a = rng.gen_range(-PI..PI);
            let b = rng.gen_range(-PI..PI);
            let two = rotate_scan(&rotate_scan(&s, a), b);
            let one = rotate_scan(&s, a + b);
            // The index shifts can differ by one slot when rounding lands on
            // opposite sides, so compare as point sets: every point of `two`
            // must coincide with some point of `one`.
            for p in &two.points {
                let (d, _) = nearest_sq(*p, &one.points);
                assert!(d < 1e-18, "point {p:?} off by {d}");
            }
        }
    }

    #[test]
    fn chamfer_closed_forms() {
        assert_eq!(chamfer_distance(&[[0.0, 0.0]], &[[3.0, 4.0]]).unwrap(), 50.0);
        let a = [[0.0, 0.0], [1.0, 0.0]];
        let b = [[0.0, 0.0]];
        assert_eq!(chamfer_distance(&a, &b).unwrap(), 0.5);
        let x = demo_scan(32).points;
        assert!(chamfer_distance(&x, &x).unwrap() == 0.0);
        assert!(chamfer_distance(&[], &x).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn chamfer_is_symmetric(
            a in proptest::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 1..40),
            b in proptest::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 1..40),
        ) {
            let av: Vec<[f64; 2]> = a.iter().map(|&(x, y)| [x, y]).collect();
            let bv: Vec<[f64; 2]> = b.iter().map(|&(x, y)| [x, y]).collect();
            let ab = chamfer_distance(&av, &bv).unwrap();
            let ba = chamfer_distance(&bv, &av).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));
            prop_assert!(ab >= 0.0);
        }

        #[test]
        fn chamfer_is_rigid_invariant(
            a in proptest::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 2..30),
            b in proptest::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 2..30),
            theta in -PI..PI,
        ) {
            let rot = |v: &[(f64, f64)]| -> Vec<[f64; 2]> {
                let (s, c) = theta.sin_cos();
                v.iter().map(|&(x, y)| [c * x - s * y, s * x + c * y]).collect()
            };
            let av: Vec<[f64; 2]> = a.iter().map(|&(x, y)| [x, y]).collect();
            let bv: Vec<[f64; 2]> = b.iter().map(|&(x, y)| [x, y]).collect();
            let plain = chamfer_distance(&av, &bv).unwrap();
            let rotated = chamfer_distance(&rot(&a), &rot(&b)).unwrap();
            prop_assert!((plain - rotated).abs() <= 1e-9 * plain.max(1.0));
        }

        #[test]
        fn transform_inverse_roundtrip(
            theta in -PI..PI,
            tx in -20.0..20.0f64,
            ty in -20.0..20.0f64,
            px in -20.0..20.0f64,
            py in -20.0..20.0f64,
        ) {
            let t = RigidTransform2D::new(theta, [tx, ty]);
            let p = [px, py];
            let q = t.inverse().apply(t.apply(p));
            prop_assert!((q[0] - p[0]).abs() < 1e-9);
            prop_assert!((q[1] - p[1]).abs() < 1e-9);
        }
    }
}
