//! Forward and backward passes.
//!
//! The layouts are chosen so every hot loop is a contiguous
//! multiply-accumulate over the innermost dimension, which the compiler
//! vectorizes: `w2[k*h2 + c]` streams over `c` while accumulating layer-2
//! pre-activations, and the same pattern drives the head and all backward
//! outer products.

use rayon::prelude::*;

use super::{Embedding, EncoderConfig, EncoderParams};
use crate::error::{Error, Result};
use crate::math::{fast_tanh, fast_tanh_slice, l2_norm};
use crate::simworld::Scan;

/// Activations captured during a forward pass, enough to backpropagate.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub n_pts: usize,
    /// Hit points fed to the network, `[n_pts]`.
    pub points: Vec<[f64; 2]>,
    /// tanh outputs of layer 1, `[n_pts * h1]`.
    pub a1: Vec<f64>,
    /// tanh outputs of layer 2, `[n_pts * h2]`.
    pub a2: Vec<f64>,
    /// Elementwise max over points, `[h2]`.
    pub pooled: Vec<f64>,
    /// Which point won each pooled channel (first index on ties), `[h2]`.
    pub argmax: Vec<u32>,
    /// Head output before normalization, `[dim]`.
    pub pre_norm: Vec<f64>,
    pub norm: f64,
    /// Final unit-norm embedding, `[dim]`.
    pub embedding: Vec<f64>,
}

/// Runs the network on a scan's hit points and keeps all activations.
pub fn forward_cached(params: &EncoderParams, scan: &Scan) -> Result<ForwardCache> {
    let cfg = &params.cfg;
    let (h1, h2, dim) = (cfg.h1, cfg.h2, cfg.dim);
    let points = scan.hit_points();
    let n = points.len();
    if n == 0 {
        return Err(Error::config(format!(
            "scan {} has no hit points to embed",
            scan.frame_index
        )));
    }
    let mut a1 = vec![0.0; n * h1];
    let mut a2 = vec![0.0; n * h2];
    for (pi, p) in points.iter().enumerate() {
        let [x, y] = *p;
        let row = &mut a1[pi * h1..(pi + 1) * h1];
        for j in 0..h1 {
            row[j] = fast_tanh(params.w1[j].mul_add(x, params.w1[h1 + j].mul_add(y, params.b1[j])));
        }
        let out = &mut a2[pi * h2..(pi + 1) * h2];
        out.copy_from_slice(&params.b2);
        let row = &a1[pi * h1..(pi + 1) * h1];
        for k in 0..h1 {
            let a = row[k];
            let wrow = &params.w2[k * h2..(k + 1) * h2];
            for c in 0..h2 {
                out[c] = a.mul_add(wrow[c], out[c]);
            }
        }
        fast_tanh_slice(out);
    }
    let mut pooled = vec![f64::NEG_INFINITY; h2];
    let mut argmax = vec![0u32; h2];
    for pi in 0..n {
        let row = &a2[pi * h2..(pi + 1) * h2];
        for c in 0..h2 {
            if row[c] > pooled[c] {
                pooled[c] = row[c];
                argmax[c] = pi as u32;
            }
        }
    }
    let mut pre_norm = params.b3.clone();
    for c in 0..h2 {
        let g = pooled[c];
        let wrow = &params.w3[c * dim..(c + 1) * dim];
        for d in 0..dim {
            pre_norm[d] = g.mul_add(wrow[d], pre_norm[d]);
        }
    }
    let norm = l2_norm(&pre_norm);
    if !(norm.is_finite() && norm > 1e-12) {
        return Err(Error::numeric(format!(
            "embedding norm {norm} for frame {}",
            scan.frame_index
        )));
    }
    let embedding: Vec<f64> = pre_norm.iter().map(|v| v / norm).collect();
    Ok(ForwardCache {
        n_pts: n,
        points,
        a1,
        a2,
        pooled,
        argmax,
        pre_norm,
        norm,
        embedding,
    })
}

/// Maps a scan to its unit-norm embedding.
pub fn embed(params: &EncoderParams, scan: &Scan) -> Result<Embedding> {
    forward_cached(params, scan).map(|c| Embedding { values: c.embedding })
}

/// Embeds every scan; parallel over frames with index-ordered results.
pub fn embed_all(params: &EncoderParams, scans: &[Scan]) -> Result<Vec<Embedding>> {
    scans
        .par_iter()
        .map(|s| embed(params, s))
        .collect::<Result<Vec<_>>>()
}

/// Per-tensor gradient accumulator matching [`EncoderParams`] layout.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub w3: Vec<f64>,
    pub b3: Vec<f64>,
}

impl Gradients {
    pub fn zeros(cfg: &EncoderConfig) -> Self {
        Gradients {
            w1: vec![0.0; 2 * cfg.h1],
            b1: vec![0.0; cfg.h1],
            w2: vec![0.0; cfg.h1 * cfg.h2],
            b2: vec![0.0; cfg.h2],
            w3: vec![0.0; cfg.h2 * cfg.dim],
            b3: vec![0.0; cfg.dim],
        }
    }

    pub fn reset(&mut self) {
        for t in [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
            &mut self.w3,
            &mut self.b3,
        ] {
            t.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    pub fn is_all_zero(&self) -> bool {
        [&self.w1, &self.b1, &self.w2, &self.b2, &self.w3, &self.b3]
            .iter()
            .all(|t| t.iter().all(|&x| x == 0.0))
    }
}

/// Accumulates parameter gradients for one scan given the loss gradient with
/// respect to its embedding. Gradient flow: normalization Jacobian, head,
/// max-pool routing (only argmax points receive signal), then the per-point
/// MLP layers.
pub fn backward_scan(
    params: &EncoderParams,
    cache: &ForwardCache,
    upstream: &[f64],
    grads: &mut Gradients,
) {
    let cfg = &params.cfg;
    let (h1, h2, dim) = (cfg.h1, cfg.h2, cfg.dim);
    debug_assert_eq!(upstream.len(), dim);

    // d(v/|v|) applied to upstream: (u - e (e·u)) / |v|.
    let e = &cache.embedding;
    let mut eu = 0.0;
    for d in 0..dim {
        eu += e[d] * upstream[d];
    }
    let mut gv = vec![0.0; dim];
    for d in 0..dim {
        gv[d] = (upstream[d] - e[d] * eu) / cache.norm;
    }

    // Head: pre_norm[d] = b3[d] + Σ_c pooled[c] w3[c,d].
    let mut g_pooled = vec![0.0; h2];
    for c in 0..h2 {
        let wrow = &params.w3[c * dim..(c + 1) * dim];
        let grow = &mut grads.w3[c * dim..(c + 1) * dim];
        let pc = cache.pooled[c];
        let mut acc = 0.0;
        for d in 0..dim {
            acc += wrow[d] * gv[d];
            grow[d] += pc * gv[d];
        }
        g_pooled[c] = acc;
    }
    for d in 0..dim {
        grads.b3[d] += gv[d];
    }

    // Max-pool routes each channel's gradient to the winning point.
    let mut ga1 = vec![0.0; cache.n_pts * h1];
    let mut touched = vec![false; cache.n_pts];
    for c in 0..h2 {
        let gp = g_pooled[c];
        if gp == 0.0 {
            continue;
        }
        let p = cache.argmax[c] as usize;
        let a2v = cache.a2[p * h2 + c];
        let gz2 = gp * (1.0 - a2v * a2v);
        grads.b2[c] += gz2;
        touched[p] = true;
        let a1row = &cache.a1[p * h1..(p + 1) * h1];
        let ga1row = &mut ga1[p * h1..(p + 1) * h1];
        for k in 0..h1 {
            grads.w2[k * h2 + c] += a1row[k] * gz2;
            ga1row[k] += params.w2[k * h2 + c] * gz2;
        }
    }

    for p in 0..cache.n_pts {
        if !touched[p] {
            continue;
        }
        let [x, y] = cache.points[p];
        let a1row = &cache.a1[p * h1..(p + 1) * h1];
        let ga1row = &ga1[p * h1..(p + 1) * h1];
        for j in 0..h1 {
            let gz1 = ga1row[j] * (1.0 - a1row[j] * a1row[j]);
            grads.w1[j] += x * gz1;
            grads.w1[h1 + j] += y * gz1;
            grads.b1[j] += gz1;
        }
    }
}
