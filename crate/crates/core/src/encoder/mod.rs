//! Permutation-invariant scan encoder with hand-derived gradients.
//!
//! Architecture: shared per-point MLP `2 → h1 → h2` with tanh activations,
//! elementwise max-pool over the hit points, a linear head `h2 → dim`, and
//! L2 normalization. Max-pooling makes the embedding invariant to point
//! order; nothing makes it rotation-invariant, so rotation robustness must
//! come from training-time augmentation.
//!
//! Training uses a weakly supervised ranking loss: for query q with positive
//! candidates p and negatives n,
//! `loss = Σ_v max(0, min_j d(q, p_j) + margin − d(q, n_v))`
//! with Euclidean embedding distances. Gradients are computed analytically
//! (the min routes to the lowest-index argmin positive, inactive hinges
//! contribute zero) and applied per tuple with Adam.

mod checkpoint;
mod loss;
mod net;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use loss::{ranking_loss, LossOutput};
pub use net::{embed, embed_all, forward_cached, ForwardCache};
pub use train::{augment_tuple, train_epoch, TrainEpochConfig};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded_rng, stream};

/// Unit-norm embedding vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub values: Vec<f64>,
}

impl AsRef<[f64]> for Embedding {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

impl Embedding {
    pub fn distance(&self, other: &Embedding) -> f64 {
        crate::math::euclidean(&self.values, &other.values)
    }
}

/// Network shape and Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub h1: usize,
    pub h2: usize,
    pub dim: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            h1: 64,
            h2: 128,
            dim: 64,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl EncoderConfig {
    pub fn with_dim(dim: usize) -> Self {
        EncoderConfig {
            dim,
            ..EncoderConfig::default()
        }
    }

    pub fn param_count(&self) -> usize {
        2 * self.h1 + self.h1 + self.h1 * self.h2 + self.h2 + self.h2 * self.dim + self.dim
    }
}

/// Weights, biases, and Adam state. Tensors are flat, input-major:
/// `w1[i*h1+j]` connects input `i` to hidden unit `j`, and likewise for the
/// deeper layers. The flat parameter order (w1, b1, w2, b2, w3, b3) is the
/// checkpoint order.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub cfg: EncoderConfig,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub w3: Vec<f64>,
    pub b3: Vec<f64>,
    pub adam_m: Vec<f64>,
    pub adam_v: Vec<f64>,
    pub step: u64,
}

impl EncoderParams {
    /// Seeded uniform init in `[-1/√fan_in, 1/√fan_in]` per layer.
    pub fn init(cfg: EncoderConfig, seed: u64) -> Result<Self> {
        if cfg.h1 == 0 || cfg.h2 == 0 || cfg.dim == 0 {
            return Err(Error::config("encoder layer sizes must be positive".to_string()));
        }
        let mut rng = seeded_rng(seed, &[stream::PARAMS]);
        let mut layer = |fan_in: usize, count: usize| -> Vec<f64> {
            let bound = 1.0 / (fan_in as f64).sqrt();
            (0..count).map(|_| rng.gen_range(-bound..=bound)).collect()
        };
        let w1 = layer(2, 2 * cfg.h1);
        let b1 = layer(2, cfg.h1);
        let w2 = layer(cfg.h1, cfg.h1 * cfg.h2);
        let b2 = layer(cfg.h1, cfg.h2);
        let w3 = layer(cfg.h2, cfg.h2 * cfg.dim);
        let b3 = layer(cfg.h2, cfg.dim);
        let n = cfg.param_count();
        Ok(EncoderParams {
            cfg,
            w1,
            b1,
            w2,
            b2,
            w3,
            b3,
            adam_m: vec![0.0; n],
            adam_v: vec![0.0; n],
            step: 0,
        })
    }

    /// Copies all weight tensors into one flat vector in checkpoint order.
    pub fn flatten_weights(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.cfg.param_count());
        for t in [&self.w1, &self.b1, &self.w2, &self.b2, &self.w3, &self.b3] {
            out.extend_from_slice(t);
        }
        out
    }

    /// Overwrites all weight tensors from a flat vector in checkpoint order.
    pub fn unflatten_weights(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.cfg.param_count() {
            return Err(Error::config(format!(
                "flat weight vector has {} values, expected {}",
                flat.len(),
                self.cfg.param_count()
            )));
        }
        let mut off = 0;
        for t in [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
            &mut self.w3,
            &mut self.b3,
        ] {
            t.copy_from_slice(&flat[off..off + t.len()]);
            off += t.len();
        }
        Ok(())
    }

    /// Quantizes weights and optimizer state through f32, mirroring what a
    /// checkpoint save/load roundtrip produces.
    pub fn quantized_f32(&self) -> EncoderParams {
        let q = |v: &[f64]| v.iter().map(|&x| x as f32 as f64).collect::<Vec<f64>>();
        EncoderParams {
            cfg: self.cfg,
            w1: q(&self.w1),
            b1: q(&self.b1),
            w2: q(&self.w2),
            b2: q(&self.b2),
            w3: q(&self.w3),
            b3: q(&self.b3),
            adam_m: q(&self.adam_m),
            adam_v: q(&self.adam_v),
            step: self.step,
        }
    }

    pub fn all_finite(&self) -> bool {
        [&self.w1, &self.b1, &self.w2, &self.b2, &self.w3, &self.b3]
            .iter()
            .all(|t| t.iter().all(|x| x.is_finite()))
    }
}

/// One training sample: a query frame with sampled positive and negative
/// frame indices. Sets are disjoint and exclude the query itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingTuple {
    pub query_index: u32,
    pub positive_indices: Vec<u32>,
    pub negative_indices: Vec<u32>,
}

impl TrainingTuple {
    pub fn validate(&self) -> Result<()> {
        if self.positive_indices.is_empty() || self.negative_indices.is_empty() {
            return Err(Error::config(
                "training tuple needs at least one positive and one negative".to_string(),
            ));
        }
        if self.positive_indices.contains(&self.query_index)
            || self.negative_indices.contains(&self.query_index)
        {
            return Err(Error::config("training tuple contains its own query".to_string()));
        }
        if self
            .positive_indices
            .iter()
            .any(|p| self.negative_indices.contains(p))
        {
            return Err(Error::config(
                "positive and negative indices overlap".to_string(),
            ));
        }
        Ok(())
    }
}
