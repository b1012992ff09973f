//! Weakly supervised ranking loss with analytic gradients.

use rayon::prelude::*;

use super::net::{backward_scan, forward_cached, ForwardCache, Gradients};
use super::{EncoderParams, TrainingTuple};
use crate::error::{Error, Result};
use crate::simworld::Scan;

/// Loss value and parameter gradients for one tuple.
#[derive(Debug)]
pub struct LossOutput {
    pub loss: f64,
    pub grads: Gradients,
    /// Negatives whose hinge was active (nonzero contribution).
    pub active_negatives: usize,
}

/// Hinge sum: `Σ_v max(0, d_min + margin − d_v)`.
pub(crate) fn hinge_sum(d_min: f64, negative_distances: &[f64], margin: f64) -> f64 {
    negative_distances
        .iter()
        .map(|&dv| (d_min + margin - dv).max(0.0))
        .sum()
}

/// Evaluates the ranking loss for explicit scan views (used by training,
/// where query and positives may be augmented copies).
pub fn ranking_loss_views(
    params: &EncoderParams,
    query: &Scan,
    positives: &[Scan],
    negatives: &[&Scan],
    margin: f64,
) -> Result<LossOutput> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::config(
            "ranking loss needs at least one positive and one negative".to_string(),
        ));
    }
    // Forward passes are independent; results are collected in input order.
    let caches: Vec<ForwardCache> = std::iter::once(query)
        .chain(positives.iter())
        .chain(negatives.iter().copied())
        .collect::<Vec<&Scan>>()
        .par_iter()
        .map(|s| forward_cached(params, s))
        .collect::<Result<Vec<_>>>()?;
    let (q_cache, rest) = caches.split_first().expect("query present");
    let (p_caches, n_caches) = rest.split_at(positives.len());

    // min over positives; ties go to the lowest index so gradients are
    // well-defined.
    let mut d_min = f64::INFINITY;
    let mut j_min = 0usize;
    for (j, pc) in p_caches.iter().enumerate() {
        let d = crate::math::euclidean(&q_cache.embedding, &pc.embedding);
        if d < d_min {
            d_min = d;
            j_min = j;
        }
    }

    let dim = params.cfg.dim;
    let mut loss = 0.0;
    let mut active = 0usize;
    // Unit vector (e_q - e_p)/d for the argmin positive; zero when d = 0
    // (the subgradient choice at the kink).
    let mut u_pos = vec![0.0; dim];
    if d_min > 0.0 {
        for d in 0..dim {
            u_pos[d] = (q_cache.embedding[d] - p_caches[j_min].embedding[d]) / d_min;
        }
    }
    let mut g_query = vec![0.0; dim];
    let mut g_pos = vec![0.0; dim];
    let mut g_negs: Vec<Option<Vec<f64>>> = vec![None; n_caches.len()];
    for (v, nc) in n_caches.iter().enumerate() {
        let d_v = crate::math::euclidean(&q_cache.embedding, &nc.embedding);
        let x = d_min + margin - d_v;
        if x <= 0.0 {
            continue;
        }
        loss += x;
        active += 1;
        let mut u_neg = vec![0.0; dim];
        if d_v > 0.0 {
            for d in 0..dim {
                u_neg[d] = (q_cache.embedding[d] - nc.embedding[d]) / d_v;
            }
        }
        for d in 0..dim {
            g_query[d] += u_pos[d] - u_neg[d];
            g_pos[d] -= u_pos[d];
            u_neg[d] = u_neg[d];
        }
        g_negs[v] = Some(u_neg);
    }
    if !loss.is_finite() {
        return Err(Error::numeric(format!(
            "ranking loss diverged on query {}",
            query.frame_index
        )));
    }

    let mut grads = Gradients::zeros(&params.cfg);
    if active > 0 {
        // Fixed accumulation order: query, argmin positive, then negatives.
        backward_scan(params, q_cache, &g_query, &mut grads);
        backward_scan(params, &p_caches[j_min], &g_pos, &mut grads);
        for (v, g) in g_negs.iter().enumerate() {
            if let Some(g) = g {
                backward_scan(params, &n_caches[v], g, &mut grads);
            }
        }
    }
    Ok(LossOutput {
        loss,
        grads,
        active_negatives: active,
    })
}

/// Evaluates the ranking loss on unaugmented dataset frames addressed by a
/// tuple's indices.
pub fn ranking_loss(
    params: &EncoderParams,
    tuple: &TrainingTuple,
    scans: &[Scan],
    margin: f64,
) -> Result<LossOutput> {
    tuple.validate()?;
    let query = &scans[tuple.query_index as usize];
    let positives: Vec<Scan> = tuple
        .positive_indices
        .iter()
        .map(|&i| scans[i as usize].clone())
        .collect();
    let negatives: Vec<&Scan> = tuple
        .negative_indices
        .iter()
        .map(|&i| &scans[i as usize])
        .collect();
    ranking_loss_views(params, query, &positives, &negatives, margin)
}
