//! Synthetic interaction logs with known ground truth.
//!
//! Scores are drawn from the standard logistic distribution, valences
//! uniformly from `[q_min, q_max)`, and every interaction independently picks
//! an unordered pair uniformly at random (pairs repeat freely, so the
//! interaction graph is a random multigraph).
//!
//! Per record the draws are taken in this order, and the order is part of the
//! reproducibility contract: first member `a` uniform in `0..n`, second member
//! uniform among the other `n - 1`, type uniform in `0..t`, then `a` is
//! dominant iff `U < λ_a/(λ_a+λ_b)`, then the dominant party wins iff
//! `U < q_t`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::Open01;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Dataset, InteractionRecord};

/// A generated dataset together with the parameters and stances behind it.
///
/// Individuals and types are numbered in order of first appearance in the
/// record list (winner before loser), so writing the dataset to the
/// interaction file format and parsing it back reproduces the same indices.
/// Individuals or types that never occur come last.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth {
    pub true_scores: Vec<f64>,
    pub true_valences: Vec<f64>,
    /// `true` iff the recorded winner was the dominant party.
    pub true_stances: Vec<bool>,
    pub dataset: Dataset,
}

/// Inverse CDF of the standard logistic distribution, `ln(p / (1 − p))`.
pub fn logistic_quantile(p: f64) -> f64 {
    libm::log(p / (1.0 - p))
}

pub fn sample_logistic_score<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    logistic_quantile(rng.sample(Open01))
}

pub fn generate_dataset<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    t: usize,
    q_min: f64,
    q_max: f64,
    rng: &mut R,
) -> Result<SyntheticTruth> {
    if n < 2 || m < 1 || t < 1 {
        return Err(Error::invalid(format!(
            "need n >= 2, m >= 1, t >= 1 (got n={n}, m={m}, t={t})"
        )));
    }
    if !(0.0 <= q_min && q_min <= q_max && q_max <= 1.0) {
        return Err(Error::invalid(format!(
            "need 0 <= q_min <= q_max <= 1 (got {q_min}, {q_max})"
        )));
    }
    let scores: Vec<f64> = (0..n).map(|_| sample_logistic_score(rng)).collect();
    let valences: Vec<f64> = (0..t)
        .map(|_| q_min + (q_max - q_min) * rng.random::<f64>())
        .collect();
    generate_from_truth(&scores, &valences, m, rng)
}

/// Generates `m` interactions from fixed true scores and valences.
pub fn generate_from_truth<R: Rng + ?Sized>(
    scores: &[f64],
    valences: &[f64],
    m: usize,
    rng: &mut R,
) -> Result<SyntheticTruth> {
    let n = scores.len();
    let t = valences.len();
    if n < 2 || t < 1 {
        return Err(Error::invalid("need at least two individuals and one type"));
    }
    if valences.iter().any(|q| !(0.0..=1.0).contains(q)) || scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid(
            "scores must be finite and valences in [0, 1]",
        ));
    }

    let mut raw = Vec::with_capacity(m);
    let mut stances = Vec::with_capacity(m);
    for _ in 0..m {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let k = rng.random_range(0..t);
        // P(a dominant) = e^{s_a} / (e^{s_a} + e^{s_b})
        let p_a = 1.0 / (1.0 + libm::exp(scores[b] - scores[a]));
        let (dom, sub) = if rng.random::<f64>() < p_a {
            (a, b)
        } else {
            (b, a)
        };
        let dominant_wins = rng.random::<f64>() < valences[k];
        let (w, l) = if dominant_wins {
            (dom, sub)
        } else {
            (sub, dom)
        };
        raw.push(InteractionRecord::new(w, l, k));
        stances.push(dominant_wins);
    }

    let ind_order = first_appearance(n, raw.iter().flat_map(|r| [r.winner, r.loser]));
    let type_order = first_appearance(t, raw.iter().map(|r| r.itype));
    let ind_new = inverse(&ind_order);
    let type_new = inverse(&type_order);

    let records = raw
        .iter()
        .map(|r| InteractionRecord::new(ind_new[r.winner], ind_new[r.loser], type_new[r.itype]))
        .collect();
    let dataset = Dataset::with_default_labels(n, t, records)?;
    Ok(SyntheticTruth {
        true_scores: ind_order.iter().map(|&old| scores[old]).collect(),
        true_valences: type_order.iter().map(|&old| valences[old]).collect(),
        true_stances: stances,
        dataset,
    })
}

/// Old indices listed in order of first appearance, unseen ones last.
fn first_appearance(len: usize, seq: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut seen = vec![false; len];
    let mut order = Vec::with_capacity(len);
    for i in seq {
        if !seen[i] {
            seen[i] = true;
            order.push(i);
        }
    }
    order.extend((0..len).filter(|i| !seen[*i]));
    order
}

fn inverse(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        inv[old] = new;
    }
    inv
}
