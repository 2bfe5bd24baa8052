//! Model quantities: win probabilities, likelihood, prior and posterior.
//!
//! Strengths are kept in the linear domain (`λ = e^s`) throughout, since the
//! fixed-point updates are written in terms of `λ`; scores are derived at the
//! reporting boundary. Every likelihood is accumulated as a sum of per-record
//! logarithms so that logs with tens of thousands of interactions do not
//! underflow.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One observed interaction: `winner` won (or instigated) against `loser`,
/// and the interaction was of type `itype`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InteractionRecord {
    pub winner: usize,
    pub loser: usize,
    pub itype: usize,
}

impl InteractionRecord {
    pub const fn new(winner: usize, loser: usize, itype: usize) -> Self {
        InteractionRecord {
            winner,
            loser,
            itype,
        }
    }

    fn check(&self, n: usize, t: usize) -> Result<()> {
        if self.winner == self.loser {
            return Err(Error::invalid(format!(
                "record has winner == loser ({})",
                self.winner
            )));
        }
        if self.winner >= n || self.loser >= n {
            return Err(Error::invalid(format!(
                "record ({}, {}) references an individual outside 0..{}",
                self.winner, self.loser, n
            )));
        }
        if self.itype >= t {
            return Err(Error::invalid(format!(
                "record type {} outside 0..{}",
                self.itype, t
            )));
        }
        Ok(())
    }
}

/// The full interaction log together with the individual and type registries.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_individuals: usize,
    n_types: usize,
    records: Vec<InteractionRecord>,
    individual_labels: Vec<String>,
    type_labels: Vec<String>,
}

impl Dataset {
    pub fn new(
        records: Vec<InteractionRecord>,
        individual_labels: Vec<String>,
        type_labels: Vec<String>,
    ) -> Result<Self> {
        let n = individual_labels.len();
        let t = type_labels.len();
        check_unique("individual", &individual_labels)?;
        check_unique("type", &type_labels)?;
        for rec in &records {
            rec.check(n, t)?;
        }
        Ok(Dataset {
            n_individuals: n,
            n_types: t,
            records,
            individual_labels,
            type_labels,
        })
    }

    /// Builds a dataset labelled `u0..u{n-1}` and `t0..t{t-1}`.
    pub fn with_default_labels(
        n: usize,
        t: usize,
        records: Vec<InteractionRecord>,
    ) -> Result<Self> {
        let individuals = (0..n).map(|i| format!("u{i}")).collect();
        let types = (0..t).map(|i| format!("t{i}")).collect();
        Dataset::new(records, individuals, types)
    }

    pub fn n_individuals(&self) -> usize {
        self.n_individuals
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn n_records(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[InteractionRecord] {
        &self.records
    }

    pub fn individual_labels(&self) -> &[String] {
        &self.individual_labels
    }

    pub fn type_labels(&self) -> &[String] {
        &self.type_labels
    }

    /// Number of records each individual takes part in, on either side.
    pub fn participation(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_individuals];
        for rec in &self.records {
            counts[rec.winner] += 1;
            counts[rec.loser] += 1;
        }
        counts
    }

    /// Number of records of each type.
    pub fn type_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_types];
        for rec in &self.records {
            counts[rec.itype] += 1;
        }
        counts
    }

    /// The same interactions with every type merged into a single one.
    pub fn collapse_types(&self, label: &str) -> Dataset {
        Dataset {
            n_individuals: self.n_individuals,
            n_types: 1,
            records: self
                .records
                .iter()
                .map(|r| InteractionRecord::new(r.winner, r.loser, 0))
                .collect(),
            individual_labels: self.individual_labels.clone(),
            type_labels: vec![String::from(label)],
        }
    }
}

fn check_unique(what: &str, labels: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(Error::invalid(format!("duplicate {what} label {label:?}")));
        }
    }
    Ok(())
}

/// Strengths `λ_u` (one per individual) and valence probabilities `q_t` (one
/// per interaction type).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    strengths: Vec<f64>,
    valences: Vec<f64>,
}

impl ModelParams {
    pub fn new(strengths: Vec<f64>, valences: Vec<f64>) -> Result<Self> {
        if let Some(bad) = strengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::invalid(format!(
                "strengths must be positive and finite, got {bad}"
            )));
        }
        if let Some(bad) = valences.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return Err(Error::invalid(format!(
                "valence probabilities must lie in [0, 1], got {bad}"
            )));
        }
        Ok(ModelParams {
            strengths,
            valences,
        })
    }

    /// Builds parameters from scores `s_u = ln λ_u`.
    pub fn from_scores(scores: &[f64], valences: Vec<f64>) -> Result<Self> {
        ModelParams::new(scores.iter().map(|s| libm::exp(*s)).collect(), valences)
    }

    pub(crate) fn from_parts(strengths: Vec<f64>, valences: Vec<f64>) -> Self {
        debug_assert!(strengths.iter().all(|l| l.is_finite() && *l > 0.0));
        debug_assert!(valences.iter().all(|q| (0.0..=1.0).contains(q)));
        ModelParams {
            strengths,
            valences,
        }
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn valences(&self) -> &[f64] {
        &self.valences
    }

    pub fn scores(&self) -> Vec<f64> {
        self.strengths.iter().map(|l| libm::log(*l)).collect()
    }

    /// Probability that individual `u` dominates an average individual
    /// (`λ = 1`); equivalently `λ_u` is the odds of that event.
    pub fn p_dominate_average(&self, u: usize) -> f64 {
        let l = self.strengths[u];
        l / (l + 1.0)
    }

    /// The image under the exact model symmetry `λ → 1/λ`, `q → 1 − q`.
    pub fn flipped(&self) -> ModelParams {
        ModelParams {
            strengths: self.strengths.iter().map(|l| 1.0 / l).collect(),
            valences: self.valences.iter().map(|q| 1.0 - q).collect(),
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.strengths, self.valences)
    }

    fn check_against(&self, data: &Dataset) -> Result<()> {
        if self.strengths.len() != data.n_individuals() {
            return Err(Error::DimensionMismatch {
                what: "strengths",
                expected: data.n_individuals(),
                found: self.strengths.len(),
            });
        }
        if self.valences.len() != data.n_types() {
            return Err(Error::DimensionMismatch {
                what: "valences",
                expected: data.n_types(),
                found: self.valences.len(),
            });
        }
        Ok(())
    }
}

/// `1 / (1 + e^{-s})`, evaluated on the branch that cannot overflow.
pub fn logistic(s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::invalid(format!("logistic of non-finite value {s}")));
    }
    Ok(if s >= 0.0 {
        1.0 / (1.0 + libm::exp(-s))
    } else {
        let e = libm::exp(s);
        e / (1.0 + e)
    })
}

/// Bradley-Terry probability `λ_u / (λ_u + λ_v)` that `u` dominates `v`.
pub fn dominance_probability(strength_u: f64, strength_v: f64) -> Result<f64> {
    for l in [strength_u, strength_v] {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::invalid(format!(
                "strength must be positive and finite, got {l}"
            )));
        }
    }
    Ok(strength_u / (strength_u + strength_v))
}

/// Joint probability that the record was observed *and* that its winner was
/// the dominant party (`stance = true`) or the subordinate one (`false`).
pub fn record_joint_probability(
    rec: &InteractionRecord,
    params: &ModelParams,
    stance: bool,
) -> Result<f64> {
    let n = params.strengths.len();
    let t = params.valences.len();
    if rec.winner >= n || rec.loser >= n || rec.itype >= t {
        return Err(Error::invalid(format!(
            "record {rec:?} does not fit parameters with {n} individuals and {t} types"
        )));
    }
    let lu = params.strengths[rec.winner];
    let lv = params.strengths[rec.loser];
    let q = params.valences[rec.itype];
    let num = if stance { lu * q } else { lv * (1.0 - q) };
    Ok(num / (lu + lv))
}

/// Natural log of `(λ_u q + λ_v (1 − q)) / (λ_u + λ_v)`, written as a mixture
/// of the dominance probability so the argument stays in `[0, 1]`.
#[inline]
pub(crate) fn log_record_factor(lu: f64, lv: f64, q: f64) -> f64 {
    let p = lu / (lu + lv);
    libm::log(q * p + (1.0 - q) * (1.0 - p))
}

/// Log-likelihood of the observations with every stance summed out.
///
/// Returns `0.0` for an empty log and `-inf` when some record is impossible
/// under `params` (for example `q_t = 0` together with an infinitely strong
/// winner); the sentinel is a value, not an error.
pub fn log_marginal_likelihood(data: &Dataset, params: &ModelParams) -> Result<f64> {
    params.check_against(data)?;
    Ok(log_marginal_likelihood_unchecked(data, params))
}

pub(crate) fn log_marginal_likelihood_unchecked(data: &Dataset, params: &ModelParams) -> f64 {
    data.records
        .iter()
        .map(|r| {
            log_record_factor(
                params.strengths[r.winner],
                params.strengths[r.loser],
                params.valences[r.itype],
            )
        })
        .sum()
}

/// Log of the logistic prior on the scores, `Σ_u ln[λ_u / (λ_u + 1)²]`.
///
/// This is the density of a standard logistic distribution on `s_u`, the
/// prior implied by a uniform probability of beating an average individual.
pub fn log_prior_scores(params: &ModelParams) -> f64 {
    params
        .strengths
        .iter()
        .map(|&l| {
            // ln λ − 2 ln(1 + λ) = −|s| − 2 ln(1 + e^{−|s|})
            let s = libm::log(l);
            -libm::fabs(s) - 2.0 * libm::log1p(libm::exp(-libm::fabs(s)))
        })
        .sum()
}

/// Log-posterior over scores and valences (uniform prior on valences), up to
/// the evidence constant. This is the objective the MAP fit climbs.
pub fn log_posterior(data: &Dataset, params: &ModelParams) -> Result<f64> {
    Ok(log_marginal_likelihood(data, params)? + log_prior_scores(params))
}

/// Above this many individuals the count matrix switches to sparse rows.
pub const DENSE_COUNT_LIMIT: usize = 4096;

/// Symmetric matrix `A_ij` of how often `i` and `j` interacted, regardless of
/// the outcome or the interaction type.
#[derive(Debug, Clone, PartialEq)]
pub enum CountMatrix {
    Dense {
        n: usize,
        counts: Vec<u32>,
    },
    Sparse {
        n: usize,
        rows: Vec<BTreeMap<usize, u32>>,
    },
}

impl CountMatrix {
    pub fn zeros(n: usize) -> Self {
        if n <= DENSE_COUNT_LIMIT {
            CountMatrix::Dense {
                n,
                counts: vec![0; n * n],
            }
        } else {
            CountMatrix::Sparse {
                n,
                rows: vec![BTreeMap::new(); n],
            }
        }
    }

    pub fn n(&self) -> usize {
        match self {
            CountMatrix::Dense { n, .. } | CountMatrix::Sparse { n, .. } => *n,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        match self {
            CountMatrix::Dense { n, counts } => counts[i * n + j],
            CountMatrix::Sparse { rows, .. } => rows[i].get(&j).copied().unwrap_or(0),
        }
    }

    fn add_pair(&mut self, i: usize, j: usize) {
        match self {
            CountMatrix::Dense { n, counts } => {
                counts[i * *n + j] += 1;
                counts[j * *n + i] += 1;
            }
            CountMatrix::Sparse { rows, .. } => {
                *rows[i].entry(j).or_insert(0) += 1;
                *rows[j].entry(i).or_insert(0) += 1;
            }
        }
    }

    /// Non-zero entries of row `i` in ascending column order.
    pub fn row(&self, i: usize) -> Vec<(usize, u32)> {
        match self {
            CountMatrix::Dense { n, counts } => counts[i * n..(i + 1) * n]
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > 0)
                .map(|(j, c)| (j, *c))
                .collect(),
            CountMatrix::Sparse { rows, .. } => rows[i].iter().map(|(j, c)| (*j, *c)).collect(),
        }
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.row(i).iter().map(|(_, c)| u64::from(*c)).sum()
    }

    /// Sum over all entries; twice the number of records that built it.
    pub fn total(&self) -> u64 {
        (0..self.n()).map(|i| self.row_sum(i)).sum()
    }
}

pub fn count_matrix(data: &Dataset) -> CountMatrix {
    let mut counts = CountMatrix::zeros(data.n_individuals());
    for rec in &data.records {
        counts.add_pair(rec.winner, rec.loser);
    }
    counts
}
