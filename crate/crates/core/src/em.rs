//! Expectation-maximization over the latent stances.
//!
//! One outer iteration is: responsibilities `π_r` (E-step), closed-form
//! valences, then the strength fixed point solved to convergence, then (ML
//! only) rescaling to unit geometric mean. The likelihood is invariant under
//! `λ → 1/λ, q → 1 − q`, so the fitted parameters are oriented once at the end
//! so that interactions are, on balance, won by the dominant party.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::eval::rank_from_strengths;
use crate::model::{
    count_matrix, log_marginal_likelihood_unchecked, log_prior_scores, CountMatrix, Dataset,
    ModelParams,
};
use crate::rng;

/// Bounds applied to maximum-likelihood strengths. Individuals that never win
/// (or never lose) have no finite ML strength and end up pinned here.
pub const ML_STRENGTH_FLOOR: f64 = 1e-150;
pub const ML_STRENGTH_CEIL: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// Maximum likelihood; scores are normalized to mean zero.
    Ml,
    /// Maximum a posteriori under a standard logistic prior on every score.
    #[default]
    Map,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub mode: Mode,
    /// Outer stopping rule on both `max |Δs_u|` and `max |Δq_t|`.
    pub outer_tol: f64,
    /// Inner stopping rule on the largest relative strength change.
    pub inner_tol: f64,
    pub max_outer_iters: usize,
    pub max_inner_iters: usize,
    pub seed: u64,
    /// Standard deviation of the random initial scores.
    pub init_score_spread: f64,
    /// Invert the automatically oriented result.
    pub force_flip: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            mode: Mode::Map,
            outer_tol: 1e-8,
            inner_tol: 1e-10,
            max_outer_iters: 10_000,
            max_inner_iters: 1_000,
            seed: 0,
            init_score_spread: 0.1,
            force_flip: false,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("outer_tol", self.outer_tol),
            ("inner_tol", self.inner_tol),
            ("init_score_spread", self.init_score_spread),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_outer_iters == 0 || self.max_inner_iters == 0 {
            return Err(Error::invalid("iteration caps must be at least 1"));
        }
        Ok(())
    }
}

/// Posterior probability `π_r` that the winner of record `r` was the dominant
/// party.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities(Vec<f64>);

impl Responsibilities {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!(
                "responsibility {bad} outside [0, 1]"
            )));
        }
        Ok(Responsibilities(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Converged parameters and diagnostics of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub mode: Mode,
    pub params: ModelParams,
    /// `ln λ_u` for the final (oriented) strengths.
    pub scores: Vec<f64>,
    /// Individuals best first; exact ties go to the lower index.
    pub ranking: Vec<usize>,
    /// Objective at initialization followed by one entry per outer iteration:
    /// log-likelihood in ML mode, log-posterior in MAP mode.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub outer_iterations: usize,
    /// Whether the reported parameters are the inverted image of the raw EM
    /// output.
    pub oriented_flipped: bool,
    /// ML only: some strength hit the clamp bounds.
    pub saturated: bool,
    /// Types without records; their valence stays at its initial value.
    pub empty_types: Vec<usize>,
}

impl FitResult {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

fn check_dims(data: &Dataset, params: &ModelParams) -> Result<()> {
    if params.strengths().len() != data.n_individuals() {
        return Err(Error::DimensionMismatch {
            what: "strengths",
            expected: data.n_individuals(),
            found: params.strengths().len(),
        });
    }
    if params.valences().len() != data.n_types() {
        return Err(Error::DimensionMismatch {
            what: "valences",
            expected: data.n_types(),
            found: params.valences().len(),
        });
    }
    Ok(())
}

pub fn e_step(data: &Dataset, params: &ModelParams) -> Result<Responsibilities> {
    check_dims(data, params)?;
    let mut out = vec![0.0; data.n_records()];
    e_step_into(data, params, &mut out);
    Ok(Responsibilities(out))
}

fn e_step_into(data: &Dataset, params: &ModelParams, out: &mut [f64]) {
    let l = params.strengths();
    let q = params.valences();
    for (pi, rec) in out.iter_mut().zip(data.records()) {
        let q = q[rec.itype];
        let dom = l[rec.winner] * q;
        let total = dom + l[rec.loser] * (1.0 - q);
        *pi = if total > 0.0 { dom / total } else { 0.5 };
    }
}

/// Mean responsibility per type; `None` for types without records.
pub fn m_step_valences(data: &Dataset, resp: &Responsibilities) -> Result<Vec<Option<f64>>> {
    if resp.len() != data.n_records() {
        return Err(Error::DimensionMismatch {
            what: "responsibilities",
            expected: data.n_records(),
            found: resp.len(),
        });
    }
    let mut sums = vec![0.0; data.n_types()];
    let mut counts = vec![0usize; data.n_types()];
    for (pi, rec) in resp.values().iter().zip(data.records()) {
        sums[rec.itype] += pi;
        counts[rec.itype] += 1;
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| (c > 0).then(|| (s / c as f64).clamp(0.0, 1.0)))
        .collect())
}

/// Outcome of the inner strength fixed-point solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthSolve {
    pub strengths: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// ML only: some strength was clamped to [`ML_STRENGTH_FLOOR`] or
    /// [`ML_STRENGTH_CEIL`].
    pub saturated: bool,
}

/// Solves the M-step for the strengths given fixed responsibilities.
///
/// Each sweep recomputes every `λ_i` from the previous sweep's values:
///
/// ```text
/// ML:   λ_i = W_i / Σ_j A_ij/(λ_i+λ_j)
/// MAP:  λ_i = (1 + W_i) / (2/(λ_i+1) + Σ_j A_ij/(λ_i+λ_j))
/// ```
///
/// where `W_i = Σ_r π_r [u_r = i] + (1 − π_r) [v_r = i]` is the expected
/// number of interactions in which `i` was dominant. ML sweeps rescale to unit
/// geometric mean, since that objective is scale-free.
pub fn m_step_strengths(
    data: &Dataset,
    resp: &Responsibilities,
    counts: &CountMatrix,
    current: &[f64],
    mode: Mode,
    inner_tol: f64,
    max_inner_iters: usize,
) -> Result<StrengthSolve> {
    if resp.len() != data.n_records() {
        return Err(Error::DimensionMismatch {
            what: "responsibilities",
            expected: data.n_records(),
            found: resp.len(),
        });
    }
    if current.len() != data.n_individuals() || counts.n() != data.n_individuals() {
        return Err(Error::DimensionMismatch {
            what: "strengths",
            expected: data.n_individuals(),
            found: current.len(),
        });
    }
    if let Some(bad) = current.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::invalid(format!(
            "current strengths must be positive and finite, got {bad}"
        )));
    }
    if inner_tol.is_nan() || inner_tol <= 0.0 || max_inner_iters == 0 {
        return Err(Error::invalid(
            "inner tolerance and iteration cap must be positive",
        ));
    }
    let solver = StrengthSolver::new(counts, mode);
    let wins = expected_dominant_counts(data, resp.values());
    Ok(solver.solve(&wins, current, inner_tol, max_inner_iters))
}

fn expected_dominant_counts(data: &Dataset, pi: &[f64]) -> Vec<f64> {
    let mut wins = vec![0.0; data.n_individuals()];
    for (p, rec) in pi.iter().zip(data.records()) {
        wins[rec.winner] += p;
        wins[rec.loser] += 1.0 - p;
    }
    wins
}

/// Neighbour lists extracted once from the count matrix so the inner sweeps
/// only touch pairs that actually interacted.
struct StrengthSolver {
    mode: Mode,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl StrengthSolver {
    fn new(counts: &CountMatrix, mode: Mode) -> Self {
        let neighbors = (0..counts.n())
            .map(|i| {
                counts
                    .row(i)
                    .into_iter()
                    .map(|(j, c)| (j, f64::from(c)))
                    .collect()
            })
            .collect();
        StrengthSolver { mode, neighbors }
    }

    /// One pass of the fixed-point map over every individual, reading only
    /// `cur`. Returns the largest relative change and whether any ML strength
    /// had to be clamped.
    fn sweep(&self, wins: &[f64], cur: &[f64], next: &mut [f64]) -> (f64, bool) {
        let mut saturated = false;
        for (i, out) in next.iter_mut().enumerate() {
            let li = cur[i];
            let mut denom: f64 = self.neighbors[i]
                .iter()
                .map(|&(j, a)| a / (li + cur[j]))
                .sum();
            *out = match self.mode {
                Mode::Map => {
                    denom += 2.0 / (li + 1.0);
                    (1.0 + wins[i]) / denom
                }
                Mode::Ml => {
                    let v = wins[i] / denom;
                    if !(ML_STRENGTH_FLOOR..=ML_STRENGTH_CEIL).contains(&v) {
                        saturated = true;
                    }
                    if v.is_nan() {
                        ML_STRENGTH_FLOOR
                    } else {
                        v.clamp(ML_STRENGTH_FLOOR, ML_STRENGTH_CEIL)
                    }
                }
            };
        }
        if self.mode == Mode::Ml {
            clamp_normalize(next);
        }
        let change = cur
            .iter()
            .zip(next.iter())
            .map(|(old, new)| libm::fabs(new - old) / old)
            .fold(0.0, f64::max);
        (change, saturated)
    }

    /// Iterates the map until one pass changes no strength by more than `tol`
    /// (relative), or `max_iters` passes have been spent.
    ///
    /// Plain passes converge linearly and slowly, so every two passes are
    /// followed by a squared extrapolation step in log-strength space
    /// (SQUAREM). The extrapolated point is kept only if its own residual is
    /// no worse than the plain iterate's; otherwise the plain iterate is used.
    /// Either way the returned point satisfies the fixed-point equation to
    /// `tol`.
    fn solve(&self, wins: &[f64], start: &[f64], tol: f64, max_iters: usize) -> StrengthSolve {
        let n = start.len();
        let mut x0 = start.to_vec();
        let mut x1 = vec![0.0; n];
        let mut x2 = vec![0.0; n];
        let mut xe = vec![0.0; n];
        let mut xf = vec![0.0; n];
        let mut saturated = false;
        let mut iterations = 0;
        let mut converged = false;

        while iterations < max_iters {
            let (res0, sat) = self.sweep(wins, &x0, &mut x1);
            iterations += 1;
            saturated = sat;
            if res0 < tol || iterations >= max_iters {
                converged = res0 < tol;
                core::mem::swap(&mut x0, &mut x1);
                break;
            }
            let (res1, sat) = self.sweep(wins, &x1, &mut x2);
            iterations += 1;
            saturated = sat;
            if res1 < tol || iterations >= max_iters {
                converged = res1 < tol;
                core::mem::swap(&mut x0, &mut x2);
                break;
            }

            let (mut rr, mut vv) = (0.0, 0.0);
            for i in 0..n {
                let (a, b, c) = (libm::log(x0[i]), libm::log(x1[i]), libm::log(x2[i]));
                rr += (b - a) * (b - a);
                vv += (c - 2.0 * b + a) * (c - 2.0 * b + a);
            }
            let alpha = -libm::sqrt(rr / vv);
            if !(alpha.is_finite() && alpha < -1.0) {
                core::mem::swap(&mut x0, &mut x2);
                continue;
            }
            for i in 0..n {
                let (a, b, c) = (libm::log(x0[i]), libm::log(x1[i]), libm::log(x2[i]));
                let r = b - a;
                let v = c - 2.0 * b + a;
                xe[i] = libm::exp(a - 2.0 * alpha * r + alpha * alpha * v);
            }
            if self.mode == Mode::Ml {
                clamp_normalize(&mut xe);
            } else {
                for l in xe.iter_mut() {
                    *l = l.clamp(f64::MIN_POSITIVE, f64::MAX);
                }
            }
            let (res_e, sat) = self.sweep(wins, &xe, &mut xf);
            iterations += 1;
            if res_e.is_finite() && res_e <= res1 {
                saturated = sat;
                core::mem::swap(&mut x0, &mut xf);
                if res_e < tol {
                    converged = true;
                    break;
                }
            } else {
                core::mem::swap(&mut x0, &mut x2);
            }
        }
        StrengthSolve {
            strengths: x0,
            iterations,
            converged,
            saturated,
        }
    }
}

fn clamp_normalize(strengths: &mut [f64]) {
    normalize_in_place(strengths);
    for v in strengths.iter_mut() {
        *v = v.clamp(ML_STRENGTH_FLOOR, ML_STRENGTH_CEIL);
    }
}

/// Divides by the geometric mean (computed as the mean of the logs), so the
/// average score becomes zero.
pub fn normalize_strengths(strengths: &[f64]) -> Vec<f64> {
    let mut out = strengths.to_vec();
    normalize_in_place(&mut out);
    out
}

fn normalize_in_place(strengths: &mut [f64]) {
    if strengths.is_empty() {
        return;
    }
    let mean_log = strengths.iter().map(|l| libm::log(*l)).sum::<f64>() / strengths.len() as f64;
    for l in strengths.iter_mut() {
        *l = libm::exp(libm::log(*l) - mean_log);
    }
}

/// Interaction-weighted mean valence `(1/M) Σ_r q_{t_r}`.
fn weighted_mean_valence(params: &ModelParams, data: &Dataset) -> f64 {
    let q = params.valences();
    data.records().iter().map(|r| q[r.itype]).sum::<f64>() / data.n_records() as f64
}

/// Picks the orientation of the `λ → 1/λ, q → 1 − q` symmetry in which the
/// interaction-weighted mean valence is at least one half. Ties keep the
/// current orientation.
pub fn orient(params: &ModelParams, data: &Dataset) -> (ModelParams, bool) {
    if data.is_empty() || params.valences().len() != data.n_types() {
        return (params.clone(), false);
    }
    if weighted_mean_valence(params, data) < 0.5 {
        (params.flipped(), true)
    } else {
        (params.clone(), false)
    }
}

fn objective(mode: Mode, data: &Dataset, params: &ModelParams) -> f64 {
    let ll = log_marginal_likelihood_unchecked(data, params);
    match mode {
        Mode::Ml => ll,
        Mode::Map => ll + log_prior_scores(params),
    }
}

/// Fits strengths and valences by EM.
///
/// The starting point is random (seeded by `config.seed`): valences uniform
/// in `[0.05, 0.95)` and scores normal with standard deviation
/// `config.init_score_spread`. Starting exactly at `λ = 1, q = 1/2` would never
/// move, since that point is a fixed point of both EM maps.
///
/// Failing to converge within `max_outer_iters` is reported through
/// [`FitResult::converged`], not as an error.
pub fn fit(data: &Dataset, config: &FitConfig) -> Result<FitResult> {
    fit_with(data, config, None)
}

/// Shared engine; `pinned_valence` fixes every `q_t` instead of estimating it.
pub(crate) fn fit_with(
    data: &Dataset,
    config: &FitConfig,
    pinned_valence: Option<f64>,
) -> Result<FitResult> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mode = config.mode;
    if mode == Mode::Ml {
        if let Some(index) = data.participation().iter().position(|c| *c == 0) {
            return Err(Error::IsolatedIndividual { index });
        }
    }
    let n = data.n_individuals();
    let t = data.n_types();

    let mut rng = rng::seeded(config.seed);
    let mut valences: Vec<f64> = match pinned_valence {
        Some(q) => vec![q; t],
        None => (0..t).map(|_| 0.05 + 0.9 * rng.random::<f64>()).collect(),
    };
    let spread = Normal::new(0.0, config.init_score_spread)
        .map_err(|e| Error::invalid(format!("init_score_spread: {e}")))?;
    let mut strengths: Vec<f64> = (0..n).map(|_| libm::exp(spread.sample(&mut rng))).collect();
    if mode == Mode::Ml {
        normalize_in_place(&mut strengths);
    }

    let type_counts = data.type_counts();
    let empty_types: Vec<usize> = (0..t).filter(|k| type_counts[*k] == 0).collect();
    let solver = StrengthSolver::new(&count_matrix(data), mode);
    let mut pi = vec![0.0; data.n_records()];

    let mut params = ModelParams::from_parts(strengths, valences.clone());
    let mut trace = vec![objective(mode, data, &params)];
    let mut converged = false;
    let mut saturated = false;
    let mut outer_iterations = 0;

    while outer_iterations < config.max_outer_iters {
        outer_iterations += 1;
        e_step_into(data, &params, &mut pi);

        if pinned_valence.is_none() {
            let resp = Responsibilities(core::mem::take(&mut pi));
            for (q, est) in valences.iter_mut().zip(m_step_valences(data, &resp)?) {
                if let Some(est) = est {
                    *q = est;
                }
            }
            pi = resp.0;
        }

        let wins = expected_dominant_counts(data, &pi);
        let solve = solver.solve(
            &wins,
            params.strengths(),
            config.inner_tol,
            config.max_inner_iters,
        );
        saturated = solve.saturated;
        let mut strengths = solve.strengths;
        if mode == Mode::Ml {
            normalize_in_place(&mut strengths);
        }

        let ds = params
            .strengths()
            .iter()
            .zip(&strengths)
            .map(|(old, new)| libm::fabs(libm::log(*new) - libm::log(*old)))
            .fold(0.0, f64::max);
        let dq = params
            .valences()
            .iter()
            .zip(&valences)
            .map(|(old, new)| libm::fabs(new - old))
            .fold(0.0, f64::max);

        params = ModelParams::from_parts(strengths, valences.clone());
        trace.push(objective(mode, data, &params));

        if ds < config.outer_tol && dq < config.outer_tol {
            converged = true;
            break;
        }
    }

    let (mut params, mut flipped) = orient(&params, data);
    if config.force_flip {
        params = params.flipped();
        flipped = !flipped;
    }
    let scores = params.scores();
    let ranking = rank_from_strengths(params.strengths());

    Ok(FitResult {
        mode,
        params,
        scores,
        ranking,
        objective_trace: trace,
        converged,
        outer_iterations,
        oriented_flipped: flipped,
        saturated,
        empty_types,
    })
}
