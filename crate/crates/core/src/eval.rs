//! Rankings, rank correlation, the single-type baseline and the synthetic
//! benchmark that compares the two.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::em::{fit, fit_with, FitConfig, FitResult};
use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::rng::instance_stream;
use crate::synthetic::generate_dataset;

/// Individual indices ordered by strength, strongest first. Exact ties are
/// broken by ascending index.
pub fn rank_from_strengths(strengths: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..strengths.len()).collect();
    order.sort_by(|&a, &b| strengths[b].total_cmp(&strengths[a]).then(a.cmp(&b)));
    order
}

/// Converts an ordering (best first) into 1-based rank positions per index.
pub fn ranks_from_order(order: &[usize]) -> Vec<f64> {
    let mut ranks = vec![0.0; order.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = (pos + 1) as f64;
    }
    ranks
}

/// Midranks (1-based); tied values share the average of their positions.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let mid = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = mid;
        }
        start = end;
    }
    ranks
}

/// Squared Spearman correlation between two rank vectors.
///
/// The inputs are re-ranked with midranks first, so any real-valued scores
/// (or rank vectors with ties) are accepted. Because the result is squared it
/// does not see a wholesale reversal of either ranking.
pub fn spearman_r2(ranks_a: &[f64], ranks_b: &[f64]) -> Result<f64> {
    if ranks_a.len() != ranks_b.len() {
        return Err(Error::DimensionMismatch {
            what: "rank vectors",
            expected: ranks_a.len(),
            found: ranks_b.len(),
        });
    }
    if ranks_a.len() < 2 {
        return Err(Error::invalid("rank correlation needs at least two items"));
    }
    let a = midranks(ranks_a);
    let b = midranks(ranks_b);
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        let (dx, dy) = (x - mean, y - mean);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::invalid("rank correlation of a constant ranking"));
    }
    let rho = sab / libm::sqrt(saa * sbb);
    Ok((rho * rho).min(1.0))
}

/// Standard single-type Bradley-Terry fit: every interaction counts as a win
/// for the dominant party (`q = 1`), so only the strengths are estimated.
/// The prior follows `config.mode`.
pub fn fit_unimodal_baseline(data: &Dataset, config: &FitConfig) -> Result<FitResult> {
    fit_with(&data.collapse_types("all"), config, Some(1.0))
}

/// One row of the synthetic comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellConfig {
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub q_min: f64,
    pub q_max: f64,
}

/// Aggregated Spearman R² of both methods over the instances of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkCell {
    pub m: usize,
    pub t: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub instances: usize,
    pub mean_r2_multimodal: f64,
    pub mean_r2_baseline: f64,
    pub stderr_multimodal: f64,
    pub stderr_baseline: f64,
}

/// The twelve regimes of the reference comparison, row-major: `M` in
/// {5000, 1000}, then `T` in {5, 10}, then valence ranges `[0.5, 1]`,
/// `[0.25, 1]`, `[0, 1]`. All with 100 individuals.
pub fn standard_cells() -> Vec<CellConfig> {
    let mut cells = Vec::with_capacity(12);
    for m in [5000, 1000] {
        for t in [5, 10] {
            for q_min in [0.5, 0.25, 0.0] {
                cells.push(CellConfig {
                    n: 100,
                    m,
                    t,
                    q_min,
                    q_max: 1.0,
                });
            }
        }
    }
    cells
}

/// Spearman R² of (multimodal, baseline) against the truth for one instance.
///
/// The instance draws everything from its own stream
/// ([`instance_stream`]): the dataset first, then one `u64` used as the seed
/// of both fits.
pub fn run_instance(
    cell: &CellConfig,
    cell_index: usize,
    instance: usize,
    base_seed: u64,
    fit_config: &FitConfig,
) -> Result<(f64, f64)> {
    let wrap = |e: Error| Error::Benchmark {
        cell: cell_index,
        instance,
        source: Box::new(e),
    };
    let mut rng = instance_stream(base_seed, cell_index, instance);
    let truth =
        generate_dataset(cell.n, cell.m, cell.t, cell.q_min, cell.q_max, &mut rng).map_err(wrap)?;
    let config = FitConfig {
        seed: rng.next_u64(),
        ..fit_config.clone()
    };
    let true_ranks = ranks_from_order(&rank_from_strengths(&truth.true_scores));

    let multi = fit(&truth.dataset, &config).map_err(wrap)?;
    let base = fit_unimodal_baseline(&truth.dataset, &config).map_err(wrap)?;
    let r2_multi = spearman_r2(&ranks_from_order(&multi.ranking), &true_ranks).map_err(wrap)?;
    let r2_base = spearman_r2(&ranks_from_order(&base.ranking), &true_ranks).map_err(wrap)?;
    Ok((r2_multi, r2_base))
}

/// Mean and standard error (sample standard deviation over `√k`).
fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, libm::sqrt(var / k))
}

pub fn summarize_cell(cell: &CellConfig, results: &[(f64, f64)]) -> BenchmarkCell {
    let multi: Vec<f64> = results.iter().map(|r| r.0).collect();
    let base: Vec<f64> = results.iter().map(|r| r.1).collect();
    let (mean_m, se_m) = mean_and_stderr(&multi);
    let (mean_b, se_b) = mean_and_stderr(&base);
    BenchmarkCell {
        m: cell.m,
        t: cell.t,
        q_min: cell.q_min,
        q_max: cell.q_max,
        instances: results.len(),
        mean_r2_multimodal: mean_m,
        mean_r2_baseline: mean_b,
        stderr_multimodal: se_m,
        stderr_baseline: se_b,
    }
}

pub fn run_benchmark_cell(
    cell: &CellConfig,
    cell_index: usize,
    instances: usize,
    base_seed: u64,
    fit_config: &FitConfig,
) -> Result<BenchmarkCell> {
    if instances == 0 {
        return Err(Error::invalid("benchmark needs at least one instance"));
    }
    let results = (0..instances)
        .map(|i| run_instance(cell, cell_index, i, base_seed, fit_config))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_cell(cell, &results))
}

/// Runs every cell with default (MAP) fit settings. Deterministic in
/// `base_seed`.
pub fn run_synthetic_benchmark(
    cells: &[CellConfig],
    instances: usize,
    base_seed: u64,
) -> Result<Vec<BenchmarkCell>> {
    let config = FitConfig::default();
    cells
        .iter()
        .enumerate()
        .map(|(k, cell)| run_benchmark_cell(cell, k, instances, base_seed, &config))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InteractionRecord;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn ranking_examples() {
        assert_eq!(rank_from_strengths(&[0.5, 3.0, 1.0]), vec![1, 2, 0]);
        assert_eq!(rank_from_strengths(&[1.0, 1.0]), vec![0, 1]);
        assert_eq!(rank_from_strengths(&[3.5, 21.0, 7.0]), vec![1, 2, 0]);
        assert_eq!(ranks_from_order(&[1, 2, 0]), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn spearman_examples() {
        let r = [1.0, 2.0, 3.0, 4.0, 5.0];
        let rev = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert_abs_diff_eq!(spearman_r2(&r, &r).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(spearman_r2(&r, &rev).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            spearman_r2(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap(),
            0.25,
            epsilon = 1e-15
        );
        assert!(spearman_r2(&[1.0], &[1.0]).is_err());
        assert!(spearman_r2(&[1.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(spearman_r2(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn spearman_uses_midranks_for_ties() {
        // midranks (1.5, 1.5, 3) vs (1, 2, 3): rho = 1.5 / sqrt(1.5 * 2)
        let r2 = spearman_r2(&[1.0, 1.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(r2, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn baseline_pins_valence() {
        let records = vec![
            InteractionRecord::new(0, 1, 0),
            InteractionRecord::new(1, 2, 1),
            InteractionRecord::new(2, 0, 2),
            InteractionRecord::new(0, 2, 1),
        ];
        let d = Dataset::with_default_labels(3, 3, records).unwrap();
        let r = fit_unimodal_baseline(&d, &FitConfig::default()).unwrap();
        assert_eq!(r.params.valences(), &[1.0]);
        assert!(r.converged);
        assert!(!r.oriented_flipped);
        assert_eq!(r.ranking[0], 0);
    }

    #[test]
    fn table_has_twelve_cells() {
        let cells = standard_cells();
        assert_eq!(cells.len(), 12);
        assert_eq!((cells[0].m, cells[0].t, cells[0].q_min), (5000, 5, 0.5));
        assert_eq!((cells[11].m, cells[11].t, cells[11].q_min), (1000, 10, 0.0));
        assert!(cells.iter().all(|c| c.n == 100 && c.q_max == 1.0));
    }

    #[test]
    fn small_benchmark_is_deterministic() {
        let cells = [CellConfig {
            n: 12,
            m: 150,
            t: 2,
            q_min: 0.0,
            q_max: 1.0,
        }];
        let a = run_synthetic_benchmark(&cells, 3, 5).unwrap();
        let b = run_synthetic_benchmark(&cells, 3, 5).unwrap();
        assert_eq!(a, b);
        let cell = a[0];
        assert_eq!(cell.instances, 3);
        for v in [cell.mean_r2_multimodal, cell.mean_r2_baseline] {
            assert!((0.0..=1.0).contains(&v));
        }
        assert!(cell.stderr_multimodal >= 0.0 && cell.stderr_baseline >= 0.0);
    }

    #[test]
    fn stderr_is_sample_sd_over_root_k() {
        let (mean, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_abs_diff_eq!(mean, 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(se, (5.0f64 / 3.0 / 4.0).sqrt(), epsilon = 1e-15);
        assert_eq!(mean_and_stderr(&[0.7]), (0.7, 0.0));
    }

    fn permutation(n: usize) -> impl Strategy<Value = Vec<f64>> {
        Just((1..=n).map(|v| v as f64).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn spearman_symmetric_and_relabel_invariant(
            (a, b, relabel) in (2usize..40).prop_flat_map(|n| (permutation(n), permutation(n), permutation(n)))
        ) {
            let ab = spearman_r2(&a, &b).unwrap();
            prop_assert!((ab - spearman_r2(&b, &a).unwrap()).abs() < 1e-12);
            let mut ra = vec![0.0; a.len()];
            let mut rb = vec![0.0; b.len()];
            for (i, &p) in relabel.iter().enumerate() {
                ra[p as usize - 1] = a[i];
                rb[p as usize - 1] = b[i];
            }
            prop_assert!((ab - spearman_r2(&ra, &rb).unwrap()).abs() < 1e-12);
            let rev: Vec<f64> = a.iter().map(|v| a.len() as f64 + 1.0 - v).collect();
            prop_assert!((spearman_r2(&a, &rev).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn ranking_is_scale_invariant(
            s in proptest::collection::vec(0.01f64..100.0, 1..30),
            c in 0.001f64..1000.0,
        ) {
            let scaled: Vec<f64> = s.iter().map(|v| v * c).collect();
            // scaling can merge values only if they were already equal up to rounding
            let a = rank_from_strengths(&s);
            let b = rank_from_strengths(&scaled);
            for w in a.windows(2) {
                prop_assert!(s[w[0]] >= s[w[1]]);
            }
            for w in b.windows(2) {
                prop_assert!(scaled[w[0]] >= scaled[w[1]]);
            }
            let exact: Vec<f64> = s.iter().map(|v| v * 7.0).collect();
            if s.iter().zip(&exact).all(|(v, e)| *e / 7.0 == *v) {
                prop_assert_eq!(rank_from_strengths(&exact), a);
            }
        }
    }
}
