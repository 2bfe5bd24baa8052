//! Output documents.
//!
//! Everything here is written with a fixed key order and Rust's shortest
//! round-trip float formatting, so repeated runs produce identical bytes.

use std::fmt::Write as _;
use std::io::Write;

use multirank_core::{BenchmarkCell, Dataset, FitResult, Mode, SyntheticTruth};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualEntry {
    pub label: String,
    pub strength: f64,
    pub score: f64,
    /// 1 is the strongest.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeEntry {
    pub label: String,
    pub valence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub mode: String,
    pub iterations: usize,
    pub converged: bool,
    pub flipped: bool,
    /// `null` when the objective is not finite.
    pub final_objective: Option<f64>,
    pub saturated: bool,
    pub empty_types: Vec<String>,
}

/// The fit-result JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub individuals: Vec<IndividualEntry>,
    pub types: Vec<TypeEntry>,
    pub diagnostics: Diagnostics,
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Ml => "ml",
        Mode::Map => "map",
    }
}

impl FitDocument {
    pub fn new(result: &FitResult, data: &Dataset) -> Self {
        let mut rank = vec![0; result.ranking.len()];
        for (pos, &i) in result.ranking.iter().enumerate() {
            rank[i] = pos + 1;
        }
        let individuals = data
            .individual_labels()
            .iter()
            .enumerate()
            .map(|(i, label)| IndividualEntry {
                label: label.clone(),
                strength: result.params.strengths()[i],
                score: result.scores[i],
                rank: rank[i],
            })
            .collect();
        let types = data
            .type_labels()
            .iter()
            .zip(result.params.valences())
            .map(|(label, &valence)| TypeEntry {
                label: label.clone(),
                valence,
            })
            .collect();
        let objective = result.final_objective();
        FitDocument {
            individuals,
            types,
            diagnostics: Diagnostics {
                mode: mode_name(result.mode).into(),
                iterations: result.outer_iterations,
                converged: result.converged,
                flipped: result.oriented_flipped,
                final_objective: objective.is_finite().then_some(objective),
                saturated: result.saturated,
                empty_types: result
                    .empty_types
                    .iter()
                    .map(|&k| data.type_labels()[k].clone())
                    .collect(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("fit document serializes");
        s.push('\n');
        s
    }

    /// `label,score,rank` rows in rank order.
    pub fn scores_csv(&self) -> String {
        let mut rows: Vec<&IndividualEntry> = self.individuals.iter().collect();
        rows.sort_by_key(|e| e.rank);
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(["label", "score", "rank"]).unwrap();
        for e in rows {
            out.write_record([e.label.clone(), e.score.to_string(), e.rank.to_string()])
                .unwrap();
        }
        String::from_utf8(out.into_inner().unwrap()).unwrap()
    }

    /// `type,valence` rows in type order.
    pub fn valences_csv(&self) -> String {
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(["type", "valence"]).unwrap();
        for e in &self.types {
            out.write_record([e.label.clone(), e.valence.to_string()])
                .unwrap();
        }
        String::from_utf8(out.into_inner().unwrap()).unwrap()
    }
}

/// Sidecar describing the ground truth behind a simulated interaction file.
/// Entries are aligned with the `individuals` and `types` label lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthDocument {
    pub individuals: Vec<String>,
    pub types: Vec<String>,
    pub scores: Vec<f64>,
    pub valences: Vec<f64>,
    /// 1 when the recorded winner was the dominant party, in record order.
    pub stances: Vec<u8>,
}

impl TruthDocument {
    pub fn new(truth: &SyntheticTruth) -> Self {
        TruthDocument {
            individuals: truth.dataset.individual_labels().to_vec(),
            types: truth.dataset.type_labels().to_vec(),
            scores: truth.true_scores.clone(),
            valences: truth.true_valences.clone(),
            stances: truth.true_stances.iter().map(|&s| u8::from(s)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("truth document serializes");
        s.push('\n');
        s
    }
}

/// Paired rankings from the multimodal fit and the single-type baseline.
pub fn write_comparison_csv<W: Write>(
    data: &Dataset,
    multi: &FitResult,
    base: &FitResult,
    writer: W,
) -> csv::Result<()> {
    let rank = |r: &FitResult| {
        let mut out = vec![0; r.ranking.len()];
        for (pos, &i) in r.ranking.iter().enumerate() {
            out[i] = pos + 1;
        }
        out
    };
    let (rm, rb) = (rank(multi), rank(base));
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "label",
        "rank_multimodal",
        "rank_baseline",
        "score_multimodal",
        "score_baseline",
    ])?;
    for (i, label) in data.individual_labels().iter().enumerate() {
        out.write_record([
            label.clone(),
            rm[i].to_string(),
            rb[i].to_string(),
            multi.scores[i].to_string(),
            base.scores[i].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub const BENCHMARK_COLUMNS: [&str; 9] = [
    "m",
    "t",
    "q_min",
    "q_max",
    "instances",
    "r2_multi",
    "r2_base",
    "se_multi",
    "se_base",
];

pub fn benchmark_csv(cells: &[BenchmarkCell]) -> String {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(BENCHMARK_COLUMNS).unwrap();
    for c in cells {
        out.write_record([
            c.m.to_string(),
            c.t.to_string(),
            c.q_min.to_string(),
            c.q_max.to_string(),
            c.instances.to_string(),
            c.mean_r2_multimodal.to_string(),
            c.mean_r2_baseline.to_string(),
            c.stderr_multimodal.to_string(),
            c.stderr_baseline.to_string(),
        ])
        .unwrap();
    }
    String::from_utf8(out.into_inner().unwrap()).unwrap()
}

/// One row per `(M, T)` and one column per valence range, each entry
/// `multimodal/baseline`, in order of first appearance.
pub fn benchmark_table(cells: &[BenchmarkCell]) -> String {
    let mut rows: Vec<(usize, usize)> = Vec::new();
    let mut cols: Vec<(f64, f64)> = Vec::new();
    for c in cells {
        if !rows.contains(&(c.m, c.t)) {
            rows.push((c.m, c.t));
        }
        if !cols.contains(&(c.q_min, c.q_max)) {
            cols.push((c.q_min, c.q_max));
        }
    }
    let headers: Vec<String> = cols.iter().map(|(a, b)| format!("{a}<=q<={b}")).collect();
    let width = headers.iter().map(String::len).max().unwrap_or(0).max(11);

    let mut out = String::new();
    let instances = cells.first().map_or(0, |c| c.instances);
    let _ = writeln!(
        out,
        "Spearman R^2 (multimodal)/(baseline), mean over {instances} instances"
    );
    let _ = write!(out, "{:>6} {:>4}", "M", "T");
    for h in &headers {
        let _ = write!(out, "  {h:>width$}");
    }
    out.push('\n');
    for &(m, t) in &rows {
        let _ = write!(out, "{m:>6} {t:>4}");
        for &(q_min, q_max) in &cols {
            let entry = cells
                .iter()
                .find(|c| c.m == m && c.t == t && c.q_min == q_min && c.q_max == q_max)
                .map_or_else(
                    || "-".to_string(),
                    |c| format!("{:.3}/{:.3}", c.mean_r2_multimodal, c.mean_r2_baseline),
                );
            let _ = write!(out, "  {entry:>width$}");
        }
        out.push('\n');
    }
    out
}
