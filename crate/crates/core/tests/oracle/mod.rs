//! Reference computations written from the model definition alone, sharing
//! no code with the library. Records are `(winner, loser, type)` triples.

#![allow(dead_code)]

pub type Rec = (usize, usize, usize);

fn ln_logistic_density(s: f64) -> f64 {
    let a = s.abs();
    -a - 2.0 * (-a).exp().ln_1p()
}

/// ln P(data | s, q) + Σ ln logistic_pdf(s_i).
pub fn log_posterior(records: &[Rec], s: &[f64], q: &[f64]) -> f64 {
    let mut total: f64 = s.iter().map(|&x| ln_logistic_density(x)).sum();
    for &(u, v, t) in records {
        let p = 1.0 / (1.0 + (s[v] - s[u]).exp());
        total += (q[t] * p + (1.0 - q[t]) * (1.0 - p)).ln();
    }
    total
}

/// Maximizes `f` on `[lo, hi]`: a coarse grid picks the bracket, then golden
/// section refines it.
fn line_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const GRID: usize = 200;
    let h = (hi - lo) / GRID as f64;
    let mut best = (f(lo), 0usize);
    for k in 1..=GRID {
        let v = f(lo + h * k as f64);
        if v > best.0 {
            best = (v, k);
        }
    }
    let mut a = (lo + h * (best.1 as f64 - 1.0)).max(lo);
    let mut b = (lo + h * (best.1 as f64 + 1.0)).min(hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    // keep an endpoint when the optimum sits on the boundary
    let mut best = (f(mid), mid);
    for x in [lo, hi] {
        let v = f(x);
        if v > best.0 {
            best = (v, x);
        }
    }
    best.1
}

pub struct Optimum {
    pub scores: Vec<f64>,
    pub valences: Vec<f64>,
    pub value: f64,
}

/// Alternating coordinate-wise maximization of the log posterior from one
/// starting point.
pub fn coordinate_ascent(records: &[Rec], s0: &[f64], q0: &[f64]) -> Optimum {
    let mut s = s0.to_vec();
    let mut q = q0.to_vec();
    let mut value = log_posterior(records, &s, &q);
    for _ in 0..20_000 {
        let before = value;
        for i in 0..s.len() {
            let mut trial = s.clone();
            s[i] = line_max(
                |x| {
                    trial[i] = x;
                    log_posterior(records, &trial, &q)
                },
                -15.0,
                15.0,
            );
        }
        for k in 0..q.len() {
            let mut trial = q.clone();
            q[k] = line_max(
                |x| {
                    trial[k] = x;
                    log_posterior(records, &s, &trial)
                },
                0.0,
                1.0,
            );
        }
        value = log_posterior(records, &s, &q);
        if value - before < 1e-14 {
            break;
        }
    }
    Optimum {
        scores: s,
        valences: q,
        value,
    }
}

/// Best coordinate-ascent optimum over a fixed set of deterministic starts.
pub fn map_optimum(records: &[Rec], n: usize, t: usize) -> Optimum {
    let mut best: Option<Optimum> = None;
    for start in 0..6 {
        let s0: Vec<f64> = (0..n)
            .map(|i| ((i * 7 + start * 3) % 5) as f64 * 0.5 - 1.0)
            .collect();
        let q0: Vec<f64> = (0..t)
            .map(|k| [0.9, 0.1, 0.6, 0.4, 0.75, 0.25][(k + start) % 6])
            .collect();
        let opt = coordinate_ascent(records, &s0, &q0);
        if best.as_ref().map_or(true, |b| opt.value > b.value) {
            best = Some(opt);
        }
    }
    best.unwrap()
}

/// Flips to the mirror optimum when the record-weighted mean valence is
/// below one half.
pub fn canonical(records: &[Rec], opt: &Optimum) -> (Vec<f64>, Vec<f64>) {
    let mean_q = records.iter().map(|r| opt.valences[r.2]).sum::<f64>() / records.len() as f64;
    if mean_q < 0.5 {
        (
            opt.scores.iter().map(|x| -x).collect(),
            opt.valences.iter().map(|x| 1.0 - x).collect(),
        )
    } else {
        (opt.scores.clone(), opt.valences.clone())
    }
}

/// MAP Zermelo iteration for plain Bradley-Terry under the logistic prior,
/// run by Gauss-Seidel updates until the strengths stop moving.
pub fn zermelo_map(n: usize, games: &[(usize, usize)]) -> Vec<f64> {
    let mut wins = vec![0.0; n];
    let mut meet = vec![vec![0.0; n]; n];
    for &(w, l) in games {
        wins[w] += 1.0;
        meet[w][l] += 1.0;
        meet[l][w] += 1.0;
    }
    let mut lam = vec![1.0; n];
    for _ in 0..1_000_000 {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let denom =
                2.0 / (lam[i] + 1.0) + (0..n).map(|j| meet[i][j] / (lam[i] + lam[j])).sum::<f64>();
            let new = (1.0 + wins[i]) / denom;
            change = change.max((new - lam[i]).abs() / lam[i]);
            lam[i] = new;
        }
        if change < 1e-15 {
            break;
        }
    }
    lam
}
