//! A histogram-based spot check of ε-differential privacy.

use std::fmt;

use rayon::prelude::*;

#[derive(Clone, Copy, Debug)]
pub struct RatioConfig {
    pub samples: usize,
    pub bins: usize,
    /// Bins where either side has fewer samples are ignored.
    pub min_bin: u64,
    /// Relative slack on `e^ε` absorbing sampling noise.
    pub tau: f64,
    pub seed: u64,
}

impl Default for RatioConfig {
    fn default() -> Self {
        RatioConfig { samples: 200_000, bins: 40, min_bin: 500, tau: 0.15, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// No bin reached the minimum count on both sides.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct DPReport {
    pub eps: f64,
    pub edges: Vec<f64>,
    pub counts1: Vec<u64>,
    pub counts2: Vec<u64>,
    /// Samples on which the mechanism failed, per side.
    pub errors: (u64, u64),
    pub qualifying_bins: usize,
    /// Largest `|ln(c1/c2)|` over qualifying bins.
    pub max_log_ratio: f64,
    pub limit: f64,
    pub verdict: Verdict,
}

impl fmt::Display for DPReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>10} {:>10} {:>8} {:>8} {:>8}", "lo", "hi", "db1", "db2", "ratio")?;
        for i in 0..self.counts1.len() {
            let (c1, c2) = (self.counts1[i], self.counts2[i]);
            let ratio = if c1.min(c2) == 0 { "-".to_string() } else { format!("{:.3}", c1 as f64 / c2 as f64) };
            writeln!(f, "{:>10.3} {:>10.3} {:>8} {:>8} {:>8}", self.edges[i], self.edges[i + 1], c1, c2, ratio)?;
        }
        writeln!(f, "eps {}  limit e^eps(1+tau) = {:.4}", self.eps, self.limit)?;
        writeln!(f, "qualifying bins {}  max |log ratio| {:.4}", self.qualifying_bins, self.max_log_ratio)?;
        write!(f, "errors {} / {}  verdict {:?}", self.errors.0, self.errors.1, self.verdict)
    }
}

fn sample_seed(seed: u64, side: u64, i: usize) -> u64 {
    seed ^ (side << 62) ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Histograms `mechanism(db1, ·)` and `mechanism(db2, ·)` over a common
/// grid and compares bin counts against `e^ε·(1+τ)` in both directions.
/// Failed runs are tallied apart from the histogram.
pub fn dp_ratio_test<M, E>(mechanism: M, db1: f64, db2: f64, eps: f64, cfg: &RatioConfig) -> DPReport
where
    M: Fn(f64, u64) -> Result<f64, E> + Sync,
{
    let draw = |db: f64, side: u64| -> Vec<Option<f64>> {
        (0..cfg.samples).into_par_iter().map(|i| mechanism(db, sample_seed(cfg.seed, side, i)).ok()).collect()
    };
    let (s1, s2) = (draw(db1, 1), draw(db2, 2));
    let errors = (s1.iter().filter(|x| x.is_none()).count() as u64, s2.iter().filter(|x| x.is_none()).count() as u64);
    let values: Vec<f64> = s1.iter().chain(&s2).flatten().copied().collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = cfg.bins.max(1);
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0) - 0.5, lo.max(0.0) + 0.5) };
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let histogram = |s: &[Option<f64>]| {
        let mut c = vec![0u64; bins];
        for x in s.iter().flatten() {
            let i = (((x - lo) / width) as usize).min(bins - 1);
            c[i] += 1;
        }
        c
    };
    let (counts1, counts2) = (histogram(&s1), histogram(&s2));
    let limit = eps.exp() * (1.0 + cfg.tau);
    let mut qualifying = 0;
    let mut max_log_ratio: f64 = 0.0;
    let mut fail = false;
    for (&c1, &c2) in counts1.iter().zip(&counts2) {
        if c1 < cfg.min_bin || c2 < cfg.min_bin {
            continue;
        }
        qualifying += 1;
        let r = c1 as f64 / c2 as f64;
        max_log_ratio = max_log_ratio.max(r.ln().abs());
        fail |= r > limit || 1.0 / r > limit;
    }
    // Outcome classes must also match: an error on one side only is observable.
    let (e1, e2) = (errors.0 as f64, errors.1 as f64);
    if e1.min(e2) >= cfg.min_bin as f64 {
        fail |= e1 / e2 > limit || e2 / e1 > limit;
    } else if e1.max(e2) >= cfg.min_bin as f64 {
        fail = true;
    }
    let verdict = if fail {
        Verdict::Fail
    } else if qualifying == 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    DPReport { eps, edges, counts1, counts2, errors, qualifying_bins: qualifying, max_log_ratio, limit, verdict }
}
