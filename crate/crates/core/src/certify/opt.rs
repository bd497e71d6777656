//! Exact Steiner Forest optimum for tiny instances.

use super::DenseMetric;
use crate::error::{Error, Result};
use crate::instance::{Metric, MetricInstance};

pub const MAX_EXACT_PAIRS: usize = 5;
pub const MAX_EXACT_VERTICES: usize = 14;

/// Minimum Steiner Forest weight of `instance` in its own units.
pub fn exact_opt_sf(instance: &MetricInstance) -> Result<f64> {
    if instance.n() > MAX_EXACT_VERTICES {
        return Err(Error::TooLarge(format!(
            "n = {} exceeds the exact limit n <= {MAX_EXACT_VERTICES}",
            instance.n()
        )));
    }
    exact_opt_metric(
        &DenseMetric::from_instance(instance, crate::oracle::Scale::ONE),
        instance.pairs(),
    )
}

/// Exact optimum over an explicit distance table: every partition of the
/// pairs into blocks, each block joined by an optimal Steiner tree
/// (Dreyfus-Wagner on the shortest-path closure).
pub fn exact_opt_metric(metric: &DenseMetric, pairs: &[(usize, usize)]) -> Result<f64> {
    let n = metric.n();
    let k = pairs.len();
    if k > MAX_EXACT_PAIRS {
        return Err(Error::TooLarge(format!(
            "k = {k} exceeds the exact limit k <= {MAX_EXACT_PAIRS}"
        )));
    }
    if n > MAX_EXACT_VERTICES {
        return Err(Error::TooLarge(format!(
            "n = {n} exceeds the exact limit n <= {MAX_EXACT_VERTICES}"
        )));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let d = closure(metric);
    let terminals: Vec<usize> = pairs.iter().flat_map(|&(s, t)| [s, t]).collect();
    let tree = steiner_trees(&d, n, &terminals);

    let full = (1usize << k) - 1;
    let mut best = vec![f64::INFINITY; full + 1];
    best[0] = 0.0;
    for set in 1..=full {
        let low = set & set.wrapping_neg();
        let rest = set ^ low;
        // blocks containing the lowest pair
        let mut sub = rest;
        loop {
            let block = sub | low;
            let cost = tree[terminal_mask(block)] + best[set ^ block];
            if cost < best[set] {
                best[set] = cost;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    Ok(best[full])
}

fn terminal_mask(pair_mask: usize) -> usize {
    let mut m = 0;
    for j in 0..usize::BITS as usize / 2 {
        if pair_mask >> j & 1 == 1 {
            m |= 0b11 << (2 * j);
        }
    }
    m
}

fn closure(metric: &DenseMetric) -> Vec<f64> {
    let n = metric.n();
    let mut d: Vec<f64> = (0..n * n).map(|i| metric.dist(i / n, i % n)).collect();
    for m in 0..n {
        for a in 0..n {
            for b in 0..n {
                let via = d[a * n + m] + d[m * n + b];
                if via < d[a * n + b] {
                    d[a * n + b] = via;
                }
            }
        }
    }
    d
}

/// `tree[mask]` = weight of a minimum Steiner tree spanning the terminals in `mask`.
fn steiner_trees(d: &[f64], n: usize, terminals: &[usize]) -> Vec<f64> {
    let t = terminals.len();
    let masks = 1usize << t;
    let mut dp = vec![f64::INFINITY; masks * n];
    for (i, &term) in terminals.iter().enumerate() {
        for v in 0..n {
            dp[(1 << i) * n + v] = d[term * n + v];
        }
    }
    for mask in 1..masks {
        if mask.count_ones() < 2 {
            continue;
        }
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        for v in 0..n {
            let mut best = f64::INFINITY;
            // proper splits with the low terminal on one side
            let mut sub = rest;
            while sub != 0 {
                sub = (sub - 1) & rest;
                let a = sub | low;
                if a == mask {
                    continue;
                }
                let c = dp[a * n + v] + dp[(mask ^ a) * n + v];
                if c < best {
                    best = c;
                }
            }
            dp[mask * n + v] = best;
        }
        for v in 0..n {
            let mut best = dp[mask * n + v];
            for u in 0..n {
                let c = dp[mask * n + u] + d[u * n + v];
                if c < best {
                    best = c;
                }
            }
            dp[mask * n + v] = best;
        }
    }
    (0..masks)
        .map(|mask| {
            if mask.count_ones() < 2 {
                0.0
            } else {
                (0..n)
                    .map(|v| dp[mask * n + v])
                    .fold(f64::INFINITY, f64::min)
            }
        })
        .collect()
}

/// Exact optimum for points on a line: the total length of the union of
/// the pair intervals.
pub fn line_opt(positions: &[f64], pairs: &[(usize, usize)]) -> f64 {
    let mut spans: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(s, t)| {
            let (a, b) = (positions[s], positions[t]);
            (a.min(b), a.max(b))
        })
        .collect();
    spans.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for (lo, hi) in spans {
        current = match current {
            Some((a, b)) if lo <= b => Some((a, b.max(hi))),
            Some((a, b)) => {
                total += b - a;
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((a, b)) = current {
        total += b - a;
    }
    total
}

/// Line optimum of an instance, if its metric is one-dimensional.
pub fn line_opt_instance(instance: &MetricInstance) -> Option<f64> {
    match instance.metric() {
        Metric::Line(xs) => Some(line_opt(xs, instance.pairs())),
        Metric::Euclid { dim: 1, coords } => Some(line_opt(coords, instance.pairs())),
        _ => None,
    }
}
