//! Instance generators: the two tightness constructions, random metric
//! instances and G(n, p) graphs.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::instance::{Metric, MetricInstance};
use crate::oracle::Graph;
use crate::rng;

/// Largest level count accepted by the tightness constructions.
pub const MAX_LEVELS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    I1 {
        levels: usize,
    },
    I2 {
        levels: usize,
        gap: f64,
    },
    Euclid {
        n: usize,
        k: usize,
        dim: usize,
        seed: u64,
    },
    LineRandom {
        n: usize,
        k: usize,
        seed: u64,
    },
    Gnp {
        n: usize,
        p: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub enum Generated {
    Metric(MetricInstance),
    Graph(Graph),
}

impl GenSpec {
    pub fn generate(&self) -> Result<Generated> {
        Ok(match *self {
            GenSpec::I1 { levels } => Generated::Metric(gen_i1(levels)?),
            GenSpec::I2 { levels, gap } => Generated::Metric(gen_i2(levels, gap)?),
            GenSpec::Euclid { n, k, dim, seed } => {
                Generated::Metric(gen_random_euclid(n, k, dim, seed)?)
            }
            GenSpec::LineRandom { n, k, seed } => Generated::Metric(gen_random_line(n, k, seed)?),
            GenSpec::Gnp { n, p, seed } => Generated::Graph(gen_gnp(n, p, seed)?),
        })
    }
}

fn check_levels(levels: usize) -> Result<usize> {
    if !(2..=MAX_LEVELS).contains(&levels) {
        return Err(Error::input(format!(
            "level count {levels} outside 2..={MAX_LEVELS}"
        )));
    }
    Ok((1 << levels) - 1)
}

/// `2^L - 1` points spaced 2 apart on a line; vertex `i` is paired with
/// vertex `i + floor(n/2)`.
pub fn gen_i1(levels: usize) -> Result<MetricInstance> {
    let n = check_levels(levels)?;
    let xs = (0..n).map(|i| 2.0 * i as f64).collect();
    let half = n / 2;
    let pairs = (0..half).map(|i| (i, i + half)).collect();
    MetricInstance::new(Metric::Line(xs), pairs)
}

/// Sizes of the nonempty clusters of the second construction, with their
/// internal spacing: cluster `i` has `floor(n / 2^i)` points `2^(i+1)` apart.
pub fn i2_clusters(levels: usize) -> Result<Vec<(usize, f64)>> {
    let n = check_levels(levels)?;
    Ok((1..=levels)
        .map(|i| (n >> i, (1u64 << (i + 1)) as f64))
        .filter(|&(size, _)| size > 0)
        .collect())
}

/// Clusters laid left to right on one line, separated by `gap`; every
/// consecutive pair inside a cluster is a demand.
pub fn gen_i2(levels: usize, gap: f64) -> Result<MetricInstance> {
    let n = check_levels(levels)?;
    if !(gap > n as f64) || !gap.is_finite() {
        return Err(Error::input(format!("gap {gap} must exceed n = {n}")));
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut pairs = Vec::new();
    let mut cursor = 0.0;
    for (size, spacing) in i2_clusters(levels)? {
        let first = xs.len();
        for j in 0..size {
            xs.push(cursor + spacing * j as f64);
        }
        pairs.extend((first..first + size - 1).map(|v| (v, v + 1)));
        cursor = xs[xs.len() - 1] + gap;
    }
    // consecutive pairs share endpoints, so the instance may grow by copies
    MetricInstance::new(Metric::Line(xs), pairs)
}

fn random_pairs(n: usize, k: usize, r: &mut rng::Rng) -> Result<Vec<(usize, usize)>> {
    if 2 * k > n {
        return Err(Error::input(format!(
            "{k} disjoint pairs need at least {} vertices",
            2 * k
        )));
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(r);
    Ok(ids[..2 * k].chunks(2).map(|c| (c[0], c[1])).collect())
}

/// `n` uniform points in the unit cube with `k` disjoint random pairs.
pub fn gen_random_euclid(n: usize, k: usize, dim: usize, seed: u64) -> Result<MetricInstance> {
    if dim == 0 {
        return Err(Error::input("dimension must be at least 1"));
    }
    let mut r = rng::seeded(seed);
    let coords = (0..n * dim).map(|_| r.gen::<f64>()).collect();
    let pairs = random_pairs(n, k, &mut r)?;
    MetricInstance::new(Metric::Euclid { dim, coords }, pairs)
}

/// `n` uniform points in `[0, 1)` on a line with `k` disjoint random pairs.
pub fn gen_random_line(n: usize, k: usize, seed: u64) -> Result<MetricInstance> {
    let mut r = rng::seeded(seed);
    let xs = (0..n).map(|_| r.gen::<f64>()).collect();
    let pairs = random_pairs(n, k, &mut r)?;
    MetricInstance::new(Metric::Line(xs), pairs)
}

/// Erdos-Renyi graph: each unordered pair independently with probability `p`.
pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("edge probability {p} outside [0,1]")));
    }
    let mut r = rng::seeded(seed);
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_bool(p) {
                g.insert(u, v);
            }
        }
    }
    Ok(g)
}
