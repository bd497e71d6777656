//! Metric Steiner Forest cost estimation.
//!
//! Pairs much shorter than the longest one are set aside and paid for
//! directly. The rest are rescaled so the shortest kept pair has length 2,
//! and for every threshold `tau_i = 2^i` the estimator sizes a maximal
//! independent set of the ball graph on active terminals. The output is
//! `SOL = sum_i M_i * tau_i`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::MetricInstance;
use crate::mis::{alg_mul, MisConfig};
use crate::oracle::{CountingAdjacencyOracle, CountingDistanceOracle, Scale};
use crate::perm::Permutation;
use crate::rng;

/// Per-level MIS accuracy; gives a per-level factor of 1.01.
pub const LEVEL_EPSILON: f64 = 0.01;

/// The other endpoint of `t`'s pair.
pub fn match_of(pairs: &[(usize, usize)], t: usize) -> Result<usize> {
    pairs
        .iter()
        .find_map(|&(s, u)| match t {
            _ if t == s => Some(u),
            _ if t == u => Some(s),
            _ => None,
        })
        .ok_or_else(|| Error::input(format!("vertex {t} is not a terminal")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedPair {
    pub s: usize,
    pub t: usize,
    /// Distance in original units.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreprocessedInstance {
    pub kept_pairs: Vec<WeightedPair>,
    pub ignored_pairs: Vec<WeightedPair>,
    /// Largest pair distance, original units.
    pub max_pair_distance: f64,
    /// Original-to-working multiplier; the shortest kept pair maps to 2.
    pub scale: Scale,
    pub queries: u64,
}

impl PreprocessedInstance {
    pub fn k_eff(&self) -> usize {
        self.kept_pairs.len()
    }

    pub fn kept(&self) -> Vec<(usize, usize)> {
        self.kept_pairs.iter().map(|p| (p.s, p.t)).collect()
    }

    /// Direct-connection cost of the ignored pairs, original units.
    pub fn ignored_cost(&self) -> f64 {
        self.ignored_pairs
            .iter()
            .map(|p| p.distance)
            .fold(0.0, |a, b| a + b)
    }
}

/// Reads each pair distance once (`k` queries), drops pairs no longer than
/// `X / k` where `X` is the largest, and picks the scale that maps the
/// shortest kept pair to exactly 2. A lone pair is always kept.
pub fn preprocess(
    oracle: &CountingDistanceOracle<'_>,
    pairs: &[(usize, usize)],
) -> Result<PreprocessedInstance> {
    if pairs.is_empty() {
        return Err(Error::input("no terminal pairs"));
    }
    let start = oracle.query_count();
    let weighted: Vec<WeightedPair> = pairs
        .iter()
        .map(|&(s, t)| {
            oracle.distance_query(s, t).map(|d| WeightedPair {
                s,
                t,
                distance: oracle.scale().invert(d),
            })
        })
        .collect::<Result<_>>()?;
    let k = weighted.len() as f64;
    let x = weighted.iter().map(|p| p.distance).fold(0.0, f64::max);
    let (kept_pairs, ignored_pairs): (Vec<_>, Vec<_>) = weighted
        .into_iter()
        .partition(|p| p.distance > x / k || (k == 1.0 && p.distance > 0.0));
    let scale = match kept_pairs.iter().map(|p| p.distance).reduce(f64::min) {
        Some(min) => Scale::ratio(2.0, min)?,
        None => Scale::ONE,
    };
    Ok(PreprocessedInstance {
        kept_pairs,
        ignored_pairs,
        max_pair_distance: x,
        scale,
        queries: oracle.query_count() - start,
    })
}

/// `L = ceil(log2(2 k^2))`.
pub fn level_count(k_eff: usize) -> usize {
    let target = 2u128 * (k_eff as u128) * (k_eff as u128);
    let mut l = 0;
    while (1u128 << l) < target {
        l += 1;
    }
    l
}

/// Thresholds `tau_i = 2^i` for `i = 0..=L`.
pub fn levels(k_eff: usize) -> Result<Vec<f64>> {
    if k_eff == 0 {
        return Err(Error::input("need at least one kept pair"));
    }
    Ok((0..=level_count(k_eff))
        .map(|i| (1u64 << i) as f64)
        .collect())
}

/// Terminals whose match is at distance at least `tau`, in pair order
/// `s_1, t_1, s_2, ...`. One distance query per terminal.
pub fn active_terminals(
    dist: &CountingDistanceOracle<'_>,
    pairs: &[(usize, usize)],
    tau: f64,
) -> Vec<usize> {
    let mut active = Vec::new();
    for &(s, t) in pairs {
        for (v, m) in [(s, t), (t, s)] {
            if dist.read(v, m) >= tau {
                active.push(v);
            }
        }
    }
    active
}

/// Adjacency oracle of the level-`tau` ball graph: vertices are the active
/// terminals, `(u, v)` an edge iff `w(u, v) < 2 tau`. Distances are read
/// through `dist` in its current (working) units.
pub fn ball_graph_oracle<'a>(
    dist: &'a CountingDistanceOracle<'a>,
    pairs: &[(usize, usize)],
    tau: f64,
) -> CountingAdjacencyOracle<'a> {
    let active = active_terminals(dist, pairs, tau);
    CountingAdjacencyOracle::derived(dist, active, 2.0 * tau)
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub tau: f64,
    pub active_count: usize,
    pub mis_estimate: f64,
    pub queries: u64,
    pub exact_prefix: usize,
    /// Active terminals; local vertex `j` of the level's ball graph is `vertices[j]`.
    #[serde(skip)]
    pub vertices: Vec<usize>,
    /// Permutation over local ids the MIS estimator used.
    #[serde(skip)]
    pub permutation: Option<Permutation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SfConfig {
    pub epsilon: f64,
    pub seed: u64,
    pub cache: bool,
}

impl SfConfig {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        Self {
            epsilon,
            seed,
            cache: false,
        }
    }

    pub fn with_cache(mut self, cache: bool) -> Self {
        self.cache = cache;
        self
    }

    /// Accuracy handed to each level: the tighter of the caller's and 0.01.
    pub fn level_epsilon(&self) -> f64 {
        self.epsilon.min(LEVEL_EPSILON)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SfEstimateReport {
    /// `sum_i M_i tau_i` in working units.
    pub sol_scaled: f64,
    /// `sol_scaled` in original units plus the ignored pairs' direct cost.
    pub sol_original: f64,
    pub scale: Scale,
    pub k_eff: usize,
    pub levels: Vec<LevelReport>,
    pub ignored_pairs: Vec<WeightedPair>,
    pub preprocessing_queries: u64,
    pub total_queries: u64,
    pub seed: u64,
    pub epsilon: f64,
}

/// Estimates the Steiner Forest cost of `instance` within `O(log k)`.
pub fn estimate_sf(instance: &MetricInstance, config: &SfConfig) -> Result<SfEstimateReport> {
    if !(config.epsilon > 0.0 && config.epsilon < 1.0) {
        return Err(Error::input(format!(
            "epsilon {} is not in (0,1)",
            config.epsilon
        )));
    }
    let mut oracle = CountingDistanceOracle::new(instance);
    let pre = preprocess(&oracle, instance.pairs())?;
    let mut report = SfEstimateReport {
        sol_scaled: 0.0,
        sol_original: pre.ignored_cost(),
        scale: pre.scale,
        k_eff: pre.k_eff(),
        levels: Vec::new(),
        ignored_pairs: pre.ignored_pairs.clone(),
        preprocessing_queries: pre.queries,
        total_queries: pre.queries,
        seed: config.seed,
        epsilon: config.epsilon,
    };
    if pre.k_eff() == 0 {
        return Ok(report);
    }

    oracle.set_scale(pre.scale);
    let kept = pre.kept();
    let mis_config = MisConfig::new(config.level_epsilon())?.with_cache(config.cache);
    for (i, tau) in levels(pre.k_eff())?.into_iter().enumerate() {
        let before = oracle.query_count();
        let ball = ball_graph_oracle(&oracle, &kept, tau);
        let mut level = LevelReport {
            level: i,
            tau,
            active_count: ball.n(),
            mis_estimate: 0.0,
            queries: 0,
            exact_prefix: 0,
            vertices: (0..ball.n()).map(|j| ball.vertex(j)).collect(),
            permutation: None,
        };
        if ball.n() > 0 {
            let est = alg_mul(
                &ball,
                &mis_config,
                rng::derive_seed(config.seed, i as u64 + 1),
            )?;
            level.mis_estimate = est.value;
            level.exact_prefix = est.exact_prefix.len();
            level.permutation = Some(est.permutation);
        }
        level.queries = oracle.query_count() - before;
        report.sol_scaled += level.mis_estimate * tau;
        report.levels.push(level);
    }
    report.total_queries = oracle.query_count();
    report.sol_original = pre.scale.invert(report.sol_scaled) + pre.ignored_cost();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Metric;

    fn line(xs: &[f64], pairs: &[(usize, usize)]) -> MetricInstance {
        MetricInstance::new(Metric::Line(xs.to_vec()), pairs.to_vec()).unwrap()
    }

    #[test]
    fn match_is_involution() {
        let pairs = [(0, 5), (2, 3)];
        assert_eq!(match_of(&pairs, 0).unwrap(), 5);
        assert_eq!(match_of(&pairs, 3).unwrap(), 2);
        for t in [0, 5, 2, 3] {
            assert_eq!(match_of(&pairs, match_of(&pairs, t).unwrap()).unwrap(), t);
        }
        assert!(match_of(&pairs, 1).is_err());
    }

    #[test]
    fn preprocess_drops_short_pairs() {
        let inst = line(
            &[0.0, 10.0, 20.0, 24.0, 30.0, 30.5],
            &[(0, 1), (2, 3), (4, 5)],
        );
        let oracle = CountingDistanceOracle::new(&inst);
        let pre = preprocess(&oracle, inst.pairs()).unwrap();
        assert_eq!(oracle.query_count(), 3);
        assert_eq!(pre.queries, 3);
        assert_eq!(pre.max_pair_distance, 10.0);
        assert_eq!(pre.ignored_pairs.len(), 1);
        assert_eq!(pre.ignored_pairs[0].distance, 0.5);
        assert_eq!(pre.scale.factor(), 0.5);
        let scaled: Vec<f64> = pre
            .kept_pairs
            .iter()
            .map(|p| pre.scale.apply(p.distance))
            .collect();
        assert_eq!(scaled, vec![5.0, 2.0]);
    }

    #[test]
    fn preprocess_single_and_equal_pairs() {
        let inst = line(&[0.0, 6.0], &[(0, 1)]);
        let pre = preprocess(&CountingDistanceOracle::new(&inst), inst.pairs()).unwrap();
        assert!(pre.ignored_pairs.is_empty());
        assert_eq!(pre.scale.apply(6.0), 2.0);
        assert!((pre.scale.factor() - 1.0 / 3.0).abs() < 1e-15);

        let d = 7.25;
        let inst = line(
            &[0.0, d, 100.0, 100.0 + d, 200.0, 200.0 + d],
            &[(0, 1), (2, 3), (4, 5)],
        );
        let pre = preprocess(&CountingDistanceOracle::new(&inst), inst.pairs()).unwrap();
        assert_eq!(pre.k_eff(), 3);
        for p in &pre.kept_pairs {
            assert_eq!(pre.scale.apply(p.distance), 2.0);
        }
    }

    #[test]
    fn preprocess_errors_and_degenerate() {
        let inst = line(&[0.0, 1.0], &[]);
        assert!(preprocess(&CountingDistanceOracle::new(&inst), inst.pairs()).is_err());
        let zero = line(&[3.0, 3.0, 3.0, 3.0], &[(0, 1), (2, 3)]);
        let pre = preprocess(&CountingDistanceOracle::new(&zero), zero.pairs()).unwrap();
        assert_eq!(pre.k_eff(), 0);
        let report = estimate_sf(&zero, &SfConfig::new(0.5, 1)).unwrap();
        assert_eq!(report.sol_original, 0.0);
        assert!(report.levels.is_empty());
        assert_eq!(report.total_queries, 2);
    }

    #[test]
    fn level_examples() {
        assert_eq!(levels(1).unwrap(), vec![1.0, 2.0]);
        assert_eq!(levels(2).unwrap(), vec![1.0, 2.0, 4.0, 8.0]);
        assert_eq!(levels(3).unwrap().len(), 6);
        assert_eq!(*levels(3).unwrap().last().unwrap(), 32.0);
        assert!(levels(0).is_err());
        assert_eq!(level_count(4), 5);
        assert_eq!(level_count(5), 6);
    }

    #[test]
    fn ball_graph_edges() {
        // terminals at 0, 1, 10 with far-away matches
        let inst = line(
            &[0.0, 1.0, 10.0, 100.0, -100.0, 50.0],
            &[(0, 3), (1, 4), (2, 5)],
        );
        let dist = CountingDistanceOracle::new(&inst);
        let ball = ball_graph_oracle(&dist, inst.pairs(), 2.0);
        assert_eq!(dist.query_count(), 6);
        let local = |v: usize| (0..ball.n()).find(|&j| ball.vertex(j) == v).unwrap();
        assert!(ball.adjacency_query(local(0), local(1)).unwrap());
        assert!(!ball.adjacency_query(local(0), local(2)).unwrap());
        assert_eq!(dist.query_count(), 8);

        let empty = ball_graph_oracle(&dist, inst.pairs(), 1000.0);
        assert_eq!(empty.n(), 0);
    }

    #[test]
    fn ball_graph_level_zero_single_pair() {
        let inst = line(&[0.0, 2.0], &[(0, 1)]);
        let dist = CountingDistanceOracle::new(&inst);
        let ball = ball_graph_oracle(&dist, inst.pairs(), 1.0);
        assert_eq!(ball.n(), 2);
        assert!(!ball.adjacency_query(0, 1).unwrap());
    }

    #[test]
    fn single_pair_estimate() {
        let inst = line(&[5.0, 9.0], &[(0, 1)]);
        let report = estimate_sf(&inst, &SfConfig::new(0.01, 3)).unwrap();
        assert_eq!(report.levels.len(), 2);
        assert_eq!(report.levels[0].mis_estimate, 2.0);
        assert_eq!(report.levels[1].mis_estimate, 1.0);
        assert_eq!(report.sol_scaled, 4.0);
        assert!(report.sol_scaled <= 1.01 * 4.0);
        // original units: scale 2/4
        assert_eq!(report.sol_original, 8.0);
    }

    #[test]
    fn query_accounting_adds_up() {
        let inst = crate::gen::gen_random_euclid(60, 8, 2, 4).unwrap();
        let report = estimate_sf(&inst, &SfConfig::new(0.5, 9).with_cache(true)).unwrap();
        let levels: u64 = report.levels.iter().map(|l| l.queries).sum();
        assert_eq!(report.total_queries, levels + report.preprocessing_queries);
        assert_eq!(report.preprocessing_queries, 8);
        for pair in report.levels.windows(2) {
            assert_eq!(pair[1].tau, 2.0 * pair[0].tau);
            assert!(pair[1].active_count <= pair[0].active_count);
            let later: std::collections::HashSet<_> = pair[1].vertices.iter().collect();
            let earlier: std::collections::HashSet<_> = pair[0].vertices.iter().collect();
            assert!(later.is_subset(&earlier));
        }
        for level in &report.levels {
            if level.active_count == 0 {
                assert_eq!(level.mis_estimate, 0.0);
            } else {
                assert!(level.mis_estimate >= 1.0);
            }
            assert!(level.queries >= 2 * report.k_eff as u64);
        }
    }

    #[test]
    fn ignored_pairs_paid_directly() {
        let inst = line(&[0.0, 100.0, 200.0, 201.0], &[(0, 1), (2, 3)]);
        let report = estimate_sf(&inst, &SfConfig::new(0.5, 1)).unwrap();
        assert_eq!(report.k_eff, 1);
        assert_eq!(report.ignored_pairs.len(), 1);
        assert_eq!(
            report.sol_original,
            report.scale.invert(report.sol_scaled) + 1.0
        );
    }

    #[test]
    fn level_zero_edgeless_when_terminals_separated() {
        // every pair of terminals is at least as far apart as the shortest pair
        let inst = line(&[0.0, 3.0, 6.0, 9.0, 12.0, 15.0], &[(0, 1), (2, 4), (3, 5)]);
        let mut dist = CountingDistanceOracle::new(&inst);
        let pre = preprocess(&dist, inst.pairs()).unwrap();
        dist.set_scale(pre.scale);
        let kept = pre.kept();
        let ball = ball_graph_oracle(&dist, &kept, 1.0);
        assert_eq!(ball.n(), 6);
        for u in 0..6 {
            for v in u + 1..6 {
                assert!(!ball.adjacency_query(u, v).unwrap());
            }
        }
    }

    #[test]
    fn cached_level_queries_capped() {
        // with memoization each active vertex is resolved once, scanning at
        // most m - 1 others, on top of the greedy prefix and activity reads
        for (n, seed) in [(40, 1), (120, 2), (300, 3)] {
            let inst = crate::gen::gen_random_euclid(n, n / 2, 2, seed).unwrap();
            let report = estimate_sf(&inst, &SfConfig::new(0.01, seed).with_cache(true)).unwrap();
            for level in &report.levels {
                let m = level.active_count as u64;
                let s = crate::mis::greedy_budget(level.active_count) as u64;
                let cap = 2 * report.k_eff as u64 + m.saturating_sub(1) * (m + s);
                assert!(
                    level.queries <= cap,
                    "n={n} level {}: {} > {cap}",
                    level.level,
                    level.queries
                );
            }
        }
    }

    #[test]
    fn rejects_bad_epsilon() {
        let inst = line(&[0.0, 2.0], &[(0, 1)]);
        assert!(estimate_sf(&inst, &SfConfig::new(1.0, 0)).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let inst = crate::gen::gen_random_euclid(30, 6, 2, 1).unwrap();
        let cfg = SfConfig::new(0.3, 5).with_cache(true);
        let a = estimate_sf(&inst, &cfg).unwrap();
        let b = estimate_sf(&inst, &cfg).unwrap();
        assert_eq!(a.sol_scaled, b.sol_scaled);
        assert_eq!(a.total_queries, b.total_queries);
    }
}
