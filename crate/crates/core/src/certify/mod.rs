//! Exact baselines and constructive certificates for the Steiner Forest
//! estimator.
//!
//! Everything here reads the full distance table; nothing is query-counted.

mod dsu;
mod opt;

use std::collections::BTreeMap;

use serde::Serialize;

pub use dsu::Dsu;
pub use opt::{
    exact_opt_metric, exact_opt_sf, line_opt, line_opt_instance, MAX_EXACT_PAIRS,
    MAX_EXACT_VERTICES,
};

use crate::error::{Error, Result};
use crate::instance::MetricInstance;
use crate::mis::rgmis_exact;
use crate::oracle::{CountingDistanceOracle, Graph, Scale};
use crate::perm::{random_permutation, Permutation};
use crate::steiner::{levels, preprocess, SfEstimateReport};

/// Fully materialized distance table.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMetric {
    n: usize,
    d: Vec<f64>,
}

impl DenseMetric {
    pub fn from_instance(instance: &MetricInstance, scale: Scale) -> Self {
        let n = instance.n();
        let d = (0..n * n)
            .map(|i| scale.apply(instance.distance(i / n, i % n)))
            .collect();
        Self { n, d }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dist(&self, u: usize, v: usize) -> f64 {
        self.d[u * self.n + v]
    }
}

/// Pairs, thresholds and distances of one unit system.
#[derive(Debug, Clone)]
pub struct LevelFrame {
    pub metric: DenseMetric,
    pub pairs: Vec<(usize, usize)>,
    pub taus: Vec<f64>,
    pub scale: Scale,
    partner: Vec<Option<usize>>,
}

impl LevelFrame {
    /// The estimator's own frame: short pairs dropped, shortest kept pair at 2.
    pub fn working(instance: &MetricInstance) -> Result<Self> {
        let pre = preprocess(&CountingDistanceOracle::new(instance), instance.pairs())?;
        let taus = match pre.k_eff() {
            0 => Vec::new(),
            k => levels(k)?,
        };
        Ok(Self::build(instance, pre.kept(), taus, pre.scale))
    }

    /// Original units with every pair kept and thresholds `1, 2, ..., 2^L`.
    pub fn native(instance: &MetricInstance) -> Result<Self> {
        let taus = levels(instance.k())?;
        Ok(Self::build(
            instance,
            instance.pairs().to_vec(),
            taus,
            Scale::ONE,
        ))
    }

    fn build(
        instance: &MetricInstance,
        pairs: Vec<(usize, usize)>,
        taus: Vec<f64>,
        scale: Scale,
    ) -> Self {
        let mut partner = vec![None; instance.n()];
        for &(s, t) in &pairs {
            partner[s] = Some(t);
            partner[t] = Some(s);
        }
        Self {
            metric: DenseMetric::from_instance(instance, scale),
            pairs,
            taus,
            scale,
            partner,
        }
    }

    pub fn partner(&self, v: usize) -> Option<usize> {
        self.partner[v]
    }

    /// Terminals whose match is at least `tau` away, in pair order.
    pub fn active(&self, tau: f64) -> Vec<usize> {
        active_in(&self.metric, &self.pairs, tau)
    }

    /// Next threshold; nothing is active past the last level.
    fn tau_after(&self, i: usize) -> f64 {
        self.taus.get(i + 1).copied().unwrap_or(f64::INFINITY)
    }
}

fn active_in(metric: &DenseMetric, pairs: &[(usize, usize)], tau: f64) -> Vec<usize> {
    pairs
        .iter()
        .flat_map(|&(s, t)| [(s, t), (t, s)])
        .filter(|&(v, m)| metric.dist(v, m) >= tau)
        .map(|(v, _)| v)
        .collect()
}

/// Ball graph on `vertices` (local ids) for threshold `tau`.
pub fn ball_graph(metric: &DenseMetric, vertices: &[usize], tau: f64) -> Graph {
    let mut g = Graph::empty(vertices.len());
    for a in 0..vertices.len() {
        for b in a + 1..vertices.len() {
            if metric.dist(vertices[a], vertices[b]) < 2.0 * tau {
                g.insert(a, b);
            }
        }
    }
    g
}

/// Random greedy MIS of the ball graph on `vertices` under `pi`, which must
/// order exactly those vertices. Returns global ids in `pi` order.
fn greedy_mis(
    metric: &DenseMetric,
    vertices: &[usize],
    tau: f64,
    pi: &Permutation,
) -> Result<Vec<usize>> {
    let local_of: BTreeMap<usize, usize> =
        vertices.iter().enumerate().map(|(j, &v)| (v, j)).collect();
    let order = pi
        .order()
        .iter()
        .map(|v| {
            local_of
                .get(v)
                .copied()
                .ok_or_else(|| Error::input(format!("vertex {v} not active")))
        })
        .collect::<Result<Vec<_>>>()?;
    let local = Permutation::from_order(order)?;
    let mis = rgmis_exact(&ball_graph(metric, vertices, tau), &local)?;
    Ok(mis.into_iter().map(|j| vertices[j]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelDecomposition {
    pub level: usize,
    pub tau: f64,
    pub active: Vec<usize>,
    /// The MIS `U_i` in permutation order.
    pub mis: Vec<usize>,
    pub center_of: BTreeMap<usize, usize>,
    /// Members of each cluster in increasing id order.
    pub clusters: BTreeMap<usize, Vec<usize>>,
    /// Active here but not at the next threshold.
    pub targets: Vec<usize>,
}

/// Decomposes level `level` under the global permutation `pi`, which must
/// contain every active terminal.
pub fn level_decomposition(
    metric: &DenseMetric,
    pairs: &[(usize, usize)],
    level: usize,
    tau: f64,
    tau_next: f64,
    pi: &Permutation,
) -> Result<LevelDecomposition> {
    let active = active_in(metric, pairs, tau);
    let restricted = pi.restrict(&active)?;
    let mis = greedy_mis(metric, &active, tau, &restricted)?;

    let mut center_of = BTreeMap::new();
    let mut clusters: BTreeMap<usize, Vec<usize>> = mis.iter().map(|&u| (u, Vec::new())).collect();
    for &v in &active {
        let c = *mis
            .iter()
            .min_by(|&&a, &&b| {
                metric
                    .dist(v, a)
                    .total_cmp(&metric.dist(v, b))
                    .then(a.cmp(&b))
            })
            .expect("a nonempty active set has a nonempty MIS");
        center_of.insert(v, c);
        clusters.get_mut(&c).expect("center is in the MIS").push(v);
    }
    for members in clusters.values_mut() {
        members.sort_unstable();
    }
    let next: std::collections::BTreeSet<usize> =
        active_in(metric, pairs, tau_next).into_iter().collect();
    let targets = active
        .iter()
        .copied()
        .filter(|v| !next.contains(v))
        .collect();
    Ok(LevelDecomposition {
        level,
        tau,
        active,
        mis,
        center_of,
        clusters,
        targets,
    })
}

/// Decompositions for every level of `frame` under one global permutation.
pub fn decompose_all(frame: &LevelFrame, pi: &Permutation) -> Result<Vec<LevelDecomposition>> {
    (0..frame.taus.len())
        .map(|i| {
            level_decomposition(
                &frame.metric,
                &frame.pairs,
                i,
                frame.taus[i],
                frame.tau_after(i),
                pi,
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Closest pair between two vertex sets, ties toward the lowest ids.
fn closest_pair(metric: &DenseMetric, a: &[usize], b: &[usize]) -> Edge {
    let mut best: Option<Edge> = None;
    for &x in a {
        for &y in b {
            let w = metric.dist(x, y);
            if best.map_or(true, |e| w < e.w) {
                best = Some(Edge { u: x, v: y, w });
            }
        }
    }
    best.expect("clusters are nonempty")
}

/// Spanning forest over supernode edges taken in lowest-id order, each
/// forest edge realized by the closest pair between the two clusters.
fn realize_forest(
    metric: &DenseMetric,
    clusters: &BTreeMap<usize, Vec<usize>>,
    mut supernode_edges: Vec<(usize, usize)>,
) -> Vec<Edge> {
    supernode_edges.sort_unstable();
    supernode_edges.dedup();
    let index: BTreeMap<usize, usize> = clusters.keys().enumerate().map(|(j, &u)| (u, j)).collect();
    let mut dsu = Dsu::new(index.len());
    let mut out = Vec::new();
    for (a, b) in supernode_edges {
        if dsu.union(index[&a], index[&b]) {
            out.push(closest_pair(metric, &clusters[&a], &clusters[&b]));
        }
    }
    out
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Edge sets `F_0..F_L` that connect every cluster of every level.
///
/// `F_0` joins each level-0 cluster to its center. It is empty exactly when
/// the level-0 ball graph has no edges.
pub fn build_connectivity_forest(
    metric: &DenseMetric,
    decomps: &[LevelDecomposition],
) -> Result<Vec<Vec<Edge>>> {
    for (i, d) in decomps.iter().enumerate() {
        if d.level != i {
            return Err(Error::input(format!(
                "decomposition {i} is labelled level {}",
                d.level
            )));
        }
    }
    for w in decomps.windows(2) {
        if w[1].active.iter().any(|v| !w[0].center_of.contains_key(v)) {
            return Err(Error::input(format!(
                "level {} is not nested in level {}",
                w[1].level, w[0].level
            )));
        }
    }
    let mut forest = Vec::with_capacity(decomps.len());
    if let Some(d0) = decomps.first() {
        forest.push(
            d0.center_of
                .iter()
                .filter(|(v, c)| v != c)
                .map(|(&v, &c)| Edge {
                    u: c,
                    v,
                    w: metric.dist(c, v),
                })
                .collect(),
        );
    }
    for w in decomps.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let edges = hi
            .active
            .iter()
            .map(|&v| (lo.center_of[&v], lo.center_of[&hi.center_of[&v]]))
            .filter(|(a, b)| a != b)
            .map(|(a, b)| ordered(a, b))
            .collect();
        forest.push(realize_forest(metric, &lo.clusters, edges));
    }
    Ok(forest)
}

/// Edge set `J_i` linking each target of level `i` to its match, given the
/// accumulated forest `f` (all levels).
pub fn build_target_links(
    metric: &DenseMetric,
    frame_partner: impl Fn(usize) -> Option<usize>,
    decomp: &LevelDecomposition,
    f: &[Edge],
) -> Result<Vec<Edge>> {
    let mut dsu = Dsu::new(metric.n());
    for e in f {
        dsu.union(e.u, e.v);
    }
    for (u, members) in &decomp.clusters {
        if let Some(v) = members.iter().find(|&&v| !dsu.same(*u, v)) {
            return Err(Error::Certification(format!(
                "level {}: vertex {v} is not connected to its center {u}",
                decomp.level
            )));
        }
    }
    let mut edges = Vec::new();
    for &s in &decomp.targets {
        let m = frame_partner(s).ok_or_else(|| Error::input(format!("target {s} has no match")))?;
        let (a, b) = match (decomp.center_of.get(&s), decomp.center_of.get(&m)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => {
                return Err(Error::input(format!(
                    "pair ({s}, {m}) is not active at level {}",
                    decomp.level
                )))
            }
        };
        if a != b {
            edges.push(ordered(a, b));
        }
    }
    Ok(realize_forest(metric, &decomp.clusters, edges))
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub taus: Vec<f64>,
    pub mis_sizes: Vec<usize>,
    pub f_levels: Vec<Vec<Edge>>,
    pub j_levels: Vec<Vec<Edge>>,
    pub pairs: Vec<(usize, usize)>,
}

impl Certificate {
    pub fn level_sum(&self) -> f64 {
        self.mis_sizes
            .iter()
            .zip(&self.taus)
            .map(|(&m, &t)| m as f64 * t)
            .fold(0.0, |a, b| a + b)
    }
}

/// Builds `F` and every `J_i` for `frame` under one global permutation.
pub fn build_certificate(frame: &LevelFrame, pi: &Permutation) -> Result<Certificate> {
    let decomps = decompose_all(frame, pi)?;
    let f_levels = build_connectivity_forest(&frame.metric, &decomps)?;
    let all_f: Vec<Edge> = f_levels.iter().flatten().copied().collect();
    let j_levels = decomps
        .iter()
        .map(|d| build_target_links(&frame.metric, |v| frame.partner(v), d, &all_f))
        .collect::<Result<_>>()?;
    Ok(Certificate {
        taus: frame.taus.clone(),
        mis_sizes: decomps.iter().map(|d| d.mis.len()).collect(),
        f_levels,
        j_levels,
        pairs: frame.pairs.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCheck {
    pub level: usize,
    pub tau: f64,
    pub mis_size: usize,
    pub cost_f: f64,
    pub cost_j: f64,
    /// `cost(F_i) <= 4 M_{i-1} tau_{i-1}` for `i >= 1`; `F_0` empty for `i = 0`.
    pub f_ok: bool,
    pub j_ok: bool,
    pub bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub levels: Vec<LevelCheck>,
    pub cost_f0: f64,
    pub total_cost: f64,
    pub level_sum: f64,
    /// `total_cost <= 6 * level_sum`.
    pub total_ok: bool,
    pub pair_connected: Vec<bool>,
    pub connected_ok: bool,
    /// Every check except emptiness of `F_0`.
    pub forest_bounds_ok: bool,
    pub all_ok: bool,
}

impl VerifyReport {
    /// The `F_{i+1}`, `J_i`, total and connectivity checks, with `F_0`
    /// emptiness reported separately.
    pub fn lemma_checks_ok(&self) -> bool {
        self.forest_bounds_ok && self.total_ok && self.connected_ok
    }
}

/// Recomputes every edge weight and checks the per-level bounds, the total
/// bound and connectivity of every pair.
pub fn verify_certificate(metric: &DenseMetric, cert: &Certificate) -> VerifyReport {
    let cost = |edges: &[Edge]| {
        edges
            .iter()
            .map(|e| metric.dist(e.u, e.v))
            .fold(0.0, |a, b| a + b)
    };
    let mut levels = Vec::new();
    for i in 0..cert.taus.len() {
        let cost_f = cert.f_levels.get(i).map_or(0.0, |f| cost(f));
        let cost_j = cert.j_levels.get(i).map_or(0.0, |j| cost(j));
        let f_ok = if i == 0 {
            cost_f == 0.0 && cert.f_levels.first().map_or(true, Vec::is_empty)
        } else {
            cost_f <= 4.0 * cert.mis_sizes[i - 1] as f64 * cert.taus[i - 1]
        };
        let j_ok = cost_j <= 2.0 * cert.mis_sizes[i] as f64 * cert.taus[i];
        levels.push(LevelCheck {
            level: i,
            tau: cert.taus[i],
            mis_size: cert.mis_sizes[i],
            cost_f,
            cost_j,
            f_ok,
            j_ok,
            bound_ok: f_ok && j_ok,
        });
    }
    let total_cost: f64 = levels
        .iter()
        .map(|l| l.cost_f + l.cost_j)
        .fold(0.0, |a, b| a + b);
    let level_sum = cert.level_sum();
    let total_ok = total_cost <= 6.0 * level_sum;

    let mut dsu = Dsu::new(metric.n());
    for e in cert.f_levels.iter().chain(&cert.j_levels).flatten() {
        dsu.union(e.u, e.v);
    }
    let pair_connected: Vec<bool> = cert.pairs.iter().map(|&(s, t)| dsu.same(s, t)).collect();
    let connected_ok = pair_connected.iter().all(|&c| c);
    let forest_bounds_ok = levels.iter().all(|l| l.j_ok && (l.level == 0 || l.f_ok));
    let cost_f0 = levels.first().map_or(0.0, |l| l.cost_f);
    let all_ok =
        forest_bounds_ok && total_ok && connected_ok && levels.first().map_or(true, |l| l.f_ok);
    VerifyReport {
        levels,
        cost_f0,
        total_cost,
        level_sum,
        total_ok,
        pair_connected,
        connected_ok,
        forest_bounds_ok,
        all_ok,
    }
}

/// Exact RGMIS size of every level's ball graph under `pi` restricted per level.
pub fn exact_level_mis_sizes(frame: &LevelFrame, pi: &Permutation) -> Result<Vec<usize>> {
    frame
        .taus
        .iter()
        .map(|&tau| {
            let active = frame.active(tau);
            greedy_mis(&frame.metric, &active, tau, &pi.restrict(&active)?).map(|m| m.len())
        })
        .collect()
}

/// `sum_i M_i tau_i` with exact RGMIS sizes under `pi`.
pub fn exact_level_mis_sum(frame: &LevelFrame, pi: &Permutation) -> Result<f64> {
    let sizes = exact_level_mis_sizes(frame, pi)?;
    Ok(sizes
        .iter()
        .zip(&frame.taus)
        .map(|(&m, &t)| m as f64 * t)
        .fold(0.0, |a, b| a + b))
}

/// Exact RGMIS size of each level of an estimator run, under the very
/// permutation that level's estimator drew.
pub fn report_level_mis_sizes(frame: &LevelFrame, report: &SfEstimateReport) -> Result<Vec<usize>> {
    report
        .levels
        .iter()
        .map(|level| match &level.permutation {
            None => Ok(0),
            Some(local) => {
                let graph = ball_graph(&frame.metric, &level.vertices, level.tau);
                rgmis_exact(&graph, local).map(|m| m.len())
            }
        })
        .collect()
}

/// Exact optimum over the frame's pairs, in the frame's units.
pub fn frame_opt(frame: &LevelFrame) -> Result<f64> {
    exact_opt_metric(&frame.metric, &frame.pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichVerdict {
    pub opt: f64,
    pub max_level_term: f64,
    pub level_sum: f64,
    /// `max_i M_i tau_i <= OPT`.
    pub lower_ok: bool,
    /// `OPT <= 6 sum_i M_i tau_i`.
    pub upper_ok: bool,
}

pub fn sandwich(frame: &LevelFrame, mis_sizes: &[usize], opt: f64) -> SandwichVerdict {
    let terms: Vec<f64> = mis_sizes
        .iter()
        .zip(&frame.taus)
        .map(|(&m, &t)| m as f64 * t)
        .collect();
    let max_level_term = terms.iter().copied().fold(0.0, f64::max);
    let level_sum: f64 = terms.iter().fold(0.0, |a, b| a + b);
    SandwichVerdict {
        opt,
        max_level_term,
        level_sum,
        lower_ok: max_level_term <= opt,
        upper_ok: opt <= 6.0 * level_sum,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyOutcome {
    pub seed: u64,
    pub scale: Scale,
    pub k_eff: usize,
    pub verify: VerifyReport,
    /// Present when the instance is within the exact solver's limits.
    pub sandwich: Option<SandwichVerdict>,
}

impl CertifyOutcome {
    pub fn passed(&self) -> bool {
        self.verify.lemma_checks_ok()
            && self
                .sandwich
                .as_ref()
                .map_or(true, |s| s.lower_ok && s.upper_ok)
    }
}

/// Full certification of `instance` in the estimator's working frame with a
/// permutation drawn from `seed`.
pub fn certify(instance: &MetricInstance, seed: u64) -> Result<CertifyOutcome> {
    let frame = LevelFrame::working(instance)?;
    let pi = random_permutation(instance.n(), seed)?;
    let cert = build_certificate(&frame, &pi)?;
    let verify = verify_certificate(&frame.metric, &cert);
    let sandwich = match frame_opt(&frame) {
        Ok(opt) => Some(sandwich(&frame, &cert.mis_sizes, opt)),
        Err(Error::TooLarge(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(CertifyOutcome {
        seed,
        scale: frame.scale,
        k_eff: frame.pairs.len(),
        verify,
        sandwich,
    })
}
