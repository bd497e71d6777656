//! Random-greedy maximal independent set (RGMIS) oracles and size
//! estimators in the adjacency-matrix model.

mod good;

pub use good::{
    augmented_graph, augmented_layers, conditional_first_base, good_permutation_rate,
    is_good_permutation, Layer,
};

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{CountingAdjacencyOracle, Graph};
use crate::perm::Permutation;
use crate::rng::{self, Rng};

/// Cost of one vertex-oracle query, including all recursion below it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OracleCallStats {
    /// Oracle invocations, the root included.
    pub recursive_calls: u64,
    /// Adjacency probes consumed.
    pub matrix_queries: u64,
    pub max_depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingDetail {
    /// Size of the vertex set sampled from.
    pub population: usize,
    pub s: f64,
    pub samples: u64,
    pub hits: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MisEstimate {
    pub value: f64,
    /// Vertices placed in the MIS explicitly, in permutation order.
    pub exact_prefix: Vec<usize>,
    #[serde(skip)]
    pub permutation: Permutation,
    pub queries: u64,
    pub epsilon: f64,
    /// Present when the value came (partly) from sampling.
    pub sampling: Option<SamplingDetail>,
}

impl MisEstimate {
    /// True when the value is the exact RGMIS size for `permutation`.
    pub fn is_exact(&self) -> bool {
        self.sampling.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MisConfig {
    pub epsilon: f64,
    /// Memoize resolved vertices across oracle calls.
    pub cache: bool,
}

impl MisConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            epsilon,
            cache: false,
        })
    }

    pub fn with_cache(mut self, cache: bool) -> Self {
        self.cache = cache;
        self
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::input(format!("epsilon {epsilon} is not in (0,1)")));
    }
    Ok(())
}

/// RGMIS(π) with free access to the whole graph. `pi` must cover all of it.
pub fn rgmis_exact(graph: &Graph, pi: &Permutation) -> Result<Vec<usize>> {
    if pi.len() != graph.n() || pi.order().iter().any(|&v| v >= graph.n()) {
        return Err(Error::input(format!(
            "permutation of length {} does not cover the {} graph vertices",
            pi.len(),
            graph.n()
        )));
    }
    Ok(rgmis_induced(graph, pi))
}

/// RGMIS of the subgraph induced by the domain of `pi`.
pub fn rgmis_induced(graph: &Graph, pi: &Permutation) -> Vec<usize> {
    let words = graph.n().div_ceil(64);
    let mut blocked = vec![0u64; words];
    let mut set = Vec::new();
    for &v in pi.order() {
        if blocked[v / 64] >> (v % 64) & 1 == 1 {
            continue;
        }
        set.push(v);
        for (b, r) in blocked.iter_mut().zip(graph.row(v)) {
            *b |= r;
        }
    }
    set
}

/// Results of earlier vertex-oracle calls, shared across queries when
/// caching is enabled.
#[derive(Debug, Clone)]
pub struct VertexMemo {
    state: Vec<u8>,
}

impl VertexMemo {
    const UNKNOWN: u8 = 0;
    const IN: u8 = 1;
    const OUT: u8 = 2;

    pub fn new(n: usize) -> Self {
        Self {
            state: vec![Self::UNKNOWN; n],
        }
    }

    fn get(&self, v: usize) -> Option<bool> {
        match self.state[v] {
            Self::IN => Some(true),
            Self::OUT => Some(false),
            _ => None,
        }
    }

    fn set(&mut self, v: usize, member: bool) {
        self.state[v] = if member { Self::IN } else { Self::OUT };
    }
}

struct Frame {
    v: usize,
    rank: usize,
    pos: usize,
}

/// Is `v` in RGMIS(π)? Scans π(1..k-1) in rank order, probing adjacency to
/// `v` and recursing on every lower-rank neighbor until one is found in
/// the set. Recursion runs on an explicit stack.
pub fn mis_vertex_oracle(
    adj: &CountingAdjacencyOracle<'_>,
    pi: &Permutation,
    v: usize,
    mut memo: Option<&mut VertexMemo>,
) -> Result<(bool, OracleCallStats)> {
    let rank = pi
        .position(v)
        .ok_or_else(|| Error::input(format!("vertex {v} is not in the permutation")))?;
    let start = adj.probes();
    let mut stats = OracleCallStats {
        recursive_calls: 1,
        matrix_queries: 0,
        max_depth: 1,
    };
    if let Some(known) = memo.as_deref().and_then(|m| m.get(v)) {
        return Ok((known, stats));
    }

    let mut stack = vec![Frame { v, rank, pos: 0 }];
    // Answer of the child frame just popped, if any.
    let mut returned: Option<bool> = None;
    loop {
        let top = stack.len() - 1;
        let mut answer = None;
        if let Some(child) = returned.take() {
            if child {
                answer = Some(false);
            } else {
                stack[top].pos += 1;
            }
        }
        while answer.is_none() && stack[top].pos < stack[top].rank {
            let frame = &stack[top];
            let u = pi.at(frame.pos);
            if !adj.probe(u, frame.v)? {
                stack[top].pos += 1;
                continue;
            }
            stats.recursive_calls += 1;
            match memo.as_deref().and_then(|m| m.get(u)) {
                Some(true) => answer = Some(false),
                Some(false) => stack[top].pos += 1,
                None => {
                    let pos = frame.pos;
                    stack.push(Frame {
                        v: u,
                        rank: pos,
                        pos: 0,
                    });
                    stats.max_depth = stats.max_depth.max(stack.len());
                    break;
                }
            }
        }
        if stack.len() > top + 1 {
            continue;
        }
        let member = answer.unwrap_or(true);
        let done = stack.pop().expect("frame");
        if let Some(m) = memo.as_deref_mut() {
            m.set(done.v, member);
        }
        if stack.is_empty() {
            stats.matrix_queries = adj.probes() - start;
            return Ok((member, stats));
        }
        returned = Some(member);
    }
}

/// Lists every vertex on which the neighbor-list oracle is invoked, root
/// first, together with the root's answer.
///
/// Reads the graph freely: this is the validation path, not an algorithm.
pub fn abstract_oracle_calls(
    graph: &Graph,
    pi: &Permutation,
    v: usize,
) -> Result<(bool, Vec<usize>, usize)> {
    struct Node {
        lower: Vec<usize>,
        idx: usize,
    }
    let lower_neighbors = |x: usize| -> Vec<usize> {
        let rx = pi.position(x).expect("in domain");
        let mut lower: Vec<usize> = graph
            .neighbors(x)
            .filter(|&u| pi.position(u).is_some_and(|ru| ru < rx))
            .collect();
        lower.sort_by_key(|&u| pi.position(u));
        lower
    };
    if !pi.contains(v) || v >= graph.n() {
        return Err(Error::input(format!(
            "vertex {v} is not in the permutation"
        )));
    }
    let mut calls = vec![v];
    let mut depth = 1;
    let mut stack = vec![Node {
        lower: lower_neighbors(v),
        idx: 0,
    }];
    let mut returned: Option<bool> = None;
    loop {
        let top = stack.len() - 1;
        let mut answer = None;
        match returned.take() {
            Some(true) => answer = Some(false),
            Some(false) => stack[top].idx += 1,
            None => {}
        }
        if answer.is_none() {
            let node = &stack[top];
            if let Some(&u) = node.lower.get(node.idx) {
                calls.push(u);
                stack.push(Node {
                    lower: lower_neighbors(u),
                    idx: 0,
                });
                depth = depth.max(stack.len());
                continue;
            }
        }
        stack.pop();
        let member = answer.unwrap_or(true);
        if stack.is_empty() {
            return Ok((member, calls, depth));
        }
        returned = Some(member);
    }
}

/// Neighbor-list oracle: visits lower-rank neighbors sorted by rank and
/// recurses on each. Adjacency reads here are free.
pub fn abstract_oracle_reference(
    graph: &Graph,
    pi: &Permutation,
    v: usize,
) -> Result<(bool, OracleCallStats)> {
    let (member, calls, depth) = abstract_oracle_calls(graph, pi, v)?;
    Ok((
        member,
        OracleCallStats {
            recursive_calls: calls.len() as u64,
            matrix_queries: 0,
            max_depth: depth,
        },
    ))
}

/// Sample count `r = ceil(27 s ln(n) / eps^2)`.
pub fn addmul_sample_count(n: usize, s: f64, epsilon: f64) -> u64 {
    (27.0 * s * (n as f64).ln() / (epsilon * epsilon)).ceil() as u64
}

/// Multiplicative-additive estimate of |RGMIS(π)| on the domain of `pi`:
/// samples `r` vertices with replacement, asks the vertex oracle about each
/// and returns `(1 + eps/2) (hits n / r + eps n / (3 s))`.
pub fn alg_add_mul(
    adj: &CountingAdjacencyOracle<'_>,
    pi: &Permutation,
    s: f64,
    config: &MisConfig,
    rng: &mut Rng,
) -> Result<MisEstimate> {
    check_epsilon(config.epsilon)?;
    if !(s > 0.0) {
        return Err(Error::input(format!("s = {s} must be positive")));
    }
    let n = pi.len();
    if n < 2 {
        return Err(Error::input("sampling needs at least two vertices"));
    }
    let eps = config.epsilon;
    let r = addmul_sample_count(n, s, eps);
    let start = adj.probes();
    let mut memo = config.cache.then(|| VertexMemo::new(adj.n()));
    let mut hits = 0u64;
    for _ in 0..r {
        let v = pi.at(rng.gen_range(0..n));
        let (member, _) = mis_vertex_oracle(adj, pi, v, memo.as_mut())?;
        hits += member as u64;
    }
    let nf = n as f64;
    let value = (1.0 + eps / 2.0) * (hits as f64 / r as f64 * nf + eps * nf / (3.0 * s));
    Ok(MisEstimate {
        value,
        exact_prefix: Vec::new(),
        permutation: pi.clone(),
        queries: adj.probes() - start,
        epsilon: eps,
        sampling: Some(SamplingDetail {
            population: n,
            s,
            samples: r,
            hits,
        }),
    })
}

/// Greedy budget `s = ceil(sqrt(n))`.
pub fn greedy_budget(n: usize) -> usize {
    let mut s = (n as f64).sqrt().ceil() as usize;
    while s > 0 && (s - 1) * (s - 1) >= n {
        s -= 1;
    }
    while s * s < n {
        s += 1;
    }
    s
}

/// (1+eps)-approximation of |RGMIS(π)| for a uniformly random π.
///
/// Builds the set explicitly for up to `ceil(sqrt n)` members, deactivating
/// each chosen vertex's closed neighborhood with `n - 1` probes. If the
/// budget is not reached the answer is exact; otherwise the remainder is
/// estimated by [`alg_add_mul`] on the still-active vertices under the
/// restricted permutation.
pub fn alg_mul(
    adj: &CountingAdjacencyOracle<'_>,
    config: &MisConfig,
    seed: u64,
) -> Result<MisEstimate> {
    check_epsilon(config.epsilon)?;
    let n = adj.n();
    if n == 0 {
        return Err(Error::input("graph has no vertices"));
    }
    let mut rng = rng::seeded(seed);
    let pi = Permutation::random_with(n, &mut rng);
    let s = greedy_budget(n);
    let start = adj.probes();

    let mut active = vec![true; n];
    let mut prefix = Vec::new();
    for &chosen in pi.order() {
        if prefix.len() >= s {
            break;
        }
        if !active[chosen] {
            continue;
        }
        prefix.push(chosen);
        active[chosen] = false;
        for v in 0..n {
            if v != chosen && adj.probe(chosen, v)? {
                active[v] = false;
            }
        }
    }

    let mut estimate = MisEstimate {
        value: prefix.len() as f64,
        exact_prefix: Vec::new(),
        permutation: pi.clone(),
        queries: 0,
        epsilon: config.epsilon,
        sampling: None,
    };
    if prefix.len() >= s {
        let rest = pi.restrict_by(|v| active[v]);
        match rest.len() {
            0 => {}
            // a lone active vertex has no active neighbor, so it joins the set
            1 => estimate.value += 1.0,
            _ => {
                let tail = alg_add_mul(adj, &rest, s as f64, config, &mut rng)?;
                estimate.value += tail.value;
                estimate.sampling = tail.sampling;
            }
        }
    }
    estimate.exact_prefix = prefix;
    estimate.queries = adj.probes() - start;
    Ok(estimate)
}

/// Default restart count `ceil(3 ln n)`, at least 1.
pub fn hp_instances(n: usize) -> usize {
    ((3.0 * (n.max(1) as f64).ln()).ceil() as usize).max(1)
}

#[derive(Debug, Clone)]
pub struct HpOutcome {
    pub estimate: MisEstimate,
    /// Index of the trial that finished first.
    pub winner: usize,
    /// Probes each trial had made when the winner finished.
    pub trial_queries: Vec<u64>,
    pub total_queries: u64,
}

/// Runs `instances` independent [`alg_mul`] trials interleaved round-robin,
/// one probe per trial per round, and returns the first to finish.
///
/// Each trial draws its oracle from `build` and its seed from
/// `derive_seed(seed, i)`, so trial 0 reproduces `alg_mul(.., seed)`. The
/// interleaving is realized sequentially: a trial is run under a budget
/// that lets it finish only if it would have beaten the current leader,
/// then every loser is replayed under exactly the probe allowance it
/// would have had when the winner completed.
pub fn alg_mul_hp<'a>(
    mut build: impl FnMut() -> CountingAdjacencyOracle<'a>,
    config: &MisConfig,
    seed: u64,
    instances: usize,
) -> Result<HpOutcome> {
    if instances == 0 {
        return Err(Error::input("need at least one instance"));
    }
    let trial_seed = |i: usize| rng::derive_seed(seed, i as u64);
    let mut leader: Option<(usize, MisEstimate)> = None;
    for i in 0..instances {
        let adj = build();
        let adj = match &leader {
            None => adj,
            Some((_, best)) if best.queries == 0 => continue,
            Some((_, best)) => adj.with_budget(best.queries - 1),
        };
        match alg_mul(&adj, config, trial_seed(i)) {
            Ok(est) => leader = Some((i, est)),
            Err(Error::BudgetExhausted { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let (winner, estimate) = leader.expect("trial 0 always completes");
    let q = estimate.queries;

    let mut trial_queries = Vec::with_capacity(instances);
    for i in 0..instances {
        if i == winner {
            trial_queries.push(q);
            continue;
        }
        // trials before the winner in round order got one more slice
        let share = if i < winner { q } else { q.saturating_sub(1) };
        let adj = build().with_budget(share);
        match alg_mul(&adj, config, trial_seed(i)) {
            Ok(_) | Err(Error::BudgetExhausted { .. }) => trial_queries.push(adj.probes()),
            Err(e) => return Err(e),
        }
    }
    let total_queries = trial_queries.iter().sum();
    Ok(HpOutcome {
        estimate,
        winner,
        trial_queries,
        total_queries,
    })
}
