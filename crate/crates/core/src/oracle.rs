//! Pay-per-lookup access to distances and adjacency.
//!
//! Every read made by an algorithm goes through one of these oracles and
//! bumps a counter. Counting lives here, at the boundary, and nowhere else.

use std::cell::Cell;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::MetricInstance;

/// Positive rational multiplier `num / den`, applied as `w * num / den`.
///
/// Applying it in that order makes `scale(d)` with `Scale::ratio(2.0, d)`
/// return exactly `2.0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scale {
    pub num: f64,
    pub den: f64,
}

impl Scale {
    pub const ONE: Scale = Scale { num: 1.0, den: 1.0 };

    pub fn ratio(num: f64, den: f64) -> Result<Self> {
        if !(num > 0.0 && den > 0.0 && num.is_finite() && den.is_finite()) {
            return Err(Error::input(format!(
                "scale {num}/{den} is not a positive ratio"
            )));
        }
        Ok(Self { num, den })
    }

    #[inline]
    pub fn apply(&self, w: f64) -> f64 {
        w * self.num / self.den
    }

    /// Maps a working-unit value back to original units.
    pub fn invert(&self, w: f64) -> f64 {
        w * self.den / self.num
    }

    pub fn factor(&self) -> f64 {
        self.num / self.den
    }
}

impl Default for Scale {
    fn default() -> Self {
        Scale::ONE
    }
}

pub struct CountingDistanceOracle<'a> {
    instance: &'a MetricInstance,
    counter: Cell<u64>,
    scale: Scale,
}

impl<'a> CountingDistanceOracle<'a> {
    pub fn new(instance: &'a MetricInstance) -> Self {
        Self {
            instance,
            counter: Cell::new(0),
            scale: Scale::ONE,
        }
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }

    pub fn instance(&self) -> &'a MetricInstance {
        self.instance
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// Changes the multiplier for subsequent reads. The counter is untouched.
    pub fn set_scale(&mut self, scale: Scale) {
        self.scale = scale;
    }

    /// Scaled `w(u, v)`; costs one query, including when `u == v`.
    pub fn distance_query(&self, u: usize, v: usize) -> Result<f64> {
        let n = self.n();
        if u >= n || v >= n {
            return Err(Error::input(format!(
                "vertex pair ({u},{v}) outside 0..{n}"
            )));
        }
        Ok(self.read(u, v))
    }

    #[inline]
    pub(crate) fn read(&self, u: usize, v: usize) -> f64 {
        self.counter.set(self.counter.get() + 1);
        self.scale.apply(self.instance.distance(u, v))
    }

    pub fn query_count(&self) -> u64 {
        self.counter.get()
    }
}

/// Simple undirected graph stored as a packed adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::input(format!(
                "edge ({u},{v}) outside 0..{}",
                self.n
            )));
        }
        if u == v {
            return Err(Error::input(format!("self-loop at {u}")));
        }
        self.insert(u, v);
        Ok(())
    }

    #[inline]
    pub(crate) fn insert(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1 << (u % 64);
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    /// Packed adjacency row of `u`.
    pub fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(u).iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + bit)
            })
        })
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }
}

enum Backing<'a> {
    Explicit(&'a Graph),
    /// Graph on `vertices` (local ids are positions in the list) with an
    /// edge iff the scaled distance is strictly below `threshold`.
    Derived {
        dist: &'a CountingDistanceOracle<'a>,
        vertices: Vec<usize>,
        threshold: f64,
    },
}

pub struct CountingAdjacencyOracle<'a> {
    backing: Backing<'a>,
    probes: Cell<u64>,
    budget: Option<u64>,
}

impl<'a> CountingAdjacencyOracle<'a> {
    pub fn explicit(graph: &'a Graph) -> Self {
        Self {
            backing: Backing::Explicit(graph),
            probes: Cell::new(0),
            budget: None,
        }
    }

    /// View of `vertices` under `dist` where `(u, v)` is an edge iff
    /// `w(u, v) < threshold`. Each probe is exactly one distance query.
    pub fn derived(
        dist: &'a CountingDistanceOracle<'a>,
        vertices: Vec<usize>,
        threshold: f64,
    ) -> Self {
        Self {
            backing: Backing::Derived {
                dist,
                vertices,
                threshold,
            },
            probes: Cell::new(0),
            budget: None,
        }
    }

    /// Refuses probes once `limit` of them have been answered.
    pub fn with_budget(mut self, limit: u64) -> Self {
        self.budget = Some(limit);
        self
    }

    pub fn n(&self) -> usize {
        match &self.backing {
            Backing::Explicit(g) => g.n(),
            Backing::Derived { vertices, .. } => vertices.len(),
        }
    }

    /// Underlying vertex id of local vertex `u` (identity for explicit graphs).
    pub fn vertex(&self, u: usize) -> usize {
        match &self.backing {
            Backing::Explicit(_) => u,
            Backing::Derived { vertices, .. } => vertices[u],
        }
    }

    pub fn adjacency_query(&self, u: usize, v: usize) -> Result<bool> {
        let n = self.n();
        if u >= n || v >= n {
            return Err(Error::input(format!(
                "vertex pair ({u},{v}) outside 0..{n}"
            )));
        }
        if u == v {
            return Err(Error::input(format!(
                "adjacency query ({u},{u}) on a simple graph"
            )));
        }
        self.probe(u, v)
    }

    #[inline]
    pub(crate) fn probe(&self, u: usize, v: usize) -> Result<bool> {
        let used = self.probes.get();
        if let Some(limit) = self.budget {
            if used >= limit {
                return Err(Error::BudgetExhausted { limit });
            }
        }
        self.probes.set(used + 1);
        Ok(match &self.backing {
            Backing::Explicit(g) => g.has_edge(u, v),
            Backing::Derived {
                dist,
                vertices,
                threshold,
            } => dist.read(vertices[u], vertices[v]) < *threshold,
        })
    }

    /// Probes answered by this oracle.
    pub fn probes(&self) -> u64 {
        self.probes.get()
    }

    /// The counter this oracle reports against: its own probes for an
    /// explicit graph, the backing distance counter for a derived one.
    pub fn query_count(&self) -> u64 {
        match &self.backing {
            Backing::Explicit(_) => self.probes.get(),
            Backing::Derived { dist, .. } => dist.query_count(),
        }
    }
}
