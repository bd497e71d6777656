//! Metric instances: a finite (pseudo)metric plus the terminal pairs.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// Relative slack for the triangle check; coordinates-derived metrics pick
/// up rounding in the square root.
const TRIANGLE_SLACK: f64 = 1e-12;
const EXHAUSTIVE_CHECK_LIMIT: usize = 64;
const SAMPLED_TRIPLES: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// Row-major symmetric `n x n` table.
    Matrix { n: usize, dist: Vec<f64> },
    /// Points on the real line.
    Line(Vec<f64>),
    /// Points in `dim`-dimensional Euclidean space, row-major.
    Euclid { dim: usize, coords: Vec<f64> },
}

impl Metric {
    pub fn len(&self) -> usize {
        match self {
            Metric::Matrix { n, .. } => *n,
            Metric::Line(xs) => xs.len(),
            Metric::Euclid { dim, coords } => coords.len() / dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn distance(&self, u: usize, v: usize) -> f64 {
        match self {
            Metric::Matrix { n, dist } => dist[u * n + v],
            Metric::Line(xs) => (xs[u] - xs[v]).abs(),
            Metric::Euclid { dim, coords } => {
                let a = &coords[u * dim..(u + 1) * dim];
                let b = &coords[v * dim..(v + 1) * dim];
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }

    /// Appends a copy of `v` at distance 0 from it and returns the copy's id.
    fn duplicate(&mut self, v: usize) -> usize {
        match self {
            Metric::Matrix { n, dist } => {
                let old = *n;
                let mut next = Vec::with_capacity((old + 1) * (old + 1));
                for row in 0..old {
                    next.extend_from_slice(&dist[row * old..(row + 1) * old]);
                    next.push(dist[row * old + v]);
                }
                next.extend_from_slice(&dist[v * old..(v + 1) * old]);
                next.push(0.0);
                *dist = next;
                *n = old + 1;
                old
            }
            Metric::Line(xs) => {
                xs.push(xs[v]);
                xs.len() - 1
            }
            Metric::Euclid { dim, coords } => {
                let row: Vec<f64> = coords[v * *dim..(v + 1) * *dim].to_vec();
                coords.extend(row);
                coords.len() / *dim - 1
            }
        }
    }

    fn check_shape(&self) -> Result<()> {
        match self {
            Metric::Matrix { n, dist } => {
                if dist.len() != n * n {
                    return Err(Error::input(format!(
                        "distance table has {} entries, expected {}",
                        dist.len(),
                        n * n
                    )));
                }
                for u in 0..*n {
                    if dist[u * n + u] != 0.0 {
                        return Err(Error::input(format!("w({u},{u}) is not zero")));
                    }
                    for v in 0..*n {
                        let w = dist[u * n + v];
                        if !w.is_finite() || w < 0.0 {
                            return Err(Error::input(format!(
                                "w({u},{v}) = {w} is not a finite nonnegative number"
                            )));
                        }
                        if w != dist[v * n + u] {
                            return Err(Error::input(format!("w({u},{v}) != w({v},{u})")));
                        }
                    }
                }
            }
            Metric::Line(xs) => {
                if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
                    return Err(Error::input(format!("coordinate {x} is not finite")));
                }
            }
            Metric::Euclid { dim, coords } => {
                if *dim == 0 {
                    return Err(Error::input("euclidean dimension must be at least 1"));
                }
                if coords.len() % dim != 0 {
                    return Err(Error::input(
                        "coordinate list is not a multiple of the dimension",
                    ));
                }
                if let Some(x) = coords.iter().find(|x| !x.is_finite()) {
                    return Err(Error::input(format!("coordinate {x} is not finite")));
                }
            }
        }
        Ok(())
    }

    /// Checks the triangle inequality: exhaustively up to 64 points,
    /// over a fixed pseudo-random sample of triples beyond that.
    pub fn check_triangle_inequality(&self) -> Result<()> {
        let n = self.len();
        let check = |u: usize, v: usize, x: usize| -> Result<()> {
            let direct = self.distance(u, v);
            let detour = self.distance(u, x) + self.distance(x, v);
            if direct > detour * (1.0 + TRIANGLE_SLACK) + TRIANGLE_SLACK {
                return Err(Error::input(format!(
                    "triangle inequality violated: w({u},{v}) = {direct} > w({u},{x}) + w({x},{v}) = {detour}"
                )));
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_CHECK_LIMIT {
            for u in 0..n {
                for v in u + 1..n {
                    for x in 0..n {
                        check(u, v, x)?;
                    }
                }
            }
        } else {
            let mut r = rng::seeded(0x7472_6961_6e67_6c65);
            for _ in 0..SAMPLED_TRIPLES {
                check(r.gen_range(0..n), r.gen_range(0..n), r.gen_range(0..n))?;
            }
        }
        Ok(())
    }
}

/// A validated metric with `k` terminal pairs whose `2k` endpoints are
/// pairwise distinct vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricInstance {
    metric: Metric,
    pairs: Vec<(usize, usize)>,
    origin: Vec<usize>,
}

impl MetricInstance {
    /// Validates `metric` and `pairs`.
    ///
    /// A vertex named by more than one pair slot is duplicated: every later
    /// occurrence is replaced by a fresh copy at distance 0 from the
    /// original, so the resulting terminals are distinct.
    pub fn new(metric: Metric, pairs: Vec<(usize, usize)>) -> Result<Self> {
        metric.check_shape()?;
        let n = metric.len();
        if n == 0 {
            return Err(Error::input("instance has no vertices"));
        }
        if pairs.len() > n {
            return Err(Error::input(format!(
                "{} pairs exceed the vertex count {n}",
                pairs.len()
            )));
        }
        for &(s, t) in &pairs {
            if s >= n || t >= n {
                return Err(Error::input(format!(
                    "pair ({s},{t}) names a vertex outside 0..{n}"
                )));
            }
        }
        metric.check_triangle_inequality()?;

        let mut metric = metric;
        let mut origin: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        let mut take = |v: usize, metric: &mut Metric, origin: &mut Vec<usize>| -> usize {
            if used[v] {
                let copy = metric.duplicate(v);
                origin.push(origin[v]);
                copy
            } else {
                used[v] = true;
                v
            }
        };
        let pairs = pairs
            .into_iter()
            .map(|(s, t)| {
                let s = take(s, &mut metric, &mut origin);
                let t = take(t, &mut metric, &mut origin);
                (s, t)
            })
            .collect();
        Ok(Self {
            metric,
            pairs,
            origin,
        })
    }

    pub fn n(&self) -> usize {
        self.metric.len()
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Vertex this one was copied from (itself for original vertices).
    pub fn origin(&self, v: usize) -> usize {
        self.origin[v]
    }

    /// Uncounted distance read. Reserved for baselines and certification;
    /// algorithms go through [`crate::oracle::CountingDistanceOracle`].
    #[inline]
    pub fn distance(&self, u: usize, v: usize) -> f64 {
        self.metric.distance(u, v)
    }

    /// Same metric, different pair list. The pairs must already be disjoint.
    pub fn with_pairs(&self, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = vec![false; self.n()];
        for &(s, t) in &pairs {
            for v in [s, t] {
                if v >= self.n() || std::mem::replace(&mut seen[v], true) {
                    return Err(Error::input(format!(
                        "pair endpoint {v} is out of range or repeated"
                    )));
                }
            }
        }
        Ok(Self {
            metric: self.metric.clone(),
            pairs,
            origin: self.origin.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_terminals_are_duplicated() {
        let inst =
            MetricInstance::new(Metric::Line(vec![0.0, 2.0, 4.0]), vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(inst.n(), 4);
        assert_eq!(inst.pairs(), &[(0, 1), (3, 2)]);
        assert_eq!(inst.distance(3, 1), 0.0);
        assert_eq!(inst.distance(3, 2), 2.0);
        assert_eq!(inst.origin(3), 1);
    }

    #[test]
    fn matrix_duplication_copies_row() {
        let m = Metric::Matrix {
            n: 3,
            dist: vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.5, 2.0, 1.5, 0.0],
        };
        let inst = MetricInstance::new(m, vec![(0, 0)]).unwrap();
        assert_eq!(inst.n(), 4);
        assert_eq!(inst.pairs(), &[(0, 3)]);
        for v in 0..3 {
            assert_eq!(inst.distance(3, v), inst.distance(0, v));
            assert_eq!(inst.distance(v, 3), inst.distance(v, 0));
        }
        assert_eq!(inst.distance(3, 3), 0.0);
    }

    #[test]
    fn rejects_bad_matrices() {
        let asym = Metric::Matrix {
            n: 2,
            dist: vec![0.0, 1.0, 2.0, 0.0],
        };
        assert!(MetricInstance::new(asym, vec![]).is_err());
        let no_triangle = Metric::Matrix {
            n: 3,
            dist: vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0],
        };
        assert!(MetricInstance::new(no_triangle, vec![]).is_err());
        let diag = Metric::Matrix {
            n: 1,
            dist: vec![1.0],
        };
        assert!(MetricInstance::new(diag, vec![]).is_err());
    }

    #[test]
    fn rejects_bad_pairs() {
        let line = || Metric::Line(vec![0.0, 1.0]);
        assert!(MetricInstance::new(line(), vec![(0, 2)]).is_err());
        assert!(MetricInstance::new(line(), vec![(0, 1), (0, 1), (0, 1)]).is_err());
    }

    #[test]
    fn euclid_distance() {
        let m = Metric::Euclid {
            dim: 2,
            coords: vec![0.0, 0.0, 3.0, 4.0],
        };
        assert_eq!(m.distance(0, 1), 5.0);
        assert_eq!(m.distance(1, 1), 0.0);
    }
}
