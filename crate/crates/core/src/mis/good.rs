//! Good permutations of the three-layer augmented graph used to bound the
//! adjacency-matrix oracle's cost by the neighbor-list oracle's.

use crate::error::{Error, Result};
use crate::oracle::Graph;
use crate::perm::Permutation;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    /// The original vertices `V`.
    Base,
    /// `V2`: 2n extra vertices adjacent to every base and top vertex.
    Middle,
    /// `V3`: n extra vertices adjacent to every middle vertex.
    Top,
}

/// Layer assignment for the augmented graph of an `n`-vertex graph:
/// ids `0..n` base, `n..3n` middle, `3n..4n` top.
pub fn augmented_layers(n: usize) -> Vec<Layer> {
    let mut layers = vec![Layer::Base; n];
    layers.extend(std::iter::repeat_n(Layer::Middle, 2 * n));
    layers.extend(std::iter::repeat_n(Layer::Top, n));
    layers
}

/// The augmented graph `H` on `4n` vertices: `graph` on the base layer,
/// middle joined completely to base and top, no edges inside middle or top.
pub fn augmented_graph(graph: &Graph) -> Graph {
    let n = graph.n();
    let mut h = Graph::empty(4 * n);
    for (u, v) in graph.edges() {
        h.insert(u, v);
    }
    for m in n..3 * n {
        for b in 0..n {
            h.insert(m, b);
        }
        for t in 3 * n..4 * n {
            h.insert(m, t);
        }
    }
    h
}

/// True iff `pi_h` starts with a top vertex and every prefix holds at least
/// as many middle as base vertices.
pub fn is_good_permutation(pi_h: &Permutation, layer_of: &[Layer]) -> Result<bool> {
    let count = |l: Layer| layer_of.iter().filter(|&&x| x == l).count();
    let (base, middle, top) = (count(Layer::Base), count(Layer::Middle), count(Layer::Top));
    if middle != 2 * base || top != base {
        return Err(Error::input(format!(
            "layer sizes ({base}, {middle}, {top}) are not (n, 2n, n)"
        )));
    }
    if pi_h.len() != layer_of.len() || pi_h.order().iter().any(|&v| v >= layer_of.len()) {
        return Err(Error::input(
            "permutation does not cover the layered vertex set",
        ));
    }
    Ok(good_prefix(pi_h.order(), layer_of))
}

fn good_prefix(order: &[usize], layer_of: &[Layer]) -> bool {
    match order.first() {
        Some(&v) if layer_of[v] == Layer::Top => {}
        _ => return false,
    }
    let mut lead = 0i64;
    for &v in order {
        match layer_of[v] {
            Layer::Middle => lead += 1,
            Layer::Base => {
                lead -= 1;
                if lead < 0 {
                    return false;
                }
            }
            Layer::Top => {}
        }
    }
    true
}

/// Monte-Carlo fraction of uniform permutations of the `4n` layered
/// vertices that are good.
pub fn good_permutation_rate(n: usize, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::input("need at least one trial"));
    }
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    let layers = augmented_layers(n);
    let mut r = rng::seeded(seed);
    let good = (0..trials)
        .filter(|_| good_prefix(Permutation::random_with(4 * n, &mut r).order(), &layers))
        .count();
    Ok(good as f64 / trials as f64)
}

/// Among good permutations drawn in `trials` attempts, counts which base
/// vertex comes first in the restriction to the base layer. Returns the
/// number of good draws and the per-vertex counts.
pub fn conditional_first_base(n: usize, trials: usize, seed: u64) -> (usize, Vec<usize>) {
    let layers = augmented_layers(n);
    let mut r = rng::seeded(seed);
    let mut counts = vec![0; n];
    let mut good = 0;
    for _ in 0..trials {
        let pi = Permutation::random_with(4 * n, &mut r);
        if good_prefix(pi.order(), &layers) {
            good += 1;
            let first = pi
                .order()
                .iter()
                .copied()
                .find(|&v| v < n)
                .expect("base layer nonempty");
            counts[first] += 1;
        }
    }
    (good, counts)
}
