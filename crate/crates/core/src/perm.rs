use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{self, Rng};

const ABSENT: usize = usize::MAX;

/// An ordering of a set of vertex ids. Position 0 is rank 1.
///
/// The domain need not be `0..n`: restrictions keep the original ids, so
/// rank lookup is a sparse table indexed by vertex id.
#[derive(Debug, Clone)]
pub struct Permutation {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl PartialEq for Permutation {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
    }
}

impl Eq for Permutation {}

impl Permutation {
    /// Builds a permutation from an explicit order of distinct ids.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let span = order.iter().max().map_or(0, |&m| m + 1);
        let mut rank = vec![ABSENT; span];
        for (pos, &v) in order.iter().enumerate() {
            if rank[v] != ABSENT {
                return Err(Error::input(format!("vertex {v} repeated in permutation")));
            }
            rank[v] = pos;
        }
        Ok(Self { order, rank })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
            rank: (0..n).collect(),
        }
    }

    /// Uniform permutation of `0..n` drawn from `rng` (Fisher-Yates).
    pub fn random_with(n: usize, rng: &mut Rng) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut rank = vec![0; n];
        for (pos, &v) in order.iter().enumerate() {
            rank[v] = pos;
        }
        Self { order, rank }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Vertex at zero-based position `pos`.
    pub fn at(&self, pos: usize) -> usize {
        self.order[pos]
    }

    /// Zero-based position of `v`, if `v` is in the domain.
    pub fn position(&self, v: usize) -> Option<usize> {
        match self.rank.get(v) {
            Some(&r) if r != ABSENT => Some(r),
            _ => None,
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.position(v).is_some()
    }

    /// Keeps the elements of `subset` in their relative order.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        let mut keep = vec![false; self.rank.len()];
        for &v in subset {
            if !self.contains(v) {
                return Err(Error::input(format!(
                    "vertex {v} is not in the permutation"
                )));
            }
            keep[v] = true;
        }
        let order = self.order.iter().copied().filter(|&v| keep[v]).collect();
        Self::from_order(order)
    }

    /// Restriction by a membership predicate; never fails.
    pub fn restrict_by(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let order: Vec<usize> = self.order.iter().copied().filter(|&v| keep(v)).collect();
        let mut rank = vec![ABSENT; self.rank.len()];
        for (pos, &v) in order.iter().enumerate() {
            rank[v] = pos;
        }
        Self { order, rank }
    }
}

/// Uniform permutation of `0..n` from a fresh generator seeded with `seed`.
pub fn random_permutation(n: usize, seed: u64) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::input("permutation size must be at least 1"));
    }
    Ok(Permutation::random_with(n, &mut rng::seeded(seed)))
}
