use std::ops::Range;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, tagged_seed};

/// Assignment of `N` samples to `m` shards.
///
/// Sizes differ by at most one, with the `N mod m` extra samples going to
/// the first shards. Shard `i` covers positions `range(i)` of a seeded
/// permutation of `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardPlan {
    n_total: usize,
    sizes: Vec<usize>,
    shard_seeds: Vec<u64>,
    offsets: Vec<usize>,
    permutation: Vec<usize>,
}

pub fn make_shard_plan(n_total: usize, m: usize, base_seed: u64) -> Result<ShardPlan> {
    if m == 0 || n_total == 0 {
        return Err(Error::invalid(format!(
            "need N > 0 and m > 0, got N={n_total} m={m}"
        )));
    }
    if m > n_total {
        return Err(Error::invalid(format!(
            "more shards ({m}) than samples ({n_total})"
        )));
    }
    let base = n_total / m;
    let extra = n_total % m;
    let sizes: Vec<usize> = (0..m).map(|i| base + usize::from(i < extra)).collect();
    let mut offsets = Vec::with_capacity(m + 1);
    offsets.push(0);
    for s in &sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    let shard_seeds = (0..m as u64).map(|i| derive_seed(base_seed, i)).collect();
    let mut permutation: Vec<usize> = (0..n_total).collect();
    permutation.shuffle(&mut rng_from_seed(tagged_seed(
        base_seed,
        "shard-permutation",
    )));
    Ok(ShardPlan {
        n_total,
        sizes,
        shard_seeds,
        offsets,
        permutation,
    })
}

impl ShardPlan {
    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn shard_seeds(&self) -> &[u64] {
        &self.shard_seeds
    }

    /// Contiguous position range of shard `i`.
    pub fn range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Dataset indices of shard `i` (the permuted positions).
    pub fn indices(&self, i: usize) -> &[usize] {
        &self.permutation[self.range(i)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_division() {
        let p = make_shard_plan(100_000, 8, 1).unwrap();
        assert_eq!(p.sizes(), &[12_500; 8]);
    }

    #[test]
    fn remainder_goes_to_front() {
        let p = make_shard_plan(10, 3, 1).unwrap();
        assert_eq!(p.sizes(), &[4, 3, 3]);
        assert_eq!(p.range(1), 4..7);
    }

    #[test]
    fn shards_partition_the_index_set() {
        let p = make_shard_plan(1000, 7, 5).unwrap();
        let mut all: Vec<usize> = (0..7).flat_map(|i| p.indices(i).to_vec()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
        let mut seeds = p.shard_seeds().to_vec();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 7);
    }

    #[test]
    fn too_many_shards() {
        assert!(make_shard_plan(3, 4, 0).is_err());
        assert!(make_shard_plan(3, 0, 0).is_err());
    }
}
