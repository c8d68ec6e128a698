use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Covering, UGrid};
use crate::cache::{AccessStats, CacheConfig, CacheState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MeasureOptions {
    /// Also write the result array `q` after `u`.
    pub include_q: bool,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions { include_q: true }
    }
}

/// Runs a first-order operator over `order`: read `u` at each vertex and
/// its neighbors, then write `q` at the vertex. Vertex `v` lives at word
/// `position[v]` of `u` and `|V| + position[v]` of `q`.
pub fn measure_layout(
    grid: &UGrid,
    order: &[usize],
    position: &[usize],
    config: &CacheConfig,
    options: MeasureOptions,
) -> AccessStats {
    let n = grid.len() as u64;
    let mut cache = CacheState::new(config.clone());
    for &v in order {
        cache.access(position[v] as u64);
        for &u in grid.neighbors(v) {
            cache.access(position[u] as u64);
        }
        if options.include_q {
            cache.access(n + position[v] as u64);
        }
    }
    cache.stats()
}

/// Stores each covering set contiguously and computes set by set.
pub fn reorder_and_measure(
    grid: &UGrid,
    covering: &Covering,
    config: &CacheConfig,
    options: MeasureOptions,
) -> AccessStats {
    measure_layout(grid, &covering.order, &covering.positions(), config, options)
}

/// Same operator with a seeded random vertex order used for both storage
/// and traversal.
pub fn measure_random_order(grid: &UGrid, config: &CacheConfig, options: MeasureOptions, seed: u64) -> AccessStats {
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut position = vec![0; order.len()];
    for (p, &v) in order.iter().enumerate() {
        position[v] = p;
    }
    measure_layout(grid, &order, &position, config, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unstructured::{planar_covering, triangulated_square};

    #[test]
    fn fits_in_cache() {
        let g = triangulated_square(8);
        let r = planar_covering(&g, 64).unwrap();
        let cfg = CacheConfig::fully_associative(1, 64).unwrap();
        let s = reorder_and_measure(&g, &r.covering, &cfg, MeasureOptions { include_q: false });
        assert_eq!(s.replacement_loads, 0);
        assert_eq!(s.cold_loads, 64);
        let per_vertex: u64 = (0..g.len()).map(|v| 1 + g.degree(v) as u64).sum();
        assert_eq!(s.accesses, per_vertex);
    }

    #[test]
    fn covering_beats_random_order() {
        let g = triangulated_square(48);
        let cfg = CacheConfig::fully_associative(1, 256).unwrap();
        let r = planar_covering(&g, 128).unwrap();
        let opts = MeasureOptions::default();
        let tiled = reorder_and_measure(&g, &r.covering, &cfg, opts);
        let random = measure_random_order(&g, &cfg, opts, 1);
        assert!(tiled.replacement_loads < random.replacement_loads);
    }
}
