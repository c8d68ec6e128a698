//! Small sweep of a 13-point stencil over a 3-D grid: canonical order
//! against lattice tiles in a direct-mapped cache of 2^14 words.
//!
//! Run with `--release`; each grid takes a fraction of a second.

use isocache::cache::CacheConfig;
use isocache::lattice::GridShape;
use isocache::tiling::{simulate_stencil, tiled_traversal, Layout, Stencil, TraversalKind};

fn main() {
    let config = CacheConfig::direct_mapped(1, 1 << 14).unwrap();
    let stencil = Stencil::star(3, 2).unwrap();
    println!("{:>4} {:>12} {:>12} {:>12} {:>7}", "nx", "canonical", "succmin", "voronoi", "ratio");
    for nx in (40..100).step_by(12) {
        let shape = GridShape::new(vec![nx, 97, 99]).unwrap();
        let mut misses = Vec::new();
        for kind in [TraversalKind::Canonical, TraversalKind::Succmin, TraversalKind::Voronoi] {
            let t = tiled_traversal(&shape, config.size_words(), kind, stencil.radius).unwrap();
            let s = simulate_stencil(&shape, &t, &stencil, config, Layout::back_to_back(&shape)).unwrap();
            misses.push(s.total.misses);
        }
        println!(
            "{nx:>4} {:>12} {:>12} {:>12} {:>7.3}",
            misses[0],
            misses[1],
            misses[2],
            misses[1] as f64 / misses[0] as f64
        );
    }
}
