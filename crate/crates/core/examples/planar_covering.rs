//! Covers a triangulated square with separator-based sets and compares
//! covering order with a random order in a fully associative cache.

use isocache::cache::CacheConfig;
use isocache::unstructured::{measure_random_order, planar_covering, reorder_and_measure, triangulated_square, MeasureOptions};

fn main() {
    let grid = triangulated_square(96);
    println!("{} vertices, {} edges", grid.len(), grid.edges().len());
    println!("{:>5} {:>6} {:>10} {:>8} {:>12} {:>12}", "S", "sets", "cut edges", "C", "covering rl", "random rl");
    for size in [64usize, 128, 256, 512, 1024] {
        let report = planar_covering(&grid, size).unwrap();
        let cut = report.boundary_edges(&grid);
        let c = cut as f64 * (size as f64).sqrt() / grid.len() as f64;
        let config = CacheConfig::fully_associative(1, size as u64).unwrap();
        let opts = MeasureOptions::default();
        let ordered = reorder_and_measure(&grid, &report.covering, &config, opts);
        let random = measure_random_order(&grid, &config, opts, 1);
        println!(
            "{size:>5} {:>6} {cut:>10} {c:>8.3} {:>12} {:>12}",
            report.covering.sets.len(),
            ordered.replacement_loads,
            random.replacement_loads
        );
    }
}
