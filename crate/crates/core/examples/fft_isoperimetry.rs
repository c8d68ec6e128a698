//! Boundary measures on the butterfly graph: exhaustive check on F_2,
//! sampled check on F_4, and boundary sums of random partitions of F_8.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use isocache::fft::{bfs_partition, build_fft, delta, verify_isoperimetric, verify_partition_bound, SubsetStrategy};

fn main() {
    let f2 = build_fft(2).unwrap();
    println!("delta of (1,0) in F_2: {:?}", delta(&f2, &[f2.id(1, 0)]).unwrap());
    let r = verify_isoperimetric(&f2, SubsetStrategy::Exhaustive).unwrap();
    let tight = r.rows.iter().map(|row| row.margin).fold(f64::INFINITY, f64::min);
    println!("F_2: {} subsets, {} violations, smallest margin {tight:.3}", r.checked, r.violations.len());

    let f4 = build_fft(4).unwrap();
    let r = verify_isoperimetric(&f4, SubsetStrategy::Random { count: 10_000, seed: 1 }).unwrap();
    println!("F_4: {} sampled subsets, {} violations", r.checked, r.violations.len());

    let f8 = build_fft(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for size in [2u64, 4, 16] {
        let p = bfs_partition(&f8, size as usize, &mut rng);
        let r = verify_partition_bound(&f8, &p, size).unwrap();
        println!(
            "F_8, S={size}: {} sets, boundary sum {} vs N/(4 log S) = {:.1}, regime {:?}",
            r.sets, r.boundary_sum, r.bound, r.regime
        );
    }
}
