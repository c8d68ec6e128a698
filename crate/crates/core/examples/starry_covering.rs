//! Validates a perturbed 3-D lattice as starry, takes one hyperplane cut,
//! then covers it recursively for several set sizes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use isocache::unstructured::{hyperplane_cut, perturbed_lattice, starry_covering, validate_starry};

fn main() {
    let grid = perturbed_lattice(&[16, 16, 16], 0.1, 7);
    let report = validate_starry(&grid, 2.0).unwrap();
    println!("starry: {} {:?}", report.is_starry(), report.cert);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cut = hyperplane_cut(&grid, &report.cert, &mut rng).unwrap();
    println!(
        "cut normal {:.3?}: sides {} / {}, {} edges cut",
        cut.direction,
        cut.sides[0].len(),
        cut.sides[1].len(),
        cut.cut_edges.len()
    );

    for size in [64usize, 128, 256, 512] {
        let r = starry_covering(&grid, size, 7).unwrap();
        let w = r.tree.weight_checks();
        println!(
            "S={size:>4}: {:>4} sets, {:>5} cut edges, sigma(T) {:>8.1}, median fallbacks {:>3}, weight checks {}/{} ok",
            r.covering.sets.len(),
            r.boundary_edges(&grid),
            r.tree.sigma(),
            r.fallbacks,
            w.checked - w.violations,
            w.checked
        );
    }
}
