//! Interference lattice of a 2-D and a 3-D grid for a direct-mapped cache.

use isocache::lattice::{build_lattice, succmin_block, voronoi_tile, GridShape, Norm};

fn describe(dims: &[usize], size: u64) {
    let shape = GridShape::new(dims.to_vec()).unwrap();
    let lat = build_lattice(&shape, size).unwrap();
    println!("grid {dims:?}, S = {size}");
    println!("  basis {:?}", lat.basis());
    for norm in [Norm::Cube, Norm::Ball] {
        let m = lat.minima(norm);
        let k = lat.minkowski(norm);
        println!(
            "  {norm:?}: minima {:?}, eccentricity {:.3}, Minkowski {:.4} <= {:.4} <= {:.4}",
            m.values,
            m.eccentricity(),
            k.lower,
            k.ratio,
            k.upper
        );
    }
    let block = succmin_block(&lat).unwrap();
    println!("  tile sides {:?}", block.tile_sides());
    let tile = voronoi_tile(&lat).unwrap();
    println!("  Voronoi tile: {} points, {} on the boundary", tile.len(), tile.boundary_points());
}

fn main() {
    describe(&[100, 100], 1024);
    describe(&[64, 64, 64], 4096);
    describe(&[41, 97, 99], 16384);
}
