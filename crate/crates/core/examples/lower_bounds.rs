//! Lower bounds for a 3-D stencil sweep next to simulated misses.

use isocache::bounds::{alpha_structured, lower_bound_fft, lower_bound_pointwise, weight_inequality_check};
use isocache::cache::CacheConfig;
use isocache::lattice::GridShape;
use isocache::tiling::{simulate_stencil, tiled_traversal, Layout, Stencil, TraversalKind};

fn main() {
    let shape = GridShape::new(vec![60, 60, 60]).unwrap();
    let size = 1u64 << 12;
    let est = alpha_structured(&shape, size).unwrap();
    let bound = lower_bound_pointwise(shape.len() as u64, size, 1, est.ratio).unwrap();
    println!("alpha {:.4} from a {}^3 cube ({}), bound {:.0}", est.ratio, est.side, est.method, bound.bound);

    let config = CacheConfig::direct_mapped(1, size).unwrap();
    let stencil = Stencil::star(3, 1).unwrap();
    for kind in [TraversalKind::Canonical, TraversalKind::Succmin] {
        let t = tiled_traversal(&shape, size, kind, 1).unwrap();
        let s = simulate_stencil(&shape, &t, &stencil, config, Layout::back_to_back(&shape)).unwrap();
        println!("{:>9}: {} misses", kind.as_str(), s.total.misses);
    }

    let fft = lower_bound_fft(20, 4, 1).unwrap();
    println!("FFT n=20, S=4: bound {:.0}, regime {:?}", fft.bound, fft.regime);

    for v in [[1.0, 1.0, 1.0], [4.0, 4.0, 1.0], [9.0, 4.0, 4.0]] {
        println!("weight inequality {v:?}: {:?}", weight_inequality_check(&v, 2).unwrap());
    }
}
