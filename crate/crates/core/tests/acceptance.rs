//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fail.

mod common;

use std::collections::HashSet;
use std::process::Command;
use std::time::{Duration, Instant};

use isocache::bounds::{alpha_structured, lower_bound_pointwise, weight_inequality_check, Regime, WeightCheck};
use isocache::cache::{AccessOutcome, CacheConfig, CacheState};
use isocache::cli::{tile_sweep, TileRow};
use isocache::fft::{bfs_partition, build_fft, chunked_partition, verify_isoperimetric, verify_partition_bound, SubsetStrategy};
use isocache::lattice::{build_lattice, succmin_block, voronoi_tile, GridShape, InterferenceLattice, Norm};
use isocache::tiling::{Stencil, TraversalKind};
use isocache::unstructured::{
    hyperplane_cut, perturbed_lattice, planar_covering, reorder_and_measure, starry_covering, triangulated_square,
    validate_starry, MeasureOptions, UGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

// 1: simulator against the brute-force model.
fn cache_oracle() -> Outcome {
    const TRACES: usize = 1000;
    const MAX_LEN: usize = 10_000;
    let configs = [(1u64, 1u64, 64u64), (2, 2, 64), (4, 4, 256), (128 / 4, 4, 128)];
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0usize;
    let mut accesses = 0usize;
    for t in 0..TRACES {
        let (a, w, s) = configs[t % configs.len()];
        let len = rng.gen_range(1..=MAX_LEN);
        let span = rng.gen_range(s / 2..=8 * s);
        let trace: Vec<u64> = (0..len).map(|_| rng.gen_range(0..span)).collect();
        let mut state = CacheState::new(CacheConfig::new(a, w, s).unwrap());
        let got: Vec<AccessOutcome> = trace.iter().map(|&x| state.access(x)).collect();
        let want = common::reference_outcomes(a, w, s, &trace);
        mismatches += got.iter().zip(&want).filter(|(g, w)| g != w).count();
        accesses += len;
    }
    let el = start.elapsed();
    outcome(
        mismatches == 0 && within(el, 10),
        format!("{TRACES} traces, {accesses} accesses, {mismatches} mismatches, {:.2?}", el),
    )
}

fn lattice_matrix() -> Vec<InterferenceLattice> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    (0..50)
        .map(|i| {
            let d = 2 + i % 2;
            let dims: Vec<usize> = (0..d).map(|_| rng.gen_range(20..200)).collect();
            let s = if i % 3 == 0 { 1u64 << rng.gen_range(4..13) } else { rng.gen_range(16..4096) };
            build_lattice(&GridShape::new(dims).unwrap(), s).unwrap()
        })
        .collect()
}

// 2: determinant, Minkowski, cube and ball minima agree up to a factor d.
fn lattice_correctness(lattices: &[InterferenceLattice], build: Duration) -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for (i, lat) in lattices.iter().enumerate() {
        let d = lat.dim() as f64;
        if lat.det().unsigned_abs() != lat.modulus() {
            bad.push(format!("#{i} det"));
        }
        for norm in [Norm::Cube, Norm::Ball] {
            if !lat.minkowski(norm).holds() {
                bad.push(format!("#{i} minkowski {norm:?}"));
            }
        }
        let (c, b) = (&lat.minima(Norm::Cube).values, &lat.minima(Norm::Ball).values);
        for (x, y) in c.iter().zip(b) {
            let r = x / y;
            if !(1.0 / d..=d).contains(&r) {
                bad.push(format!("#{i} ratio {r}"));
            }
        }
    }
    let el = start.elapsed() + build;
    outcome(
        bad.is_empty() && within(el, 30),
        format!("{} lattices, violations {:?}, {:.2?}", lattices.len(), bad, el),
    )
}

// 3: Voronoi tiles and Q' translates hold at most one lattice point and
// map to distinct cache slots.
fn conflict_freedom(lattices: &[InterferenceLattice]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut violations = 0usize;
    let mut translates = 0usize;
    for lat in lattices {
        let tile = voronoi_tile(lat).unwrap();
        let slots: HashSet<i64> = tile.points.iter().map(|p| lat.cache_slot(p)).collect();
        let lattice_points = tile.points.iter().filter(|p| lat.contains(p)).count();
        if tile.len() as u64 != lat.modulus() || slots.len() != tile.len() || lattice_points > 1 {
            violations += 1;
        }
        let block = succmin_block(lat).unwrap();
        let half = block.q_prime_halfwidths();
        let d = lat.dim();
        for _ in 0..100 {
            translates += 1;
            let t: Vec<f64> = (0..d).map(|_| rng.gen_range(-1000.0..1000.0)).collect();
            let lo: Vec<i64> = (0..d).map(|j| (t[j] - half[j]).floor() as i64).collect();
            let hi: Vec<i64> = (0..d).map(|j| (t[j] + half[j]).ceil() as i64).collect();
            let mut slots = HashSet::new();
            let mut inside = 0;
            let mut clash = false;
            let mut p = lo.clone();
            'walk: loop {
                if block.q_prime_contains(&t, &p) {
                    clash |= !slots.insert(lat.cache_slot(&p));
                    inside += lat.contains(&p) as usize;
                }
                for j in 0..d {
                    p[j] += 1;
                    if p[j] <= hi[j] {
                        continue 'walk;
                    }
                    p[j] = lo[j];
                }
                break;
            }
            if clash || inside > 1 {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{} tiles, {translates} translates, {violations} violations", lattices.len()),
    )
}

const FIG_S: u64 = 1 << 14;

fn figure_sweep() -> (Vec<(TileRow, TileRow)>, Duration) {
    let start = Instant::now();
    let grids: Vec<GridShape> = (40..=99).map(|nx| GridShape::new(vec![nx, 97, 99]).unwrap()).collect();
    let config = CacheConfig::direct_mapped(1, FIG_S).unwrap();
    let stencil = Stencil::star(3, 2).unwrap();
    let rows = tile_sweep(&grids, config, &[TraversalKind::Canonical, TraversalKind::Succmin], &stencil, FIG_S).unwrap();
    let pairs = rows.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();
    (pairs, start.elapsed())
}

// 4: tiled order beats canonical on most of the sweep and on average.
fn figure_ordinal(pairs: &[(TileRow, TileRow)], el: Duration) -> Outcome {
    let wins = pairs.iter().filter(|(c, t)| t.misses <= c.misses).count();
    let mean = |f: fn(&(TileRow, TileRow)) -> u64| pairs.iter().map(|p| f(p) as f64).sum::<f64>() / pairs.len() as f64;
    let canon = mean(|p| p.0.misses);
    let tiled = mean(|p| p.1.misses);
    let win_rate = wins as f64 / pairs.len() as f64;
    let reduction = 1.0 - tiled / canon;
    outcome(
        win_rate >= 0.80 && reduction >= 0.20 && within(el, 600),
        format!(
            "wins {wins}/{} ({:.0}%), mean canonical {canon:.0}, tiled {tiled:.0}, reduction {:.1}%, {:.2?}",
            pairs.len(),
            100.0 * win_rate,
            100.0 * reduction,
            el
        ),
    )
}

struct CoverRun {
    vertices: usize,
    size: usize,
    cut_edges: usize,
    max_set: usize,
    misses: u64,
    bound: f64,
}

fn normalized_fit(runs: &[CoverRun]) -> f64 {
    let pts: Vec<(f64, f64)> = runs
        .iter()
        .filter(|r| r.size * 8 <= r.vertices)
        .map(|r| ((r.size as f64).ln(), (r.cut_edges as f64 / r.vertices as f64).ln()))
        .collect();
    common::fit_line(&pts).0
}

fn cover_run(grid: &UGrid, dims: &[usize], size: usize, report: isocache::unstructured::CoveringReport) -> CoverRun {
    let config = CacheConfig::fully_associative(1, size as u64).unwrap();
    let stats = reorder_and_measure(grid, &report.covering, &config, MeasureOptions::default());
    let alpha = alpha_structured(&GridShape::new(dims.to_vec()).unwrap(), size as u64).unwrap().ratio;
    CoverRun {
        vertices: grid.len(),
        size,
        cut_edges: report.tree.total_cut_edges(),
        max_set: report.covering.max_set_size(),
        misses: stats.misses,
        bound: lower_bound_pointwise(grid.len() as u64, size as u64, 1, alpha).unwrap().bound,
    }
}

// 6: planar cut totals scale like |V| / sqrt(S).
fn planar_scaling() -> (Outcome, Vec<CoverRun>) {
    let start = Instant::now();
    let mut runs = Vec::new();
    for m in [32usize, 64, 128] {
        let grid = triangulated_square(m);
        for size in [64usize, 128, 256, 512, 1024] {
            let report = planar_covering(&grid, size).unwrap();
            runs.push(cover_run(&grid, &[m, m], size, report));
        }
    }
    let slope = normalized_fit(&runs);
    let cs: Vec<f64> = [1024usize, 4096, 16384]
        .iter()
        .map(|&n| {
            let rs: Vec<&CoverRun> = runs.iter().filter(|r| r.vertices == n && r.size * 8 <= n).collect();
            rs.iter().map(|r| r.cut_edges as f64 * (r.size as f64).sqrt() / n as f64).sum::<f64>() / rs.len() as f64
        })
        .collect();
    let spread = cs.iter().cloned().fold(f64::MIN, f64::max) / cs.iter().cloned().fold(f64::MAX, f64::min);
    let el = start.elapsed();
    let o = outcome(
        (-0.65..=-0.35).contains(&slope) && spread < 2.0 && within(el, 120),
        format!("slope {slope:.3}, C per size {cs:.2?} (spread {spread:.2}x), {:.2?}", el),
    );
    (o, runs)
}

// 7: starry cut totals scale like |V| S^(-1/3).
fn starry_scaling() -> (Outcome, Vec<CoverRun>) {
    let start = Instant::now();
    let mut runs = Vec::new();
    let mut min_side_fraction = f64::MAX;
    let mut oversized = 0;
    let mut not_starry = 0;
    for n in [8usize, 12, 16, 20] {
        let dims = [n, n, n];
        let grid = perturbed_lattice(&dims, 0.1, SEED + n as u64);
        let report = validate_starry(&grid, 2.0).unwrap();
        if !report.is_starry() {
            not_starry += 1;
            continue;
        }
        for k in 0..10 {
            let cut = hyperplane_cut(&grid, &report.cert, &mut ChaCha8Rng::seed_from_u64(SEED + k)).unwrap();
            for side in &cut.sides {
                min_side_fraction = min_side_fraction.min(side.len() as f64 / grid.len() as f64);
            }
        }
        for size in [64usize, 128, 256, 512] {
            let cover = starry_covering(&grid, size, SEED).unwrap();
            let run = cover_run(&grid, &dims, size, cover);
            oversized += (run.max_set > size) as usize;
            runs.push(run);
        }
    }
    let slope = normalized_fit(&runs);
    let el = start.elapsed();
    let o = outcome(
        (-0.50..=-0.20).contains(&slope)
            && oversized == 0
            && not_starry == 0
            && min_side_fraction >= 1.0 / 3.0
            && within(el, 300),
        format!(
            "exponent {slope:.3}, oversized sets {oversized}, non-starry grids {not_starry}, smallest cut side {:.3} |V|, {:.2?}",
            min_side_fraction, el
        ),
    );
    (o, runs)
}

// 5: no simulated run beats the pointwise lower bound.
fn bound_validity(fig: &[(TileRow, TileRow)], starry: &[CoverRun]) -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    let mut tightest = f64::MAX;
    for (c, t) in fig {
        let shape = GridShape::new(vec![c.nx, c.ny, c.nz]).unwrap();
        let alpha = alpha_structured(&shape, FIG_S).unwrap().ratio;
        let bound = lower_bound_pointwise(shape.len() as u64, FIG_S, 1, alpha).unwrap().bound;
        for row in [c, t] {
            checked += 1;
            violations += ((row.misses as f64) < bound) as usize;
            tightest = tightest.min(row.misses as f64 / bound);
        }
    }
    for r in starry {
        checked += 1;
        violations += ((r.misses as f64) < r.bound) as usize;
        tightest = tightest.min(r.misses as f64 / r.bound);
    }
    outcome(
        violations == 0,
        format!("{checked} runs, {violations} below bound, smallest misses/bound {tightest:.3}"),
    )
}

// 8: FFT isoperimetry and the partition boundary bound.
fn fft_checks() -> Outcome {
    let start = Instant::now();
    let f2 = verify_isoperimetric(&build_fft(2).unwrap(), SubsetStrategy::Exhaustive).unwrap();
    let f4 = verify_isoperimetric(&build_fft(4).unwrap(), SubsetStrategy::Random { count: 100_000, seed: SEED }).unwrap();
    let g8 = build_fft(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let mut failed = 0;
    let mut outside = 0;
    for i in 0..100 {
        let size = [2usize, 4][i % 2];
        let parts = if i % 4 < 2 { bfs_partition(&g8, size, &mut rng) } else { chunked_partition(&g8, size, &mut rng) };
        let r = verify_partition_bound(&g8, &parts, size as u64).unwrap();
        failed += !r.holds() as usize;
        outside += (r.regime == Regime::Outside) as usize;
    }
    let el = start.elapsed();
    outcome(
        f2.checked == 4095 && f2.violations.is_empty() && f4.violations.is_empty() && failed == 0 && within(el, 60),
        format!(
            "F_2 {} subsets ({} delta<2 exceptions), F_4 {} subsets, violations {}+{}; F_8 partitions failing {failed}/100 \
             ({outside} outside S <= 2^(n/24), unsatisfiable for S >= 2 at n = 8), {:.2?}",
            f2.checked,
            f2.exceptions.len(),
            f4.checked,
            f2.violations.len(),
            f4.violations.len(),
            el
        ),
    )
}

// 9: weight inequality on random tuples meeting the hypothesis.
fn weight_checks() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let mut fails = 0;
    let mut tuples = 0;
    while tuples < 100_000 {
        let d = rng.gen_range(2..=4);
        let k = rng.gen_range(2..=10);
        let v: Vec<f64> = (0..k).map(|_| rng.gen_range(1e-3..1.0f64).powi(rng.gen_range(1..4))).collect();
        match weight_inequality_check(&v, d).unwrap() {
            WeightCheck::HypothesisViolated { .. } => continue,
            WeightCheck::Fails { .. } => fails += 1,
            WeightCheck::Holds { .. } => {}
        }
        tuples += 1;
    }
    let rejected = matches!(
        weight_inequality_check(&[9.0, 4.0, 4.0], 2).unwrap(),
        WeightCheck::HypothesisViolated { .. }
    );
    let el = start.elapsed();
    outcome(
        fails == 0 && rejected && within(el, 5),
        format!("{tuples} tuples, {fails} violations, [9,4,4] rejected: {rejected}, {:.2?}", el),
    )
}

// 10: identical bytes for identical seeds.
fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 6] = [
        &["tile", "--grid", "3:30,29,28", "--cache", "1:1:1024", "--tiles", "canonical,succmin,voronoi", "--stencil", "star:2"],
        &["partition", "--synthetic", "perturbed:10,10,10", "--mode", "starry", "--S", "64,128", "--seed", "11"],
        &["partition", "--synthetic", "tri:40", "--S", "64,256", "--seed", "11"],
        &["bounds", "--grid", "3:97,97,99", "--S", "16384"],
        &["fft", "--n", "6", "--strategy", "random:2000", "--S", "4", "--partitions", "20", "--seed", "11"],
        &["lattice", "--grid", "3:97,97,99", "--S", "16384"],
    ];
    let mut differing = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let path = dir.path().join(format!("{i}-{rep}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_isocache"))
                .args(*args)
                .args(["--out", path.to_str().unwrap()])
                .status()
                .unwrap();
            outputs.push(status.success().then(|| std::fs::read(&path).unwrap()));
        }
        if outputs[0].is_none() || outputs[0] != outputs[1] {
            differing.push(args[0]);
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} commands run twice, differing or failing: {:?}", commands.len(), differing),
    )
}

fn main() {
    let start = Instant::now();
    let lattices = lattice_matrix();
    let build = start.elapsed();
    let (fig, fig_time) = figure_sweep();
    let (planar, _) = planar_scaling();
    let (starry, starry_runs) = starry_scaling();
    let results = [
        ("cache simulator matches reference", cache_oracle()),
        ("lattice determinant and minima", lattice_correctness(&lattices, build)),
        ("conflict-free tiles", conflict_freedom(&lattices)),
        ("tiled sweep below canonical", figure_ordinal(&fig, fig_time)),
        ("misses above lower bound", bound_validity(&fig, &starry_runs)),
        ("planar covering scaling", planar),
        ("starry covering scaling", starry),
        ("FFT isoperimetry and partitions", fft_checks()),
        ("weight inequality", weight_checks()),
        ("CLI determinism", cli_determinism()),
    ];
    let mut all = true;
    for (i, (name, o)) in results.iter().enumerate() {
        all &= o.pass;
        println!("{} criterion {:2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
