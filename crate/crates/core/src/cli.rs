//! Command-line front end. The `isocache` binary forwards to [`main_with_args`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    alpha_structured, beta_structured, h_edge_count, lower_bound_edgewise, lower_bound_fft,
    lower_bound_pointwise, structured_edge_count, IsoperimetricEstimate, LowerBound,
};
use crate::cache::CacheConfig;
use crate::fft::{
    bfs_partition, build_fft, chunked_partition, verify_isoperimetric, verify_partition_bound, IsoReport,
    PartitionReport, SubsetStrategy,
};
use crate::lattice::{build_lattice, succmin_block, voronoi_tile, GridShape, Norm};
use crate::tiling::{simulate_stencil, tiled_traversal, Layout, Stencil, TraversalKind};
use crate::unstructured::{
    cycle, perturbed_lattice, planar_covering, read_mesh, reorder_and_measure, starry_covering, structured_grid,
    triangulated_square, validate_starry, MeasureOptions, UGrid,
};

/// Failure classes mapped to exit codes 2 and 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "isocache", version, about = "Cache-miss experiments for grid operators")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Emit JSON instead of CSV or text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate stencil sweeps in canonical and tiled orders.
    Tile(TileArgs),
    /// Cover an unstructured mesh and measure the reordered operator.
    Partition(PartitionArgs),
    /// Print miss lower bounds with their intermediate quantities.
    Bounds(BoundsArgs),
    /// Check FFT-graph isoperimetry and partition boundary sums.
    Fft(FftArgs),
    /// Describe the interference lattice of a grid.
    Lattice(LatticeArgs),
}

#[derive(Debug, Args)]
pub struct TileArgs {
    /// Grid as `d:n1,n2[,n3]`.
    #[arg(long)]
    pub grid: String,
    /// Cache as `a:w:S` or `a:w:S:z`.
    #[arg(long, default_value = "1:1:16384")]
    pub cache: String,
    /// Comma-separated traversal kinds.
    #[arg(long, default_value = "canonical,succmin")]
    pub tiles: String,
    /// Stencil as `star:r`.
    #[arg(long, default_value = "star:1")]
    pub stencil: String,
    /// Sweep the first extent over `lo:hi` (inclusive).
    #[arg(long)]
    pub sweep_nx: Option<String>,
    /// Interference-lattice modulus; defaults to the cache size.
    #[arg(long = "S")]
    pub lattice_size: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Planar,
    Starry,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Mesh file (text or JSON).
    #[arg(long, conflicts_with = "synthetic")]
    pub mesh: Option<PathBuf>,
    /// Built-in mesh: `tri:m`, `grid:n1,n2[,n3]`, `perturbed:n1,n2[,n3]`, `cycle:n`.
    #[arg(long)]
    pub synthetic: Option<String>,
    #[arg(long, value_enum, default_value_t = Mode::Planar)]
    pub mode: Mode,
    /// Covering set sizes, comma separated.
    #[arg(long = "S", default_value = "256")]
    pub sizes: String,
    /// Cache as `a:w:S`; defaults to a fully associative cache of S words.
    #[arg(long)]
    pub cache: Option<String>,
    /// Edge-length ratio bound for starry validation.
    #[arg(long, default_value_t = 2.0)]
    pub c0: f64,
    /// Write the covering (`vertex set position` lines) here; with several
    /// sizes the size is appended to the file name.
    #[arg(long)]
    pub covering: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Operator {
    Pointwise,
    Edgewise,
    Fft,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Grid as `d:n1,n2[,n3]` (pointwise and edgewise operators).
    #[arg(long)]
    pub grid: Option<String>,
    /// FFT level count.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long = "S")]
    pub size: u64,
    /// Words per cache line.
    #[arg(long, default_value_t = 1)]
    pub w: u64,
    #[arg(long, value_enum, default_value_t = Operator::Pointwise)]
    pub operator: Operator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartitionKind {
    Chunked,
    Bfs,
}

#[derive(Debug, Args)]
pub struct FftArgs {
    #[arg(long)]
    pub n: u32,
    /// `exhaustive` or `random:COUNT`.
    #[arg(long, default_value = "random:1000")]
    pub strategy: String,
    #[arg(long = "S", default_value_t = 4)]
    pub size: u64,
    /// Random partitions to check.
    #[arg(long, default_value_t = 10)]
    pub partitions: usize,
    #[arg(long, value_enum, default_value_t = PartitionKind::Bfs)]
    pub partition_kind: PartitionKind,
    /// Partition CSV path; without it the table follows the subset table.
    #[arg(long)]
    pub partition_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[arg(long)]
    pub grid: String,
    #[arg(long = "S")]
    pub size: u64,
}

pub fn parse_grid(spec: &str) -> Result<GridShape, CliError> {
    let (d, dims) = spec
        .split_once(':')
        .ok_or_else(|| invalid(format!("grid `{spec}` must look like d:n1,n2[,n3]")))?;
    let d: usize = d.parse().map_err(|_| invalid(format!("bad dimension in `{spec}`")))?;
    let dims: Vec<usize> = dims
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| invalid(format!("bad extent `{t}`"))))
        .collect::<Result<_, _>>()?;
    if dims.len() != d {
        return Err(invalid(format!("grid `{spec}` declares d={d} but lists {} extents", dims.len())));
    }
    GridShape::new(dims).map_err(invalid)
}

pub fn parse_cache(spec: &str) -> Result<CacheConfig, CliError> {
    let parts: Vec<u64> = spec
        .split(':')
        .map(|t| t.parse::<u64>().map_err(|_| invalid(format!("bad cache field `{t}`"))))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, w, s] => CacheConfig::new(a, w, s).map_err(invalid),
        [a, w, s, z] => CacheConfig::with_sets(a, w, s, z).map_err(invalid),
        _ => Err(invalid(format!("cache `{spec}` must look like a:w:S or a:w:S:z"))),
    }
}

pub fn parse_stencil(spec: &str, dim: usize) -> Result<Stencil, CliError> {
    let r = spec
        .strip_prefix("star:")
        .and_then(|r| r.parse::<usize>().ok())
        .ok_or_else(|| invalid(format!("stencil `{spec}` must look like star:r")))?;
    Stencil::star(dim, r).map_err(invalid)
}

fn parse_range(spec: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = spec
        .split_once(':')
        .ok_or_else(|| invalid(format!("range `{spec}` must look like lo:hi")))?;
    let lo = a.parse().map_err(|_| invalid(format!("bad range start `{a}`")))?;
    let hi = b.parse().map_err(|_| invalid(format!("bad range end `{b}`")))?;
    if lo > hi {
        return Err(invalid(format!("empty range `{spec}`")));
    }
    Ok((lo, hi))
}

fn parse_list<T: std::str::FromStr>(spec: &str, what: &str) -> Result<Vec<T>, CliError> {
    spec.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| invalid(format!("bad {what} `{t}`"))))
        .collect()
}

/// One row of `tile` output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TileRow {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    #[serde(rename = "S")]
    pub size: u64,
    pub a: u64,
    pub w: u64,
    pub kind: String,
    pub accesses: u64,
    pub cold: u64,
    pub replacement: u64,
    pub misses: u64,
}

/// Runs every traversal kind on every grid of the sweep. Points run in
/// parallel; rows come back in sweep order, kinds in the given order.
pub fn tile_sweep(
    grids: &[GridShape],
    config: CacheConfig,
    kinds: &[TraversalKind],
    stencil: &Stencil,
    lattice_size: u64,
) -> Result<Vec<TileRow>, CliError> {
    let jobs: Vec<(&GridShape, TraversalKind)> = grids.iter().flat_map(|g| kinds.iter().map(move |&k| (g, k))).collect();
    jobs.par_iter()
        .map(|&(g, kind)| {
            let t = tiled_traversal(g, lattice_size, kind, stencil.radius).map_err(invalid)?;
            let s = simulate_stencil(g, &t, stencil, config, Layout::back_to_back(g)).map_err(runtime)?;
            let dims = g.dims();
            Ok(TileRow {
                nx: dims[0],
                ny: dims[1],
                nz: dims.get(2).copied().unwrap_or(1),
                size: config.size_words(),
                a: config.associativity(),
                w: config.line_words(),
                kind: kind.as_str().to_string(),
                accesses: s.total.accesses,
                cold: s.total.cold_loads,
                replacement: s.total.replacement_loads,
                misses: s.total.misses,
            })
        })
        .collect()
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(runtime)?;
    }
    w.into_inner().map_err(runtime)
}

fn csv_with_header<T: Serialize>(header: &[&str], rows: &[T]) -> Result<Vec<u8>, CliError> {
    if rows.is_empty() {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(runtime)?;
        return w.into_inner().map_err(runtime);
    }
    csv_bytes(rows)
}

fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(runtime)?;
    v.push(b'\n');
    Ok(v)
}

fn cmd_tile(args: &TileArgs, json: bool) -> Result<Vec<u8>, CliError> {
    let shape = parse_grid(&args.grid)?;
    let config = parse_cache(&args.cache)?;
    let stencil = parse_stencil(&args.stencil, shape.dim())?;
    let kinds: Vec<TraversalKind> = parse_list(&args.tiles, "traversal kind")?;
    let grids = match &args.sweep_nx {
        None => vec![shape],
        Some(r) => {
            let (lo, hi) = parse_range(r)?;
            (lo..=hi)
                .map(|nx| {
                    let mut dims = shape.dims().to_vec();
                    dims[0] = nx;
                    GridShape::new(dims).map_err(invalid)
                })
                .collect::<Result<_, _>>()?
        }
    };
    let rows = tile_sweep(&grids, config, &kinds, &stencil, args.lattice_size.unwrap_or(config.size_words()))?;
    if json {
        json_bytes(&rows)
    } else {
        csv_bytes(&rows)
    }
}

fn synthetic_mesh(spec: &str, seed: u64) -> Result<UGrid, CliError> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| invalid(format!("synthetic mesh `{spec}` must look like kind:args")))?;
    let dims: Vec<usize> = parse_list(arg, "mesh extent")?;
    if dims.iter().any(|&n| n == 0) {
        return Err(invalid("mesh extents must be positive"));
    }
    match (kind, dims.len()) {
        ("tri", 1) => Ok(triangulated_square(dims[0])),
        ("cycle", 1) if dims[0] >= 3 => Ok(cycle(dims[0])),
        ("grid", 2 | 3) => Ok(structured_grid(&dims)),
        ("perturbed", 2 | 3) => Ok(perturbed_lattice(&dims, 0.1, seed)),
        _ => Err(invalid(format!("unknown synthetic mesh `{spec}`"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionRow {
    pub mode: String,
    pub vertices: usize,
    pub edges: usize,
    #[serde(rename = "S")]
    pub size: usize,
    pub sets: usize,
    pub max_set: usize,
    pub boundary_vertices: usize,
    pub boundary_edges: usize,
    pub sigma: f64,
    pub fallbacks: usize,
    pub accesses: u64,
    pub cold: u64,
    pub replacement: u64,
    pub misses: u64,
}

fn cmd_partition(args: &PartitionArgs, seed: u64, json: bool) -> Result<Vec<u8>, CliError> {
    let grid = match (&args.mesh, &args.synthetic) {
        (Some(path), _) => read_mesh(path).map_err(invalid)?,
        (None, Some(spec)) => synthetic_mesh(spec, seed)?,
        (None, None) => return Err(invalid("partition needs --mesh or --synthetic")),
    };
    if grid.is_empty() {
        return Err(invalid("mesh has no vertices"));
    }
    let sizes: Vec<usize> = parse_list(&args.sizes, "set size")?;
    if sizes.iter().any(|&s| s == 0) {
        return Err(invalid("set sizes must be positive"));
    }
    let fixed_cache = args.cache.as_deref().map(parse_cache).transpose()?;
    let mode = match args.mode {
        Mode::Planar => "planar",
        Mode::Starry => {
            let report = validate_starry(&grid, args.c0).map_err(invalid)?;
            if !report.is_starry() {
                let detail = serde_json::to_string(&report.violations).map_err(runtime)?;
                return Err(invalid(format!("grid is not starry for c0 = {}: {detail}", args.c0)));
            }
            "starry"
        }
    };
    let mut rows = Vec::new();
    for &size in &sizes {
        let report = match args.mode {
            Mode::Planar => planar_covering(&grid, size),
            Mode::Starry => starry_covering(&grid, size, seed),
        }
        .map_err(runtime)?;
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        let config = match fixed_cache {
            Some(c) => c,
            None => CacheConfig::fully_associative(1, size as u64).map_err(invalid)?,
        };
        let stats = reorder_and_measure(&grid, &report.covering, &config, MeasureOptions::default());
        if let Some(path) = &args.covering {
            let path = if sizes.len() == 1 {
                path.clone()
            } else {
                let mut p = path.clone().into_os_string();
                p.push(format!(".{size}"));
                PathBuf::from(p)
            };
            let file = std::fs::File::create(&path).map_err(runtime)?;
            report.covering.write(std::io::BufWriter::new(file)).map_err(runtime)?;
        }
        rows.push(PartitionRow {
            mode: mode.to_string(),
            vertices: grid.len(),
            edges: grid.edges().len(),
            size,
            sets: report.covering.sets.len(),
            max_set: report.covering.max_set_size(),
            boundary_vertices: report.boundary_vertices(&grid),
            boundary_edges: report.boundary_edges(&grid),
            sigma: report.tree.sigma(),
            fallbacks: report.fallbacks,
            accesses: stats.accesses,
            cold: stats.cold_loads,
            replacement: stats.replacement_loads,
            misses: stats.misses,
        });
    }
    if json {
        json_bytes(&rows)
    } else {
        csv_bytes(&rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub bound: LowerBound,
    pub estimate: Option<IsoperimetricEstimate>,
}

#[derive(Serialize)]
struct BoundsRow<'a> {
    operator: &'a str,
    volume: u64,
    #[serde(rename = "S")]
    size: u64,
    w: u64,
    ratio: f64,
    side: Option<f64>,
    set_volume: Option<f64>,
    clamped: Option<bool>,
    method: Option<&'a str>,
    regime: Option<String>,
    bound: f64,
    cold_floor: f64,
}

pub fn compute_bounds(args: &BoundsArgs) -> Result<BoundsReport, CliError> {
    match args.operator {
        Operator::Fft => {
            let n = args.n.ok_or_else(|| invalid("--operator fft needs --n"))?;
            let bound = lower_bound_fft(n, args.size, args.w).map_err(invalid)?;
            Ok(BoundsReport { bound, estimate: None })
        }
        op => {
            let grid = args.grid.as_deref().ok_or_else(|| invalid("this operator needs --grid"))?;
            let shape = parse_grid(grid)?;
            if op == Operator::Pointwise {
                let est = alpha_structured(&shape, args.size).map_err(invalid)?;
                let bound = lower_bound_pointwise(shape.len() as u64, args.size, args.w, est.ratio).map_err(invalid)?;
                Ok(BoundsReport { bound, estimate: Some(est) })
            } else {
                let est = beta_structured(&shape, args.size).map_err(invalid)?;
                let h = h_edge_count(shape.len() as u64, structured_edge_count(&shape));
                let bound = lower_bound_edgewise(h, args.size, args.w, est.ratio).map_err(invalid)?;
                Ok(BoundsReport { bound, estimate: Some(est) })
            }
        }
    }
}

fn cmd_bounds(args: &BoundsArgs, json: bool) -> Result<Vec<u8>, CliError> {
    let report = compute_bounds(args)?;
    if json {
        return json_bytes(&report);
    }
    let b = &report.bound;
    let e = report.estimate.as_ref();
    let op = serde_json::to_value(b.operator).map_err(runtime)?;
    let regime = b
        .regime
        .map(|r| serde_json::to_value(r).map(|v| v.as_str().unwrap_or_default().to_string()))
        .transpose()
        .map_err(runtime)?;
    let row = BoundsRow {
        operator: op.as_str().unwrap_or_default(),
        volume: b.volume,
        size: b.size,
        w: b.line_words,
        ratio: b.ratio,
        side: e.map(|e| e.side),
        set_volume: e.map(|e| e.volume),
        clamped: e.map(|e| e.clamped),
        method: e.map(|e| e.method),
        regime,
        bound: b.bound,
        cold_floor: b.cold_floor(),
    };
    csv_bytes(&[row])
}

#[derive(Serialize)]
struct PartitionCsvRow {
    trial: usize,
    kind: &'static str,
    sets: usize,
    #[serde(rename = "S")]
    size: u64,
    boundary_sum: usize,
    bound: f64,
    margin: f64,
    regime: String,
}

#[derive(Serialize)]
struct FftJson<'a> {
    isoperimetric: &'a IsoReport,
    partitions: &'a [PartitionReport],
}

fn cmd_fft(args: &FftArgs, seed: u64, json: bool) -> Result<(Vec<u8>, Option<Vec<u8>>), CliError> {
    let graph = build_fft(args.n).map_err(invalid)?;
    let strategy = match args.strategy.as_str() {
        "exhaustive" => SubsetStrategy::Exhaustive,
        s => {
            let count = s
                .strip_prefix("random:")
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| invalid(format!("strategy `{s}` must be exhaustive or random:COUNT")))?;
            SubsetStrategy::Random { count, seed }
        }
    };
    let iso = verify_isoperimetric(&graph, strategy).map_err(invalid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut parts = Vec::with_capacity(args.partitions);
    for _ in 0..args.partitions {
        let p = match args.partition_kind {
            PartitionKind::Chunked => chunked_partition(&graph, args.size as usize, &mut rng),
            PartitionKind::Bfs => bfs_partition(&graph, args.size as usize, &mut rng),
        };
        parts.push(verify_partition_bound(&graph, &p, args.size).map_err(invalid)?);
    }
    if !iso.violations.is_empty() {
        eprintln!("isoperimetric violations: {}", iso.violations.len());
    }
    if json {
        return Ok((json_bytes(&FftJson { isoperimetric: &iso, partitions: &parts })?, None));
    }
    let kind = match args.partition_kind {
        PartitionKind::Chunked => "chunked",
        PartitionKind::Bfs => "bfs",
    };
    let prow: Vec<PartitionCsvRow> = parts
        .iter()
        .enumerate()
        .map(|(i, r)| PartitionCsvRow {
            trial: i,
            kind,
            sets: r.sets,
            size: r.size,
            boundary_sum: r.boundary_sum,
            bound: r.bound,
            margin: r.margin,
            regime: serde_json::to_value(r.regime)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
        })
        .collect();
    let iso_csv = csv_with_header(&["subset_size", "delta", "bound", "margin"], &iso.rows)?;
    let part_csv = csv_with_header(
        &["trial", "kind", "sets", "S", "boundary_sum", "bound", "margin", "regime"],
        &prow,
    )?;
    Ok((iso_csv, Some(part_csv)))
}

pub fn lattice_report(shape: &GridShape, size: u64) -> Result<String, CliError> {
    let lat = build_lattice(shape, size).map_err(invalid)?;
    let mut s = String::new();
    let dims: Vec<String> = shape.dims().iter().map(|n| n.to_string()).collect();
    writeln!(s, "grid {} S {}", dims.join("x"), size).unwrap();
    writeln!(s, "det {}", lat.det()).unwrap();
    for row in lat.basis() {
        writeln!(s, "basis {row:?}").unwrap();
    }
    for (name, norm) in [("cube", Norm::Cube), ("ball", Norm::Ball)] {
        let m = lat.minima(norm);
        let k = lat.minkowski(norm);
        writeln!(s, "{name} minima {:?} vectors {:?}", m.values, m.vectors).unwrap();
        writeln!(s, "{name} eccentricity {}", m.eccentricity()).unwrap();
        writeln!(s, "{name} minkowski {} <= {} <= {} {}", k.lower, k.ratio, k.upper, if k.holds() { "ok" } else { "FAILED" })
            .unwrap();
    }
    if (2..=3).contains(&shape.dim()) {
        let b = succmin_block(&lat).map_err(runtime)?;
        writeln!(s, "block halfwidths {:?}", b.halfwidths).unwrap();
        writeln!(s, "block q' surface/volume {}", b.q_prime_surface_to_volume()).unwrap();
        let t = voronoi_tile(&lat).map_err(runtime)?;
        writeln!(s, "voronoi tile points {} boundary {}", t.len(), t.boundary_points()).unwrap();
    }
    Ok(s)
}

#[derive(Serialize)]
struct LatticeJson<'a> {
    grid: &'a [usize],
    size: u64,
    det: i64,
    basis: &'a [Vec<i64>],
    cube: &'a crate::lattice::SuccessiveMinima,
    ball: &'a crate::lattice::SuccessiveMinima,
    cube_minkowski: crate::lattice::MinkowskiCheck,
    ball_minkowski: crate::lattice::MinkowskiCheck,
    block: Option<crate::lattice::SuccMinBlock>,
    voronoi_points: Option<usize>,
}

fn cmd_lattice(args: &LatticeArgs, json: bool) -> Result<Vec<u8>, CliError> {
    let shape = parse_grid(&args.grid)?;
    if !json {
        return Ok(lattice_report(&shape, args.size)?.into_bytes());
    }
    let lat = build_lattice(&shape, args.size).map_err(invalid)?;
    let geom = (2..=3).contains(&shape.dim());
    let block = geom.then(|| succmin_block(&lat)).transpose().map_err(runtime)?;
    let voronoi_points = geom.then(|| voronoi_tile(&lat).map(|t| t.len())).transpose().map_err(runtime)?;
    json_bytes(&LatticeJson {
        grid: shape.dims(),
        size: args.size,
        det: lat.det(),
        basis: lat.basis(),
        cube: lat.minima(Norm::Cube),
        ball: lat.minima(Norm::Ball),
        cube_minkowski: lat.minkowski(Norm::Cube),
        ball_minkowski: lat.minkowski(Norm::Ball),
        block,
        voronoi_points,
    })
}

fn emit(path: Option<&PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(runtime),
        None => std::io::stdout().lock().write_all(bytes).map_err(runtime),
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let main = match &cli.command {
        Command::Tile(a) => cmd_tile(a, cli.json)?,
        Command::Partition(a) => cmd_partition(a, cli.seed, cli.json)?,
        Command::Bounds(a) => cmd_bounds(a, cli.json)?,
        Command::Lattice(a) => cmd_lattice(a, cli.json)?,
        Command::Fft(a) => {
            let (iso, part) = cmd_fft(a, cli.seed, cli.json)?;
            match (part, &a.partition_out) {
                (Some(p), Some(path)) => {
                    emit(Some(path), &p)?;
                    iso
                }
                (Some(p), None) => [iso, b"\n".to_vec(), p].concat(),
                (None, _) => iso,
            }
        }
    };
    emit(cli.out.as_ref(), &main)
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
