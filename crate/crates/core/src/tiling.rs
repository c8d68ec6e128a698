//! Traversal orders for structured grids and a stencil driver that feeds
//! them through the cache simulator.
//!
//! A traversal lists the interior points (those at distance `>= r` from
//! every face) as linear addresses. Tiled traversals group the points by
//! tile, visit tiles in lexicographic anchor order (last axis most
//! significant) and points inside a tile in address order.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::cache::{AccessOutcome, AccessStats, CacheConfig, CacheState};
use crate::lattice::{build_lattice, succmin_block, voronoi_tile, GridShape, LatticeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TilingError {
    #[error("grid extent {extent} along axis {axis} must exceed 2r = {}", 2 * radius)]
    Degenerate {
        axis: usize,
        extent: usize,
        radius: usize,
    },
    #[error("stencil radius must be positive")]
    ZeroRadius,
    #[error("stencil dimension {stencil} does not match grid dimension {grid}")]
    DimensionMismatch { stencil: usize, grid: usize },
    #[error("arrays u [{u_base}, +{len}) and q [{q_base}, +{len}) overlap")]
    Overlap { u_base: u64, q_base: u64, len: u64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Symmetric star stencil: the center plus `+-k e_j` for `k = 1..=r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stencil {
    pub name: String,
    pub radius: usize,
    pub offsets: Vec<Vec<i64>>,
}

impl Stencil {
    pub fn star(dim: usize, radius: usize) -> Result<Self, TilingError> {
        if radius == 0 {
            return Err(TilingError::ZeroRadius);
        }
        let mut offsets = vec![vec![0i64; dim]];
        for j in 0..dim {
            for k in 1..=radius as i64 {
                for sign in [-1, 1] {
                    let mut o = vec![0i64; dim];
                    o[j] = sign * k;
                    offsets.push(o);
                }
            }
        }
        Ok(Self {
            name: format!("star{}", offsets.len()),
            radius,
            offsets,
        })
    }

    pub fn dim(&self) -> usize {
        self.offsets[0].len()
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.offsets.iter().all(|o| {
            let neg: Vec<i64> = o.iter().map(|x| -x).collect();
            self.offsets.contains(&neg)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraversalKind {
    Canonical,
    Voronoi,
    Succmin,
}

impl TraversalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraversalKind::Canonical => "canonical",
            TraversalKind::Voronoi => "voronoi",
            TraversalKind::Succmin => "succmin",
        }
    }
}

impl std::str::FromStr for TraversalKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical" => Ok(TraversalKind::Canonical),
            "voronoi" => Ok(TraversalKind::Voronoi),
            "succmin" => Ok(TraversalKind::Succmin),
            other => Err(format!("unknown traversal kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Traversal {
    pub kind: TraversalKind,
    /// Interior points as linear addresses, in visit order.
    pub order: Vec<usize>,
    /// Start of each tile inside `order`; a canonical traversal is one tile.
    pub tile_starts: Vec<usize>,
}

impl Traversal {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn tiles(&self) -> impl Iterator<Item = &[usize]> + '_ {
        let ends = self.tile_starts.iter().skip(1).copied().chain([self.order.len()]);
        self.tile_starts
            .iter()
            .zip(ends)
            .map(move |(&a, b)| &self.order[a..b])
    }

    /// Whether `order` visits every interior point exactly once.
    pub fn is_interior_permutation(&self, shape: &GridShape, radius: usize) -> bool {
        let Ok(expected) = interior_count(shape, radius) else {
            return false;
        };
        if self.order.len() != expected {
            return false;
        }
        let mut seen = vec![false; shape.len()];
        for &a in &self.order {
            if a >= seen.len() || seen[a] || !is_interior(shape, a, radius) {
                return false;
            }
            seen[a] = true;
        }
        true
    }
}

fn is_interior(shape: &GridShape, address: usize, radius: usize) -> bool {
    shape
        .index_of(address)
        .iter()
        .zip(shape.dims())
        .all(|(&i, &n)| i >= radius as i64 && i < (n - radius) as i64)
}

fn check_extents(shape: &GridShape, radius: usize) -> Result<(), TilingError> {
    if radius == 0 {
        return Err(TilingError::ZeroRadius);
    }
    for (axis, &extent) in shape.dims().iter().enumerate() {
        if extent <= 2 * radius {
            return Err(TilingError::Degenerate {
                axis,
                extent,
                radius,
            });
        }
    }
    Ok(())
}

/// `prod(n_i - 2r)`.
pub fn interior_count(shape: &GridShape, radius: usize) -> Result<usize, TilingError> {
    check_extents(shape, radius)?;
    Ok(shape.dims().iter().map(|&n| n - 2 * radius).product())
}

/// Visits every integer point of the box `lo..=hi` in address order (first
/// axis fastest).
fn for_each_in_box_address_order(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    let d = lo.len();
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return;
    }
    let mut x = lo.to_vec();
    loop {
        f(&x);
        let mut j = 0;
        loop {
            if j == d {
                return;
            }
            if x[j] < hi[j] {
                x[j] += 1;
                break;
            }
            x[j] = lo[j];
            j += 1;
        }
    }
}

/// Interior points in address order.
pub fn canonical_traversal(shape: &GridShape, radius: usize) -> Result<Traversal, TilingError> {
    check_extents(shape, radius)?;
    let r = radius as i64;
    let lo = vec![r; shape.dim()];
    let hi: Vec<i64> = shape.dims().iter().map(|&n| n as i64 - r - 1).collect();
    let mut order = Vec::with_capacity(interior_count(shape, radius)?);
    for_each_in_box_address_order(&lo, &hi, |x| order.push(shape.address(x) as usize));
    Ok(Traversal {
        kind: TraversalKind::Canonical,
        order,
        tile_starts: vec![0],
    })
}

/// Compares anchors with the last axis most significant.
fn anchor_cmp(a: &[i64], b: &[i64]) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

/// Interior points grouped into conflict-free tiles of the interference
/// lattice for a cache of `size` words.
pub fn tiled_traversal(
    shape: &GridShape,
    size: u64,
    kind: TraversalKind,
    radius: usize,
) -> Result<Traversal, TilingError> {
    check_extents(shape, radius)?;
    match kind {
        TraversalKind::Canonical => canonical_traversal(shape, radius),
        TraversalKind::Succmin => succmin_traversal(shape, size, radius),
        TraversalKind::Voronoi => voronoi_traversal(shape, size, radius),
    }
}

fn interior_bounds(shape: &GridShape, radius: usize) -> (Vec<i64>, Vec<i64>) {
    let r = radius as i64;
    let lo = vec![r; shape.dim()];
    let hi = shape.dims().iter().map(|&n| n as i64 - r - 1).collect();
    (lo, hi)
}

fn succmin_traversal(
    shape: &GridShape,
    size: u64,
    radius: usize,
) -> Result<Traversal, TilingError> {
    let lattice = build_lattice(shape, size)?;
    let block = succmin_block(&lattice)?;
    let sides = block.tile_sides();
    let (lo, hi) = interior_bounds(shape, radius);
    let d = shape.dim();
    let counts: Vec<i64> = (0..d)
        .map(|j| (hi[j] - lo[j] + sides[j]) / sides[j])
        .collect();

    let mut order = Vec::with_capacity(interior_count(shape, radius)?);
    let mut tile_starts = Vec::new();
    let zeros = vec![0i64; d];
    let last: Vec<i64> = counts.iter().map(|c| c - 1).collect();
    for_each_in_box_address_order(&zeros, &last, |tile| {
        let tlo: Vec<i64> = (0..d).map(|j| lo[j] + tile[j] * sides[j]).collect();
        let thi: Vec<i64> = (0..d).map(|j| (tlo[j] + sides[j] - 1).min(hi[j])).collect();
        tile_starts.push(order.len());
        for_each_in_box_address_order(&tlo, &thi, |x| order.push(shape.address(x) as usize));
    });
    Ok(Traversal {
        kind: TraversalKind::Succmin,
        order,
        tile_starts,
    })
}

fn voronoi_traversal(
    shape: &GridShape,
    size: u64,
    radius: usize,
) -> Result<Traversal, TilingError> {
    let lattice = build_lattice(shape, size)?;
    let tile = voronoi_tile(&lattice)?;
    let (lo, hi) = interior_bounds(shape, radius);
    let d = shape.dim();
    let reach = tile.max_distance.ceil() as i64;
    let clo: Vec<i64> = lo.iter().map(|v| v - reach).collect();
    let chi: Vec<i64> = hi.iter().map(|v| v + reach).collect();
    let mut centers = Vec::new();
    lattice.for_each_in_range(&clo, &chi, |c| centers.push(c.to_vec()));
    centers.sort_by(|a, b| anchor_cmp(a, b));

    let mut order = Vec::with_capacity(interior_count(shape, radius)?);
    let mut tile_starts = Vec::new();
    let mut x = vec![0i64; d];
    for c in &centers {
        let start = order.len();
        for t in &tile.points {
            let mut inside = true;
            for j in 0..d {
                x[j] = c[j] + t[j];
                inside &= x[j] >= lo[j] && x[j] <= hi[j];
            }
            if inside {
                order.push(shape.address(&x) as usize);
            }
        }
        if order.len() > start {
            tile_starts.push(start);
        }
    }
    Ok(Traversal {
        kind: TraversalKind::Voronoi,
        order,
        tile_starts,
    })
}

/// Base addresses of the input array `u` and output array `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Layout {
    pub u_base: u64,
    pub q_base: u64,
}

impl Layout {
    /// `u` at 0 followed directly by `q`.
    pub fn back_to_back(shape: &GridShape) -> Self {
        Self {
            u_base: 0,
            q_base: shape.len() as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StencilStats {
    pub u: AccessStats,
    pub q: AccessStats,
    pub total: AccessStats,
}

/// Runs a pointwise stencil sweep through the cache: for each point, reads
/// of `u` at every offset, then one write-allocate access to `q`.
pub fn simulate_stencil(
    shape: &GridShape,
    traversal: &Traversal,
    stencil: &Stencil,
    config: CacheConfig,
    layout: Layout,
) -> Result<StencilStats, TilingError> {
    if stencil.dim() != shape.dim() {
        return Err(TilingError::DimensionMismatch {
            stencil: stencil.dim(),
            grid: shape.dim(),
        });
    }
    let len = shape.len() as u64;
    let (u0, q0) = (layout.u_base, layout.q_base);
    if u0 < q0 + len && q0 < u0 + len {
        return Err(TilingError::Overlap {
            u_base: u0,
            q_base: q0,
            len,
        });
    }
    let deltas: Vec<i64> = stencil.offsets.iter().map(|o| shape.address(o)).collect();
    let mut state = CacheState::new(config);
    let mut u = AccessStats::default();
    let mut q = AccessStats::default();
    for &a in &traversal.order {
        let base = u0 as i64 + a as i64;
        for &delta in &deltas {
            let outcome: AccessOutcome = state.access((base + delta) as u64);
            u.record(outcome);
        }
        q.record(state.access(q0 + a as u64));
    }
    Ok(StencilStats {
        u,
        q,
        total: state.stats(),
    })
}
