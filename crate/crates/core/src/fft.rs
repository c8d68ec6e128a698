//! The FFT butterfly graph `F_n` and its boundary measures.
//!
//! Vertex `(k, i)` with `0 <= k <= n`, `0 <= i < 2^n` has id `k * 2^n + i`.
//! For `k < n` it is joined to `(k+1, i)` and `(k+1, i ^ 2^k)`.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::Regime;

pub const MAX_LEVELS: u32 = 20;
pub const MAX_EXHAUSTIVE_VERTICES: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FftError {
    #[error("level count {0} outside 1..={MAX_LEVELS}")]
    Levels(u32),
    #[error("subset is empty")]
    EmptySubset,
    #[error("vertex id {0} out of range")]
    Vertex(usize),
    #[error("exhaustive search needs at most {MAX_EXHAUSTIVE_VERTICES} vertices, graph has {0}")]
    TooLargeForExhaustive(usize),
    #[error("cache size must be at least 2, got {0}")]
    CacheSize(u64),
    #[error("vertex {0} is not covered by the partition")]
    Uncovered(usize),
    #[error("vertex {0} appears in more than one set")]
    Duplicate(usize),
    #[error("set {index} has {len} vertices, more than S = {size}")]
    SetTooLarge { index: usize, len: usize, size: u64 },
    #[error("set {0} is empty")]
    EmptySet(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FFTGraph {
    n: u32,
}

pub fn build_fft(n: u32) -> Result<FFTGraph, FftError> {
    if !(1..=MAX_LEVELS).contains(&n) {
        return Err(FftError::Levels(n));
    }
    Ok(FFTGraph { n })
}

impl FFTGraph {
    pub fn levels(&self) -> u32 {
        self.n
    }

    pub fn width(&self) -> usize {
        1 << self.n
    }

    pub fn vertex_count(&self) -> usize {
        (self.n as usize + 1) << self.n
    }

    pub fn edge_count(&self) -> usize {
        (self.n as usize) << (self.n + 1)
    }

    pub fn id(&self, layer: u32, index: usize) -> usize {
        layer as usize * self.width() + index
    }

    pub fn coords(&self, id: usize) -> (u32, usize) {
        ((id / self.width()) as u32, id % self.width())
    }

    pub fn is_outer(&self, id: usize) -> bool {
        let (k, _) = self.coords(id);
        k == 0 || k == self.n
    }

    pub fn neighbors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        let (k, i) = self.coords(id);
        let down = (k > 0).then(|| {
            let bit = 1usize << (k - 1);
            [self.id(k - 1, i), self.id(k - 1, i ^ bit)]
        });
        let up = (k < self.n).then(|| {
            let bit = 1usize << k;
            [self.id(k + 1, i), self.id(k + 1, i ^ bit)]
        });
        down.into_iter().flatten().chain(up.into_iter().flatten())
    }

    pub fn degree(&self, id: usize) -> usize {
        self.neighbors(id).count()
    }

    /// Edges as `(lower, upper)` id pairs, lower layer first.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |k| {
            (0..self.width()).flat_map(move |i| {
                let a = self.id(k, i);
                [(a, self.id(k + 1, i)), (a, self.id(k + 1, i ^ (1 << k)))]
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeltaMeasure {
    pub boundary_nodes: usize,
    pub boundary_edges: usize,
    pub delta: usize,
}

fn membership(graph: &FFTGraph, subset: &[usize]) -> Result<Vec<bool>, FftError> {
    if subset.is_empty() {
        return Err(FftError::EmptySubset);
    }
    let mut inside = vec![false; graph.vertex_count()];
    for &v in subset {
        *inside.get_mut(v).ok_or(FftError::Vertex(v))? = true;
    }
    Ok(inside)
}

fn delta_of(graph: &FFTGraph, inside: &[bool]) -> DeltaMeasure {
    let mut nodes = 0;
    let mut edges = 0;
    for v in (0..inside.len()).filter(|&v| inside[v]) {
        nodes += graph.is_outer(v) as usize;
        edges += graph.neighbors(v).filter(|&u| !inside[u]).count();
    }
    DeltaMeasure {
        boundary_nodes: nodes,
        boundary_edges: edges,
        delta: nodes + edges,
    }
}

/// Outer-layer nodes of `subset` plus edges leaving it.
pub fn delta(graph: &FFTGraph, subset: &[usize]) -> Result<DeltaMeasure, FftError> {
    let inside = membership(graph, subset)?;
    Ok(delta_of(graph, &inside))
}

/// Right-hand side of `|V| <= 2 delta log2 delta`.
pub fn isoperimetric_bound(delta: usize) -> f64 {
    if delta == 0 {
        return 0.0;
    }
    let d = delta as f64;
    2.0 * d * d.log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoRow {
    pub subset_size: usize,
    pub delta: usize,
    pub bound: f64,
    pub margin: f64,
}

impl IsoRow {
    fn new(size: usize, delta: usize) -> IsoRow {
        let bound = isoperimetric_bound(delta);
        IsoRow {
            subset_size: size,
            delta,
            bound,
            margin: bound - size as f64,
        }
    }

    pub fn violated(&self) -> bool {
        self.margin < 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub subset: Vec<usize>,
    pub row: IsoRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoReport {
    pub checked: usize,
    pub rows: Vec<IsoRow>,
    /// Subsets with `delta >= 2` that break the inequality.
    pub violations: Vec<Violation>,
    /// Subsets with `delta < 2`, where `log2 delta <= 0` makes the
    /// inequality vacuous or impossible.
    pub exceptions: Vec<Violation>,
}

impl IsoReport {
    fn collect(results: Vec<(Vec<usize>, IsoRow)>) -> IsoReport {
        let mut report = IsoReport {
            checked: results.len(),
            rows: Vec::with_capacity(results.len()),
            violations: Vec::new(),
            exceptions: Vec::new(),
        };
        for (subset, row) in results {
            if row.delta < 2 {
                report.exceptions.push(Violation { subset, row });
            } else if row.violated() {
                report.violations.push(Violation { subset, row });
            }
            report.rows.push(row);
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetStrategy {
    Exhaustive,
    Random { count: usize, seed: u64 },
}

/// Checks `|V| <= 2 delta(V) log2 delta(V)` on every nonempty subset or on
/// a seeded sample.
pub fn verify_isoperimetric(graph: &FFTGraph, strategy: SubsetStrategy) -> Result<IsoReport, FftError> {
    let nv = graph.vertex_count();
    let results: Vec<(Vec<usize>, IsoRow)> = match strategy {
        SubsetStrategy::Exhaustive => {
            if nv > MAX_EXHAUSTIVE_VERTICES {
                return Err(FftError::TooLargeForExhaustive(nv));
            }
            (1u32..(1u32 << nv))
                .into_par_iter()
                .map(|mask| {
                    let inside: Vec<bool> = (0..nv).map(|v| mask >> v & 1 == 1).collect();
                    let row = IsoRow::new(mask.count_ones() as usize, delta_of(graph, &inside).delta);
                    let subset = (0..nv).filter(|&v| inside[v]).collect();
                    (subset, row)
                })
                .collect()
        }
        SubsetStrategy::Random { count, seed } => {
            let subsets = random_subsets(graph, count, seed);
            subsets
                .into_par_iter()
                .map(|subset| {
                    let inside = membership(graph, &subset).expect("generated subsets are valid");
                    let row = IsoRow::new(subset.len(), delta_of(graph, &inside).delta);
                    (subset, row)
                })
                .collect()
        }
    };
    Ok(IsoReport::collect(results))
}

/// Seeded nonempty subsets: even draws take a uniform random size and a
/// uniform subset of that size, odd draws grow a connected set by random
/// frontier expansion.
pub fn random_subsets(graph: &FFTGraph, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = graph.vertex_count();
    let mut all: Vec<usize> = (0..nv).collect();
    (0..count)
        .map(|draw| {
            let size = rng.gen_range(1..=nv);
            let mut subset = if draw % 2 == 0 {
                let (chosen, _) = all.partial_shuffle(&mut rng, size);
                chosen.to_vec()
            } else {
                grow_connected(graph, size, &mut rng)
            };
            subset.sort_unstable();
            subset
        })
        .collect()
}

fn grow_connected(graph: &FFTGraph, size: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let nv = graph.vertex_count();
    let mut inside = vec![false; nv];
    let start = rng.gen_range(0..nv);
    inside[start] = true;
    let mut chosen = vec![start];
    let mut frontier: Vec<usize> = graph.neighbors(start).collect();
    while chosen.len() < size && !frontier.is_empty() {
        let pick = frontier.swap_remove(rng.gen_range(0..frontier.len()));
        if inside[pick] {
            continue;
        }
        inside[pick] = true;
        chosen.push(pick);
        frontier.extend(graph.neighbors(pick).filter(|&u| !inside[u]));
    }
    chosen
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub sets: usize,
    pub size: u64,
    /// `sum |dV_i|`: nodes with a neighbor in another set, or in an outer layer.
    pub boundary_sum: usize,
    pub bound: f64,
    pub margin: f64,
    pub regime: Regime,
}

impl PartitionReport {
    pub fn holds(&self) -> bool {
        self.margin >= 0.0
    }
}

/// Validates `partition` and compares its boundary sum with `N / (4 log2 S)`.
pub fn verify_partition_bound(
    graph: &FFTGraph,
    partition: &[Vec<usize>],
    size: u64,
) -> Result<PartitionReport, FftError> {
    if size < 2 {
        return Err(FftError::CacheSize(size));
    }
    let nv = graph.vertex_count();
    let mut owner = vec![usize::MAX; nv];
    for (index, set) in partition.iter().enumerate() {
        if set.is_empty() {
            return Err(FftError::EmptySet(index));
        }
        if set.len() as u64 > size {
            return Err(FftError::SetTooLarge { index, len: set.len(), size });
        }
        for &v in set {
            let slot = owner.get_mut(v).ok_or(FftError::Vertex(v))?;
            if *slot != usize::MAX {
                return Err(FftError::Duplicate(v));
            }
            *slot = index;
        }
    }
    if let Some(v) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(FftError::Uncovered(v));
    }
    let boundary_sum = (0..nv)
        .filter(|&v| graph.is_outer(v) || graph.neighbors(v).any(|u| owner[u] != owner[v]))
        .count();
    let bound = nv as f64 / (4.0 * (size as f64).log2());
    Ok(PartitionReport {
        sets: partition.len(),
        size,
        boundary_sum,
        bound,
        margin: boundary_sum as f64 - bound,
        regime: Regime::for_fft(graph.levels(), size),
    })
}

/// Shuffles the vertices and cuts the sequence into chunks of `size`.
pub fn chunked_partition(graph: &FFTGraph, size: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..graph.vertex_count()).collect();
    order.shuffle(rng);
    order.chunks(size.max(1)).map(|c| c.to_vec()).collect()
}

/// Grows breadth-first clusters of at most `size` vertices from random
/// unassigned seeds.
pub fn bfs_partition(graph: &FFTGraph, size: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let nv = graph.vertex_count();
    let size = size.max(1);
    let mut assigned = vec![false; nv];
    let mut seeds: Vec<usize> = (0..nv).collect();
    seeds.shuffle(rng);
    let mut sets = Vec::new();
    for seed in seeds {
        if assigned[seed] {
            continue;
        }
        assigned[seed] = true;
        let mut set = vec![seed];
        let mut queue = VecDeque::from([seed]);
        while let Some(v) = queue.pop_front() {
            for u in graph.neighbors(v) {
                if set.len() == size {
                    break;
                }
                if !assigned[u] {
                    assigned[u] = true;
                    set.push(u);
                    queue.push_back(u);
                }
            }
        }
        sets.push(set);
    }
    sets
}

/// Layer-by-layer partition: consecutive runs of `size` ids.
pub fn layered_partition(graph: &FFTGraph, size: usize) -> Vec<Vec<usize>> {
    let ids: Vec<usize> = (0..graph.vertex_count()).collect();
    ids.chunks(size.max(1)).map(|c| c.to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn sizes_and_degrees() {
        for n in 1..=6 {
            let g = build_fft(n).unwrap();
            assert_eq!(g.vertex_count(), (n as usize + 1) << n);
            assert_eq!(g.edges().count(), g.edge_count());
            for v in 0..g.vertex_count() {
                let want = if g.is_outer(v) { 2 } else { 4 };
                assert_eq!(g.degree(v), want);
            }
        }
        let g = build_fft(1).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (4, 4));
        let g = build_fft(2).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (12, 16));
        assert!(build_fft(0).is_err());
        assert!(build_fft(21).is_err());
    }

    #[test]
    fn neighbors_by_xor_rule() {
        let g = build_fft(2).unwrap();
        let got: BTreeSet<_> = g.neighbors(g.id(1, 0)).map(|v| g.coords(v)).collect();
        let want: BTreeSet<_> = [(0, 0), (0, 1), (2, 0), (2, 2)].into_iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn delta_examples() {
        let g = build_fft(2).unwrap();
        let d = delta(&g, &[g.id(1, 0)]).unwrap();
        assert_eq!((d.boundary_nodes, d.boundary_edges, d.delta), (0, 4, 4));
        assert_eq!(isoperimetric_bound(4), 16.0);
        let all: Vec<usize> = (0..12).collect();
        assert_eq!(delta(&g, &all).unwrap().delta, 8);
        assert_eq!(delta(&g, &[0]).unwrap().delta, 3);
        assert_eq!(delta(&g, &[]).unwrap_err(), FftError::EmptySubset);
    }

    #[test]
    fn removing_last_layer_leaves_two_copies() {
        for n in 2..=6 {
            let g = build_fft(n).unwrap();
            let h = build_fft(n - 1).unwrap();
            let half = h.width();
            let want: BTreeSet<_> = h.edges().collect();
            for copy in 0..2 {
                let map = |v: usize| {
                    let (k, i) = g.coords(v);
                    (i / half == copy).then(|| h.id(k, i % half))
                };
                let got: BTreeSet<_> = g
                    .edges()
                    .filter(|&(_, b)| g.coords(b).0 < n)
                    .filter_map(|(a, b)| Some((map(a)?, map(b)?)))
                    .collect();
                assert_eq!(got, want, "n={n} copy={copy}");
            }
            // no edge below layer n joins the two copies
            assert!(g
                .edges()
                .filter(|&(_, b)| g.coords(b).0 < n)
                .all(|(a, b)| g.coords(a).1 / half == g.coords(b).1 / half));
        }
    }

    #[test]
    fn exhaustive_small() {
        let g = build_fft(1).unwrap();
        let r = verify_isoperimetric(&g, SubsetStrategy::Exhaustive).unwrap();
        assert_eq!(r.checked, 15);
        assert!(r.violations.is_empty());
        let big = build_fft(3).unwrap();
        assert!(verify_isoperimetric(&big, SubsetStrategy::Exhaustive).is_err());
    }

    #[test]
    fn partitions_validated() {
        let g = build_fft(3).unwrap();
        let all: Vec<usize> = (0..g.vertex_count()).collect();
        assert!(matches!(
            verify_partition_bound(&g, &[all], 4),
            Err(FftError::SetTooLarge { .. })
        ));
        let mut p = layered_partition(&g, 4);
        p[0].push(5);
        assert_eq!(verify_partition_bound(&g, &p, 8).unwrap_err(), FftError::Duplicate(5));
        let mut p = layered_partition(&g, 4);
        p.pop();
        assert!(matches!(verify_partition_bound(&g, &p, 4), Err(FftError::Uncovered(_))));
    }

    #[test]
    fn partition_regime_flag() {
        let g = build_fft(10).unwrap();
        let r = verify_partition_bound(&g, &layered_partition(&g, 2), 2).unwrap();
        assert_eq!(r.regime, Regime::Outside);
        assert!(r.bound > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = build_fft(8).unwrap();
        for p in [chunked_partition(&g, 4, &mut rng), bfs_partition(&g, 4, &mut rng)] {
            let r = verify_partition_bound(&g, &p, 4).unwrap();
            assert!(r.boundary_sum as f64 >= 9.0 * 256.0 / 8.0);
        }
    }

    #[test]
    fn random_subsets_reproducible() {
        let g = build_fft(4).unwrap();
        assert_eq!(random_subsets(&g, 50, 3), random_subsets(&g, 50, 3));
        assert!(random_subsets(&g, 50, 3).iter().all(|s| !s.is_empty()));
    }
}
