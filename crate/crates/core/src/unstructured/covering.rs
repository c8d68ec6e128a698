use std::collections::VecDeque;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::starry::hyperplane_cut_subset;
use super::{UGrid, UnstructuredError};

/// Disjoint vertex sets covering the grid, with the memory order that
/// stores each set contiguously.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Covering {
    pub sets: Vec<Vec<usize>>,
    set_of: Vec<usize>,
    /// `order[p]` is the vertex stored at memory position `p`.
    pub order: Vec<usize>,
}

impl Covering {
    /// Builds a covering of `n` vertices from `sets`, which must partition
    /// `0..n`. Vertices of each set are stored in increasing id order.
    pub fn from_sets(n: usize, sets: Vec<Vec<usize>>) -> Result<Covering, UnstructuredError> {
        let mut set_of = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut sets = sets;
        for (i, set) in sets.iter_mut().enumerate() {
            set.sort_unstable();
            for &v in set.iter() {
                let slot = set_of
                    .get_mut(v)
                    .ok_or(UnstructuredError::VertexOutOfRange { vertex: v, count: n })?;
                if *slot != usize::MAX {
                    return Err(UnstructuredError::NotAPartition(format!("vertex {v} in two sets")));
                }
                *slot = i;
                order.push(v);
            }
        }
        if let Some(v) = set_of.iter().position(|&s| s == usize::MAX) {
            return Err(UnstructuredError::NotAPartition(format!("vertex {v} uncovered")));
        }
        Ok(Covering { sets, set_of, order })
    }

    pub fn set_of(&self, v: usize) -> usize {
        self.set_of[v]
    }

    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Memory position of every vertex.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (p, &v) in self.order.iter().enumerate() {
            pos[v] = p;
        }
        pos
    }

    /// Edges joining different sets.
    pub fn boundary_edges(&self, grid: &UGrid) -> usize {
        grid.edges().iter().filter(|&&(a, b)| self.set_of[a] != self.set_of[b]).count()
    }

    /// Vertices incident to an edge joining different sets.
    pub fn boundary_vertices(&self, grid: &UGrid) -> usize {
        (0..grid.len())
            .filter(|&v| grid.neighbors(v).iter().any(|&u| self.set_of[u] != self.set_of[v]))
            .count()
    }

    /// One line per vertex: `vertex_id set_id memory_position`.
    pub fn write(&self, mut out: impl Write) -> std::io::Result<()> {
        let pos = self.positions();
        for v in 0..self.set_of.len() {
            writeln!(out, "{} {} {}", v, self.set_of[v], pos[v])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutMethod {
    Hyperplane,
    BfsLevel,
    Median,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutRecord {
    /// Tree node whose component was cut.
    pub node: usize,
    pub input_size: usize,
    pub part_sizes: Vec<usize>,
    pub cut_edges: usize,
    pub method: CutMethod,
    /// True for the additional cut that brings every part to at most half.
    pub extra: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeNode {
    pub size: usize,
    pub weight: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Sizes of components of at most `S` split off from this node; they
    /// become covering sets and are not tree nodes.
    pub excluded: Vec<usize>,
    pub cut_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSummary {
    pub checked: usize,
    pub skipped: usize,
    pub violations: usize,
    pub bound: f64,
    pub max_ratio: f64,
}

/// Recursion tree of a covering; node weights are `s^((d-1)/d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutTree {
    pub dim: usize,
    pub nodes: Vec<TreeNode>,
}

impl CutTree {
    pub fn weight_of(size: usize, dim: usize) -> f64 {
        (size as f64).powf((dim as f64 - 1.0) / dim as f64)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sigma(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.children.is_empty())
    }

    pub fn leaf_weight_sum(&self) -> f64 {
        self.leaves().map(|n| n.weight).sum()
    }

    pub fn total_cut_edges(&self) -> usize {
        self.nodes.iter().map(|n| n.cut_edges).sum()
    }

    /// Parent sizes equal children plus excluded sizes and every node
    /// exceeds `size_limit`.
    pub fn is_consistent(&self, size_limit: usize) -> bool {
        self.nodes.iter().all(|n| {
            let below: usize = n.children.iter().map(|&c| self.nodes[c].size).sum::<usize>()
                + n.excluded.iter().sum::<usize>();
            n.size > size_limit && (n.children.is_empty() && n.excluded.is_empty() || below == n.size)
        })
    }

    /// Checks `w(t) <= 2^(-1/d) sum w(children)` at internal nodes whose
    /// children exhaust the node and satisfy `max <= sum of the rest`.
    /// That is the weight inequality with exponent `(d-1)/d`; for `d = 2`
    /// the factor is `1/sqrt 2`.
    pub fn weight_checks(&self) -> WeightSummary {
        let bound = 2f64.powf(-1.0 / self.dim as f64);
        let mut s = WeightSummary { checked: 0, skipped: 0, violations: 0, bound, max_ratio: 0.0 };
        for n in self.nodes.iter().filter(|n| !n.children.is_empty()) {
            let sizes: Vec<usize> = n.children.iter().map(|&c| self.nodes[c].size).collect();
            let total: usize = sizes.iter().sum();
            let largest = *sizes.iter().max().unwrap();
            if !n.excluded.is_empty() || sizes.len() < 2 || 2 * largest > total {
                s.skipped += 1;
                continue;
            }
            s.checked += 1;
            let ratio = n.weight / n.children.iter().map(|&c| self.nodes[c].weight).sum::<f64>();
            s.max_ratio = s.max_ratio.max(ratio);
            if ratio > bound * (1.0 + 1e-12) {
                s.violations += 1;
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringReport {
    pub covering: Covering,
    pub tree: CutTree,
    pub cuts: Vec<CutRecord>,
    /// Cuts that fell back to a coordinate median split.
    pub fallbacks: usize,
    pub warnings: Vec<String>,
}

impl CoveringReport {
    pub fn boundary_vertices(&self, grid: &UGrid) -> usize {
        self.covering.boundary_vertices(grid)
    }

    pub fn boundary_edges(&self, grid: &UGrid) -> usize {
        self.covering.boundary_edges(grid)
    }
}

/// Result of one separator application.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub parts: Vec<Vec<usize>>,
    pub cut_edges: usize,
    pub method: CutMethod,
}

/// Splits a connected vertex set into parts.
pub trait Separator {
    fn separate(&mut self, grid: &UGrid, set: &[usize]) -> Split;
}

fn count_cut(grid: &UGrid, parts: &[Vec<usize>]) -> usize {
    let mut label = vec![usize::MAX; grid.len()];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            label[v] = i;
        }
    }
    parts
        .iter()
        .flatten()
        .map(|&v| {
            grid.neighbors(v)
                .iter()
                .filter(|&&u| u > v && label[u] != usize::MAX && label[u] != label[v])
                .count()
        })
        .sum()
}

/// Halves `set` at the median along its widest coordinate.
pub fn median_split(grid: &UGrid, set: &[usize]) -> Split {
    let d = grid.dim();
    let extent = |j: usize| {
        let (lo, hi) = set.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            let x = grid.point(v)[j];
            (lo.min(x), hi.max(x))
        });
        hi - lo
    };
    let axis = (0..d).max_by(|&a, &b| extent(a).total_cmp(&extent(b)).then(b.cmp(&a))).unwrap_or(0);
    let mut sorted = set.to_vec();
    sorted.sort_by(|&a, &b| grid.point(a)[axis].total_cmp(&grid.point(b)[axis]).then(a.cmp(&b)));
    let upper = sorted.split_off(sorted.len() / 2);
    let parts = vec![sorted, upper];
    Split { cut_edges: count_cut(grid, &parts), parts, method: CutMethod::Median }
}

/// Breadth-first level separator: levels from a far vertex found by a
/// double sweep, cut between the two adjacent levels with the fewest
/// edges among cuts leaving both sides within a third of the set.
#[derive(Debug, Clone, Copy, Default)]
pub struct BfsLevelSeparator;

fn bfs_levels(grid: &UGrid, inside: &[bool], start: usize) -> Vec<(usize, usize)> {
    let mut seen = vec![false; grid.len()];
    let mut out = Vec::new();
    let mut queue = VecDeque::from([(start, 0usize)]);
    seen[start] = true;
    while let Some((v, l)) = queue.pop_front() {
        out.push((v, l));
        for &u in grid.neighbors(v) {
            if inside[u] && !seen[u] {
                seen[u] = true;
                queue.push_back((u, l + 1));
            }
        }
    }
    out
}

impl Separator for BfsLevelSeparator {
    fn separate(&mut self, grid: &UGrid, set: &[usize]) -> Split {
        let m = set.len();
        let mut inside = vec![false; grid.len()];
        for &v in set {
            inside[v] = true;
        }
        let first = *set.iter().min().expect("nonempty set");
        let far = bfs_levels(grid, &inside, first).last().unwrap().0;
        let order = bfs_levels(grid, &inside, far);
        let height = order.last().unwrap().1;
        let mut level = vec![usize::MAX; grid.len()];
        let mut counts = vec![0usize; height + 1];
        for &(v, l) in &order {
            level[v] = l;
            counts[l] += 1;
        }
        let mut between = vec![0usize; height + 1];
        for &(v, l) in &order {
            between[l] += grid.neighbors(v).iter().filter(|&&u| inside[u] && level[u] == l + 1).count();
        }
        let mut below = 0;
        let mut best: Option<(bool, usize, usize, usize)> = None;
        for l in 0..height {
            below += counts[l];
            let balanced = 3 * below >= m && 3 * below <= 2 * m;
            let imbalance = (2 * below).abs_diff(m);
            // balanced first, then fewest edges, then closest to half
            let key = (!balanced, if balanced { between[l] } else { 0 }, imbalance, l);
            if best.map_or(true, |b| key < b) {
                best = Some(key);
            }
        }
        let (parts, cut) = match best {
            Some((_, _, _, l)) => {
                let mut lower = Vec::new();
                let mut upper = Vec::new();
                for &v in set {
                    if level[v] <= l {
                        lower.push(v);
                    } else {
                        upper.push(v);
                    }
                }
                (vec![lower, upper], between[l])
            }
            None => (vec![set.to_vec()], 0),
        };
        // vertices the search never reached form their own part
        let mut parts = parts;
        let unreached: Vec<usize> = set.iter().copied().filter(|&v| level[v] == usize::MAX).collect();
        if !unreached.is_empty() {
            for p in parts.iter_mut() {
                p.retain(|&v| level[v] != usize::MAX);
            }
            parts.push(unreached);
        }
        parts.retain(|p| !p.is_empty());
        Split { parts, cut_edges: cut, method: CutMethod::BfsLevel }
    }
}

/// Hyperplane cuts with a median fallback when the slab argument fails.
struct HyperplaneSeparator {
    longest_edge: f64,
    rng: ChaCha8Rng,
}

impl Separator for HyperplaneSeparator {
    fn separate(&mut self, grid: &UGrid, set: &[usize]) -> Split {
        match hyperplane_cut_subset(grid, set, self.longest_edge, &mut self.rng) {
            Ok(cut) => Split {
                cut_edges: cut.cut_edges.len(),
                parts: cut.sides.into_iter().collect(),
                method: CutMethod::Hyperplane,
            },
            Err(_) => median_split(grid, set),
        }
    }
}

struct MedianSeparator;

impl Separator for MedianSeparator {
    fn separate(&mut self, grid: &UGrid, set: &[usize]) -> Split {
        median_split(grid, set)
    }
}

const EXTRA_STEPS: usize = 8;

struct Builder<'a> {
    grid: &'a UGrid,
    size: usize,
    dim: usize,
    sets: Vec<Vec<usize>>,
    nodes: Vec<TreeNode>,
    cuts: Vec<CutRecord>,
    warnings: Vec<String>,
}

impl Builder<'_> {
    fn add_node(&mut self, comp: &[usize], parent: Option<usize>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            size: comp.len(),
            weight: CutTree::weight_of(comp.len(), self.dim),
            parent,
            children: Vec::new(),
            excluded: Vec::new(),
            cut_edges: 0,
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        id
    }

    fn place(&mut self, comp: Vec<usize>, parent: Option<usize>, sep: &mut dyn Separator) {
        if comp.len() <= self.size {
            if let Some(p) = parent {
                self.nodes[p].excluded.push(comp.len());
            }
            self.sets.push(comp);
        } else {
            let id = self.add_node(&comp, parent);
            self.refine(id, comp, sep);
        }
    }

    fn cut(&mut self, node: usize, set: &[usize], extra: bool, sep: &mut dyn Separator) -> Vec<Vec<usize>> {
        let split = sep.separate(self.grid, set);
        self.nodes[node].cut_edges += split.cut_edges;
        self.cuts.push(CutRecord {
            node,
            input_size: set.len(),
            part_sizes: split.parts.iter().map(Vec::len).collect(),
            cut_edges: split.cut_edges,
            method: split.method,
            extra,
        });
        split
            .parts
            .iter()
            .flat_map(|p| self.grid.components_within(p))
            .collect()
    }

    fn refine(&mut self, node: usize, set: Vec<usize>, sep: &mut dyn Separator) {
        let m = set.len();
        let mut comps = self.cut(node, &set, false, sep);
        if comps.len() == 1 {
            comps = self.cut(node, &set, false, &mut MedianSeparator);
        }
        let mut steps = 0;
        while let Some(big) = comps.iter().position(|c| 2 * c.len() > m) {
            if steps == EXTRA_STEPS {
                self.warnings.push(format!("node {node}: part of {} exceeds half of {m}", comps[big].len()));
                break;
            }
            let piece = comps.swap_remove(big);
            let mut more = self.cut(node, &piece, true, sep);
            if more.len() == 1 {
                more = self.cut(node, &piece, true, &mut MedianSeparator);
            }
            comps.extend(more);
            steps += 1;
        }
        comps.sort_by_key(|c| c[0]);
        for c in comps {
            self.place(c, Some(node), sep);
        }
    }
}

fn build_covering(
    grid: &UGrid,
    size: usize,
    dim: usize,
    sep: &mut dyn Separator,
) -> Result<CoveringReport, UnstructuredError> {
    if grid.is_empty() {
        return Err(UnstructuredError::EmptyGrid);
    }
    if size == 0 {
        return Err(UnstructuredError::ZeroSetSize);
    }
    let mut b = Builder {
        grid,
        size,
        dim,
        sets: Vec::new(),
        nodes: Vec::new(),
        cuts: Vec::new(),
        warnings: Vec::new(),
    };
    for comp in grid.connected_components() {
        b.place(comp, None, sep);
    }
    let fallbacks = b.cuts.iter().filter(|c| c.method == CutMethod::Median).count();
    Ok(CoveringReport {
        covering: Covering::from_sets(grid.len(), b.sets)?,
        tree: CutTree { dim, nodes: b.nodes },
        cuts: b.cuts,
        fallbacks,
        warnings: b.warnings,
    })
}

/// Recursive hyperplane-cut covering of a starry grid into sets of at
/// most `size` vertices. Cut directions depend on `seed`.
pub fn starry_covering(grid: &UGrid, size: usize, seed: u64) -> Result<CoveringReport, UnstructuredError> {
    let mut sep = HyperplaneSeparator { longest_edge: grid.longest_edge(), rng: ChaCha8Rng::seed_from_u64(seed) };
    build_covering(grid, size, grid.dim(), &mut sep)
}

/// Recursive separator covering of a planar grid, tree weights `sqrt s`.
pub fn planar_covering(grid: &UGrid, size: usize) -> Result<CoveringReport, UnstructuredError> {
    planar_covering_with(grid, size, &mut BfsLevelSeparator)
}

pub fn planar_covering_with(
    grid: &UGrid,
    size: usize,
    sep: &mut dyn Separator,
) -> Result<CoveringReport, UnstructuredError> {
    let mut report = build_covering(grid, size, 2, sep)?;
    let (n, e) = (grid.len(), grid.edges().len());
    if n >= 3 && e > 3 * n - 6 {
        report
            .warnings
            .insert(0, format!("{e} edges exceed 3|V| - 6 = {}: grid is not planar", 3 * n - 6));
    }
    Ok(report)
}
