use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use super::{UGrid, UnstructuredError};

/// Witness that a grid satisfies both starry properties for `c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarryCert {
    pub longest_edge: f64,
    pub shortest_edge: f64,
    pub closest_pair: f64,
    pub c0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StarryViolation {
    /// `L > c0 * l`.
    EdgeRatio { edge: (usize, usize), length: f64, shortest_edge: f64, c0: f64 },
    /// Two vertices closer than the shortest edge.
    ClosePair { a: usize, b: usize, distance: f64, shortest_edge: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarryReport {
    pub cert: StarryCert,
    pub violations: Vec<StarryViolation>,
}

impl StarryReport {
    pub fn is_starry(&self) -> bool {
        self.violations.is_empty()
    }
}

const REL_EPS: f64 = 1e-9;

/// Closest pair of distinct vertices via a uniform hash grid with cell
/// side `cell`. Only pairs closer than `cell` are guaranteed to be found.
fn closest_pair_below(grid: &UGrid, cell: f64) -> Option<(usize, usize, f64)> {
    let d = grid.dim();
    let key = |v: usize| -> Vec<i64> { grid.point(v).iter().map(|x| (x / cell).floor() as i64).collect() };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for v in 0..grid.len() {
        buckets.entry(key(v)).or_default().push(v);
    }
    let mut best: Option<(usize, usize, f64)> = None;
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let o = (k % 3) as i64 - 1;
                    k /= 3;
                    o
                })
                .collect()
        })
        .collect();
    for v in 0..grid.len() {
        let base = key(v);
        for off in &offsets {
            let cellkey: Vec<i64> = base.iter().zip(off).map(|(b, o)| b + o).collect();
            let Some(list) = buckets.get(&cellkey) else { continue };
            for &u in list.iter().filter(|&&u| u > v) {
                let dist = grid.distance(u, v);
                if best.map_or(true, |(_, _, b)| dist < b) {
                    best = Some((v, u, dist));
                }
            }
        }
    }
    best.filter(|&(_, _, dist)| dist < cell)
}

/// Checks `L <= c0 * l` and that no two vertices are closer than the
/// shortest edge `l`.
pub fn validate_starry(grid: &UGrid, c0: f64) -> Result<StarryReport, UnstructuredError> {
    if grid.is_empty() {
        return Err(UnstructuredError::EmptyGrid);
    }
    let mut longest = (0.0f64, (0, 0));
    let mut shortest = f64::INFINITY;
    for &(a, b) in grid.edges() {
        let len = grid.distance(a, b);
        if len > longest.0 {
            longest = (len, (a, b));
        }
        shortest = shortest.min(len);
    }
    let mut violations = Vec::new();
    if shortest.is_finite() && longest.0 > c0 * shortest * (1.0 + REL_EPS) {
        violations.push(StarryViolation::EdgeRatio {
            edge: longest.1,
            length: longest.0,
            shortest_edge: shortest,
            c0,
        });
    }
    let mut closest = f64::INFINITY;
    if grid.len() > 1 {
        // Pairs closer than l are what matters; if there are no edges look
        // for the closest pair at any scale.
        let cell = if shortest.is_finite() && shortest > 0.0 {
            shortest
        } else {
            bounding_diameter(grid).max(f64::MIN_POSITIVE) * 2.0
        };
        if let Some((a, b, dist)) = closest_pair_below(grid, cell) {
            closest = dist;
            if dist < shortest * (1.0 - REL_EPS) {
                violations.push(StarryViolation::ClosePair { a, b, distance: dist, shortest_edge: shortest });
            }
        } else {
            closest = shortest;
        }
    }
    Ok(StarryReport {
        cert: StarryCert {
            longest_edge: longest.0,
            shortest_edge: if shortest.is_finite() { shortest } else { 0.0 },
            closest_pair: if closest.is_finite() { closest } else { 0.0 },
            c0,
        },
        violations,
    })
}

fn bounding_diameter(grid: &UGrid) -> f64 {
    let d = grid.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for v in 0..grid.len() {
        for (j, &x) in grid.point(v).iter().enumerate() {
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperplaneCut {
    pub direction: Vec<f64>,
    pub threshold: f64,
    pub alpha: f64,
    /// Trisecting slab `[lambda, mu]` along `direction`.
    pub slab: (f64, f64),
    pub cut_edges: Vec<(usize, usize)>,
    /// Vertices with projection below and above the threshold.
    pub sides: [Vec<usize>; 2],
}

pub const ALPHA_RETRIES: usize = 100;

/// Rows of `|(i - alpha)^j|`, `i = 1..3d`, `j = 0..d-1`, normalized.
pub fn vandermonde_directions(d: usize, alpha: f64) -> Vec<Vec<f64>> {
    (1..=3 * d)
        .map(|i| {
            let row: Vec<f64> = (0..d).map(|j| (i as f64 - alpha).powi(j as i32).abs()).collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            row.into_iter().map(|x| x / norm).collect()
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hyperplane cut of the whole grid.
pub fn hyperplane_cut(grid: &UGrid, cert: &StarryCert, rng: &mut impl Rng) -> Result<HyperplaneCut, UnstructuredError> {
    let all: Vec<usize> = (0..grid.len()).collect();
    hyperplane_cut_subset(grid, &all, cert.longest_edge, rng)
}

/// Cuts the subgrid induced by `subset` by the midplane of the emptiest
/// width-`longest_edge` slice of the widest trisecting slab.
pub fn hyperplane_cut_subset(
    grid: &UGrid,
    subset: &[usize],
    longest_edge: f64,
    rng: &mut impl Rng,
) -> Result<HyperplaneCut, UnstructuredError> {
    let m = subset.len();
    if m < 3 {
        return Err(UnstructuredError::TooSmall(m));
    }
    let d = grid.dim();
    let mut chosen = None;
    for _ in 0..ALPHA_RETRIES {
        let alpha = loop {
            let a: f64 = rng.gen();
            if a > 0.0 {
                break a;
            }
        };
        let dirs = vandermonde_directions(d, alpha);
        let proj: Vec<Vec<f64>> = dirs
            .iter()
            .map(|u| {
                let mut p: Vec<f64> = subset.iter().map(|&v| dot(u, grid.point(v))).collect();
                p.sort_by(f64::total_cmp);
                p
            })
            .collect();
        if proj.iter().all(|p| p.windows(2).all(|w| w[0] < w[1])) {
            chosen = Some((alpha, dirs, proj));
            break;
        }
    }
    let (alpha, dirs, proj) = chosen.ok_or(UnstructuredError::NoValidAlpha(ALPHA_RETRIES))?;
    let t = m.div_ceil(3);
    let (best, lambda, mu) = proj
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p[t - 1], p[m - t]))
        .max_by(|a, b| (a.2 - a.1).total_cmp(&(b.2 - b.1)).then(b.0.cmp(&a.0)))
        .expect("at least one direction");
    let width = mu - lambda;
    if !(longest_edge > 0.0) || width < longest_edge {
        return Err(UnstructuredError::SlabTooNarrow { width, longest_edge });
    }
    let p = &proj[best];
    let slices = (width / longest_edge).floor() as usize;
    let mut counts = vec![0usize; slices];
    for &x in p {
        if x >= lambda && x <= lambda + slices as f64 * longest_edge {
            let k = (((x - lambda) / longest_edge) as usize).min(slices - 1);
            counts[k] += 1;
        }
    }
    let slice = (0..slices).min_by_key(|&k| (counts[k], k)).expect("slices >= 1");
    let mut eta = lambda + (slice as f64 + 0.5) * longest_edge;
    if let Ok(i) = p.binary_search_by(|x| x.total_cmp(&eta)) {
        eta = 0.5 * (p[i] + p[i + 1]);
    }
    let u = dirs[best].clone();
    let mut below = Vec::new();
    let mut above = Vec::new();
    let mut side = HashMap::with_capacity(m);
    for &v in subset {
        let lower = dot(&u, grid.point(v)) < eta;
        side.insert(v, lower);
        if lower {
            below.push(v);
        } else {
            above.push(v);
        }
    }
    let mut cut_edges = Vec::new();
    for &v in &below {
        for &w in grid.neighbors(v) {
            if side.get(&w) == Some(&false) {
                cut_edges.push((v.min(w), v.max(w)));
            }
        }
    }
    cut_edges.sort_unstable();
    below.sort_unstable();
    above.sort_unstable();
    Ok(HyperplaneCut {
        direction: u,
        threshold: eta,
        alpha,
        slab: (lambda, mu),
        cut_edges,
        sides: [below, above],
    })
}
