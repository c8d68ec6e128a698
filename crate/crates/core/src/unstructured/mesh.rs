use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::UnstructuredError;

/// An embedded grid: points in `R^d` plus undirected edges.
#[derive(Debug, Clone, PartialEq)]
pub struct UGrid {
    dim: usize,
    coords: Vec<f64>,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    adjacency: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct MeshJson {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    edges: Vec<[usize; 2]>,
}

impl UGrid {
    /// `coords` holds `dim` values per vertex. Duplicate edges are merged;
    /// self-loops are rejected.
    pub fn new(dim: usize, coords: Vec<f64>, edges: &[(usize, usize)]) -> Result<UGrid, UnstructuredError> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(UnstructuredError::CoordinateCount { dim, values: coords.len() });
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(UnstructuredError::Parse { line: 0, message: format!("non-finite coordinate {bad}") });
        }
        let n = coords.len() / dim;
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(UnstructuredError::VertexOutOfRange { vertex: a.max(b), count: n });
            }
            if a == b {
                return Err(UnstructuredError::SelfLoop(a));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        let mut degree = vec![0usize; n + 1];
        for &(a, b) in &list {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![0usize; offsets[n]];
        for &(a, b) in &list {
            adjacency[fill[a]] = b;
            fill[a] += 1;
            adjacency[fill[b]] = a;
            fill[b] += 1;
        }
        Ok(UGrid { dim, coords, edges: list, offsets, adjacency })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    /// Edges as `(low, high)` pairs in sorted order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.point(a)
            .iter()
            .zip(self.point(b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    pub fn longest_edge(&self) -> f64 {
        self.edges.iter().map(|&(a, b)| self.distance(a, b)).fold(0.0, f64::max)
    }

    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.len()).collect();
        self.components_within(&all)
    }

    /// Components of the subgraph induced by `subset`, each sorted, ordered
    /// by smallest vertex id.
    pub fn components_within(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let mut state = vec![0u8; self.len()];
        for &v in subset {
            state[v] = 1;
        }
        let mut starts = subset.to_vec();
        starts.sort_unstable();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in starts {
            if state[s] != 1 {
                continue;
            }
            state[s] = 2;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &u in self.neighbors(v) {
                    if state[u] == 1 {
                        state[u] = 2;
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Drops the vertices flagged in `remove` and renumbers the rest in order.
    pub fn without_vertices(&self, remove: &[bool]) -> UGrid {
        let mut map = vec![usize::MAX; self.len()];
        let mut coords = Vec::new();
        for v in 0..self.len() {
            if !remove[v] {
                map[v] = coords.len() / self.dim;
                coords.extend_from_slice(self.point(v));
            }
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(a, b)| !remove[a] && !remove[b])
            .map(|&(a, b)| (map[a], map[b]))
            .collect();
        UGrid::new(self.dim, coords, &edges).expect("subgraph of a valid grid")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} {} {}", self.dim, self.len(), self.edges.len()).unwrap();
        for v in 0..self.len() {
            let p: Vec<String> = self.point(v).iter().map(|x| x.to_string()).collect();
            writeln!(s, "{}", p.join(" ")).unwrap();
        }
        for &(a, b) in &self.edges {
            writeln!(s, "{a} {b}").unwrap();
        }
        s
    }

    pub fn to_json(&self) -> String {
        let m = MeshJson {
            dim: self.dim,
            vertices: (0..self.len()).map(|v| self.point(v).to_vec()).collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string(&m).expect("mesh serializes")
    }

    pub fn from_json(text: &str) -> Result<UGrid, UnstructuredError> {
        let m: MeshJson = serde_json::from_str(text)
            .map_err(|e| UnstructuredError::Parse { line: e.line(), message: e.to_string() })?;
        let mut coords = Vec::with_capacity(m.vertices.len() * m.dim);
        for (i, p) in m.vertices.iter().enumerate() {
            if p.len() != m.dim {
                return Err(UnstructuredError::Parse {
                    line: 0,
                    message: format!("vertex {i} has {} coordinates, expected {}", p.len(), m.dim),
                });
            }
            coords.extend_from_slice(p);
        }
        let edges: Vec<(usize, usize)> = m.edges.iter().map(|e| (e[0], e[1])).collect();
        UGrid::new(m.dim, coords, &edges)
    }

    /// Parses the text format: a `d nv ne` header, `nv` coordinate lines
    /// and `ne` lines of two 0-based vertex ids. Blank lines and `#`
    /// comments are skipped.
    pub fn from_text(text: &str) -> Result<UGrid, UnstructuredError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_err = |line: usize, message: String| UnstructuredError::Parse { line, message };
        let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "missing header".into()))?;
        let h: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| parse_err(hl, format!("header: {e}"))))
            .collect::<Result<_, _>>()?;
        let [dim, nv, ne] = h[..] else {
            return Err(parse_err(hl, "header must be `d nv ne`".into()));
        };
        let mut coords = Vec::with_capacity(nv * dim);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "too few vertex lines".into()))?;
            let p: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| parse_err(ln, e.to_string())))
                .collect::<Result<_, _>>()?;
            if p.len() != dim {
                return Err(parse_err(ln, format!("expected {dim} coordinates, got {}", p.len())));
            }
            coords.extend(p);
        }
        let mut edges = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "too few edge lines".into()))?;
            let e: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| parse_err(ln, e.to_string())))
                .collect::<Result<_, _>>()?;
            let [a, b] = e[..] else {
                return Err(parse_err(ln, "edge line must hold two ids".into()));
            };
            edges.push((a, b));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(parse_err(ln, "trailing content".into()));
        }
        UGrid::new(dim, coords, &edges)
    }
}

/// Reads a mesh file; JSON when the extension is `.json` or the content
/// starts with `{`.
pub fn read_mesh(path: &Path) -> Result<UGrid, UnstructuredError> {
    let text = std::fs::read_to_string(path)?;
    let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    if is_json {
        UGrid::from_json(&text)
    } else {
        UGrid::from_text(&text)
    }
}

/// Reads a text mesh from any buffered reader.
pub fn read_mesh_from(reader: impl BufRead) -> Result<UGrid, UnstructuredError> {
    let text = std::io::read_to_string(reader)?;
    UGrid::from_text(&text)
}

pub fn write_mesh(grid: &UGrid, mut out: impl Write) -> std::io::Result<()> {
    out.write_all(grid.to_text().as_bytes())
}

/// Axis-aligned unit grid with nearest-neighbor edges; `i_1` varies fastest.
pub fn structured_grid(dims: &[usize]) -> UGrid {
    let d = dims.len();
    let n: usize = dims.iter().product();
    let mut coords = Vec::with_capacity(n * d);
    let mut edges = Vec::new();
    let mut stride = vec![1usize; d];
    for j in 1..d {
        stride[j] = stride[j - 1] * dims[j - 1];
    }
    for v in 0..n {
        for j in 0..d {
            let c = v / stride[j] % dims[j];
            coords.push(c as f64);
            if c + 1 < dims[j] {
                edges.push((v, v + stride[j]));
            }
        }
    }
    UGrid::new(d, coords, &edges).expect("structured grid is valid")
}

/// `m x m` points with horizontal, vertical and one diagonal per cell.
pub fn triangulated_square(m: usize) -> UGrid {
    let mut coords = Vec::with_capacity(2 * m * m);
    let mut edges = Vec::new();
    for j in 0..m {
        for i in 0..m {
            coords.extend([i as f64, j as f64]);
            let v = j * m + i;
            if i + 1 < m {
                edges.push((v, v + 1));
            }
            if j + 1 < m {
                edges.push((v, v + m));
            }
            if i + 1 < m && j + 1 < m {
                edges.push((v, v + m + 1));
            }
        }
    }
    UGrid::new(2, coords, &edges).expect("triangulated square is valid")
}

/// Structured grid with each coordinate moved by up to `amplitude`.
pub fn perturbed_lattice(dims: &[usize], amplitude: f64, seed: u64) -> UGrid {
    let base = structured_grid(dims);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<f64> = base
        .coords
        .iter()
        .map(|c| c + rng.gen_range(-amplitude..=amplitude))
        .collect();
    UGrid::new(base.dim, coords, base.edges()).expect("same topology")
}

/// Removes each vertex independently with probability `fraction`.
pub fn delete_random(grid: &UGrid, fraction: f64, seed: u64) -> UGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let remove: Vec<bool> = (0..grid.len()).map(|_| rng.gen_bool(fraction)).collect();
    grid.without_vertices(&remove)
}

/// Simple cycle on `n` points of the unit circle.
pub fn cycle(n: usize) -> UGrid {
    let coords: Vec<f64> = (0..n)
        .flat_map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    UGrid::new(2, coords, &edges).expect("cycle is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_counts() {
        let g = structured_grid(&[4, 3]);
        assert_eq!(g.len(), 12);
        assert_eq!(g.edges().len(), 3 * 3 + 4 * 2);
        assert_eq!(g.max_degree(), 4);
        assert_eq!(g.point(5), &[1.0, 1.0]);
        let g = structured_grid(&[3, 3, 3]);
        assert_eq!(g.edges().len(), 3 * 18);
        assert_eq!(g.max_degree(), 6);
    }

    #[test]
    fn triangulated_degree() {
        let g = triangulated_square(5);
        assert_eq!(g.max_degree(), 6);
        assert_eq!(g.edges().len(), 2 * 5 * 4 + 16);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(UGrid::new(2, vec![0.0; 3], &[]), Err(UnstructuredError::CoordinateCount { .. })));
        assert!(matches!(UGrid::new(1, vec![0.0, 1.0], &[(0, 0)]), Err(UnstructuredError::SelfLoop(0))));
        assert!(matches!(
            UGrid::new(1, vec![0.0, 1.0], &[(0, 2)]),
            Err(UnstructuredError::VertexOutOfRange { .. })
        ));
        let g = UGrid::new(1, vec![0.0, 1.0], &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn components() {
        let g = structured_grid(&[4, 1]);
        assert_eq!(g.connected_components(), vec![vec![0, 1, 2, 3]]);
        assert_eq!(g.components_within(&[3, 0, 1]), vec![vec![0, 1], vec![3]]);
        let g = g.without_vertices(&[false, false, true, false]);
        assert_eq!(g.connected_components().len(), 2);
    }

    #[test]
    fn text_and_json_round_trip() {
        let g = perturbed_lattice(&[3, 4], 0.2, 1);
        assert_eq!(UGrid::from_text(&g.to_text()).unwrap(), g);
        assert_eq!(UGrid::from_json(&g.to_json()).unwrap(), g);
        let text = "# tri\n2 3 2\n0 0\n1 0\n0 1\n0 1\n1 2\n";
        let t = UGrid::from_text(text).unwrap();
        assert_eq!((t.len(), t.edges().len()), (3, 2));
        assert!(matches!(UGrid::from_text("2 3 1\n0 0\n"), Err(UnstructuredError::Parse { .. })));
        assert!(matches!(UGrid::from_text("2 1 0\n0 0 0\n"), Err(UnstructuredError::Parse { line: 2, .. })));
    }

    #[test]
    fn random_deletion_is_seeded() {
        let g = structured_grid(&[10, 10]);
        let a = delete_random(&g, 0.2, 9);
        assert_eq!(a, delete_random(&g, 0.2, 9));
        assert!(a.len() < 100 && a.len() > 50);
    }
}
