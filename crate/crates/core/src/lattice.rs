//! Interference lattices of structured grids.
//!
//! For a `d`-dimensional array of extents `n_1 x ... x n_d` stored with the
//! first index fastest, element `(i_1, ..., i_d)` sits at address
//! `i_1 + n_1 i_2 + ... + n_1...n_{d-1} i_d`. Two indices collide in a
//! direct-mapped cache of `S` words (line size 1) exactly when their
//! difference `x` satisfies `address(x) mod S == 0`. Those differences form
//! the interference lattice, a full-rank sublattice of `Z^d` of determinant
//! `S`.
//!
//! All geometry here is exact: lattice points are integer vectors, cube
//! norms are integers and Euclidean norms are compared through their
//! squares.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("unsupported dimension {0} (supported: {MIN_DIM}..={MAX_DIM})")]
    UnsupportedDimension(usize),
    #[error("operation requires dimension 2 or 3, got {0}")]
    GeometryDimension(usize),
    #[error("grid extents must be positive: {0:?}")]
    EmptyExtent(Vec<usize>),
    #[error("cache size must be at least 2, got {0}")]
    ModulusTooSmall(u64),
    #[error("completed Voronoi cell has {found} points, expected {expected}")]
    TileSize { found: usize, expected: u64 },
}

/// Extents of a structured grid, first index fastest in memory.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GridShape {
    dims: Vec<usize>,
}

impl GridShape {
    pub fn new(dims: Vec<usize>) -> Result<Self, LatticeError> {
        if !(MIN_DIM..=MAX_DIM).contains(&dims.len()) {
            return Err(LatticeError::UnsupportedDimension(dims.len()));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(LatticeError::EmptyExtent(dims));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Address increments per unit step along each axis.
    pub fn strides(&self) -> Vec<i64> {
        let mut strides = Vec::with_capacity(self.dim());
        let mut s = 1i64;
        for &n in &self.dims {
            strides.push(s);
            s *= n as i64;
        }
        strides
    }

    /// Linear address of an index or offset vector (may be negative for
    /// offsets).
    pub fn address(&self, index: &[i64]) -> i64 {
        index.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    pub fn index_of(&self, mut address: usize) -> Vec<i64> {
        self.dims
            .iter()
            .map(|&n| {
                let i = address % n;
                address /= n;
                i as i64
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Norm {
    Cube,
    Ball,
}

/// Volume of the unit body of the norm in `d` dimensions.
pub fn unit_body_volume(norm: Norm, d: usize) -> f64 {
    match norm {
        Norm::Cube => 2f64.powi(d as i32),
        Norm::Ball => unit_ball_volume(d),
    }
}

/// `pi^(d/2) / Gamma(1 + d/2)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

/// Integer measure of a vector: max-abs for the cube, squared length for the
/// ball. Ordering by this value orders by the norm itself.
pub fn raw_norm(norm: Norm, v: &[i64]) -> i64 {
    match norm {
        Norm::Cube => v.iter().map(|x| x.abs()).max().unwrap_or(0),
        Norm::Ball => v.iter().map(|x| x * x).sum(),
    }
}

fn raw_to_length(norm: Norm, raw: i64) -> f64 {
    match norm {
        Norm::Cube => raw as f64,
        Norm::Ball => (raw as f64).sqrt(),
    }
}

/// First nonzero coordinate positive.
fn is_positive_representative(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// Rank of a small integer matrix by fraction-free elimination.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if m[i][c] == 0 {
                continue;
            }
            let (a, b) = (m[r][c], m[i][c]);
            for k in c..cols {
                m[i][k] = m[i][k] * a - m[r][k] * b;
            }
            let g = m[i].iter().fold(0i128, |g, &x| gcd(g, x.abs()));
            if g > 1 {
                m[i].iter_mut().for_each(|x| *x /= g);
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Determinant by Bareiss elimination.
pub fn determinant(rows: &[Vec<i64>]) -> i128 {
    let n = rows.len();
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return 0;
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Successive minima of a lattice relative to one norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessiveMinima {
    pub norm: Norm,
    /// Integer measure of each minimum (see [`raw_norm`]).
    pub raw: Vec<i64>,
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<i64>>,
}

impl SuccessiveMinima {
    pub fn eccentricity(&self) -> f64 {
        self.values[self.values.len() - 1] / self.values[0]
    }

    pub fn product(&self) -> f64 {
        self.values.iter().product()
    }
}

/// Both sides of Minkowski's second theorem for one set of minima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinkowskiCheck {
    pub lower: f64,
    pub ratio: f64,
    pub upper: f64,
}

impl MinkowskiCheck {
    pub fn holds(&self) -> bool {
        let eps = 1e-9 * self.upper.max(1.0);
        self.lower <= self.ratio + eps && self.ratio <= self.upper + eps
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferenceLattice {
    shape: GridShape,
    modulus: i64,
    coeffs: Vec<i64>,
    basis: Vec<Vec<i64>>,
    det: i64,
    cube: SuccessiveMinima,
    ball: SuccessiveMinima,
}

/// Builds the interference lattice of `shape` for a cache of `size` words.
///
/// The basis is returned in Hermite normal form: rows `(S, 0, ..., 0)` and
/// `((-c_j) mod S) e_1 + e_j`, where `c_j` is the address stride of axis `j`.
pub fn build_lattice(shape: &GridShape, size: u64) -> Result<InterferenceLattice, LatticeError> {
    if size < 2 {
        return Err(LatticeError::ModulusTooSmall(size));
    }
    let d = shape.dim();
    if !(MIN_DIM..=MAX_DIM).contains(&d) {
        return Err(LatticeError::UnsupportedDimension(d));
    }
    let s = size as i64;
    let mut coeffs = Vec::with_capacity(d);
    let mut c = 1i64;
    for &n in shape.dims() {
        coeffs.push(c);
        c = ((c as i128 * n as i128) % s as i128) as i64;
    }
    let basis: Vec<Vec<i64>> = (0..d)
        .map(|j| {
            let mut row = vec![0i64; d];
            if j == 0 {
                row[0] = s;
            } else {
                row[0] = (-coeffs[j]).rem_euclid(s);
                row[j] = 1;
            }
            row
        })
        .collect();
    let det = determinant(&basis).abs() as i64;

    let mut lattice = InterferenceLattice {
        shape: shape.clone(),
        modulus: s,
        coeffs,
        basis,
        det,
        cube: SuccessiveMinima {
            norm: Norm::Cube,
            raw: vec![],
            values: vec![],
            vectors: vec![],
        },
        ball: SuccessiveMinima {
            norm: Norm::Ball,
            raw: vec![],
            values: vec![],
            vectors: vec![],
        },
    };
    lattice.cube = successive_minima(&lattice, Norm::Cube);
    lattice.ball = successive_minima(&lattice, Norm::Ball);
    Ok(lattice)
}

impl InterferenceLattice {
    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus as u64
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    pub fn minima(&self, norm: Norm) -> &SuccessiveMinima {
        match norm {
            Norm::Cube => &self.cube,
            Norm::Ball => &self.ball,
        }
    }

    pub fn eccentricity(&self, norm: Norm) -> f64 {
        self.minima(norm).eccentricity()
    }

    /// `address(x) mod S == 0`.
    pub fn contains(&self, x: &[i64]) -> bool {
        let r: i128 = x
            .iter()
            .zip(&self.coeffs)
            .map(|(&a, &c)| a as i128 * c as i128)
            .sum();
        r.rem_euclid(self.modulus as i128) == 0
    }

    /// Cache location of index `x` in a direct-mapped, line-size-1 cache.
    pub fn cache_slot(&self, x: &[i64]) -> i64 {
        let r: i128 = x
            .iter()
            .zip(&self.coeffs)
            .map(|(&a, &c)| a as i128 * c as i128)
            .sum();
        r.rem_euclid(self.modulus as i128) as i64
    }

    pub fn minkowski(&self, norm: Norm) -> MinkowskiCheck {
        let d = self.dim();
        let vol = unit_body_volume(norm, d);
        let two_d = 2f64.powi(d as i32);
        MinkowskiCheck {
            lower: two_d / (factorial(d) * vol),
            ratio: self.minima(norm).product() / self.det as f64,
            upper: two_d / vol,
        }
    }

    /// Calls `f` for every lattice point `p` with `|p_j| <= radii[j]`,
    /// origin included.
    pub fn for_each_in_box(&self, radii: &[i64], f: impl FnMut(&[i64])) {
        let lo: Vec<i64> = radii.iter().map(|r| -r).collect();
        self.for_each_in_range(&lo, radii, f);
    }

    /// Calls `f` for every lattice point `p` with `lo[j] <= p_j <= hi[j]`.
    pub fn for_each_in_range(&self, lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
        let d = self.dim();
        assert_eq!(lo.len(), d);
        assert_eq!(hi.len(), d);
        let mut x = vec![0i64; d];
        self.range_rec(d - 1, 0, lo, hi, &mut x, &mut f);
    }

    fn range_rec(
        &self,
        j: usize,
        residue: i64,
        lo: &[i64],
        hi: &[i64],
        x: &mut [i64],
        f: &mut impl FnMut(&[i64]),
    ) {
        let s = self.modulus;
        if j == 0 {
            let target = (-residue).rem_euclid(s);
            let mut x0 = lo[0] + (target - lo[0]).rem_euclid(s);
            while x0 <= hi[0] {
                x[0] = x0;
                f(x);
                x0 += s;
            }
            return;
        }
        let c = self.coeffs[j];
        for xj in lo[j]..=hi[j] {
            x[j] = xj;
            let res = ((residue as i128 + c as i128 * xj as i128).rem_euclid(s as i128)) as i64;
            self.range_rec(j - 1, res, lo, hi, x, f);
        }
        x[j] = 0;
    }

    /// Nonzero lattice points with `|p_j| <= radii[j]`.
    pub fn points_in_box(&self, radii: &[i64]) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        self.for_each_in_box(radii, |p| {
            if p.iter().any(|&v| v != 0) {
                out.push(p.to_vec());
            }
        });
        out
    }
}

/// Exact successive minima by enumeration.
///
/// Lattice points are collected from cubes of growing radius `R`; once the
/// greedy scan (shortest first, skipping dependent vectors) finds `d`
/// independent vectors of norm `<= R`, every shorter vector has been seen
/// and the minima are exact. `S e_j` always lies in the lattice, so
/// `R <= S` bounds the search.
pub fn successive_minima(lattice: &InterferenceLattice, norm: Norm) -> SuccessiveMinima {
    let d = lattice.dim();
    let s = lattice.modulus;
    let mut radius = ((s as f64).powf(1.0 / d as f64).ceil() as i64).max(1);
    loop {
        let mut candidates: Vec<(i64, Vec<i64>)> = Vec::new();
        lattice.for_each_in_box(&vec![radius; d], |p| {
            if !is_positive_representative(p) {
                return;
            }
            let raw = raw_norm(norm, p);
            let within = match norm {
                Norm::Cube => raw <= radius,
                Norm::Ball => raw <= radius * radius,
            };
            if within {
                candidates.push((raw, p.to_vec()));
            }
        });
        candidates.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

        let mut chosen: Vec<Vec<i64>> = Vec::with_capacity(d);
        let mut raws = Vec::with_capacity(d);
        for (raw, v) in candidates {
            chosen.push(v);
            if rank(&chosen) == chosen.len() {
                raws.push(raw);
                if chosen.len() == d {
                    break;
                }
            } else {
                chosen.pop();
            }
        }
        if chosen.len() == d {
            return SuccessiveMinima {
                norm,
                values: raws.iter().map(|&r| raw_to_length(norm, r)).collect(),
                raw: raws,
                vectors: chosen,
            };
        }
        assert!(radius < s, "lattice of determinant {s} must have minima within S");
        radius = (radius * 2).min(s);
    }
}

fn lex_cmp_zero(p: &[i64]) -> Ordering {
    // Ordering of the origin relative to p.
    match p.iter().find(|&&x| x != 0) {
        Some(&x) if x > 0 => Ordering::Less,
        Some(_) => Ordering::Greater,
        None => Ordering::Equal,
    }
}

/// The completed Voronoi cell of the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoronoiTile {
    pub center: Vec<i64>,
    /// Integer offsets of the cell, sorted by address.
    pub points: Vec<Vec<i64>>,
    /// `sqrt(sum(lambda_i^2) / 4)` over the Euclidean minima.
    pub radius_bound: f64,
    /// Largest distance of a cell point from the center.
    pub max_distance: f64,
}

impl VoronoiTile {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Cell points having an axis neighbor outside the cell.
    pub fn boundary_points(&self) -> usize {
        let set: std::collections::HashSet<&[i64]> =
            self.points.iter().map(|p| p.as_slice()).collect();
        let d = self.center.len();
        self.points
            .iter()
            .filter(|p| {
                (0..d).any(|j| {
                    [-1i64, 1].iter().any(|&step| {
                        let mut q = p.to_vec();
                        q[j] += step;
                        !set.contains(q.as_slice())
                    })
                })
            })
            .count()
    }
}

/// Integer points whose nearest lattice point is the origin.
///
/// Equidistant points go to the lexicographically smallest lattice point;
/// the rule is translation invariant, so the completed cells tile `Z^d` and
/// each holds exactly `S` points. Every cell point lies within the covering
/// radius, itself at most `sqrt(sum(lambda_i^2)) / 2`, which bounds the
/// search.
pub fn voronoi_tile(lattice: &InterferenceLattice) -> Result<VoronoiTile, LatticeError> {
    let d = lattice.dim();
    if !(2..=3).contains(&d) {
        return Err(LatticeError::GeometryDimension(d));
    }
    let sum_sq: i64 = lattice.ball.raw.iter().sum();
    let reach = ((sum_sq as f64).sqrt() / 2.0).floor() as i64 + 1;

    // Competing centers: |p| <= 2 |x| <= sqrt(sum_sq).
    let competitors: Vec<Vec<i64>> = lattice
        .points_in_box(&vec![2 * reach; d])
        .into_iter()
        .filter(|p| raw_norm(Norm::Ball, p) <= sum_sq)
        .collect();

    let mut points = Vec::new();
    let mut x = vec![0i64; d];
    let mut visit = |x: &[i64]| {
        let own = raw_norm(Norm::Ball, x);
        if 4 * own > sum_sq {
            return;
        }
        let wins = competitors.iter().all(|p| {
            let other: i64 = x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
            match other.cmp(&own) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => lex_cmp_zero(p) == Ordering::Less,
            }
        });
        if wins {
            points.push(x.to_vec());
        }
    };
    for_each_integer_in_cube(&mut x, d, reach, &mut visit);

    if points.len() as i64 != lattice.det {
        return Err(LatticeError::TileSize {
            found: points.len(),
            expected: lattice.det as u64,
        });
    }
    let shape = lattice.shape();
    points.sort_by_key(|p| shape.address(p));
    let max_distance = points
        .iter()
        .map(|p| raw_norm(Norm::Ball, p))
        .max()
        .map(|r| (r as f64).sqrt())
        .unwrap_or(0.0);
    Ok(VoronoiTile {
        center: vec![0; d],
        points,
        radius_bound: (sum_sq as f64 / 4.0).sqrt(),
        max_distance,
    })
}

fn for_each_integer_in_cube(x: &mut [i64], j: usize, r: i64, f: &mut impl FnMut(&[i64])) {
    if j == 0 {
        f(x);
        return;
    }
    for v in -r..=r {
        x[j - 1] = v;
        for_each_integer_in_cube(x, j - 1, r, f);
    }
}

/// Rectilinear block `|x_i| <= b_i` grown until every face carries a
/// lattice point, plus the lattice point that pinned each face.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccMinBlock {
    pub halfwidths: Vec<i64>,
    pub pins: Vec<Vec<i64>>,
}

impl SuccMinBlock {
    /// Halfwidths of the half-scale block `Q'`.
    pub fn q_prime_halfwidths(&self) -> Vec<f64> {
        self.halfwidths.iter().map(|&b| b as f64 / 2.0).collect()
    }

    /// Edge lengths of `Q'`, which are also the tile sides.
    pub fn tile_sides(&self) -> &[i64] {
        &self.halfwidths
    }

    pub fn q_prime_volume(&self) -> f64 {
        self.halfwidths.iter().map(|&b| b as f64).product()
    }

    pub fn q_prime_surface(&self) -> f64 {
        let v = self.q_prime_volume();
        2.0 * self.halfwidths.iter().map(|&b| v / b as f64).sum::<f64>()
    }

    pub fn q_prime_surface_to_volume(&self) -> f64 {
        2.0 * self.halfwidths.iter().map(|&b| 1.0 / b as f64).sum::<f64>()
    }

    /// Whether `p` lies in the half-open translate `[t - b/2, t + b/2)`.
    pub fn q_prime_contains(&self, translate: &[f64], p: &[i64]) -> bool {
        p.iter()
            .zip(translate)
            .zip(&self.halfwidths)
            .all(|((&x, &t), &b)| {
                let h = b as f64 / 2.0;
                (x as f64) >= t - h && (x as f64) < t + h
            })
    }

    /// Upper bound `d (d! V_d)^(1/d) f^d S^(-1/d)` on the surface-to-volume
    /// ratio of `Q'` for eccentricity `f`.
    pub fn surface_to_volume_bound(d: usize, eccentricity: f64, size: u64) -> f64 {
        let vd = unit_ball_volume(d);
        d as f64
            * (factorial(d) * vd).powf(1.0 / d as f64)
            * eccentricity.powi(d as i32)
            * (size as f64).powf(-1.0 / d as f64)
    }
}

/// Runs the inflating process: all free halfwidths grow together from 1;
/// a halfwidth freezes when its face `x_i = +-b_i` meets a lattice point.
///
/// Growth is event driven. With frozen halfwidths fixed and the free ones
/// at `t`, the next event is the smallest `m(p) = max_free |p_j| >= t` over
/// lattice points inside the frozen bounds; every free face reached at that
/// value freezes simultaneously.
pub fn succmin_block(lattice: &InterferenceLattice) -> Result<SuccMinBlock, LatticeError> {
    let d = lattice.dim();
    if !(2..=3).contains(&d) {
        return Err(LatticeError::GeometryDimension(d));
    }
    let s = lattice.modulus;
    let mut b = vec![1i64; d];
    let mut free = vec![true; d];
    let mut pins: Vec<Vec<i64>> = vec![Vec::new(); d];
    let mut t = 1i64;

    while free.iter().any(|&f| f) {
        let mut reach = t;
        let (event, points) = loop {
            let radii: Vec<i64> = (0..d).map(|j| if free[j] { reach } else { b[j] }).collect();
            let mut best: Option<i64> = None;
            let mut pts = Vec::new();
            lattice.for_each_in_box(&radii, |p| {
                let m = (0..d).filter(|&j| free[j]).map(|j| p[j].abs()).max().unwrap_or(0);
                if m < t {
                    return;
                }
                match best {
                    Some(cur) if m > cur => {}
                    Some(cur) if m == cur => pts.push(p.to_vec()),
                    _ => {
                        best = Some(m);
                        pts.clear();
                        pts.push(p.to_vec());
                    }
                }
            });
            if let Some(m) = best {
                break (m, pts);
            }
            assert!(reach < s, "S e_j bounds the inflating process");
            reach = (reach * 2).min(s);
        };

        t = event;
        let mut pinned = vec![false; d];
        for p in &points {
            for j in 0..d {
                if free[j] && p[j].abs() == event && !pinned[j] {
                    pinned[j] = true;
                    pins[j] = p.clone();
                }
            }
        }
        for j in 0..d {
            if free[j] {
                b[j] = event;
            }
            if pinned[j] {
                free[j] = false;
            }
        }
    }
    Ok(SuccMinBlock { halfwidths: b, pins })
}
