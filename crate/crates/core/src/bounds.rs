//! Lower bounds on cache misses for local operators and the weight
//! inequality used to sum cut sizes over a cut tree.
//!
//! Surface-to-volume ratios of isoperimetric sets are estimated with
//! axis-aligned discrete cubes. This is a surrogate, not exact discrete
//! isoperimetry, and every estimate carries `method = "cube-surrogate"`.

use serde::Serialize;
use thiserror::Error;

use crate::lattice::GridShape;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("cache size must be positive")]
    ZeroCache,
    #[error("line size must be positive")]
    ZeroLine,
    #[error("FFT bound needs S >= 2 (log S > 0), got {0}")]
    CacheTooSmallForLog(u64),
    #[error("FFT level count must be at least 1")]
    ZeroLevels,
    #[error("weight inequality needs dimension >= 2, got {0}")]
    Dimension(usize),
    #[error("weight inequality needs at least one value")]
    NoValues,
    #[error("value {0} is not positive")]
    NonPositive(f64),
}

pub const SURROGATE: &str = "cube-surrogate";

/// Largest-volume estimate for a subset with `boundary_target` boundary
/// points (or, for edge sets, boundary vertices).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoperimetricEstimate {
    pub boundary_target: u64,
    /// Side of the surrogate cube.
    pub side: f64,
    /// Points (or edges) in the surrogate set.
    pub volume: f64,
    /// Surface-to-volume ratio `boundary_target / volume`.
    pub ratio: f64,
    /// True when the whole grid was used because its boundary is below the
    /// target or the cube would not fit.
    pub clamped: bool,
    pub method: &'static str,
}

/// Boundary points of a discrete `s^d` cube: `s^d - (s-2)^d`, `(s-2)` at
/// least 0.
pub fn cube_boundary(side: u64, d: usize) -> u64 {
    side.pow(d as u32) - side.saturating_sub(2).pow(d as u32)
}

fn grid_boundary(shape: &GridShape) -> u64 {
    let all: u64 = shape.dims().iter().map(|&n| n as u64).product();
    let inner: u64 = shape
        .dims()
        .iter()
        .map(|&n| (n as u64).saturating_sub(2))
        .product();
    all - inner
}

/// Real side `s >= 1` with `s^d - (s-2)^d = target`, the continuous
/// extension of the discrete cube boundary count.
pub fn real_side(target: f64, d: usize) -> f64 {
    let p = |s: f64| s.powi(d as i32) - (s - 2.0).powi(d as i32);
    if target <= p(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while p(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Vertex surface-to-volume ratio `alpha = 3S / v` of a structured grid,
/// with `v = s^d` for the real side solving `s^d - (s-2)^d = 3S` (in two
/// dimensions `s = (3S + 4) / 4`).
pub fn alpha_structured(shape: &GridShape, size: u64) -> Result<IsoperimetricEstimate, BoundsError> {
    if size == 0 {
        return Err(BoundsError::ZeroCache);
    }
    let d = shape.dim();
    let target = 3 * size;
    let total = shape.len() as f64;
    let side = real_side(target as f64, d);
    let volume = side.powi(d as i32);
    if target >= grid_boundary(shape) || volume > total {
        return Ok(IsoperimetricEstimate {
            boundary_target: target,
            side,
            volume: total,
            ratio: target as f64 / total,
            clamped: true,
            method: SURROGATE,
        });
    }
    Ok(IsoperimetricEstimate {
        boundary_target: target,
        side,
        volume,
        ratio: target as f64 / volume,
        clamped: false,
        method: SURROGATE,
    })
}

/// Vertices plus twice the edges: the edge count of the bipartite graph
/// `H` joining `x` to `y` when they are neighbors or equal.
pub fn h_edge_count(vertices: u64, edges: u64) -> u64 {
    vertices + 2 * edges
}

pub fn structured_edge_count(shape: &GridShape) -> u64 {
    let dims = shape.dims();
    (0..dims.len())
        .map(|j| {
            dims.iter()
                .enumerate()
                .map(|(k, &n)| if k == j { n as u64 - 1 } else { n as u64 })
                .product::<u64>()
        })
        .sum()
}

/// Edge surface-to-volume ratio `beta` on `H`, using the edge set that `H`
/// induces on a cube of side `s`: `2 (s^d - (s-2)^d)` boundary vertices
/// (both copies) over `s^d + 2 d s^(d-1) (s-1)` edges, `s` real.
pub fn beta_structured(shape: &GridShape, size: u64) -> Result<IsoperimetricEstimate, BoundsError> {
    if size == 0 {
        return Err(BoundsError::ZeroCache);
    }
    let d = shape.dim();
    let target = 3 * size;
    let side = real_side(target as f64 / 2.0, d);
    let volume = side.powi(d as i32) + 2.0 * d as f64 * side.powi(d as i32 - 1) * (side - 1.0);
    let total = h_edge_count(shape.len() as u64, structured_edge_count(shape)) as f64;
    let fits = shape.dims().iter().all(|&n| n as f64 >= side);
    if target >= 2 * grid_boundary(shape) || !fits || volume > total {
        return Ok(IsoperimetricEstimate {
            boundary_target: target,
            side,
            volume: total,
            ratio: target as f64 / total,
            clamped: true,
            method: SURROGATE,
        });
    }
    Ok(IsoperimetricEstimate {
        boundary_target: target,
        side,
        volume,
        ratio: target as f64 / volume,
        clamped: false,
        method: SURROGATE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Pointwise,
    Edgewise,
    Fft,
}

/// Position of `S` relative to the FFT regime `S <= 2^(n/24)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Inside,
    AtBoundary,
    Outside,
}

impl Regime {
    pub fn for_fft(n: u32, size: u64) -> Regime {
        // Compare S^24 with 2^n through log2; exact for powers of two.
        let lhs = if size.is_power_of_two() {
            24.0 * size.trailing_zeros() as f64
        } else {
            24.0 * (size as f64).log2()
        };
        let rhs = n as f64;
        if (lhs - rhs).abs() < 1e-9 {
            Regime::AtBoundary
        } else if lhs < rhs {
            Regime::Inside
        } else {
            Regime::Outside
        }
    }

    pub fn within(self) -> bool {
        !matches!(self, Regime::Outside)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBound {
    pub operator: OperatorKind,
    /// `|V|`, `|E_H|` or `N`.
    pub volume: u64,
    pub size: u64,
    pub line_words: u64,
    /// `alpha`, `beta`, or `c / log2 S` for the FFT graph.
    pub ratio: f64,
    pub bound: f64,
    pub regime: Option<Regime>,
}

impl LowerBound {
    /// Misses from cold loads alone, `volume / w`.
    pub fn cold_floor(&self) -> f64 {
        self.volume as f64 / self.line_words as f64
    }
}

fn check_cache(size: u64, w: u64) -> Result<(), BoundsError> {
    if size == 0 {
        return Err(BoundsError::ZeroCache);
    }
    if w == 0 {
        return Err(BoundsError::ZeroLine);
    }
    Ok(())
}

/// `(1/w) |V| (1 + alpha / 3)`.
pub fn lower_bound_pointwise(
    vertices: u64,
    size: u64,
    line_words: u64,
    alpha: f64,
) -> Result<LowerBound, BoundsError> {
    check_cache(size, line_words)?;
    Ok(LowerBound {
        operator: OperatorKind::Pointwise,
        volume: vertices,
        size,
        line_words,
        ratio: alpha,
        bound: vertices as f64 * (1.0 + alpha / 3.0) / line_words as f64,
        regime: None,
    })
}

/// `(1/w) |E_H| (1 + beta / 3)`.
pub fn lower_bound_edgewise(
    h_edges: u64,
    size: u64,
    line_words: u64,
    beta: f64,
) -> Result<LowerBound, BoundsError> {
    check_cache(size, line_words)?;
    Ok(LowerBound {
        operator: OperatorKind::Edgewise,
        volume: h_edges,
        size,
        line_words,
        ratio: beta,
        bound: h_edges as f64 * (1.0 + beta / 3.0) / line_words as f64,
        regime: None,
    })
}

/// Constant in `sum |dV_i| >= N / (4 log2 S)`.
pub const FFT_BOUNDARY_CONSTANT: f64 = 0.25;

/// `(1/w) N (1 + 1 / (4 log2 S))` with `N = (n + 1) 2^n`.
pub fn lower_bound_fft(n: u32, size: u64, line_words: u64) -> Result<LowerBound, BoundsError> {
    check_cache(size, line_words)?;
    if n == 0 {
        return Err(BoundsError::ZeroLevels);
    }
    if size < 2 {
        return Err(BoundsError::CacheTooSmallForLog(size));
    }
    let vertices = (n as u64 + 1) << n;
    let ratio = FFT_BOUNDARY_CONSTANT / (size as f64).log2();
    Ok(LowerBound {
        operator: OperatorKind::Fft,
        volume: vertices,
        size,
        line_words,
        ratio,
        bound: vertices as f64 * (1.0 + ratio) / line_words as f64,
        regime: Some(Regime::for_fft(n, size)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum WeightCheck {
    /// `sum v_i^(1/d) >= (2 sum v_i)^(1/d)`.
    Holds { lhs: f64, rhs: f64, margin: f64 },
    /// Hypothesis met but the inequality failed.
    Fails { lhs: f64, rhs: f64, margin: f64 },
    /// Largest value exceeds the sum of the others; no claim is made.
    HypothesisViolated { largest: f64, rest: f64 },
}

impl WeightCheck {
    pub fn holds(&self) -> bool {
        matches!(self, WeightCheck::Holds { .. })
    }
}

/// Checks `sum v_i^(1/d) >= (2 sum v_i)^(1/d)` for values whose largest
/// element does not exceed the sum of the rest.
pub fn weight_inequality_check(values: &[f64], d: usize) -> Result<WeightCheck, BoundsError> {
    if d < 2 {
        return Err(BoundsError::Dimension(d));
    }
    if values.is_empty() {
        return Err(BoundsError::NoValues);
    }
    if let Some(&bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(BoundsError::NonPositive(bad));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let largest = sorted[0];
    let rest: f64 = sorted[1..].iter().sum();
    if largest > rest {
        return Ok(WeightCheck::HypothesisViolated { largest, rest });
    }
    let p = 1.0 / d as f64;
    let lhs: f64 = sorted.iter().map(|v| v.powf(p)).sum();
    let rhs = (2.0 * (largest + rest)).powf(p);
    let margin = lhs - rhs;
    // Equality is attained at (v, v) for d = 2; allow rounding there.
    if margin >= -1e-12 * rhs {
        Ok(WeightCheck::Holds { lhs, rhs, margin })
    } else {
        Ok(WeightCheck::Fails { lhs, rhs, margin })
    }
}
