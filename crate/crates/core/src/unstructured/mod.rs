//! Unstructured grids: embedded meshes, starry-grid validation,
//! hyperplane cuts, recursive coverings with their cut trees, and
//! covering-ordered cache measurements.

mod covering;
mod measure;
mod mesh;
mod starry;

use thiserror::Error;

pub use covering::{
    median_split, planar_covering, planar_covering_with, starry_covering, BfsLevelSeparator, Covering,
    CoveringReport, CutMethod, CutRecord, CutTree, Separator, Split, TreeNode, WeightSummary,
};
pub use measure::{measure_layout, measure_random_order, reorder_and_measure, MeasureOptions};
pub use mesh::{
    cycle, delete_random, perturbed_lattice, read_mesh, read_mesh_from, structured_grid, triangulated_square,
    write_mesh, UGrid,
};
pub use starry::{
    hyperplane_cut, hyperplane_cut_subset, validate_starry, vandermonde_directions, HyperplaneCut, StarryCert,
    StarryReport, StarryViolation, ALPHA_RETRIES,
};

#[derive(Debug, Error)]
pub enum UnstructuredError {
    #[error("grid has no vertices")]
    EmptyGrid,
    #[error("{values} coordinates do not split into points of dimension {dim}")]
    CoordinateCount { dim: usize, values: usize },
    #[error("vertex {vertex} out of range for {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("mesh parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("no direction parameter gave distinct projections after {0} tries")]
    NoValidAlpha(usize),
    #[error("widest trisecting slab has width {width}, below the longest edge {longest_edge}; split small sets directly")]
    SlabTooNarrow { width: f64, longest_edge: f64 },
    #[error("{0} vertices are too few for a hyperplane cut")]
    TooSmall(usize),
    #[error("covering set size must be positive")]
    ZeroSetSize,
    #[error("not a partition: {0}")]
    NotAPartition(String),
}
