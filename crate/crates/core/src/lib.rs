//! Cache behavior of local operators on structured and unstructured grids.
//!
//! - [`cache`]: trace-driven `(a, w, S)` LRU cache simulator.
//! - [`lattice`]: interference lattices, successive minima, conflict-free tiles.
//! - [`tiling`]: stencil traversals (canonical and tiled) run through the cache.
//! - [`unstructured`]: meshes, starry-grid checks, recursive coverings.
//! - [`bounds`]: miss lower bounds and the weight inequality.
//! - [`fft`]: the butterfly graph and its boundary measures.
//! - [`cli`]: the `isocache` command line.

pub mod bounds;
pub mod cache;
pub mod cli;
pub mod fft;
pub mod lattice;
pub mod tiling;
pub mod unstructured;
