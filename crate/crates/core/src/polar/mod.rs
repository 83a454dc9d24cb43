//! Concentric annulus/disk geometry, radial collocation per angular mode,
//! quadrature and polar boundary functionals.

mod boundary;
mod cheb;
mod grid;
mod trace;

pub use boundary::{boundary_rows, geometric_condition_scan, BoundaryOp, BoundaryRow, Circle};
pub use grid::{
    bilaplacian_k, build_mode_grid, laplacian_k, Domain, Geometry, ModeGrid, RadialGrid, MIN_POINTS,
};
pub use trace::{trace_constant, TraceFit, TRACE_MAX_DEGREE, TRACE_MAX_K};
