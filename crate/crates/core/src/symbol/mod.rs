//! Symbol-level analysis: characteristic cubic, parameter-ellipticity and
//! the Lopatinskii-Shapiro condition for the clamped and free edge sets.

mod cubic;
mod ellipticity;
mod lopatinskii;

pub use cubic::{
    characteristic_cubic, cubic_roots, hurwitz_stable, routh_hurwitz_agreement, CubicCoeffs,
    RouthAgreement,
};
pub use ellipticity::{
    ellipticity_scan, symbol_determinant, EllipticityScan, ScanSample, SymbolPoint,
};
pub use lopatinskii::{
    lopatinskii_grid, lopatinskii_shapiro_check, BoundarySet, LSProblem, LsOutcome, LsSample,
    AXIS_SHIFT, REPEATED_TOL, SPLIT_TOL,
};
