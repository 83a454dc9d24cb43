//! Experiments on the assembled generator: spectra, resolvent scans along
//! the imaginary axis, energy evolution and decay fits.

mod decay;
mod evolve;
mod fit;
mod resolvent;
mod shifted;
mod spectrum;
mod verdict;

pub use decay::{
    fit_decay, polynomial_decay_probe, sampled_energies, smoothed_data, DecayFit, DecayModel,
    DecayOptions, DecayTrajectory,
};
pub use evolve::{
    aggregate, evolve, integrate_mode, mode_operators, EnergyTrajectory, EvolveOptions,
    ModeHistory, Preset, Resolution,
};
pub use fit::{linear_fit, LineFit};
pub use resolvent::{
    envelope, growth_exponent_fit, log_grid, resolvent_norm, resolvent_scan, GrowthFit,
    ResolventScan, MIN_PEAKS, SINGULAR_TOL,
};
pub use spectrum::{
    abscissa_profile, spectral_abscissa_profile, spectrum, ModeAbscissa, SPECTRUM_TOL,
};
pub use verdict::{
    approaches_axis, classify, StabilityReport, Verdict, EXP_ABSCISSA, EXP_SLOPE, POLY_RESIDUAL,
    POLY_SLOPE, TAIL_START,
};
