//! Per-mode discrete generator with boundary and transmission constraints,
//! energy gram and the constrained, gram-orthonormal reduction.

mod assemble;
mod check;
mod forms;
mod state;

pub use assemble::{
    assemble, assemble_variant, dissipation_rate, energy, generator_form, ModeOperator, Variant,
    GRAM_TOL, RANK_TOL,
};
pub use check::{dissipativity_sample, DissipativitySample};
pub use state::{Layout, StateVector};

#[cfg(test)]
pub(crate) use assemble::null_space;
