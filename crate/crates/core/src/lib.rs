//! Numerical laboratory for a multilayer sandwich beam with boundary feedback.
//!
//! A stack of `2m + 1` alternating stiff and compliant layers is clamped at
//! `x = 0` and damped through velocity feedback at `x = L`. The crate
//! discretizes the system with conforming finite elements, computes its
//! spectrum along two independent routes (a generalized matrix pencil and
//! closed-form characteristic equations), integrates it in time with a
//! contractive scheme, and provides decay-rate and structure diagnostics.

pub mod analysis;
pub mod assembly;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod spectral;

pub use analysis::{
    adjoint_residual, compare_decay_to_spectrum, fit_decay_rate, generic_initial_state,
    modal_energy_content, riesz_gram_condition, strong_stability_margin, zero_eigen_margin,
    DecayFlag, DecayReport, StabilityMargins,
};
pub use assembly::{assemble, DiscretizedSystem, ElementOrder, Mesh, SampledField};
pub use dynamics::{
    default_dt, dissipation_rate, energy, simulate, step_midpoint, BeamState, EnergyTrace,
    MidpointStepper,
};
pub use error::{Error, Result};
pub use model::{BeamParams, EvenLayer, Gains, LayerStack, OddLayer};
