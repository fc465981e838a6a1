//! Independent checks of the analytic solutions.

mod compare;
mod energy;
mod reference;
mod residual;

pub use compare::{compare_profiles, interpolate, ProfileErrors, COMPARE_HALF_WIDTH};
pub use energy::{energy_integral, measured_edge};
pub use reference::{nlse_reference, ReferenceConfig, ReferenceRun};

pub use residual::{
    hodograph_convergence, residual_eikonal, residual_hodograph, EquationId, GridSpec, HodographCheck,
    HodographGrid, HodographResiduals, ResidualReport,
};
