pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod groundstate;
pub mod hartree;
pub mod operators;
pub mod params;
pub mod potentials;
pub mod probes;

pub use error::{Error, Result};
pub use evolution::{
    apriori_bound_check, detect_blowup, energy_report, evolve, evolve_with, measure,
    picard_duhamel, spectral_tail_fraction, step_strang, step_strang_opts, EnergyReport,
    EvolveOpts, RunState, RunStatus, TimeSeriesRow,
};
pub use field::{Field, Representation};
pub use grid::{Dim, Grid};
pub use groundstate::{
    energy_scaling_check, k_functional, rescale_field, scale_ground_state, solve_ground_state,
    GroundState,
};
pub use hartree::{hartree_potential, kato_ratio, lipschitz_witness, nonlinearity, HartreeResult};
pub use operators::{
    apply_multiplier, half_kinetic_form, poisson_semigroup, regularize, sobolev_norm,
    MultiplierSpec,
};
pub use params::Params;
pub use potentials::{
    estimate_form_bound, estimate_form_bound_with, threshold_with_potential, x_norm, NegativePart,
    PositivePart, PotentialSpec,
};
