//! Time propagation, conservation monitoring and orbital stability.

mod config;
mod distance;
mod propagator;
mod stability;

pub use config::PropagatorConfig;
pub use distance::{modulated_distance, modulated_distance_pair, DistanceMeter, Modulation};
pub use propagator::{
    evolve_coupled, evolve_scalar, run, run_observed, Conservation, ConservationRecord, CoupledPropagator,
    CoupledTrajectory, Evolution, ScalarPropagator, ScalarTrajectory, Trajectory,
};
pub use stability::{
    band_limited_noise, perturb, stability_experiment, stability_experiment_coupled, StabilityReport,
};
