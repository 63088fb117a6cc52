//! Probes of the variational structure.

mod center;
mod concentration;
mod probe;
mod rearrange;
mod scaling;
mod subadditivity;

pub use center::{density_centroid, recenter, translate_spectral};
pub use concentration::concentration_function;
pub use probe::{gn_hls_probe, random_smooth_field, InequalityProbe, InequalityRatios};
pub use rearrange::{cells_by_distance, lr_norm_pow_sorted, rearrange_decreasing, RearrangementCheck};
pub use scaling::{dilate, energy_crossing, scaling_curve, scaling_range, ScalingPoint};
pub use subadditivity::{subadditivity_scan, SigmaScan, MIN_SPLIT_FRACTION};
