//! Periodic box discretization and Fourier-multiplier operators.

mod convolution;
mod fft;
mod field;
mod grid;
mod plan;
mod zeta;

pub use convolution::{riesz_convolve, riesz_lattice_weight, within_truncation, ConvolutionMode, Convolver};
pub(crate) use convolution::check_beta;
pub use fft::FftNd;
pub use field::{Field, FieldPair};
pub use grid::{GridSpec, MAX_DIM};
pub(crate) use plan::check_alpha;
pub use plan::SpectralPlan;
pub use zeta::epstein_zeta;
