use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "fchoquard", version, about = "Ground states and dynamics of fractional Choquard models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// Experiment config (JSON). A run manifest is accepted as well.
    #[arg(short = 'c', long = "config")]
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the number of grid points per axis.
    #[arg(long = "grid", value_name = "M")]
    pub grid: Option<usize>,
    /// Overrides the output directory.
    #[arg(long = "out", value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Run independent sub-runs one after another in a fixed order.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct InitArg {
    /// Initial field (field dump); the first component is used for scalar
    /// models and the first two for coupled ones.
    #[arg(long, value_name = "FILE")]
    pub init: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    /// Overrides the config time step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Overrides the config final time
    #[arg(long = "tfinal")]
    pub t_final: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the config and model admissibility without computing anything.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Minimize a scalar or general model at fixed mass.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        init: InitArg,
    },
    /// Minimize a coupled model at fixed component masses.
    SolveCoupled {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        init: InitArg,
        /// Also solve each component without the coupling and report the margin.
        #[arg(long)]
        decoupled: bool,
    },
    /// Propagate an initial field, by default the ground state.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        init: InitArg,
        #[command(flatten)]
        time: TimeArgs,
    },
    /// Perturb the ground state and track its modulated distance.
    Stability {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        time: TimeArgs,
        /// Relative H^α size of the perturbation.
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// Ensemble size; member k uses seed + k.
        #[arg(long, default_value_t = 1)]
        members: u64,
    },
    /// Subadditivity margins of the minimal energy over mass splits.
    ScanSigma {
        #[command(flatten)]
        common: Common,
        /// Split points as fractions of the total mass.
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
        splits: Vec<f64>,
    },
    /// Energy of mass-preserving dilations of a trial field.
    ScalingCurve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        init: InitArg,
        /// Dilation factors; defaults to a log-spaced ladder over the
        /// admissible range.
        #[arg(long, value_delimiter = ',')]
        thetas: Vec<f64>,
        /// Number of dilation factors in the default ladder
        #[arg(long, default_value_t = 25)]
        count: usize,
    },
    /// Compare a field with its symmetric decreasing rearrangement.
    Rearrange {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        init: InitArg,
    },
    /// Check the convolution kernel hypotheses.
    CheckKernel {
        #[command(flatten)]
        common: Common,
    },
    /// Gagliardo–Nirenberg and Hardy–Littlewood–Sobolev ratios on random fields.
    GnProbe {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Validate { .. } => "validate",
            Self::Solve { .. } => "solve",
            Self::SolveCoupled { .. } => "solve-coupled",
            Self::Evolve { .. } => "evolve",
            Self::Stability { .. } => "stability",
            Self::ScanSigma { .. } => "scan-sigma",
            Self::ScalingCurve { .. } => "scaling-curve",
            Self::Rearrange { .. } => "rearrange",
            Self::CheckKernel { .. } => "check-kernel",
            Self::GnProbe { .. } => "gn-probe",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Self::Validate { common }
            | Self::Solve { common, .. }
            | Self::SolveCoupled { common, .. }
            | Self::Evolve { common, .. }
            | Self::Stability { common, .. }
            | Self::ScanSigma { common, .. }
            | Self::ScalingCurve { common, .. }
            | Self::Rearrange { common, .. }
            | Self::CheckKernel { common }
            | Self::GnProbe { common, .. } => common,
        }
    }
}
