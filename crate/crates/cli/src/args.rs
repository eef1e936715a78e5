use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use negcert::pipeline::Benchmark;
use negcert::{Angle, Estimator, StateModel};

#[derive(Debug, Parser)]
#[command(name = "negcert", version, about = "Certified lower bounds on Wigner negativity")]
pub struct Cli {
    /// JSON run configuration; flags override its keys.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Sample seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,

    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

/// Per-run overrides of configuration keys.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// State descriptor: vacuum, coherent(re[,im]), fock(k), cat(alpha).
    #[arg(long)]
    pub state: Option<StateModel>,

    /// Samples per angle.
    #[arg(long)]
    pub samples: Option<usize>,

    /// Measurement angles in radians, or `phase-random`; repeatable.
    #[arg(long = "angle", value_name = "ANGLE")]
    pub angles: Vec<Angle>,

    /// `empirical` or `histogram(h)`.
    #[arg(long)]
    pub estimator: Option<Estimator>,

    /// Tube half-width in standard deviations.
    #[arg(long)]
    pub n_sigmas: Option<f64>,

    /// Lattice points per axis (odd).
    #[arg(long)]
    pub side: Option<usize>,

    /// Lattice half-width.
    #[arg(long)]
    pub extent: Option<f64>,

    /// Number of test vectors.
    #[arg(long)]
    pub m: Option<usize>,

    /// Test-vector seed.
    #[arg(long)]
    pub test_seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw seeded homodyne samples; writes samples.csv.
    Simulate {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Characteristic-function constraints from a sample file; writes
    /// constraints.json.
    Ingest {
        /// Sample CSV.
        #[arg(value_name = "SAMPLES")]
        input: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Solve and certify; writes report.json. Without input files the
    /// configured pipeline runs from scratch.
    Certify {
        /// Sample CSV.
        #[arg(value_name = "SAMPLES", conflicts_with = "constraints")]
        input: Option<PathBuf>,
        /// Constraints file from `ingest`.
        #[arg(long)]
        constraints: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Optimal Wigner function from a report; writes wigner.csv.
    Reconstruct {
        /// Report from `certify`.
        report: PathBuf,
        /// Grid points per axis (odd).
        #[arg(long)]
        grid_side: Option<usize>,
        /// Grid half-width.
        #[arg(long)]
        grid_extent: Option<f64>,
    },
    /// Evaluate a report's witness on a state, or on the report's optimal
    /// characteristic function when no state is given; writes witness.json.
    WitnessCheck {
        report: PathBuf,
        #[arg(long)]
        state: Option<StateModel>,
    },
    /// One of the two reference benchmarks, end to end.
    Repro {
        /// `cat` or `fock`.
        benchmark: Benchmark,
        #[command(flatten)]
        overrides: Overrides,
    },
}
