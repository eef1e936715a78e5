//! Certified lower bounds on Wigner-function negativity.
//!
//! The crate turns quadrature measurements of a single bosonic mode into a
//! semidefinite program over characteristic-function values whose optimum is
//! a lower bound on the trace distance between the measured state and the
//! convex set of states with a non-negative Wigner function.
//!
//! Pipeline, module by module:
//!
//! * [`sources`]: analytic test states, exact characteristic functions and
//!   quadrature densities, seeded homodyne samplers.
//! * [`ingest`]: samples to characteristic-function estimates with
//!   confidence tubes.
//! * [`certify`]: Bochner-constraint SDP, certified bound, witness operator.
//! * [`phasespace`]: symplectic form, Bochner matrices, Wigner transform.
//! * [`sdp`]: the primal-dual interior-point solver behind [`certify`].
//!
//! Quadrature convention: `[q, p] = i`, so the vacuum has quadrature variance
//! 1/2 and characteristic function `exp(-|xi|^2 / 4)`.

pub mod certify;
pub mod error;
pub mod ingest;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod phasespace;
pub mod pipeline;
pub mod sdp;
pub mod sources;

pub use num_complex::Complex64 as C64;

pub use certify::{
    assemble_sdp, certify_bound, draw_test_vectors, make_lattice, solve, witness_check,
    BochnerProblem, CertificationReport, Status, WitnessReport, WitnessSpec, WitnessSubject,
};
pub use error::{Error, Result};
pub use ingest::{
    build_histogram, cf_empirical, cf_from_histogram, lattice_constraints, radial_pool,
    CFEstimate, ConstraintSet, ConstraintSource, Estimator, Histogram, Provenance,
    QuadratureData, RadialCF, ThetaFilter,
};
pub use lattice::Lattice;
pub use phasespace::{
    bochner_matrix, min_eig_pair, symplectic_form, wigner_from_cf, BochnerMatrix, CFGrid,
    CharFn, PhasePoint, SymplecticForm, TestVectorSet, WignerGrid, WignerSpec,
};
pub use sdp::SolverConfig;
pub use sources::{
    exact_cf, exact_quadrature_density, sample_quadrature, Angle, QuadratureSample, StateModel,
};

/// Convention tag written into every sample file.
pub const CONVENTION_TAG: &str = io::CONVENTION;
#[cfg(test)]
mod oracle;
