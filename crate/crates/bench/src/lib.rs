//! Fixtures shared by the benchmarks.

use std::f64::consts::FRAC_PI_2;

use negcert::certify::BochnerProblem;
use negcert::pipeline::{self, RunConfig, TestVectorConfig};
use negcert::{draw_test_vectors, Angle, QuadratureData, StateModel};

/// Phase-randomized single-photon data.
pub fn fock_data(samples: usize, seed: u64) -> QuadratureData {
    let s = negcert::sample_quadrature(&StateModel::fock(1).expect("valid level"), Angle::PhaseRandom, samples, seed)
        .expect("sampling");
    QuadratureData::new(s, true)
}

/// Two-slice cat data.
pub fn cat_data(samples: usize, seed: u64) -> QuadratureData {
    let cat = StateModel::cat(1.77).expect("valid amplitude");
    let mut s = negcert::sample_quadrature(&cat, Angle::Fixed(0.0), samples, seed).expect("sampling");
    s.extend(negcert::sample_quadrature(&cat, Angle::Fixed(FRAC_PI_2), samples, seed + 1).expect("sampling"));
    QuadratureData::new(s, false)
}

/// Cat program from exact slices with `m` test vectors.
pub fn cat_problem(m: usize) -> BochnerProblem {
    let c = RunConfig {
        test_vectors: TestVectorConfig { m, seed: 0 },
        ..RunConfig::cat_benchmark()
    };
    let set = pipeline::exact_constraints(&c, c.exact_delta.expect("exact preset")).expect("constraints");
    let t = draw_test_vectors(&c.make_lattice().expect("lattice"), m, 0).expect("test vectors");
    negcert::certify::assemble_from_set(&set, &t).expect("assembly")
}
