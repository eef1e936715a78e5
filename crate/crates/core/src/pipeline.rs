//! End-to-end runs driven by one JSON configuration.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::certify::{self, CertificationReport};
use crate::error::{Error, Result};
use crate::ingest::{lattice_constraints, ConstraintSet, ConstraintSource, Estimator, QuadratureData, MIN_SAMPLES};
use crate::lattice::Lattice;
use crate::phasespace::{wigner_from_cf, WignerGrid, WignerSpec};
use crate::sdp::SolverConfig;
use crate::sources::{sample_quadrature, Angle, QuadratureSample, StateModel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub side: usize,
    pub extent: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestVectorConfig {
    pub m: usize,
    pub seed: u64,
}

/// Every knob of a run. Command-line flags override the matching keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub state: StateModel,
    /// Samples per angle.
    pub samples: usize,
    pub seed: u64,
    pub angles: Vec<Angle>,
    #[serde(default)]
    pub estimator: Estimator,
    pub n_sigmas: f64,
    /// When set, constraints come from the exact characteristic function on
    /// the configured slices, with this tube radius, instead of from samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_delta: Option<f64>,
    pub lattice: LatticeConfig,
    pub test_vectors: TestVectorConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub wigner: WignerSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            state: StateModel::vacuum(),
            samples: 10_000,
            seed: 0,
            angles: vec![Angle::Fixed(0.0), Angle::Fixed(FRAC_PI_2)],
            estimator: Estimator::Empirical,
            n_sigmas: 5.0,
            exact_delta: None,
            lattice: LatticeConfig { side: 25, extent: 6.0 },
            test_vectors: TestVectorConfig { m: 100, seed: 0 },
            solver: SolverConfig::default(),
            wigner: WignerSpec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Benchmark {
    Cat,
    Fock,
}

impl std::str::FromStr for Benchmark {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cat" => Ok(Benchmark::Cat),
            "fock" => Ok(Benchmark::Fock),
            _ => Err(Error::InvalidArgument(format!("unknown benchmark '{s}', expected cat or fock"))),
        }
    }
}

impl RunConfig {
    /// Cat state `alpha = 1.77` from exact position and momentum slices.
    pub fn cat_benchmark() -> Self {
        Self {
            state: StateModel::cat(1.77).expect("valid amplitude"),
            samples: 100_000,
            exact_delta: Some(1e-3),
            ..Self::default()
        }
    }

    /// Single photon, phase-randomized homodyne data.
    pub fn fock_benchmark() -> Self {
        Self {
            state: StateModel::fock(1).expect("valid level"),
            samples: 180_000,
            angles: vec![Angle::PhaseRandom],
            lattice: LatticeConfig { side: 37, extent: 6.0 },
            test_vectors: TestVectorConfig { m: 200, seed: 0 },
            ..Self::default()
        }
    }

    pub fn benchmark(b: Benchmark) -> Self {
        match b {
            Benchmark::Cat => Self::cat_benchmark(),
            Benchmark::Fock => Self::fock_benchmark(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn phase_random(&self) -> bool {
        self.angles.iter().any(|a| matches!(a, Angle::PhaseRandom))
    }

    pub fn make_lattice(&self) -> Result<Lattice> {
        Lattice::new(self.lattice.side, self.lattice.extent)
    }

    /// Checks every field before any computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.exact_delta.is_none() && self.samples < MIN_SAMPLES {
            return bad(format!("samples must be at least {MIN_SAMPLES}, got {}", self.samples));
        }
        if self.angles.is_empty() {
            return bad("angles must not be empty".into());
        }
        if self.phase_random() && self.angles.len() > 1 {
            return bad("phase-random cannot be combined with fixed angles".into());
        }
        for a in &self.angles {
            if let Angle::Fixed(t) = a {
                if !t.is_finite() {
                    return bad(format!("angle {t} is not finite"));
                }
            }
        }
        if !(self.n_sigmas.is_finite() && self.n_sigmas > 0.0) {
            return bad(format!("n_sigmas must be positive, got {}", self.n_sigmas));
        }
        if let Estimator::Histogram { h } = self.estimator {
            if !(h.is_finite() && h > 0.0) {
                return bad(format!("histogram half-width must be positive, got {h}"));
            }
        }
        if let Some(d) = self.exact_delta {
            if !(d.is_finite() && d >= 0.0) {
                return bad(format!("exact_delta must be non-negative, got {d}"));
            }
            if self.phase_random() {
                return bad("exact constraints need fixed angles".into());
            }
        }
        let lattice = self.make_lattice()?;
        let central = lattice.central_indices().len();
        let m = self.test_vectors.m;
        if m < 2 || m > central {
            return bad(format!("test_vectors.m must lie in [2, {central}] for this lattice, got {m}"));
        }
        let s = &self.solver;
        if !(s.tol_feas > 0.0 && s.tol_gap > 0.0 && s.max_iter > 0) {
            return bad("solver tolerances and max_iter must be positive".into());
        }
        self.wigner.grid()?;
        Ok(())
    }
}

/// Seed of the `k`-th angle's sample stream.
pub fn angle_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add(k as u64)
}

pub fn simulate(config: &RunConfig) -> Result<Vec<QuadratureSample>> {
    config.validate()?;
    let mut out = Vec::with_capacity(config.samples * config.angles.len());
    for (k, &a) in config.angles.iter().enumerate() {
        out.extend(sample_quadrature(&config.state, a, config.samples, angle_seed(config.seed, k))?);
    }
    Ok(out)
}

/// Constraints from samples: pooled radially for phase-randomized data,
/// along the measured directions otherwise.
pub fn ingest(config: &RunConfig, data: &QuadratureData) -> Result<ConstraintSet> {
    config.validate()?;
    let lattice = config.make_lattice()?;
    let source = if data.phase_random {
        ConstraintSource::Radial { data, estimator: config.estimator, n_sigmas: config.n_sigmas }
    } else {
        ConstraintSource::Slices { data, estimator: config.estimator, n_sigmas: config.n_sigmas }
    };
    lattice_constraints(&source, &lattice)
}

/// Constraints from the exact characteristic function on the configured
/// slices.
pub fn exact_constraints(config: &RunConfig, delta: f64) -> Result<ConstraintSet> {
    config.validate()?;
    let thetas = config
        .angles
        .iter()
        .filter_map(|a| match a {
            Angle::Fixed(t) => Some(*t),
            Angle::PhaseRandom => None,
        })
        .collect();
    lattice_constraints(
        &ConstraintSource::ExactSlices { state: config.state, thetas, delta },
        &config.make_lattice()?,
    )
}

pub fn certify(config: &RunConfig, set: &ConstraintSet) -> Result<CertificationReport> {
    config.validate()?;
    let lattice = config.make_lattice()?;
    if set.lattice != lattice {
        return Err(Error::InvalidArgument(format!(
            "constraints are on a {}x{} lattice of extent {}, config asks for {}x{} of extent {}",
            set.lattice.side(),
            set.lattice.side(),
            set.lattice.extent(),
            lattice.side(),
            lattice.side(),
            lattice.extent()
        )));
    }
    let t = certify::draw_test_vectors(&lattice, config.test_vectors.m, config.test_vectors.seed)?;
    let problem = certify::assemble_from_set(set, &t)?;
    let raw = certify::solve(&problem, &config.solver)?;
    let mut report = certify::certify_bound(&problem, &raw)?;
    report.warnings.extend(set.metadata.warnings.iter().cloned());
    report.config = Some(config.to_json());
    Ok(report)
}

pub fn reconstruct(report: &CertificationReport, spec: &WignerSpec) -> Result<WignerGrid> {
    wigner_from_cf(&report.chi_opt, spec)
}

/// Sampling (or exact constraints), ingestion and certification.
pub fn run(config: &RunConfig) -> Result<CertificationReport> {
    config.validate()?;
    let set = match config.exact_delta {
        Some(d) => exact_constraints(config, d)?,
        None => {
            let samples = simulate(config)?;
            ingest(config, &QuadratureData::new(samples, config.phase_random()))?
        }
    };
    certify(config, &set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::Status;

    fn small(state: StateModel) -> RunConfig {
        RunConfig {
            state,
            samples: 20_000,
            lattice: LatticeConfig { side: 9, extent: 4.0 },
            test_vectors: TestVectorConfig { m: 12, seed: 1 },
            ..RunConfig::default()
        }
    }

    #[test]
    fn config_json_round_trip_and_defaults() {
        for c in [RunConfig::default(), RunConfig::cat_benchmark(), RunConfig::fock_benchmark()] {
            c.validate().unwrap();
            let text = serde_json::to_string(&c).unwrap();
            assert_eq!(RunConfig::from_json(&text).unwrap(), c);
        }
        let minimal = r#"{"state":"fock(1)","samples":1000,"seed":3,"angles":["phase-random"],
            "n_sigmas":5,"lattice":{"side":9,"extent":4},"test_vectors":{"m":10,"seed":0}}"#;
        let c = RunConfig::from_json(minimal).unwrap();
        assert_eq!(c.estimator, Estimator::Empirical);
        assert!(c.phase_random());
    }

    #[test]
    fn invalid_configs_are_rejected_before_work() {
        let base = RunConfig::default();
        let cases = [
            RunConfig { samples: 3, ..base.clone() },
            RunConfig { angles: vec![], ..base.clone() },
            RunConfig { angles: vec![Angle::PhaseRandom, Angle::Fixed(0.0)], ..base.clone() },
            RunConfig { n_sigmas: 0.0, ..base.clone() },
            RunConfig { estimator: Estimator::Histogram { h: -1.0 }, ..base.clone() },
            RunConfig { lattice: LatticeConfig { side: 8, extent: 6.0 }, ..base.clone() },
            RunConfig { test_vectors: TestVectorConfig { m: 1000, seed: 0 }, ..base.clone() },
            RunConfig { exact_delta: Some(-1.0), ..base.clone() },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
        assert!(RunConfig::from_json(r#"{"state":"vacuum","bogus":1}"#).is_err());
    }

    #[test]
    fn simulate_is_seeded_per_angle() {
        let c = RunConfig { samples: 100, ..RunConfig::default() };
        let a = simulate(&c).unwrap();
        assert_eq!(a.len(), 200);
        assert_eq!(a, simulate(&c).unwrap());
        assert!(a[..100].iter().all(|s| s.theta == 0.0));
        assert_ne!(a, simulate(&RunConfig { seed: 9, ..c }).unwrap());
    }

    #[test]
    fn run_is_deterministic_and_echoes_config() {
        let c = small(StateModel::vacuum());
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.config, Some(c.to_json()));
        assert_eq!(a.status, Status::NoCertification);
    }

    #[test]
    fn exact_cat_slices_certify() {
        let c = RunConfig {
            test_vectors: TestVectorConfig { m: 40, seed: 2 },
            ..RunConfig::cat_benchmark()
        };
        let r = run(&c).unwrap();
        assert!(r.x_certified > 0.0, "{}", r.x_certified);
        assert_eq!(r.status, Status::Certified);
    }

    #[test]
    fn mismatched_lattice_is_rejected() {
        let c = small(StateModel::vacuum());
        let set = exact_constraints(&RunConfig { exact_delta: Some(0.0), ..c.clone() }, 0.0).unwrap();
        let other = RunConfig { lattice: LatticeConfig { side: 11, extent: 4.0 }, ..c };
        assert!(certify(&other, &set).is_err());
    }

    #[test]
    fn reconstruction_of_vacuum_report_is_nearly_positive() {
        let r = run(&RunConfig { exact_delta: Some(1e-3), ..small(StateModel::vacuum()) }).unwrap();
        let w = reconstruct(&r, &WignerSpec { side: 41, extent: 4.0 }).unwrap();
        assert!(w.min() > -0.05, "{}", w.min());
    }
}
