//! The Bochner-constraint SDP: assembly, solution, certified bound and
//! witness extraction.
//!
//! Unknowns are the real and imaginary parts of `chi` at the canonical half
//! of the lattice points reached by test-vector differences, plus `t = x m`.
//! The program minimizes `t` subject to
//!
//! * `M^(0)(chi, T) + t I` PSD,
//! * `M^(1)(chi, T)` PSD,
//! * `|Re chi - Re c| <= delta`, `|Im chi - Im c| <= delta` at data points,
//!   intersected with `|Re chi|, |Im chi| <= 1`,
//! * `chi(0) = 1`.

mod verify;
mod witness;

pub use verify::certify_bound;
pub use witness::{witness_check, WitnessReport, WitnessSpec, WitnessSubject};

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{CFEstimate, ConstraintSet};
use crate::lattice::Lattice;
use crate::phasespace::{sym2, CFGrid, TestVectorSet};
use crate::sdp::{self, LinearRow, LmiBlock, SdpProblem, SdpSolution, SolverConfig, SparseGen, Term};
use crate::{linalg, phasespace};

pub use crate::sdp::Residuals;

/// Boxes narrower than this pin the variable to a constant.
const FIXED_WIDTH: f64 = 1e-12;

pub fn make_lattice(side: usize, extent: f64) -> Result<Lattice> {
    Lattice::new(side, extent)
}

/// `m` distinct points of the central sub-lattice, uniformly without
/// replacement, so every pairwise difference stays on the lattice.
pub fn draw_test_vectors(lattice: &Lattice, m: usize, seed: u64) -> Result<TestVectorSet> {
    let pool = lattice.central_indices();
    if m < 2 {
        return Err(Error::InvalidArgument("need at least two test vectors".into()));
    }
    if m > pool.len() {
        return Err(Error::InvalidArgument(format!(
            "{m} test vectors requested but the central region has only {} points",
            pool.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, pool.len(), m);
    let indices = picks.iter().map(|k| pool[k]).collect();
    TestVectorSet::on_lattice(lattice, indices, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Part {
    Re,
    Im,
}

/// One real unknown of the program.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Variable {
    Chi { point: (i32, i32), part: Part, lo: f64, hi: f64 },
    /// `t = x m`.
    Scale,
}

/// Assembled program plus everything needed to interpret its solution.
#[derive(Clone, Debug)]
pub struct BochnerProblem {
    pub lattice: Lattice,
    pub constraints: Vec<CFEstimate>,
    pub test_set: TestVectorSet,
    pub indices: Vec<(i32, i32)>,
    pub variables: Vec<Variable>,
    /// Canonical points whose value is pinned by the data.
    pub fixed: BTreeMap<(i32, i32), C64>,
    /// Per canonical point, the data box `[lo, hi]` for (Re, Im).
    pub boxes: BTreeMap<(i32, i32), [(f64, f64); 2]>,
    pub sdp: SdpProblem,
    /// Joint confidence of the data tubes.
    pub confidence: f64,
}

impl BochnerProblem {
    pub fn m(&self) -> usize {
        self.indices.len()
    }

    pub fn scale_index(&self) -> usize {
        self.variables.len() - 1
    }

    pub fn num_constrained_points(&self) -> usize {
        self.constraints.len()
    }
}

fn canonical(i: i32, j: i32) -> bool {
    Lattice::is_canonical(i, j)
}

/// Builds the program from data tubes on `lattice` and a test-vector set
/// whose differences lie on it.
pub fn assemble_sdp(
    constraints: &[CFEstimate],
    lattice: &Lattice,
    test_set: &TestVectorSet,
) -> Result<BochnerProblem> {
    let indices: Vec<(i32, i32)> = match test_set.lattice_indices() {
        Some(ix) => ix.to_vec(),
        None => test_set
            .vectors()
            .iter()
            .enumerate()
            .map(|(k, v)| {
                lattice
                    .locate(v.pair()?)
                    .ok_or(Error::OffLattice { k, l: k })
            })
            .collect::<Result<_>>()?,
    };
    let m = indices.len();
    if m < 2 {
        return Err(Error::InvalidArgument("need at least two test vectors".into()));
    }
    for (k, a) in indices.iter().enumerate() {
        for (l, b) in indices.iter().enumerate() {
            if !lattice.contains(a.0 - b.0, a.1 - b.1) {
                return Err(Error::OffLattice { k, l });
            }
        }
    }

    // Data boxes on canonical points, starting from |Re|, |Im| <= 1.
    let mut boxes: BTreeMap<(i32, i32), [(f64, f64); 2]> = BTreeMap::new();
    for c in constraints {
        let xi = c.point.pair()?;
        let (i, j) = lattice
            .locate(xi)
            .ok_or(Error::ConstraintOffLattice(xi[0], xi[1]))?;
        if (i, j) == (0, 0) {
            if (c.value - C64::new(1.0, 0.0)).re.abs() > c.radius
                || c.value.im.abs() > c.radius
            {
                return Err(Error::Infeasible("data tube at the origin excludes chi(0) = 1".into()));
            }
            continue;
        }
        let (key, v) = if canonical(i, j) {
            ((i, j), c.value)
        } else {
            ((-i, -j), c.value.conj())
        };
        let entry = boxes.entry(key).or_insert([(-1.0, 1.0); 2]);
        for (slot, center) in entry.iter_mut().zip([v.re, v.im]) {
            slot.0 = slot.0.max(center - c.radius);
            slot.1 = slot.1.min(center + c.radius);
            if slot.0 > slot.1 {
                return Err(Error::Infeasible(format!(
                    "data tubes at lattice point ({}, {}) are empty after intersection",
                    key.0, key.1
                )));
            }
        }
    }

    // Canonical differences reached by ordered pairs.
    let mut pairs: BTreeMap<(i32, i32), Vec<(usize, usize)>> = BTreeMap::new();
    for (k, a) in indices.iter().enumerate() {
        for (l, b) in indices.iter().enumerate() {
            let d = (a.0 - b.0, a.1 - b.1);
            if canonical(d.0, d.1) {
                pairs.entry(d).or_default().push((k, l));
            }
        }
    }

    let coords: Vec<[f64; 2]> = indices.iter().map(|&(i, j)| lattice.coords(i, j)).collect();
    let mut blocks: Vec<LmiBlock> = (0..2)
        .map(|_| LmiBlock {
            constant: linalg::identity(m),
            generators: vec![],
            terms: vec![],
        })
        .collect();
    let mut variables = Vec::new();
    let mut fixed = BTreeMap::new();
    let mut rows = Vec::new();
    for (&d, list) in &pairs {
        let bx = boxes.get(&d).copied().unwrap_or([(-1.0, 1.0); 2]);
        let mut gens = [0usize; 2];
        for (lambda, block) in blocks.iter_mut().enumerate() {
            let entries = list
                .iter()
                .map(|&(k, l)| {
                    let phase = 0.5 * lambda as f64 * sym2(coords[k], coords[l]);
                    (k, l, C64::from_polar(1.0, phase))
                })
                .collect();
            gens[lambda] = block.generators.len();
            block.generators.push(SparseGen::new(entries));
        }
        let pinned = bx.iter().all(|b| b.1 - b.0 <= FIXED_WIDTH);
        if pinned {
            let v = C64::new(0.5 * (bx[0].0 + bx[0].1), 0.5 * (bx[1].0 + bx[1].1));
            for (block, &g) in blocks.iter_mut().zip(&gens) {
                block.generators[g].add_hermitian_to(&mut block.constant, v);
            }
            fixed.insert(d, v);
            continue;
        }
        for (part, weight, (lo, hi)) in [
            (Part::Re, C64::new(-1.0, 0.0), bx[0]),
            (Part::Im, C64::new(0.0, -1.0), bx[1]),
        ] {
            let var = variables.len();
            variables.push(Variable::Chi { point: d, part, lo, hi });
            for (block, &g) in blocks.iter_mut().zip(&gens) {
                block.terms.push(Term { var, generator: g, weight });
            }
            rows.push(LinearRow { constant: -lo, coeffs: vec![(var, -1.0)] });
            rows.push(LinearRow { constant: hi, coeffs: vec![(var, 1.0)] });
        }
    }
    let t = variables.len();
    variables.push(Variable::Scale);
    let half_identity = SparseGen::new((0..m).map(|k| (k, k, C64::new(0.5, 0.0))).collect());
    blocks[0].generators.push(half_identity);
    let g = blocks[0].generators.len() - 1;
    blocks[0].terms.push(Term { var: t, generator: g, weight: C64::new(-1.0, 0.0) });

    let mut objective = vec![0.0; variables.len()];
    objective[t] = -1.0;
    Ok(BochnerProblem {
        lattice: lattice.clone(),
        constraints: constraints.to_vec(),
        test_set: test_set.clone(),
        indices,
        variables,
        fixed,
        boxes,
        sdp: SdpProblem { objective, blocks, rows },
        confidence: 1.0,
    })
}

/// [`assemble_sdp`] on a constraint set, carrying its joint confidence.
pub fn assemble_from_set(set: &ConstraintSet, test_set: &TestVectorSet) -> Result<BochnerProblem> {
    let mut p = assemble_sdp(&set.constraints, &set.lattice, test_set)?;
    p.confidence = set.metadata.confidence_union_bound;
    Ok(p)
}

/// Solver output mapped back to the lattice.
#[derive(Clone, Debug)]
pub struct RawSolution {
    pub x_star: f64,
    pub chi_opt: CFGrid,
    pub sdp: SdpSolution,
}

/// Optimal `chi` on every lattice point. Points outside the program take the
/// center of their data box (zero without data).
fn chi_from_y(problem: &BochnerProblem, y: &[f64]) -> CFGrid {
    let mut canon: BTreeMap<(i32, i32), C64> = problem.fixed.clone();
    for (v, &val) in problem.variables.iter().zip(y) {
        if let Variable::Chi { point, part, .. } = v {
            let e = canon.entry(*point).or_insert(C64::new(0.0, 0.0));
            match part {
                Part::Re => e.re = val,
                Part::Im => e.im = val,
            }
        }
    }
    let l = &problem.lattice;
    let lookup = |i: i32, j: i32| -> C64 {
        canon.get(&(i, j)).copied().unwrap_or_else(|| {
            problem
                .boxes
                .get(&(i, j))
                .map(|b| C64::new(0.5 * (b[0].0 + b[0].1), 0.5 * (b[1].0 + b[1].1)))
                .unwrap_or(C64::new(0.0, 0.0))
        })
    };
    let values = l
        .indices()
        .map(|(i, j)| {
            if (i, j) == (0, 0) {
                C64::new(1.0, 0.0)
            } else if canonical(i, j) {
                lookup(i, j)
            } else {
                lookup(-i, -j).conj()
            }
        })
        .collect();
    CFGrid::from_values(l.clone(), values).expect("one value per lattice point")
}

pub fn solve(problem: &BochnerProblem, config: &SolverConfig) -> Result<RawSolution> {
    let sol = sdp::solve(&problem.sdp, config)?;
    let x_star = sol.y[problem.scale_index()] / problem.m() as f64;
    Ok(RawSolution {
        x_star,
        chi_opt: chi_from_y(problem, &sol.y),
        sdp: sol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Certified,
    NoCertification,
    UncertifiedNumeric,
}

impl Status {
    /// CLI exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Certified => 0,
            Status::NoCertification => 10,
            Status::UncertifiedNumeric => 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportResiduals {
    /// Relative infeasibility of the returned `chi`, `t`.
    pub primal: f64,
    /// Relative infeasibility of the certificate before verification.
    pub dual: f64,
    pub gap: f64,
    pub iterations: usize,
    /// `|lambda_min(M^(0)(chi', T)) + x_star m| / m`.
    pub theorem: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeInfo {
    pub side: usize,
    pub extent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestSetInfo {
    pub m: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub x_star: f64,
    pub x_certified: f64,
    /// Lower bound recomputed from the certificate in extended precision.
    pub dual_objective: f64,
    pub status: Status,
    pub residuals: ReportResiduals,
    pub confidence: f64,
    pub lattice: LatticeInfo,
    pub test_set: TestSetInfo,
    pub witness: WitnessSpec,
    pub chi_opt: CFGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// `M^(0)(chi', T)` for the optimal `chi'`.
pub fn optimal_m0(problem: &BochnerProblem, chi_opt: &CFGrid) -> Result<phasespace::BochnerMatrix> {
    phasespace::bochner_matrix(chi_opt, &problem.test_set, 0.0)
}

#[cfg(test)]
mod tests;
