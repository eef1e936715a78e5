//! Negativity witnesses `F = (1/m) sum_kl conj(v_k) v_l D(xi_k - xi_l)` and
//! their expectation values `tr(F rho)` computed from `chi`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasespace::{CFGrid, CharFn, PhasePoint};
use crate::sources::StateModel;

/// Test vectors and coefficients of a witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WitnessRepr", into = "WitnessRepr")]
pub struct WitnessSpec {
    vectors: Vec<PhasePoint>,
    v: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct WitnessRepr {
    vectors: Vec<PhasePoint>,
    v_re: Vec<f64>,
    v_im: Vec<f64>,
}

impl TryFrom<WitnessRepr> for WitnessSpec {
    type Error = Error;

    fn try_from(r: WitnessRepr) -> Result<Self> {
        if r.v_re.len() != r.v_im.len() {
            return Err(Error::Dimension(format!(
                "{} real and {} imaginary coefficients",
                r.v_re.len(),
                r.v_im.len()
            )));
        }
        let v = r.v_re.iter().zip(&r.v_im).map(|(&a, &b)| C64::new(a, b)).collect();
        WitnessSpec::new(r.vectors, v)
    }
}

impl From<WitnessSpec> for WitnessRepr {
    fn from(w: WitnessSpec) -> Self {
        WitnessRepr {
            v_re: w.v.iter().map(|c| c.re).collect(),
            v_im: w.v.iter().map(|c| c.im).collect(),
            vectors: w.vectors,
        }
    }
}

impl WitnessSpec {
    /// `v` is normalized to unit length.
    pub fn new(vectors: Vec<PhasePoint>, v: Vec<C64>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::EmptySelection);
        }
        if vectors.len() != v.len() {
            return Err(Error::Dimension(format!(
                "{} vectors but {} coefficients",
                vectors.len(),
                v.len()
            )));
        }
        for p in &vectors {
            p.pair()?;
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::InvalidArgument("witness coefficients must be nonzero".into()));
        }
        let v = v.into_iter().map(|c| c / norm).collect();
        Ok(WitnessSpec { vectors, v })
    }

    pub fn m(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[PhasePoint] {
        &self.vectors
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.v
    }

    /// `tr(F rho)` for the state with characteristic function `chi`.
    pub fn expectation(&self, chi: &impl CharFn) -> Result<C64> {
        let pts: Vec<[f64; 2]> = self.vectors.iter().map(|p| p.pair()).collect::<Result<_>>()?;
        let mut acc = C64::new(0.0, 0.0);
        for (k, (a, vk)) in pts.iter().zip(&self.v).enumerate() {
            for (l, (b, vl)) in pts.iter().zip(&self.v).enumerate() {
                let c = chi
                    .chi([a[0] - b[0], a[1] - b[1]])
                    .ok_or(Error::OffLattice { k, l })?;
                acc += vk.conj() * vl * c;
            }
        }
        Ok(acc / self.m() as f64)
    }
}

/// What a witness is evaluated on.
#[derive(Clone, Debug)]
pub enum WitnessSubject {
    State(StateModel),
    /// Convex combination of models; weights are normalized.
    Mixture(Vec<(f64, StateModel)>),
    Grid(CFGrid),
}

impl CharFn for WitnessSubject {
    fn chi(&self, xi: [f64; 2]) -> Option<C64> {
        match self {
            WitnessSubject::State(s) => Some(s.chi(xi)),
            WitnessSubject::Mixture(parts) => {
                let total: f64 = parts.iter().map(|p| p.0).sum();
                Some(parts.iter().map(|(w, s)| s.chi(xi) * (w / total)).sum())
            }
            WitnessSubject::Grid(g) => g.chi(xi),
        }
    }
}

impl WitnessSubject {
    /// Whether the Wigner function is known to be nonnegative.
    pub fn has_positive_wigner(&self) -> Option<bool> {
        match self {
            WitnessSubject::State(s) => Some(s.has_positive_wigner()),
            WitnessSubject::Mixture(parts) => {
                if parts.iter().all(|(_, s)| s.has_positive_wigner()) {
                    Some(true)
                } else {
                    None
                }
            }
            WitnessSubject::Grid(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    /// `Re tr(F rho)`.
    pub value: f64,
    /// `|Im tr(F rho)|`; zero for Hermitian `F` and Hermitian-symmetric `chi`.
    pub imag_residue: f64,
    pub hermitian: bool,
    pub bounded: bool,
    /// Nonnegative on a state with positive Wigner function; `None` when the
    /// subject's Wigner sign is unknown.
    pub classical_nonnegative: Option<bool>,
    /// `tr(F rho') <= -x_star` on the optimal `chi'`; `None` without `x_star`.
    pub attains_bound: Option<bool>,
}

const VALUE_TOL: f64 = 1e-9;
const BOUND_TOL: f64 = 1e-6;

pub fn witness_check(
    witness: &WitnessSpec,
    subject: &WitnessSubject,
    x_star: Option<f64>,
) -> Result<WitnessReport> {
    let e = witness.expectation(subject)?;
    let scale = 1.0 + e.norm();
    let classical = subject.has_positive_wigner();
    Ok(WitnessReport {
        value: e.re,
        imag_residue: e.im.abs(),
        hermitian: e.im.abs() <= 1e-10 * scale,
        bounded: e.norm() <= 1.0 + VALUE_TOL,
        classical_nonnegative: classical.filter(|&c| c).map(|_| e.re >= -VALUE_TOL),
        attains_bound: x_star.map(|x| e.re <= -x + BOUND_TOL * (1.0 + x.abs())),
    })
}
