//! Phase-space mathematics: the symplectic form, characteristic-function
//! grids, Bochner matrices and the discrete Wigner transform.

mod bochner;
mod grid;
mod wigner;

pub use bochner::{bochner_matrix, min_eig_pair, BochnerMatrix};
pub use grid::CFGrid;
pub use wigner::{cf_from_wigner, wigner_from_cf, WignerGrid, WignerSpec};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// A point of `R^{2n}` in characteristic-function space, ordered
/// `(q_1..q_n, p_1..p_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PhasePoint {
    coords: Vec<f64>,
}

impl TryFrom<Vec<f64>> for PhasePoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PhasePoint> for Vec<f64> {
    fn from(p: PhasePoint) -> Self {
        p.coords
    }
}

impl PhasePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "phase point needs 2n coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("phase point has non-finite entries".into()));
        }
        Ok(Self { coords })
    }

    /// Single-mode point `(q, p)`.
    ///
    /// Panics on non-finite input.
    pub fn single(q: f64, p: f64) -> Self {
        Self::new(vec![q, p]).expect("finite single-mode coordinates")
    }

    pub fn modes(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `(q, p)` for a single-mode point.
    pub fn pair(&self) -> Result<[f64; 2]> {
        match self.coords.as_slice() {
            &[q, p] => Ok([q, p]),
            _ => Err(Error::Dimension(format!(
                "expected a single-mode point, got {} modes",
                self.modes()
            ))),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &PhasePoint) -> Result<PhasePoint> {
        if self.modes() != other.modes() {
            return Err(Error::Dimension("mode count mismatch".into()));
        }
        Ok(PhasePoint {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        })
    }
}

/// The canonical symplectic form `xi . sigma zeta` with
/// `sigma = [[0, 1], [-1, 0]]` in `(q, p)` blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymplecticForm {
    modes: usize,
}

impl SymplecticForm {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument("mode count must be positive".into()));
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn eval(&self, xi: &PhasePoint, zeta: &PhasePoint) -> Result<f64> {
        if xi.modes() != self.modes || zeta.modes() != self.modes {
            return Err(Error::Dimension(format!(
                "symplectic form on {} modes applied to points with {} and {} modes",
                self.modes,
                xi.modes(),
                zeta.modes()
            )));
        }
        let n = self.modes;
        let (a, b) = (xi.coords(), zeta.coords());
        Ok((0..n).map(|i| a[i] * b[n + i] - a[n + i] * b[i]).sum())
    }
}

/// `xi_q zeta_p - xi_p zeta_q`, summed over modes.
pub fn symplectic_form(xi: &PhasePoint, zeta: &PhasePoint) -> Result<f64> {
    if xi.modes() != zeta.modes() {
        return Err(Error::Dimension(format!(
            "points have {} and {} modes",
            xi.modes(),
            zeta.modes()
        )));
    }
    SymplecticForm::new(xi.modes())?.eval(xi, zeta)
}

#[inline]
pub(crate) fn sym2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// A single-mode characteristic function that can be queried pointwise.
pub trait CharFn {
    /// Value at `xi`, or `None` when `xi` is outside the representation
    /// (for example off a lattice).
    fn chi(&self, xi: [f64; 2]) -> Option<C64>;
}

impl<F: Fn([f64; 2]) -> C64> CharFn for F {
    fn chi(&self, xi: [f64; 2]) -> Option<C64> {
        Some(self(xi))
    }
}

/// Test vectors `xi_1..xi_m` that generate a Bochner matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestVectorSet {
    vectors: Vec<PhasePoint>,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lattice_indices: Option<Vec<(i32, i32)>>,
}

impl TestVectorSet {
    /// Free-standing set, for use with characteristic functions that can be
    /// evaluated anywhere.
    pub fn new(vectors: Vec<PhasePoint>, seed: u64) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidArgument("test-vector set is empty".into()));
        }
        let modes = vectors[0].modes();
        if vectors.iter().any(|v| v.modes() != modes) {
            return Err(Error::Dimension("test vectors differ in mode count".into()));
        }
        Ok(Self {
            vectors,
            seed,
            lattice_indices: None,
        })
    }

    /// Set of lattice points whose pairwise differences all lie on `lattice`.
    pub fn on_lattice(lattice: &Lattice, indices: Vec<(i32, i32)>, seed: u64) -> Result<Self> {
        if indices.len() < 2 {
            return Err(Error::InvalidArgument("need at least two test vectors".into()));
        }
        for (k, a) in indices.iter().enumerate() {
            if !lattice.contains(a.0, a.1) {
                return Err(Error::InvalidArgument(format!("test vector {k} is off the lattice")));
            }
            for (l, b) in indices.iter().enumerate() {
                if !lattice.contains(a.0 - b.0, a.1 - b.1) {
                    return Err(Error::OffLattice { k, l });
                }
                if k != l && a == b {
                    return Err(Error::InvalidArgument(format!(
                        "test vectors {k} and {l} coincide"
                    )));
                }
            }
        }
        let vectors = indices
            .iter()
            .map(|&(i, j)| {
                let [q, p] = lattice.coords(i, j);
                PhasePoint::single(q, p)
            })
            .collect();
        Ok(Self {
            vectors,
            seed,
            lattice_indices: Some(indices),
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn vectors(&self) -> &[PhasePoint] {
        &self.vectors
    }

    pub fn lattice_indices(&self) -> Option<&[(i32, i32)]> {
        self.lattice_indices.as_deref()
    }

    pub(crate) fn pairs(&self) -> Result<Vec<[f64; 2]>> {
        self.vectors.iter().map(PhasePoint::pair).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symplectic_examples() {
        let e = |a: [f64; 2], b: [f64; 2]| {
            symplectic_form(&PhasePoint::single(a[0], a[1]), &PhasePoint::single(b[0], b[1]))
                .unwrap()
        };
        assert_eq!(e([1.0, 0.0], [0.0, 1.0]), 1.0);
        assert_eq!(e([2.0, 3.0], [2.0, 3.0]), 0.0);
        assert_eq!(e([2.0, 3.0], [5.0, 7.0]), -1.0);
    }

    #[test]
    fn symplectic_dimension_mismatch() {
        let a = PhasePoint::single(1.0, 0.0);
        let b = PhasePoint::new(vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(symplectic_form(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn two_mode_form_sums_blocks() {
        let a = PhasePoint::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = PhasePoint::new(vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        // (1*7 - 3*5) + (2*8 - 4*6)
        assert_eq!(symplectic_form(&a, &b).unwrap(), -16.0);
    }

    #[test]
    fn invalid_points() {
        assert!(PhasePoint::new(vec![1.0]).is_err());
        assert!(PhasePoint::new(vec![f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn lattice_test_set_rejects_far_pairs() {
        let l = Lattice::new(5, 2.0).unwrap();
        let err = TestVectorSet::on_lattice(&l, vec![(-2, 0), (1, 0)], 0).unwrap_err();
        assert!(matches!(err, Error::OffLattice { .. }));
        assert!(TestVectorSet::on_lattice(&l, vec![(-1, 0), (1, 1)], 0).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn antisymmetry(a in prop::array::uniform4(-1e3f64..1e3)) {
            let x = PhasePoint::single(a[0], a[1]);
            let y = PhasePoint::single(a[2], a[3]);
            let s = symplectic_form(&x, &y).unwrap() + symplectic_form(&y, &x).unwrap();
            prop_assert_eq!(s, 0.0);
            prop_assert_eq!(symplectic_form(&x, &x).unwrap(), 0.0);
        }
    }
}
