use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::CharFn;
use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Characteristic-function values on every point of a lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct CFGrid {
    lattice: Lattice,
    values: Vec<C64>,
}

/// JSON envelope: lattice metadata plus row-major real and imaginary parts.
#[derive(Serialize, Deserialize)]
struct GridRepr {
    lattice: Lattice,
    spacing: f64,
    origin_index: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<GridRepr> for CFGrid {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        if r.re.len() != r.im.len() {
            return Err(Error::Dimension("re and im arrays differ in length".into()));
        }
        let values = r.re.iter().zip(&r.im).map(|(&a, &b)| C64::new(a, b)).collect();
        CFGrid::from_values(r.lattice, values)
    }
}

impl From<CFGrid> for GridRepr {
    fn from(g: CFGrid) -> Self {
        GridRepr {
            spacing: g.lattice.spacing(),
            origin_index: g.lattice.origin_index(),
            re: g.values.iter().map(|z| z.re).collect(),
            im: g.values.iter().map(|z| z.im).collect(),
            lattice: g.lattice,
        }
    }
}

impl CFGrid {
    pub fn from_values(lattice: Lattice, values: Vec<C64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::Dimension(format!(
                "grid has {} values for {} lattice points",
                values.len(),
                lattice.len()
            )));
        }
        Ok(Self { lattice, values })
    }

    /// Samples `chi` at every lattice point.
    pub fn from_fn(lattice: Lattice, chi: impl Fn([f64; 2]) -> C64) -> Self {
        let values = lattice
            .indices()
            .map(|(i, j)| chi(lattice.coords(i, j)))
            .collect();
        Self { lattice, values }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn origin_index(&self) -> usize {
        self.lattice.origin_index()
    }

    pub fn at(&self, i: i32, j: i32) -> Option<C64> {
        self.lattice.linear(i, j).map(|k| self.values[k])
    }

    /// Largest `|chi(-xi) - conj(chi(xi))|` over the lattice.
    pub fn hermitian_defect(&self) -> f64 {
        self.lattice
            .indices()
            .map(|(i, j)| {
                let a = self.at(i, j).unwrap();
                let b = self.at(-i, -j).unwrap();
                (b - a.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl CharFn for CFGrid {
    fn chi(&self, xi: [f64; 2]) -> Option<C64> {
        let (i, j) = self.lattice.locate(xi)?;
        self.at(i, j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vacuum(xi: [f64; 2]) -> C64 {
        C64::new((-(xi[0] * xi[0] + xi[1] * xi[1]) / 4.0).exp(), 0.0)
    }

    #[test]
    fn vacuum_grid_invariants() {
        let g = CFGrid::from_fn(Lattice::new(9, 3.0).unwrap(), vacuum);
        assert_eq!(g.values()[g.origin_index()], C64::new(1.0, 0.0));
        assert_eq!(g.hermitian_defect(), 0.0);
        assert!(g.max_modulus() <= 1.0);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let l = Lattice::new(5, 1.7).unwrap();
        let g = CFGrid::from_fn(l, |xi| C64::new((xi[0] * 1.3).cos() / 3.0, xi[1].sin() * 0.1));
        let s = serde_json::to_string(&g).unwrap();
        let back: CFGrid = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn off_lattice_lookup_is_none() {
        let g = CFGrid::from_fn(Lattice::new(5, 2.0).unwrap(), vacuum);
        assert!(g.chi([0.5, 0.0]).is_none());
        assert!(g.chi([1.0, -2.0]).is_some());
        assert!(g.chi([3.0, 0.0]).is_none());
    }
}
