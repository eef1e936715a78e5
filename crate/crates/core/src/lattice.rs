//! Square lattices of characteristic-function arguments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform `side x side` grid on `[-extent, extent]^2`.
///
/// `side` is odd so the origin is a lattice point and the grid is closed
/// under negation. Points are addressed by signed integer indices
/// `(i, j)` in `[-half, half]^2`, with coordinates `(i * spacing, j * spacing)`
/// in `(q, p)` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeRepr", into = "LatticeRepr")]
pub struct Lattice {
    side: usize,
    extent: f64,
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    side: usize,
    extent: f64,
}

impl TryFrom<LatticeRepr> for Lattice {
    type Error = Error;
    fn try_from(r: LatticeRepr) -> Result<Self> {
        Lattice::new(r.side, r.extent)
    }
}

impl From<Lattice> for LatticeRepr {
    fn from(l: Lattice) -> Self {
        LatticeRepr {
            side: l.side,
            extent: l.extent,
        }
    }
}

impl Lattice {
    pub fn new(side: usize, extent: f64) -> Result<Self> {
        if side < 3 || side.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "lattice side must be odd and >= 3, got {side}"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lattice extent must be positive, got {extent}"
            )));
        }
        Ok(Self { side, extent })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn half(&self) -> i32 {
        ((self.side - 1) / 2) as i32
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.side - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.side * self.side
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: i32, j: i32) -> bool {
        let h = self.half();
        i.abs() <= h && j.abs() <= h
    }

    /// Row-major position of `(i, j)`; `i` (the q index) is the slow axis.
    pub fn linear(&self, i: i32, j: i32) -> Option<usize> {
        if !self.contains(i, j) {
            return None;
        }
        let h = self.half();
        Some((i + h) as usize * self.side + (j + h) as usize)
    }

    pub fn index_of(&self, linear: usize) -> (i32, i32) {
        let h = self.half();
        ((linear / self.side) as i32 - h, (linear % self.side) as i32 - h)
    }

    pub fn origin_index(&self) -> usize {
        self.linear(0, 0).expect("origin is on every lattice")
    }

    pub fn coords(&self, i: i32, j: i32) -> [f64; 2] {
        let s = self.spacing();
        [i as f64 * s, j as f64 * s]
    }

    /// Index of the lattice point at `xi`, if `xi` is one (to 1e-9 spacings).
    pub fn locate(&self, xi: [f64; 2]) -> Option<(i32, i32)> {
        let s = self.spacing();
        let fi = xi[0] / s;
        let fj = xi[1] / s;
        let (ri, rj) = (fi.round(), fj.round());
        if (fi - ri).abs() > 1e-9 || (fj - rj).abs() > 1e-9 {
            return None;
        }
        let (i, j) = (ri as i32, rj as i32);
        self.contains(i, j).then_some((i, j))
    }

    pub fn indices(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        (0..self.len()).map(move |k| self.index_of(k))
    }

    /// Half-plane representative set: `i > 0`, or `i == 0 && j > 0`.
    pub fn is_canonical(i: i32, j: i32) -> bool {
        i > 0 || (i == 0 && j > 0)
    }

    /// Non-zero points of the canonical half, in row-major order.
    pub fn canonical_points(&self) -> Vec<(i32, i32)> {
        self.indices()
            .filter(|&(i, j)| Self::is_canonical(i, j))
            .collect()
    }

    /// Indices of the central sub-lattice `[-extent/2, extent/2]^2`; pairwise
    /// differences of central points stay on the lattice.
    pub fn central_indices(&self) -> Vec<(i32, i32)> {
        let c = self.half() / 2;
        let mut out = Vec::with_capacity(((2 * c + 1) * (2 * c + 1)) as usize);
        for i in -c..=c {
            for j in -c..=c {
                out.push((i, j));
            }
        }
        out
    }
}
