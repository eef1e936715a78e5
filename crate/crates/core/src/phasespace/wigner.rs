use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::CFGrid;
use crate::error::Result;
use crate::lattice::Lattice;

/// Output grid for the Wigner transform: `side x side` points on
/// `[-extent, extent]^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerSpec {
    pub side: usize,
    pub extent: f64,
}

impl Default for WignerSpec {
    fn default() -> Self {
        Self {
            side: 81,
            extent: 5.0,
        }
    }
}

impl WignerSpec {
    pub fn grid(&self) -> Result<Lattice> {
        Lattice::new(self.side, self.extent)
    }
}

/// Real Wigner values on a square phase-space grid, row-major in `(q, p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub grid: Lattice,
    pub values: Vec<f64>,
    pub cell_volume: f64,
    /// Largest discarded imaginary part.
    pub imag_residue: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl WignerGrid {
    pub fn at(&self, i: i32, j: i32) -> Option<f64> {
        self.grid.linear(i, j).map(|k| self.values[k])
    }

    /// Value at the grid point nearest to `z`.
    pub fn nearest(&self, z: [f64; 2]) -> Option<f64> {
        let s = self.grid.spacing();
        self.at((z[0] / s).round() as i32, (z[1] / s).round() as i32)
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn axis(l: &Lattice) -> Vec<f64> {
    let s = l.spacing();
    (-l.half()..=l.half()).map(|k| k as f64 * s).collect()
}

/// `W(z) = (2 pi)^-2 sum_xi chi(xi) exp(-i xi . sigma z) ds^2`.
///
/// The kernel factorizes as `exp(-i xi_q z_p) exp(i xi_p z_q)`, so the sum is
/// done one axis at a time.
pub fn wigner_from_cf(grid: &CFGrid, spec: &WignerSpec) -> Result<WignerGrid> {
    let out = spec.grid()?;
    let xs = axis(grid.lattice());
    let zs = axis(&out);
    let (nx, nz) = (xs.len(), zs.len());
    let ds = grid.lattice().spacing();

    // partial[i][a] = sum_j chi(xi_i, xi_j) exp(i xi_j zq_a)
    let ep: Vec<C64> = (0..nx * nz)
        .map(|k| C64::from_polar(1.0, xs[k / nz] * zs[k % nz]))
        .collect();
    let vals = grid.values();
    let mut partial = vec![C64::new(0.0, 0.0); nx * nz];
    for i in 0..nx {
        for j in 0..nx {
            let c = vals[i * nx + j];
            for a in 0..nz {
                partial[i * nz + a] += c * ep[j * nz + a];
            }
        }
    }
    let norm = ds * ds / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
    let mut values = vec![0.0; nz * nz];
    let mut imag: f64 = 0.0;
    for a in 0..nz {
        for b in 0..nz {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..nx {
                acc += partial[i * nz + a] * ep[i * nz + b].conj();
            }
            acc *= norm;
            values[a * nz + b] = acc.re;
            imag = imag.max(acc.im.abs());
        }
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let warning = (imag > 1e-6 * peak).then(|| {
        format!("imaginary residue {imag:e} exceeds 1e-6 of peak {peak:e}; input is not Hermitian")
    });
    Ok(WignerGrid {
        cell_volume: out.spacing() * out.spacing(),
        grid: out,
        values,
        imag_residue: imag,
        warning,
    })
}

/// Forward transform `chi(xi) = sum_z W(z) exp(i xi . sigma z) dz^2` onto `lattice`.
pub fn cf_from_wigner(w: &WignerGrid, lattice: &Lattice) -> CFGrid {
    let xs = axis(lattice);
    let zs = axis(&w.grid);
    let (nx, nz) = (xs.len(), zs.len());
    let ep: Vec<C64> = (0..nx * nz)
        .map(|k| C64::from_polar(1.0, xs[k / nz] * zs[k % nz]))
        .collect();
    // partial[a][i] = sum_b W(zq_a, zp_b) exp(i xi_q,i zp_b)
    let mut partial = vec![C64::new(0.0, 0.0); nz * nx];
    for a in 0..nz {
        for b in 0..nz {
            let v = w.values[a * nz + b];
            for i in 0..nx {
                partial[a * nx + i] += ep[i * nz + b] * v;
            }
        }
    }
    let mut values = vec![C64::new(0.0, 0.0); nx * nx];
    for i in 0..nx {
        for j in 0..nx {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..nz {
                acc += partial[a * nx + i] * ep[j * nz + a].conj();
            }
            values[i * nx + j] = acc * w.cell_volume;
        }
    }
    CFGrid::from_values(lattice.clone(), values).expect("lattice-sized value vector")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn vacuum(xi: [f64; 2]) -> C64 {
        C64::new((-(xi[0] * xi[0] + xi[1] * xi[1]) / 4.0).exp(), 0.0)
    }

    fn fock1(xi: [f64; 2]) -> C64 {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        C64::new((1.0 - r2 / 2.0) * (-r2 / 4.0).exp(), 0.0)
    }

    fn lattice() -> Lattice {
        Lattice::new(37, 6.0).unwrap()
    }

    #[test]
    fn vacuum_origin_and_tail() {
        let g = CFGrid::from_fn(lattice(), vacuum);
        let w = wigner_from_cf(&g, &WignerSpec { side: 41, extent: 5.0 }).unwrap();
        assert!((w.at(0, 0).unwrap() - 1.0 / PI).abs() < 1e-3);
        assert!(w.at(20, 0).unwrap().abs() < 1e-5);
        assert!(w.at(0, -20).unwrap().abs() < 1e-5);
        assert!(w.warning.is_none());
        assert!((w.total_mass() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn vacuum_matches_gaussian_everywhere() {
        let g = CFGrid::from_fn(lattice(), vacuum);
        let w = wigner_from_cf(&g, &WignerSpec { side: 21, extent: 3.0 }).unwrap();
        for (k, (i, j)) in w.grid.indices().enumerate() {
            let [q, p] = w.grid.coords(i, j);
            let exact = (-(q * q + p * p)).exp() / PI;
            assert!((w.values[k] - exact).abs() < 1e-3, "({q},{p})");
        }
    }

    #[test]
    fn fock1_negative_origin() {
        let g = CFGrid::from_fn(lattice(), fock1);
        let w = wigner_from_cf(&g, &WignerSpec::default()).unwrap();
        assert!((w.at(0, 0).unwrap() + 1.0 / PI).abs() < 1e-3);
    }

    #[test]
    fn displaced_state_peaks_at_mean() {
        // coherent state with <q> = 1, <p> = 0.5
        let g = CFGrid::from_fn(lattice(), |xi: [f64; 2]| {
            vacuum(xi) * C64::from_polar(1.0, xi[0] * 0.5 - xi[1] * 1.0)
        });
        let w = wigner_from_cf(&g, &WignerSpec { side: 41, extent: 5.0 }).unwrap();
        assert!((w.nearest([1.0, 0.5]).unwrap() - 1.0 / PI).abs() < 1e-3);
    }

    #[test]
    fn broken_symmetry_is_flagged() {
        let g = CFGrid::from_fn(lattice(), |xi: [f64; 2]| {
            vacuum(xi) * C64::new(1.0, 0.3 * xi[0].signum().abs())
        });
        let w = wigner_from_cf(&g, &WignerSpec::default()).unwrap();
        assert!(w.warning.is_some());
    }

    #[test]
    fn round_trip_recovers_vacuum() {
        let l = lattice();
        let g = CFGrid::from_fn(l.clone(), vacuum);
        let w = wigner_from_cf(&g, &WignerSpec { side: 81, extent: 6.0 }).unwrap();
        let back = cf_from_wigner(&w, &l);
        let c = l.half() / 2;
        for i in -c..=c {
            for j in -c..=c {
                let d = (back.at(i, j).unwrap() - g.at(i, j).unwrap()).norm();
                assert!(d < 1e-4, "({i},{j}) err {d}");
            }
        }
    }
}
