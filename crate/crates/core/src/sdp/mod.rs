//! Block-diagonal complex semidefinite programs with linear inequalities.
//!
//! The problem is stated in inequality form
//!
//! ```text
//! maximize    b^T y
//! subject to  S_k = C_k - sum_i y_i A_{k,i}  is Hermitian PSD   (each block k)
//!             s_r = c_r - sum_i a_{r,i} y_i >= 0                (each row r)
//! ```
//!
//! and its companion
//!
//! ```text
//! minimize    sum_k <C_k, X_k> + c^T x
//! subject to  sum_k <A_{k,i}, X_k> + sum_r a_{r,i} x_r = b_i,   X_k PSD, x >= 0.
//! ```
//!
//! Every `A_{k,i}` is a sum of terms `w G + conj(w) G^H` with `G` a sparse
//! complex generator shared between variables, which keeps the Schur
//! complement assembly proportional to the number of distinct generators.

mod ipm;

pub use ipm::solve;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Sparse complex matrix `G` given by `(row, col, value)` triplets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseGen {
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseGen {
    pub fn new(entries: Vec<(usize, usize, C64)>) -> Self {
        Self { entries }
    }

    /// `tr(G M) = sum G[a, b] M[b, a]`.
    pub fn trace_with(&self, m: &CMat) -> C64 {
        self.entries.iter().map(|&(a, b, g)| g * m[(b, a)]).sum()
    }

    /// `tr(G^H M) = sum conj(G[a, b]) M[a, b]`.
    pub fn adjoint_trace_with(&self, m: &CMat) -> C64 {
        self.entries.iter().map(|&(a, b, g)| g.conj() * m[(a, b)]).sum()
    }

    /// `out += w G + conj(w) G^H`.
    pub fn add_hermitian_to(&self, out: &mut CMat, w: C64) {
        for &(a, b, g) in &self.entries {
            out[(a, b)] += w * g;
            out[(b, a)] += (w * g).conj();
        }
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm_sqr()).sum()
    }
}

/// One use of a generator by a variable inside a block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub var: usize,
    pub generator: usize,
    pub weight: C64,
}

/// `S = C - sum_i y_i A_i`, with `A_i = sum over terms of var i of
/// (w G + conj(w) G^H)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LmiBlock {
    pub constant: CMat,
    pub generators: Vec<SparseGen>,
    pub terms: Vec<Term>,
}

impl LmiBlock {
    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }
}

/// `s = constant - sum coeff * y >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRow {
    pub constant: f64,
    pub coeffs: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
    pub rows: Vec<LinearRow>,
}

/// Interior-point stopping rules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Relative feasibility tolerance for both problems.
    pub tol_feas: f64,
    /// Relative duality-gap tolerance.
    pub tol_gap: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_feas: 1e-8,
            tol_gap: 1e-7,
            max_iter: 100,
        }
    }
}

/// Relative residuals at the returned iterate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `||C - S - A^T y|| / (1 + ||C||)`, including the linear rows.
    pub problem: f64,
    /// `||b - A(X) - a^T x|| / (1 + ||b||)`.
    pub certificate: f64,
    /// `|certificate objective - objective| / (1 + |both|)`.
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub y: Vec<f64>,
    pub s_blocks: Vec<CMat>,
    pub s_rows: Vec<f64>,
    pub x_blocks: Vec<CMat>,
    pub x_rows: Vec<f64>,
    /// `b^T y`.
    pub objective: f64,
    /// `<C, X> + c^T x`.
    pub certificate_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
}

impl SdpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        for (k, b) in self.blocks.iter().enumerate() {
            if b.constant.ncols() != b.dim() {
                return Err(Error::Dimension(format!("block {k} constant is not square")));
            }
            if linalg::hermitian_defect(&b.constant) > 1e-12 * (1.0 + linalg::max_abs(&b.constant)) {
                return Err(Error::NotHermitian(linalg::hermitian_defect(&b.constant)));
            }
            for g in &b.generators {
                if g.entries.iter().any(|e| e.0 >= b.dim() || e.1 >= b.dim()) {
                    return Err(Error::Dimension(format!("generator entry outside block {k}")));
                }
            }
            for t in &b.terms {
                if t.var >= n || t.generator >= b.generators.len() {
                    return Err(Error::Dimension(format!("term out of range in block {k}")));
                }
            }
        }
        for r in &self.rows {
            if r.coeffs.iter().any(|c| c.0 >= n) {
                return Err(Error::Dimension("row coefficient out of range".into()));
            }
        }
        Ok(())
    }

    /// `sum_i y_i A_i` per block and `a y` per row.
    pub fn adjoint(&self, y: &[f64]) -> (Vec<CMat>, Vec<f64>) {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mut out = linalg::zeros(b.dim());
                for t in &b.terms {
                    b.generators[t.generator].add_hermitian_to(&mut out, t.weight * y[t.var]);
                }
                out
            })
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|r| r.coeffs.iter().map(|&(i, a)| a * y[i]).sum())
            .collect();
        (blocks, rows)
    }

    /// `Re tr(A_i M_k)` summed over blocks plus `sum_r a_{r,i} v_r`. For
    /// Hermitian `M` this is the usual operator `A(X) + a^T x`.
    pub fn apply(&self, m: &[CMat], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vars()];
        for (b, mk) in self.blocks.iter().zip(m) {
            let traces: Vec<(C64, C64)> = b
                .generators
                .iter()
                .map(|g| (g.trace_with(mk), g.adjoint_trace_with(mk)))
                .collect();
            for t in &b.terms {
                let (tg, tgh) = traces[t.generator];
                out[t.var] += (t.weight * tg + t.weight.conj() * tgh).re;
            }
        }
        for (r, &vr) in self.rows.iter().zip(v) {
            for &(i, a) in &r.coeffs {
                out[i] += a * vr;
            }
        }
        out
    }

    /// `C - sum y_i A_i` and `c - a y`.
    pub fn slacks(&self, y: &[f64]) -> (Vec<CMat>, Vec<f64>) {
        let (ay, ry) = self.adjoint(y);
        let s = self
            .blocks
            .iter()
            .zip(ay)
            .map(|(b, a)| &b.constant - &a)
            .collect();
        let r = self.rows.iter().zip(ry).map(|(r, v)| r.constant - v).collect();
        (s, r)
    }
}
