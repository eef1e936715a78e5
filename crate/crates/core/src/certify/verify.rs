//! Extended-precision bound from an approximate certificate.
//!
//! Given any `(X, x)` with `X` PSD and `x >= 0`, every feasible `y` in the
//! variable boxes satisfies
//! `b^T y <= <C, X> + c^T x - sum_i min(lo_i r_i, hi_i r_i)`
//! with `r = A(X) + a^T x - b`. Since `b^T y = -t`, this bounds the optimal
//! `x = t / m` from below. `X` is shifted by a multiple of the identity until
//! its Cholesky factorization succeeds, and sums run in double-double.

use num_complex::Complex64 as C64;
use qd::Quad;

use super::{
    optimal_m0, BochnerProblem, CertificationReport, LatticeInfo, RawSolution,
    ReportResiduals, Status, TestSetInfo, Variable, WitnessSpec,
};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::phasespace::min_eig_pair;

/// Residual above which a positive bound is reported as numerically
/// uncertified.
pub const CERTIFICATE_RESIDUAL_LIMIT: f64 = 1e-6;

/// Absolute allowance for rounding in the phase factors and the final
/// conversion to `f64`.
const ROUNDING_ALLOWANCE: f64 = 1e-12;

fn q(x: f64) -> Quad {
    Quad::from(x)
}

fn to_f64(x: Quad) -> f64 {
    x.0 + x.1
}

#[derive(Clone, Copy)]
struct QC {
    re: Quad,
    im: Quad,
}

impl QC {
    fn zero() -> Self {
        QC { re: q(0.0), im: q(0.0) }
    }

    fn add_prod(&mut self, a: C64, b: C64) {
        self.re += q(a.re) * q(b.re) - q(a.im) * q(b.im);
        self.im += q(a.re) * q(b.im) + q(a.im) * q(b.re);
    }

    /// `Re(w self)`.
    fn re_times(&self, w: C64) -> Quad {
        q(w.re) * self.re - q(w.im) * self.im
    }
}

/// `X + tau I` with `tau` just large enough for a Cholesky factorization.
fn shift_to_pd(x: &CMat) -> Result<(CMat, f64)> {
    let h = linalg::hermitian_part(x);
    let n = h.nrows();
    let lmin = linalg::eigvalsh(&h)?.into_iter().fold(f64::INFINITY, f64::min);
    let scale = linalg::frobenius(&h).max(1e-300);
    let mut margin = 16.0 * n as f64 * f64::EPSILON * scale;
    for _ in 0..40 {
        let tau = (-lmin).max(0.0) + margin;
        let mut shifted = h.clone();
        for k in 0..n {
            shifted[(k, k)].re += tau;
        }
        if linalg::is_positive_definite(&shifted) {
            return Ok((shifted, tau));
        }
        margin *= 4.0;
    }
    Err(Error::Numerical("certificate matrix could not be shifted to positive definite".into()))
}

/// Box of variable `i`. The scale variable is bounded by the spectral norm
/// of `M^(0)`, at most `sqrt(2) m` under the unit boxes.
fn variable_box(problem: &BochnerProblem, i: usize) -> (f64, f64) {
    match problem.variables[i] {
        Variable::Chi { lo, hi, .. } => (lo, hi),
        Variable::Scale => {
            let b = std::f64::consts::SQRT_2 * problem.m() as f64;
            (-b, b)
        }
    }
}

/// Verified lower bound on the optimal `x` from the dual pair in `raw`.
pub fn verified_bound(problem: &BochnerProblem, raw: &RawSolution) -> Result<f64> {
    let sdp = &problem.sdp;
    let n = sdp.num_vars();
    let mut shifted = Vec::with_capacity(sdp.blocks.len());
    for x in &raw.sdp.x_blocks {
        shifted.push(shift_to_pd(x)?.0);
    }
    let xr: Vec<f64> = raw.sdp.x_rows.iter().map(|&v| v.max(0.0)).collect();

    let mut value = q(0.0);
    let mut r: Vec<Quad> = sdp.objective.iter().map(|&b| -q(b)).collect();
    for (block, x) in sdp.blocks.iter().zip(&shifted) {
        let m = block.dim();
        for a in 0..m {
            for b in 0..m {
                let c = block.constant[(a, b)];
                let xv = x[(b, a)];
                value += q(c.re) * q(xv.re) - q(c.im) * q(xv.im);
            }
        }
        let traces: Vec<(QC, QC)> = block
            .generators
            .iter()
            .map(|g| {
                let mut t = QC::zero();
                let mut ta = QC::zero();
                for &(a, b, w) in &g.entries {
                    t.add_prod(w, x[(b, a)]);
                    ta.add_prod(w.conj(), x[(a, b)]);
                }
                (t, ta)
            })
            .collect();
        for term in &block.terms {
            let (t, ta) = &traces[term.generator];
            r[term.var] += t.re_times(term.weight) + ta.re_times(term.weight.conj());
        }
    }
    for (row, &xv) in sdp.rows.iter().zip(&xr) {
        value += q(row.constant) * q(xv);
        for &(i, a) in &row.coeffs {
            r[i] += q(a) * q(xv);
        }
    }
    for (i, ri) in r.iter().enumerate().take(n) {
        let (lo, hi) = variable_box(problem, i);
        let a = *ri * q(lo);
        let b = *ri * q(hi);
        value -= if to_f64(a) <= to_f64(b) { a } else { b };
    }
    let bound = to_f64(-value / q(problem.m() as f64));
    Ok(bound - ROUNDING_ALLOWANCE * (1.0 + bound.abs()))
}

/// Verifies `raw` and assembles the report.
pub fn certify_bound(problem: &BochnerProblem, raw: &RawSolution) -> Result<CertificationReport> {
    let dual_objective = verified_bound(problem, raw)?;
    let x_certified = dual_objective.min(raw.x_star);
    let res = raw.sdp.residuals;
    let status = if x_certified <= 0.0 {
        Status::NoCertification
    } else if res.certificate > CERTIFICATE_RESIDUAL_LIMIT {
        Status::UncertifiedNumeric
    } else {
        Status::Certified
    };

    let chi_opt = raw.chi_opt.clone();
    let m0 = optimal_m0(problem, &chi_opt)?;
    let (lmin, v) = min_eig_pair(&m0)?;
    let m = problem.m() as f64;
    let theorem = (lmin + raw.x_star * m).abs() / m;

    let mut warnings = Vec::new();
    if theorem > 1e-4 {
        warnings.push(format!(
            "lambda_min(M0(chi_opt)) = {lmin:.3e} differs from -x_star m = {:.3e}",
            -raw.x_star * m
        ));
    }
    Ok(CertificationReport {
        x_star: raw.x_star,
        x_certified,
        dual_objective,
        status,
        residuals: ReportResiduals {
            primal: res.problem,
            dual: res.certificate,
            gap: res.gap,
            iterations: raw.sdp.iterations,
            theorem,
        },
        confidence: problem.confidence,
        lattice: LatticeInfo {
            side: problem.lattice.side(),
            extent: problem.lattice.extent(),
        },
        test_set: TestSetInfo {
            m: problem.m(),
            seed: problem.test_set.seed(),
        },
        witness: WitnessSpec::new(problem.test_set.vectors().to_vec(), v)?,
        chi_opt,
        config: None,
        warnings,
    })
}
