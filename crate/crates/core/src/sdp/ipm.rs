//! Infeasible primal-dual interior-point method with the HKM search
//! direction and Mehrotra predictor-corrector steps.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use super::{Residuals, SdpProblem, SdpSolution, SolverConfig, SparseGen};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Fraction of the distance to the cone boundary taken per step.
const STEP_FRACTION: f64 = 0.95;

/// Generator with its support and the variables that use it.
struct Prepared {
    rows: Vec<usize>,
    row_entries: Vec<(usize, usize, C64)>,
    cols: Vec<usize>,
    col_entries: Vec<(usize, usize, C64)>,
    users: Vec<(usize, C64)>,
}

/// Rewrites `entries` of `G` (or `G^H` when `adjoint`) with rows relabeled to
/// positions in the sorted distinct row list.
fn compress(g: &SparseGen, adjoint: bool) -> (Vec<usize>, Vec<(usize, usize, C64)>) {
    let oriented: Vec<(usize, usize, C64)> = g
        .entries
        .iter()
        .map(|&(a, b, v)| if adjoint { (b, a, v.conj()) } else { (a, b, v) })
        .collect();
    let mut rows: Vec<usize> = oriented.iter().map(|e| e.0).collect();
    rows.sort_unstable();
    rows.dedup();
    let local = oriented
        .into_iter()
        .map(|(a, b, v)| (rows.binary_search(&a).unwrap(), b, v))
        .collect();
    (rows, local)
}

fn prepare(p: &SdpProblem) -> Vec<Vec<Prepared>> {
    p.blocks
        .iter()
        .map(|b| {
            let mut prepared: Vec<Prepared> = b
                .generators
                .iter()
                .map(|g| {
                    let (rows, row_entries) = compress(g, false);
                    let (cols, col_entries) = compress(g, true);
                    Prepared {
                        rows,
                        row_entries,
                        cols,
                        col_entries,
                        users: vec![],
                    }
                })
                .collect();
            for t in &b.terms {
                prepared[t.generator].users.push((t.var, t.weight));
            }
            prepared
        })
        .collect()
}

/// `X (G Z)` using only the rows of `G` that carry entries.
fn sandwich(x: &CMat, z: &CMat, rows: &[usize], entries: &[(usize, usize, C64)]) -> CMat {
    let m = x.nrows();
    let mut gz = Mat::<C64>::zeros(rows.len(), m);
    for &(r, b, v) in entries {
        for c in 0..m {
            gz[(r, c)] += v * z[(b, c)];
        }
    }
    let xr = Mat::<C64>::from_fn(m, rows.len(), |i, k| x[(i, rows[k])]);
    linalg::mul(xr.as_ref(), gz.as_ref())
}

/// Schur complement `H_ij = Re tr(A_i X A_j Z) + sum_r a_ri a_rj x_r / s_r`.
fn schur(
    p: &SdpProblem,
    prep: &[Vec<Prepared>],
    x: &[CMat],
    z: &[CMat],
    x_rows: &[f64],
    s_rows: &[f64],
) -> Mat<f64> {
    let n = p.num_vars();
    let mut h = Mat::<f64>::zeros(n, n);
    for ((block, gens), (xk, zk)) in p.blocks.iter().zip(prep).zip(x.iter().zip(z)) {
        for pg in gens {
            if pg.users.is_empty() {
                continue;
            }
            let u = sandwich(xk, zk, &pg.rows, &pg.row_entries);
            let uh = sandwich(xk, zk, &pg.cols, &pg.col_entries);
            for (gh, ph) in block.generators.iter().zip(gens) {
                if ph.users.is_empty() {
                    continue;
                }
                let t0 = gh.trace_with(&u);
                let t1 = gh.adjoint_trace_with(&u);
                let t2 = gh.trace_with(&uh);
                let t3 = gh.adjoint_trace_with(&uh);
                for &(j, w) in &pg.users {
                    let a = w * t0 + w.conj() * t2;
                    let b = w * t1 + w.conj() * t3;
                    for &(i, uw) in &ph.users {
                        h[(i, j)] += (uw * a + uw.conj() * b).re;
                    }
                }
            }
        }
    }
    for (r, (&xr, &sr)) in p.rows.iter().zip(x_rows.iter().zip(s_rows)) {
        let d = xr / sr;
        for &(i, ai) in &r.coeffs {
            for &(j, aj) in &r.coeffs {
                h[(i, j)] += ai * aj * d;
            }
        }
    }
    Mat::from_fn(n, n, |i, j| 0.5 * (h[(i, j)] + h[(j, i)]))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Iterate {
    y: Vec<f64>,
    s: Vec<CMat>,
    sr: Vec<f64>,
    x: Vec<CMat>,
    xr: Vec<f64>,
}

struct Status {
    rp: Vec<f64>,
    rd: Vec<CMat>,
    rdr: Vec<f64>,
    pobj: f64,
    dobj: f64,
    mu: f64,
    res: Residuals,
}

fn status(p: &SdpProblem, it: &Iterate, nu: f64, b_norm: f64, c_norm: f64) -> Status {
    let ax = p.apply(&it.x, &it.xr);
    let rp: Vec<f64> = p.objective.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let (sy, ry) = p.slacks(&it.y);
    let rd: Vec<CMat> = sy.iter().zip(&it.s).map(|(c, s)| c - s).collect();
    let rdr: Vec<f64> = ry.iter().zip(&it.sr).map(|(c, s)| c - s).collect();
    let pobj = dot(&p.objective, &it.y);
    let dobj = p
        .blocks
        .iter()
        .zip(&it.x)
        .map(|(b, x)| linalg::inner(&b.constant, x))
        .sum::<f64>()
        + p.rows.iter().zip(&it.xr).map(|(r, x)| r.constant * x).sum::<f64>();
    let comp = it.x.iter().zip(&it.s).map(|(x, s)| linalg::inner(x, s)).sum::<f64>()
        + dot(&it.xr, &it.sr);
    let rd_norm = (rd.iter().map(|m| linalg::inner(m, m)).sum::<f64>() + dot(&rdr, &rdr)).sqrt();
    let res = Residuals {
        problem: rd_norm / (1.0 + c_norm),
        certificate: norm(&rp) / (1.0 + b_norm),
        gap: (dobj - pobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
    };
    Status {
        rp,
        rd,
        rdr,
        pobj,
        dobj,
        mu: comp / nu,
        res,
    }
}

/// Search direction for a given complementarity target.
struct Direction {
    dy: Vec<f64>,
    ds: Vec<CMat>,
    dsr: Vec<f64>,
    dx: Vec<CMat>,
    dxr: Vec<f64>,
}

/// Solves the Newton system for `X dS + dX S = rc` (HKM, symmetrized) and
/// `x ds + dx s = rcr`, given `rc Z` precomputed as `rcz`.
#[allow(clippy::too_many_arguments)]
fn direction(
    p: &SdpProblem,
    chol: &faer::linalg::solvers::Llt<f64>,
    it: &Iterate,
    st: &Status,
    z: &[CMat],
    rcz: &[CMat],
    rcr: &[f64],
) -> Direction {
    // rhs = rp - A(rc Z) + A(X Rd Z) - a^T ((rcr - x rd) / s)
    let xrdz: Vec<CMat> = it
        .x
        .iter()
        .zip(&st.rd)
        .zip(z)
        .map(|((x, rd), zk)| {
            let t = linalg::mul(x.as_ref(), rd.as_ref());
            linalg::mul(t.as_ref(), zk.as_ref())
        })
        .collect();
    let m1: Vec<CMat> = rcz.iter().zip(&xrdz).map(|(a, b)| a - b).collect();
    let lp: Vec<f64> = (0..p.rows.len())
        .map(|r| (rcr[r] - it.xr[r] * st.rdr[r]) / it.sr[r])
        .collect();
    let a1 = p.apply(&m1, &lp);
    let n = p.num_vars();
    let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| st.rp[i] - a1[i]);
    chol.solve_in_place(rhs.as_mut());
    let dy: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();

    let (ady, ady_rows) = p.adjoint(&dy);
    let ds: Vec<CMat> = st.rd.iter().zip(&ady).map(|(r, a)| r - a).collect();
    let dsr: Vec<f64> = st.rdr.iter().zip(&ady_rows).map(|(r, a)| r - a).collect();
    let dx: Vec<CMat> = it
        .x
        .iter()
        .zip(&ds)
        .zip(z.iter().zip(rcz))
        .map(|((x, dsk), (zk, rczk))| {
            let t = linalg::mul(x.as_ref(), dsk.as_ref());
            let t = linalg::mul(t.as_ref(), zk.as_ref());
            linalg::hermitian_part(&(rczk - &t))
        })
        .collect();
    let dxr: Vec<f64> = (0..p.rows.len())
        .map(|r| (rcr[r] - it.xr[r] * dsr[r]) / it.sr[r])
        .collect();
    Direction {
        dy,
        ds,
        dsr,
        dx,
        dxr,
    }
}

fn max_steps(it: &Iterate, d: &Direction) -> Result<(f64, f64)> {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for (x, dx) in it.x.iter().zip(&d.dx) {
        ap = ap.min(linalg::max_step(x, dx, f64::INFINITY)?);
    }
    for (s, ds) in it.s.iter().zip(&d.ds) {
        ad = ad.min(linalg::max_step(s, ds, f64::INFINITY)?);
    }
    for (x, dx) in it.xr.iter().zip(&d.dxr) {
        if *dx < 0.0 {
            ap = ap.min(-x / dx);
        }
    }
    for (s, ds) in it.sr.iter().zip(&d.dsr) {
        if *ds < 0.0 {
            ad = ad.min(-s / ds);
        }
    }
    Ok((ap, ad))
}

fn axpy_mats(a: &[CMat], alpha: f64, b: &[CMat]) -> Vec<CMat> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let mut out = x.clone();
            for j in 0..out.ncols() {
                for i in 0..out.nrows() {
                    out[(i, j)] += y[(i, j)] * alpha;
                }
            }
            out
        })
        .collect()
}

fn axpy(a: &[f64], alpha: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + alpha * y).collect()
}

/// Solves `p` to the tolerances in `cfg`.
///
/// Returns [`Error::Infeasible`] when the iterates produce a ray certifying
/// that no `y` satisfies the constraints, and [`Error::NotConverged`] with the
/// best residuals when the iteration cap is reached.
pub fn solve(p: &SdpProblem, cfg: &SolverConfig) -> Result<SdpSolution> {
    p.validate()?;
    let n = p.num_vars();
    let prep = prepare(p);

    let b_norm = norm(&p.objective);
    let c_norm = (p.blocks.iter().map(|b| linalg::inner(&b.constant, &b.constant)).sum::<f64>()
        + p.rows.iter().map(|r| r.constant * r.constant).sum::<f64>())
    .sqrt();
    let mut a_norm = vec![0.0f64; n];
    for b in &p.blocks {
        for t in &b.terms {
            a_norm[t.var] += 2.0 * t.weight.norm_sqr() * b.generators[t.generator].frobenius_sqr();
        }
    }
    for r in &p.rows {
        for &(i, a) in &r.coeffs {
            a_norm[i] += a * a;
        }
    }
    let a_norm: Vec<f64> = a_norm.into_iter().map(f64::sqrt).collect();
    let dim_total: usize = p.blocks.iter().map(|b| b.dim()).sum::<usize>() + p.rows.len();
    let nu = dim_total as f64;
    let root = nu.sqrt();
    let zeta = p
        .objective
        .iter()
        .zip(&a_norm)
        .map(|(b, a)| (1.0 + b.abs()) / (1.0 + a))
        .fold(10.0f64.max(root), f64::max);
    let eta = a_norm
        .iter()
        .copied()
        .fold(10.0f64.max(root).max(c_norm), f64::max);

    let mut it = Iterate {
        y: vec![0.0; n],
        s: p.blocks.iter().map(|b| linalg::scaled_identity(b.dim(), eta)).collect(),
        sr: vec![eta; p.rows.len()],
        x: p.blocks.iter().map(|b| linalg::scaled_identity(b.dim(), zeta)).collect(),
        xr: vec![zeta; p.rows.len()],
    };

    let mut best = Residuals {
        problem: f64::INFINITY,
        certificate: f64::INFINITY,
        gap: f64::INFINITY,
    };
    for iter in 0..=cfg.max_iter {
        let st = status(p, &it, nu, b_norm, c_norm);
        if st.res.problem.max(st.res.certificate) <= best.problem.max(best.certificate) {
            best = st.res;
        }
        if st.res.problem <= cfg.tol_feas
            && st.res.certificate <= cfg.tol_feas
            && st.res.gap <= cfg.tol_gap
        {
            return Ok(SdpSolution {
                y: it.y,
                s_blocks: it.s,
                s_rows: it.sr,
                x_blocks: it.x,
                x_rows: it.xr,
                objective: st.pobj,
                certificate_objective: st.dobj,
                residuals: st.res,
                iterations: iter,
            });
        }
        // A feasible certificate with negative cost and vanishing residual
        // relative to its scale is a ray: the constraints admit no y.
        let ray_scale = -st.dobj;
        if ray_scale > 0.0 {
            let ax: Vec<f64> = p.objective.iter().zip(&st.rp).map(|(b, r)| b - r).collect();
            if norm(&ax) / ray_scale < 1e-8 && st.res.problem > cfg.tol_feas {
                return Err(Error::Infeasible(format!(
                    "certificate ray with cost {:e} after {iter} iterations",
                    st.dobj
                )));
            }
        }
        if iter == cfg.max_iter {
            break;
        }
        if norm(&it.y) > 1e12 * (1.0 + c_norm) {
            return Err(Error::Numerical(format!(
                "iterates diverge after {iter} iterations; the objective looks unbounded"
            )));
        }

        let z: Vec<CMat> = it
            .s
            .iter()
            .map(|s| {
                linalg::cholesky_inverse(s)
                    .map(|m| linalg::hermitian_part(&m))
                    .ok_or_else(|| Error::Numerical("slack matrix lost definiteness".into()))
            })
            .collect::<Result<_>>()?;
        let h = schur(p, &prep, &it.x, &z, &it.xr, &it.sr);
        let chol = match h.llt(Side::Lower) {
            Ok(c) => c,
            Err(_) => {
                let scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
                let reg = Mat::<f64>::from_fn(n, n, |i, j| {
                    h[(i, j)] + if i == j { 1e-13 * scale } else { 0.0 }
                });
                reg.llt(Side::Lower)
                    .map_err(|_| Error::Numerical("Schur complement is singular".into()))?
            }
        };

        // Predictor: target zero complementarity.
        let rcz_aff: Vec<CMat> = it.x.iter().map(|x| -x).collect();
        let rcr_aff: Vec<f64> = it.xr.iter().zip(&it.sr).map(|(x, s)| -x * s).collect();
        let aff = direction(p, &chol, &it, &st, &z, &rcz_aff, &rcr_aff);
        let (ap, ad) = max_steps(&it, &aff)?;
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let xa = axpy_mats(&it.x, ap, &aff.dx);
        let sa = axpy_mats(&it.s, ad, &aff.ds);
        let comp_aff = xa.iter().zip(&sa).map(|(x, s)| linalg::inner(x, s)).sum::<f64>()
            + dot(&axpy(&it.xr, ap, &aff.dxr), &axpy(&it.sr, ad, &aff.dsr));
        let mu_aff = comp_aff / nu;
        let sigma = (mu_aff / st.mu).clamp(0.0, 1.0).powi(3);

        // Corrector: centering plus the second-order term dX dS.
        let target = sigma * st.mu;
        let rcz: Vec<CMat> = it
            .x
            .iter()
            .zip(&z)
            .zip(aff.dx.iter().zip(&aff.ds))
            .map(|((x, zk), (dx, ds))| {
                let second = linalg::mul(dx.as_ref(), ds.as_ref());
                let second = linalg::mul(second.as_ref(), zk.as_ref());
                let mut out = zk * faer::Scale(C64::new(target, 0.0));
                out -= x;
                out -= &second;
                out
            })
            .collect();
        let rcr: Vec<f64> = (0..p.rows.len())
            .map(|r| target - it.xr[r] * it.sr[r] - aff.dxr[r] * aff.dsr[r])
            .collect();
        let dir = direction(p, &chol, &it, &st, &z, &rcz, &rcr);
        let (ap, ad) = max_steps(&it, &dir)?;
        let ap = (STEP_FRACTION * ap).min(1.0);
        let ad = (STEP_FRACTION * ad).min(1.0);

        it = Iterate {
            y: axpy(&it.y, ad, &dir.dy),
            s: axpy_mats(&it.s, ad, &dir.ds)
                .into_iter()
                .map(|m| linalg::hermitian_part(&m))
                .collect(),
            sr: axpy(&it.sr, ad, &dir.dsr),
            x: axpy_mats(&it.x, ap, &dir.dx)
                .into_iter()
                .map(|m| linalg::hermitian_part(&m))
                .collect(),
            xr: axpy(&it.xr, ap, &dir.dxr),
        };
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        primal_residual: best.problem,
        dual_residual: best.certificate,
        gap: best.gap,
    })
}
