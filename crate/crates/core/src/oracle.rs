//! Independent reference computations used only by unit tests: a Jacobi
//! eigensolver, displacement operators in a truncated number basis, and
//! Hermite-function wavefunctions.

use num_complex::Complex64 as C64;

use crate::linalg::CMat;

/// Eigenvalues of a real symmetric matrix (row-major `n x n`) by cyclic Jacobi.
pub fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Eigenvalues of a Hermitian matrix through its real embedding
/// `[[X, -Y], [Y, X]]`, whose spectrum is the original one doubled.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    let d = 2 * n;
    let mut a = vec![0.0; d * d];
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            a[i * d + j] = z.re;
            a[(i + n) * d + j + n] = z.re;
            a[i * d + j + n] = -z.im;
            a[(i + n) * d + j] = z.im;
        }
    }
    jacobi_eigenvalues(a, d).into_iter().step_by(2).collect()
}

type Dense = Vec<Vec<C64>>;

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = vec![vec![C64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// `exp(i (xi_q p - xi_p q))` on the first `dim` number states, by scaling
/// and squaring of a Taylor series.
pub fn displacement(xi: [f64; 2], dim: usize) -> Dense {
    let r2 = std::f64::consts::SQRT_2;
    let zero = C64::new(0.0, 0.0);
    // q = (a + a^dag)/sqrt2, p = (a - a^dag)/(i sqrt2)
    let mut g = vec![vec![zero; dim]; dim];
    for n in 1..dim {
        let s = (n as f64).sqrt() / r2;
        // <n-1| a |n> = sqrt(n)
        let q = C64::new(s, 0.0);
        let p_lower = C64::new(0.0, -s); // <n-1|p|n> = sqrt(n)/(i sqrt2)
        let p_upper = C64::new(0.0, s); // <n|p|n-1>
        let i = C64::new(0.0, 1.0);
        g[n - 1][n] = i * (p_lower * xi[0] - q * xi[1]);
        g[n][n - 1] = i * (p_upper * xi[0] - q * xi[1]);
    }
    let norm: f64 = g.iter().flatten().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = (norm.log2().ceil().max(0.0) as u32) + 4;
    let scale = 0.5f64.powi(squarings as i32);
    for row in &mut g {
        for z in row.iter_mut() {
            *z *= scale;
        }
    }
    let mut result: Dense = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { C64::new(1.0, 0.0) } else { zero }).collect())
        .collect();
    let mut term = result.clone();
    for k in 1..30 {
        term = matmul(&term, &g);
        for row in &mut term {
            for z in row.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// `<psi| D(xi) |psi>` for a state vector in the number basis.
pub fn expectation(psi: &[C64], xi: [f64; 2], dim: usize) -> C64 {
    let d = displacement(xi, dim);
    let mut acc = C64::new(0.0, 0.0);
    for (i, a) in psi.iter().enumerate() {
        for (j, b) in psi.iter().enumerate() {
            acc += a.conj() * d[i][j] * b;
        }
    }
    acc
}

/// Coherent state `|beta>` truncated to `dim` levels.
pub fn coherent_vector(beta: C64, dim: usize) -> Vec<C64> {
    let mut v = Vec::with_capacity(dim);
    let mut c = C64::new((-beta.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        v.push(c);
        c = c * beta / ((n + 1) as f64).sqrt();
    }
    v
}

/// Normalized Hermite function `psi_n(s)` for the `[q, p] = i` oscillator.
pub fn hermite_function(n: usize, s: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-s * s / 2.0).exp();
    for k in 0..n {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * s * cur - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_on_known_matrix() {
        let ev = jacobi_eigenvalues(vec![2.0, 1.0, 1.0, 2.0], 2);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn displacement_is_unitary() {
        let d = displacement([0.7, -0.4], 30);
        let mut acc = C64::new(0.0, 0.0);
        for row in d.iter().take(30) {
            acc += row[0].conj() * row[0];
        }
        assert!((acc.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermite_functions_normalized() {
        for n in 0..4 {
            let h = 1e-3;
            let mass: f64 = (-10000..=10000)
                .map(|k| hermite_function(n, k as f64 * h).powi(2) * h)
                .sum();
            assert!((mass - 1.0).abs() < 1e-10, "n={n}");
        }
    }
}
