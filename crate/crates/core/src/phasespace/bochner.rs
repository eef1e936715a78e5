use num_complex::Complex64 as C64;

use super::{sym2, CharFn, TestVectorSet};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// `M^(lambda)(chi, T)_{kl} = chi(xi_k - xi_l) exp(i lambda xi_k . sigma xi_l / 2)`.
#[derive(Clone, Debug)]
pub struct BochnerMatrix {
    pub entries: CMat,
    pub lambda: f64,
    pub source: TestVectorSet,
}

impl BochnerMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Assembles the lambda-positivity matrix of `chi` on the test set.
///
/// Fails with [`Error::OffLattice`] naming the first pair whose difference
/// `chi` cannot resolve.
pub fn bochner_matrix(
    chi: &impl CharFn,
    test_set: &TestVectorSet,
    lambda: f64,
) -> Result<BochnerMatrix> {
    let pts = test_set.pairs()?;
    let m = pts.len();
    let mut entries = linalg::zeros(m);
    for k in 0..m {
        for l in 0..m {
            let d = [pts[k][0] - pts[l][0], pts[k][1] - pts[l][1]];
            let value = chi.chi(d).ok_or(Error::OffLattice { k, l })?;
            let phase = C64::from_polar(1.0, 0.5 * lambda * sym2(pts[k], pts[l]));
            entries[(k, l)] = value * phase;
        }
    }
    Ok(BochnerMatrix {
        entries,
        lambda,
        source: test_set.clone(),
    })
}

/// Smallest eigenvalue of a Bochner matrix and a unit eigenvector.
///
/// The eigenvector phase is fixed so that its largest-modulus entry is real
/// and positive; degenerate minima return whatever the eigensolver produced.
pub fn min_eig_pair(m: &BochnerMatrix) -> Result<(f64, Vec<C64>)> {
    let a = &m.entries;
    let scale = linalg::max_abs(a).max(1.0);
    let defect = linalg::hermitian_defect(a);
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian(defect));
    }
    let (lmin, v) = linalg::min_eigenpair(&linalg::hermitian_part(a))?;
    let mv = linalg::mat_vec(a, &v);
    let residual = mv
        .iter()
        .zip(&v)
        .map(|(x, y)| (x - y * lmin).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let norm = linalg::frobenius(a);
    if residual > 1e-8 * norm.max(1e-300) {
        return Err(Error::Numerical(format!(
            "eigenpair residual {residual:e} exceeds tolerance"
        )));
    }
    Ok((lmin, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::phasespace::PhasePoint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vacuum(xi: [f64; 2]) -> C64 {
        C64::new((-(xi[0] * xi[0] + xi[1] * xi[1]) / 4.0).exp(), 0.0)
    }

    fn fock1(xi: [f64; 2]) -> C64 {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        C64::new((1.0 - r2 / 2.0) * (-r2 / 4.0).exp(), 0.0)
    }

    fn random_set(m: usize, seed: u64) -> TestVectorSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..m)
            .map(|_| PhasePoint::single(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
            .collect();
        TestVectorSet::new(v, seed).unwrap()
    }

    fn fock_set() -> TestVectorSet {
        let pts = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        TestVectorSet::new(pts.iter().map(|&(q, p)| PhasePoint::single(q, p)).collect(), 0)
            .unwrap()
    }

    #[test]
    fn single_origin_vector() {
        let t = TestVectorSet::new(vec![PhasePoint::single(0.0, 0.0)], 0).unwrap();
        let m = bochner_matrix(&vacuum, &t, 1.0).unwrap();
        assert_eq!(m.dim(), 1);
        assert_eq!(m.entries[(0, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn vacuum_is_one_positive() {
        let t = random_set(20, 7);
        let m = bochner_matrix(&vacuum, &t, 1.0).unwrap();
        let lmin = oracle::hermitian_eigenvalues(&m.entries)[0];
        assert!(lmin >= -1e-10, "min eigenvalue {lmin}");
        assert!(linalg::hermitian_defect(&m.entries) <= 1e-12);
    }

    #[test]
    fn fock1_zero_positivity_depends_on_scale() {
        // Unit-spaced pattern: the Fock-1 Gaussian envelope still dominates.
        let m = bochner_matrix(&fock1, &fock_set(), 0.0).unwrap();
        let lmin = oracle::hermitian_eigenvalues(&m.entries)[0];
        assert!((lmin - 0.145_961_245_373_303).abs() < 1e-10, "min eigenvalue {lmin}");

        // The same pattern at twice the spacing reaches the negative core.
        let pts = [(0.0, 0.0), (2.0, 0.0), (4.0, 0.0), (0.0, 2.0), (2.0, 2.0)];
        let t = TestVectorSet::new(pts.iter().map(|&(q, p)| PhasePoint::single(q, p)).collect(), 0)
            .unwrap();
        let m = bochner_matrix(&fock1, &t, 0.0).unwrap();
        let lmin = oracle::hermitian_eigenvalues(&m.entries)[0];
        assert!(lmin < -0.3, "min eigenvalue {lmin}");
        let m1 = bochner_matrix(&fock1, &t, 1.0).unwrap();
        assert!(oracle::hermitian_eigenvalues(&m1.entries)[0] >= -1e-10);
    }

    #[test]
    fn min_eig_pair_matches_oracle() {
        let m = bochner_matrix(&fock1, &fock_set(), 0.0).unwrap();
        let (l, v) = min_eig_pair(&m).unwrap();
        let oracle_min = oracle::hermitian_eigenvalues(&m.entries)[0];
        assert!((l - oracle_min).abs() < 1e-8, "{l} vs {oracle_min}");
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_eig_pair_trivial_matrices() {
        let t3 = random_set(3, 1);
        let mut m = BochnerMatrix {
            entries: linalg::identity(3),
            lambda: 0.0,
            source: t3,
        };
        let (l, v) = min_eig_pair(&m).unwrap();
        assert!((l - 1.0).abs() < 1e-14);
        assert!((v.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-14);

        m.entries = linalg::zeros(3);
        m.entries[(0, 0)] = C64::new(-2.0, 0.0);
        m.entries[(2, 2)] = C64::new(5.0, 0.0);
        let (l, v) = min_eig_pair(&m).unwrap();
        assert!((l + 2.0).abs() < 1e-14);
        assert!((v[0].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = BochnerMatrix {
            entries: linalg::identity(2),
            lambda: 0.0,
            source: random_set(2, 0),
        };
        m.entries[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(min_eig_pair(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn off_lattice_difference_reported() {
        let g = crate::phasespace::CFGrid::from_fn(crate::lattice::Lattice::new(5, 2.0).unwrap(), vacuum);
        let t = TestVectorSet::new(
            vec![PhasePoint::single(0.0, 0.0), PhasePoint::single(0.5, 0.0)],
            0,
        )
        .unwrap();
        assert!(matches!(
            bochner_matrix(&g, &t, 1.0),
            Err(Error::OffLattice { k: 0, l: 1 })
        ));
    }
}
