use super::*;
use crate::ingest::{lattice_constraints, ConstraintSource, Provenance};
use crate::phasespace::{bochner_matrix, min_eig_pair, PhasePoint};
use crate::sources::StateModel;

fn exact_everywhere(state: &StateModel, lattice: &Lattice, delta: f64) -> Vec<CFEstimate> {
    lattice
        .indices()
        .map(|(i, j)| {
            let xi = lattice.coords(i, j);
            CFEstimate {
                point: PhasePoint::single(xi[0], xi[1]),
                value: state.chi(xi),
                radius: delta,
                provenance: Provenance::Exact,
                confidence_sigmas: None,
            }
        })
        .collect()
}

fn estimate(xi: [f64; 2], value: C64, radius: f64) -> CFEstimate {
    CFEstimate {
        point: PhasePoint::single(xi[0], xi[1]),
        value,
        radius,
        provenance: Provenance::Exact,
        confidence_sigmas: None,
    }
}

fn run(constraints: &[CFEstimate], lattice: &Lattice, t: &TestVectorSet) -> (RawSolution, CertificationReport) {
    let p = assemble_sdp(constraints, lattice, t).unwrap();
    let raw = solve(&p, &SolverConfig::default()).unwrap();
    let rep = certify_bound(&p, &raw).unwrap();
    (raw, rep)
}

#[test]
fn pinned_all_ones_matrix_has_zero_bound() {
    let l = make_lattice(5, 2.0).unwrap();
    let t = TestVectorSet::on_lattice(&l, vec![(0, 0), (1, 0)], 0).unwrap();
    let c = vec![estimate(l.coords(1, 0), C64::new(1.0, 0.0), 0.0)];
    let p = assemble_sdp(&c, &l, &t).unwrap();
    assert_eq!(p.variables.len(), 1);
    let (raw, rep) = run(&c, &l, &t);
    assert!(raw.x_star.abs() < 1e-7, "{}", raw.x_star);
    assert_eq!(rep.status, Status::NoCertification);
    assert!(rep.dual_objective <= raw.x_star + 1e-12);
}

#[test]
fn two_vector_tube_optimum() {
    let l = make_lattice(5, 2.0).unwrap();
    let t = TestVectorSet::on_lattice(&l, vec![(0, 0), (1, 0)], 0).unwrap();
    let delta = 1e-3;
    let c = vec![estimate(l.coords(1, 0), C64::new(1.0, 0.0), delta)];
    let (raw, _) = run(&c, &l, &t);
    // t = |chi| - 1 is smallest at chi = 1 - delta.
    assert!((raw.x_star + delta / 2.0).abs() < 1e-6, "{}", raw.x_star);
}

#[test]
fn unconstrained_optimum_is_minus_one_over_m() {
    let l = make_lattice(9, 4.0).unwrap();
    let t = draw_test_vectors(&l, 10, 5).unwrap();
    let (raw, rep) = run(&[], &l, &t);
    assert!(raw.x_star <= 1e-7);
    assert!((raw.x_star + 0.1).abs() < 1e-6, "{}", raw.x_star);
    assert_eq!(rep.status, Status::NoCertification);
}

#[test]
fn pinned_fock_matches_direct_eigenvalue() {
    let l = make_lattice(9, 4.0).unwrap();
    let t = draw_test_vectors(&l, 16, 3).unwrap();
    let s = StateModel::fock(1).unwrap();
    let c = exact_everywhere(&s, &l, 0.0);
    let p = assemble_sdp(&c, &l, &t).unwrap();
    assert_eq!(p.variables.len(), 1);
    let raw = solve(&p, &SolverConfig::default()).unwrap();
    let m0 = bochner_matrix(&s, &t, 0.0).unwrap();
    let (lmin, _) = min_eig_pair(&m0).unwrap();
    let expect = -lmin / 16.0;
    assert!((raw.x_star - expect).abs() < 1e-7, "{} vs {expect}", raw.x_star);
    let rep = certify_bound(&p, &raw).unwrap();
    assert!(rep.dual_objective <= raw.x_star);
    assert!(raw.x_star - rep.dual_objective < 1e-6);
    if expect > 1e-4 {
        assert_eq!(rep.status, Status::Certified);
    }
}

#[test]
fn fock_with_tubes_certifies_and_obeys_duality() {
    let l = make_lattice(9, 4.0).unwrap();
    let t = draw_test_vectors(&l, 20, 11).unwrap();
    let s = StateModel::fock(1).unwrap();
    let c = exact_everywhere(&s, &l, 1e-3);
    let (raw, rep) = run(&c, &l, &t);
    assert!(raw.sdp.residuals.certificate < 1e-6);
    assert!(rep.dual_objective <= raw.x_star);
    assert!(raw.x_star - rep.dual_objective < 1e-5);
    assert!(rep.residuals.theorem < 1e-5, "{}", rep.residuals.theorem);
    let w = witness_check(&rep.witness, &WitnessSubject::Grid(raw.chi_opt.clone()), Some(raw.x_star)).unwrap();
    assert_eq!(w.attains_bound, Some(true));
    assert!(w.bounded);
}

#[test]
fn wider_tubes_never_raise_the_bound() {
    let l = make_lattice(9, 4.0).unwrap();
    let t = draw_test_vectors(&l, 12, 2).unwrap();
    let s = StateModel::fock(1).unwrap();
    let mut last = f64::INFINITY;
    for delta in [0.0, 1e-3, 1e-2, 5e-2, 0.2] {
        let (raw, rep) = run(&exact_everywhere(&s, &l, delta), &l, &t);
        assert!(raw.x_star <= last + 1e-7, "delta {delta}: {} > {last}", raw.x_star);
        assert!(rep.x_certified <= raw.x_star);
        last = raw.x_star;
    }
}

#[test]
fn vacuum_slices_are_not_certified() {
    let l = make_lattice(9, 4.0).unwrap();
    let t = draw_test_vectors(&l, 10, 9).unwrap();
    let set = lattice_constraints(
        &ConstraintSource::ExactSlices {
            state: StateModel::vacuum(),
            thetas: vec![0.0, std::f64::consts::FRAC_PI_2],
            delta: 1e-3,
        },
        &l,
    )
    .unwrap();
    let p = assemble_from_set(&set, &t).unwrap();
    let raw = solve(&p, &SolverConfig::default()).unwrap();
    let rep = certify_bound(&p, &raw).unwrap();
    assert!(raw.x_star <= 1e-7);
    assert_eq!(rep.status, Status::NoCertification);
    assert_eq!(rep.confidence, 1.0);
}

#[test]
fn chi_opt_is_hermitian_and_normalized() {
    let l = make_lattice(9, 4.0).unwrap();
    let t = draw_test_vectors(&l, 10, 1).unwrap();
    let c = exact_everywhere(&StateModel::cat(1.0).unwrap(), &l, 0.05);
    let (raw, _) = run(&c, &l, &t);
    assert!(raw.chi_opt.hermitian_defect() < 1e-12);
    assert_eq!(raw.chi_opt.at(0, 0), Some(C64::new(1.0, 0.0)));
    for (v, x) in raw.chi_opt.values().iter().zip(&c) {
        assert!((v.re - x.value.re).abs() <= 0.05 + 1e-7);
        assert!((v.im - x.value.im).abs() <= 0.05 + 1e-7);
    }
}

#[test]
fn disjoint_tubes_are_infeasible() {
    let l = make_lattice(5, 2.0).unwrap();
    let t = TestVectorSet::on_lattice(&l, vec![(0, 0), (1, 0)], 0).unwrap();
    let xi = l.coords(1, 0);
    let c = vec![
        estimate(xi, C64::new(0.5, 0.0), 0.01),
        estimate([-xi[0], -xi[1]], C64::new(0.8, 0.0), 0.01),
    ];
    assert!(matches!(assemble_sdp(&c, &l, &t), Err(Error::Infeasible(_))));
    let origin = vec![estimate([0.0, 0.0], C64::new(0.5, 0.0), 0.1)];
    assert!(matches!(assemble_sdp(&origin, &l, &t), Err(Error::Infeasible(_))));
}

#[test]
fn conjugate_tubes_intersect() {
    let l = make_lattice(5, 2.0).unwrap();
    let t = TestVectorSet::on_lattice(&l, vec![(0, 0), (1, 0)], 0).unwrap();
    let xi = l.coords(1, 0);
    let c = vec![
        estimate(xi, C64::new(0.5, 0.2), 0.01),
        estimate([-xi[0], -xi[1]], C64::new(0.5, -0.2), 0.01),
    ];
    let p = assemble_sdp(&c, &l, &t).unwrap();
    let b = p.boxes[&(1, 0)];
    assert!((b[1].0 - 0.19).abs() < 1e-12 && (b[1].1 - 0.21).abs() < 1e-12);
}

#[test]
fn off_lattice_constraint_is_rejected() {
    let l = make_lattice(5, 2.0).unwrap();
    let t = TestVectorSet::on_lattice(&l, vec![(0, 0), (1, 0)], 0).unwrap();
    let c = vec![estimate([0.5, 0.0], C64::new(1.0, 0.0), 0.1)];
    assert!(matches!(assemble_sdp(&c, &l, &t), Err(Error::ConstraintOffLattice(..))));
}

#[test]
fn test_vector_draws() {
    let l = make_lattice(9, 4.0).unwrap();
    let a = draw_test_vectors(&l, 10, 4).unwrap();
    let b = draw_test_vectors(&l, 10, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, draw_test_vectors(&l, 10, 5).unwrap());
    let pool = l.central_indices().len();
    assert!(draw_test_vectors(&l, pool, 0).is_ok());
    assert!(draw_test_vectors(&l, pool + 1, 0).is_err());
    assert!(draw_test_vectors(&l, 1, 0).is_err());
}

#[test]
fn unit_witness_gives_one_over_m() {
    let l = make_lattice(9, 4.0).unwrap();
    let t = draw_test_vectors(&l, 7, 0).unwrap();
    let mut v = vec![C64::new(0.0, 0.0); 7];
    v[0] = C64::new(1.0, 0.0);
    let w = WitnessSpec::new(t.vectors().to_vec(), v).unwrap();
    let r = witness_check(&w, &WitnessSubject::State(StateModel::fock(2).unwrap()), None).unwrap();
    assert!((r.value - 1.0 / 7.0).abs() < 1e-14);
    assert_eq!(r.classical_nonnegative, None);
    let json = serde_json::to_string(&w).unwrap();
    assert_eq!(serde_json::from_str::<WitnessSpec>(&json).unwrap(), w);
}

#[test]
fn report_round_trips_through_json() {
    let l = make_lattice(7, 3.0).unwrap();
    let t = draw_test_vectors(&l, 6, 1).unwrap();
    let (_, rep) = run(&exact_everywhere(&StateModel::fock(1).unwrap(), &l, 1e-2), &l, &t);
    let json = serde_json::to_string(&rep).unwrap();
    assert!(json.contains("\"status\""));
    let back: CertificationReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rep);
}
