use ioncrystal::decoherence::oracle::{exact_fidelity_oracle, OracleSettings};
use ioncrystal::decoherence::{
    evaluate, structure_factor_f, structure_factor_g, term_e1, term_e2, term_e3, total_fidelity, Bath,
    CouplingScales, DiagramMode, Diagrams,
};
use ioncrystal::lattice::bose_einstein;
use ioncrystal::phonons::{Branch, CrystalModel};
use num_complex::Complex64;
use proptest::prelude::*;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn all_terms(d: &Diagrams) -> [Complex64; 4] {
    [d.e1, d.e2, d.e3, d.e4]
}

fn lattice_bath(l: usize, z_ratio: f64, x: f64) -> Bath {
    let spectrum = CrystalModel::new(l, z_ratio).unwrap().spectrum().unwrap();
    Bath::lattice(&spectrum, x)
}

#[test]
fn oracle_single_mode_linear_coupling() {
    let eps = 0.05;
    let s = CouplingScales::explicit(eps, 0.0, 1.0).unwrap();
    let bath = Bath::toy(1.0, &[1.3], &[0.0], &[1.0 / 1.3], &[1.0], &[0.0]).unwrap();
    let oracle = exact_fidelity_oracle(&bath, &s, &OracleSettings::new(vec![40], 1.0)).unwrap();
    let e2 = term_e2(&bath, &s);
    let diff = (oracle.fidelity.ln() - e2).norm();
    assert!(diff <= 10.0 * eps.powi(4), "residual {diff:e}");
}

#[test]
fn oracle_two_modes_quadratic_coupling() {
    // Quadratic couplings carry two powers of the small parameter, so the
    // first term left out is of order eps^6.
    let eps: f64 = 0.03;
    let s = CouplingScales::explicit(0.0, eps * eps, 1.0).unwrap();
    let bath = Bath::toy(1.0, &[1.0, 1.4], &[5.0, 5.0], &[1.0, 1.0 / 1.4], &[0.0, 0.0], &[0.8, -0.5, -0.5, 1.1])
        .unwrap();
    let mut settings = OracleSettings::new(vec![110, 110], 1.0);
    settings.window = 4;
    settings.dt = 0.1;
    settings.min_weight = 1e-9;
    let oracle = exact_fidelity_oracle(&bath, &s, &settings).unwrap();
    let sum = term_e1(&bath, &s) + term_e3(&bath, &s, DiagramMode::Exact);
    let diff = (oracle.fidelity.ln() - sum).norm();
    assert!(diff <= 10.0 * eps.powi(4), "residual {diff:e}");
}

#[test]
fn oracle_rejects_short_truncation() {
    let s = CouplingScales::explicit(0.05, 0.0, 1.0).unwrap();
    let bath = Bath::toy(1.0, &[1.0], &[5.0], &[1.0], &[1.0], &[0.0]).unwrap();
    assert!(exact_fidelity_oracle(&bath, &s, &OracleSettings::new(vec![40], 1.0)).is_err());
}

#[test]
fn total_fidelity_examples() {
    let z = Complex64::new(0.0, 0.0);
    let (f, e, ep) = total_fidelity([z; 4]);
    assert_eq!((f, e, ep), (Complex64::new(1.0, 0.0), 0.0, 0.0));
    let (_, e, ep) = total_fidelity([Complex64::new(0.0, 0.3), z, z, z]);
    assert!(e > 0.0 && ep.abs() < 1e-15);
    let (_, e, ep) = total_fidelity([Complex64::new(-0.01, 0.0), z, z, z]);
    let want = 0.5 * (1.0 - (-0.01f64).exp());
    assert!((e - want).abs() < 1e-15 && (ep - want).abs() < 1e-15);
}

#[test]
fn structure_factor_examples() {
    let pi = std::f64::consts::PI;
    assert_eq!(structure_factor_g(0.0, &[1.0, 0.0, 0.0], 1.0, &[1.0, 0.0, 0.0]), Complex64::new(0.0, 0.0));
    assert!((structure_factor_g(pi, &[1.0, 0.0, 0.0], pi, &[1.0, 0.0, 0.0]) - Complex64::new(-12.0, 0.0)).norm() < 1e-12);
    assert!((structure_factor_g(pi, &[0.0, 1.0, 0.0], pi, &[0.0, 1.0, 0.0]) - Complex64::new(8.0, 0.0)).norm() < 1e-12);
    let f = structure_factor_f(0.7, &[0.6, 0.8, 0.0]);
    let fm = structure_factor_f(-0.7, &[0.6, 0.8, 0.0]);
    assert!((f - fm.conj()).norm() < 1e-15);
}

#[test]
fn in_plane_relabeling_leaves_diagrams_unchanged() {
    let bath = lattice_bath(6, 50.0, 0.02);
    let s = CouplingScales::explicit(-0.01, -2e-5, 0.05).unwrap();
    let base = evaluate(&bath, &s, DiagramMode::Exact);
    // Swap the two in-plane modes at every wavevector.
    let order: Vec<usize> = (0..bath.len()).map(|i| i ^ 1).collect();
    let swapped = evaluate(&bath.reordered(&order).unwrap(), &s, DiagramMode::Exact);
    // Swap them at a single wavevector pair q, -q.
    let mut order2: Vec<usize> = (0..bath.len()).collect();
    let a = 14;
    let p = bath.modes[a].partner;
    order2.swap(a, a ^ 1);
    order2.swap(p, p ^ 1);
    let single = evaluate(&bath.reordered(&order2).unwrap(), &s, DiagramMode::HighTemperature);
    let base_ht = evaluate(&bath, &s, DiagramMode::HighTemperature);
    for (x, y) in all_terms(&base).iter().zip(all_terms(&swapped).iter()) {
        assert!(rel(*y, *x) < 1e-10);
    }
    for (x, y) in all_terms(&base_ht).iter().zip(all_terms(&single).iter()) {
        assert!(rel(*y, *x) < 1e-10);
    }
}

#[test]
fn high_temperature_terms_scale_with_occupation_squared() {
    let bath = lattice_bath(6, 50.0, 0.01);
    let s = CouplingScales::explicit(-0.01, -2e-5, 0.05).unwrap();
    let a = evaluate(&bath, &s, DiagramMode::HighTemperature);
    let scaled = bath.clone().with_occupations(|w| 3.0 * bose_einstein(0.01 * w));
    let b = evaluate(&scaled, &s, DiagramMode::HighTemperature);
    assert!(rel(b.e3, 9.0 * a.e3) < 1e-12);
    assert!(rel(b.e4, 9.0 * a.e4) < 1e-12);
    let cold = bath.with_occupations(|_| 0.0);
    let c = evaluate(&cold, &s, DiagramMode::HighTemperature);
    assert_eq!(c.e3, Complex64::new(0.0, 0.0));
    assert_eq!(c.e4, Complex64::new(0.0, 0.0));
    assert!(c.e2.re < 0.0);
}

#[test]
fn fourth_term_small_against_third_for_first_parameter_set() {
    let params = ioncrystal::lattice::PhysicalParams::beryllium(20e3, 1e6, 1e-3).unwrap();
    let spectrum = CrystalModel::from_params(12, &params).unwrap().spectrum().unwrap();
    let bath = Bath::lattice(&spectrum, params.inverse_thermal_ratio());
    let s = CouplingScales::from_sign_gate(3.6e-3, 0.05).unwrap();
    let d = evaluate(&bath, &s, DiagramMode::HighTemperature);
    assert!(d.e4.norm() < 1e-2 * d.e3.norm(), "E3 {} E4 {}", d.e3, d.e4);
}

#[test]
fn diagram_sums_independent_of_thread_count() {
    let bath = lattice_bath(12, 50.0, 0.01);
    let s = CouplingScales::explicit(-0.01, -2e-5, 0.05).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| evaluate(&bath, &s, DiagramMode::Exact))
    };
    let one = run(1);
    let many = run(8);
    assert_eq!(one, many);
}

#[test]
fn lattice_bath_has_only_in_plane_modes() {
    let spectrum = CrystalModel::new(5, 50.0).unwrap().spectrum().unwrap();
    let bath = Bath::lattice(&spectrum, 0.1);
    assert_eq!(bath.len(), 2 * 25);
    let axial_min = spectrum
        .modes
        .iter()
        .flat_map(|m| (0..3).filter(|&i| m.branches[i] == Branch::Axial).map(move |i| m.omegas[i]))
        .fold(f64::INFINITY, f64::min);
    assert!(bath.modes.iter().all(|m| m.omega < axial_min));
    for (a, m) in bath.modes.iter().enumerate() {
        assert_eq!(bath.modes[m.partner].partner, a);
        assert_eq!(bath.modes[m.partner].omega, m.omega);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sign_and_bound_invariants(
        l in 2usize..7,
        ratio in 8.0f64..60.0,
        x in 1e-3f64..1.0,
        f in -0.05f64..0.05,
        g in -1e-3f64..1e-3,
        gamma in 0.01f64..0.5,
        exact in any::<bool>(),
    ) {
        let bath = lattice_bath(l, ratio, x);
        let s = CouplingScales::explicit(f, g, gamma).unwrap();
        let mode = if exact { DiagramMode::Exact } else { DiagramMode::HighTemperature };
        let d = evaluate(&bath, &s, mode);
        prop_assert_eq!(d.e1.re, 0.0);
        prop_assert!(d.e2.re <= 0.0);
        let (fb, e, ep) = total_fidelity(all_terms(&d));
        prop_assert!(fb.norm() <= 1.0);
        prop_assert!(ep <= e + 1e-15);
    }
}
