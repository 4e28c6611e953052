use ioncrystal::spinchain::{
    carrier_correction_bound, chain_normal_modes, coulomb_matrix, dipolar_reference, effective_couplings,
    interior_pairs, simulation_error, stiff_limit_deviation, ChainSpec,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn spec(n: usize, beta_x: f64, detuning: f64) -> ChainSpec {
    ChainSpec {
        n_ions: n,
        beta_x,
        omega_x: 1.0,
        detuning,
        force: 1e-3,
    }
}

fn deviation(n: usize, beta_x: f64, detuning: f64) -> f64 {
    let s = spec(n, beta_x, detuning);
    let modes = chain_normal_modes(&s).unwrap();
    let j = effective_couplings(&s, &modes).unwrap();
    stiff_limit_deviation(&s, &j, 5).unwrap().vs_reference
}

#[test]
fn centre_of_mass_mode_is_exact() {
    let s = spec(20, 1e-3, 0.05);
    let m = chain_normal_modes(&s).unwrap();
    let top = m.v.len() - 1;
    assert_eq!(m.v[top], 0.0);
    assert_eq!(m.omegas[top], s.omega_x);
    let u = 1.0 / (20f64).sqrt();
    assert!((0..20).all(|j| (m.m[(j, top)] - u).abs() < 1e-10));
}

#[test]
fn tiny_chains() {
    let one = spec(1, 1e-3, 0.05);
    let m = chain_normal_modes(&one).unwrap();
    assert_eq!(m.omegas, vec![1.0]);
    let j = effective_couplings(&one, &m).unwrap();
    assert_eq!(j.j.shape(), (1, 1));

    // Two ions: the stretch mode has V = -2.
    let two = spec(2, 1e-2, 0.05);
    let m = chain_normal_modes(&two).unwrap();
    assert!((m.v[0] + 2.0).abs() < 1e-12);
    assert!((m.omegas[0] - (1.0 - 2e-2f64).sqrt()).abs() < 1e-12);
}

#[test]
fn reference_follows_cube_law() {
    let r = dipolar_reference(&spec(10, 1e-3, 0.05)).unwrap();
    assert!((r[(3, 4)] / r[(3, 5)] - 8.0).abs() < 1e-12);
    assert!(r[(3, 4)] < 0.0);
    assert_eq!(r[(2, 2)], 0.0);
}

#[test]
fn deviation_shrinks_toward_stiff_limit() {
    let d: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&b| deviation(20, b, 0.05)).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

#[test]
fn nearest_neighbour_scale() {
    let s = spec(20, 1e-4, 0.05);
    let modes = chain_normal_modes(&s).unwrap();
    let j = effective_couplings(&s, &modes).unwrap();
    let eta = s.force / s.detuning;
    let scale = s.beta_x * eta * eta * s.omega_x;
    for (a, b) in interior_pairs(20, 1) {
        let r = j.j[(a, b)].abs() / scale;
        assert!((r - 1.0).abs() < 0.2, "pair ({a},{b}) ratio {r}");
    }
}

#[test]
fn simulation_error_scaling() {
    let s1 = spec(10, 1e-3, 0.05);
    let s2 = spec(10, 1e-3, 0.10);
    let e1 = simulation_error(&s1, &chain_normal_modes(&s1).unwrap()).unwrap();
    let e2 = simulation_error(&s2, &chain_normal_modes(&s2).unwrap()).unwrap();
    assert!((e1.printed_estimate / e2.printed_estimate - 2.0).abs() < 1e-12);
    let fall = e1.max_mode_eta_sq / e2.max_mode_eta_sq;
    assert!((fall / 4.0 - 1.0).abs() < 0.1, "{fall}");
}

#[test]
fn carrier_examples() {
    assert!(!carrier_correction_bound(0.01, 1.0).unwrap().violated);
    assert!(carrier_correction_bound(0.5, 1.0).unwrap().violated);
    assert_eq!(carrier_correction_bound(0.0, 1.0).unwrap().ratio, 0.0);
    assert!(carrier_correction_bound(0.1, 0.0).is_err());
}

#[test]
fn blue_detuning_rejected() {
    let mut s = spec(10, 1e-2, 0.05);
    s.detuning = 0.01;
    let modes = chain_normal_modes(&s).unwrap();
    assert!(effective_couplings(&s, &modes).is_err());
    assert!(chain_normal_modes(&spec(10, 2.0, 0.05)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mode_invariants(n in 2usize..30, beta in 1e-5f64..2e-2, detuning in 0.05f64..0.3) {
        let s = spec(n, beta, detuning);
        let modes = chain_normal_modes(&s).unwrap();
        let m = &modes.m;
        let eye = DMatrix::<f64>::identity(n, n);
        prop_assert!((m.transpose() * m - eye).amax() < 1e-10);
        let k = coulomb_matrix(n);
        for c in 0..n {
            let col = m.column(c);
            prop_assert!((&k * col - col * modes.v[c]).amax() < 1e-9);
        }
        let vmax = modes.v.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let lo = s.omega_x * (1.0 - beta * vmax).sqrt();
        for &w in &modes.omegas {
            prop_assert!(w >= lo - 1e-12 && w <= s.omega_x);
        }

        let j = effective_couplings(&s, &modes).unwrap().j;
        prop_assert!((&j - j.transpose()).amax() <= 1e-12 * j.amax());
        for a in 0..n {
            for b in 0..n {
                let r = j[(n - 1 - a, n - 1 - b)];
                prop_assert!((j[(a, b)] - r).abs() <= 1e-10 * j.amax());
            }
        }
    }
}
