use ioncrystal::lattice::{
    cartesian, derived_betas, generate_sites, lattice_sums, min_image, physical_spacing, PhysicalParams, SQRT3,
};
use proptest::prelude::*;

/// Shortest image by brute force over a wider set of offsets.
fn brute_min_len_sq(d1: i64, d2: i64, l: i64) -> f64 {
    let mut best = f64::INFINITY;
    for o1 in -2..=2 {
        for o2 in -2..=2 {
            let v = cartesian((d1 + o1 * l) as f64, (d2 + o2 * l) as f64);
            best = best.min(v[0] * v[0] + v[1] * v[1]);
        }
    }
    best
}

#[test]
fn direct_and_reciprocal_bases_are_dual() {
    let a = [[1.0, 0.0], [0.5, SQRT3 / 2.0]];
    let b = [[1.0, -1.0 / SQRT3], [0.0, 2.0 / SQRT3]];
    for i in 0..2 {
        for j in 0..2 {
            let dot = a[i][0] * b[j][0] + a[i][1] * b[j][1];
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((dot - want).abs() < 1e-12);
        }
    }
}

#[test]
fn site_generation() {
    let sites = generate_sites(3).unwrap();
    assert_eq!(sites.len(), 9);
    assert!(sites.iter().all(|&(a, b)| (1..=3).contains(&a) && (1..=3).contains(&b)));
    assert!(generate_sites(0).is_err());
}

#[test]
fn small_lattice_sums_by_hand() {
    // L = 3: six neighbours at distance 1 and two at sqrt(3).
    let s = lattice_sums(3).unwrap();
    assert!((s.c1 - 12.0).abs() < 1e-12);
    assert!((s.c2 - (6.0 + 2.0 / SQRT3)).abs() < 1e-12);
    assert!((s.beta_xy - 4.0 * 12.0 / (9.0 * s.c2)).abs() < 1e-12);
}

#[test]
fn stiffness_ratio_identity() {
    let sums = lattice_sums(20).unwrap();
    for (fxy, fz) in [(20e3, 1e6), (200e3, 10e6), (35e3, 0.4e6)] {
        let p = PhysicalParams::beryllium(fxy, fz, 1e-3).unwrap();
        let d = derived_betas(&p, &sums);
        let r = fxy / fz;
        assert!((d.beta_z / d.beta_xy - 0.5 * r * r).abs() < 1e-12 * d.beta_z / d.beta_xy);
    }
}

#[test]
fn spacing_follows_two_thirds_power() {
    let sums = lattice_sums(40).unwrap();
    let p1 = PhysicalParams::beryllium(20e3, 1e6, 1e-3).unwrap();
    let p2 = PhysicalParams::beryllium(200e3, 10e6, 1e-3).unwrap();
    let ratio = physical_spacing(&p1, &sums) / physical_spacing(&p2, &sums);
    assert!((ratio / 10f64.powf(2.0 / 3.0) - 1.0).abs() < 1e-10);
}

proptest! {
    #[test]
    fn min_image_is_shortest(l in 2usize..12, r1 in 1usize..12, r2 in 1usize..12, s1 in 1usize..12, s2 in 1usize..12) {
        let (r, s) = ((1 + r1 % l, 1 + r2 % l), (1 + s1 % l, 1 + s2 % l));
        let d = min_image(r, s, l);
        let want = brute_min_len_sq(r.0 as i64 - s.0 as i64, r.1 as i64 - s.1 as i64, l as i64);
        prop_assert!((d.norm_sq as f64 - want).abs() < 1e-9);
        let len_sq = d.vec[0] * d.vec[0] + d.vec[1] * d.vec[1];
        prop_assert!((len_sq - want).abs() < 1e-9);
    }

    #[test]
    fn min_image_length_symmetric_under_swap(l in 2usize..15, r1 in 1usize..15, r2 in 1usize..15, s1 in 1usize..15, s2 in 1usize..15) {
        let (r, s) = ((1 + r1 % l, 1 + r2 % l), (1 + s1 % l, 1 + s2 % l));
        prop_assert_eq!(min_image(r, s, l).norm_sq, min_image(s, r, l).norm_sq);
    }

    #[test]
    fn min_image_length_translation_invariant(
        l in 2usize..15, r1 in 1usize..15, r2 in 1usize..15, s1 in 1usize..15, s2 in 1usize..15, t1 in 0usize..15, t2 in 0usize..15
    ) {
        let wrap = |x: usize| 1 + (x - 1) % l;
        let (r, s) = ((1 + r1 % l, 1 + r2 % l), (1 + s1 % l, 1 + s2 % l));
        let rt = (wrap(r.0 + t1), wrap(r.1 + t2));
        let st = (wrap(s.0 + t1), wrap(s.1 + t2));
        prop_assert_eq!(min_image(r, s, l).norm_sq, min_image(rt, st, l).norm_sq);
    }

    #[test]
    fn derived_scales_positive(l in 2usize..30, fxy in 5e3f64..5e5, ratio in 5.0f64..80.0) {
        let sums = lattice_sums(l).unwrap();
        prop_assert!(sums.c1 > 0.0 && sums.c2 > 0.0 && sums.beta_xy > 0.0);
        let p = PhysicalParams::beryllium(fxy, ratio * fxy, 1e-3).unwrap();
        let d = derived_betas(&p, &sums);
        prop_assert!(d.d0 > 0.0 && d.beta_z > 0.0 && d.x_ratio > 0.0 && d.n_z > 0.0);
    }
}
