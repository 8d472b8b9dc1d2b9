use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mcnls::diagnostics::centers;
use mcnls::error::Error;
use mcnls::grid::{l2_norm, make_grid, mass, Field, Grid};
use mcnls::groundstate::{petviashvili_solve, GroundState};
use mcnls::profiles::{
    decoupling_check, extract_profiles_radial_with, extract_profiles_with, orthogonality_report, radial_asymmetry,
    radial_projection, reference_times, scattering_gap, separation_report, ProfileOptions,
};
use mcnls::symmetry::{apply, apply_enlarged, separation, EnlargedElement, GroupElement};

fn setup() -> (Grid, GroundState, ProfileOptions) {
    let g = make_grid(1, 512, 16.0).unwrap();
    let q = petviashvili_solve(g, 1e-11, 2000).unwrap();
    let opts = ProfileOptions::with_ground_state(g).unwrap();
    (g, q, opts)
}

fn enlarged(theta: f64, xi: f64, x: f64, lambda: f64, t0: f64) -> EnlargedElement {
    EnlargedElement { base: GroupElement::new(theta, vec![xi], vec![x], lambda).unwrap(), t0 }
}

#[test]
fn single_bubble_mass_gap_and_mismatch() {
    let (_, q, opts) = setup();
    let u = apply_enlarged(&enlarged(0.7, 1.5, -1.2, 1.3, 0.37), &q.field).unwrap();
    let dec = extract_profiles_with(&u, &opts).unwrap();
    assert!(dec.profiles[0].captured_mass >= 0.99 * q.mass);
    let times = opts.window_times();
    let r = decoupling_check(&dec, &u, &times).unwrap();
    assert!(r.mass_gap < 1e-3 && !r.mismatched);

    let other = apply(&GroupElement::dilation(0.5, 1), &q.field).unwrap().scale(2.0.into());
    let r = decoupling_check(&dec, &other, &times).unwrap();
    assert!(r.mismatched && r.mass_gap > 0.5);
}

#[test]
fn extraction_is_bessel_and_ordered() {
    let (g, q, opts) = setup();
    let a = apply_enlarged(&enlarged(0.0, 2.0, -6.0, 1.0, 0.0), &q.field).unwrap();
    let b = apply(&GroupElement::new(1.0, vec![-1.0], vec![5.0], 0.7).unwrap(), &Field::from_real_fn(g, |x| (-x[0] * x[0]).exp())).unwrap();
    let u = a.add(&b).unwrap();
    let dec = extract_profiles_with(&u, &opts).unwrap();
    let captured = dec.captured_masses();
    assert!(captured.len() >= 2);
    assert!(captured.windows(2).all(|w| w[1] <= w[0]));
    let total: f64 = captured.iter().sum::<f64>() + mass(dec.remainder());
    assert!(total <= mass(&u) * (1.0 + 1e-6));
    assert!(dec.remainder_mass < mass(&u) - captured[0]);
}

#[test]
fn captured_masses_are_gauge_invariant() {
    let (_, q, opts) = setup();
    let u = apply_enlarged(&enlarged(0.2, 1.0, -1.0, 1.1, 0.2), &q.field).unwrap();
    let base = extract_profiles_with(&u, &opts).unwrap().captured_masses();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let h = GroupElement::new(
            rng.gen_range(0.0..6.28),
            vec![rng.gen_range(-1.0..1.0)],
            vec![rng.gen_range(-2.0..2.0)],
            2f64.powf(rng.gen_range(-0.3..0.3)),
        )
        .unwrap();
        let moved = extract_profiles_with(&apply(&h, &u).unwrap(), &opts).unwrap().captured_masses();
        assert!((moved[0] / base[0] - 1.0).abs() < 0.02, "{base:?} {moved:?}");
    }
}

#[test]
fn scattering_gap_shrinks_with_separation() {
    let g = make_grid(1, 16384, 1024.0).unwrap();
    let f = Field::from_real_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
    let times = reference_times(4.0, 401);
    let gap = |x0: f64| {
        let a = apply(&GroupElement::translation(vec![-x0 / 2.0]), &f).unwrap();
        let b = apply(&GroupElement::translation(vec![x0 / 2.0]), &f).unwrap();
        scattering_gap(&[a, b], &times).unwrap()
    };
    let (near, far) = (gap(8.0), gap(998.0));
    assert!(far < near && far < 1e-12, "{near:e} {far:e}");
}

#[test]
fn two_planted_bubbles_report_their_separation() {
    let g = make_grid(1, 2048, 16.0).unwrap();
    let q = petviashvili_solve(g, 1e-11, 2000).unwrap();
    let opts = ProfileOptions::with_ground_state(g).unwrap();
    let ga = enlarged(0.0, 45.0, -5.0, 1.0, 0.0);
    let gb = enlarged(1.0, -45.0, 5.0, 1.0, 0.0);
    let u = apply_enlarged(&ga, &q.field).unwrap().add(&apply_enlarged(&gb, &q.field).unwrap()).unwrap();
    let dec = extract_profiles_with(&u, &opts).unwrap();
    assert!(dec.profiles.len() >= 2);
    let rep = orthogonality_report(&dec);
    assert!((rep.pairwise[0][1] - separation(&dec.profiles[0].fit, &dec.profiles[1].fit)).abs() < 1e-10);
    assert!(rep.min_offdiag.unwrap() > 100.0 && !rep.suspect);
    let planted = separation_report(&[ga.clone(), gb.clone()]);
    assert!((planted.pairwise[0][1] - (2.0 + 90.0 + 10.0)).abs() < 1e-10);
}

#[test]
fn separation_matrix_shape() {
    let fits = [enlarged(0.0, 0.0, 0.0, 1.0, 0.0), enlarged(0.0, 1.0, 2.0, 2.0, 0.5), enlarged(0.3, -1.0, 0.0, 0.5, -1.0)];
    let r = separation_report(&fits);
    for a in 0..3 {
        assert_eq!(r.pairwise[a][a], 2.0);
        for b in 0..3 {
            assert_eq!(r.pairwise[a][b], r.pairwise[b][a]);
        }
    }
    let doubled = separation_report(&[fits[1].clone(), fits[1].clone()]);
    assert_eq!(doubled.min_offdiag, Some(2.0));
    assert!(doubled.suspect);
    assert!(separation_report(&fits[..1]).min_offdiag.is_none());
}

fn radial_setup() -> (Grid, ProfileOptions) {
    let g = make_grid(2, 128, 16.0).unwrap();
    let mut opts = ProfileOptions::new(g);
    opts.max_profiles = 2;
    (g, opts)
}

#[test]
fn planted_radial_bubble() {
    let (g, opts) = radial_setup();
    let gauss = Field::from_real_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
    let elem = EnlargedElement { base: GroupElement::new(0.4, vec![0.0; 2], vec![0.0; 2], 1.4).unwrap(), t0: 0.3 };
    let u = apply_enlarged(&elem, &gauss).unwrap();
    let dec = extract_profiles_radial_with(&u, &opts).unwrap();
    assert!(dec.profiles[0].captured_mass >= 0.99 * mass(&gauss));
    let fit = &dec.profiles[0].fit;
    assert!(fit.base.x0.iter().chain(&fit.base.xi0).all(|v| *v == 0.0));
    assert!(radial_asymmetry(dec.remainder()) * l2_norm(dec.remainder()) < 1e-6 * l2_norm(&u));
    let (x, xi) = centers(&u).unwrap();
    if mass(dec.remainder()) > 1e-12 {
        let (rx, rxi) = centers(dec.remainder()).unwrap();
        for a in 0..2 {
            assert!((rx[a] - x[a]).abs() <= g.spacing() && (rxi[a] - xi[a]).abs() <= g.dxi());
        }
    }
}

#[test]
fn radial_extraction_rejects_and_projects() {
    let (g, opts) = radial_setup();
    let q = petviashvili_solve(g, 1e-9, 2000).unwrap();
    let moved = apply(&GroupElement::translation(vec![1.5, 0.0]), &q.field).unwrap();
    match extract_profiles_radial_with(&moved, &opts) {
        Err(Error::NotRadial(a)) => assert!(a > 1e-6),
        other => panic!("expected rejection, got {other:?}"),
    }
    let projected = radial_projection(&moved);
    let dec = extract_profiles_radial_with(&projected, &opts).unwrap();
    let m = mass(&projected);
    assert!((dec.profiles[0].captured_mass / m - 1.0).abs() < 0.05);
}
