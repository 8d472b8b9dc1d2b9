use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mcnls::grid::{inner, l2_distance, make_grid, mass, Field, Grid};
use mcnls::profiles::reference_times;
use mcnls::symmetry::{
    apply, apply_enlarged, compose, enlarged_free_trajectory, inverse, mixed_norm, EnlargedElement, GroupElement,
};
use mcnls::verify::hermite_profile;

fn random_element(rng: &mut ChaCha8Rng, spread: f64, log2_lambda: f64) -> GroupElement {
    GroupElement::new(
        rng.gen_range(0.0..6.28),
        vec![rng.gen_range(-spread..spread)],
        vec![rng.gen_range(-spread..spread)],
        2f64.powf(rng.gen_range(-log2_lambda..log2_lambda)),
    )
    .unwrap()
}

#[test]
fn one_parameter_factors_generate_the_element() {
    let g = GroupElement::new(1.1, vec![0.4, -2.0], vec![3.0, 0.5], 1.7).unwrap();
    let product = compose(
        &GroupElement::phase(1.1, 2),
        &compose(
            &GroupElement::modulation(vec![0.4, -2.0]),
            &compose(&GroupElement::translation(vec![3.0, 0.5]), &GroupElement::dilation(1.7, 2)),
        ),
    );
    assert!(product.max_param_diff(&g) < 1e-13);
}

#[test]
fn left_cancellation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let g = random_element(&mut rng, 4.0, 2.0);
        let h = random_element(&mut rng, 4.0, 2.0);
        assert!(compose(&inverse(&g), &compose(&g, &h)).max_param_diff(&h) < 1e-13);
    }
}

#[test]
fn action_is_a_homomorphism() {
    let grid = make_grid(1, 512, 16.0).unwrap();
    let f = Field::from_real_fn(grid, |x| (-x[0] * x[0] / 2.0).exp());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let g = random_element(&mut rng, 1.0, 0.3);
        let h = random_element(&mut rng, 1.0, 0.3);
        let a = apply(&compose(&g, &h), &f).unwrap();
        let b = apply(&g, &apply(&h, &f).unwrap()).unwrap();
        worst = worst.max(l2_distance(&a, &b).unwrap());
    }
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn enlarged_action_is_unitary_and_invertible() {
    let grid = make_grid(1, 1024, 32.0).unwrap();
    let f = Field::from_real_fn(grid, |x| (-x[0] * x[0] / 2.0).exp());
    let m = mass(&f);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let e = EnlargedElement { base: random_element(&mut rng, 2.0, 0.5), t0: rng.gen_range(-1.0..1.0) };
        assert!((mass(&apply_enlarged(&e, &f).unwrap()) - m).abs() < 1e-9 * m);
    }
    let there = apply_enlarged(&GroupElement::identity(1).enlarge(0.8), &f).unwrap();
    let back = apply_enlarged(&GroupElement::identity(1).enlarge(-0.8), &there).unwrap();
    assert!(l2_distance(&back, &f).unwrap() < 1e-10);
}

fn axes() -> Vec<(&'static str, Vec<EnlargedElement>)> {
    let e = |lambda: f64, t0: f64, xi: f64, x: f64| EnlargedElement {
        base: GroupElement { theta: 0.0, xi0: vec![xi], x0: vec![x], lambda },
        t0,
    };
    vec![
        ("lambda", [1.0, 4.0, 16.0, 64.0].iter().map(|&l| e(l, 0.0, 0.0, 0.0)).collect()),
        ("t0", [0.0, 4.0, 16.0, 64.0].iter().map(|&t| e(1.0, t, 0.0, 0.0)).collect()),
        ("xi0", [0.0, 4.0, 16.0, 32.0].iter().map(|&x| e(1.0, 0.0, x, 0.0)).collect()),
        ("x0", [0.0, 4.0, 16.0, 64.0].iter().map(|&x| e(1.0, 0.0, 0.0, x)).collect()),
    ]
}

fn wide_grid() -> Grid {
    make_grid(1, 16384, 512.0).unwrap()
}

#[test]
fn overlaps_decouple_along_every_axis() {
    let grid = wide_grid();
    let phi = hermite_profile(grid);
    let m = mass(&phi);
    for (name, elems) in axes() {
        let a = apply_enlarged(&elems[0], &phi).unwrap();
        let b = apply_enlarged(elems.last().unwrap(), &phi).unwrap();
        let overlap = inner(&a, &b).unwrap().norm();
        assert!(overlap < 0.02 * m, "{name}: {overlap:e}");
    }
}

#[test]
fn mixed_norm_decreases_along_every_axis() {
    let grid = wide_grid();
    let phi = hermite_profile(grid);
    let times = reference_times(1.0, 41);
    for (name, elems) in axes() {
        let a = enlarged_free_trajectory(&elems[0], &phi, &times).unwrap();
        let values: Vec<f64> = elems
            .iter()
            .map(|e| mixed_norm(&a, &enlarged_free_trajectory(e, &phi, &times).unwrap(), 0.5).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{name}: {values:?}");
        if name == "x0" {
            assert!(values[3] < 0.05 * values[0], "{values:?}");
        }
    }
}
