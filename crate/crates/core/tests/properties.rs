//! Structural invariants as property tests over random seeds and sizes.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sdns::cli_io::config::MAX_SEED;
use sdns::cli_io::RunConfig;
use sdns::estimators::time_average;
use sdns::noise::{NoiseModel, NoiseStream, Saturation};
use sdns::nonlinearity::{bilinear_b, bilinear_bm, DealiasRule, Mollifier};
use sdns::spectral::random::{random_field, FieldSpectrum};
use sdns::spectral::{inner_product, leray_project, lp_norm, sobolev_norm, Grid, SpectralField};
use sdns::stats::{ks_statistic, trapezoid};

fn field(grid: &Grid, seed: u64, l2: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = FieldSpectrum {
        l2_norm: Some(l2),
        ..FieldSpectrum::default()
    };
    random_field(grid, &mut rng, &spec)
}

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (prop_oneof![Just(2usize), Just(3usize)], prop_oneof![Just(8usize), Just(12usize), Just(16usize)])
        .prop_map(|(d, n)| Grid::periodic(d, n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn convection_is_skew(grid in grid_strategy(), seed in any::<u64>(), m in 0.5f64..100.0) {
        let u = field(&grid, seed, 1.0);
        let v = field(&grid, seed ^ 1, 2.0);
        let scale = sobolev_norm(0.0, &u) * sobolev_norm(1.0, &v).powi(2);
        let b = bilinear_b(&u, &v, DealiasRule::TwoThirds).unwrap();
        prop_assert!(inner_product(&b, &v).unwrap().abs() <= 1e-10 * scale);
        let bm = bilinear_bm(Mollifier::Gaussian(m), &u, &v, DealiasRule::TwoThirds).unwrap();
        prop_assert!(inner_product(&bm, &v).unwrap().abs() <= 1e-10 * scale);
    }

    #[test]
    fn convection_is_bilinear(grid in grid_strategy(), seed in any::<u64>(), a in -3.0f64..3.0) {
        let u = field(&grid, seed, 1.0);
        let v = field(&grid, seed ^ 2, 1.0);
        let w = field(&grid, seed ^ 3, 1.0);
        let lhs = bilinear_b(&u, &(&v + &(a * &w)), DealiasRule::TwoThirds).unwrap();
        let rhs = &bilinear_b(&u, &v, DealiasRule::TwoThirds).unwrap()
            + &(a * &bilinear_b(&u, &w, DealiasRule::TwoThirds).unwrap());
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-12 * (1.0 + lhs.max_abs()));
    }

    #[test]
    fn leray_projection_is_idempotent_and_solenoidal(grid in grid_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut raw = SpectralField::zeros(grid);
        for (i, c) in raw.coeffs_mut().iter_mut().enumerate() {
            let x: f64 = rand::Rng::gen_range(&mut rng, -1.0..1.0);
            *c = num_complex::Complex64::new(x, 0.5 * x * (i % 3) as f64);
        }
        raw.enforce_hermitian();
        let p = leray_project(&raw);
        prop_assert!(p.is_divergence_free());
        prop_assert!((&leray_project(&p) - &p).max_abs() <= 1e-14 * (1.0 + p.max_abs()));
        prop_assert!(sobolev_norm(0.0, &p) <= sobolev_norm(0.0, &raw) * (1.0 + 1e-12));
    }

    #[test]
    fn spectral_and_physical_l2_agree(grid in grid_strategy(), seed in any::<u64>()) {
        let v = field(&grid, seed, 1.5);
        let back = SpectralField::from_physical(&v.to_physical());
        prop_assert!((&back - &v).max_abs() <= 1e-12);
        prop_assert!((lp_norm(2.0, &v).unwrap() / sobolev_norm(0.0, &v) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn increments_are_hermitian_and_reproducible(seed in any::<u64>(), member in 0u64..1000, step in 0u64..1_000_000) {
        let grid = Grid::periodic(2, 8).unwrap();
        let stream = NoiseStream::new(seed, member);
        let a = stream.increment(&grid, 0.01, step).unwrap();
        let b = stream.increment(&grid, 0.01, step).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.field.hermitian_defect() == 0.0);
        let other = NoiseStream::new(seed, member + 1).increment(&grid, 0.01, step).unwrap();
        prop_assert!(other != a);
    }

    #[test]
    fn noise_norm_never_exceeds_its_bound(seed in any::<u64>(), scale in 0.0f64..50.0, g in 0.05f64..0.95) {
        let grid = Grid::periodic(2, 12).unwrap();
        let model = NoiseModel::new(g, 1.0, NoiseModel::default_r(2, g), Saturation::Tanh, 1).unwrap();
        let v = field(&grid, seed, scale);
        prop_assert!(model.on_grid(&grid).hs_norm(&v) <= model.k_g2(&grid) * (1.0 + 1e-12));
    }

    #[test]
    fn time_average_of_a_constant_is_the_constant(c in -10.0f64..10.0, n in 3usize..50, frac in 0.1f64..1.0) {
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
        let values = vec![c; n];
        let horizon = times[n - 1] * frac;
        prop_assume!(horizon > 0.0);
        prop_assert!((time_average(&times, &values, horizon).unwrap() - c).abs() <= 1e-12 * (1.0 + c.abs()));
        prop_assert!((trapezoid(&times, &values) - c * times[n - 1]).abs() <= 1e-12 * (1.0 + c.abs()));
    }

    #[test]
    fn ks_statistic_is_a_symmetric_distance(a in prop::collection::vec(-5.0f64..5.0, 1..40), b in prop::collection::vec(-5.0f64..5.0, 1..40)) {
        let d = ks_statistic(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks_statistic(&b, &a));
        prop_assert_eq!(ks_statistic(&a, &a), 0.0);
    }

    #[test]
    fn resolved_configs_round_trip(seed in 0..=MAX_SEED, g in 0.05f64..0.95, t_end in 0.5f64..50.0) {
        let text = format!("seed = {seed}\n[noise]\ng = {g}\n[solver]\nt_end = {t_end}\n");
        let resolved = RunConfig::from_toml(&text).unwrap().resolve().unwrap();
        let again = RunConfig::from_toml(&resolved.to_toml()).unwrap().resolve().unwrap();
        prop_assert_eq!(resolved.digest(), again.digest());
        prop_assert_eq!(resolved, again);
    }
}
