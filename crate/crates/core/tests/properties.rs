use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use fdbouss::config::RunConfig;
use fdbouss::energy::{difference_energy, modified_energy_1d};
use fdbouss::lab::{dmp_commutator, kato_ponce_sides, leibniz_defect, multiplier_estimate_ratios, Family};
use fdbouss::model1d::{rhs_1d, State1D};
use fdbouss::model2d::{gradient_form, project_curl_free, transport_form};
use fdbouss::monitors::existence_time;
use fdbouss::ops::{mean_zero, project};
use fdbouss::random::{random_field, RandomFieldSpec};
use fdbouss::{apply_multiplier, lp_norm, sobolev_norm, Dealias, Grid, Lp, RealField, Symbol};

fn line(n: usize) -> Arc<Grid> {
    Grid::line(n, 2.0 * PI).unwrap()
}

fn field(g: &Arc<Grid>, seed: u64, band: usize, decay: f64, mean: f64) -> RealField {
    random_field(
        g,
        &RandomFieldSpec {
            seed,
            n: g.len(),
            decay,
            band,
            mean,
        },
    )
}

fn max_diff(a: &RealField, b: &RealField) -> f64 {
    a.values.iter().zip(&b.values).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fft_round_trip(seed in any::<u64>(), n_exp in 3u32..10) {
        let g = line(1 << n_exp);
        let f = RealField::new(&g, (0..g.len()).map(|i| ((seed as f64 + i as f64) * 0.618).sin()).collect()).unwrap();
        let back = g.inverse(&g.forward(&f.values));
        prop_assert!(max_diff(&f, &RealField::new(&g, back).unwrap()) <= 1e-12 * f.max_abs());
    }

    #[test]
    fn bessel_powers_compose(seed in any::<u64>(), ai in 0usize..4, bi in 0usize..4) {
        let powers = [-1.0, 0.5, 1.0, 2.6];
        let (a, b) = (powers[ai], powers[bi]);
        let g = line(128);
        let f = field(&g, seed, 20, 1.5, 0.3);
        let two = apply_multiplier(&Symbol::Bessel(a), &apply_multiplier(&Symbol::Bessel(b), &f).unwrap()).unwrap();
        let one = apply_multiplier(&Symbol::Bessel(a + b), &f).unwrap();
        prop_assert!(max_diff(&two, &one) <= 1e-12 * one.max_abs().max(f.max_abs()));
    }

    #[test]
    fn hilbert_and_riesz_transforms_square_to_minus_identity(seed in any::<u64>()) {
        let g = line(64);
        let f = mean_zero(&field(&g, seed, 20, 1.0, 0.0));
        let hh = apply_multiplier(&Symbol::Hilbert, &apply_multiplier(&Symbol::Hilbert, &f).unwrap()).unwrap();
        prop_assert!(max_diff(&hh, &f.scaled(-1.0)) <= 1e-13);

        let p = Grid::plane([32, 32], [2.0 * PI, 2.0 * PI]).unwrap();
        let f2 = mean_zero(&field(&p, seed, 10, 1.0, 0.0));
        let r = |j: usize| {
            let once = apply_multiplier(&Symbol::RieszTransform(j), &f2).unwrap();
            apply_multiplier(&Symbol::RieszTransform(j), &once).unwrap()
        };
        prop_assert!(max_diff(&r(0).add(&r(1)), &f2.scaled(-1.0)) <= 1e-13);
    }

    #[test]
    fn riesz_derivative_is_hilbert_of_derivative(seed in any::<u64>()) {
        let g = line(64);
        let f = field(&g, seed, 20, 1.0, 0.5);
        let d1 = apply_multiplier(&Symbol::Riesz(1.0), &f).unwrap();
        let dx = apply_multiplier(&Symbol::Derivative(0), &f).unwrap();
        let hdx = apply_multiplier(&Symbol::Hilbert, &dx).unwrap();
        prop_assert!(max_diff(&d1, &hdx) <= 1e-12 * d1.max_abs().max(1.0));
    }

    #[test]
    fn parseval(seed in any::<u64>()) {
        let g = line(128);
        let f = field(&g, seed, 40, 0.5, 0.1);
        let (a, b) = (sobolev_norm(&f, 0.0), lp_norm(&f, Lp::Two));
        prop_assert!((a - b).abs() <= 1e-13 * b);
    }

    #[test]
    fn dealias_projection_is_idempotent(seed in any::<u64>()) {
        let g = line(64);
        let mask = Dealias::TwoThirds.mask(g.spec());
        let mut once = g.forward(&field(&g, seed, 31, 0.0, 0.0).values);
        project(&mut once, &mask);
        let mut twice = once.clone();
        project(&mut twice, &mask);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn mass_and_momentum_rates_vanish(seed in any::<u64>(), beta in 0.1f64..2.0) {
        let g = line(128);
        let st = State1D::new(field(&g, seed, 30, 1.5, 0.0).scaled(0.3), field(&g, seed ^ 1, 30, 1.5, 0.1), 0.0).unwrap();
        let (eta_t, u_t) = rhs_1d(&st, beta, Dealias::TwoThirds).unwrap();
        prop_assert!(eta_t.integral().abs() <= 1e-12);
        prop_assert!(u_t.integral().abs() <= 1e-12);
    }

    #[test]
    fn transport_form_matches_gradient_form_for_curl_free_fields(seed in any::<u64>()) {
        let p = Grid::plane([64, 64], [2.0 * PI, 2.0 * PI]).unwrap();
        // band 12 keeps every quadratic product resolved on 64 points
        let (u1, u2) = project_curl_free(&field(&p, seed, 12, 1.5, 0.0), &field(&p, seed ^ 7, 12, 1.5, 0.0)).unwrap();
        let (g1, g2) = gradient_form(&u1, &u2);
        let (t1, t2) = transport_form(&u1, &u2);
        let scale = g1.max_abs().max(g2.max_abs()).max(1e-300);
        prop_assert!(max_diff(&g1, &t1).max(max_diff(&g2, &t2)) <= 1e-10 * scale);
    }

    #[test]
    fn curl_free_projection_is_idempotent(seed in any::<u64>()) {
        let p = Grid::plane([32, 32], [2.0 * PI, 3.0]).unwrap();
        let (a1, a2) = project_curl_free(&field(&p, seed, 10, 1.0, 0.2), &field(&p, seed ^ 3, 10, 1.0, 0.0)).unwrap();
        let (b1, b2) = project_curl_free(&a1, &a2).unwrap();
        prop_assert!(max_diff(&a1, &b1).max(max_diff(&a2, &b2)) <= 1e-14);
    }

    #[test]
    fn coercivity_sandwich(seed in any::<u64>(), amp in 0.01f64..0.95, vel in 0.0f64..2.0) {
        let g = line(128);
        let eta = field(&g, seed, 30, 2.0, 0.0);
        let eta = eta.scaled(amp / eta.max_abs());
        let st = State1D::new(eta, field(&g, seed ^ 5, 30, 2.0, 0.0).scaled(vel), 0.0).unwrap();
        let r = modified_energy_1d(&st, 2.6).unwrap();
        prop_assert!(r.sandwich_holds(1e-12), "{:?}", r);
    }

    #[test]
    fn difference_energy_scales_quadratically(seed in any::<u64>(), lambda in 0.01f64..10.0) {
        let g = line(64);
        let base = State1D::new(field(&g, seed, 10, 2.0, 0.0).scaled(0.3), field(&g, seed ^ 9, 10, 2.0, 0.0), 0.0).unwrap();
        let (de, du) = (field(&g, seed ^ 11, 10, 1.0, 0.0), field(&g, seed ^ 13, 10, 1.0, 0.0));
        let shifted = |l: f64| State1D::new(base.eta.add(&de.scaled(l)), base.u.add(&du.scaled(l)), 0.0).unwrap();
        let one = difference_energy(&base, &shifted(1.0)).unwrap().value;
        let scaled = difference_energy(&base, &shifted(lambda)).unwrap().value;
        prop_assert!((scaled - lambda * lambda * one).abs() <= 1e-12 * scaled);
    }

    #[test]
    fn existence_time_is_monotone(e in 0.0f64..10.0, u in 0.0f64..10.0, h0 in 0.01f64..0.99, de in 0.0f64..5.0, du in 0.0f64..5.0) {
        let a = existence_time(e, u, h0, 1.0, 10.0).unwrap();
        let b = existence_time(e + de, u + du, h0, 1.0, 10.0).unwrap();
        prop_assert!(b.t1 <= a.t1 && b.t2 <= a.t2 && b.t0 <= a.t0);
        prop_assert_eq!(a.t0, a.t1.min(a.t2));
    }

    #[test]
    fn constant_arguments_make_commutators_vanish(seed in any::<u64>(), c in -2.0f64..2.0) {
        let g = line(128);
        let f = field(&g, seed, 24, 1.0, 0.2);
        let k = RealField::constant(&g, c);
        let kp = kato_ponce_sides(&k, &f, 2.6).unwrap();
        prop_assert!(kp.lhs <= 1e-12 * (1.0 + c.abs()) * sobolev_norm(&f, 2.6));
        // D^sigma of a constant vanishes, so the defect is D^sigma(cf) - c D^sigma f
        prop_assert!(leibniz_defect(&k, &f, 0.5).unwrap().max_abs() <= 1e-12 * (1.0 + c.abs()) * sobolev_norm(&f, 1.0));
        prop_assert!(dmp_commutator(&k, &f).unwrap().max_abs() <= 1e-12 * (1.0 + c.abs()) * sobolev_norm(&f, 1.0));
    }

    #[test]
    fn bessel_riesz_ratio_is_below_one_half(seed in any::<u64>(), n_exp in 6u32..10) {
        let g = line(1 << n_exp);
        let f = field(&g, seed, 24, 1.0, 0.1);
        prop_assert!(multiplier_estimate_ratios(&f, 2.6).unwrap().r_br <= 0.5 + 1e-10);
    }

    #[test]
    fn lab_trials_are_reproducible(seed in any::<u64>(), i in 0u64..1000) {
        let fam = Family { base_seed: seed, ..Family::default() };
        let g = line(128);
        let (a, b) = (fam.pair(&g, i), fam.pair(&g, i));
        prop_assert_eq!(a.0.values, b.0.values);
        prop_assert_eq!(a.1.values, b.1.values);
    }

    #[test]
    fn config_text_round_trips(n_exp in 3u32..11, beta in 0.05f64..4.0, amp in -0.5f64..0.5, seed in any::<u64>(), s in 2.51f64..5.0) {
        let text = format!(
            "grid.n = {}\nphysics.beta = {beta:?}\ninitial.amplitude = {amp:?}\nseed = {seed}\ndiagnostics.s = {s:?}\n",
            1usize << n_exp
        );
        let cfg = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
