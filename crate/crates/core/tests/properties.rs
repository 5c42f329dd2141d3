mod common;

use ans_core::besov::{b_neg1_inf_q, besov_b012, besov_static, h0s_norm, BesovParams};
use ans_core::heat::{semigroup, HeatFlowParams};
use ans_core::nonlinear::{bony_vertical_split, convect, convect_horizontal, e_functional};
use ans_core::solver::NormAccumulator;
use ans_core::{leray_project, mixed_norm, DyadicDecomposition, Grid, VectorField};
use common::*;
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    prop::sample::select(vec![[8, 8, 8], [16, 8, 12], [10, 16, 8], [16, 16, 16]]).prop_map(|[a, b, c]| Grid::new(a, b, c).unwrap())
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval(g in grid_strategy(), seed in any::<u64>()) {
        let f = random_real(&g, &mut rng(seed));
        let samples = f.to_physical();
        let physical = (samples.iter().map(|x| x * x).sum::<f64>() * g.cell_volume()).sqrt();
        prop_assert!(relative(f.l2_norm(), physical) <= 1e-12);
        prop_assert!(relative(mixed_norm(&f, 2.0, 2.0).unwrap(), f.l2_norm()) <= 1e-10);
        prop_assert!(f.conjugate_symmetry_residual() <= 1e-15);
    }

    #[test]
    fn leray_is_an_orthogonal_projection(g in grid_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (v, w) = (random_vector(&g, &mut r), random_vector(&g, &mut r));
        let pv = leray_project(&v);
        prop_assert!(max_diff_vector(&leray_project(&pv), &pv) <= 1e-12 * max_coeff(&pv));
        prop_assert!(pv.divergence_residual() <= 1e-10);
        let (a, b) = (pv.inner(&w).unwrap(), v.inner(&leray_project(&w)).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * v.l2_norm() * w.l2_norm());
    }

    #[test]
    fn mixed_norm_is_homogeneous(g in grid_strategy(), seed in any::<u64>(), c in -50.0f64..50.0, p in 1.0f64..9.0, q in 1.0f64..9.0) {
        let f = random_real(&g, &mut rng(seed));
        let a = mixed_norm(&f.scaled(c), p, q).unwrap();
        prop_assert!((a - c.abs() * mixed_norm(&f, p, q).unwrap()).abs() <= 1e-13 * a.max(1e-300));
    }

    #[test]
    fn besov_norms_are_homogeneous(seed in any::<u64>(), c in -20.0f64..20.0, p in prop::sample::select(vec![2.0, 4.0, 8.0])) {
        let g = Grid::new(16, 16, 16).unwrap();
        let dec = DyadicDecomposition::new(g);
        let u = random_vector(&g, &mut rng(seed));
        let params = BesovParams::new(p, 0.1, 0.01).unwrap();
        let pairs = [
            (besov_static(&dec, &u.scaled(c), &params).unwrap(), besov_static(&dec, &u, &params).unwrap()),
            (besov_b012(&dec, &u.scaled(c)).unwrap(), besov_b012(&dec, &u).unwrap()),
            (b_neg1_inf_q(&dec, &u.scaled(c), 2.0).unwrap(), b_neg1_inf_q(&dec, &u, 2.0).unwrap()),
        ];
        for (scaled, base) in pairs {
            prop_assert!(base > 0.0);
            prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * scaled.max(1e-300));
        }
    }

    #[test]
    fn convect_is_bilinear(seed in any::<u64>(), c in -5.0f64..5.0) {
        let g = Grid::new(8, 8, 8).unwrap();
        let mut r = rng(seed);
        let (u, v, a) = (random_vector(&g, &mut r), random_vector(&g, &mut r), random_vector(&g, &mut r));
        let base = convect(&u, &a).unwrap();
        let scale = max_coeff(&base) * (1.0 + c.abs());
        prop_assert!(max_diff_vector(&convect(&u.scaled(c), &a).unwrap(), &base.scaled(c)) <= 1e-12 * scale);
        prop_assert!(max_diff_vector(&convect(&u, &a.scaled(c)).unwrap(), &base.scaled(c)) <= 1e-12 * scale);
        let sum = convect(&u.try_add(&v).unwrap(), &a).unwrap();
        let parts = base.try_add(&convect(&v, &a).unwrap()).unwrap();
        prop_assert!(max_diff_vector(&sum, &parts) <= 1e-12 * max_coeff(&parts));
    }

    #[test]
    fn advection_by_solenoidal_fields_is_skew(seed in any::<u64>()) {
        let g = Grid::new(16, 16, 16).unwrap();
        let mut r = rng(seed);
        let u = random_solenoidal(&g, &mut r);
        let mut a = random_vector(&g, &mut r).dealias();
        for c in a.comps_mut() {
            c.set_coeff([0, 0, 0], Default::default());
        }
        let s = convect(&u, &a).unwrap().inner(&a).unwrap();
        prop_assert!(s.abs() <= 1e-8 * u.l2_norm() * a.l2_norm());
    }

    #[test]
    fn hh_ll_split_reconstructs(seed in any::<u64>()) {
        let g = Grid::new(16, 16, 16).unwrap();
        let dec = DyadicDecomposition::new(g);
        let u = random_solenoidal(&g, &mut rng(seed));
        let (hh, ll) = dec.split_hh_ll(&u);
        prop_assert!(max_diff_vector(&hh.try_add(&ll).unwrap(), &u) <= 1e-10 * max_coeff(&u));
        prop_assert!(hh.divergence_residual() <= 1e-10 && ll.divergence_residual() <= 1e-10);
    }

    #[test]
    fn horizontal_bands_are_nearly_orthogonal(seed in any::<u64>()) {
        let g = Grid::new(16, 16, 8).unwrap();
        let dec = DyadicDecomposition::new(g);
        let mut f = random_real(&g, &mut rng(seed));
        for m3 in -3..=4 {
            f.set_coeff([0, 0, m3], Default::default());
        }
        let total = f.l2_norm().powi(2);
        let bands: f64 = dec.k_range().map(|k| dec.delta_h(&f, k).l2_norm().powi(2)).sum();
        prop_assert!(bands <= total * (1.0 + 1e-12) && bands >= 0.5 * total);
        let h0 = h0s_norm(&dec, &f, 0.0).unwrap();
        prop_assert!(h0 > 0.0);
    }

    #[test]
    fn bony_pieces_reconstruct_the_band(seed in any::<u64>()) {
        let g = Grid::new(16, 16, 32).unwrap();
        let dec = DyadicDecomposition::new(g);
        let mut r = rng(seed);
        let (u, a) = (random_vector(&g, &mut r), random_vector(&g, &mut r));
        for j in dec.l_range() {
            let (lh, hl) = bony_vertical_split(&dec, &u, &a, j).unwrap();
            let whole = convect_horizontal(&u, &a).unwrap().map(|c| dec.delta_v(c, j));
            let scale = max_coeff(&whole).max(1e-300);
            prop_assert!(max_diff_vector(&lh.try_add(&hl).unwrap(), &whole) <= 1e-8 * scale, "j = {}", j);
        }
    }

    #[test]
    fn heat_decay_is_monotone(seed in any::<u64>(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let g = Grid::new(8, 8, 8).unwrap();
        let f = random_real(&g, &mut rng(seed));
        let (a, b) = (semigroup(&f, s, 0.1, 0.01).unwrap(), semigroup(&f, s + t, 0.1, 0.01).unwrap());
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!(y.norm() <= x.norm());
        }
        prop_assert!(b.l2_norm() <= a.l2_norm());
    }
}

#[test]
fn parseval_on_64_cubed() {
    let g = Grid::new(64, 64, 64).unwrap();
    let f = random_real(&g, &mut rng(9));
    let samples = f.to_physical();
    let physical = (samples.iter().map(|x| x * x).sum::<f64>() * g.cell_volume()).sqrt();
    assert!(relative(f.l2_norm(), physical) <= 1e-12);
}

#[test]
fn e_functional_parts_have_degrees_one_and_two() {
    let g = Grid::new(16, 16, 16).unwrap();
    let dec = DyadicDecomposition::new(g);
    let u = random_solenoidal(&g, &mut rng(10));
    let besov = BesovParams::new(4.0, 0.1, 0.01).unwrap();
    let params = HeatFlowParams::geometric(0.1, 0.01, 1e-3, 1.25, 2.0).unwrap();
    let base = e_functional(&dec, &u, &besov, &params).unwrap();
    assert!(base.besov_part > 0.0 && base.forcing_part > 0.0);
    for c in [2.0, 1.0 / 3.0] {
        let r = e_functional(&dec, &u.scaled(c), &besov, &params).unwrap();
        assert!(relative(r.besov_part, c * base.besov_part) <= 1e-12);
        assert!(relative(r.forcing_part, c * c * base.forcing_part) <= 1e-10);
        assert_eq!(r.total, r.besov_part + r.forcing_part);
    }
}

#[test]
fn accumulated_statistics_never_decrease() {
    let g = Grid::new(16, 16, 16).unwrap();
    let dec = DyadicDecomposition::new(g);
    let u = random_solenoidal(&g, &mut rng(11));
    let mut acc = NormAccumulator::new(dec, 4.0, 0.1, 0.01);
    let mut last = (0.0, 0.0);
    for i in 0..=10 {
        let t = 0.1 * i as f64;
        let v: VectorField = u.map(|c| semigroup(c, t, 0.1, 0.01).unwrap()).scaled(1.0 + 0.3 * (i as f64).sin());
        acc.update(t, &v).unwrap();
        let now = (acc.b012_norm(), acc.besov_time_norm());
        assert!(now.0 >= last.0 && now.1 >= last.1);
        last = now;
    }
}
