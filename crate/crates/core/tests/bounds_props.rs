use levystab::bounds::{consistent_tilde, stability_report, BoundReport, Growth, ModelPair};
use levystab::levy::{integrate_levy, IntegrandClass, LevyModel, QuadratureConfig};
use levystab::measure_change::{girsanov_for, MeasureSelector};
use proptest::prelude::*;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::precise()
}

fn report(a: LevyModel, b: LevyModel, sel: MeasureSelector, t: f64) -> BoundReport {
    let pair = ModelPair::new(a, b, sel, t).unwrap();
    stability_report(&pair, Growth::new(1.0, 0.5).unwrap(), &cfg()).unwrap()
}

fn selector(which: usize) -> MeasureSelector {
    [MeasureSelector::esscher(0.0), MeasureSelector::memm(0.0)][which]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coincident_models_give_exact_zeros(m in 3.0f64..8.0, n in 3.0f64..8.0, alpha in prop::sample::select(vec![0.0, 0.5]), which in 0usize..2) {
        let a = LevyModel::cgmy(0.05, 0.0, 1.0, m, n, alpha).unwrap();
        let r = report(a, a, selector(which), 1.0);
        for v in [r.rho_qq, r.rho_pp, r.u_t, r.v_t, r.r_t, r.h_t_pp, r.bound_thm1, r.bound_cor1, r.variation_bound_h1] {
            prop_assert_eq!(v, 0.0);
        }
        for v in [r.bound_eq14, r.bound_m12].into_iter().flatten() {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn maturity_scaling(m in 3.0f64..8.0, n in 3.0f64..8.0, dn in -0.3f64..0.3, which in 0usize..2) {
        let a = LevyModel::variance_gamma(0.0, 0.0, 1.0, m, n).unwrap();
        let b = consistent_tilde(&a, &LevyModel::variance_gamma(0.0, 0.0, 1.0, m, n + dn).unwrap(), &cfg()).unwrap();
        let r: Vec<BoundReport> = [0.5, 1.0, 2.0].iter().map(|&t| report(a, b, selector(which), t)).collect();
        for (k, t) in [0.5, 1.0, 2.0].iter().enumerate() {
            prop_assert!((r[k].rho_qq - t * r[1].rho_qq).abs() <= 1e-12 * (1e-300 + r[1].rho_qq));
            prop_assert!((r[k].rho_pp - t * r[1].rho_pp).abs() <= 1e-12 * (1e-300 + r[1].rho_pp));
            prop_assert!((r[k].h_t_pp - t * r[1].h_t_pp).abs() <= 1e-12 * (1e-300 + r[1].h_t_pp));
        }
        // With A ∝ T inside the weights, U/T, V/T, R/T are affine in T.
        for get in [|r: &BoundReport| r.u_t, |r: &BoundReport| r.v_t, |r: &BoundReport| r.r_t] {
            let s: Vec<f64> = r.iter().zip([0.5, 1.0, 2.0]).map(|(r, t)| get(r) / t).collect();
            let (d1, d2) = (s[1] - s[0], s[2] - s[1]);
            prop_assert!((d2 - 2.0 * d1).abs() <= 1e-7 * s[2].abs(), "{s:?}");
        }
        prop_assert!(r.iter().all(|r| r.bound_cor1 >= 0.0 && r.bound_thm1 >= 0.0));
    }

    #[test]
    fn v_dominates_u_for_positive_jumps(n in 3.0f64..8.0, dn in -0.5f64..0.5, alpha in 0.0f64..0.9) {
        let a = LevyModel::gmy(0.0, 0.0, 1.0, n, alpha).unwrap();
        let b = consistent_tilde(&a, &LevyModel::gmy(0.0, 0.0, 1.0, n + dn, alpha).unwrap(), &cfg()).unwrap();
        let r = report(a, b, MeasureSelector::esscher(0.0), 1.0);
        prop_assert!(r.v_t >= r.u_t, "U={} V={}", r.u_t, r.v_t);
    }

    #[test]
    fn rho_qq_is_symmetric_in_the_selector_labels(m in 3.0f64..8.0, n in 3.0f64..8.0, dm in -0.3f64..0.3, which in 0usize..2) {
        let a = LevyModel::variance_gamma(0.0, 0.0, 1.0, m, n).unwrap();
        let b = consistent_tilde(&a, &LevyModel::variance_gamma(0.0, 0.0, 1.0, m + dm, n).unwrap(), &cfg()).unwrap();
        let sel = selector(which);
        let rep = report(a, b, sel, 1.0);
        let g = girsanov_for(&sel, &a, &cfg()).unwrap().girsanov;
        let gt = girsanov_for(&sel, &b, &cfg()).unwrap().girsanov;
        let d = a.density();
        let swapped: f64 = integrate_levy(&d, |x| (g.y(x).sqrt() - gt.y(x).sqrt()).powi(2), IntegrandClass::Quadratic, &cfg()).unwrap();
        prop_assert!((swapped - rep.rho_qq).abs() <= 1e-7 * rep.rho_qq.max(1e-300), "{swapped} vs {}", rep.rho_qq);
    }
}
