use levystab::levy::{LevyModel, QuadratureConfig};
use levystab::measure_change::{risk_neutral_triplet, MeasureSelector};
use levystab::pricing::{cf_price, mc_price, CosConfig, CosPricer, Payoff, SimConfig};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn models() -> Vec<LevyModel> {
    vec![
        LevyModel::black_scholes(0.05, 0.04).unwrap(),
        LevyModel::variance_gamma(0.0, 0.0, 1.0, 5.0, 5.0).unwrap(),
        LevyModel::cgmy(0.0, 0.0, 1.0, 5.0, 5.0, 0.5).unwrap(),
    ]
}

fn selectors(r: f64) -> Vec<MeasureSelector> {
    vec![
        MeasureSelector::esscher(r),
        MeasureSelector::memm(r),
        MeasureSelector::fq(2.0, r).unwrap(),
        MeasureSelector::fq(0.5, r).unwrap(),
    ]
}

#[test]
fn discounted_asset_is_worth_its_spot() {
    let r = 0.03;
    let sim = SimConfig { n_paths: 200_000, seed: 11, ..SimConfig::default() };
    for m in models() {
        for sel in selectors(r) {
            let Ok((_, t)) = risk_neutral_triplet(&sel, &m, &cfg()) else { continue };
            let cf = cf_price(&t, &Payoff::Asset, 1.0, r, &CosConfig::default(), &cfg()).unwrap();
            assert!((cf.value - 1.0).abs() <= 1e-8, "{m:?} {sel}: {}", cf.value);
            if let Ok(mc) = mc_price(&t, &Payoff::Asset, 1.0, r, &sim) {
                assert!((mc.value - 1.0).abs() <= 3.0 * mc.stderr, "{m:?} {sel}: {mc:?}");
            }
        }
    }
}

#[test]
fn monte_carlo_agrees_with_cosine_series() {
    let sim = SimConfig { n_paths: 200_000, seed: 5, ..SimConfig::default() };
    for m in models() {
        let (_, t) = risk_neutral_triplet(&MeasureSelector::esscher(0.0), &m, &cfg()).unwrap();
        for payoff in [Payoff::call(0.9).unwrap(), Payoff::call(1.1).unwrap(), Payoff::put(1.0).unwrap()] {
            let cf = cf_price(&t, &payoff, 1.0, 0.0, &CosConfig::default(), &cfg()).unwrap().value;
            let mc = mc_price(&t, &payoff, 1.0, 0.0, &sim).unwrap();
            assert!((mc.value - cf).abs() <= 3.0 * mc.stderr, "{m:?} {payoff:?}: mc {mc:?} cf {cf}");
        }
    }
}

#[test]
fn call_prices_do_not_increase_with_strike() {
    for m in models() {
        for sel in selectors(0.01) {
            let Ok((_, t)) = risk_neutral_triplet(&sel, &m, &cfg()) else { continue };
            let pricer = CosPricer::new(&t, 1.0, 0.01, &CosConfig::default(), &cfg()).unwrap();
            let prices: Vec<f64> = (0..10).map(|j| pricer.call(0.7 + 0.07 * j as f64)).collect();
            for w in prices.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{m:?} {sel}: {prices:?}");
            }
        }
    }
}

#[test]
fn equal_configs_give_equal_estimates() {
    let m = LevyModel::cgmy(0.0, 0.0, 1.0, 5.0, 5.0, 1.2).unwrap();
    let (_, t) = risk_neutral_triplet(&MeasureSelector::esscher(0.0), &m, &cfg()).unwrap();
    let sim = SimConfig { n_paths: 20_000, seed: 99, ..SimConfig::default() };
    let a = mc_price(&t, &Payoff::call(1.0).unwrap(), 1.0, 0.0, &sim).unwrap();
    let b = mc_price(&t, &Payoff::call(1.0).unwrap(), 1.0, 0.0, &sim).unwrap();
    assert_eq!(a, b);
}

#[test]
fn doubling_the_series_settings_moves_prices_by_less_than_1e_8() {
    let doubled = CosConfig { truncation: 20.0, terms: 2048 };
    let models = [
        LevyModel::black_scholes(0.05, 0.04).unwrap(),
        LevyModel::cgmy(0.0, 0.0, 1.0, 5.0, 5.0, 0.5).unwrap(),
        LevyModel::cgmy(0.0, 0.02, 1.0, 5.0, 5.0, 1.5).unwrap(),
    ];
    for m in models {
        let (_, t) = risk_neutral_triplet(&MeasureSelector::esscher(0.0), &m, &cfg()).unwrap();
        let a = CosPricer::new(&t, 1.0, 0.0, &CosConfig::default(), &cfg()).unwrap();
        let b = CosPricer::new(&t, 1.0, 0.0, &doubled, &cfg()).unwrap();
        for k in [0.8, 1.0, 1.2] {
            assert!((a.call(k) - b.call(k)).abs() < 1e-8, "{m:?} K={k}: {} vs {}", a.call(k), b.call(k));
        }
    }
}

#[test]
fn variance_gamma_series_settles_within_1e_7() {
    // VG tails are heavy relative to its standard deviation, so ten of them
    // leave about 3e-8 of truncation error at K = 0.8.
    let m = LevyModel::variance_gamma(0.0, 0.0, 1.0, 5.0, 5.0).unwrap();
    let (_, t) = risk_neutral_triplet(&MeasureSelector::esscher(0.0), &m, &cfg()).unwrap();
    let a = CosPricer::new(&t, 1.0, 0.0, &CosConfig::default(), &cfg()).unwrap();
    let b = CosPricer::new(&t, 1.0, 0.0, &CosConfig { truncation: 20.0, terms: 2048 }, &cfg()).unwrap();
    for k in [0.8, 1.0, 1.2] {
        assert!((a.call(k) - b.call(k)).abs() < 1e-7, "K={k}: {} vs {}", a.call(k), b.call(k));
    }
}
