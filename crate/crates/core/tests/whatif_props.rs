use lanehash::whatif::{
    self, cost_increment, cpu_power_uplift, datacenter_power_uplift, predict_time, InstructionRatios, MeasuredProfile,
    PowerCostModel, RegisterWidth, WhatIfScenario,
};
use proptest::prelude::*;

fn width() -> impl Strategy<Value = RegisterWidth> {
    prop::sample::select(RegisterWidth::ALL.to_vec())
}

fn model(d: f64, mu: f64, s: f64, gamma: f64) -> PowerCostModel {
    PowerCostModel::new(d, mu, s, gamma).unwrap()
}

#[test]
fn published_power_chain() {
    let m = PowerCostModel::default();
    assert!((cpu_power_uplift(&m) - 1.8).abs() < 1e-12);
    assert!((datacenter_power_uplift(&m) - 1.488).abs() < 1e-12);
    assert_eq!(whatif::PowerSummary::of(&m).cost_increment_percent, 2.44);
    assert_eq!(
        whatif::PowerSummary::of(&m.with_gamma(0.2).unwrap()).cost_increment_percent,
        9.76
    );
}

#[test]
fn clock_change_scenarios_match_the_published_improvements() {
    let ratios = InstructionRatios::default();
    let s = WhatIfScenario::clock_change(2.8, 3.7, RegisterWidth::W128, &ratios).unwrap();
    let report = whatif::scenario_report(0.75, &[s], "test").unwrap();
    assert!((report.rows[0].normalized_time - 0.57).abs() <= 0.01);
    assert_eq!(report.rows[0].improvement_percent, 43.24);
    let report = whatif::scenario_report(0.71, &[s], "test").unwrap();
    assert!((report.rows[0].normalized_time - 0.54).abs() <= 0.01);
    assert!((report.rows[0].improvement_percent - 46.0).abs() <= 1.0);
}

#[test]
fn ratios_by_width() {
    assert_eq!(whatif::register_width_ratio(128).unwrap(), 1.0);
    assert_eq!(whatif::register_width_ratio(256).unwrap(), 0.543);
    assert_eq!(whatif::register_width_ratio(512).unwrap(), 0.453);
    assert!(whatif::register_width_ratio(1024).is_err());
    assert!(InstructionRatios::new(0.0, 0.5, "x").is_err());
    assert!(InstructionRatios::new(0.5, 1.5, "x").is_err());
    assert!(WhatIfScenario::with_ratio(1.0, RegisterWidth::W128, 0.5).is_err());
}

#[test]
fn out_of_range_parameters_are_rejected() {
    assert!(PowerCostModel::new(1.1, 2.0, 0.5, 0.05).is_err());
    assert!(PowerCostModel::new(0.8, 0.0, 0.5, 0.05).is_err());
    assert!(PowerCostModel::new(0.8, 2.0, -0.1, 0.05).is_err());
    assert!(PowerCostModel::new(0.8, 2.0, 0.5, 2.0).is_err());
    assert!(MeasuredProfile::new(1.0, 0.0, 1.0).is_err());
    assert!(WhatIfScenario::new(f64::NAN, RegisterWidth::W256, &InstructionRatios::default()).is_err());
    assert!(whatif::scenario_report(-1.0, &[], "x").is_err());
}

#[test]
fn rounding_is_half_even_at_two_decimals() {
    assert_eq!(whatif::round_percent(0.125), 0.12);
    assert_eq!(whatif::round_percent(0.375), 0.38);
    assert_eq!(whatif::round_percent(43.243243), 43.24);
}

proptest! {
    #[test]
    fn doubling_frequency_halves_time(i in 1e3f64..1e12, c in 1e3f64..1e12, f in 1e8f64..6e9, m in 0.1f64..8.0, w in width()) {
        let p = MeasuredProfile::new(i, c, f).unwrap();
        let r = InstructionRatios::default();
        let t1 = predict_time(&p, &WhatIfScenario::new(m, w, &r).unwrap());
        let t2 = predict_time(&p, &WhatIfScenario::new(2.0 * m, w, &r).unwrap());
        prop_assert_eq!(t2 * 2.0, t1);
        prop_assert!((p.time() - c / f).abs() <= 1e-12 * p.time());
        prop_assert!((p.ipc() - i / c).abs() <= 1e-12 * p.ipc());
    }

    #[test]
    fn time_is_linear_in_the_ratio(t in 1e-3f64..1e3, m in 0.1f64..8.0, rho in 0.01f64..1.0, k in 0.01f64..1.0) {
        let p = MeasuredProfile::from_seconds(t).unwrap();
        let a = predict_time(&p, &WhatIfScenario::with_ratio(m, RegisterWidth::W512, rho).unwrap());
        let b = predict_time(&p, &WhatIfScenario::with_ratio(m, RegisterWidth::W512, rho * k).unwrap());
        prop_assert!((b - a * k).abs() <= 1e-12 * a);
    }

    #[test]
    fn neutral_parameters_cost_nothing(d in 0.0f64..=1.0, s in 0.0f64..=1.0, gamma in 0.0f64..=1.0) {
        let neutral = model(d, 1.0, s, gamma);
        prop_assert!((cpu_power_uplift(&neutral) - 1.0).abs() < 1e-15);
        prop_assert!((datacenter_power_uplift(&neutral) - 1.0).abs() < 1e-15);
        prop_assert!(cost_increment(&neutral).abs() < 1e-15);
        prop_assert!(cost_increment(&model(0.0, 3.0, s, gamma)).abs() < 1e-15);
        prop_assert!(cost_increment(&model(d, 3.0, 0.0, gamma)).abs() < 1e-15);
    }

    // Monotonicity in d and s needs mu >= 1: below that, the dynamic share
    // shrinks power and more of it lowers the cost.
    #[test]
    fn cost_is_monotone_in_every_parameter(
        d in 0.0f64..=1.0, mu in 1.0f64..4.0, s in 0.0f64..=1.0, gamma in 0.0f64..=1.0, t in 0.0f64..=1.0, step in 0.0f64..=1.0,
    ) {
        let base = cost_increment(&model(d, mu, s, gamma));
        let up = |x: f64| x + (1.0 - x) * step;
        prop_assert!(cost_increment(&model(up(d), mu, s, gamma)) >= base - 1e-15);
        prop_assert!(cost_increment(&model(d, mu + t, s, gamma)) >= base - 1e-15);
        prop_assert!(cost_increment(&model(d, mu, up(s), gamma)) >= base - 1e-15);
        prop_assert!(cost_increment(&model(d, mu, s, up(gamma))) >= base - 1e-15);
    }

    #[test]
    fn measured_ratios_stay_in_range(w2 in 1u64..1 << 40, a in 0.01f64..=1.0, b in 0.01f64..=1.0) {
        let w4 = ((w2 as f64 * a) as u64).max(1);
        let w8 = ((w4 as f64 * b) as u64).max(1);
        let r = InstructionRatios::from_counts(w2, w4, w8).unwrap();
        prop_assert!(r.r256 > 0.0 && r.r256 <= 1.0);
        prop_assert!(r.r512 > 0.0 && r.r512 <= r.r256);
        prop_assert_eq!(r.ratio(RegisterWidth::W128), 1.0);
    }
}
