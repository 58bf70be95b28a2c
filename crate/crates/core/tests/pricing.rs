use credit_contagion::mc::{estimate_bond_price, estimate_cds_legs, estimate_restricted_moment, McConfig};
use credit_contagion::{
    bond_price, bond_yield, cds_spread, discounted_default_payment, discounted_maturity_payment, first_to_default_spread,
    single_firm_price, single_firm_yield, BondContract, CdsContract, FirmParams, Flavor, NumericsConfig, PairModel,
};
use proptest::prelude::*;

fn firm(quality: f64, sigma: f64) -> FirmParams {
    FirmParams::from_credit_quality(quality, sigma, 0.0, 0.03, 100.0, 5.0).unwrap()
}

fn base(rho: f64) -> PairModel {
    PairModel::new(firm(2.0, 0.2), firm(2.0, 0.2), rho, 0.05, 5.0).unwrap()
}

fn bond(omega: f64) -> BondContract {
    BondContract::new(100.0, 5.0, omega).unwrap()
}

fn cds(recovery: f64, flavor: Flavor) -> CdsContract {
    CdsContract::new(100.0, 5.0, recovery, flavor).unwrap()
}

fn lite() -> McConfig {
    McConfig {
        paths: 100_000,
        steps_per_year: 100,
        ..McConfig::default()
    }
}

#[test]
fn base_case_price_reference() {
    // Same separate transcription as the survival references.
    let p = bond_price(&base(0.4), &bond(0.7), &NumericsConfig::default()).unwrap();
    assert!((p - 72.239_407_638_352_09).abs() < 1e-7, "{p}");
    let y = bond_yield(&base(0.4), &bond(0.7), &NumericsConfig::default()).unwrap();
    assert!((y - 0.065_036_895_365_010_09).abs() < 1e-10, "{y}");
}

#[test]
fn price_decomposition_bounds() {
    let cfg = NumericsConfig::default();
    let rf_bond = 100.0 * (-0.25f64).exp();
    for rho in [0.0, 0.4, 0.8] {
        let m = base(rho);
        let dmp = discounted_maturity_payment(&m, &bond(0.7), &cfg).unwrap();
        let ddp = discounted_default_payment(&m, &bond(0.7), &cfg).unwrap();
        assert!(dmp > 0.0 && ddp > 0.0);
        assert!(dmp + ddp <= rf_bond);
        assert!(bond_yield(&m, &bond(0.7), &cfg).unwrap() >= 0.05);
    }
}

#[test]
fn remote_default_limit() {
    let m = PairModel::new(firm(1e4, 0.2), firm(1e4, 0.2), 0.0, 0.05, 5.0).unwrap();
    let cfg = NumericsConfig::default();
    let dmp = discounted_maturity_payment(&m, &bond(0.7), &cfg).unwrap();
    let rf_bond = 100.0 * (-0.25f64).exp();
    assert!((dmp / rf_bond - 1.0).abs() < 1e-4);
    assert!(discounted_default_payment(&m, &bond(0.7), &cfg).unwrap() < 1e-10);
}

#[test]
fn safe_partner_matches_isolated_firm() {
    let m = PairModel::new(firm(2.0, 0.2), firm(1e4, 0.2), 0.0, 0.05, 5.0).unwrap();
    let cfg = NumericsConfig::default();
    let two = bond_yield(&m, &bond(0.7), &cfg).unwrap();
    let one = single_firm_yield(&firm(2.0, 0.2), 0.05, &bond(0.7)).unwrap();
    assert!((two - one).abs() * 1e4 < 0.5, "{two} vs {one}");
}

#[test]
fn isolated_firm_yields_less() {
    let cfg = NumericsConfig::default();
    let none = single_firm_yield(&firm(2.0, 0.2), 0.05, &bond(0.7)).unwrap();
    for rho in [0.0, 0.2, 0.4, 0.6, 0.8] {
        assert!(none < bond_yield(&base(rho), &bond(0.7), &cfg).unwrap());
    }
}

#[test]
fn writedown_band_matches_simulation() {
    let m = base(0.4);
    let [b1, _] = m.log_barriers();
    let d = b1 - 0.7f64.ln();
    let cfg = NumericsConfig::default();
    let analytic = credit_contagion::restricted_exp_moment(&m, 5.0, 0.0, d, f64::INFINITY, &cfg).unwrap();
    let sim = estimate_restricted_moment(&m, 5.0, 0.0, d, f64::INFINITY, &lite()).unwrap();
    assert!(sim.z_score(analytic).abs() < 3.0, "{analytic} vs {sim:?}");
}

#[test]
fn isolated_firm_matches_simulation() {
    // A partner that cannot default leaves firm one on its own.
    let m = PairModel::new(firm(2.0, 0.2), firm(1e4, 0.2), 0.0, 0.05, 5.0).unwrap();
    let analytic = single_firm_price(&firm(2.0, 0.2), 0.05, &bond(0.7)).unwrap();
    let sim = estimate_bond_price(&m, &bond(0.7), &lite()).unwrap();
    assert!(sim.z_score(analytic).abs() < 3.0, "{analytic} vs {sim:?}");
}

#[test]
fn first_to_default_matches_simulation_at_negative_correlation() {
    let m = base(-0.5);
    let c = first_to_default_spread(&m, &cds(0.5, Flavor::First), &NumericsConfig::default()).unwrap();
    let legs = estimate_cds_legs(&m, &cds(0.5, Flavor::First), &lite()).unwrap();
    assert!(legs.spread.z_score(c).abs() < 3.0, "{c} vs {:?}", legs.spread);
}

#[test]
fn spreads_move_oppositely_with_correlation() {
    let cfg = NumericsConfig::default();
    let spread = |rho: f64, f: Flavor| cds_spread(&base(rho), &cds(0.5, f), &cfg).unwrap();
    let first: Vec<f64> = [-0.5, 0.0, 0.5].iter().map(|&r| spread(r, Flavor::First)).collect();
    let second: Vec<f64> = [-0.5, 0.0, 0.5].iter().map(|&r| spread(r, Flavor::Second)).collect();
    assert!(first.windows(2).all(|w| w[1] < w[0]), "{first:?}");
    assert!(second.windows(2).all(|w| w[1] > w[0]), "{second:?}");
    assert!(spread(0.5, Flavor::SecondContagion) > spread(0.5, Flavor::Second));
}

#[test]
fn weak_barrier_growth_sensitivity() {
    let cfg = NumericsConfig::default();
    // Firm value held at its base-case level while the barrier growth moves.
    let v0 = 2.0 * 100.0 * (-0.15f64).exp();
    let yield_at = |gamma: f64, rho: f64| {
        let f = FirmParams::new(v0, 0.2, 0.0, gamma, 100.0).unwrap();
        let m = PairModel::new(f, f, rho, 0.05, 5.0).unwrap();
        bond_yield(&m, &bond(0.7), &cfg).unwrap()
    };
    let rho_range = yield_at(0.03, 0.0) - yield_at(0.03, 0.8);
    let gammas: Vec<f64> = [0.01, 0.03, 0.05].iter().map(|&g| yield_at(g, 0.4)).collect();
    let gamma_range = gammas.iter().cloned().fold(f64::MIN, f64::max) - gammas.iter().cloned().fold(f64::MAX, f64::min);
    assert!(gamma_range < rho_range, "gamma range {gamma_range} vs rho range {rho_range}");
}

fn quick() -> ProptestConfig {
    ProptestConfig {
        cases: 16,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(quick())]

    #[test]
    fn second_never_exceeds_first(
        q1 in 1.2f64..4.0, q2 in 1.2f64..4.0, s2 in 0.12f64..0.35, rho in -0.9f64..0.9, t in 0.5f64..8.0,
    ) {
        let m = PairModel::new(firm(q1, 0.2), firm(q2, s2), rho, 0.05, 5.0).unwrap();
        let cfg = NumericsConfig::default();
        let c = CdsContract::new(1.0, t, 0.4, Flavor::First).unwrap();
        let first = cds_spread(&m, &c, &cfg).unwrap();
        let second = cds_spread(&m, &c.with_flavor(Flavor::Second), &cfg).unwrap();
        prop_assert!(second >= 0.0 && second <= first * (1.0 + 1e-12), "{} > {}", second, first);
    }

    #[test]
    fn spreads_linear_in_loss(r1 in 0.0f64..0.95, r2 in 0.0f64..0.95, rho in -0.8f64..0.8) {
        let m = base(rho);
        let cfg = NumericsConfig::default();
        for f in [Flavor::First, Flavor::Second] {
            let a = cds_spread(&m, &cds(r1, f), &cfg).unwrap();
            let b = cds_spread(&m, &cds(r2, f), &cfg).unwrap();
            prop_assert!((a * (1.0 - r2) - b * (1.0 - r1)).abs() <= 1e-13 * a.max(b));
        }
    }

    #[test]
    fn price_within_payoff_bounds(omega in 0.2f64..1.0, rho in 0.0f64..0.95, q in 1.05f64..5.0, s in 0.1f64..0.4) {
        let f = firm(q, s);
        let m = PairModel::new(f, f, rho, 0.05, 5.0).unwrap();
        let p = bond_price(&m, &bond(omega), &NumericsConfig::default()).unwrap();
        let rf_bond = 100.0 * (-0.25f64).exp();
        prop_assert!(p >= omega * rf_bond * (1.0 - 1e-12) && p <= rf_bond * (1.0 + 1e-12), "{}", p);
    }
}
