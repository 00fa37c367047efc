use ilrep_core::gbm::{bs_call, bs_call_delta, bs_put, bs_put_delta, expected_uil_gbm, GbmParams};
use ilrep_core::heston::{simulate, HestonParams, McConfig};
use ilrep_core::il_payoff::uil;
use ilrep_core::replication::{
    build_hedge_portfolio, replicate_expected_uil, replicated_payoff, uil_delta, OptionQuote, StrikeGrid,
};
use ilrep_core::{PriceInterval, Side, VanillaKind};

fn band(l: f64, u: f64) -> PriceInterval {
    PriceInterval::new(l, u).unwrap()
}

fn fig1() -> GbmParams {
    GbmParams::new(0.7, 30.0 / 365.0, 10.0).unwrap()
}

fn replicate_gbm(side: Side, b: &PriceInterval, gbm: &GbmParams, n: usize) -> f64 {
    let grid = StrikeGrid::uniform(b, n).unwrap();
    match side {
        Side::Right => replicate_expected_uil(side, b, |k| bs_call(gbm, k), &grid).unwrap(),
        Side::Left => replicate_expected_uil(side, b, |k| bs_put(gbm, k), &grid).unwrap(),
    }
}

#[test]
fn gbm_replication_matches_closed_form() {
    let gbm = fig1();
    for (side, b) in [(Side::Right, band(11.0, 14.0)), (Side::Right, band(11.0, 12.0)), (Side::Left, band(8.0, 9.0))] {
        let exact = expected_uil_gbm(side, &b, &gbm);
        let rep = replicate_gbm(side, &b, &gbm, 2001);
        assert!(((rep - exact) / exact).abs() < 1e-6, "{side}: {rep} vs {exact}");
    }
}

#[test]
fn pathwise_strip_is_second_order_without_split() {
    // The kink error at a single price depends on where it sits inside its
    // cell, so compare mean errors over many exit prices.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
    for (side, b) in [(Side::Right, band(11.0, 14.0)), (Side::Left, band(6.0, 9.0))] {
        let coarse = StrikeGrid::uniform(&b, 1001).unwrap();
        let fine = StrikeGrid::uniform(&b, 2001).unwrap();
        let (mut e1, mut e2) = (0.0, 0.0);
        for _ in 0..2000 {
            let p = rng.gen_range(0.8 * b.lower()..1.2 * b.upper());
            let exact = uil(side, &b, p);
            e1 += (replicated_payoff(side, &coarse, p) - exact).abs();
            e2 += (replicated_payoff(side, &fine, p) - exact).abs();
        }
        assert!(e2 / e1 <= 0.35, "{side}: {e1} -> {e2}");
    }
}

#[test]
fn split_grid_is_near_exact_at_the_kink() {
    let b = band(6.0, 9.0);
    for p in [6.5, 7.25, 8.999] {
        let grid = StrikeGrid::uniform_split_at(&b, 1001, p).unwrap();
        let plain = StrikeGrid::uniform(&b, 1001).unwrap();
        let exact = uil(Side::Left, &b, p);
        let split_err = (replicated_payoff(Side::Left, &grid, p) - exact).abs();
        let plain_err = (replicated_payoff(Side::Left, &plain, p) - exact).abs();
        assert!(split_err <= plain_err + 1e-15 && split_err < 1e-7, "{p}: {split_err} {plain_err}");
    }
}

#[test]
fn delta_matches_finite_difference() {
    let gbm = fig1();
    let h = 1e-4;
    for (side, b) in [(Side::Right, band(11.0, 14.0)), (Side::Left, band(6.0, 9.0)), (Side::Left, band(8.0, 9.0))] {
        let grid = StrikeGrid::uniform(&b, 2001).unwrap();
        let delta = match side {
            Side::Right => uil_delta(side, &b, |k| bs_call_delta(&gbm, k), &grid).unwrap(),
            Side::Left => uil_delta(side, &b, |k| bs_put_delta(&gbm, k), &grid).unwrap(),
        };
        let up = expected_uil_gbm(side, &b, &gbm.with_spot(10.0 + h).unwrap());
        let dn = expected_uil_gbm(side, &b, &gbm.with_spot(10.0 - h).unwrap());
        let fd = (up - dn) / (2.0 * h);
        assert!((delta - fd).abs() < 1e-6, "{side}: {delta} vs {fd}");
        match side {
            Side::Right => assert!(delta <= 0.0),
            Side::Left => assert!(delta >= 0.0),
        }
    }
}

#[test]
fn delta_vanishes_far_from_the_band() {
    let gbm = GbmParams::new(0.05, 1.0 / 365.0, 10.0).unwrap();
    let b = band(30.0, 40.0);
    let grid = StrikeGrid::uniform(&b, 101).unwrap();
    let delta = uil_delta(Side::Right, &b, |k| bs_call_delta(&gbm, k), &grid).unwrap();
    assert!(delta.abs() < 1e-15);
}

fn synthetic_chain(gbm: &GbmParams, b: &PriceInterval, n: usize, kind: VanillaKind) -> Vec<OptionQuote> {
    StrikeGrid::uniform(b, n)
        .unwrap()
        .strikes()
        .iter()
        .map(|&k| OptionQuote {
            kind,
            strike: k,
            maturity: gbm.horizon(),
            price: match kind {
                VanillaKind::Call => bs_call(gbm, k),
                VanillaKind::Put => bs_put(gbm, k),
            },
        })
        .collect()
}

#[test]
fn hedge_payoff_tracks_loss_and_improves_with_density() {
    let gbm = fig1();
    let b = band(11.0, 14.0);
    let grid: Vec<f64> = (0..=4000).map(|i| 5.0 + 20.0 * i as f64 / 4000.0).collect();
    let mut prev = f64::INFINITY;
    for n in [31, 61, 121] {
        let hedge = build_hedge_portfolio(Side::Right, &b, &synthetic_chain(&gbm, &b, n, VanillaKind::Call), gbm.horizon(), 1e-12).unwrap();
        let worst = grid.iter().map(|&p| (hedge.payoff(p) + uil(Side::Right, &b, p)).abs()).fold(0.0, f64::max);
        assert!(worst < prev);
        prev = worst;
    }
}

#[test]
fn hedge_cost_close_to_expected_loss_for_heston_paths() {
    // the strip bought at Monte Carlo prices costs what the loss is worth on those paths
    let p = HestonParams { mu: 0.0, kappa: 0.4, theta: 0.4, xi: 0.15, rho: -0.3, v0: 0.3, spot: 10.0 };
    let paths = simulate(&p, 0.5, &McConfig::new(50_000, 64, 4).unwrap()).unwrap();
    let b = band(6.0, 9.0);
    let strip = ilrep_core::heston::StrikeStrip::new(&paths).unwrap();
    let chain: Vec<OptionQuote> = StrikeGrid::uniform(&b, 301)
        .unwrap()
        .strikes()
        .iter()
        .map(|&k| OptionQuote { kind: VanillaKind::Put, strike: k, maturity: 0.5, price: strip.put(k) })
        .collect();
    let hedge = build_hedge_portfolio(Side::Left, &b, &chain, 0.5, 1e-9).unwrap();
    let direct = ilrep_core::heston::mc_expected_uil(&paths, Side::Left, &b).unwrap().value;
    assert!(((hedge.cost() + direct) / direct).abs() < 1e-4);
}
