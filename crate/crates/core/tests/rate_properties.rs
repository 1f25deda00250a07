//! Closed-form timing, error budgets, optimizer and baseline behavior.

use proptest::prelude::*;
use repeater_core::rate::{
    crossover_p1, dlcz_baseline, fidelity_dark, fidelity_twophoton, optimize_sps, t_tot_generic,
    t_tot_sps, Efficiencies, RateError,
};
use repeater_core::{RepeaterParams, SourceModel};

fn sps(length_km: f64, n: usize, beta_sq: f64) -> RepeaterParams {
    Efficiencies::default().sps_params(length_km, n, 0.95, beta_sq)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn budgets_match_direct_evaluation(
        p1 in 0.3f64..=1.0,
        beta_sq in 0.01f64..0.99,
        eta_m in 0.3f64..=1.0,
        eta_d in 0.3f64..=1.0,
        length_km in 500.0f64..3000.0,
        x in 0.0f64..1e-4,
    ) {
        let mut p = RepeaterParams::sps(length_km, 3);
        p.source = SourceModel::single_photon(p1, 0.0).unwrap();
        p.beta_sq = beta_sq;
        p.eta_m = eta_m;
        p.detector.eta_d = eta_d;
        let eta = eta_m * eta_d;
        let eta_t = (-(length_km / 8.0) / (2.0 * 22.0)).exp();
        let dark = 1.0
            - 16.0 * (25.0 / (beta_sq * p1) - (25.0 * eta - 1.0) * (1.0 / p1 - 1.0)) * x
                / (eta_t * eta_d);
        let two = 1.0 - 2.0 * (376.0 / p1 - (1.0 - beta_sq) * (395.0 * eta - 19.0)) * x / p1;
        let fd = fidelity_dark(&p, x).unwrap();
        let f2 = fidelity_twophoton(&p, x).unwrap();
        prop_assert!((fd - dark).abs() <= 1e-12 * dark.abs().max(1.0));
        prop_assert!((f2 - two).abs() <= 1e-12 * two.abs().max(1.0));
    }

    #[test]
    fn halving_a_probability_doubles_the_time(
        p0 in 0.01f64..=1.0,
        swaps in prop::collection::vec(0.01f64..=1.0, 0..5),
        p_pr in 0.01f64..=1.0,
        which in 0usize..7,
    ) {
        let t = t_tot_generic(p0, &swaps, p_pr, 100.0, 2e8).unwrap();
        let mut s = swaps.clone();
        let halved = match which % (swaps.len() + 2) {
            0 => t_tot_generic(p0 / 2.0, &s, p_pr, 100.0, 2e8),
            1 => t_tot_generic(p0, &s, p_pr / 2.0, 100.0, 2e8),
            k => { s[k - 2] /= 2.0; t_tot_generic(p0, &s, p_pr, 100.0, 2e8) }
        }.unwrap();
        prop_assert!((halved / t - 2.0).abs() < 1e-12);
    }
}

#[test]
fn all_success_time_is_the_prefactor() {
    let t = t_tot_generic(1.0, &[], 1.0, 125.0, 2e8).unwrap();
    assert!((t - 9.375e-4).abs() < 1e-15);
    assert!(matches!(
        t_tot_generic(0.0, &[0.5], 0.5, 125.0, 2e8),
        Err(RateError::Divergence(_))
    ));
}

#[test]
fn degenerate_splitters_diverge() {
    for b in [0.0, 1.0] {
        assert!(matches!(t_tot_sps(&sps(1000.0, 3, b)), Err(RateError::Divergence(_))));
    }
}

#[test]
fn budgets_are_exact_at_zero_and_affine() {
    let p = sps(1000.0, 3, 0.11);
    for f in [fidelity_dark, fidelity_twophoton] {
        assert_eq!(f(&p, 0.0).unwrap(), 1.0);
        let (a, b, c) = (f(&p, 1e-6).unwrap(), f(&p, 2e-6).unwrap(), f(&p, 3e-6).unwrap());
        assert!(a > b && b > c);
        assert!(((b - a) - (c - b)).abs() < 1e-14);
    }
}

#[test]
fn optimum_is_stable_against_splitter_perturbation() {
    let eff = Efficiencies::default();
    for &d in &[1000.0, 1500.0, 2000.0, 2500.0] {
        let opt = optimize_sps(d, &eff, 0.95).unwrap();
        for delta in [-0.02, 0.02] {
            let t = t_tot_sps(&sps(d, opt.n_opt, opt.beta_sq_opt + delta)).unwrap();
            assert!(t >= opt.t_tot);
        }
    }
}

#[test]
fn optimal_time_grows_with_distance() {
    let eff = Efficiencies::default();
    let times: Vec<f64> = (0..=14)
        .map(|k| optimize_sps(500.0 + 250.0 * k as f64, &eff, 0.95).unwrap().t_tot)
        .collect();
    assert!(times.windows(2).all(|w| w[1] > w[0]), "{times:?}");
}

#[test]
fn optimizer_rejects_distances_outside_its_range() {
    let eff = Efficiencies::default();
    assert!(optimize_sps(100.0, &eff, 0.95).is_err());
    assert!(optimize_sps(5000.0, &eff, 0.95).is_err());
}

#[test]
fn stricter_targets_force_smaller_pair_probabilities() {
    let eff = Efficiencies::default();
    let runs: Vec<_> = [0.85, 0.9, 0.95]
        .iter()
        .map(|&f| dlcz_baseline(1000.0, f, &eff).unwrap())
        .collect();
    for w in runs.windows(2) {
        assert!(w[1].p < w[0].p);
        assert!(w[1].t_tot > w[0].t_tot);
    }
    assert!(matches!(dlcz_baseline(1000.0, 1.0, &eff), Err(RateError::Infeasible { .. })));
    assert!(dlcz_baseline(1000.0, 0.4, &eff).is_err());
}

#[test]
fn long_chains_need_small_pair_probabilities() {
    let base = dlcz_baseline(2500.0, 0.9, &Efficiencies::default()).unwrap();
    assert!((base.p / 7e-4 - 1.0).abs() < 0.3, "p = {}", base.p);
}

#[test]
fn crossover_lies_in_the_same_band_at_every_distance() {
    let eff = Efficiencies::default();
    for &d in &[1000.0, 1500.0, 2000.0, 2500.0] {
        let c = crossover_p1(d, &eff, 0.9).unwrap();
        assert!(c.bracketed);
        assert!(c.p1 > 0.6 && c.p1 < 0.75, "{d} km: {}", c.p1);
    }
}
