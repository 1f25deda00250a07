//! Randomized invariants of the Fock-space engine.

mod common;

use common::*;
use proptest::prelude::*;
use repeater_core::{BeamSplitterSpec, DetectorModel, PureState};

const TOL: f64 = 1e-12;

fn cases() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn splitter_preserves_inner_products(
        a in pure_state(2),
        b in pure_state(2),
        beta_sq in 0.0f64..=1.0,
        pair in 0usize..3,
    ) {
        let spec = BeamSplitterSpec::from_transmission(beta_sq).unwrap();
        let (i, j) = (MODES[pair], MODES[(pair + 1) % 3]);
        let ua = a.apply_beamsplitter(i, j, &spec).unwrap();
        let ub = b.apply_beamsplitter(i, j, &spec).unwrap();
        prop_assert!((ua.norm_sqr() - 1.0).abs() < TOL);
        let before = a.inner(&b).unwrap();
        let after = ua.inner(&ub).unwrap();
        prop_assert!((before - after).norm() < TOL);
    }

    #[test]
    fn splitter_is_an_involution(a in pure_state(3), beta_sq in 0.0f64..=1.0) {
        let spec = BeamSplitterSpec::from_transmission(beta_sq).unwrap();
        let back = a
            .apply_beamsplitter("a", "c", &spec).unwrap()
            .apply_beamsplitter("a", "c", &spec).unwrap();
        prop_assert!((a.inner(&back).unwrap().norm() - 1.0).abs() < TOL);
    }

    #[test]
    fn mixed_splitter_is_a_physical_map(rho in mixed_state(2), beta_sq in 0.0f64..=1.0) {
        let spec = BeamSplitterSpec::from_transmission(beta_sq).unwrap();
        let out = rho.apply_beamsplitter("b", "a", &spec).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < TOL);
        prop_assert!(out.hermiticity_error() < TOL);
        prop_assert!(min_eigenvalue(&out) > -1e-10);
    }

    #[test]
    fn mixed_and_pure_splitters_agree(psi in pure_state(2), beta_sq in 0.0f64..=1.0) {
        let spec = BeamSplitterSpec::from_transmission(beta_sq).unwrap();
        let via_pure = psi.apply_beamsplitter("a", "b", &spec).unwrap().to_mixed();
        let via_mixed = psi.to_mixed().apply_beamsplitter("a", "b", &spec).unwrap();
        prop_assert!(max_abs_diff(&via_pure, &via_mixed) < TOL);
    }

    #[test]
    fn loss_composes_and_stays_physical(
        rho in mixed_state(2),
        e1 in 0.0f64..=1.0,
        e2 in 0.0f64..=1.0,
    ) {
        let twice = rho.apply_loss("a", e1).unwrap().apply_loss("a", e2).unwrap();
        let once = rho.apply_loss("a", e1 * e2).unwrap();
        prop_assert!(max_abs_diff(&twice, &once) < TOL);
        prop_assert!((once.trace() - 1.0).abs() < TOL);
        prop_assert!(min_eigenvalue(&once) > -1e-10);
    }

    #[test]
    fn measurement_is_complete(
        rho in mixed_state(2),
        eta_d in 0.0f64..=1.0,
        p_dark in 0.0f64..0.5,
        resolving in any::<bool>(),
    ) {
        let det = DetectorModel::new(eta_d, p_dark, resolving).unwrap();
        let outcomes = rho.measure_pnr("c", &det).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        prop_assert!((total - 1.0).abs() < TOL);
        for o in &outcomes {
            prop_assert!((o.state.trace() - 1.0).abs() < 1e-9);
            prop_assert!(min_eigenvalue(&o.state) > -1e-9);
        }
    }

    #[test]
    fn detector_efficiency_is_loss_before_an_ideal_detector(
        rho in mixed_state(2),
        eta_d in 0.0f64..=1.0,
    ) {
        let lossy = DetectorModel::new(eta_d, 0.0, true).unwrap();
        let direct = rho.measure_pnr_branches("b", &lossy).unwrap();
        let via_loss = rho
            .apply_loss("b", eta_d).unwrap()
            .measure_pnr_branches("b", &DetectorModel::ideal()).unwrap();
        prop_assert_eq!(direct.len(), via_loss.len());
        for ((c1, s1), (c2, s2)) in direct.iter().zip(&via_loss) {
            prop_assert_eq!(c1, c2);
            prop_assert!(max_abs_diff(s1, s2) < TOL);
        }
    }

    #[test]
    fn partial_trace_keeps_trace_and_positivity(rho in mixed_state(2)) {
        let reduced = rho.partial_trace(&["a", "c"]).unwrap();
        prop_assert!((reduced.trace() - 1.0).abs() < TOL);
        prop_assert!(min_eigenvalue(&reduced) > -1e-10);
    }

    #[test]
    fn coincidence_rate_of_two_photons(beta_sq in 0.0f64..=1.0) {
        let reg = register(2);
        let spec = BeamSplitterSpec::from_transmission(beta_sq).unwrap();
        let out = PureState::prepare(&reg, &[1, 1, 0]).unwrap()
            .apply_beamsplitter("a", "b", &spec).unwrap();
        let coincidence = out.amplitude(&[1, 1, 0]).unwrap().norm_sqr();
        prop_assert!((coincidence - (1.0 - 2.0 * beta_sq).powi(2)).abs() < TOL);
    }
}

#[test]
fn hong_ou_mandel_dip() {
    let reg = register(2);
    let out = PureState::prepare(&reg, &[1, 1, 0])
        .unwrap()
        .apply_beamsplitter("a", "b", &BeamSplitterSpec::balanced())
        .unwrap();
    assert!(out.amplitude(&[1, 1, 0]).unwrap().norm_sqr() < 1e-15);
    assert!((out.amplitude(&[2, 0, 0]).unwrap().norm_sqr() - 0.5).abs() < TOL);
    assert!((out.amplitude(&[0, 2, 0]).unwrap().norm_sqr() - 0.5).abs() < TOL);
}
