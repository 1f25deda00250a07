#![allow(dead_code)]

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use repeater_core::{LinkOutcome, MixedState, ModeRegister, PureState};

pub const MODES: [&str; 3] = ["a", "b", "c"];

pub fn register(truncation: usize) -> ModeRegister {
    ModeRegister::new(MODES, truncation).unwrap()
}

/// Random pure state on three modes with at most `truncation` photons in
/// total, so that any splitter keeps it inside the truncated space.
pub fn pure_state(truncation: usize) -> impl Strategy<Value = PureState> {
    let reg = register(truncation);
    let dim = reg.dim();
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map(
        "degenerate amplitudes",
        move |raw| {
            let amps: Array1<C64> = raw
                .iter()
                .enumerate()
                .map(|(k, &(re, im))| {
                    if reg.excitations(k) <= reg.truncation() {
                        C64::new(re, im)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect();
            let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
            (norm > 1e-3).then(|| PureState::new(reg.clone(), amps).unwrap())
        },
    )
}

/// Random mixture of up to three such pure states.
pub fn mixed_state(truncation: usize) -> impl Strategy<Value = MixedState> {
    (
        prop::collection::vec(pure_state(truncation), 1..=3),
        prop::collection::vec(0.05f64..1.0, 3),
    )
        .prop_map(|(states, weights)| {
            let total: f64 = weights[..states.len()].iter().sum();
            let mut acc = states[0].to_mixed().scaled(weights[0] / total);
            for (s, w) in states.iter().zip(&weights).skip(1) {
                acc = acc.add(&s.to_mixed().scaled(w / total)).unwrap();
            }
            acc
        })
}

pub fn min_eigenvalue(state: &MixedState) -> f64 {
    let m = state.matrix();
    let n = m.nrows();
    let dm = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    dm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max_abs_diff(a: &MixedState, b: &MixedState) -> f64 {
    (a.matrix() - b.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `c |ψ⟩⟨ψ| + (1 - c) |0,0⟩⟨0,0|` with the symmetric entangled `ψ`.
pub fn vacuum_bearing_link(c: f64) -> LinkOutcome {
    let reg = ModeRegister::new(["l", "r"], 2).unwrap();
    let mut m = Array2::zeros((reg.dim(), reg.dim()));
    let v = reg.basis_index(&[0, 0]).unwrap();
    let s = [reg.basis_index(&[1, 0]).unwrap(), reg.basis_index(&[0, 1]).unwrap()];
    m[[v, v]] = C64::new(1.0 - c, 0.0);
    for &i in &s {
        for &j in &s {
            m[[i, j]] = C64::new(c / 2.0, 0.0);
        }
    }
    LinkOutcome::from_state(1.0, &MixedState::new(reg, m).unwrap()).unwrap()
}

/// Random state of two memories with at most one excitation, coherences
/// between vacuum and single sector included.
pub fn low_excitation_link() -> impl Strategy<Value = LinkOutcome> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6).prop_filter_map("degenerate", |raw| {
        let reg = ModeRegister::new(["l", "r"], 1).unwrap();
        let v1: Vec<C64> = raw[..3].iter().map(|&(a, b)| C64::new(a, b)).collect();
        let v2: Vec<C64> = raw[3..].iter().map(|&(a, b)| C64::new(a, b)).collect();
        let idx = [
            reg.basis_index(&[0, 0]).unwrap(),
            reg.basis_index(&[1, 0]).unwrap(),
            reg.basis_index(&[0, 1]).unwrap(),
        ];
        let mut m: Array2<C64> = Array2::zeros((reg.dim(), reg.dim()));
        for v in [&v1, &v2] {
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    m[[i, j]] += v[a] * v[b].conj();
                }
            }
        }
        let tr: f64 = idx.iter().map(|&i| m[[i, i]].re).sum();
        let single = m[[idx[1], idx[1]]].re + m[[idx[2], idx[2]]].re;
        if tr < 1e-3 || single / tr < 1e-2 {
            return None;
        }
        let state = MixedState::new(reg, m.mapv(|z| z / tr)).unwrap();
        Some(LinkOutcome::from_state(1.0, &state).unwrap())
    })
}
