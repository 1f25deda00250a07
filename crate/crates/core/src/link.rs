//! Elementary links, entanglement swapping and final post-selection for the
//! single-photon-source and pair-source repeater protocols.
//!
//! Every stage is computed on the exact truncated Fock space of [`crate::fock`].
//! Link states always live on two memory modes named `left` and `right`.
//!
//! Heralding accepts exactly one total count on the two detectors behind a
//! balanced splitter. A count in the second detector produces the same
//! entangled state up to a π phase on the left memory, which is undone before
//! the two branches are summed.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ndarray::Array1;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::fock::{BeamSplitterSpec, DetectorModel, FockError, MixedState, ModeRegister, PureState};
use crate::rate;

pub const DEFAULT_L_ATT_KM: f64 = 22.0;
pub const DEFAULT_C_M_PER_S: f64 = 2e8;
pub const DEFAULT_ETA_M: f64 = 0.9;
pub const DEFAULT_ETA_D: f64 = 0.9;
pub const DEFAULT_P1: f64 = 0.95;
pub const DEFAULT_BETA_SQ: f64 = 0.11;
/// Deepest nesting level the state-level fold accepts.
pub const MAX_NESTING: usize = 5;

const LEFT: &str = "left";
const RIGHT: &str = "right";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("invalid repeater parameters: {0}")]
    InvalidParams(String),
    #[error("nesting level {0} exceeds the supported maximum of {MAX_NESTING}")]
    NestingTooDeep(usize),
    #[error("{0} has zero success probability")]
    NeverHeralds(&'static str),
}

pub type Result<T> = std::result::Result<T, LinkError>;

/// Emission statistics of the source at each end of an elementary link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceModel {
    /// Emits 0, 1 or 2 photons with probabilities `1 - p1 - p2`, `p1`, `p2`.
    SinglePhoton { p1: f64, p2: f64 },
    /// Two-mode pair source `(1 + √(p/2) a†a'†)|0⟩`. With `two_pair_terms`
    /// the `(p/2)|2,2⟩` term of the same source is kept as well.
    Pair { p: f64, two_pair_terms: bool },
}

impl SourceModel {
    pub fn single_photon(p1: f64, p2: f64) -> Result<Self> {
        let s = SourceModel::SinglePhoton { p1, p2 };
        s.validate()?;
        Ok(s)
    }

    pub fn pair(p: f64) -> Result<Self> {
        let s = SourceModel::Pair {
            p,
            two_pair_terms: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SourceModel::SinglePhoton { p1, p2 } => {
                if !(0.0..=1.0).contains(&p1) || !(0.0..=1.0).contains(&p2) || p1 + p2 > 1.0 + 1e-15
                {
                    return Err(LinkError::InvalidParams(format!(
                        "single-photon source needs p1, p2 >= 0 and p1 + p2 <= 1, got p1={p1}, p2={p2}"
                    )));
                }
            }
            SourceModel::Pair { p, .. } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(LinkError::InvalidParams(format!(
                        "pair source needs p in [0, 1], got {p}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_single_photon(&self) -> bool {
        matches!(self, SourceModel::SinglePhoton { .. })
    }

    /// Largest photon number the source puts into one mode.
    fn max_photons_per_mode(&self) -> usize {
        match *self {
            SourceModel::SinglePhoton { p2, .. } if p2 > 0.0 => 2,
            SourceModel::Pair {
                two_pair_terms: true,
                p,
            } if p > 0.0 => 2,
            _ => 1,
        }
    }
}

/// Emission state of one source on `register`, all other modes in vacuum.
///
/// Single-photon sources populate `local_mode` only (the local splitter is
/// applied afterwards). Pair sources emit into `local_mode` and `fiber_mode`.
pub fn emit(
    source: &SourceModel,
    register: &ModeRegister,
    local_mode: &str,
    fiber_mode: &str,
) -> Result<MixedState> {
    source.validate()?;
    if register.truncation() < 2 {
        return Err(FockError::Truncation {
            mode: local_mode.to_string(),
            occupation: 2,
            truncation: register.truncation(),
        }
        .into());
    }
    let local = register.mode_index(local_mode)?;
    let fiber = register.mode_index(fiber_mode)?;
    let occupation = |n_local: usize, n_fiber: usize| {
        let mut occ = vec![0; register.num_modes()];
        occ[local] = n_local;
        occ[fiber] = n_fiber;
        occ
    };
    match *source {
        SourceModel::SinglePhoton { p1, p2 } => Ok(MixedState::from_populations(
            register,
            &[
                (occupation(0, 0), (1.0 - p1 - p2).max(0.0)),
                (occupation(1, 0), p1),
                (occupation(2, 0), p2),
            ],
        )?),
        SourceModel::Pair { p, two_pair_terms } => {
            let mut amps = Array1::zeros(register.dim());
            amps[register.basis_index(&occupation(0, 0))?] = C64::new(1.0, 0.0);
            amps[register.basis_index(&occupation(1, 1))?] = C64::new((p / 2.0).sqrt(), 0.0);
            if two_pair_terms {
                amps[register.basis_index(&occupation(2, 2))?] = C64::new(p / 2.0, 0.0);
            }
            Ok(PureState::new(register.clone(), amps)?.to_mixed())
        }
    }
}

/// Full configuration of a homogeneous repeater chain.
#[derive(Clone, Debug, PartialEq)]
pub struct RepeaterParams {
    pub length_km: f64,
    pub nesting: usize,
    pub l_att_km: f64,
    pub c_m_per_s: f64,
    pub eta_m: f64,
    /// Detectors at the elementary-link stations. Swapping uses the same
    /// efficiency with [`Self::swap_p_dark`].
    pub detector: DetectorModel,
    pub swap_p_dark: f64,
    /// Transmission of the local splitter (single-photon sources only).
    pub beta_sq: f64,
    pub source: SourceModel,
}

impl RepeaterParams {
    /// Single-photon-source chain with the reference efficiencies.
    pub fn sps(length_km: f64, nesting: usize) -> Self {
        Self {
            length_km,
            nesting,
            l_att_km: DEFAULT_L_ATT_KM,
            c_m_per_s: DEFAULT_C_M_PER_S,
            eta_m: DEFAULT_ETA_M,
            detector: DetectorModel {
                eta_d: DEFAULT_ETA_D,
                p_dark: 0.0,
                number_resolving: true,
            },
            swap_p_dark: 0.0,
            beta_sq: DEFAULT_BETA_SQ,
            source: SourceModel::SinglePhoton {
                p1: DEFAULT_P1,
                p2: 0.0,
            },
        }
    }

    /// Pair-source chain with the reference efficiencies.
    pub fn dlcz(length_km: f64, nesting: usize, p: f64) -> Self {
        Self {
            source: SourceModel::Pair {
                p,
                two_pair_terms: false,
            },
            ..Self::sps(length_km, nesting)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(LinkError::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        positive("length", self.length_km)?;
        positive("attenuation length", self.l_att_km)?;
        positive("fiber light speed", self.c_m_per_s)?;
        if !(0.0..=1.0).contains(&self.eta_m) {
            return Err(LinkError::InvalidParams(format!(
                "memory efficiency must lie in [0, 1], got {}",
                self.eta_m
            )));
        }
        self.detector.validate()?;
        self.swap_detector().validate()?;
        if self.source.is_single_photon() && !(self.beta_sq > 0.0 && self.beta_sq < 1.0) {
            return Err(LinkError::InvalidParams(format!(
                "beta^2 must lie in (0, 1), got {}",
                self.beta_sq
            )));
        }
        self.source.validate()
    }

    /// Elementary link length `L0 = L / 2^n`.
    pub fn link_length_km(&self) -> f64 {
        self.length_km / 2f64.powi(self.nesting as i32)
    }

    /// Fiber transmission to the central station, `exp(-L0 / (2 L_att))`.
    pub fn eta_t(&self) -> f64 {
        (-self.link_length_km() / (2.0 * self.l_att_km)).exp()
    }

    /// Combined read-out efficiency `η_m η_d`.
    pub fn eta(&self) -> f64 {
        self.eta_m * self.detector.eta_d
    }

    pub fn alpha_sq(&self) -> f64 {
        1.0 - self.beta_sq
    }

    pub fn swap_detector(&self) -> DetectorModel {
        DetectorModel {
            p_dark: self.swap_p_dark,
            ..self.detector
        }
    }
}

/// Populations of a two-memory state by total excitation number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcitationWeights {
    pub vacuum: f64,
    pub single: f64,
    /// Two or more excitations.
    pub double: f64,
}

/// Heralded state of two memories and the probability of the herald.
#[derive(Clone, Debug)]
pub struct LinkOutcome {
    pub p_success: f64,
    pub state: MixedState,
    pub weights: ExcitationWeights,
    /// Fidelity of the one-excitation sector with `(|0,1⟩ + |1,0⟩)/√2`.
    pub f_single: f64,
}

impl LinkOutcome {
    /// Wraps a normalized two-mode state; the modes are renamed `left`/`right`.
    pub fn from_state(p_success: f64, state: &MixedState) -> Result<Self> {
        let state = compact(&state.relabeled(&[LEFT, RIGHT])?)?;
        let pops = state.excitation_populations();
        let weights = ExcitationWeights {
            vacuum: pops[0],
            single: pops.get(1).copied().unwrap_or(0.0),
            double: pops.iter().skip(2).sum(),
        };
        let overlap = state.fidelity(&entangled_pair(state.register())?)?;
        let f_single = if weights.single > 0.0 {
            overlap / weights.single
        } else {
            0.0
        };
        Ok(Self {
            p_success,
            state,
            weights,
            f_single,
        })
    }

    pub fn max_occupation(&self) -> usize {
        let l = self.state.max_occupation(LEFT).unwrap_or(0);
        let r = self.state.max_occupation(RIGHT).unwrap_or(0);
        l.max(r)
    }
}

/// `(|0,1⟩ + |1,0⟩)/√2` on a two-mode register.
fn entangled_pair(register: &ModeRegister) -> Result<PureState> {
    let mut amps = Array1::zeros(register.dim());
    amps[register.basis_index(&[0, 1])?] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[register.basis_index(&[1, 0])?] = C64::new(FRAC_1_SQRT_2, 0.0);
    Ok(PureState::new(register.clone(), amps)?)
}

/// Smallest register (cutoff at least 2) that holds all population.
fn compact(state: &MixedState) -> Result<MixedState> {
    let occ = state
        .register()
        .modes()
        .iter()
        .map(|m| state.max_occupation(m))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let t = occ.into_iter().max().unwrap_or(0).max(2);
    Ok(state.with_truncation(t)?)
}

/// All joint outcomes `(count_1, count_2, unnormalized state)` of two detectors.
fn detection_branches(
    state: &MixedState,
    first: &str,
    second: &str,
    detector: &DetectorModel,
) -> Result<Vec<(usize, usize, MixedState)>> {
    let mut out = Vec::new();
    for (c1, s1) in state.measure_pnr_branches(first, detector)? {
        for (c2, s2) in s1.measure_pnr_branches(second, detector)? {
            out.push((c1, c2, s2));
        }
    }
    Ok(out)
}

/// Unnormalized state conditioned on exactly one count in total, with the
/// second detector's phase flip on `flip_mode` undone. Its trace is the
/// herald probability.
fn herald_single(
    state: &MixedState,
    first: &str,
    second: &str,
    detector: &DetectorModel,
    flip_mode: &str,
) -> Result<MixedState> {
    let mut acc: Option<MixedState> = None;
    for (c1, c2, s) in detection_branches(state, first, second, detector)? {
        let s = match (c1, c2) {
            (1, 0) => s,
            (0, 1) => s.apply_phase(flip_mode, PI)?,
            _ => continue,
        };
        acc = Some(match acc {
            Some(a) => a.add(&s)?,
            None => s,
        });
    }
    Ok(acc.expect("both single-count branches are always present"))
}

/// Four-mode state `(a, a', b, b')` just before the central detectors; `a'`
/// and `b'` hold the outputs of the central splitter.
fn station_state(params: &RepeaterParams) -> Result<MixedState> {
    params.validate()?;
    // both fiber modes can end up in one output port of the central splitter
    let t = 2 * params.source.max_photons_per_mode();
    let half = |mem: &str, fiber: &str| -> Result<MixedState> {
        let reg = ModeRegister::new([mem, fiber], t)?;
        let mut s = emit(&params.source, &reg, mem, fiber)?;
        if params.source.is_single_photon() {
            let bs = BeamSplitterSpec::from_transmission(params.beta_sq)?;
            s = s.apply_beamsplitter(mem, fiber, &bs)?;
        }
        Ok(s)
    };
    let eta_t = params.eta_t();
    let state = half("a", "a'")?
        .tensor(&half("b", "b'")?)?
        .apply_loss("a'", eta_t)?
        .apply_loss("b'", eta_t)?
        .apply_beamsplitter("a'", "b'", &BeamSplitterSpec::balanced())?;
    Ok(state)
}

/// Runs one elementary link: emission at both ends, local splitters (single
/// photons only), fiber loss, central balanced splitter and the two detectors,
/// conditioned on exactly one count.
pub fn elementary_link(params: &RepeaterParams) -> Result<LinkOutcome> {
    let station = station_state(params)?;
    let heralded = herald_single(&station, "a'", "b'", &params.detector, "a")?;
    let p = heralded.trace();
    if p <= 0.0 {
        return Err(LinkError::NeverHeralds("elementary link"));
    }
    LinkOutcome::from_state(p, &heralded.scaled(1.0 / p))
}

/// Probabilities of 0, 1 and ≥2 total counts at the elementary-link station.
pub fn elementary_count_distribution(params: &RepeaterParams) -> Result<[f64; 3]> {
    let station = station_state(params)?;
    let mut dist = [0.0; 3];
    for (c1, c2, s) in detection_branches(&station, "a'", "b'", &params.detector)? {
        dist[(c1 + c2).min(2)] += s.trace();
    }
    Ok(dist)
}

/// Entanglement swapping between the inner memories of two links.
///
/// The inner memories are read out with efficiency `eta_m`, interfered on a
/// balanced splitter and counted; exactly one count heralds success. Returns
/// the success probability and the state of the two outer memories.
pub fn swap(
    left: &LinkOutcome,
    right: &LinkOutcome,
    eta_m: f64,
    detector: &DetectorModel,
) -> Result<(f64, LinkOutcome)> {
    let inner = left.state.max_occupation(RIGHT)? + right.state.max_occupation(LEFT)?;
    let t = left
        .state
        .register()
        .truncation()
        .max(right.state.register().truncation())
        .max(inner);
    let l = left.state.with_truncation(t)?.relabeled(&["A", "B1"])?;
    let r = right.state.with_truncation(t)?.relabeled(&["B2", "C"])?;
    let joint = l
        .tensor(&r)?
        .apply_loss("B1", eta_m)?
        .apply_loss("B2", eta_m)?
        .apply_beamsplitter("B1", "B2", &BeamSplitterSpec::balanced())?;
    let heralded = herald_single(&joint, "B1", "B2", detector, "A")?;
    let p = heralded.trace();
    if p <= 0.0 {
        return Err(LinkError::NeverHeralds("entanglement swapping"));
    }
    Ok((p, LinkOutcome::from_state(p, &heralded.scaled(1.0 / p))?))
}

/// Outcome of the final two-chain post-selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PostSelection {
    pub p_pr: f64,
    /// Fidelity with `(|1_A1 1_Z2⟩ + |1_A2 1_Z1⟩)/√2`; 0 when nothing passes.
    pub fidelity: f64,
}

/// Final post-selection on two parallel end-to-end links `A1–Z1` and
/// `A2–Z2`: every memory is read out with efficiency `eta` and only events
/// with exactly one excitation at each location are kept.
pub fn postselect(link1: &LinkOutcome, link2: &LinkOutcome, eta: f64) -> Result<PostSelection> {
    let t = link1
        .state
        .register()
        .truncation()
        .max(link2.state.register().truncation());
    let s1 = link1.state.with_truncation(t)?.relabeled(&["A1", "Z1"])?;
    let s2 = link2.state.with_truncation(t)?.relabeled(&["A2", "Z2"])?;
    let mut joint = s1.tensor(&s2)?;
    for m in ["A1", "Z1", "A2", "Z2"] {
        joint = joint.apply_loss(m, eta)?;
    }
    let reg = joint.register().clone();
    let mut p_pr = 0.0;
    for k in 0..reg.dim() {
        let occ = reg.occupations(k);
        if occ[0] + occ[2] == 1 && occ[1] + occ[3] == 1 {
            p_pr += joint.matrix()[[k, k]].re;
        }
    }
    let mut amps = Array1::zeros(reg.dim());
    amps[reg.basis_index(&[1, 0, 0, 1])?] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[reg.basis_index(&[0, 1, 1, 0])?] = C64::new(FRAC_1_SQRT_2, 0.0);
    let target = PureState::new(reg, amps)?;
    let fidelity = if p_pr > 0.0 {
        joint.fidelity(&target)? / p_pr
    } else {
        0.0
    };
    Ok(PostSelection { p_pr, fidelity })
}

/// Per-level success probabilities, final fidelity and total time of a chain.
#[derive(Clone, Debug)]
pub struct ChainReport {
    /// `P_0` (elementary link) followed by `P_1..P_n` (swap levels).
    pub p: Vec<f64>,
    pub p_pr: f64,
    pub fidelity: f64,
    pub t_tot: f64,
    /// Link state after each level, index 0 = elementary link.
    pub levels: Vec<LinkOutcome>,
}

/// Folds one representative link through all swap levels and the final
/// post-selection, then evaluates the total time from the level probabilities.
pub fn chain_analysis(params: &RepeaterParams) -> Result<ChainReport> {
    params.validate()?;
    if params.nesting > MAX_NESTING {
        return Err(LinkError::NestingTooDeep(params.nesting));
    }
    let mut link = elementary_link(params)?;
    let mut p = vec![link.p_success];
    let mut levels = vec![link.clone()];
    let swap_detector = params.swap_detector();
    for _ in 0..params.nesting {
        let (p_swap, next) = swap(&link, &link, params.eta_m, &swap_detector)?;
        p.push(p_swap);
        levels.push(next.clone());
        link = next;
    }
    let post = postselect(&link, &link, params.eta())?;
    if post.p_pr <= 0.0 {
        return Err(LinkError::NeverHeralds("post-selection"));
    }
    let t_tot = rate::t_tot_generic(
        p[0],
        &p[1..],
        post.p_pr,
        params.link_length_km(),
        params.c_m_per_s,
    )
    .map_err(|e| LinkError::InvalidParams(e.to_string()))?;
    Ok(ChainReport {
        p,
        p_pr: post.p_pr,
        fidelity: post.fidelity,
        t_tot,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ideal_sps(beta_sq: f64) -> RepeaterParams {
        RepeaterParams {
            detector: DetectorModel::ideal(),
            eta_m: 1.0,
            beta_sq,
            source: SourceModel::SinglePhoton { p1: 1.0, p2: 0.0 },
            ..RepeaterParams::sps(1000.0, 3)
        }
    }

    fn pure_link(weights: (f64, f64)) -> LinkOutcome {
        let reg = ModeRegister::new([LEFT, RIGHT], 2).unwrap();
        let psi = entangled_pair(&reg).unwrap().to_mixed();
        let state = MixedState::vacuum(&reg)
            .scaled(weights.0)
            .add(&psi.scaled(weights.1))
            .unwrap();
        LinkOutcome::from_state(1.0, &state).unwrap()
    }

    #[test]
    fn emit_examples() {
        let reg = ModeRegister::new(["a", "a'"], 2).unwrap();
        let pair = emit(&SourceModel::pair(0.003).unwrap(), &reg, "a", "a'").unwrap();
        let ratio = pair.population(&[1, 1]).unwrap() / pair.population(&[0, 0]).unwrap();
        assert_abs_diff_eq!(ratio, 0.0015, epsilon = 1e-15);

        let ideal = emit(&SourceModel::single_photon(1.0, 0.0).unwrap(), &reg, "a", "a'").unwrap();
        assert_eq!(ideal, PureState::prepare(&reg, &[1, 0]).unwrap().to_mixed());

        let lossy = emit(&SourceModel::single_photon(0.95, 0.0).unwrap(), &reg, "a", "a'").unwrap();
        assert_abs_diff_eq!(lossy.population(&[0, 0]).unwrap(), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(lossy.population(&[1, 0]).unwrap(), 0.95, epsilon = 1e-15);
    }

    #[test]
    fn emit_needs_cutoff_two() {
        let reg = ModeRegister::new(["a", "a'"], 1).unwrap();
        let err = emit(&SourceModel::pair(0.01).unwrap(), &reg, "a", "a'").unwrap_err();
        assert!(matches!(err, LinkError::Fock(FockError::Truncation { .. })));
    }

    #[test]
    fn source_validation() {
        assert!(SourceModel::single_photon(0.8, 0.3).is_err());
        assert!(SourceModel::pair(-0.1).is_err());
    }

    #[test]
    fn ideal_sps_link_has_no_double_excitation() {
        let link = elementary_link(&ideal_sps(0.11)).unwrap();
        assert!(link.weights.double.abs() <= 1e-12);
        assert_abs_diff_eq!(link.f_single, 1.0, epsilon = 1e-12);
        // first order in the transmission
        let e = RepeaterParams::sps(1000.0, 3).eta_t();
        assert_abs_diff_eq!(link.weights.vacuum, 0.11, epsilon = 0.11 * e);
    }

    #[test]
    fn pair_link_carries_double_excitations() {
        let params = RepeaterParams {
            detector: DetectorModel::ideal(),
            ..RepeaterParams::dlcz(1000.0, 3, 0.003)
        };
        let link = elementary_link(&params).unwrap();
        assert!(link.weights.double > 1e-4);
        assert!(link.weights.double < 3e-3);
    }

    #[test]
    fn swap_of_pure_pairs() {
        let link = pure_link((0.0, 1.0));
        let (p, out) = swap(&link, &link, 1.0, &DetectorModel::ideal()).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(out.f_single, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.weights.single, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn swap_with_vacuum_side_yields_vacuum() {
        let (p, out) = swap(
            &pure_link((1.0, 0.0)),
            &pure_link((0.0, 1.0)),
            1.0,
            &DetectorModel::ideal(),
        )
        .unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(out.weights.vacuum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn postselect_examples() {
        let good = pure_link((0.0, 1.0));
        let post = postselect(&good, &good, 1.0).unwrap();
        assert_abs_diff_eq!(post.fidelity, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(post.p_pr, 0.5, epsilon = 1e-12);

        let vac = pure_link((1.0, 0.0));
        assert_eq!(postselect(&vac, &good, 1.0).unwrap().p_pr, 0.0);

        // |1,1⟩ only passes together with a vacuum partner (or loss)
        let reg = ModeRegister::new([LEFT, RIGHT], 2).unwrap();
        let noisy = pure_link((0.3, 0.7))
            .state
            .mix(&PureState::prepare(&reg, &[1, 1]).unwrap().to_mixed(), 0.05)
            .unwrap();
        let noisy = LinkOutcome::from_state(1.0, &noisy).unwrap();
        assert!(postselect(&noisy, &noisy, 1.0).unwrap().fidelity < 1.0);
    }

    #[test]
    fn nesting_limit() {
        let err = chain_analysis(&RepeaterParams::sps(1000.0, 6)).unwrap_err();
        assert_eq!(err, LinkError::NestingTooDeep(6));
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = RepeaterParams::sps(1000.0, 3);
        p.beta_sq = 1.0;
        assert!(matches!(elementary_link(&p), Err(LinkError::InvalidParams(_))));
        let mut p = RepeaterParams::sps(1000.0, 3);
        p.eta_m = 1.2;
        assert!(p.validate().is_err());
    }
}
