//! Closed-form waiting times and fidelity budgets, the single-photon-source
//! optimizer and the pair-source baseline.
//!
//! Units: distances in km, light speed in m/s, times in seconds.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fock::DetectorModel;
use crate::link::{self, ChainReport, LinkError, RepeaterParams, SourceModel, MAX_NESTING};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("{0} is zero, the waiting time diverges")]
    Divergence(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("target fidelity {target} is unreachable: {reason}")]
    Infeasible { target: f64, reason: String },
    #[error("closed-form fidelity budgets are stated for 8 links (n = 3), got n = {0}")]
    UnsupportedNesting(usize),
    #[error(transparent)]
    Link(#[from] LinkError),
}

pub type Result<T> = std::result::Result<T, RateError>;

/// One elementary-link communication time, `L0 / c`, in seconds.
pub fn slot_duration(l0_km: f64, c_m_per_s: f64) -> f64 {
    l0_km * 1e3 / c_m_per_s
}

fn check_level_probability(name: &'static str, p: f64) -> Result<()> {
    if p == 0.0 {
        return Err(RateError::Divergence(name));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(RateError::InvalidParameter(format!(
            "{name} must lie in (0, 1], got {p}"
        )));
    }
    Ok(())
}

/// Mean waiting time in units of `L0 / c`:
/// `(3/2)^(n+1) / (P0 · P1 ⋯ Pn · P_pr)` with `n = swaps.len()`.
pub fn t_tot_slots(p0: f64, swaps: &[f64], p_pr: f64) -> Result<f64> {
    check_level_probability("P0", p0)?;
    for &p in swaps {
        check_level_probability("swap success probability", p)?;
    }
    check_level_probability("P_pr", p_pr)?;
    let n = swaps.len();
    let product: f64 = p0 * swaps.iter().product::<f64>() * p_pr;
    Ok(1.5f64.powi(n as i32 + 1) / product)
}

/// Mean time to distribute one post-selected pair, in seconds.
pub fn t_tot_generic(
    p0: f64,
    swaps: &[f64],
    p_pr: f64,
    l0_km: f64,
    c_m_per_s: f64,
) -> Result<f64> {
    Ok(t_tot_slots(p0, swaps, p_pr)? * slot_duration(l0_km, c_m_per_s))
}

/// Level probabilities of the single-photon-source chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainProbabilities {
    pub p0: f64,
    pub swaps: Vec<f64>,
    pub p_pr: f64,
}

fn require_sps(params: &RepeaterParams) -> Result<(f64, f64)> {
    match params.source {
        SourceModel::SinglePhoton { p1, p2 } => {
            if params.beta_sq <= 0.0 || params.beta_sq >= 1.0 {
                return Err(RateError::Divergence("beta^2 (1 - beta^2)"));
            }
            params.validate()?;
            Ok((p1, p2))
        }
        SourceModel::Pair { .. } => Err(RateError::InvalidParameter(
            "closed forms apply to single-photon sources only".into(),
        )),
    }
}

/// First-order level probabilities for ideal single-photon sources.
///
/// A link at level `k` is `c_k |ψ⟩⟨ψ| + (1 - c_k) |0⟩⟨0|` with
/// `c_0 = p1 α²` and `c_k = c_{k-1} / (2 - c_{k-1} η)`. Swapping succeeds with
/// `η c (1 - c η / 2)` and post-selection with `c_n² η² / 2`.
pub fn sps_chain_probabilities(params: &RepeaterParams) -> Result<ChainProbabilities> {
    let (p1, _) = require_sps(params)?;
    let eta = params.eta();
    let p0 = 2.0 * p1 * params.beta_sq * params.eta_t() * params.detector.eta_d;
    let mut c = p1 * params.alpha_sq();
    let mut swaps = Vec::with_capacity(params.nesting);
    for _ in 0..params.nesting {
        swaps.push(eta * c * (1.0 - c * eta / 2.0));
        c /= 2.0 - c * eta;
    }
    Ok(ChainProbabilities {
        p0,
        swaps,
        p_pr: c * c * eta * eta / 2.0,
    })
}

/// Closed-form total time of the single-photon-source chain.
pub fn t_tot_sps(params: &RepeaterParams) -> Result<f64> {
    let (p1, _) = require_sps(params)?;
    let n = params.nesting as i32;
    let eta = params.eta();
    let (alpha_sq, beta_sq) = (params.alpha_sq(), params.beta_sq);
    let numerator: f64 = (1..=n)
        .map(|k| {
            let two_k = 2f64.powi(k);
            two_k - (two_k - 1.0) * p1 * alpha_sq * eta
        })
        .product();
    let denominator = params.detector.eta_d
        * params.eta_t()
        * p1.powi(n + 3)
        * beta_sq
        * alpha_sq.powi(n + 2)
        * eta.powi(n + 2);
    if denominator == 0.0 {
        return Err(RateError::Divergence("the success probability"));
    }
    Ok(3f64.powi(n + 1) / 2.0
        * slot_duration(params.link_length_km(), params.c_m_per_s)
        * numerator
        / denominator)
}

/// Coefficient `k` in `F = 1 - k · p_dark` for 8 links.
pub fn dark_count_slope(params: &RepeaterParams) -> Result<f64> {
    let (p1, _) = require_sps(params)?;
    if params.nesting != 3 {
        return Err(RateError::UnsupportedNesting(params.nesting));
    }
    let eta = params.eta();
    let bracket = 25.0 / (params.beta_sq * p1) - (25.0 * eta - 1.0) * (1.0 / p1 - 1.0);
    Ok(16.0 * bracket / (params.eta_t() * params.detector.eta_d))
}

/// Coefficient `k` in `F = 1 - k · p2` for 8 links.
pub fn two_photon_slope(params: &RepeaterParams) -> Result<f64> {
    let (p1, _) = require_sps(params)?;
    if params.nesting != 3 {
        return Err(RateError::UnsupportedNesting(params.nesting));
    }
    let eta = params.eta();
    Ok(2.0 * (376.0 / p1 - (1.0 - params.beta_sq) * (395.0 * eta - 19.0)) / p1)
}

/// Final fidelity with dark-count probability `p_dark` at the link stations.
///
/// Uses the first-order 8-link budget for `n = 3` and the state-level chain
/// for any other nesting level.
pub fn fidelity_dark(params: &RepeaterParams, p_dark: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p_dark) {
        return Err(RateError::InvalidParameter(format!(
            "p_dark must lie in [0, 1), got {p_dark}"
        )));
    }
    if params.nesting == 3 {
        return Ok(1.0 - dark_count_slope(params)? * p_dark);
    }
    oracle_fidelity_dark(params, p_dark)
}

/// Final fidelity with two-photon emission probability `p2` per source.
///
/// Same routing as [`fidelity_dark`].
pub fn fidelity_twophoton(params: &RepeaterParams, p2: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p2) {
        return Err(RateError::InvalidParameter(format!(
            "p2 must lie in [0, 1], got {p2}"
        )));
    }
    if params.nesting == 3 {
        return Ok(1.0 - two_photon_slope(params)? * p2);
    }
    oracle_fidelity_twophoton(params, p2)
}

pub fn oracle_fidelity_dark(params: &RepeaterParams, p_dark: f64) -> Result<f64> {
    let mut p = params.clone();
    p.detector.p_dark = p_dark;
    Ok(link::chain_analysis(&p)?.fidelity)
}

pub fn oracle_fidelity_twophoton(params: &RepeaterParams, p2: f64) -> Result<f64> {
    let (p1, _) = require_sps(params)?;
    let mut p = params.clone();
    p.source = SourceModel::single_photon(p1, p2)?;
    Ok(link::chain_analysis(&p)?.fidelity)
}

fn check_target(target: f64) -> Result<()> {
    if target >= 1.0 {
        return Err(RateError::Infeasible {
            target,
            reason: "a first-order budget reaches F = 1 only with a zero error parameter".into(),
        });
    }
    if !(target > 0.0) {
        return Err(RateError::InvalidParameter(format!(
            "target fidelity must lie in (0, 1), got {target}"
        )));
    }
    Ok(())
}

fn affine_threshold(slope: f64, target: f64, upper: f64, what: &str) -> Result<f64> {
    check_target(target)?;
    if slope <= 0.0 {
        return Err(RateError::Infeasible {
            target,
            reason: format!("the {what} budget does not decrease the fidelity"),
        });
    }
    let p = (1.0 - target) / slope;
    if p > upper {
        return Err(RateError::Infeasible {
            target,
            reason: format!("{what} threshold {p} exceeds its valid range"),
        });
    }
    Ok(p)
}

/// Largest `p_dark` keeping the 8-link fidelity at `target`.
pub fn p_dark_threshold(params: &RepeaterParams, target: f64) -> Result<f64> {
    affine_threshold(dark_count_slope(params)?, target, 1.0, "dark-count")
}

/// Largest `p2` keeping the 8-link fidelity at `target`.
pub fn p2_threshold(params: &RepeaterParams, target: f64) -> Result<f64> {
    let (p1, _) = require_sps(params)?;
    affine_threshold(two_photon_slope(params)?, target, 1.0 - p1, "two-photon")
}

/// Bisection in `log p` for the largest `p` in `[lo, hi]` with `f(p) >= target`,
/// assuming `f` decreases.
fn bisect_decreasing(
    f: impl Fn(f64) -> Result<f64>,
    target: f64,
    lo: f64,
    hi: f64,
    what: &str,
) -> Result<f64> {
    if f(lo)? < target {
        return Err(RateError::Infeasible {
            target,
            reason: format!("fidelity stays below target even at {what} = {lo:e}"),
        });
    }
    if f(hi)? >= target {
        return Ok(hi);
    }
    let (mut lo, mut hi) = (lo.ln(), hi.ln());
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if f(mid.exp())? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo.exp())
}

/// Dark-count threshold from the state-level chain at any nesting level.
pub fn p_dark_threshold_oracle(params: &RepeaterParams, target: f64) -> Result<f64> {
    check_target(target)?;
    bisect_decreasing(|p| oracle_fidelity_dark(params, p), target, 1e-12, 0.5, "p_dark")
}

/// Two-photon emission threshold from the state-level chain.
pub fn p2_threshold_oracle(params: &RepeaterParams, target: f64) -> Result<f64> {
    check_target(target)?;
    let (p1, _) = require_sps(params)?;
    let hi = (1.0 - p1).max(1e-12);
    bisect_decreasing(|p| oracle_fidelity_twophoton(params, p), target, 1e-12, hi, "p2")
}

/// Hardware figures shared by both protocols.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Efficiencies {
    pub eta_m: f64,
    pub eta_d: f64,
    pub l_att_km: f64,
    pub c_m_per_s: f64,
}

impl Default for Efficiencies {
    fn default() -> Self {
        Self {
            eta_m: link::DEFAULT_ETA_M,
            eta_d: link::DEFAULT_ETA_D,
            l_att_km: link::DEFAULT_L_ATT_KM,
            c_m_per_s: link::DEFAULT_C_M_PER_S,
        }
    }
}

impl Efficiencies {
    pub fn sps_params(&self, length_km: f64, nesting: usize, p1: f64, beta_sq: f64) -> RepeaterParams {
        RepeaterParams {
            length_km,
            nesting,
            l_att_km: self.l_att_km,
            c_m_per_s: self.c_m_per_s,
            eta_m: self.eta_m,
            detector: DetectorModel {
                eta_d: self.eta_d,
                p_dark: 0.0,
                number_resolving: true,
            },
            swap_p_dark: 0.0,
            beta_sq,
            source: SourceModel::SinglePhoton { p1, p2: 0.0 },
        }
    }

    pub fn dlcz_params(&self, length_km: f64, nesting: usize, p: f64) -> RepeaterParams {
        RepeaterParams {
            source: SourceModel::Pair {
                p,
                two_pair_terms: false,
            },
            ..self.sps_params(length_km, nesting, link::DEFAULT_P1, link::DEFAULT_BETA_SQ)
        }
    }
}

/// Optimum of the single-photon-source protocol at one distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerformanceReport {
    pub t_tot: f64,
    pub n_opt: usize,
    pub beta_sq_opt: f64,
    /// Final fidelity of the optimum from the state-level chain.
    pub fidelity: f64,
}

pub const OPT_MIN_KM: f64 = 500.0;
pub const OPT_MAX_KM: f64 = 4000.0;
pub const BETA_SQ_GRID_STEP: f64 = 1e-3;

fn check_distance(length_km: f64) -> Result<()> {
    if !(OPT_MIN_KM..=OPT_MAX_KM).contains(&length_km) {
        return Err(RateError::InvalidParameter(format!(
            "distance must lie in [{OPT_MIN_KM}, {OPT_MAX_KM}] km, got {length_km}"
        )));
    }
    Ok(())
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// `(t_tot, n, beta_sq)` minimizing the closed-form time. Grid over
/// `n ∈ 1..=5` and `β²` in steps of [`BETA_SQ_GRID_STEP`], then a golden-section
/// refinement inside the winning grid cell. Ties keep the smallest `n`, then
/// the smallest `β²`.
fn sps_optimum(length_km: f64, eff: &Efficiencies, p1: f64) -> Result<(f64, usize, f64)> {
    let t = |n: usize, beta_sq: f64| t_tot_sps(&eff.sps_params(length_km, n, p1, beta_sq));
    let steps = (1.0 / BETA_SQ_GRID_STEP).round() as usize;
    let mut best: Option<(f64, usize, f64)> = None;
    for n in 1..=MAX_NESTING {
        for k in 1..steps {
            let beta_sq = k as f64 * BETA_SQ_GRID_STEP;
            let time = t(n, beta_sq)?;
            if best.is_none_or(|(bt, _, _)| time < bt) {
                best = Some((time, n, beta_sq));
            }
        }
    }
    let (grid_t, n, grid_b) = best.expect("grid is nonempty");
    let lo = (grid_b - BETA_SQ_GRID_STEP).max(BETA_SQ_GRID_STEP / 10.0);
    let hi = (grid_b + BETA_SQ_GRID_STEP).min(1.0 - BETA_SQ_GRID_STEP / 10.0);
    let refined = golden_section(|b| t(n, b).unwrap_or(f64::INFINITY), lo, hi);
    let refined_t = t(n, refined)?;
    Ok(if refined_t < grid_t {
        (refined_t, n, refined)
    } else {
        (grid_t, n, grid_b)
    })
}

/// Optimal nesting level and splitter transmission for the single-photon protocol.
pub fn optimize_sps(length_km: f64, eff: &Efficiencies, p1: f64) -> Result<PerformanceReport> {
    check_distance(length_km)?;
    let (t_tot, n_opt, beta_sq_opt) = sps_optimum(length_km, eff, p1)?;
    let fidelity = link::chain_analysis(&eff.sps_params(length_km, n_opt, p1, beta_sq_opt))?.fidelity;
    Ok(PerformanceReport {
        t_tot,
        n_opt,
        beta_sq_opt,
        fidelity,
    })
}

/// Pair-source protocol tuned to a fidelity target.
#[derive(Clone, Debug)]
pub struct DlczBaseline {
    pub p: f64,
    pub t_tot: f64,
    pub n_opt: usize,
    pub fidelity: f64,
    pub chain: ChainReport,
}

const PAIR_P_MIN: f64 = 1e-7;
const PAIR_P_MAX: f64 = 0.2;

/// Pair-source baseline: for each nesting level, the largest pair probability
/// whose state-level chain fidelity still meets `target_f`; the level with the
/// shortest total time wins (ties to the smaller level).
pub fn dlcz_baseline(length_km: f64, target_f: f64, eff: &Efficiencies) -> Result<DlczBaseline> {
    if !(target_f > 0.5) {
        return Err(RateError::InvalidParameter(format!(
            "target fidelity must exceed 0.5, got {target_f}"
        )));
    }
    check_target(target_f)?;
    if !(length_km > 0.0) {
        return Err(RateError::InvalidParameter(format!(
            "distance must be positive, got {length_km}"
        )));
    }
    let mut best: Option<DlczBaseline> = None;
    for n in 1..=MAX_NESTING {
        let fid = |p: f64| -> Result<f64> {
            Ok(link::chain_analysis(&eff.dlcz_params(length_km, n, p))?.fidelity)
        };
        let p = match bisect_decreasing(fid, target_f, PAIR_P_MIN, PAIR_P_MAX, "p") {
            Ok(p) => p,
            Err(RateError::Infeasible { .. }) => continue,
            Err(e) => return Err(e),
        };
        let chain = link::chain_analysis(&eff.dlcz_params(length_km, n, p))?;
        if best.as_ref().is_none_or(|b| chain.t_tot < b.t_tot) {
            best = Some(DlczBaseline {
                p,
                t_tot: chain.t_tot,
                n_opt: n,
                fidelity: chain.fidelity,
                chain,
            });
        }
    }
    best.ok_or_else(|| RateError::Infeasible {
        target: target_f,
        reason: format!("no pair probability above {PAIR_P_MIN:e} reaches it at any nesting level"),
    })
}

/// One distance of the protocol comparison.
#[derive(Clone, Debug)]
pub struct GainRow {
    pub distance_km: f64,
    pub sps: PerformanceReport,
    pub dlcz: DlczBaseline,
    /// `T_dlcz / T_sps`.
    pub gain: f64,
}

pub fn gain_table(
    distances_km: &[f64],
    eff: &Efficiencies,
    p1: f64,
    target_f: f64,
) -> Result<Vec<GainRow>> {
    if distances_km.is_empty() {
        return Err(RateError::InvalidParameter("no distances given".into()));
    }
    distances_km
        .par_iter()
        .map(|&d| {
            let sps = optimize_sps(d, eff, p1)?;
            let dlcz = dlcz_baseline(d, target_f, eff)?;
            Ok(GainRow {
                distance_km: d,
                gain: dlcz.t_tot / sps.t_tot,
                sps,
                dlcz,
            })
        })
        .collect()
}

/// Single-photon efficiency at which both protocols take equally long.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Crossover {
    pub p1: f64,
    pub t_dlcz: f64,
    /// False when no crossing exists in the search range and `p1` is a boundary.
    pub bracketed: bool,
}

const CROSSOVER_P1_MIN: f64 = 0.01;

/// Bisects on `p1` until the optimized single-photon time equals the baseline.
pub fn crossover_p1(length_km: f64, eff: &Efficiencies, target_f: f64) -> Result<Crossover> {
    check_distance(length_km)?;
    let t_dlcz = dlcz_baseline(length_km, target_f, eff)?.t_tot;
    let excess = |p1: f64| -> Result<f64> { Ok(sps_optimum(length_km, eff, p1)?.0 - t_dlcz) };
    if excess(1.0)? > 0.0 {
        return Ok(Crossover {
            p1: 1.0,
            t_dlcz,
            bracketed: false,
        });
    }
    if excess(CROSSOVER_P1_MIN)? <= 0.0 {
        return Ok(Crossover {
            p1: CROSSOVER_P1_MIN,
            t_dlcz,
            bracketed: false,
        });
    }
    let (mut lo, mut hi) = (CROSSOVER_P1_MIN, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Crossover {
        p1: 0.5 * (lo + hi),
        t_dlcz,
        bracketed: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn generic_time_all_success() {
        let t = t_tot_generic(1.0, &[], 1.0, 125.0, 2e8).unwrap();
        assert_relative_eq!(t, 9.375e-4, max_relative = 1e-15);
    }

    #[test]
    fn generic_time_is_multiplicative() {
        let base = t_tot_generic(0.01, &[0.5, 0.4], 0.1, 125.0, 2e8).unwrap();
        let halved = t_tot_generic(0.01, &[0.25, 0.4], 0.1, 125.0, 2e8).unwrap();
        assert_relative_eq!(halved, 2.0 * base, max_relative = 1e-15);
    }

    #[test]
    fn generic_time_diverges_on_zero() {
        assert!(matches!(
            t_tot_generic(0.0, &[], 1.0, 125.0, 2e8),
            Err(RateError::Divergence(_))
        ));
        assert!(matches!(
            t_tot_generic(0.1, &[1.5], 1.0, 125.0, 2e8),
            Err(RateError::InvalidParameter(_))
        ));
    }

    #[test]
    fn closed_form_matches_level_product() {
        for &(l, n, b) in &[(1000.0, 3, 0.11), (2000.0, 4, 0.08), (700.0, 1, 0.3), (3000.0, 5, 0.05)] {
            let mut params = RepeaterParams::sps(l, n);
            params.beta_sq = b;
            let probs = sps_chain_probabilities(&params).unwrap();
            let generic = t_tot_generic(
                probs.p0,
                &probs.swaps,
                probs.p_pr,
                params.link_length_km(),
                params.c_m_per_s,
            )
            .unwrap();
            assert_relative_eq!(t_tot_sps(&params).unwrap(), generic, max_relative = 1e-12);
        }
    }

    #[test]
    fn sps_time_unit_guard() {
        let t = t_tot_sps(&RepeaterParams::sps(1000.0, 3)).unwrap();
        assert!((245.0..=256.0).contains(&t), "{t}");
    }

    #[test]
    fn sps_time_rejects_degenerate_splitter() {
        let mut p = RepeaterParams::sps(1000.0, 3);
        p.beta_sq = 0.0;
        assert!(matches!(t_tot_sps(&p), Err(RateError::Divergence(_))));
        p.beta_sq = 1.0;
        assert!(matches!(t_tot_sps(&p), Err(RateError::Divergence(_))));
        assert!(t_tot_sps(&RepeaterParams::dlcz(1000.0, 3, 0.003)).is_err());
    }

    #[test]
    fn dark_count_budget_is_affine() {
        let params = RepeaterParams::sps(1000.0, 3);
        assert_eq!(fidelity_dark(&params, 0.0).unwrap(), 1.0);
        let f1 = fidelity_dark(&params, 1e-7).unwrap();
        let f2 = fidelity_dark(&params, 2e-7).unwrap();
        assert!(f2 < f1 && f1 < 1.0);
        assert_relative_eq!(1.0 - f2, 2.0 * (1.0 - f1), max_relative = 1e-9);
    }

    #[test]
    fn two_photon_budget_half_threshold() {
        let params = RepeaterParams::sps(1000.0, 3);
        assert_eq!(fidelity_twophoton(&params, 0.0).unwrap(), 1.0);
        let thr = p2_threshold(&params, 0.9).unwrap();
        assert_abs_diff_eq!(fidelity_twophoton(&params, thr).unwrap(), 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity_twophoton(&params, 1.85e-4).unwrap(), 0.95, epsilon = 0.005);
    }

    #[test]
    fn thresholds_reject_perfect_target() {
        let params = RepeaterParams::sps(1000.0, 3);
        assert!(matches!(p2_threshold(&params, 1.0), Err(RateError::Infeasible { .. })));
        assert!(matches!(p_dark_threshold(&params, 1.0), Err(RateError::Infeasible { .. })));
        let params = RepeaterParams::sps(1000.0, 2);
        assert_eq!(p2_threshold(&params, 0.9), Err(RateError::UnsupportedNesting(2)));
    }

    #[test]
    fn optimizer_rejects_out_of_range_distance() {
        assert!(optimize_sps(100.0, &Efficiencies::default(), 0.95).is_err());
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_section(|x| (x - 0.123).powi(2), 0.0, 1.0);
        assert_abs_diff_eq!(x, 0.123, epsilon = 1e-8);
    }
}
