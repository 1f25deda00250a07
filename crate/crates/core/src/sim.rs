//! Discrete-event Monte Carlo of the repeater waiting time.
//!
//! Time advances in slots of `L0 / c`. Every elementary link retries once per
//! slot. A level-`i` swap is attempted as soon as both children are ready; on
//! failure both children are rebuilt from scratch. Swap and post-selection
//! outcomes take no extra time. The final stage runs two chains side by side
//! and post-selects; a post-selection probability of exactly 1 means there is
//! no final stage and a single chain is timed.
//!
//! Trial `k` draws from its own stream `rng_stream(seed, k)`, so results do
//! not depend on how trials are split across threads. Within a trial each
//! draw is addressed by its place in the retry tree.

use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Deterministic ChaCha8 stream; distinct ids never overlap.
pub fn rng_stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    /// `P_0, P_1, …, P_n, P_pr`.
    pub p_levels: Vec<f64>,
    /// Seconds per slot, `L0 / c`.
    pub slot_duration: f64,
    pub trials: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_levels.len() < 2 {
            return Err(SimError::InvalidConfig(
                "need at least P_0 and P_pr".into(),
            ));
        }
        if let Some(p) = self.p_levels.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
            return Err(SimError::InvalidConfig(format!(
                "probabilities must lie in (0, 1], got {p}"
            )));
        }
        if !(self.slot_duration > 0.0 && self.slot_duration.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "slot duration must be positive, got {}",
                self.slot_duration
            )));
        }
        if self.trials == 0 {
            return Err(SimError::InvalidConfig("trials must be at least 1".into()));
        }
        Ok(())
    }

    /// Nesting level `n`.
    pub fn nesting(&self) -> usize {
        self.p_levels.len() - 2
    }

    fn p_pr(&self) -> f64 {
        self.p_levels[self.p_levels.len() - 1]
    }

    /// Closed-form mean time `(3/2)^(n+1) · slot / (P_0 ⋯ P_n · P_pr)`.
    pub fn prediction(&self) -> Result<f64> {
        self.validate()?;
        let n = self.nesting();
        rate::t_tot_slots(self.p_levels[0], &self.p_levels[1..=n], self.p_pr())
            .map(|slots| slots * self.slot_duration)
            .map_err(|e| SimError::InvalidConfig(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    /// `bins + 1` edges in seconds.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

pub const HISTOGRAM_BINS: usize = 40;

impl Histogram {
    fn from_samples(samples: &[f64]) -> Self {
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / HISTOGRAM_BINS as f64 } else { 1.0 };
        let edges = (0..=HISTOGRAM_BINS).map(|k| lo + k as f64 * width).collect();
        let mut counts = vec![0; HISTOGRAM_BINS];
        for &x in samples {
            let bin = (((x - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
            counts[bin] += 1;
        }
        Self { edges, counts }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub mean_t: f64,
    pub stderr: f64,
    pub trials: usize,
    pub histogram: Histogram,
}

/// Uniform draws addressed by a key rather than by call order.
///
/// A draw's key is its position in the retry tree (node, attempt, role), so
/// changing one probability never shifts the randomness seen elsewhere. This
/// makes every trial's slot count monotone in every `P_i` under common
/// random numbers.
struct KeyedDraws {
    rng: ChaCha8Rng,
}

impl KeyedDraws {
    fn uniform(&mut self, key: u64) -> f64 {
        // two 32-bit words per key
        self.rng.set_word_pos(u128::from(key) << 1);
        self.rng.gen()
    }
}

fn child_key(parent: u64, attempt: u64, role: u64) -> u64 {
    splitmix(parent ^ splitmix(attempt.wrapping_mul(3).wrapping_add(role)))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Attempts until the first success, by inversion so that a larger `p`
/// never needs more attempts for the same uniform draw.
fn geometric(p: f64, u: f64) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let u = 1.0 - u; // (0, 1]
    1 + (u.ln() / (1.0 - p).ln()).floor() as u64
}

/// Runs attempts of a two-child stage until its Bernoulli(`p`) test passes.
fn retry_stage(
    p: f64,
    key: u64,
    draws: &mut KeyedDraws,
    mut child: impl FnMut(u64, &mut KeyedDraws) -> u64,
) -> u64 {
    let mut total = 0;
    for attempt in 0.. {
        let a = child(child_key(key, attempt, 0), draws);
        let b = child(child_key(key, attempt, 1), draws);
        total += a.max(b);
        if draws.uniform(child_key(key, attempt, 2)) < p {
            break;
        }
    }
    total
}

/// Slots until a level-`level` link is ready, starting from empty memories.
fn level_slots(p: &[f64], level: usize, key: u64, draws: &mut KeyedDraws) -> u64 {
    if level == 0 {
        let u = draws.uniform(key);
        return geometric(p[0], u);
    }
    retry_stage(p[level], key, draws, |k, d| level_slots(p, level - 1, k, d))
}

fn trial_slots(config: &SimConfig, trial: u64) -> u64 {
    let mut draws = KeyedDraws {
        rng: rng_stream(config.seed, trial),
    };
    let n = config.nesting();
    let p = &config.p_levels[..=n];
    let p_pr = config.p_pr();
    if p_pr >= 1.0 {
        return level_slots(p, n, 0, &mut draws);
    }
    retry_stage(p_pr, 0, &mut draws, |k, d| level_slots(p, n, k, d))
}

/// Slot counts of trials `range`, in trial order.
pub fn simulate_trials(config: &SimConfig, range: std::ops::Range<u64>) -> Result<Vec<u64>> {
    config.validate()?;
    Ok(range
        .into_par_iter()
        .map(|k| trial_slots(config, k))
        .collect())
}

pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    let slots = simulate_trials(config, 0..config.trials as u64)?;
    Ok(summarize(config, &slots))
}

/// Mean, standard error and histogram of per-trial slot counts.
pub fn summarize(config: &SimConfig, slots: &[u64]) -> SimResult {
    let samples: Vec<f64> = slots
        .iter()
        .map(|&s| s as f64 * config.slot_duration)
        .collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let stderr = if samples.len() > 1 {
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    SimResult {
        mean_t: mean,
        stderr,
        trials: samples.len(),
        histogram: Histogram::from_samples(&samples),
    }
}
