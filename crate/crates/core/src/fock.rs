//! Truncated multimode bosonic Fock space.
//!
//! States live on a [`ModeRegister`]: an ordered list of named modes, each
//! holding at most `truncation` photons. Basis states are indexed in mixed
//! radix with the first mode most significant, so for modes `(a, b)` and
//! truncation 2 the basis runs `|0,0⟩, |0,1⟩, |0,2⟩, |1,0⟩, ...`.
//!
//! Everything here is a pure function on immutable values. Operations that
//! would push population above the truncation fail with
//! [`FockError::Truncation`] instead of clipping.

use ndarray::{linalg::kron, Array1, Array2, ArrayView2, Axis};
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Tolerance for algebraic identities (norms, traces, unitarity).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for eigenvalue positivity of density matrices.
pub const POSITIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("unknown mode `{0}`")]
    UnknownMode(String),
    #[error("duplicate mode `{0}`")]
    DuplicateMode(String),
    #[error("mode `{mode}` would hold {occupation} photons, truncation is {truncation}")]
    Truncation {
        mode: String,
        occupation: usize,
        truncation: usize,
    },
    #[error("beam splitter needs alpha^2 + beta^2 = 1, got alpha={alpha}, beta={beta}")]
    InvalidSpec { alpha: f64, beta: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("states live on different registers")]
    RegisterMismatch,
}

pub type Result<T> = std::result::Result<T, FockError>;

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

fn check_probability(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(FockError::InvalidParameter(format!(
            "{name} must lie in [0, 1], got {value}"
        )))
    }
}

/// Ordered set of named bosonic modes sharing one photon-number cutoff.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeRegister {
    names: Vec<String>,
    truncation: usize,
}

impl ModeRegister {
    pub const DEFAULT_TRUNCATION: usize = 2;

    pub fn new<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        truncation: usize,
    ) -> Result<Self> {
        if truncation < 1 {
            return Err(FockError::InvalidParameter(
                "truncation must be at least 1".into(),
            ));
        }
        let mut out: Vec<String> = Vec::new();
        for name in names {
            let name = name.into();
            if out.contains(&name) {
                return Err(FockError::DuplicateMode(name));
            }
            out.push(name);
        }
        Ok(Self {
            names: out,
            truncation,
        })
    }

    pub fn modes(&self) -> &[String] {
        &self.names
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn num_modes(&self) -> usize {
        self.names.len()
    }

    /// Levels per mode, `truncation + 1`.
    pub fn local_dim(&self) -> usize {
        self.truncation + 1
    }

    pub fn dim(&self) -> usize {
        self.local_dim().pow(self.names.len() as u32)
    }

    pub fn mode_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| FockError::UnknownMode(name.to_string()))
    }

    pub(crate) fn stride(&self, mode: usize) -> usize {
        self.local_dim()
            .pow((self.names.len() - 1 - mode) as u32)
    }

    /// Photon number of `mode` in basis state `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.local_dim()
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.num_modes())
            .map(|m| self.occupation(index, m))
            .collect()
    }

    pub fn basis_index(&self, occupation: &[usize]) -> Result<usize> {
        if occupation.len() != self.num_modes() {
            return Err(FockError::InvalidParameter(format!(
                "expected {} occupation numbers, got {}",
                self.num_modes(),
                occupation.len()
            )));
        }
        let mut index = 0;
        for (m, &n) in occupation.iter().enumerate() {
            if n > self.truncation {
                return Err(FockError::Truncation {
                    mode: self.names[m].clone(),
                    occupation: n,
                    truncation: self.truncation,
                });
            }
            index = index * self.local_dim() + n;
        }
        Ok(index)
    }

    /// Total photon number of basis state `index`.
    pub fn excitations(&self, index: usize) -> usize {
        (0..self.num_modes()).map(|m| self.occupation(index, m)).sum()
    }

    /// Same register with one mode removed.
    pub fn without(&self, mode: usize) -> ModeRegister {
        let mut names = self.names.clone();
        names.remove(mode);
        ModeRegister {
            names,
            truncation: self.truncation,
        }
    }

    pub fn with_truncation(&self, truncation: usize) -> Result<ModeRegister> {
        ModeRegister::new(self.names.clone(), truncation)
    }

    /// Register of the composite system `self ⊗ other`.
    pub fn concat(&self, other: &ModeRegister) -> Result<ModeRegister> {
        if self.truncation != other.truncation {
            return Err(FockError::RegisterMismatch);
        }
        ModeRegister::new(
            self.names.iter().chain(other.names.iter()).cloned(),
            self.truncation,
        )
    }

    /// Full index of a basis state of `self.without(mode)` with `mode` set to `n`.
    fn expanded_index(&self, reduced: usize, mode: usize, n: usize) -> usize {
        let s = self.stride(mode);
        (reduced / s) * s * self.local_dim() + n * s + reduced % s
    }
}

/// Real two-mode beam splitter `[[alpha, beta], [beta, -alpha]]`.
///
/// Acting on modes `(i, j)` it maps `a_i† → α a_i† + β a_j†` and
/// `a_j† → β a_i† − α a_j†`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterSpec {
    alpha: f64,
    beta: f64,
}

impl BeamSplitterSpec {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite()
            || !beta.is_finite()
            || (alpha * alpha + beta * beta - 1.0).abs() > ALGEBRA_TOL
        {
            return Err(FockError::InvalidSpec { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    /// Splitter with transmission probability `beta_sq` and nonnegative amplitudes.
    pub fn from_transmission(beta_sq: f64) -> Result<Self> {
        check_probability("beta^2", beta_sq)?;
        Self::new((1.0 - beta_sq).sqrt(), beta_sq.sqrt())
    }

    pub fn balanced() -> Self {
        Self {
            alpha: std::f64::consts::FRAC_1_SQRT_2,
            beta: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Output amplitudes of `|n_i, n_j⟩`, indexed by the photon number left in mode `i`.
    fn coefficients(&self, n_i: usize, n_j: usize) -> Vec<f64> {
        let (a, b) = (self.alpha, self.beta);
        let total = n_i + n_j;
        let mut out = vec![0.0; total + 1];
        for r in 0..=n_i {
            let left = binom(n_i, r) * a.powi(r as i32) * b.powi((n_i - r) as i32);
            for s in 0..=n_j {
                let right =
                    binom(n_j, s) * b.powi(s as i32) * (-a).powi((n_j - s) as i32);
                out[r + s] += left * right;
            }
        }
        let norm = (factorial(n_i) * factorial(n_j)).sqrt();
        for (k, c) in out.iter_mut().enumerate() {
            *c *= (factorial(k) * factorial(total - k)).sqrt() / norm;
        }
        out
    }
}

/// Sparse action of a beam splitter on one register.
struct SplitterAction {
    // (source index, target index, coefficient)
    terms: Vec<(usize, usize, f64)>,
    // per source index: an out-of-range target with non-negligible amplitude
    overflow: Vec<Option<(usize, usize)>>,
}

impl SplitterAction {
    fn build(register: &ModeRegister, i: usize, j: usize, spec: &BeamSplitterSpec) -> Self {
        let t = register.truncation();
        let (si, sj) = (register.stride(i), register.stride(j));
        let mut cache = vec![vec![Vec::new(); t + 1]; t + 1];
        for (n_i, row) in cache.iter_mut().enumerate() {
            for (n_j, slot) in row.iter_mut().enumerate() {
                *slot = spec.coefficients(n_i, n_j);
            }
        }
        let mut terms = Vec::new();
        let mut overflow = vec![None; register.dim()];
        for src in 0..register.dim() {
            let n_i = register.occupation(src, i);
            let n_j = register.occupation(src, j);
            let base = src - n_i * si - n_j * sj;
            for (k, &c) in cache[n_i][n_j].iter().enumerate() {
                let l = n_i + n_j - k;
                if k > t || l > t {
                    if c.abs() > ALGEBRA_TOL && overflow[src].is_none() {
                        overflow[src] = Some(if k > t { (i, k) } else { (j, l) });
                    }
                } else if c != 0.0 {
                    terms.push((src, base + k * si + l * sj, c));
                }
            }
        }
        Self { terms, overflow }
    }

    fn check(&self, register: &ModeRegister, weight: impl Fn(usize) -> f64) -> Result<()> {
        for (src, over) in self.overflow.iter().enumerate() {
            if let Some((mode, occupation)) = over {
                if weight(src) > ALGEBRA_TOL * ALGEBRA_TOL {
                    return Err(FockError::Truncation {
                        mode: register.modes()[*mode].clone(),
                        occupation: *occupation,
                        truncation: register.truncation(),
                    });
                }
            }
        }
        Ok(())
    }

    fn apply_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        let mut out = Array1::zeros(v.len());
        for &(src, dst, c) in &self.terms {
            out[dst] += v[src] * c;
        }
        out
    }

    /// `U · m`, row by row.
    fn apply_rows(&self, m: ArrayView2<C64>) -> Array2<C64> {
        let mut out = Array2::zeros(m.raw_dim());
        for &(src, dst, c) in &self.terms {
            out.row_mut(dst).scaled_add(C64::new(c, 0.0), &m.row(src));
        }
        out
    }
}

fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Normalized ket on a [`ModeRegister`].
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    register: ModeRegister,
    amplitudes: Array1<C64>,
}

impl PureState {
    /// Normalizes `amplitudes`; fails on a wrong length or a zero vector.
    pub fn new(register: ModeRegister, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != register.dim() {
            return Err(FockError::InvalidParameter(format!(
                "expected {} amplitudes, got {}",
                register.dim(),
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(FockError::InvalidParameter(
                "cannot normalize a zero state".into(),
            ));
        }
        Ok(Self {
            register,
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    /// Fock basis state with the given per-mode photon numbers.
    pub fn prepare(register: &ModeRegister, occupation: &[usize]) -> Result<Self> {
        let index = register.basis_index(occupation)?;
        let mut amplitudes = Array1::zeros(register.dim());
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self {
            register: register.clone(),
            amplitudes,
        })
    }

    pub fn vacuum(register: &ModeRegister) -> Self {
        let occupation = vec![0; register.num_modes()];
        Self::prepare(register, &occupation).expect("vacuum is always in range")
    }

    pub fn register(&self) -> &ModeRegister {
        &self.register
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, occupation: &[usize]) -> Result<C64> {
        Ok(self.amplitudes[self.register.basis_index(occupation)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.register != other.register {
            return Err(FockError::RegisterMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies `a†` on `mode` and renormalizes. Also returns the squared
    /// norm before renormalization (`⟨ψ|a a†|ψ⟩`).
    pub fn apply_creation(&self, mode: &str) -> Result<(PureState, f64)> {
        let m = self.register.mode_index(mode)?;
        let t = self.register.truncation();
        let s = self.register.stride(m);
        let mut out = Array1::zeros(self.register.dim());
        for (index, &amp) in self.amplitudes.iter().enumerate() {
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            let n = self.register.occupation(index, m);
            if n == t {
                if amp.norm() > ALGEBRA_TOL {
                    return Err(FockError::Truncation {
                        mode: mode.to_string(),
                        occupation: n + 1,
                        truncation: t,
                    });
                }
                continue;
            }
            out[index + s] += amp * ((n + 1) as f64).sqrt();
        }
        let weight: f64 = out.iter().map(|z: &C64| z.norm_sqr()).sum();
        let state = PureState::new(self.register.clone(), out)?;
        Ok((state, weight))
    }

    pub fn apply_beamsplitter(
        &self,
        mode_i: &str,
        mode_j: &str,
        spec: &BeamSplitterSpec,
    ) -> Result<PureState> {
        let (i, j) = distinct_modes(&self.register, mode_i, mode_j)?;
        let action = SplitterAction::build(&self.register, i, j, spec);
        action.check(&self.register, |k| self.amplitudes[k].norm_sqr())?;
        Ok(PureState {
            register: self.register.clone(),
            amplitudes: action.apply_vec(&self.amplitudes),
        })
    }

    pub fn to_mixed(&self) -> MixedState {
        let col = self.amplitudes.view().insert_axis(Axis(1));
        let row = self.amplitudes.mapv(|z| z.conj()).insert_axis(Axis(0));
        MixedState {
            register: self.register.clone(),
            matrix: col.dot(&row),
        }
    }
}

fn distinct_modes(register: &ModeRegister, a: &str, b: &str) -> Result<(usize, usize)> {
    let i = register.mode_index(a)?;
    let j = register.mode_index(b)?;
    if i == j {
        return Err(FockError::InvalidParameter(format!(
            "beam splitter needs two distinct modes, got `{a}` twice"
        )));
    }
    Ok((i, j))
}

/// Photon-number-resolving (or threshold) detector.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DetectorModel {
    pub eta_d: f64,
    /// Probability of one extra count per detection window.
    pub p_dark: f64,
    /// When false the outcomes collapse to 0 and "at least one", reported as count 1.
    pub number_resolving: bool,
}

impl DetectorModel {
    pub fn new(eta_d: f64, p_dark: f64, number_resolving: bool) -> Result<Self> {
        let d = Self {
            eta_d,
            p_dark,
            number_resolving,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn ideal() -> Self {
        Self {
            eta_d: 1.0,
            p_dark: 0.0,
            number_resolving: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("eta_d", self.eta_d)?;
        if !(0.0..1.0).contains(&self.p_dark) {
            return Err(FockError::InvalidParameter(format!(
                "p_dark must lie in [0, 1), got {}",
                self.p_dark
            )));
        }
        Ok(())
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

/// One detector outcome: the count, its probability and the normalized
/// state of the remaining modes.
#[derive(Clone, Debug)]
pub struct PnrOutcome {
    pub count: usize,
    pub probability: f64,
    pub state: MixedState,
}

/// Density matrix on a [`ModeRegister`]. Not necessarily normalized: the
/// heralding code carries unnormalized conditional states whose trace is the
/// branch probability.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    register: ModeRegister,
    matrix: Array2<C64>,
}

impl MixedState {
    pub fn new(register: ModeRegister, matrix: Array2<C64>) -> Result<Self> {
        let d = register.dim();
        if matrix.dim() != (d, d) {
            return Err(FockError::InvalidParameter(format!(
                "expected a {d}x{d} density matrix, got {:?}",
                matrix.dim()
            )));
        }
        Ok(Self { register, matrix })
    }

    pub fn vacuum(register: &ModeRegister) -> Self {
        PureState::vacuum(register).to_mixed()
    }

    /// Incoherent mixture of basis states, `Σ p_k |occ_k⟩⟨occ_k|`.
    pub fn from_populations(
        register: &ModeRegister,
        populations: &[(Vec<usize>, f64)],
    ) -> Result<Self> {
        let mut matrix = Array2::zeros((register.dim(), register.dim()));
        for (occ, p) in populations {
            let k = register.basis_index(occ)?;
            matrix[[k, k]] += C64::new(*p, 0.0);
        }
        Ok(Self {
            register: register.clone(),
            matrix,
        })
    }

    pub fn register(&self) -> &ModeRegister {
        &self.register
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diag().iter().map(|z| z.re).sum()
    }

    pub fn normalized(&self) -> Result<MixedState> {
        let tr = self.trace();
        if tr <= 0.0 || !tr.is_finite() {
            return Err(FockError::InvalidParameter(
                "cannot normalize a state with zero trace".into(),
            ));
        }
        Ok(self.scaled(1.0 / tr))
    }

    pub fn scaled(&self, factor: f64) -> MixedState {
        MixedState {
            register: self.register.clone(),
            matrix: &self.matrix * C64::new(factor, 0.0),
        }
    }

    /// Convex combination `(1 - weight)·self + weight·other`.
    pub fn mix(&self, other: &MixedState, weight: f64) -> Result<MixedState> {
        self.scaled(1.0 - weight).add(&other.scaled(weight))
    }

    pub fn add(&self, other: &MixedState) -> Result<MixedState> {
        if self.register != other.register {
            return Err(FockError::RegisterMismatch);
        }
        Ok(MixedState {
            register: self.register.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Population of one basis state.
    pub fn population(&self, occupation: &[usize]) -> Result<f64> {
        let k = self.register.basis_index(occupation)?;
        Ok(self.matrix[[k, k]].re)
    }

    /// Populations grouped by total photon number, index = photon number.
    pub fn excitation_populations(&self) -> Vec<f64> {
        let max = self.register.truncation() * self.register.num_modes();
        let mut out = vec![0.0; max + 1];
        for k in 0..self.register.dim() {
            out[self.register.excitations(k)] += self.matrix[[k, k]].re;
        }
        out
    }

    /// Largest photon number on `mode` carrying any population.
    pub fn max_occupation(&self, mode: &str) -> Result<usize> {
        let m = self.register.mode_index(mode)?;
        Ok((0..self.register.dim())
            .filter(|&k| self.matrix[[k, k]].re > 0.0)
            .map(|k| self.register.occupation(k, m))
            .max()
            .unwrap_or(0))
    }

    /// Re-embeds the state on the same modes with a different cutoff.
    pub fn with_truncation(&self, truncation: usize) -> Result<MixedState> {
        let target = self.register.with_truncation(truncation)?;
        let mapped: Vec<Option<usize>> = (0..self.register.dim())
            .map(|k| target.basis_index(&self.register.occupations(k)).ok())
            .collect();
        let mut matrix = Array2::zeros((target.dim(), target.dim()));
        for (r, tr) in mapped.iter().enumerate() {
            match tr {
                Some(tr) => {
                    for (c, tc) in mapped.iter().enumerate() {
                        if let Some(tc) = tc {
                            matrix[[*tr, *tc]] = self.matrix[[r, c]];
                        }
                    }
                }
                None => {
                    if self.matrix[[r, r]].re.abs() > ALGEBRA_TOL {
                        let occ = self.register.occupations(r);
                        let m = occ.iter().position(|&n| n > truncation).unwrap_or(0);
                        return Err(FockError::Truncation {
                            mode: self.register.modes()[m].clone(),
                            occupation: occ[m],
                            truncation,
                        });
                    }
                }
            }
        }
        Ok(MixedState {
            register: target,
            matrix,
        })
    }

    /// Same matrix with new mode names (same count, same order).
    pub fn relabeled(&self, names: &[&str]) -> Result<MixedState> {
        if names.len() != self.register.num_modes() {
            return Err(FockError::InvalidParameter(format!(
                "expected {} mode names, got {}",
                self.register.num_modes(),
                names.len()
            )));
        }
        Ok(MixedState {
            register: ModeRegister::new(names.iter().copied(), self.register.truncation())?,
            matrix: self.matrix.clone(),
        })
    }

    /// `self ⊗ other` on the concatenated register.
    pub fn tensor(&self, other: &MixedState) -> Result<MixedState> {
        let register = self.register.concat(&other.register)?;
        Ok(MixedState {
            register,
            matrix: kron(&self.matrix, &other.matrix),
        })
    }

    pub fn apply_beamsplitter(
        &self,
        mode_i: &str,
        mode_j: &str,
        spec: &BeamSplitterSpec,
    ) -> Result<MixedState> {
        let (i, j) = distinct_modes(&self.register, mode_i, mode_j)?;
        let action = SplitterAction::build(&self.register, i, j, spec);
        action.check(&self.register, |k| self.matrix[[k, k]].re.abs())?;
        // U ρ U† = (U (U ρ)†)†
        let left = action.apply_rows(self.matrix.view());
        let both = action.apply_rows(adjoint(&left).view());
        Ok(MixedState {
            register: self.register.clone(),
            matrix: adjoint(&both),
        })
    }

    /// Bosonic pure-loss channel with transmission `eta` on `mode`.
    pub fn apply_loss(&self, mode: &str, eta: f64) -> Result<MixedState> {
        check_probability("transmission", eta)?;
        let m = self.register.mode_index(mode)?;
        if eta == 1.0 {
            return Ok(self.clone());
        }
        let t = self.register.truncation();
        let s = self.register.stride(m);
        let d = self.register.dim();
        let sqrt_eta: Vec<f64> = (0..=2 * t).map(|p| eta.powf(p as f64 / 2.0)).collect();
        let loss: Vec<f64> = (0..=t).map(|k| (1.0 - eta).powi(k as i32)).collect();
        let mut out = Array2::zeros((d, d));
        for r in 0..d {
            let nr = self.register.occupation(r, m);
            for c in 0..d {
                let z = self.matrix[[r, c]];
                if z == C64::new(0.0, 0.0) {
                    continue;
                }
                let nc = self.register.occupation(c, m);
                for k in 0..=nr.min(nc) {
                    let f = (binom(nr, k) * binom(nc, k)).sqrt()
                        * sqrt_eta[nr + nc - 2 * k]
                        * loss[k];
                    out[[r - k * s, c - k * s]] += z * f;
                }
            }
        }
        Ok(MixedState {
            register: self.register.clone(),
            matrix: out,
        })
    }

    /// Multiplies every component by `exp(i φ n)`, `n` the photon number of `mode`.
    pub fn apply_phase(&self, mode: &str, phi: f64) -> Result<MixedState> {
        let m = self.register.mode_index(mode)?;
        let reg = &self.register;
        let phase: Vec<C64> = (0..reg.dim())
            .map(|k| C64::from_polar(1.0, phi * reg.occupation(k, m) as f64))
            .collect();
        let mut matrix = self.matrix.clone();
        for ((r, c), z) in matrix.indexed_iter_mut() {
            *z *= phase[r] * phase[c].conj();
        }
        Ok(MixedState {
            register: self.register.clone(),
            matrix,
        })
    }

    /// Unnormalized block of the remaining modes where `mode` holds exactly `n` photons.
    fn project(&self, m: usize, n: usize) -> MixedState {
        let reduced = self.register.without(m);
        let rd = reduced.dim();
        let full: Vec<usize> = (0..rd)
            .map(|k| self.register.expanded_index(k, m, n))
            .collect();
        let mut matrix = Array2::zeros((rd, rd));
        for (r, &fr) in full.iter().enumerate() {
            for (c, &fc) in full.iter().enumerate() {
                matrix[[r, c]] = self.matrix[[fr, fc]];
            }
        }
        MixedState {
            register: reduced,
            matrix,
        }
    }

    /// Measurement branches without normalization: each state's trace is the
    /// probability of its count. Linear in `self`, so it composes on
    /// unnormalized inputs.
    pub fn measure_pnr_branches(
        &self,
        mode: &str,
        detector: &DetectorModel,
    ) -> Result<Vec<(usize, MixedState)>> {
        detector.validate()?;
        let m = self.register.mode_index(mode)?;
        let lossy = self.apply_loss(mode, detector.eta_d)?;
        let t = self.register.truncation();
        let blocks: Vec<MixedState> = (0..=t).map(|n| lossy.project(m, n)).collect();
        let pd = detector.p_dark;
        let max_count = if pd > 0.0 { t + 1 } else { t };
        let mut branches = Vec::with_capacity(max_count + 1);
        for count in 0..=max_count {
            let mut acc = match blocks.get(count) {
                Some(b) => b.scaled(1.0 - pd),
                None => blocks[0].scaled(0.0),
            };
            if count >= 1 && pd > 0.0 {
                acc = acc.add(&blocks[count - 1].scaled(pd))?;
            }
            branches.push((count, acc));
        }
        if detector.number_resolving {
            return Ok(branches);
        }
        let mut iter = branches.into_iter();
        let (_, none) = iter.next().expect("count 0 always present");
        let mut click = none.scaled(0.0);
        for (_, b) in iter {
            click = click.add(&b)?;
        }
        Ok(vec![(0, none), (1, click)])
    }

    /// Photon counting on `mode`: loss `1 - eta_d`, ideal number projection,
    /// then at most one dark count per window. Zero-probability outcomes are
    /// omitted.
    pub fn measure_pnr(&self, mode: &str, detector: &DetectorModel) -> Result<Vec<PnrOutcome>> {
        let total = self.trace();
        let mut out = Vec::new();
        for (count, branch) in self.measure_pnr_branches(mode, detector)? {
            let p = branch.trace();
            if p > 0.0 {
                out.push(PnrOutcome {
                    count,
                    probability: p / total,
                    state: branch.scaled(1.0 / p),
                });
            }
        }
        Ok(out)
    }

    /// Reduced state on `keep`, modes listed in register order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<MixedState> {
        if keep.is_empty() {
            return Err(FockError::InvalidParameter(
                "partial trace needs at least one mode to keep".into(),
            ));
        }
        let mut kept = vec![false; self.register.num_modes()];
        for name in keep {
            kept[self.register.mode_index(name)?] = true;
        }
        let names: Vec<String> = self
            .register
            .modes()
            .iter()
            .zip(&kept)
            .filter(|(_, &k)| k)
            .map(|(n, _)| n.clone())
            .collect();
        let reduced = ModeRegister::new(names, self.register.truncation())?;
        let ld = self.register.local_dim();
        // (index on kept modes, index on traced modes)
        let split: Vec<(usize, usize)> = (0..self.register.dim())
            .map(|k| {
                let (mut a, mut b) = (0, 0);
                for (m, &is_kept) in kept.iter().enumerate() {
                    let n = self.register.occupation(k, m);
                    if is_kept {
                        a = a * ld + n;
                    } else {
                        b = b * ld + n;
                    }
                }
                (a, b)
            })
            .collect();
        let mut matrix = Array2::zeros((reduced.dim(), reduced.dim()));
        for (r, &(ra, rb)) in split.iter().enumerate() {
            for (c, &(ca, cb)) in split.iter().enumerate() {
                if rb == cb {
                    matrix[[ra, ca]] += self.matrix[[r, c]];
                }
            }
        }
        Ok(MixedState {
            register: reduced,
            matrix,
        })
    }

    /// `⟨target|ρ|target⟩`.
    pub fn fidelity(&self, target: &PureState) -> Result<f64> {
        if self.register != target.register {
            return Err(FockError::RegisterMismatch);
        }
        let v = &target.amplitudes;
        let rho_v = self.matrix.dot(v);
        Ok(v.iter().zip(rho_v.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().re)
    }

    /// Largest deviation from Hermiticity, `max |ρ - ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.register.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.matrix[[r, c]] - self.matrix[[c, r]].conj()).norm());
            }
        }
        worst
    }
}
