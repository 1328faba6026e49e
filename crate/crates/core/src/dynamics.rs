//! Periodic harmonic chain: time integration, normal-mode transform and
//! per-mode energies.
//!
//! Sites interact with nearest neighbours through springs of constant `κ`;
//! indices wrap modulo `N`. Normal modes use the unitary kernel
//! `χ(l; k) = exp(i k l a)/√N`, and mode amplitudes are mass weighted so that
//! the per-mode energies add up to the total energy for any mass.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dispersion::{chain_dispersion, OscillatorParams};
use crate::error::{invalid, Error, Result};
use crate::scattering::wave_number;

/// Time integrator for [`ChainState::step_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Second-order velocity Verlet.
    VelocityVerlet,
    /// Fourth-order position-extended Forest–Ruth-like scheme (Omelyan,
    /// Mryglod and Folk), four force evaluations per step.
    #[default]
    Pefrl,
}

const PEFRL_XI: f64 = 0.178_617_895_844_809_1;
const PEFRL_LAMBDA: f64 = -0.212_341_831_062_605_4;
const PEFRL_CHI: f64 = -0.066_264_582_669_818_5;

/// Raised when `dt` is at or beyond the velocity-Verlet stability limit `2/ω_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityWarning {
    pub dt: f64,
    pub limit: f64,
}

impl fmt::Display for StabilityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "time step {} is at or above the stability limit 2/omega_max = {}",
            self.dt, self.limit
        )
    }
}

pub fn stability_limit(params: &OscillatorParams) -> f64 {
    2.0 / params.omega_max()
}

pub fn check_stability(params: &OscillatorParams, dt: f64) -> Option<StabilityWarning> {
    let limit = stability_limit(params);
    (dt >= limit).then_some(StabilityWarning { dt, limit })
}

/// Displacements and velocities of an `N`-site periodic chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    params: OscillatorParams,
    u: Vec<f64>,
    v: Vec<f64>,
    t: f64,
    acc: Vec<f64>,
    acc_fresh: bool,
}

impl ChainState {
    pub fn new(params: OscillatorParams, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() < 2 {
            return Err(invalid(
                "n_sites",
                format!("need at least 2 sites, got {}", u.len()),
            ));
        }
        if u.len() != v.len() {
            return Err(Error::SizeMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(invalid(
                "state",
                "displacements and velocities must be finite",
            ));
        }
        let n = u.len();
        Ok(ChainState {
            params,
            u,
            v,
            t: 0.0,
            acc: vec![0.0; n],
            acc_fresh: false,
        })
    }

    pub fn zeros(n_sites: usize, params: OscillatorParams) -> Result<Self> {
        Self::new(params, vec![0.0; n_sites], vec![0.0; n_sites])
    }

    /// Displacements and velocities drawn uniformly from `[-amplitude, amplitude]`.
    pub fn random(
        n_sites: usize,
        params: OscillatorParams,
        amplitude: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = amplitude.abs();
        let mut draw = |_| {
            if a > 0.0 {
                rng.random_range(-a..=a)
            } else {
                0.0
            }
        };
        let u = (0..n_sites).map(&mut draw).collect();
        let v = (0..n_sites).map(&mut draw).collect();
        Self::new(params, u, v)
    }

    pub fn n_sites(&self) -> usize {
        self.u.len()
    }

    pub fn params(&self) -> &OscillatorParams {
        &self.params
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    fn refresh_acc(&mut self) {
        if !self.acc_fresh {
            fill_accelerations(&self.params, &self.u, &mut self.acc);
            self.acc_fresh = true;
        }
    }

    /// Advances by `dt` with the default integrator.
    pub fn step(&mut self, dt: f64) -> Result<Option<StabilityWarning>> {
        self.step_with(dt, Integrator::default())
    }

    pub fn step_with(
        &mut self,
        dt: f64,
        integrator: Integrator,
    ) -> Result<Option<StabilityWarning>> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("must be finite and > 0, got {dt}")));
        }
        let warning = check_stability(&self.params, dt);
        match integrator {
            Integrator::VelocityVerlet => self.verlet(dt),
            Integrator::Pefrl => self.pefrl(dt),
        }
        self.t += dt;
        Ok(warning)
    }

    fn kick(&mut self, h: f64) {
        self.refresh_acc();
        for (v, a) in self.v.iter_mut().zip(&self.acc) {
            *v += h * a;
        }
    }

    fn drift(&mut self, h: f64) {
        for (u, v) in self.u.iter_mut().zip(&self.v) {
            *u += h * v;
        }
        self.acc_fresh = false;
    }

    fn verlet(&mut self, dt: f64) {
        self.kick(0.5 * dt);
        self.drift(dt);
        self.kick(0.5 * dt);
    }

    fn pefrl(&mut self, dt: f64) {
        self.drift(PEFRL_XI * dt);
        self.kick(0.5 * (1.0 - 2.0 * PEFRL_LAMBDA) * dt);
        self.drift(PEFRL_CHI * dt);
        self.kick(PEFRL_LAMBDA * dt);
        self.drift((1.0 - 2.0 * (PEFRL_CHI + PEFRL_XI)) * dt);
        self.kick(PEFRL_LAMBDA * dt);
        self.drift(PEFRL_CHI * dt);
        self.kick(0.5 * (1.0 - 2.0 * PEFRL_LAMBDA) * dt);
        self.drift(PEFRL_XI * dt);
    }
}

/// Plane wave `u_l = U0 cos(k_n l a)`, `v_l = U0 ω(k_n) sin(k_n l a)`: the real
/// part of `U0 exp(-i(ωt - k x))` at `t = 0`.
pub fn init_plane_wave(
    n_sites: usize,
    params: OscillatorParams,
    mode_index: i64,
    amplitude: f64,
) -> Result<ChainState> {
    let n = n_sites as i64;
    let half = n / 2;
    let lo = -((n - 1) / 2);
    if n_sites < 2 || mode_index < lo || mode_index > half {
        return Err(Error::ModeIndexOutOfRange {
            index: mode_index,
            half,
        });
    }
    let k = wave_number(mode_index, n_sites, params.a());
    let w = chain_dispersion(&params, k);
    let mut u = Vec::with_capacity(n_sites);
    let mut v = Vec::with_capacity(n_sites);
    for l in 0..n_sites {
        // reduce k l a modulo 2π through the integer phase n·l
        let phase = 2.0 * PI * ((mode_index * l as i64).rem_euclid(n)) as f64 / n as f64;
        u.push(amplitude * phase.cos());
        v.push(amplitude * w * phase.sin());
    }
    ChainState::new(params, u, v)
}

fn fill_accelerations(params: &OscillatorParams, u: &[f64], out: &mut [f64]) {
    let n = u.len();
    let w2 = params.kappa() / params.m();
    for l in 0..n {
        let left = u[(l + n - 1) % n];
        let right = u[(l + 1) % n];
        out[l] = w2 * (right - 2.0 * u[l] + left);
    }
}

/// `(κ/m)(u_{l+1} − 2u_l + u_{l−1})` with periodic indices.
pub fn accelerations(state: &ChainState) -> Vec<f64> {
    let mut out = vec![0.0; state.n_sites()];
    fill_accelerations(&state.params, &state.u, &mut out);
    out
}

/// `Σ ½ m v_l² + Σ ½ κ (u_{l+1} − u_l)²`.
pub fn total_energy(state: &ChainState) -> f64 {
    let n = state.n_sites();
    let kinetic: f64 = state.v.iter().map(|v| v * v).sum::<f64>() * 0.5 * state.params.m();
    let potential: f64 = (0..n)
        .map(|l| {
            let d = state.u[(l + 1) % n] - state.u[l];
            d * d
        })
        .sum::<f64>()
        * 0.5
        * state.params.kappa();
    kinetic + potential
}

/// Unitary discrete Fourier basis of an `N`-site chain. Slot `j` holds wave
/// number label `j` for `j ≤ N/2` and `j − N` above.
#[derive(Clone)]
pub struct ModeBasis {
    n_sites: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for ModeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModeBasis")
            .field("n_sites", &self.n_sites)
            .finish()
    }
}

impl ModeBasis {
    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites < 2 {
            return Err(invalid(
                "n_sites",
                format!("need at least 2 sites, got {n_sites}"),
            ));
        }
        let mut planner = FftPlanner::new();
        Ok(ModeBasis {
            n_sites,
            forward: planner.plan_fft_forward(n_sites),
            inverse: planner.plan_fft_inverse(n_sites),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Wave-number label of slot `j`.
    pub fn label(&self, slot: usize) -> i64 {
        slot_label(slot, self.n_sites)
    }

    /// Slot holding wave-number label `label`.
    pub fn slot(&self, label: i64) -> usize {
        label.rem_euclid(self.n_sites as i64) as usize
    }

    /// `χ(l; k_n) = exp(i k_n l a)/√N`.
    pub fn chi(&self, site: usize, label: i64) -> Complex64 {
        let n = self.n_sites as i64;
        let phase = 2.0 * PI * ((label * site as i64).rem_euclid(n)) as f64 / n as f64;
        Complex64::from_polar(1.0 / (n as f64).sqrt(), phase)
    }

    fn transform(&self, data: &[f64], weight: f64) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data
            .iter()
            .map(|&x| Complex64::new(x * weight, 0.0))
            .collect();
        self.forward.process(&mut buf);
        let norm = 1.0 / (self.n_sites as f64).sqrt();
        buf.iter_mut().for_each(|z| *z *= norm);
        buf
    }

    fn untransform(&self, data: &[Complex64], weight: f64) -> Vec<f64> {
        let mut buf = data.to_vec();
        self.inverse.process(&mut buf);
        let norm = 1.0 / ((self.n_sites as f64).sqrt() * weight);
        buf.iter().map(|z| z.re * norm).collect()
    }
}

pub(crate) fn slot_label(slot: usize, n_sites: usize) -> i64 {
    if slot <= n_sites / 2 {
        slot as i64
    } else {
        slot as i64 - n_sites as i64
    }
}

/// Mass-weighted normal coordinates `q(k) = √m Σ_l χ*(l;k) u_l` and momenta
/// `p(k) = √m Σ_l χ*(l;k) v_l`, stored by slot along with `ω(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudes {
    pub q: Vec<Complex64>,
    pub p: Vec<Complex64>,
    pub omega: Vec<f64>,
}

impl ModeAmplitudes {
    pub fn n_modes(&self) -> usize {
        self.q.len()
    }

    /// Largest violation of `q(−k) = q(k)*` and `p(−k) = p(k)*`.
    pub fn reality_defect(&self) -> f64 {
        let n = self.q.len();
        (0..n)
            .map(|j| {
                let m = (n - j) % n;
                (self.q[m] - self.q[j].conj())
                    .norm()
                    .max((self.p[m] - self.p[j].conj()).norm())
            })
            .fold(0.0, f64::max)
    }
}

pub fn to_modes(state: &ChainState, basis: &ModeBasis) -> Result<ModeAmplitudes> {
    if basis.n_sites != state.n_sites() {
        return Err(Error::SizeMismatch {
            expected: basis.n_sites,
            got: state.n_sites(),
        });
    }
    let w = state.params.m().sqrt();
    let n = state.n_sites();
    let omega = (0..n)
        .map(|j| {
            chain_dispersion(
                &state.params,
                wave_number(slot_label(j, n), n, state.params.a()),
            )
        })
        .collect();
    Ok(ModeAmplitudes {
        q: basis.transform(&state.u, w),
        p: basis.transform(&state.v, w),
        omega,
    })
}

/// Inverse of [`to_modes`]: rebuilds `u` and `v` (imaginary residue dropped).
pub fn from_modes(
    amps: &ModeAmplitudes,
    basis: &ModeBasis,
    params: OscillatorParams,
) -> Result<ChainState> {
    if basis.n_sites != amps.n_modes() {
        return Err(Error::SizeMismatch {
            expected: basis.n_sites,
            got: amps.n_modes(),
        });
    }
    let w = params.m().sqrt();
    ChainState::new(
        params,
        basis.untransform(&amps.q, w),
        basis.untransform(&amps.p, w),
    )
}

/// `E_k = ½(|p(k)|² + ω(k)²|q(k)|²)` per slot.
pub fn mode_energies(amps: &ModeAmplitudes) -> Vec<f64> {
    amps.q
        .iter()
        .zip(&amps.p)
        .zip(&amps.omega)
        .map(|((q, p), w)| 0.5 * (p.norm_sqr() + w * w * q.norm_sqr()))
        .collect()
}

fn default_n_sites() -> usize {
    64
}
fn one() -> f64 {
    1.0
}
fn default_steps() -> usize {
    1000
}
fn default_stride() -> usize {
    10
}
fn default_mode() -> i64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    #[default]
    PlaneWave,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    #[serde(rename = "type", default)]
    pub kind: InitKind,
    #[serde(default = "default_mode")]
    pub mode_index: i64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec {
            kind: InitKind::PlaneWave,
            mode_index: default_mode(),
            amplitude: 1.0,
            seed: 0,
        }
    }
}

/// Simulation settings; every field has a default. `dt` defaults to `0.02/ω_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_n_sites")]
    pub n_sites: usize,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub init: InitSpec,
}

impl Default for SimConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl SimConfig {
    pub fn params(&self) -> Result<OscillatorParams> {
        OscillatorParams::new(self.kappa, self.m, self.a)
    }

    pub fn time_step(&self) -> Result<f64> {
        Ok(self.dt.unwrap_or(0.02 / self.params()?.omega_max()))
    }

    pub fn initial_state(&self) -> Result<ChainState> {
        let params = self.params()?;
        match self.init.kind {
            InitKind::PlaneWave => init_plane_wave(
                self.n_sites,
                params,
                self.init.mode_index,
                self.init.amplitude,
            ),
            InitKind::Random => {
                ChainState::random(self.n_sites, params, self.init.amplitude, self.init.seed)
            }
        }
    }
}

/// One sampled row of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    pub step: usize,
    pub t: f64,
    pub total_energy: f64,
    pub mode_energies: Vec<f64>,
    pub displacements: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutput {
    pub rows: Vec<SimRow>,
    pub warning: Option<StabilityWarning>,
}

fn sample(state: &ChainState, basis: &ModeBasis, step: usize) -> Result<SimRow> {
    Ok(SimRow {
        step,
        t: state.t,
        total_energy: total_energy(state),
        mode_energies: mode_energies(&to_modes(state, basis)?),
        displacements: state.u.clone(),
    })
}

/// Integrates `config.steps` steps, sampling the initial state and every
/// `stride`-th step (and always the last).
pub fn run_sim(config: &SimConfig) -> Result<SimOutput> {
    if config.stride == 0 {
        return Err(invalid("stride", "must be >= 1"));
    }
    let dt = config.time_step()?;
    let mut state = config.initial_state()?;
    let basis = ModeBasis::new(state.n_sites())?;
    let warning = check_stability(state.params(), dt);
    let mut rows = vec![sample(&state, &basis, 0)?];
    for step in 1..=config.steps {
        state.step_with(dt, config.integrator)?;
        if step % config.stride == 0 || step == config.steps {
            rows.push(sample(&state, &basis, step)?);
        }
    }
    Ok(SimOutput { rows, warning })
}
