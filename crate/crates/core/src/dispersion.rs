//! Oscillator frequency, sound speed, monatomic-chain dispersion and the
//! cosmic-ray cutoff estimators linking an upper energy bound to a lattice
//! spacing of the medium.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Proton rest mass in kg (938.272 MeV/c²).
pub const PROTON_MASS: f64 = 1.672_621_923_69e-27;

/// Momentum the cutoff chain is usually quoted with, in kg·m/s.
pub const STATED_CUTOFF_MOMENTUM: f64 = 1e-9;

/// SI constants. `hbar` is always derived from `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub c: f64,
    pub h: f64,
    pub ev: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            c: 2.997_924_58e8,
            h: 6.626_070_15e-34,
            ev: 1.602_176_634e-19,
        }
    }
}

impl PhysicalConstants {
    pub fn hbar(&self) -> f64 {
        self.h / (2.0 * PI)
    }
}

/// Spring constant, mass and spacing of one oscillator of the medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorParams {
    kappa: f64,
    m: f64,
    a: f64,
}

fn positive(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {x}")))
    }
}

impl OscillatorParams {
    pub fn new(kappa: f64, m: f64, a: f64) -> Result<Self> {
        Ok(OscillatorParams {
            kappa: positive("kappa", kappa)?,
            m: positive("m", m)?,
            a: positive("a", a)?,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Highest frequency on the chain, reached at the zone boundary.
    pub fn omega_max(&self) -> f64 {
        2.0 * oscillator_frequency(self)
    }
}

/// `ω = √(κ/m)`.
pub fn oscillator_frequency(params: &OscillatorParams) -> f64 {
    (params.kappa / params.m).sqrt()
}

/// `v_s = a √(κ/m)`.
pub fn sound_speed(params: &OscillatorParams) -> f64 {
    params.a * oscillator_frequency(params)
}

/// Nearest-neighbour monatomic chain: `ω(q) = 2 √(κ/m) |sin(q a / 2)|`.
///
/// Periodic in `q` with period `2π/a`; its slope at `q = 0` is the sound speed.
pub fn chain_dispersion(params: &OscillatorParams, q: f64) -> f64 {
    2.0 * oscillator_frequency(params) * (0.5 * q * params.a).sin().abs()
}

/// Cutoff momentum `√(E_b²/c² − m_p² c²)`.
pub fn cutoff_momentum(consts: &PhysicalConstants, e_b: f64, m_p: f64) -> Result<f64> {
    if m_p.is_nan() || m_p < 0.0 {
        return Err(invalid("m_p", format!("must be >= 0, got {m_p}")));
    }
    let rest = m_p * consts.c * consts.c;
    if e_b.is_nan() || e_b < rest {
        return Err(Error::BelowRestEnergy { energy: e_b, rest });
    }
    let c = consts.c;
    // (E/c)² − (m c)² factored to keep precision near threshold.
    let pe = e_b / c;
    let pm = m_p * c;
    Ok(((pe - pm) * (pe + pm)).sqrt())
}

/// Lattice spacing `a_s = h / p_cut`, i.e. `ħ · 2π / a_s = p_cut`.
pub fn lattice_spacing_from_cutoff(consts: &PhysicalConstants, p_cut: f64) -> Result<f64> {
    if p_cut.is_nan() || p_cut <= 0.0 {
        return Err(invalid("p_cut", format!("must be > 0, got {p_cut}")));
    }
    Ok(consts.h / p_cut)
}

/// Extent `2π / a_s` of the first Brillouin zone.
pub fn bz_extent(a_s: f64) -> Result<f64> {
    Ok(2.0 * PI / positive("a_s", a_s)?)
}

/// One pass of the cutoff chain: momentum → spacing → zone extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffEstimate {
    pub e_b: f64,
    pub m_p: f64,
    pub p_cut: f64,
    pub a_s: f64,
    pub bz_extent: f64,
}

impl CutoffEstimate {
    /// Chain starting from an upper energy bound via the exact momentum formula.
    pub fn from_energy(consts: &PhysicalConstants, e_b: f64, m_p: f64) -> Result<Self> {
        let p_cut = cutoff_momentum(consts, e_b, m_p)?;
        Self::from_momentum(consts, e_b, m_p, p_cut)
    }

    /// Chain starting from a given momentum; `e_b`, `m_p` are kept for reference.
    pub fn from_momentum(
        consts: &PhysicalConstants,
        e_b: f64,
        m_p: f64,
        p_cut: f64,
    ) -> Result<Self> {
        let a_s = lattice_spacing_from_cutoff(consts, p_cut)?;
        Ok(CutoffEstimate {
            e_b,
            m_p,
            p_cut,
            a_s,
            bz_extent: bz_extent(a_s)?,
        })
    }
}

/// Both cutoff chains side by side: the one computed from the energy bound and
/// the one seeded with a quoted momentum. `inconsistent` is raised when the two
/// momenta differ by more than an order of magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffReport {
    pub e_b_ev: f64,
    pub exact: CutoffEstimate,
    pub stated: CutoffEstimate,
    pub momentum_ratio: f64,
    pub inconsistent: bool,
}

pub fn cutoff_report(
    consts: &PhysicalConstants,
    e_b_ev: f64,
    m_p: f64,
    p_stated: f64,
) -> Result<CutoffReport> {
    let e_b = e_b_ev * consts.ev;
    let exact = CutoffEstimate::from_energy(consts, e_b, m_p)?;
    let stated = CutoffEstimate::from_momentum(consts, e_b, m_p, p_stated)?;
    let momentum_ratio = exact.p_cut / stated.p_cut;
    Ok(CutoffReport {
        e_b_ev,
        exact,
        stated,
        momentum_ratio,
        inconsistent: !(0.1..=10.0).contains(&momentum_ratio),
    })
}
