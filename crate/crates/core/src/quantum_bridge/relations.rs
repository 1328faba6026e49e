use serde::Serialize;

use crate::dispersion::PhysicalConstants;
use crate::error::{invalid, Result};

/// Inputs of the chain `½hω = ½mω²a²`, `v = aω`, `v → c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationInputs {
    pub m: f64,
    pub a: f64,
    pub omega: f64,
    pub c: f64,
    pub consts: PhysicalConstants,
}

impl RelationInputs {
    pub fn new(m: f64, a: f64, omega: f64, c: f64, consts: PhysicalConstants) -> Result<Self> {
        for (name, x) in [("m", m), ("a", a), ("omega", omega), ("c", c)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(invalid(name, format!("must be finite and > 0, got {x}")));
            }
        }
        Ok(RelationInputs {
            m,
            a,
            omega,
            c,
            consts,
        })
    }

    /// Inputs with `c` taken from the constants and `ω = c/a`.
    pub fn with_light_speed(m: f64, a: f64, consts: PhysicalConstants) -> Result<Self> {
        Self::new(m, a, consts.c / a, consts.c, consts)
    }

    /// `h = m ω a²` from equating `½hω` with the classical `½mω²a²`.
    pub fn energy_balance_quantum(&self) -> f64 {
        self.m * self.omega * self.a * self.a
    }
}

/// `h = m c a`.
pub fn planck_from_lattice(inputs: &RelationInputs) -> f64 {
    inputs.m * inputs.c * inputs.a
}

/// Oscillator mass `h / (c a)` that reproduces Planck's constant for spacing `a`.
pub fn medium_atom_mass(consts: &PhysicalConstants, a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", format!("must be finite and > 0, got {a}")));
    }
    Ok(consts.h / (consts.c * a))
}
