//! Equation of state and first-law relations.
//!
//! The closure is `eps(rho, S) = rho^gamma exp((S - S_ref)/cv) / (gamma - 1)`,
//! from which `p = rho eps_rho - eps`, `rho T = eps_S` and `h = (eps + p)/rho`
//! all follow in closed form.

use serde::{Deserialize, Serialize};

use crate::calculus::ScalarField;
use crate::error::{Error, Result};

/// Thermodynamic state at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    /// internal energy per unit volume
    pub eps: f64,
    pub p: f64,
    pub temperature: f64,
    /// specific enthalpy
    pub h: f64,
}

/// An internal-energy closure `eps(rho, S)`.
pub trait EquationOfState: Sync {
    fn eval(&self, rho: f64, s: f64) -> Result<ThermoPoint>;

    /// Isentropic sound speed squared, `dp/drho` at fixed `S`.
    fn sound_speed_sq(&self, rho: f64, s: f64) -> Result<f64>;

    /// Entropy giving pressure `p` at density `rho`.
    fn entropy_for(&self, rho: f64, p: f64) -> Result<f64>;

    fn mu0(&self) -> f64;
}

/// Polytropic gas with entropy dependence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eos {
    pub gamma: f64,
    pub cv: f64,
    pub s_ref: f64,
    pub mu0: f64,
}

impl Default for Eos {
    fn default() -> Self {
        Self {
            gamma: 5.0 / 3.0,
            cv: 1.0,
            s_ref: 0.0,
            mu0: 1.0,
        }
    }
}

impl Eos {
    pub fn new(gamma: f64, cv: f64, s_ref: f64, mu0: f64) -> Result<Self> {
        let eos = Self {
            gamma,
            cv,
            s_ref,
            mu0,
        };
        eos.validate()?;
        Ok(eos)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0) {
            return Err(Error::Config(format!("eos.gamma must exceed 1 (got {})", self.gamma)));
        }
        if !(self.cv > 0.0) {
            return Err(Error::Config(format!("eos.cv must be positive (got {})", self.cv)));
        }
        if !(self.mu0 > 0.0) {
            return Err(Error::Config(format!("eos.mu0 must be positive (got {})", self.mu0)));
        }
        if !self.s_ref.is_finite() {
            return Err(Error::Config("eos.s_ref must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn pressure(&self, rho: f64, s: f64) -> f64 {
        rho.powf(self.gamma) * ((s - self.s_ref) / self.cv).exp()
    }

    #[inline]
    pub fn internal_energy(&self, rho: f64, s: f64) -> f64 {
        self.pressure(rho, s) / (self.gamma - 1.0)
    }

    /// Pointwise pressure field; fails on the first non-positive density.
    pub fn pressure_field(&self, rho: &ScalarField, s: &ScalarField) -> Result<ScalarField> {
        check_density(rho)?;
        Ok(rho.zip_map(s, |r, s| self.pressure(r, s)))
    }
}

fn check_density(rho: &ScalarField) -> Result<()> {
    if let Some(index) = rho.values().iter().position(|&r| !(r > 0.0)) {
        let value = rho.values()[index];
        return Err(Error::NonPositiveDensity {
            value,
            index,
            position: rho.grid().coords(index),
        });
    }
    Ok(())
}

impl EquationOfState for Eos {
    fn eval(&self, rho: f64, s: f64) -> Result<ThermoPoint> {
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("density must be positive (got {rho})")));
        }
        let p = self.pressure(rho, s);
        let eps = p / (self.gamma - 1.0);
        Ok(ThermoPoint {
            eps,
            p,
            temperature: eps / (rho * self.cv),
            h: (eps + p) / rho,
        })
    }

    fn sound_speed_sq(&self, rho: f64, s: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("density must be positive (got {rho})")));
        }
        Ok(self.gamma * self.pressure(rho, s) / rho)
    }

    fn entropy_for(&self, rho: f64, p: f64) -> Result<f64> {
        if !(rho > 0.0 && p > 0.0) {
            return Err(Error::Domain(format!(
                "need rho > 0 and p > 0 (got rho = {rho}, p = {p})"
            )));
        }
        Ok(self.s_ref + self.cv * (p / rho.powf(self.gamma)).ln())
    }

    fn mu0(&self) -> f64 {
        self.mu0
    }
}

pub fn eos_eval(eos: &Eos, rho: f64, s: f64) -> Result<ThermoPoint> {
    eos.eval(rho, s)
}

/// Field-valued thermodynamic quantities.
#[derive(Debug, Clone)]
pub struct ThermoFields {
    pub eps: ScalarField,
    pub p: ScalarField,
    pub temperature: ScalarField,
    pub h: ScalarField,
}

impl ThermoFields {
    pub fn evaluate(eos: &Eos, rho: &ScalarField, s: &ScalarField) -> Result<Self> {
        let p = eos.pressure_field(rho, s)?;
        let eps = p.scale(1.0 / (eos.gamma - 1.0));
        let temperature = eps.zip_map(rho, |e, r| e / (r * eos.cv));
        let h = (&eps + &p).div(rho);
        Ok(Self {
            eps,
            p,
            temperature,
            h,
        })
    }
}
