//! Conservation-law densities, fluxes and residuals.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::calculus::{curl, grad, Field, Grid, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::solver::{current, MhdState, Tendency};
use crate::thermo::{Eos, ThermoFields};

mod currents;
mod invariants;
mod pv;

pub use currents::{
    current_conservation, eulerian_current, eulerian_generator, label_current, LabelCurrent, noether_currents, CurrentFlux,
    NoetherCurrents,
};
pub use invariants::{advected_invariants, invariant_drift, AdvectedInvariants};
pub use pv::{
    cheviakov_residual, pv_density, pv_residual, vorticity_residuals, CheviakovSystem, FScalar,
    PvVariant, VorticityReports,
};


/// How time derivatives of densities are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// product rule applied to the solver tendencies
    SemiDiscrete,
    /// centred difference over neighbouring stored states
    Snapshot,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::SemiDiscrete => "semi-discrete",
            Mode::Snapshot => "snapshot",
        }
    }
}

/// A state together with what is needed for its time derivatives.
#[derive(Debug, Clone, Copy)]
pub enum TimeSample<'a> {
    SemiDiscrete {
        state: &'a MhdState,
        k: &'a Tendency,
    },
    Snapshot {
        prev: &'a MhdState,
        state: &'a MhdState,
        next: &'a MhdState,
    },
}

impl<'a> TimeSample<'a> {
    pub fn state(&self) -> &'a MhdState {
        match self {
            TimeSample::SemiDiscrete { state, .. } | TimeSample::Snapshot { state, .. } => state,
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            TimeSample::SemiDiscrete { .. } => Mode::SemiDiscrete,
            TimeSample::Snapshot { .. } => Mode::Snapshot,
        }
    }

    fn snapshot_span(prev: &MhdState, state: &MhdState, next: &MhdState) -> Result<f64> {
        let (a, b) = (state.t - prev.t, next.t - state.t);
        if !(a > 0.0 && b > 0.0) || (a - b).abs() > 1e-9 * a.max(b) {
            return Err(Error::TimeLevels(format!(
                "snapshot needs equally spaced levels around t = {} (got {} and {})",
                state.t, prev.t, next.t
            )));
        }
        Ok(next.t - prev.t)
    }

    /// `d/dt q`, either from `semi(state, k)` or as a centred difference of `q`.
    pub fn time_derivative(
        &self,
        q: impl Fn(&MhdState) -> Result<ScalarField>,
        semi: impl FnOnce(&MhdState, &Tendency) -> Result<ScalarField>,
    ) -> Result<ScalarField> {
        match *self {
            TimeSample::SemiDiscrete { state, k } => semi(state, k),
            TimeSample::Snapshot { prev, state, next } => {
                let span = Self::snapshot_span(prev, state, next)?;
                Ok((&q(next)? - &q(prev)?).scale(1.0 / span))
            }
        }
    }

    pub fn time_derivative_vector(
        &self,
        q: impl Fn(&MhdState) -> Result<VectorField>,
        semi: impl FnOnce(&MhdState, &Tendency) -> Result<VectorField>,
    ) -> Result<VectorField> {
        match *self {
            TimeSample::SemiDiscrete { state, k } => semi(state, k),
            TimeSample::Snapshot { prev, state, next } => {
                let span = Self::snapshot_span(prev, state, next)?;
                Ok((&q(next)? - &q(prev)?).scale(1.0 / span))
            }
        }
    }
}

/// Switches that perturb or extend the canonical expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    /// multiplies the Lorentz term of the force; `-1` is a deliberate defect
    pub lorentz_sign: f64,
    /// add `curl[(u . grad psi) u]` to the Cheviakov flux
    pub cheviakov_curl_term: bool,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            lorentz_sign: 1.0,
            cheviakov_curl_term: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "Linf")]
    pub linf: f64,
}

impl Norms {
    pub fn of(field: &Field) -> Self {
        match field {
            Field::Scalar(f) => Self {
                l2: f.l2(),
                linf: f.linf(),
            },
            Field::Vector(v) => Self {
                l2: v.l2(),
                linf: v.linf(),
            },
        }
    }

    pub fn scalar(f: &ScalarField) -> Self {
        Self {
            l2: f.l2(),
            linf: f.linf(),
        }
    }

    pub fn vector(v: &VectorField) -> Self {
        Self {
            l2: v.l2(),
            linf: v.linf(),
        }
    }
}

/// A named identity evaluated on one state.
#[derive(Debug, Clone)]
pub struct ConservationReport {
    pub name: String,
    pub variant: Option<String>,
    pub mode: Mode,
    pub t: f64,
    pub grid: Grid,
    pub density: Option<ScalarField>,
    pub flux: Option<VectorField>,
    pub residual: Field,
    pub norms: Norms,
    pub premise_norms: BTreeMap<String, Norms>,
    pub side: Option<String>,
}

impl ConservationReport {
    pub fn new(name: &str, mode: Mode, t: f64, residual: Field) -> Self {
        let grid = *residual.grid();
        Self {
            name: name.to_string(),
            variant: None,
            mode,
            t,
            grid,
            density: None,
            flux: None,
            norms: Norms::of(&residual),
            residual,
            premise_norms: BTreeMap::new(),
            side: None,
        }
    }

    /// Conservation law `d_t density + div flux`.
    pub fn law(name: &str, mode: Mode, t: f64, density: ScalarField, density_t: &ScalarField, flux: VectorField) -> Self {
        let residual = density_t + &crate::calculus::div(&flux);
        let mut r = Self::new(name, mode, t, Field::Scalar(residual));
        r.density = Some(density);
        r.flux = Some(flux);
        r
    }

    pub fn with_variant(mut self, v: &str) -> Self {
        self.variant = Some(v.to_string());
        self
    }

    pub fn with_side(mut self, s: &str) -> Self {
        self.side = Some(s.to_string());
        self
    }

    pub fn with_premise(mut self, name: &str, norms: Norms) -> Self {
        self.premise_norms.insert(name.to_string(), norms);
        self
    }

    pub fn summary(&self) -> ReportSummary {
        let [nx, ny, nz] = self.grid.n();
        ReportSummary {
            name: self.name.clone(),
            variant: self.variant.clone(),
            mode: self.mode.as_str(),
            t: self.t,
            grid: GridSummary {
                nx,
                ny,
                nz,
                order: self.grid.order(),
            },
            norms: self.norms,
            premise_norms: if self.premise_norms.is_empty() {
                None
            } else {
                Some(self.premise_norms.clone())
            },
            side: self.side.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSummary {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub order: usize,
}

/// Serializable face of a [`ConservationReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub name: String,
    pub variant: Option<String>,
    pub mode: &'static str,
    pub t: f64,
    pub grid: GridSummary,
    pub norms: Norms,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub premise_norms: Option<BTreeMap<String, Norms>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
}

/// `F = T grad S + grad(u^2/2 - h) + J x B / rho` and its parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceField {
    pub total: VectorField,
    pub thermal: VectorField,
    /// `grad g` with `g = u^2/2 - h`
    pub gradient: VectorField,
    pub lorentz: VectorField,
    pub g: ScalarField,
}

impl ForceField {
    /// The non-gradient part `T grad S + J x B / rho`.
    pub fn rotational(&self) -> VectorField {
        &self.thermal + &self.lorentz
    }
}

pub fn force_f(state: &MhdState, eos: &Eos) -> Result<ForceField> {
    force_f_with(state, eos, &Controls::default())
}

pub fn force_f_with(state: &MhdState, eos: &Eos, ctl: &Controls) -> Result<ForceField> {
    let thermo = ThermoFields::evaluate(eos, &state.rho, &state.s)?;
    let thermal = grad(&state.s).scale_by(&thermo.temperature);
    let g = state.u.norm_sq().zip_map(&thermo.h, |u2, h| 0.5 * u2 - h);
    let gradient = grad(&g);
    let lorentz = current(&state.b, eos.mu0)
        .cross(&state.b)
        .div_by(&state.rho)
        .scale(ctl.lorentz_sign);
    let total = &(&thermal + &gradient) + &lorentz;
    Ok(ForceField {
        total,
        thermal,
        gradient,
        lorentz,
        g,
    })
}

/// Vorticity `curl u`.
pub fn vorticity(u: &VectorField) -> VectorField {
    curl(u)
}
