//! Ideal MHD in primitive variables with advected labels, stepped by RK4.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::calculus::{advective, curl, div, grad, AffineField, Grid, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::thermo::{Eos, ThermoFields};

#[cfg(test)]
mod tests;

/// Eulerian state.
#[derive(Debug, Clone, PartialEq)]
pub struct MhdState {
    pub rho: ScalarField,
    pub u: VectorField,
    /// specific entropy
    pub s: ScalarField,
    pub b: VectorField,
    pub labels: BTreeMap<String, AffineField>,
    /// vector potential, evolved in the gauge that Lie-drags `A . dx`
    pub a: Option<VectorField>,
    /// static potential; `None` means zero
    pub phi: Option<ScalarField>,
    pub t: f64,
}

/// Time derivatives of the prognostic fields of an [`MhdState`].
///
/// Label entries are the tendencies of the periodic parts; slopes are constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub rho: ScalarField,
    pub u: VectorField,
    pub s: ScalarField,
    pub b: VectorField,
    pub labels: BTreeMap<String, ScalarField>,
    pub a: Option<VectorField>,
}

impl MhdState {
    /// Quiescent state with no labels on `grid`.
    pub fn uniform(grid: Grid, rho: f64, u: [f64; 3], s: f64, b: [f64; 3]) -> Self {
        Self {
            rho: ScalarField::constant(grid, rho),
            u: VectorField::constant(grid, u),
            s: ScalarField::constant(grid, s),
            b: VectorField::constant(grid, b),
            labels: BTreeMap::new(),
            a: None,
            phi: None,
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    pub fn with_label(mut self, name: &str, label: AffineField) -> Self {
        self.labels.insert(name.to_string(), label);
        self
    }

    pub fn label(&self, name: &str) -> Result<&AffineField> {
        self.labels
            .get(name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    /// Checks positivity of density and finiteness of every field.
    pub fn validate(&self) -> Result<()> {
        if let Some(index) = self.rho.values().iter().position(|&r| !(r > 0.0)) {
            return Err(Error::NonPositiveDensity {
                value: self.rho.values()[index],
                index,
                position: self.grid().coords(index),
            });
        }
        self.rho.ensure_finite("rho")?;
        self.u.ensure_finite("u")?;
        self.s.ensure_finite("S")?;
        self.b.ensure_finite("B")?;
        for (name, l) in &self.labels {
            l.periodic.ensure_finite(name)?;
        }
        if let Some(a) = &self.a {
            a.ensure_finite("A")?;
        }
        if let Some(phi) = &self.phi {
            phi.ensure_finite("Phi")?;
        }
        Ok(())
    }

    /// `self + dt * k`, keeping `t` and the static fields.
    pub fn advanced(&self, dt: f64, k: &Tendency) -> Self {
        let labels = self
            .labels
            .iter()
            .map(|(name, l)| {
                let periodic = l.periodic.axpy(dt, &k.labels[name]);
                (name.clone(), AffineField::new(l.slope, periodic))
            })
            .collect();
        Self {
            rho: self.rho.axpy(dt, &k.rho),
            u: self.u.axpy(dt, &k.u),
            s: self.s.axpy(dt, &k.s),
            b: self.b.axpy(dt, &k.b),
            labels,
            a: match (&self.a, &k.a) {
                (Some(a), Some(da)) => Some(a.axpy(dt, da)),
                (a, _) => a.clone(),
            },
            phi: self.phi.clone(),
            t: self.t,
        }
    }

    /// Magnitude scale `max(1, |rho|, |u|, |B|, |p|)` used to normalise residuals.
    pub fn scale(&self, eos: &Eos) -> Result<f64> {
        let p = eos.pressure_field(&self.rho, &self.s)?;
        Ok([1.0, self.rho.linf(), self.u.linf(), self.b.linf(), p.linf()]
            .into_iter()
            .fold(0.0, f64::max))
    }
}

impl Tendency {
    fn combine(parts: &[(f64, &Tendency)]) -> Self {
        let (w0, k0) = parts[0];
        let mut out = Tendency {
            rho: k0.rho.scale(w0),
            u: k0.u.scale(w0),
            s: k0.s.scale(w0),
            b: k0.b.scale(w0),
            labels: k0
                .labels
                .iter()
                .map(|(n, f)| (n.clone(), f.scale(w0)))
                .collect(),
            a: k0.a.as_ref().map(|a| a.scale(w0)),
        };
        for &(w, k) in &parts[1..] {
            out.rho = out.rho.axpy(w, &k.rho);
            out.u = out.u.axpy(w, &k.u);
            out.s = out.s.axpy(w, &k.s);
            out.b = out.b.axpy(w, &k.b);
            for (n, f) in out.labels.iter_mut() {
                *f = f.axpy(w, &k.labels[n]);
            }
            if let (Some(a), Some(da)) = (out.a.as_mut(), k.a.as_ref()) {
                *a = a.axpy(w, da);
            }
        }
        out
    }

    pub fn ensure_finite(&self) -> Result<()> {
        self.rho.ensure_finite("d rho/dt")?;
        self.u.ensure_finite("d u/dt")?;
        self.s.ensure_finite("d S/dt")?;
        self.b.ensure_finite("d B/dt")?;
        for (name, f) in &self.labels {
            f.ensure_finite(&format!("d {name}/dt"))?;
        }
        if let Some(a) = &self.a {
            a.ensure_finite("d A/dt")?;
        }
        Ok(())
    }
}

/// `-u . grad(label)` for the periodic part of an affine label.
pub fn label_tendency(u: &VectorField, label: &AffineField) -> ScalarField {
    u.dot(&label.grad()).scale(-1.0)
}

/// Current density `J = curl B / mu0`.
pub fn current(b: &VectorField, mu0: f64) -> VectorField {
    curl(b).scale(1.0 / mu0)
}

/// Time derivative of every prognostic field.
pub fn mhd_rhs(state: &MhdState, eos: &Eos) -> Result<Tendency> {
    let thermo = ThermoFields::evaluate(eos, &state.rho, &state.s)?;
    let rho = &state.rho;
    let u = &state.u;
    let b = &state.b;

    let drho = div(&u.scale_by(rho)).scale(-1.0);

    let j = current(b, eos.mu0);
    let lorentz = j.cross(b).div_by(rho);
    let grad_p = grad(&thermo.p).div_by(rho);
    let mut du = &(&lorentz - &grad_p) - &advective(u, u);
    if let Some(phi) = &state.phi {
        du = &du - &grad(phi);
    }

    let ds = u.dot(&grad(&state.s)).scale(-1.0);
    let db = curl(&u.cross(b));

    let labels = state
        .labels
        .par_iter()
        .map(|(name, l)| (name.clone(), label_tendency(u, l)))
        .collect();

    let a = state
        .a
        .as_ref()
        .map(|a| &u.cross(&curl(a)) - &grad(&u.dot(a)));

    let k = Tendency {
        rho: drho,
        u: du,
        s: ds,
        b: db,
        labels,
        a,
    };
    k.ensure_finite()?;
    Ok(k)
}

/// Largest step allowed by the fast-magnetosonic CFL condition.
pub fn stable_dt(state: &MhdState, eos: &Eos, cfl: f64) -> Result<f64> {
    let p = eos.pressure_field(&state.rho, &state.s)?;
    let g = state.grid();
    let speed = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let r = state.rho.values()[i];
            let u = state.u.at(i);
            let b = state.b.at(i);
            let umag = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            let b2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
            let cf2 = eos.gamma * p.values()[i] / r + b2 / (eos.mu0 * r);
            umag + cf2.sqrt()
        })
        .reduce(|| 0.0, f64::max);
    if speed == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(cfl * g.min_spacing() / speed)
}

/// One RK4 step together with the four stage states it evaluated.
#[derive(Debug, Clone)]
pub struct Step {
    pub next: MhdState,
    /// stage states at `t`, `t + dt/2`, `t + dt/2`, `t + dt`
    pub stages: [MhdState; 4],
    /// tendency at each stage
    pub k: [Tendency; 4],
}

const GROWTH_LIMIT: f64 = 10.0;
/// Fields whose L-inf starts below this fraction of the state scale are not
/// checked for relative growth (a field starting at zero is not unstable).
const GROWTH_FLOOR: f64 = 1e-6;

fn check_growth(before: &MhdState, after: &MhdState, scale: f64) -> Result<()> {
    let mut pairs: Vec<(String, f64, f64)> = vec![
        ("rho".into(), before.rho.linf(), after.rho.linf()),
        ("u".into(), before.u.linf(), after.u.linf()),
        ("S".into(), before.s.linf(), after.s.linf()),
        ("B".into(), before.b.linf(), after.b.linf()),
    ];
    for (name, l) in &before.labels {
        pairs.push((name.clone(), l.periodic.linf(), after.labels[name].periodic.linf()));
    }
    if let (Some(a0), Some(a1)) = (&before.a, &after.a) {
        pairs.push(("A".into(), a0.linf(), a1.linf()));
    }
    for (field, b, a) in pairs {
        let floor = GROWTH_FLOOR * scale;
        if !a.is_finite() || (a > floor && a > GROWTH_LIMIT * b.max(floor)) {
            return Err(Error::Instability {
                field,
                before: b,
                after: a,
            });
        }
    }
    Ok(())
}

/// Classical RK4 step exposing the stage states, so that tracers can be
/// advanced with the same stage velocities.
pub fn rk4_stages(state: &MhdState, eos: &Eos, dt: f64) -> Result<Step> {
    let s1 = state.clone();
    let k1 = mhd_rhs(&s1, eos)?;
    let mut s2 = state.advanced(0.5 * dt, &k1);
    s2.t = state.t + 0.5 * dt;
    let k2 = mhd_rhs(&s2, eos)?;
    let mut s3 = state.advanced(0.5 * dt, &k2);
    s3.t = state.t + 0.5 * dt;
    let k3 = mhd_rhs(&s3, eos)?;
    let mut s4 = state.advanced(dt, &k3);
    s4.t = state.t + dt;
    let k4 = mhd_rhs(&s4, eos)?;

    let sum = Tendency::combine(&[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)]);
    let mut next = state.advanced(dt / 6.0, &sum);
    next.t = state.t + dt;
    next.validate()?;
    check_growth(state, &next, state.scale(eos)?)?;
    Ok(Step {
        next,
        stages: [s1, s2, s3, s4],
        k: [k1, k2, k3, k4],
    })
}

/// Classical RK4 step; `dt` must respect [`stable_dt`] at unit CFL.
pub fn rk4_step(state: &MhdState, eos: &Eos, dt: f64) -> Result<MhdState> {
    let limit = stable_dt(state, eos, 1.0)?;
    if dt > limit {
        return Err(Error::Unstable { dt, limit });
    }
    Ok(rk4_stages(state, eos, dt)?.next)
}

/// Domain-integrated quantities.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub total_mass: f64,
    pub total_energy: f64,
    pub cross_helicity: f64,
    pub div_b_norm: f64,
}

/// Energy density `rho u^2/2 + eps + B^2/(2 mu0) + rho Phi`.
pub fn energy_density(state: &MhdState, eos: &Eos) -> Result<ScalarField> {
    let thermo = ThermoFields::evaluate(eos, &state.rho, &state.s)?;
    let kinetic = state.u.norm_sq().zip_map(&state.rho, |u2, r| 0.5 * r * u2);
    let magnetic = state.b.norm_sq().scale(0.5 / eos.mu0);
    let mut e = &(&kinetic + &thermo.eps) + &magnetic;
    if let Some(phi) = &state.phi {
        e = &e + &(&state.rho * phi);
    }
    Ok(e)
}

pub fn global_diagnostics(state: &MhdState, eos: &Eos) -> Result<Diagnostics> {
    Ok(Diagnostics {
        t: state.t,
        total_mass: state.rho.integral(),
        total_energy: energy_density(state, eos)?.integral(),
        cross_helicity: state.u.dot(&state.b).integral(),
        div_b_norm: div(&state.b).linf(),
    })
}
