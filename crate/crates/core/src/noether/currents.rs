//! Relabelling currents for the generator built from two labels `psi`, `chi`.
//!
//! In label space `W = grad0 psi x grad0 chi` and `V^{x0} = -W / rho0`; the
//! canonical generator is `V = F W / rho0`, which in Eulerian form reads
//! `V = (grad psi x grad chi) / rho`.

use crate::calculus::{grad, vector_from_index_fn, Kernel, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::lagrange::{
    map_reconstruct, sample_at_tracers, sample_vector_at_tracers, LagrangianMap, MapGeometry,
};
use crate::mat3;
use crate::solver::MhdState;
use crate::thermo::{Eos, ThermoFields};

use super::{ConservationReport, Norms, TimeSample};

fn missing(name: &str) -> Error {
    Error::Config(format!("relabelling generator needs label `{name}`"))
}

/// Label-space density and flux, by the foliation formula and by the generic
/// Noether formula.
#[derive(Debug, Clone)]
pub struct LabelCurrent {
    pub i0: ScalarField,
    pub i: VectorField,
    pub i0_generic: ScalarField,
    pub i_generic: VectorField,
}

/// `velocity` is `x_t` at each tracer, `phi` the potential there (if any).
pub fn label_current(
    map: &LagrangianMap,
    geom: &MapGeometry,
    eos: &Eos,
    velocity: &VectorField,
    phi: Option<&ScalarField>,
    psi: &str,
    chi: &str,
) -> Result<LabelCurrent> {
    let grid = *map.grid();
    let psi0 = map.labels0.get(psi).ok_or_else(|| missing(psi))?;
    let chi0 = map.labels0.get(chi).ok_or_else(|| missing(chi))?;
    let w = psi0.grad().cross(&chi0.grad());
    let recon = map_reconstruct(map, geom);
    let p = eos.pressure_field(&recon.rho, &recon.s)?;
    let mu0 = eos.mu0;

    let n = grid.len();
    let mut i0 = Vec::with_capacity(n);
    let mut i = Vec::with_capacity(n);
    let mut i0g = Vec::with_capacity(n);
    let mut ig = Vec::with_capacity(n);
    for idx in 0..n {
        let f = map.f.at(idx);
        let a = geom.a.at(idx);
        let jac = geom.j.values()[idx];
        let u = velocity.at(idx);
        let b = recon.b.at(idx);
        let b0 = map.b0.at(idx);
        let wv = w.at(idx);
        let rho0 = map.rho0.values()[idx];
        let rho = recon.rho.values()[idx];
        let s0 = map.s0.values()[idx];
        let pr = p.values()[idx];
        let phi_v = phi.map_or(0.0, |f| f.values()[idx]);
        let b2 = mat3::norm_sq(&b);
        let ell = 0.5 * rho * mat3::norm_sq(&u) - eos.internal_energy(rho, s0) - b2 / (2.0 * mu0) - rho * phi_v;

        let fw = mat3::mat_vec(&f, &wv);
        i0.push(mat3::dot(&u, &fw));
        let c = (pr + b2 / (2.0 * mu0) - ell) / rho;
        let ftb = mat3::mat_t_vec(&f, &b);
        let wb = mat3::dot(&wv, &ftb) / (mu0 * rho0);
        i.push([0, 1, 2].map(|j| c * wv[j] - wb * b0[j]));

        // V_hat^k sigma_ks A_sj + V^{x0}_j ell0
        let v_hat = fw.map(|v| v / rho0);
        let ptot = pr + b2 / (2.0 * mu0);
        let vb = mat3::dot(&v_hat, &b);
        let vs = [0, 1, 2].map(|s| ptot * v_hat[s] - vb * b[s] / mu0);
        let ell0 = ell * jac;
        i0g.push(rho0 * mat3::dot(&u, &v_hat));
        ig.push([0, 1, 2].map(|j| {
            (0..3).map(|s| vs[s] * a[s][j]).sum::<f64>() - wv[j] / rho0 * ell0
        }));
    }
    Ok(LabelCurrent {
        i0: ScalarField::from_vec(grid, i0)?,
        i: vector_from_index_fn(grid, |k| i[k]),
        i0_generic: ScalarField::from_vec(grid, i0g)?,
        i_generic: vector_from_index_fn(grid, |k| ig[k]),
    })
}

/// Flux expression used for the Eulerian current.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurrentFlux {
    /// `V . [rho u u + (eps + p + rho Phi + B^2/mu0 - rho u^2/2) I - B B / mu0]`
    Full,
    /// `rho V (h + Phi - u^2/2) + E x B / mu0` with `E = -V x B`; lacks the
    /// advective part `rho (u . V) u`
    WithoutAdvection,
}

/// `V = (grad psi x grad chi) / rho` on the grid.
pub fn eulerian_generator(state: &MhdState, psi: &str, chi: &str) -> Result<VectorField> {
    let gp = state.labels.get(psi).ok_or_else(|| missing(psi))?.grad();
    let gc = state.labels.get(chi).ok_or_else(|| missing(chi))?.grad();
    Ok(gp.cross(&gc).div_by(&state.rho))
}

/// Eulerian density `rho u . V` and flux.
pub fn eulerian_current(
    state: &MhdState,
    eos: &Eos,
    psi: &str,
    chi: &str,
    form: CurrentFlux,
) -> Result<(ScalarField, VectorField)> {
    let v = eulerian_generator(state, psi, chi)?;
    let th = ThermoFields::evaluate(eos, &state.rho, &state.s)?;
    let grid = *state.grid();
    let mu0 = eos.mu0;
    let f0 = state.u.dot(&v).zip_map(&state.rho, |uv, r| r * uv);
    let flux = vector_from_index_fn(grid, |n| {
        let u = state.u.at(n);
        let b = state.b.at(n);
        let vv = v.at(n);
        let rho = state.rho.values()[n];
        let phi = state.phi.as_ref().map_or(0.0, |f| f.values()[n]);
        let u2 = mat3::norm_sq(&u);
        let b2 = mat3::norm_sq(&b);
        let vb = mat3::dot(&vv, &b);
        let uv = mat3::dot(&u, &vv);
        let eps = th.eps.values()[n];
        let p = th.p.values()[n];
        let scalar = eps + p + rho * phi + b2 / mu0 - 0.5 * rho * u2;
        let advective = match form {
            CurrentFlux::Full => rho * uv,
            CurrentFlux::WithoutAdvection => 0.0,
        };
        [0, 1, 2].map(|j| advective * u[j] + scalar * vv[j] - vb * b[j] / mu0)
    });
    Ok((f0, flux))
}

/// Residual of `d_t F0 + div F = 0`.
pub fn current_conservation(
    sample: TimeSample<'_>,
    eos: &Eos,
    psi: &str,
    chi: &str,
    form: CurrentFlux,
) -> Result<ConservationReport> {
    let state = sample.state();
    let (f0, flux) = eulerian_current(state, eos, psi, chi, form)?;
    let f0_t = sample.time_derivative(
        |s| Ok(eulerian_current(s, eos, psi, chi, form)?.0),
        |s, k| {
            let gp = s.label(psi)?.grad();
            let gc = s.label(chi)?.grad();
            let rate = |name: &str| {
                k.labels
                    .get(name)
                    .map(grad)
                    .ok_or_else(|| Error::UnknownLabel(name.to_string()))
            };
            let (gpt, gct) = (rate(psi)?, rate(chi)?);
            let w = gp.cross(&gc);
            let w_t = &gpt.cross(&gc) + &gp.cross(&gct);
            Ok(&k.u.dot(&w) + &s.u.dot(&w_t))
        },
    )?;
    let variant = match form {
        CurrentFlux::Full => "full",
        CurrentFlux::WithoutAdvection => "without-advection",
    };
    Ok(ConservationReport::law("eq4.35da", sample.mode(), state.t, f0, &f0_t, flux).with_variant(variant))
}

/// Label and Eulerian currents with their consistency checks.
#[derive(Debug, Clone)]
pub struct NoetherCurrents {
    pub label: LabelCurrent,
    pub f0: ScalarField,
    pub fvec: VectorField,
    /// pushforward of `(I0, I)` minus `(F0, F)` sampled at the tracers
    pub pushforward_density: Norms,
    pub pushforward_flux: Norms,
    /// foliation formula minus generic formula
    pub generic_density: Norms,
    pub generic_flux: Norms,
    pub conservation: ConservationReport,
}

pub fn noether_currents(
    map: &LagrangianMap,
    geom: &MapGeometry,
    sample: TimeSample<'_>,
    eos: &Eos,
    psi: &str,
    chi: &str,
    kernel: Kernel,
) -> Result<NoetherCurrents> {
    let state = sample.state();
    let velocity = sample_vector_at_tracers(&state.u, map, kernel)?;
    let phi = match &state.phi {
        Some(p) => Some(sample_at_tracers(p, map, kernel)?),
        None => None,
    };
    let label = label_current(map, geom, eos, &velocity, phi.as_ref(), psi, chi)?;
    let (f0, fvec) = eulerian_current(state, eos, psi, chi, CurrentFlux::Full)?;

    let grid = *map.grid();
    let push0 = label.i0.div(&geom.j);
    let push = vector_from_index_fn(grid, |n| {
        let i0 = label.i0.values()[n];
        let iv = label.i.at(n);
        let u = velocity.at(n);
        let xi = mat3::mat_vec(&map.f.at(n), &iv);
        let j = geom.j.values()[n];
        [0, 1, 2].map(|c| (u[c] * i0 + xi[c]) / j)
    });
    let f0_t = sample_at_tracers(&f0, map, kernel)?;
    let fvec_t = sample_vector_at_tracers(&fvec, map, kernel)?;

    let conservation = current_conservation(sample, eos, psi, chi, CurrentFlux::Full)?;
    Ok(NoetherCurrents {
        pushforward_density: Norms::scalar(&(&push0 - &f0_t)),
        pushforward_flux: Norms::vector(&(&push - &fvec_t)),
        generic_density: Norms::scalar(&(&label.i0 - &label.i0_generic)),
        generic_flux: Norms::vector(&(&label.i - &label.i_generic)),
        label,
        f0,
        fvec,
        conservation,
    })
}
