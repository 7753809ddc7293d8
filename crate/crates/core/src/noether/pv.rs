use crate::calculus::{curl, div, grad, Field, VectorField, ScalarField};
use crate::error::{Error, Result};
use crate::solver::{label_tendency, MhdState, Tendency};
use crate::thermo::Eos;

use super::{force_f_with, vorticity, ConservationReport, Controls, Norms, TimeSample};

/// `(curl u) . grad psi`
pub fn pv_density(state: &MhdState, psi: &str) -> Result<ScalarField> {
    let label = state.label(psi)?;
    Ok(vorticity(&state.u).dot(&label.grad()))
}

fn pv_density_rate(state: &MhdState, k: &Tendency, psi: &str) -> Result<ScalarField> {
    let label = state.label(psi)?;
    let psi_t = k
        .labels
        .get(psi)
        .ok_or_else(|| Error::UnknownLabel(psi.to_string()))?;
    let a = curl(&k.u).dot(&label.grad());
    let b = vorticity(&state.u).dot(&grad(psi_t));
    Ok(&a + &b)
}

/// Flux variants of the potential-vorticity law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvVariant {
    /// `q u - (T grad S + J x B / rho) x grad psi`
    Mhd,
    /// `q u`, valid for `B = 0` and `grad psi x grad S = 0`
    Hydro,
    /// `q u - F x grad psi`
    FullF,
}

impl PvVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            PvVariant::Mhd => "mhd",
            PvVariant::Hydro => "hydro",
            PvVariant::FullF => "fullF",
        }
    }

    pub fn report_name(self) -> &'static str {
        match self {
            PvVariant::Mhd => "eq1.3",
            PvVariant::Hydro => "eq1.2",
            PvVariant::FullF => "nfa19",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mhd" => Some(PvVariant::Mhd),
            "hydro" => Some(PvVariant::Hydro),
            "fullF" | "fullf" | "full-f" => Some(PvVariant::FullF),
            _ => None,
        }
    }
}

/// Residual of `d_t (omega . grad psi) + div(flux) = 0`.
///
/// In the full-force variant the gradient part `grad g x grad psi` of the flux
/// is formed as `curl(g grad psi)`, its continuum equal, so that the discrete
/// divergence of the difference between the variants vanishes identically.
pub fn pv_residual(
    sample: TimeSample<'_>,
    eos: &Eos,
    psi: &str,
    variant: PvVariant,
    ctl: &Controls,
) -> Result<ConservationReport> {
    let state = sample.state();
    let q = pv_density(state, psi)?;
    let q_t = sample.time_derivative(|s| pv_density(s, psi), |s, k| pv_density_rate(s, k, psi))?;
    let grad_psi = state.label(psi)?.grad();
    let advected = state.u.scale_by(&q);
    let mut premises = Vec::new();
    let flux = match variant {
        PvVariant::Hydro => {
            premises.push(("B", Norms::vector(&state.b)));
            premises.push(("gradpsi_x_gradS", Norms::vector(&grad_psi.cross(&grad(&state.s)))));
            advected
        }
        PvVariant::Mhd => {
            let f = force_f_with(state, eos, ctl)?;
            &advected - &f.rotational().cross(&grad_psi)
        }
        PvVariant::FullF => {
            let f = force_f_with(state, eos, ctl)?;
            let gradient_part = curl(&grad_psi.scale_by(&f.g));
            &(&advected - &f.rotational().cross(&grad_psi)) - &gradient_part
        }
    };
    let mut r = ConservationReport::law(variant.report_name(), sample.mode(), state.t, q, &q_t, flux)
        .with_variant(variant.as_str());
    for (name, n) in premises {
        r = r.with_premise(name, n);
    }
    Ok(r)
}

type VecProvider<'a> = Box<dyn Fn(&MhdState) -> Result<VectorField> + Sync + 'a>;
type VecRate<'a> = Box<dyn Fn(&MhdState, &Tendency) -> Result<VectorField> + Sync + 'a>;

/// The scalar `F` of a Cheviakov law.
#[derive(Debug, Clone, PartialEq)]
pub enum FScalar {
    /// an advected label, so `F_t = -u . grad F`
    Label(String),
    Constant(f64),
}

/// Fields `N`, `M`, `F` with `div N = 0` and `N_t + curl M = 0`, giving the law
/// `d_t (N . grad F) + div(M x grad F - F_t N) = 0`.
pub struct CheviakovSystem<'a> {
    pub n: VecProvider<'a>,
    /// `N_t` from tendencies, needed in semi-discrete mode
    pub n_t: Option<VecRate<'a>>,
    pub m: VecProvider<'a>,
    pub f: FScalar,
}

impl<'a> CheviakovSystem<'a> {
    /// `N = omega`, `M = -u x omega - (T grad S + J x B / rho)`, `F = psi`.
    pub fn canonical(eos: &'a Eos, psi: &str, ctl: Controls) -> Self {
        Self {
            n: Box::new(|s| Ok(vorticity(&s.u))),
            n_t: Some(Box::new(|_, k| Ok(curl(&k.u)))),
            m: Box::new(move |s| {
                let f = force_f_with(s, eos, &ctl)?;
                let om = vorticity(&s.u);
                Ok(&s.u.cross(&om).scale(-1.0) - &f.rotational())
            }),
            f: FScalar::Label(psi.to_string()),
        }
    }

    /// `N = B`, `M = -u x B` (Faraday's law).
    pub fn magnetic(f: FScalar) -> Self {
        Self {
            n: Box::new(|s| Ok(s.b.clone())),
            n_t: Some(Box::new(|_, k| Ok(k.b.clone()))),
            m: Box::new(|s| Ok(s.u.cross(&s.b).scale(-1.0))),
            f,
        }
    }
}

pub fn cheviakov_residual(
    sample: TimeSample<'_>,
    system: &CheviakovSystem<'_>,
    ctl: &Controls,
) -> Result<ConservationReport> {
    let state = sample.state();
    let grid = *state.grid();
    let grad_f = |s: &MhdState| -> Result<VectorField> {
        match &system.f {
            FScalar::Label(name) => Ok(s.label(name)?.grad()),
            FScalar::Constant(_) => Ok(VectorField::zeros(grid)),
        }
    };
    let f_t = |s: &MhdState| -> Result<ScalarField> {
        match &system.f {
            FScalar::Label(name) => Ok(label_tendency(&s.u, s.label(name)?)),
            FScalar::Constant(_) => Ok(ScalarField::zeros(grid)),
        }
    };
    let n = (system.n)(state)?;
    let m = (system.m)(state)?;
    let gf = grad_f(state)?;
    let ft = f_t(state)?;
    let density = n.dot(&gf);

    let n_t = sample.time_derivative_vector(&system.n, |s, k| match &system.n_t {
        Some(rate) => rate(s, k),
        None => Err(Error::TimeLevels("semi-discrete mode needs N_t from the provider".into())),
    })?;
    let density_t = sample.time_derivative(
        |s| Ok((system.n)(s)?.dot(&grad_f(s)?)),
        |s, k| {
            let grad_ft = match &system.f {
                FScalar::Label(name) => grad(
                    k.labels
                        .get(name)
                        .ok_or_else(|| Error::UnknownLabel(name.clone()))?,
                ),
                FScalar::Constant(_) => VectorField::zeros(grid),
            };
            Ok(&n_t.dot(&grad_f(s)?) + &n.dot(&grad_ft))
        },
    )?;

    let mut flux = &m.cross(&gf) - &n.scale_by(&ft);
    if ctl.cheviakov_curl_term {
        flux = &flux + &curl(&state.u.scale_by(&state.u.dot(&gf)));
    }
    let premise_div = div(&n);
    let premise_faraday = &n_t + &curl(&m);
    Ok(
        ConservationReport::law("eq1.5", sample.mode(), state.t, density, &density_t, flux)
            .with_premise("div_N", Norms::scalar(&premise_div))
            .with_premise("dtN_plus_curlM", Norms::vector(&premise_faraday)),
    )
}

/// The three vorticity-level identities.
#[derive(Debug, Clone)]
pub struct VorticityReports {
    /// `u_t - u x omega + grad |u|^2 - F`
    pub momentum_form: ConservationReport,
    /// `omega_t - curl(u x omega) - curl F`
    pub vorticity_eq: ConservationReport,
    /// `d_t grad psi + grad(u . grad psi)`
    pub grad_advect: ConservationReport,
}

pub fn vorticity_residuals(
    sample: TimeSample<'_>,
    eos: &Eos,
    psi: &str,
    ctl: &Controls,
) -> Result<VorticityReports> {
    let state = sample.state();
    let mode = sample.mode();
    let t = state.t;
    let u_t = sample.time_derivative_vector(|s| Ok(s.u.clone()), |_, k| Ok(k.u.clone()))?;
    let f = force_f_with(state, eos, ctl)?;
    let om = vorticity(&state.u);
    let u_x_om = state.u.cross(&om);

    let momentum = &(&(&u_t - &u_x_om) + &grad(&state.u.norm_sq())) - &f.total;
    let vort = &(&curl(&u_t) - &curl(&u_x_om)) - &curl(&f.total);

    let label = state.label(psi)?;
    let grad_psi_t = sample.time_derivative_vector(
        |s| Ok(s.label(psi)?.grad()),
        |_, k| {
            Ok(grad(
                k.labels
                    .get(psi)
                    .ok_or_else(|| Error::UnknownLabel(psi.to_string()))?,
            ))
        },
    )?;
    let advect = &grad_psi_t + &grad(&state.u.dot(&label.grad()));

    Ok(VorticityReports {
        momentum_form: ConservationReport::new("nfa34", mode, t, Field::Vector(momentum)),
        vorticity_eq: ConservationReport::new("nfa35", mode, t, Field::Vector(vort)),
        grad_advect: ConservationReport::new("nfa36", mode, t, Field::Vector(advect)),
    })
}
