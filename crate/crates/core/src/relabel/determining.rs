use std::collections::BTreeMap;

use crate::calculus::{advective, curl, div, grad, vector_from_index_fn, AffineField, Field, Kernel, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::lagrange::{ensure_synchronized, sample_vector_at_tracers, LagrangianMap, MapGeometry};
use crate::mat3;
use crate::noether::{ConservationReport, TimeSample};
use crate::solver::{MhdState, Tendency};
use crate::thermo::{Eos, ThermoFields};

/// Gauge fields `(Lambda^0, Lambda^1, Lambda^2, Lambda^3)`. Only the spatial
/// divergence enters the residuals, so `Lambda^0` is taken time independent.
#[derive(Debug, Clone, PartialEq)]
pub struct Gauge {
    pub lambda: [ScalarField; 4],
}

impl Gauge {
    /// `Lambda^a = Lambda0^b x_ab / J` with `x_00 = 1`, `x_i0 = u_i`, `x_0j = 0`,
    /// evaluated at the tracers.
    pub fn from_label(lambda0: &[ScalarField; 4], map: &LagrangianMap, geom: &MapGeometry, velocity: &VectorField) -> Self {
        let grid = *map.grid();
        let f = &map.f;
        let out = |a: usize| {
            crate::calculus::scalar_from_index_fn(grid, |k| {
                let j = geom.j.values()[k];
                let l0 = lambda0.each_ref().map(|l| l.values()[k]);
                if a == 0 {
                    return l0[0] / j;
                }
                let i = a - 1;
                let fm = f.at(k);
                let spatial: f64 = (0..3).map(|b| fm[i][b] * l0[b + 1]).sum();
                (velocity.at(k)[i] * l0[0] + spatial) / j
            })
        };
        Self {
            lambda: [out(0), out(1), out(2), out(3)],
        }
    }

    pub fn spatial_divergence(&self) -> ScalarField {
        let [_, x, y, z] = &self.lambda;
        div(&VectorField::new(x.clone(), y.clone(), z.clone()))
    }
}

/// Relabelling generator built from the labels `psi`, `chi`:
/// `V^{x0} = grad0 chi x grad0 psi / rho0` and `V = grad psi x grad chi / rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryGenerator {
    pub psi: String,
    pub chi: String,
    /// constant added to the Eulerian generator (subtracted from the label form)
    pub perturbation: [f64; 3],
    pub gauge: Option<Gauge>,
}

impl SymmetryGenerator {
    pub fn new(psi: &str, chi: &str) -> Self {
        Self {
            psi: psi.to_string(),
            chi: chi.to_string(),
            perturbation: [0.0; 3],
            gauge: None,
        }
    }

    pub fn foliation() -> Self {
        Self::new("psi", "chi")
    }

    pub fn perturbed(mut self, p: [f64; 3]) -> Self {
        self.perturbation = p;
        self
    }

    pub fn with_gauge(mut self, g: Gauge) -> Self {
        self.gauge = Some(g);
        self
    }

    fn pair<'a>(&self, labels: &'a BTreeMap<String, AffineField>, owner: &str) -> Result<(&'a AffineField, &'a AffineField)> {
        let get = |n: &str| {
            labels
                .get(n)
                .ok_or_else(|| Error::LabelMismatch(format!("label `{n}` is not carried by the {owner}")))
        };
        Ok((get(&self.psi)?, get(&self.chi)?))
    }

    /// `(grad psi x grad chi) / rho + perturbation`
    pub fn eulerian(&self, state: &MhdState) -> Result<VectorField> {
        let (psi, chi) = self.pair(&state.labels, "state")?;
        let v = psi.grad().cross(&chi.grad()).div_by(&state.rho);
        let p = self.perturbation;
        Ok(v.map_points(|x| [x[0] + p[0], x[1] + p[1], x[2] + p[2]]))
    }

    /// `dV/dt` at fixed `x` from the label and density tendencies.
    pub fn eulerian_rate(&self, state: &MhdState, k: &Tendency) -> Result<VectorField> {
        let (psi, chi) = self.pair(&state.labels, "state")?;
        let rate = |n: &str| {
            k.labels
                .get(n)
                .map(grad)
                .ok_or_else(|| Error::LabelMismatch(format!("no tendency for label `{n}`")))
        };
        let (gp, gc) = (psi.grad(), chi.grad());
        let (gpt, gct) = (rate(&self.psi)?, rate(&self.chi)?);
        let w = gp.cross(&gc);
        let w_t = &gpt.cross(&gc) + &gp.cross(&gct);
        let rho_t_over_rho = k.rho.div(&state.rho);
        Ok((&w_t - &w.scale_by(&rho_t_over_rho)).div_by(&state.rho))
    }

    /// `(grad0 chi x grad0 psi) / rho0 - perturbation` from the initial labels.
    pub fn label_form(&self, map: &LagrangianMap) -> Result<VectorField> {
        let (psi, chi) = self.pair(&map.labels0, "map")?;
        let v = chi.grad().cross(&psi.grad()).div_by(&map.rho0);
        let p = self.perturbation;
        Ok(v.map_points(|x| [x[0] - p[0], x[1] - p[1], x[2] - p[2]]))
    }

    /// `-V^{x0} . grad0 x`, the Eulerian generator at each tracer.
    pub fn pushforward(&self, map: &LagrangianMap) -> Result<VectorField> {
        let v = self.label_form(map)?;
        Ok(vector_from_index_fn(*map.grid(), |k| {
            mat3::mat_vec(&map.f.at(k), &v.at(k)).map(|c| -c)
        }))
    }
}

/// Residual reports of the determining equations.
#[derive(Debug, Clone)]
pub struct DeterminingResiduals {
    /// label-space set, on the label grid
    pub label_set: Vec<ConservationReport>,
    /// Eulerian set
    pub euler_set: Vec<ConservationReport>,
    pub divergence_symmetry: ConservationReport,
}

impl DeterminingResiduals {
    pub fn all(&self) -> impl Iterator<Item = &ConservationReport> {
        self.label_set
            .iter()
            .chain(self.euler_set.iter())
            .chain(std::iter::once(&self.divergence_symmetry))
    }
}

pub fn determining_residuals(
    sample: TimeSample<'_>,
    map: &LagrangianMap,
    eos: &Eos,
    generator: &SymmetryGenerator,
    kernel: Kernel,
) -> Result<DeterminingResiduals> {
    let state = sample.state();
    ensure_synchronized(map, state)?;
    let (mode, t) = (sample.mode(), state.t);
    let report = |name: &str, variant: &str, f: Field| ConservationReport::new(name, mode, t, f).with_variant(variant);

    // Eulerian
    let v = generator.eulerian(state)?;
    let v_t = sample.time_derivative_vector(|s| generator.eulerian(s), |s, k| generator.eulerian_rate(s, k))?;
    let dv_dt = &v_t + &advective(&state.u, &v);
    let lie = &dv_dt - &advective(&v, &state.u);
    let div_rho_v = div(&v.scale_by(&state.rho));
    let v_grad_s = v.dot(&grad(&state.s));
    let rho_u_lie = state.u.dot(&lie).zip_map(&state.rho, |a, r| r * a);
    let curl_vxb = curl(&v.cross(&state.b));
    let b_curl = state.b.dot(&curl_vxb);

    let th = ThermoFields::evaluate(eos, &state.rho, &state.s)?;
    let mu0 = eos.mu0;
    let half_u2 = state.u.norm_sq().scale(0.5);
    let mut bernoulli = &th.h - &half_u2;
    if let Some(phi) = &state.phi {
        bernoulli = &bernoulli + phi;
    }
    let div_b = div(&state.b);
    let magnetic = &(&b_curl.scale(-1.0) + &(&state.b.dot(&v) * &div_b)).scale(1.0 / mu0);
    let thermal = &(&th.temperature * &state.rho) * &v_grad_s;
    let mut sym = &(&(&div_rho_v * &bernoulli) + &thermal) + &(&rho_u_lie + magnetic);
    if let Some(g) = &generator.gauge {
        sym = &sym + &g.spatial_divergence();
    }

    let euler_set = vec![
        report("eq4.35a", "div_rhoV", Field::Scalar(div_rho_v)),
        report("eq4.35a", "V_dot_gradS", Field::Scalar(v_grad_s)),
        report("eq4.35b", "rho_u_dot_lie", Field::Scalar(rho_u_lie)),
        report("eq4.35c", "B_dot_curl_VxB", Field::Scalar(b_curl)),
    ];

    // label space
    let v0 = generator.label_form(map)?;
    let rho0_v = v0.scale_by(&map.rho0);
    let lie_at = sample_vector_at_tracers(&lie, map, kernel)?;
    let dt_rho0_v = vector_from_index_fn(*map.grid(), |k| {
        let finv = mat3::inverse(&map.f.at(k)).unwrap_or([[f64::NAN; 3]; 3]);
        let r0 = map.rho0.values()[k];
        mat3::mat_vec(&finv, &lie_at.at(k)).map(|c| -r0 * c)
    });
    dt_rho0_v.ensure_finite("D_t(rho0 V)")?;
    let label_set = vec![
        report("eq4.34", "div_rho0V", Field::Scalar(div(&rho0_v))),
        report("eq4.34", "V_dot_gradS0", Field::Scalar(v0.dot(&grad(&map.s0)))),
        report("eq4.34", "Dt_rho0V", Field::Vector(dt_rho0_v)),
        report("eq4.34", "curl_VxB0", Field::Vector(curl(&v0.cross(&map.b0)))),
        report("eq4.34", "div_B0", Field::Scalar(div(&map.b0))),
    ];

    Ok(DeterminingResiduals {
        label_set,
        euler_set,
        divergence_symmetry: report(
            "eq4.35aa",
            if generator.gauge.is_some() { "gauge" } else { "zero-gauge" },
            Field::Scalar(sym),
        ),
    })
}
