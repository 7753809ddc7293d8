use crate::calculus::{curl, div, gradient_tensor, vector_from_index_fn, Field, Kernel, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::lagrange::{
    ensure_synchronized, euler_lagrange_residual, map_geometry, map_reconstruct, sample_at_tracers,
    sample_vector_at_tracers, LagrangianMap, MapGeometry,
};
use crate::mat3;
use crate::noether::{force_f, pv_density, pv_residual, Controls, ConservationReport, Mode, PvVariant, TimeSample};
use crate::solver::{mhd_rhs, MhdState};
use crate::thermo::{Eos, ThermoFields};

use super::SymmetryGenerator;

/// Lagrange multipliers in label and Eulerian form.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    /// `u^2/2 - h` at the tracers
    pub nu1: ScalarField,
    /// `-rho0 T`
    pub nu2: ScalarField,
    /// `F^T B / mu0`
    pub nu3: VectorField,
    /// `-F^T u`
    pub nu4: VectorField,
    pub mu1: ScalarField,
    /// `-rho T`
    pub mu2: ScalarField,
    pub mu3: VectorField,
    pub mu4: VectorField,
    /// `-rho0 (omega . grad psi) / rho` at the tracers
    pub q: ScalarField,
    /// `-eps_ijk d0_i psi d0_j u^s x_sk` from label stencils
    pub q_label: ScalarField,
    /// `G_j = F_i x_ij` with the force `F` at the tracers
    pub g: VectorField,
}

/// `velocity` and the Eulerian fields are sampled at the tracers of `map`.
pub fn multipliers_eval(
    state: &MhdState,
    map: &LagrangianMap,
    geom: &MapGeometry,
    eos: &Eos,
    generator: &SymmetryGenerator,
    kernel: Kernel,
) -> Result<Multipliers> {
    ensure_synchronized(map, state)?;
    let grid = *map.grid();
    let mu0 = eos.mu0;
    let recon = map_reconstruct(map, geom);
    let th0 = ThermoFields::evaluate(eos, &recon.rho, &recon.s)?;
    let u = sample_vector_at_tracers(&state.u, map, kernel)?;
    let f = &map.f;

    let nu1 = &u.norm_sq().scale(0.5) - &th0.h;
    let nu2 = (&map.rho0 * &th0.temperature).scale(-1.0);
    let nu3 = vector_from_index_fn(grid, |k| mat3::mat_t_vec(&f.at(k), &recon.b.at(k)).map(|c| c / mu0));
    let nu4 = vector_from_index_fn(grid, |k| mat3::mat_t_vec(&f.at(k), &u.at(k)).map(|c| -c));

    let th = ThermoFields::evaluate(eos, &state.rho, &state.s)?;
    let mu1 = &state.u.norm_sq().scale(0.5) - &th.h;
    let mu2 = (&state.rho * &th.temperature).scale(-1.0);
    let mu3 = state.b.scale(1.0 / mu0);
    let mu4 = state.u.scale(-1.0);

    let pv = sample_at_tracers(&pv_density(state, &generator.psi)?, map, kernel)?;
    let rho_t = sample_at_tracers(&state.rho, map, kernel)?;
    let q = (&pv * &map.rho0).div(&rho_t).scale(-1.0);

    let psi0 = map
        .labels0
        .get(&generator.psi)
        .ok_or_else(|| Error::LabelMismatch(format!("label `{}` is not carried by the map", generator.psi)))?
        .grad();
    let du = gradient_tensor(&u);
    let q_label = crate::calculus::scalar_from_index_fn(grid, |k| {
        let dp = psi0.at(k);
        let d = du.at(k);
        let fm = f.at(k);
        // m[j][kk] = sum_s d_j u^s x_s,kk
        let m: mat3::Mat3 = [0, 1, 2].map(|j| [0, 1, 2].map(|kk| (0..3).map(|s| d[s][j] * fm[s][kk]).sum()));
        let mut acc = 0.0;
        for (i, j, kk, sign) in [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0), (0, 2, 1, -1.0), (2, 1, 0, -1.0), (1, 0, 2, -1.0)] {
            acc += sign * dp[i] * m[j][kk];
        }
        -acc
    });

    let force = sample_vector_at_tracers(&force_f(state, eos)?.total, map, kernel)?;
    let g = vector_from_index_fn(grid, |k| mat3::mat_t_vec(&f.at(k), &force.at(k)));
    Ok(Multipliers {
        nu1,
        nu2,
        nu3,
        nu4,
        mu1,
        mu2,
        mu3,
        mu4,
        q,
        q_label,
        g,
    })
}

/// Which form of the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Label,
    Euler,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Label => "label",
            Side::Euler => "euler",
        }
    }
}

/// `On` drops the Euler-Lagrange term; `Off` includes the measured one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shell {
    On,
    Off,
}

impl Shell {
    pub fn as_str(self) -> &'static str {
        match self {
            Shell::On => "on-shell",
            Shell::Off => "off-shell",
        }
    }
}

/// A state and the map synchronized with it.
#[derive(Debug, Clone, Copy)]
pub struct MapLevel<'a> {
    pub state: &'a MhdState,
    pub map: &'a LagrangianMap,
}

/// `d_t(omega . grad psi) + div[(omega . grad psi) u - F x grad psi]
///  + grad psi . curl(E / rho0)`.
///
/// With `E / rho0 = -(u_t - rhs_u)`, the momentum-equation defect; it vanishes
/// in semi-discrete mode, where the identity reduces to the full-force
/// potential-vorticity law.
pub fn bianchi_euler(sample: TimeSample<'_>, eos: &Eos, psi: &str, shell: Shell) -> Result<ConservationReport> {
    let base = pv_residual(sample, eos, psi, PvVariant::FullF, &Controls::default())?;
    let state = sample.state();
    let mut residual = match base.residual {
        Field::Scalar(r) => r,
        Field::Vector(_) => unreachable!("potential-vorticity residual is scalar"),
    };
    if shell == Shell::Off {
        let u_t = sample.time_derivative_vector(|s| Ok(s.u.clone()), |_, k| Ok(k.u.clone()))?;
        let rhs = mhd_rhs(state, eos)?;
        let e_over_rho0 = &rhs.u - &u_t;
        residual = &residual + &state.label(psi)?.grad().dot(&curl(&e_over_rho0));
    }
    let mut r = ConservationReport::new("nfa17", sample.mode(), state.t, Field::Scalar(residual))
        .with_variant(shell.as_str())
        .with_side(Side::Euler.as_str());
    r.density = base.density;
    r.flux = base.flux;
    Ok(r)
}

pub(super) fn label_density(level: &MapLevel<'_>, geom: &MapGeometry, psi: &str, kernel: Kernel) -> Result<ScalarField> {
    let q = sample_at_tracers(&pv_density(level.state, psi)?, level.map, kernel)?;
    // rho0 / rho = J for rho = rho0 / J
    Ok(&q * &geom.j)
}

/// `d/dt(rho0 omega . grad psi / rho) - div0(G x grad0 psi)
///  + grad0 psi . curl0(F^T E / rho0)` on the label grid, with the time
/// derivative a centred difference over `levels[0..3]`.
pub fn bianchi_label(levels: &[MapLevel<'_>], eos: &Eos, psi: &str, shell: Shell, kernel: Kernel) -> Result<ConservationReport> {
    let [prev, cur, next] = match levels {
        [a, b, c] => [a, b, c],
        _ => {
            return Err(Error::TimeLevels(format!(
                "label-side identity needs three map levels (got {})",
                levels.len()
            )))
        }
    };
    let (a, b) = (cur.state.t - prev.state.t, next.state.t - cur.state.t);
    if !(a > 0.0 && b > 0.0) || (a - b).abs() > 1e-9 * a.max(b) {
        return Err(Error::TimeLevels(format!(
            "map levels must be equally spaced (t = {}, {}, {})",
            prev.state.t, cur.state.t, next.state.t
        )));
    }
    for l in levels {
        ensure_synchronized(l.map, l.state)?;
    }
    let geoms = [prev, cur, next].map(|l| map_geometry(l.map));
    let [gp, gc, gn] = geoms;
    let (gp, gc, gn) = (gp?, gc?, gn?);
    let density = label_density(cur, &gc, psi, kernel)?;
    let density_t = (&label_density(next, &gn, psi, kernel)? - &label_density(prev, &gp, psi, kernel)?).scale(1.0 / (a + b));

    let grid = *cur.map.grid();
    let psi0 = cur
        .map
        .labels0
        .get(psi)
        .ok_or_else(|| Error::LabelMismatch(format!("label `{psi}` is not carried by the map")))?
        .grad();
    let force = sample_vector_at_tracers(&force_f(cur.state, eos)?.total, cur.map, kernel)?;
    let g = vector_from_index_fn(grid, |k| mat3::mat_t_vec(&cur.map.f.at(k), &force.at(k)));
    let flux = g.cross(&psi0).scale(-1.0);
    let mut residual = &density_t + &div(&flux);
    if shell == Shell::Off {
        let k = mhd_rhs(cur.state, eos)?;
        let e = euler_lagrange_residual(cur.map, &gc, eos, cur.state, &k, kernel)?;
        let fe = vector_from_index_fn(grid, |n| {
            let r0 = cur.map.rho0.values()[n];
            mat3::mat_t_vec(&cur.map.f.at(n), &e.at(n)).map(|c| c / r0)
        });
        residual = &residual + &psi0.dot(&curl(&fe));
    }
    let mut r = ConservationReport::new("nfa15", Mode::Snapshot, cur.state.t, Field::Scalar(residual))
        .with_variant(shell.as_str())
        .with_side(Side::Label.as_str());
    r.density = Some(density);
    r.flux = Some(flux);
    Ok(r)
}

/// Either side from a sequence of levels. The Eulerian side is semi-discrete
/// for one level and a centred snapshot for three.
pub fn bianchi_residual(
    levels: &[MapLevel<'_>],
    eos: &Eos,
    psi: &str,
    side: Side,
    shell: Shell,
    kernel: Kernel,
) -> Result<ConservationReport> {
    match side {
        Side::Label => bianchi_label(levels, eos, psi, shell, kernel),
        Side::Euler => match levels {
            [one] => {
                let k = mhd_rhs(one.state, eos)?;
                bianchi_euler(TimeSample::SemiDiscrete { state: one.state, k: &k }, eos, psi, shell)
            }
            [p, c, n] => bianchi_euler(
                TimeSample::Snapshot {
                    prev: p.state,
                    state: c.state,
                    next: n.state,
                },
                eos,
                psi,
                shell,
            ),
            _ => Err(Error::TimeLevels(format!(
                "Eulerian identity needs one or three levels (got {})",
                levels.len()
            ))),
        },
    }
}

