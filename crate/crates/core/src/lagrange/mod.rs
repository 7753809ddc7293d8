//! Lagrangian map `x = X(x0, t)` on a label grid equal to the initial grid.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::calculus::{
    gradient_tensor, partial, AffineField, scalar_from_index_fn, vector_from_index_fn, Grid, Kernel,
    ScalarField, Stencil, TensorField, VectorField,
};
use crate::error::{Error, Result};
use crate::mat3::{self, Mat3, Vec3};
use crate::solver::{rk4_stages, MhdState, Step, Tendency};
use crate::thermo::Eos;

#[cfg(test)]
mod tests;

/// Velocity and velocity gradient `G[i][j] = du_i/dx_j` at arbitrary points.
pub trait VelocitySampler: Sync {
    fn sample(&self, x: Vec3) -> Result<(Vec3, Mat3)>;
}

/// Closure-backed sampler for prescribed flows.
pub struct FnSampler<F>(pub F);

impl<F> VelocitySampler for FnSampler<F>
where
    F: Fn(Vec3) -> (Vec3, Mat3) + Sync,
{
    fn sample(&self, x: Vec3) -> Result<(Vec3, Mat3)> {
        Ok((self.0)(x))
    }
}

/// Interpolates a gridded velocity and its stencil gradient.
pub struct GridSampler {
    grid: Grid,
    kernel: Kernel,
    u: VectorField,
    grad_u: TensorField,
}

impl GridSampler {
    pub fn new(u: &VectorField, kernel: Kernel) -> Self {
        Self {
            grid: *u.grid(),
            kernel,
            u: u.clone(),
            grad_u: gradient_tensor(u),
        }
    }

    pub fn from_state(state: &MhdState, kernel: Kernel) -> Self {
        Self::new(&state.u, kernel)
    }
}

impl VelocitySampler for GridSampler {
    fn sample(&self, x: Vec3) -> Result<(Vec3, Mat3)> {
        let st = Stencil::new(&self.grid, self.kernel, x)?;
        let u = [0, 1, 2].map(|i| st.apply(&self.u.c[i]));
        let mut g = [[0.0; 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = st.apply(&self.grad_u.t[i][j]);
            }
        }
        Ok((u, g))
    }
}

/// RK4 for `dx/dt = u(x)`, `dF/dt = G(x) F` with the four stage samplers.
fn rk4_point(samplers: [&dyn VelocitySampler; 4], dt: f64, x: Vec3, f: &Mat3) -> Result<(Vec3, Mat3)> {
    let offsets = [0.0, 0.5 * dt, 0.5 * dt, dt];
    let weights = [1.0, 2.0, 2.0, 1.0];
    let mut kx_prev = [0.0; 3];
    let mut kf_prev = [[0.0; 3]; 3];
    let mut sum_x = [0.0; 3];
    let mut sum_f = [[0.0; 3]; 3];
    for s in 0..4 {
        let xs = mat3::axpy(&x, offsets[s], &kx_prev);
        let fs = mat3::add(f, &kf_prev, offsets[s]);
        let (u, g) = samplers[s].sample(xs)?;
        let kf = mat3::mul(&g, &fs);
        sum_x = mat3::axpy(&sum_x, weights[s], &u);
        sum_f = mat3::add(&sum_f, &kf, weights[s]);
        kx_prev = u;
        kf_prev = kf;
    }
    Ok((mat3::axpy(&x, dt / 6.0, &sum_x), mat3::add(f, &sum_f, dt / 6.0)))
}

/// Free tracers without deformation data.
#[derive(Debug, Clone, PartialEq)]
pub struct TracerCloud {
    pub initial: Vec<Vec3>,
    /// unwrapped positions
    pub positions: Vec<Vec3>,
    pub t: f64,
}

impl TracerCloud {
    pub fn new(initial: Vec<Vec3>) -> Self {
        Self {
            positions: initial.clone(),
            initial,
            t: 0.0,
        }
    }

    /// `m x m` tracers at cell-centred positions of the x-y period cell.
    pub fn lattice(grid: &Grid, m: usize) -> Self {
        let [lx, ly, _] = grid.lengths();
        let mut pts = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                pts.push([
                    (i as f64 + 0.5) / m as f64 * lx,
                    (j as f64 + 0.5) / m as f64 * ly,
                    0.0,
                ]);
            }
        }
        Self::new(pts)
    }

    pub fn advance(&self, samplers: [&dyn VelocitySampler; 4], dt: f64) -> Result<Self> {
        let positions = self
            .positions
            .par_iter()
            .map(|x| rk4_point(samplers, dt, *x, &mat3::IDENTITY).map(|r| r.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            initial: self.initial.clone(),
            positions,
            t: self.t + dt,
        })
    }

    /// Samples a gridded scalar at the current positions.
    pub fn sample(&self, field: &ScalarField, kernel: Kernel) -> Result<Vec<f64>> {
        crate::calculus::interpolate(field, kernel, &self.positions)
    }
}

/// Tracer positions and deformation gradients indexed by label-grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianMap {
    /// `x - x0`, not wrapped
    pub displacement: VectorField,
    /// `F[i][j] = dx_i/dx0_j`
    pub f: TensorField,
    pub rho0: ScalarField,
    pub s0: ScalarField,
    pub b0: VectorField,
    /// label fields at `t = 0`, as functions of `x0`
    pub labels0: BTreeMap<String, AffineField>,
    pub t: f64,
}

impl LagrangianMap {
    /// Identity map carrying the initial fields of `state`.
    pub fn from_state(state: &MhdState) -> Self {
        let grid = *state.grid();
        Self {
            displacement: VectorField::zeros(grid),
            f: TensorField::identity(grid),
            rho0: state.rho.clone(),
            s0: state.s.clone(),
            b0: state.b.clone(),
            labels0: state.labels.clone(),
            t: state.t,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho0.grid()
    }

    /// Unwrapped position of tracer `idx`.
    pub fn position(&self, idx: usize) -> Vec3 {
        mat3::axpy(&self.grid().coords(idx), 1.0, &self.displacement.at(idx))
    }

    pub fn positions(&self) -> Vec<Vec3> {
        (0..self.grid().len()).map(|i| self.position(i)).collect()
    }
}

/// Advances every tracer by one RK4 step using stage samplers aligned with the
/// solver stages at `t`, `t + dt/2`, `t + dt/2`, `t + dt`.
pub fn advance_map(
    map: &LagrangianMap,
    samplers: [&dyn VelocitySampler; 4],
    dt: f64,
) -> Result<LagrangianMap> {
    let grid = *map.grid();
    let out = (0..grid.len())
        .into_par_iter()
        .map(|idx| rk4_point(samplers, dt, map.position(idx), &map.f.at(idx)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(index) = out.iter().position(|(_, f)| !(mat3::det(f) > 0.0)) {
        return Err(Error::Folding {
            jacobian: mat3::det(&out[index].1),
            index,
        });
    }
    let displacement = vector_from_index_fn(grid, |i| {
        mat3::axpy(&out[i].0, -1.0, &grid.coords(i))
    });
    let f = TensorField::from_index_fn(grid, |i| out[i].1);
    displacement.ensure_finite("tracer positions")?;
    Ok(LagrangianMap {
        displacement,
        f,
        rho0: map.rho0.clone(),
        s0: map.s0.clone(),
        b0: map.b0.clone(),
        labels0: map.labels0.clone(),
        t: map.t + dt,
    })
}

/// A solver state and its map advanced in lockstep.
#[derive(Debug, Clone)]
pub struct Coupled {
    pub state: MhdState,
    pub map: LagrangianMap,
}

impl Coupled {
    pub fn new(state: MhdState) -> Self {
        let map = LagrangianMap::from_state(&state);
        Self { state, map }
    }

    /// One coupled step; returns the solver step record (stage states and
    /// tendencies) alongside.
    pub fn step(&self, eos: &Eos, dt: f64, kernel: Kernel) -> Result<(Coupled, Step)> {
        ensure_synchronized(&self.map, &self.state)?;
        let step = rk4_stages(&self.state, eos, dt)?;
        let samplers = step.stages.each_ref().map(|s| GridSampler::from_state(s, kernel));
        let map = advance_map(
            &self.map,
            [&samplers[0], &samplers[1], &samplers[2], &samplers[3]],
            dt,
        )?;
        Ok((
            Coupled {
                state: step.next.clone(),
                map,
            },
            step,
        ))
    }
}

pub(crate) fn ensure_synchronized(map: &LagrangianMap, state: &MhdState) -> Result<()> {
    let tol = 1e-12 * (1.0 + state.t.abs());
    if (map.t - state.t).abs() > tol {
        return Err(Error::Desynchronized {
            map_t: map.t,
            state_t: state.t,
        });
    }
    Ok(())
}

/// Jacobian and cofactors of the deformation gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct MapGeometry {
    pub j: ScalarField,
    /// `a[k][j]` is the cofactor of `F[k][j]`
    pub a: TensorField,
}

pub fn map_geometry(map: &LagrangianMap) -> Result<MapGeometry> {
    let grid = *map.grid();
    let j = scalar_from_index_fn(grid, |i| mat3::det(&map.f.at(i)));
    if let Some(index) = j.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Folding {
            jacobian: j.values()[index],
            index,
        });
    }
    let a = TensorField::from_index_fn(grid, |i| mat3::cofactor(&map.f.at(i)));
    Ok(MapGeometry { j, a })
}

/// `sum_j d a[k][j] / dx0_j` on the label grid, one component per `k`.
pub fn cofactor_divergence(geom: &MapGeometry) -> VectorField {
    let comp = |k: usize| {
        let mut acc = partial(&geom.a.t[k][0], 0);
        for j in 1..3 {
            acc = &acc + &partial(&geom.a.t[k][j], j);
        }
        acc
    };
    VectorField::new(comp(0), comp(1), comp(2))
}

/// `I + D0 (x - x0)`, the label-stencil version of `F`.
pub fn position_gradient(map: &LagrangianMap) -> TensorField {
    let g = gradient_tensor(&map.displacement);
    let mut out = TensorField::identity(*map.grid());
    for i in 0..3 {
        for j in 0..3 {
            out.t[i][j] = &out.t[i][j] + &g.t[i][j];
        }
    }
    out
}

/// Algebraic reconstructions `rho0/J`, `S0`, `F B0 / J` at the tracers.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub rho: ScalarField,
    pub s: ScalarField,
    pub b: VectorField,
}

pub fn map_reconstruct(map: &LagrangianMap, geom: &MapGeometry) -> Reconstruction {
    let grid = *map.grid();
    let rho = map.rho0.div(&geom.j);
    let b = vector_from_index_fn(grid, |i| {
        let fb = mat3::mat_vec(&map.f.at(i), &map.b0.at(i));
        let j = geom.j.values()[i];
        [fb[0] / j, fb[1] / j, fb[2] / j]
    });
    Reconstruction {
        rho,
        s: map.s0.clone(),
        b,
    }
}

/// A gridded Eulerian field sampled at every tracer of `map`.
pub fn sample_at_tracers(field: &ScalarField, map: &LagrangianMap, kernel: Kernel) -> Result<ScalarField> {
    let grid = *map.grid();
    let vals = (0..grid.len())
        .into_par_iter()
        .map(|i| Stencil::new(field.grid(), kernel, map.position(i)).map(|s| s.apply(field)))
        .collect::<Result<Vec<_>>>()?;
    ScalarField::from_vec(grid, vals)
}

pub fn sample_vector_at_tracers(
    field: &VectorField,
    map: &LagrangianMap,
    kernel: Kernel,
) -> Result<VectorField> {
    let grid = *map.grid();
    let vals = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            Stencil::new(field.grid(), kernel, map.position(i))
                .map(|s| [0, 1, 2].map(|c| s.apply(&field.c[c])))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(vector_from_index_fn(grid, |i| vals[i]))
}

/// Tracer-wise mismatch between reconstructions and the Eulerian fields.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MapMismatch {
    pub rho_linf: f64,
    pub rho_l2: f64,
    pub s_linf: f64,
    pub s_l2: f64,
    pub b_linf: f64,
    pub b_l2: f64,
}

pub fn reconstruction_mismatch(
    recon: &Reconstruction,
    state: &MhdState,
    map: &LagrangianMap,
    kernel: Kernel,
) -> Result<MapMismatch> {
    ensure_synchronized(map, state)?;
    let rho = &sample_at_tracers(&state.rho, map, kernel)? - &recon.rho;
    let s = &sample_at_tracers(&state.s, map, kernel)? - &recon.s;
    let b = &sample_vector_at_tracers(&state.b, map, kernel)? - &recon.b;
    Ok(MapMismatch {
        rho_linf: rho.linf(),
        rho_l2: rho.l2(),
        s_linf: s.linf(),
        s_l2: s.l2(),
        b_linf: b.linf(),
        b_l2: b.l2(),
    })
}

/// Lagrange densities at the tracers.
#[derive(Debug, Clone, PartialEq)]
pub struct Densities {
    /// Eulerian density built from the reconstructed fields
    pub ell: ScalarField,
    /// label-space density
    pub ell0: ScalarField,
    /// L-inf of `ell0 - ell J`
    pub consistency: f64,
}

/// `velocity` holds `x_t` at each tracer and `phi` the potential there.
pub fn lagrangian_densities(
    map: &LagrangianMap,
    geom: &MapGeometry,
    eos: &Eos,
    velocity: &VectorField,
    phi: Option<&ScalarField>,
) -> Result<Densities> {
    let grid = *map.grid();
    let recon = map_reconstruct(map, geom);
    let mu0 = eos.mu0;
    let phi_at = |i: usize| phi.map_or(0.0, |p| p.values()[i]);
    let mut ell = Vec::with_capacity(grid.len());
    let mut ell0 = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let rho = recon.rho.values()[i];
        if !(rho > 0.0) {
            return Err(Error::NonPositiveDensity {
                value: rho,
                index: i,
                position: map.position(i),
            });
        }
        let s = map.s0.values()[i];
        let u = velocity.at(i);
        let b = recon.b.at(i);
        let eps = eos.internal_energy(rho, s);
        ell.push(0.5 * rho * mat3::norm_sq(&u) - eps - mat3::norm_sq(&b) / (2.0 * mu0) - rho * phi_at(i));

        let r0 = map.rho0.values()[i];
        let j = geom.j.values()[i];
        let f = map.f.at(i);
        let b0 = map.b0.at(i);
        let fb0 = mat3::mat_vec(&f, &b0);
        ell0.push(
            0.5 * r0 * mat3::norm_sq(&u) - j * eos.internal_energy(r0 / j, s)
                - mat3::norm_sq(&fb0) / (2.0 * mu0 * j)
                - r0 * phi_at(i),
        );
    }
    let ell = ScalarField::from_vec(grid, ell)?;
    let ell0 = ScalarField::from_vec(grid, ell0)?;
    let consistency = (&ell0 - &(&ell * &geom.j)).linf();
    Ok(Densities {
        ell,
        ell0,
        consistency,
    })
}

/// `u_t + (u . grad) u`, the Eulerian acceleration field.
pub fn material_acceleration(state: &MhdState, k: &Tendency) -> VectorField {
    &k.u + &crate::calculus::advective(&state.u, &state.u)
}

/// Euler-Lagrange expressions on the label grid:
/// `E_i = -[rho0 (du_i/dt + d_i Phi) + d0_j (A_kj T_ik)]` with the total stress
/// `T_ik = (p + B^2/2mu0) delta_ik - B_i B_k / mu0` from the reconstructions.
///
/// The acceleration comes from the Eulerian tendency `k` at the same instant.
pub fn euler_lagrange_residual(
    map: &LagrangianMap,
    geom: &MapGeometry,
    eos: &Eos,
    state: &MhdState,
    k: &Tendency,
    kernel: Kernel,
) -> Result<VectorField> {
    ensure_synchronized(map, state).map_err(|e| Error::TimeLevels(e.to_string()))?;
    let grid = *map.grid();
    let mut accel = material_acceleration(state, k);
    if let Some(phi) = &state.phi {
        accel = &accel + &crate::calculus::grad(phi);
    }
    let accel = sample_vector_at_tracers(&accel, map, kernel)?;
    let recon = map_reconstruct(map, geom);
    let p = eos.pressure_field(&recon.rho, &recon.s)?;
    let mu0 = eos.mu0;

    // flux[i][j] = sum_k A_kj T_ik
    let flux = TensorField::from_index_fn(grid, |n| {
        let b = recon.b.at(n);
        let ptot = p.values()[n] + mat3::norm_sq(&b) / (2.0 * mu0);
        let a = geom.a.at(n);
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for kk in 0..3 {
                    let t = if i == kk { ptot } else { 0.0 } - b[i] * b[kk] / mu0;
                    acc += a[kk][j] * t;
                }
                *v = acc;
            }
        }
        out
    });
    let comp = |i: usize| {
        let mut d = partial(&flux.t[i][0], 0);
        for j in 1..3 {
            d = &d + &partial(&flux.t[i][j], j);
        }
        let inertia = (&map.rho0 * &accel.c[i]).scale(-1.0);
        &inertia - &d
    };
    let e = VectorField::new(comp(0), comp(1), comp(2));
    e.ensure_finite("Euler-Lagrange residual")?;
    Ok(e)
}
