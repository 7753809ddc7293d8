//! Analytic initial conditions.

use crate::calculus::{AffineField, Grid, ScalarField, VectorField};
use crate::error::Result;
use crate::solver::MhdState;
use crate::thermo::{EquationOfState, Eos};

/// Static uniform state with `rho = 1`, `p = 1`, `B = y-hat` and Cartesian
/// labels `phi = x`, `chi = y`, `psi = z`.
pub fn uniform(grid: Grid, eos: &Eos) -> Result<MhdState> {
    let s = eos.entropy_for(1.0, 1.0)?;
    let zero = || ScalarField::zeros(grid);
    Ok(MhdState::uniform(grid, 1.0, [0.0; 3], s, [0.0, 1.0, 0.0])
        .with_label("phi", AffineField::new([1.0, 0.0, 0.0], zero()))
        .with_label("chi", AffineField::new([0.0, 1.0, 0.0], zero()))
        .with_label("psi", AffineField::new([0.0, 0.0, 1.0], zero())))
}

/// Uniform translation `u = x-hat` carrying `psi = sin x`.
pub fn advection(grid: Grid, eos: &Eos) -> Result<MhdState> {
    let s = eos.entropy_for(1.0, 1.0)?;
    let psi = ScalarField::from_fn(grid, |x| x[0].sin());
    Ok(MhdState::uniform(grid, 1.0, [1.0, 0.0, 0.0], s, [0.0; 3])
        .with_label("psi", AffineField::periodic(psi)))
}

/// Small transverse velocity across a uniform field `B = x-hat`.
pub fn shear_alfven(grid: Grid, eos: &Eos) -> Result<MhdState> {
    let s = eos.entropy_for(1.0, 1.0)?;
    let mut state = MhdState::uniform(grid, 1.0, [0.0; 3], s, [1.0, 0.0, 0.0]);
    state.u = VectorField::from_fn(grid, |x| [0.0, 0.01 * x[0].sin(), 0.0]);
    let psi = ScalarField::from_fn(grid, |x| x[0].sin() * x[1].sin());
    Ok(state.with_label("psi", AffineField::periodic(psi)))
}

/// Options for the Orszag-Tang style state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OrszagTang {
    /// drop the magnetic field and perturb the entropy; `psi` is then a copy of `S`
    pub hydro: bool,
    /// carry the vector potential of `B`
    pub vector_potential: bool,
}

/// Amplitude of the entropy perturbation in the hydrodynamic variant.
pub const HYDRO_ENTROPY_AMPLITUDE: f64 = 0.1;

pub fn ot_velocity(x: [f64; 3]) -> [f64; 3] {
    [-x[1].sin(), x[0].sin(), 0.2 * (x[0] + x[1]).sin()]
}

pub fn ot_magnetic(x: [f64; 3]) -> [f64; 3] {
    [-x[1].sin(), (2.0 * x[0]).sin(), 0.2 * (x[0] + x[1]).cos()]
}

/// A vector potential with `curl A` equal to [`ot_magnetic`].
pub fn ot_vector_potential(x: [f64; 3]) -> [f64; 3] {
    [0.0, 0.2 * (x[0] + x[1]).sin(), x[1].cos() + 0.5 * (2.0 * x[0]).cos()]
}

/// 2.5D Orszag-Tang state with `rho = gamma^2`, `p = gamma`.
pub fn orszag_tang_25d(grid: Grid, eos: &Eos, opts: OrszagTang) -> Result<MhdState> {
    let g = eos.gamma;
    let s0 = eos.entropy_for(g * g, g)?;
    let mut state = MhdState::uniform(grid, g * g, [0.0; 3], s0, [0.0; 3]);
    state.u = VectorField::from_fn(grid, ot_velocity);
    if opts.hydro {
        state.s = ScalarField::from_fn(grid, |x| {
            s0 + HYDRO_ENTROPY_AMPLITUDE * x[0].sin() * x[1].sin()
        });
        state
            .labels
            .insert("psi".into(), AffineField::periodic(state.s.clone()));
    } else {
        state.b = VectorField::from_fn(grid, ot_magnetic);
        state.labels.insert(
            "psi".into(),
            AffineField::periodic(ScalarField::from_fn(grid, |x| x[0].sin() * x[1].sin())),
        );
    }
    state.labels.insert(
        "chi".into(),
        AffineField::periodic(ScalarField::from_fn(grid, |x| x[0].cos() * x[1].sin())),
    );
    state.labels.insert(
        "phi".into(),
        AffineField::periodic(ScalarField::from_fn(grid, |x| x[0].sin() * x[1].cos())),
    );
    if opts.vector_potential && !opts.hydro {
        state.a = Some(VectorField::from_fn(grid, ot_vector_potential));
    }
    Ok(state)
}

/// The reference curved foliation with the Orszag-Tang velocity: labels
/// `phi`, `chi`, `psi` are its potentials, `rho = rho0`, `B = grad psi x grad phi`.
pub fn custom_closures(grid: Grid, eos: &Eos) -> Result<MhdState> {
    let spec = crate::relabel::FoliationSpec::reference(eos)?;
    crate::relabel::foliation_build(&spec, grid)?.initial_state(ot_velocity)
}
