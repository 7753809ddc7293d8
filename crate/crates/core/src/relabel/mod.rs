//! Relabelling generators built from label-space foliations, their
//! determining equations, Lagrange multipliers and Bianchi identities.

use std::fmt;
use std::sync::Arc;

use crate::calculus::{
    curl, div, gradient_tensor, scalar_from_index_fn, vector_from_index_fn, AffineField, Grid, ScalarField,
    TensorField, VectorField,
};
use crate::error::{Error, Result};
use crate::mat3;
use crate::solver::MhdState;
use crate::thermo::{EquationOfState, Eos};

mod bianchi;
mod determining;

pub use bianchi::{
    bianchi_euler, bianchi_label, bianchi_residual, multipliers_eval, MapLevel, Multipliers, Shell, Side,
};
pub use determining::{determining_residuals, DeterminingResiduals, Gauge, SymmetryGenerator};


type PointFn = Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>;
type PointGrad = Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;

/// A label potential `slope . x0 + periodic(x0)` with its analytic gradient.
#[derive(Clone)]
pub struct Potential {
    pub slope: [f64; 3],
    periodic: PointFn,
    periodic_grad: PointGrad,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential").field("slope", &self.slope).finish_non_exhaustive()
    }
}

impl Potential {
    pub fn new(
        slope: [f64; 3],
        periodic: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static,
        periodic_grad: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        Self {
            slope,
            periodic: Arc::new(periodic),
            periodic_grad: Arc::new(periodic_grad),
        }
    }

    /// The label coordinate `x0[axis]`.
    pub fn coordinate(axis: usize) -> Self {
        let mut slope = [0.0; 3];
        slope[axis] = 1.0;
        Self::new(slope, |_| 0.0, |_| [0.0; 3])
    }

    pub fn scaled(&self, c: f64) -> Self {
        let (p, g) = (self.periodic.clone(), self.periodic_grad.clone());
        Self::new(self.slope.map(|s| c * s), move |x| c * p(x), move |x| g(x).map(|v| c * v))
    }

    pub fn periodic_part(&self, x: [f64; 3]) -> f64 {
        (self.periodic)(x)
    }

    pub fn value(&self, x: [f64; 3]) -> f64 {
        mat3::dot(&self.slope, &x) + (self.periodic)(x)
    }

    pub fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let g = (self.periodic_grad)(x);
        [0, 1, 2].map(|i| self.slope[i] + g[i])
    }

    /// The potential as an advectable label on `grid`.
    pub fn sample(&self, grid: Grid) -> AffineField {
        let p = self.periodic.clone();
        AffineField::new(self.slope, ScalarField::from_fn(grid, move |x| p(x)))
    }
}

/// `S(chi, psi)`.
#[derive(Clone)]
pub struct EntropyClosure {
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for EntropyClosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("EntropyClosure")
    }
}

impl EntropyClosure {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f) }
    }

    /// `s0 + a sin(chi) sin(psi)`
    pub fn product(s0: f64, a: f64) -> Self {
        Self::new(move |chi, psi| s0 + a * chi.sin() * psi.sin())
    }

    /// `s0 + a sin(chi)`, the form usable when `psi` varies along an
    /// inactive axis.
    pub fn chi_only(s0: f64, a: f64) -> Self {
        Self::new(move |chi, _| s0 + a * chi.sin())
    }

    pub fn eval(&self, chi: f64, psi: f64) -> f64 {
        (self.f)(chi, psi)
    }
}

/// Closures defining a foliation.
#[derive(Debug, Clone)]
pub struct FoliationSpec {
    pub phi: Potential,
    pub chi: Potential,
    pub psi: Potential,
    pub entropy: EntropyClosure,
}

/// Amplitudes of the reference curved foliation.
pub const REFERENCE_AMPLITUDES: [f64; 3] = [0.3, 0.3, 0.2];

impl FoliationSpec {
    pub fn cartesian(entropy: EntropyClosure) -> Self {
        Self {
            phi: Potential::coordinate(0),
            chi: Potential::coordinate(1),
            psi: Potential::coordinate(2),
            entropy,
        }
    }

    /// `phi = x + a1 sin y`, `chi = y + a2 sin x`, `psi = z + a3 cos y`.
    pub fn curved(a: [f64; 3], entropy: EntropyClosure) -> Self {
        let [a1, a2, a3] = a;
        Self {
            phi: Potential::new([1.0, 0.0, 0.0], move |x| a1 * x[1].sin(), move |x| [0.0, a1 * x[1].cos(), 0.0]),
            chi: Potential::new([0.0, 1.0, 0.0], move |x| a2 * x[0].sin(), move |x| [a2 * x[0].cos(), 0.0, 0.0]),
            psi: Potential::new([0.0, 0.0, 1.0], move |x| a3 * x[1].cos(), move |x| [0.0, -a3 * x[1].sin(), 0.0]),
            entropy,
        }
    }

    pub fn reference(eos: &Eos) -> Result<Self> {
        let s0 = eos.entropy_for(1.0, 1.0)?;
        Ok(Self::curved(REFERENCE_AMPLITUDES, EntropyClosure::chi_only(s0, 0.1)))
    }
}

/// A foliation evaluated on the label grid.
#[derive(Debug, Clone)]
pub struct Foliation {
    pub spec: FoliationSpec,
    pub phi: AffineField,
    pub chi: AffineField,
    pub psi: AffineField,
    /// `omega[i] = grad0` of the i-th potential, analytic
    pub omega: [VectorField; 3],
    /// `e[i] = d x0 / d (phi, chi, psi)_i`, the dual basis
    pub e: [VectorField; 3],
    /// `g_ij = e_i . e_j`
    pub g_lower: TensorField,
    /// `g^ij = omega^i . omega^j`
    pub g_upper: TensorField,
    /// `1 / sqrt|g|`
    pub rho0: ScalarField,
    /// `grad0 psi x grad0 phi`
    pub b0: VectorField,
    /// `grad0 chi x grad0 psi / rho0`
    pub v_x0: VectorField,
    pub s0: ScalarField,
}

/// Checks that each potential's periodic part is periodic on `grid`.
fn check_periodic(name: &str, p: &Potential, grid: &Grid) -> Result<()> {
    let lens = grid.lengths();
    for idx in 0..grid.len() {
        let x = grid.coords(idx);
        for axis in (0..3).filter(|&a| grid.is_active(a)) {
            let mut y = x;
            y[axis] += lens[axis];
            let (a, b) = (p.periodic_part(x), p.periodic_part(y));
            if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
                return Err(Error::Config(format!(
                    "potential `{name}` is not periodic along axis {axis} (at {x:?})"
                )));
            }
        }
    }
    Ok(())
}

pub fn foliation_build(spec: &FoliationSpec, grid: Grid) -> Result<Foliation> {
    for (name, p) in [("phi", &spec.phi), ("chi", &spec.chi), ("psi", &spec.psi)] {
        check_periodic(name, p, &grid)?;
    }
    let pots = [&spec.phi, &spec.chi, &spec.psi];
    let n = grid.len();
    let mut det = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for idx in 0..n {
        let x = grid.coords(idx);
        let m: mat3::Mat3 = pots.map(|p| p.gradient(x));
        det.push(mat3::det(&m));
        rows.push(m);
    }
    let scale = rows
        .iter()
        .map(|m| m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())))
        .fold(0.0, f64::max);
    let sign = det[0].signum();
    for (index, &d) in det.iter().enumerate() {
        if !(d.abs() > 1e-12 * scale.powi(3)) || d.signum() != sign {
            return Err(Error::SingularFoliation { det: d, index });
        }
    }
    let inv: Vec<mat3::Mat3> = rows.iter().map(|m| mat3::inverse(m).expect("checked non-singular")).collect();

    // In 2.5D the labels may grow along the inactive axis while fields do not,
    // so S must not depend on any such potential.
    if grid.is_2p5d() {
        let varies = |p: &Potential| p.slope[2] != 0.0;
        for idx in (0..n).step_by((n / 16).max(1)) {
            let x = grid.coords(idx);
            let (c, s) = (spec.chi.value(x), spec.psi.value(x));
            let base = spec.entropy.eval(c, s);
            let dpsi = (spec.entropy.eval(c, s + 1e-3) - base).abs();
            let dchi = (spec.entropy.eval(c + 1e-3, s) - base).abs();
            if (varies(&spec.psi) && dpsi > 1e-12) || (varies(&spec.chi) && dchi > 1e-12) {
                return Err(Error::Config(
                    "entropy closure depends on a potential that varies along the inactive axis".into(),
                ));
            }
        }
    }

    let omega = [0, 1, 2].map(|i| vector_from_index_fn(grid, |k| rows[k][i]));
    let e = [0, 1, 2].map(|j| vector_from_index_fn(grid, |k| [0, 1, 2].map(|r| inv[k][r][j])));
    let g_lower = TensorField::from_index_fn(grid, |k| {
        let e = [0, 1, 2].map(|j| [0, 1, 2].map(|r| inv[k][r][j]));
        [0, 1, 2].map(|i| [0, 1, 2].map(|j| mat3::dot(&e[i], &e[j])))
    });
    let g_upper = TensorField::from_index_fn(grid, |k| {
        let w = rows[k];
        [0, 1, 2].map(|i| [0, 1, 2].map(|j| mat3::dot(&w[i], &w[j])))
    });
    let rho0 = scalar_from_index_fn(grid, |k| 1.0 / mat3::det(&g_lower.at(k)).abs().sqrt());
    let b0 = omega[2].cross(&omega[0]);
    let v_x0 = omega[1].cross(&omega[2]).div_by(&rho0);
    let s0 = ScalarField::from_fn(grid, |x| spec.entropy.eval(spec.chi.value(x), spec.psi.value(x)));
    Ok(Foliation {
        phi: spec.phi.sample(grid),
        chi: spec.chi.sample(grid),
        psi: spec.psi.sample(grid),
        spec: spec.clone(),
        omega,
        e,
        g_lower,
        g_upper,
        rho0,
        b0,
        v_x0,
        s0,
    })
}

/// Lie bracket `[a, b]^i = a^j d_j b^i - b^j d_j a^i` with stencil derivatives.
pub fn lie_bracket(a: &VectorField, b: &VectorField) -> VectorField {
    let (ga, gb) = (gradient_tensor(a), gradient_tensor(b));
    let grid = *a.grid();
    vector_from_index_fn(grid, |k| {
        let (va, vb) = (a.at(k), b.at(k));
        let (da, db) = (ga.at(k), gb.at(k));
        [0, 1, 2].map(|i| (0..3).map(|j| va[j] * db[i][j] - vb[j] * da[i][j]).sum())
    })
}

/// L-inf errors of the basis relations.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BasisChecks {
    /// `<omega^i, e_j> - delta^i_j`
    pub duality_err: f64,
    /// `e_a x e_b - sqrt|g| eps_abc omega^c`
    pub metric_consistency_err: f64,
    /// `[b0, V^{x0}]`
    pub bracket_err: f64,
}

/// Uses the stencil gradients of the sampled potentials for `omega`, so the
/// errors measure the label discretization.
pub fn basis_checks(fol: &Foliation) -> BasisChecks {
    let grid = *fol.rho0.grid();
    let omega = [fol.phi.grad(), fol.chi.grad(), fol.psi.grad()];
    let mut duality: f64 = 0.0;
    let mut metric: f64 = 0.0;
    for k in 0..grid.len() {
        let w = omega.each_ref().map(|o| o.at(k));
        let e = fol.e.each_ref().map(|v| v.at(k));
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                duality = duality.max((mat3::dot(&w[i], &e[j]) - delta).abs());
            }
        }
        let sqrt_g = mat3::det(&fol.g_lower.at(k)).abs().sqrt();
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let lhs = mat3::cross(&e[a], &e[b]);
            for r in 0..3 {
                metric = metric.max((lhs[r] - sqrt_g * w[c][r]).abs());
            }
        }
    }
    let from_labels_b0 = omega[2].cross(&omega[0]);
    let rho0_v = omega[1].cross(&omega[2]);
    let b0_small = from_labels_b0.div_by(&fol.rho0);
    let v = rho0_v.div_by(&fol.rho0);
    BasisChecks {
        duality_err: duality,
        metric_consistency_err: metric,
        bracket_err: lie_bracket(&b0_small, &v).linf(),
    }
}

/// Divergence and curl-form residuals of the construction identities
/// `rho0 V = curl0(chi grad0 psi)`, `B0 = curl0(psi grad0 phi)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConstructionChecks {
    pub div_rho0v: f64,
    pub div_b0: f64,
    /// divergence of the curl forms, round-off over `h`
    pub div_rho0v_curl_form: f64,
    pub div_b0_curl_form: f64,
    /// cross-product form minus curl form
    pub rho0v_forms: f64,
    pub b0_forms: f64,
}

/// `curl(a grad b)` for affine `a`, `b`: the slope of `a` contributes
/// `slope x grad b`, the periodic part goes through the stencil.
pub fn curl_form(a: &AffineField, b: &AffineField) -> VectorField {
    let gb = b.grad();
    let s = a.slope;
    let slope_part = vector_from_index_fn(*gb.grid(), |k| mat3::cross(&s, &gb.at(k)));
    &curl(&gb.scale_by(&a.periodic)) + &slope_part
}

pub fn construction_checks(fol: &Foliation) -> ConstructionChecks {
    let rho0v = fol.chi.grad().cross(&fol.psi.grad());
    let b0 = fol.psi.grad().cross(&fol.phi.grad());
    let rho0v_c = curl_form(&fol.chi, &fol.psi);
    let b0_c = curl_form(&fol.psi, &fol.phi);
    ConstructionChecks {
        div_rho0v: div(&rho0v).linf(),
        div_b0: div(&b0).linf(),
        div_rho0v_curl_form: div(&rho0v_c).linf(),
        div_b0_curl_form: div(&b0_c).linf(),
        rho0v_forms: (&rho0v - &rho0v_c).linf(),
        b0_forms: (&b0 - &b0_c).linf(),
    }
}

impl Foliation {
    pub fn grid(&self) -> &Grid {
        self.rho0.grid()
    }

    /// Initial state carrying the three potentials as labels `phi`, `chi`,
    /// `psi`, with `rho = rho0`, `S = S0`, and `B` in curl form so that its
    /// discrete divergence vanishes to round-off.
    pub fn initial_state(&self, velocity: impl Fn([f64; 3]) -> [f64; 3] + Sync) -> Result<MhdState> {
        let grid = *self.grid();
        let mut state = MhdState::uniform(grid, 1.0, [0.0; 3], 0.0, [0.0; 3]);
        state.rho = self.rho0.clone();
        state.s = self.s0.clone();
        state.u = VectorField::from_fn(grid, velocity);
        state.b = curl_form(&self.psi, &self.phi);
        let state = state
            .with_label("phi", self.phi.clone())
            .with_label("chi", self.chi.clone())
            .with_label("psi", self.psi.clone());
        state.validate()?;
        Ok(state)
    }
}
