use super::*;
use crate::calculus::Grid;
use crate::presets::{self, OrszagTang};
use crate::thermo::EquationOfState;

fn eos() -> Eos {
    Eos::default()
}

fn max_abs(f: &Tendency) -> f64 {
    let mut m = f.rho.linf().max(f.u.linf()).max(f.s.linf()).max(f.b.linf());
    for l in f.labels.values() {
        m = m.max(l.linf());
    }
    m
}

#[test]
fn static_uniform_state_has_zero_tendency() {
    let grid = Grid::periodic_3d(16, 4).unwrap();
    let state = presets::uniform(grid, &eos()).unwrap();
    assert_eq!(max_abs(&mhd_rhs(&state, &eos()).unwrap()), 0.0);
}

#[test]
fn uniform_translation_has_zero_tendency() {
    let grid = Grid::periodic_3d(16, 4).unwrap();
    let s = eos().entropy_for(1.3, 0.7).unwrap();
    let state = MhdState::uniform(grid, 1.3, [0.4, -0.2, 0.9], s, [0.3, 0.1, -0.5]).with_label(
        "psi",
        AffineField::periodic(ScalarField::constant(grid, 2.0)),
    );
    assert_eq!(max_abs(&mhd_rhs(&state, &eos()).unwrap()), 0.0);
}

#[test]
fn shear_alfven_induction() {
    let mut errs = Vec::new();
    for n in [32, 64] {
        let grid = Grid::periodic_2d(n, 4).unwrap();
        let state = presets::shear_alfven(grid, &eos()).unwrap();
        let k = mhd_rhs(&state, &eos()).unwrap();
        let exact = ScalarField::from_fn(grid, |x| 0.01 * x[0].cos());
        let e = (&k.b.c[1] - &exact).linf();
        let h = grid.spacing(0);
        assert!(e <= 0.01 * h.powi(4), "n = {n}: {e:e}");
        assert_eq!(k.rho.linf(), 0.0);
        assert_eq!(k.u.linf(), 0.0);
        assert_eq!(k.b.c[0].linf(), 0.0);
        assert_eq!(k.b.c[2].linf(), 0.0);
        errs.push(e);
    }
    assert!((errs[0] / errs[1]).log2() > 3.5);
}

/// Pointwise tendencies from analytic fields, differentiated in continuous
/// space with a small-step five-point formula.
struct Analytic {
    rho: fn([f64; 3]) -> f64,
    u: fn([f64; 3]) -> [f64; 3],
    s: fn([f64; 3]) -> f64,
    b: fn([f64; 3]) -> [f64; 3],
    a: fn([f64; 3]) -> [f64; 3],
    psi: fn([f64; 3]) -> f64,
}

fn d(f: impl Fn([f64; 3]) -> f64, axis: usize, x: [f64; 3]) -> f64 {
    let h = 1e-3;
    let at = |k: f64| {
        let mut y = x;
        y[axis] += k * h;
        f(y)
    };
    (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn curl_of(f: impl Fn([f64; 3]) -> [f64; 3], x: [f64; 3]) -> [f64; 3] {
    let c = |i: usize, ax: usize| d(|y| f(y)[i], ax, x);
    [c(2, 1) - c(1, 2), c(0, 2) - c(2, 0), c(1, 0) - c(0, 1)]
}

impl Analytic {
    fn state(&self, grid: Grid) -> MhdState {
        let mut st = MhdState::uniform(grid, 1.0, [0.0; 3], 0.0, [0.0; 3]);
        st.rho = ScalarField::from_fn(grid, self.rho);
        st.u = VectorField::from_fn(grid, self.u);
        st.s = ScalarField::from_fn(grid, self.s);
        st.b = VectorField::from_fn(grid, self.b);
        st.a = Some(VectorField::from_fn(grid, self.a));
        st.with_label("psi", AffineField::new([0.0, 0.0, 1.0], ScalarField::from_fn(grid, self.psi)))
    }

    /// (drho, du, dS, dB, dA, dpsi)
    fn rhs(&self, eos: &Eos, x: [f64; 3]) -> (f64, [f64; 3], f64, [f64; 3], [f64; 3], f64) {
        let (rho, u, b, a) = (self.rho, self.u, self.b, self.a);
        let s = self.s;
        let r = rho(x);
        let uu = u(x);
        let bb = b(x);
        let drho = -(0..3).map(|i| d(|y| rho(y) * u(y)[i], i, x)).sum::<f64>();
        let p = |y: [f64; 3]| eos.pressure(rho(y), s(y));
        let jxb = cross(curl_of(b, x), bb);
        let mut du = [0.0; 3];
        for (i, v) in du.iter_mut().enumerate() {
            let adv: f64 = (0..3).map(|j| uu[j] * d(|y| u(y)[i], j, x)).sum();
            *v = -adv - d(p, i, x) / r + jxb[i] / (eos.mu0 * r);
        }
        let ds = -(0..3).map(|j| uu[j] * d(s, j, x)).sum::<f64>();
        let db = curl_of(|y| cross(u(y), b(y)), x);
        let uxc = cross(uu, curl_of(a, x));
        let ua = |y: [f64; 3]| {
            let (v, w) = (u(y), a(y));
            v[0] * w[0] + v[1] * w[1] + v[2] * w[2]
        };
        let da = [0, 1, 2].map(|i| uxc[i] - d(ua, i, x));
        let psi = |y: [f64; 3]| (self.psi)(y) + y[2];
        let dpsi = -(0..3).map(|j| uu[j] * d(psi, j, x)).sum::<f64>();
        (drho, du, ds, db, da, dpsi)
    }
}

fn analytic_3d() -> Analytic {
    Analytic {
        rho: |x| 1.0 + 0.2 * x[0].sin() * x[2].cos(),
        u: |x| [0.3 * x[1].sin(), 0.2 * (x[0] + x[2]).cos(), -0.1 * x[1].cos()],
        s: |x| 0.1 * (x[1] - x[2]).cos(),
        b: |x| [x[1].cos() + 0.3, x[2].sin(), 0.5 * x[0].cos()],
        a: |x| [0.2 * x[1].sin(), x[0].cos(), 0.4 * x[2].sin()],
        psi: |x| 0.3 * x[0].sin() * x[1].cos(),
    }
}

#[test]
fn rhs_matches_analytic_differentiation() {
    let eos = Eos::new(1.4, 1.2, 0.1, 0.8).unwrap();
    let an = analytic_3d();
    let mut errs = Vec::new();
    for n in [12, 24] {
        let grid = Grid::periodic_3d(n, 4).unwrap();
        let k = mhd_rhs(&an.state(grid), &eos).unwrap();
        let mut e = [0.0f64; 6];
        for idx in 0..grid.len() {
            let (drho, du, ds, db, da, dpsi) = an.rhs(&eos, grid.coords(idx));
            let ka = k.a.as_ref().unwrap();
            e[0] = e[0].max((k.rho.values()[idx] - drho).abs());
            e[2] = e[2].max((k.s.values()[idx] - ds).abs());
            e[5] = e[5].max((k.labels["psi"].values()[idx] - dpsi).abs());
            for i in 0..3 {
                e[1] = e[1].max((k.u.c[i].values()[idx] - du[i]).abs());
                e[3] = e[3].max((k.b.c[i].values()[idx] - db[i]).abs());
                e[4] = e[4].max((ka.c[i].values()[idx] - da[i]).abs());
            }
        }
        errs.push(e);
    }
    for f in 0..6 {
        let order = (errs[0][f] / errs[1][f]).log2();
        assert!(order > 3.5, "field {f}: {:e} -> {:e}", errs[0][f], errs[1][f]);
        assert!(errs[1][f] < 1e-3);
    }
}

#[test]
fn non_positive_density_reports_location() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let mut state = presets::uniform(grid, &eos()).unwrap();
    let idx = grid.index(3, 5, 0);
    state.rho.values_mut()[idx] = -0.1;
    match mhd_rhs(&state, &eos()) {
        Err(Error::NonPositiveDensity { index, position, .. }) => {
            assert_eq!(index, idx);
            assert_eq!(position, grid.coords(idx));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn non_finite_tendency_aborts() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let mut state = presets::uniform(grid, &eos()).unwrap();
    state.u.c[0].values_mut()[7] = f64::NAN;
    assert!(matches!(mhd_rhs(&state, &eos()), Err(Error::NonFinite { .. })));
}

#[test]
fn zero_tendency_state_is_unchanged() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let state = presets::uniform(grid, &eos()).unwrap();
    let next = rk4_step(&state, &eos(), 0.01).unwrap();
    assert_eq!(next.rho, state.rho);
    assert_eq!(next.u, state.u);
    assert_eq!(next.b, state.b);
    assert_eq!(next.labels, state.labels);
    assert!((next.t - 0.01).abs() < 1e-16);
}

fn run(mut state: MhdState, eos: &Eos, dt: f64, steps: usize) -> MhdState {
    for _ in 0..steps {
        state = rk4_step(&state, eos, dt).unwrap();
    }
    state
}

#[test]
fn advection_returns_after_one_period() {
    let period = 2.0 * std::f64::consts::PI;
    let mut errs = Vec::new();
    for n in [16, 32] {
        let grid = Grid::periodic_2d(n, 4).unwrap();
        let state = presets::advection(grid, &eos()).unwrap();
        let limit = stable_dt(&state, &eos(), 0.3).unwrap();
        let steps = (period / limit).ceil() as usize;
        let end = run(state.clone(), &eos(), period / steps as f64, steps);
        let e = (&end.labels["psi"].periodic - &state.labels["psi"].periodic).linf();
        errs.push(e);
        assert!((end.t - period).abs() < 1e-12);
    }
    assert!(errs[1] < 1e-3, "{errs:?}");
    assert!((errs[0] / errs[1]).log2() > 3.5, "{errs:?}");
}

#[test]
fn halving_dt_reduces_temporal_error_sixteen_fold() {
    let grid = Grid::periodic_2d(32, 4).unwrap();
    let state = presets::orszag_tang_25d(grid, &eos(), OrszagTang::default()).unwrap();
    let t_end = 0.1;
    let reference = run(state.clone(), &eos(), t_end / 320.0, 320);
    let err = |steps: usize| {
        let end = run(state.clone(), &eos(), t_end / steps as f64, steps);
        (&end.u - &reference.u).linf().max((&end.b - &reference.b).linf())
    };
    let ratio = err(5) / err(10);
    assert!((13.0..19.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn stable_dt_reference_value() {
    let grid = Grid::new([64, 64, 1], [6.4, 6.4, 1.0], 4).unwrap();
    let state = MhdState::uniform(grid, 1.0, [0.0; 3], 0.0, [0.0; 3]);
    let dt = stable_dt(&state, &eos(), 0.4).unwrap();
    assert!((dt - 0.04 / (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert!((dt - 0.03098).abs() < 1e-5);
}

#[test]
fn stronger_field_shortens_step() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let weak = MhdState::uniform(grid, 1.0, [0.0; 3], 0.0, [0.5, 0.0, 0.0]);
    let strong = MhdState::uniform(grid, 1.0, [0.0; 3], 0.0, [1.0, 0.0, 0.0]);
    assert!(stable_dt(&strong, &eos(), 0.4).unwrap() < stable_dt(&weak, &eos(), 0.4).unwrap());
}

#[test]
fn quiescent_state_has_unbounded_step() {
    // pressure underflows to zero at very low entropy
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let state = MhdState::uniform(grid, 1.0, [0.0; 3], -1e6, [0.0; 3]);
    assert_eq!(stable_dt(&state, &eos(), 0.4).unwrap(), f64::INFINITY);
}

#[test]
fn stable_dt_matches_brute_force_scan() {
    let grid = Grid::periodic_2d(32, 4).unwrap();
    let eos = eos();
    let state = presets::orszag_tang_25d(grid, &eos, OrszagTang::default()).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let r = state.rho.values()[i];
        let p = eos.pressure(r, state.s.values()[i]);
        let u = state.u.at(i);
        let b = state.b.at(i);
        let c = (eos.gamma * p / r + (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]) / r).sqrt();
        worst = worst.max((u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt() + c);
    }
    let expected = 0.3 * grid.min_spacing() / worst;
    assert_eq!(stable_dt(&state, &eos, 0.3).unwrap(), expected);
}

#[test]
fn oversized_step_is_rejected() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let state = presets::orszag_tang_25d(grid, &eos(), OrszagTang::default()).unwrap();
    let limit = stable_dt(&state, &eos(), 1.0).unwrap();
    assert!(matches!(
        rk4_step(&state, &eos(), 2.0 * limit),
        Err(Error::Unstable { .. })
    ));
}

#[test]
fn instability_detector_fires() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let state = presets::orszag_tang_25d(grid, &eos(), OrszagTang::default()).unwrap();
    let limit = stable_dt(&state, &eos(), 1.0).unwrap();
    let r = rk4_stages(&state, &eos(), 200.0 * limit);
    assert!(
        matches!(
            r,
            Err(Error::Instability { .. }) | Err(Error::NonPositiveDensity { .. }) | Err(Error::NonFinite { .. })
        ),
        "{r:?}"
    );
}

#[test]
fn divergence_free_field_stays_divergence_free() {
    let grid = Grid::periodic_2d(32, 4).unwrap();
    let eos = eos();
    let mut state = presets::orszag_tang_25d(grid, &eos, OrszagTang::default()).unwrap();
    let dt = stable_dt(&state, &eos, 0.3).unwrap();
    for _ in 0..20 {
        state = rk4_step(&state, &eos, dt).unwrap();
        let bound = 1e-11 * state.b.linf() / grid.min_spacing();
        assert!(div(&state.b).linf() <= bound);
    }

    let grid = Grid::periodic_3d(12, 4).unwrap();
    let mut state = analytic_3d().state(grid);
    state.b = curl(&VectorField::from_fn(grid, |x| {
        [x[1].sin() * x[2].cos(), 0.3 * x[0].cos(), (x[0] + x[1]).sin()]
    }));
    let dt = stable_dt(&state, &eos, 0.3).unwrap();
    for _ in 0..5 {
        state = rk4_step(&state, &eos, dt).unwrap();
        assert!(div(&state.b).linf() <= 1e-11 * state.b.linf() / grid.min_spacing());
    }
}

#[test]
fn entropy_extrema_do_not_expand() {
    let eos = eos();
    let mut excess = Vec::new();
    for n in [32, 64] {
        let grid = Grid::periodic_2d(n, 4).unwrap();
        let mut state = presets::orszag_tang_25d(grid, &eos, OrszagTang { hydro: true, ..Default::default() }).unwrap();
        let (lo, hi) = (state.s.min(), state.s.max());
        let t_end = 0.2;
        let steps = (t_end / stable_dt(&state, &eos, 0.3).unwrap()).ceil() as usize;
        state = run(state, &eos, t_end / steps as f64, steps);
        excess.push((lo - state.s.min()).max(state.s.max() - hi).max(0.0));
    }
    let h = 2.0 * std::f64::consts::PI / 64.0;
    assert!(excess[1] <= h.powi(4), "{excess:?}");
    assert!(excess[1] <= excess[0] || excess[1] < 1e-12);
}

#[test]
fn diagnostics_of_uniform_box() {
    let grid = Grid::periodic_3d(16, 4).unwrap();
    let state = presets::uniform(grid, &eos()).unwrap();
    let d = global_diagnostics(&state, &eos()).unwrap();
    let vol = (2.0 * std::f64::consts::PI).powi(3);
    assert!((d.total_mass - vol).abs() <= 1e-13 * vol);
    // eps = 1.5, B^2/2 = 0.5
    assert!((d.total_energy - 2.0 * vol).abs() <= 1e-13 * vol);
    assert_eq!(d.div_b_norm, 0.0);
    assert_eq!(d.cross_helicity, 0.0);
}

#[test]
fn static_equilibrium_energy_constant() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let eos = eos();
    let mut state = presets::uniform(grid, &eos).unwrap();
    let e0 = global_diagnostics(&state, &eos).unwrap().total_energy;
    for _ in 0..10 {
        state = rk4_step(&state, &eos, 0.05).unwrap();
        let e = global_diagnostics(&state, &eos).unwrap().total_energy;
        assert!((e - e0).abs() <= 1e-14 * e0);
    }
}

#[test]
fn static_potential_enters_momentum() {
    // hydrostatic balance is not exact discretely, so test the forcing only
    let grid = Grid::periodic_2d(32, 4).unwrap();
    let mut state = presets::uniform(grid, &eos()).unwrap();
    state.phi = Some(ScalarField::from_fn(grid, |x| 0.1 * x[0].cos()));
    let k = mhd_rhs(&state, &eos()).unwrap();
    let exact = ScalarField::from_fn(grid, |x| 0.1 * x[0].sin());
    assert!((&k.u.c[0] - &exact).linf() < 1e-5);
}
