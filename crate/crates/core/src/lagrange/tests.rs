use super::*;
use crate::calculus::AffineField;
use crate::presets::{self, OrszagTang};
use crate::solver::{mhd_rhs, stable_dt};

fn eos() -> Eos {
    Eos::default()
}

fn shear() -> FnSampler<impl Fn(Vec3) -> (Vec3, Mat3) + Sync> {
    FnSampler(|x: Vec3| ([x[1], 0.0, 0.0], [[0.0, 1.0, 0.0], [0.0; 3], [0.0; 3]]))
}

fn steady<S: VelocitySampler>(s: &S) -> [&dyn VelocitySampler; 4] {
    [s, s, s, s]
}

fn map_on(grid: Grid, b0: [f64; 3]) -> LagrangianMap {
    let state = MhdState::uniform(grid, 1.0, [0.0; 3], 0.0, b0);
    LagrangianMap::from_state(&state)
}

#[test]
fn zero_velocity_leaves_map_unchanged() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let map = map_on(grid, [0.0; 3]);
    let still = FnSampler(|_: Vec3| ([0.0; 3], [[0.0; 3]; 3]));
    let next = advance_map(&map, steady(&still), 0.1).unwrap();
    assert_eq!(next.displacement, map.displacement);
    assert_eq!(next.f, map.f);
    assert!((next.t - 0.1).abs() < 1e-16);
}

#[test]
fn linear_shear_is_integrated_exactly() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let mut map = map_on(grid, [0.0, 1.0, 0.0]);
    let s = shear();
    for _ in 0..7 {
        map = advance_map(&map, steady(&s), 0.05).unwrap();
    }
    let t = map.t;
    let geom = map_geometry(&map).unwrap();
    for i in 0..grid.len() {
        let f = map.f.at(i);
        assert!((f[0][1] - t).abs() < 1e-14);
        assert!((mat3::det(&f) - 1.0).abs() < 1e-14);
        let x0 = grid.coords(i);
        let x = map.position(i);
        assert!((x[0] - (x0[0] + t * x0[1])).abs() < 1e-13);
        assert!((geom.j.values()[i] - 1.0).abs() < 1e-14);
    }
    // field-line tilting
    let recon = map_reconstruct(&map, &geom);
    for i in 0..grid.len() {
        let b = recon.b.at(i);
        assert!((b[0] - t).abs() < 1e-14 && (b[1] - 1.0).abs() < 1e-14 && b[2] == 0.0);
    }
}

fn smooth_flow() -> FnSampler<impl Fn(Vec3) -> (Vec3, Mat3) + Sync> {
    FnSampler(|x: Vec3| {
        let u = [0.3 * x[1].sin(), 0.2 * x[0].sin() + 0.1 * x[1].cos(), 0.1 * (x[0] + x[1]).cos()];
        let s = -0.1 * (x[0] + x[1]).sin();
        let g = [
            [0.0, 0.3 * x[1].cos(), 0.0],
            [0.2 * x[0].cos(), -0.1 * x[1].sin(), 0.0],
            [s, s, 0.0],
        ];
        (u, g)
    })
}

#[test]
fn deformation_gradient_matches_position_differences() {
    let mut errs = Vec::new();
    for n in [16, 32] {
        let grid = Grid::periodic_2d(n, 4).unwrap();
        let mut map = map_on(grid, [0.0; 3]);
        let s = smooth_flow();
        for _ in 0..20 {
            map = advance_map(&map, steady(&s), 0.025).unwrap();
        }
        let fd = position_gradient(&map);
        let mut e: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                e = e.max((&fd.t[i][j] - &map.f.t[i][j]).linf());
            }
        }
        errs.push(e);
    }
    assert!(errs[1] < 1e-4, "{errs:?}");
    assert!((errs[0] / errs[1]).log2() > 3.5, "{errs:?}");
}

#[test]
fn identity_geometry() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let geom = map_geometry(&map_on(grid, [0.0; 3])).unwrap();
    assert!(geom.j.values().iter().all(|&j| j == 1.0));
    assert_eq!(geom.a, TensorField::identity(grid));
}

#[test]
fn stretched_geometry_and_folding() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let mut map = map_on(grid, [0.0; 3]);
    for i in 0..grid.len() {
        map.f.set(i, [[2.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 1.0]]);
    }
    let geom = map_geometry(&map).unwrap();
    assert_eq!(geom.j.values()[5], 6.0);
    assert_eq!(geom.a.at(5), [[3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 6.0]]);
    map.f.set(9, [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    assert!(matches!(map_geometry(&map), Err(Error::Folding { index: 9, .. })));
}

#[test]
fn random_deformations_satisfy_cofactor_identity() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let mut map = map_on(grid, [0.0; 3]);
    let mut seed = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for i in 0..grid.len() {
        let mut f = mat3::IDENTITY;
        for row in f.iter_mut() {
            for v in row.iter_mut() {
                *v += 0.6 * next();
            }
        }
        if mat3::det(&f) < 0.2 {
            f = mat3::IDENTITY;
        }
        map.f.set(i, f);
    }
    let geom = map_geometry(&map).unwrap();
    for i in 0..grid.len() {
        let p = mat3::mul(&geom.a.at(i), &mat3::transpose(&map.f.at(i)));
        let j = geom.j.values()[i];
        for r in 0..3 {
            for c in 0..3 {
                let expect = if r == c { j } else { 0.0 };
                assert!((p[r][c] - expect).abs() <= 1e-13);
            }
        }
    }
}

#[test]
fn staged_velocity_gradients_can_fold_the_map() {
    let grid = Grid::periodic_2d(8, 4).unwrap();
    let map = map_on(grid, [0.0; 3]);
    let crush = FnSampler(|_: Vec3| ([0.0; 3], [[-100.0, 0.0, 0.0], [0.0; 3], [0.0; 3]]));
    let still = FnSampler(|_: Vec3| ([0.0; 3], [[0.0; 3]; 3]));
    let r = advance_map(&map, [&crush, &still, &still, &still], 1.0);
    assert!(matches!(r, Err(Error::Folding { .. })), "{r:?}");
}

#[test]
fn reconstruction_at_start_is_exact() {
    let grid = Grid::periodic_2d(32, 4).unwrap();
    let state = presets::orszag_tang_25d(grid, &eos(), OrszagTang::default()).unwrap();
    let map = LagrangianMap::from_state(&state);
    let geom = map_geometry(&map).unwrap();
    let recon = map_reconstruct(&map, &geom);
    assert_eq!(recon.rho, state.rho);
    assert_eq!(recon.s, state.s);
    assert_eq!(recon.b, state.b);
    let m = reconstruction_mismatch(&recon, &state, &map, Kernel::Cubic).unwrap();
    assert!(m.rho_linf < 1e-15 && m.b_linf < 1e-15 && m.s_linf < 1e-15);
}

#[test]
fn densities_of_static_states() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let e = eos();
    let map = map_on(grid, [0.3, 0.4, 0.0]);
    let geom = map_geometry(&map).unwrap();
    let zero = VectorField::zeros(grid);
    let d = lagrangian_densities(&map, &geom, &e, &zero, None).unwrap();
    // eps(1, 0) = 1.5, B^2/2 = 0.125
    assert!(d.ell.values().iter().all(|&v| (v + 1.625).abs() < 1e-15));
    assert_eq!(d.ell0, d.ell);
    assert_eq!(d.consistency, 0.0);

    let map = map_on(grid, [0.0; 3]);
    let d = lagrangian_densities(&map, &geom, &e, &zero, None).unwrap();
    assert!(d.ell0.values().iter().all(|&v| (v + e.internal_energy(1.0, 0.0)).abs() < 1e-15));
}

#[test]
fn sheared_magnetic_density() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let e = Eos::new(5.0 / 3.0, 1.0, 0.0, 2.0).unwrap();
    let mut map = map_on(grid, [0.0, 1.0, 0.0]);
    let s = shear();
    for _ in 0..4 {
        map = advance_map(&map, steady(&s), 0.1).unwrap();
    }
    let t = map.t;
    let geom = map_geometry(&map).unwrap();
    let zero = VectorField::zeros(grid);
    let d = lagrangian_densities(&map, &geom, &e, &zero, None).unwrap();
    // hand evaluation: -(x_ij x_is B0^j B0^s)/(2 mu0 J) - J eps(rho0/J, S0)
    let magnetic = -(1.0 + t * t) / (2.0 * e.mu0);
    let expect = magnetic - e.internal_energy(1.0, 0.0);
    for i in 0..grid.len() {
        assert!((d.ell0.values()[i] - expect).abs() < 1e-14);
    }
    assert!(d.consistency <= 1e-15);
}

#[test]
fn euler_lagrange_vanishes_on_equilibria() {
    let grid = Grid::periodic_3d(8, 4).unwrap();
    let e = eos();
    for u in [[0.0; 3], [0.3, -0.1, 0.2]] {
        let state = MhdState::uniform(grid, 1.2, u, 0.1, [0.2, 0.5, -0.3]);
        let mut c = Coupled::new(state);
        for _ in 0..3 {
            c = c.step(&e, 0.02, Kernel::Cubic).unwrap().0;
        }
        let k = mhd_rhs(&c.state, &e).unwrap();
        let geom = map_geometry(&c.map).unwrap();
        let r = euler_lagrange_residual(&c.map, &geom, &e, &c.state, &k, Kernel::Cubic).unwrap();
        assert!(r.linf() < 1e-13, "{}", r.linf());
    }
}

#[test]
fn desynchronized_inputs_are_rejected() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let state = presets::uniform(grid, &eos()).unwrap();
    let mut map = LagrangianMap::from_state(&state);
    map.t = 0.5;
    let k = mhd_rhs(&state, &eos()).unwrap();
    let geom = map_geometry(&map).unwrap();
    assert!(matches!(
        euler_lagrange_residual(&map, &geom, &eos(), &state, &k, Kernel::Cubic),
        Err(Error::TimeLevels(_))
    ));
    let c = Coupled { state, map };
    assert!(matches!(c.step(&eos(), 0.01, Kernel::Cubic), Err(Error::Desynchronized { .. })));
}

struct Sample {
    e: f64,
    rho: f64,
    b: f64,
    label: f64,
    cofactor: f64,
}

fn ot_run(n: usize, t_end: f64) -> Sample {
    let e = eos();
    let grid = Grid::periodic_2d(n, 4).unwrap();
    let state = presets::orszag_tang_25d(grid, &e, OrszagTang::default()).unwrap();
    let psi0 = state.labels["psi"].clone();
    let steps = (t_end / stable_dt(&state, &e, 0.3).unwrap()).ceil() as usize;
    let dt = t_end / steps as f64;
    let mut c = Coupled::new(state);
    for _ in 0..steps {
        c = c.step(&e, dt, Kernel::Cubic).unwrap().0;
    }
    let k = mhd_rhs(&c.state, &e).unwrap();
    let geom = map_geometry(&c.map).unwrap();
    let r = euler_lagrange_residual(&c.map, &geom, &e, &c.state, &k, Kernel::Cubic).unwrap();
    let recon = map_reconstruct(&c.map, &geom);
    let m = reconstruction_mismatch(&recon, &c.state, &c.map, Kernel::Cubic).unwrap();
    let psi = sample_at_tracers(&c.state.labels["psi"].periodic, &c.map, Kernel::Cubic).unwrap();
    let label = (&psi - &AffineField::periodic(psi0.periodic).periodic).linf();
    Sample {
        e: r.linf(),
        rho: m.rho_linf,
        b: m.b_linf,
        label,
        cofactor: cofactor_divergence(&geom).linf(),
    }
}

#[test]
fn on_shell_map_identities_converge() {
    let coarse = ot_run(32, 0.1);
    let fine = ot_run(64, 0.1);
    let order = |a: f64, b: f64| (a / b).log2();
    eprintln!("E {:e} {:e} rho {:e} {:e} B {:e} {:e} psi {:e} {:e}", coarse.e, fine.e, coarse.rho, fine.rho, coarse.b, fine.b, coarse.label, fine.label);
    assert!(order(coarse.e, fine.e) >= 2.0, "E {} -> {}", coarse.e, fine.e);
    assert!(order(coarse.rho, fine.rho) >= 3.0, "rho {} -> {}", coarse.rho, fine.rho);
    assert!(order(coarse.b, fine.b) >= 3.0, "B {} -> {}", coarse.b, fine.b);
    assert!(order(coarse.label, fine.label) >= 3.0, "psi {} -> {}", coarse.label, fine.label);
    assert!(
        order(coarse.cofactor, fine.cofactor) >= 2.5,
        "cofactor {} -> {}",
        coarse.cofactor,
        fine.cofactor
    );
}

#[test]
fn tracer_lattice_follows_shear() {
    let grid = Grid::periodic_2d(16, 4).unwrap();
    let cloud = TracerCloud::lattice(&grid, 10);
    assert_eq!(cloud.positions.len(), 100);
    let s = shear();
    let next = cloud.advance(steady(&s), 0.2).unwrap();
    for (p, q) in next.positions.iter().zip(&cloud.initial) {
        assert!((p[0] - q[0] - 0.2 * q[1]).abs() < 1e-14);
    }
}
