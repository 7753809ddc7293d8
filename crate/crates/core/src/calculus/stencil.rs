//! Centered finite differences on the periodic grid.
//!
//! All operators are built from the same 1D first-derivative stencil per
//! axis. Those 1D operators commute, so `div(curl v)` and `curl(grad f)`
//! vanish up to round-off.

use rayon::prelude::*;

use super::{Grid, ScalarField, TensorField, VectorField};
use crate::error::{Error, Result};

/// Antisymmetric weights `c_m` of `f' ~ sum_m c_m (f[i+m] - f[i-m]) / h`.
pub fn central_weights(order: usize) -> &'static [f64] {
    match order {
        2 => &[0.5],
        4 => &[2.0 / 3.0, -1.0 / 12.0],
        6 => &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
        8 => &[4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
        _ => panic!("unsupported stencil order {order}"),
    }
}

/// First derivative along `axis`. Zero on an inactive axis.
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = *f.grid();
    if !grid.is_active(axis) {
        return ScalarField::zeros(grid);
    }
    let w = central_weights(grid.order());
    let inv_h = 1.0 / grid.spacing(axis);
    let [nx, ny, _] = grid.n();
    let n_axis = grid.n()[axis];
    let stride = match axis {
        0 => 1,
        1 => nx,
        _ => nx * ny,
    };
    // neighbour offsets (as index deltas) for every position along the axis
    let offsets: Vec<Vec<(isize, isize)>> = (0..n_axis)
        .map(|p| {
            (1..=w.len())
                .map(|m| {
                    let fwd = ((p + m) % n_axis) as isize - p as isize;
                    let bwd = ((p + n_axis - m) % n_axis) as isize - p as isize;
                    (fwd * stride as isize, bwd * stride as isize)
                })
                .collect()
        })
        .collect();
    let src = f.values();
    let mut out = vec![0.0; grid.len()];
    out.par_chunks_mut(nx).enumerate().for_each(|(row, dst)| {
        let j = row % ny;
        let k = row / ny;
        let base = row * nx;
        for (i, d) in dst.iter_mut().enumerate() {
            let p = match axis {
                0 => i,
                1 => j,
                _ => k,
            };
            let idx = (base + i) as isize;
            let mut acc = 0.0;
            for (c, &(fwd, bwd)) in w.iter().zip(&offsets[p]) {
                acc += c * (src[(idx + fwd) as usize] - src[(idx + bwd) as usize]);
            }
            *d = acc * inv_h;
        }
    });
    ScalarField::from_vec(grid, out).expect("shape preserved")
}

pub fn grad(f: &ScalarField) -> VectorField {
    VectorField::new(partial(f, 0), partial(f, 1), partial(f, 2))
}

pub fn div(v: &VectorField) -> ScalarField {
    let dx = partial(&v.c[0], 0);
    let dy = partial(&v.c[1], 1);
    let dz = partial(&v.c[2], 2);
    &(&dx + &dy) + &dz
}

pub fn curl(v: &VectorField) -> VectorField {
    VectorField::new(
        &partial(&v.c[2], 1) - &partial(&v.c[1], 2),
        &partial(&v.c[0], 2) - &partial(&v.c[2], 0),
        &partial(&v.c[1], 0) - &partial(&v.c[0], 1),
    )
}

/// `grad v` with `t[i][j] = d v_i / d x_j`.
pub fn gradient_tensor(v: &VectorField) -> TensorField {
    let g = |i: usize| [partial(&v.c[i], 0), partial(&v.c[i], 1), partial(&v.c[i], 2)];
    TensorField {
        t: [g(0), g(1), g(2)],
    }
}

/// `(a . grad) v`, componentwise.
pub fn advective(a: &VectorField, v: &VectorField) -> VectorField {
    v.map_components(|comp| grad(comp).dot(a))
}

/// Row-wise divergence of a tensor: `out_i = d t_ij / d x_j`.
pub fn tensor_div(t: &TensorField) -> VectorField {
    let row = |i: usize| {
        let s = &partial(&t.t[i][0], 0) + &partial(&t.t[i][1], 1);
        &s + &partial(&t.t[i][2], 2)
    };
    VectorField::new(row(0), row(1), row(2))
}

/// Operator selector for [`apply_diff`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffKind {
    Grad,
    Div,
    Curl,
}

/// Scalar or vector field argument for [`apply_diff`].
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl Field {
    pub fn grid(&self) -> &Grid {
        match self {
            Field::Scalar(f) => f.grid(),
            Field::Vector(v) => v.grid(),
        }
    }
}

/// Applies `grad`, `div` or `curl`, checking arity and finiteness.
pub fn apply_diff(kind: DiffKind, field: &Field) -> Result<Field> {
    match field {
        Field::Scalar(f) => f.ensure_finite("input")?,
        Field::Vector(v) => v.ensure_finite("input")?,
    }
    match (kind, field) {
        (DiffKind::Grad, Field::Scalar(f)) => Ok(Field::Vector(grad(f))),
        (DiffKind::Div, Field::Vector(v)) => Ok(Field::Scalar(div(v))),
        (DiffKind::Curl, Field::Vector(v)) => Ok(Field::Vector(curl(v))),
        (DiffKind::Grad, Field::Vector(_)) => {
            Err(Error::Arity("grad takes a scalar field".into()))
        }
        (k, Field::Scalar(_)) => Err(Error::Arity(format!("{k:?} takes a vector field"))),
    }
}
