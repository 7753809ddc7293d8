use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;

use super::Grid;
use crate::error::{Error, Result};

/// Real values on every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            data: vec![value; grid.len()],
        }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} points",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, data })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64 + Sync) -> Self {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.coords(idx)))
            .collect();
        Self { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        Self {
            grid: self.grid,
            data: self.data.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            data: self
                .data
                .par_iter()
                .zip(other.data.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + s * b)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a / b)
    }

    pub fn linf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Root-mean-square over the grid (the volume-normalised L2 norm).
    pub fn l2(&self) -> f64 {
        let sum: f64 = self.data.iter().map(|v| v * v).sum();
        (sum / self.data.len() as f64).sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Midpoint-rule integral over the periodic domain.
    pub fn integral(&self) -> f64 {
        self.sum() * self.grid.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(index) => Err(Error::NonFinite {
                what: what.to_string(),
                index,
            }),
        }
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: Self) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: Self) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: Self) -> ScalarField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

/// Three Cartesian components on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub c: [ScalarField; 3],
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField, z: ScalarField) -> Self {
        Self { c: [x, y, z] }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, [0.0; 3])
    }

    pub fn constant(grid: Grid, v: [f64; 3]) -> Self {
        Self::new(
            ScalarField::constant(grid, v[0]),
            ScalarField::constant(grid, v[1]),
            ScalarField::constant(grid, v[2]),
        )
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3] + Sync) -> Self {
        let vals: Vec<[f64; 3]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.coords(idx)))
            .collect();
        let comp = |a: usize| ScalarField {
            grid,
            data: vals.iter().map(|v| v[a]).collect(),
        };
        Self::new(comp(0), comp(1), comp(2))
    }

    pub fn grid(&self) -> &Grid {
        self.c[0].grid()
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [
            self.c[0].data[idx],
            self.c[1].data[idx],
            self.c[2].data[idx],
        ]
    }

    pub fn set(&mut self, idx: usize, v: [f64; 3]) {
        for (a, comp) in self.c.iter_mut().enumerate() {
            comp.data[idx] = v[a];
        }
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self::new(f(&self.c[0]), f(&self.c[1]), f(&self.c[2]))
    }

    /// Pointwise map over the 3-vector at each point.
    pub fn map_points(&self, f: impl Fn([f64; 3]) -> [f64; 3] + Sync) -> Self {
        let grid = *self.grid();
        let vals: Vec<[f64; 3]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(self.at(idx)))
            .collect();
        let comp = |a: usize| ScalarField {
            grid,
            data: vals.iter().map(|v| v[a]).collect(),
        };
        Self::new(comp(0), comp(1), comp(2))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_components(|f| f.scale(s))
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self::new(
            self.c[0].axpy(s, &other.c[0]),
            self.c[1].axpy(s, &other.c[1]),
            self.c[2].axpy(s, &other.c[2]),
        )
    }

    /// Multiplies every component by a scalar field.
    pub fn scale_by(&self, s: &ScalarField) -> Self {
        self.map_components(|f| f * s)
    }

    pub fn div_by(&self, s: &ScalarField) -> Self {
        self.map_components(|f| f.div(s))
    }

    pub fn dot(&self, other: &Self) -> ScalarField {
        let xy = &(&self.c[0] * &other.c[0]) + &(&self.c[1] * &other.c[1]);
        &xy + &(&self.c[2] * &other.c[2])
    }

    pub fn cross(&self, other: &Self) -> Self {
        let (a, b) = (&self.c, &other.c);
        Self::new(
            &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
            &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
            &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
        )
    }

    pub fn norm_sq(&self) -> ScalarField {
        self.dot(self)
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        self.norm_sq().map(f64::sqrt)
    }

    /// Largest component magnitude anywhere.
    pub fn linf(&self) -> f64 {
        self.c.iter().map(ScalarField::linf).fold(0.0, f64::max)
    }

    /// RMS of the pointwise magnitude.
    pub fn l2(&self) -> f64 {
        let sum: f64 = self.c.iter().map(|f| f.l2().powi(2)).sum();
        sum.sqrt()
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        for (a, comp) in self.c.iter().enumerate() {
            comp.ensure_finite(&format!("{what}[{a}]"))?;
        }
        Ok(())
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: Self) -> VectorField {
        VectorField::new(
            &self.c[0] + &rhs.c[0],
            &self.c[1] + &rhs.c[1],
            &self.c[2] + &rhs.c[2],
        )
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: Self) -> VectorField {
        VectorField::new(
            &self.c[0] - &rhs.c[0],
            &self.c[1] - &rhs.c[1],
            &self.c[2] - &rhs.c[2],
        )
    }
}

impl Mul<f64> for &VectorField {
    type Output = VectorField;
    fn mul(self, rhs: f64) -> VectorField {
        self.scale(rhs)
    }
}

impl Neg for &VectorField {
    type Output = VectorField;
    fn neg(self) -> VectorField {
        self.map_components(|f| -f)
    }
}

/// 3x3 tensor field, `t[i][j]`; for a velocity gradient `t[i][j] = du_i/dx_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    pub t: [[ScalarField; 3]; 3],
}

impl TensorField {
    pub fn identity(grid: Grid) -> Self {
        let e = |i: usize, j: usize| ScalarField::constant(grid, if i == j { 1.0 } else { 0.0 });
        Self {
            t: [
                [e(0, 0), e(0, 1), e(0, 2)],
                [e(1, 0), e(1, 1), e(1, 2)],
                [e(2, 0), e(2, 1), e(2, 2)],
            ],
        }
    }

    pub fn grid(&self) -> &Grid {
        self.t[0][0].grid()
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.t[i][j].data[idx];
            }
        }
        m
    }

    pub fn set(&mut self, idx: usize, m: [[f64; 3]; 3]) {
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                self.t[i][j].data[idx] = *v;
            }
        }
    }

    /// Builds a tensor field from a per-point matrix function of the index.
    pub fn from_index_fn(grid: Grid, f: impl Fn(usize) -> [[f64; 3]; 3] + Sync) -> Self {
        let vals: Vec<[[f64; 3]; 3]> = (0..grid.len()).into_par_iter().map(&f).collect();
        let comp = |i: usize, j: usize| ScalarField {
            grid,
            data: vals.iter().map(|m| m[i][j]).collect(),
        };
        Self {
            t: [
                [comp(0, 0), comp(0, 1), comp(0, 2)],
                [comp(1, 0), comp(1, 1), comp(1, 2)],
                [comp(2, 0), comp(2, 1), comp(2, 2)],
            ],
        }
    }

    pub fn row(&self, i: usize) -> VectorField {
        VectorField::new(
            self.t[i][0].clone(),
            self.t[i][1].clone(),
            self.t[i][2].clone(),
        )
    }

    pub fn column(&self, j: usize) -> VectorField {
        VectorField::new(
            self.t[0][j].clone(),
            self.t[1][j].clone(),
            self.t[2][j].clone(),
        )
    }

    pub fn linf(&self) -> f64 {
        self.t
            .iter()
            .flatten()
            .map(ScalarField::linf)
            .fold(0.0, f64::max)
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        for (i, row) in self.t.iter().enumerate() {
            for (j, f) in row.iter().enumerate() {
                f.ensure_finite(&format!("{what}[{i}][{j}]"))?;
            }
        }
        Ok(())
    }
}

/// Builds a vector field from a per-point function of the index.
pub fn vector_from_index_fn(grid: Grid, f: impl Fn(usize) -> [f64; 3] + Sync) -> VectorField {
    let vals: Vec<[f64; 3]> = (0..grid.len()).into_par_iter().map(&f).collect();
    let comp = |a: usize| ScalarField {
        grid,
        data: vals.iter().map(|v| v[a]).collect(),
    };
    VectorField::new(comp(0), comp(1), comp(2))
}

/// Builds a scalar field from a per-point function of the index.
pub fn scalar_from_index_fn(grid: Grid, f: impl Fn(usize) -> f64 + Sync) -> ScalarField {
    ScalarField {
        grid,
        data: (0..grid.len()).into_par_iter().map(&f).collect(),
    }
}
