use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic collocated grid. Point `(i, j, k)` sits at `(i*hx, j*hy, k*hz)`.
///
/// An axis with a single cell is inactive: derivatives along it vanish
/// identically, which is how 2.5D (all three vector components, no
/// variation in z) is represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: [usize; 3],
    len: [f64; 3],
    order: usize,
}

impl Grid {
    pub fn new(n: [usize; 3], len: [f64; 3], order: usize) -> Result<Self> {
        if order < 2 || !order.is_multiple_of(2) || order > 8 {
            return Err(Error::Grid(format!(
                "stencil order must be one of 2, 4, 6, 8 (got {order})"
            )));
        }
        for axis in 0..3 {
            if n[axis] == 0 {
                return Err(Error::Grid(format!("axis {axis} has zero cells")));
            }
            if !(len[axis].is_finite() && len[axis] > 0.0) {
                return Err(Error::Grid(format!(
                    "axis {axis} length must be positive (got {})",
                    len[axis]
                )));
            }
            // 4 x half-width: the widest stencil must not wrap onto itself.
            let min = 2 * order;
            if n[axis] > 1 && n[axis] < min {
                return Err(Error::Grid(format!(
                    "axis {axis} has {} cells, order-{order} stencils need at least {min}",
                    n[axis]
                )));
            }
        }
        if n[0] == 1 {
            return Err(Error::Grid("the x axis must be active".into()));
        }
        Ok(Self { n, len, order })
    }

    /// Square 2.5D grid on `[0, 2pi)^2` with `Lz = 2pi`.
    pub fn periodic_2d(n: usize, order: usize) -> Result<Self> {
        let l = std::f64::consts::TAU;
        Self::new([n, n, 1], [l, l, l], order)
    }

    pub fn periodic_3d(n: usize, order: usize) -> Result<Self> {
        let l = std::f64::consts::TAU;
        Self::new([n, n, n], [l, l, l], order)
    }

    /// Same geometry with a different stencil order.
    pub fn with_order(&self, order: usize) -> Result<Self> {
        Self::new(self.n, self.len, order)
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn nx(&self) -> usize {
        self.n[0]
    }

    pub fn ny(&self) -> usize {
        self.n[1]
    }

    pub fn nz(&self) -> usize {
        self.n[2]
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.len
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.len[axis] / self.n[axis] as f64
    }

    pub fn spacings(&self) -> [f64; 3] {
        [self.spacing(0), self.spacing(1), self.spacing(2)]
    }

    /// Smallest spacing over the active axes.
    pub fn min_spacing(&self) -> f64 {
        (0..3)
            .filter(|&a| self.is_active(a))
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.n[axis] > 1
    }

    pub fn is_2p5d(&self) -> bool {
        self.n[2] == 1
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume of one cell; inactive axes contribute their full length.
    pub fn cell_volume(&self) -> f64 {
        self.spacing(0) * self.spacing(1) * self.spacing(2)
    }

    pub fn volume(&self) -> f64 {
        self.len[0] * self.len[1] * self.len[2]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    #[inline]
    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.n[0];
        let rest = idx / self.n[0];
        [i, rest % self.n[1], rest / self.n[1]]
    }

    /// Physical coordinates of grid point `idx`.
    #[inline]
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.ijk(idx);
        [
            i as f64 * self.spacing(0),
            j as f64 * self.spacing(1),
            k as f64 * self.spacing(2),
        ]
    }

    /// Wraps a position into `[0, L)` on every axis.
    pub fn wrap(&self, p: [f64; 3]) -> [f64; 3] {
        let mut out = p;
        for a in 0..3 {
            out[a] = p[a].rem_euclid(self.len[a]);
            if out[a] >= self.len[a] {
                out[a] = 0.0;
            }
        }
        out
    }
}
