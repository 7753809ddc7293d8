//! Tensor-product Lagrange interpolation on the periodic grid.

use super::{Grid, ScalarField};
use crate::error::{Error, Result};

/// Interpolation kernel. `Cubic` is the 4-point Lagrange kernel (error
/// `O(h^4)`), `Linear` the 2-point kernel (exact on linear data).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    Linear,
    #[default]
    Cubic,
}

const MAX_POINTS: usize = 64;

/// Precomputed neighbour indices and weights for one sample position,
/// reusable across every field on the same grid.
#[derive(Debug, Clone)]
pub struct Stencil {
    idx: [usize; MAX_POINTS],
    w: [f64; MAX_POINTS],
    len: usize,
}

fn axis_weights(kernel: Kernel, s: f64, n: usize) -> ([usize; 4], [f64; 4], usize) {
    if n == 1 {
        return ([0; 4], [1.0, 0.0, 0.0, 0.0], 1);
    }
    let base = s.floor();
    let f = s - base;
    let i0 = base as isize;
    let wrap = |d: isize| (i0 + d).rem_euclid(n as isize) as usize;
    match kernel {
        Kernel::Linear => ([wrap(0), wrap(1), 0, 0], [1.0 - f, f, 0.0, 0.0], 2),
        Kernel::Cubic => {
            // nodes at -1, 0, 1, 2 relative to i0
            let w = [
                -f * (f - 1.0) * (f - 2.0) / 6.0,
                (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
                -(f + 1.0) * f * (f - 2.0) / 2.0,
                (f + 1.0) * f * (f - 1.0) / 6.0,
            ];
            ([wrap(-1), wrap(0), wrap(1), wrap(2)], w, 4)
        }
    }
}

impl Stencil {
    pub fn new(grid: &Grid, kernel: Kernel, pos: [f64; 3]) -> Result<Self> {
        if pos.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("interpolation position {pos:?}"),
                index: 0,
            });
        }
        let p = grid.wrap(pos);
        let mut axes = [([0usize; 4], [0.0; 4], 0usize); 3];
        for a in 0..3 {
            let n = grid.n()[a];
            let s = (p[a] / grid.spacing(a)).min(n as f64);
            axes[a] = axis_weights(kernel, s, n);
        }
        let mut st = Stencil {
            idx: [0; MAX_POINTS],
            w: [0.0; MAX_POINTS],
            len: 0,
        };
        let (ix, wx, lx) = axes[0];
        let (iy, wy, ly) = axes[1];
        let (iz, wz, lz) = axes[2];
        for c in 0..lz {
            for b in 0..ly {
                let wyz = wy[b] * wz[c];
                for a in 0..lx {
                    st.idx[st.len] = grid.index(ix[a], iy[b], iz[c]);
                    st.w[st.len] = wx[a] * wyz;
                    st.len += 1;
                }
            }
        }
        Ok(st)
    }

    /// Samples `field`. Evaluated as `f_ref + sum w (f - f_ref)` so that a
    /// constant field is reproduced exactly.
    #[inline]
    pub fn apply(&self, field: &ScalarField) -> f64 {
        let v = field.values();
        let f_ref = v[self.idx[0]];
        let mut acc = 0.0;
        for n in 0..self.len {
            acc += self.w[n] * (v[self.idx[n]] - f_ref);
        }
        f_ref + acc
    }
}

/// Samples a scalar field at arbitrary (wrapped) positions.
pub fn interpolate(field: &ScalarField, kernel: Kernel, positions: &[[f64; 3]]) -> Result<Vec<f64>> {
    positions
        .iter()
        .map(|&p| Stencil::new(field.grid(), kernel, p).map(|s| s.apply(field)))
        .collect()
}
