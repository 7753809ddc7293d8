use super::{stencil, Grid, ScalarField, VectorField};

/// A scalar of the form `slope . x + periodic(x)`.
///
/// Label potentials such as `z0` or `y0 + 0.1 sin x0` are not periodic, but
/// their gradients are; only the periodic part is stored on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineField {
    pub slope: [f64; 3],
    pub periodic: ScalarField,
}

impl AffineField {
    pub fn periodic(field: ScalarField) -> Self {
        Self {
            slope: [0.0; 3],
            periodic: field,
        }
    }

    pub fn new(slope: [f64; 3], periodic: ScalarField) -> Self {
        Self { slope, periodic }
    }

    pub fn grid(&self) -> &Grid {
        self.periodic.grid()
    }

    pub fn has_slope(&self) -> bool {
        self.slope.iter().any(|&s| s != 0.0)
    }

    /// Value at an unwrapped position `x` given the periodic part sampled there.
    #[inline]
    pub fn value_with(&self, x: [f64; 3], periodic_part: f64) -> f64 {
        self.slope[0] * x[0] + self.slope[1] * x[1] + self.slope[2] * x[2] + periodic_part
    }

    /// Full value at grid point `idx` (using the grid coordinate in `[0, L)`).
    pub fn value_at(&self, idx: usize) -> f64 {
        self.value_with(self.grid().coords(idx), self.periodic.values()[idx])
    }

    /// Discrete gradient: the constant slope plus the stencil gradient.
    pub fn grad(&self) -> VectorField {
        let g = stencil::grad(&self.periodic);
        VectorField::new(
            g.c[0].map(|v| v + self.slope[0]),
            g.c[1].map(|v| v + self.slope[1]),
            g.c[2].map(|v| v + self.slope[2]),
        )
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self {
            slope: [
                self.slope[0] + s * other.slope[0],
                self.slope[1] + s * other.slope[1],
                self.slope[2] + s * other.slope[2],
            ],
            periodic: self.periodic.axpy(s, &other.periodic),
        }
    }
}
