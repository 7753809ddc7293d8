//! Shared fixtures for the kernel benchmarks.

use mhd_invariants::calculus::Grid;
use mhd_invariants::lagrange::Coupled;
use mhd_invariants::presets::{orszag_tang_25d, OrszagTang};
use mhd_invariants::{Eos, MhdState};

/// Grid sizes the benchmarks sweep.
pub const SIZES: [usize; 3] = [32, 64, 128];

/// Orszag-Tang state on an `n x n` grid with fourth-order stencils.
pub fn ot_state(n: usize) -> MhdState {
    let grid = Grid::periodic_2d(n, 4).expect("valid grid");
    orszag_tang_25d(grid, &Eos::default(), OrszagTang::default()).expect("valid state")
}

/// The same state advanced a few steps, so that the map is no longer the identity.
pub fn ot_coupled(n: usize, steps: usize) -> Coupled {
    let eos = Eos::default();
    let mut c = Coupled::new(ot_state(n));
    let dt = 0.2 / n as f64;
    for _ in 0..steps {
        c = c.step(&eos, dt, Default::default()).expect("stable step").0;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let c = ot_coupled(16, 2);
        assert!((c.state.t - 2.0 * 0.2 / 16.0).abs() < 1e-15);
        assert_eq!(c.state.grid().len(), 256);
    }
}
