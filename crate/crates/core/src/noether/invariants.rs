use crate::calculus::{grad, Kernel, ScalarField};
use crate::error::{Error, Result};
use crate::lagrange::{sample_at_tracers, LagrangianMap};
use crate::solver::MhdState;

use super::Norms;

/// Scalars carried unchanged by the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvectedInvariants {
    /// `B . grad S / rho`
    pub psi1: ScalarField,
    /// `A . B / rho`
    pub psi2: Option<ScalarField>,
    /// `(B / rho) . grad psi2`
    pub psi3: Option<ScalarField>,
}

/// `with_potential` requests `psi2` and `psi3`, which need the vector potential.
pub fn advected_invariants(state: &MhdState, with_potential: bool) -> Result<AdvectedInvariants> {
    let b_over_rho = state.b.div_by(&state.rho);
    let psi1 = b_over_rho.dot(&grad(&state.s));
    let (psi2, psi3) = if with_potential {
        let a = state.a.as_ref().ok_or_else(|| {
            Error::Config("psi2/psi3 need the vector potential (scenario.vector_potential = true)".into())
        })?;
        let psi2 = a.dot(&b_over_rho);
        let psi3 = b_over_rho.dot(&grad(&psi2));
        (Some(psi2), Some(psi3))
    } else {
        (None, None)
    };
    Ok(AdvectedInvariants { psi1, psi2, psi3 })
}

/// Deviation of `current` sampled along the tracers of `map` from `initial`
/// on the label grid.
pub fn invariant_drift(
    initial: &ScalarField,
    current: &ScalarField,
    map: &LagrangianMap,
    kernel: Kernel,
) -> Result<Norms> {
    let along = sample_at_tracers(current, map, kernel)?;
    Ok(Norms::scalar(&(&along - initial)))
}
