//! Finite-dimensional stand-ins for the three Hilbert-space realizations:
//! the line (truncated Fock basis), the half-line (positive grid) and spin.

mod halfline;
mod line;
mod spin;
mod state;

pub use halfline::{build_halfline_rep, GridKind, HalfLineGrid, HalfLineRep, MIN_GRID_POINTS};
pub use line::{build_fock_rep, LineRep};
pub use spin::{build_spin_rep, SpinRep};
pub use state::{expectation, overlap, StateSnapshot, StateVector, NORM_TOL};

use crate::error::{EqError, Result};
use crate::linalg::{CMatrix, HermitianGenerator};

/// `exp(−iθA/ħ)|ψ⟩` for a Hermitian generator `A`.
///
/// Builds a one-off eigendecomposition; callers applying the same generator
/// repeatedly should hold a [`HermitianGenerator`] instead.
pub fn apply_unitary(
    op: &CMatrix,
    theta: f64,
    hbar: f64,
    state: &StateVector,
) -> Result<StateVector> {
    if op.nrows() != state.dim() {
        return Err(EqError::invalid(format!(
            "generator dim {} does not match state dim {}",
            op.nrows(),
            state.dim()
        )));
    }
    if theta == 0.0 {
        return Ok(state.clone());
    }
    let g = HermitianGenerator::new(op, hbar)?;
    Ok(StateVector::from_raw(g.apply(theta, state.amplitudes())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, I};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_angle_is_identity() {
        let rep = SpinRep::new(1.0, 1.0).unwrap();
        let psi = StateVector::normalized(crate::linalg::CVector::from_vec(vec![
            c(0.2),
            I * 0.5,
            c(-0.1),
        ]))
        .unwrap();
        let out = apply_unitary(rep.s2(), 0.0, 1.0, &psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn spin_half_flip_about_s2() {
        // exp(−iπσ_y/2) = −iσ_y, so |↑⟩ ↦ |↓⟩ exactly
        let rep = SpinRep::new(0.5, 1.0).unwrap();
        let up = rep.highest_weight();
        let out = apply_unitary(rep.s2(), PI, 1.0, &up).unwrap();
        let down = rep.basis_state(-0.5).unwrap();
        assert!((out.overlap(&down).unwrap().norm() - 1.0).abs() < 1e-14);
        assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_hermitian_generator() {
        let rep = LineRep::new(4, 1.0).unwrap();
        let a = rep.lowering();
        assert!(matches!(
            apply_unitary(&a, 0.3, 1.0, &rep.vacuum()),
            Err(EqError::InvalidArgument(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn unitary_preserves_norm_and_composes(t1 in -3.0f64..3.0, t2 in -3.0f64..3.0, twice in 1u32..9) {
            let rep = SpinRep::new(twice as f64 / 2.0, 1.0).unwrap();
            let psi = apply_unitary(rep.s1(), 0.4, 1.0, &rep.highest_weight()).unwrap();
            let a = apply_unitary(rep.s2(), t1, 1.0, &psi).unwrap();
            prop_assert!((a.norm() - 1.0).abs() < 1e-10);
            let ab = apply_unitary(rep.s2(), t2, 1.0, &a).unwrap();
            let direct = apply_unitary(rep.s2(), t1 + t2, 1.0, &psi).unwrap();
            prop_assert!((ab.amplitudes() - direct.amplitudes()).norm() < 1e-10);
        }
    }
}
