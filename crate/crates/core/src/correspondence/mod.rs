//! Enhanced classical Hamiltonians and their `ħ → 0` limit.

pub mod enhance;
pub mod laurent;
pub mod limit;
pub mod poly;

pub use enhance::{
    apply_polynomial, enhance, expectation_direct, shift_identity_check, EnhancedHamiltonian,
    Hamiltonian, LabelDomain, Provenance, ShiftReport, ShiftSample,
};
pub use laurent::{LaurentPoly, Monomial};
pub use limit::{classical_limit, classical_limit_with_tol, ClassicalLimit};
pub use poly::{Letter, OperatorPolynomial, VariableSet, Word, DEFAULT_MAX_DEGREE};
