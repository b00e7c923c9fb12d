//! Concrete Hamiltonians: oscillator, classical and enhanced hydrogen, spin precession.

pub mod hydrogen;
pub mod oscillator;
pub mod spin;

pub use hydrogen::{
    effective_potential, hydrogen_classical, hydrogen_enhanced, min_radius, HydrogenModel,
    HydrogenParams,
};
pub use oscillator::harmonic_oscillator;
pub use spin::{spin_precession, spin_precession_expectation};
