//! Restricted-action dynamics: Hamilton flows, label transforms, action values.

pub mod action;
pub mod flow;
pub mod trajectory;
pub mod transform;

pub use action::{
    action_stationarity, log_sweep, loop_integral, restricted_action_value, ActionValue,
    StationarityReport,
};
pub use flow::{hamiltonian_flow, hamiltonian_flow_with, FlowOptions, Method};
pub use trajectory::{Event, EventKind, PhasePoint, Sample, Termination, Trajectory};
pub use transform::{
    apply_transform, verify_transform_action, ActionCheck, CanonicalTransform, Jacobian, Relabel,
    TransformActionReport, TransformedHamiltonian,
};
