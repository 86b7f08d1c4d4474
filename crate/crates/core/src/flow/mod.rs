//! Time-dependent vector fields, their flows with Jacobians, pushforwards, the generator
//! of a composition and the flow decomposition.

mod decompose;
mod family;
mod integrate;
mod pushforward;

pub use decompose::{decompose_flow, decompose_flow_with, DecomposeOptions, FlowDecomposition};
pub use family::{
    chebyshev_nodes, Combine, SampledFamily, ScalarFamily, TimeDepVectorField, DEFAULT_SAMPLES, SYMPLECTIC_TOL,
};
pub use integrate::{
    canonical_omega, integrate_flow, integrate_flow_with, symplectic_matrix_defect, wrap_point, FlowMap,
    FlowOptions,
};
pub use pushforward::{compose_generator, phase_grid, pushforward_vf, Direction};
