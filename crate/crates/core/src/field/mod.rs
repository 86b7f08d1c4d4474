//! Spectral fields on `T^d x B`: scalars, 1-forms and vector fields.

mod io;
mod ops;
mod scalar;
mod tensor;
pub(crate) mod transform;

pub use io::{FieldRecord, ModeRecord};
pub use ops::{
    closedness_defect, d_scalar, hamiltonian_vf, lie_bracket, omega_flat, omega_sharp, weinstein_nabla, VERTICAL_TOL,
};
pub(crate) use scalar::PointContext;
pub use scalar::{PointValue, ScalarField};
pub use tensor::{OneForm, VectorField, VectorPointValue};
