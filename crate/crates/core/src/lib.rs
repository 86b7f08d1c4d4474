//! Vertical averaging on angle-action charts `T^d x B` and its consequences: splitting
//! symplectic vector fields into a Hamiltonian part plus a fibration-preserving lift,
//! splitting families of symplectomorphisms, and the Hamiltonian normal form of
//! regular deformations of completely integrable systems.

pub mod averaging;
pub mod decomposition;
pub mod deformation;
pub mod error;
pub mod field;
pub mod flow;
pub mod periods;
pub mod random;
pub mod space;
mod stencil;
pub mod verify;

pub use error::{Error, Result};
pub use field::{OneForm, ScalarField, VectorField};
pub use space::{ActionBox, TorusBox};
