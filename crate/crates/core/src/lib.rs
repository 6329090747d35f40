//! Exceptional toric systems on toric surfaces and their degenerations.

pub mod basis;
pub mod compat;
pub mod degen;
pub mod error;
pub mod lattice;
pub mod matrix;
pub mod noncomm;
pub mod surface;
pub mod system;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{Rat, Subdivision, Vec2};
pub use surface::{Blowup, Cohomology, DivisorClass, ToricSurface};
pub use system::{ToricSystem, Certificate, HirzebruchVariant};
