//! Quasilinear hyperbolic systems on an interval with nonlocal boundary
//! conditions: simulation, constructive exact boundary control,
//! reconstruction of initial data from boundary observations, and
//! numerical witnesses of non-controllability for loop-coupled systems.

pub mod enlarge;
pub mod error;
pub mod field;
pub mod newton;
pub mod signal;
pub mod solver;
pub mod system;
pub mod applications;
pub mod control;
pub mod obstructions;
pub mod scenario;

pub use enlarge::{reflect_enlarge, LocalBC};
pub use error::{Error, Result};
pub use field::GridField;
pub use signal::{Profile, Signal, Trace};
pub use system::{
    check_compatibility, validate_system, BoundaryRule, CompatibilityReport, Controls, DiagonalSystem,
    NonlocalBC, PhysicalChart, ValidationReport,
};
