//! Concrete systems: the Saint-Venant canal, its linearization on a loop,
//! and the quasilinear wave equation.

pub mod canal_observe;
pub mod linear_loop;
pub mod quadrature;
pub mod saint_venant;
pub mod wave;
pub mod wave_control;

use crate::system::{DiagonalSystem, NonlocalBC, PhysicalChart};

/// A diagonal system together with its boundary conditions and the chart
/// back to physical unknowns.
#[derive(Debug, Clone)]
pub struct Application {
    pub system: DiagonalSystem,
    pub bc: NonlocalBC,
    pub chart: PhysicalChart,
}
