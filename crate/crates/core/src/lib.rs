//! Entropy-stable DGSEM for the 2D compressible Euler equations with
//! convex subcell finite-volume blending and an a-posteriori positivity
//! limiter on the blending coefficient.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

// NaN must fail these comparisons, and index loops read closer to the
// matrix notation of the kernels.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod field;
pub mod flux;
pub mod indicator;
pub mod lgl;
pub mod limiter;
pub mod physics;
pub mod real;
pub mod spatial;
pub mod timestep;

pub use config::{Experiment, RawConfig, RunConfig};
pub use error::{Error, Floor, NodeLocation, Result};
pub use field::{Mesh2D, NodalField};
pub use flux::FluxKind;
pub use indicator::{BlendField, IndicatorSettings};
pub use limiter::{LimiterSettings, StageContext};
pub use physics::{Axis, ConservativeState, GasModel, Primitive};
pub use real::Real;
pub use spatial::{Discretization, RhsField, VolumeForm};
pub use timestep::{RkScheme, TimeIntegrator};

pub type Operators = lgl::ElementOperators<f64>;
pub type Mesh = field::Mesh2D<f64>;
pub type Solution = field::SolutionField<f64>;
pub type State = physics::ConservativeState<f64>;
pub type Gas = physics::GasModel<f64>;
pub type Blend = indicator::BlendField<f64>;
pub type Solver = driver::Simulation<f64>;
