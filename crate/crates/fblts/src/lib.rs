//! A desk-scale shallow-water solver on doubly periodic TRiSK-style staggered
//! meshes, with a multirate (local time-stepping) integrator built on the
//! forward-backward Runge-Kutta scheme FB-RK(3,2).
//!
//! The crate is organized around the step structure of the multirate scheme:
//!
//! - [`mesh`]: periodic hexagonal mesh construction, file I/O, validation,
//!   and the tangential flux-mapping weights.
//! - [`operators`]: the discrete right-hand sides (thickness divergence,
//!   momentum gradient/rotational terms) and the vorticity diagnostic chain.
//! - [`steppers`]: global FB-RK(3,2) and classical RK4.
//! - [`lts`]: region labeling and the four-phase local time-stepping step
//!   (coarse advancement, interface prediction, fine advancement, interface
//!   correction).
//! - [`splitting`]: the fast/slow additive splitting with slow tendencies
//!   frozen at the start of each coarse step.
//! - [`diagnostics`]: conserved integrals, the prognostic companion field
//!   for absolute vorticity, RMS error, and work/speedup accounting.
//! - [`harness`]: scenario configs and the drivers behind the CLI
//!   (`run`, `converge`, `cfl-scan`, `conserve`, `perf`, `mesh`).
//!
//! See the `examples/` directory for one runnable program per capability.

// Positivity guards are written `!(x > 0.0)` on purpose: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops over mesh entities read better than iterator chains here.
#![allow(clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod lts;
pub mod mesh;
pub mod operators;
pub mod splitting;
pub mod steppers;

pub use error::Error;
pub use mesh::Mesh;
pub use operators::{PhysicsConfig, State, TendencyPair, WorkCounters};
pub use steppers::{FbWeights, StepContext};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
