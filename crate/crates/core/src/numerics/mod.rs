//! Numerical building blocks shared by the physics modules.

pub mod quadrature;
pub mod rng;
pub mod root;

pub use quadrature::{integrate, integrate_with_breakpoints, QuadResult, QuadratureSpec};
pub use rng::{derive_seed, KeyedStreams};
pub use root::{bisect, bisect_log, Bracket};
