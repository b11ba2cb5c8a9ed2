// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical calculus for graphs of prescribed mean curvature over model
//! Riemannian manifolds: capillary profiles, admissible parameters for the
//! `W e^{−Cu}` gradient estimate, a Newton solver for `div(Du/W) = H`, and
//! discrete checks of the structural identities satisfied by such graphs.

pub mod error;
pub mod fields;
pub mod geometry;
pub mod graph;
pub mod grid;
pub mod identities;
pub mod ode;
pub mod params;
pub mod profiles;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
