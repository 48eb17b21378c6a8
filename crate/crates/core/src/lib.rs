//! Graph-directed coalescence hidden-variable fractal interpolation.
//!
//! Given one generalized data set `{(x_n, y_n, z_n)}` per vertex of a directed
//! graph, and a source vertex for every subinterval, this crate builds the
//! affine maps
//!
//! ```text
//! w(x, y, z) = (a x + b,  c x + alpha y + beta z + d,  e x + gamma z + f)
//! ```
//!
//! that send each source vertex's whole data range onto one subinterval of
//! the target vertex, then computes the invariant list of the resulting
//! graph-directed IFS two ways:
//!
//! * as point sets, through the Hutchinson operator ([`attractor`]) or a
//!   chaos game, and
//! * as vector-valued functions `f = (f1, f2)` sampled on a grid, through the
//!   Read–Bajraktarević operator ([`evaluator`]).
//!
//! The projection of each attractor onto `(x, y)` is the graph of `f1`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(clippy::std_instead_of_alloc)]
#![warn(clippy::std_instead_of_core)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod attractor;
pub mod evaluator;
pub mod model;
mod point;
pub mod solver;

pub use point::Point3;
