//! Files, reports and figures for graph-directed hidden-variable fractal
//! interpolation, on top of `chfif-core`.
//!
//! - [`document`]: the TOML problem format.
//! - [`output`]: CSV and text tables.
//! - [`render`]: SVG panels.
//! - [`verify`]: the end-to-end verification report.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod document;
pub mod output;
pub mod render;
pub mod verify;

pub use document::{parse_problem, DocumentError, ProblemDocument};
pub use render::{render_svg, RenderError, RenderSettings};
pub use verify::{verify, Budgets, VerificationReport};

/// Problem files shipped with the crate.
pub mod bundled {
    /// Two vertices, `y = z` data and every scaling equal to 1/3.
    pub const UNIFORM: &str = include_str!("../problems/uniform.problem");
    /// Independent hidden variable with per-map scalings up to 0.99.
    pub const SLOW: &str = include_str!("../problems/slow.problem");
}
