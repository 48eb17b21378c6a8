//! Invariant lists of the graph-directed system as finite point sets.
//!
//! The invariant list `{A^u}` satisfies
//!
//! ```text
//! A^u = union over subintervals n of u of  w_n(A^{source(u, n)})
//! ```
//!
//! [`hutchinson_step`] applies the right-hand side once. Repeated application
//! multiplies the point count by the number of maps, so after every step the
//! points of each vertex are bucketed on a grid whose cell is a fixed fraction
//! of the set's extent along each axis and one point per occupied cell is
//! kept (the lexicographically smallest, so the result does not depend on the
//! order in which points were produced).

mod chaos;
mod hausdorff;

use alloc::boxed::Box;
use alloc::vec::Vec;

pub use chaos::{chaos_game, MapSelection};
pub use hausdorff::{directed_hausdorff, hausdorff_brute_force, hausdorff_distance, EmptySet};

use crate::model::GDIFSystem;
use crate::Point3;

/// Default snapping cell, as a fraction of each axis' extent.
pub const DEFAULT_SNAP_FRACTION: f64 = 1.0 / (1u64 << 14) as f64;

/// Default cap on the number of points kept for one vertex.
pub const DEFAULT_MAX_POINTS: usize = 3_000_000;

/// Points produced before deduplication may exceed the cap by this factor.
const PRE_SNAP_FACTOR: usize = 8;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum AttractorError {
    #[error("expected one point set per vertex ({expected}), got {found}")]
    VertexMismatch { expected: usize, found: usize },
    #[error("point set for vertex {vertex} is empty")]
    EmptySet { vertex: usize },
    #[error("tolerance must be positive")]
    InvalidTolerance,
    #[error("vertex {vertex} exceeded the budget of {max_points} points")]
    PointBudgetExceeded { vertex: usize, max_points: usize },
    #[error("no convergence after {} iterations (last distance {:e})", .trace.distances.len(), .trace.last().unwrap_or(f64::NAN))]
    NoConvergence { trace: Box<ConvergenceTrace> },
}

/// A finite approximation of one vertex's attractor.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet3 {
    pub vertex: usize,
    pub points: Vec<Point3>,
}

impl PointSet3 {
    /// The interpolation data of every vertex, one set per vertex.
    pub fn knots(system: &GDIFSystem) -> Vec<PointSet3> {
        system
            .datasets()
            .iter()
            .enumerate()
            .map(|(vertex, d)| PointSet3 {
                vertex,
                points: d.points().to_vec(),
            })
            .collect()
    }

    /// `(x, y)` projection with `z` set to zero.
    pub fn project_xy(&self) -> PointSet3 {
        PointSet3 {
            vertex: self.vertex,
            points: self.points.iter().map(Point3::project_xy).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Point-count control for [`hutchinson_step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    /// Cell size as a fraction of the axis extent; `None` keeps every point.
    pub snap: Option<f64>,
    pub max_points: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            snap: Some(DEFAULT_SNAP_FRACTION),
            max_points: DEFAULT_MAX_POINTS,
        }
    }
}

/// One application of the graph-directed Hutchinson operator.
pub fn hutchinson_step(
    system: &GDIFSystem,
    sets: &[PointSet3],
    options: &StepOptions,
) -> Result<Vec<PointSet3>, AttractorError> {
    check_sets(system, sets)?;
    let mut out = Vec::with_capacity(sets.len());
    for u in 0..system.vertex_count() {
        let maps = system.maps(u);
        let total: usize = maps.iter().map(|m| sets[m.source].points.len()).sum();
        let cap = match options.snap {
            Some(_) => options.max_points.saturating_mul(PRE_SNAP_FACTOR),
            None => options.max_points,
        };
        if total > cap {
            return Err(AttractorError::PointBudgetExceeded {
                vertex: u,
                max_points: options.max_points,
            });
        }
        let mut points = Vec::with_capacity(total);
        for m in maps {
            points.extend(sets[m.source].points.iter().map(|&p| m.apply(p)));
        }
        if let Some(fraction) = options.snap {
            points = snap_dedup(points, fraction);
        }
        if points.len() > options.max_points {
            return Err(AttractorError::PointBudgetExceeded {
                vertex: u,
                max_points: options.max_points,
            });
        }
        out.push(PointSet3 { vertex: u, points });
    }
    Ok(out)
}

fn check_sets(system: &GDIFSystem, sets: &[PointSet3]) -> Result<(), AttractorError> {
    if sets.len() != system.vertex_count() {
        return Err(AttractorError::VertexMismatch {
            expected: system.vertex_count(),
            found: sets.len(),
        });
    }
    match sets.iter().position(PointSet3::is_empty) {
        Some(vertex) => Err(AttractorError::EmptySet { vertex }),
        None => Ok(()),
    }
}

fn snap_dedup(points: Vec<Point3>, fraction: f64) -> Vec<Point3> {
    if points.is_empty() {
        return points;
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in &points {
        lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    let cell = |extent: f64| {
        let c = extent * fraction;
        if c > 0.0 {
            c
        } else {
            1.0
        }
    };
    let (cx, cy, cz) = (cell(hi.x - lo.x), cell(hi.y - lo.y), cell(hi.z - lo.z));
    let key = |p: &Point3| {
        (
            libm::floor((p.x - lo.x) / cx) as i64,
            libm::floor((p.y - lo.y) / cy) as i64,
            libm::floor((p.z - lo.z) / cz) as i64,
        )
    };
    let mut keyed: Vec<((i64, i64, i64), Point3)> =
        points.into_iter().map(|p| (key(&p), p)).collect();
    keyed.sort_unstable_by(|(ka, a), (kb, b)| {
        ka.cmp(kb)
            .then(a.x.total_cmp(&b.x))
            .then(a.y.total_cmp(&b.y))
            .then(a.z.total_cmp(&b.z))
    });
    keyed.dedup_by(|(kb, _), (ka, _)| ka == kb);
    keyed.into_iter().map(|(_, p)| p).collect()
}

/// Successive-iterate distances of a fixed-point iteration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTrace {
    /// Hausdorff distance between iterates `k` and `k + 1`, maximised over
    /// vertices.
    pub distances: Vec<f64>,
}

impl ConvergenceTrace {
    pub fn last(&self) -> Option<f64> {
        self.distances.last().copied()
    }

    /// Geometric-mean ratio of successive distances over the last `window`
    /// steps, or `None` with fewer than two distances or a zero denominator.
    pub fn tail_ratio(&self, window: usize) -> Option<f64> {
        let n = self.distances.len();
        if n < 2 || window == 0 {
            return None;
        }
        let w = window.min(n - 1);
        let first = self.distances[n - 1 - w];
        let last = self.distances[n - 1];
        if first <= 0.0 {
            return None;
        }
        Some(libm::pow(last / first, 1.0 / w as f64))
    }

    /// Estimated contraction ratio over the last five steps.
    pub fn estimated_ratio(&self) -> Option<f64> {
        self.tail_ratio(5)
    }
}

/// Iterates [`hutchinson_step`] until the Hausdorff distance between
/// successive iterates drops below `tol` (per vertex, maximised).
pub fn iterate_to_tolerance(
    system: &GDIFSystem,
    initial: Vec<PointSet3>,
    tol: f64,
    max_iters: usize,
    options: &StepOptions,
) -> Result<(Vec<PointSet3>, ConvergenceTrace), AttractorError> {
    if !(tol > 0.0) {
        return Err(AttractorError::InvalidTolerance);
    }
    check_sets(system, &initial)?;
    let mut current = initial;
    let mut trace = ConvergenceTrace::default();
    for _ in 0..max_iters {
        let next = hutchinson_step(system, &current, options)?;
        let mut distance = 0.0f64;
        for (a, b) in current.iter().zip(&next) {
            let d = hausdorff_distance(&a.points, &b.points)
                .map_err(|_| AttractorError::EmptySet { vertex: a.vertex })?;
            distance = distance.max(d);
        }
        trace.distances.push(distance);
        current = next;
        if distance < tol {
            return Ok((current, trace));
        }
    }
    Err(AttractorError::NoConvergence {
        trace: Box::new(trace),
    })
}

/// A weighted-norm contraction bound for the maps of a system.
///
/// With `theta = 2 max|beta| / (1 - max|gamma|)` (or 1 when every `beta` is
/// zero) the vertical part of each map contracts the norm
/// `|y| + theta |z|` by at most `max(max|alpha|, (1 + max|gamma|) / 2)`, and
/// the horizontal part by `max|a|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractionCertificate {
    pub theta: f64,
    pub factor: f64,
}

pub fn contraction_certificate(system: &GDIFSystem) -> ContractionCertificate {
    let (mut alpha, mut beta, mut gamma, mut a) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for m in system.all_maps() {
        alpha = alpha.max(m.scaling.alpha.abs());
        beta = beta.max(m.scaling.beta.abs());
        gamma = gamma.max(m.scaling.gamma.abs());
        a = a.max(m.coeffs.a.abs());
    }
    let theta = if beta == 0.0 {
        1.0
    } else {
        2.0 * beta / (1.0 - gamma)
    };
    ContractionCertificate {
        theta,
        factor: alpha.max((1.0 + gamma) / 2.0).max(a),
    }
}
