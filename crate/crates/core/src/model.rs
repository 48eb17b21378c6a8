//! Domain types and validation.
//!
//! Vertices are numbered `0..vertex_count`. Subinterval `n` of a vertex is
//! `[x_n, x_{n+1}]` of its data set, also zero-based. Every value in this
//! module is immutable once it has been validated.

use alloc::vec::Vec;
use core::fmt;

use crate::Point3;

/// Default absolute tolerance for the endpoint join-up conditions.
pub const JOIN_UP_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("abscissa at index {index} is not strictly greater than its predecessor")]
    NonIncreasingAbscissa { index: usize },
    #[error("a data set needs at least 3 points, got {count}")]
    TooFewPoints { count: usize },
    #[error("non-finite coordinate at index {index}")]
    NonFiniteValue { index: usize },
    #[error("data set at position {position} is labelled vertex {vertex}")]
    VertexOrder { position: usize, vertex: usize },
    #[error("expected {expected} vertices, got {found}")]
    VertexCountMismatch { expected: usize, found: usize },
    #[error("vertex {vertex}: expected {expected} entries (one per subinterval), got {found}")]
    AssignmentLengthMismatch {
        vertex: usize,
        expected: usize,
        found: usize,
    },
    #[error("vertex {vertex}, subinterval {subinterval}: unknown source vertex {source_vertex}")]
    UnknownVertex {
        vertex: usize,
        subinterval: usize,
        source_vertex: usize,
    },
    #[error(
        "vertex {vertex}, subinterval {subinterval} (source {source_vertex}): length ratio {ratio} is not below 1"
    )]
    HorizontalExpansion {
        vertex: usize,
        subinterval: usize,
        source_vertex: usize,
        ratio: f64,
    },
    #[error("vertex {vertex}, map {map}: {violation}")]
    InvalidScaling {
        vertex: usize,
        map: usize,
        violation: ScalingViolation,
    },
    #[error("vertex {vertex}, map {map}: join-up residual {residual:e} exceeds {tolerance:e}")]
    JoinUpViolation {
        vertex: usize,
        map: usize,
        residual: f64,
        tolerance: f64,
    },
    #[error("vertex {vertex}, map {map}: map labels do not match its position")]
    MapLabelMismatch { vertex: usize, map: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalingViolation {
    NonFinite,
    Alpha(f64),
    Gamma(f64),
    BetaGamma(f64),
}

impl fmt::Display for ScalingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonFinite => f.write_str("scaling parameters must be finite"),
            Self::Alpha(v) => write!(f, "|alpha| = {v} must be below 1"),
            Self::Gamma(v) => write!(f, "|gamma| = {v} must be below 1"),
            Self::BetaGamma(v) => write!(f, "|beta| + |gamma| = {v} must be below 1"),
        }
    }
}

/// One vertex's interpolation data `{(x_n, y_n, z_n) : n = 0..=N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedDataset {
    vertex: usize,
    points: Vec<Point3>,
}

/// Checks the data set invariants: finite coordinates, strictly increasing
/// abscissas, at least three points.
pub fn validate_dataset(
    vertex: usize,
    points: Vec<Point3>,
) -> Result<GeneralizedDataset, ModelError> {
    if let Some(index) = points.iter().position(|p| !p.is_finite()) {
        return Err(ModelError::NonFiniteValue { index });
    }
    if let Some(index) = (1..points.len()).find(|&i| points[i].x <= points[i - 1].x) {
        return Err(ModelError::NonIncreasingAbscissa { index });
    }
    if points.len() < 3 {
        return Err(ModelError::TooFewPoints {
            count: points.len(),
        });
    }
    Ok(GeneralizedDataset { vertex, points })
}

impl GeneralizedDataset {
    pub fn vertex(&self) -> usize {
        self.vertex
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn point(&self, n: usize) -> Point3 {
        self.points[n]
    }

    pub fn first(&self) -> Point3 {
        self.points[0]
    }

    pub fn last(&self) -> Point3 {
        self.points[self.points.len() - 1]
    }

    /// Number of subintervals `N` (one less than the number of points).
    pub fn subinterval_count(&self) -> usize {
        self.points.len() - 1
    }

    /// The closed interval `[x_0, x_N]`.
    pub fn interval(&self) -> (f64, f64) {
        (self.first().x, self.last().x)
    }

    pub fn interval_length(&self) -> f64 {
        self.last().x - self.first().x
    }

    /// Data at the two ends of subinterval `n`.
    pub fn subinterval_ends(&self, n: usize) -> Endpoints {
        Endpoints {
            left: self.points[n],
            right: self.points[n + 1],
        }
    }

    /// Data at the two ends of the whole interval.
    pub fn interval_ends(&self) -> Endpoints {
        Endpoints {
            left: self.first(),
            right: self.last(),
        }
    }
}

/// A pair of data triples at the left and right end of an interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Endpoints {
    pub left: Point3,
    pub right: Point3,
}

/// Source vertex of every subinterval of every vertex.
///
/// Subinterval `n` of vertex `r` is the image of the whole interval of vertex
/// `source(r, n)`. `K^{rs}` is the number of subintervals of `r` sourced from
/// `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSpec {
    assignment: Vec<Vec<usize>>,
}

/// Checks an assignment against the data sets it refers to.
///
/// `datasets[i]` must be the data set of vertex `i`.
pub fn validate_graph(
    assignment: Vec<Vec<usize>>,
    datasets: &[GeneralizedDataset],
) -> Result<GraphSpec, ModelError> {
    for (position, ds) in datasets.iter().enumerate() {
        if ds.vertex() != position {
            return Err(ModelError::VertexOrder {
                position,
                vertex: ds.vertex(),
            });
        }
    }
    if assignment.len() != datasets.len() {
        return Err(ModelError::VertexCountMismatch {
            expected: datasets.len(),
            found: assignment.len(),
        });
    }
    let vertex_count = datasets.len();
    for (vertex, (sources, ds)) in assignment.iter().zip(datasets).enumerate() {
        if sources.len() != ds.subinterval_count() {
            return Err(ModelError::AssignmentLengthMismatch {
                vertex,
                expected: ds.subinterval_count(),
                found: sources.len(),
            });
        }
        if let Some(subinterval) = sources.iter().position(|&s| s >= vertex_count) {
            return Err(ModelError::UnknownVertex {
                vertex,
                subinterval,
                source_vertex: sources[subinterval],
            });
        }
    }
    Ok(GraphSpec { assignment })
}

impl GraphSpec {
    /// Assignment with contiguous blocks: row `r` of `counts` holds
    /// `K^{r0}, K^{r1}, ...` and the subintervals sourced from vertex 0 come
    /// first, then those from vertex 1, and so on.
    pub fn contiguous_assignment(counts: &[Vec<usize>]) -> Vec<Vec<usize>> {
        counts
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .flat_map(|(s, &k)| core::iter::repeat_n(s, k))
                    .collect()
            })
            .collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn sources(&self, vertex: usize) -> &[usize] {
        &self.assignment[vertex]
    }

    pub fn source(&self, vertex: usize, subinterval: usize) -> usize {
        self.assignment[vertex][subinterval]
    }

    pub fn assignment(&self) -> &[Vec<usize>] {
        &self.assignment
    }

    /// `K^{rs}`.
    pub fn edge_count(&self, r: usize, s: usize) -> usize {
        self.assignment[r].iter().filter(|&&src| src == s).count()
    }

    /// The full `K` matrix, row `r` holding `K^{r0}, K^{r1}, ...`.
    pub fn edge_counts(&self) -> Vec<Vec<usize>> {
        let v = self.vertex_count();
        (0..v)
            .map(|r| (0..v).map(|s| self.edge_count(r, s)).collect())
            .collect()
    }

    pub fn map_count(&self) -> usize {
        self.assignment.iter().map(Vec::len).sum()
    }
}

/// Which subinterval/source pairs the horizontal contraction check covers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HorizontalScope {
    /// Only the pairs that carry a map.
    #[default]
    UsedEdges,
    /// Every subinterval against every vertex interval.
    AllPairs,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizontalRatio {
    pub vertex: usize,
    pub subinterval: usize,
    pub source: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HorizontalReport {
    pub ratios: Vec<HorizontalRatio>,
}

impl HorizontalReport {
    pub fn passes(&self) -> bool {
        self.ratios.iter().all(|r| r.ratio < 1.0)
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn first_violation(&self) -> Option<&HorizontalRatio> {
        self.ratios.iter().find(|r| r.ratio >= 1.0)
    }
}

/// Subinterval length over source interval length for every pair in `scope`.
pub fn horizontal_ratios(
    datasets: &[GeneralizedDataset],
    graph: &GraphSpec,
    scope: HorizontalScope,
) -> HorizontalReport {
    let mut ratios = Vec::new();
    for (vertex, ds) in datasets.iter().enumerate() {
        for subinterval in 0..ds.subinterval_count() {
            let len = ds.point(subinterval + 1).x - ds.point(subinterval).x;
            let mut push = |source: usize| {
                ratios.push(HorizontalRatio {
                    vertex,
                    subinterval,
                    source,
                    ratio: len / datasets[source].interval_length(),
                })
            };
            match scope {
                HorizontalScope::UsedEdges => push(graph.source(vertex, subinterval)),
                HorizontalScope::AllPairs => (0..datasets.len()).for_each(push),
            }
        }
    }
    HorizontalReport { ratios }
}

/// Like [`horizontal_ratios`], failing on the first ratio that is not below 1.
pub fn check_horizontal_contraction(
    datasets: &[GeneralizedDataset],
    graph: &GraphSpec,
    scope: HorizontalScope,
) -> Result<HorizontalReport, ModelError> {
    let report = horizontal_ratios(datasets, graph, scope);
    match report.first_violation() {
        Some(v) => Err(ModelError::HorizontalExpansion {
            vertex: v.vertex,
            subinterval: v.subinterval,
            source_vertex: v.source,
            ratio: v.ratio,
        }),
        None => Ok(report),
    }
}

/// Vertical scaling of one map: free variables `alpha`, `gamma` and the
/// constrained coupling `beta`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Scaling {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Scaling {
    pub const fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub const fn uniform(v: f64) -> Self {
        Self::new(v, v, v)
    }

    /// `|alpha| < 1`, `|gamma| < 1` and `|beta| + |gamma| < 1`.
    pub fn check(&self) -> Result<(), ScalingViolation> {
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()) {
            return Err(ScalingViolation::NonFinite);
        }
        if self.alpha.abs() >= 1.0 {
            return Err(ScalingViolation::Alpha(self.alpha.abs()));
        }
        if self.gamma.abs() >= 1.0 {
            return Err(ScalingViolation::Gamma(self.gamma.abs()));
        }
        let bg = self.beta.abs() + self.gamma.abs();
        if bg >= 1.0 {
            return Err(ScalingViolation::BetaGamma(bg));
        }
        Ok(())
    }
}

/// Scaling of every map, indexed `[vertex][subinterval]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingParams {
    maps: Vec<Vec<Scaling>>,
}

/// Checks parameter shape against the graph and every scaling constraint.
pub fn validate_params(
    maps: Vec<Vec<Scaling>>,
    graph: &GraphSpec,
) -> Result<ScalingParams, ModelError> {
    if maps.len() != graph.vertex_count() {
        return Err(ModelError::VertexCountMismatch {
            expected: graph.vertex_count(),
            found: maps.len(),
        });
    }
    for (vertex, row) in maps.iter().enumerate() {
        let expected = graph.sources(vertex).len();
        if row.len() != expected {
            return Err(ModelError::AssignmentLengthMismatch {
                vertex,
                expected,
                found: row.len(),
            });
        }
        for (map, s) in row.iter().enumerate() {
            s.check().map_err(|violation| ModelError::InvalidScaling {
                vertex,
                map,
                violation,
            })?;
        }
    }
    Ok(ScalingParams { maps })
}

impl ScalingParams {
    /// The same scaling for every map of `graph`.
    pub fn uniform(graph: &GraphSpec, scaling: Scaling) -> Result<Self, ModelError> {
        let maps = graph
            .assignment()
            .iter()
            .map(|row| alloc::vec![scaling; row.len()])
            .collect();
        validate_params(maps, graph)
    }

    pub fn get(&self, vertex: usize, subinterval: usize) -> Scaling {
        self.maps[vertex][subinterval]
    }

    pub fn rows(&self) -> &[Vec<Scaling>] {
        &self.maps
    }
}

/// The six affine coefficients of `w(x,y,z) = (ax+b, cx+αy+βz+d, ex+γz+f)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Coefficients {
    pub fn to_array(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }
}

/// One contraction of the graph-directed system, mapping the data range of
/// `source` onto subinterval `subinterval` of `target`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap3 {
    pub coeffs: Coefficients,
    pub scaling: Scaling,
    pub source: usize,
    pub target: usize,
    pub subinterval: usize,
}

impl AffineMap3 {
    #[inline]
    pub fn map_x(&self, x: f64) -> f64 {
        self.coeffs.a * x + self.coeffs.b
    }

    /// The vertical part `F(x, y, z)`.
    #[inline]
    pub fn map_yz(&self, x: f64, y: f64, z: f64) -> (f64, f64) {
        let Coefficients { c, d, e, f, .. } = self.coeffs;
        let Scaling { alpha, beta, gamma } = self.scaling;
        (c * x + alpha * y + beta * z + d, e * x + gamma * z + f)
    }

    #[inline]
    pub fn apply(&self, p: Point3) -> Point3 {
        let (y, z) = self.map_yz(p.x, p.y, p.z);
        Point3::new(self.map_x(p.x), y, z)
    }

    /// `L^{-1}(xi)` from the stored `a`, `b`.
    #[inline]
    pub fn preimage(&self, xi: f64) -> f64 {
        (xi - self.coeffs.b) / self.coeffs.a
    }

    /// Largest coordinate error of the two endpoint conditions.
    pub fn join_up_residual(&self, source: &Endpoints, target: &Endpoints) -> f64 {
        let err = |p: Point3, q: Point3| {
            let w = self.apply(p);
            (w.x - q.x)
                .abs()
                .max((w.y - q.y).abs())
                .max((w.z - q.z).abs())
        };
        err(source.left, target.left).max(err(source.right, target.right))
    }
}

/// A complete graph-directed system: data, graph and one map per subinterval.
#[derive(Clone, Debug, PartialEq)]
pub struct GDIFSystem {
    datasets: Vec<GeneralizedDataset>,
    graph: GraphSpec,
    maps: Vec<Vec<AffineMap3>>,
}

impl GDIFSystem {
    /// Assembles a system, checking map labels, scaling constraints and the
    /// join-up conditions to within `tolerance`.
    pub fn new(
        datasets: Vec<GeneralizedDataset>,
        graph: GraphSpec,
        maps: Vec<Vec<AffineMap3>>,
        tolerance: f64,
    ) -> Result<Self, ModelError> {
        if maps.len() != datasets.len() || graph.vertex_count() != datasets.len() {
            return Err(ModelError::VertexCountMismatch {
                expected: datasets.len(),
                found: maps.len(),
            });
        }
        for (vertex, row) in maps.iter().enumerate() {
            let expected = datasets[vertex].subinterval_count();
            if row.len() != expected {
                return Err(ModelError::AssignmentLengthMismatch {
                    vertex,
                    expected,
                    found: row.len(),
                });
            }
            for (n, m) in row.iter().enumerate() {
                if m.target != vertex || m.subinterval != n || m.source != graph.source(vertex, n) {
                    return Err(ModelError::MapLabelMismatch { vertex, map: n });
                }
                m.scaling
                    .check()
                    .map_err(|violation| ModelError::InvalidScaling {
                        vertex,
                        map: n,
                        violation,
                    })?;
                let residual = m.join_up_residual(
                    &datasets[m.source].interval_ends(),
                    &datasets[vertex].subinterval_ends(n),
                );
                if !(residual <= tolerance) {
                    return Err(ModelError::JoinUpViolation {
                        vertex,
                        map: n,
                        residual,
                        tolerance,
                    });
                }
            }
        }
        Ok(Self {
            datasets,
            graph,
            maps,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.datasets.len()
    }

    pub fn datasets(&self) -> &[GeneralizedDataset] {
        &self.datasets
    }

    pub fn dataset(&self, vertex: usize) -> &GeneralizedDataset {
        &self.datasets[vertex]
    }

    pub fn graph(&self) -> &GraphSpec {
        &self.graph
    }

    /// Maps whose image lies in `vertex`'s interval, ordered by subinterval.
    pub fn maps(&self, vertex: usize) -> &[AffineMap3] {
        &self.maps[vertex]
    }

    pub fn all_maps(&self) -> impl Iterator<Item = &AffineMap3> {
        self.maps.iter().flatten()
    }

    pub fn map_count(&self) -> usize {
        self.maps.iter().map(Vec::len).sum()
    }

    /// Largest join-up residual over all maps.
    pub fn join_up_residual(&self) -> f64 {
        self.all_maps()
            .map(|m| {
                m.join_up_residual(
                    &self.datasets[m.source].interval_ends(),
                    &self.datasets[m.target].subinterval_ends(m.subinterval),
                )
            })
            .fold(0.0, f64::max)
    }

    /// `max over maps of max(|alpha|, |beta|, |gamma|)`: the function-space
    /// contraction constant of the classical argument.
    pub fn apriori_delta(&self) -> f64 {
        self.all_maps()
            .map(|m| {
                let s = m.scaling;
                s.alpha.abs().max(s.beta.abs()).max(s.gamma.abs())
            })
            .fold(0.0, f64::max)
    }

    /// `max over maps of max(|alpha| + |beta|, |gamma|)`: the one-step
    /// Lipschitz constant of the function operator under the max norm on
    /// `(f1, f2)`.
    pub fn conservative_factor(&self) -> f64 {
        self.all_maps()
            .map(|m| {
                let s = m.scaling;
                (s.alpha.abs() + s.beta.abs()).max(s.gamma.abs())
            })
            .fold(0.0, f64::max)
    }
}
