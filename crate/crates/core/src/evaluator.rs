//! The interpolant `f^r = (f1^r, f2^r)` of every vertex as a fixed point of
//! the Read–Bajraktarević operator
//!
//! ```text
//! (T f)^r(xi) = F_n(L_n^{-1}(xi), f^s(L_n^{-1}(xi)))     xi in subinterval n of r
//! ```
//!
//! where `s` is the source vertex of subinterval `n`. Functions are stored as
//! samples on a fixed grid with `density` uniform points per subinterval (so
//! every knot is a grid point) and read between samples by linear
//! interpolation. Distances between iterates use the sup norm with the max
//! norm on `(f1, f2)`.
//!
//! The second component of `F` ignores `y`, so `f2` is a fixed point on its
//! own. [`solve_fixed_point`] stops updating `f2` the first time its change
//! drops below the tolerance; the returned `f2` is then a function of the
//! `z` data and `gamma` alone.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::model::{AffineMap3, GDIFSystem};

/// Grid points per subinterval used when nothing else is asked for.
pub const DEFAULT_GRID_DENSITY: usize = 64;

/// Tail length used for the empirical convergence ratio.
const RATIO_WINDOW: usize = 5;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("grid density must be at least 2, got {0}")]
    InvalidGridDensity(usize),
    #[error("tolerance must be positive")]
    InvalidTolerance,
    #[error("expected one sampled function per vertex ({expected}), got {found}")]
    VertexMismatch { expected: usize, found: usize },
    #[error("vertex {vertex}, map {map}: preimage {x} lies outside the source interval")]
    PreimageOutOfRange { vertex: usize, map: usize, x: f64 },
    #[error("{x} is outside [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("no convergence after {} iterations", .report.iterations)]
    NoConvergence { report: Box<FixedPointReport> },
}

/// Samples of `(f1, f2)` on one vertex's grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub vertex: usize,
    /// Points per subinterval; knot `n` sits at grid index `n * density`.
    pub density: usize,
    pub grid: Vec<f64>,
    pub values: Vec<[f64; 2]>,
}

/// Grid of `vertex` with `density` uniform points per subinterval.
pub fn vertex_grid(system: &GDIFSystem, vertex: usize, density: usize) -> Vec<f64> {
    let pts = system.dataset(vertex).points();
    let mut grid = Vec::with_capacity((pts.len() - 1) * density + 1);
    for w in pts.windows(2) {
        let (l, r) = (w[0].x, w[1].x);
        grid.push(l);
        for k in 1..density {
            grid.push(l + (r - l) * (k as f64 / density as f64));
        }
    }
    grid.push(pts[pts.len() - 1].x);
    grid
}

impl SampledFunction {
    /// The straight line joining the first and last data values of `vertex`.
    pub fn straight_line(system: &GDIFSystem, vertex: usize, density: usize) -> Self {
        let ds = system.dataset(vertex);
        let (p0, pn) = (ds.first(), ds.last());
        let grid = vertex_grid(system, vertex, density);
        let values = grid
            .iter()
            .map(|&x| {
                let t = (x - p0.x) / (pn.x - p0.x);
                [p0.y + t * (pn.y - p0.y), p0.z + t * (pn.z - p0.z)]
            })
            .collect();
        Self {
            vertex,
            density,
            grid,
            values,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    /// Piecewise-linear value at `x`; stored values are returned exactly at
    /// grid points.
    pub fn evaluate_at(&self, x: f64) -> Result<(f64, f64), EvalError> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(EvalError::OutOfDomain { x, lo, hi });
        }
        let [f1, f2] = self.interpolate(x);
        Ok((f1, f2))
    }

    /// Interpolates at `x`, clamped into the domain.
    fn interpolate(&self, x: f64) -> [f64; 2] {
        let i = self.grid.partition_point(|&v| v <= x);
        self.interpolate_at(x, i)
    }

    /// Interpolates at `x` with a search starting at `cursor`, for
    /// nondecreasing query sequences.
    fn interpolate_from(&self, x: f64, cursor: &mut usize) -> [f64; 2] {
        let g = &self.grid;
        let mut i = (*cursor).min(g.len());
        if i > 0 && g[i - 1] > x {
            i = g.partition_point(|&v| v <= x);
        } else {
            while i < g.len() && g[i] <= x {
                i += 1;
            }
        }
        *cursor = i;
        self.interpolate_at(x, i)
    }

    /// `i` is the number of grid points `<= x`.
    fn interpolate_at(&self, x: f64, i: usize) -> [f64; 2] {
        let g = &self.grid;
        if i == 0 {
            return self.values[0];
        }
        if i == g.len() {
            return self.values[g.len() - 1];
        }
        let (x0, x1) = (g[i - 1], g[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        if x == x0 {
            return v0;
        }
        let t = (x - x0) / (x1 - x0);
        [v0[0] + t * (v1[0] - v0[0]), v0[1] + t * (v1[1] - v0[1])]
    }

    /// Sup-norm distance per component.
    pub fn component_distance(&self, other: &SampledFunction) -> (f64, f64) {
        self.values
            .iter()
            .zip(&other.values)
            .fold((0.0f64, 0.0f64), |(d1, d2), (a, b)| {
                (d1.max((a[0] - b[0]).abs()), d2.max((a[1] - b[1]).abs()))
            })
    }

    pub fn f1(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|v| v[0])
    }

    pub fn f2(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|v| v[1])
    }
}

fn check_functions(system: &GDIFSystem, current: &[SampledFunction]) -> Result<(), EvalError> {
    if current.len() != system.vertex_count() {
        return Err(EvalError::VertexMismatch {
            expected: system.vertex_count(),
            found: current.len(),
        });
    }
    Ok(())
}

/// One application of `T` to every vertex's samples.
pub fn apply_t(
    system: &GDIFSystem,
    current: &[SampledFunction],
) -> Result<Vec<SampledFunction>, EvalError> {
    check_functions(system, current)?;
    let mut out = Vec::with_capacity(current.len());
    for (r, cur) in current.iter().enumerate() {
        let maps = system.maps(r);
        let density = cur.density;
        let mut values = Vec::with_capacity(cur.grid.len());
        let mut cursor = 0usize;
        for (j, &xi) in cur.grid.iter().enumerate() {
            let n = (j / density).min(maps.len() - 1);
            if j % density == 0 && j / density < maps.len() {
                cursor = 0;
            }
            let m = &maps[n];
            let src = &current[m.source];
            let (lo, hi) = src.domain();
            let x = m.preimage(xi);
            let slack = 1e-9 * (hi - lo);
            if !(x >= lo - slack && x <= hi + slack) {
                return Err(EvalError::PreimageOutOfRange {
                    vertex: r,
                    map: n,
                    x,
                });
            }
            let x = x.clamp(lo, hi);
            let [f1, f2] = src.interpolate_from(x, &mut cursor);
            let (y, z) = m.map_yz(x, f1, f2);
            values.push([y, z]);
        }
        // endpoints are pinned to the data
        let ds = system.dataset(r);
        values[0] = [ds.first().y, ds.first().z];
        let last = values.len() - 1;
        values[last] = [ds.last().y, ds.last().z];
        out.push(SampledFunction {
            vertex: r,
            density,
            grid: cur.grid.clone(),
            values,
        });
    }
    Ok(out)
}

/// Convergence record of [`solve_fixed_point`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FixedPointReport {
    /// Number of applications of `T`.
    pub iterations: usize,
    /// Sup-norm change produced by each application.
    pub changes: Vec<f64>,
    /// Iteration after which `f2` was held fixed, if it converged.
    pub f2_frozen_at: Option<usize>,
    /// `max over maps of max(|alpha|, |beta|, |gamma|)`.
    pub apriori_delta: f64,
    /// `max over maps of max(|alpha| + |beta|, |gamma|)`.
    pub conservative_factor: f64,
}

impl FixedPointReport {
    /// Geometric-mean ratio of successive changes over the last few
    /// iterations with a nonzero change.
    pub fn empirical_ratio(&self) -> Option<f64> {
        let nz: Vec<f64> = self.changes.iter().copied().filter(|&c| c > 0.0).collect();
        if nz.len() < 2 {
            return None;
        }
        let w = RATIO_WINDOW.min(nz.len() - 1);
        let (first, last) = (nz[nz.len() - 1 - w], nz[nz.len() - 1]);
        Some(libm::pow(last / first, 1.0 / w as f64))
    }

    pub fn final_change(&self) -> f64 {
        self.changes.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// A converged set of sampled functions plus how they were reached.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoint {
    pub functions: Vec<SampledFunction>,
    pub report: FixedPointReport,
}

/// Iterates `T` from the straight-line functions until the sup-norm change
/// drops below `tol`.
pub fn solve_fixed_point(
    system: &GDIFSystem,
    density: usize,
    tol: f64,
    max_iters: usize,
) -> Result<FixedPoint, EvalError> {
    if density < 2 {
        return Err(EvalError::InvalidGridDensity(density));
    }
    if !(tol > 0.0) {
        return Err(EvalError::InvalidTolerance);
    }
    let mut current: Vec<SampledFunction> = (0..system.vertex_count())
        .map(|r| SampledFunction::straight_line(system, r, density))
        .collect();
    let mut report = FixedPointReport {
        apriori_delta: system.apriori_delta(),
        conservative_factor: system.conservative_factor(),
        ..Default::default()
    };
    for it in 1..=max_iters {
        let mut next = apply_t(system, &current)?;
        let (mut d1, mut d2) = (0.0f64, 0.0f64);
        for (a, b) in next.iter_mut().zip(&current) {
            if report.f2_frozen_at.is_some() {
                for (va, vb) in a.values.iter_mut().zip(&b.values) {
                    va[1] = vb[1];
                }
            }
            let (c1, c2) = a.component_distance(b);
            d1 = d1.max(c1);
            d2 = d2.max(c2);
        }
        if report.f2_frozen_at.is_none() && d2 < tol {
            report.f2_frozen_at = Some(it);
        }
        let change = d1.max(d2);
        report.iterations = it;
        report.changes.push(change);
        current = next;
        if change < tol {
            return Ok(FixedPoint {
                functions: current,
                report,
            });
        }
    }
    Err(EvalError::NoConvergence {
        report: Box::new(report),
    })
}

/// Largest defect `|f(L(x)) - F(x, f_source(x))|` over every map, both
/// components. Probes are the target grid points of each map's subinterval,
/// pulled back through `L`.
pub fn functional_residual(
    system: &GDIFSystem,
    functions: &[SampledFunction],
) -> Result<f64, EvalError> {
    functional_residual_refined(system, functions, 1)
}

/// [`functional_residual`] with `refinement - 1` extra probes between
/// consecutive target grid points. Off-grid probes add the linear
/// interpolation error of the samples.
pub fn functional_residual_refined(
    system: &GDIFSystem,
    functions: &[SampledFunction],
    refinement: usize,
) -> Result<f64, EvalError> {
    check_functions(system, functions)?;
    let refinement = refinement.max(1);
    let mut worst = 0.0f64;
    for m in system.all_maps() {
        let src = &functions[m.source];
        let tgt = &functions[m.target];
        let start = m.subinterval * tgt.density;
        let cells = &tgt.grid[start..=start + tgt.density];
        for w in cells.windows(2) {
            for k in 0..refinement {
                let xi = w[0] + (w[1] - w[0]) * (k as f64 / refinement as f64);
                worst = worst.max(defect(m, src, tgt, xi));
            }
        }
        worst = worst.max(defect(m, src, tgt, cells[cells.len() - 1]));
    }
    Ok(worst)
}

fn defect(m: &AffineMap3, src: &SampledFunction, tgt: &SampledFunction, xi: f64) -> f64 {
    let (lo, hi) = src.domain();
    let x = m.preimage(xi).clamp(lo, hi);
    let [s1, s2] = src.interpolate(x);
    let (y, z) = m.map_yz(x, s1, s2);
    let [t1, t2] = tgt.interpolate(xi);
    (t1 - y).abs().max((t2 - z).abs())
}

/// Largest `|f(x_n) - (y_n, z_n)|` over the knots of one vertex, per component.
pub fn knot_error(system: &GDIFSystem, f: &SampledFunction) -> (f64, f64) {
    system.dataset(f.vertex).points().iter().enumerate().fold(
        (0.0f64, 0.0f64),
        |(e1, e2), (n, p)| {
            let v = f.values[n * f.density];
            (e1.max((v[0] - p.y).abs()), e2.max((v[1] - p.z).abs()))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_dataset, validate_graph, Scaling, ScalingParams};
    use crate::solver::build_system;
    use crate::Point3;
    use alloc::vec;

    fn example1(s: Scaling) -> GDIFSystem {
        let p = |v: &[(f64, f64)]| {
            v.iter()
                .map(|&(x, y)| Point3::new(x, y, y))
                .collect::<Vec<_>>()
        };
        let ds = vec![
            validate_dataset(
                0,
                p(&[(0., 5.), (1., 4.), (2., 1.), (3., 1.), (4., 4.), (5., 5.)]),
            )
            .unwrap(),
            validate_dataset(1, p(&[(0., 1.), (1., 2.), (2., 3.), (3., 2.), (4., 1.)])).unwrap(),
        ];
        let g = validate_graph(vec![vec![0, 0, 0, 1, 1], vec![0, 1, 1, 1]], &ds).unwrap();
        let params = ScalingParams::uniform(&g, s).unwrap();
        build_system(ds, g, &params).unwrap()
    }

    #[test]
    fn grid_contains_knots() {
        let sys = example1(Scaling::uniform(0.3));
        let g = vertex_grid(&sys, 0, 8);
        assert_eq!(g.len(), 41);
        for n in 0..=5 {
            assert_eq!(g[n * 8], n as f64);
        }
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn one_step_interpolates_knots() {
        let sys = example1(Scaling::uniform(1.0 / 3.0));
        let init: Vec<_> = (0..2)
            .map(|r| SampledFunction::straight_line(&sys, r, 16))
            .collect();
        let next = apply_t(&sys, &init).unwrap();
        for f in &next {
            let (e1, e2) = knot_error(&sys, f);
            assert!(e1 < 1e-12 && e2 < 1e-12);
        }
    }

    #[test]
    fn zero_scaling_is_constant_operator() {
        let sys = example1(Scaling::default());
        let init: Vec<_> = (0..2)
            .map(|r| SampledFunction::straight_line(&sys, r, 8))
            .collect();
        let once = apply_t(&sys, &init).unwrap();
        let twice = apply_t(&sys, &once).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            let (d1, d2) = a.component_distance(b);
            assert!(d1 < 1e-12 && d2 < 1e-12);
        }
        let fp = solve_fixed_point(&sys, 8, 1e-10, 10).unwrap();
        assert!(fp.report.iterations <= 2);
        // the piecewise-linear interpolant of the data
        let (f1, f2) = fp.functions[0].evaluate_at(2.5).unwrap();
        assert!((f1 - 1.0).abs() < 1e-12 && (f2 - 1.0).abs() < 1e-12);
        let (f1, _) = fp.functions[1].evaluate_at(0.25).unwrap();
        assert!((f1 - 1.25).abs() < 1e-12);
    }

    #[test]
    fn evaluate_at_domain() {
        let sys = example1(Scaling::uniform(0.3));
        let fp = solve_fixed_point(&sys, 8, 1e-10, 200).unwrap();
        let f = &fp.functions[0];
        assert!(matches!(
            f.evaluate_at(-0.1),
            Err(EvalError::OutOfDomain { .. })
        ));
        assert!(matches!(
            f.evaluate_at(5.01),
            Err(EvalError::OutOfDomain { .. })
        ));
        assert_eq!(
            f.evaluate_at(f.grid[3]).unwrap(),
            (f.values[3][0], f.values[3][1])
        );
        let (y, z) = f.evaluate_at(2.0).unwrap();
        assert!((y - 1.0).abs() < 1e-9 && (z - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_function_between_grid_points() {
        let p = |v: &[f64]| {
            v.iter()
                .map(|&x| Point3::new(x, 2.0, -1.0))
                .collect::<Vec<_>>()
        };
        let ds = vec![validate_dataset(0, p(&[0.0, 0.3, 1.0])).unwrap()];
        let g = validate_graph(vec![vec![0, 0]], &ds).unwrap();
        let params = ScalingParams::uniform(&g, Scaling::new(0.5, 0.2, 0.4)).unwrap();
        let sys = build_system(ds, g, &params).unwrap();
        let fp = solve_fixed_point(&sys, 4, 1e-12, 100).unwrap();
        let (a, b) = fp.functions[0].evaluate_at(0.4321).unwrap();
        assert!((a - 2.0).abs() < 1e-12 && (b + 1.0).abs() < 1e-12);
    }

    #[test]
    fn argument_errors() {
        let sys = example1(Scaling::uniform(0.3));
        assert_eq!(
            solve_fixed_point(&sys, 1, 1e-6, 10),
            Err(EvalError::InvalidGridDensity(1))
        );
        assert_eq!(
            solve_fixed_point(&sys, 4, 0.0, 10),
            Err(EvalError::InvalidTolerance)
        );
        assert!(matches!(
            solve_fixed_point(&sys, 4, 1e-12, 3),
            Err(EvalError::NoConvergence { .. })
        ));
        assert!(matches!(
            apply_t(&sys, &[]),
            Err(EvalError::VertexMismatch { .. })
        ));
    }

    #[test]
    fn corrupted_preimage_detected() {
        let sys = example1(Scaling::uniform(0.3));
        let mut fs: Vec<_> = (0..2)
            .map(|r| SampledFunction::straight_line(&sys, r, 4))
            .collect();
        // a grid that extends past the data interval forces preimages outside
        let last = fs[0].grid.len() - 1;
        fs[0].grid[last] = 9.0;
        assert!(matches!(
            apply_t(&sys, &fs),
            Err(EvalError::PreimageOutOfRange { .. })
        ));
    }

    #[test]
    fn residual_flags_perturbation() {
        let sys = example1(Scaling::uniform(1.0 / 3.0));
        let fp = solve_fixed_point(&sys, 16, 1e-10, 200).unwrap();
        let clean = functional_residual(&sys, &fp.functions).unwrap();
        assert!(clean < 1e-8, "{clean}");
        let mut bad = fp.functions.clone();
        bad[0].values[2 * 16][0] += 1.0;
        assert!(functional_residual(&sys, &bad).unwrap() >= 0.3);
    }
}
