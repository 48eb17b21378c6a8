//! Map coefficients from the endpoint join-up conditions.
//!
//! A map sending the data range of a source vertex onto subinterval
//! `[x_{n}, x_{n+1}]` of a target vertex must satisfy
//!
//! ```text
//! w(x_0^s, y_0^s, z_0^s) = (x_n^r,     y_n^r,     z_n^r)
//! w(x_N^s, y_N^s, z_N^s) = (x_{n+1}^r, y_{n+1}^r, z_{n+1}^r)
//! ```
//!
//! which splits into three independent 2x2 systems for `(a, b)`, `(c, d)` and
//! `(e, f)` once the scaling is fixed. [`solve_map_closed_form`] evaluates
//! their explicit solution; [`solve_map_linear_oracle`] eliminates the
//! systems numerically and serves as a cross-check.

use alloc::vec::Vec;

use crate::model::{
    check_horizontal_contraction, AffineMap3, Coefficients, Endpoints, GDIFSystem,
    GeneralizedDataset, GraphSpec, HorizontalScope, ModelError, Scaling, ScalingParams,
    JOIN_UP_TOLERANCE,
};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("source interval has zero length")]
    ZeroLengthSourceInterval,
    #[error("join-up system is singular")]
    SingularSystem,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How map coefficients are computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SolveMethod {
    #[default]
    ClosedForm,
    LinearOracle,
}

/// Explicit solution of the join-up conditions.
pub fn solve_map_closed_form(
    source: &Endpoints,
    target: &Endpoints,
    scaling: Scaling,
) -> Result<Coefficients, SolveError> {
    let (x0, xn) = (source.left.x, source.right.x);
    let (y0, yn) = (source.left.y, source.right.y);
    let (z0, zn) = (source.left.z, source.right.z);
    let den = xn - x0;
    if den == 0.0 || !den.is_finite() {
        return Err(SolveError::ZeroLengthSourceInterval);
    }
    let (l, r) = (target.left, target.right);
    let Scaling { alpha, beta, gamma } = scaling;

    Ok(Coefficients {
        a: (r.x - l.x) / den,
        b: (xn * l.x - x0 * r.x) / den,
        c: (r.y - l.y - alpha * (yn - y0) - beta * (zn - z0)) / den,
        d: (xn * l.y - x0 * r.y - alpha * (xn * y0 - x0 * yn) - beta * (xn * z0 - x0 * zn)) / den,
        e: (r.z - l.z - gamma * (zn - z0)) / den,
        f: (xn * l.z - x0 * r.z - gamma * (xn * z0 - x0 * zn)) / den,
    })
}

/// Solves `[[p, 1], [q, 1]] (u, v) = (s, t)` by Gaussian elimination with
/// partial pivoting.
fn solve_affine_pair(p: f64, q: f64, s: f64, t: f64) -> Option<(f64, f64)> {
    let (piv, other, rp, ro) = if p.abs() >= q.abs() {
        (p, q, s, t)
    } else {
        (q, p, t, s)
    };
    if piv == 0.0 {
        return None;
    }
    let factor = other / piv;
    let m11 = 1.0 - factor;
    if m11 == 0.0 {
        return None;
    }
    let v = (ro - factor * rp) / m11;
    let u = (rp - v) / piv;
    Some((u, v))
}

/// Numerical solution of the join-up conditions, independent of the closed
/// form.
pub fn solve_map_linear_oracle(
    source: &Endpoints,
    target: &Endpoints,
    scaling: Scaling,
) -> Result<Coefficients, SolveError> {
    let (sl, sr) = (source.left, source.right);
    let (tl, tr) = (target.left, target.right);
    let Scaling { alpha, beta, gamma } = scaling;
    let solve = |s, t| solve_affine_pair(sl.x, sr.x, s, t).ok_or(SolveError::SingularSystem);

    let (a, b) = solve(tl.x, tr.x)?;
    let (c, d) = solve(
        tl.y - alpha * sl.y - beta * sl.z,
        tr.y - alpha * sr.y - beta * sr.z,
    )?;
    let (e, f) = solve(tl.z - gamma * sl.z, tr.z - gamma * sr.z)?;
    Ok(Coefficients { a, b, c, d, e, f })
}

fn solve_with(
    method: SolveMethod,
    source: &Endpoints,
    target: &Endpoints,
    scaling: Scaling,
) -> Result<Coefficients, SolveError> {
    match method {
        SolveMethod::ClosedForm => solve_map_closed_form(source, target, scaling),
        SolveMethod::LinearOracle => solve_map_linear_oracle(source, target, scaling),
    }
}

/// Builds one map per (vertex, subinterval) with the closed form.
pub fn build_system(
    datasets: Vec<GeneralizedDataset>,
    graph: GraphSpec,
    params: &ScalingParams,
) -> Result<GDIFSystem, SolveError> {
    build_system_with(datasets, graph, params, SolveMethod::ClosedForm)
}

pub fn build_system_with(
    datasets: Vec<GeneralizedDataset>,
    graph: GraphSpec,
    params: &ScalingParams,
    method: SolveMethod,
) -> Result<GDIFSystem, SolveError> {
    check_horizontal_contraction(&datasets, &graph, HorizontalScope::UsedEdges)?;
    if params.rows().len() != graph.vertex_count() {
        return Err(ModelError::VertexCountMismatch {
            expected: graph.vertex_count(),
            found: params.rows().len(),
        }
        .into());
    }
    let mut maps = Vec::with_capacity(datasets.len());
    for (vertex, ds) in datasets.iter().enumerate() {
        let row = &params.rows()[vertex];
        if row.len() != ds.subinterval_count() {
            return Err(ModelError::AssignmentLengthMismatch {
                vertex,
                expected: ds.subinterval_count(),
                found: row.len(),
            }
            .into());
        }
        let mut vertex_maps = Vec::with_capacity(row.len());
        for (n, &scaling) in row.iter().enumerate() {
            let source = graph.source(vertex, n);
            let coeffs = solve_with(
                method,
                &datasets[source].interval_ends(),
                &ds.subinterval_ends(n),
                scaling,
            )?;
            vertex_maps.push(AffineMap3 {
                coeffs,
                scaling,
                source,
                target: vertex,
                subinterval: n,
            });
        }
        maps.push(vertex_maps);
    }
    Ok(GDIFSystem::new(datasets, graph, maps, JOIN_UP_TOLERANCE)?)
}

/// `|x - y| / max(1, |y|)`: relative difference, absolute below magnitude 1.
pub fn scaled_difference(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

/// Largest [`scaled_difference`] between the system's coefficients and the
/// ones the linear oracle produces for the same data and scaling.
pub fn oracle_discrepancy(system: &GDIFSystem) -> Result<f64, SolveError> {
    let mut worst = 0.0f64;
    for m in system.all_maps() {
        let oracle = solve_map_linear_oracle(
            &system.dataset(m.source).interval_ends(),
            &system.dataset(m.target).subinterval_ends(m.subinterval),
            m.scaling,
        )?;
        for (x, y) in m.coeffs.to_array().into_iter().zip(oracle.to_array()) {
            worst = worst.max(scaled_difference(x, y));
        }
    }
    Ok(worst)
}

/// One map `W(x, y) = (a x + shift, alpha y + slope x + offset)` of a classic
/// affine fractal interpolation function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicMap {
    pub a: f64,
    pub shift: f64,
    pub alpha: f64,
    pub slope: f64,
    pub offset: f64,
}

impl ClassicMap {
    pub fn map_x(&self, x: f64) -> f64 {
        self.a * x + self.shift
    }

    pub fn map_y(&self, x: f64, y: f64) -> f64 {
        self.alpha * y + self.slope * x + self.offset
    }

    pub fn preimage(&self, xi: f64) -> f64 {
        (xi - self.shift) / self.a
    }
}

/// Maps of the planar affine FIF through `points`, one per subinterval.
pub fn classic_fif_coefficients(
    points: &[(f64, f64)],
    alphas: &[f64],
) -> Result<Vec<ClassicMap>, SolveError> {
    if points.len() < 3 {
        return Err(ModelError::TooFewPoints {
            count: points.len(),
        }
        .into());
    }
    if alphas.len() != points.len() - 1 {
        return Err(ModelError::AssignmentLengthMismatch {
            vertex: 0,
            expected: points.len() - 1,
            found: alphas.len(),
        }
        .into());
    }
    let (x0, y0) = points[0];
    let (xn, yn) = points[points.len() - 1];
    let den = xn - x0;
    if den <= 0.0 {
        return Err(SolveError::ZeroLengthSourceInterval);
    }
    alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            if !(alpha.abs() < 1.0) {
                return Err(ModelError::InvalidScaling {
                    vertex: 0,
                    map: i,
                    violation: crate::model::ScalingViolation::Alpha(alpha.abs()),
                }
                .into());
            }
            let (xl, yl) = points[i];
            let (xr, yr) = points[i + 1];
            Ok(ClassicMap {
                a: (xr - xl) / den,
                shift: (xn * xl - x0 * xr) / den,
                alpha,
                slope: (yr - yl - alpha * (yn - y0)) / den,
                offset: (xn * yl - x0 * yr - alpha * (xn * y0 - x0 * yn)) / den,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_dataset, validate_graph, validate_params};
    use crate::Point3;
    use alloc::vec;

    fn ends(l: (f64, f64, f64), r: (f64, f64, f64)) -> Endpoints {
        Endpoints {
            left: l.into(),
            right: r.into(),
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-14 * b.abs().max(1.0)
    }

    #[test]
    fn example1_first_map() {
        let third = 1.0 / 3.0;
        let c = solve_map_closed_form(
            &ends((0., 5., 5.), (5., 5., 5.)),
            &ends((0., 5., 5.), (1., 4., 4.)),
            Scaling::uniform(third),
        )
        .unwrap();
        assert!(close(c.a, 0.2));
        assert!(close(c.b, 0.0));
        assert!(close(c.c, -0.2));
        assert!(close(c.d, 5.0 / 3.0));
        assert!(close(c.e, -0.2));
        // f carries no beta term: (25 - 25/3) / 5
        assert!(close(c.f, 10.0 / 3.0));

        let o = solve_map_linear_oracle(
            &ends((0., 5., 5.), (5., 5., 5.)),
            &ends((0., 5., 5.), (1., 4., 4.)),
            Scaling::uniform(third),
        )
        .unwrap();
        for (x, y) in c.to_array().into_iter().zip(o.to_array()) {
            assert!(close(x, y), "{x} vs {y}");
        }
    }

    #[test]
    fn oracle_cross_vertex_a() {
        // vertex 2, subinterval 1, sourced from vertex 1 = [0, 5]
        let o = solve_map_linear_oracle(
            &ends((0., 5., 5.), (5., 5., 5.)),
            &ends((0., 1., 1.), (1., 2., 2.)),
            Scaling::uniform(1.0 / 3.0),
        )
        .unwrap();
        assert!(close(o.a, 0.2));
    }

    #[test]
    fn homogeneous_data() {
        let c = solve_map_closed_form(
            &ends((1., 0., 0.), (4., 0., 0.)),
            &ends((2., 0., 0.), (3., 0., 0.)),
            Scaling::new(0.5, -0.2, 0.7),
        )
        .unwrap();
        assert_eq!((c.c, c.d, c.e, c.f), (0.0, 0.0, 0.0, 0.0));
        assert!(close(c.a, 1.0 / 3.0));
        assert!(close(c.b, 5.0 / 3.0));
    }

    #[test]
    fn zero_scaling_gives_chord() {
        let c = solve_map_closed_form(
            &ends((0., 1., 7.), (4., 3., -2.)),
            &ends((1., 2., 0.), (2., 5., 1.)),
            Scaling::default(),
        )
        .unwrap();
        assert!(close(c.c, 3.0 / 4.0));
        assert!(close(c.e, 1.0 / 4.0));
    }

    #[test]
    fn zero_length_source() {
        let s = ends((1., 0., 0.), (1., 1., 1.));
        let t = ends((0., 0., 0.), (1., 1., 1.));
        assert_eq!(
            solve_map_closed_form(&s, &t, Scaling::default()),
            Err(SolveError::ZeroLengthSourceInterval)
        );
        assert_eq!(
            solve_map_linear_oracle(&s, &t, Scaling::default()),
            Err(SolveError::SingularSystem)
        );
        let origin = ends((0., 0., 0.), (0., 1., 1.));
        assert_eq!(
            solve_map_linear_oracle(&origin, &t, Scaling::default()),
            Err(SolveError::SingularSystem)
        );
    }

    #[test]
    fn single_vertex_reduces_to_classic() {
        let data = [(0.0, 0.0), (0.4, 0.5), (0.7, 0.2), (1.0, 1.0)];
        let alphas = [0.3, -0.4, 0.6];
        let ds = validate_dataset(
            0,
            data.iter().map(|&(x, y)| Point3::new(x, y, 0.0)).collect(),
        )
        .unwrap();
        let graph = validate_graph(vec![vec![0; 3]], core::slice::from_ref(&ds)).unwrap();
        let params = validate_params(
            vec![alphas.iter().map(|&a| Scaling::new(a, 0.0, 0.0)).collect()],
            &graph,
        )
        .unwrap();
        let system = build_system(vec![ds], graph, &params).unwrap();
        let classic = classic_fif_coefficients(&data, &alphas).unwrap();
        for (m, c) in system.maps(0).iter().zip(&classic) {
            assert!(close(m.coeffs.a, c.a));
            assert!(close(m.coeffs.b, c.shift));
            assert!(close(m.coeffs.c, c.slope));
            assert!(close(m.coeffs.d, c.offset));
            assert_eq!((m.coeffs.e, m.coeffs.f), (0.0, 0.0));
        }
        // a_i = (x_i - x_{i-1}) / (x_N - x_0), shift = (x_N x_{i-1} - x_0 x_i) / (x_N - x_0)
        assert!(close(classic[1].a, 0.3));
        assert!(close(classic[1].shift, 0.4));
    }

    #[test]
    fn classic_d1() {
        let d1 = [(0., 5.), (1., 4.), (2., 1.), (3., 1.), (4., 4.), (5., 5.)];
        let maps = classic_fif_coefficients(&d1, &[1.0 / 3.0; 5]).unwrap();
        assert!(close(maps[0].a, 0.2));
        assert!(close(maps[0].shift, 0.0));
        assert!(close(maps[2].shift, 2.0));
        assert!(classic_fif_coefficients(&d1, &[1.0; 5]).is_err());
        assert!(classic_fif_coefficients(&d1, &[0.0; 4]).is_err());
    }

    #[test]
    fn mismatched_params_rejected() {
        let d = |v| {
            validate_dataset(
                v,
                vec![
                    Point3::new(0., 0., 0.),
                    Point3::new(1., 1., 1.),
                    Point3::new(2., 0., 0.),
                ],
            )
            .unwrap()
        };
        let ds = vec![d(0), d(1)];
        let graph = validate_graph(vec![vec![0, 1], vec![1, 0]], &ds).unwrap();
        let other = validate_graph(vec![vec![0, 0]], &ds[..1]).unwrap();
        let params = ScalingParams::uniform(&other, Scaling::uniform(0.2)).unwrap();
        assert!(matches!(
            build_system(ds, graph, &params),
            Err(SolveError::Model(ModelError::VertexCountMismatch { .. }))
        ));
    }
}
