//! Tabular output: coefficient tables, function samples and point clouds.
//!
//! CSV rows use 1-based vertex and map labels and print floats with Rust's
//! shortest round-trip representation, so values survive a text round trip.

use std::fmt::Write as _;

use chfif_core::attractor::PointSet3;
use chfif_core::evaluator::SampledFunction;
use chfif_core::model::GDIFSystem;

pub const COEFFICIENT_HEADER: &str = "vertex,map,source,a,b,c,d,e,f,alpha,beta,gamma";

/// One row per map.
pub fn coefficients_csv(system: &GDIFSystem) -> String {
    let mut out = String::from(COEFFICIENT_HEADER);
    out.push('\n');
    for m in system.all_maps() {
        let c = m.coeffs;
        let s = m.scaling;
        let _ = writeln!(
            out,
            "{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            m.target + 1,
            m.subinterval + 1,
            m.source + 1,
            c.a,
            c.b,
            c.c,
            c.d,
            c.e,
            c.f,
            s.alpha,
            s.beta,
            s.gamma
        );
    }
    out
}

/// Aligned table for reading.
pub fn coefficients_text(system: &GDIFSystem) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3} {:>3} {:>3} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>8} {:>8} {:>8}",
        "r", "n", "src", "a", "b", "c", "d", "e", "f", "alpha", "beta", "gamma"
    );
    for m in system.all_maps() {
        let c = m.coeffs;
        let s = m.scaling;
        let _ = writeln!(
            out,
            "{:>3} {:>3} {:>3} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>8.4} {:>8.4} {:>8.4}",
            m.target + 1,
            m.subinterval + 1,
            m.source + 1,
            c.a,
            c.b,
            c.c,
            c.d,
            c.e,
            c.f,
            s.alpha,
            s.beta,
            s.gamma
        );
    }
    out
}

/// `vertex,x,f1,f2` for every grid point of every vertex.
pub fn samples_csv(functions: &[SampledFunction]) -> String {
    let mut out = String::from("vertex,x,f1,f2\n");
    for f in functions {
        for (x, v) in f.grid.iter().zip(&f.values) {
            let _ = writeln!(out, "{},{:?},{:?},{:?}", f.vertex + 1, x, v[0], v[1]);
        }
    }
    out
}

/// `vertex,x,y,z` for every point of every cloud.
pub fn cloud_csv(sets: &[PointSet3]) -> String {
    let mut out = String::from("vertex,x,y,z\n");
    for s in sets {
        for p in &s.points {
            let _ = writeln!(out, "{},{:?},{:?},{:?}", s.vertex + 1, p.x, p.y, p.z);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chfif_core::Point3;

    #[test]
    fn cloud_rows_are_one_based() {
        let sets = [PointSet3 {
            vertex: 0,
            points: vec![Point3::new(0.5, 1.0, -2.0)],
        }];
        assert_eq!(cloud_csv(&sets), "vertex,x,y,z\n1,0.5,1.0,-2.0\n");
    }

    #[test]
    fn floats_round_trip() {
        let f = SampledFunction {
            vertex: 1,
            density: 2,
            grid: vec![0.0, 0.1, 0.2],
            values: vec![[1.0 / 3.0, 0.0], [0.1 + 0.2, 1e-300], [2.0, 3.0]],
        };
        let text = samples_csv(std::slice::from_ref(&f));
        let row: Vec<f64> = text
            .lines()
            .nth(2)
            .unwrap()
            .split(',')
            .skip(1)
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(row, vec![0.1, 0.1 + 0.2, 1e-300]);
    }
}
