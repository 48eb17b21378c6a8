//! Hausdorff distance between finite point sets in `R^3`.
//!
//! `H(A, B) = max(h(A, B), h(B, A))` with the directed distance
//! `h(A, B) = max_{a in A} min_{b in B} |a - b|`.
//!
//! [`hausdorff_distance`] sorts the target set by `x` and scans outward from
//! each query, stopping once the `x` gap alone exceeds the best candidate. A
//! query also stops as soon as it finds a neighbour closer than the running
//! maximum, since it can no longer raise it. Both shortcuts only skip work
//! that cannot change the result, so the answer is identical to
//! [`hausdorff_brute_force`].

use alloc::vec::Vec;

use crate::Point3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("Hausdorff distance is undefined for an empty point set")]
pub struct EmptySet;

/// O(|A| |B|) reference implementation.
pub fn hausdorff_brute_force(a: &[Point3], b: &[Point3]) -> Result<f64, EmptySet> {
    if a.is_empty() || b.is_empty() {
        return Err(EmptySet);
    }
    let directed = |from: &[Point3], to: &[Point3]| {
        from.iter()
            .map(|p| to.iter().map(|q| p.dist2(q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(libm::sqrt(directed(a, b).max(directed(b, a))))
}

/// Exact Hausdorff distance, accelerated for sets spread out along `x`.
pub fn hausdorff_distance(a: &[Point3], b: &[Point3]) -> Result<f64, EmptySet> {
    if a.is_empty() || b.is_empty() {
        return Err(EmptySet);
    }
    let sa = sorted_by_x(a);
    let sb = sorted_by_x(b);
    let d2 = directed_sorted(&sa, &sb, 0.0);
    let d2 = directed_sorted(&sb, &sa, d2);
    Ok(libm::sqrt(d2))
}

/// Directed distance `h(A, B)`.
pub fn directed_hausdorff(a: &[Point3], b: &[Point3]) -> Result<f64, EmptySet> {
    if a.is_empty() || b.is_empty() {
        return Err(EmptySet);
    }
    Ok(libm::sqrt(directed_sorted(
        &sorted_by_x(a),
        &sorted_by_x(b),
        0.0,
    )))
}

fn sorted_by_x(points: &[Point3]) -> Vec<Point3> {
    let mut v = points.to_vec();
    v.sort_unstable_by(|p, q| p.x.total_cmp(&q.x));
    v
}

/// Squared directed distance from `from` to `to`, starting from the running
/// maximum `floor`. Both slices must be sorted by `x`.
fn directed_sorted(from: &[Point3], to: &[Point3], floor: f64) -> f64 {
    let mut cmax = floor;
    // successive queries are close in x, so start the search at the last hit
    let mut hint = 0usize;
    for p in from {
        while hint < to.len() && to[hint].x < p.x {
            hint += 1;
        }
        let mut best = f64::INFINITY;
        let mut right = hint;
        let mut left = hint;
        let mut right_open = true;
        let mut left_open = true;
        while (right_open || left_open) && best > cmax {
            if right_open {
                if right < to.len() {
                    let dx = to[right].x - p.x;
                    if dx * dx >= best {
                        right_open = false;
                    } else {
                        best = best.min(p.dist2(&to[right]));
                        right += 1;
                    }
                } else {
                    right_open = false;
                }
            }
            if left_open {
                if left > 0 {
                    let dx = p.x - to[left - 1].x;
                    if dx * dx >= best {
                        left_open = false;
                    } else {
                        best = best.min(p.dist2(&to[left - 1]));
                        left -= 1;
                    }
                } else {
                    left_open = false;
                }
            }
        }
        if best > cmax {
            cmax = best;
        }
    }
    cmax
}
