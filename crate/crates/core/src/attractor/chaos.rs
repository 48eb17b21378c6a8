//! Random iteration on a graph-directed system.
//!
//! Every vertex carries one current point. In each step every vertex `u`
//! draws one of its maps `w` (source `s`) and its next point becomes
//! `w(current[s])`; all vertices update from the previous step's points.
//!
//! The generator is Xoshiro256++ seeded through SplitMix64, so a seed gives the
//! same cloud on every platform.

use alloc::vec::Vec;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::PointSet3;
use crate::model::GDIFSystem;
use crate::Point3;

/// How a vertex picks among its maps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MapSelection {
    #[default]
    Uniform,
    /// Probability proportional to the horizontal contraction `|a|`.
    ProportionalToA,
}

struct Picker {
    // cumulative weights per vertex, last entry 1.0; empty for uniform choice
    cumulative: Vec<Vec<f64>>,
}

impl Picker {
    fn new(system: &GDIFSystem, selection: MapSelection) -> Self {
        let cumulative = match selection {
            MapSelection::Uniform => Vec::new(),
            MapSelection::ProportionalToA => (0..system.vertex_count())
                .map(|u| {
                    let maps = system.maps(u);
                    let total: f64 = maps.iter().map(|m| m.coeffs.a.abs()).sum();
                    let mut acc = 0.0;
                    let mut cum: Vec<f64> = maps
                        .iter()
                        .map(|m| {
                            acc += m.coeffs.a.abs() / total;
                            acc
                        })
                        .collect();
                    if let Some(last) = cum.last_mut() {
                        *last = 1.0;
                    }
                    cum
                })
                .collect(),
        };
        Self { cumulative }
    }

    fn pick(&self, rng: &mut Xoshiro256PlusPlus, vertex: usize, count: usize) -> usize {
        let r = rng.next_u64();
        if self.cumulative.is_empty() {
            // multiply-shift maps a 64-bit word onto 0..count
            ((r as u128 * count as u128) >> 64) as usize
        } else {
            let u = (r >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            let cum = &self.cumulative[vertex];
            cum.partition_point(|&c| c <= u).min(count - 1)
        }
    }
}

/// Runs `steps` steps and keeps every point produced after the first
/// `burn_in` steps. Each vertex starts at its first data point, which lies on
/// the attractor.
///
/// # Panics
/// If `steps <= burn_in`.
pub fn chaos_game(
    system: &GDIFSystem,
    steps: usize,
    seed: u64,
    burn_in: usize,
    selection: MapSelection,
) -> Vec<PointSet3> {
    assert!(steps > burn_in, "steps must exceed burn_in");
    let vertices = system.vertex_count();
    let picker = Picker::new(system, selection);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut current: Vec<Point3> = system.datasets().iter().map(|d| d.first()).collect();
    let mut next = current.clone();
    let mut clouds: Vec<Vec<Point3>> = (0..vertices)
        .map(|_| Vec::with_capacity(steps - burn_in))
        .collect();

    for step in 0..steps {
        for u in 0..vertices {
            let maps = system.maps(u);
            let m = &maps[picker.pick(&mut rng, u, maps.len())];
            next[u] = m.apply(current[m.source]);
        }
        core::mem::swap(&mut current, &mut next);
        if step >= burn_in {
            for (cloud, p) in clouds.iter_mut().zip(&current) {
                cloud.push(*p);
            }
        }
    }
    clouds
        .into_iter()
        .enumerate()
        .map(|(vertex, points)| PointSet3 { vertex, points })
        .collect()
}
