//! Farthest-point nets on a curve.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::manifold::{sample_manifold, CurveSample, EmbeddedCurve};
use crate::par::{self, Execution};

/// Dense sample points per net spacing.
const DENSE_FACTOR: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct Net {
    /// Net points in insertion order.
    pub points: Vec<CurveSample>,
    pub spacing: f64,
    /// Largest number of net points within `overlap_radius` of a net point,
    /// the point itself included.
    pub n_c: usize,
    pub overlap_radius: f64,
    /// Measured covering radius over the dense sample.
    pub covering: f64,
    /// Measured minimum pairwise distance.
    pub separation: f64,
    pub dense_count: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NetSummary {
    pub points: usize,
    pub spacing: f64,
    pub n_c: usize,
    pub covering: f64,
    pub separation: f64,
}

impl Net {
    pub fn summary(&self) -> NetSummary {
        NetSummary {
            points: self.points.len(),
            spacing: self.spacing,
            n_c: self.n_c,
            covering: self.covering,
            separation: self.separation,
        }
    }
}

/// `sqrt(delta R)/16`-net with the overlap count of the `sqrt(delta R)/2`
/// balls around its points.
pub fn build_net(curve: &EmbeddedCurve, delta: f64, r: f64) -> Result<Net> {
    if !(delta > 0.0 && r > 0.0 && delta <= 0.5 * r) {
        return invalid(format!("need 0 < delta <= R/2, got delta = {delta}, R = {r}"));
    }
    let root = (delta * r).sqrt();
    build_net_with_spacing(curve, root / 16.0, root)
}

/// Farthest-point net with covering radius and separation `spacing`, and
/// overlap counts at distance `overlap_radius`.
pub fn build_net_with_spacing(curve: &EmbeddedCurve, spacing: f64, overlap_radius: f64) -> Result<Net> {
    build_net_with(Execution::default(), curve, spacing, overlap_radius)
}

pub fn build_net_with(exec: Execution, curve: &EmbeddedCurve, spacing: f64, overlap_radius: f64) -> Result<Net> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return invalid(format!("net spacing must be positive, got {spacing}"));
    }
    let dense = sample_manifold(curve, spacing / DENSE_FACTOR)?;
    let gap = (0..dense.len())
        .map(|i| (dense[(i + 1) % dense.len()].point - dense[i].point).norm())
        .fold(0.0, f64::max);
    if gap > spacing / DENSE_FACTOR * (1.0 + 1e-9) {
        return Err(Error::Resolution(format!("dense sample gap {gap} cannot certify covering radius {spacing}")));
    }
    let (chosen, covering) = farthest_points(exec, &dense, spacing);
    let points: Vec<CurveSample> = chosen.iter().map(|&i| dense[i]).collect();
    let separation = min_pairwise(exec, &points);
    let n_c = overlap_count(exec, &points, overlap_radius);
    Ok(Net { points, spacing, n_c, overlap_radius, covering, separation, dense_count: dense.len() })
}

/// Greedy insertion starting from index 0; ties go to the lowest index.
fn farthest_points(exec: Execution, dense: &[CurveSample], spacing: f64) -> (Vec<usize>, f64) {
    let mut dist = vec![f64::INFINITY; dense.len()];
    let mut chosen = Vec::new();
    let mut next = 0usize;
    loop {
        chosen.push(next);
        let c = dense[next].point;
        update_min(exec, &mut dist, |i| (dense[i].point - c).norm());
        let far = par::max_by_index(exec, dense.len(), |i| Some((dist[i], ()))).expect("dense sample is non-empty");
        if far.value <= spacing {
            return (chosen, far.value);
        }
        next = far.index;
    }
}

fn update_min(exec: Execution, dist: &mut [f64], d: impl Fn(usize) -> f64 + Sync) {
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        dist.par_iter_mut().enumerate().with_min_len(4096).for_each(|(i, v)| *v = v.min(d(i)));
        return;
    }
    let _ = exec;
    dist.iter_mut().enumerate().for_each(|(i, v)| *v = v.min(d(i)));
}

fn min_pairwise(exec: Execution, pts: &[CurveSample]) -> f64 {
    par::min_by_index(exec, pts.len(), |i| {
        (i + 1..pts.len()).map(|j| (pts[i].point - pts[j].point).norm()).reduce(f64::min).map(|d| (d, ()))
    })
    .map_or(f64::INFINITY, |e| e.value)
}

fn overlap_count(exec: Execution, pts: &[CurveSample], radius: f64) -> usize {
    par::map_indexed(exec, pts.len(), |i| {
        pts.iter().filter(|q| (q.point - pts[i].point).norm() <= radius).count()
    })
    .into_iter()
    .max()
    .unwrap_or(0)
}
