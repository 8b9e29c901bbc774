//! Reach estimation from Federer's tangent-distance criterion.
//!
//! A sampled estimate is the infimum of `|q-p|^2 / (2 d(q, p + T_p))` over
//! scanned pairs; it only upper-bounds the true reach.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::manifold::{make_shape, CurveSample, EmbeddedCurve, Piece, ShapeSpec, V2};
use crate::par::{self, Execution};

/// `|q-p|^2 / (2 d(q, p + span{t}))`, or `+inf` when the tangent distance
/// is at most `1e-14 |q-p|`. `t` must be a unit vector.
pub fn federer_ratio(p: &V2, t: &V2, q: &V2) -> Result<f64> {
    let d = q - p;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return invalid("federer_ratio needs distinct points");
    }
    let normal_dist = d.perp(t).abs();
    if normal_dist <= 1e-14 * len2.sqrt() {
        return Ok(f64::INFINITY);
    }
    Ok(len2 / (2.0 * normal_dist))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReachEstimate {
    #[serde(rename = "reach_estimate")]
    pub value: f64,
    pub argmin_p: [f64; 2],
    pub argmin_q: [f64; 2],
    pub argmin_indices: [usize; 2],
    pub pairs_scanned: u64,
    pub min_sep: f64,
}

/// Default pair exclusion radius: twice the largest sample gap.
pub fn default_min_sep(sample: &[CurveSample]) -> f64 {
    let n = sample.len();
    2.0 * (0..n).map(|i| (sample[(i + 1) % n].point - sample[i].point).norm()).fold(0.0, f64::max)
}

pub fn estimate_reach_federer(sample: &[CurveSample], min_sep: f64) -> Result<ReachEstimate> {
    estimate_reach_federer_with(Execution::default(), sample, min_sep)
}

/// Infimum of the Federer ratio over ordered pairs at least `min_sep`
/// apart. Ties go to the lowest `(p, q)` index pair.
pub fn estimate_reach_federer_with(exec: Execution, sample: &[CurveSample], min_sep: f64) -> Result<ReachEstimate> {
    let n = sample.len();
    if n < 3 {
        return invalid(format!("need at least 3 samples, got {n}"));
    }
    if !(min_sep >= 0.0) {
        return invalid(format!("min_sep must be non-negative, got {min_sep}"));
    }
    let sep2 = min_sep * min_sep;
    let rows = par::map_indexed(exec, n, |i| {
        let p = &sample[i];
        let mut best = (f64::INFINITY, usize::MAX);
        let mut count = 0u64;
        for (j, q) in sample.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = q.point - p.point;
            let len2 = d.norm_squared();
            if len2 < sep2 || len2 == 0.0 {
                continue;
            }
            count += 1;
            let nd = d.perp(&p.tangent).abs();
            if nd <= 1e-14 * len2.sqrt() {
                if best.1 == usize::MAX {
                    best.1 = j;
                }
                continue;
            }
            let r = len2 / (2.0 * nd);
            if r < best.0 {
                best = (r, j);
            }
        }
        (best, count)
    });
    let pairs: u64 = rows.iter().map(|r| r.1).sum();
    if pairs == 0 {
        return invalid(format!("min_sep = {min_sep} excludes every pair"));
    }
    let mut arg = (f64::INFINITY, 0usize, usize::MAX);
    for (i, ((r, j), _)) in rows.iter().enumerate() {
        if *j == usize::MAX {
            continue;
        }
        if arg.2 == usize::MAX || *r < arg.0 {
            arg = (*r, i, *j);
        }
    }
    let (value, i, j) = arg;
    Ok(ReachEstimate {
        value,
        argmin_p: [sample[i].point.x, sample[i].point.y],
        argmin_q: [sample[j].point.x, sample[j].point.y],
        argmin_indices: [i, j],
        pairs_scanned: pairs,
        min_sep,
    })
}

/// Reach of `curve` from `n` uniform samples with the default `min_sep`.
pub fn scan_curve(curve: &EmbeddedCurve, n: usize) -> Result<ReachEstimate> {
    let sample = crate::manifold::sample_count(curve, n);
    estimate_reach_federer(&sample, default_min_sep(&sample))
}

/// Closed-form reach of catalog shapes. Profiles use the smallest arc
/// radius and half the shortest first-hit chord along normals.
pub fn analytic_reach(spec: &ShapeSpec) -> Result<f64> {
    match *spec {
        ShapeSpec::Circle { r } if r > 0.0 => Ok(r),
        ShapeSpec::Stadium { r, l } if r > 0.0 && l > 0.0 => Ok(r),
        ShapeSpec::Ellipse { a, b } if a > 0.0 && b > 0.0 => {
            let (a, b) = (a.max(b), a.min(b));
            Ok(b * b / a)
        }
        ShapeSpec::CadProfile { .. } => {
            let curve = make_shape(spec)?;
            let crate::manifold::BaseCurve::Profile(profile) = curve.base() else {
                return invalid("cad_profile without a piece list");
            };
            Ok(profile_reach(profile.pieces(), curve.length()))
        }
        _ => invalid(format!("unsupported or invalid shape {spec:?}")),
    }
}

fn profile_reach(pieces: &[Piece], length: f64) -> f64 {
    let mut best = f64::INFINITY;
    for p in pieces {
        if let Piece::Arc { radius, .. } = *p {
            best = best.min(radius);
        }
    }
    let profile = crate::manifold::Profile::new(pieces.to_vec()).expect("validated profile");
    let n = 20_000;
    for i in 0..n {
        let s = length * (i as f64 + 0.5) / n as f64;
        let (o, t, _) = profile.eval(s);
        let nrm = V2::new(-t.y, t.x);
        for dir in [nrm, -nrm] {
            if let Some(hit) = first_hit(pieces, &o, &dir) {
                best = best.min(0.5 * hit);
            }
        }
    }
    best
}

/// Smallest `t > tol` with `o + t dir` on a piece.
fn first_hit(pieces: &[Piece], o: &V2, dir: &V2) -> Option<f64> {
    let tol = 1e-9;
    let mut best: Option<f64> = None;
    let mut keep = |t: f64| {
        if t > tol && best.is_none_or(|b| t < b) {
            best = Some(t);
        }
    };
    for p in pieces {
        match *p {
            Piece::Line { start, end } => {
                let a = V2::new(start[0], start[1]);
                let e = V2::new(end[0], end[1]) - a;
                let den = dir.perp(&e);
                if den.abs() < 1e-15 {
                    continue;
                }
                let w = a - o;
                let t = w.perp(&e) / den;
                let u = w.perp(dir) / den;
                if (0.0..=1.0).contains(&u) {
                    keep(t);
                }
            }
            Piece::Arc { center, radius, start_angle, sweep } => {
                let c = V2::new(center[0], center[1]);
                let w = o - c;
                let b = w.dot(dir);
                let disc = b * b - (w.norm_squared() - radius * radius);
                if disc < 0.0 {
                    continue;
                }
                for t in [-b - disc.sqrt(), -b + disc.sqrt()] {
                    let q = o + dir * t - c;
                    let ang = q.y.atan2(q.x);
                    let rel = if sweep > 0.0 {
                        (ang - start_angle).rem_euclid(std::f64::consts::TAU)
                    } else {
                        (start_angle - ang).rem_euclid(std::f64::consts::TAU)
                    };
                    if rel <= sweep.abs() + 1e-12 {
                        keep(t);
                    }
                }
            }
        }
    }
    best
}
