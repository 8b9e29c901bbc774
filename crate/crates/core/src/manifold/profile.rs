//! Arc-length parametrized base curves: line/arc profiles and ellipses.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::quad;

pub type V2 = Vector2<f64>;

/// Tolerance for position and tangent continuity at profile junctions.
pub const JUNCTION_TOL: f64 = 1e-9;

/// One piece of a profile, as written in shape files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Piece {
    Line { start: [f64; 2], end: [f64; 2] },
    /// Counter-clockwise for positive `sweep`.
    Arc { center: [f64; 2], radius: f64, start_angle: f64, sweep: f64 },
}

#[inline]
fn v(a: [f64; 2]) -> V2 {
    V2::new(a[0], a[1])
}

impl Piece {
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Line { start, end } => (v(end) - v(start)).norm(),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Point, unit tangent and signed curvature at arc length `u`.
    #[inline]
    pub fn eval(&self, u: f64) -> (V2, V2, f64) {
        match *self {
            Piece::Line { start, end } => {
                let d = v(end) - v(start);
                let t = d / d.norm();
                (v(start) + t * u, t, 0.0)
            }
            Piece::Arc { center, radius, start_angle, sweep } => {
                let sg = sweep.signum();
                let th = start_angle + sg * u / radius;
                let (s, c) = th.sin_cos();
                (v(center) + V2::new(c, s) * radius, V2::new(-s, c) * sg, sg / radius)
            }
        }
    }

    fn validate(&self, i: usize) -> Result<()> {
        let ok = match *self {
            Piece::Line { start, end } => {
                start.iter().chain(end.iter()).all(|x| x.is_finite()) && (v(end) - v(start)).norm() > 0.0
            }
            Piece::Arc { center, radius, start_angle, sweep } => {
                center.iter().all(|x| x.is_finite())
                    && radius > 0.0
                    && radius.is_finite()
                    && start_angle.is_finite()
                    && sweep != 0.0
                    && sweep.abs() <= TAU
            }
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("piece {i} is degenerate: {self:?}"))
        }
    }
}

/// A closed chain of pieces parametrized by arc length.
#[derive(Debug, Clone)]
pub struct Profile {
    pieces: Vec<Piece>,
    offsets: Vec<f64>,
    length: f64,
}

impl Profile {
    /// Checks closure and tangent continuity at every junction.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return invalid("a profile needs at least one piece");
        }
        for (i, p) in pieces.iter().enumerate() {
            p.validate(i)?;
        }
        let n = pieces.len();
        for i in 0..n {
            let a = &pieces[i];
            let b = &pieces[(i + 1) % n];
            let (pa, ta, _) = a.eval(a.length());
            let (pb, tb, _) = b.eval(0.0);
            if (pa - pb).norm() > JUNCTION_TOL {
                return invalid(format!(
                    "gap of {:.3e} at junction {i} between ({:.6}, {:.6}) and ({:.6}, {:.6})",
                    (pa - pb).norm(),
                    pa.x,
                    pa.y,
                    pb.x,
                    pb.y
                ));
            }
            if (ta - tb).norm() > JUNCTION_TOL {
                return invalid(format!(
                    "tangent jump of {:.3e} at junction {i} located at ({:.6}, {:.6})",
                    (ta - tb).norm(),
                    pa.x,
                    pa.y
                ));
            }
        }
        let mut offsets = Vec::with_capacity(n);
        let mut acc = 0.0;
        for p in &pieces {
            offsets.push(acc);
            acc += p.length();
        }
        Ok(Profile { pieces, offsets, length: acc })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Arc-length positions of the junctions.
    pub fn junctions(&self) -> &[f64] {
        &self.offsets
    }

    #[inline]
    pub fn eval(&self, s: f64) -> (V2, V2, f64) {
        let s = s.rem_euclid(self.length);
        let i = self.offsets.partition_point(|&o| o <= s).max(1) - 1;
        self.pieces[i].eval(s - self.offsets[i])
    }
}

/// Stadium of cap radius `r` and flat length `l`, centred at the origin.
pub fn stadium_pieces(r: f64, l: f64) -> Vec<Piece> {
    let h = 0.5 * l;
    vec![
        Piece::Line { start: [-h, -r], end: [h, -r] },
        Piece::Arc { center: [h, 0.0], radius: r, start_angle: -0.5 * PI, sweep: PI },
        Piece::Line { start: [h, r], end: [-h, r] },
        Piece::Arc { center: [-h, 0.0], radius: r, start_angle: 0.5 * PI, sweep: PI },
    ]
}

/// Rectangle `width x height` with corners rounded to radius `c`.
pub fn rounded_rectangle_pieces(width: f64, height: f64, c: f64) -> Vec<Piece> {
    let (x, y) = (0.5 * width, 0.5 * height);
    vec![
        Piece::Line { start: [-x + c, -y], end: [x - c, -y] },
        Piece::Arc { center: [x - c, -y + c], radius: c, start_angle: -0.5 * PI, sweep: 0.5 * PI },
        Piece::Line { start: [x, -y + c], end: [x, y - c] },
        Piece::Arc { center: [x - c, y - c], radius: c, start_angle: 0.0, sweep: 0.5 * PI },
        Piece::Line { start: [x - c, y], end: [-x + c, y] },
        Piece::Arc { center: [-x + c, y - c], radius: c, start_angle: 0.5 * PI, sweep: 0.5 * PI },
        Piece::Line { start: [-x, y - c], end: [-x, -y + c] },
        Piece::Arc { center: [-x + c, -y + c], radius: c, start_angle: PI, sweep: 0.5 * PI },
    ]
}

const ELLIPSE_NODES: usize = 2048;

/// Ellipse `(a cos t, b sin t)` reparametrized by arc length.
#[derive(Debug, Clone)]
pub struct Ellipse {
    a: f64,
    b: f64,
    arc: Vec<f64>,
}

impl Ellipse {
    pub fn new(a: f64, b: f64) -> Self {
        let h = TAU / ELLIPSE_NODES as f64;
        let mut arc = Vec::with_capacity(ELLIPSE_NODES + 1);
        arc.push(0.0);
        let mut acc = 0.0;
        for i in 0..ELLIPSE_NODES {
            acc += quad::gauss_legendre_8(h * i as f64, h * (i + 1) as f64, |t| speed(a, b, t));
            arc.push(acc);
        }
        Ellipse { a, b, arc }
    }

    pub fn length(&self) -> f64 {
        self.arc[ELLIPSE_NODES]
    }

    /// Angle parameter at arc length `s`.
    fn angle(&self, s: f64) -> f64 {
        let h = TAU / ELLIPSE_NODES as f64;
        let i = (self.arc.partition_point(|&x| x <= s).max(1) - 1).min(ELLIPSE_NODES - 1);
        let t0 = h * i as f64;
        let span = self.arc[i + 1] - self.arc[i];
        let mut t = t0 + h * (s - self.arc[i]) / span;
        for _ in 0..6 {
            let g = self.arc[i] + quad::gauss_legendre_8(t0, t, |u| speed(self.a, self.b, u)) - s;
            let step = g / speed(self.a, self.b, t);
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        t
    }

    pub fn eval(&self, s: f64) -> (V2, V2, f64) {
        let s = s.rem_euclid(self.length());
        let t = self.angle(s);
        let (sn, cs) = t.sin_cos();
        let sp = speed(self.a, self.b, t);
        let p = V2::new(self.a * cs, self.b * sn);
        let tan = V2::new(-self.a * sn, self.b * cs) / sp;
        (p, tan, self.a * self.b / (sp * sp * sp))
    }
}

#[inline]
fn speed(a: f64, b: f64, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    (a * a * s * s + b * b * c * c).sqrt()
}

/// The arc-length parametrized curve underlying a shape.
#[derive(Debug, Clone)]
pub enum BaseCurve {
    Profile(Profile),
    Ellipse(Ellipse),
}

impl BaseCurve {
    pub fn length(&self) -> f64 {
        match self {
            BaseCurve::Profile(p) => p.length(),
            BaseCurve::Ellipse(e) => e.length(),
        }
    }

    /// Point, unit tangent and signed curvature at arc length `s`.
    #[inline]
    pub fn eval(&self, s: f64) -> (V2, V2, f64) {
        match self {
            BaseCurve::Profile(p) => p.eval(s),
            BaseCurve::Ellipse(e) => e.eval(s),
        }
    }

    /// Arc-length positions where the curvature jumps.
    pub fn junction_params(&self) -> Vec<f64> {
        match self {
            BaseCurve::Profile(p) => {
                let l = p.length();
                p.junctions()
                    .iter()
                    .copied()
                    .filter(|&s| {
                        let h = 1e-9 * l;
                        (p.eval(s + h).2 - p.eval(s - h).2).abs() > 1e-12
                    })
                    .collect()
            }
            BaseCurve::Ellipse(_) => Vec::new(),
        }
    }
}
