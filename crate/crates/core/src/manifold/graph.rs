//! Local graphs `y -> p + y t + f(y) n` of a curve over its tangent line.

use crate::error::{invalid, Error, Result};
use crate::kernels::{Domain1D, GraphFn, HermiteTable};
use crate::kernels::table::TableTolerance;

use super::{EmbeddedCurve, V2};

/// Marching steps per window radius when checking monotonicity.
const MARCH_STEPS: f64 = 32.0;
/// Reference samples per window radius for the uniqueness check.
const CHECK_STEPS: f64 = 4.0;

/// The curve near `base` written as a graph over the tangent line.
#[derive(Debug, Clone)]
pub struct LocalGraph<'a> {
    curve: &'a EmbeddedCurve,
    pub s0: f64,
    pub base: V2,
    pub tangent: V2,
    pub normal: V2,
    pub radius: f64,
    lo: f64,
    hi: f64,
}

/// Local graph at the point of parameter `s0`, over `[-radius, radius]`.
pub fn local_graph_at_param(curve: &EmbeddedCurve, s0: f64, radius: f64) -> Result<LocalGraph<'_>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid(format!("window radius must be positive, got {radius}"));
    }
    let q = curve.eval(s0);
    let (base, tangent, normal) = (q.point, q.tangent(), q.normal());
    let step = radius / MARCH_STEPS;
    let max_steps = (8.0 * MARCH_STEPS) as usize;
    let mut ends = [0.0; 2];
    for (slot, dir) in [(0usize, -1.0), (1usize, 1.0)] {
        let mut s = s0;
        let mut reached = false;
        for _ in 0..max_steps {
            s += dir * step;
            let c = curve.eval(s);
            if c.velocity.dot(&tangent) <= 0.0 {
                return Err(Error::Geometry(format!(
                    "the curve folds back over the tangent line within {radius} of s = {s0}"
                )));
            }
            if dir * (c.point - base).dot(&tangent) > radius {
                reached = true;
                break;
            }
        }
        if !reached {
            return Err(Error::Geometry(format!("window of radius {radius} at s = {s0} is not crossed")));
        }
        ends[slot] = s;
    }
    let (lo, hi) = (ends[0], ends[1]);
    if hi - lo >= curve.length() {
        return Err(Error::Geometry(format!("window of radius {radius} wraps the whole curve")));
    }
    // no other part of the curve may enter the square |y|, |f| <= radius
    let l = curve.length();
    let n = ((l / (radius / CHECK_STEPS)).ceil() as usize).max(16);
    let h = l / n as f64;
    for i in 0..n {
        let s = h * i as f64;
        let rel = (s - lo).rem_euclid(l);
        if rel <= hi - lo {
            continue;
        }
        let d = curve.base().eval(s).0 - base;
        if d.dot(&tangent).abs() <= radius && d.dot(&normal).abs() <= radius {
            return Err(Error::Geometry(format!(
                "the normal lines near s = {s0} meet the curve again at s = {s} (radius {radius} too large)"
            )));
        }
    }
    Ok(LocalGraph { curve, s0, base, tangent, normal, radius, lo, hi })
}

/// Local graph at the curve point `p` (within 1e-9 of the curve), with the
/// window limits `radius <= sqrt(delta R)/2` and `delta <= R/2`.
pub fn local_graph_at<'a>(
    curve: &'a EmbeddedCurve,
    p: &V2,
    radius: f64,
    delta: f64,
    r: f64,
) -> Result<LocalGraph<'a>> {
    if !(delta > 0.0 && r > 0.0 && delta <= 0.5 * r) {
        return invalid(format!("need 0 < delta <= R/2, got delta = {delta}, R = {r}"));
    }
    if radius > 0.5 * (delta * r).sqrt() * (1.0 + 1e-12) {
        return invalid(format!("radius {radius} exceeds sqrt(delta R)/2 = {}", 0.5 * (delta * r).sqrt()));
    }
    let (s, d) = curve.locate(p);
    if d > 1e-9 {
        return invalid(format!("point is {d:e} away from the curve"));
    }
    local_graph_at_param(curve, s, radius)
}

/// `base + y t + f(y) n`.
pub fn graph_point(g: &LocalGraph<'_>, y: f64) -> Result<V2> {
    if !g.domain().contains(y) {
        return Err(Error::Domain(format!("y = {y} is outside [-{r}, {r}]", r = g.radius)));
    }
    let (f, _) = g.eval(y)?;
    Ok(g.base + g.tangent * y + g.normal * f)
}

impl<'a> LocalGraph<'a> {
    pub fn curve(&self) -> &'a EmbeddedCurve {
        self.curve
    }

    /// Parameter bracket of the window.
    pub fn bracket(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    #[inline]
    fn coords(&self, s: f64) -> (f64, f64, f64, f64) {
        let q = self.curve.eval(s);
        let d = q.point - self.base;
        (d.dot(&self.tangent), d.dot(&self.normal), q.velocity.dot(&self.tangent), q.velocity.dot(&self.normal))
    }

    /// Parameter `s` with tangent coordinate `y`, starting from `guess`.
    pub fn solve(&self, y: f64, guess: Option<f64>) -> Result<(f64, f64, f64)> {
        self.solve_full(y, guess).map(|(s, f, df, _)| (s, f, df))
    }

    /// As [`Self::solve`], also returning the tangential speed at the root.
    fn solve_full(&self, y: f64, guess: Option<f64>) -> Result<(f64, f64, f64, f64)> {
        let (mut a, mut b) = (self.lo, self.hi);
        let mut s = guess.unwrap_or(self.s0 + y).clamp(a, b);
        // coordinates carry rounding noise relative to the point magnitude
        let scale = self.base.abs().max() + self.radius + y.abs();
        for iter in 0..200 {
            let (ys, fs, vt, vn) = self.coords(s);
            let r = ys - y;
            if r < 0.0 {
                a = s;
            } else {
                b = s;
            }
            let df = vn / vt;
            if r.abs() <= 4.0 * f64::EPSILON * scale || b - a <= 4.0 * f64::EPSILON * s.abs().max(1.0) {
                // first-order correction to the exact abscissa
                return Ok((s, fs - df * r, df, vt));
            }
            let mut next = s - r / vt;
            if !(next > a && next < b) || iter >= 40 {
                next = 0.5 * (a + b);
            }
            s = next;
        }
        Err(Error::Convergence(format!("root finding for y = {y} did not settle")))
    }

    /// `(f(y), Df(y))`.
    pub fn eval(&self, y: f64) -> Result<(f64, f64)> {
        let (_, f, df) = self.solve(y, None)?;
        Ok((f, df))
    }

    /// Adaptive Hermite table of `f` over `[-half_width, half_width]`.
    pub fn tabulate(&self, half_width: f64) -> Result<HermiteTable> {
        let domain = Domain1D::symmetric(half_width)?;
        let mut last: Option<(f64, f64, f64)> = None;
        HermiteTable::build(domain, TableTolerance::for_width(2.0 * half_width), |y| {
            let guess = last.map(|(y0, s0, vt)| s0 + (y - y0) / vt);
            let (s, f, df, vt) = self.solve_full(y, guess)?;
            last = Some((y, s, vt));
            Ok((f, df))
        })
    }

    /// Largest difference quotients of `f` and `Df` on `n` cells of
    /// `[-r, r]`.
    pub fn measure_lipschitz(&self, r: f64, n: usize) -> Result<(f64, f64)> {
        let h = 2.0 * r / n as f64;
        let mut prev = self.eval(-r)?;
        let (mut l0, mut l1): (f64, f64) = (0.0, 0.0);
        for i in 1..=n {
            let cur = self.eval(-r + h * i as f64)?;
            l0 = l0.max((cur.0 - prev.0).abs() / h);
            l1 = l1.max((cur.1 - prev.1).abs() / h);
            prev = cur;
        }
        Ok((l0, l1))
    }
}

impl GraphFn for LocalGraph<'_> {
    fn value(&self, y: f64) -> f64 {
        self.eval(y).map(|v| v.0).unwrap_or(f64::NAN)
    }
    fn deriv(&self, y: f64) -> f64 {
        self.eval(y).map(|v| v.1).unwrap_or(f64::NAN)
    }
    fn domain(&self) -> Domain1D {
        Domain1D { a: -self.radius, b: self.radius }
    }
}
