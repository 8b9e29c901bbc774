//! Closed plane curves: the analytic catalog, patch overlays and local
//! graphs over tangent lines.
//!
//! Curves are oriented counter-clockwise, so the left normal points inward.
//! A curve is evaluated by arc length `s` on its base shape; applied patches
//! then displace the point along their frame normals in insertion order.

pub mod graph;
pub mod patch;
pub mod profile;

use std::f64::consts::TAU;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use graph::{graph_point, local_graph_at, local_graph_at_param, LocalGraph};
pub use patch::AppliedPatch;
pub use profile::{BaseCurve, Ellipse, Piece, Profile, V2};

/// Default rounded-rectangle parameters of the CAD profile.
pub const CAD_DEFAULT: (f64, f64, f64) = (2.0, 1.6, 0.5);

/// Shape description, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    Circle {
        r: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    Stadium {
        r: f64,
        l: f64,
    },
    /// Either an explicit piece list or a rounded rectangle.
    CadProfile {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        height: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        corner_radius: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pieces: Option<Vec<Piece>>,
    },
}

impl ShapeSpec {
    pub fn circle(r: f64) -> Self {
        ShapeSpec::Circle { r }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        ShapeSpec::Ellipse { a, b }
    }

    pub fn stadium(r: f64, l: f64) -> Self {
        ShapeSpec::Stadium { r, l }
    }

    pub fn rounded_rectangle(width: f64, height: f64, corner_radius: f64) -> Self {
        ShapeSpec::CadProfile {
            width: Some(width),
            height: Some(height),
            corner_radius: Some(corner_radius),
            pieces: None,
        }
    }

    pub fn cad_default() -> Self {
        let (w, h, c) = CAD_DEFAULT;
        Self::rounded_rectangle(w, h, c)
    }

    pub fn cad_pieces(pieces: Vec<Piece>) -> Self {
        ShapeSpec::CadProfile { width: None, height: None, corner_radius: None, pieces: Some(pieces) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ShapeSpec::Circle { .. } => "circle",
            ShapeSpec::Ellipse { .. } => "ellipse",
            ShapeSpec::Stadium { .. } => "stadium",
            ShapeSpec::CadProfile { .. } => "cad_profile",
        }
    }
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        invalid(format!("{name} must be positive and finite, got {x}"))
    }
}

fn shoelace(base: &BaseCurve) -> f64 {
    let n = 4096;
    let l = base.length();
    let pts: Vec<V2> = (0..n).map(|i| base.eval(l * i as f64 / n as f64).0).collect();
    (0..n).map(|i| pts[i].perp(&pts[(i + 1) % n])).sum::<f64>() * 0.5
}

/// Builds the analytic curve for `spec`.
pub fn make_shape(spec: &ShapeSpec) -> Result<EmbeddedCurve> {
    let base = match spec {
        ShapeSpec::Circle { r } => {
            let r = positive("r", *r)?;
            BaseCurve::Profile(Profile::new(vec![Piece::Arc {
                center: [0.0, 0.0],
                radius: r,
                start_angle: 0.0,
                sweep: TAU,
            }])?)
        }
        ShapeSpec::Ellipse { a, b } => BaseCurve::Ellipse(Ellipse::new(positive("a", *a)?, positive("b", *b)?)),
        ShapeSpec::Stadium { r, l } => {
            BaseCurve::Profile(Profile::new(profile::stadium_pieces(positive("r", *r)?, positive("l", *l)?))?)
        }
        ShapeSpec::CadProfile { width, height, corner_radius, pieces } => match pieces {
            Some(p) => {
                if width.is_some() || height.is_some() || corner_radius.is_some() {
                    return invalid("cad_profile takes either pieces or width/height/corner_radius");
                }
                BaseCurve::Profile(Profile::new(p.clone())?)
            }
            None => {
                let (dw, dh, dc) = CAD_DEFAULT;
                let w = positive("width", width.unwrap_or(dw))?;
                let h = positive("height", height.unwrap_or(dh))?;
                let c = positive("corner_radius", corner_radius.unwrap_or(dc))?;
                if 2.0 * c >= w.min(h) {
                    return invalid(format!("corner radius {c} leaves no straight side in {w} x {h}"));
                }
                BaseCurve::Profile(Profile::new(profile::rounded_rectangle_pieces(w, h, c))?)
            }
        },
    };
    if shoelace(&base) <= 0.0 {
        return invalid("profile must be oriented counter-clockwise");
    }
    Ok(EmbeddedCurve::from_base(spec.clone(), base))
}

/// Buckets over arc length listing the patches whose influence may reach
/// each bucket, in insertion order.
#[derive(Debug, Clone)]
struct PatchIndex {
    width: f64,
    buckets: Vec<Vec<u32>>,
}

const BUCKETS: usize = 4096;

impl PatchIndex {
    fn new(length: f64) -> Self {
        PatchIndex { width: length / BUCKETS as f64, buckets: vec![Vec::new(); BUCKETS] }
    }

    fn insert(&mut self, k: usize, s: f64, reach: f64) {
        let n = BUCKETS as i64;
        let lo = ((s - reach) / self.width).floor() as i64;
        let hi = ((s + reach) / self.width).floor() as i64;
        if hi - lo + 1 >= n {
            self.buckets.iter_mut().for_each(|b| b.push(k as u32));
            return;
        }
        for i in lo..=hi {
            self.buckets[i.rem_euclid(n) as usize].push(k as u32);
        }
    }

    #[inline]
    fn query(&self, s: f64) -> &[u32] {
        let i = ((s / self.width) as usize).min(BUCKETS - 1);
        &self.buckets[i]
    }
}

/// A point of a curve with its velocity with respect to the base arc
/// length. Patches make the velocity slightly non-unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub s: f64,
    pub point: V2,
    pub velocity: V2,
}

impl CurvePoint {
    pub fn tangent(&self) -> V2 {
        self.velocity.normalize()
    }

    /// Left (inward) unit normal.
    pub fn normal(&self) -> V2 {
        let t = self.tangent();
        V2::new(-t.y, t.x)
    }
}

/// A closed C^{1,1} curve: an analytic base with patch overlays.
#[derive(Debug, Clone)]
pub struct EmbeddedCurve {
    spec: ShapeSpec,
    base: Arc<BaseCurve>,
    patches: Vec<Arc<AppliedPatch>>,
    index: PatchIndex,
}

impl EmbeddedCurve {
    fn from_base(spec: ShapeSpec, base: BaseCurve) -> Self {
        let index = PatchIndex::new(base.length());
        EmbeddedCurve { spec, base: Arc::new(base), patches: Vec::new(), index }
    }

    pub fn spec(&self) -> &ShapeSpec {
        &self.spec
    }

    pub fn base(&self) -> &BaseCurve {
        &self.base
    }

    /// Period of the arc-length parameter of the base shape.
    pub fn length(&self) -> f64 {
        self.base.length()
    }

    pub fn patches(&self) -> &[Arc<AppliedPatch>] {
        &self.patches
    }

    /// Evaluates the curve with every applied patch.
    #[inline]
    pub fn eval(&self, s: f64) -> CurvePoint {
        self.eval_prefix(s, self.patches.len())
    }

    /// Evaluates the curve with only the first `count` patches applied.
    pub fn eval_prefix(&self, s: f64, count: usize) -> CurvePoint {
        let s = s.rem_euclid(self.length());
        let (mut p, mut v, _) = self.base.eval(s);
        if count > 0 {
            for &k in self.index.query(s) {
                let k = k as usize;
                if k >= count {
                    break;
                }
                self.patches[k].apply(&mut p, &mut v);
            }
        }
        CurvePoint { s, point: p, velocity: v }
    }

    /// Signed curvature of the base shape.
    pub fn base_curvature(&self, s: f64) -> f64 {
        self.base.eval(s).2
    }

    /// The same curve with `patch` appended.
    pub fn with_patch(&self, patch: AppliedPatch) -> EmbeddedCurve {
        let mut out = self.clone();
        out.push_patch(patch);
        out
    }

    pub(crate) fn push_patch(&mut self, patch: AppliedPatch) {
        let k = self.patches.len();
        self.index.insert(k, patch.s_center, patch.param_reach());
        self.patches.push(Arc::new(patch));
    }

    /// The curve with only its first `count` patches.
    pub fn truncated(&self, count: usize) -> EmbeddedCurve {
        let mut out = EmbeddedCurve {
            spec: self.spec.clone(),
            base: self.base.clone(),
            patches: Vec::with_capacity(count),
            index: PatchIndex::new(self.length()),
        };
        for p in self.patches.iter().take(count) {
            let k = out.patches.len();
            out.index.insert(k, p.s_center, p.param_reach());
            out.patches.push(p.clone());
        }
        out
    }

    /// Parameter of the curve point closest to `p`, and its distance.
    pub fn locate(&self, p: &V2) -> (f64, f64) {
        let n = 4096;
        let l = self.length();
        let h = l / n as f64;
        let mut best = (0.0, f64::INFINITY);
        for i in 0..n {
            let s = h * i as f64;
            let d = (self.eval(s).point - p).norm();
            if d < best.1 {
                best = (s, d);
            }
        }
        // golden-section refinement on the bracketing cells
        let (mut a, mut b) = (best.0 - h, best.0 + h);
        let dist = |s: f64| (self.eval(s).point - p).norm();
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (dist(c), dist(d));
        for _ in 0..80 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = dist(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = dist(d);
            }
        }
        let s = 0.5 * (a + b);
        // Newton on the foot-point condition polishes the last digits
        let mut s = s;
        for _ in 0..3 {
            let q = self.eval(s);
            let t = q.tangent();
            let step = (q.point - p).dot(&t) / q.velocity.norm();
            s -= step;
        }
        (s.rem_euclid(l), dist(s))
    }
}

/// A curve sample with its unit tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub s: f64,
    pub point: V2,
    pub tangent: V2,
}

/// Arc-length uniform sample with consecutive gaps at most `spacing`.
pub fn sample_manifold(curve: &EmbeddedCurve, spacing: f64) -> Result<Vec<CurveSample>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return invalid(format!("spacing must be positive, got {spacing}"));
    }
    let l = curve.length();
    let mut n = ((l / spacing).ceil() as usize).max(3);
    for _ in 0..8 {
        let out = sample_count(curve, n);
        let gap = (0..n).map(|i| (out[(i + 1) % n].point - out[i].point).norm()).fold(0.0, f64::max);
        if gap <= spacing {
            return Ok(out);
        }
        n = (n as f64 * gap / spacing * 1.001).ceil() as usize + 1;
    }
    Err(Error::Resolution(format!("could not reach sample spacing {spacing}")))
}

/// `n` samples at uniform base arc length.
pub fn sample_count(curve: &EmbeddedCurve, n: usize) -> Vec<CurveSample> {
    let l = curve.length();
    crate::par::map_indexed(crate::par::Execution::default(), n, |i| {
        let q = curve.eval(l * i as f64 / n as f64);
        CurveSample { s: q.s, point: q.point, tangent: q.tangent() }
    })
}

/// Writes `x,y,tx,ty` rows.
pub fn write_samples_csv<W: Write>(samples: &[CurveSample], mut out: W) -> std::io::Result<()> {
    writeln!(out, "x,y,tx,ty")?;
    for c in samples {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            c.point.x, c.point.y, c.tangent.x, c.tangent.y
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_parametrization() {
        let c = make_shape(&ShapeSpec::circle(1.0)).unwrap();
        let q = c.eval(0.0);
        assert!((q.point - V2::new(1.0, 0.0)).norm() < 1e-15);
        assert!((q.tangent() - V2::new(0.0, 1.0)).norm() < 1e-15);
        assert!((q.normal() - V2::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn stadium_curvature_by_region() {
        let c = make_shape(&ShapeSpec::stadium(1.0, 2.0)).unwrap();
        assert_eq!(c.base_curvature(1.0), 0.0);
        assert_eq!(c.base_curvature(2.0 + 0.5 * PI), 1.0);
        assert_eq!(c.base_curvature(2.0 + PI + 1.0), 0.0);
    }

    #[test]
    fn invalid_shapes_are_rejected() {
        assert!(make_shape(&ShapeSpec::circle(0.0)).is_err());
        assert!(make_shape(&ShapeSpec::stadium(1.0, -1.0)).is_err());
        assert!(make_shape(&ShapeSpec::rounded_rectangle(1.0, 1.0, 0.5)).is_err());
        // clockwise circle
        let cw = vec![Piece::Arc { center: [0.0, 0.0], radius: 1.0, start_angle: 0.0, sweep: -TAU }];
        assert!(make_shape(&ShapeSpec::cad_pieces(cw)).is_err());
        let mut bad = profile::rounded_rectangle_pieces(2.0, 1.6, 0.5);
        bad[1] = Piece::Line { start: [0.5, -0.8], end: [1.0, -0.3] };
        let err = make_shape(&ShapeSpec::cad_pieces(bad)).unwrap_err();
        assert!(err.to_string().contains("junction 0"), "{err}");
    }

    #[test]
    fn spec_json_round_trip() {
        for spec in [
            ShapeSpec::circle(1.5),
            ShapeSpec::ellipse(2.0, 1.0),
            ShapeSpec::stadium(1.0, 2.0),
            ShapeSpec::cad_default(),
            ShapeSpec::cad_pieces(profile::stadium_pieces(1.0, 1.0)),
        ] {
            let text = serde_json::to_string(&spec).unwrap();
            let back: ShapeSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, spec);
        }
        let s: ShapeSpec = serde_json::from_str(r#"{"kind":"stadium","r":1,"l":2}"#).unwrap();
        assert_eq!(s, ShapeSpec::stadium(1.0, 2.0));
    }

    #[test]
    fn sample_examples() {
        let c = make_shape(&ShapeSpec::circle(1.0)).unwrap();
        let s = sample_manifold(&c, PI / 2.0).unwrap();
        assert!(s.len() >= 4);
        for q in &s {
            assert!((q.point.norm() - 1.0).abs() < 1e-9);
        }
        let st = make_shape(&ShapeSpec::stadium(1.0, 2.0)).unwrap();
        let s = sample_manifold(&st, 0.01).unwrap();
        let n = s.len();
        let poly: f64 = (0..n).map(|i| (s[(i + 1) % n].point - s[i].point).norm()).sum();
        assert!((poly / (TAU + 4.0) - 1.0).abs() < 1e-3);
        for w in s.windows(2) {
            assert!((w[1].point - w[0].point).norm() <= 0.01);
        }
        assert!(sample_manifold(&st, 0.0).is_err());
    }

    #[test]
    fn locate_recovers_parameter() {
        let c = make_shape(&ShapeSpec::ellipse(2.0, 1.0)).unwrap();
        for &s in &[0.0, 0.7, 3.3, 9.0] {
            let p = c.eval(s).point;
            let (t, d) = c.locate(&p);
            assert!(d < 1e-12);
            let diff = (t - s.rem_euclid(c.length())).abs();
            assert!(diff.min(c.length() - diff) < 1e-9, "{s} {t}");
        }
    }

    #[test]
    fn csv_has_header() {
        let c = make_shape(&ShapeSpec::circle(1.0)).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&sample_count(&c, 4), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,tx,ty\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
