//! Grid checkers for the estimates behind the smoothing construction.
//!
//! Every checker returns a [`CheckResult`]; `passed` is always recomputed
//! from `measured`, `bound` and `tolerance`.

pub mod pipeline;
pub mod probe;
pub mod suite;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{shrink_domain, BumpKernel, DerivOrder, Domain1D, GraphFn};
use crate::manifold::V2;
use crate::par::{self, Execution};
use crate::partition::PartitionFn;
use crate::smoothing::blend_function;

pub use pipeline::{check_main_theorem, verify_smoothing_run, MainTheoremCheck, PipelineChecks};
pub use probe::{fourth_difference_probe, ProbeResult};
pub use suite::{run_suite, Suite, SuiteConfig, SuiteOutcome};

/// Tolerance of the Lipschitz checks.
pub const LIPSCHITZ_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    /// `bound - measured`.
    pub slack: f64,
    pub tolerance: f64,
    pub instance: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64, instance: impl Into<String>) -> Self {
        let mut out = CheckResult {
            name: name.into(),
            passed: false,
            measured,
            bound,
            slack: bound - measured,
            tolerance,
            instance: instance.into(),
        };
        out.passed = out.verdict();
        out
    }

    /// `measured <= bound + tolerance`, with NaN failing.
    pub fn verdict(&self) -> bool {
        self.measured <= self.bound + self.tolerance
    }
}

/// Largest difference quotient of `g` over `n` uniform cells of `c`. On a
/// line the largest quotient over all grid pairs is attained by neighbours.
pub fn lipschitz_of(g: impl Fn(f64) -> f64 + Sync, c: &Domain1D, n: usize) -> f64 {
    lipschitz_of_with(Execution::default(), g, c, n)
}

pub fn lipschitz_of_with(exec: Execution, g: impl Fn(f64) -> f64 + Sync, c: &Domain1D, n: usize) -> f64 {
    let n = n.max(1);
    let h = c.width() / n as f64;
    let at = |i: usize| if i == n { c.b } else { c.a + h * i as f64 };
    let vals = par::map_indexed(exec, n + 1, |i| g(at(i)));
    (0..n).map(|i| (vals[i + 1] - vals[i]).abs() / (at(i + 1) - at(i))).fold(0.0, f64::max)
}

/// Lipschitz estimate of `g` (`order = Value`) or `Dg` (`order = First`).
pub fn estimate_lipschitz<G: GraphFn + ?Sized>(g: &G, order: DerivOrder, c: &Domain1D, n: usize) -> f64 {
    match order {
        DerivOrder::Value => lipschitz_of(|y| g.value(y), c, n),
        DerivOrder::First => lipschitz_of(|y| g.deriv(y), c, n),
    }
}

fn order_tag(order: DerivOrder) -> u8 {
    match order {
        DerivOrder::Value => 0,
        DerivOrder::First => 1,
    }
}

/// `phi * g` is `L_g`-Lipschitz (order 0) and `D(phi * g)` is
/// `L_Dg`-Lipschitz (order 1), measured on the shrunk domain.
pub fn check_convolution_lipschitz<G: GraphFn + ?Sized>(
    g: &G,
    l_bound: f64,
    kernel: &BumpKernel,
    order: DerivOrder,
    n: usize,
) -> Result<CheckResult> {
    let u = g.domain();
    let c = shrink_domain(&u, kernel.sigma())
        .ok_or_else(|| Error::Domain(format!("support {} does not fit in the domain", kernel.sigma())))?;
    let measured = match order {
        DerivOrder::Value => lipschitz_of(|y| g.smoothed_pair(kernel, y).0, &c, n),
        DerivOrder::First => lipschitz_of(|y| g.smoothed_pair(kernel, y).1, &c, n),
    };
    Ok(CheckResult::new(
        format!("convolution_lipschitz_k{}", order_tag(order)),
        measured,
        l_bound,
        LIPSCHITZ_TOL,
        format!("sigma={:e},grid={n}", kernel.sigma()),
    ))
}

/// Lipschitz constant of the blend `F` (order 0, bound `L_psi rho + L_f`) or
/// of `DF` (order 1, bound `3 L_{psi,Dpsi} rho + L_Df`) on the blend region.
pub fn check_blend_lipschitz<G: GraphFn + ?Sized>(
    f: &G,
    l_f: f64,
    l_df: f64,
    psi: &PartitionFn,
    rho: f64,
    order: DerivOrder,
    n: usize,
) -> Result<CheckResult> {
    let b = blend_function(f, psi, rho, order).map_err(|e| match e {
        Error::InvalidInput(m) => Error::InvalidInput(m),
        other => Error::Setup(format!("no kernel meets deviation {rho:e}: {other}")),
    })?;
    if b.deviation > rho {
        return Err(Error::Setup(format!("kernel deviation {:e} exceeds {rho:e}", b.deviation)));
    }
    let c = b.region();
    let (measured, bound) = match order {
        DerivOrder::Value => (lipschitz_of(|y| b.value(y), &c, n), psi.l_psi * rho + l_f),
        DerivOrder::First => (lipschitz_of(|y| b.deriv(y), &c, n), 3.0 * psi.l_combined * rho + l_df),
    };
    Ok(CheckResult::new(
        format!("blend_lipschitz_k{}", order_tag(order)),
        measured,
        bound,
        LIPSCHITZ_TOL,
        format!("rho={rho:e},sigma={:e},grid={n}", b.kernel.sigma()),
    ))
}

/// `d(p2, Tan_{p1} G_F) <= (L/2) |p2 - p1|^2` over all pairs of an
/// `n`-point grid of `c`, with `big(y) = (F(y), DF(y))`.
pub fn check_tangent_distance_bound(
    big: impl Fn(f64) -> (f64, f64) + Sync,
    c: &Domain1D,
    l_df_bound: f64,
    n: usize,
) -> CheckResult {
    let grid = c.grid(c.width() / (n.max(2) - 1) as f64);
    let vals: Vec<(f64, f64)> = grid.iter().map(|&y| big(y)).collect();
    let worst = par::max_by_index(Execution::default(), grid.len(), |i| {
        let (f1, d1) = vals[i];
        let norm = (1.0 + d1 * d1).sqrt();
        (0..grid.len())
            .filter(|&j| j != i)
            .map(|j| {
                let dy = grid[j] - grid[i];
                let df = vals[j].0 - f1;
                let dist = (df - d1 * dy).abs() / norm;
                dist / (dy * dy + df * df)
            })
            .reduce(f64::max)
            .map(|r| (r, ()))
    })
    .map_or(0.0, |e| e.value);
    CheckResult::new(
        "tangent_distance",
        worst,
        0.5 * l_df_bound,
        LIPSCHITZ_TOL,
        format!("pairs={},L={l_df_bound:e}", grid.len() * (grid.len() - 1)),
    )
}

/// Angle between the tangent lines of the graphs of `f` and `F` at the same
/// abscissa, against `asin(L rho + rho)`.
pub fn check_angle_bound(
    df: impl Fn(f64) -> f64 + Sync,
    big_df: impl Fn(f64) -> f64 + Sync,
    l_combined: f64,
    rho: f64,
    c: &Domain1D,
    n: usize,
) -> Result<CheckResult> {
    if !(rho >= 0.0) || rho > 1.0 / (l_combined + 1.0) {
        return invalid(format!("need rho <= 1/(L + 1), got rho = {rho}, L = {l_combined}"));
    }
    let grid = c.grid(c.width() / (n.max(2) - 1) as f64);
    let measured = par::max_by_index(Execution::default(), grid.len(), |i| {
        Some((line_angle(df(grid[i]), big_df(grid[i])), ()))
    })
    .map_or(0.0, |e| e.value);
    let bound = (l_combined * rho + rho).min(1.0).asin();
    Ok(CheckResult::new("angle", measured, bound, 1e-12, format!("rho={rho:e},L={l_combined:e},grid={}", grid.len())))
}

/// Angle between the lines of slopes `a` and `b`.
pub fn line_angle(a: f64, b: f64) -> f64 {
    let (u, v) = (V2::new(1.0, a).normalize(), V2::new(1.0, b).normalize());
    let cos = u.dot(&v).abs();
    let sin = (u.x * v.y - u.y * v.x).abs();
    sin.atan2(cos)
}

/// Hausdorff distance between the tangent segments of half-length `3R` at
/// `(y, f(y))` and `(y, F(y))`, each sampled at `n` points, against
/// `rho (6 R L + 6 R + 1)`. `small` and `big` are `(value, slope)` at `y`.
pub fn check_hausdorff_bound(
    small: (f64, f64),
    big: (f64, f64),
    y: f64,
    r: f64,
    rho: f64,
    l_combined: f64,
    n: usize,
) -> Result<CheckResult> {
    if !(rho >= 0.0) || rho > 1.0 / (l_combined + 1.0) {
        return invalid(format!("need rho <= 1/(L + 1), got rho = {rho}, L = {l_combined}"));
    }
    let a = Segment::tangent(y, small, 3.0 * r, n);
    let b = Segment::tangent(y, big, 3.0 * r, n);
    let measured = a.directed_to(&b).max(b.directed_to(&a));
    let bound = rho * (6.0 * r * l_combined + 6.0 * r + 1.0);
    Ok(CheckResult::new(
        "hausdorff",
        measured,
        bound,
        1e-12,
        format!("y={y:e},R={r},rho={rho:e},samples={n}"),
    ))
}

/// `n` equally spaced samples of a segment.
#[derive(Debug, Clone, Copy)]
struct Segment {
    start: V2,
    step: V2,
    n: usize,
}

impl Segment {
    fn tangent(y: f64, (v, d): (f64, f64), half: f64, n: usize) -> Self {
        let n = n.max(2);
        let dir = V2::new(1.0, d).normalize();
        let start = V2::new(y, v) - dir * half;
        Segment { start, step: dir * (2.0 * half / (n - 1) as f64), n }
    }

    fn at(&self, i: usize) -> V2 {
        self.start + self.step * i as f64
    }

    /// Distance from `p` to the nearest sample, located by projection.
    fn nearest(&self, p: &V2) -> f64 {
        let t = (p - self.start).dot(&self.step) / self.step.norm_squared();
        let k = t.round().clamp(0.0, (self.n - 1) as f64) as usize;
        (k.saturating_sub(1)..=(k + 1).min(self.n - 1))
            .map(|i| (p - self.at(i)).norm())
            .fold(f64::INFINITY, f64::min)
    }

    fn directed_to(&self, other: &Segment) -> f64 {
        (0..self.n).map(|i| other.nearest(&self.at(i))).fold(0.0, f64::max)
    }
}

/// `d(q', Tan_{p'}) <= |q'-p'|^2/(2R) + rho^2/(2R) + rho (6 R L + 6 R + 4)`
/// for a point `p'` with unit tangent `t` and a far point `q'`.
pub fn check_far_point_distance(p: &V2, t: &V2, q: &V2, r: f64, rho: f64, l_combined: f64) -> Result<CheckResult> {
    if !(rho >= 0.0) || rho > 1.0 / (l_combined + 1.0) {
        return invalid(format!("need rho <= 1/(L + 1), got rho = {rho}, L = {l_combined}"));
    }
    if !(r > 0.0) {
        return invalid(format!("R must be positive, got {r}"));
    }
    let d = q - p;
    let t = t.normalize();
    let measured = (d - t * d.dot(&t)).norm();
    let bound = d.norm_squared() / (2.0 * r) + rho * rho / (2.0 * r) + rho * (6.0 * r * l_combined + 6.0 * r + 4.0);
    Ok(CheckResult::new(
        "far_point",
        measured,
        bound,
        1e-12,
        format!("|q-p|={:e},R={r},rho={rho:e}", d.norm()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{make_bump_kernel, FnGraph, PiecewiseQuadratic};
    use crate::partition::{make_psi0, rescale_psi};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit() -> Domain1D {
        Domain1D::symmetric(1.0).unwrap()
    }

    #[test]
    fn lipschitz_examples() {
        assert!((lipschitz_of(|x| 3.0 * x, &unit(), 1000) - 3.0).abs() < 1e-12);
        assert!((lipschitz_of(f64::abs, &unit(), 1001) - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut nodes: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.9..0.9)).collect();
            nodes.push(-1.0);
            nodes.push(1.0);
            nodes.sort_by(f64::total_cmp);
            let vals: Vec<f64> = nodes.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = PiecewiseQuadratic::linear(nodes, &vals).unwrap();
            // slope bookkeeping: the steepest piece is wider than a few cells
            let est = estimate_lipschitz(&g, DerivOrder::Value, &unit(), 100_000);
            let m = g.lipschitz();
            let widest_steep = g
                .nodes()
                .windows(2)
                .filter(|w| ((g.eval(w[1] - 1e-15).0 - g.eval(w[0]).0) / (w[1] - w[0]) - m).abs() < 1e-9)
                .map(|w| w[1] - w[0])
                .fold(0.0, f64::max);
            if widest_steep > 1e-3 {
                assert!((est - m).abs() < 1e-9, "{est} {m}");
            }
            assert!(est <= m + 1e-9);
        }
    }

    #[test]
    fn convolution_examples() {
        let abs = PiecewiseQuadratic::linear(vec![-1.0, 0.0, 1.0], &[1.0, 0.0, 1.0]).unwrap();
        let k = make_bump_kernel(0.2, 1).unwrap();
        let r = check_convolution_lipschitz(&abs, 1.0, &k, DerivOrder::Value, 1000).unwrap();
        assert!(r.passed && r.measured > 0.99, "{r:?}");
        // Dg = clamp(x, -1, 1) on [-2, 2]
        let g = PiecewiseQuadratic::with_linear_derivative(vec![-2.0, -1.0, 1.0, 2.0], &[-1.0, -1.0, 1.0, 1.0], 0.0)
            .unwrap();
        let r = check_convolution_lipschitz(&g, 1.0, &k, DerivOrder::First, 1000).unwrap();
        assert!(r.passed, "{r:?}");
    }

    fn psi() -> PartitionFn {
        rescale_psi(&make_psi0(), 2.5, 8.0).unwrap()
    }

    #[test]
    fn blend_examples() {
        let zero = PiecewiseQuadratic::linear(vec![-2.0, 2.0], &[0.0, 0.0]).unwrap();
        for order in [DerivOrder::Value, DerivOrder::First] {
            let r = check_blend_lipschitz(&zero, 0.0, 0.0, &psi(), 1e-3, order, 1000).unwrap();
            assert!(r.passed && r.measured == 0.0);
        }
        let abs = PiecewiseQuadratic::linear(vec![-2.0, 0.0, 2.0], &[2.0, 0.0, 2.0]).unwrap();
        let r = check_blend_lipschitz(&abs, 1.0, 0.0, &psi(), 1e-3, DerivOrder::Value, 10_000).unwrap();
        assert!(r.passed && r.slack > 0.0, "{r:?}");
        // a C^{1,1} function whose steepest curvature sits in the plateau
        let f = PiecewiseQuadratic::with_linear_derivative(
            vec![-2.0, -0.3, 0.0, 0.2, 2.0],
            &[0.0, 0.3, -0.6, 0.1, 0.4],
            0.0,
        )
        .unwrap();
        let l_df = f.derivative_lipschitz();
        for rho in [1e-2, 1e-3, 1e-4] {
            let r = check_blend_lipschitz(&f, f.lipschitz(), l_df, &psi(), rho, DerivOrder::First, 20_000).unwrap();
            assert!(r.passed, "{r:?}");
            assert!((r.measured - l_df).abs() <= 3.0 * psi().l_combined * rho + 1e-6, "{r:?}");
        }
    }

    #[test]
    fn unmet_target_is_a_setup_error() {
        let abs = FnGraph::new(|x: f64| x.abs(), |x: f64| x.signum(), Domain1D::symmetric(2.0).unwrap());
        let e = check_blend_lipschitz(&abs, 1.0, 0.0, &psi(), 1e-3, DerivOrder::First, 100).unwrap_err();
        assert!(matches!(e, Error::Setup(_)), "{e:?}");
    }

    #[test]
    fn tangent_distance_examples() {
        let c = Domain1D::new(0.0, 1.0).unwrap();
        let r = check_tangent_distance_bound(|y| (0.5 * y * y, y), &c, 1.0, 2);
        assert!((r.measured - 0.4).abs() < 1e-15 && r.passed);
        let r = check_tangent_distance_bound(|y| (2.0 * y - 1.0, 2.0), &c, 0.0, 50);
        assert!(r.measured < 1e-12 && r.passed);
        let r = check_tangent_distance_bound(|y| (y * y, 2.0 * y), &c, 1.0, 50);
        assert!(!r.passed);
    }

    #[test]
    fn angle_examples() {
        let c = unit();
        let delta = 0.3;
        let r = check_angle_bound(|_| 0.0, |_| delta, 0.0, delta, &c, 10).unwrap();
        assert!((r.measured - delta.atan()).abs() < 1e-15);
        assert!((r.bound - delta.asin()).abs() < 1e-15 && r.passed);
        let r = check_angle_bound(|y| y, |y| y, 5.0, 0.01, &c, 100).unwrap();
        assert_eq!(r.measured, 0.0);
        assert!(check_angle_bound(|y| y, |y| y, 5.0, 0.2, &c, 10).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let r = check_hausdorff_bound((0.3, 0.5), (0.3, 0.5), 0.1, 1.0, 1e-3, 10.0, 1000).unwrap();
        assert_eq!(r.measured, 0.0);
        let rho = 1e-3;
        for slope in [0.0, 0.7, -2.0] {
            let r = check_hausdorff_bound((0.2, slope), (0.2 + rho, slope), 0.0, 1.0, rho, 10.0, 1000).unwrap();
            assert!((r.measured - rho).abs() < 1e-12, "{r:?}");
            assert!(r.passed);
        }
    }

    #[test]
    fn segment_search_matches_brute_force() {
        let a = Segment::tangent(0.1, (0.2, 0.4), 3.0, 300);
        let b = Segment::tangent(0.1, (0.25, 0.55), 3.0, 300);
        let pa: Vec<V2> = (0..a.n).map(|i| a.at(i)).collect();
        let pb: Vec<V2> = (0..b.n).map(|i| b.at(i)).collect();
        let brute = crate::linalg_geom::hausdorff_distance_sampled(&pa, &pb).unwrap();
        let fast = a.directed_to(&b).max(b.directed_to(&a));
        assert!((brute - fast).abs() < 1e-15);
    }

    #[test]
    fn far_point_on_circle() {
        let (p, t) = (V2::new(1.0, 0.0), V2::new(0.0, 1.0));
        let q = V2::new(0.6, 0.8);
        let r = check_far_point_distance(&p, &t, &q, 1.0, 0.0, 3.0).unwrap();
        let exact = (q - p).norm_squared() / 2.0;
        assert!((r.measured - exact).abs() < 1e-15 && r.passed);
        assert!((r.bound - exact).abs() < 1e-15);
    }

    #[test]
    fn bounds_grow_with_rho() {
        let mut prev = [0.0f64; 3];
        for i in 0..30 {
            let rho = 1e-6 * 1.4f64.powi(i);
            let a = check_angle_bound(|_| 0.0, |_| 0.0, 2.0, rho, &unit(), 2).unwrap().bound;
            let h = check_hausdorff_bound((0.0, 0.0), (0.0, 0.0), 0.0, 1.0, rho, 2.0, 2).unwrap().bound;
            let f = check_far_point_distance(&V2::zeros(), &V2::x(), &V2::y(), 1.0, rho, 2.0).unwrap().bound;
            for (p, v) in prev.iter_mut().zip([a, h, f]) {
                assert!(v >= *p);
                *p = v;
            }
        }
    }
}
