//! Compactly supported smoothing kernels and convolution.
//!
//! The kernel is the normalized radial bump `c * exp(-1/(1 - (x/sigma)^2))`.
//! Convolutions are evaluated by quadrature over the kernel support; the
//! tabulated route in [`table`] integrates piecewise cubics cell by cell so
//! the result stays smooth in the evaluation point.

pub mod piecewise;
pub mod quad;
pub mod table;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::par::{self, Execution};

pub use piecewise::PiecewiseQuadratic;
pub use table::HermiteTable;

/// A closed interval `[a, b]` of tangent coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain1D {
    pub a: f64,
    pub b: f64,
}

impl Domain1D {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return invalid(format!("degenerate interval [{a}, {b}]"));
        }
        Ok(Domain1D { a, b })
    }

    /// `[-r, r]`.
    pub fn symmetric(r: f64) -> Result<Self> {
        Self::new(-r, r)
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * self.width();
        x >= self.a - slack && x <= self.b + slack
    }

    pub fn contains_domain(&self, other: &Domain1D) -> bool {
        self.contains(other.a) && self.contains(other.b)
    }

    /// Uniform grid including both endpoints with spacing at most `step`.
    pub fn grid(&self, step: f64) -> Vec<f64> {
        let n = ((self.width() / step).ceil() as usize).max(1);
        let h = self.width() / n as f64;
        (0..=n).map(|i| if i == n { self.b } else { self.a + h * i as f64 }).collect()
    }
}

/// Points whose `sigma`-ball stays inside `u`; `None` when nothing is left.
pub fn shrink_domain(u: &Domain1D, sigma: f64) -> Option<Domain1D> {
    let (a, b) = (u.a + sigma, u.b - sigma);
    if a < b {
        Some(Domain1D { a, b })
    } else {
        None
    }
}

/// Which convolution to evaluate: of the function or of its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivOrder {
    Value,
    First,
}

impl DerivOrder {
    pub fn from_k(k: u8) -> Result<Self> {
        match k {
            0 => Ok(DerivOrder::Value),
            1 => Ok(DerivOrder::First),
            _ => invalid(format!("derivative order {k} is not supported")),
        }
    }
}

/// `int_{-1}^{1} exp(-1/(1-x^2)) dx`.
pub fn bump_integral() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| quad::adaptive_simpson(-1.0, 1.0, 1e-15, &unit_bump))
}

/// Unnormalized bump on `(-1, 1)`.
pub fn unit_bump(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Normalized bump kernel with support radius `sigma` in one dimension.
///
/// Carries a precomputed quadrature rule on graded panels of
/// `[-sigma, sigma]` used by tabulated convolutions.
#[derive(Debug, Clone)]
pub struct BumpKernel {
    sigma: f64,
    scale: f64,
    pub(crate) rule: table::PanelRule,
}

impl PartialEq for BumpKernel {
    fn eq(&self, other: &Self) -> bool {
        self.sigma == other.sigma
    }
}

impl BumpKernel {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        1
    }

    /// The normalization constant `c`.
    pub fn normalization(&self) -> f64 {
        self.scale
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.scale * unit_bump(x / self.sigma)
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        let t = x / self.sigma;
        let s = 1.0 - t * t;
        if s <= 0.0 {
            return 0.0;
        }
        self.scale * (-1.0 / s).exp() * (-2.0 * t / (s * s)) / self.sigma
    }
}

/// Builds the normalized bump with support radius `sigma`.
pub fn make_bump_kernel(sigma: f64, dim: usize) -> Result<BumpKernel> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return invalid(format!("support radius must be positive, got {sigma}"));
    }
    if dim != 1 {
        return invalid(format!("only one-dimensional kernels are implemented, got n = {dim}"));
    }
    let scale = 1.0 / (sigma * bump_integral());
    let rule = table::PanelRule::new(sigma, scale);
    Ok(BumpKernel { sigma, scale, rule })
}

/// A real function on an interval with a derivative evaluator.
pub trait GraphFn: Sync {
    fn value(&self, y: f64) -> f64;
    fn deriv(&self, y: f64) -> f64;
    fn domain(&self) -> Domain1D;

    /// `(phi * g)(x)` and `(phi * Dg)(x)`; `x` is assumed to lie in the
    /// shrunk domain. The default integrates by adaptive Simpson.
    fn smoothed_pair(&self, kernel: &BumpKernel, x: f64) -> (f64, f64) {
        (
            smooth_by_quadrature(self, kernel, x, DerivOrder::Value),
            smooth_by_quadrature(self, kernel, x, DerivOrder::First),
        )
    }

    fn smoothed(&self, kernel: &BumpKernel, x: f64, order: DerivOrder) -> f64 {
        smooth_by_quadrature(self, kernel, x, order)
    }
}

/// Absolute tolerance of the adaptive convolution quadrature.
pub const CONVOLUTION_TOL: f64 = 1e-10;

/// Adaptive Simpson on `[-sigma, sigma]`; the integrand vanishes to all
/// orders at both ends.
pub fn smooth_by_quadrature<G: GraphFn + ?Sized>(g: &G, kernel: &BumpKernel, x: f64, order: DerivOrder) -> f64 {
    let s = kernel.sigma();
    match order {
        DerivOrder::Value => quad::adaptive_simpson(-s, s, CONVOLUTION_TOL, &|u| kernel.value(u) * g.value(x - u)),
        DerivOrder::First => quad::adaptive_simpson(-s, s, CONVOLUTION_TOL, &|u| kernel.value(u) * g.deriv(x - u)),
    }
}

/// Closure-backed [`GraphFn`].
pub struct FnGraph<F, D> {
    pub f: F,
    pub df: D,
    pub domain: Domain1D,
}

impl<F, D> FnGraph<F, D>
where
    F: Fn(f64) -> f64 + Sync,
    D: Fn(f64) -> f64 + Sync,
{
    pub fn new(f: F, df: D, domain: Domain1D) -> Self {
        FnGraph { f, df, domain }
    }
}

impl<F, D> GraphFn for FnGraph<F, D>
where
    F: Fn(f64) -> f64 + Sync,
    D: Fn(f64) -> f64 + Sync,
{
    fn value(&self, y: f64) -> f64 {
        (self.f)(y)
    }
    fn deriv(&self, y: f64) -> f64 {
        (self.df)(y)
    }
    fn domain(&self) -> Domain1D {
        self.domain
    }
}

fn check_in_shrunk(domain: &Domain1D, sigma: f64, x: f64) -> Result<()> {
    match shrink_domain(domain, sigma) {
        Some(inner) if inner.contains(x) => Ok(()),
        _ => Err(Error::Domain(format!(
            "x = {x} is outside the domain [{}, {}] shrunk by sigma = {sigma}",
            domain.a, domain.b
        ))),
    }
}

/// `(phi * g)(x)` for `order = Value`, `(phi * Dg)(x)` for `order = First`.
pub fn convolve<G: GraphFn + ?Sized>(g: &G, kernel: &BumpKernel, x: f64, order: DerivOrder) -> Result<f64> {
    check_in_shrunk(&g.domain(), kernel.sigma(), x)?;
    Ok(g.smoothed(kernel, x, order))
}

/// Sup-norm deviation between a function and its smoothing on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub value: f64,
    pub at: f64,
    pub grid_step: f64,
}

fn check_inner(g: &(impl GraphFn + ?Sized), kernel: &BumpKernel, c: &Domain1D) -> Result<()> {
    let u = g.domain();
    match shrink_domain(&u, kernel.sigma()) {
        Some(inner) if inner.contains_domain(c) => Ok(()),
        _ => Err(Error::Domain(format!(
            "[{}, {}] is not inside [{}, {}] shrunk by {}",
            c.a,
            c.b,
            u.a,
            u.b,
            kernel.sigma()
        ))),
    }
}

#[inline]
fn pointwise_deviation<G: GraphFn + ?Sized>(g: &G, kernel: &BumpKernel, x: f64, order: DerivOrder) -> f64 {
    match order {
        DerivOrder::Value => (g.smoothed(kernel, x, DerivOrder::Value) - g.value(x)).abs(),
        DerivOrder::First => {
            let (s0, s1) = g.smoothed_pair(kernel, x);
            (s0 - g.value(x)).abs().max((s1 - g.deriv(x)).abs())
        }
    }
}

/// `max_x max(|phi*g - g|, k=1: |phi*Dg - Dg|)` over a uniform grid of `c`.
pub fn sup_deviation_ck<G: GraphFn + ?Sized>(
    g: &G,
    kernel: &BumpKernel,
    c: &Domain1D,
    order: DerivOrder,
    grid_step: f64,
) -> Result<Deviation> {
    sup_deviation_ck_with(Execution::default(), g, kernel, c, order, grid_step)
}

pub fn sup_deviation_ck_with<G: GraphFn + ?Sized>(
    exec: Execution,
    g: &G,
    kernel: &BumpKernel,
    c: &Domain1D,
    order: DerivOrder,
    grid_step: f64,
) -> Result<Deviation> {
    if !(grid_step > 0.0) {
        return invalid("grid step must be positive");
    }
    check_inner(g, kernel, c)?;
    let grid = c.grid(grid_step);
    let best = par::max_by_index(exec, grid.len(), |i| {
        Some((pointwise_deviation(g, kernel, grid[i], order), grid[i]))
    })
    .expect("grid is never empty");
    Ok(Deviation { value: best.value, at: best.payload, grid_step: c.width() / (grid.len() - 1) as f64 })
}

/// Whether the grid deviation exceeds `threshold`; stops at the first hit.
fn deviation_exceeds<G: GraphFn + ?Sized>(
    exec: Execution,
    g: &G,
    kernel: &BumpKernel,
    c: &Domain1D,
    order: DerivOrder,
    grid_step: f64,
    threshold: f64,
) -> bool {
    let n = ((c.width() / grid_step).ceil() as usize).max(1);
    let h = c.width() / n as f64;
    let at = |i: usize| if i == n { c.b } else { c.a + h * i as f64 };
    // coarse-to-fine passes find violations early
    let mut stride = (n + 1).next_power_of_two();
    let mut first = true;
    while stride >= 1 {
        let count = n / stride + 1;
        let hit = par::any_index(exec, count, |j| {
            let fresh = first || j % 2 == 1;
            fresh && pointwise_deviation(g, kernel, at(j * stride), order) > threshold
        });
        if hit {
            return true;
        }
        first = false;
        stride /= 2;
    }
    false
}

/// Largest grid scanned by [`find_support_radius`].
pub const MAX_SCAN_POINTS: usize = 1 << 22;

/// Number of grid steps per support radius used in deviation scans.
pub const STEPS_PER_SIGMA: f64 = 50.0;

/// Largest support radius on the halving ladder `cap, cap/2, ...` whose
/// kernel meets `sup_deviation_ck <= rho` on `c`, where `cap` is the largest
/// radius keeping `c` inside the shrunk domain.
pub fn find_support_radius<G: GraphFn + ?Sized>(g: &G, c: &Domain1D, rho: f64, order: DerivOrder) -> Result<f64> {
    find_support_radius_with(Execution::default(), g, c, rho, order)
}

pub fn find_support_radius_with<G: GraphFn + ?Sized>(
    exec: Execution,
    g: &G,
    c: &Domain1D,
    rho: f64,
    order: DerivOrder,
) -> Result<f64> {
    if !(rho > 0.0) {
        return invalid(format!("deviation target must be positive, got {rho}"));
    }
    let u = g.domain();
    let cap = (c.a - u.a).min(u.b - c.b);
    if !(cap > 0.0) {
        return Err(Error::Domain(format!(
            "[{}, {}] is not compactly inside [{}, {}]",
            c.a, c.b, u.a, u.b
        )));
    }
    let sigma_min = 1e-9 * c.width();
    let mut sigma = cap;
    while sigma >= sigma_min {
        if c.width() / (sigma / STEPS_PER_SIGMA) > MAX_SCAN_POINTS as f64 {
            return Err(Error::Convergence(format!(
                "no support radius down to {sigma:e} reaches deviation {rho:e} (scan grid limit)"
            )));
        }
        let kernel = make_bump_kernel(sigma, 1)?;
        if !deviation_exceeds(exec, g, &kernel, c, order, sigma / STEPS_PER_SIGMA, rho) {
            return Ok(sigma);
        }
        sigma *= 0.5;
    }
    Err(Error::Convergence(format!(
        "no support radius down to {sigma_min:e} reaches deviation {rho:e}"
    )))
}
