//! Adaptive cubic Hermite tables of a function and its derivative.
//!
//! A table stores `g` and `Dg` at refined nodes. Its convolution with a bump
//! is integrated cell by cell: the sub-intervals are the table cells cut by
//! a fixed set of kernel panels, so the integrand is smooth on each piece.

use crate::error::{invalid, Error, Result};

use super::{quad, BumpKernel, Domain1D, GraphFn};

/// Kernel panels per convolution.
pub const KERNEL_PANELS: usize = 16;

/// Panel edges on `[-1, 1]`, graded toward the centre where the bump
/// carries its mass.
fn panel_edges() -> &'static [f64; KERNEL_PANELS + 1] {
    static EDGES: std::sync::OnceLock<[f64; KERNEL_PANELS + 1]> = std::sync::OnceLock::new();
    EDGES.get_or_init(|| {
        let mut e = [0.0; KERNEL_PANELS + 1];
        for (k, v) in e.iter_mut().enumerate() {
            let t = -1.0 + 2.0 * k as f64 / KERNEL_PANELS as f64;
            *v = (2.0 * t).tanh() / 2f64.tanh();
        }
        e[0] = -1.0;
        e[KERNEL_PANELS] = 1.0;
        e
    })
}

/// Refinement controls for [`HermiteTable::build`].
#[derive(Debug, Clone, Copy)]
pub struct TableTolerance {
    pub value: f64,
    pub deriv: f64,
    /// Initial number of uniform cells.
    pub initial_cells: usize,
    /// Cells narrower than this are never split.
    pub min_cell: f64,
}

impl TableTolerance {
    pub fn for_width(width: f64) -> Self {
        TableTolerance { value: 1e-12, deriv: 1e-8, initial_cells: 32, min_cell: width * 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct HermiteTable {
    nodes: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

#[inline]
fn hermite(h: f64, t: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let v = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = 6.0 * t2 - 6.0 * t;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = -dh00;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let d = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
    (v, d)
}

impl HermiteTable {
    /// Tabulates `sample(y) = (g(y), Dg(y))` on `domain`, splitting cells
    /// until the midpoint interpolation error meets `tol`.
    pub fn build(
        domain: Domain1D,
        tol: TableTolerance,
        mut sample: impl FnMut(f64) -> Result<(f64, f64)>,
    ) -> Result<Self> {
        if tol.initial_cells == 0 {
            return invalid("a table needs at least one cell");
        }
        let n0 = tol.initial_cells;
        let h0 = domain.width() / n0 as f64;
        let coarse: Vec<f64> =
            (0..=n0).map(|i| if i == n0 { domain.b } else { domain.a + h0 * i as f64 }).collect();
        let mut nodes = Vec::with_capacity(4 * n0);
        let mut values = Vec::with_capacity(4 * n0);
        let mut derivs = Vec::with_capacity(4 * n0);
        let first = sample(coarse[0])?;
        nodes.push(coarse[0]);
        values.push(first.0);
        derivs.push(first.1);
        for w in coarse.windows(2) {
            let right = sample(w[1])?;
            // depth-first refinement keeps nodes sorted
            let mut stack = vec![(w[0], *values.last().unwrap(), *derivs.last().unwrap(), w[1], right)];
            while let Some((a, va, da, b, (vb, db))) = stack.pop() {
                let m = 0.5 * (a + b);
                let (vm, dm) = sample(m)?;
                let (iv, id) = hermite(b - a, 0.5, va, vb, da, db);
                let ok = (iv - vm).abs() <= tol.value && (id - dm).abs() <= tol.deriv;
                if ok || b - a <= tol.min_cell {
                    nodes.push(m);
                    values.push(vm);
                    derivs.push(dm);
                    nodes.push(b);
                    values.push(vb);
                    derivs.push(db);
                } else {
                    stack.push((m, vm, dm, b, (vb, db)));
                    stack.push((a, va, da, m, (vm, dm)));
                }
            }
        }
        for (v, d) in values.iter().zip(&derivs) {
            if !(v.is_finite() && d.is_finite()) {
                return Err(Error::Geometry("non-finite sample while tabulating".into()));
            }
        }
        Ok(HermiteTable { nodes, values, derivs })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    fn cell_of(&self, y: f64) -> usize {
        let n = self.nodes.len();
        let i = self.nodes.partition_point(|&t| t <= y);
        i.clamp(1, n - 1) - 1
    }

    #[inline]
    fn eval_in(&self, i: usize, y: f64) -> (f64, f64) {
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let h = b - a;
        hermite(h, (y - a) / h, self.values[i], self.values[i + 1], self.derivs[i], self.derivs[i + 1])
    }

    /// Interpolated `(g(y), Dg(y))`.
    #[inline]
    pub fn eval(&self, y: f64) -> (f64, f64) {
        self.eval_in(self.cell_of(y), y)
    }

    /// `(phi * g)(x)` and `(phi * Dg)(x)` by cell-aligned Gauss-Legendre,
    /// normalized by the discrete kernel mass. Panels free of table nodes
    /// reuse the kernel's precomputed weights.
    pub fn convolve_pair(&self, kernel: &BumpKernel, x: f64) -> (f64, f64) {
        convolve_cells(&self.nodes, kernel, x, |c, y| self.eval_in(c, y))
    }
}

/// `(phi * g)(x)` and `(phi * Dg)(x)` for `g` smooth on each cell of the
/// sorted `nodes`, with `eval_in(cell, y)` giving `(g, Dg)` on a cell. Cells
/// are integrated separately by Gauss-Legendre on the graded kernel panels,
/// and the result is normalized by the discrete kernel mass.
pub(crate) fn convolve_cells(
    nodes: &[f64],
    kernel: &BumpKernel,
    x: f64,
    eval_in: impl Fn(usize, f64) -> (f64, f64),
) -> (f64, f64) {
    let s = kernel.sigma();
    let rule = &kernel.rule;
    let edges = panel_edges();
    let last_cell = nodes.len() - 2;
    let mut cell = nodes.partition_point(|&t| t <= x - s).clamp(1, last_cell + 1) - 1;
    let (mut m0, mut m1, mut mass) = (0.0, 0.0, 0.0);
    for k in 0..KERNEL_PANELS {
        let a = x + s * edges[k];
        let b = x + s * edges[k + 1];
        while cell < last_cell && nodes[cell + 1] <= a {
            cell += 1;
        }
        if cell == last_cell || nodes[cell + 1] >= b {
            for j in 0..8 {
                let idx = 8 * k + j;
                let w = rule.weights[idx];
                let (v, d) = eval_in(cell, x + rule.offsets[idx]);
                m0 += w * v;
                m1 += w * d;
            }
            mass += rule.panel_mass[k];
            continue;
        }
        // the panel straddles nodes: integrate each piece
        let mut lo = a;
        while lo < b {
            let hi = if cell < last_cell { nodes[cell + 1].min(b) } else { b };
            if hi > lo {
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                for &(t, wt) in rule.gl.iter() {
                    let y = mid + half * t;
                    let w = wt * half * kernel.value(x - y);
                    let (v, d) = eval_in(cell, y);
                    m0 += w * v;
                    m1 += w * d;
                    mass += w;
                }
            }
            if hi < b {
                cell += 1;
            }
            lo = hi;
        }
    }
    (m0 / mass, m1 / mass)
}

/// Kernel-weighted Gauss-Legendre nodes on the graded panels.
#[derive(Debug, Clone)]
pub(crate) struct PanelRule {
    offsets: Vec<f64>,
    weights: Vec<f64>,
    panel_mass: [f64; KERNEL_PANELS],
    gl: [(f64, f64); 8],
}

impl PanelRule {
    pub(crate) fn new(sigma: f64, scale: f64) -> Self {
        let edges = panel_edges();
        let gl = quad::gl8_rule();
        let mut offsets = Vec::with_capacity(8 * KERNEL_PANELS);
        let mut weights = Vec::with_capacity(8 * KERNEL_PANELS);
        let mut panel_mass = [0.0; KERNEL_PANELS];
        for k in 0..KERNEL_PANELS {
            let (a, b) = (sigma * edges[k], sigma * edges[k + 1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for &(t, w) in gl.iter() {
                let u = mid + half * t;
                let wt = w * half * scale * super::unit_bump(u / sigma);
                offsets.push(u);
                weights.push(wt);
                panel_mass[k] += wt;
            }
        }
        PanelRule { offsets, weights, panel_mass, gl }
    }
}

/// A table read as a function on its node range.
impl GraphFn for HermiteTable {
    fn value(&self, y: f64) -> f64 {
        self.eval(y).0
    }
    fn deriv(&self, y: f64) -> f64 {
        self.eval(y).1
    }
    fn domain(&self) -> Domain1D {
        Domain1D { a: self.nodes[0], b: *self.nodes.last().unwrap() }
    }
    fn smoothed_pair(&self, kernel: &BumpKernel, x: f64) -> (f64, f64) {
        self.convolve_pair(kernel, x)
    }
    fn smoothed(&self, kernel: &BumpKernel, x: f64, order: super::DerivOrder) -> f64 {
        let (a, b) = self.convolve_pair(kernel, x);
        match order {
            super::DerivOrder::Value => a,
            super::DerivOrder::First => b,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{make_bump_kernel, smooth_by_quadrature, DerivOrder, FnGraph};

    fn kinked(y: f64) -> (f64, f64) {
        // C^{1,1}: flat on the left, unit circle-like parabola on the right
        if y <= 0.013 {
            (0.0, 0.0)
        } else {
            let t = y - 0.013;
            (0.5 * t * t, t)
        }
    }

    #[test]
    fn cubic_is_reproduced() {
        let d = Domain1D::new(-1.0, 2.0).unwrap();
        let t = HermiteTable::build(d, TableTolerance::for_width(3.0), |y| {
            Ok((y * y * y - y, 3.0 * y * y - 1.0))
        })
        .unwrap();
        assert_eq!(t.len(), 2 * 32 + 1);
        for i in 0..100 {
            let y = -1.0 + 3.0 * i as f64 / 99.0;
            let (v, dv) = t.eval(y);
            assert!((v - (y * y * y - y)).abs() < 1e-13);
            assert!((dv - (3.0 * y * y - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_meets_tolerance_at_kink() {
        let d = Domain1D::symmetric(0.1).unwrap();
        let tol = TableTolerance::for_width(0.2);
        let t = HermiteTable::build(d, tol, |y| Ok(kinked(y))).unwrap();
        assert!(t.nodes().windows(2).all(|w| w[0] < w[1]));
        for i in 0..20_001 {
            let y = -0.1 + 0.2 * i as f64 / 20_000.0;
            let (v, dv) = t.eval(y);
            let (ev, ed) = kinked(y);
            assert!((v - ev).abs() < 1e-11, "{y}");
            assert!((dv - ed).abs() < 1e-7, "{y}");
        }
        assert!(t.len() < 400, "{} nodes", t.len());
    }

    #[test]
    fn tabulated_convolution_matches_adaptive_route() {
        let d = Domain1D::symmetric(0.1).unwrap();
        let t = HermiteTable::build(d, TableTolerance::for_width(0.2), |y| Ok(kinked(y))).unwrap();
        let direct = FnGraph::new(|y| kinked(y).0, |y| kinked(y).1, d);
        for &sigma in &[0.04, 1e-3, 2e-5] {
            let k = make_bump_kernel(sigma, 1).unwrap();
            for &x in &[-0.03, 0.0, 0.013, 0.013 + 0.3 * sigma, 0.05] {
                let (a, b) = t.convolve_pair(&k, x);
                let ea = smooth_by_quadrature(&direct, &k, x, DerivOrder::Value);
                let eb = smooth_by_quadrature(&direct, &k, x, DerivOrder::First);
                // the adaptive route carries an absolute tolerance of 1e-10
                assert!((a - ea).abs() < 2e-10, "sigma {sigma} x {x}: {a} vs {ea}");
                assert!((b - eb).abs() < 1e-8, "sigma {sigma} x {x}: {b} vs {eb}");
            }
        }
    }

    #[test]
    fn tabulated_convolution_matches_high_precision_value() {
        let d = Domain1D::symmetric(0.1).unwrap();
        let t = HermiteTable::build(d, TableTolerance::for_width(0.2), |y| Ok(kinked(y))).unwrap();
        let k = make_bump_kernel(1e-3, 1).unwrap();
        // 30-digit quadrature split at the kink
        let exact = 1.15891074698052850e-7;
        assert!((t.convolve_pair(&k, 0.0133).0 - exact).abs() < 1e-16);
    }

    #[test]
    fn tabulated_convolution_is_exact_on_affine() {
        let d = Domain1D::symmetric(1.0).unwrap();
        let t = HermiteTable::build(d, TableTolerance::for_width(2.0), |y| Ok((2.0 - 0.5 * y, -0.5))).unwrap();
        let k = make_bump_kernel(0.3, 1).unwrap();
        for &x in &[-0.6, -0.01, 0.0, 0.33, 0.7] {
            let (a, b) = t.convolve_pair(&k, x);
            assert!((a - (2.0 - 0.5 * x)).abs() < 1e-12);
            assert!((b + 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn sample_errors_propagate() {
        let d = Domain1D::symmetric(1.0).unwrap();
        let r = HermiteTable::build(d, TableTolerance::for_width(2.0), |y| {
            if y > 0.5 {
                Err(Error::Geometry("lost".into()))
            } else {
                Ok((0.0, 0.0))
            }
        });
        assert!(matches!(r, Err(Error::Geometry(_))));
    }
}
