//! Continuous piecewise polynomials of degree at most two, with exact
//! bookkeeping of their Lipschitz constants.

use crate::error::{invalid, Result};

use super::table::convolve_cells;
use super::{BumpKernel, DerivOrder, Domain1D, GraphFn};

/// `g(y) = c0 + c1 (y - y_i) + c2 (y - y_i)^2` on `[y_i, y_{i+1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseQuadratic {
    nodes: Vec<f64>,
    coeffs: Vec<[f64; 3]>,
}

impl PiecewiseQuadratic {
    /// Linear interpolation of `values` at the sorted `nodes`.
    pub fn linear(nodes: Vec<f64>, values: &[f64]) -> Result<Self> {
        check_nodes(&nodes, values.len())?;
        let coeffs = (0..nodes.len() - 1)
            .map(|i| [values[i], (values[i + 1] - values[i]) / (nodes[i + 1] - nodes[i]), 0.0])
            .collect();
        Ok(PiecewiseQuadratic { nodes, coeffs })
    }

    /// The antiderivative, equal to `g0` at the first node, of the linear
    /// interpolant of `dvalues`.
    pub fn with_linear_derivative(nodes: Vec<f64>, dvalues: &[f64], g0: f64) -> Result<Self> {
        check_nodes(&nodes, dvalues.len())?;
        let mut coeffs = Vec::with_capacity(nodes.len() - 1);
        let mut g = g0;
        for i in 0..nodes.len() - 1 {
            let h = nodes[i + 1] - nodes[i];
            let c2 = 0.5 * (dvalues[i + 1] - dvalues[i]) / h;
            coeffs.push([g, dvalues[i], c2]);
            g += dvalues[i] * h + c2 * h * h;
        }
        Ok(PiecewiseQuadratic { nodes, coeffs })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    fn cell_of(&self, y: f64) -> usize {
        let n = self.nodes.len();
        self.nodes.partition_point(|&t| t <= y).clamp(1, n - 1) - 1
    }

    #[inline]
    fn eval_in(&self, i: usize, y: f64) -> (f64, f64) {
        let [c0, c1, c2] = self.coeffs[i];
        let t = y - self.nodes[i];
        (c0 + t * (c1 + t * c2), c1 + 2.0 * t * c2)
    }

    pub fn eval(&self, y: f64) -> (f64, f64) {
        self.eval_in(self.cell_of(y), y)
    }

    /// Largest `|Dg|`, the Lipschitz constant of `g`.
    pub fn lipschitz(&self) -> f64 {
        (0..self.coeffs.len())
            .flat_map(|i| {
                let h = self.nodes[i + 1] - self.nodes[i];
                let [_, c1, c2] = self.coeffs[i];
                [c1.abs(), (c1 + 2.0 * h * c2).abs()]
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|D^2 g|`, the Lipschitz constant of `Dg`.
    pub fn derivative_lipschitz(&self) -> f64 {
        self.coeffs.iter().map(|c| 2.0 * c[2].abs()).fold(0.0, f64::max)
    }
}

fn check_nodes(nodes: &[f64], values: usize) -> Result<()> {
    if nodes.len() < 2 || nodes.len() != values {
        return invalid(format!("need at least two nodes and one value per node, got {} and {values}", nodes.len()));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|v| !v.is_finite()) {
        return invalid("nodes must be finite and strictly increasing");
    }
    Ok(())
}

impl GraphFn for PiecewiseQuadratic {
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
        convolve_cells(&self.nodes, kernel, x, |c, y| self.eval_in(c, y))
    }
    fn smoothed(&self, kernel: &BumpKernel, x: f64, order: DerivOrder) -> f64 {
        let (a, b) = self.smoothed_pair(kernel, x);
        match order {
            DerivOrder::Value => a,
            DerivOrder::First => b,
        }
    }
}
