//! `F = (1 - psi) f + psi (phi * f)` for a graph function `f`.

use crate::error::{invalid, Result};
use crate::kernels::{find_support_radius, make_bump_kernel, sup_deviation_ck, BumpKernel, DerivOrder, Domain1D, GraphFn, STEPS_PER_SIGMA};
use crate::partition::PartitionFn;

#[derive(Debug, Clone)]
pub struct BlendedPatch<'a, G: GraphFn + ?Sized> {
    pub f: &'a G,
    pub psi: PartitionFn,
    pub kernel: BumpKernel,
    pub rho: f64,
    /// Measured `||phi*f - f||` on the support of `psi`, in the norm
    /// selected by `order`.
    pub deviation: f64,
    pub order: DerivOrder,
}

/// Blends `f` with its smoothing by a kernel whose deviation from `f` on the
/// support of `psi` is at most `rho` (values only for `order = Value`,
/// values and derivatives for `order = First`).
pub fn blend_function<'a, G: GraphFn + ?Sized>(
    f: &'a G,
    psi: &PartitionFn,
    rho: f64,
    order: DerivOrder,
) -> Result<BlendedPatch<'a, G>> {
    if !(rho > 0.0) || rho >= 1.0 / (1.0 + psi.l_combined) {
        return invalid(format!(
            "rho must lie in (0, 1/(1 + L)) = (0, {}), got {rho}",
            1.0 / (1.0 + psi.l_combined)
        ));
    }
    let c = Domain1D::symmetric(psi.support)?;
    let sigma = find_support_radius(f, &c, rho, order)?;
    let kernel = make_bump_kernel(sigma, 1)?;
    let deviation = sup_deviation_ck(f, &kernel, &c, order, sigma / STEPS_PER_SIGMA)?.value;
    Ok(BlendedPatch { f, psi: *psi, kernel, rho, deviation, order })
}

impl<G: GraphFn + ?Sized> BlendedPatch<'_, G> {
    /// The blend region `[-support, support]`.
    pub fn region(&self) -> Domain1D {
        Domain1D { a: -self.psi.support, b: self.psi.support }
    }

    /// `(F, DF)` with `DF = (1 - psi) Df + psi (phi*Df) + Dpsi (phi*f - f)`.
    pub fn eval(&self, y: f64) -> (f64, f64) {
        let (f, df) = (self.f.value(y), self.f.deriv(y));
        if y.abs() >= self.psi.support {
            return (f, df);
        }
        let (c, dc) = self.f.smoothed_pair(&self.kernel, y);
        let (p, dp) = (self.psi.value(y), self.psi.deriv(y));
        ((1.0 - p) * f + p * c, (1.0 - p) * df + p * dc + dp * (c - f))
    }

    pub fn value(&self, y: f64) -> f64 {
        self.eval(y).0
    }

    pub fn deriv(&self, y: f64) -> f64 {
        self.eval(y).1
    }
}
