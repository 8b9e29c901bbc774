//! A surgery applied to a curve: inside the patch the local graph `f` is
//! replaced by the blend `F = (1 - psi) f + psi (phi * f)`.

use crate::kernels::{BumpKernel, HermiteTable};
use crate::partition::PartitionFn;

use super::V2;

#[derive(Debug, Clone)]
pub struct AppliedPatch {
    /// Parameter of the patch centre on the pre-patch curve.
    pub s_center: f64,
    pub center: V2,
    pub tangent: V2,
    pub normal: V2,
    /// Local graph radius `sqrt(delta R)/2`; the table covers `[-window, window]`.
    pub window: f64,
    pub psi: PartitionFn,
    pub kernel: BumpKernel,
    /// Pre-patch local graph.
    pub table: HermiteTable,
    /// Measured `sup_C max(|phi*f - f|, |phi*Df - Df|)` on the blend region.
    pub deviation: f64,
}

impl AppliedPatch {
    /// Plateau radius, `sqrt(delta R)/8`.
    pub fn inner(&self) -> f64 {
        self.psi.plateau
    }

    /// Support radius of `psi`, `sqrt(delta R)/4`.
    pub fn transition(&self) -> f64 {
        self.psi.support
    }

    /// Parameter distance beyond which the patch cannot act.
    pub fn param_reach(&self) -> f64 {
        self.window
    }

    /// `(f, Df)` of the pre-patch graph.
    #[inline]
    pub fn local(&self, y: f64) -> (f64, f64) {
        self.table.eval(y)
    }

    /// `(phi * f, phi * Df)`.
    #[inline]
    pub fn smoothed(&self, y: f64) -> (f64, f64) {
        self.table.convolve_pair(&self.kernel, y)
    }

    /// `(F, DF)` with `DF = (1-psi) Df + psi (phi*Df) + Dpsi (phi*f - f)`.
    pub fn blend(&self, y: f64) -> (f64, f64) {
        let (f, df) = self.local(y);
        if y.abs() >= self.psi.support {
            return (f, df);
        }
        let (c, dc) = self.smoothed(y);
        let (p, dp) = (self.psi.value(y), self.psi.deriv(y));
        ((1.0 - p) * f + p * c, (1.0 - p) * df + p * dc + dp * (c - f))
    }

    /// Point of the patched graph at tangent coordinate `y`.
    pub fn graph_point(&self, y: f64, value: f64) -> V2 {
        self.center + self.tangent * y + self.normal * value
    }

    /// Moves a point of the pre-patch curve, and its velocity, onto the
    /// patched curve. Points outside the blend region are left untouched.
    #[inline]
    pub fn apply(&self, p: &mut V2, v: &mut V2) {
        let d = *p - self.center;
        let y = d.dot(&self.tangent);
        if y.abs() >= self.psi.support {
            return;
        }
        let fv = d.dot(&self.normal);
        if fv.abs() >= 0.5 * self.window {
            return;
        }
        let (c, dc) = self.smoothed(y);
        let (ps, dps) = (self.psi.value(y), self.psi.deriv(y));
        let (vt, vn) = (v.dot(&self.tangent), v.dot(&self.normal));
        *p += self.normal * (ps * (c - fv));
        *v += self.normal * (dps * (c - fv) * vt + ps * (dc * vt - vn));
    }
}
