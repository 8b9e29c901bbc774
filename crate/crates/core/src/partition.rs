//! The plateau function `psi0` and its rescalings.
//!
//! `psi0(x) = ramp(2 - |x|)`, where `ramp` is the normalized antiderivative
//! of a bump on `[0, 1]`. It is identically one on `|x| <= 1` and vanishes
//! on `|x| >= 2`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::{bump_integral, quad};

/// Grid size used to measure the Lipschitz constants of `psi0`.
pub const LIPSCHITZ_GRID: usize = 10_000;

/// `exp(-1 / (4u(1-u)))` on `(0, 1)`, zero elsewhere.
#[inline]
fn transition(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        (-1.0 / (4.0 * u * (1.0 - u))).exp()
    }
}

#[inline]
fn transition_deriv(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        let w = u * (1.0 - u);
        transition(u) * (1.0 - 2.0 * u) / (4.0 * w * w)
    }
}

/// `int_0^1 transition = I / 2` with `I` the bump integral.
#[inline]
fn ramp_scale() -> f64 {
    2.0 / bump_integral()
}

const RAMP_NODES: usize = 512;

/// `int_0^{j/(2 RAMP_NODES)} transition` for `j = 0..=RAMP_NODES`.
fn ramp_partials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let h = 0.5 / RAMP_NODES as f64;
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for j in 0..RAMP_NODES {
            acc += quad::gauss_legendre_8(h * j as f64, h * (j + 1) as f64, transition);
            out.push(acc);
        }
        out
    })
}

/// Smooth monotone step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn ramp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else if t <= 0.5 {
        let h = 0.5 / RAMP_NODES as f64;
        let j = ((t / h) as usize).min(RAMP_NODES);
        ramp_scale() * (ramp_partials()[j] + quad::gauss_legendre_8(h * j as f64, t, transition))
    } else {
        1.0 - ramp(1.0 - t)
    }
}

/// A radial plateau function `x -> psi0(scale * x)` with its constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionFn {
    /// Multiplier applied to the argument of `psi0`.
    pub scale: f64,
    /// `psi == 1` on `|x| <= plateau`.
    pub plateau: f64,
    /// `psi == 0` on `|x| >= support`.
    pub support: f64,
    pub l_psi: f64,
    pub l_dpsi: f64,
    pub l_combined: f64,
}

/// Measured `(L_psi0, L_Dpsi0)`: largest difference quotients of `psi0` and
/// `Dpsi0` over a uniform grid of the transition band `[1, 2]`.
pub fn psi0_constants() -> (f64, f64) {
    static VALUE: OnceLock<(f64, f64)> = OnceLock::new();
    *VALUE.get_or_init(|| {
        let n = LIPSCHITZ_GRID;
        let h = 1.0 / n as f64;
        let mut l0: f64 = 0.0;
        let mut l1: f64 = 0.0;
        let mut prev = (psi0_value(1.0), psi0_deriv(1.0));
        for i in 1..=n {
            let x = 1.0 + h * i as f64;
            let cur = (psi0_value(x), psi0_deriv(x));
            l0 = l0.max((cur.0 - prev.0).abs() / h);
            l1 = l1.max((cur.1 - prev.1).abs() / h);
            prev = cur;
        }
        (l0, l1)
    })
}

pub fn psi0_value(x: f64) -> f64 {
    ramp(2.0 - x.abs())
}

pub fn psi0_deriv(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 || a >= 2.0 {
        return 0.0;
    }
    -x.signum() * ramp_scale() * transition(2.0 - a)
}

pub fn psi0_second(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 || a >= 2.0 {
        return 0.0;
    }
    ramp_scale() * transition_deriv(2.0 - a)
}

/// `psi0` with plateau radius 1 and support radius 2.
pub fn make_psi0() -> PartitionFn {
    let (l0, l1) = psi0_constants();
    PartitionFn { scale: 1.0, plateau: 1.0, support: 2.0, l_psi: l0, l_dpsi: l1, l_combined: l0.max(l1) }
}

/// The formula bounds `(8/sqrt(dR)) L_psi0`, `(64/(dR)) L_Dpsi0` and their
/// maximum.
pub fn psi_lipschitz_bounds(delta: f64, r: f64, l_psi0: f64, l_dpsi0: f64) -> (f64, f64, f64) {
    let dr = delta * r;
    let l_psi = 8.0 / dr.sqrt() * l_psi0;
    let l_dpsi = 64.0 / dr * l_dpsi0;
    (l_psi, l_dpsi, l_psi.max(l_dpsi))
}

/// Halves `delta` until `(8/sqrt(dR)) L_psi0 <= (64/(dR)) L_Dpsi0`.
pub fn normalize_delta(delta: f64, r: f64, l_psi0: f64, l_dpsi0: f64) -> f64 {
    let mut d = delta;
    loop {
        let (a, b, _) = psi_lipschitz_bounds(d, r, l_psi0, l_dpsi0);
        if a <= b {
            return d;
        }
        d *= 0.5;
    }
}

/// `x -> psi0(8x / sqrt(delta R))`.
pub fn rescale_psi(psi0: &PartitionFn, delta: f64, r: f64) -> Result<PartitionFn> {
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("R must be positive, got {r}"));
    }
    if !(delta > 0.0 && delta <= 0.5 * r) {
        return invalid(format!("delta must lie in (0, R/2], got {delta} with R = {r}"));
    }
    let root = (delta * r).sqrt();
    let factor = 8.0 / root;
    let (l_psi, l_dpsi, l_combined) = psi_lipschitz_bounds(delta, r, psi0.l_psi, psi0.l_dpsi);
    Ok(PartitionFn {
        scale: psi0.scale * factor,
        plateau: psi0.plateau / factor,
        support: psi0.support / factor,
        l_psi,
        l_dpsi,
        l_combined,
    })
}

impl PartitionFn {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        psi0_value(self.scale * x)
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        self.scale * psi0_deriv(self.scale * x)
    }

    #[inline]
    pub fn second(&self, x: f64) -> f64 {
        self.scale * self.scale * psi0_second(self.scale * x)
    }

    /// `1 - psi`, the other member of the partition.
    #[inline]
    pub fn complement(&self, x: f64) -> f64 {
        1.0 - self.value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_quotient(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..n).map(|i| (f(a + h * (i + 1) as f64) - f(a + h * i as f64)).abs() / h).fold(0.0, f64::max)
    }

    #[test]
    fn psi0_examples() {
        let p = make_psi0();
        assert_eq!(p.value(0.5), 1.0);
        assert_eq!(p.value(-1.0), 1.0);
        assert_eq!(p.value(3.0), 0.0);
        assert_eq!(p.value(2.0), 0.0);
        assert_eq!(p.value(1.5) + p.complement(1.5), 1.0);
        assert!((p.value(1.5) - 0.5).abs() < 1e-14);
        assert_eq!(p.plateau, 1.0);
        assert_eq!(p.support, 2.0);
    }

    #[test]
    fn ramp_matches_adaptive_quadrature() {
        let whole = quad::adaptive_simpson(0.0, 1.0, 1e-15, &transition);
        for i in 1..40 {
            let t = i as f64 / 40.0;
            let oracle = quad::adaptive_simpson(0.0, t, 1e-15, &transition) / whole;
            assert!((ramp(t) - oracle).abs() < 1e-12, "{t}");
        }
    }

    #[test]
    fn ramp_is_monotone() {
        let mut prev = 0.0;
        for i in 0..=10_000 {
            let v = ramp(i as f64 / 10_000.0);
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(prev, 1.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for i in 0..41 {
            let x = -2.2 + 4.4 * i as f64 / 40.0;
            let fd = (psi0_value(x + h) - psi0_value(x - h)) / (2.0 * h);
            assert!((fd - psi0_deriv(x)).abs() < 1e-7, "{x}");
            let fd2 = (psi0_deriv(x + h) - psi0_deriv(x - h)) / (2.0 * h);
            assert!((fd2 - psi0_second(x)).abs() < 1e-5, "{x}");
        }
    }

    #[test]
    fn constants_match_analytic_peaks() {
        let (l0, l1) = psi0_constants();
        // max of Dpsi0 is at the midpoint of the band
        let peak = ramp_scale() * (-1f64).exp();
        assert!((l0 - peak).abs() < 1e-6 * peak);
        let mut peak2: f64 = 0.0;
        for i in 1..1_000_000 {
            peak2 = peak2.max(transition_deriv(i as f64 / 1e6).abs());
        }
        assert!((l1 - ramp_scale() * peak2).abs() < 1e-3 * l1);
    }

    #[test]
    fn rescale_examples() {
        let p0 = make_psi0();
        let p = rescale_psi(&p0, 4.0, 16.0).unwrap();
        assert_eq!(p.plateau, 1.0);
        assert_eq!(p.support, 2.0);
        let p = rescale_psi(&p0, 0.01, 1.0).unwrap();
        let root = 0.1;
        for i in 0..=100 {
            let x = root / 8.0 * i as f64 / 100.0;
            assert_eq!(p.value(x), 1.0);
            assert_eq!(p.value(-x), 1.0);
            let y = root / 4.0 * (1.0 + i as f64 / 100.0);
            assert_eq!(p.value(y), 0.0);
            assert_eq!(p.value(-y), 0.0);
        }
        assert!(rescale_psi(&p0, 0.6, 1.0).is_err());
        assert!(rescale_psi(&p0, 0.0, 1.0).is_err());
    }

    #[test]
    fn lipschitz_bound_examples() {
        let (a, b, c) = psi_lipschitz_bounds(8.0, 8.0, 2.0, 3.0);
        assert_eq!(a, 2.0);
        assert_eq!(b, 3.0);
        assert_eq!(c, 3.0);
    }

    #[test]
    fn measured_quotients_respect_formula_bounds() {
        let p0 = make_psi0();
        for &(delta, r) in &[(0.1, 1.0), (0.01, 1.0), (5e-4, 1.0), (0.3, 2.0)] {
            let p = rescale_psi(&p0, delta, r).unwrap();
            let s = p.support * 1.1;
            let m0 = max_quotient(|x| p.value(x), -s, s, LIPSCHITZ_GRID);
            let m1 = max_quotient(|x| p.deriv(x), -s, s, LIPSCHITZ_GRID);
            assert!(m0 <= p.l_psi + 1e-6);
            assert!(m1 <= p.l_dpsi + 1e-6 * p.l_dpsi.max(1.0));
            // rescaling law for the measured constant
            let band = max_quotient(|x| p.value(x), p.plateau, p.support, LIPSCHITZ_GRID);
            assert!((band / p.l_psi - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn partition_of_unity_and_flat_regions() {
        let p = rescale_psi(&make_psi0(), 0.05, 1.0).unwrap();
        for i in 0..=10_000 {
            let x = -0.2 + 0.4 * i as f64 / 10_000.0;
            let (a, b) = (p.value(x), p.complement(x));
            assert!((a + b - 1.0).abs() <= 1e-12);
            assert!((0.0..=1.0).contains(&a));
            if x.abs() >= p.support {
                assert_eq!(a, 0.0);
            }
            if x.abs() <= p.plateau {
                assert_eq!(b, 0.0);
            }
        }
        for i in 0..1000 {
            let inner = p.plateau * i as f64 / 1000.0;
            let outer = p.support * (1.0 + i as f64 / 1000.0);
            assert!(p.deriv(inner).abs() <= 1e-12);
            assert!(p.deriv(outer).abs() <= 1e-12);
        }
    }

    #[test]
    fn normalization_shrinks_large_delta() {
        let (l0, l1) = psi0_constants();
        let r = 1.0;
        let d = normalize_delta(0.5, r, l0, l1);
        let (a, b, _) = psi_lipschitz_bounds(d, r, l0, l1);
        assert!(a <= b);
        assert_eq!(normalize_delta(1e-3, r, l0, l1), 1e-3);
        // a tiny L_Dpsi0 forces halving
        let d = normalize_delta(0.5, r, 1.0, 0.01);
        let (a, b, _) = psi_lipschitz_bounds(d, r, 1.0, 0.01);
        assert!(a <= b && d < 0.5);
    }
}
