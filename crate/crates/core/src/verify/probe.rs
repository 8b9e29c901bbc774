//! Fourth-difference smoothness probe.
//!
//! For a smooth `g` the scaled difference `Delta_h^4 g / h^4` settles as `h`
//! shrinks; across a curvature jump it grows like `h^-2`.

use serde::Serialize;

/// Number of step halvings.
pub const PROBE_LEVELS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub steps: Vec<f64>,
    /// `max_k |Delta^4 g(k h/2)| / h^4` for `k = -2..=2`.
    pub d4: Vec<f64>,
    /// Rounding floor of each `d4` entry.
    pub noise: Vec<f64>,
    /// Largest `d4(h/2) / d4(h)`.
    pub worst_ratio: f64,
    pub passed: bool,
}

/// Probes `g` around 0 with steps `h0, h0/2, ...`; passes iff every halving
/// keeps `d4(h/2) <= 2 d4(h) + noise(h/2)`. `value_scale` bounds the
/// magnitude of the numbers whose rounding enters `g`.
pub fn fourth_difference_probe(g: impl Fn(f64) -> f64, h0: f64, value_scale: f64) -> ProbeResult {
    let mut steps = Vec::with_capacity(PROBE_LEVELS + 1);
    let mut d4 = Vec::with_capacity(PROBE_LEVELS + 1);
    let mut noise = Vec::with_capacity(PROBE_LEVELS + 1);
    let mut h = h0;
    for _ in 0..=PROBE_LEVELS {
        let h4 = h.powi(4);
        let worst = (-2..=2)
            .map(|k| {
                let x = 0.5 * h * k as f64;
                let v = g(x + 2.0 * h) - 4.0 * g(x + h) + 6.0 * g(x) - 4.0 * g(x - h) + g(x - 2.0 * h);
                v.abs() / h4
            })
            .fold(0.0, f64::max);
        steps.push(h);
        d4.push(worst);
        noise.push(32.0 * f64::EPSILON * value_scale / h4);
        h *= 0.5;
    }
    let mut passed = true;
    let mut worst_ratio: f64 = 0.0;
    for i in 0..PROBE_LEVELS {
        if d4[i + 1] > 2.0 * d4[i] + noise[i + 1] {
            passed = false;
        }
        if d4[i] > noise[i] {
            worst_ratio = worst_ratio.max(d4[i + 1] / d4[i]);
        }
    }
    ProbeResult { steps, d4, noise, worst_ratio, passed }
}
