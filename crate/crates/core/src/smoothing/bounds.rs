//! Closed-form reach bounds for the smoothed curve.

use crate::error::{invalid, Result};

/// Lower bound `R'` on the reach after smoothing with deviation `rho` at
/// scale `delta`:
/// `R / max{192 L rho/delta + 1/(1 - delta/R), 1 + 192 (rho/delta)(64 L/delta + R + 1)}`.
pub fn predicted_reach_bound(r: f64, delta: f64, rho: f64, l_dpsi0: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("R must be positive, got {r}"));
    }
    if !(delta > 0.0 && delta < r) {
        return invalid(format!("need 0 < delta < R, got delta = {delta}, R = {r}"));
    }
    if !(rho >= 0.0 && rho.is_finite()) || !(l_dpsi0 >= 0.0 && l_dpsi0.is_finite()) {
        return invalid(format!("rho and L_Dpsi0 must be non-negative, got {rho}, {l_dpsi0}"));
    }
    let keep = 1.0 - delta / r;
    // R / (a + 1/keep) rewritten so rho = 0 gives R (1 - delta/R) exactly
    let first = r * keep / (1.0 + 192.0 * l_dpsi0 * rho / delta * keep);
    let second = r / (1.0 + 192.0 * (rho / delta) * (64.0 / delta * l_dpsi0 + r + 1.0));
    Ok(first.min(second))
}

/// Reach bound when the patch moves points by at most `epsilon` and the
/// pair lies `beta` apart: `R / (1 + (12 eps R/beta^2)(R L + R + 1))`.
pub fn far_away_reach_bound(r: f64, epsilon: f64, beta: f64, l_combined: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("R must be positive, got {r}"));
    }
    if !(epsilon >= 0.0 && epsilon < r) {
        return invalid(format!("need 0 <= epsilon < R, got {epsilon}"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return invalid(format!("beta must be positive, got {beta}"));
    }
    if !(l_combined >= 0.0) || epsilon > 1.0 / (l_combined + 1.0) {
        return invalid(format!("need epsilon <= 1/(L + 1), got epsilon = {epsilon}, L = {l_combined}"));
    }
    Ok(r / (1.0 + 12.0 * epsilon * r / (beta * beta) * (r * l_combined + r + 1.0)))
}

/// `z = 4 R^2 xi / (1 + 2 R xi)`, so that `1/(2R) + xi = 1/(2R - z)`.
pub fn technical_rewrite_z(r: f64, xi: f64) -> Result<f64> {
    let den = 1.0 + 2.0 * r * xi;
    if den == 0.0 || !den.is_finite() {
        return invalid(format!("1 + 2 R xi vanishes for R = {r}, xi = {xi}"));
    }
    Ok(4.0 * r * r * xi / den)
}
