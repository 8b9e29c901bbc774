//! Patchwise smoothing of a C^{1,1} curve: a net, one blended surgery per
//! net point, and the reach bounds that go with it.

pub mod blend;
pub mod bounds;
pub mod net;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::kernels::{find_support_radius_with, make_bump_kernel, DerivOrder, Domain1D, STEPS_PER_SIGMA};
use crate::manifold::graph::local_graph_at_param;
use crate::manifold::patch::AppliedPatch;
use crate::manifold::{sample_count, EmbeddedCurve, V2};
use crate::par::{self, Execution};
use crate::partition::{make_psi0, normalize_delta, rescale_psi};
use crate::reach::{analytic_reach, default_min_sep, estimate_reach_federer_with, ReachEstimate};

pub use blend::{blend_function, BlendedPatch};
pub use bounds::{far_away_reach_bound, predicted_reach_bound, technical_rewrite_z};
pub use net::{build_net, build_net_with, build_net_with_spacing, Net, NetSummary};

/// Iterations of the `delta = eps/(4 N_C)` fixed point.
const DELTA_ITERATIONS: usize = 12;

/// Floor on the default deviation target, relative to `R`.
pub const RHO_FLOOR: f64 = 1e-6;

/// Measurements taken while building one patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatchStats {
    pub sigma: f64,
    /// `sup_C max(|phi*f - f|, |phi*Df - Df|)`.
    pub deviation: f64,
    /// `sup_C max(|F - f|, |DF - Df|)`.
    pub c1_distance: f64,
    /// Largest normal displacement of a curve point.
    pub shift: f64,
    pub table_nodes: usize,
}

/// Builds the surgery at parameter `s` of `curve` without applying it.
pub fn build_patch(curve: &EmbeddedCurve, s: f64, delta: f64, r: f64, rho: f64) -> Result<(AppliedPatch, PatchStats)> {
    build_patch_with(Execution::default(), curve, s, delta, r, rho)
}

pub fn build_patch_with(
    exec: Execution,
    curve: &EmbeddedCurve,
    s: f64,
    delta: f64,
    r: f64,
    rho: f64,
) -> Result<(AppliedPatch, PatchStats)> {
    if !(delta > 0.0 && r > 0.0 && delta <= 0.5 * r) {
        return invalid(format!("need 0 < delta <= R/2, got delta = {delta}, R = {r}"));
    }
    let psi = rescale_psi(&make_psi0(), delta, r)?;
    if !(rho > 0.0) || rho >= 1.0 / (1.0 + psi.l_combined) {
        return Err(Error::Parameter(format!(
            "rho = {rho} must lie in (0, 1/(1 + L)) with L = {}",
            psi.l_combined
        )));
    }
    let window = 0.5 * (delta * r).sqrt();
    let graph = local_graph_at_param(curve, s, window)?;
    let table = graph.tabulate(window)?;
    let c = Domain1D::symmetric(psi.support)?;
    let sigma = find_support_radius_with(exec, &table, &c, rho, DerivOrder::First)?;
    let kernel = make_bump_kernel(sigma, 1)?;

    let grid = c.grid(sigma / STEPS_PER_SIGMA);
    let rows = par::map_indexed(exec, grid.len(), |i| {
        let y = grid[i];
        let (f, df) = table.eval(y);
        let (cv, dc) = table.convolve_pair(&kernel, y);
        let (p, dp) = (psi.value(y), psi.deriv(y));
        let dev = (cv - f).abs().max((dc - df).abs());
        let c1 = (p * (cv - f)).abs().max((p * (dc - df) + dp * (cv - f)).abs());
        [dev, c1, (p * (cv - f)).abs()]
    });
    let mut stats = PatchStats { sigma, deviation: 0.0, c1_distance: 0.0, shift: 0.0, table_nodes: table.len() };
    for [dev, c1, shift] in rows {
        stats.deviation = stats.deviation.max(dev);
        stats.c1_distance = stats.c1_distance.max(c1);
        stats.shift = stats.shift.max(shift);
    }
    let limit = (delta * r).sqrt() / 32.0;
    if !(stats.shift <= limit) {
        return Err(Error::Parameter(format!("patch moves points by {:e}, more than {limit:e}", stats.shift)));
    }
    let patch = AppliedPatch {
        s_center: graph.s0,
        center: graph.base,
        tangent: graph.tangent,
        normal: graph.normal,
        window,
        psi,
        kernel,
        table,
        deviation: stats.deviation,
    };
    Ok((patch, stats))
}

/// `curve` with one surgery centred at the curve point `p_hat`.
pub fn smooth_patch(curve: &EmbeddedCurve, p_hat: &V2, delta: f64, r: f64, rho: f64) -> Result<EmbeddedCurve> {
    let (s, d) = curve.locate(p_hat);
    if d > 1e-9 {
        return invalid(format!("patch centre is {d:e} away from the curve"));
    }
    let (patch, _) = build_patch(curve, s, delta, r, rho)?;
    Ok(curve.with_patch(patch))
}

/// Pipeline settings; `None` picks the default rule.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingOptions {
    pub epsilon: f64,
    pub r: Option<f64>,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    /// Samples of the final reach scan.
    pub scan_samples: usize,
    pub min_sep: Option<f64>,
    pub exec: Execution,
}

impl SmoothingOptions {
    pub fn new(epsilon: f64) -> Self {
        SmoothingOptions {
            epsilon,
            r: None,
            delta: None,
            rho: None,
            scan_samples: 2000,
            min_sep: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothingReport {
    pub shape: String,
    pub r_input: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub rho: f64,
    /// `delta^4/64`.
    pub rho_nominal: f64,
    pub net: NetSummary,
    pub l_psi0: f64,
    pub l_dpsi0: f64,
    pub l_combined: f64,
    pub sigma_per_patch: Vec<f64>,
    pub r_prime_predicted: f64,
    pub r_prime_nominal: f64,
    pub r_hat_measured: ReachEstimate,
    pub c1_distance: f64,
    pub max_shift: f64,
    pub patches_applied: usize,
}

/// Smooths `curve` so that its reach drops by at most about `epsilon`.
pub fn smooth_manifold(curve: &EmbeddedCurve, epsilon: f64) -> Result<(EmbeddedCurve, SmoothingReport)> {
    smooth_manifold_with(curve, &SmoothingOptions::new(epsilon))
}

pub fn smooth_manifold_with(curve: &EmbeddedCurve, opts: &SmoothingOptions) -> Result<(EmbeddedCurve, SmoothingReport)> {
    let (out, report, _) = smooth_manifold_detailed(curve, opts)?;
    Ok((out, report))
}

/// As [`smooth_manifold_with`], also returning the per-patch statistics and
/// keeping the net in the report.
pub fn smooth_manifold_detailed(
    curve: &EmbeddedCurve,
    opts: &SmoothingOptions,
) -> Result<(EmbeddedCurve, SmoothingReport, Vec<PatchStats>)> {
    let eps = opts.epsilon;
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid(format!("epsilon must be positive, got {eps}"));
    }
    let r = match opts.r {
        Some(r) => r,
        None => analytic_reach(curve.spec())?,
    };
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("R must be positive, got {r}"));
    }
    if eps >= r {
        return invalid(format!("epsilon = {eps} must be below R = {r}"));
    }
    let psi0 = make_psi0();
    let (l0, l1) = (psi0.l_psi, psi0.l_dpsi);
    let (delta, net) = match opts.delta {
        Some(d) => {
            if !(d > 0.0 && d <= 0.5 * r) {
                return invalid(format!("delta must lie in (0, R/2], got {d}"));
            }
            (d, build_net(curve, d, r)?)
        }
        None => choose_delta(curve, eps, r, l0, l1)?,
    };
    let psi = rescale_psi(&psi0, delta, r)?;
    let rho_nominal = delta.powi(4) / 64.0;
    let rho = match opts.rho {
        Some(v) => v,
        None => rho_nominal.max(RHO_FLOOR * r).min(0.5 / (1.0 + psi.l_combined)),
    };
    if !(rho > 0.0) || rho >= 1.0 / (1.0 + psi.l_combined) {
        return invalid(format!("rho must lie in (0, {}), got {rho}", 1.0 / (1.0 + psi.l_combined)));
    }

    let mut out = curve.clone();
    let mut stats = Vec::with_capacity(net.points.len());
    for (k, p) in net.points.iter().enumerate() {
        let s = out.eval(p.s).s;
        let (patch, st) = build_patch_with(opts.exec, &out, s, delta, r, rho)
            .map_err(|e| Error::Patch { index: k, source: Box::new(e) })?;
        out.push_patch(patch);
        stats.push(st);
    }

    let sample = sample_count(&out, opts.scan_samples);
    let min_sep = opts.min_sep.unwrap_or_else(|| default_min_sep(&sample));
    let measured = estimate_reach_federer_with(opts.exec, &sample, min_sep)?;
    let report = SmoothingReport {
        shape: curve.spec().name().to_string(),
        r_input: r,
        epsilon: eps,
        delta,
        rho,
        rho_nominal,
        net: net.summary(),
        l_psi0: l0,
        l_dpsi0: l1,
        l_combined: psi.l_combined,
        sigma_per_patch: stats.iter().map(|s| s.sigma).collect(),
        r_prime_predicted: predicted_reach_bound(r, delta, rho, l1)?,
        r_prime_nominal: predicted_reach_bound(r, delta, rho_nominal, l1)?,
        r_hat_measured: measured,
        c1_distance: stats.iter().map(|s| s.c1_distance).fold(0.0, f64::max),
        max_shift: stats.iter().map(|s| s.shift).fold(0.0, f64::max),
        patches_applied: out.patches().len(),
    };
    Ok((out, report, stats))
}

/// Smallest `delta` of the iteration `delta <- eps/(4 N_C(delta))`, normalized
/// for the partition function, whose net satisfies `delta <= eps/(4 N_C)`.
fn choose_delta(curve: &EmbeddedCurve, eps: f64, r: f64, l0: f64, l1: f64) -> Result<(f64, Net)> {
    let mut delta = normalize_delta((0.25 * eps).min(0.5 * r), r, l0, l1);
    let mut net = build_net(curve, delta, r)?;
    for _ in 0..DELTA_ITERATIONS {
        let next = normalize_delta((eps / (4.0 * net.n_c as f64)).min(0.5 * r), r, l0, l1);
        if next >= delta && delta <= eps / (4.0 * net.n_c as f64) {
            return Ok((delta, net));
        }
        let next_net = build_net(curve, next, r)?;
        delta = next;
        net = next_net;
    }
    if delta <= eps / (4.0 * net.n_c as f64) {
        Ok((delta, net))
    } else {
        Err(Error::Convergence(format!("delta = eps/(4 N_C) did not settle (last delta {delta:e})")))
    }
}

/// The largest `F - f` displacement check over a set of parameters: curve
/// points of `before` and `after` at each `s` differ by at most `bound`.
pub fn max_displacement(before: &EmbeddedCurve, after: &EmbeddedCurve, n: usize) -> f64 {
    let l = before.length();
    par::max_by_index(Execution::default(), n, |i| {
        let s = l * i as f64 / n as f64;
        Some(((after.eval(s).point - before.eval(s).point).norm(), ()))
    })
    .map_or(0.0, |e| e.value)
}
