//! Checks run on every patch of a smoothing run, and the end-to-end check.

use serde::Serialize;

use crate::error::Result;
use crate::kernels::Domain1D;
use crate::manifold::graph::local_graph_at_param;
use crate::manifold::EmbeddedCurve;
use crate::par::{self, Execution};
use crate::smoothing::{smooth_manifold_with, SmoothingOptions, SmoothingReport};

use super::probe::{fourth_difference_probe, ProbeResult};
use super::{
    check_angle_bound, check_far_point_distance, check_hausdorff_bound, check_tangent_distance_bound, lipschitz_of,
    CheckResult,
};

/// Grid sizes of the per-patch checks.
#[derive(Debug, Clone, Copy)]
pub struct PatchGrids {
    pub tangent_points: usize,
    pub angle_points: usize,
    pub hausdorff_samples: usize,
    pub far_p: usize,
    pub far_q: usize,
}

impl Default for PatchGrids {
    fn default() -> Self {
        PatchGrids { tangent_points: 100, angle_points: 1000, hausdorff_samples: 1000, far_p: 5, far_q: 200 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineChecks {
    /// One entry per check kind: the patch with the least margin.
    pub checks: Vec<CheckResult>,
    /// Every failing patch check, as `(patch, result)`.
    pub failures: Vec<(usize, CheckResult)>,
    pub probe_failures: Vec<usize>,
    pub patches: usize,
}

impl PipelineChecks {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs the tangent-distance, angle, Hausdorff, far-point and smooth-core
/// checks on every patch of `curve`, the output of a smoothing run.
pub fn verify_smoothing_run(curve: &EmbeddedCurve, report: &SmoothingReport, grids: &PatchGrids) -> Result<PipelineChecks> {
    verify_smoothing_run_with(Execution::default(), curve, report, grids)
}

pub fn verify_smoothing_run_with(
    exec: Execution,
    curve: &EmbeddedCurve,
    report: &SmoothingReport,
    grids: &PatchGrids,
) -> Result<PipelineChecks> {
    let n = curve.patches().len();
    let per_patch = par::map_indexed(exec, n, |k| patch_checks(curve, report, grids, k));
    let mut by_kind: Vec<Vec<(usize, CheckResult)>> = vec![Vec::new(); KINDS.len()];
    let mut probe_failures = Vec::new();
    for (k, res) in per_patch.into_iter().enumerate() {
        let (checks, probe) = res?;
        for (slot, c) in checks.into_iter().enumerate() {
            by_kind[slot].push((k, c));
        }
        if !probe.passed {
            probe_failures.push(k);
        }
    }
    let mut checks = Vec::with_capacity(KINDS.len() + 1);
    let mut failures = Vec::new();
    for (name, rows) in KINDS.iter().zip(by_kind) {
        let failing = rows.iter().filter(|(_, c)| !c.passed).count();
        failures.extend(rows.iter().filter(|(_, c)| !c.passed).cloned());
        let worst = rows
            .iter()
            .min_by(|a, b| margin(&a.1).total_cmp(&margin(&b.1)).then(a.0.cmp(&b.0)));
        if let Some((k, c)) = worst {
            let mut agg = CheckResult::new(
                *name,
                c.measured,
                c.bound,
                c.tolerance,
                format!("worst patch {k} of {n}; {failing} failing; {}", c.instance),
            );
            agg.passed = agg.passed && failing == 0;
            checks.push(agg);
        }
    }
    checks.push(CheckResult::new(
        "smooth_core_probe",
        probe_failures.len() as f64,
        0.0,
        0.0,
        format!("patch centres failing the fourth-difference probe, of {n}"),
    ));
    Ok(PipelineChecks { checks, failures, probe_failures, patches: n })
}

const KINDS: [&str; 4] = ["tangent_distance", "angle", "hausdorff", "far_point"];

fn margin(c: &CheckResult) -> f64 {
    let m = c.bound + c.tolerance - c.measured;
    if m.is_nan() {
        f64::NEG_INFINITY
    } else {
        m
    }
}

fn patch_checks(
    curve: &EmbeddedCurve,
    report: &SmoothingReport,
    grids: &PatchGrids,
    k: usize,
) -> Result<(Vec<CheckResult>, ProbeResult)> {
    let patch = &curve.patches()[k];
    let rho = report.rho;
    let l = patch.psi.l_combined;
    let r = report.r_input;
    let c = Domain1D::symmetric(patch.transition())?;
    let l_df = lipschitz_of(|y| patch.local(y).1, &c, grids.angle_points);

    let tangent = check_tangent_distance_bound(|y| patch.blend(y), &c, 3.0 * l * rho + l_df, grids.tangent_points);
    let angle = check_angle_bound(|y| patch.local(y).1, |y| patch.blend(y).1, l, rho, &c, grids.angle_points)?;

    // Hausdorff at the abscissa where the slopes differ most
    let grid = c.grid(c.width() / (grids.angle_points - 1) as f64);
    let y_star = grid
        .iter()
        .map(|&y| (y, (patch.blend(y).1 - patch.local(y).1).abs()))
        .fold((0.0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0;
    let hausdorff =
        check_hausdorff_bound(patch.local(y_star), patch.blend(y_star), y_star, r, rho, l, grids.hausdorff_samples)?;

    let far = far_point_checks(curve, k, r, rho, grids)?;

    let probe = probe_patch_centre(curve, k)?;
    Ok((vec![tangent, angle, hausdorff, far], probe))
}

/// Worst far-point check between points `p'` on patch `k` and curve points
/// `q'` outside its blend region, on the curve with patches `0..=k`.
fn far_point_checks(curve: &EmbeddedCurve, k: usize, r: f64, rho: f64, grids: &PatchGrids) -> Result<CheckResult> {
    let patch = &curve.patches()[k];
    let count = k + 1;
    let support = patch.transition();
    let l = curve.length();
    let mut worst: Option<CheckResult> = None;
    for i in 0..grids.far_p {
        let frac = if grids.far_p == 1 { 0.0 } else { -0.8 + 1.6 * i as f64 / (grids.far_p - 1) as f64 };
        let p = curve.eval_prefix(patch.s_center + frac * support, count);
        for j in 0..grids.far_q {
            let q = curve.eval_prefix(patch.s_center + l * (j as f64 + 0.5) / grids.far_q as f64, count);
            if (q.point - patch.center).norm() < support {
                continue;
            }
            let res = check_far_point_distance(&p.point, &p.tangent(), &q.point, r, rho, patch.psi.l_combined)?;
            if worst.as_ref().is_none_or(|w| margin(&res) < margin(w)) {
                worst = Some(res);
            }
        }
    }
    Ok(worst.unwrap_or_else(|| CheckResult::new("far_point", 0.0, 0.0, 0.0, "no far points")))
}

/// Outcome of the end-to-end check.
#[derive(Debug, Clone, Serialize)]
pub struct MainTheoremCheck {
    pub result: CheckResult,
    pub reach: CheckResult,
    pub c1: CheckResult,
    pub probe: CheckResult,
    pub report: SmoothingReport,
}

/// Relative scan tolerance on the measured reach.
pub const REACH_SCAN_TOL: f64 = 0.02;

/// Smooths `curve` and checks measured reach `>= R - eps - tol`, C^1
/// distance `<= eps`, and the smooth-core probe at every patch centre.
pub fn check_main_theorem(curve: &EmbeddedCurve, epsilon: f64) -> Result<(MainTheoremCheck, EmbeddedCurve)> {
    check_main_theorem_with(curve, &SmoothingOptions::new(epsilon))
}

pub fn check_main_theorem_with(
    curve: &EmbeddedCurve,
    opts: &SmoothingOptions,
) -> Result<(MainTheoremCheck, EmbeddedCurve)> {
    let (out, report) = smooth_manifold_with(curve, opts)?;
    let probe_failures = par::map_indexed(opts.exec, out.patches().len(), |k| probe_patch_centre(&out, k))
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .enumerate()
        .filter(|(_, p)| !p.passed)
        .count();
    let check = main_theorem_verdict(&report, probe_failures, out.patches().len());
    Ok((check, out))
}

/// Smooth-core probe at the centre of patch `k`, on the curve with patches
/// `0..=k`. Later patches only compose smooth maps, but their transition
/// layers vary on scales far below `sigma` and would need a finer ladder
/// than rounding allows.
pub fn probe_patch_centre(curve: &EmbeddedCurve, k: usize) -> Result<ProbeResult> {
    let patch = &curve.patches()[k];
    let w = patch.window;
    let prefix = curve.truncated(k + 1);
    let graph = local_graph_at_param(&prefix, patch.s_center, w)?;
    let h0 = (patch.kernel.sigma() / 8.0).min(w / 64.0);
    Ok(fourth_difference_probe(
        |y| graph.eval(y).map(|v| v.0).unwrap_or(f64::NAN),
        h0,
        patch.center.abs().max() + w,
    ))
}

/// Probe on the unsmoothed curve at parameter `s`, with window `w`.
pub fn probe_raw(curve: &EmbeddedCurve, s: f64, w: f64) -> Result<ProbeResult> {
    let graph = local_graph_at_param(curve, s, w)?;
    let centre = curve.eval(s).point;
    Ok(fourth_difference_probe(
        |y| graph.eval(y).map(|v| v.0).unwrap_or(f64::NAN),
        w / 32.0,
        centre.abs().max() + w,
    ))
}

/// Combines the three parts of the end-to-end check.
pub fn main_theorem_verdict(report: &SmoothingReport, probe_failures: usize, patches: usize) -> MainTheoremCheck {
    let r = report.r_input;
    let eps = report.epsilon;
    let tol = REACH_SCAN_TOL * r;
    let reach = CheckResult::new(
        "main_theorem_reach",
        r - report.r_hat_measured.value,
        eps,
        tol,
        format!("{}: R={r}, measured={}", report.shape, report.r_hat_measured.value),
    );
    let c1 = CheckResult::new("main_theorem_c1", report.c1_distance, eps, 0.0, format!("{}", report.shape));
    let probe = CheckResult::new(
        "main_theorem_probe",
        probe_failures as f64,
        0.0,
        0.0,
        format!("{}: failing patch centres of {patches}", report.shape),
    );
    // normalized so that <= 1 means every part holds
    let score = [
        reach.measured / (reach.bound + reach.tolerance),
        c1.measured / c1.bound,
        if probe_failures == 0 { 0.0 } else { f64::INFINITY },
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);
    let result = CheckResult::new(
        "main_theorem",
        score,
        1.0,
        0.0,
        format!(
            "{}: eps={eps}, reach loss {:e}, C1 distance {:e}, probe failures {probe_failures}",
            report.shape, reach.measured, c1.measured
        ),
    );
    MainTheoremCheck { result, reach, c1, probe, report: report.clone() }
}
