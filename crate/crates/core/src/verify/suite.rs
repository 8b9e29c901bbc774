//! Seeded checker sweeps.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{make_bump_kernel, DerivOrder, Domain1D, GraphFn, PiecewiseQuadratic};
use crate::manifold::{make_shape, EmbeddedCurve, ShapeSpec, V2};
use crate::partition::{make_psi0, rescale_psi, PartitionFn};
use crate::reach::analytic_reach;
use crate::smoothing::{
    blend_function, far_away_reach_bound, max_displacement, predicted_reach_bound, smooth_manifold_detailed,
    technical_rewrite_z, SmoothingOptions,
};

use super::pipeline::{main_theorem_verdict, probe_raw, verify_smoothing_run, PatchGrids};
use super::{
    check_angle_bound, check_blend_lipschitz, check_convolution_lipschitz, check_far_point_distance,
    check_hausdorff_bound, check_tangent_distance_bound, estimate_lipschitz, CheckResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemmas,
    Pipeline,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemmas" => Ok(Suite::Lemmas),
            "pipeline" => Ok(Suite::Pipeline),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidInput(format!("unknown suite '{other}' (lemmas, pipeline, all)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub convolution_draws: usize,
    pub blend_draws: usize,
    pub identity_draws: usize,
    /// Deviation targets of the blend sweep.
    pub rhos: Vec<f64>,
    /// Smoothing tolerance of the pipeline runs, relative to each reach.
    pub pipeline_epsilon: f64,
    pub pipeline_shapes: Vec<ShapeSpec>,
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        SuiteConfig {
            seed,
            convolution_draws: 100,
            blend_draws: 20,
            identity_draws: 10_000,
            rhos: vec![1e-2, 1e-3, 1e-4],
            pipeline_epsilon: 0.25,
            pipeline_shapes: vec![ShapeSpec::circle(1.0), ShapeSpec::stadium(1.0, 2.0)],
        }
    }
}

/// A failing check with what is needed to replay it.
#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub seed: u64,
    pub result: CheckResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub results: Vec<CheckResult>,
    pub failures: Vec<FailureRecord>,
}

impl SuiteOutcome {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let mut results = Vec::new();
    if matches!(suite, Suite::Lemmas | Suite::All) {
        results.extend(lemma_checks(cfg)?);
    }
    if matches!(suite, Suite::Pipeline | Suite::All) {
        results.extend(pipeline_checks(cfg)?);
    }
    for r in &mut results {
        r.passed = r.verdict() && r.passed;
    }
    let failures = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| FailureRecord { seed: cfg.seed, result: r.clone() })
        .collect();
    Ok(SuiteOutcome { results, failures })
}

/// Random nodes on `[a, b]`: `pieces` cells of comparable width.
fn random_nodes(rng: &mut ChaCha8Rng, a: f64, b: f64, pieces: usize) -> Vec<f64> {
    let h = (b - a) / pieces as f64;
    (0..=pieces)
        .map(|i| {
            if i == 0 || i == pieces {
                a + h * i as f64
            } else {
                a + h * (i as f64 + rng.gen_range(-0.3..0.3))
            }
        })
        .collect()
}

/// Piecewise-linear function on `[-1, 1]` with values in `[-1, 1]`.
pub fn random_piecewise_linear(rng: &mut ChaCha8Rng) -> PiecewiseQuadratic {
    let pieces = rng.gen_range(3..=12);
    let nodes = random_nodes(rng, -1.0, 1.0, pieces);
    let values: Vec<f64> = nodes.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    PiecewiseQuadratic::linear(nodes, &values).expect("nodes are increasing")
}

/// C^{1,1} function on `[a, b]` whose derivative is piecewise linear.
pub fn random_c11(rng: &mut ChaCha8Rng, a: f64, b: f64) -> PiecewiseQuadratic {
    let pieces = rng.gen_range(3..=10);
    let nodes = random_nodes(rng, a, b, pieces);
    let d: Vec<f64> = nodes.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    let g0 = rng.gen_range(-0.5..0.5);
    PiecewiseQuadratic::with_linear_derivative(nodes, &d, g0).expect("nodes are increasing")
}

/// Plateau function with support radius about 1.1 and a small enough
/// combined Lipschitz constant for deviation targets up to 1e-2.
pub fn sweep_partition() -> PartitionFn {
    rescale_psi(&make_psi0(), 2.5, 8.0).expect("valid scale")
}

fn tag(r: &mut CheckResult, extra: String) {
    r.instance = format!("{extra},{}", r.instance);
}

fn lemma_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let seed = cfg.seed;
    let unit = Domain1D::symmetric(1.0)?;

    // Lipschitz estimator
    let lin = PiecewiseQuadratic::linear(vec![-1.0, 1.0], &[-3.0, 3.0])?;
    let abs = PiecewiseQuadratic::linear(vec![-1.0, 0.0, 1.0], &[1.0, 0.0, 1.0])?;
    out.push(CheckResult::new(
        "lipschitz_estimate",
        (estimate_lipschitz(&lin, DerivOrder::Value, &unit, 1000) - 3.0).abs(),
        0.0,
        1e-12,
        "g=3x",
    ));
    out.push(CheckResult::new(
        "lipschitz_estimate",
        (estimate_lipschitz(&abs, DerivOrder::Value, &unit, 1001) - 1.0).abs(),
        0.0,
        1e-12,
        "g=|x|",
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for draw in 0..10 {
        let g = random_piecewise_linear(&mut rng);
        let est = estimate_lipschitz(&g, DerivOrder::Value, &unit, 100_000);
        out.push(CheckResult::new(
            "lipschitz_estimate",
            (est - g.lipschitz()).abs(),
            0.0,
            1e-9,
            format!("seed={seed},draw={draw},pieces={}", g.nodes().len() - 1),
        ));
    }

    // convolution keeps Lipschitz constants
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0001);
    for order in [DerivOrder::Value, DerivOrder::First] {
        for draw in 0..cfg.convolution_draws {
            let (g, l) = match order {
                DerivOrder::Value => {
                    let g = random_piecewise_linear(&mut rng);
                    let l = g.lipschitz();
                    (g, l)
                }
                DerivOrder::First => {
                    let g = random_c11(&mut rng, -1.0, 1.0);
                    let l = g.derivative_lipschitz();
                    (g, l)
                }
            };
            let sigma = rng.gen_range(0.05..0.3);
            let kernel = make_bump_kernel(sigma, 1)?;
            let mut r = check_convolution_lipschitz(&g, l, &kernel, order, 1000)?;
            tag(&mut r, format!("seed={seed},draw={draw}"));
            out.push(r);
        }
    }

    // blended functions
    let psi = sweep_partition();
    let wide = Domain1D::symmetric(2.0)?;
    let abs2 = PiecewiseQuadratic::linear(vec![-2.0, 0.0, 2.0], &[2.0, 0.0, 2.0])?;
    for &rho in &cfg.rhos {
        let mut r = check_blend_lipschitz(&abs2, 1.0, 0.0, &psi, rho, DerivOrder::Value, 10_000)?;
        tag(&mut r, "f=|x|".into());
        out.push(r);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0002);
    for draw in 0..cfg.blend_draws {
        let f = random_c11(&mut rng, wide.a, wide.b);
        for &rho in &cfg.rhos {
            for order in [DerivOrder::Value, DerivOrder::First] {
                let mut r =
                    check_blend_lipschitz(&f, f.lipschitz(), f.derivative_lipschitz(), &psi, rho, order, 10_000)?;
                tag(&mut r, format!("seed={seed},draw={draw}"));
                out.push(r);
            }
        }
        if draw < 5 {
            out.extend(blend_geometry_checks(&f, &psi, cfg.rhos[cfg.rhos.len() - 1], seed, draw)?);
        }
    }

    out.extend(geometry_examples()?);
    out.extend(formula_checks(cfg)?);
    Ok(out)
}

/// Tangent-distance, angle and Hausdorff checks on a blended random graph.
fn blend_geometry_checks(
    f: &PiecewiseQuadratic,
    psi: &PartitionFn,
    rho: f64,
    seed: u64,
    draw: usize,
) -> Result<Vec<CheckResult>> {
    let b = blend_function(f, psi, rho, DerivOrder::First)?;
    let c = b.region();
    let l = psi.l_combined;
    let l_df = f.derivative_lipschitz();
    let mut t = check_tangent_distance_bound(|y| b.eval(y), &c, 3.0 * l * rho + l_df, 100);
    let mut a = check_angle_bound(|y| f.deriv(y), |y| b.deriv(y), l, rho, &c, 1000)?;
    let grid = c.grid(c.width() / 999.0);
    let y = grid
        .iter()
        .map(|&y| (y, (b.deriv(y) - f.deriv(y)).abs()))
        .fold((0.0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0;
    let mut h = check_hausdorff_bound(f.eval(y), b.eval(y), y, 1.0, rho, l, 1000)?;
    for r in [&mut t, &mut a, &mut h] {
        tag(r, format!("seed={seed},draw={draw},blend"));
    }
    Ok(vec![t, a, h])
}

fn geometry_examples() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let c01 = Domain1D::new(0.0, 1.0)?;
    let mut r = check_tangent_distance_bound(|y| (0.5 * y * y, y), &c01, 1.0, 2);
    tag(&mut r, "F=x^2/2".into());
    out.push(r);
    let mut r = check_tangent_distance_bound(|y| (0.3 * y + 0.1, 0.3), &c01, 0.0, 100);
    tag(&mut r, "F affine".into());
    out.push(r);
    let mut r = check_angle_bound(|_| 0.0, |_| 0.3, 0.0, 0.3, &Domain1D::symmetric(1.0)?, 10)?;
    tag(&mut r, "g=0,h=0.3x".into());
    out.push(r);
    let mut r = check_hausdorff_bound((0.2, 0.7), (0.2 + 1e-3, 0.7), 0.0, 1.0, 1e-3, 10.0, 1000)?;
    tag(&mut r, "offset".into());
    out.push(r);
    let (p, t, q) = (V2::new(1.0, 0.0), V2::new(0.0, 1.0), V2::new(0.6, 0.8));
    let mut r = check_far_point_distance(&p, &t, &q, 1.0, 0.0, 3.0)?;
    tag(&mut r, "circle pair".into());
    out.push(r);
    Ok(out)
}

fn formula_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0003);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.identity_draws {
        let r: f64 = rng.gen_range(0.1..10.0);
        let xi: f64 = rng.gen_range(0.0..10.0);
        let z = technical_rewrite_z(r, xi)?;
        let lhs = 1.0 / (2.0 * r) + xi;
        let rhs = 1.0 / (2.0 * r - z);
        worst = worst.max((lhs - rhs).abs() / lhs.abs());
    }
    out.push(CheckResult::new(
        "rewrite_identity",
        worst,
        1e-12,
        0.0,
        format!("seed={},draws={}", cfg.seed, cfg.identity_draws),
    ));
    let (l1, r, d) = (make_psi0().l_dpsi, 1.0, 0.1);
    out.push(CheckResult::new(
        "predicted_reach_rho0",
        (predicted_reach_bound(r, d, 0.0, l1)? - r * (1.0 - d / r)).abs(),
        0.0,
        0.0,
        "R=1,delta=0.1",
    ));
    out.push(CheckResult::new(
        "far_away_eps0",
        (far_away_reach_bound(1.3, 0.0, 0.5, 4.0)? - 1.3).abs(),
        0.0,
        0.0,
        "R=1.3",
    ));
    // nonincreasing in rho, and in delta at rho = 0
    let mut violations = 0usize;
    for i in 1..40 {
        let delta = 0.0125 * i as f64;
        let mut prev = predicted_reach_bound(1.0, delta, 0.0, l1)?;
        if predicted_reach_bound(1.0, delta + 0.0125, 0.0, l1)? > prev {
            violations += 1;
        }
        for j in 0..30 {
            let v = predicted_reach_bound(1.0, delta, 1e-12 * 3f64.powi(j), l1)?;
            if v > prev {
                violations += 1;
            }
            prev = v;
        }
    }
    out.push(CheckResult::new("predicted_reach_monotone", violations as f64, 0.0, 0.0, "grid 39x30"));
    Ok(out)
}

fn pipeline_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for spec in &cfg.pipeline_shapes {
        let name = spec.name();
        let curve = make_shape(spec)?;
        let r = analytic_reach(spec)?;
        let opts = SmoothingOptions::new(cfg.pipeline_epsilon * r);
        let (after, report, _) = smooth_manifold_detailed(&curve, &opts)?;
        let checks = verify_smoothing_run(&after, &report, &PatchGrids::default())?;
        let verdict = main_theorem_verdict(&report, checks.probe_failures.len(), checks.patches);
        for mut c in checks.checks.into_iter().chain([verdict.reach, verdict.c1, verdict.result]) {
            c.name = format!("{name}/{}", c.name);
            out.push(c);
        }
        let moved = max_displacement(&curve, &after, 20_000);
        out.push(CheckResult::new(
            format!("{name}/displacement"),
            moved,
            report.rho * report.net.n_c as f64,
            0.0,
            format!("rho={:e},N_C={}", report.rho, report.net.n_c),
        ));
    }
    out.push(positive_control()?);
    Ok(out)
}

/// The fourth-difference probe must fail at a raw profile junction.
fn positive_control() -> Result<CheckResult> {
    let curve: EmbeddedCurve = make_shape(&ShapeSpec::cad_default())?;
    let s = curve.base().junction_params()[0];
    let probe = probe_raw(&curve, s, 0.02)?;
    Ok(CheckResult::new(
        "cad_profile/raw_junction_probe_fails",
        if probe.passed { 1.0 } else { 0.0 },
        0.0,
        0.0,
        format!("d4 ratio {:.3}", probe.worst_ratio),
    ))
}
