//! One-dimensional quadrature rules.

/// Gauss–Legendre nodes on [-1, 1] (positive half; the rule is symmetric).
const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// All eight `(node, weight)` pairs of the rule on `[-1, 1]`, ascending.
pub fn gl8_rule() -> [(f64, f64); 8] {
    let mut out = [(0.0, 0.0); 8];
    for i in 0..4 {
        out[3 - i] = (-GL8_NODES[i], GL8_WEIGHTS[i]);
        out[4 + i] = (GL8_NODES[i], GL8_WEIGHTS[i]);
    }
    out
}

/// Eight-point Gauss–Legendre rule on `[a, b]`.
#[inline]
pub fn gauss_legendre_8(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// Same rule for a pair-valued integrand.
#[inline]
pub fn gauss_legendre_8_pair(a: f64, b: f64, mut f: impl FnMut(f64) -> (f64, f64)) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let (mut s0, mut s1) = (0.0, 0.0);
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        let (l0, l1) = f(mid - half * x);
        let (r0, r1) = f(mid + half * x);
        s0 += w * (l0 + r0);
        s1 += w * (l1 + r1);
    }
    (s0 * half, s1 * half)
}

/// Composite Gauss–Legendre with `panels` equal panels.
pub fn gauss_legendre_composite(a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            gauss_legendre_8(lo, lo + h, &mut f)
        })
        .sum()
}

const MAX_DEPTH: u32 = 50;

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(a: f64, b: f64, tol: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    // one forced split so that integrands vanishing at the three initial
    // nodes are still probed
    let left = simpson_step(a, m, fa, fm, f);
    let right = simpson_step(m, b, fm, fb, f);
    recurse(left, tol * 0.5, MAX_DEPTH, f) + recurse(right, tol * 0.5, MAX_DEPTH, f)
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    estimate: f64,
}

fn simpson_step(a: f64, b: f64, fa: f64, fb: f64, f: &dyn Fn(f64) -> f64) -> Panel {
    let m = 0.5 * (a + b);
    let fm = f(m);
    Panel { a, b, fa, fm, fb, estimate: (b - a) / 6.0 * (fa + 4.0 * fm + fb) }
}

fn recurse(p: Panel, tol: f64, depth: u32, f: &dyn Fn(f64) -> f64) -> f64 {
    let m = 0.5 * (p.a + p.b);
    let left = simpson_step(p.a, m, p.fa, p.fm, f);
    let right = simpson_step(m, p.b, p.fm, p.fb, f);
    let refined = left.estimate + right.estimate;
    let delta = refined - p.estimate;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return refined + delta / 15.0;
    }
    recurse(left, 0.5 * tol, depth - 1, f) + recurse(right, 0.5 * tol, depth - 1, f)
}
