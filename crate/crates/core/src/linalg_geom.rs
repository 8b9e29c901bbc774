//! Small-dimension linear algebra: operator norms, principal angles,
//! distances to affine subspaces and sampled Hausdorff distances.
//!
//! Points and vectors are `nalgebra` static vectors, so everything here works
//! in any ambient dimension even though the smoothing pipeline only uses the
//! plane.

use nalgebra::{DMatrix, SVector};

use crate::error::{ensure_finite, invalid, Result};
use crate::par::{self, Execution};

/// A point or vector in `R^D`.
pub type VecD<const D: usize> = SVector<f64, D>;

const ORTHO_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

/// A linear subspace given by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<const D: usize> {
    basis: Vec<VecD<D>>,
}

impl<const D: usize> Subspace<D> {
    /// Orthonormalizes `spanning` with two-pass Gram–Schmidt. Vectors that
    /// are (numerically) dependent on the previous ones are rejected.
    pub fn from_spanning(spanning: &[VecD<D>]) -> Result<Self> {
        if spanning.len() > D {
            return invalid(format!("{} vectors cannot be independent in R^{D}", spanning.len()));
        }
        let mut basis: Vec<VecD<D>> = Vec::with_capacity(spanning.len());
        for v in spanning {
            ensure_finite(v.as_slice(), "spanning vector")?;
            let scale = v.norm();
            if scale == 0.0 {
                return invalid("zero spanning vector");
            }
            let mut w = *v;
            // second pass restores orthogonality lost to cancellation
            for _ in 0..2 {
                for b in &basis {
                    w -= *b * b.dot(&w);
                }
            }
            let n = w.norm();
            if n <= RANK_TOL * scale {
                return invalid("spanning vectors are linearly dependent");
            }
            basis.push(w / n);
        }
        Ok(Subspace { basis })
    }

    /// The line spanned by a single non-zero vector.
    pub fn line(direction: VecD<D>) -> Result<Self> {
        Self::from_spanning(&[direction])
    }

    pub fn ambient_dim(&self) -> usize {
        D
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[VecD<D>] {
        &self.basis
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &VecD<D>) -> VecD<D> {
        self.basis.iter().fold(VecD::<D>::zeros(), |acc, b| acc + *b * b.dot(v))
    }

    /// Coordinates of `v` in the orthonormal basis.
    pub fn coefficients(&self, v: &VecD<D>) -> Vec<f64> {
        self.basis.iter().map(|b| b.dot(v)).collect()
    }

    /// Checks the orthonormality invariant.
    pub fn is_orthonormal(&self) -> bool {
        self.basis.iter().enumerate().all(|(i, a)| {
            (a.norm() - 1.0).abs() <= ORTHO_TOL
                && self.basis[i + 1..].iter().all(|b| a.dot(b).abs() <= ORTHO_TOL)
        })
    }
}

/// `base + dir`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace<const D: usize> {
    pub base: VecD<D>,
    pub dir: Subspace<D>,
}

impl<const D: usize> AffineSubspace<D> {
    pub fn new(base: VecD<D>, dir: Subspace<D>) -> Result<Self> {
        ensure_finite(base.as_slice(), "affine base point")?;
        Ok(AffineSubspace { base, dir })
    }

    pub fn project(&self, q: &VecD<D>) -> VecD<D> {
        self.base + self.dir.project(&(q - self.base))
    }
}

/// Largest singular value of `m`, i.e. `max_{|v|=1} |Mv|`.
pub fn operator_two_norm(m: &DMatrix<f64>) -> Result<f64> {
    ensure_finite(m.as_slice(), "matrix")?;
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok(0.0);
    }
    if r == 1 || c == 1 {
        return Ok(m.norm());
    }
    if r == 2 && c == 2 {
        return Ok(two_by_two_norm(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]));
    }
    Ok(m.singular_values().max())
}

/// Closed form for the largest singular value of `[[a, b], [c, d]]`.
fn two_by_two_norm(a: f64, b: f64, c: f64, d: f64) -> f64 {
    // sigma_max = (|(a+d, c-b)| + |(a-d, c+b)|) / 2
    let s = (a + d).hypot(c - b);
    let t = (a - d).hypot(c + b);
    0.5 * (s + t)
}

/// Largest principal angle between two subspaces of equal dimension,
/// in `[0, pi/2]`.
pub fn subspace_angle<const D: usize>(a: &Subspace<D>, b: &Subspace<D>) -> Result<f64> {
    if a.dim() != b.dim() {
        return invalid(format!("subspace dimensions differ: {} vs {}", a.dim(), b.dim()));
    }
    let k = a.dim();
    if k == 0 {
        return Ok(0.0);
    }
    if k == 1 {
        let (u, v) = (a.basis[0], b.basis[0]);
        let cos = u.dot(&v).abs();
        let sin = (u - v * u.dot(&v)).norm();
        return Ok(sin.atan2(cos));
    }
    let cross = DMatrix::from_fn(k, k, |i, j| a.basis[i].dot(&b.basis[j]));
    let cos = cross.singular_values().min().clamp(0.0, 1.0);
    let residual = DMatrix::from_fn(D, k, |row, col| {
        let v = a.basis[col];
        (v - b.project(&v))[row]
    });
    let sin = operator_two_norm(&residual)?.clamp(0.0, 1.0);
    Ok(sin.atan2(cos))
}

/// Euclidean distance from `q` to the affine subspace `s`.
pub fn dist_point_to_affine<const D: usize>(q: &VecD<D>, s: &AffineSubspace<D>) -> Result<f64> {
    ensure_finite(q.as_slice(), "query point")?;
    Ok((q - s.project(q)).norm())
}

/// Largest distance from a point of `a` to its nearest point of `b`.
pub fn directed_hausdorff<const D: usize>(exec: Execution, a: &[VecD<D>], b: &[VecD<D>]) -> f64 {
    par::max_by_index(exec, a.len(), |i| {
        let p = &a[i];
        let nearest = b
            .iter()
            .map(|q| (p - q).norm_squared())
            .fold(f64::INFINITY, f64::min);
        Some((nearest, ()))
    })
    .map(|m| m.value.sqrt())
    .unwrap_or(0.0)
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff_distance_sampled<const D: usize>(a: &[VecD<D>], b: &[VecD<D>]) -> Result<f64> {
    hausdorff_distance_sampled_with(Execution::default(), a, b)
}

pub fn hausdorff_distance_sampled_with<const D: usize>(
    exec: Execution,
    a: &[VecD<D>],
    b: &[VecD<D>],
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return invalid("Hausdorff distance of an empty set");
    }
    Ok(directed_hausdorff(exec, a, b).max(directed_hausdorff(exec, b, a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Vector2, Vector3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn operator_norm_trivial_cases() {
        assert_eq!(operator_two_norm(&DMatrix::identity(2, 2)).unwrap(), 1.0);
        let d = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -2.0]);
        assert!((operator_two_norm(&d).unwrap() - 3.0).abs() < 1e-14);
        let bad = DMatrix::from_row_slice(1, 2, &[f64::NAN, 1.0]);
        assert!(operator_two_norm(&bad).is_err());
    }

    #[test]
    fn operator_norm_matches_unit_sphere_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = DMatrix::from_fn(2, 3, |_, _| rng.gen_range(-1.0..1.0));
        // Fibonacci lattice over S^2 with 10^6 directions.
        let n = 1_000_000;
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut best: f64 = 0.0;
        for i in 0..n {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            let v = nalgebra::DVector::from_vec(vec![r * th.cos(), r * th.sin(), z]);
            best = best.max((&m * v).norm());
        }
        let exact = operator_two_norm(&m).unwrap();
        assert!(exact >= best - 1e-12);
        assert!((exact - best).abs() < 1e-4, "{exact} vs {best}");
    }

    #[test]
    fn two_by_two_closed_form_agrees_with_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-5.0..5.0));
            let svd = m.singular_values().max();
            assert!((operator_two_norm(&m).unwrap() - svd).abs() < 1e-10);
        }
    }

    #[test]
    fn subspace_angle_examples() {
        let e1 = Subspace::line(Vector2::new(1.0, 0.0)).unwrap();
        assert_eq!(subspace_angle(&e1, &e1).unwrap(), 0.0);
        let diag = Subspace::line(Vector2::new(1.0, 1.0)).unwrap();
        assert!((subspace_angle(&e1, &diag).unwrap() - FRAC_PI_4).abs() < 1e-15);
        let plane = Subspace::from_spanning(&[Vector3::x(), Vector3::y()]).unwrap();
        let line = Subspace::line(Vector3::z()).unwrap();
        assert!(subspace_angle(&plane, &line).is_err());
    }

    #[test]
    fn subspace_angle_matches_max_min_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rand_vec = || Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        // lines in R^3: unit vectors of a line are +-a
        for _ in 0..5 {
            let (a, b) = (rand_vec(), rand_vec());
            let la = Subspace::line(a).unwrap();
            let lb = Subspace::line(b).unwrap();
            let angle_between = |u: &Vector3<f64>, v: &Vector3<f64>| {
                (u.dot(v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos()
            };
            let oracle = [a, -a]
                .iter()
                .map(|u| [b, -b].iter().map(|v| angle_between(u, v)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            assert!((subspace_angle(&la, &lb).unwrap() - oracle).abs() < 1e-3);
        }
        // planes in R^3: 10^4 x 10^4 sampled unit directions in each plane
        let pa = Subspace::from_spanning(&[rand_vec(), rand_vec()]).unwrap();
        let pb = Subspace::from_spanning(&[rand_vec(), rand_vec()]).unwrap();
        let n = 10_000;
        let dirs = |s: &Subspace<3>| -> Vec<Vector3<f64>> {
            (0..n)
                .map(|i| {
                    let t = PI * i as f64 / n as f64;
                    s.basis()[0] * t.cos() + s.basis()[1] * t.sin()
                })
                .collect()
        };
        let (da, db) = (dirs(&pa), dirs(&pb));
        let mut oracle: f64 = 0.0;
        for u in &da {
            // unit vectors; the +-v symmetry is the abs
            let best = db.iter().map(|v| u.dot(v).abs()).fold(0.0, f64::max);
            oracle = oracle.max(best.min(1.0).acos());
        }
        let exact = subspace_angle(&pa, &pb).unwrap();
        assert!((exact - oracle).abs() < 1e-3, "{exact} vs {oracle}");
        assert!((exact - subspace_angle(&pb, &pa).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn distance_to_affine_examples() {
        let xaxis = AffineSubspace::new(Vector2::zeros(), Subspace::line(Vector2::x()).unwrap()).unwrap();
        assert_eq!(dist_point_to_affine(&Vector2::new(0.0, 1.0), &xaxis).unwrap(), 1.0);
        assert_eq!(dist_point_to_affine(&Vector2::new(7.5, 0.0), &xaxis).unwrap(), 0.0);
    }

    #[test]
    fn distance_to_affine_matches_grid_minimization() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let base = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let dir = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalize();
            let q = Vector2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let s = AffineSubspace::new(base, Subspace::line(dir).unwrap()).unwrap();
            // grid over the parameter range that contains the foot point
            let n = 1_000_000;
            let oracle = (0..=n)
                .map(|i| {
                    let t = -6.0 + 12.0 * i as f64 / n as f64;
                    (q - (base + dir * t)).norm()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((dist_point_to_affine(&q, &s).unwrap() - oracle).abs() < 1e-5);
        }
    }

    #[test]
    fn hausdorff_examples() {
        let a = vec![Vector2::new(0.0, 0.0), Vector2::new(1.0, 2.0)];
        assert_eq!(hausdorff_distance_sampled(&a, &a).unwrap(), 0.0);
        let d = hausdorff_distance_sampled(&[Vector2::zeros()], &[Vector2::new(3.0, 4.0)]).unwrap();
        assert_eq!(d, 5.0);
        assert!(hausdorff_distance_sampled::<2>(&[], &a).is_err());
    }

    #[test]
    fn hausdorff_of_concentric_circles() {
        let circle = |r: f64, n: usize| -> Vec<Vector2<f64>> {
            (0..n)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    Vector2::new(r * t.cos(), r * t.sin())
                })
                .collect()
        };
        let n = 2000;
        let d = hausdorff_distance_sampled(&circle(1.0, n), &circle(1.1, n)).unwrap();
        // shared angles: the sampled value is exactly the radial gap
        let resolution = 1.1 * 2.0 * PI / n as f64;
        assert!((d - 0.1).abs() <= resolution, "{d}");
    }
}
