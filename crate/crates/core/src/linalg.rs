//! Small dense complex eigenproblems and matrix exponentials.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat4 = Matrix4<Complex64>;

/// Eigenvector conditioning above which exponentials fall back to the series.
pub const MAX_EIGEN_CONDITION: f64 = 1e8;

/// Right eigen-decomposition `M = V Λ V⁻¹`.
#[derive(Debug, Clone)]
pub struct Eigen4 {
    pub values: [Complex64; 4],
    /// Unit-norm eigenvectors as columns.
    pub vectors: Mat4,
    /// `None` when `vectors` is numerically singular.
    pub inverse: Option<Mat4>,
    /// `‖V‖_F ‖V⁻¹‖_F`, infinite when singular.
    pub condition: f64,
}

/// Complex Schur form `M = Q T Q*`, then back-substitution on the triangle.
///
/// Near-equal eigenvalues whose coupling in `T` also vanishes get independent
/// eigenvectors; a genuine Jordan coupling yields nearly parallel vectors and
/// an enormous condition number, which callers check.
pub fn eigen4(m: &Mat4) -> Result<Eigen4> {
    if m.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let schur = m
        .clone_owned()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let tol = 1e-13 * t.norm().max(f64::MIN_POSITIVE);
    let values = [t[(0, 0)], t[(1, 1)], t[(2, 2)], t[(3, 3)]];

    let mut w = Mat4::zeros();
    for k in 0..4 {
        w[(k, k)] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let num: Complex64 = (j + 1..=k).map(|m| t[(j, m)] * w[(m, k)]).sum();
            let mut den = t[(j, j)] - values[k];
            if den.norm() <= tol {
                if num.norm() <= tol {
                    continue;
                }
                den = Complex64::new(tol, 0.0);
            }
            w[(j, k)] = -num / den;
        }
    }
    let mut vectors = q * w;
    for mut col in vectors.column_iter_mut() {
        let n = col.norm();
        col /= Complex64::new(n, 0.0);
    }
    let inverse = vectors.try_inverse();
    let condition = match &inverse {
        Some(inv) if inv.iter().all(|z| z.is_finite()) => vectors.norm() * inv.norm(),
        _ => f64::INFINITY,
    };
    Ok(Eigen4 {
        values,
        vectors,
        inverse,
        condition,
    })
}

fn norm1(m: &Mat4) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(M)` by scaling and squaring a truncated Taylor series.
pub fn expm_series(m: &Mat4) -> Result<Mat4> {
    let n1 = norm1(m);
    if !n1.is_finite() {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let squarings = if n1 > 0.5 {
        (n1 / 0.5).log2().ceil() as i32
    } else {
        0
    };
    if squarings > 1000 {
        return Err(Error::Numerical(format!(
            "matrix norm {n1:e} too large for series exponential"
        )));
    }
    let a = m / Complex64::new(2f64.powi(squarings), 0.0);
    let mut sum = Mat4::identity();
    let mut term = Mat4::identity();
    let mut converged = false;
    for k in 1..=60 {
        term = term * a / Complex64::new(k as f64, 0.0);
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Taylor series did not converge (scaled norm {:e}, {} squarings)",
            norm1(&a),
            squarings
        )));
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng) -> Mat4 {
        Mat4::from_fn(|_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn eigenpairs_satisfy_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = random_matrix(&mut rng);
            let e = eigen4(&m).unwrap();
            for k in 0..4 {
                let v = e.vectors.column(k);
                let r = m * v - v * e.values[k];
                assert!(r.norm() < 1e-12, "residual {}", r.norm());
            }
            assert!(e.condition.is_finite());
        }
    }

    #[test]
    fn diagonal_with_repeats() {
        let m = Mat4::from_diagonal(&nalgebra::Vector4::new(
            c(0.0, 0.0),
            c(-0.5, 0.0),
            c(-0.5, 0.0),
            c(-1.0, 0.0),
        ));
        let e = eigen4(&m).unwrap();
        assert!(e.condition < 10.0, "{}", e.condition);
    }

    #[test]
    fn jordan_block_is_flagged() {
        let mut m = Mat4::zeros();
        m[(0, 1)] = c(1.0, 0.0);
        let e = eigen4(&m).unwrap();
        assert!(e.condition > MAX_EIGEN_CONDITION);
    }

    #[test]
    fn series_matches_eigen_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_matrix(&mut rng) * c(3.0, 0.0);
            let e = eigen4(&m).unwrap();
            let inv = e.inverse.unwrap();
            let exp_diag =
                Mat4::from_diagonal(&nalgebra::Vector4::from_iterator(e.values.iter().map(|l| l.exp())));
            let via_eigen = e.vectors * exp_diag * inv;
            let via_series = expm_series(&m).unwrap();
            let err = (via_eigen - via_series).norm() / via_series.norm();
            assert!(err < 1e-10, "{err}");
        }
    }

    #[test]
    fn series_of_nilpotent() {
        let mut m = Mat4::zeros();
        m[(0, 1)] = c(2.0, 0.0);
        let e = expm_series(&m).unwrap();
        assert_eq!(e[(0, 1)], c(2.0, 0.0));
        assert_eq!(e[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = Mat4::zeros();
        m[(2, 2)] = c(f64::NAN, 0.0);
        assert!(eigen4(&m).is_err());
        assert!(expm_series(&m).is_err());
    }
}
