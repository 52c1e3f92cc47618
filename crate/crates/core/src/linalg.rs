//! Hermitian eigensolvers.
//!
//! Full decompositions are delegated to nalgebra. Large operators where only
//! a few dominant eigenpairs are needed go through thick-restarted Lanczos.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenpairs sorted by descending eigenvalue; ties keep the solver's
/// original column order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector of `values[i]`.
    pub vectors: DMatrix<Complex64>,
}

const EIGEN_MAX_ITER: usize = 10_000;

pub fn hermitian_eigen(matrix: &DMatrix<Complex64>) -> Result<HermitianEigen> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch {
            expected: matrix.nrows(),
            actual: matrix.ncols(),
        });
    }
    if matrix
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let eig =
        SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(|| {
            Error::Eigen(format!(
                "no convergence for {}x{} matrix",
                matrix.nrows(),
                matrix.ncols()
            ))
        })?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    // Stable sort: equal eigenvalues stay in original index order.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(matrix.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok(HermitianEigen { values, vectors })
}

/// Size above which `dominant_eigenpairs` switches from a full
/// decomposition to restarted Lanczos.
pub const DENSE_EIGEN_LIMIT: usize = 96;

/// A Hermitian linear map applied without forming its matrix.
pub trait HermitianOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64>;
}

impl HermitianOperator for DMatrix<Complex64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        self * x
    }
}

/// Leading `count` eigenpairs of a Hermitian positive semidefinite matrix.
pub fn dominant_eigenpairs(matrix: &DMatrix<Complex64>, count: usize) -> Result<HermitianEigen> {
    let n = matrix.nrows();
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: matrix.ncols(),
        });
    }
    if count == 0 || count > n {
        return Err(Error::Domain(format!(
            "requested {count} eigenpairs of a {n}x{n} matrix"
        )));
    }
    if n <= DENSE_EIGEN_LIMIT {
        let full = hermitian_eigen(matrix)?;
        return Ok(HermitianEigen {
            values: full.values[..count].to_vec(),
            vectors: full.vectors.columns(0, count).into_owned(),
        });
    }
    if matrix
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    lanczos(matrix, count)
}

const LANCZOS_TOL: f64 = 1e-11;
const LANCZOS_MAX_RESTARTS: usize = 2000;
const CHECK_EVERY: usize = 8;

/// Deterministic start vector with no special alignment to any basis.
fn start_vector(n: usize) -> DVector<Complex64> {
    let v = DVector::from_fn(n, |i, _| {
        let h = crate::rng::splitmix64(i as u64 ^ 0x5eed);
        Complex64::from_polar(
            1.0,
            (h >> 11) as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU,
        )
    });
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Remove the components of `w` along `basis`, twice for stability.
fn orthogonalize(w: &mut DVector<Complex64>, basis: &[DVector<Complex64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = b.dotc(w);
            w.axpy(-c, b, Complex64::new(1.0, 0.0));
        }
    }
}

/// Leading eigenpairs of a Hermitian positive semidefinite operator by
/// thick-restarted Lanczos with full reorthogonalization.
pub fn lanczos<Op: HermitianOperator + ?Sized>(op: &Op, count: usize) -> Result<HermitianEigen> {
    let n = op.dim();
    if count == 0 || count > n {
        return Err(Error::Domain(format!(
            "requested {count} eigenpairs of a {n}x{n} operator"
        )));
    }
    let max_dim = n.min((2 * count + 30).max(40));
    let keep = (count + 8).min(max_dim.saturating_sub(2)).max(count);
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(max_dim);
    let mut images: Vec<DVector<Complex64>> = Vec::with_capacity(max_dim);
    let mut next = start_vector(n);

    for _ in 0..LANCZOS_MAX_RESTARTS {
        let mut exhausted = false;
        // Extract Ritz pairs every few expansions so easy problems stop early.
        let target = (basis.len() + CHECK_EVERY).min(max_dim);
        while basis.len() < target {
            let mut w = next.clone();
            orthogonalize(&mut w, &basis);
            let norm = w.norm();
            if norm.is_nan() || norm <= 1e-300 || (!basis.is_empty() && norm < 1e-13 * next.norm())
            {
                exhausted = true;
                break;
            }
            w /= Complex64::new(norm, 0.0);
            let image = op.apply(&w);
            if image.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Eigen("operator produced non-finite values".into()));
            }
            next = image.clone();
            basis.push(w);
            images.push(image);
        }
        let k = basis.len();
        if k < count {
            return Err(Error::Eigen(format!(
                "Krylov space collapsed at dimension {k} < {count}"
            )));
        }
        let v = DMatrix::from_columns(&basis);
        let av = DMatrix::from_columns(&images);
        let h = v.adjoint() * &av;
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let ritz = hermitian_eigen(&h)?;
        let scale = ritz.values[0].abs().max(f64::MIN_POSITIVE);

        let x = &v * &ritz.vectors;
        let ax = &av * &ritz.vectors;
        let mut worst: Option<DVector<Complex64>> = None;
        for j in 0..count {
            let r = ax.column(j) - x.column(j) * Complex64::new(ritz.values[j], 0.0);
            if r.norm() > LANCZOS_TOL * scale {
                worst = Some(r);
                break;
            }
        }
        match worst {
            None => {
                return Ok(HermitianEigen {
                    values: ritz.values[..count].to_vec(),
                    vectors: x.columns(0, count).into_owned(),
                });
            }
            Some(_) if exhausted || k == n => {
                return Err(Error::Eigen(format!(
                    "Lanczos stagnated for {n}x{n} operator"
                )));
            }
            Some(_) if k < max_dim => {}
            Some(r) => {
                let kept = keep.min(k);
                basis = (0..kept).map(|j| x.column(j).into_owned()).collect();
                images = (0..kept).map(|j| ax.column(j).into_owned()).collect();
                next = r;
            }
        }
    }
    Err(Error::Eigen(format!(
        "Lanczos did not converge for {n}x{n} operator"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = crate::rng::seeded(seed);
        let a = DMatrix::from_fn(n, n, |_, _| crate::rng::complex_gaussian(&mut rng, 1.0));
        &a * a.adjoint()
    }

    #[test]
    fn full_decomposition_reconstructs() {
        let r = random_hermitian(12, 3);
        let eig = hermitian_eigen(&r).unwrap();
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            12,
            eig.values.iter().map(|v| Complex64::new(*v, 0.0)),
        ));
        let back = &eig.vectors * d * eig.vectors.adjoint();
        assert!((back - &r).norm() < 1e-9 * r.norm());
    }

    #[test]
    fn ties_keep_index_order() {
        let eig = hermitian_eigen(&DMatrix::identity(5, 5)).unwrap();
        assert!(eig.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let gram = eig.vectors.adjoint() * &eig.vectors;
        assert!((gram - DMatrix::<Complex64>::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense() {
        // Rank-2 signal plus a small noise floor, like a smoothed covariance.
        let n = 150;
        let mut r = random_hermitian(n, 9) * Complex64::new(1e-3, 0.0);
        for (f, p) in [(0.01, 5.0), (0.2, 2.0)] {
            let a = DVector::from_fn(n, |i, _| {
                Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * i as f64)
            });
            r += &a * a.adjoint() * Complex64::new(p, 0.0);
        }
        let fast = dominant_eigenpairs(&r, 2).unwrap();
        let dense = hermitian_eigen(&r).unwrap();
        for k in 0..2 {
            assert!((fast.values[k] - dense.values[k]).abs() < 1e-8 * dense.values[0]);
            let overlap =
                (fast.vectors.column(k).adjoint() * dense.vectors.column(k))[(0, 0)].norm();
            assert!((overlap - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn lanczos_handles_clustered_spectrum() {
        // Eight nearly equal leading eigenvalues, as from a swept tone.
        let n = 200;
        let mut r = DMatrix::<Complex64>::identity(n, n) * Complex64::new(1e-3, 0.0);
        for i in 0..8 {
            let f = 0.001 * i as f64;
            let a = DVector::from_fn(n, |k, _| {
                Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * k as f64)
            });
            r += &a * a.adjoint();
        }
        let fast = dominant_eigenpairs(&r, 1).unwrap();
        let dense = hermitian_eigen(&r).unwrap();
        assert!((fast.values[0] - dense.values[0]).abs() < 1e-9 * dense.values[0]);
        let overlap = (fast.vectors.column(0).adjoint() * dense.vectors.column(0))[(0, 0)].norm();
        assert!((overlap - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(hermitian_eigen(&DMatrix::<Complex64>::zeros(2, 3)).is_err());
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(hermitian_eigen(&m), Err(Error::Eigen(_))));
        assert!(dominant_eigenpairs(&DMatrix::identity(3, 3), 0).is_err());
    }
}
