//! Dense symmetric linear algebra: eigendecomposition, generalized
//! eigenvalues via Cholesky reduction, SPD solves and conjugate gradients.
//!
//! Factorizations are delegated to `nalgebra` (single-threaded, so results
//! are bit-reproducible for fixed inputs). Everything else in the crate goes
//! through the functions in this module.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative eigenvalue floor below which a matrix is rejected as not SPD.
pub const SPD_REL_TOL: f64 = 1e-12;

/// A dense symmetric matrix. Construction symmetrizes the input so that
/// `m[(i, j)] == m[(j, i)]` holds bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
                context: "square matrix",
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidParam("symmetric matrix must have dim >= 1".into()));
        }
        Ok(Self::symmetrize(m))
    }

    /// Symmetrizes a square matrix of known positive dimension.
    pub(crate) fn symmetrize(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        debug_assert_eq!(n, m.ncols());
        let mut out = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        SymMatrix(out)
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
                context: "row-major entries",
            });
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `Bᵀ A B` for a rectangular `B`.
    pub fn congruence(&self, b: &DMatrix<f64>) -> SymMatrix {
        SymMatrix::symmetrize(b.transpose() * &self.0 * b)
    }

    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.0 * v
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenPairs {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Largest absolute eigenvalue, i.e. the spectral norm.
    pub fn sigma_max(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.vectors * DMatrix::from_diagonal(&self.values) * self.vectors.transpose()
    }
}

pub fn sym_eig(a: &SymMatrix) -> Result<EigenPairs> {
    if !a.is_finite() {
        return Err(Error::NonFinite("sym_eig input"));
    }
    let eig = SymmetricEigen::new(a.0.clone());
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenPairs { values, vectors })
}

/// Cholesky factor of an SPD matrix, rejecting near-singular input.
fn spd_factor(b: &SymMatrix) -> Result<Cholesky<f64, Dyn>> {
    let eig = sym_eig(b)?;
    let (lo, hi) = (eig.min(), eig.max());
    if hi <= 0.0 || lo <= SPD_REL_TOL * hi {
        return Err(Error::NotSpd {
            lambda_min: lo,
            lambda_max: hi,
        });
    }
    Cholesky::new(b.0.clone()).ok_or(Error::NotSpd {
        lambda_min: lo,
        lambda_max: hi,
    })
}

/// All eigenvalues (ascending) of the pencil `(a, b)` with `b` SPD.
///
/// Reduces `b = L Lᵀ` and diagonalizes `L⁻¹ a L⁻ᵀ`.
pub fn gen_eig(a: &SymMatrix, b: &SymMatrix) -> Result<DVector<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            got: a.dim(),
            context: "generalized eigenproblem",
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("gen_eig input"));
    }
    let chol = spd_factor(b)?;
    let l = chol.l();
    let tmp = l
        .solve_lower_triangular(&a.0)
        .ok_or(Error::NonFinite("cholesky reduction"))?;
    let reduced = l
        .solve_lower_triangular(&tmp.transpose())
        .ok_or(Error::NonFinite("cholesky reduction"))?;
    Ok(sym_eig(&SymMatrix::symmetrize(reduced))?.values)
}

/// Extreme generalized Rayleigh quotients `min/max yᵀa y / yᵀb y`.
pub fn gen_eig_extremes(a: &SymMatrix, b: &SymMatrix) -> Result<(f64, f64)> {
    let values = gen_eig(a, b)?;
    Ok((values[0], values[values.len() - 1]))
}

pub fn spd_solve(a: &SymMatrix, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if rhs.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: rhs.len(),
            context: "spd_solve right-hand side",
        });
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("spd_solve right-hand side"));
    }
    Ok(spd_factor(a)?.solve(rhs))
}

/// Result of a conjugate-gradient solve. Non-convergence is reported here
/// rather than as an error.
#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub solution: DVector<f64>,
    pub iters: usize,
    pub converged: bool,
    pub rel_residual: f64,
}

impl CgSolution {
    pub fn into_result(self) -> Result<DVector<f64>> {
        if self.converged {
            Ok(self.solution)
        } else {
            Err(Error::NoConvergence {
                iters: self.iters,
                residual: self.rel_residual,
            })
        }
    }
}

/// Unpreconditioned conjugate gradients for an SPD operator, started from zero.
pub fn cg_solve<F>(mut apply_a: F, rhs: &DVector<f64>, rel_tol: f64, max_iter: usize) -> Result<CgSolution>
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidParam(format!("cg rel_tol {rel_tol} not in (0, 1)")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParam("cg max_iter must be >= 1".into()));
    }
    let n = rhs.len();
    let rhs_norm = rhs.norm();
    if !rhs_norm.is_finite() {
        return Err(Error::NonFinite("cg right-hand side"));
    }
    let mut x = DVector::zeros(n);
    if rhs_norm == 0.0 {
        return Ok(CgSolution {
            solution: x,
            iters: 0,
            converged: true,
            rel_residual: 0.0,
        });
    }
    let target = rel_tol * rhs_norm;
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let mut iters = 0;
    while iters < max_iter {
        let ap = apply_a(&p);
        if ap.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: ap.len(),
                context: "cg operator output",
            });
        }
        if ap.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cg operator output"));
        }
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            // operator is not positive definite along p
            break;
        }
        let alpha = rr / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        iters += 1;
        let rr_next = r.dot(&r);
        if rr_next.sqrt() <= target {
            rr = rr_next;
            break;
        }
        let beta = rr_next / rr;
        p = &r + beta * &p;
        rr = rr_next;
    }
    let true_res = (rhs - apply_a(&x)).norm();
    let rel_residual = true_res / rhs_norm;
    Ok(CgSolution {
        converged: rr.sqrt() <= target && rel_residual <= 10.0 * rel_tol,
        solution: x,
        iters,
        rel_residual,
    })
}

/// Orthonormal basis for the column space of `m`, dropping directions whose
/// singular value is below `rel_tol * sigma_max`.
pub fn orthonormal_basis(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
        .collect();
    let mut out = DMatrix::zeros(m.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &u.column(src));
    }
    out
}

/// Orthonormal basis of `{y : m y = 0}`: the complement of the row space,
/// with singular values below `rel_tol * sigma_max` treated as zero.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    orthogonal_complement(&orthonormal_basis(&m.transpose(), rel_tol))
}

/// Orthonormal basis of the orthogonal complement of `col(basis)` in `R^n`,
/// where `basis` already has orthonormal columns.
pub fn orthogonal_complement(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let n = basis.nrows();
    let proj = DMatrix::identity(n, n) - basis * basis.transpose();
    let eig = sym_eig(&SymMatrix::symmetrize(proj)).expect("projector is finite");
    let keep: Vec<usize> = (0..n).filter(|&i| eig.values[i] > 0.5).collect();
    let mut out = DMatrix::zeros(n, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &eig.vectors.column(src));
    }
    out
}

/// Largest singular value of a general matrix (0 for empty input).
pub fn sigma_max(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        SymMatrix::new(&g * g.transpose() + DMatrix::identity(n, n) * (n as f64) * 0.1).unwrap()
    }

    #[test]
    fn construction_symmetrizes_exactly() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 4.0, 3.0]);
        let s = SymMatrix::new(m).unwrap();
        assert_eq!(s.matrix()[(0, 1)], 3.0);
        assert_eq!(s.matrix()[(1, 0)], 3.0);
        assert!(SymMatrix::new(DMatrix::zeros(0, 0)).is_err());
        assert!(SymMatrix::new(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn eig_diagonal_and_identity() {
        let e = sym_eig(&SymMatrix::from_diagonal(&[2.0, 5.0])).unwrap();
        assert_eq!(e.values.as_slice(), &[2.0, 5.0]);
        assert!((e.vectors.abs() - DMatrix::identity(2, 2)).norm() < 1e-15);
        let e = sym_eig(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn eig_two_by_two_closed_form() {
        let a = SymMatrix::from_row_slice(2, &[22.0, -20.0, -20.0, 20.0]).unwrap();
        let e = sym_eig(&a).unwrap();
        let r = 401f64.sqrt();
        assert!((e.values[0] - (21.0 - r)).abs() < 1e-12);
        assert!((e.values[1] - (21.0 + r)).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_nan() {
        let a = SymMatrix::from_diagonal(&[1.0, f64::NAN]);
        assert_eq!(sym_eig(&a), Err(Error::NonFinite("sym_eig input")));
    }

    #[test]
    fn eig_pairs_and_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..12 {
            let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
            let a = SymMatrix::new(g).unwrap();
            let e = sym_eig(&a).unwrap();
            let norm = a.frobenius_norm();
            for k in 0..n {
                let v = e.vectors.column(k).into_owned();
                let res = a.mul_vec(&v) - e.values[k] * &v;
                assert!(res.norm() <= 1e-10 * norm.max(1.0));
            }
            let orth = e.vectors.transpose() * &e.vectors - DMatrix::identity(n, n);
            assert!(orth.norm() < 1e-10);
            assert!((e.reconstruct() - a.matrix()).norm() <= 1e-9 * norm.max(1e-300));
            for w in e.values.as_slice().windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn gen_eig_examples() {
        let two = SymMatrix::from_diagonal(&[2.0]);
        let (lo, hi) = gen_eig_extremes(&two, &two).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);

        let h = SymMatrix::from_row_slice(2, &[22.0, -20.0, -20.0, 20.0]).unwrap();
        let b = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let (lo, hi) = gen_eig_extremes(&h.congruence(&b), &SymMatrix::from_diagonal(&[2.0])).unwrap();
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);

        let (lo, hi) = gen_eig_extremes(&SymMatrix::from_diagonal(&[4.0, 9.0]), &SymMatrix::identity(2)).unwrap();
        assert!((lo - 4.0).abs() < 1e-14 && (hi - 9.0).abs() < 1e-14);
    }

    #[test]
    fn gen_eig_rejects_singular_metric() {
        let a = SymMatrix::identity(2);
        let b = SymMatrix::from_diagonal(&[1.0, 1e-13]);
        assert!(matches!(gen_eig_extremes(&a, &b), Err(Error::NotSpd { .. })));
        let b = SymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(gen_eig_extremes(&a, &b), Err(Error::NotSpd { .. })));
    }

    #[test]
    fn spd_solve_examples() {
        let close = |z: DVector<f64>, want: &[f64]| (z - DVector::from_column_slice(want)).norm() < 1e-14;
        let z = spd_solve(&SymMatrix::identity(2), &DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert!(close(z, &[3.0, 4.0]));
        let z = spd_solve(&SymMatrix::from_diagonal(&[2.0]), &DVector::from_vec(vec![6.0])).unwrap();
        assert!(close(z, &[3.0]));
        let z = spd_solve(&SymMatrix::from_diagonal(&[2.0, 1.0]), &DVector::from_vec(vec![2.0, 5.0])).unwrap();
        assert!(close(z, &[1.0, 5.0]));
        assert!(matches!(
            spd_solve(&SymMatrix::from_diagonal(&[1.0, 0.0]), &DVector::from_vec(vec![1.0, 1.0])),
            Err(Error::NotSpd { .. })
        ));
    }

    #[test]
    fn spd_solve_residual_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [1, 5, 30, 80] {
            let a = random_spd(n, &mut rng);
            let rhs = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let z = spd_solve(&a, &rhs).unwrap();
            assert!((a.mul_vec(&z) - &rhs).norm() <= 1e-10 * rhs.norm());
        }
    }

    #[test]
    fn cg_examples() {
        let rhs = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let sol = cg_solve(|v| v.clone(), &rhs, 1e-10, 10).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.iters, 1);
        assert!((sol.solution - &rhs).norm() < 1e-14);

        let d = SymMatrix::from_diagonal(&[2.0, 1.0]);
        let sol = cg_solve(|v| d.mul_vec(v), &DVector::from_vec(vec![2.0, 1.0]), 1e-12, 10).unwrap();
        assert!((sol.solution - DVector::from_vec(vec![1.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn cg_matches_direct_seed7() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_spd(20, &mut rng);
        let rhs = DVector::from_fn(20, |_, _| rng.random_range(-1.0..1.0));
        let direct = spd_solve(&a, &rhs).unwrap();
        let sol = cg_solve(|v| a.mul_vec(v), &rhs, 1e-12, 200).unwrap();
        assert!(sol.converged);
        assert!((sol.solution - &direct).norm() <= 1e-8 * direct.norm());
    }

    #[test]
    fn cg_reports_soft_failure_and_errors() {
        let d = SymMatrix::from_diagonal(&[1.0, 10.0, 100.0, 1000.0]);
        let rhs = DVector::from_element(4, 1.0);
        let sol = cg_solve(|v| d.mul_vec(v), &rhs, 1e-12, 1).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iters, 1);
        assert!(matches!(sol.into_result(), Err(Error::NoConvergence { .. })));
        assert!(matches!(
            cg_solve(|v| v * f64::NAN, &rhs, 1e-8, 5),
            Err(Error::NonFinite(_))
        ));
        assert!(cg_solve(|v| v.clone(), &rhs, 1.5, 5).is_err());
        assert!(cg_solve(|v| v.clone(), &rhs, 1e-8, 0).is_err());
    }

    #[test]
    fn subspace_helpers() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 0.0, 0.0]);
        let q = orthonormal_basis(&m, 1e-10);
        assert_eq!(q.ncols(), 1);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.ncols(), 1);
        assert!((&m * &ns).norm() < 1e-10);
        let comp = orthogonal_complement(&q);
        assert_eq!(comp.ncols(), 2);
        assert!((q.transpose() * &comp).norm() < 1e-12);
        assert!((sigma_max(&DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -5.0]))) - 5.0).abs() < 1e-14);
    }
}
