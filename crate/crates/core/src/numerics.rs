//! Dense linear-algebra kernel: symmetric eigensolver (cyclic Jacobi),
//! spectral radius via a symmetric similarity transform, discrete Lyapunov
//! solve by Kronecker vectorization, positive-definiteness check, and the
//! standard induced matrix norms.
//!
//! The design envelope is small dense matrices (n up to a few tens), exactly
//! what the dynamics and design problems produce.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, sqrt};

use crate::error::Error;
use crate::Result;

/// Symmetry tolerance on construction-time checks.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Pivot tolerance for positive definiteness.
pub const PD_PIVOT_TOL: f64 = 1e-12;
/// Relative residual bound for the Lyapunov solve.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-8;

/// Dense square matrix of finite reals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "data length {} does not match n*n for n={n}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entry".into()));
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> SquareMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn matmul(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "dimension mismatch");
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect()
    }

    pub fn add(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        SquareMatrix { n: self.n, data }
    }

    pub fn sub(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        SquareMatrix { n: self.n, data }
    }

    pub fn scale(&self, s: f64) -> SquareMatrix {
        SquareMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = fabs(self.data[i * n + j] - self.data[j * n + i]);
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetry_defect() <= tol
    }

    /// (M + M^T) / 2.
    pub fn symmetrized(&self) -> SquareMatrix {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
            }
        }
        out
    }
}

/// Cyclic Jacobi on a symmetric matrix; returns unsorted eigenvalues and the
/// accumulated orthogonal matrix (columns are eigenvectors).
fn jacobi_eigen(m: &SquareMatrix) -> (Vec<f64>, SquareMatrix) {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = SquareMatrix::identity(n);
    let scale = m.frobenius_norm().max(1.0);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if sqrt(2.0 * off) <= 1e-14 * scale {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if fabs(apq) <= 1e-300 {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + sqrt(1.0 + tau * tau))
                } else {
                    1.0 / (tau - sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v.data[k * n + p];
                    let vkq = v.data[k * n + q];
                    v.data[k * n + p] = c * vkp - s * vkq;
                    v.data[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let evs = (0..n).map(|i| a[i * n + i]).collect();
    (evs, v)
}

fn require_symmetric(m: &SquareMatrix) -> Result<()> {
    let tol = SYMMETRY_TOL * m.frobenius_norm().max(1.0);
    if !m.is_symmetric(tol) {
        return Err(Error::InvalidArgument(format!(
            "matrix not symmetric (defect {:e})",
            m.symmetry_defect()
        )));
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &SquareMatrix) -> Result<Vec<f64>> {
    require_symmetric(m)?;
    let (mut evs, _) = jacobi_eigen(m);
    evs.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(evs)
}

/// Eigen-decomposition of a symmetric matrix: (eigenvalues ascending,
/// matching eigenvector columns).
pub fn symmetric_eigen(m: &SquareMatrix) -> Result<(Vec<f64>, SquareMatrix)> {
    require_symmetric(m)?;
    let n = m.n;
    let (evs, vecs) = jacobi_eigen(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| evs[i].partial_cmp(&evs[j]).expect("finite eigenvalues"));
    let sorted_evs: Vec<f64> = order.iter().map(|&i| evs[i]).collect();
    let mut sorted_vecs = SquareMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            sorted_vecs.data[row * n + col] = vecs.data[row * n + src];
        }
    }
    Ok((sorted_evs, sorted_vecs))
}

/// Spectral radius of diag(g) * A for a symmetric adjacency A and a
/// nonnegative diagonal g, computed on the similar symmetric matrix
/// g^{1/2} A g^{1/2}. Zero entries of g just zero the matching row/column.
pub fn spectral_radius_similar(a: &SquareMatrix, gdiag: &[f64]) -> Result<f64> {
    if gdiag.len() != a.n {
        return Err(Error::InvalidArgument("diagonal length mismatch".into()));
    }
    if let Some(neg) = gdiag.iter().find(|&&g| g < 0.0) {
        return Err(Error::InvalidArgument(format!("negative diagonal entry {neg}")));
    }
    require_symmetric(a)?;
    let n = a.n;
    let roots: Vec<f64> = gdiag.iter().map(|&g| sqrt(g)).collect();
    let mut b = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            b.data[i * n + j] = roots[i] * a.get(i, j) * roots[j];
        }
    }
    let (evs, _) = jacobi_eigen(&b);
    Ok(evs.iter().fold(0.0, |acc, &l| acc.max(fabs(l))))
}

/// LU solve with partial pivoting; None if the system is singular.
fn lu_solve(mut m: Vec<f64>, n: usize, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    for col in 0..n {
        let mut piv = col;
        let mut best = fabs(m[col * n + col]);
        for row in (col + 1)..n {
            let v = fabs(m[row * n + col]);
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            rhs.swap(col, piv);
        }
        let d = m[col * n + col];
        for row in (col + 1)..n {
            let f = m[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m[row * n + k] * x[k];
        }
        x[row] = acc / m[row * n + row];
    }
    Some(x)
}

/// Solves A^T P A - P = -Q for P by eliminating the n^2-dimensional system
/// (I - A^T (x) A^T) vec(P) = vec(Q).
///
/// Requires Q symmetric positive definite; fails with an infeasible error
/// when rho(A) >= 1 (singular system or sign-indefinite solution).
pub fn solve_discrete_lyapunov(a: &SquareMatrix, q: &SquareMatrix) -> Result<SquareMatrix> {
    if a.n != q.n {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    require_symmetric(q)?;
    let (q_pd, _) = pd_check(q)?;
    if !q_pd {
        return Err(Error::InvalidArgument("Q must be positive definite".into()));
    }
    let n = a.n;
    let nn = n * n;
    // M[(i,j),(k,l)] = delta - A_ki A_lj
    let mut m = vec![0.0; nn * nn];
    for i in 0..n {
        for j in 0..n {
            let r = i * n + j;
            for k in 0..n {
                let aki = a.get(k, i);
                if aki == 0.0 {
                    continue;
                }
                for l in 0..n {
                    m[r * nn + k * n + l] -= aki * a.get(l, j);
                }
            }
            m[r * nn + r] += 1.0;
        }
    }
    let rhs: Vec<f64> = (0..nn).map(|r| q.get(r / n, r % n)).collect();
    let sol = lu_solve(m, nn, rhs).ok_or_else(|| {
        Error::Infeasible("Lyapunov system singular (rho(A) >= 1)".into())
    })?;
    let p = SquareMatrix::from_vec(n, sol)?.symmetrized();

    let (pd, _) = pd_check(&p)?;
    if !pd {
        return Err(Error::Infeasible(
            "Lyapunov solution not positive definite (rho(A) >= 1)".into(),
        ));
    }
    let residual = a
        .transpose()
        .matmul(&p)
        .matmul(a)
        .sub(&p)
        .add(q)
        .frobenius_norm();
    if residual > LYAPUNOV_RESIDUAL_TOL * q.frobenius_norm() {
        return Err(Error::Infeasible(format!(
            "Lyapunov residual {residual:e} too large (system near singular)"
        )));
    }
    Ok(p)
}

/// Cholesky-style positive definiteness test on a symmetric matrix.
/// Returns (all pivots > tolerance, smallest pivot seen).
pub fn pd_check(m: &SquareMatrix) -> Result<(bool, f64)> {
    require_symmetric(m)?;
    let n = m.n;
    let mut l = vec![0.0; n * n];
    let mut smallest = f64::INFINITY;
    for k in 0..n {
        let mut d = m.get(k, k);
        for j in 0..k {
            d -= l[k * n + j] * l[k * n + j];
        }
        if d < smallest {
            smallest = d;
        }
        if d <= PD_PIVOT_TOL {
            return Ok((false, smallest));
        }
        let dk = sqrt(d);
        l[k * n + k] = dk;
        for i in (k + 1)..n {
            let mut s = m.get(i, k);
            for j in 0..k {
                s -= l[i * n + j] * l[k * n + j];
            }
            l[i * n + k] = s / dk;
        }
    }
    Ok((true, smallest))
}

/// Induced (one-norm, infinity-norm, two-norm) of a general square matrix.
pub fn matrix_norms(m: &SquareMatrix) -> (f64, f64, f64) {
    let n = m.n;
    let mut one = 0.0_f64;
    for j in 0..n {
        let col: f64 = (0..n).map(|i| fabs(m.get(i, j))).sum();
        one = one.max(col);
    }
    let mut inf = 0.0_f64;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| fabs(m.get(i, j))).sum();
        inf = inf.max(row);
    }
    (one, inf, two_norm(m))
}

/// Spectral norm: sqrt of the largest eigenvalue of M^T M.
pub fn two_norm(m: &SquareMatrix) -> f64 {
    let mtm = m.transpose().matmul(m);
    let (evs, _) = jacobi_eigen(&mtm.symmetrized());
    let top = evs.iter().fold(0.0_f64, |acc, &l| acc.max(l));
    sqrt(top.max(0.0))
}

/// P-norm of a matrix for an SPD P: ||P^{1/2} A P^{-1/2}||_2.
pub fn p_norm_of_matrix(a: &SquareMatrix, p: &SquareMatrix) -> Result<f64> {
    if a.n != p.n {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let (evs, vecs) = symmetric_eigen(p)?;
    if evs.iter().any(|&l| l <= PD_PIVOT_TOL) {
        return Err(Error::InvalidArgument("P is not positive definite".into()));
    }
    let n = p.n;
    let mut sqrt_p = SquareMatrix::zeros(n);
    let mut inv_sqrt_p = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            let mut si = 0.0;
            for k in 0..n {
                let vv = vecs.get(i, k) * vecs.get(j, k);
                s += vv * sqrt(evs[k]);
                si += vv / sqrt(evs[k]);
            }
            sqrt_p.set(i, j, s);
            inv_sqrt_p.set(i, j, si);
        }
    }
    Ok(two_norm(&sqrt_p.matmul(a).matmul(&inv_sqrt_p)))
}
