//! Dense complex linear algebra for small Hermitian problems.
//!
//! Everything here works on square row-major matrices of `Complex64`. The
//! eigensolver is a cyclic complex Jacobi iteration: slower than a
//! tridiagonal QR, but deterministic and accurate to a few ulps, which is
//! what the bisection-based solvers downstream rely on.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};

/// Largest anti-Hermitian part that is silently symmetrized away.
pub const HERMITIAN_TOL: f64 = 1e-10;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C1;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let dim = re.len();
        check_dim(dim, im.len())?;
        for row in re.iter().chain(im.iter()) {
            check_dim(dim, row.len())?;
        }
        Ok(Self::from_fn(dim, |r, c| Complex64::new(re[r][c], im[r][c])))
    }

    pub fn from_real(rows: &[&[f64]]) -> Self {
        Self::from_fn(rows.len(), |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn re_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self[(r, c)].re).collect())
            .collect()
    }

    pub fn im_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self[(r, c)].im).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self + s * I`.
    pub fn shift(&self, s: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m[(i, i)] += s;
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self^dagger`, halved.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm() / 2.0);
            }
        }
        worst
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (m, n) = (self.dim, other.dim);
        Matrix::from_fn(m * n, |r, c| {
            self[(r / n, c / n)] * other[(r % n, c % n)]
        })
    }

    /// Block-diagonal matrix `self ⊕ other`.
    pub fn direct_sum(&self, other: &Matrix) -> Matrix {
        let (m, n) = (self.dim, other.dim);
        Matrix::from_fn(m + n, |r, c| match (r < m, c < m) {
            (true, true) => self[(r, c)],
            (false, false) => other[(r - m, c - m)],
            _ => C0,
        })
    }

    /// `self * v` for a column vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                self.data[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    /// Deviation of `self^dagger self` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Matrix::identity(self.dim))
    }

    /// `sum_k |v_k><v_k|` style outer product `u v^dagger`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Matrix {
        assert_eq!(u.len(), v.len());
        Matrix::from_fn(u.len(), |r, c| u[r] * v[c].conj())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == C0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out.data[r * n..(r + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

/// A validated Hermitian operator.
///
/// Construction symmetrizes the input as `(H + H^dagger) / 2`; inputs whose
/// anti-Hermitian part exceeds [`HERMITIAN_TOL`] are rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(Matrix);

impl Hermitian {
    pub fn new(m: Matrix) -> Result<Self> {
        let defect = m.hermitian_defect();
        if !defect.is_finite() || defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::symmetrize(m))
    }

    /// Projects onto the Hermitian part without validation. Used for
    /// results of algebra that is Hermitian by construction.
    pub fn symmetrize(m: Matrix) -> Self {
        let n = m.dim;
        let mut out = m;
        for r in 0..n {
            for c in r..n {
                let v = (out[(r, c)] + out[(c, r)].conj()) * 0.5;
                out[(r, c)] = v;
                out[(c, r)] = v.conj();
            }
        }
        Self(out)
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(Matrix::zeros(dim))
    }

    pub fn diag(values: &[f64]) -> Self {
        Self(Matrix::diag_real(values))
    }

    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        Self::new(Matrix::from_real(rows))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn add(&self, other: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> Hermitian {
        Hermitian(self.0.scale(s))
    }

    pub fn shift(&self, s: f64) -> Hermitian {
        Hermitian(self.0.shift(s))
    }

    /// `U^dagger H U`.
    pub fn conjugate_by(&self, u: &Matrix) -> Hermitian {
        Hermitian::symmetrize(&(&u.adjoint() * &self.0) * u)
    }

    pub fn kron(&self, other: &Hermitian) -> Hermitian {
        Hermitian(self.0.kron(&other.0))
    }

    pub fn direct_sum(&self, other: &Hermitian) -> Hermitian {
        Hermitian(self.0.direct_sum(&other.0))
    }

    /// `<v|H|v>`, real for Hermitian `H`.
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        let hv = self.0.apply(v);
        v.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
    }

    pub fn eig(&self) -> Spectrum {
        jacobi_eigh(&self.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eig().values
    }

    pub fn min_eig(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eig(&self) -> f64 {
        *self.eigenvalues().last().expect("dim >= 1")
    }

    /// Operator norm: the largest eigenvalue modulus.
    pub fn op_norm(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[0].abs().max(ev[ev.len() - 1].abs())
    }

    /// True iff every eigenvalue is at least `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eig() >= -tol
    }

    /// Applies a real function to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let sp = self.eig();
        let n = self.dim();
        let mut out = Matrix::zeros(n);
        for (k, &lam) in sp.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = sp.vectors[(r, k)] * w;
                for c in 0..n {
                    out[(r, c)] += vr * sp.vectors[(c, k)].conj();
                }
            }
        }
        Hermitian::symmetrize(out)
    }

    /// Hermitian part of a product, `(AB + BA) / 2`.
    pub fn jordan_product(&self, other: &Hermitian) -> Hermitian {
        let ab = &self.0 * &other.0;
        let ba = &other.0 * &self.0;
        Hermitian::symmetrize((&ab + &ba).scale(0.5))
    }
}

impl std::ops::Deref for Hermitian {
    type Target = Matrix;
    fn deref(&self) -> &Matrix {
        &self.0
    }
}

/// Eigendecomposition with ascending eigenvalues and orthonormal columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl Spectrum {
    /// `V diag(values) V^dagger`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let vd = Matrix::from_fn(n, |r, c| self.vectors[(r, c)] * self.values[c]);
        &vd * &self.vectors.adjoint()
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Eigenvalues come back ascending; each eigenvector is phase-fixed so that
/// its first non-negligible component is real and positive.
pub fn jacobi_eigh(h: &Matrix) -> Spectrum {
    let n = h.dim;
    let mut a = h.clone();
    let mut v = Matrix::identity(n);
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-16 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 || r <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / r; // e^{i phi}
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = diag(1, e^{-i phi}) * [[c, s], [-s, c]] on (p, q).
                let ph = phase.conj();
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(s, 0.0);
                let u_qp = ph * (-s);
                let u_qq = ph * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = C0;
                a[(q, p)] = C0;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = Matrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        let lead = (0..n)
            .map(|r| v[(r, src)])
            .find(|z| z.norm() > 1e-8)
            .unwrap_or(C1);
        let fix = lead.conj() / lead.norm();
        for r in 0..n {
            vectors[(r, col)] = v[(r, src)] * fix;
        }
    }
    Spectrum { values, vectors }
}

/// `||MN - NM||`, evaluated through the Hermitian operator `i(MN - NM)`.
pub fn commutator_norm(m: &Hermitian, n: &Hermitian) -> Result<f64> {
    check_dim(m.dim(), n.dim())?;
    let mn = m.matrix() * n.matrix();
    let nm = n.matrix() * m.matrix();
    let comm = (&mn - &nm).scale_c(Complex64::new(0.0, 1.0));
    Ok(Hermitian::symmetrize(comm).op_norm())
}

/// True iff `min_eig(h) >= -tol`.
pub fn psd_check(h: &Hermitian, tol: f64) -> bool {
    h.is_psd(tol)
}

/// Lower Cholesky factor of a Hermitian positive definite matrix, or `None`
/// if a non-positive pivot appears.
pub fn cholesky(a: &Matrix) -> Option<Matrix> {
    let n = a.dim;
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// `log det` from a Cholesky factor.
pub fn logdet_from_cholesky(l: &Matrix) -> f64 {
    (0..l.dim).map(|i| 2.0 * l[(i, i)].re.ln()).sum()
}

/// Inverse of a Hermitian positive definite matrix from its Cholesky factor.
pub fn inverse_from_cholesky(l: &Matrix) -> Matrix {
    let n = l.dim;
    // L^{-1} by forward substitution, column by column.
    let mut linv = Matrix::zeros(n);
    for c in 0..n {
        for r in c..n {
            let mut s = if r == c { C1 } else { C0 };
            for k in c..r {
                s -= l[(r, k)] * linv[(k, c)];
            }
            linv[(r, c)] = s / l[(r, r)];
        }
    }
    let inv = &linv.adjoint() * &linv;
    Hermitian::symmetrize(inv).into_matrix()
}

/// Solves `A x = b` for a real symmetric positive definite `A` (row-major,
/// `n x n`), overwriting `b` with the solution. Returns `false` if the
/// factorization breaks down.
pub fn spd_solve(a: &[f64], n: usize, b: &mut [f64]) -> bool {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d.is_nan() || d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    true
}

/// Haar-ish random unitary: Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    Matrix::from_fn(dim, |r, c| cols[c][r])
}

/// Random Hermitian matrix with independent Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Hermitian {
    let g = Matrix::from_fn(dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    Hermitian::symmetrize((&g + &g.adjoint()).scale(0.5))
}

/// Random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Pauli matrices.
pub fn sigma_x() -> Hermitian {
    Hermitian::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("symmetric")
}

pub fn sigma_y() -> Hermitian {
    Hermitian::symmetrize(Matrix::from_fn(2, |r, c| match (r, c) {
        (0, 1) => Complex64::new(0.0, -1.0),
        (1, 0) => Complex64::new(0.0, 1.0),
        _ => C0,
    }))
}

pub fn sigma_z() -> Hermitian {
    Hermitian::diag(&[1.0, -1.0])
}
