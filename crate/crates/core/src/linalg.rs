//! Dense complex linear algebra for small Hermitian problems.
//!
//! Everything here is sized for the handful-of-sites networks the rest of the
//! crate works with (dimension up to a few dozen). Matrices are stored
//! row-major in a flat `Vec`.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Elementwise tolerance for `H == H^dagger`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Elementwise tolerance for `U U^dagger == I`.
pub const UNITARY_TOL: f64 = 1e-12;
/// Tolerance on `sum |a_i|^2 == 1`.
pub const NORM_TOL: f64 = 1e-10;

/// Jacobi stops once the off-diagonal Frobenius norm drops below this
/// fraction of the input's Frobenius norm.
const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a `dim x dim` matrix from row-major entries.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::NotSquare {
                dim,
                len: entries.len(),
            });
        }
        if let Some(k) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                row: k / dim,
                col: k % dim,
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(dim, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs.dim)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.check_dim(v.len())?;
        Ok((0..self.dim)
            .map(|i| {
                self.entries[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_dim(other.dim)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Block-diagonal `self (+) other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.dim + other.dim;
        let mut out = Self::zeros(n);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..other.dim {
            for j in 0..other.dim {
                out[(self.dim + i, self.dim + j)] = other[(i, j)];
            }
        }
        out
    }

    /// Max entry of `|U U^dagger - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self
            .matmul(&self.adjoint())
            .expect("square matrix times its adjoint");
        prod.max_abs_diff(&Self::identity(self.dim))
            .expect("same dimension")
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.entries[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.entries[r * self.dim + c]
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "{}", row.join("  "))?;
        }
        Ok(())
    }
}

/// A Hermitian matrix, in energy units of the coupling strength (hbar = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.dim();
        for i in 0..n {
            for j in i..n {
                let deviation = (matrix[(i, j)] - matrix[(j, i)].conj()).norm();
                if deviation > HERMITIAN_TOL {
                    return Err(Error::NotHermitian {
                        row: i,
                        col: j,
                        deviation,
                    });
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn from_real_symmetric(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real(dim, entries)?)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eig(&self) -> Result<Spectrum> {
        eig_hermitian(self)
    }

    /// Replaces the matrix with its exact Hermitian part `(M + M^dagger) / 2`.
    pub(crate) fn from_matrix_symmetrized(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        Self { matrix: out }
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut ComplexMatrix {
        &mut self.matrix
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors stored as
/// the columns of `eigenvectors`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Column `j` of the eigenvector matrix.
    pub fn eigenvector(&self, j: usize) -> Vec<C64> {
        (0..self.dim()).map(|i| self.eigenvectors[(i, j)]).collect()
    }

    /// Orthogonal projector onto the span of the eigenvectors whose
    /// eigenvalue lies within `tol` of `value`.
    pub fn projector(&self, value: f64, tol: f64) -> ComplexMatrix {
        let n = self.dim();
        let mut p = ComplexMatrix::zeros(n);
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            if (lam - value).abs() > tol {
                continue;
            }
            for r in 0..n {
                for c in 0..n {
                    p[(r, c)] += self.eigenvectors[(r, j)] * self.eigenvectors[(c, j)].conj();
                }
            }
        }
        p
    }

    /// `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            for r in 0..n {
                let vr = self.eigenvectors[(r, j)] * lam;
                for c in 0..n {
                    out[(r, c)] += vr * self.eigenvectors[(c, j)].conj();
                }
            }
        }
        out
    }

    /// `sum_j <phi_j|psi> exp(-i lambda_j t) |phi_j>`.
    pub fn propagate(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        let n = self.dim();
        if psi.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: psi.dim(),
            });
        }
        let amps = psi.amplitudes();
        let weights: Vec<C64> = (0..n)
            .map(|j| {
                let overlap: C64 = (0..n)
                    .map(|i| self.eigenvectors[(i, j)].conj() * amps[i])
                    .sum();
                overlap * C64::from_polar(1.0, -self.eigenvalues[j] * t)
            })
            .collect();
        let out = (0..n)
            .map(|i| (0..n).map(|j| self.eigenvectors[(i, j)] * weights[j]).sum())
            .collect();
        Ok(StateVector::from_unchecked(out))
    }
}

/// Normalized amplitudes over the site basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("empty state vector".into()));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amplitudes })
    }

    /// Scales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized {
                norm_sqr: norm * norm,
            });
        }
        Self::new(amplitudes.into_iter().map(|z| z / norm).collect())
    }

    /// The single-excitation state `|r_site>` (zero-based `site`).
    pub fn basis(dim: usize, site: usize) -> Result<Self> {
        if site >= dim {
            return Err(Error::IndexOutOfRange { index: site, dim });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[site] = ONE;
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_unchecked(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, site: usize) -> C64 {
        self.amplitudes[site]
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Site occupation probabilities `|a_i|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Cyclic complex Jacobi diagonalization.
///
/// Each rotation first removes the phase of the pivot `a_pq` and then applies
/// the classic real Jacobi rotation, so the diagonal stays real throughout.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<Spectrum> {
    let n = h.dim();
    let mut a = h.matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    let threshold = JACOBI_TOL * a.frobenius_norm();

    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }

    let mut converged = false;
    let mut off = off_diagonal_norm(&a);
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        off = off_diagonal_norm(&a);
    }
    if !converged && off > threshold {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
            off_norm: off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors[(r, col)] = v[(r, src)];
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = D P with D = diag(.., 1, .., conj(phase), ..) and P the real rotation.
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Time evolution `exp(-i H t) psi0` through the spectral decomposition of `h`.
pub fn evolve(h: &HermitianOperator, psi0: &StateVector, t: f64) -> Result<StateVector> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi0.dim(),
        });
    }
    eig_hermitian(h)?.propagate(psi0, t)
}

/// `U H U^-1` for unitary `U`.
pub fn similarity_transform(h: &HermitianOperator, u: &ComplexMatrix) -> Result<HermitianOperator> {
    if u.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: u.dim(),
        });
    }
    let max_deviation = u.unitarity_defect();
    if max_deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { max_deviation });
    }
    let m = u.matmul(h.matrix())?.matmul(&u.adjoint())?;
    Ok(HermitianOperator::from_matrix_symmetrized(&m))
}
