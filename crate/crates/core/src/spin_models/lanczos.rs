//! Lanczos eigensolver with full reorthogonalization and deflation.
//!
//! Finds the lowest eigenpairs of a Hermitian operator given only its
//! matrix-vector product. Degenerate multiplets are resolved by deflated
//! restarts: each pass orthogonalizes against all previously converged
//! eigenvectors, so a doubly degenerate ground space yields two passes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::eigh_real;

use super::SpinModelError;

/// Scalar abstraction so the solver runs on real or complex vectors.
pub trait LanczosScalar:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::AddAssign
    + std::ops::SubAssign
    + num_traits::Zero
{
    fn conj(self) -> Self;
    fn real(self) -> f64;
    fn abs_sqr(self) -> f64;
    fn from_f64(x: f64) -> Self;
    fn scale(self, x: f64) -> Self;
}

impl LanczosScalar for f64 {
    fn conj(self) -> Self {
        self
    }
    fn real(self) -> f64 {
        self
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
}

impl LanczosScalar for Complex64 {
    fn conj(self) -> Self {
        Complex64::new(self.re, -self.im)
    }
    fn real(self) -> f64 {
        self.re
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
}

fn dot<T: LanczosScalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * *y;
    }
    acc
}

fn norm<T: LanczosScalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.abs_sqr()).sum::<f64>().sqrt()
}

fn axpy<T: LanczosScalar>(y: &mut [T], alpha: T, x: &[T]) {
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += alpha * *xi;
    }
}

fn orthogonalize_against<T: LanczosScalar>(w: &mut [T], basis: &[Vec<T>]) {
    for v in basis {
        let c = dot(v, w);
        axpy(w, T::zero() - c, v);
    }
}

pub struct LanczosOptions {
    pub max_iter: usize,
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_iter: 400,
            residual_tol: 1e-10,
            seed: 0x5eed_1a2c,
        }
    }
}

/// Lowest eigenpair of the operator restricted to the orthogonal
/// complement of `deflate`.
pub fn lowest_eigenpair<T, F>(
    apply: &F,
    dim: usize,
    deflate: &[Vec<T>],
    opts: &LanczosOptions,
) -> Result<(f64, Vec<T>), SpinModelError>
where
    T: LanczosScalar,
    F: Fn(&[T], &mut [T]),
{
    assert!(deflate.len() < dim, "deflation space exhausts the operator");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(deflate.len() as u64));

    let mut v = vec![T::zero(); dim];
    loop {
        for x in v.iter_mut() {
            *x = T::from_f64(rng.gen_range(-1.0..1.0));
        }
        orthogonalize_against(&mut v, deflate);
        let n = norm(&v);
        if n > 1e-8 {
            let inv = 1.0 / n;
            for x in v.iter_mut() {
                *x = x.scale(inv);
            }
            break;
        }
    }

    let mut basis: Vec<Vec<T>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![T::zero(); dim];

    for step in 0..opts.max_iter {
        apply(&basis[step], &mut w);
        let alpha = dot(&basis[step], &w).real();
        alphas.push(alpha);
        {
            let a = T::from_f64(alpha);
            axpy(&mut w, T::zero() - a, &basis[step]);
        }
        if step > 0 {
            let b = T::from_f64(betas[step - 1]);
            axpy(&mut w, T::zero() - b, &basis[step - 1]);
        }
        // Full reorthogonalization, applied twice against both the Krylov
        // basis and the deflation set.
        for _ in 0..2 {
            orthogonalize_against(&mut w, &basis);
            orthogonalize_against(&mut w, deflate);
        }

        let beta = norm(&w);
        let (theta, y, converged) = smallest_ritz(&alphas, &betas, beta, opts.residual_tol);
        // beta ~ 0 means the Krylov space is invariant, so the Ritz pair is exact.
        if converged || beta < 1e-14 {
            let mut ritz = vec![T::zero(); dim];
            for (j, &c) in y.iter().enumerate() {
                axpy(&mut ritz, T::from_f64(c), &basis[j]);
            }
            // Clean the Ritz vector against the deflation set and renormalize.
            orthogonalize_against(&mut ritz, deflate);
            let n = norm(&ritz);
            if n < 1e-10 {
                return Err(SpinModelError::EigenNonConvergence {
                    iterations: step + 1,
                });
            }
            let inv = 1.0 / n;
            for x in ritz.iter_mut() {
                *x = x.scale(inv);
            }
            return Ok((theta, ritz));
        }
        if step + 1 == opts.max_iter {
            return Err(SpinModelError::EigenNonConvergence {
                iterations: opts.max_iter,
            });
        }

        betas.push(beta);
        let inv = 1.0 / beta;
        let next: Vec<T> = w.iter().map(|x| x.scale(inv)).collect();
        basis.push(next);
    }
    unreachable!("loop exits via convergence or the max_iter branch");
}

/// Smallest Ritz value of the current tridiagonal matrix, its eigenvector in
/// Krylov coordinates, and whether the residual bound passes `tol`.
fn smallest_ritz(alphas: &[f64], betas: &[f64], beta_next: f64, tol: f64) -> (f64, Vec<f64>, bool) {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let (vals, vecs) = eigh_real(&t);
    let y: Vec<f64> = vecs.column(0).iter().copied().collect();
    let residual = beta_next * y[m - 1].abs();
    (vals[0], y, residual < tol)
}

/// Lowest eigenpairs in ascending order, stopping once the next eigenvalue
/// exceeds `window` above the ground energy or `k_max` pairs are found.
pub fn lowest_eigenpairs<T, F>(
    apply: &F,
    dim: usize,
    k_max: usize,
    window: f64,
    opts: &LanczosOptions,
) -> Result<Vec<(f64, Vec<T>)>, SpinModelError>
where
    T: LanczosScalar,
    F: Fn(&[T], &mut [T]),
{
    let mut pairs: Vec<(f64, Vec<T>)> = Vec::new();
    let mut vectors: Vec<Vec<T>> = Vec::new();
    let k_max = k_max.min(dim);
    while pairs.len() < k_max {
        let (theta, v) = lowest_eigenpair(apply, dim, &vectors, opts)?;
        if let Some((e0, _)) = pairs.first() {
            if theta - e0 > window {
                break;
            }
        }
        vectors.push(v.clone());
        pairs.push((theta, v));
    }
    Ok(pairs)
}
