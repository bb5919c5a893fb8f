//! Singular values of small square matrices and the singular value function.

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Singular values `alpha_1 >= ... >= alpha_d` of a contractive injection, all in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum<T = f64> {
    alphas: Vec<T>,
}

impl<T: Real> SingularSpectrum<T> {
    /// Sorts the values and checks `0 < alpha_i < 1`.
    pub fn new(mut alphas: Vec<T>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(invalid("empty spectrum"));
        }
        if alphas.iter().any(|a| !a.is_finite()) {
            return Err(invalid("non-finite singular value"));
        }
        alphas.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
        let top = alphas[0];
        let bottom = alphas[alphas.len() - 1];
        if bottom <= T::zero() {
            return Err(Error::NotInjective(bottom.to_f64_lossy()));
        }
        if top >= T::one() {
            return Err(Error::NotContractive(top.to_f64_lossy()));
        }
        Ok(Self { alphas })
    }

    pub(crate) fn from_descending_unchecked(alphas: Vec<T>) -> Self {
        debug_assert!(alphas.windows(2).all(|w| w[0] >= w[1]));
        Self { alphas }
    }

    pub fn alphas(&self) -> &[T] {
        &self.alphas
    }

    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    pub fn largest(&self) -> T {
        self.alphas[0]
    }

    pub fn smallest(&self) -> T {
        self.alphas[self.alphas.len() - 1]
    }

    pub fn volume(&self) -> T {
        self.alphas.iter().fold(T::one(), |p, &a| p * a)
    }

    pub fn diam(&self) -> T {
        self.alphas.iter().map(|&a| a * a).sum::<T>().sqrt()
    }

    /// `Phi^s = alpha_1 ... alpha_{m-1} alpha_m^{s-(m-1)}` with `m = ceil(s)`.
    pub fn phi(&self, s: T) -> Result<T> {
        Ok(self.log_phi(s)?.exp())
    }

    /// Natural log of [`phi`](Self::phi); stays finite where `phi` underflows.
    pub fn log_phi(&self, s: T) -> Result<T> {
        log_phi_descending(&self.alphas, s)
    }
}

/// `Phi^s` of a spectrum; free-function form of [`SingularSpectrum::phi`].
pub fn phi_s<T: Real>(spec: &SingularSpectrum<T>, s: T) -> Result<T> {
    spec.phi(s)
}

/// Log of the singular value function for any positive descending values (no
/// contractivity requirement).
pub fn log_phi_descending<T: Real>(alphas: &[T], s: T) -> Result<T> {
    let d = alphas.len();
    if !(s > T::zero() && s <= T::from_count(d as u64)) {
        return Err(invalid(format!("s = {s} outside (0, {d}]")));
    }
    let m = s.ceil().to_usize().expect("small integer").max(1);
    let whole: T = alphas[..m - 1].iter().map(|a| a.ln()).sum();
    let frac = s - T::from_count((m - 1) as u64);
    Ok(whole + frac * alphas[m - 1].ln())
}

/// Singular values of a row-major `d x d` matrix that must be a contractive injection.
pub fn singular_values<T: Real>(matrix: &[T], dim: usize) -> Result<SingularSpectrum<T>> {
    let alphas = singular_values_raw(matrix, dim)?;
    let top = alphas[0];
    let bottom = alphas[dim - 1];
    if bottom <= T::lit(1e-14) {
        return Err(Error::NotInjective(bottom.to_f64_lossy()));
    }
    if top >= T::one() {
        return Err(Error::NotContractive(top.to_f64_lossy()));
    }
    Ok(SingularSpectrum::from_descending_unchecked(alphas))
}

/// Singular values in descending order, no range checks.
///
/// Cyclic Jacobi on the Gram matrix `M^T M`: rotate away each off-diagonal
/// entry in turn until the off-diagonal Frobenius norm falls below tolerance,
/// then take square roots of the diagonal.
pub fn singular_values_raw<T: Real>(matrix: &[T], dim: usize) -> Result<Vec<T>> {
    if dim == 0 || matrix.len() != dim * dim {
        return Err(invalid(format!(
            "expected {} entries for a {dim}x{dim} matrix, got {}",
            dim * dim,
            matrix.len()
        )));
    }
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(invalid("non-finite matrix entry"));
    }
    let n = dim;
    let mut g = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = (0..n).map(|r| matrix[r * n + i] * matrix[r * n + j]).sum();
        }
    }
    let scale: T = g.iter().map(|&x| x * x).sum::<T>().sqrt();
    let tol = T::lit(T::TIGHT).max(T::epsilon() * T::lit(4.0)) * scale.max(T::min_positive_value());
    let off = |g: &[T]| -> T {
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc = acc + g[i * n + j] * g[i * n + j];
                }
            }
        }
        acc.sqrt()
    };
    let mut sweeps = 0;
    while off(&g) > tol {
        sweeps += 1;
        if sweeps > 64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = g[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = g[p * n + p];
                let aqq = g[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let gkp = g[k * n + p];
                    let gkq = g[k * n + q];
                    g[k * n + p] = c * gkp - s * gkq;
                    g[k * n + q] = s * gkp + c * gkq;
                }
                for k in 0..n {
                    let gpk = g[p * n + k];
                    let gqk = g[q * n + k];
                    g[p * n + k] = c * gpk - s * gqk;
                    g[q * n + k] = s * gpk + c * gqk;
                }
            }
        }
    }
    let mut alphas: Vec<T> = (0..n).map(|i| g[i * n + i].max(T::zero()).sqrt()).collect();
    alphas.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    Ok(alphas)
}
