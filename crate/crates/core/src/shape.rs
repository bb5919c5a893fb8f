//! Sequences of shapes `n -> (alpha_1(n) >= ... >= alpha_d(n))`.

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::spectrum::{singular_values_raw, SingularSpectrum};

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKind<T = f64> {
    /// `alpha_i(n) = scale_i * n^(-exponent_i)`, stored with ascending exponents.
    PowerLaw { scales: Vec<T>, exponents: Vec<T> },
    /// Singular values listed per index; entry `n - 1` belongs to index `n`.
    Explicit { values: Vec<Vec<T>> },
    /// Linear maps; singular values computed on construction.
    Matrices { values: Vec<Vec<T>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSequence<T = f64> {
    dim: usize,
    kind: ShapeKind<T>,
    monotone: bool,
}

impl<T: Real> ShapeSequence<T> {
    pub fn power_law(scales: Vec<T>, exponents: Vec<T>) -> Result<Self> {
        let dim = exponents.len();
        if dim == 0 || scales.len() != dim {
            return Err(invalid(format!(
                "power law needs matching non-empty scales and exponents ({} vs {dim})",
                scales.len()
            )));
        }
        if scales
            .iter()
            .chain(&exponents)
            .any(|x| !x.is_finite() || *x <= T::zero())
        {
            return Err(invalid("scales and exponents must be positive"));
        }
        let mut pairs: Vec<(T, T)> = exponents.into_iter().zip(scales).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let (exponents, scales) = pairs.into_iter().unzip();
        Ok(Self {
            dim,
            kind: ShapeKind::PowerLaw { scales, exponents },
            monotone: true,
        })
    }

    /// Power law with unit scales.
    pub fn power_law_unit(exponents: Vec<T>) -> Result<Self> {
        Self::power_law(vec![T::one(); exponents.len()], exponents)
    }

    /// Explicit list. Rejects sequences whose sorted singular values increase
    /// somewhere unless `force` is set; forced sequences are flagged non-monotone.
    pub fn explicit(dim: usize, values: Vec<Vec<T>>, force: bool) -> Result<Self> {
        let values = normalize_rows(dim, values)?;
        let monotone = is_monotone(&values);
        if !monotone && !force {
            return Err(invalid(
                "singular values must be non-increasing in n (pass force to explore anyway)",
            ));
        }
        Ok(Self {
            dim,
            kind: ShapeKind::Explicit { values },
            monotone,
        })
    }

    /// One-dimensional explicit list `l_1, l_2, ...`.
    pub fn lengths(values: Vec<T>, force: bool) -> Result<Self> {
        Self::explicit(1, values.into_iter().map(|v| vec![v]).collect(), force)
    }

    pub fn from_matrices(dim: usize, matrices: &[Vec<T>], force: bool) -> Result<Self> {
        let values = matrices
            .iter()
            .map(|m| singular_values_raw(m, dim))
            .collect::<Result<Vec<_>>>()?;
        let values = normalize_rows(dim, values)?;
        let monotone = is_monotone(&values);
        if !monotone && !force {
            return Err(invalid("singular values of the maps must be non-increasing in n"));
        }
        Ok(Self {
            dim,
            kind: ShapeKind::Matrices { values },
            monotone,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ShapeKind<T> {
        &self.kind
    }

    pub fn is_power_law(&self) -> bool {
        matches!(self.kind, ShapeKind::PowerLaw { .. })
    }

    /// Ascending exponents of a power law.
    pub fn exponents(&self) -> Option<&[T]> {
        match &self.kind {
            ShapeKind::PowerLaw { exponents, .. } => Some(exponents),
            _ => None,
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// Number of available indices; `None` for parametric families.
    pub fn len(&self) -> Option<u64> {
        match &self.kind {
            ShapeKind::PowerLaw { .. } => None,
            ShapeKind::Explicit { values } | ShapeKind::Matrices { values } => {
                Some(values.len() as u64)
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    fn check_index(&self, n: u64) -> Result<()> {
        if n == 0 {
            return Err(invalid("shape indices start at 1"));
        }
        if let Some(len) = self.len() {
            if n > len {
                return Err(Error::StreamExhausted(n));
            }
        }
        Ok(())
    }

    /// Descending singular values at `n`; may be `>= 1` for small `n`.
    pub fn raw_alphas(&self, n: u64) -> Result<Vec<T>> {
        self.check_index(n)?;
        Ok(match &self.kind {
            ShapeKind::PowerLaw { scales, exponents } => {
                let nn = T::from_count(n);
                let mut v: Vec<T> = scales
                    .iter()
                    .zip(exponents)
                    .map(|(&c, &a)| c * nn.powf(-a))
                    .collect();
                v.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
                v
            }
            ShapeKind::Explicit { values } | ShapeKind::Matrices { values } => {
                values[(n - 1) as usize].clone()
            }
        })
    }

    /// Natural logs of the descending singular values at `n`, computed without
    /// forming the (possibly underflowing) values for power laws.
    pub fn log_alphas(&self, n: u64) -> Result<Vec<T>> {
        self.check_index(n)?;
        Ok(match &self.kind {
            ShapeKind::PowerLaw { scales, exponents } => {
                let ln = T::from_count(n).ln();
                let mut v: Vec<T> = scales
                    .iter()
                    .zip(exponents)
                    .map(|(&c, &a)| c.ln() - a * ln)
                    .collect();
                v.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
                v
            }
            _ => self.raw_alphas(n)?.into_iter().map(|a| a.ln()).collect(),
        })
    }

    /// Valid spectrum at `n`; fails while `alpha_1(n) >= 1`.
    pub fn spectrum(&self, n: u64) -> Result<SingularSpectrum<T>> {
        SingularSpectrum::new(self.raw_alphas(n)?)
    }

    pub fn log_phi(&self, n: u64, s: T) -> Result<T> {
        log_phi_from_logs(&self.log_alphas(n)?, s)
    }

    pub fn volume(&self, n: u64) -> Result<T> {
        Ok(self.raw_alphas(n)?.iter().fold(T::one(), |p, &a| p * a))
    }

    pub fn diam(&self, n: u64) -> Result<T> {
        Ok(self.raw_alphas(n)?.iter().map(|&a| a * a).sum::<T>().sqrt())
    }

    /// Smallest `n` with `alpha_1(n) < 1`.
    pub fn first_contractive(&self) -> Option<u64> {
        match &self.kind {
            ShapeKind::PowerLaw { scales, exponents } => {
                // c n^{-a} < 1  <=>  n > c^{1/a}
                let mut n = 1u64;
                for (&c, &a) in scales.iter().zip(exponents) {
                    let t = c.powf(T::one() / a).to_f64_lossy();
                    if t >= 1.0 {
                        let cand = (t.floor() as u64).saturating_add(1);
                        n = n.max(cand);
                    }
                }
                while self.raw_alphas(n).ok()?[0] >= T::one() {
                    n += 1;
                }
                Some(n)
            }
            ShapeKind::Explicit { values } | ShapeKind::Matrices { values } => values
                .iter()
                .position(|v| v[0] < T::one())
                .map(|i| i as u64 + 1),
        }
    }
}

/// `log Phi^s` from descending log singular values.
pub(crate) fn log_phi_from_logs<T: Real>(logs: &[T], s: T) -> Result<T> {
    let d = logs.len();
    if !(s > T::zero() && s <= T::from_count(d as u64)) {
        return Err(invalid(format!("s = {s} outside (0, {d}]")));
    }
    let m = s.ceil().to_usize().expect("small integer").max(1);
    let whole: T = logs[..m - 1].iter().copied().sum();
    Ok(whole + (s - T::from_count((m - 1) as u64)) * logs[m - 1])
}

fn normalize_rows<T: Real>(dim: usize, values: Vec<Vec<T>>) -> Result<Vec<Vec<T>>> {
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            if row.len() != dim {
                return Err(invalid(format!(
                    "entry {} has {} values, expected {dim}",
                    i + 1,
                    row.len()
                )));
            }
            if row.iter().any(|x| !x.is_finite() || *x <= T::zero()) {
                return Err(invalid(format!("entry {} has a non-positive value", i + 1)));
            }
            row.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
            Ok(row)
        })
        .collect()
}

fn is_monotone<T: Real>(values: &[Vec<T>]) -> bool {
    values
        .windows(2)
        .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b <= a))
}
