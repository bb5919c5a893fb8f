//! The index function `f(s) = limsup log n / (-log Phi^s(n))` and the
//! convergence exponent `s0`, the threshold where `sum Phi^s(n)` starts to converge.

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::shape::{log_phi_from_logs, ShapeKind, ShapeSequence};

/// Geometric spacing of the subsample used for the finite-window limsup.
pub const WINDOW_RATIO: f64 = 1.1;
/// Upper end of the default window for parametric families.
pub const DEFAULT_POWER_LAW_MAX: u64 = 1_000_000_000_000_000;
/// Explicit lists shorter than this are rejected by [`s0_numeric`].
pub const MIN_EXPLICIT_TERMS: u64 = 10_000;

/// Inclusive index window `[n_min, n_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub n_min: u64,
    pub n_max: u64,
}

impl Window {
    pub fn new(n_min: u64, n_max: u64) -> Result<Self> {
        if n_min < 2 {
            return Err(invalid("window must start at n >= 2"));
        }
        if n_max < n_min {
            return Err(invalid(format!("empty window [{n_min}, {n_max}]")));
        }
        Ok(Self { n_min, n_max })
    }

    /// Geometric subsample with ratio [`WINDOW_RATIO`], always including both ends.
    pub fn samples(&self) -> Vec<u64> {
        let mut out = vec![self.n_min];
        let mut n = self.n_min;
        while n < self.n_max {
            let next = ((n as f64) * WINDOW_RATIO).ceil() as u64;
            n = next.max(n + 1).min(self.n_max);
            out.push(n);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    Bisection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentReport<T = f64> {
    pub s0: T,
    pub method: Method,
    /// Sampled `(s, f(s))` pairs.
    pub f_values: Vec<(T, T)>,
    /// `None` for the analytic solver.
    pub window: Option<Window>,
}

/// Limit of `f` for a power law with ascending exponents:
/// `1 / (a_1 + ... + a_{m-1} + a_m (s - m + 1))`.
pub fn f_power_law<T: Real>(exponents: &[T], s: T) -> Result<T> {
    let d = exponents.len();
    if !(s > T::zero() && s <= T::from_count(d as u64)) {
        return Err(invalid(format!("s = {s} outside (0, {d}]")));
    }
    let m = s.ceil().to_usize().expect("small integer").max(1);
    let whole: T = exponents[..m - 1].iter().copied().sum();
    let rate = whole + exponents[m - 1] * (s - T::from_count((m - 1) as u64));
    Ok(T::one() / rate)
}

/// Finite-window estimate of `f(s)`: analytic limit for power laws, otherwise
/// [`f_hat_windowed`].
pub fn f_hat<T: Real>(seq: &ShapeSequence<T>, s: T, window: Window) -> Result<T> {
    match seq.kind() {
        ShapeKind::PowerLaw { exponents, .. } => f_power_law(exponents, s),
        _ => f_hat_windowed(seq, s, window),
    }
}

/// Maximum of `log n / (-log Phi^s(n))` over the geometric subsample of `window`.
pub fn f_hat_windowed<T: Real>(seq: &ShapeSequence<T>, s: T, window: Window) -> Result<T> {
    let mut best = T::zero();
    for n in window.samples() {
        let lp = log_phi_from_logs(&seq.log_alphas(n)?, s)?;
        if lp >= T::zero() {
            return Err(Error::NotContractiveYet { n });
        }
        best = best.max(T::from_count(n).ln() / -lp);
    }
    Ok(best)
}

/// Closed-form exponent of a power-law family.
pub fn s0_analytic<T: Real>(seq: &ShapeSequence<T>) -> Result<ExponentReport<T>> {
    let exponents = seq
        .exponents()
        .ok_or_else(|| Error::Unsupported("analytic exponent needs a power-law family".into()))?;
    let d = exponents.len();
    let mut acc = T::zero();
    let mut s0 = T::from_count(d as u64);
    for (m, &a) in exponents.iter().enumerate() {
        if acc + a >= T::one() {
            s0 = T::from_count(m as u64) + (T::one() - acc) / a;
            break;
        }
        acc = acc + a;
    }
    let f_values = sample_points(d)
        .into_iter()
        .map(|s| Ok((s, f_power_law(exponents, s)?)))
        .collect::<Result<_>>()?;
    Ok(ExponentReport {
        s0,
        method: Method::Analytic,
        f_values,
        window: None,
    })
}

/// Default window: the whole list from the first contractive index (at least 2),
/// or `[sqrt(M), M]` with `M =` [`DEFAULT_POWER_LAW_MAX`] for parametric families,
/// where small indices would bias the limsup.
pub fn default_window<T: Real>(seq: &ShapeSequence<T>) -> Result<Window> {
    let start = seq
        .first_contractive()
        .ok_or_else(|| invalid("sequence never becomes contractive"))?
        .max(2);
    match seq.len() {
        Some(len) => Window::new(start, len),
        None => Window::new(start.max(DEFAULT_POWER_LAW_MAX.isqrt()), DEFAULT_POWER_LAW_MAX),
    }
}

/// Bisection on `f(s) >= 1`, always using the finite-window estimate so that it
/// serves as an independent check of [`s0_analytic`].
pub fn s0_numeric<T: Real>(
    seq: &ShapeSequence<T>,
    tol: T,
    window: Option<Window>,
) -> Result<ExponentReport<T>> {
    if !(tol > T::zero()) {
        return Err(invalid("tolerance must be positive"));
    }
    if let Some(len) = seq.len() {
        if len < MIN_EXPLICIT_TERMS {
            return Err(Error::WindowTooSmall(format!(
                "explicit sequences need at least {MIN_EXPLICIT_TERMS} terms, got {len}"
            )));
        }
    }
    let window = match window {
        Some(w) => w,
        None => default_window(seq)?,
    };
    let d = seq.dim();
    let f = |s: T| f_hat_windowed(seq, s, window);

    let f_values = sample_points(d)
        .into_iter()
        .map(|s| Ok((s, f(s)?)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(w) = f_values.windows(2).find(|w| !(w[1].1 < w[0].1)) {
        return Err(Error::WindowTooSmall(format!(
            "f not decreasing between s = {} and s = {}",
            w[0].0, w[1].0
        )));
    }

    let top = T::from_count(d as u64);
    let s0 = if f(top)? >= T::one() {
        top
    } else {
        let (mut lo, mut hi) = (T::zero(), top);
        while hi - lo > tol {
            let mid = (lo + hi) / T::lit(2.0);
            if f(mid)? >= T::one() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        ((lo + hi) / T::lit(2.0)).max(T::min_positive_value())
    };
    Ok(ExponentReport {
        s0,
        method: Method::Bisection,
        f_values,
        window: Some(window),
    })
}

/// Eight equally spaced points in `(0, d]`.
fn sample_points<T: Real>(d: usize) -> Vec<T> {
    (1..=8)
        .map(|k| T::from_count(d as u64) * T::from_count(k) / T::lit(8.0))
        .collect()
}
