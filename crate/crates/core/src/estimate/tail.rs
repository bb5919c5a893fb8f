use log::warn;

use crate::error::{invalid, Result};
use crate::exponent::{default_window, f_hat_windowed};
use crate::scalar::Real;
use crate::shape::{log_phi_from_logs, ShapeKind, ShapeSequence};

/// Upper bound on `sum_{n >= start} 2^{m-1} (sqrt d)^s Phi^s(g_n)`, `m = ceil(s)`:
/// the terms up to `cap` summed explicitly plus, for power laws, the integral
/// bound on the rest. Explicit lists contribute only their listed terms.
pub fn tail_cover_sum<T: Real>(shape: &ShapeSequence<T>, s: f64, start: u64, cap: u64) -> Result<f64> {
    let d = shape.dim();
    if !(s > 0.0 && s <= d as f64) {
        return Err(invalid(format!("s = {s} outside (0, {d}]")));
    }
    if start == 0 || cap < start {
        return Err(invalid(format!("empty range [{start}, {cap}]")));
    }
    let m = s.ceil().max(1.0);
    let log_factor = (m - 1.0) * std::f64::consts::LN_2 + 0.5 * s * (d as f64).ln();
    let end = shape.len().map_or(cap, |len| cap.min(len));
    let sv = T::lit(s);
    let mut total = 0.0;
    for n in start..=end {
        let lp = log_phi_from_logs(&shape.log_alphas(n)?, sv)?.to_f64_lossy();
        total += (log_factor + lp).exp();
    }
    if let ShapeKind::PowerLaw { scales, exponents } = shape.kind() {
        if end == cap {
            total += log_factor.exp() * power_law_remainder(scales, exponents, s, cap)?;
        }
    }
    Ok(total)
}

/// `sum_{n > cap} Phi^s(c_i n^-a_i) <= C cap^{1-E} / (E - 1)` once the values are
/// ordered by exponent; infinite when `E <= 1`.
fn power_law_remainder<T: Real>(scales: &[T], exponents: &[T], s: f64, cap: u64) -> Result<f64> {
    let logs_c: Vec<f64> = scales.iter().map(|c| c.to_f64_lossy().ln()).collect();
    let a: Vec<f64> = exponents.iter().map(|x| x.to_f64_lossy()).collect();
    let m = s.ceil().max(1.0) as usize;
    let frac = s - (m - 1) as f64;
    let log_c: f64 = logs_c[..m - 1].iter().sum::<f64>() + frac * logs_c[m - 1];
    let e: f64 = a[..m - 1].iter().sum::<f64>() + frac * a[m - 1];
    // The tail order matches the exponent order once c_i n^-a_i are sorted that way.
    let ln = (cap as f64).ln();
    let ordered = (1..a.len()).all(|i| logs_c[i] - a[i] * ln <= logs_c[i - 1] - a[i - 1] * ln);
    if !ordered {
        warn!("singular values not yet ordered by exponent at n = {cap}; remainder is approximate");
    }
    if e <= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok((log_c + (1.0 - e) * ln).exp() / (e - 1.0))
}

/// `min(s0, d)` for sets comparable to balls of radius `rho_n`, where
/// `s0 = limsup log n / (-log rho_n)` is the exponent of `sum rho_n^s`.
pub fn ball_like_dimension<T: Real>(rho: &ShapeSequence<T>, d: usize) -> Result<f64> {
    if rho.dim() != 1 {
        return Err(invalid("radii must be a one-parameter sequence"));
    }
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let s0 = match rho.exponents() {
        Some(a) => 1.0 / a[0].to_f64_lossy(),
        None => f_hat_windowed(rho, T::one(), default_window(rho)?)?.to_f64_lossy(),
    };
    Ok(s0.min(d as f64))
}

/// Radius `r^{s/d}` of the dilated ball in the mass transference principle.
pub fn mtp_transform(r: f64, s: f64, d: usize) -> f64 {
    r.powf(s / d as f64)
}
