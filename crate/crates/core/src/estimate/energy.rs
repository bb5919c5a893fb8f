use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::rng::{substream, unit, Purpose};
use crate::scalar::Real;
use crate::spectrum::singular_values;
use crate::stats::Moments;
use crate::torus::{torus_distance_unchecked, TorusPoint};

/// Default kernel cap.
pub const DEFAULT_CAP: f64 = 1e3;
/// Kernel cap of the Falconer integral.
pub const FALCONER_CAP: f64 = 1e6;
/// Truncation share above which a Falconer estimate is flagged.
pub const FALCONER_UNRELIABLE_SHARE: f64 = 0.1;
/// Samples per worker chunk; fixed so results do not depend on the thread count.
const CHUNK: u64 = 8192;

/// Monte-Carlo estimate of the truncated energy `E min(|X - Y|^-s, A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    pub s: f64,
    pub cap: f64,
    pub samples: u64,
    pub mean: f64,
    pub stderr: f64,
}

impl EnergyEstimate {
    pub const CSV_HEADER: &'static str = "s,A,mean,stderr,n_samples";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.s, self.cap, self.mean, self.stderr, self.samples
        )
    }
}

/// `min(r^-s, cap)`, with `r = 0` mapped to the cap.
#[inline]
pub fn capped_kernel(r: f64, s: f64, cap: f64) -> f64 {
    if r <= 0.0 {
        cap
    } else {
        r.powf(-s).min(cap)
    }
}

/// Splits `samples` into fixed chunks, each with its own substream, and merges
/// per-cap moments in chunk order.
fn chunked<F>(samples: u64, seed: u64, purpose: Purpose, caps: usize, per_sample: F) -> Vec<Moments>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Vec<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, purpose, c);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut acc = vec![Moments::default(); caps];
            let mut vals = vec![0.0; caps];
            for _ in 0..len {
                per_sample(&mut rng, &mut vals);
                acc.iter_mut().zip(&vals).for_each(|(m, &v)| m.push(v));
            }
            acc
        })
        .collect();
    parts.into_iter().fold(vec![Moments::default(); caps], |acc, p| {
        acc.into_iter().zip(p).map(|(a, b)| a.merge(b)).collect()
    })
}

/// Truncated `s`-energy of the law produced by `sampler`, for several caps on
/// the same random pairs.
pub fn energy_mc_caps<T, F>(sampler: F, s: f64, caps: &[f64], samples: u64, seed: u64) -> Result<Vec<EnergyEstimate>>
where
    T: Real,
    F: Fn(&mut ChaCha8Rng) -> Result<TorusPoint<T>> + Sync,
{
    if !(s > 0.0) {
        return Err(invalid("s must be positive"));
    }
    if caps.is_empty() || caps.iter().any(|&a| !(a > 0.0)) {
        return Err(invalid("caps must be positive"));
    }
    if samples == 0 {
        return Err(invalid("at least one sample is required"));
    }
    // Surface sampler errors before the parallel loop.
    sampler(&mut substream(seed, Purpose::Energy, u64::MAX >> 8))?;
    let moments = chunked(samples, seed, Purpose::Energy, caps.len(), |rng, out| {
        let x = sampler(rng).expect("sampler checked");
        let y = sampler(rng).expect("sampler checked");
        let r = torus_distance_unchecked(x.coords(), y.coords()).to_f64_lossy();
        for (o, &cap) in out.iter_mut().zip(caps) {
            *o = capped_kernel(r, s, cap);
        }
    });
    Ok(caps
        .iter()
        .zip(moments)
        .map(|(&cap, m)| EnergyEstimate {
            s,
            cap,
            samples,
            mean: m.mean,
            stderr: m.stderr(),
        })
        .collect())
}

/// Truncated `s`-energy of the law produced by `sampler`.
pub fn energy_mc<T, F>(sampler: F, s: f64, cap: f64, samples: u64, seed: u64) -> Result<EnergyEstimate>
where
    T: Real,
    F: Fn(&mut ChaCha8Rng) -> Result<TorusPoint<T>> + Sync,
{
    Ok(energy_mc_caps(sampler, s, &[cap], samples, seed)?[0])
}

/// Sampler for the uniform law on the torus.
pub fn uniform_sampler<T: Real>(dim: usize) -> impl Fn(&mut ChaCha8Rng) -> Result<TorusPoint<T>> + Sync {
    move |rng| Ok(crate::rng::sample_xi(rng, dim))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FalconerResult {
    pub s: f64,
    /// Estimate of `int_{[0,1]^d} min(|Tx|^-s, A) dx`.
    pub integral: f64,
    pub stderr: f64,
    pub phi: f64,
    /// `integral * phi`: the empirical constant.
    pub product: f64,
    pub product_stderr: f64,
    /// Share of the integral contributed by capped samples.
    pub trunc_share: f64,
    pub unreliable: bool,
}

impl FalconerResult {
    pub const CSV_HEADER: &'static str = "s,integral,phi,product,trunc_share";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.s, self.integral, self.phi, self.product, self.trunc_share
        )
    }
}

/// Monte-Carlo check of `int |Tx|^-s dx <= D / Phi^s(T)` for a row-major matrix `T`.
pub fn falconer_check(matrix: &[f64], dim: usize, s: f64, samples: u64, seed: u64) -> Result<FalconerResult> {
    if !(s > 0.0 && s < dim as f64) || s.fract() == 0.0 {
        return Err(invalid(format!("s = {s} must be non-integral in (0, {dim})")));
    }
    if samples == 0 {
        return Err(invalid("at least one sample is required"));
    }
    let spec = singular_values(matrix, dim)?;
    let phi = spec.phi(s)?;
    let cap = FALCONER_CAP;
    // Two tracked values per sample: the capped kernel and its capped part.
    let moments = chunked(samples, seed, Purpose::Falconer, 2, |rng, out| {
        let x: Vec<f64> = (0..dim).map(|_| unit::<f64, _>(rng)).collect();
        let r = (0..dim)
            .map(|i| {
                let v: f64 = (0..dim).map(|c| matrix[i * dim + c] * x[c]).sum();
                v * v
            })
            .sum::<f64>()
            .sqrt();
        let k = capped_kernel(r, s, cap);
        out[0] = k;
        out[1] = if k >= cap { cap } else { 0.0 };
    });
    let integral = moments[0].mean;
    let stderr = moments[0].stderr();
    let trunc_share = if integral > 0.0 {
        moments[1].mean / integral
    } else {
        0.0
    };
    Ok(FalconerResult {
        s,
        integral,
        stderr,
        phi,
        product: integral * phi,
        product_stderr: stderr * phi,
        trunc_share,
        unreliable: trunc_share > FALCONER_UNRELIABLE_SHARE,
    })
}
