//! Random covers `G_n = g_n + xi_n`, covering numbers and coverage grids.

use log::warn;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::rng::XiStream;
use crate::scalar::Real;
use crate::shape::{ShapeKind, ShapeSequence};
use crate::torus::{wrap_scalar, TorusPoint, TorusRectangle};

/// Column names of the coverage CSV.
pub const COVERAGE_CSV_HEADER: &str = "N,c_min,c_mean,c_max,frac";

/// Largest `j * d` accepted for a dense grid.
const MAX_GRID_BITS: u32 = 28;

#[derive(Debug, Clone, PartialEq)]
pub struct CoverConfig<T = f64> {
    shape: ShapeSequence<T>,
    n_max: u64,
    seed: u64,
}

impl<T: Real> CoverConfig<T> {
    pub fn new(shape: ShapeSequence<T>, n_max: u64, seed: u64) -> Result<Self> {
        if n_max == 0 {
            return Err(invalid("n_max must be at least 1"));
        }
        if let Some(len) = shape.len() {
            if n_max > len {
                return Err(invalid(format!(
                    "n_max = {n_max} exceeds the {len} listed shapes"
                )));
            }
        }
        Ok(Self {
            shape,
            n_max,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn shape(&self) -> &ShapeSequence<T> {
        &self.shape
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> XiStream {
        XiStream::new(self.seed, self.dim())
    }
}

/// Axis-aligned box on the torus with corner `xi_n` and edges `alpha(n)`; axis
/// `i` carries the `i`-th largest singular value. Unlike [`TorusRectangle`]
/// there is no diameter restriction, so early covers with long edges fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverSet<T = f64> {
    index: u64,
    corner: TorusPoint<T>,
    edges: Vec<T>,
}

impl<T: Real> CoverSet<T> {
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn corner(&self) -> &TorusPoint<T> {
        &self.corner
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn volume(&self) -> T {
        self.edges.iter().fold(T::one(), |p, &e| p * e)
    }

    /// Closed containment: `(x_i - corner_i) mod 1 <= edge_i` on every axis.
    pub fn contains(&self, x: &[T]) -> bool {
        x.iter()
            .zip(self.corner.coords())
            .zip(&self.edges)
            .all(|((&x, &c), &e)| wrap_scalar(x - c) <= e)
    }

    pub fn contains_point(&self, p: &TorusPoint<T>) -> bool {
        self.contains(p.coords())
    }

    /// The same set as a [`TorusRectangle`]; fails when the diameter is `>= 1/2`.
    pub fn to_rectangle(&self) -> Result<TorusRectangle<T>> {
        TorusRectangle::axis_aligned(self.corner.clone(), self.edges.clone())
    }
}

/// The `n`-th cover. Fails while `alpha_1(n) >= 1`.
pub fn generate_cover<T: Real>(config: &CoverConfig<T>, n: u64) -> Result<CoverSet<T>> {
    if n == 0 || n > config.n_max {
        return Err(invalid(format!("index {n} outside [1, {}]", config.n_max)));
    }
    let edges = config.shape.raw_alphas(n)?;
    if edges[0] >= T::one() {
        return Err(Error::NotContractive(edges[0].to_f64_lossy()));
    }
    Ok(CoverSet {
        index: n,
        corner: config.stream().xi(n),
        edges,
    })
}

/// Covers `n_a ..= n_b`, skipping (with a warning) those with `alpha_1(n) >= 1`.
pub fn collect_covers<T: Real>(
    config: &CoverConfig<T>,
    n_a: u64,
    n_b: u64,
) -> Result<Vec<CoverSet<T>>> {
    if n_a == 0 || n_b > config.n_max {
        return Err(invalid(format!(
            "window [{n_a}, {n_b}] outside [1, {}]",
            config.n_max
        )));
    }
    if n_b < n_a {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity((n_b - n_a + 1) as usize);
    let mut skipped = 0u64;
    for (n, xi) in config.stream().iter_from::<T>(n_a) {
        if n > n_b {
            break;
        }
        let edges = config.shape.raw_alphas(n)?;
        if edges[0] >= T::one() {
            skipped += 1;
            continue;
        }
        out.push(CoverSet {
            index: n,
            corner: xi,
            edges,
        });
    }
    if skipped > 0 {
        warn!("skipped {skipped} covers with a singular value >= 1 in [{n_a}, {n_b}]");
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageStats {
    pub n: u64,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    /// Fraction of sample points covered at least once.
    pub frac: f64,
}

impl CoverageStats {
    pub fn from_counts(n: u64, counts: &[u32]) -> Self {
        if counts.is_empty() {
            return Self {
                n,
                min: 0.0,
                mean: 0.0,
                max: 0.0,
                frac: 0.0,
            };
        }
        let min = *counts.iter().min().expect("non-empty");
        let max = *counts.iter().max().expect("non-empty");
        let sum: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        let hit = counts.iter().filter(|&&c| c > 0).count();
        Self {
            n,
            min: f64::from(min),
            mean: sum as f64 / counts.len() as f64,
            max: f64::from(max),
            frac: hit as f64 / counts.len() as f64,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n, self.min, self.mean, self.max, self.frac
        )
    }
}

/// Covering numbers `C_N(x)` at `points` for every checkpoint `N` (ascending).
pub fn covering_numbers<T: Real>(
    config: &CoverConfig<T>,
    points: &[TorusPoint<T>],
    checkpoints: &[u64],
) -> Result<Vec<CoverageStats>> {
    if points.is_empty() {
        return Err(invalid("no sample points"));
    }
    if checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("checkpoints must be ascending"));
    }
    if points.iter().any(|p| p.dim() != config.dim()) {
        return Err(invalid("sample point dimension differs from the cover dimension"));
    }
    let last = checkpoints.last().copied().unwrap_or(0);
    let covers = collect_covers(config, 1, last)?;
    // counts[p][c]: covering number of point p at checkpoint c.
    let per_point: Vec<Vec<u32>> = points
        .par_iter()
        .map(|p| {
            let mut out = Vec::with_capacity(checkpoints.len());
            let mut count = 0u32;
            let mut it = covers.iter().peekable();
            for &cp in checkpoints {
                while let Some(c) = it.next_if(|c| c.index <= cp) {
                    if c.contains_point(p) {
                        count += 1;
                    }
                }
                out.push(count);
            }
            out
        })
        .collect();
    Ok(checkpoints
        .iter()
        .enumerate()
        .map(|(k, &cp)| {
            let col: Vec<u32> = per_point.iter().map(|v| v[k]).collect();
            CoverageStats::from_counts(cp, &col)
        })
        .collect())
}

/// Covering numbers `C_N(x)` at `points`.
pub fn covering_number<T: Real>(
    config: &CoverConfig<T>,
    points: &[TorusPoint<T>],
    n: u64,
) -> Result<CoverageStats> {
    Ok(covering_numbers(config, points, &[n])?[0])
}

/// Hit counts at the centers of the dyadic cells of side `2^-j` over an index window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageGrid {
    j: u32,
    dim: usize,
    window: (u64, u64),
    counts: Vec<u32>,
}

impl CoverageGrid {
    pub fn new(dim: usize, j: u32, window: (u64, u64)) -> Result<Self> {
        if dim == 0 || j == 0 {
            return Err(invalid("grid needs d >= 1 and j >= 1"));
        }
        if j.saturating_mul(dim as u32) > MAX_GRID_BITS {
            return Err(Error::ResolutionTooFine { j, d: dim });
        }
        if window.1 < window.0 {
            return Err(invalid(format!("empty window [{}, {}]", window.0, window.1)));
        }
        Ok(Self {
            j,
            dim,
            window,
            counts: vec![0; 1usize << (j as usize * dim)],
        })
    }

    /// Grid over the window `[n_a, n_b]`, rasterized in parallel over index chunks.
    pub fn accumulate<T: Real>(config: &CoverConfig<T>, n_a: u64, n_b: u64, j: u32) -> Result<Self> {
        let mut grid = Self::new(config.dim(), j, (n_a, n_b))?;
        let covers = collect_covers(config, n_a, n_b)?;
        grid.add_covers(&covers);
        Ok(grid)
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> (u64, u64) {
        self.window
    }

    pub fn side(&self) -> usize {
        1 << self.j
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Center of cell `idx`; axis 0 varies fastest.
    pub fn cell_center(&self, idx: usize) -> Vec<f64> {
        let m = self.side();
        let h = 1.0 / m as f64;
        (0..self.dim)
            .map(|i| ((idx / m.pow(i as u32)) % m) as f64 * h + 0.5 * h)
            .collect()
    }

    pub fn stats(&self) -> CoverageStats {
        CoverageStats::from_counts(self.window.1, &self.counts)
    }

    pub fn covered_fraction(&self) -> f64 {
        self.stats().frac
    }

    /// Adds the covers' indicator functions at every cell center.
    pub fn add_covers<T: Real>(&mut self, covers: &[CoverSet<T>]) {
        if covers.is_empty() {
            return;
        }
        let chunk = covers.len().div_ceil(rayon::current_num_threads()).max(4096);
        let partial = covers
            .par_chunks(chunk)
            .map(|c| self.rasterize(c))
            .reduce_with(|mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            })
            .expect("non-empty");
        self.counts
            .iter_mut()
            .zip(partial)
            .for_each(|(x, y)| *x += y);
    }

    /// Per-cell addition of another grid with the same resolution.
    pub fn merge(&mut self, other: &CoverageGrid) -> Result<()> {
        if other.j != self.j || other.dim != self.dim {
            return Err(invalid("grids differ in resolution or dimension"));
        }
        self.counts
            .iter_mut()
            .zip(&other.counts)
            .for_each(|(x, &y)| *x += y);
        self.window = (self.window.0.min(other.window.0), self.window.1.max(other.window.1));
        Ok(())
    }

    /// Difference-array rasterization: each cover contributes at most `2^d`
    /// non-wrapping boxes, each touching `2^d` entries.
    fn rasterize<T: Real>(&self, covers: &[CoverSet<T>]) -> Vec<u32> {
        let d = self.dim;
        let m = self.side();
        let ext = m + 1;
        let mut diff = vec![0i32; ext.pow(d as u32)];
        let mut ranges: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(2); d];
        for cover in covers {
            let mut empty = false;
            for (i, r) in ranges.iter_mut().enumerate() {
                r.clear();
                axis_ranges(
                    cover.corner.coords()[i].to_f64_lossy(),
                    cover.edges[i].to_f64_lossy(),
                    m,
                    r,
                );
                empty |= r.is_empty();
            }
            if empty {
                continue;
            }
            let boxes: usize = ranges.iter().map(|r| r.len()).product();
            for b in 0..boxes {
                let mut rem = b;
                let bx: Vec<(usize, usize)> = ranges
                    .iter()
                    .map(|r| {
                        let pick = r[rem % r.len()];
                        rem /= r.len();
                        pick
                    })
                    .collect();
                for mask in 0..(1usize << d) {
                    let mut idx = 0;
                    let mut stride = 1;
                    for (i, &(lo, hi)) in bx.iter().enumerate() {
                        let p = if mask >> i & 1 == 1 { hi + 1 } else { lo };
                        idx += p * stride;
                        stride *= ext;
                    }
                    diff[idx] += if mask.count_ones() % 2 == 0 { 1 } else { -1 };
                }
            }
        }
        // Prefix sums along each axis.
        let total = diff.len();
        let mut stride = 1;
        for _ in 0..d {
            for idx in 0..total {
                if (idx / stride) % ext != 0 {
                    diff[idx] += diff[idx - stride];
                }
            }
            stride *= ext;
        }
        let mut out = vec![0u32; self.counts.len()];
        for (cell, slot) in out.iter_mut().enumerate() {
            let mut idx = 0;
            let mut stride_e = 1;
            let mut rem = cell;
            for _ in 0..d {
                idx += (rem % m) * stride_e;
                rem /= m;
                stride_e *= ext;
            }
            *slot = diff[idx] as u32;
        }
        out
    }
}

/// Cells `k` of `m` whose centers `(k + 1/2)/m` lie in `[c, c + e]` mod 1, as
/// at most two non-wrapping inclusive ranges.
fn axis_ranges(c: f64, e: f64, m: usize, out: &mut Vec<(usize, usize)>) {
    let mf = m as f64;
    let lo = (c * mf - 0.5).ceil() as i64;
    let hi = ((c + e) * mf - 0.5).floor() as i64;
    if hi < lo {
        return;
    }
    let mi = m as i64;
    if hi - lo + 1 >= mi {
        out.push((0, m - 1));
        return;
    }
    let lo_w = lo.rem_euclid(mi);
    let hi_w = lo_w + (hi - lo);
    if hi_w < mi {
        out.push((lo_w as usize, hi_w as usize));
    } else {
        out.push((lo_w as usize, m - 1));
        out.push((0, (hi_w - mi) as usize));
    }
}

/// Fraction of cell centers at resolution `2^-j` covered by some `G_n`, `n` in `[n_a, n_b]`.
pub fn coverage_fraction<T: Real>(config: &CoverConfig<T>, n_a: u64, n_b: u64, j: u32) -> Result<f64> {
    Ok(CoverageGrid::accumulate(config, n_a, n_b, j)?.covered_fraction())
}

/// Grid statistics after each checkpoint of a window starting at `n_a`.
pub fn coverage_series<T: Real>(
    config: &CoverConfig<T>,
    n_a: u64,
    checkpoints: &[u64],
    j: u32,
) -> Result<Vec<CoverageStats>> {
    let last = checkpoints.last().copied().unwrap_or(n_a);
    let mut grid = CoverageGrid::new(config.dim(), j, (n_a, last))?;
    let mut start = n_a;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &cp in checkpoints {
        if cp < start.saturating_sub(1) {
            return Err(invalid("checkpoints must be ascending and at least n_a - 1"));
        }
        grid.add_covers(&collect_covers(config, start, cp)?);
        start = cp + 1;
        out.push(CoverageStats::from_counts(cp, grid.counts()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Diverges,
    Converges,
    Undecided,
}

/// Partial sum `sum_{n <= K} n^-2 exp(l_1 + ... + l_n)` and a verdict from the
/// term asymptotics of power-law lengths `c n^-a`.
pub fn shepp_partial_sum<T: Real>(lengths: &ShapeSequence<T>, k: u64) -> Result<(f64, Verdict)> {
    if lengths.dim() != 1 {
        return Err(invalid("the series is defined for one-dimensional lengths"));
    }
    if !lengths.is_monotone() {
        return Err(invalid("lengths must be non-increasing"));
    }
    let k = match lengths.len() {
        Some(len) => k.min(len),
        None => k,
    };
    let mut partial = 0.0f64;
    // Log-sum-exp accumulation keeps large exponents finite.
    let mut log_sum = f64::NEG_INFINITY;
    for n in 1..=k {
        partial += lengths.raw_alphas(n)?[0].to_f64_lossy();
        let log_term = partial - 2.0 * (n as f64).ln();
        log_sum = if log_sum == f64::NEG_INFINITY {
            log_term
        } else {
            let hi = log_sum.max(log_term);
            hi + ((log_sum - hi).exp() + (log_term - hi).exp()).ln()
        };
    }
    let value = if k == 0 { 0.0 } else { log_sum.exp() };
    let verdict = match lengths.kind() {
        ShapeKind::PowerLaw { scales, exponents } => {
            let (c, a) = (scales[0].to_f64_lossy(), exponents[0].to_f64_lossy());
            // Terms behave like n^{c-2} when a = 1, like n^-2 when a > 1, and
            // grow faster than any power when a < 1.
            if a > 1.0 || (a == 1.0 && c < 1.0) {
                Verdict::Converges
            } else {
                Verdict::Diverges
            }
        }
        _ => Verdict::Undecided,
    };
    Ok((value, verdict))
}
