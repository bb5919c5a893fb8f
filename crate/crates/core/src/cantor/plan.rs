use crate::error::{invalid, Condition, Error, Result};
use crate::exponent::{default_window, f_hat};
use crate::scalar::Real;
use crate::shape::ShapeSequence;

use super::shrink::ShrinkSequence;

/// Indices above this are treated as unreachable.
const INDEX_CAP: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Diameter, volume and double-exponential growth conditions, at least one child per parent.
    Strict,
    /// Diameter condition, geometric growth and a branching floor; the volume
    /// condition is evaluated and reported only.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOptions<T = f64> {
    pub shrink: ShrinkSequence<T>,
    /// Children per parent required in relaxed mode.
    pub min_branching: u64,
    /// Relaxed growth `n_k >= factor * n_{k-1}`.
    pub growth_factor: u64,
}

impl<T: Real> Default for PlanOptions<T> {
    fn default() -> Self {
        Self {
            shrink: ShrinkSequence::Dyadic,
            min_branching: 2,
            growth_factor: 4,
        }
    }
}

/// One level of a plan. Counts depend only on the plan, never on the draws.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSpec<T = f64> {
    pub k: usize,
    pub n: u64,
    pub n_prev: u64,
    /// Block length per parent.
    pub m: u64,
    /// Children per parent.
    pub big_m: u64,
    /// Nodes at this level.
    pub big_n: u64,
    /// Nodes at the previous level.
    pub big_n_prev: u64,
    /// Shrink ratio `a_{k-1}` applied to parents.
    pub a: T,
    /// Volume of the previous level's shape (1 for the whole torus).
    pub vol_prev: T,
    /// Conditions whose individual minimum equals the chosen index.
    pub binding: Vec<Condition>,
    /// Whether the volume condition holds at the chosen index.
    pub volume_ok: bool,
    /// Failure bound for the success event of this level, capped at 1.
    pub p: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelPlan<T = f64> {
    shape: ShapeSequence<T>,
    s: T,
    f: T,
    mode: Mode,
    options: PlanOptions<T>,
    levels: Vec<LevelSpec<T>>,
}

impl<T: Real> LevelPlan<T> {
    pub fn shape(&self) -> &ShapeSequence<T> {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn s(&self) -> T {
        self.s
    }

    /// Index function value used for the volume condition.
    pub fn f(&self) -> T {
        self.f
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn options(&self) -> &PlanOptions<T> {
        &self.options
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[LevelSpec<T>] {
        &self.levels
    }

    /// Level `k >= 1`.
    pub fn level(&self, k: usize) -> Result<&LevelSpec<T>> {
        k.checked_sub(1)
            .and_then(|i| self.levels.get(i))
            .ok_or_else(|| invalid(format!("plan has no level {k}")))
    }

    /// `n_k`, with `n_0 = 0`.
    pub fn n(&self, k: usize) -> u64 {
        if k == 0 {
            0
        } else {
            self.levels[k - 1].n
        }
    }

    /// `N_k`, with `N_0 = 1`.
    pub fn big_n(&self, k: usize) -> u64 {
        if k == 0 {
            1
        } else {
            self.levels[k - 1].big_n
        }
    }

    /// Singular values of the level-`k` shape, descending.
    pub fn edges(&self, k: usize) -> Result<Vec<T>> {
        self.shape.raw_alphas(self.n(k))
    }
}

/// Exponent `(3 + f) / (2 + 2f)` of the volume condition.
fn volume_exponent<T: Real>(f: T) -> T {
    (T::lit(3.0) + f) / (T::lit(2.0) + T::lit(2.0) * f)
}

/// Smallest `n` in `[lo, cap]` with `pred(n)`, assuming `pred` is monotone.
fn smallest_index(lo: u64, cap: u64, pred: impl Fn(u64) -> bool) -> Option<u64> {
    if lo > cap {
        return None;
    }
    if pred(lo) {
        return Some(lo);
    }
    let mut bad = lo;
    let mut step = 1u64;
    let good = loop {
        let probe = bad.saturating_add(step).min(cap);
        if pred(probe) {
            break probe;
        }
        if probe == cap {
            return None;
        }
        bad = probe;
        step = step.saturating_mul(2);
    };
    let (mut lo, mut hi) = (bad, good);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn ceil_exp(x: f64) -> Option<u64> {
    let v = x.exp().ceil();
    (v.is_finite() && v < INDEX_CAP as f64).then_some(v as u64)
}

/// Greedy plan: each `n_k` is the smallest index meeting every active condition.
pub fn plan_levels<T: Real>(
    shape: &ShapeSequence<T>,
    s: T,
    levels: usize,
    mode: Mode,
    options: PlanOptions<T>,
) -> Result<LevelPlan<T>> {
    if levels == 0 {
        return Err(invalid("at least one level is required"));
    }
    if options.min_branching == 0 || options.growth_factor == 0 {
        return Err(invalid("branching floor and growth factor must be positive"));
    }
    let d = shape.dim();
    if !(s > T::zero() && s <= T::from_count(d as u64)) {
        return Err(invalid(format!("s = {s} outside (0, {d}]")));
    }
    let f = f_hat(shape, s, default_window(shape)?)?;
    if !(f > T::one()) {
        return Err(invalid(format!(
            "s = {s} is not below the convergence exponent (f(s) = {f})"
        )));
    }
    let cap = shape.len().unwrap_or(INDEX_CAP).min(INDEX_CAP);
    let e = volume_exponent(f).to_f64_lossy();
    let min_branching = match mode {
        Mode::Strict => 1,
        Mode::Relaxed => options.min_branching,
    };
    let dpow = |a: T| a.powi(d as i32);

    let mut specs: Vec<LevelSpec<T>> = Vec::with_capacity(levels);
    let (mut n_prev, mut big_n_prev) = (0u64, 1u64);
    let (mut vol_prev, mut smallest_prev) = (T::one(), T::one());
    for k in 1..=levels {
        let a = options.shrink.a(k - 1)?;
        let lo = n_prev + 1;

        let diam_bound = T::lit(0.5) * (T::one() - a) * smallest_prev;
        let diam_min = smallest_index(lo, cap, |n| {
            shape.diam(n).map(|x| x <= diam_bound).unwrap_or(false)
        });

        // n^{1-e} >= 1/vol_prev.
        let vol_min = if k == 1 {
            Some(lo)
        } else {
            ceil_exp(-vol_prev.to_f64_lossy().ln() / (1.0 - e)).map(|n| n.max(lo))
        };

        let growth_min = match mode {
            Mode::Strict => {
                if k == 1 {
                    Some(lo)
                } else {
                    ceil_exp(n_prev as f64).map(|n| n.max(lo))
                }
            }
            Mode::Relaxed => n_prev.checked_mul(options.growth_factor).map(|n| n.max(lo)),
        };

        // floor(a^d m vol_prev / 2) >= min_branching.
        let per_child = T::lit(0.5) * dpow(a) * vol_prev;
        let m_req = (T::from_count(min_branching) / per_child).ceil().to_f64_lossy();
        let branch_min = if m_req.is_finite() && m_req < INDEX_CAP as f64 {
            (m_req as u64)
                .checked_mul(big_n_prev)
                .and_then(|x| x.checked_add(n_prev))
                .map(|n| n.max(lo))
        } else {
            None
        };
        let mut candidates = vec![
            (Condition::Diameter, diam_min),
            (Condition::Growth, growth_min),
            (Condition::Branching, branch_min),
        ];
        if mode == Mode::Strict {
            candidates.push((Condition::Volume, vol_min));
        }
        let mut failed: Vec<Condition> = candidates
            .iter()
            .filter(|(_, v)| !v.is_some_and(|n| n <= cap))
            .map(|(c, _)| *c)
            .collect();
        if !failed.is_empty() {
            failed.sort_by_key(|c| *c as u8);
            return Err(Error::Infeasible {
                level: k,
                conditions: failed,
            });
        }
        let candidates: Vec<(Condition, u64)> = candidates
            .into_iter()
            .map(|(c, v)| (c, v.expect("checked")))
            .collect();
        let mut n = candidates.iter().map(|c| c.1).max().expect("non-empty");
        let mut binding: Vec<Condition> = candidates
            .iter()
            .filter(|c| c.1 == n)
            .map(|c| c.0)
            .collect();
        binding.sort_by_key(|c| *c as u8);

        // Rounding in m and M can leave the count bounds short; step forward.
        let mut steps = 0u64;
        let spec = loop {
            let spec = level_counts(k, n, n_prev, big_n_prev, a, vol_prev, d);
            if spec.big_m >= min_branching && count_bounds_hold(&spec, d) {
                break spec;
            }
            steps += 1;
            if steps > 1_000_000 || n >= cap {
                return Err(Error::DegeneratePlan { level: k });
            }
            if !binding.contains(&Condition::Branching) {
                binding = vec![Condition::Branching];
            }
            n += 1;
        };
        let volume_ok = k == 1
            || T::from_count(spec.n).ln() * (T::one() - T::lit(e)) >= -vol_prev.ln();
        let edges = shape.raw_alphas(n)?;
        vol_prev = edges.iter().fold(T::one(), |p, &x| p * x);
        smallest_prev = edges[d - 1];
        n_prev = n;
        big_n_prev = spec.big_n;
        specs.push(LevelSpec {
            binding,
            volume_ok,
            ..spec
        });
    }
    Ok(LevelPlan {
        shape: shape.clone(),
        s,
        f,
        mode,
        options,
        levels: specs,
    })
}

/// Plan with caller-chosen indices; counts and bounds follow from them.
pub fn plan_from_indices<T: Real>(
    shape: &ShapeSequence<T>,
    s: T,
    indices: &[u64],
    mode: Mode,
    options: PlanOptions<T>,
) -> Result<LevelPlan<T>> {
    if indices.is_empty() || indices[0] == 0 || indices.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("indices must be positive and strictly increasing"));
    }
    let d = shape.dim();
    let f = f_hat(shape, s, default_window(shape)?)?;
    let e = volume_exponent(f);
    let mut specs = Vec::with_capacity(indices.len());
    let (mut n_prev, mut big_n_prev, mut vol_prev) = (0u64, 1u64, T::one());
    for (i, &n) in indices.iter().enumerate() {
        let k = i + 1;
        let a = options.shrink.a(k - 1)?;
        let spec = level_counts(k, n, n_prev, big_n_prev, a, vol_prev, d);
        let volume_ok = k == 1 || T::from_count(n).ln() * (T::one() - e) >= -vol_prev.ln();
        vol_prev = shape.volume(n)?;
        n_prev = n;
        big_n_prev = spec.big_n;
        specs.push(LevelSpec { volume_ok, ..spec });
    }
    Ok(LevelPlan {
        shape: shape.clone(),
        s,
        f,
        mode,
        options,
        levels: specs,
    })
}

fn level_counts<T: Real>(
    k: usize,
    n: u64,
    n_prev: u64,
    big_n_prev: u64,
    a: T,
    vol_prev: T,
    d: usize,
) -> LevelSpec<T> {
    let ad = a.powi(d as i32);
    let (m, big_m) = if k == 1 {
        // The whole torus is the only parent; every index is a hit.
        let big_m = (T::lit(0.5) * ad * T::from_count(n)).floor();
        (n, big_m.to_u64().unwrap_or(0))
    } else {
        let m = (n - n_prev) / big_n_prev;
        let big_m = (T::lit(0.5) * ad * T::from_count(m) * vol_prev).floor();
        (m, big_m.to_u64().unwrap_or(0))
    };
    let big_n = big_n_prev.saturating_mul(big_m);
    let p = if k == 1 {
        T::zero()
    } else {
        failure_formula(big_n_prev, n - n_prev, ad * vol_prev)
    };
    LevelSpec {
        k,
        n,
        n_prev,
        m,
        big_m,
        big_n,
        big_n_prev,
        a,
        vol_prev,
        binding: Vec::new(),
        volume_ok: false,
        p,
    }
}

/// `min(1, N_{k-1}^2 * 8 (1 - v) / ((n_k - n_{k-1}) v))`.
pub(crate) fn failure_formula<T: Real>(big_n_prev: u64, span: u64, v: T) -> T {
    let nn = T::from_count(big_n_prev);
    let raw = nn * nn * T::lit(8.0) * (T::one() - v) / (T::from_count(span) * v);
    raw.min(T::one())
}

/// `(1/2)^3 a^d (n_k - n_{k-1}) vol_prev <= N_k <= (n_k - n_{k-1}) vol_prev`.
pub(crate) fn count_bounds_hold<T: Real>(spec: &LevelSpec<T>, d: usize) -> bool {
    let span = T::from_count(spec.n - spec.n_prev) * spec.vol_prev;
    let lower = T::lit(0.125) * spec.a.powi(d as i32) * span;
    let nk = T::from_count(spec.big_n);
    lower <= nk && nk <= span
}

/// Failure bound `p_k` of level `k`; zero at level 1.
pub fn failure_bound<T: Real>(plan: &LevelPlan<T>, k: usize) -> Result<T> {
    Ok(plan.level(k)?.p)
}

/// `4 (1 - vol) / (n vol)`: bound on the probability that fewer than
/// `n vol / 2` of `n` uniform points land in a set of volume `vol`.
pub fn chebyshev_bound<T: Real>(n: u64, vol: T) -> Result<T> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if !(vol > T::zero() && vol < T::one()) {
        return Err(invalid(format!("volume {vol} outside (0, 1)")));
    }
    Ok(T::lit(4.0) * (T::one() - vol) / (T::from_count(n) * vol))
}
