//! The six subcommands. Each returns its results and, given an output
//! directory, writes CSV/JSON files plus a manifest.

use log::{info, warn};
use rayon::prelude::*;
use serde_json::{json, Value};

use randcover::cantor::{
    build, plan_levels, sample_mu, verify_level, BuildReport, CantorLevel, Construction, LevelPlan, LevelRate,
    PlanOptions, Violation,
};
use randcover::estimate::{
    box_count_series, box_dim_fit, energy_mc_caps, falconer_check, tail_cover_sum, BoxCountSeries,
    DimReport, EnergyEstimate, FalconerResult, DEFAULT_CAP,
};
use randcover::{
    coverage_series, covering_numbers, s0_analytic, s0_numeric, shepp_partial_sum, CoverConfig,
    CoverageStats, ExponentReport, Method, ShapeSequence, TorusPoint, Verdict, XiStream,
    COVERAGE_CSV_HEADER,
};

use crate::config::{ExperimentConfig, S0_TOL};
use crate::error::{invalid, CliError};
use crate::manifest::{OutputDir, RunManifest};

/// Largest starting index of the covering-sum tail table.
pub const TAIL_MAX_START: u64 = 1_000_000;
/// Explicit terms summed before the integral remainder takes over.
const TAIL_EXPLICIT_TERMS: u64 = 100_000;
/// Tolerance of the box-dimension verdict.
pub const DIM_TOL: f64 = 0.15;

fn method_label(m: Method) -> &'static str {
    match m {
        Method::Analytic => "analytic",
        Method::Bisection => "bisection",
    }
}

fn exponent_json(r: &ExponentReport) -> Value {
    json!({
        "s0": r.s0,
        "method": method_label(r.method),
        "f_values": r.f_values.iter().map(|&(s, f)| json!([s, f])).collect::<Vec<_>>(),
        "window": r.window.map(|w| json!([w.n_min, w.n_max])),
    })
}

// ---------------------------------------------------------------- s0

#[derive(Debug, Clone)]
pub struct S0Outcome {
    pub analytic: Option<ExponentReport>,
    pub numeric: ExponentReport,
}

impl S0Outcome {
    /// The analytic value when available, else the bisection estimate.
    pub fn s0(&self) -> f64 {
        self.analytic.as_ref().unwrap_or(&self.numeric).s0
    }
}

pub fn cmd_s0(config: &ExperimentConfig, out: &mut OutputDir) -> Result<S0Outcome, CliError> {
    let seq = config.shape_sequence()?;
    let analytic = if seq.is_power_law() {
        Some(s0_analytic(&seq)?)
    } else {
        None
    };
    let numeric = s0_numeric(&seq, S0_TOL, None)?;
    let outcome = S0Outcome { analytic, numeric };
    let mut table = String::from("method,s0\n");
    if let Some(a) = &outcome.analytic {
        table.push_str(&format!("analytic,{}\n", a.s0));
    }
    table.push_str(&format!("bisection,{}\n", outcome.numeric.s0));
    out.write("s0.csv", &table)?;
    out.write_json(
        "s0.json",
        &json!({
            "s0": outcome.s0(),
            "analytic": outcome.analytic.as_ref().map(exponent_json),
            "numeric": exponent_json(&outcome.numeric),
        }),
    )?;
    print!("{table}");
    Ok(outcome)
}

// ---------------------------------------------------------------- cover

#[derive(Debug, Clone)]
pub struct CoverOutcome {
    pub rows: Vec<CoverageStats>,
    /// `true` when rows come from evenly spaced points rather than grid cells.
    pub pointwise: bool,
}

impl CoverOutcome {
    /// `(N, min / log N, max / log N)` rows.
    pub fn normalized(&self) -> Vec<(u64, f64, f64)> {
        self.rows
            .iter()
            .map(|r| {
                let l = (r.n as f64).ln();
                (r.n, r.min / l, r.max / l)
            })
            .collect()
    }
}

pub fn cmd_cover(config: &ExperimentConfig, out: &mut OutputDir) -> Result<CoverOutcome, CliError> {
    let seq = config.shape_sequence()?;
    let (n_a, n_b) = config.window()?;
    let checkpoints = config.checkpoints.clone().unwrap_or_else(|| vec![n_b]);
    if checkpoints.iter().any(|&c| c < n_a || c > n_b) {
        return Err(invalid("checkpoints must lie inside the window"));
    }
    let cover = CoverConfig::new(seq, n_b, config.seed)?;
    let outcome = match config.points {
        Some(p) => {
            if config.d != 1 {
                return Err(invalid("evenly spaced points are one-dimensional"));
            }
            if n_a != 1 {
                return Err(invalid("covering numbers count from index 1"));
            }
            let points: Vec<TorusPoint> = (0..p)
                .map(|i| TorusPoint::wrap(&[(i as f64 + 0.5) / p as f64]))
                .collect::<Result<_, _>>()?;
            CoverOutcome {
                rows: covering_numbers(&cover, &points, &checkpoints)?,
                pointwise: true,
            }
        }
        None => CoverOutcome {
            rows: coverage_series(&cover, n_a, &checkpoints, config.budgets.grid_j)?,
            pointwise: false,
        },
    };
    let mut csv = format!("{COVERAGE_CSV_HEADER}\n");
    for r in &outcome.rows {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    out.write("coverage.csv", &csv)?;
    if outcome.pointwise {
        let mut table = String::from("N,min_over_logN,max_over_logN\n");
        for (n, lo, hi) in outcome.normalized() {
            table.push_str(&format!("{n},{lo},{hi}\n"));
        }
        out.write("covering_order.csv", &table)?;
    }
    print!("{csv}");
    Ok(outcome)
}

// ---------------------------------------------------------------- cantor

/// One seeded build with its verification results.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub construction: Construction,
    /// Violations per built level.
    pub violations: Vec<Vec<Violation>>,
}

impl SeedRun {
    pub fn complete(&self, plan: &LevelPlan) -> bool {
        self.construction.complete(plan)
    }

    pub fn passed(&self) -> bool {
        self.violations.iter().all(Vec::is_empty)
    }
}

#[derive(Debug, Clone)]
pub struct CantorOutcome {
    pub plan: LevelPlan,
    pub runs: Vec<SeedRun>,
    pub rates: Vec<LevelRate>,
}

pub fn plan_for(config: &ExperimentConfig) -> Result<LevelPlan, CliError> {
    let seq = config.shape_sequence()?;
    let s = config.resolve_s()?;
    Ok(plan_levels(
        &seq,
        s,
        config.levels,
        config.mode.into(),
        PlanOptions::default(),
    )?)
}

/// Builds and verifies every level for one seed.
pub fn run_seed(plan: &LevelPlan, seed: u64) -> Result<SeedRun, CliError> {
    let construction = build(plan, seed)?;
    let stream = XiStream::new(seed, plan.dim());
    let violations = construction
        .levels
        .iter()
        .enumerate()
        .map(|(i, lvl)| {
            let parent = i.checked_sub(1).map(|p| &construction.levels[p]);
            verify_level(lvl, parent, plan, &stream)
        })
        .collect::<Result<_, _>>()?;
    Ok(SeedRun {
        seed,
        construction,
        violations,
    })
}

fn tally(plan: &LevelPlan, runs: &[SeedRun]) -> Vec<LevelRate> {
    (1..=plan.depth())
        .map(|k| {
            let reports = runs.iter().filter_map(|r| r.construction.reports.get(k - 1));
            let (attempts, failures) =
                reports.fold((0, 0), |(a, f), r| (a + 1, f + u64::from(!r.omega_ok)));
            LevelRate {
                k,
                attempts,
                failures,
                p_k: plan.levels()[k - 1].p,
            }
        })
        .collect()
}

pub fn plan_json(plan: &LevelPlan) -> Value {
    json!({
        "dim": plan.dim(),
        "s": plan.s(),
        "f": plan.f(),
        "mode": format!("{:?}", plan.mode()).to_lowercase(),
        "levels": plan.levels().iter().map(|l| json!({
            "k": l.k,
            "n": l.n,
            "n_prev": l.n_prev,
            "m": l.m,
            "M": l.big_m,
            "N": l.big_n,
            "a": l.a,
            "vol_prev": l.vol_prev,
            "binding": l.binding.iter().map(|c| c.label()).collect::<Vec<_>>(),
            "volume_ok": l.volume_ok,
            "p": l.p,
        })).collect::<Vec<_>>(),
    })
}

pub fn level_json(level: &CantorLevel) -> Value {
    Value::Array(
        level
            .nodes
            .iter()
            .map(|n| {
                json!({
                    "word": n.word.digits(),
                    "corner": n.rect.corner().coords(),
                    "edges": n.rect.edges(),
                    "frame": n.rect.frame().row_major(),
                })
            })
            .collect(),
    )
}

pub fn report_json(reports: &[BuildReport]) -> Value {
    Value::Array(
        reports
            .iter()
            .map(|r| json!({"k": r.k, "omega_ok": r.omega_ok, "p_k": r.p_k, "hits": r.hits}))
            .collect(),
    )
}

fn violation_json(v: &Violation) -> Value {
    json!({
        "property": v.property.label(),
        "word": v.word.as_ref().map(|w| w.digits().to_vec()),
        "detail": v.detail,
    })
}

pub fn cmd_cantor(config: &ExperimentConfig, out: &mut OutputDir) -> Result<CantorOutcome, CliError> {
    let plan = match plan_for(config) {
        Ok(p) => p,
        Err(CliError::Core(randcover::Error::Infeasible { level, conditions })) => {
            let labels: Vec<&str> = conditions.iter().map(|c| c.label()).collect();
            out.write_json("feasibility.json", &json!({"level": level, "conditions": labels}))?;
            return Err(randcover::Error::Infeasible { level, conditions }.into());
        }
        Err(e) => return Err(e),
    };
    out.write_json("plan.json", &plan_json(&plan))?;
    let seeds: Vec<u64> = (0..config.budgets.seeds.max(1))
        .map(|i| config.seed.wrapping_add(i))
        .collect();
    info!("building {} level(s) for {} seed(s)", plan.depth(), seeds.len());
    let runs: Vec<SeedRun> = seeds
        .par_iter()
        .map(|&s| run_seed(&plan, s))
        .collect::<Result<_, _>>()?;
    let rates = tally(&plan, &runs);

    let first = &runs[0];
    for level in &first.construction.levels {
        out.write_json(&format!("levels/level_{}.json", level.k), &level_json(level))?;
    }
    out.write_json("report.json", &report_json(&first.construction.reports))?;
    let mut csv = String::from("k,attempts,failures,failure_rate,p_k\n");
    for r in &rates {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.k,
            r.attempts,
            r.failures,
            r.failure_rate(),
            r.p_k
        ));
    }
    out.write("rates.csv", &csv)?;
    let violations: Vec<Value> = runs
        .iter()
        .flat_map(|r| {
            r.violations
                .iter()
                .flatten()
                .map(move |v| json!({"seed": r.seed, "violation": violation_json(v)}))
        })
        .collect();
    out.write_json("violations.json", &violations)?;
    print!("{csv}");

    let outcome = CantorOutcome { plan, runs, rates };
    if !violations.is_empty() {
        return Err(CliError::Verification(format!(
            "{} structural violation(s); see violations.json",
            violations.len()
        )));
    }
    if let Some(k) = outcome.runs[0].construction.failed_level() {
        warn!("seed {} stopped at level {k}: the success event failed", config.seed);
    }
    Ok(outcome)
}

// ---------------------------------------------------------------- dim

/// Box-count fit and energies of one built level.
#[derive(Debug, Clone)]
pub struct LevelDim {
    pub k: usize,
    pub series: BoxCountSeries,
    pub fit: DimReport,
    pub energies: Vec<EnergyEstimate>,
}

#[derive(Debug, Clone)]
pub struct DimOutcome {
    pub s0: f64,
    /// Seed of the complete build used, and how many seeds were tried.
    pub seed: Option<u64>,
    pub tried: u64,
    pub levels: Vec<LevelDim>,
    /// Exponent of the covering-sum table and its `(start, tail)` rows.
    pub tail_s: Option<f64>,
    pub tail: Vec<(u64, f64)>,
}

/// Dyadic resolutions strictly between the smallest edge of level `k` and the
/// largest edge of level 1; widened to start at `j = 1` when that leaves fewer
/// than three points.
pub fn fit_range(plan: &LevelPlan, k: usize) -> Result<(u32, u32), CliError> {
    let coarse = plan.edges(1)?[0];
    let fine = *plan.edges(k)?.last().expect("non-empty edges");
    let j_min = (1.0 / coarse).log2().floor() as u32 + 1;
    let j_max = ((1.0 / fine).log2().ceil() as u32).saturating_sub(1).max(1);
    if j_max >= j_min + 2 {
        Ok((j_min, j_max))
    } else {
        Ok((1, j_max))
    }
}

/// `(start, tail_cover_sum)` at starts `10^1 .. 10^6`.
pub fn tail_table(seq: &ShapeSequence, s: f64) -> Result<Vec<(u64, f64)>, CliError> {
    let mut rows = Vec::new();
    let mut start = 10u64;
    while start <= TAIL_MAX_START {
        let t = tail_cover_sum(seq, s, start, start + TAIL_EXPLICIT_TERMS)?;
        rows.push((start, t));
        start *= 10;
    }
    Ok(rows)
}

pub fn cmd_dim(config: &ExperimentConfig, out: &mut OutputDir) -> Result<DimOutcome, CliError> {
    let seq = config.shape_sequence()?;
    let s0 = config.s0()?;
    let s = config.resolve_s()?;
    let d = config.d as f64;

    let tail_s = if s > s0 { s } else { s0 + 0.1 };
    let (tail_s, tail) = if seq.is_power_law() && tail_s <= d {
        (Some(tail_s), tail_table(&seq, tail_s)?)
    } else {
        (None, Vec::new())
    };
    if !tail.is_empty() {
        let mut csv = String::from("N,tail\n");
        for (n, t) in &tail {
            csv.push_str(&format!("{n},{t}\n"));
        }
        out.write("tail.csv", &csv)?;
    }
    let mut outcome = DimOutcome {
        s0,
        seed: None,
        tried: 0,
        levels: Vec::new(),
        tail_s,
        tail,
    };
    if s >= s0 {
        info!("s = {s} is not below s0 = {s0}; only the covering-sum table is produced");
        return Ok(outcome);
    }

    let plan = plan_for(config)?;
    let mut chosen = None;
    for i in 0..config.budgets.seeds.max(1) {
        let seed = config.seed.wrapping_add(i);
        outcome.tried = i + 1;
        let c = build(&plan, seed)?;
        if c.complete(&plan) {
            chosen = Some((seed, c));
            break;
        }
    }
    let Some((seed, construction)) = chosen else {
        return Err(CliError::Verification(format!(
            "no complete build in {} seed(s)",
            outcome.tried
        )));
    };
    outcome.seed = Some(seed);
    info!("using seed {seed} after {} attempt(s)", outcome.tried);

    let energy_s = config.resolve_energy_s()?;
    let mut energy_csv = format!("k,{}\n", EnergyEstimate::CSV_HEADER);
    for level in &construction.levels {
        let (j_min, j_max) = fit_range(&plan, level.k)?;
        let series = box_count_series(&level.rects(), 1..=j_max)?;
        let fit = box_dim_fit(&series, j_min, j_max)?.with_target(s, DIM_TOL);
        out.write(&format!("boxcount_level_{}.csv", level.k), &series.csv())?;
        let mut energies = Vec::new();
        for (i, &es) in energy_s.iter().enumerate() {
            let e = energy_mc_caps(
                |rng| sample_mu(level, rng),
                es,
                &[DEFAULT_CAP],
                config.budgets.mc_samples,
                seed.wrapping_add(i as u64),
            )?;
            energies.extend(e);
        }
        for e in &energies {
            energy_csv.push_str(&format!("{},{}\n", level.k, e.csv_row()));
        }
        outcome.levels.push(LevelDim {
            k: level.k,
            series,
            fit,
            energies,
        });
    }
    out.write("energy.csv", &energy_csv)?;
    let fits: Vec<Value> = outcome
        .levels
        .iter()
        .map(|l| {
            json!({
                "k": l.k,
                "slope": l.fit.slope,
                "j_min": l.fit.j_min,
                "j_max": l.fit.j_max,
                "residual": l.fit.residual,
                "target": l.fit.target,
                "verdict": l.fit.verdict,
            })
        })
        .collect();
    out.write_json("dim.json", &json!({"seed": seed, "s0": s0, "levels": fits}))?;
    println!("k,slope,j_min,j_max,target,verdict");
    for l in &outcome.levels {
        println!(
            "{},{},{},{},{},{}",
            l.k,
            l.fit.slope,
            l.fit.j_min,
            l.fit.j_max,
            s,
            l.fit.verdict.unwrap_or(false)
        );
    }
    Ok(outcome)
}

// ---------------------------------------------------------------- shepp

pub fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Diverges => "diverges",
        Verdict::Converges => "converges",
        Verdict::Undecided => "undecided",
    }
}

pub fn cmd_shepp(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Vec<(u64, f64, Verdict)>, CliError> {
    let seq = config.shape_sequence()?;
    let ks = match (&config.checkpoints, config.window) {
        (Some(c), _) => c.clone(),
        (None, Some([_, b])) => vec![b],
        (None, None) => return Err(invalid("config needs `checkpoints` or `window`")),
    };
    let rows = ks
        .iter()
        .map(|&k| {
            let (v, verdict) = shepp_partial_sum(&seq, k)?;
            Ok((k, v, verdict))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut csv = String::from("K,partial_sum,verdict\n");
    for (k, v, verdict) in &rows {
        csv.push_str(&format!("{k},{v},{}\n", verdict_label(*verdict)));
    }
    out.write("shepp.csv", &csv)?;
    print!("{csv}");
    Ok(rows)
}

// ---------------------------------------------------------------- falconer

#[derive(Debug, Clone)]
pub struct FalconerOutcome {
    pub results: Vec<FalconerResult>,
}

impl FalconerOutcome {
    /// Ratio of the largest to the smallest product over the family.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .results
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.product), hi.max(r.product)));
        hi / lo
    }
}

pub fn cmd_falconer(config: &ExperimentConfig, out: &mut OutputDir) -> Result<FalconerOutcome, CliError> {
    let maps = config
        .shape
        .values
        .as_ref()
        .ok_or_else(|| invalid("falconer needs matrices in `shape.values`"))?;
    let s = config.resolve_s()?;
    let results = maps
        .iter()
        .enumerate()
        .map(|(i, m)| {
            falconer_check(
                m,
                config.d,
                s,
                config.budgets.mc_samples,
                config.seed.wrapping_add(i as u64),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (i, r) in results.iter().enumerate() {
        if r.unreliable {
            warn!("map {i}: truncation share {} makes the estimate unreliable", r.trunc_share);
        }
    }
    let mut csv = format!("map,{},product_stderr\n", FalconerResult::CSV_HEADER);
    for (i, r) in results.iter().enumerate() {
        csv.push_str(&format!("{i},{},{}\n", r.csv_row(), r.product_stderr));
    }
    out.write("falconer.csv", &csv)?;
    print!("{csv}");
    Ok(FalconerOutcome { results })
}

/// Runs `command` and writes the manifest.
pub fn run(command: &str, config: &ExperimentConfig, mut out: OutputDir) -> Result<RunManifest, CliError> {
    match command {
        "s0" => cmd_s0(config, &mut out).map(drop)?,
        "cover" => cmd_cover(config, &mut out).map(drop)?,
        "cantor" => cmd_cantor(config, &mut out).map(drop)?,
        "dim" => cmd_dim(config, &mut out).map(drop)?,
        "shepp" => cmd_shepp(config, &mut out).map(drop)?,
        "falconer" => cmd_falconer(config, &mut out).map(drop)?,
        other => return Err(invalid(format!("unknown command `{other}`"))),
    }
    out.finish(command, config)
}
