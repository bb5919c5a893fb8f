use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::XiStream;
use crate::scalar::Real;
use crate::torus::{wrap_scalar, TorusPoint, TorusRectangle};

use super::plan::{count_bounds_hold, LevelPlan};
use super::word::Word;

/// A node `G(i)` of the tree: the rectangle placed at the translation of the
/// cover that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Node<T = f64> {
    pub word: Word,
    /// Originating cover index.
    pub index: u64,
    /// The corner variable: translation of cover `index`.
    pub corner: TorusPoint<T>,
    pub rect: TorusRectangle<T>,
}

/// Nodes of level `k >= 1` in word order.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorLevel<T = f64> {
    pub k: usize,
    pub nodes: Vec<Node<T>>,
}

impl<T: Real> CantorLevel<T> {
    pub fn rects(&self) -> Vec<TorusRectangle<T>> {
        self.nodes.iter().map(|n| n.rect.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains_point(&self, p: &TorusPoint<T>) -> bool {
        self.nodes.iter().any(|n| n.rect.contains_point(p))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildReport<T = f64> {
    pub k: usize,
    pub omega_ok: bool,
    pub p_k: T,
    /// Hits inside the shrunken parent, per parent in word order.
    pub hits: Vec<u64>,
}

/// Hit count of one parent and the accepted `(index, xi)` pairs.
type ParentScan<T> = (u64, Vec<(u64, TorusPoint<T>)>);

/// Builds level `k` from `parent` (the whole torus when `k == 1`). On failure of
/// the success event the level is `None` and the report says why.
pub fn build_level<T: Real>(
    parent: Option<&CantorLevel<T>>,
    plan: &LevelPlan<T>,
    k: usize,
    stream: &XiStream,
) -> Result<(Option<CantorLevel<T>>, BuildReport<T>)> {
    let spec = plan.level(k)?;
    if spec.big_m == 0 {
        return Err(Error::DegeneratePlan { level: k });
    }
    if stream.dim() != plan.dim() {
        return Err(crate::error::invalid("stream dimension differs from the plan"));
    }
    let edges = plan.edges(k)?;
    let d = plan.dim();
    let child_at = |index: u64, corner: TorusPoint<T>, word: Word| -> Result<Node<T>> {
        let g_i = plan.shape().raw_alphas(index)?;
        // Copy of the level shape inside the cover footprint, anchored at its corner.
        let footprint_fits = g_i.iter().zip(&edges).all(|(a, b)| b <= a);
        if !footprint_fits {
            return Err(Error::DoesNotFit {
                inner: edges.iter().map(|x| x.to_f64_lossy()).collect(),
                outer: g_i.iter().map(|x| x.to_f64_lossy()).collect(),
            });
        }
        let rect = TorusRectangle::axis_aligned(corner.clone(), edges.clone())?;
        Ok(Node {
            word,
            index,
            corner,
            rect,
        })
    };

    if k == 1 {
        // The shrunken torus is still the torus: every index is a hit.
        let nodes = stream
            .iter_from::<T>(1)
            .take(spec.big_m as usize)
            .map(|(i, xi)| child_at(i, xi, Word::from_digits(vec![i as u32])))
            .collect::<Result<Vec<_>>>()?;
        let report = BuildReport {
            k,
            omega_ok: true,
            p_k: spec.p,
            hits: vec![spec.m],
        };
        return Ok((Some(CantorLevel { k, nodes }), report));
    }

    let parent = parent.ok_or_else(|| crate::error::invalid("level k >= 2 needs a parent"))?;
    if parent.nodes.len() as u64 != spec.big_n_prev {
        return Err(crate::error::invalid(format!(
            "parent has {} nodes, plan expects {}",
            parent.nodes.len(),
            spec.big_n_prev
        )));
    }
    let ad = spec.a.powi(d as i32);
    let threshold = T::lit(0.5) * ad * T::from_count(spec.m) * spec.vol_prev;
    let scans: Vec<ParentScan<T>> = parent
        .nodes
        .par_iter()
        .enumerate()
        .map(|(l, node)| {
            let target = node.rect.shrink_similar(spec.a)?;
            let start = spec.n_prev + 1 + l as u64 * spec.m;
            let mut count = 0u64;
            let mut first = Vec::with_capacity(spec.big_m as usize);
            stream.for_each::<T>(start, spec.m, |i, x| {
                if target.contains_coords(x) {
                    count += 1;
                    if (first.len() as u64) < spec.big_m {
                        first.push((i, TorusPoint::from_wrapped_unchecked(x.to_vec())));
                    }
                }
            });
            Ok((count, first))
        })
        .collect::<Result<_>>()?;
    let hits: Vec<u64> = scans.iter().map(|s| s.0).collect();
    let omega_ok = hits.iter().all(|&h| T::from_count(h) > threshold);
    let report = BuildReport {
        k,
        omega_ok,
        p_k: spec.p,
        hits,
    };
    if !omega_ok {
        return Ok((None, report));
    }
    let mut nodes = Vec::with_capacity(spec.big_n as usize);
    for (node, (_, first)) in parent.nodes.iter().zip(scans) {
        for (digit, (i, xi)) in first.into_iter().enumerate() {
            nodes.push(child_at(i, xi, node.word.child(digit as u32 + 1))?);
        }
    }
    Ok((Some(CantorLevel { k, nodes }), report))
}

/// Built levels `1..` and one report per attempted level.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction<T = f64> {
    pub levels: Vec<CantorLevel<T>>,
    pub reports: Vec<BuildReport<T>>,
}

impl<T: Real> Construction<T> {
    /// Whether every planned level was built.
    pub fn complete(&self, plan: &LevelPlan<T>) -> bool {
        self.levels.len() == plan.depth()
    }

    /// First level whose success event failed.
    pub fn failed_level(&self) -> Option<usize> {
        self.reports.iter().find(|r| !r.omega_ok).map(|r| r.k)
    }
}

/// Runs the construction for every planned level, stopping at the first failure.
pub fn build<T: Real>(plan: &LevelPlan<T>, seed: u64) -> Result<Construction<T>> {
    let stream = XiStream::new(seed, plan.dim());
    let mut out = Construction {
        levels: Vec::with_capacity(plan.depth()),
        reports: Vec::with_capacity(plan.depth()),
    };
    for k in 1..=plan.depth() {
        let (level, report) = build_level(out.levels.last(), plan, k, &stream)?;
        out.reports.push(report);
        match level {
            Some(level) => out.levels.push(level),
            None => break,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    /// Deterministic bounds on the node count.
    CountBounds,
    /// Each node lies inside its parent.
    Nesting,
    /// Each parent has exactly the planned number of children.
    Branching,
    /// Each node is an isometric copy of the level shape.
    Isometry,
    /// Each node lies inside the cover it came from, with index in the level block.
    CoverMembership,
}

impl Property {
    pub fn label(self) -> &'static str {
        match self {
            Property::CountBounds => "(10) count bounds",
            Property::Nesting => "(11) nesting",
            Property::Branching => "(12) branching",
            Property::Isometry => "(13) isometry",
            Property::CoverMembership => "(14) cover membership",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub property: Property,
    pub word: Option<Word>,
    pub detail: String,
}

/// Checks the five structural properties of `child` against `parent` (the whole
/// torus when `None`). An empty result means every check passed.
pub fn verify_level<T: Real>(
    child: &CantorLevel<T>,
    parent: Option<&CantorLevel<T>>,
    plan: &LevelPlan<T>,
    stream: &XiStream,
) -> Result<Vec<Violation>> {
    let k = child.k;
    let spec = plan.level(k)?;
    let d = plan.dim();
    let mut out = Vec::new();

    if child.nodes.len() as u64 != spec.big_n || !count_bounds_hold(spec, d) {
        out.push(Violation {
            property: Property::CountBounds,
            word: None,
            detail: format!("{} nodes, plan N_k = {}", child.nodes.len(), spec.big_n),
        });
    }

    if let Some(parent) = parent {
        for node in &child.nodes {
            let pw = node.word.parent().unwrap_or_default();
            let inside = parent
                .nodes
                .iter()
                .find(|p| p.word == pw)
                .is_some_and(|p| p.rect.contains_rect(&node.rect));
            if !inside {
                out.push(Violation {
                    property: Property::Nesting,
                    word: Some(node.word.clone()),
                    detail: format!("not inside parent {pw}"),
                });
            }
        }
    }

    let parents: Vec<Word> = match parent {
        Some(p) => p.nodes.iter().map(|n| n.word.clone()).collect(),
        None => vec![Word::root()],
    };
    for pw in &parents {
        let count = child
            .nodes
            .iter()
            .filter(|n| n.word.parent().unwrap_or_default() == *pw)
            .count() as u64;
        let expected = if k == 1 { spec.big_n } else { spec.big_m };
        if count != expected {
            out.push(Violation {
                property: Property::Branching,
                word: Some(pw.clone()),
                detail: format!("{count} children, expected {expected}"),
            });
        }
    }

    let edges = plan.edges(k)?;
    let tol = T::lit(T::TIGHT);
    for node in &child.nodes {
        let ok = node
            .rect
            .sorted_edges()
            .iter()
            .zip(&edges)
            .all(|(a, b)| (*a - *b).abs() <= tol);
        if !ok {
            out.push(Violation {
                property: Property::Isometry,
                word: Some(node.word.clone()),
                detail: format!("edges {:?}", node.rect.sorted_edges()),
            });
        }
    }

    for node in &child.nodes {
        let i = node.index;
        let in_block = i > spec.n_prev && i <= spec.n;
        let ok = in_block && inside_cover(&node.rect, &stream.xi(i), &plan.shape().raw_alphas(i)?);
        if !ok {
            out.push(Violation {
                property: Property::CoverMembership,
                word: Some(node.word.clone()),
                detail: format!("cover index {i} outside ({}, {}] or not containing the node", spec.n_prev, spec.n),
            });
        }
    }
    Ok(out)
}

/// Whether every vertex of `rect` lies in the axis-aligned cover with corner
/// `xi` and edges `alphas` (axes carrying the values in descending order).
fn inside_cover<T: Real>(rect: &TorusRectangle<T>, xi: &TorusPoint<T>, alphas: &[T]) -> bool {
    let tol = T::epsilon() * T::lit(16.0);
    rect.vertices().iter().all(|v| {
        v.coords()
            .iter()
            .zip(xi.coords())
            .zip(alphas)
            .all(|((&x, &c), &e)| {
                if e >= T::one() {
                    return true;
                }
                let off = wrap_scalar(x - c);
                off <= e + tol || off >= T::one() - tol
            })
    })
}

/// Success counts of one level over repeated builds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRate<T = f64> {
    pub k: usize,
    /// Builds that attempted this level.
    pub attempts: u64,
    pub failures: u64,
    pub p_k: T,
}

impl<T: Real> LevelRate<T> {
    pub fn failure_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.failures as f64 / self.attempts as f64
        }
    }

    /// Empirical success rate `q_k`.
    pub fn q_hat(&self) -> f64 {
        1.0 - self.failure_rate()
    }
}

/// Builds once per seed in parallel and tallies failures per level.
pub fn success_rates<T: Real>(plan: &LevelPlan<T>, seeds: &[u64]) -> Result<Vec<LevelRate<T>>> {
    let runs: Vec<Construction<T>> = seeds
        .par_iter()
        .map(|&s| build(plan, s))
        .collect::<Result<_>>()?;
    Ok((1..=plan.depth())
        .map(|k| {
            let attempts = runs.iter().filter(|r| r.reports.len() >= k).count() as u64;
            let failures = runs
                .iter()
                .filter(|r| r.reports.get(k - 1).is_some_and(|x| !x.omega_ok))
                .count() as u64;
            LevelRate {
                k,
                attempts,
                failures,
                p_k: plan.levels()[k - 1].p,
            }
        })
        .collect())
}
