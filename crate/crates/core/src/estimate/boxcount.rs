use log::warn;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::stats::linear_fit;
use crate::torus::TorusRectangle;

/// Dense bitsets are used up to this many cells.
const DENSE_BITS: u32 = 27;
/// Largest number of cell marks collected in sparse mode.
const SPARSE_BUDGET: u64 = 50_000_000;

/// `(j, N_j)` pairs of dyadic box counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxCountSeries {
    pub dim: usize,
    pub counts: Vec<(u32, u64)>,
}

impl BoxCountSeries {
    /// `N_j` non-decreasing, `N_j <= 2^{jd}` and `N_{j+1} <= 2^d N_j`.
    pub fn is_consistent(&self) -> bool {
        let d = self.dim as u32;
        let cap_ok = self
            .counts
            .iter()
            .all(|&(j, n)| j * d >= 64 || n <= 1u64 << (j * d));
        let step_ok = self.counts.windows(2).all(|w| {
            let ((j0, n0), (j1, n1)) = (w[0], w[1]);
            n1 >= n0 && (j1 != j0 + 1 || n1 <= n0 << d)
        });
        cap_ok && step_ok
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("j,N_j\n");
        for (j, n) in &self.counts {
            out.push_str(&format!("{j},{n}\n"));
        }
        out
    }
}

/// Number of half-open dyadic cells `prod [m_i 2^-j, (m_i + 1) 2^-j)` whose
/// interior meets the interior of some rectangle.
pub fn box_count<T: Real>(rects: &[TorusRectangle<T>], j: u32) -> Result<u64> {
    if j == 0 {
        return Err(invalid("resolution index j must be at least 1"));
    }
    let Some(first) = rects.first() else {
        return Ok(0);
    };
    let d = first.dim();
    if rects.iter().any(|r| r.dim() != d) {
        return Err(invalid("rectangles of mixed dimension"));
    }
    if rects.iter().any(|r| !r.frame().is_identity()) && d > 3 {
        return Err(Error::Unsupported(
            "rotated rectangles are rasterized for d <= 3 only".into(),
        ));
    }
    let bits = j as u64 * d as u64;
    if bits >= 63 {
        return Err(Error::ResolutionTooFine { j, d });
    }
    let m = 1u64 << j;
    if bits <= u64::from(DENSE_BITS) {
        let mut set = vec![0u64; ((1u64 << bits) as usize).div_ceil(64)];
        for r in rects {
            for_each_cell(r, m, &mut |id| set[(id / 64) as usize] |= 1 << (id % 64))?;
        }
        Ok(set.iter().map(|w| u64::from(w.count_ones())).sum())
    } else {
        let mut ids = Vec::new();
        for r in rects {
            for_each_cell(r, m, &mut |id| ids.push(id))?;
            if ids.len() as u64 > SPARSE_BUDGET {
                return Err(Error::ResolutionTooFine { j, d });
            }
        }
        ids.sort_unstable();
        ids.dedup();
        Ok(ids.len() as u64)
    }
}

/// Box counts at every `j` of `range` (inclusive).
pub fn box_count_series<T: Real>(
    rects: &[TorusRectangle<T>],
    range: std::ops::RangeInclusive<u32>,
) -> Result<BoxCountSeries> {
    let dim = rects.first().map_or(1, |r| r.dim());
    let counts = range
        .map(|j| Ok((j, box_count(rects, j)?)))
        .collect::<Result<_>>()?;
    Ok(BoxCountSeries { dim, counts })
}

/// Calls `mark` with the linear id of every cell met by `r`; axis 0 varies fastest.
fn for_each_cell<T: Real>(r: &TorusRectangle<T>, m: u64, mark: &mut dyn FnMut(u64)) -> Result<()> {
    let d = r.dim();
    let mf = m as f64;
    let corner: Vec<f64> = r.corner().coords().iter().map(|x| x.to_f64_lossy()).collect();
    let edges: Vec<f64> = r.edges().iter().map(|x| x.to_f64_lossy()).collect();
    let frame: Vec<f64> = r.frame().row_major().iter().map(|x| x.to_f64_lossy()).collect();
    let axis_aligned = r.frame().is_identity();

    // Cell index range of the lifted bounding box, per axis.
    let mut lo = vec![0i64; d];
    let mut hi = vec![0i64; d];
    for i in 0..d {
        let (mut min, mut max) = (corner[i], corner[i]);
        if axis_aligned {
            max += edges[i];
        } else {
            for c in 0..d {
                let step = frame[i * d + c] * edges[c];
                if step < 0.0 {
                    min += step;
                } else {
                    max += step;
                }
            }
        }
        lo[i] = (min * mf).floor() as i64;
        hi[i] = (max * mf).ceil() as i64 - 1;
        if hi[i] < lo[i] {
            hi[i] = lo[i];
        }
    }
    let spans: Vec<i64> = lo.iter().zip(&hi).map(|(a, b)| b - a + 1).collect();
    let total: i64 = spans.iter().product();
    let mi = m as i64;
    let mut idx = vec![0i64; d];
    for t in 0..total {
        let mut rem = t;
        for i in 0..d {
            idx[i] = lo[i] + rem % spans[i];
            rem /= spans[i];
        }
        if !axis_aligned && !cell_meets_rect(&idx, mf, &corner, &frame, &edges) {
            continue;
        }
        // Duplicate ids from spans wider than the torus are harmless.
        let mut id = 0u64;
        let mut stride = 1u64;
        for &c in &idx {
            id += c.rem_euclid(mi) as u64 * stride;
            stride *= m;
        }
        mark(id);
    }
    Ok(())
}

/// Separating-axis test for open interiors of a lifted cell and an oriented box (`d <= 3`).
fn cell_meets_rect(cell: &[i64], mf: f64, corner: &[f64], frame: &[f64], edges: &[f64]) -> bool {
    let d = cell.len();
    let h = 1.0 / mf;
    let col = |c: usize| -> Vec<f64> { (0..d).map(|i| frame[i * d + c]).collect() };
    let mut axes: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        axes.push(e);
    }
    for c in 0..d {
        axes.push(col(c));
    }
    if d == 3 {
        for i in 0..3 {
            for c in 0..3 {
                let (u, v) = (axes[i].clone(), col(c));
                let w = vec![
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ];
                if w.iter().map(|x| x * x).sum::<f64>() > 1e-20 {
                    axes.push(w);
                }
            }
        }
    }
    let eps = 1e-12;
    axes.iter().all(|ax| {
        let dot = |p: &[f64]| p.iter().zip(ax).map(|(a, b)| a * b).sum::<f64>();
        // Cell projection.
        let base: Vec<f64> = cell.iter().map(|&c| c as f64 * h).collect();
        let mut cmin = dot(&base);
        let mut cmax = cmin;
        for a in ax {
            let s = a * h;
            if s < 0.0 {
                cmin += s;
            } else {
                cmax += s;
            }
        }
        // Rectangle projection.
        let mut rmin = dot(corner);
        let mut rmax = rmin;
        for (c, &e) in edges.iter().enumerate().take(d) {
            let s = dot(&col(c)) * e;
            if s < 0.0 {
                rmin += s;
            } else {
                rmax += s;
            }
        }
        cmax > rmin + eps && rmax > cmin + eps
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimReport {
    pub slope: f64,
    pub j_min: u32,
    pub j_max: u32,
    /// Root mean square residual of the fit.
    pub residual: f64,
    pub target: Option<f64>,
    /// Whether the slope is within the tolerance of the target.
    pub verdict: Option<bool>,
}

impl DimReport {
    pub fn with_target(mut self, s: f64, tol: f64) -> Self {
        self.target = Some(s);
        self.verdict = Some((self.slope - s).abs() <= tol);
        self
    }
}

/// Least-squares slope of `log2 N_j` against `j` over `[j_min, j_max]`,
/// clamped to `[0, d]`.
pub fn box_dim_fit(series: &BoxCountSeries, j_min: u32, j_max: u32) -> Result<DimReport> {
    let pts: Vec<(f64, f64)> = series
        .counts
        .iter()
        .filter(|(j, n)| (j_min..=j_max).contains(j) && *n > 0)
        .map(|&(j, n)| (f64::from(j), (n as f64).log2()))
        .collect();
    if pts.len() < 3 {
        return Err(invalid(format!(
            "need at least 3 points in [{j_min}, {j_max}], got {}",
            pts.len()
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (slope, _, residual) = linear_fit(&x, &y).expect("distinct j values");
    let slope = if y.iter().all(|&v| v == y[0]) {
        warn!("constant box counts over [{j_min}, {j_max}]; slope set to 0");
        0.0
    } else {
        slope.clamp(0.0, series.dim as f64)
    };
    Ok(DimReport {
        slope,
        j_min,
        j_max,
        residual,
        target: None,
        verdict: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{Frame, TorusPoint};

    fn rect(c: &[f64], e: &[f64]) -> TorusRectangle {
        TorusRectangle::axis_aligned(TorusPoint::wrap(c).unwrap(), e.to_vec()).unwrap()
    }

    #[test]
    fn aligned_examples() {
        let r = TorusRectangle::axis_aligned(TorusPoint::origin(2), vec![0.25, 0.25]).unwrap();
        assert_eq!(box_count(&[r], 2).unwrap(), 1);
        assert_eq!(box_count(&[rect(&[0.26, 0.26], &[0.3, 0.3])], 1).unwrap(), 4);
        assert_eq!(box_count(&[rect(&[0.9], &[0.2])], 3).unwrap(), 2);
        assert!(box_count(&[rect(&[0.1], &[0.2])], 0).is_err());
        assert_eq!(box_count::<f64>(&[], 4).unwrap(), 0);
    }

    #[test]
    fn rotated_square_counts() {
        let r = TorusRectangle::new(
            TorusPoint::wrap(&[0.5, 0.3]).unwrap(),
            Frame::rotation_2d(std::f64::consts::FRAC_PI_4),
            vec![0.2, 0.2],
        )
        .unwrap();
        let n = box_count(std::slice::from_ref(&r), 6).unwrap() as f64 / 4096.0;
        // Between the area and the area plus a boundary sausage.
        assert!(n >= r.volume() && n <= r.volume() + 0.8 * 4.0 / 64.0 + 4.0 / 4096.0);
    }

    #[test]
    fn fit_exact_lines() {
        let s = BoxCountSeries {
            dim: 1,
            counts: (1..=8).map(|j| (j, 1u64 << j)).collect(),
        };
        let r = box_dim_fit(&s, 1, 8).unwrap();
        assert!((r.slope - 1.0).abs() < 1e-12 && r.residual < 1e-12);
        let s2 = BoxCountSeries {
            dim: 2,
            counts: (1..=6).map(|j| (j, 1u64 << (2 * j))).collect(),
        };
        assert!((box_dim_fit(&s2, 1, 6).unwrap().slope - 2.0).abs() < 1e-12);
        let flat = BoxCountSeries {
            dim: 1,
            counts: (1..=5).map(|j| (j, 7)).collect(),
        };
        assert_eq!(box_dim_fit(&flat, 1, 5).unwrap().slope, 0.0);
        assert!(box_dim_fit(&flat, 1, 2).is_err());
    }
}
