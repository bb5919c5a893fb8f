//! Points and oriented rectangles on the flat torus `T^d = R^d / Z^d`.
//!
//! Rectangles are stored as a corner, an orthonormal frame whose columns are
//! the edge directions, and edge lengths in frame order. Their diameter is
//! kept below 1/2 so every point of the torus has exactly one lift near the
//! rectangle's center, which makes containment a single affine test.

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::spectrum::SingularSpectrum;

/// Reduces a real number mod 1 into `[0, 1)`.
#[inline]
pub fn wrap_scalar<T: Real>(x: T) -> T {
    let r = x - x.floor();
    // x - floor(x) rounds up to 1 for tiny negative x.
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}

/// Signed representative of `x` mod 1 in `[-1/2, 1/2)`.
#[inline]
pub fn centered<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    wrap_scalar(x + half) - half
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint<T = f64> {
    coords: Vec<T>,
}

impl<T: Real> TorusPoint<T> {
    /// Wraps arbitrary finite coordinates onto the torus.
    pub fn wrap(coords: &[T]) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("non-finite coordinate"));
        }
        Ok(Self {
            coords: coords.iter().map(|&c| wrap_scalar(c)).collect(),
        })
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            coords: vec![T::zero(); dim],
        }
    }

    pub(crate) fn from_wrapped_unchecked(coords: Vec<T>) -> Self {
        debug_assert!(coords.iter().all(|&c| c >= T::zero() && c < T::one()));
        Self { coords }
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `self + offset` reduced mod 1.
    pub fn shifted(&self, offset: &[T]) -> Self {
        debug_assert_eq!(offset.len(), self.dim());
        Self {
            coords: self
                .coords
                .iter()
                .zip(offset)
                .map(|(&c, &o)| wrap_scalar(c + o))
                .collect(),
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|&c| wrap_scalar(-c)).collect(),
        }
    }
}

/// Free-function form of [`TorusPoint::wrap`].
pub fn wrap<T: Real>(coords: &[T]) -> Result<TorusPoint<T>> {
    TorusPoint::wrap(coords)
}

/// Flat torus metric: Euclidean length of the shortest wrapped displacement.
pub fn torus_distance<T: Real>(x: &TorusPoint<T>, y: &TorusPoint<T>) -> Result<T> {
    if x.dim() != y.dim() {
        return Err(invalid(format!(
            "dimension mismatch: {} vs {}",
            x.dim(),
            y.dim()
        )));
    }
    Ok(torus_distance_unchecked(x.coords(), y.coords()))
}

#[inline]
pub(crate) fn torus_distance_unchecked<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let d = (a - b).abs();
            let d = d.min(T::one() - d);
            d * d
        })
        .sum::<T>()
        .sqrt()
}

/// Orthogonal `d x d` matrix stored row-major; column `j` is the direction of edge `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T = f64> {
    dim: usize,
    matrix: Vec<T>,
}

impl<T: Real> Frame<T> {
    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![T::zero(); dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = T::one();
        }
        Self { dim, matrix }
    }

    pub fn from_row_major(dim: usize, matrix: Vec<T>) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(invalid(format!(
                "frame needs {} entries, got {}",
                dim * dim,
                matrix.len()
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(invalid("non-finite frame entry"));
        }
        let tol = T::lit(T::FRAME_TOL);
        for a in 0..dim {
            for b in 0..dim {
                let dot: T = (0..dim)
                    .map(|r| matrix[r * dim + a] * matrix[r * dim + b])
                    .sum();
                let want = if a == b { T::one() } else { T::zero() };
                if (dot - want).abs() > tol {
                    return Err(invalid(format!(
                        "frame columns {a},{b} not orthonormal (dot {dot})"
                    )));
                }
            }
        }
        Ok(Self { dim, matrix })
    }

    /// Rotation of the plane by `theta`.
    pub fn rotation_2d(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            dim: 2,
            matrix: vec![c, -s, s, c],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row_major(&self) -> &[T] {
        &self.matrix
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> T {
        self.matrix[row * self.dim + col]
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|r| {
            (0..self.dim).all(|c| self.entry(r, c) == if r == c { T::one() } else { T::zero() })
        })
    }

    /// `F v`: frame coordinates to ambient coordinates.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.entry(r, c) * v[c]).sum())
            .collect()
    }

    /// `F^T v`: ambient coordinates to frame coordinates.
    pub fn apply_transpose(&self, v: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| self.entry(r, c) * v[r]).sum())
            .collect()
    }
}

/// Closed oriented rectangle on the torus with diameter below 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusRectangle<T = f64> {
    corner: TorusPoint<T>,
    frame: Frame<T>,
    edges: Vec<T>,
    /// Axis indices sorted by descending edge, ties by axis index.
    order: Vec<usize>,
}

impl<T: Real> TorusRectangle<T> {
    pub fn new(corner: TorusPoint<T>, frame: Frame<T>, edges: Vec<T>) -> Result<Self> {
        let d = corner.dim();
        if frame.dim() != d || edges.len() != d {
            return Err(invalid(format!(
                "dimension mismatch: corner {d}, frame {}, edges {}",
                frame.dim(),
                edges.len()
            )));
        }
        if d == 0 {
            return Err(invalid("zero-dimensional rectangle"));
        }
        if edges
            .iter()
            .any(|&e| !e.is_finite() || e <= T::zero() || e >= T::one())
        {
            return Err(invalid(format!("edge lengths must lie in (0,1): {edges:?}")));
        }
        let rect = Self {
            order: descending_order(&edges),
            corner,
            frame,
            edges,
        };
        if rect.diam() >= T::lit(0.5) {
            return Err(Error::UnsupportedGeometry(format!(
                "diameter {} >= 1/2",
                rect.diam()
            )));
        }
        Ok(rect)
    }

    pub fn axis_aligned(corner: TorusPoint<T>, edges: Vec<T>) -> Result<Self> {
        let d = corner.dim();
        Self::new(corner, Frame::identity(d), edges)
    }

    pub fn dim(&self) -> usize {
        self.edges.len()
    }

    pub fn corner(&self) -> &TorusPoint<T> {
        &self.corner
    }

    pub fn frame(&self) -> &Frame<T> {
        &self.frame
    }

    /// Edge lengths in frame order.
    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    /// Edge lengths sorted in descending order: the singular values of the rectangle.
    pub fn sorted_edges(&self) -> Vec<T> {
        self.order.iter().map(|&i| self.edges[i]).collect()
    }

    pub fn spectrum(&self) -> SingularSpectrum<T> {
        SingularSpectrum::from_descending_unchecked(self.sorted_edges())
    }

    pub fn volume(&self) -> T {
        self.edges.iter().fold(T::one(), |acc, &e| acc * e)
    }

    pub fn diam(&self) -> T {
        self.edges.iter().map(|&e| e * e).sum::<T>().sqrt()
    }

    /// Center of the lift whose corner is the stored corner (not reduced mod 1).
    fn center_lift(&self) -> Vec<T> {
        let half: Vec<T> = self.edges.iter().map(|&e| e * T::lit(0.5)).collect();
        let off = self.frame.apply(&half);
        self.corner
            .coords()
            .iter()
            .zip(off)
            .map(|(&c, o)| c + o)
            .collect()
    }

    pub fn center(&self) -> TorusPoint<T> {
        TorusPoint::from_wrapped_unchecked(self.center_lift().into_iter().map(wrap_scalar).collect())
    }

    pub fn translate(&self, xi: &TorusPoint<T>) -> Self {
        Self {
            corner: self.corner.shifted(xi.coords()),
            frame: self.frame.clone(),
            edges: self.edges.clone(),
            order: self.order.clone(),
        }
    }

    /// Similar copy with ratio `a` and the same center and frame.
    pub fn shrink_similar(&self, a: T) -> Result<Self> {
        if !(a > T::zero() && a <= T::one()) {
            return Err(invalid(format!("similarity ratio {a} outside (0,1]")));
        }
        if a == T::one() {
            return Ok(self.clone());
        }
        let inset: Vec<T> = self
            .edges
            .iter()
            .map(|&e| (T::one() - a) * e * T::lit(0.5))
            .collect();
        let offset = self.frame.apply(&inset);
        Ok(Self {
            corner: self.corner.shifted(&offset),
            frame: self.frame.clone(),
            edges: self.edges.iter().map(|&e| a * e).collect(),
            order: self.order.clone(),
        })
    }

    /// Frame coordinates of `p`, measured from the corner, for the lift of `p`
    /// nearest to the center.
    pub fn local_coords(&self, p: &TorusPoint<T>) -> Vec<T> {
        debug_assert_eq!(p.dim(), self.dim());
        let c = self.center_lift();
        let delta: Vec<T> = p
            .coords()
            .iter()
            .zip(&c)
            .map(|(&x, &cc)| centered(x - cc))
            .collect();
        self.frame
            .apply_transpose(&delta)
            .into_iter()
            .zip(&self.edges)
            .map(|(v, &e)| v + e * T::lit(0.5))
            .collect()
    }

    /// Closed containment test; boundary points count as inside.
    pub fn contains_point(&self, p: &TorusPoint<T>) -> bool {
        let tol = T::epsilon() * T::lit(16.0);
        self.local_coords(p)
            .iter()
            .zip(&self.edges)
            .all(|(&x, &e)| x >= -tol && x <= e + tol)
    }

    /// [`contains_point`](Self::contains_point) on raw coordinates in `[0, 1)`,
    /// without allocating for axis-aligned rectangles.
    pub fn contains_coords(&self, x: &[T]) -> bool {
        if !self.frame.is_identity() {
            return self.contains_point(&TorusPoint::from_wrapped_unchecked(x.to_vec()));
        }
        let tol = T::epsilon() * T::lit(16.0);
        x.iter()
            .zip(self.corner.coords())
            .zip(&self.edges)
            .all(|((&p, &c), &e)| {
                let half = e * T::lit(0.5);
                let local = centered(p - (c + half)) + half;
                local >= -tol && local <= e + tol
            })
    }

    /// The `2^d` vertices.
    pub fn vertices(&self) -> Vec<TorusPoint<T>> {
        let d = self.dim();
        (0..(1usize << d))
            .map(|mask| {
                let local: Vec<T> = (0..d)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            self.edges[i]
                        } else {
                            T::zero()
                        }
                    })
                    .collect();
                self.corner.shifted(&self.frame.apply(&local))
            })
            .collect()
    }

    /// Containment of another rectangle, tested on its vertices (rectangles are convex
    /// and the single-lift condition holds for both).
    pub fn contains_rect(&self, other: &TorusRectangle<T>) -> bool {
        other.vertices().iter().all(|v| self.contains_point(v))
    }

    /// Point with frame coordinates `u_i * edge_i`, `u` in `[0,1]^d`.
    pub fn point_at(&self, u: &[T]) -> TorusPoint<T> {
        let local: Vec<T> = u.iter().zip(&self.edges).map(|(&a, &e)| a * e).collect();
        self.corner.shifted(&self.frame.apply(&local))
    }

    /// Copy anchored at this rectangle's corner with this frame and the given edge
    /// lengths, matched to axes in sorted order.
    pub fn place_copy_inside(&self, inner_edges: &[T]) -> Result<Self> {
        let edges = assign_dominated(&self.sorted_edges(), &self.order, inner_edges)?;
        Self::new(self.corner.clone(), self.frame.clone(), edges)
    }
}

pub(crate) fn descending_order<T: Real>(edges: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    // Stable sort keeps ties in axis order.
    order.sort_by(|&a, &b| edges[b].partial_cmp(&edges[a]).expect("finite edges"));
    order
}

/// Assigns `inner` edges to axes so that the `r`-th largest inner edge sits on the
/// axis carrying the `r`-th largest outer edge. Fails unless sorted inner edges are
/// dominated elementwise by sorted outer edges.
pub(crate) fn assign_dominated<T: Real>(
    outer_sorted: &[T],
    outer_order: &[usize],
    inner: &[T],
) -> Result<Vec<T>> {
    let d = outer_sorted.len();
    if inner.len() != d {
        return Err(invalid(format!(
            "expected {d} inner edges, got {}",
            inner.len()
        )));
    }
    if inner.iter().any(|&e| !e.is_finite() || e <= T::zero()) {
        return Err(invalid("inner edges must be positive"));
    }
    let inner_order = descending_order(inner);
    let fits = inner_order
        .iter()
        .zip(outer_sorted)
        .all(|(&i, &o)| inner[i] <= o);
    if !fits {
        return Err(Error::DoesNotFit {
            inner: inner.iter().map(|x| x.to_f64_lossy()).collect(),
            outer: outer_sorted.iter().map(|x| x.to_f64_lossy()).collect(),
        });
    }
    let mut edges = vec![T::zero(); d];
    for (rank, &axis) in outer_order.iter().enumerate() {
        edges[axis] = inner[inner_order[rank]];
    }
    Ok(edges)
}
