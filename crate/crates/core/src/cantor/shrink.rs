use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Shrinking ratios `a_0 = 1/2 < a_1 < a_2 < ... -> 1` with `prod 1/a_l < inf`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ShrinkSequence<T = f64> {
    /// `a_l = 1 - 2^-(l+1)` for `l >= 1`.
    #[default]
    Dyadic,
    /// `a_1, a_2, ...` listed explicitly; `a_0 = 1/2` is implied.
    Explicit(Vec<T>),
}

/// Levels checked for bounded partial products.
const PRODUCT_CHECK_LEVELS: usize = 64;

impl<T: Real> ShrinkSequence<T> {
    /// Validates an explicit tail `a_1, a_2, ...`: strictly increasing inside `(1/2, 1)`.
    pub fn explicit(tail: Vec<T>) -> Result<Self> {
        let half = T::lit(0.5);
        if tail.iter().any(|&a| !(a > half && a < T::one())) {
            return Err(invalid("shrink ratios after a_0 must lie in (1/2, 1)"));
        }
        if tail.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("shrink ratios must be strictly increasing"));
        }
        Ok(Self::Explicit(tail))
    }

    pub fn a(&self, l: usize) -> Result<T> {
        if l == 0 {
            return Ok(T::lit(0.5));
        }
        match self {
            Self::Dyadic => Ok(T::one() - T::lit(0.5).powi((l + 1) as i32)),
            Self::Explicit(tail) => tail
                .get(l - 1)
                .copied()
                .ok_or_else(|| invalid(format!("no shrink ratio listed for level {l}"))),
        }
    }

    /// `prod_{l < levels} 1/a_l` over the available prefix.
    pub fn inverse_product(&self, levels: usize) -> T {
        (0..levels)
            .map_while(|l| self.a(l).ok())
            .fold(T::one(), |p, a| p / a)
    }

    /// Partial products of `1/a_l` stay bounded on the first 64 levels.
    pub fn product_is_bounded(&self) -> bool {
        let limit = T::lit(1e6);
        let p = self.inverse_product(PRODUCT_CHECK_LEVELS);
        p.is_finite() && p < limit
    }
}
