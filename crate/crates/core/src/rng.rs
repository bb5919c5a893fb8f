//! Counter-based random streams.
//!
//! The translation of the `n`-th cover uses draws `(n-1)d .. nd` of a
//! ChaCha keystream, so any `xi_n` can be reconstructed without replaying
//! the prefix. Auxiliary Monte-Carlo streams use distinct ChaCha stream ids.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;
use crate::torus::TorusPoint;

/// Stream id reserved for the translations `xi_n`.
const XI_STREAM: u64 = 0;

/// Purposes for auxiliary substreams. Each gets its own ChaCha stream family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Measure = 1,
    Energy = 2,
    Falconer = 3,
    Chebyshev = 4,
    Sampling = 5,
}

/// Maps a 64-bit draw to `[0, 1)` using its top 53 bits.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[0, 1)` converted to `T`, never returning 1 after rounding.
#[inline]
pub fn unit<T: Real, R: RngCore + ?Sized>(rng: &mut R) -> T {
    let u = T::lit(unit_f64(rng.next_u64()));
    if u >= T::one() {
        T::zero()
    } else {
        u
    }
}

/// Draws a point uniformly distributed on the torus.
pub fn sample_xi<T: Real, R: RngCore + ?Sized>(rng: &mut R, dim: usize) -> TorusPoint<T> {
    let coords = (0..dim).map(|_| unit::<T, R>(rng)).collect();
    TorusPoint::from_wrapped_unchecked(coords)
}

/// Random-access stream of translations `xi_1, xi_2, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XiStream {
    seed: u64,
    dim: usize,
}

impl XiStream {
    pub fn new(seed: u64, dim: usize) -> Self {
        Self { seed, dim }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn positioned(&self, n: u64) -> ChaCha8Rng {
        assert!(n >= 1, "cover indices start at 1");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(XI_STREAM);
        // Two 32-bit words per 64-bit draw.
        let draw = u128::from(n - 1) * self.dim as u128;
        rng.set_word_pos(draw * 2);
        rng
    }

    /// Raw draw `k` (0-based) of the keystream as a number in `[0, 1)`.
    pub fn draw(&self, k: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(XI_STREAM);
        rng.set_word_pos(u128::from(k) * 2);
        unit_f64(rng.next_u64())
    }

    /// The translation of cover `n` (1-based).
    pub fn xi<T: Real>(&self, n: u64) -> TorusPoint<T> {
        sample_xi(&mut self.positioned(n), self.dim)
    }

    /// Calls `f(n, coords)` for `n = start .. start + count` with a reused buffer.
    pub fn for_each<T: Real>(&self, start: u64, count: u64, mut f: impl FnMut(u64, &[T])) {
        if count == 0 {
            return;
        }
        let mut rng = self.positioned(start);
        let mut buf = vec![T::zero(); self.dim];
        for n in start..start + count {
            for b in buf.iter_mut() {
                *b = unit(&mut rng);
            }
            f(n, &buf);
        }
    }

    /// Sequential iterator over `xi_start, xi_{start+1}, ...`.
    pub fn iter_from<T: Real>(&self, start: u64) -> XiIter<T> {
        XiIter {
            rng: self.positioned(start),
            dim: self.dim,
            next: start,
            _marker: std::marker::PhantomData,
        }
    }
}

pub struct XiIter<T> {
    rng: ChaCha8Rng,
    dim: usize,
    next: u64,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Real> Iterator for XiIter<T> {
    type Item = (u64, TorusPoint<T>);

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.next;
        self.next = n.checked_add(1)?;
        Some((n, sample_xi(&mut self.rng, self.dim)))
    }
}

/// Independent generator for a Monte-Carlo worker or a repeated build.
pub fn substream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (purpose as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    // Stream ids: purpose in the top byte, worker index below.
    rng.set_stream(((purpose as u64) << 56) | (index & ((1 << 56) - 1)));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_is_identical_and_draws_differ() {
        let s = XiStream::new(42, 2);
        let a: TorusPoint<f64> = s.xi(7);
        let b: TorusPoint<f64> = s.xi(7);
        assert_eq!(a, b);
        let c: TorusPoint<f64> = s.xi(8);
        assert_ne!(a, c);
        assert_ne!(a.coords()[0], a.coords()[1]);
    }

    #[test]
    fn random_access_matches_sequential() {
        let s = XiStream::new(9, 3);
        let seq: Vec<_> = s.iter_from::<f64>(1).take(50).collect();
        for (n, p) in seq {
            assert_eq!(p, s.xi::<f64>(n));
            assert_eq!(p.coords()[1], s.draw((n - 1) * 3 + 1));
        }
        let mut seen = 0;
        s.for_each::<f64>(5, 10, |n, c| {
            assert_eq!(c, s.xi::<f64>(n).coords());
            seen += 1;
        });
        assert_eq!(seen, 10);
    }

    #[test]
    fn seeds_and_substreams_are_distinct() {
        let a: TorusPoint<f64> = XiStream::new(1, 1).xi(1);
        let b: TorusPoint<f64> = XiStream::new(2, 1).xi(1);
        assert_ne!(a, b);
        let mut r1 = substream(1, Purpose::Energy, 0);
        let mut r2 = substream(1, Purpose::Energy, 1);
        let mut r3 = substream(1, Purpose::Measure, 0);
        let (x1, x2, x3) = (r1.next_u64(), r2.next_u64(), r3.next_u64());
        assert!(x1 != x2 && x1 != x3 && x2 != x3);
    }

    #[test]
    fn unit_draws_stay_below_one_in_f32() {
        let mut rng = substream(3, Purpose::Sampling, 0);
        for _ in 0..100_000 {
            let u: f32 = unit(&mut rng);
            assert!((0.0..1.0).contains(&u));
        }
        assert!(unit_f64(u64::MAX) < 1.0);
    }
}
