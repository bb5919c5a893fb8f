use rand::{Rng, RngCore};

use crate::error::{invalid, Result};
use crate::rng::unit;
use crate::scalar::Real;
use crate::torus::TorusPoint;

use super::build::CantorLevel;

/// One draw from the natural measure of a level: a uniform node, then a
/// uniform point of its rectangle.
pub fn sample_mu<T: Real, R: RngCore + ?Sized>(level: &CantorLevel<T>, rng: &mut R) -> Result<TorusPoint<T>> {
    if level.nodes.is_empty() {
        return Err(invalid("level has no nodes"));
    }
    let node = &level.nodes[rng.random_range(0..level.nodes.len())];
    let u: Vec<T> = (0..node.rect.dim()).map(|_| unit::<T, R>(rng)).collect();
    Ok(node.rect.point_at(&u))
}

/// Node index chosen together with the point, for frequency tests.
pub fn sample_mu_indexed<T: Real, R: RngCore + ?Sized>(
    level: &CantorLevel<T>,
    rng: &mut R,
) -> Result<(usize, TorusPoint<T>)> {
    if level.nodes.is_empty() {
        return Err(invalid("level has no nodes"));
    }
    let idx = rng.random_range(0..level.nodes.len());
    let node = &level.nodes[idx];
    let u: Vec<T> = (0..node.rect.dim()).map(|_| unit::<T, R>(rng)).collect();
    Ok((idx, node.rect.point_at(&u)))
}
