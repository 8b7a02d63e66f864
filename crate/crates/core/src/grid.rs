//! Inclusive uniform and logarithmic grids.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `count` points from `start` to `stop`, both included. `count == 1` requires
/// `start == stop`.
pub fn linspace<T: Real>(start: T, stop: T, count: usize) -> Result<Vec<T>> {
    match count {
        0 => Err(Error::param("grid", "needs at least one point")),
        1 if start == stop => Ok(vec![start]),
        1 => Err(Error::param("grid", "a single-point grid needs start == stop")),
        _ => {
            let span = stop - start;
            let last = T::count(count - 1);
            Ok((0..count)
                .map(|i| if i + 1 == count { stop } else { start + span * T::count(i) / last })
                .collect())
        }
    }
}

/// Logarithmically spaced grid between two positive endpoints.
pub fn logspace<T: Real>(start: T, stop: T, count: usize) -> Result<Vec<T>> {
    if !(start > T::zero() && stop > T::zero()) {
        return Err(Error::param("grid", "logarithmic grid needs positive endpoints"));
    }
    let exps = linspace(start.ln(), stop.ln(), count)?;
    let n = exps.len();
    Ok(exps
        .into_iter()
        .enumerate()
        .map(|(i, e)| match i {
            0 => start,
            _ if i + 1 == n => stop,
            _ => e.exp(),
        })
        .collect())
}
