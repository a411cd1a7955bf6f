use serde::{Deserialize, Serialize};

use super::{Factor, ResponseFunction, ValueSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    NonDecreasing,
    NonIncreasing,
    /// Both non-decreasing and non-increasing: the factor never matters.
    Constant,
    None,
}

impl Monotonicity {
    pub fn is_monotone(self) -> bool {
        self != Monotonicity::None
    }
}

/// Rows of `f` along `target`: one 0/1 vector per level of `target`, indexed
/// by every `(other, c, u)` configuration.
fn profiles(f: &ResponseFunction, target: Factor) -> Vec<Vec<u8>> {
    let nt = f.domain(target).len();
    let no = f.domain(target.other()).len();
    (0..nt)
        .map(|t| {
            f.contexts()
                .flat_map(|ctx| (0..no).map(move |o| (ctx, o)))
                .map(|(ctx, o)| f.eval_as(target, t, o, ctx))
                .collect()
        })
        .collect()
}

pub fn check_monotonicity(f: &ResponseFunction, target: Factor) -> Result<Monotonicity> {
    let dom = f.domain(target);
    if !dom.ordered {
        return Err(Error::Domain(format!("monotonicity needs an ordered domain; '{}' is unordered", dom.name)));
    }
    Ok(monotonicity_of(&profiles(f, target)))
}

fn monotonicity_of(rows: &[Vec<u8>]) -> Monotonicity {
    let up = rows.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(x, y)| x <= y));
    let down = rows.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(x, y)| x >= y));
    match (up, down) {
        (true, true) => Monotonicity::Constant,
        (true, false) => Monotonicity::NonDecreasing,
        (false, true) => Monotonicity::NonIncreasing,
        (false, false) => Monotonicity::None,
    }
}

/// No pair of levels of `target` has its pointwise order strictly reversed
/// between two `(other, c, u)` configurations.
pub fn check_consistency(f: &ResponseFunction, target: Factor) -> bool {
    let rows = profiles(f, target);
    rows.iter().enumerate().all(|(i, r1)| {
        rows[i + 1..].iter().all(|r2| {
            let gt = r1.iter().zip(r2).any(|(x, y)| x > y);
            let lt = r1.iter().zip(r2).any(|(x, y)| x < y);
            !(gt && lt)
        })
    })
}

/// A reordering of the levels of `target` under which `f` is non-decreasing,
/// as a permutation (`perm[i]` is the old level placed at position `i`).
///
/// With a binary outcome, consistency makes every pair of level profiles
/// pointwise comparable, so sorting by the number of `1`s is enough. Ties keep
/// their original relative order.
pub fn find_monotone_recoding(f: &ResponseFunction, target: Factor) -> Option<Vec<usize>> {
    if !check_consistency(f, target) {
        return None;
    }
    let rows = profiles(f, target);
    let mut perm: Vec<usize> = (0..rows.len()).collect();
    perm.sort_by_key(|&i| rows[i].iter().map(|&v| v as usize).sum::<usize>());
    Some(perm)
}

/// Applies a permutation from [`find_monotone_recoding`].
pub fn apply_recoding(f: &ResponseFunction, target: Factor, perm: &[usize]) -> Result<ResponseFunction> {
    f.permute_levels(target, perm)
}

/// Within the upper block, once `f` reaches `0` it stays `0` for every larger
/// level of the block, for all `(other, c, u)`.
///
/// Comparisons are restricted to block members. For a block of the form
/// `{v > τ}` this is the same as comparing against all larger levels, and a
/// singleton block is always insensitive.
pub fn check_alpha_insensitivity(f: &ResponseFunction, target: Factor, block: &ValueSet) -> Result<bool> {
    if block.variable != target {
        return Err(Error::Usage(format!("block is on {}, target is {target}", block.variable)));
    }
    let dom = f.domain(target);
    if !dom.ordered {
        return Err(Error::Domain(format!("insensitivity needs an ordered domain; '{}' is unordered", dom.name)));
    }
    if let Some(&m) = block.members.iter().find(|&&m| m >= dom.len()) {
        return Err(Error::Domain(format!("block level {m} outside '{}'", dom.name)));
    }
    let no = f.domain(target.other()).len();
    for ctx in f.contexts() {
        for o in 0..no {
            let mut seen_zero = false;
            for &t in &block.members {
                let v = f.eval_as(target, t, o, ctx);
                if seen_zero && v == 1 {
                    return Ok(false);
                }
                seen_zero |= v == 0;
            }
        }
    }
    Ok(true)
}
