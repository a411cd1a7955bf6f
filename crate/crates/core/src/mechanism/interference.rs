use serde::{Deserialize, Serialize};

use super::{Context, Factor, ResponseFunction};
use crate::error::Result;

/// Whether `target` is irrelevant to `Y` in context `ctx`, given the other
/// factor: `f` does not change when only `target` changes.
pub fn check_irrelevance(f: &ResponseFunction, target: Factor, ctx: Context) -> Result<bool> {
    f.validate_context(ctx)?;
    Ok(varying_pair(f, target, ctx).is_none())
}

/// First `(other level, t1, t2)` with `f(t1) != f(t2)` along `target`.
fn varying_pair(f: &ResponseFunction, target: Factor, ctx: Context) -> Option<(usize, usize, usize)> {
    let nt = f.domain(target).len();
    let no = f.domain(target.other()).len();
    for o in 0..no {
        let first = f.eval_as(target, 0, o, ctx);
        if let Some(t) = (1..nt).find(|&t| f.eval_as(target, t, o, ctx) != first) {
            return Some((o, 0, t));
        }
    }
    None
}

/// Evidence that `actor` interferes with the other factor.
///
/// In `context`, setting `actor` to `blocker` forces `Y = 0` for every level
/// of the other factor, while at `pivot` the other factor moves `Y` between
/// levels `other_pair.0` and `other_pair.1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterferenceWitness {
    pub actor: Factor,
    pub context: Context,
    pub blocker: usize,
    pub pivot: usize,
    pub other_pair: (usize, usize),
}

impl InterferenceWitness {
    /// Re-evaluates the witness against `f`.
    pub fn replay(&self, f: &ResponseFunction) -> bool {
        let other = self.actor.other();
        let n_other = f.domain(other).len();
        let blocked = (0..n_other).all(|o| f.eval_as(self.actor, self.blocker, o, self.context) == 0);
        let (o1, o2) = self.other_pair;
        let moves = f.eval_as(other, o1, self.pivot, self.context) != f.eval_as(other, o2, self.pivot, self.context);
        blocked && moves
    }
}

/// Searches for a context in which `actor` interferes with the other factor
/// in producing `Y = 1`. Contexts are scanned lexicographically and the first
/// witness is returned.
pub fn check_interference(f: &ResponseFunction, actor: Factor) -> Option<InterferenceWitness> {
    let other = actor.other();
    let n_actor = f.domain(actor).len();
    let n_other = f.domain(other).len();
    f.contexts().find_map(|ctx| {
        let (pivot, o1, o2) = varying_pair(f, other, ctx)?;
        let blocker = (0..n_actor).find(|&x| (0..n_other).all(|o| f.eval_as(actor, x, o, ctx) == 0))?;
        Some(InterferenceWitness { actor, context: ctx, blocker, pivot, other_pair: (o1, o2) })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoactionVerdict {
    pub a_interferes_with_b: bool,
    pub b_interferes_with_a: bool,
    pub weak: bool,
    pub strong: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_with_b_witness: Option<InterferenceWitness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_with_a_witness: Option<InterferenceWitness>,
}

impl CoactionVerdict {
    pub fn witnesses(&self) -> impl Iterator<Item = &InterferenceWitness> {
        self.a_with_b_witness.iter().chain(self.b_with_a_witness.iter())
    }
}

pub fn classify_coaction(f: &ResponseFunction) -> CoactionVerdict {
    let a_with_b_witness = check_interference(f, Factor::A);
    let b_with_a_witness = check_interference(f, Factor::B);
    let a = a_with_b_witness.is_some();
    let b = b_with_a_witness.is_some();
    CoactionVerdict {
        a_interferes_with_b: a,
        b_interferes_with_a: b,
        weak: a || b,
        strong: a && b,
        a_with_b_witness,
        b_with_a_witness,
    }
}

/// The value tuple produced when a positive excess risk is traced back to a
/// single context: `f(a1,b1)=1`, `f(a1,b2)=0`, `f(a2,b3)=1`, `f(a3,b3)=0`
/// with `a1, a2` in the upper block of `A`, `a3` below it, `b1, b3` in the
/// upper block of `B` and `b2` below it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremWitness {
    pub context: Context,
    pub a1: usize,
    pub b1: usize,
    pub b2: usize,
    pub a2: usize,
    pub a3: usize,
    pub b3: usize,
}

impl TheoremWitness {
    pub fn replay(&self, f: &ResponseFunction) -> bool {
        let Context { c, u } = self.context;
        f.eval(self.a1, self.b1, c, u) == 1
            && f.eval(self.a1, self.b2, c, u) == 0
            && f.eval(self.a2, self.b3, c, u) == 1
            && f.eval(self.a3, self.b3, c, u) == 0
    }
}
