use serde::{Deserialize, Serialize};

use super::{check_interference, check_irrelevance, Context, Factor, ResponseFunction, VariableDomain};
use crate::error::{Error, Result};

/// Grouping of the sixteen two-by-two Boolean patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternClass {
    /// At least one factor is irrelevant (constants, `A`, `¬A`, `B`, `¬B`).
    Irrelevance,
    /// Three of four cells are `1`: the disjunctions.
    Disjunctive,
    /// The conjunctions and the two equality patterns.
    Interdependent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BooleanPattern {
    /// `1 + Σ f(a, b) · 2^(2a + b)`, in `1..=16`.
    pub id: u8,
    pub class: PatternClass,
    pub a_interferes_with_b: bool,
    pub b_interferes_with_a: bool,
}

/// Classifies `f` restricted to one context, for binary `A` and `B`.
pub fn classify_boolean_pattern(f: &ResponseFunction, ctx: Context) -> Result<BooleanPattern> {
    if f.domain_a().len() != 2 || f.domain_b().len() != 2 {
        return Err(Error::Domain(format!(
            "boolean patterns need binary A and B; got |A| = {}, |B| = {}",
            f.domain_a().len(),
            f.domain_b().len()
        )));
    }
    f.validate_context(ctx)?;
    let mut bits = 0u8;
    for a in 0..2 {
        for b in 0..2 {
            bits |= f.eval(a, b, ctx.c, ctx.u) << (2 * a + b);
        }
    }
    let slice = ResponseFunction::from_ab(VariableDomain::range("A", 2), VariableDomain::range("B", 2), |a, b| {
        bits >> (2 * a + b) & 1 == 1
    });
    let origin = Context { c: 0, u: 0 };
    let irrelevant = check_irrelevance(&slice, Factor::A, origin)? || check_irrelevance(&slice, Factor::B, origin)?;
    let class = if irrelevant {
        PatternClass::Irrelevance
    } else if bits.count_ones() == 3 {
        PatternClass::Disjunctive
    } else {
        PatternClass::Interdependent
    };
    Ok(BooleanPattern {
        id: bits + 1,
        class,
        a_interferes_with_b: check_interference(&slice, Factor::A).is_some(),
        b_interferes_with_a: check_interference(&slice, Factor::B).is_some(),
    })
}
