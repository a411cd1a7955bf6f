use serde::{Deserialize, Serialize};

use super::{Dichotomization, Regime, Scenario};
use crate::error::{Error, Result};

/// Exact risks within one level `c` of the observed context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactStratum {
    pub c: usize,
    /// `R_ij` indexed `[i][j]`.
    pub risk: [[f64; 2]; 2],
    /// `R_ij(u)` for each level of `U`.
    pub risk_given_u: Vec<[[f64; 2]; 2]>,
    pub p_u: Vec<f64>,
}

impl ExactStratum {
    pub fn excess(&self) -> f64 {
        self.risk[1][1] - self.risk[1][0] - self.risk[0][1]
    }

    pub fn excess_given_u(&self, u: usize) -> f64 {
        let r = &self.risk_given_u[u];
        r[1][1] - r[1][0] - r[0][1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRiskTable {
    pub strata: Vec<ExactStratum>,
}

/// `P(level ∈ block | c)` and the conditional weights within the block.
fn block_weights(p: &[f64], block: &[usize]) -> Option<Vec<(usize, f64)>> {
    let mass: f64 = block.iter().map(|&k| p[k]).sum();
    (mass > 0.0).then(|| block.iter().map(|&k| (k, p[k] / mass)).collect())
}

/// Population risks `R_ij` per stratum under the observational law.
///
/// `R_ij(u)` averages `f(a, b, c, u)` over `a` in block `i` and `b` in block
/// `j` with the within-block conditional laws; `R_ij` mixes over `P(u | c)`.
pub fn exact_risk(scenario: &Scenario, dich: &Dichotomization) -> Result<ExactRiskTable> {
    if scenario.regime() != Regime::Observational {
        return Err(Error::Usage("exact risks are defined under the observational regime".into()));
    }
    let f = scenario.response();
    dich.validate(f)?;
    let a_blocks = [dich.alpha.complement(f.domain_a()), dich.alpha.members.clone()];
    let b_blocks = [dich.beta.complement(f.domain_b()), dich.beta.members.clone()];
    let nu = f.domain_u().len();
    let mut strata = Vec::new();
    for c in 0..f.domain_c().len() {
        let wa = a_blocks
            .iter()
            .enumerate()
            .map(|(i, blk)| {
                block_weights(scenario.p_a(c), blk)
                    .ok_or_else(|| Error::Degenerate(format!("P(alpha={i} | C={c}) is zero")))
            })
            .collect::<Result<Vec<_>>>()?;
        let wb = b_blocks
            .iter()
            .enumerate()
            .map(|(j, blk)| {
                block_weights(scenario.p_b(c), blk)
                    .ok_or_else(|| Error::Degenerate(format!("P(beta={j} | C={c}) is zero")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut risk_given_u = vec![[[0.0; 2]; 2]; nu];
        for (u, r) in risk_given_u.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    r[i][j] = wa[i]
                        .iter()
                        .map(|&(a, pa)| pa * wb[j].iter().map(|&(b, pb)| pb * f.eval(a, b, c, u) as f64).sum::<f64>())
                        .sum::<f64>()
                        .clamp(0.0, 1.0);
                }
            }
        }
        let p_u = scenario.p_u(c).to_vec();
        let mut risk = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                // Rounding in the block weights can land a hair outside [0, 1].
                risk[i][j] = risk_given_u.iter().zip(&p_u).map(|(r, p)| r[i][j] * p).sum::<f64>().clamp(0.0, 1.0);
            }
        }
        strata.push(ExactStratum { c, risk, risk_given_u, p_u });
    }
    Ok(ExactRiskTable { strata })
}

/// Risk of `Y = 1` when `(A, B)` is set to `(a, b)` within stratum `c`.
pub fn interventional_risk(scenario: &Scenario, a: usize, b: usize, c: usize) -> f64 {
    let f = scenario.response();
    scenario.p_u(c).iter().enumerate().map(|(u, p)| p * f.eval(a, b, c, u) as f64).sum()
}

/// `P(Y = 1 | A = a, B = b, C = c)` from the joint law of `(c, u, a, b)`.
/// `None` if the conditioning event has probability zero.
pub fn observational_risk(scenario: &Scenario, a: usize, b: usize, c: usize) -> Option<f64> {
    let f = scenario.response();
    let (mut num, mut den) = (0.0, 0.0);
    for (u, pu) in scenario.p_u(c).iter().enumerate() {
        let w = scenario.p_c()[c] * pu * scenario.p_a(c)[a] * scenario.p_b(c)[b];
        den += w;
        num += w * f.eval(a, b, c, u) as f64;
    }
    (den > 0.0).then(|| num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::{Factor, ResponseFunction, ValueSet, VariableDomain};

    #[test]
    fn constant_one_gives_unit_risks() {
        let f = ResponseFunction::from_ab(VariableDomain::range("A", 3), VariableDomain::range("B", 2), |_, _| true);
        let s = Scenario::uniform(f.clone());
        let t = exact_risk(&s, &Dichotomization::top(&f)).unwrap();
        assert_eq!(t.strata[0].risk, [[1.0; 2]; 2]);
    }

    #[test]
    fn and_gives_unit_excess() {
        let f = ResponseFunction::from_fn(
            VariableDomain::range("A", 2),
            VariableDomain::range("B", 2),
            VariableDomain::singleton("C"),
            VariableDomain::range("U", 2),
            |a, b, _, _| a == 1 && b == 1,
        );
        let s = Scenario::uniform(f.clone());
        let t = exact_risk(&s, &Dichotomization::top(&f)).unwrap();
        assert_eq!(t.strata[0].risk, [[0.0, 0.0], [0.0, 1.0]]);
        assert_eq!(t.strata[0].excess(), 1.0);
    }

    #[test]
    fn zero_mass_block_is_degenerate() {
        let f = ResponseFunction::from_ab(VariableDomain::range("A", 2), VariableDomain::range("B", 2), |a, _| a == 1);
        let s = Scenario::new(
            f.clone(),
            vec![1.0],
            vec![vec![1.0]],
            vec![vec![1.0, 0.0]],
            vec![vec![0.5, 0.5]],
            Regime::Observational,
        )
        .unwrap();
        assert!(matches!(exact_risk(&s, &Dichotomization::top(&f)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn interventional_scenario_rejected() {
        let f = ResponseFunction::from_ab(VariableDomain::range("A", 2), VariableDomain::range("B", 2), |a, _| a == 1);
        let s = Scenario::uniform(f.clone()).with_regime(Regime::Interventional { a: 0, b: 0 }).unwrap();
        assert!(matches!(exact_risk(&s, &Dichotomization::top(&f)), Err(Error::Usage(_))));
    }

    #[test]
    fn unequal_within_block_weights() {
        // A in {0,1,2}, alpha = {1,2} with P(a) = (0.2, 0.2, 0.6): f = [a == 2] gives R_1. = 0.75.
        let f = ResponseFunction::from_ab(VariableDomain::range("A", 3), VariableDomain::range("B", 2), |a, _| a == 2);
        let s = Scenario::new(
            f.clone(),
            vec![1.0],
            vec![vec![1.0]],
            vec![vec![0.2, 0.2, 0.6]],
            vec![vec![0.5, 0.5]],
            Regime::Observational,
        )
        .unwrap();
        let d =
            Dichotomization::new(ValueSet::from_members(Factor::A, vec![1, 2]), ValueSet::top(Factor::B, f.domain_b()));
        let t = exact_risk(&s, &d).unwrap();
        assert!((t.strata[0].risk[1][0] - 0.75).abs() < 1e-15);
        assert_eq!(t.strata[0].risk[0][1], 0.0);
    }
}
