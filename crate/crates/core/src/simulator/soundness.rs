use std::ops::RangeInclusive;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{exact_risk, Dichotomization, ExactStratum, Regime, Scenario};
use crate::error::{Error, Result};
use crate::mechanism::{
    check_alpha_insensitivity, check_interference, check_monotonicity, Context, Factor, ResponseFunction,
    TheoremWitness, ValueSet, VariableDomain,
};
use crate::rng::{stream_rng, Stream};

/// An exact excess risk counts as positive only above this margin, so that
/// rounding in a sum that is zero in exact arithmetic is not read as `S > 0`.
pub const POSITIVE_TOLERANCE: f64 = 1e-12;

/// A scenario and the blocks to evaluate it with.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub scenario: Scenario,
    pub dichotomization: Dichotomization,
}

pub trait ScenarioGenerator: Sync {
    fn generate(&self, rng: &mut ChaCha8Rng) -> Trial;
}

impl<F> ScenarioGenerator for F
where
    F: Fn(&mut ChaCha8Rng) -> Trial + Sync,
{
    fn generate(&self, rng: &mut ChaCha8Rng) -> Trial {
        self(rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockChoice {
    /// The top level of each factor.
    Top,
    /// `{v > τ}` with `τ` drawn uniformly among the admissible cut points.
    RandomThreshold,
}

/// Random scenarios whose `f` is monotone in both factors.
///
/// In each context `(c, u)` the set where `f = 1` is an up-set of the
/// `A × B` grid, described by a staircase `t(b)` non-increasing in `b` with
/// `f(a, b) = 1` iff `a ≥ t(b)`. Every monotone grid arises this way. With
/// `allow_decreasing` each factor's direction is reversed with probability 1/2
/// (once for the whole scenario, so the direction is the same everywhere).
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneGenerator {
    pub a_levels: RangeInclusive<usize>,
    pub b_levels: RangeInclusive<usize>,
    pub c_levels: RangeInclusive<usize>,
    pub u_levels: RangeInclusive<usize>,
    pub allow_decreasing: bool,
    pub blocks: BlockChoice,
}

impl Default for MonotoneGenerator {
    fn default() -> Self {
        MonotoneGenerator {
            a_levels: 2..=4,
            b_levels: 2..=4,
            c_levels: 1..=2,
            u_levels: 1..=3,
            allow_decreasing: true,
            blocks: BlockChoice::Top,
        }
    }
}

fn random_law(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn random_block(rng: &mut ChaCha8Rng, factor: Factor, dom: &VariableDomain, choice: BlockChoice) -> ValueSet {
    match choice {
        BlockChoice::Top => ValueSet::top(factor, dom),
        BlockChoice::RandomThreshold => {
            let cut = rng.random_range(0..dom.len() - 1);
            ValueSet::above(factor, dom, cut as f64).expect("numeric range domain")
        }
    }
}

impl ScenarioGenerator for MonotoneGenerator {
    fn generate(&self, rng: &mut ChaCha8Rng) -> Trial {
        let na = rng.random_range(self.a_levels.clone());
        let nb = rng.random_range(self.b_levels.clone());
        let nc = rng.random_range(self.c_levels.clone());
        let nu = rng.random_range(self.u_levels.clone());
        let flip_a = self.allow_decreasing && rng.random_bool(0.5);
        let flip_b = self.allow_decreasing && rng.random_bool(0.5);
        let mut stairs = vec![vec![Vec::new(); nu]; nc];
        for row in stairs.iter_mut() {
            for t in row.iter_mut() {
                let mut s: Vec<usize> = (0..nb).map(|_| rng.random_range(0..=na)).collect();
                s.sort_unstable_by(|x, y| y.cmp(x));
                *t = s;
            }
        }
        let dom_c = if nc == 1 { VariableDomain::singleton("C") } else { VariableDomain::range("C", nc) };
        let dom_u = if nu == 1 { VariableDomain::singleton("U") } else { VariableDomain::range("U", nu) };
        let f = ResponseFunction::from_fn(
            VariableDomain::range("A", na),
            VariableDomain::range("B", nb),
            dom_c,
            dom_u,
            |a, b, c, u| {
                let a = if flip_a { na - 1 - a } else { a };
                let b = if flip_b { nb - 1 - b } else { b };
                a >= stairs[c][u][b]
            },
        );
        let p_c = random_law(rng, nc);
        let p_u = (0..nc).map(|_| random_law(rng, nu)).collect();
        let p_a = (0..nc).map(|_| random_law(rng, na)).collect();
        let p_b = (0..nc).map(|_| random_law(rng, nb)).collect();
        let alpha = random_block(rng, Factor::A, f.domain_a(), self.blocks);
        let beta = random_block(rng, Factor::B, f.domain_b(), self.blocks);
        let scenario =
            Scenario::new(f, p_c, p_u, p_a, p_b, Regime::Observational).expect("generated laws are normalized");
        Trial { scenario, dichotomization: Dichotomization::new(alpha, beta) }
    }
}

fn positive_weights(p: &[f64], block: &[usize]) -> Vec<usize> {
    block.iter().copied().filter(|&k| p[k] > 0.0).collect()
}

fn block_mean<F: Fn(usize) -> u8>(p: &[f64], block: &[usize], value: F) -> f64 {
    let mass: f64 = block.iter().map(|&k| p[k]).sum();
    block.iter().map(|&k| p[k] * value(k) as f64).sum::<f64>() / mass
}

/// Follows the constructive argument from a positive excess risk in stratum
/// `c` down to the four values of `f` that force interference.
///
/// Finds `u*` with positive weight and `R_11(u*) − R_10(u*) − R_01(u*) > 0`,
/// then `a1 ∈ α` whose mean over `β` exceeds its mean over the complement,
/// and symmetrically `b3 ∈ β`.
pub fn extract_witness(scenario: &Scenario, dich: &Dichotomization, stratum: &ExactStratum) -> Option<TheoremWitness> {
    let f = scenario.response();
    let c = stratum.c;
    let u = (0..stratum.p_u.len()).find(|&u| stratum.p_u[u] > 0.0 && stratum.excess_given_u(u) > POSITIVE_TOLERANCE)?;
    let (pa, pb) = (scenario.p_a(c), scenario.p_b(c));
    let alpha = dich.alpha.members.clone();
    let alpha_bar = dich.alpha.complement(f.domain_a());
    let beta = dich.beta.members.clone();
    let beta_bar = dich.beta.complement(f.domain_b());

    let a1 = positive_weights(pa, &alpha)
        .into_iter()
        .find(|&a| block_mean(pb, &beta, |b| f.eval(a, b, c, u)) > block_mean(pb, &beta_bar, |b| f.eval(a, b, c, u)))?;
    let b1 = positive_weights(pb, &beta).into_iter().find(|&b| f.eval(a1, b, c, u) == 1)?;
    let b2 = positive_weights(pb, &beta_bar).into_iter().find(|&b| f.eval(a1, b, c, u) == 0)?;

    let b3 = positive_weights(pb, &beta).into_iter().find(|&b| {
        block_mean(pa, &alpha, |a| f.eval(a, b, c, u)) > block_mean(pa, &alpha_bar, |a| f.eval(a, b, c, u))
    })?;
    let a2 = positive_weights(pa, &alpha).into_iter().find(|&a| f.eval(a, b3, c, u) == 1)?;
    let a3 = positive_weights(pa, &alpha_bar).into_iter().find(|&a| f.eval(a, b3, c, u) == 0)?;

    Some(TheoremWitness { context: Context { c, u }, a1, b1, b2, a2, a3, b3 })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedTrial {
    pub trial: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: u64,
    pub c: usize,
    pub excess: f64,
    /// What failed: `b_interferes_with_a`, `a_interferes_with_b` or `witness`.
    pub claim: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub seed: u64,
    pub trials: u64,
    pub evaluated: u64,
    pub skipped: Vec<SkippedTrial>,
    /// Trials with `S > 0` in at least one stratum.
    pub positive_trials: u64,
    pub positive_strata: u64,
    pub claims_b_with_a: u64,
    pub confirmed_b_with_a: u64,
    pub claims_a_with_b: u64,
    pub confirmed_a_with_b: u64,
    pub witnesses_replayed: u64,
    pub counterexamples: Vec<Counterexample>,
}

impl SoundnessReport {
    pub fn sound(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

#[derive(Debug, Default)]
struct TrialOutcome {
    skipped: Option<String>,
    positive_strata: u64,
    claims: [u64; 2],
    confirmed: [u64; 2],
    witnesses: u64,
    counterexamples: Vec<Counterexample>,
}

fn skip(reason: String) -> TrialOutcome {
    TrialOutcome { skipped: Some(reason), ..Default::default() }
}

fn run_trial(index: u64, trial: &Trial) -> TrialOutcome {
    let f = trial.scenario.response();
    let dich = &trial.dichotomization;
    if let Err(e) = dich.validate(f) {
        return skip(format!("blocks: {e}"));
    }
    for factor in [Factor::A, Factor::B] {
        match check_monotonicity(f, factor) {
            Ok(m) if m.is_monotone() => {}
            Ok(_) => return skip(format!("f is not monotone in {factor}")),
            Err(e) => return skip(e.to_string()),
        }
    }
    let insensitive = match (
        check_alpha_insensitivity(f, Factor::A, &dich.alpha),
        check_alpha_insensitivity(f, Factor::B, &dich.beta),
    ) {
        (Ok(a), Ok(b)) => [a, b],
        (Err(e), _) | (_, Err(e)) => return skip(e.to_string()),
    };
    if !insensitive[0] && !insensitive[1] {
        return skip("neither block is insensitive".into());
    }
    let table = match exact_risk(&trial.scenario, dich) {
        Ok(t) => t,
        Err(e) => return skip(e.to_string()),
    };
    let interference = [check_interference(f, Factor::B).is_some(), check_interference(f, Factor::A).is_some()];
    let claim_names = ["b_interferes_with_a", "a_interferes_with_b"];
    let mut out = TrialOutcome::default();
    for stratum in &table.strata {
        let s = stratum.excess();
        if s <= POSITIVE_TOLERANCE {
            continue;
        }
        out.positive_strata += 1;
        match extract_witness(&trial.scenario, dich, stratum) {
            Some(w) if w.replay(f) => out.witnesses += 1,
            _ => out.counterexamples.push(Counterexample {
                trial: index,
                c: stratum.c,
                excess: s,
                claim: "witness".into(),
            }),
        }
        for k in 0..2 {
            if insensitive[k] {
                out.claims[k] += 1;
                if interference[k] {
                    out.confirmed[k] += 1;
                } else {
                    out.counterexamples.push(Counterexample {
                        trial: index,
                        c: stratum.c,
                        excess: s,
                        claim: claim_names[k].into(),
                    });
                }
            }
        }
    }
    out
}

/// Draws `trials` scenarios and checks every positive excess risk against
/// brute-force interference.
///
/// Trial `t` uses its own stream, and outcomes are tallied in trial order, so
/// the report does not depend on the number of worker threads.
pub fn soundness_experiment<G: ScenarioGenerator>(generator: &G, trials: u64, seed: u64) -> Result<SoundnessReport> {
    if trials == 0 {
        return Err(Error::Usage("need at least one trial".into()));
    }
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, Stream::Scenario, t);
            run_trial(t, &generator.generate(&mut rng))
        })
        .collect();
    let mut report = SoundnessReport {
        seed,
        trials,
        evaluated: 0,
        skipped: Vec::new(),
        positive_trials: 0,
        positive_strata: 0,
        claims_b_with_a: 0,
        confirmed_b_with_a: 0,
        claims_a_with_b: 0,
        confirmed_a_with_b: 0,
        witnesses_replayed: 0,
        counterexamples: Vec::new(),
    };
    for (t, o) in outcomes.into_iter().enumerate() {
        if let Some(reason) = o.skipped {
            report.skipped.push(SkippedTrial { trial: t as u64, reason });
            continue;
        }
        report.evaluated += 1;
        report.positive_trials += (o.positive_strata > 0) as u64;
        report.positive_strata += o.positive_strata;
        report.claims_b_with_a += o.claims[0];
        report.confirmed_b_with_a += o.confirmed[0];
        report.claims_a_with_b += o.claims[1];
        report.confirmed_a_with_b += o.confirmed[1];
        report.witnesses_replayed += o.witnesses;
        report.counterexamples.extend(o.counterexamples);
    }
    Ok(report)
}
