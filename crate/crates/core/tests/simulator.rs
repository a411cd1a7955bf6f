mod common;

use std::path::Path;

use coaction::mechanism::{Factor, ValueSet};
use coaction::rng::{stream_rng, Stream};
use coaction::simulator::{
    exact_risk, interventional_risk, observational_risk, sample_dataset, soundness_experiment, BlockChoice,
    Dichotomization, MonotoneGenerator, Regime, Scenario, ScenarioGenerator,
};
use proptest::prelude::*;

fn data_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// `P(Y = 1 | alpha = i, beta = j, C = c)` from the full joint law of `(c, u, a, b)`.
fn joint_oracle(s: &Scenario, d: &Dichotomization, c: usize) -> [[f64; 2]; 2] {
    let f = s.response();
    let mut num = [[0.0; 2]; 2];
    let mut den = [[0.0; 2]; 2];
    for (u, pu) in s.p_u(c).iter().enumerate() {
        for (a, pa) in s.p_a(c).iter().enumerate() {
            for (b, pb) in s.p_b(c).iter().enumerate() {
                let (i, j) = (d.alpha.contains(a) as usize, d.beta.contains(b) as usize);
                let w = pu * pa * pb;
                den[i][j] += w;
                num[i][j] += w * f.eval(a, b, c, u) as f64;
            }
        }
    }
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = num[i][j] / den[i][j];
        }
    }
    r
}

fn generator(blocks: BlockChoice) -> MonotoneGenerator {
    MonotoneGenerator { blocks, ..MonotoneGenerator::default() }
}

proptest! {
    #[test]
    fn enumeration_matches_joint_law(seed in any::<u64>(), threshold in any::<bool>()) {
        let blocks = if threshold { BlockChoice::RandomThreshold } else { BlockChoice::Top };
        let trial = generator(blocks).generate(&mut stream_rng(seed, Stream::Scenario, 0));
        let table = exact_risk(&trial.scenario, &trial.dichotomization).unwrap();
        for st in &table.strata {
            let oracle = joint_oracle(&trial.scenario, &trial.dichotomization, st.c);
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((st.risk[i][j] - oracle[i][j]).abs() < 1e-12);
                    let mixed: f64 = st.risk_given_u.iter().zip(&st.p_u).map(|(r, p)| r[i][j] * p).sum();
                    prop_assert!((st.risk[i][j] - mixed).abs() < 1e-12);
                    prop_assert!((0.0..=1.0).contains(&st.risk[i][j]));
                }
            }
        }
    }

    #[test]
    fn observation_equals_intervention(seed in any::<u64>()) {
        let trial = generator(BlockChoice::Top).generate(&mut stream_rng(seed, Stream::Scenario, 1));
        let s = &trial.scenario;
        let f = s.response();
        for c in 0..f.domain_c().len() {
            for a in 0..f.domain_a().len() {
                for b in 0..f.domain_b().len() {
                    let obs = observational_risk(s, a, b, c).unwrap();
                    prop_assert!((obs - interventional_risk(s, a, b, c)).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn monte_carlo_matches_enumeration() {
    let s = Scenario::load(&data_path("logical_scenario.json")).unwrap();
    let f = s.response();
    let d =
        Dichotomization::new(ValueSet::from_members(Factor::A, vec![1, 2]), ValueSet::from_members(Factor::B, vec![1]));
    let exact = exact_risk(&s, &d).unwrap();
    let data = sample_dataset(&s, 100_000, 42).unwrap();
    let (a, b, y) = (data.values("A").unwrap(), data.values("B").unwrap(), data.values("Y").unwrap());
    let level = |dom: &coaction::mechanism::VariableDomain, v: f64| {
        dom.levels.iter().position(|l| l.as_f64() == Some(v)).unwrap()
    };
    let mut n = [[0.0; 2]; 2];
    let mut k = [[0.0; 2]; 2];
    for r in 0..data.n_rows() {
        let i = d.alpha.contains(level(f.domain_a(), a[r])) as usize;
        let j = d.beta.contains(level(f.domain_b(), b[r])) as usize;
        n[i][j] += 1.0;
        k[i][j] += y[r];
    }
    for i in 0..2 {
        for j in 0..2 {
            let p = exact.strata[0].risk[i][j];
            let se = (p * (1.0 - p) / n[i][j]).sqrt().max(1.0 / n[i][j]);
            assert!((k[i][j] / n[i][j] - p).abs() <= 3.0 * se, "cell ({i},{j})");
        }
    }
}

#[test]
fn interventional_draws_fix_factors() {
    let s = Scenario::load(&data_path("circuit_scenario.json"))
        .unwrap()
        .with_regime(Regime::Interventional { a: 3, b: 0 })
        .unwrap();
    let data = sample_dataset(&s, 500, 1).unwrap();
    assert!(data.values("A_switches").unwrap().iter().all(|&v| v == 3.0));
    assert!(data.values("B_switch").unwrap().iter().all(|&v| v == 0.0));
    // f = A2 and (A1 or B) and U, so Y follows the switch U: P(U = CLOSED) = 0.7.
    let rate = data.values("Y").unwrap().iter().sum::<f64>() / 500.0;
    assert!((rate - 0.7).abs() < 3.0 * (0.21f64 / 500.0).sqrt());
}

#[test]
fn different_seeds_different_rows_same_law() {
    let s = Scenario::load(&data_path("logical_scenario.json")).unwrap();
    let x = sample_dataset(&s, 20_000, 1).unwrap();
    let y = sample_dataset(&s, 20_000, 2).unwrap();
    assert_ne!(x.values("A").unwrap(), y.values("A").unwrap());
    let mean = |d: &coaction::estimation::Dataset| d.values("Y").unwrap().iter().sum::<f64>() / 20_000.0;
    assert!((mean(&x) - mean(&y)).abs() < 4.0 * (0.5f64 / 20_000.0).sqrt());
}

#[test]
fn threshold_blocks_are_sound_when_insensitive() {
    let report = soundness_experiment(&generator(BlockChoice::RandomThreshold), 300, 8).unwrap();
    assert!(report.sound(), "{:?}", report.counterexamples);
    assert!(report.evaluated > 0);
}

#[test]
fn positive_excess_always_has_interference() {
    // Independent of the experiment's own bookkeeping: brute-force the
    // definition on every positive stratum.
    let g = generator(BlockChoice::Top);
    let mut positives = 0;
    for t in 0..300 {
        let trial = g.generate(&mut stream_rng(99, Stream::Scenario, t));
        let f = trial.scenario.response();
        let up_a = coaction::mechanism::check_monotonicity(f, Factor::A).unwrap();
        let up_b = coaction::mechanism::check_monotonicity(f, Factor::B).unwrap();
        use coaction::mechanism::Monotonicity::*;
        if !matches!(up_a, NonDecreasing | Constant) || !matches!(up_b, NonDecreasing | Constant) {
            continue;
        }
        let table = exact_risk(&trial.scenario, &trial.dichotomization).unwrap();
        for st in &table.strata {
            if st.excess() > 1e-12 {
                positives += 1;
                let c_slice = (0..f.domain_u().len()).any(|u| common::interferes_in(f, false, st.c, u));
                assert!(c_slice, "trial {t} stratum {}", st.c);
            }
        }
    }
    assert!(positives > 10);
}
