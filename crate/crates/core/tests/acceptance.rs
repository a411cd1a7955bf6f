//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p coaction --test acceptance`. The process fails if
//! any criterion fails, except those listed in `KNOWN_RED`, whose failure is
//! expected and explained on the line itself.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use coaction::adag::{check_core_conditions, check_sufficient_covariate, Adag, ConditionStatus, RoleAssignment};
use coaction::estimation::{
    bootstrap_test, estimate_risk_table, excess_risk_test, fit_linear_odds, fit_linear_risk, model_excess_risk,
    nonparametric_excess, rare_disease_excess, BootstrapConfig, CellCoding, Design, FitOptions, Link, ModelFit,
};
use coaction::mechanism::{
    check_interference, classify_boolean_pattern, classify_coaction, Context, Factor, PatternClass, ResponseFunction,
    VariableDomain,
};
use coaction::rng::{stream_rng, Stream};
use coaction::simulator::{
    exact_risk, sample_dataset, soundness_experiment, MonotoneGenerator, Scenario, ScenarioGenerator,
};

/// Criteria expected to fail, with the sub-check responsible.
const KNOWN_RED: &[(u32, &str)] = &[(1, "mutual interference in all 6 interdependent patterns")];

struct Outcome {
    pass: bool,
    detail: String,
    /// Names of failed sub-checks.
    failed: Vec<String>,
}

impl Outcome {
    fn from_checks(checks: Vec<(&str, bool)>, detail: String) -> Self {
        let failed: Vec<String> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.to_string()).collect();
        Outcome { pass: failed.is_empty(), detail, failed }
    }
}

fn data(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn worked_examples() -> Outcome {
    let logical = ResponseFunction::from_json(&data("logical.json")).unwrap();
    let v = classify_coaction(&logical);
    let circuit = ResponseFunction::from_json(&data("circuit.json")).unwrap();
    let closed = circuit.domain_u().index_of(&"CLOSED".into()).unwrap();
    let circuit_ok = check_interference(&circuit, Factor::A).is_some_and(|w| w.context.u == closed)
        && common::interferes_in(&circuit, true, 0, closed);

    let mut classes: BTreeMap<String, usize> = BTreeMap::new();
    let mut interdependent = Vec::new();
    for bits in 0u8..16 {
        let f = ResponseFunction::from_ab(VariableDomain::range("A", 2), VariableDomain::range("B", 2), |a, b| {
            bits >> (2 * a + b) & 1 == 1
        });
        let p = classify_boolean_pattern(&f, Context { c: 0, u: 0 }).unwrap();
        *classes.entry(format!("{:?}", p.class)).or_default() += 1;
        if p.class == PatternClass::Interdependent {
            interdependent.push((p.id, p.a_interferes_with_b && p.b_interferes_with_a));
        }
    }
    let census = (classes.get("Irrelevance"), classes.get("Disjunctive"), classes.get("Interdependent"))
        == (Some(&6), Some(&4), Some(&6));
    let mutual = interdependent.iter().filter(|(_, m)| *m).count();
    let lacking: Vec<u8> = interdependent.iter().filter(|(_, m)| !*m).map(|(id, _)| *id).collect();
    Outcome::from_checks(
        vec![
            ("logical: A interferes with B, B does not", v.a_interferes_with_b && !v.b_interferes_with_a),
            ("logical: weak, not strong", v.weak && !v.strong),
            ("circuit: A interferes with B when U=CLOSED", circuit_ok),
            ("census 6/4/6", census),
            ("mutual interference in all 6 interdependent patterns", mutual == 6),
        ],
        format!(
            "census {:?}; mutual interference in {mutual}/6 interdependent patterns (without: ids {lacking:?}, the two equality patterns have no blocking value)",
            classes
        ),
    )
}

fn figure(name: &str) -> Adag {
    Adag::from_json(&data(&format!("{name}.json"))).unwrap()
}

fn figure_verdicts() -> Outcome {
    let roles = |u: &str, c: &[&str]| RoleAssignment::new("A", "B", "Y").with_u(&[u]).with_c(c);
    let fails = |s: &ConditionStatus| matches!(s, ConditionStatus::Fails { .. });
    let r1b = check_core_conditions(&figure("fig1b"), &roles("V", &[])).unwrap();
    let r1c = check_core_conditions(&figure("fig1c"), &roles("V", &[])).unwrap();
    let r3a = check_core_conditions(&figure("fig3a"), &roles("U", &["Z"])).unwrap();
    let r3b = check_core_conditions(&figure("fig3b"), &roles("U", &[])).unwrap();
    let s3c = check_sufficient_covariate(&figure("fig3c"), &RoleAssignment::new("A", "B", "Y"), &["Z"]).unwrap();
    let r3d = check_core_conditions(&figure("fig3d"), &roles("U", &["Z"])).unwrap();
    Outcome::from_checks(
        vec![
            ("1b holds at C={}", r1b.graph_conditions_hold()),
            ("1c condition 4 fails", fails(&r1c.factor_independence)),
            ("3a passes at C={Z}", r3a.graph_conditions_hold()),
            ("3b condition 3 fails", fails(&r3b.context_independence)),
            ("3c C={Z} fails clause 1", !s3c.holds && s3c.failed_clause == Some(1)),
            ("3d C={Z} condition 3 fails", fails(&r3d.context_independence)),
        ],
        "six figure verdicts".into(),
    )
}

fn dsep_oracle() -> Outcome {
    let mut rng = common::rng(3);
    let (mut queries, mut disagree) = (0u64, 0u64);
    for k in 0..200 {
        let n = 3 + k % 6;
        let p = [0.2, 0.35, 0.5, 0.7][k % 4];
        let g = common::random_dag(&mut rng, n, p);
        for x in 0..n {
            for y in x + 1..n {
                let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                for mask in 0u32..1 << rest.len() {
                    let z: Vec<usize> =
                        rest.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
                    queries += 1;
                    if g.d_separated_idx(&[x], &[y], &z) != common::path_separated(&g, x, y, &z) {
                        disagree += 1;
                    }
                }
            }
        }
    }
    Outcome::from_checks(
        vec![("zero disagreements", disagree == 0)],
        format!("200 DAGs of 3 to 8 nodes, {queries} (x, y, Z) queries, {disagree} disagreements"),
    )
}

fn theorem_one() -> Outcome {
    let mut rng = common::rng(4);
    let (mut instances, mut attempts, mut violations) = (0, 0, 0);
    while instances < 500 && attempts < 100_000 {
        attempts += 1;
        let extra = attempts % 6;
        let (g, roles) = common::random_adag(&mut rng, extra, 0.35);
        let rep = check_core_conditions(&g, &roles).unwrap();
        if !(rep.regime_invariance.holds() && rep.context_independence.holds()) {
            continue;
        }
        instances += 1;
        let id = |n: &str| g.id(n).unwrap();
        let mut cond = vec![id("A"), id("B")];
        cond.extend(g.resolve(&roles.c).unwrap());
        if !common::sets_separated(&g, &[id("Y")], &[id("sigma_A"), id("sigma_B")], &cond) {
            violations += 1;
        }
    }
    Outcome::from_checks(
        vec![("at least 500 instances", instances >= 500), ("no violations", violations == 0)],
        format!("{instances} instances with conditions 2 and 3 ({attempts} drawn), {violations} violations"),
    )
}

fn monotone(f: &ResponseFunction, factor: Factor) -> bool {
    let (nt, no) = (f.domain(factor).len(), f.domain(factor.other()).len());
    let step = |t: usize, o: usize, ctx: Context| {
        let (x, y) = (f.eval_as(factor, t, o, ctx), f.eval_as(factor, t + 1, o, ctx));
        (x <= y, x >= y)
    };
    let mut up = true;
    let mut down = true;
    for ctx in common::contexts(f) {
        for o in 0..no {
            for t in 0..nt - 1 {
                let (u, d) = step(t, o, ctx);
                up &= u;
                down &= d;
            }
        }
    }
    up || down
}

fn soundness() -> Outcome {
    let seed = 2024;
    let generator = MonotoneGenerator::default();
    let report = soundness_experiment(&generator, 1000, seed).unwrap();
    // Replay every trial with the oracles from the test code.
    let (mut positives, mut unconfirmed) = (0u64, 0u64);
    for t in 0..1000 {
        let trial = generator.generate(&mut stream_rng(seed, Stream::Scenario, t));
        let f = trial.scenario.response();
        if !(monotone(f, Factor::A) && monotone(f, Factor::B)) {
            continue;
        }
        let table = exact_risk(&trial.scenario, &trial.dichotomization).unwrap();
        for st in &table.strata {
            if st.excess() > coaction::simulator::POSITIVE_TOLERANCE {
                positives += 1;
                if !(common::interferes(f, false) && common::interferes(f, true)) {
                    unconfirmed += 1;
                }
            }
        }
    }
    Outcome::from_checks(
        vec![
            ("no counterexamples", report.sound()),
            ("every claim confirmed", report.claims_b_with_a == report.confirmed_b_with_a && report.claims_a_with_b == report.confirmed_a_with_b),
            ("independent replay agrees", unconfirmed == 0 && positives == report.positive_strata),
            ("positives exist", positives > 0),
        ],
        format!(
            "1000 trials, {} evaluated, {} skipped, {} positive strata, {} counterexamples, {unconfirmed} unconfirmed on replay",
            report.evaluated,
            report.skipped.len(),
            report.positive_strata,
            report.counterexamples.len()
        ),
    )
}

fn coefficient_arithmetic() -> Outcome {
    let design: Design = "alpha + beta + alpha:beta + T".parse().unwrap();
    let table1 = ModelFit::from_estimates(
        Link::LinearRisk,
        design.clone(),
        vec![-2.33, -0.06, 1.41, -1.0, -0.02],
        vec![0.5, 0.19, 0.24, 0.33, 0.017],
    )
    .unwrap();
    let coding = |t: f64| CellCoding::indicators("alpha", "beta").with_shared("T", t);
    let at_zero = model_excess_risk(&table1, &coding(0.0)).unwrap().statistic;
    let contrast_ok = [0.0, 1.0, 17.0, 30.0].iter().all(|&t| {
        let c = coding(t).contrast(&design).unwrap();
        c == vec![-1.0, 0.0, 0.0, 1.0, -t]
            && (model_excess_risk(&table1, &coding(t)).unwrap().statistic - (-1.0 + 2.33 + 0.02 * t)).abs() < 1e-12
    });
    let table3 = ModelFit::from_estimates(
        Link::LinearOdds,
        "alpha + beta + alpha:beta".parse().unwrap(),
        vec![0.25, 1.46, 0.07, 0.9],
        vec![0.013, 0.044, 0.056, 0.22],
    )
    .unwrap();
    let odds = rare_disease_excess(&table3, &CellCoding::indicators("alpha", "beta")).unwrap().statistic;
    Outcome::from_checks(
        vec![
            ("table 1 gamma - alpha = 1.33", (at_zero - 1.33).abs() < 1e-12),
            ("S = gamma - alpha - delta t", contrast_ok),
            ("table 3 gamma - alpha = 0.65", (odds - 0.65).abs() < 1e-12),
        ],
        format!("table 1: {at_zero:.15}; table 3: {odds:.15}"),
    )
}

fn recovery() -> Outcome {
    let risk_truth = [0.1, 0.15, 0.15, 0.2, 0.002];
    let odds_truth = [0.25, 0.3, 0.1, 0.6];
    let risk_design: Design = "alpha + beta + alpha:beta + T".parse().unwrap();
    let odds_design: Design = "alpha + beta + alpha:beta".parse().unwrap();
    let within = |fit: &ModelFit, truth: &[f64]| {
        truth.iter().enumerate().all(|(k, t)| (fit.coefficients[k] - t).abs() <= 3.0 * fit.standard_errors[k])
    };
    let (mut risk_ok, mut odds_ok) = (0, 0);
    for rep in 0..100 {
        let d = common::linear_risk_data(&mut common::rng(7000 + rep), 5000, risk_truth);
        if fit_linear_risk(&d, &risk_design, FitOptions::default()).is_ok_and(|f| within(&f, &risk_truth)) {
            risk_ok += 1;
        }
        let d = common::linear_odds_data(&mut common::rng(8000 + rep), 5000, odds_truth, 0.4, 0.5);
        if fit_linear_odds(&d, &odds_design, FitOptions::default()).is_ok_and(|f| within(&f, &odds_truth)) {
            odds_ok += 1;
        }
    }
    Outcome::from_checks(
        vec![("linear risk >= 95", risk_ok >= 95), ("linear odds >= 95", odds_ok >= 95)],
        format!("all coefficients within 3 SE: linear risk {risk_ok}/100, linear odds {odds_ok}/100"),
    )
}

fn additive_null() -> Outcome {
    let rate = |risk: [[f64; 2]; 2], base: u64| {
        (0..500)
            .filter(|&rep| {
                let d = common::cell_data(&mut common::rng(base + rep), 250, risk);
                excess_risk_test(&estimate_risk_table(&d, None).unwrap()).unwrap().significant(0.05)
            })
            .count()
    };
    // R00 = 0 puts the population S exactly on the boundary.
    let boundary = rate([[0.0, 0.3], [0.2, 0.5]], 10_000);
    let interior = rate([[0.1, 0.4], [0.25, 0.55]], 20_000);
    Outcome::from_checks(
        vec![("boundary <= 35/500", boundary <= 35), ("interior <= 35/500", interior <= 35)],
        format!("rejections at 0.05: S = 0 boundary {boundary}/500, R00 = 0.1 {interior}/500"),
    )
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn determinism() -> Outcome {
    let scenario = Scenario::from_json(&{
        let mut v: serde_json::Value = serde_json::from_str(&data("logical_scenario.json")).unwrap();
        v["response"] = serde_json::from_str(&data("logical.json")).unwrap();
        v.to_string()
    })
    .unwrap();
    let run = || {
        let sound =
            serde_json::to_string(&soundness_experiment(&MonotoneGenerator::default(), 300, 5).unwrap()).unwrap();
        let mut csv = Vec::new();
        sample_dataset(&scenario, 2000, 5).unwrap().to_csv(&mut csv).unwrap();
        let boot_data = common::cell_data(&mut common::rng(1), 100, [[0.2, 0.3], [0.3, 0.75]]);
        let boot = serde_json::to_string(
            &bootstrap_test(&boot_data, nonparametric_excess, BootstrapConfig::new(500, 5)).unwrap(),
        )
        .unwrap();
        (sound, csv, boot)
    };
    let reference = in_pool(1, run);
    let again = in_pool(1, run);
    let wide = in_pool(4, run);
    let wider = in_pool(8, run);
    Outcome::from_checks(
        vec![
            ("two runs identical", reference == again),
            ("4 workers identical", reference == wide),
            ("8 workers identical", reference == wider),
        ],
        "soundness report, sampled CSV and bootstrap result compared byte for byte at 1, 1, 4 and 8 workers".into(),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "worked examples", Duration::from_secs(1), worked_examples),
        (2, "graph verdicts", Duration::from_secs(1), figure_verdicts),
        (3, "d-separation oracle", Duration::from_secs(30), dsep_oracle),
        (4, "regime invariance from conditions 2 and 3", Duration::from_secs(60), theorem_one),
        (5, "excess-risk soundness", Duration::from_secs(120), soundness),
        (6, "coefficient arithmetic", Duration::from_secs(1), coefficient_arithmetic),
        (7, "estimator recovery", Duration::from_secs(180), recovery),
        (8, "additive null calibration", Duration::from_secs(120), additive_null),
        (9, "determinism", Duration::from_secs(120), determinism),
    ];
    let mut unexpected = Vec::new();
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = out.pass && in_time;
        let known: Vec<&str> = KNOWN_RED.iter().filter(|(k, _)| *k == id).map(|(_, s)| *s).collect();
        let explained =
            !pass && in_time && !out.failed.is_empty() && out.failed.iter().all(|f| known.contains(&f.as_str()));
        println!(
            "{} {id} {name}: {} [{:.2}s / {}s]{}",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if out.failed.is_empty() { String::new() } else { format!(" failed: {}", out.failed.join("; ")) },
        );
        if !pass && !explained {
            unexpected.push(id);
        }
        if pass && !known.is_empty() {
            println!("  note: criterion {id} is listed as known red but passed");
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
