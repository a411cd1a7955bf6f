use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use coaction::adag::{
    check_core_conditions, check_sufficient_covariate, search_admissible_c, Adag, ConditionReport, ConditionStatus,
    RoleAssignment, SufficiencyReport, DEFAULT_POOL_CAP,
};
use coaction::estimation::{
    bootstrap_test, dichotomize, estimate_risk_table, excess_risk_test, fit_linear_odds, fit_linear_risk,
    model_excess_risk, rare_disease_excess, AssumptionChecklist, AssumptionStatus, BootstrapConfig, CellCoding,
    Dataset, DatasetSchema, Design, DichotomizeSpec, FitOptions, ModelFit, RiskTable, TestResult, ALPHA_COLUMN,
    BETA_COLUMN,
};
use coaction::mechanism::{
    check_consistency, check_monotonicity, classify_boolean_pattern, classify_coaction, find_monotone_recoding,
    BooleanPattern, CoactionVerdict, Context, Factor, Monotonicity, ResponseFunction,
};
use coaction::simulator::{sample_dataset, soundness_experiment, BlockChoice, MonotoneGenerator, Regime, Scenario};
use coaction::{Error, Result};
use serde::Serialize;

use crate::args::{
    AdagCheckArgs, AdagCommand, Assumption, Blocks, Cli, Command, MechCommand, Model, SimulateArgs, SoundnessArgs,
    TestArgs,
};
use crate::report::{checklist_entries, codes, Inputs, Report};

type Outcome = (Report, Vec<String>);

pub fn execute(cli: &Cli, echo: &[String]) -> Result<Outcome> {
    let mut inputs = Inputs::new(echo);
    let (result, checklist, warnings, summary) = match &cli.command {
        Command::Mech(MechCommand::Classify { file }) => mech_classify(file, &mut inputs)?,
        Command::Adag(AdagCommand::Check(a)) => adag_check(a, &mut inputs)?,
        Command::Test(a) => test(a, &mut inputs)?,
        Command::Simulate(a) => simulate(a, &mut inputs)?,
        Command::Soundness(a) => soundness(a)?,
    };
    let mut report = Report {
        command: echo.to_vec(),
        inputs_digest: inputs.digest(),
        result,
        assumptions: checklist_entries(&checklist),
        warnings: Vec::new(),
    };
    for (code, msg) in warnings {
        report.warn(code, msg);
    }
    Ok((report, summary))
}

type Parts = (serde_json::Value, AssumptionChecklist, Vec<(&'static str, String)>, Vec<String>);

fn read(path: &Path, inputs: &mut Inputs) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
    inputs.add(&bytes);
    String::from_utf8(bytes).map_err(|_| Error::Parse(format!("{}: not UTF-8", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(v)?)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn status(holds: bool) -> AssumptionStatus {
    if holds {
        AssumptionStatus::Holds
    } else {
        AssumptionStatus::Failed
    }
}

#[derive(Serialize)]
struct MechResult {
    #[serde(flatten)]
    verdict: CoactionVerdict,
    monotonicity: BTreeMap<String, Option<Monotonicity>>,
    consistent: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    monotone_recoding: BTreeMap<String, Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boolean_pattern: Option<BooleanPattern>,
}

fn describe_context(f: &ResponseFunction, ctx: Context) -> String {
    let mut parts = Vec::new();
    for (dom, i) in [(f.domain_c(), ctx.c), (f.domain_u(), ctx.u)] {
        if dom.len() > 1 {
            parts.push(format!("{}={}", dom.name, dom.levels[i]));
        }
    }
    if parts.is_empty() {
        "the only context".into()
    } else {
        parts.join(", ")
    }
}

fn mech_classify(file: &Path, inputs: &mut Inputs) -> Result<Parts> {
    let f = ResponseFunction::from_json(&read(file, inputs)?)?;
    let verdict = classify_coaction(&f);
    let mut warnings = Vec::new();
    let mut monotonicity = BTreeMap::new();
    let mut consistent = BTreeMap::new();
    let mut monotone_recoding = BTreeMap::new();
    for factor in [Factor::A, Factor::B] {
        let name = f.domain(factor).name.clone();
        let m = match check_monotonicity(&f, factor) {
            Ok(m) => Some(m),
            Err(e) => {
                warnings.push((codes::NOT_ORDERED, e.to_string()));
                None
            }
        };
        if !m.is_some_and(Monotonicity::is_monotone) {
            if let Some(p) = find_monotone_recoding(&f, factor) {
                monotone_recoding.insert(name.clone(), p);
            }
        }
        if m == Some(Monotonicity::None) {
            warnings.push((codes::NOT_MONOTONE, format!("the effect of {name} is not monotone")));
        }
        monotonicity.insert(name.clone(), m);
        consistent.insert(name, check_consistency(&f, factor));
    }
    let single_context = f.domain_c().len() == 1 && f.domain_u().len() == 1;
    let boolean_pattern = if single_context && f.domain_a().len() == 2 && f.domain_b().len() == 2 {
        classify_boolean_pattern(&f, Context { c: 0, u: 0 }).ok()
    } else {
        None
    };

    let (an, bn) = (&f.domain_a().name, &f.domain_b().name);
    let mut summary = Vec::new();
    for (actor, other, w) in [(an, bn, &verdict.a_with_b_witness), (bn, an, &verdict.b_with_a_witness)] {
        match w {
            Some(w) => {
                let dom = f.domain(w.actor);
                summary.push(format!(
                    "{actor} interferes with {other}: yes ({}; {actor}={} forces Y=0)",
                    describe_context(&f, w.context),
                    dom.levels[w.blocker]
                ));
            }
            None => summary.push(format!("{actor} interferes with {other}: no")),
        }
    }
    summary.push(format!("weak coaction: {}; strong coaction: {}", yes_no(verdict.weak), yes_no(verdict.strong)));
    for (name, m) in &monotonicity {
        let m = m.map_or("undefined (unordered levels)".to_string(), |m| format!("{m:?}"));
        summary.push(format!("effect of {name}: {m}; consistent: {}", yes_no(consistent[name])));
    }
    if let Some(p) = &boolean_pattern {
        summary.push(format!("boolean pattern {} ({:?})", p.id, p.class));
    }

    let all_monotone = monotonicity.values().all(|m| m.is_some_and(Monotonicity::is_monotone));
    let checklist = AssumptionChecklist {
        functional: AssumptionStatus::Holds,
        monotonicity: status(all_monotone),
        ..Default::default()
    };
    let result = MechResult { verdict, monotonicity, consistent, monotone_recoding, boolean_pattern };
    Ok((to_value(&result)?, checklist, warnings, summary))
}

fn name_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

#[derive(Serialize)]
struct AdagResult {
    conditions: ConditionReport,
    sufficient_covariate: SufficiencyReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    admissible_c: Option<Vec<Vec<String>>>,
}

fn status_line(label: &str, s: &ConditionStatus) -> String {
    match s {
        ConditionStatus::Fails { path } => format!("{label}: fails (active path {})", path.join(" - ")),
        other => format!("{label}: {}", other.label()),
    }
}

fn adag_check(a: &AdagCheckArgs, inputs: &mut Inputs) -> Result<Parts> {
    let g = Adag::from_json(&read(&a.graph, inputs)?)?;
    let roles = RoleAssignment {
        a: a.a.clone(),
        b: a.b.clone(),
        y: a.y.clone(),
        c: name_list(&a.c),
        u: name_list(&a.u),
        asserted_functional: a.assert_functional,
    };
    let conditions = check_core_conditions(&g, &roles)?;
    let sufficient_covariate = check_sufficient_covariate(&g, &roles, &roles.c)?;
    let admissible_c = match &a.pool {
        Some(p) => Some(search_admissible_c(&g, &roles, &name_list(p), DEFAULT_POOL_CAP)?),
        None => None,
    };

    let mut warnings = Vec::new();
    let mut summary = vec![format!("C = {{{}}}, U = {{{}}}", roles.c.join(", "), roles.u.join(", "))];
    for (label, s) in conditions.statuses() {
        summary.push(status_line(&format!("core condition {label}"), s));
        if let ConditionStatus::Fails { path } = s {
            warnings.push((codes::CONDITION_FAILS, format!("core condition {label} fails via {}", path.join(" - "))));
        }
    }
    summary.push(status_line("Y indep sigma | A,B,C", &conditions.joint_regime_invariance));
    match (&sufficient_covariate.failed_clause, &sufficient_covariate.path) {
        (Some(k), Some(path)) => summary.push(format!(
            "C sufficient covariate: no (clause {k} {} fails via {})",
            if *k == 1 { "C indep sigma" } else { "Y indep sigma | A,B,C" },
            path.join(" - ")
        )),
        _ => summary.push("C sufficient covariate: yes".into()),
    }
    if let Some(sets) = &admissible_c {
        let shown: Vec<String> = sets.iter().map(|s| format!("{{{}}}", s.join(", "))).collect();
        summary.push(format!("admissible C: {}", if shown.is_empty() { "none".into() } else { shown.join(" ") }));
    }

    let graph = |s: &ConditionStatus| status(s.holds());
    let checklist = AssumptionChecklist {
        functional: if a.assert_functional { AssumptionStatus::Asserted } else { AssumptionStatus::Unchecked },
        regime_invariance: graph(&conditions.regime_invariance),
        context_independence: graph(&conditions.context_independence),
        factor_independence: graph(&conditions.factor_independence),
        ..Default::default()
    };
    let result = AdagResult { conditions, sufficient_covariate, admissible_c };
    Ok((to_value(&result)?, checklist, warnings, summary))
}

#[derive(Serialize)]
struct Blocking {
    alpha_levels: Vec<f64>,
    alpha_complement_levels: Vec<f64>,
    beta_levels: Vec<f64>,
    beta_complement_levels: Vec<f64>,
    rows_used: usize,
    dropped_missing: usize,
    dropped_stratum: usize,
}

#[derive(Serialize)]
struct TestOutput {
    estimate: TestResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    bootstrap: Option<TestResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    risk_table: Option<RiskTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<ModelFit>,
    blocking: Blocking,
}

pub(crate) fn schema_path(data: &Path) -> PathBuf {
    data.with_extension("schema.json")
}

struct Estimator<'a> {
    model: Model,
    design: Option<Design>,
    coding: CellCoding,
    stratum: Option<&'a str>,
}

impl Estimator<'_> {
    fn estimate(&self, d: &Dataset) -> Result<(TestResult, Option<RiskTable>, Option<ModelFit>)> {
        match self.model {
            Model::Nonparam => {
                let t = estimate_risk_table(d, self.stratum)?;
                Ok((excess_risk_test(&t)?, Some(t), None))
            }
            Model::Riskreg => {
                let fit = fit_linear_risk(d, self.design.as_ref().expect("regression design"), FitOptions::default())?;
                Ok((model_excess_risk(&fit, &self.coding)?, None, Some(fit)))
            }
            Model::Oddsreg => {
                let fit = fit_linear_odds(d, self.design.as_ref().expect("regression design"), FitOptions::default())?;
                Ok((rare_disease_excess(&fit, &self.coding)?, None, Some(fit)))
            }
        }
    }
}

fn assumed(list: &[Assumption], which: Assumption) -> AssumptionStatus {
    let core = matches!(which, Assumption::Functional | Assumption::Regime | Assumption::Context | Assumption::Factor);
    let hit = list.iter().any(|&a| a == which || a == Assumption::All || (core && a == Assumption::Core));
    if hit {
        AssumptionStatus::Asserted
    } else {
        AssumptionStatus::Unchecked
    }
}

fn test(a: &TestArgs, inputs: &mut Inputs) -> Result<Parts> {
    let csv = read(&a.data, inputs)?;
    let schema_file = a.schema.clone().unwrap_or_else(|| schema_path(&a.data));
    if a.schema.is_none() && !schema_file.exists() {
        return Err(Error::Usage(format!("no --schema given and {} does not exist", schema_file.display())));
    }
    let schema = DatasetSchema::from_json(&read(&schema_file, inputs)?)?;
    let data = Dataset::from_csv(csv.as_bytes(), schema)?;

    let mut spec = DichotomizeSpec::new(&a.a_var, &a.b_var, a.alpha.parse()?, a.beta.parse()?);
    spec.recode_a = a.recode_a.as_deref().map(str::parse).transpose()?;
    spec.recode_b = a.recode_b.as_deref().map(str::parse).transpose()?;
    spec.stratum = a.stratum.as_deref().map(str::parse).transpose()?;

    let design = match a.model {
        Model::Nonparam => {
            if a.formula.is_some() || a.trend.is_some() {
                return Err(Error::Usage("--formula and --trend need --model riskreg or oddsreg".into()));
            }
            None
        }
        _ => {
            let formula = match (&a.formula, &a.trend) {
                (Some(f), _) => f.clone(),
                (None, Some(t)) => format!("{ALPHA_COLUMN} + {BETA_COLUMN} + {ALPHA_COLUMN}:{BETA_COLUMN} + {t}"),
                (None, None) => format!("{ALPHA_COLUMN} + {BETA_COLUMN} + {ALPHA_COLUMN}:{BETA_COLUMN}"),
            };
            Some(formula.parse::<Design>()?)
        }
    };
    if let Some(d) = &design {
        spec.extra_columns = d.variables().into_iter().filter(|v| v != ALPHA_COLUMN && v != BETA_COLUMN).collect();
    }
    let dz = dichotomize(&data, &spec)?;

    let mut coding = CellCoding::indicators(ALPHA_COLUMN, BETA_COLUMN);
    if let Some(t) = &a.trend {
        coding = coding.with_shared(t, a.t);
    }
    let est = Estimator { model: a.model, design, coding, stratum: a.stratum.as_deref() };
    let (estimate, risk_table, fit) = est.estimate(&dz.data)?;

    let bootstrap = match a.boot {
        None => None,
        Some(b) => {
            let seed = a.seed.ok_or_else(|| Error::Usage("--boot needs --seed or COACT_SEED".into()))?;
            let mut r =
                bootstrap_test(&dz.data, |d| est.estimate(d).map(|e| e.0.statistic), BootstrapConfig::new(b, seed))?;
            r.cells = estimate.cells;
            Some(r)
        }
    };

    let singleton = |levels: &[f64]| if levels.len() == 1 { Some(AssumptionStatus::Holds) } else { None };
    let checklist = AssumptionChecklist {
        functional: assumed(&a.assume, Assumption::Functional),
        regime_invariance: assumed(&a.assume, Assumption::Regime),
        context_independence: assumed(&a.assume, Assumption::Context),
        factor_independence: assumed(&a.assume, Assumption::Factor),
        monotonicity: assumed(&a.assume, Assumption::Monotone),
        alpha_insensitivity: singleton(&dz.alpha_levels).unwrap_or_else(|| assumed(&a.assume, Assumption::Alpha)),
        beta_insensitivity: singleton(&dz.beta_levels).unwrap_or_else(|| assumed(&a.assume, Assumption::Beta)),
    };

    let mut warnings = Vec::new();
    if dz.dropped_missing > 0 {
        warnings.push((codes::DROPPED_ROWS, format!("{} rows dropped for missing values", dz.dropped_missing)));
    }
    if let Some(t) = &risk_table {
        for (i, j) in t.low_count_cells() {
            let n = t.cells[i][j].map_or(0, |c| c.count);
            warnings.push((codes::LOW_COUNT, format!("cell (alpha={i}, beta={j}) has {n} rows")));
        }
    }
    if let Some(f) = &fit {
        if f.diagnostics.active_constraints > 0 {
            warnings.push((
                codes::BOUNDARY,
                format!("{} fitted values sit on the feasibility bound", f.diagnostics.active_constraints),
            ));
        }
    }
    if a.model == Model::Oddsreg {
        warnings
            .push((codes::ODDS_SCALE, "linear-odds contrast: only its sign transfers to risks (rare outcome)".into()));
    }
    if let Some(b) = &bootstrap {
        if let Some(n) = b.notes.iter().find(|n| !n.ends_with(" 0 failed")) {
            warnings.push((codes::BOOTSTRAP_FAILURES, n.clone()));
        }
    }
    for (name, s) in checklist.entries() {
        if s == AssumptionStatus::Unchecked {
            warnings.push((codes::UNCHECKED, format!("{name} is neither verified nor asserted")));
        }
    }

    let estimate = estimate.with_assumptions(checklist).with_dichotomization(spec.describe());
    let bootstrap = bootstrap.map(|b| b.with_assumptions(checklist).with_dichotomization(spec.describe()));
    let mut summary = vec![
        format!("{} ({} rows analysed)", spec.describe(), dz.data.n_rows()),
        format!("method: {}", estimate.method),
    ];
    if let Some(c) = &estimate.cells {
        summary.push(format!("R11 = {:.6}  R10 = {:.6}  R01 = {:.6}", c.r11, c.r10, c.r01));
    }
    let z = estimate.z.map_or("-".to_string(), |z| format!("{z:.4}"));
    summary.push(format!(
        "S = {:.6}  SE = {:.6}  z = {z}  one-sided p = {:.4e}",
        estimate.statistic, estimate.standard_error, estimate.p_value
    ));
    if let Some(b) = &bootstrap {
        if let Some(iv) = b.interval {
            summary.push(format!(
                "bootstrap SE = {:.6}  p = {:.4e}  {:.0}% interval [{:.6}, {:.6}]",
                b.standard_error,
                b.p_value,
                iv.level * 100.0,
                iv.lower,
                iv.upper
            ));
        }
    }
    let decisive = bootstrap.as_ref().unwrap_or(&estimate);
    summary.push(format!("S > 0 at level {}: {}", a.level, yes_no(decisive.significant(a.level))));
    for n in &estimate.notes {
        summary.push(format!("note: {n}"));
    }

    let blocking = Blocking {
        alpha_levels: dz.alpha_levels,
        alpha_complement_levels: dz.alpha_complement_levels,
        beta_levels: dz.beta_levels,
        beta_complement_levels: dz.beta_complement_levels,
        rows_used: dz.data.n_rows(),
        dropped_missing: dz.dropped_missing,
        dropped_stratum: dz.dropped_stratum,
    };
    let out = TestOutput { estimate, bootstrap, risk_table, fit, blocking };
    Ok((to_value(&out)?, checklist, warnings, summary))
}

#[derive(Serialize)]
struct SimulateResult {
    rows: usize,
    out: String,
    schema: String,
    regime: Regime,
    outcome_rate: f64,
}

fn simulate(a: &SimulateArgs, inputs: &mut Inputs) -> Result<Parts> {
    let seed = a.seed.ok_or_else(|| Error::Usage("simulate needs --seed or COACT_SEED".into()))?;
    read(&a.scenario, inputs)?;
    let scenario = Scenario::load(&a.scenario)?;
    let data = sample_dataset(&scenario, a.n, seed)?;
    let mut buf = Vec::new();
    data.to_csv(&mut buf)?;
    let schema = schema_path(&a.out);
    let write = |p: &Path, bytes: &[u8]| fs::write(p, bytes).map_err(|e| Error::Usage(format!("{}: {e}", p.display())));
    write(&a.out, &buf)?;
    write(&schema, (serde_json::to_string_pretty(data.schema())? + "\n").as_bytes())?;

    let y = data.values("Y")?;
    let outcome_rate = y.iter().sum::<f64>() / y.len() as f64;
    let f = scenario.response();
    let monotone =
        [Factor::A, Factor::B].iter().all(|&x| check_monotonicity(f, x).is_ok_and(Monotonicity::is_monotone));
    let checklist = AssumptionChecklist {
        functional: AssumptionStatus::Holds,
        regime_invariance: AssumptionStatus::Holds,
        context_independence: AssumptionStatus::Holds,
        factor_independence: AssumptionStatus::Holds,
        monotonicity: status(monotone),
        ..Default::default()
    };
    let mut warnings = Vec::new();
    if !monotone {
        warnings.push((codes::NOT_MONOTONE, "the scenario's response function is not monotone in both factors".into()));
    }
    let summary = vec![
        format!("wrote {} rows to {} (schema {})", a.n, a.out.display(), schema.display()),
        format!("regime: {:?}; observed Y rate {outcome_rate:.6}", scenario.regime()),
    ];
    let result = SimulateResult {
        rows: a.n,
        out: a.out.display().to_string(),
        schema: schema.display().to_string(),
        regime: scenario.regime(),
        outcome_rate,
    };
    Ok((to_value(&result)?, checklist, warnings, summary))
}

fn soundness(a: &SoundnessArgs) -> Result<Parts> {
    let seed = a.seed.ok_or_else(|| Error::Usage("soundness needs --seed or COACT_SEED".into()))?;
    let generator = MonotoneGenerator {
        allow_decreasing: !a.increasing_only,
        blocks: match a.blocks {
            Blocks::Top => BlockChoice::Top,
            Blocks::Threshold => BlockChoice::RandomThreshold,
        },
        ..Default::default()
    };
    let r = soundness_experiment(&generator, a.trials, seed)?;
    let insensitivity = if a.blocks == Blocks::Top { AssumptionStatus::Holds } else { AssumptionStatus::Unchecked };
    let checklist = AssumptionChecklist {
        functional: AssumptionStatus::Holds,
        regime_invariance: AssumptionStatus::Holds,
        context_independence: AssumptionStatus::Holds,
        factor_independence: AssumptionStatus::Holds,
        monotonicity: AssumptionStatus::Holds,
        alpha_insensitivity: insensitivity,
        beta_insensitivity: insensitivity,
    };
    let mut warnings = Vec::new();
    if !r.skipped.is_empty() {
        warnings.push((
            codes::SKIPPED_TRIALS,
            format!("{} trials failed a precondition and were skipped", r.skipped.len()),
        ));
    }
    for c in &r.counterexamples {
        warnings.push((
            codes::COUNTEREXAMPLE,
            format!("trial {} stratum {}: S = {} but {} fails", c.trial, c.c, c.excess, c.claim),
        ));
    }
    let summary = vec![
        format!("{} trials (seed {}), {} evaluated, {} skipped", r.trials, r.seed, r.evaluated, r.skipped.len()),
        format!("trials with S > 0: {} ({} strata)", r.positive_trials, r.positive_strata),
        format!("B interferes with A: {} of {} claims confirmed", r.confirmed_b_with_a, r.claims_b_with_a),
        format!("A interferes with B: {} of {} claims confirmed", r.confirmed_a_with_b, r.claims_a_with_b),
        format!("witnesses replayed: {}", r.witnesses_replayed),
        format!("counterexamples: {}", r.counterexamples.len()),
    ];
    Ok((to_value(&r)?, checklist, warnings, summary))
}
