use std::fs;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{ColumnKind, ColumnSchema, Dataset, DatasetSchema};
use crate::mechanism::{ResponseFunction, ResponseFunctionFile, VariableDomain};
use crate::rng::{stream_rng, Stream};

const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Which regime generates `(A, B)`. Level indices for the interventional case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    #[default]
    Observational,
    Interventional {
        a: usize,
        b: usize,
    },
}

/// A response function given inline or as a path relative to the scenario file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResponseRef {
    Path(String),
    Inline(ResponseFunctionFile),
}

/// On-disk form of a [`Scenario`]. Probability tables are indexed by level
/// position; `p_c` may be omitted when `C` has one level.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub response: ResponseRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_u_given_c: Option<Vec<Vec<f64>>>,
    pub p_a_given_c: Vec<Vec<f64>>,
    pub p_b_given_c: Vec<Vec<f64>>,
    #[serde(default)]
    pub regime: Regime,
}

/// Response function plus the population law of `(C, U, A, B)`.
///
/// Under the observational regime `A` and `B` are drawn independently given
/// `C`, and `U` is drawn given `C` alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    response: ResponseFunction,
    p_c: Vec<f64>,
    p_u_given_c: Vec<Vec<f64>>,
    p_a_given_c: Vec<Vec<f64>>,
    p_b_given_c: Vec<Vec<f64>>,
    regime: Regime,
}

fn check_law(what: &str, p: &[f64], dom: &VariableDomain) -> Result<()> {
    if p.len() != dom.len() {
        return Err(Error::Scenario(format!(
            "{what} has {} entries, '{}' has {} levels",
            p.len(),
            dom.name,
            dom.len()
        )));
    }
    if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::Scenario(format!("{what} contains {x}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Scenario(format!("{what} sums to {total}")));
    }
    Ok(())
}

fn check_conditional(what: &str, p: &[Vec<f64>], dom: &VariableDomain, nc: usize) -> Result<()> {
    if p.len() != nc {
        return Err(Error::Scenario(format!("{what} has {} rows, C has {nc} levels", p.len())));
    }
    for (c, row) in p.iter().enumerate() {
        check_law(&format!("{what}[{c}]"), row, dom)?;
    }
    Ok(())
}

impl Scenario {
    pub fn new(
        response: ResponseFunction,
        p_c: Vec<f64>,
        p_u_given_c: Vec<Vec<f64>>,
        p_a_given_c: Vec<Vec<f64>>,
        p_b_given_c: Vec<Vec<f64>>,
        regime: Regime,
    ) -> Result<Self> {
        let nc = response.domain_c().len();
        check_law("p_c", &p_c, response.domain_c())?;
        check_conditional("p_u_given_c", &p_u_given_c, response.domain_u(), nc)?;
        check_conditional("p_a_given_c", &p_a_given_c, response.domain_a(), nc)?;
        check_conditional("p_b_given_c", &p_b_given_c, response.domain_b(), nc)?;
        if let Regime::Interventional { a, b } = regime {
            if a >= response.domain_a().len() || b >= response.domain_b().len() {
                return Err(Error::Scenario(format!("intervention ({a}, {b}) outside the factor grids")));
            }
        }
        Ok(Scenario { response, p_c, p_u_given_c, p_a_given_c, p_b_given_c, regime })
    }

    /// Uniform laws everywhere, observational regime.
    pub fn uniform(response: ResponseFunction) -> Self {
        let uni = |n: usize| vec![1.0 / n as f64; n];
        let nc = response.domain_c().len();
        let (na, nb, nu) = (response.domain_a().len(), response.domain_b().len(), response.domain_u().len());
        Scenario {
            p_c: uni(nc),
            p_u_given_c: vec![uni(nu); nc],
            p_a_given_c: vec![uni(na); nc],
            p_b_given_c: vec![uni(nb); nc],
            regime: Regime::Observational,
            response,
        }
    }

    pub fn with_regime(mut self, regime: Regime) -> Result<Self> {
        self.regime = regime;
        Scenario::new(self.response, self.p_c, self.p_u_given_c, self.p_a_given_c, self.p_b_given_c, regime)
    }

    /// Parses a scenario whose response function is inline.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        Scenario::from_file(file, None)
    }

    /// Reads a scenario file, resolving a response path against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
        let file: ScenarioFile = serde_json::from_str(&text)?;
        Scenario::from_file(file, path.parent())
    }

    pub fn from_file(file: ScenarioFile, base: Option<&Path>) -> Result<Self> {
        let response = match file.response {
            ResponseRef::Inline(r) => ResponseFunction::try_from(r)?,
            ResponseRef::Path(p) => {
                let base =
                    base.ok_or_else(|| Error::Scenario(format!("response path '{p}' needs a scenario file location")))?;
                let full = base.join(&p);
                let text = fs::read_to_string(&full).map_err(|e| Error::Usage(format!("{}: {e}", full.display())))?;
                ResponseFunction::from_json(&text)?
            }
        };
        let nc = response.domain_c().len();
        let p_c = match file.p_c {
            Some(p) => p,
            None if nc == 1 => vec![1.0],
            None => return Err(Error::Scenario("p_c is required when C has more than one level".into())),
        };
        let p_u = match file.p_u_given_c {
            Some(p) => p,
            None if response.domain_u().len() == 1 => vec![vec![1.0]; nc],
            None => return Err(Error::Scenario("p_u_given_c is required when U has more than one level".into())),
        };
        Scenario::new(response, p_c, p_u, file.p_a_given_c, file.p_b_given_c, file.regime)
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            response: ResponseRef::Inline(ResponseFunctionFile::from(&self.response)),
            p_c: Some(self.p_c.clone()),
            p_u_given_c: Some(self.p_u_given_c.clone()),
            p_a_given_c: self.p_a_given_c.clone(),
            p_b_given_c: self.p_b_given_c.clone(),
            regime: self.regime,
        }
    }

    pub fn response(&self) -> &ResponseFunction {
        &self.response
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn p_c(&self) -> &[f64] {
        &self.p_c
    }

    pub fn p_u(&self, c: usize) -> &[f64] {
        &self.p_u_given_c[c]
    }

    pub fn p_a(&self, c: usize) -> &[f64] {
        &self.p_a_given_c[c]
    }

    pub fn p_b(&self, c: usize) -> &[f64] {
        &self.p_b_given_c[c]
    }

    /// Column layout of datasets drawn by [`sample_dataset`].
    pub fn dataset_schema(&self) -> DatasetSchema {
        let f = &self.response;
        let col = |name: &str, kind| ColumnSchema { name: name.to_string(), kind };
        DatasetSchema {
            columns: vec![
                col(&f.domain_a().name, ColumnKind::Ordinal),
                col(&f.domain_b().name, ColumnKind::Ordinal),
                col(&f.domain_c().name, ColumnKind::Ordinal),
                col("Y", ColumnKind::Binary),
            ],
            outcome: "Y".into(),
        }
    }
}

fn level_value(dom: &VariableDomain, i: usize) -> f64 {
    dom.levels[i].as_f64().unwrap_or(i as f64)
}

fn sampler(p: &[f64]) -> WeightedIndex<f64> {
    WeightedIndex::new(p).expect("validated probability table")
}

/// Draws `n` i.i.d. rows `(A, B, C, Y)` with `Y` computed through `f`.
///
/// Numeric levels are written as their values, labelled levels as their
/// index. Under an intervention the `A` and `B` columns are constant.
pub fn sample_dataset(scenario: &Scenario, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Usage("sample size must be at least 1".into()));
    }
    let f = &scenario.response;
    let nc = f.domain_c().len();
    let c_dist = sampler(&scenario.p_c);
    let u_dist: Vec<_> = (0..nc).map(|c| sampler(scenario.p_u(c))).collect();
    let a_dist: Vec<_> = (0..nc).map(|c| sampler(scenario.p_a(c))).collect();
    let b_dist: Vec<_> = (0..nc).map(|c| sampler(scenario.p_b(c))).collect();
    let mut rng = stream_rng(seed, Stream::Sampling, 0);
    let mut cols = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for _ in 0..n {
        let c = c_dist.sample(&mut rng);
        let u = u_dist[c].sample(&mut rng);
        let (a, b) = match scenario.regime {
            Regime::Observational => (a_dist[c].sample(&mut rng), b_dist[c].sample(&mut rng)),
            Regime::Interventional { a, b } => (a, b),
        };
        cols[0].push(level_value(f.domain_a(), a));
        cols[1].push(level_value(f.domain_b(), b));
        cols[2].push(level_value(f.domain_c(), c));
        cols[3].push(f.eval(a, b, c, u) as f64);
    }
    let schema = scenario.dataset_schema();
    Dataset::new(schema, cols.into_iter().map(|c| c.into_iter().map(Some).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and_scenario() -> Scenario {
        let f = ResponseFunction::from_ab(VariableDomain::range("A", 2), VariableDomain::range("B", 2), |a, b| {
            a == 1 && b == 1
        });
        Scenario::uniform(f)
    }

    #[test]
    fn json_round_trip() {
        let s = and_scenario().with_regime(Regime::Interventional { a: 1, b: 0 }).unwrap();
        let text = serde_json::to_string(&s.to_file()).unwrap();
        assert_eq!(Scenario::from_json(&text).unwrap(), s);
    }

    #[test]
    fn unnormalized_law_rejected() {
        let s = and_scenario();
        let bad = Scenario::new(
            s.response.clone(),
            vec![1.0],
            vec![vec![1.0]],
            vec![vec![0.5, 0.6]],
            vec![vec![0.5, 0.5]],
            Regime::Observational,
        );
        assert!(matches!(bad, Err(Error::Scenario(_))));
    }

    #[test]
    fn intervention_fixes_factors() {
        let s = and_scenario().with_regime(Regime::Interventional { a: 1, b: 0 }).unwrap();
        let d = sample_dataset(&s, 500, 4).unwrap();
        assert!(d.values("A").unwrap().iter().all(|&a| a == 1.0));
        assert!(d.values("B").unwrap().iter().all(|&b| b == 0.0));
        assert!(d.values("Y").unwrap().iter().all(|&y| y == 0.0));
    }

    #[test]
    fn seeded_draws_repeat() {
        let s = and_scenario();
        assert_eq!(sample_dataset(&s, 300, 9).unwrap(), sample_dataset(&s, 300, 9).unwrap());
        assert_ne!(sample_dataset(&s, 300, 9).unwrap(), sample_dataset(&s, 300, 10).unwrap());
    }

    #[test]
    fn inline_response_without_optional_laws() {
        let text = r#"{
            "response": {"domains": {"A": [0, 1], "B": [0, 1]}, "table": [0, 0, 0, 1]},
            "p_a_given_c": [[0.5, 0.5]],
            "p_b_given_c": [[0.25, 0.75]]
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.regime(), Regime::Observational);
        assert_eq!(s.p_b(0), &[0.25, 0.75]);
    }
}
