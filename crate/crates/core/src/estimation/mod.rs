//! The excess-risk statistic `S = R11 − R10 − R01` estimated from data.
//!
//! Risks are indexed by the dichotomized factors: `R_ij = P(Y = 1 | α = i, β = j)`
//! within a stratum of the observed context. A one-sided test of `S > 0` is
//! available from stratified proportions, linear-risk regression, linear-odds
//! regression on case-control data, or a row bootstrap.

mod bootstrap;
mod dataset;
mod dichotomize;
mod glm;
mod risk;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

pub use bootstrap::{bootstrap_test, percentile, BootstrapConfig};
pub use dataset::{ColumnKind, ColumnSchema, Dataset, DatasetSchema};
pub use dichotomize::{
    dichotomize, BlockSpec, CmpOp, DichotomizeSpec, Dichotomized, Recode, Stratum, ALPHA_COLUMN, BETA_COLUMN,
};
pub use glm::{
    fit_linear_odds, fit_linear_risk, model_excess_risk, rare_disease_excess, CellCoding, CovarianceSource, Design,
    FitDiagnostics, FitOptions, Link, ModelFit, Term, PROBABILITY_EPSILON,
};
pub use risk::{estimate_risk_table, excess_risk_test, nonparametric_excess, RiskCell, RiskTable, LOW_COUNT};

/// Status of one assumption the excess-risk conclusion rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssumptionStatus {
    /// Verified (from a graph, a response table, or block structure).
    Holds,
    /// Accepted on the caller's judgement.
    Asserted,
    Failed,
    #[default]
    Unchecked,
}

impl AssumptionStatus {
    pub fn label(self) -> &'static str {
        match self {
            AssumptionStatus::Holds => "holds",
            AssumptionStatus::Asserted => "asserted",
            AssumptionStatus::Failed => "failed",
            AssumptionStatus::Unchecked => "unchecked",
        }
    }
}

/// The assumptions under which `S > 0` licenses a claim of interference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AssumptionChecklist {
    pub functional: AssumptionStatus,
    pub regime_invariance: AssumptionStatus,
    pub context_independence: AssumptionStatus,
    pub factor_independence: AssumptionStatus,
    pub monotonicity: AssumptionStatus,
    pub alpha_insensitivity: AssumptionStatus,
    pub beta_insensitivity: AssumptionStatus,
}

impl AssumptionChecklist {
    pub fn entries(&self) -> [(&'static str, AssumptionStatus); 7] {
        [
            ("core 1: Y functional in (A,B,C,U)", self.functional),
            ("core 2: Y indep sigma | A,B,C,U", self.regime_invariance),
            ("core 3: U indep (A,B,sigma) | C", self.context_independence),
            ("core 4: A indep B | C,sigma", self.factor_independence),
            ("monotonic effects of A and B", self.monotonicity),
            ("alpha-insensitivity of A", self.alpha_insensitivity),
            ("beta-insensitivity of B", self.beta_insensitivity),
        ]
    }
}

/// The three risks (or odds) that make up the statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellValues {
    pub r11: f64,
    pub r10: f64,
    pub r01: f64,
}

impl CellValues {
    pub fn excess(&self) -> f64 {
        self.r11 - self.r10 - self.r01
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
}

/// One-sided test of `S > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: String,
    pub statistic: f64,
    pub standard_error: f64,
    /// `None` when the standard error is zero and the statistic is not.
    pub z: Option<f64>,
    pub p_value: f64,
    /// The three cell values; `S` equals `r11 − r10 − r01` whenever present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<CellValues>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dichotomization: Option<String>,
    pub assumptions: AssumptionChecklist,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl TestResult {
    pub(crate) fn one_sided(method: &str, cells: Option<CellValues>, statistic: f64, se: f64) -> Self {
        let (z, p_value) = one_sided_p(statistic, se);
        TestResult {
            method: method.to_string(),
            statistic,
            standard_error: se,
            z,
            p_value,
            cells,
            interval: None,
            dichotomization: None,
            assumptions: AssumptionChecklist::default(),
            notes: Vec::new(),
        }
    }

    pub fn with_assumptions(mut self, a: AssumptionChecklist) -> Self {
        self.assumptions = a;
        self
    }

    pub fn with_dichotomization(mut self, d: impl Into<String>) -> Self {
        self.dichotomization = Some(d.into());
        self
    }

    pub fn significant(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// `P(Z ≥ s / se)` under the standard normal.
pub fn one_sided_p(statistic: f64, se: f64) -> (Option<f64>, f64) {
    if se > 0.0 && se.is_finite() {
        let z = statistic / se;
        let normal = Normal::standard();
        (Some(z), normal.sf(z).clamp(0.0, 1.0))
    } else if statistic > 0.0 {
        (None, 0.0)
    } else if statistic < 0.0 {
        (None, 1.0)
    } else {
        (Some(0.0), 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_value_boundaries() {
        assert_eq!(one_sided_p(0.0, 0.1), (Some(0.0), 0.5));
        assert_eq!(one_sided_p(0.0, 0.0), (Some(0.0), 0.5));
        assert_eq!(one_sided_p(0.2, 0.0), (None, 0.0));
        assert_eq!(one_sided_p(-0.2, 0.0), (None, 1.0));
        let (_, p) = one_sided_p(1.6448536269514722, 1.0);
        assert!((p - 0.05).abs() < 1e-9);
    }
}
