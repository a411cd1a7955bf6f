//! Synthetic populations generated from a response function.
//!
//! A [`Scenario`] pairs a tabulated `f` with discrete laws for the context and
//! the two factors. Risk tables are computed exactly by enumeration, datasets
//! are drawn row by row, and [`soundness_experiment`] checks that a positive
//! population excess risk always comes with interference in `f`.

mod exact;
mod scenario;
mod soundness;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::{Factor, ResponseFunction, ValueSet};

pub use exact::{exact_risk, interventional_risk, observational_risk, ExactRiskTable, ExactStratum};
pub use scenario::{sample_dataset, Regime, ResponseRef, Scenario, ScenarioFile};
pub use soundness::{
    extract_witness, soundness_experiment, BlockChoice, Counterexample, MonotoneGenerator, ScenarioGenerator,
    SkippedTrial, SoundnessReport, Trial, POSITIVE_TOLERANCE,
};

/// Upper blocks for `A` and `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dichotomization {
    pub alpha: ValueSet,
    pub beta: ValueSet,
}

impl Dichotomization {
    pub fn new(alpha: ValueSet, beta: ValueSet) -> Self {
        Dichotomization { alpha, beta }
    }

    /// Top level of each factor.
    pub fn top(f: &ResponseFunction) -> Self {
        Dichotomization { alpha: ValueSet::top(Factor::A, f.domain_a()), beta: ValueSet::top(Factor::B, f.domain_b()) }
    }

    pub fn validate(&self, f: &ResponseFunction) -> Result<()> {
        if self.alpha.variable != Factor::A || self.beta.variable != Factor::B {
            return Err(Error::Usage("alpha must be a block on A and beta a block on B".into()));
        }
        self.alpha.validate_block(f.domain_a())?;
        self.beta.validate_block(f.domain_b())
    }
}
