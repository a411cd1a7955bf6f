//! Bernoulli regression with an identity risk link or an identity odds link.
//!
//! Both models are fit by Fisher scoring on the log-likelihood. Every step is
//! shortened so that fitted values stay strictly inside the feasible region
//! (`ε ≤ π ≤ 1 − ε` for risks, `odds ≥ ε` for odds), then halved until the
//! likelihood does not decrease. Standard errors come from the observed
//! information at the optimum.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::{CellValues, TestResult};
use crate::error::{Error, Result};

/// Fitted values are kept at least this far inside the feasible region.
pub const PROBABILITY_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    /// `P(Y = 1) = xβ`.
    LinearRisk,
    /// `P(Y = 1) / P(Y = 0) = xβ`.
    LinearOdds,
}

impl Link {
    fn bounds(self) -> (f64, f64) {
        match self {
            Link::LinearRisk => (PROBABILITY_EPSILON, 1.0 - PROBABILITY_EPSILON),
            Link::LinearOdds => (PROBABILITY_EPSILON, f64::INFINITY),
        }
    }

    /// Probability and its first two derivatives in the linear predictor.
    fn prob(self, eta: f64) -> (f64, f64, f64) {
        match self {
            Link::LinearRisk => (eta, 1.0, 0.0),
            Link::LinearOdds => {
                let d = 1.0 + eta;
                (eta / d, 1.0 / (d * d), -2.0 / (d * d * d))
            }
        }
    }
}

/// One model term: the product of the named columns. No factors means the intercept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term(pub Vec<String>);

impl Term {
    pub fn intercept() -> Self {
        Term(Vec::new())
    }

    pub fn name(&self) -> String {
        if self.0.is_empty() {
            "(intercept)".into()
        } else {
            self.0.join(":")
        }
    }
}

/// Model terms. Parsed from `a + b + a:b + t`; the intercept is implicit
/// unless the formula contains `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub terms: Vec<Term>,
}

impl Design {
    pub fn names(&self) -> Vec<String> {
        self.terms.iter().map(Term::name).collect()
    }

    pub fn variables(&self) -> Vec<String> {
        let mut v: Vec<String> = self.terms.iter().flat_map(|t| t.0.iter().cloned()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Design row for one covariate assignment.
    pub fn row<F: Fn(&str) -> Option<f64>>(&self, value: F) -> Result<Vec<f64>> {
        self.terms
            .iter()
            .map(|t| {
                t.0.iter().try_fold(1.0, |acc, v| {
                    value(v).map(|x| acc * x).ok_or_else(|| Error::Usage(format!("no value for covariate '{v}'")))
                })
            })
            .collect()
    }

    fn matrix(&self, data: &Dataset) -> Result<DMatrix<f64>> {
        let cols: BTreeMap<String, Vec<f64>> =
            self.variables().into_iter().map(|v| data.values(&v).map(|c| (v, c))).collect::<Result<_>>()?;
        let n = data.n_rows();
        let mut x = DMatrix::zeros(n, self.terms.len());
        for r in 0..n {
            let row = self.row(|v| cols.get(v).map(|c| c[r]))?;
            for (k, val) in row.into_iter().enumerate() {
                x[(r, k)] = val;
            }
        }
        Ok(x)
    }
}

impl FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut intercept = true;
        let mut terms = Vec::new();
        for part in s.split('+').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "-1" || part == "0" {
                intercept = false;
                continue;
            }
            if part == "1" {
                continue;
            }
            let factors: Vec<String> = part.split(':').map(|f| f.trim().to_string()).collect();
            if factors.iter().any(|f| f.is_empty() || f.contains(char::is_whitespace)) {
                return Err(Error::Usage(format!("cannot parse term '{part}'")));
            }
            let t = Term(factors);
            if terms.contains(&t) {
                return Err(Error::Usage(format!("term '{part}' repeated")));
            }
            terms.push(t);
        }
        if intercept {
            terms.insert(0, Term::intercept());
        }
        if terms.is_empty() {
            return Err(Error::Usage("formula has no terms".into()));
        }
        Ok(Design { terms })
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names().join(" + "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceSource {
    ObservedInformation,
    /// Observed information was not positive definite.
    ExpectedInformation,
    /// Taken from published estimates rather than a fit.
    Supplied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub n: usize,
    /// Rows whose fitted value sits on the feasibility bound.
    pub active_constraints: usize,
    pub covariance_source: CovarianceSource,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub link: Link,
    pub design: Design,
    pub coefficients: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub standard_errors: Vec<f64>,
    pub diagnostics: FitDiagnostics,
}

impl ModelFit {
    /// A fit known only from reported estimates and standard errors
    /// (covariances taken as zero).
    pub fn from_estimates(
        link: Link,
        design: Design,
        coefficients: Vec<f64>,
        standard_errors: Vec<f64>,
    ) -> Result<Self> {
        let p = design.terms.len();
        if coefficients.len() != p || standard_errors.len() != p {
            return Err(Error::Usage(format!(
                "design has {p} terms; got {} estimates and {} SEs",
                coefficients.len(),
                standard_errors.len()
            )));
        }
        let covariance =
            (0..p).map(|i| (0..p).map(|j| if i == j { standard_errors[i].powi(2) } else { 0.0 }).collect()).collect();
        Ok(ModelFit {
            link,
            design,
            coefficients,
            covariance,
            standard_errors,
            diagnostics: FitDiagnostics {
                converged: true,
                iterations: 0,
                log_likelihood: f64::NAN,
                n: 0,
                active_constraints: 0,
                covariance_source: CovarianceSource::Supplied,
                trace: Vec::new(),
            },
        })
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.design.names().iter().position(|n| n == name).map(|i| self.coefficients[i])
    }

    pub fn standard_error(&self, name: &str) -> Option<f64> {
        self.design.names().iter().position(|n| n == name).map(|i| self.standard_errors[i])
    }

    fn linear(&self, row: &[f64]) -> f64 {
        row.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum()
    }

    /// `sqrt(cᵀ Σ c)` for a contrast vector `c`.
    pub fn contrast_se(&self, c: &[f64]) -> f64 {
        let mut v = 0.0;
        for (i, ci) in c.iter().enumerate() {
            for (j, cj) in c.iter().enumerate() {
                v += ci * self.covariance[i][j] * cj;
            }
        }
        v.max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_iterations: 200, tolerance: 1e-10 }
    }
}

pub fn fit_linear_risk(data: &Dataset, design: &Design, opts: FitOptions) -> Result<ModelFit> {
    fit(data, design, Link::LinearRisk, opts)
}

/// Linear-odds fit. Fails when the likelihood pushes any fitted odds to the
/// positivity bound, i.e. the unconstrained optimum has non-positive odds.
pub fn fit_linear_odds(data: &Dataset, design: &Design, opts: FitOptions) -> Result<ModelFit> {
    let fit = fit(data, design, Link::LinearOdds, opts)?;
    if fit.diagnostics.active_constraints > 0 {
        return Err(Error::Fit(format!(
            "{} observations have fitted odds at the positivity bound; the linear-odds model does not fit",
            fit.diagnostics.active_constraints
        )));
    }
    Ok(fit)
}

fn log_likelihood(link: Link, eta: &DVector<f64>, y: &[f64]) -> f64 {
    eta.iter()
        .zip(y)
        .map(|(&e, &yi)| {
            let p = link.prob(e).0;
            if yi == 1.0 {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum()
}

/// Largest step along `d` keeping every `η + t·d` inside `(lo, hi)`.
fn max_step(eta: &DVector<f64>, d: &DVector<f64>, lo: f64, hi: f64) -> f64 {
    eta.iter().zip(d.iter()).fold(f64::INFINITY, |t, (&e, &de)| {
        if de < 0.0 {
            t.min((e - lo) / -de)
        } else if de > 0.0 && hi.is_finite() {
            t.min((hi - e) / de)
        } else {
            t
        }
    })
}

fn starting_values(link: Link, design: &Design, x: &DMatrix<f64>, y: &[f64]) -> Result<DVector<f64>> {
    let (lo, hi) = link.bounds();
    let ybar = y.iter().sum::<f64>() / y.len() as f64;
    if link == Link::LinearRisk {
        let yv = DVector::from_column_slice(y);
        let xtx = x.transpose() * x;
        if let Some(ch) = xtx.cholesky() {
            let b = ch.solve(&(x.transpose() * yv));
            let eta = x * &b;
            let margin = 1e-3;
            if eta.iter().all(|&e| e > lo + margin && e < hi - margin) {
                return Ok(b);
            }
        }
    }
    let icpt = design
        .terms
        .iter()
        .position(|t| t.0.is_empty())
        .ok_or_else(|| Error::Fit("no feasible starting point: add an intercept to the formula".into()))?;
    let p0 = ybar.clamp(0.01, 0.99);
    let mut b = DVector::zeros(design.terms.len());
    b[icpt] = match link {
        Link::LinearRisk => p0,
        Link::LinearOdds => p0 / (1.0 - p0),
    };
    Ok(b)
}

fn fit(data: &Dataset, design: &Design, link: Link, opts: FitOptions) -> Result<ModelFit> {
    let y = data.values(data.outcome())?;
    let n = y.len();
    let p = design.terms.len();
    if n == 0 {
        return Err(Error::Usage("no observations to fit".into()));
    }
    let x = design.matrix(data)?;

    let xtx = x.transpose() * &x;
    let sv = xtx.clone().singular_values();
    let smax = sv.max();
    if n < p || smax == 0.0 || sv.min() <= smax * 1e-12 {
        return Err(Error::Usage(format!("design matrix for '{design}' is rank deficient")));
    }

    let (lo, hi) = link.bounds();
    let mut beta = starting_values(link, design, &x, &y)?;
    let mut eta = &x * &beta;
    let mut ll = log_likelihood(link, &eta, &y);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let mut score = DVector::zeros(p);
        let mut info = DMatrix::zeros(p, p);
        for i in 0..n {
            let (h, dh, _) = link.prob(eta[i]);
            let v = h * (1.0 - h);
            let xi = x.row(i).transpose();
            score.axpy(dh * (y[i] - h) / v, &xi, 1.0);
            info.ger(dh * dh / v, &xi, &xi, 1.0);
        }
        let step = info
            .cholesky()
            .ok_or_else(|| Error::Fit("information matrix is not positive definite".into()))?
            .solve(&score);
        let d = &x * &step;
        let mut t = 1.0f64.min(0.995 * max_step(&eta, &d, lo, hi));
        let mut accepted = None;
        for _ in 0..60 {
            let cand_eta = &eta + &d * t;
            let cand_ll = log_likelihood(link, &cand_eta, &y);
            if cand_ll >= ll - 1e-12 * ll.abs() {
                accepted = Some((cand_eta, cand_ll));
                break;
            }
            t *= 0.5;
        }
        let Some((new_eta, new_ll)) = accepted else {
            converged = true;
            break;
        };
        beta += &step * t;
        eta = new_eta;
        let change = (new_ll - ll).abs();
        ll = new_ll;
        trace.push(ll);
        let step_size = step.amax() * t;
        if change <= opts.tolerance * (1.0 + ll.abs()) && step_size < 1e-6 {
            converged = true;
            break;
        }
        if change <= opts.tolerance * 1e-3 * (1.0 + ll.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations, last_loglik: ll, trace });
    }

    let active = eta
        .iter()
        .filter(|&&e| e < lo + PROBABILITY_EPSILON || (hi.is_finite() && e > hi - PROBABILITY_EPSILON))
        .count();

    let mut observed = DMatrix::zeros(p, p);
    let mut expected = DMatrix::zeros(p, p);
    for i in 0..n {
        let (h, dh, d2h) = link.prob(eta[i]);
        let v = h * (1.0 - h);
        let w = dh / v;
        let dw = (d2h * v - dh * dh * (1.0 - 2.0 * h)) / (v * v);
        let xi = x.row(i).transpose();
        observed.ger(-(dw * (y[i] - h) - w * dh), &xi, &xi, 1.0);
        expected.ger(dh * dh / v, &xi, &xi, 1.0);
    }
    let (cov, source) = match observed.clone().cholesky() {
        Some(ch) => (ch.inverse(), CovarianceSource::ObservedInformation),
        None => (
            expected
                .cholesky()
                .ok_or_else(|| Error::Fit("information matrix is singular at the optimum".into()))?
                .inverse(),
            CovarianceSource::ExpectedInformation,
        ),
    };
    let cov = (&cov + cov.transpose()) * 0.5;
    let covariance: Vec<Vec<f64>> = (0..p).map(|i| (0..p).map(|j| cov[(i, j)]).collect()).collect();
    let standard_errors = (0..p).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    Ok(ModelFit {
        link,
        design: design.clone(),
        coefficients: beta.iter().copied().collect(),
        covariance,
        standard_errors,
        diagnostics: FitDiagnostics {
            converged,
            iterations,
            log_likelihood: ll,
            n,
            active_constraints: active,
            covariance_source: source,
            trace,
        },
    })
}

/// Covariate values defining the cells `(1,1)`, `(1,0)` and `(0,1)` of the
/// dichotomized factors, plus values shared by all three (e.g. a trend at `t`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCoding {
    pub cell_11: BTreeMap<String, f64>,
    pub cell_10: BTreeMap<String, f64>,
    pub cell_01: BTreeMap<String, f64>,
    #[serde(default)]
    pub shared: BTreeMap<String, f64>,
}

impl CellCoding {
    /// Cell `(i, j)` sets `a_col = i` and `b_col = j`.
    pub fn indicators(a_col: &str, b_col: &str) -> Self {
        let cell = |i: f64, j: f64| BTreeMap::from([(a_col.to_string(), i), (b_col.to_string(), j)]);
        CellCoding {
            cell_11: cell(1.0, 1.0),
            cell_10: cell(1.0, 0.0),
            cell_01: cell(0.0, 1.0),
            shared: BTreeMap::new(),
        }
    }

    pub fn with_shared(mut self, name: &str, value: f64) -> Self {
        self.shared.insert(name.to_string(), value);
        self
    }

    fn rows(&self, design: &Design) -> Result<[Vec<f64>; 3]> {
        let row = |cell: &BTreeMap<String, f64>| design.row(|v| cell.get(v).or_else(|| self.shared.get(v)).copied());
        Ok([row(&self.cell_11)?, row(&self.cell_10)?, row(&self.cell_01)?])
    }

    /// `x11 − x10 − x01`: the coefficient combination equal to `S`.
    pub fn contrast(&self, design: &Design) -> Result<Vec<f64>> {
        let [r11, r10, r01] = self.rows(design)?;
        Ok(r11.iter().zip(&r10).zip(&r01).map(|((a, b), c)| a - b - c).collect())
    }
}

fn contrast_test(fit: &ModelFit, coding: &CellCoding, method: &str) -> Result<TestResult> {
    let [r11, r10, r01] = coding.rows(&fit.design)?;
    let cells = CellValues { r11: fit.linear(&r11), r10: fit.linear(&r10), r01: fit.linear(&r01) };
    let c = coding.contrast(&fit.design)?;
    let statistic = fit.linear(&c);
    Ok(TestResult::one_sided(method, Some(cells), statistic, fit.contrast_se(&c)))
}

/// Model-implied `S` for a linear-risk fit. `S` is linear in the
/// coefficients, so the delta-method standard error is exact.
pub fn model_excess_risk(fit: &ModelFit, coding: &CellCoding) -> Result<TestResult> {
    if fit.link != Link::LinearRisk {
        return Err(Error::Usage(
            "model_excess_risk needs a linear-risk fit; use rare_disease_excess for linear odds".into(),
        ));
    }
    contrast_test(fit, coding, "linear_risk")
}

/// For a case-control linear-odds fit: `odds11 − odds10 − odds01` (which is
/// `γ − α` for a two-factor model with interaction). With a rare outcome the
/// case-control odds are the prospective risks times one positive constant,
/// so only the sign carries over.
pub fn rare_disease_excess(fit: &ModelFit, coding: &CellCoding) -> Result<TestResult> {
    if fit.link != Link::LinearOdds {
        return Err(Error::Usage("rare_disease_excess needs a linear-odds fit".into()));
    }
    let mut r = contrast_test(fit, coding, "linear_odds")?;
    r.notes.push("sign-valid under rare-disease assumption; magnitude is on the odds scale".into());
    Ok(r)
}
