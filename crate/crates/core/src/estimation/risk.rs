use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::dichotomize::{ALPHA_COLUMN, BETA_COLUMN};
use super::{CellValues, TestResult};
use crate::error::{Error, Result};

/// Cells with fewer observations than this are flagged.
pub const LOW_COUNT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskCell {
    pub estimate: f64,
    /// Binomial standard error `sqrt(R (1 − R) / n)`.
    pub se: f64,
    pub count: usize,
    pub low_count: bool,
}

impl RiskCell {
    pub fn from_counts(events: usize, count: usize) -> Self {
        let r = events as f64 / count as f64;
        RiskCell { estimate: r, se: (r * (1.0 - r) / count as f64).sqrt(), count, low_count: count < LOW_COUNT }
    }

    /// A cell with known risk and standard error, e.g. from another estimator.
    pub fn known(estimate: f64, se: f64, count: usize) -> Self {
        RiskCell { estimate, se, count, low_count: count < LOW_COUNT }
    }
}

/// Risks `R_ij` indexed `[i][j]` with `i = 1[A ∈ α]`, `j = 1[B ∈ β]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stratum: Option<String>,
    pub cells: [[Option<RiskCell>; 2]; 2],
}

impl RiskTable {
    pub fn new(cells: [[Option<RiskCell>; 2]; 2]) -> Self {
        RiskTable { stratum: None, cells }
    }

    pub fn cell(&self, i: usize, j: usize) -> Option<&RiskCell> {
        self.cells[i][j].as_ref()
    }

    pub fn low_count_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                if self.cells[i][j].is_some_and(|c| c.low_count) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Cell proportions of `Y = 1` within the `alpha` × `beta` indicator table.
pub fn estimate_risk_table(data: &Dataset, stratum: Option<&str>) -> Result<RiskTable> {
    let alpha = data.values(ALPHA_COLUMN)?;
    let beta = data.values(BETA_COLUMN)?;
    let y = data.values(data.outcome())?;
    let mut count = [[0usize; 2]; 2];
    let mut events = [[0usize; 2]; 2];
    for ((a, b), y) in alpha.iter().zip(&beta).zip(&y) {
        let (i, j) = (*a as usize, *b as usize);
        count[i][j] += 1;
        events[i][j] += *y as usize;
    }
    let mut cells = [[None; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            if count[i][j] == 0 {
                return Err(Error::Estimation(format!("cell (alpha={i}, beta={j}) has no observations")));
            }
            cells[i][j] = Some(RiskCell::from_counts(events[i][j], count[i][j]));
        }
    }
    Ok(RiskTable { stratum: stratum.map(str::to_string), cells })
}

/// `S = R11 − R10 − R01` with `SE = sqrt(SE11² + SE10² + SE01²)` (independent cells).
pub fn excess_risk_test(table: &RiskTable) -> Result<TestResult> {
    let get = |i: usize, j: usize| {
        table.cell(i, j).copied().ok_or_else(|| Error::Usage(format!("risk table lacks cell ({i},{j})")))
    };
    let (c11, c10, c01) = (get(1, 1)?, get(1, 0)?, get(0, 1)?);
    let cells = CellValues { r11: c11.estimate, r10: c10.estimate, r01: c01.estimate };
    let se = (c11.se.powi(2) + c10.se.powi(2) + c01.se.powi(2)).sqrt();
    let mut result = TestResult::one_sided("nonparametric", Some(cells), cells.excess(), se);
    let low = table.low_count_cells();
    if !low.is_empty() {
        result.notes.push(format!("low-count cells (n < {LOW_COUNT}): {low:?}"));
    }
    if let Some(s) = &table.stratum {
        result.notes.push(format!("stratum: {s}"));
    }
    Ok(result)
}

/// Nonparametric `S` from a dichotomized dataset, for use as a bootstrap estimator.
pub fn nonparametric_excess(data: &Dataset) -> Result<f64> {
    Ok(excess_risk_test(&estimate_risk_table(data, None)?)?.statistic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::ColumnKind;

    fn data(rows: &[(u8, u8, u8)]) -> Dataset {
        let col = |k: usize| rows.iter().map(|r| [r.0, r.1, r.2][k] as f64).collect::<Vec<_>>();
        Dataset::from_columns(
            "Y",
            vec![
                (ALPHA_COLUMN, ColumnKind::Binary, col(0)),
                (BETA_COLUMN, ColumnKind::Binary, col(1)),
                ("Y", ColumnKind::Binary, col(2)),
            ],
        )
        .unwrap()
    }

    fn table(r11: f64, r10: f64, r01: f64, se: f64) -> RiskTable {
        RiskTable::new([
            [None, Some(RiskCell::known(r01, se, 100))],
            [Some(RiskCell::known(r10, se, 100)), Some(RiskCell::known(r11, se, 100))],
        ])
    }

    #[test]
    fn worked_statistic() {
        let r = excess_risk_test(&table(0.7, 0.3, 0.2, 0.01)).unwrap();
        assert!((r.statistic - 0.2).abs() < 1e-12);
        assert!((r.standard_error - (3.0f64 * 1e-4).sqrt()).abs() < 1e-12);
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn exact_boundary_gives_half() {
        let r = excess_risk_test(&table(0.5, 0.3, 0.2, 0.02)).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 0.5);
    }

    #[test]
    fn additive_risks_give_minus_r00() {
        let r = |i: f64, j: f64| 0.1 + 0.2 * i + 0.3 * j;
        let t = table(r(1.0, 1.0), r(1.0, 0.0), r(0.0, 1.0), 0.02);
        let res = excess_risk_test(&t).unwrap();
        assert!((res.statistic + 0.1).abs() < 1e-12);
        assert!(!res.significant(0.05));
    }

    #[test]
    fn missing_cell_is_usage_error() {
        let mut t = table(0.7, 0.3, 0.2, 0.01);
        t.cells[1][0] = None;
        assert!(matches!(excess_risk_test(&t), Err(Error::Usage(_))));
    }

    #[test]
    fn all_zero_outcomes() {
        let d = data(&[(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0), (1, 1, 0)]);
        let t = estimate_risk_table(&d, None).unwrap();
        let r = excess_risk_test(&t).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 0.5);
    }

    #[test]
    fn single_row_cells_flagged() {
        let d = data(&[(0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1)]);
        let t = estimate_risk_table(&d, Some("c=0")).unwrap();
        assert!(t.cells.iter().flatten().all(|c| c.unwrap().se == 0.0));
        assert_eq!(t.low_count_cells().len(), 4);
        let r = excess_risk_test(&t).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert_eq!(r.p_value, 0.0);
        assert!(r.z.is_none());
        assert!(r.notes.iter().any(|n| n.contains("low-count")));
    }

    #[test]
    fn empty_cell_named_in_error() {
        let d = data(&[(0, 0, 1), (0, 1, 0), (1, 1, 1)]);
        match estimate_risk_table(&d, None) {
            Err(Error::Estimation(msg)) => assert!(msg.contains("alpha=1, beta=0")),
            other => panic!("expected estimation error, got {other:?}"),
        }
    }
}
