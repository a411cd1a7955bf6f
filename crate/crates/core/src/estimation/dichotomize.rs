use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{ColumnKind, Dataset};
use crate::error::{Error, Result};

/// Name of the 0/1 column holding `1[A ∈ α]`.
pub const ALPHA_COLUMN: &str = "alpha";
/// Name of the 0/1 column holding `1[B ∈ β]`.
pub const BETA_COLUMN: &str = "beta";

/// Upper block of a dichotomization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSpec {
    /// `{v : v > τ}`; ties go to the complement.
    Above(f64),
    /// An explicit list of levels.
    Members(Vec<f64>),
}

impl BlockSpec {
    pub fn contains(&self, v: f64) -> bool {
        match self {
            BlockSpec::Above(t) => v > *t,
            BlockSpec::Members(m) => m.contains(&v),
        }
    }
}

impl fmt::Display for BlockSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockSpec::Above(t) => write!(f, "> {t}"),
            BlockSpec::Members(m) => {
                let parts: Vec<String> = m.iter().map(|v| v.to_string()).collect();
                write!(f, "in {{{}}}", parts.join(", "))
            }
        }
    }
}

/// Parses `2.5` or `>2.5` as a threshold and `in:1,2` or `{1,2}` as a level list.
impl FromStr for BlockSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let list = s.strip_prefix("in:").or_else(|| s.strip_prefix('{').and_then(|r| r.strip_suffix('}')));
        if let Some(list) = list {
            let levels = list
                .split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Usage(format!("bad level '{p}' in block '{s}'"))))
                .collect::<Result<Vec<_>>>()?;
            return Ok(BlockSpec::Members(levels));
        }
        let t = s.strip_prefix('>').unwrap_or(s).trim();
        t.parse::<f64>().map(BlockSpec::Above).map_err(|_| {
            Error::Usage(format!("cannot parse block '{s}'; use a threshold like '0.5' or a list like 'in:1,2'"))
        })
    }
}

/// A bijective relabelling of a variable's levels, applied before blocking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recode(pub Vec<(f64, f64)>);

impl Recode {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        for (i, (from, to)) in pairs.iter().enumerate() {
            if pairs[..i].iter().any(|(f, _)| f == from) {
                return Err(Error::Usage(format!("recode maps level {from} twice")));
            }
            if pairs[..i].iter().any(|(_, t)| t == to) {
                return Err(Error::Usage(format!("recode is not injective: two levels map to {to}")));
            }
        }
        Ok(Self(pairs))
    }

    pub fn apply(&self, v: f64) -> Option<f64> {
        self.0.iter().find(|(f, _)| *f == v).map(|(_, t)| *t)
    }
}

/// Parses `1:4,2:3,3:2,4:1`.
impl FromStr for Recode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let pairs = s
            .split(',')
            .map(|p| {
                let (a, b) =
                    p.split_once(':').ok_or_else(|| Error::Usage(format!("recode entry '{p}' is not 'from:to'")))?;
                let parse =
                    |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Usage(format!("bad recode value '{x}'")));
                Ok((parse(a)?, parse(b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Recode::new(pairs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
    Ne,
}

impl CmpOp {
    fn eval(self, x: f64, y: f64) -> bool {
        match self {
            CmpOp::Gt => x > y,
            CmpOp::Ge => x >= y,
            CmpOp::Lt => x < y,
            CmpOp::Le => x <= y,
            CmpOp::Eq => x == y,
            CmpOp::Ne => x != y,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

/// Conjunction of `column op value` clauses, evaluated on original (un-recoded) values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub clauses: Vec<(String, CmpOp, f64)>,
}

impl Stratum {
    pub fn columns(&self) -> impl Iterator<Item = &str> {
        self.clauses.iter().map(|(c, _, _)| c.as_str())
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.clauses.iter().map(|(c, op, v)| format!("{c} {} {v}", op.symbol())).collect();
        f.write_str(&parts.join(" && "))
    }
}

/// Parses `A > 1 && I == 1`.
impl FromStr for Stratum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        const OPS: [(&str, CmpOp); 6] = [
            (">=", CmpOp::Ge),
            ("<=", CmpOp::Le),
            ("==", CmpOp::Eq),
            ("!=", CmpOp::Ne),
            (">", CmpOp::Gt),
            ("<", CmpOp::Lt),
        ];
        let clauses = s
            .split("&&")
            .map(|clause| {
                let clause = clause.trim();
                for (sym, op) in OPS {
                    if let Some((col, val)) = clause.split_once(sym) {
                        let col = col.trim();
                        let val: f64 = val.trim().parse().map_err(|_| {
                            Error::Usage(format!("stratum clause '{clause}' needs a numeric right-hand side"))
                        })?;
                        if col.is_empty() {
                            break;
                        }
                        return Ok((col.to_string(), op, val));
                    }
                }
                Err(Error::Usage(format!("cannot parse stratum clause '{clause}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Stratum { clauses })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomizeSpec {
    pub a_var: String,
    pub b_var: String,
    pub alpha: BlockSpec,
    pub beta: BlockSpec,
    #[serde(default)]
    pub recode_a: Option<Recode>,
    #[serde(default)]
    pub recode_b: Option<Recode>,
    #[serde(default)]
    pub stratum: Option<Stratum>,
    /// Further columns the analysis needs complete (e.g. a trend variable).
    #[serde(default)]
    pub extra_columns: Vec<String>,
}

impl DichotomizeSpec {
    pub fn new(a_var: &str, b_var: &str, alpha: BlockSpec, beta: BlockSpec) -> Self {
        Self {
            a_var: a_var.into(),
            b_var: b_var.into(),
            alpha,
            beta,
            recode_a: None,
            recode_b: None,
            stratum: None,
            extra_columns: Vec::new(),
        }
    }

    pub fn describe(&self) -> String {
        let mut s = format!("alpha: {} {}; beta: {} {}", self.a_var, self.alpha, self.b_var, self.beta);
        if self.recode_a.is_some() {
            s.push_str(&format!("; {} recoded", self.a_var));
        }
        if self.recode_b.is_some() {
            s.push_str(&format!("; {} recoded", self.b_var));
        }
        if let Some(st) = &self.stratum {
            s.push_str(&format!("; stratum {st}"));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dichotomized {
    /// Analysis rows with `alpha` and `beta` indicator columns appended.
    pub data: Dataset,
    pub dropped_missing: usize,
    pub dropped_stratum: usize,
    /// Distinct (recoded) levels observed in each block, ascending.
    pub alpha_levels: Vec<f64>,
    pub alpha_complement_levels: Vec<f64>,
    pub beta_levels: Vec<f64>,
    pub beta_complement_levels: Vec<f64>,
}

fn distinct_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Listwise deletion, stratum filter, recoding and blocking, in that order.
pub fn dichotomize(data: &Dataset, spec: &DichotomizeSpec) -> Result<Dichotomized> {
    let mut needed: Vec<&str> = vec![&spec.a_var, &spec.b_var, data.outcome()];
    if let Some(st) = &spec.stratum {
        needed.extend(st.columns());
    }
    needed.extend(spec.extra_columns.iter().map(String::as_str));
    needed.sort_unstable();
    needed.dedup();
    let (complete, dropped_missing) = data.complete_cases(&needed)?;

    let keep: Vec<usize> = match &spec.stratum {
        None => (0..complete.n_rows()).collect(),
        Some(st) => {
            let cols: Vec<Vec<f64>> = st.columns().map(|c| complete.values(c)).collect::<Result<_>>()?;
            (0..complete.n_rows())
                .filter(|&r| st.clauses.iter().zip(&cols).all(|((_, op, v), col)| op.eval(col[r], *v)))
                .collect()
        }
    };
    let dropped_stratum = complete.n_rows() - keep.len();
    let rows = complete.take(&keep);

    let indicator = |var: &str, recode: &Option<Recode>, block: &BlockSpec| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let raw = rows.values(var)?;
        let coded: Vec<f64> = match recode {
            None => raw,
            Some(map) => raw
                .iter()
                .map(|&v| {
                    map.apply(v).ok_or_else(|| Error::Usage(format!("recode for '{var}' has no entry for level {v}")))
                })
                .collect::<Result<_>>()?,
        };
        let ind: Vec<f64> = coded.iter().map(|&v| block.contains(v) as u8 as f64).collect();
        let (inside, outside): (Vec<f64>, Vec<f64>) = coded.iter().partition(|&&v| block.contains(v));
        let (inside, outside) = (distinct_sorted(inside), distinct_sorted(outside));
        if inside.is_empty() {
            return Err(Error::Degenerate(format!("no analysed rows have {var} {block}")));
        }
        if outside.is_empty() {
            return Err(Error::Degenerate(format!("every analysed row has {var} {block}; the complement is empty")));
        }
        Ok((ind, inside, outside))
    };
    let (alpha, alpha_levels, alpha_complement_levels) = indicator(&spec.a_var, &spec.recode_a, &spec.alpha)?;
    let (beta, beta_levels, beta_complement_levels) = indicator(&spec.b_var, &spec.recode_b, &spec.beta)?;
    let data = rows.with_column(ALPHA_COLUMN, ColumnKind::Binary, alpha)?.with_column(
        BETA_COLUMN,
        ColumnKind::Binary,
        beta,
    )?;
    Ok(Dichotomized {
        data,
        dropped_missing,
        dropped_stratum,
        alpha_levels,
        alpha_complement_levels,
        beta_levels,
        beta_complement_levels,
    })
}
