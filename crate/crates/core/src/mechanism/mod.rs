//! Deterministic response functions over finite grids and exact checks of
//! their structural properties.
//!
//! A [`ResponseFunction`] tabulates `Y = f(A, B, C, U)` with every argument
//! ranging over a finite [`VariableDomain`]. Continuous factors enter as
//! caller-chosen grids; all checks are exact by enumeration over the grid.

mod boolean;
mod interference;
mod order;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boolean::{classify_boolean_pattern, BooleanPattern, PatternClass};
pub use interference::{
    check_interference, check_irrelevance, classify_coaction, CoactionVerdict, InterferenceWitness, TheoremWitness,
};
pub use order::{
    apply_recoding, check_alpha_insensitivity, check_consistency, check_monotonicity, find_monotone_recoding,
    Monotonicity,
};

/// A single grid level: a number for ordered/discretized variables, or a label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Level {
    Number(f64),
    Label(String),
}

impl Level {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Level::Number(x) => Some(*x),
            Level::Label(_) => None,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Number(x) => write!(f, "{x}"),
            Level::Label(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Level {
    fn from(x: f64) -> Self {
        Level::Number(x)
    }
}

impl From<i32> for Level {
    fn from(x: i32) -> Self {
        Level::Number(x as f64)
    }
}

impl From<&str> for Level {
    fn from(s: &str) -> Self {
        Level::Label(s.to_string())
    }
}

/// The finite set of values a variable can take. When `ordered` is set, list
/// position is the total order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDomain {
    pub name: String,
    pub levels: Vec<Level>,
    pub ordered: bool,
}

impl VariableDomain {
    pub fn new(name: impl Into<String>, levels: Vec<Level>, ordered: bool) -> Result<Self> {
        let name = name.into();
        if levels.is_empty() {
            return Err(Error::Domain(format!("domain '{name}' has no levels")));
        }
        for (i, l) in levels.iter().enumerate() {
            if levels[..i].contains(l) {
                return Err(Error::Domain(format!("domain '{name}' repeats level {l}")));
            }
        }
        if ordered {
            let nums: Option<Vec<f64>> = levels.iter().map(Level::as_f64).collect();
            if let Some(nums) = nums {
                if nums.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Domain(format!(
                        "ordered domain '{name}' must list numeric levels in increasing order"
                    )));
                }
            }
        }
        Ok(Self { name, levels, ordered })
    }

    /// Ordered integer domain `0..n`.
    pub fn range(name: impl Into<String>, n: usize) -> Self {
        Self::new(name, (0..n).map(|i| Level::Number(i as f64)).collect(), true).expect("non-empty distinct range")
    }

    /// A one-level domain, used when a context variable is absent.
    pub fn singleton(name: impl Into<String>) -> Self {
        Self::new(name, vec![Level::Label("*".into())], true).expect("single level")
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn index_of(&self, level: &Level) -> Option<usize> {
        self.levels.iter().position(|l| l == level)
    }
}

/// One of the two causal factors under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    A,
    B,
}

impl Factor {
    pub fn other(self) -> Factor {
        match self {
            Factor::A => Factor::B,
            Factor::B => Factor::A,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::A => "A",
            Factor::B => "B",
        })
    }
}

/// Fixed values of the observed (`c`) and unobserved (`u`) context, as level indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Context {
    pub c: usize,
    pub u: usize,
}

/// Tabulated deterministic response `f(a, b, c, u) ∈ {0, 1}`.
///
/// The table is stored row-major in `(a, b, c, u)` order, so the flat index is
/// `((a * |B| + b) * |C| + c) * |U| + u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseFunction {
    domain_a: VariableDomain,
    domain_b: VariableDomain,
    domain_c: VariableDomain,
    domain_u: VariableDomain,
    table: Vec<u8>,
}

impl ResponseFunction {
    pub fn new(
        domain_a: VariableDomain,
        domain_b: VariableDomain,
        domain_c: VariableDomain,
        domain_u: VariableDomain,
        table: Vec<u8>,
    ) -> Result<Self> {
        let expected = domain_a.len() * domain_b.len() * domain_c.len() * domain_u.len();
        if table.len() != expected {
            return Err(Error::Domain(format!("table has {} entries, grid has {expected} cells", table.len())));
        }
        if let Some(pos) = table.iter().position(|&v| v > 1) {
            return Err(Error::Domain(format!("table entry {pos} is {}, expected 0 or 1", table[pos])));
        }
        Ok(Self { domain_a, domain_b, domain_c, domain_u, table })
    }

    /// Tabulates `rule` over the full grid.
    pub fn from_fn<F>(
        domain_a: VariableDomain,
        domain_b: VariableDomain,
        domain_c: VariableDomain,
        domain_u: VariableDomain,
        mut rule: F,
    ) -> Self
    where
        F: FnMut(usize, usize, usize, usize) -> bool,
    {
        let mut table = Vec::with_capacity(domain_a.len() * domain_b.len() * domain_c.len() * domain_u.len());
        for a in 0..domain_a.len() {
            for b in 0..domain_b.len() {
                for c in 0..domain_c.len() {
                    for u in 0..domain_u.len() {
                        table.push(rule(a, b, c, u) as u8);
                    }
                }
            }
        }
        Self { domain_a, domain_b, domain_c, domain_u, table }
    }

    /// A function of `(a, b)` only, with empty `C` and `U`.
    pub fn from_ab<F>(domain_a: VariableDomain, domain_b: VariableDomain, mut rule: F) -> Self
    where
        F: FnMut(usize, usize) -> bool,
    {
        Self::from_fn(
            domain_a,
            domain_b,
            VariableDomain::singleton("C"),
            VariableDomain::singleton("U"),
            |a, b, _, _| rule(a, b),
        )
    }

    pub fn domain(&self, factor: Factor) -> &VariableDomain {
        match factor {
            Factor::A => &self.domain_a,
            Factor::B => &self.domain_b,
        }
    }

    pub fn domain_a(&self) -> &VariableDomain {
        &self.domain_a
    }

    pub fn domain_b(&self) -> &VariableDomain {
        &self.domain_b
    }

    pub fn domain_c(&self) -> &VariableDomain {
        &self.domain_c
    }

    pub fn domain_u(&self) -> &VariableDomain {
        &self.domain_u
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    #[inline]
    fn index(&self, a: usize, b: usize, c: usize, u: usize) -> usize {
        ((a * self.domain_b.len() + b) * self.domain_c.len() + c) * self.domain_u.len() + u
    }

    /// `f(a, b, c, u)` by level index. Panics on out-of-range indices.
    #[inline]
    pub fn eval(&self, a: usize, b: usize, c: usize, u: usize) -> u8 {
        self.table[self.index(a, b, c, u)]
    }

    /// Evaluates with the factors addressed by role: `target` takes level `t`
    /// and the other factor takes level `o`.
    #[inline]
    pub fn eval_as(&self, target: Factor, t: usize, o: usize, ctx: Context) -> u8 {
        match target {
            Factor::A => self.eval(t, o, ctx.c, ctx.u),
            Factor::B => self.eval(o, t, ctx.c, ctx.u),
        }
    }

    pub fn validate_context(&self, ctx: Context) -> Result<()> {
        if ctx.c >= self.domain_c.len() {
            return Err(Error::Domain(format!(
                "context level c={} outside domain '{}' of size {}",
                ctx.c,
                self.domain_c.name,
                self.domain_c.len()
            )));
        }
        if ctx.u >= self.domain_u.len() {
            return Err(Error::Domain(format!(
                "context level u={} outside domain '{}' of size {}",
                ctx.u,
                self.domain_u.name,
                self.domain_u.len()
            )));
        }
        Ok(())
    }

    /// All `(c, u)` contexts in lexicographic order.
    pub fn contexts(&self) -> impl Iterator<Item = Context> + '_ {
        let nu = self.domain_u.len();
        (0..self.domain_c.len()).flat_map(move |c| (0..nu).map(move |u| Context { c, u }))
    }

    /// `1 - f`: coaction to prevent `Y = 1` is coaction to produce `Y = 0`.
    pub fn negate_outcome(&self) -> Self {
        Self { table: self.table.iter().map(|v| 1 - v).collect(), ..self.clone() }
    }

    /// Reorders the levels of `factor` so that new position `i` holds old level `perm[i]`.
    pub fn permute_levels(&self, factor: Factor, perm: &[usize]) -> Result<Self> {
        let dom = self.domain(factor);
        let mut seen = vec![false; dom.len()];
        if perm.len() != dom.len() || perm.iter().any(|&p| p >= dom.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Domain(format!(
                "{perm:?} is not a permutation of the {} levels of {factor}",
                dom.len()
            )));
        }
        let mut new_dom = dom.clone();
        new_dom.levels = perm.iter().map(|&p| dom.levels[p].clone()).collect();
        let (da, db) = match factor {
            Factor::A => (new_dom, self.domain_b.clone()),
            Factor::B => (self.domain_a.clone(), new_dom),
        };
        let src = self;
        Ok(Self::from_fn(da, db, self.domain_c.clone(), self.domain_u.clone(), |a, b, c, u| match factor {
            Factor::A => src.eval(perm[a], b, c, u) == 1,
            Factor::B => src.eval(a, perm[b], c, u) == 1,
        }))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ResponseFunctionFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ResponseFunctionFile::from(self))?)
    }
}

/// Negation of the outcome; see [`ResponseFunction::negate_outcome`].
pub fn negate_outcome(f: &ResponseFunction) -> ResponseFunction {
    f.negate_outcome()
}

/// On-disk form of a response function.
///
/// `domains` maps the roles `A`, `B` and optionally `C`, `U` to level lists.
/// `table` is the flat `(a, b, c, u)` row-major array of 0/1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseFunctionFile {
    pub domains: BTreeMap<String, Vec<Level>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub names: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unordered: Vec<String>,
    pub table: Vec<u8>,
}

const ROLES: [&str; 4] = ["A", "B", "C", "U"];

impl TryFrom<ResponseFunctionFile> for ResponseFunction {
    type Error = Error;

    fn try_from(file: ResponseFunctionFile) -> Result<Self> {
        if let Some(k) = file.domains.keys().find(|k| !ROLES.contains(&k.as_str())) {
            return Err(Error::Domain(format!("unknown role '{k}' in domains (expected A, B, C, U)")));
        }
        let mut doms = Vec::with_capacity(4);
        for role in ROLES {
            let name = file.names.get(role).cloned().unwrap_or_else(|| role.to_string());
            let ordered = !file.unordered.iter().any(|r| r == role);
            let dom = match file.domains.get(role) {
                Some(levels) => VariableDomain::new(name, levels.clone(), ordered)?,
                None if role == "A" || role == "B" => {
                    return Err(Error::Domain(format!("domains must declare {role}")))
                }
                None => VariableDomain::singleton(name),
            };
            doms.push(dom);
        }
        let u = doms.pop().unwrap();
        let c = doms.pop().unwrap();
        let b = doms.pop().unwrap();
        let a = doms.pop().unwrap();
        ResponseFunction::new(a, b, c, u, file.table)
    }
}

impl From<&ResponseFunction> for ResponseFunctionFile {
    fn from(f: &ResponseFunction) -> Self {
        let mut domains = BTreeMap::new();
        let mut names = BTreeMap::new();
        let mut unordered = Vec::new();
        let singleton = VariableDomain::singleton("");
        for (role, dom) in ROLES.iter().zip([&f.domain_a, &f.domain_b, &f.domain_c, &f.domain_u]) {
            let absent = (*role == "C" || *role == "U") && dom.levels == singleton.levels;
            if !absent {
                domains.insert(role.to_string(), dom.levels.clone());
                if !dom.ordered {
                    unordered.push(role.to_string());
                }
            }
            if dom.name != *role && !absent {
                names.insert(role.to_string(), dom.name.clone());
            }
        }
        Self { domains, names, unordered, table: f.table.clone() }
    }
}

/// A set of levels of one factor, used as the upper block of a dichotomization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueSet {
    pub variable: Factor,
    /// Level indices, sorted ascending.
    pub members: Vec<usize>,
    /// Set when `members = {v : v > threshold}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl ValueSet {
    pub fn from_members(variable: Factor, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { variable, members, threshold: None }
    }

    /// `{v : v > threshold}` over the numeric levels of `domain`. Ties go to the complement.
    pub fn above(variable: Factor, domain: &VariableDomain, threshold: f64) -> Result<Self> {
        let mut members = Vec::new();
        for (i, l) in domain.levels.iter().enumerate() {
            let v = l.as_f64().ok_or_else(|| {
                Error::Domain(format!("threshold block needs numeric levels; '{}' has label {l}", domain.name))
            })?;
            if v > threshold {
                members.push(i);
            }
        }
        Ok(Self { variable, members, threshold: Some(threshold) })
    }

    /// The top level alone.
    pub fn top(variable: Factor, domain: &VariableDomain) -> Self {
        Self { variable, members: vec![domain.len() - 1], threshold: None }
    }

    pub fn contains(&self, level: usize) -> bool {
        self.members.binary_search(&level).is_ok()
    }

    pub fn complement(&self, domain: &VariableDomain) -> Vec<usize> {
        (0..domain.len()).filter(|i| !self.contains(*i)).collect()
    }

    /// Checks that both the block and its complement are non-empty.
    pub fn validate_block(&self, domain: &VariableDomain) -> Result<()> {
        if self.members.iter().any(|&m| m >= domain.len()) {
            return Err(Error::Domain(format!("block references a level outside '{}'", domain.name)));
        }
        if self.members.is_empty() {
            return Err(Error::Degenerate(format!("block on '{}' is empty", domain.name)));
        }
        if self.members.len() == domain.len() {
            return Err(Error::Degenerate(format!("complement of block on '{}' is empty", domain.name)));
        }
        Ok(())
    }
}
