use serde::{Deserialize, Serialize};

use super::{Adag, NodeKind};
use crate::error::{Error, Result};

/// Largest candidate pool [`search_admissible_c`] enumerates by default.
pub const DEFAULT_POOL_CAP: usize = 16;

/// Which graph nodes play which role in a coaction analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleAssignment {
    pub a: String,
    pub b: String,
    pub y: String,
    #[serde(default)]
    pub c: Vec<String>,
    #[serde(default)]
    pub u: Vec<String>,
    /// The user's judgement that `Y` is a deterministic function of `(A, B, C, U)`.
    #[serde(default)]
    pub asserted_functional: bool,
}

impl RoleAssignment {
    pub fn new(a: &str, b: &str, y: &str) -> Self {
        Self { a: a.into(), b: b.into(), y: y.into(), c: Vec::new(), u: Vec::new(), asserted_functional: false }
    }

    pub fn with_c(mut self, c: &[&str]) -> Self {
        self.c = c.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_u(mut self, u: &[&str]) -> Self {
        self.u = u.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn asserting_functional(mut self, yes: bool) -> Self {
        self.asserted_functional = yes;
        self
    }
}

/// Resolved roles, by node index.
struct Roles {
    a: usize,
    b: usize,
    y: usize,
    c: Vec<usize>,
    u: Vec<usize>,
    sigma: Vec<usize>,
}

fn resolve_roles(g: &Adag, roles: &RoleAssignment) -> Result<Roles> {
    let one = |name: &str, role: &str| {
        g.id(name).ok_or_else(|| Error::Usage(format!("role {role} names unknown node '{name}'")))
    };
    let a = one(&roles.a, "A")?;
    let b = one(&roles.b, "B")?;
    let y = one(&roles.y, "Y")?;
    let c = g.resolve(&roles.c)?;
    let u = g.resolve(&roles.u)?;
    let mut all: Vec<usize> = vec![a, b, y];
    all.extend(&c);
    all.extend(&u);
    let mut sorted = all.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Usage(format!("node '{}' is assigned two roles", g.name(w[0]))));
    }
    if let Some(&r) = all.iter().find(|&&v| g.kind(v) == NodeKind::Regime) {
        return Err(Error::Usage(format!("regime indicator '{}' cannot take a domain role", g.name(r))));
    }
    let sa = g.regime_of(a).ok_or_else(|| Error::Usage(format!("A = '{}' has no regime indicator", roles.a)))?;
    let sb = g.regime_of(b).ok_or_else(|| Error::Usage(format!("B = '{}' has no regime indicator", roles.b)))?;
    if g.regime_of(y).is_some() {
        return Err(Error::Usage(format!("Y = '{}' must not have a regime indicator", roles.y)));
    }
    Ok(Roles { a, b, y, c, u, sigma: vec![sa, sb] })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConditionStatus {
    Holds,
    /// The independence fails; `path` is an active path witnessing it.
    Fails {
        path: Vec<String>,
    },
    /// Not decidable from the graph; `asserted` echoes the user's judgement.
    AssertedOnly {
        asserted: bool,
    },
}

impl ConditionStatus {
    pub fn holds(&self) -> bool {
        matches!(self, ConditionStatus::Holds)
    }

    pub fn label(&self) -> &'static str {
        match self {
            ConditionStatus::Holds => "holds",
            ConditionStatus::Fails { .. } => "fails",
            ConditionStatus::AssertedOnly { asserted: true } => "asserted",
            ConditionStatus::AssertedOnly { asserted: false } => "not asserted",
        }
    }
}

/// Verdicts on the four core conditions for one choice of `C` and `U`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub c: Vec<String>,
    pub u: Vec<String>,
    /// 1: `Y` is functional in `(A, B, C, U)`; a judgement, never read off the graph.
    pub functional: ConditionStatus,
    /// 2: `Y ⊥ σ | (A, B, C, U)`.
    pub regime_invariance: ConditionStatus,
    /// 3: `U ⊥ (A, B, σ) | C`.
    pub context_independence: ConditionStatus,
    /// 4: `A ⊥ B | (C, σ)`.
    pub factor_independence: ConditionStatus,
    /// Consequence of 2 and 3: `Y ⊥ σ | (A, B, C)`.
    pub joint_regime_invariance: ConditionStatus,
}

impl ConditionReport {
    /// Conditions 2 to 4.
    pub fn graph_conditions_hold(&self) -> bool {
        self.regime_invariance.holds() && self.context_independence.holds() && self.factor_independence.holds()
    }

    pub fn all_hold(&self) -> bool {
        self.graph_conditions_hold() && self.functional == ConditionStatus::AssertedOnly { asserted: true }
    }

    pub fn statuses(&self) -> [(&'static str, &ConditionStatus); 4] {
        [
            ("1 functional", &self.functional),
            ("2 Y indep sigma | A,B,C,U", &self.regime_invariance),
            ("3 U indep A,B,sigma | C", &self.context_independence),
            ("4 A indep B | C,sigma", &self.factor_independence),
        ]
    }
}

fn independence(g: &Adag, x: &[usize], y: &[usize], z: &[usize]) -> ConditionStatus {
    if g.d_separated_idx(x, y, z) {
        ConditionStatus::Holds
    } else {
        let path = g.active_path_idx(x, y, z).expect("moralization and path search disagree on an independence query");
        ConditionStatus::Fails { path: g.names(&path) }
    }
}

fn union(parts: &[&[usize]]) -> Vec<usize> {
    let mut v: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn report_for(g: &Adag, r: &Roles, asserted: bool) -> Result<ConditionReport> {
    let ab = [r.a, r.b];
    let cond2 = independence(g, &[r.y], &r.sigma, &union(&[&ab, &r.c, &r.u]));
    let cond3 =
        if r.u.is_empty() { ConditionStatus::Holds } else { independence(g, &r.u, &union(&[&ab, &r.sigma]), &r.c) };
    let cond4 = independence(g, &[r.a], &[r.b], &union(&[&r.c, &r.sigma]));
    let corollary = independence(g, &[r.y], &r.sigma, &union(&[&ab, &r.c]));
    if cond2.holds() && cond3.holds() && !corollary.holds() {
        return Err(Error::Internal(format!(
            "conditions 2 and 3 hold but Y is not independent of sigma given (A, B, C): {corollary:?}"
        )));
    }
    Ok(ConditionReport {
        c: g.names(&r.c),
        u: g.names(&r.u),
        functional: ConditionStatus::AssertedOnly { asserted },
        regime_invariance: cond2,
        context_independence: cond3,
        factor_independence: cond4,
        joint_regime_invariance: corollary,
    })
}

pub fn check_core_conditions(g: &Adag, roles: &RoleAssignment) -> Result<ConditionReport> {
    let r = resolve_roles(g, roles)?;
    report_for(g, &r, roles.asserted_functional)
}

/// Outcome of testing a candidate `C` against `C ⊥ σ` and `Y ⊥ σ | (A, B, C)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SufficiencyReport {
    pub c: Vec<String>,
    pub holds: bool,
    /// 1 or 2: the first clause that failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_clause: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<String>>,
}

/// Whether `candidate` is a sufficient covariate for the joint effect of
/// `(A, B)` on `Y`. The `c` and `u` fields of `roles` are ignored.
pub fn check_sufficient_covariate<S: AsRef<str>>(
    g: &Adag,
    roles: &RoleAssignment,
    candidate: &[S],
) -> Result<SufficiencyReport> {
    let base = RoleAssignment { c: Vec::new(), u: Vec::new(), ..roles.clone() };
    let r = resolve_roles(g, &base)?;
    let c = g.resolve(candidate)?;
    if let Some(&v) = c.iter().find(|v| [r.a, r.b, r.y].contains(v) || r.sigma.contains(v)) {
        return Err(Error::Usage(format!(
            "candidate C contains '{}', which is A, B, Y or a regime indicator",
            g.name(v)
        )));
    }
    let names = g.names(&c);
    for (clause, status) in [
        (1u8, independence(g, &c, &r.sigma, &[])),
        (2u8, independence(g, &[r.y], &r.sigma, &union(&[&[r.a, r.b], &c]))),
    ] {
        if let ConditionStatus::Fails { path } = status {
            return Ok(SufficiencyReport { c: names, holds: false, failed_clause: Some(clause), path: Some(path) });
        }
    }
    Ok(SufficiencyReport { c: names, holds: true, failed_clause: None, path: None })
}

/// All subsets of `pool` that, used as `C`, satisfy core conditions 2 to 4,
/// ordered by size and then lexicographically. `U` comes from `roles`.
pub fn search_admissible_c<S: AsRef<str>>(
    g: &Adag,
    roles: &RoleAssignment,
    pool: &[S],
    cap: usize,
) -> Result<Vec<Vec<String>>> {
    if pool.len() > cap {
        return Err(Error::Usage(format!("candidate pool has {} nodes; the cap is {cap}", pool.len())));
    }
    let base = RoleAssignment { c: Vec::new(), ..roles.clone() };
    let mut r = resolve_roles(g, &base)?;
    let mut pool = g.resolve(pool)?;
    pool.sort_unstable();
    pool.dedup();
    if let Some(&v) =
        pool.iter().find(|v| [r.a, r.b, r.y].contains(v) || r.u.contains(v) || g.kind(**v) == NodeKind::Regime)
    {
        return Err(Error::Usage(format!("pool node '{}' already has a role or is a regime indicator", g.name(v))));
    }
    let mut subsets: Vec<Vec<usize>> = (0u32..1 << pool.len())
        .map(|mask| pool.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect())
        .collect();
    subsets.sort_by(|x: &Vec<usize>, y| x.len().cmp(&y.len()).then_with(|| g.names(x).cmp(&g.names(y))));
    let mut out = Vec::new();
    for s in subsets {
        r.c = s;
        if report_for(g, &r, false)?.graph_conditions_hold() {
            out.push(g.names(&r.c));
        }
    }
    Ok(out)
}
