//! Oracles and generators shared by the integration tests. Nothing here calls
//! the library's own checking code.
#![allow(dead_code)]

use coaction::adag::Adag;
use coaction::estimation::{ColumnKind, Dataset};
use coaction::mechanism::{Context, ResponseFunction};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn descendants(g: &Adag) -> Vec<Vec<bool>> {
    (0..g.len())
        .map(|v| {
            let mut seen = vec![false; g.len()];
            let mut stack = vec![v];
            while let Some(w) = stack.pop() {
                if !std::mem::replace(&mut seen[w], true) {
                    stack.extend(g.children(w).iter().copied());
                }
            }
            seen
        })
        .collect()
}

/// Path-blocking oracle: `x ⊥ y | z` iff every simple path between them in
/// the skeleton has a blocked interior node.
pub fn path_separated(g: &Adag, x: usize, y: usize, z: &[usize]) -> bool {
    let desc = descendants(g);
    let in_z = |v: usize| z.contains(&v);
    let opens = |prev: usize, v: usize, next: usize| {
        let collider = g.parents(v).contains(&prev) && g.parents(v).contains(&next);
        if collider {
            (0..g.len()).any(|d| desc[v][d] && in_z(d))
        } else {
            !in_z(v)
        }
    };
    let neighbours = |v: usize| -> Vec<usize> {
        let mut n: Vec<usize> = g.parents(v).iter().chain(g.children(v)).copied().collect();
        n.sort_unstable();
        n
    };
    let mut path = vec![x];
    let mut on = vec![false; g.len()];
    on[x] = true;
    fn walk(
        path: &mut Vec<usize>,
        on: &mut [bool],
        y: usize,
        nb: &dyn Fn(usize) -> Vec<usize>,
        opens: &dyn Fn(usize, usize, usize) -> bool,
    ) -> bool {
        let v = *path.last().unwrap();
        for w in nb(v) {
            if on[w] {
                continue;
            }
            if path.len() >= 2 && !opens(path[path.len() - 2], v, w) {
                continue;
            }
            if w == y {
                return true;
            }
            on[w] = true;
            path.push(w);
            let found = walk(path, on, y, nb, opens);
            path.pop();
            on[w] = false;
            if found {
                return true;
            }
        }
        false
    }
    !walk(&mut path, &mut on, y, &neighbours, &opens)
}

pub fn sets_separated(g: &Adag, xs: &[usize], ys: &[usize], z: &[usize]) -> bool {
    xs.iter().all(|&x| ys.iter().all(|&y| path_separated(g, x, y, z)))
}

/// Random DAG on `n` variables `v0..`, each forward edge of a random order
/// present with probability `p`.
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Adag {
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut b = Adag::builder();
    for name in &names {
        b = b.variable(name);
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                b = b.edge(&names[order[i]], &names[order[j]]);
            }
        }
    }
    b.build().unwrap()
}

/// Whether `actor` interferes with the other factor in context `(c, u)`,
/// straight from the definition.
pub fn interferes_in(f: &ResponseFunction, actor_is_a: bool, c: usize, u: usize) -> bool {
    let (na, nb) = (f.domain_a().len(), f.domain_b().len());
    let y = |actor: usize, other: usize| {
        if actor_is_a {
            f.eval(actor, other, c, u)
        } else {
            f.eval(other, actor, c, u)
        }
    };
    let (n_actor, n_other) = if actor_is_a { (na, nb) } else { (nb, na) };
    let other_matters = (0..n_actor).any(|x| (0..n_other).any(|o| y(x, o) != y(x, 0)));
    let blocker = (0..n_actor).any(|x| (0..n_other).all(|o| y(x, o) == 0));
    other_matters && blocker
}

pub fn interferes(f: &ResponseFunction, actor_is_a: bool) -> bool {
    (0..f.domain_c().len()).any(|c| (0..f.domain_u().len()).any(|u| interferes_in(f, actor_is_a, c, u)))
}

pub fn contexts(f: &ResponseFunction) -> Vec<Context> {
    let mut v = Vec::new();
    for c in 0..f.domain_c().len() {
        for u in 0..f.domain_u().len() {
            v.push(Context { c, u });
        }
    }
    v
}

/// Rows `(alpha, beta, t, y)` with `P(y = 1) = b0 + b1·alpha + b2·beta + b3·alpha·beta + b4·t`
/// and `t` uniform on `0..=40`.
pub fn linear_risk_data(rng: &mut ChaCha8Rng, n: usize, beta: [f64; 5]) -> Dataset {
    let mut cols = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for _ in 0..n {
        let a = rng.random_bool(0.5) as u8 as f64;
        let b = rng.random_bool(0.5) as u8 as f64;
        let t = rng.random_range(0..=40) as f64;
        let p = beta[0] + beta[1] * a + beta[2] * b + beta[3] * a * b + beta[4] * t;
        let y = rng.random_bool(p) as u8 as f64;
        for (col, v) in cols.iter_mut().zip([a, b, t, y]) {
            col.push(v);
        }
    }
    let [a, b, t, y] = cols;
    Dataset::from_columns(
        "Y",
        vec![
            ("alpha", ColumnKind::Binary, a),
            ("beta", ColumnKind::Binary, b),
            ("T", ColumnKind::Continuous, t),
            ("Y", ColumnKind::Binary, y),
        ],
    )
    .unwrap()
}

/// Rows `(alpha, beta, y)` with odds `o0 + o1·alpha + o2·beta + o3·alpha·beta`,
/// exposures drawn with probabilities `p_a`, `p_b`.
pub fn linear_odds_data(rng: &mut ChaCha8Rng, n: usize, odds: [f64; 4], p_a: f64, p_b: f64) -> Dataset {
    let mut a_col = Vec::with_capacity(n);
    let mut b_col = Vec::with_capacity(n);
    let mut y_col = Vec::with_capacity(n);
    for _ in 0..n {
        let a = rng.random_bool(p_a) as u8 as f64;
        let b = rng.random_bool(p_b) as u8 as f64;
        let o = odds[0] + odds[1] * a + odds[2] * b + odds[3] * a * b;
        y_col.push(rng.random_bool(o / (1.0 + o)) as u8 as f64);
        a_col.push(a);
        b_col.push(b);
    }
    Dataset::from_columns(
        "Y",
        vec![
            ("alpha", ColumnKind::Binary, a_col),
            ("beta", ColumnKind::Binary, b_col),
            ("Y", ColumnKind::Binary, y_col),
        ],
    )
    .unwrap()
}

/// Four-cell data with the given cell risks, `n` rows per cell.
pub fn cell_data(rng: &mut ChaCha8Rng, n: usize, risk: [[f64; 2]; 2]) -> Dataset {
    let mut a_col = Vec::new();
    let mut b_col = Vec::new();
    let mut y_col = Vec::new();
    for (i, row) in risk.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            for _ in 0..n {
                a_col.push(i as f64);
                b_col.push(j as f64);
                y_col.push(rng.random_bool(p) as u8 as f64);
            }
        }
    }
    Dataset::from_columns(
        "Y",
        vec![
            ("alpha", ColumnKind::Binary, a_col),
            ("beta", ColumnKind::Binary, b_col),
            ("Y", ColumnKind::Binary, y_col),
        ],
    )
    .unwrap()
}

/// Random augmented DAG over `A`, `B`, `Y` and `extra` further variables
/// `X0..`, with regime indicators on `A` and `B`. Each extra variable is
/// assigned to `C`, `U` or neither.
pub fn random_adag(rng: &mut ChaCha8Rng, extra: usize, p: f64) -> (Adag, coaction::adag::RoleAssignment) {
    let mut vars: Vec<String> = ["A", "B", "Y"].iter().map(|s| s.to_string()).collect();
    vars.extend((0..extra).map(|i| format!("X{i}")));
    let mut order = vars.clone();
    order.shuffle(rng);
    let mut b = Adag::builder().regime("sigma_A", "A").regime("sigma_B", "B");
    for v in &vars {
        b = b.variable(v);
    }
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if rng.random_bool(p) {
                b = b.edge(&order[i], &order[j]);
            }
        }
    }
    let mut roles = coaction::adag::RoleAssignment::new("A", "B", "Y");
    for v in &vars[3..] {
        match rng.random_range(0..3) {
            0 => roles.c.push(v.clone()),
            1 => roles.u.push(v.clone()),
            _ => {}
        }
    }
    (b.build().unwrap(), roles)
}
