use super::Adag;

/// Moralization criterion: restrict to the ancestral set of `x ∪ y ∪ z`, marry
/// co-parents, drop edge directions, delete `z`, and test whether `x` can
/// still reach `y`.
pub(super) fn separated(g: &Adag, x: &[usize], y: &[usize], z: &[usize]) -> bool {
    if x.is_empty() || y.is_empty() {
        return true;
    }
    let seeds: Vec<usize> = x.iter().chain(y).chain(z).copied().collect();
    let keep = g.ancestral_set(&seeds);
    let n = g.len();
    let mut adj = vec![Vec::new(); n];
    for v in (0..n).filter(|&v| keep[v]) {
        let pa = g.parents(v);
        for (i, &p) in pa.iter().enumerate() {
            adj[v].push(p);
            adj[p].push(v);
            for &q in &pa[i + 1..] {
                adj[p].push(q);
                adj[q].push(p);
            }
        }
    }
    let mut blocked = vec![false; n];
    for &v in z {
        blocked[v] = true;
    }
    let mut target = vec![false; n];
    for &v in y {
        target[v] = true;
    }
    let mut seen = blocked;
    let mut stack: Vec<usize> = x.to_vec();
    for &v in x {
        seen[v] = true;
    }
    while let Some(v) = stack.pop() {
        if target[v] {
            return false;
        }
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    true
}

/// Depth-first search over simple paths in lexicographic node order, pruning
/// as soon as an intermediate node blocks. A collider passes when it is an
/// ancestor of (or in) `z`; any other node passes when it is not in `z`.
pub(super) fn first_active_path(g: &Adag, x: &[usize], y: &[usize], z: &[usize]) -> Option<Vec<usize>> {
    let n = g.len();
    let mut in_z = vec![false; n];
    for &v in z {
        in_z[v] = true;
    }
    let anc_z = g.ancestral_set(z);
    let mut in_y = vec![false; n];
    for &v in y {
        in_y[v] = true;
    }
    let mut starts = x.to_vec();
    starts.sort_unstable();
    let ctx = Search { g, in_z: &in_z, anc_z: &anc_z, in_y: &in_y };
    for s in starts {
        let mut path = vec![s];
        let mut on_path = vec![false; n];
        on_path[s] = true;
        if ctx.extend(&mut path, &mut on_path, false) {
            return Some(path);
        }
    }
    None
}

struct Search<'a> {
    g: &'a Adag,
    in_z: &'a [bool],
    anc_z: &'a [bool],
    in_y: &'a [bool],
}

impl Search<'_> {
    /// `arrived_into` is true when the last edge points into the current node.
    fn extend(&self, path: &mut Vec<usize>, on_path: &mut [bool], arrived_into: bool) -> bool {
        let v = *path.last().unwrap();
        let mut nbrs: Vec<(usize, bool)> = self
            .g
            .parents(v)
            .iter()
            .map(|&p| (p, false))
            .chain(self.g.children(v).iter().map(|&c| (c, true)))
            .collect();
        nbrs.sort_unstable();
        let intermediate = path.len() > 1;
        for (w, edge_out_of_v) in nbrs {
            if on_path[w] {
                continue;
            }
            if intermediate {
                let collider = arrived_into && !edge_out_of_v;
                let passes = if collider { self.anc_z[v] } else { !self.in_z[v] };
                if !passes {
                    continue;
                }
            }
            path.push(w);
            if self.in_y[w] {
                return true;
            }
            on_path[w] = true;
            if self.extend(path, on_path, edge_out_of_v) {
                return true;
            }
            on_path[w] = false;
            path.pop();
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(g: &Adag, names: &[&str]) -> Vec<usize> {
        g.resolve(names).unwrap()
    }

    #[test]
    fn chain_blocked_by_middle() {
        let g = Adag::builder().variables(&["A", "Z", "Y"]).edges(&[("A", "Z"), ("Z", "Y")]).build().unwrap();
        assert!(g.d_separated(&["A"], &["Y"], &["Z"]).unwrap());
        assert!(!g.d_separated(&["A"], &["Y"], &[] as &[&str]).unwrap());
    }

    #[test]
    fn collider_opens_when_conditioned() {
        let g = Adag::builder().variables(&["A", "B", "Y"]).edges(&[("A", "Y"), ("B", "Y")]).build().unwrap();
        assert!(!g.d_separated(&["A"], &["B"], &["Y"]).unwrap());
        assert!(g.d_separated(&["A"], &["B"], &[] as &[&str]).unwrap());
        let p = first_active_path(&g, &ids(&g, &["A"]), &ids(&g, &["B"]), &ids(&g, &["Y"])).unwrap();
        assert_eq!(g.names(&p), vec!["A", "Y", "B"]);
    }

    #[test]
    fn descendant_of_collider_opens_it() {
        let g = Adag::builder()
            .variables(&["A", "B", "Y", "W"])
            .edges(&[("A", "Y"), ("B", "Y"), ("Y", "W")])
            .build()
            .unwrap();
        assert!(!g.d_separated(&["A"], &["B"], &["W"]).unwrap());
    }

    #[test]
    fn path_search_prefers_lexicographically_first() {
        // Two open routes A-M-Y and A-N-Y; M sorts first.
        let g = Adag::builder()
            .variables(&["A", "M", "N", "Y"])
            .edges(&[("A", "N"), ("N", "Y"), ("A", "M"), ("M", "Y")])
            .build()
            .unwrap();
        let p = first_active_path(&g, &ids(&g, &["A"]), &ids(&g, &["Y"]), &[]).unwrap();
        assert_eq!(g.names(&p), vec!["A", "M", "Y"]);
        let p = first_active_path(&g, &ids(&g, &["A"]), &ids(&g, &["Y"]), &ids(&g, &["M"])).unwrap();
        assert_eq!(g.names(&p), vec!["A", "N", "Y"]);
        assert!(first_active_path(&g, &ids(&g, &["A"]), &ids(&g, &["Y"]), &ids(&g, &["M", "N"])).is_none());
    }
}
