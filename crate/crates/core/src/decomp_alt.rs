//! Fundamental-set (Schnakenberg) and positive-term (Kalpazidou)
//! decompositions of the entropy production.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Cycle, LabeledGraph, MaximalTree};
use crate::hill::affinities_from_gaps;
use crate::steady::{max_one_way_flux, steady_fluxes};

/// Relative flux threshold below which a residual flux is zeroed.
pub const FLUX_TIE_TOL: f64 = 1e-12;

/// Net fluxes below this fraction of the largest one-way flux are treated
/// as zero (rounding of the rates themselves).
pub const FLUX_NOISE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalTerm {
    /// Chord edge index; the cycle follows the chord's stored `lo -> hi` direction.
    pub chord: usize,
    pub cycle: Cycle,
    pub chord_flux: f64,
    pub affinity: f64,
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalSet {
    pub tree: MaximalTree,
    pub terms: Vec<FundamentalTerm>,
    pub entropy: f64,
}

/// Breadth-first spanning tree from vertex 1, neighbors in index order.
pub fn bfs_tree(g: &LabeledGraph) -> MaximalTree {
    let mut seen = vec![false; g.n()];
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &(w, e) in g.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                edges.push(e);
                queue.push_back(w);
            }
        }
    }
    edges.sort_unstable();
    MaximalTree { edges }
}

fn tree_path(g: &LabeledGraph, tree_adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; g.n()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &w in &tree_adj[v] {
            if prev[w] == usize::MAX {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![to];
    let mut v = to;
    while v != from {
        v = prev[v];
        path.push(v);
    }
    path.reverse();
    path
}

/// Entropy production as `Σ_chords J(chord) X(fundamental cycle)`.
pub fn schnakenberg(
    g: &LabeledGraph,
    tree: &MaximalTree,
    populations: &[f64],
) -> Result<FundamentalSet> {
    let n = g.n();
    let mut in_tree = vec![false; g.u()];
    let mut dsu: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let not_maximal = || Error::InvalidParams("edge set is not a maximal tree".into());
    if tree.edges.len() + 1 != n {
        return Err(not_maximal());
    }
    let mut tree_adj = vec![Vec::new(); n];
    for &e in &tree.edges {
        if e >= g.u() || in_tree[e] {
            return Err(not_maximal());
        }
        let edge = &g.edges()[e];
        let (a, b) = (find(&mut dsu, edge.lo), find(&mut dsu, edge.hi));
        if a == b {
            return Err(not_maximal());
        }
        dsu[a] = b;
        in_tree[e] = true;
        tree_adj[edge.lo].push(edge.hi);
        tree_adj[edge.hi].push(edge.lo);
    }
    let fluxes = steady_fluxes(g, populations);
    let mut terms = Vec::new();
    for (k, edge) in g.edges().iter().enumerate() {
        if in_tree[k] {
            continue;
        }
        // lo -> hi along the chord, then back through the tree
        let path = tree_path(g, &tree_adj, edge.hi, edge.lo);
        let seq: Vec<usize> = std::iter::once(edge.lo)
            .chain(path[..path.len() - 1].iter().copied())
            .collect();
        let cycle = Cycle::from_sequence(g, &seq)?;
        let affinity = affinities_from_gaps(g, &cycle).total;
        terms.push(FundamentalTerm {
            chord: k,
            cycle,
            chord_flux: fluxes[k],
            affinity,
            term: fluxes[k] * affinity,
        });
    }
    let entropy = terms.iter().map(|t| t.term).sum();
    Ok(FundamentalSet {
        tree: tree.clone(),
        terms,
        entropy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveTerm {
    pub cycle: Cycle,
    pub weight: f64,
    pub affinity: f64,
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveDecomposition {
    pub terms: Vec<PositiveTerm>,
    /// Flux left on each edge (stored orientation) when no cycle remains.
    pub residual: Vec<f64>,
    pub entropy: f64,
}

/// Greedy peeling of the positive-flux orientation, always removing the
/// lexicographically smallest directed cycle.
pub fn kalpazidou(g: &LabeledGraph, populations: &[f64]) -> PositiveDecomposition {
    let j = steady_fluxes(g, populations);
    let jmax = j.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = (FLUX_TIE_TOL * jmax).max(FLUX_NOISE_TOL * max_one_way_flux(g, populations));
    // residual[e] >= 0 along direction dir[e] (true: lo -> hi)
    let mut residual: Vec<f64> = j
        .iter()
        .map(|x| if x.abs() < tol { 0.0 } else { x.abs() })
        .collect();
    let dir: Vec<bool> = j.iter().map(|&x| x > 0.0).collect();
    let head = |e: usize| {
        if dir[e] {
            g.edges()[e].hi
        } else {
            g.edges()[e].lo
        }
    };
    let tail = |e: usize| {
        if dir[e] {
            g.edges()[e].lo
        } else {
            g.edges()[e].hi
        }
    };

    let mut terms = Vec::new();
    for _ in 0..=g.u() {
        let out: Vec<Vec<(usize, usize)>> = (0..g.n())
            .map(|v| {
                let mut o: Vec<(usize, usize)> = g
                    .neighbors(v)
                    .iter()
                    .filter(|&&(_, e)| residual[e] > 0.0 && tail(e) == v)
                    .map(|&(w, e)| (w, e))
                    .collect();
                o.sort_unstable();
                o
            })
            .collect();
        let Some(path) = smallest_cycle(g.n(), &out) else {
            break;
        };
        let l = path.len();
        let edges: Vec<usize> = (0..l)
            .map(|k| {
                out[path[k]]
                    .iter()
                    .find(|&&(w, _)| w == path[(k + 1) % l])
                    .expect("cycle edge")
                    .1
            })
            .collect();
        let weight = edges
            .iter()
            .map(|&e| residual[e])
            .fold(f64::INFINITY, f64::min);
        for &e in &edges {
            residual[e] -= weight;
            if residual[e] < tol {
                residual[e] = 0.0;
            }
        }
        debug_assert!(edges.iter().all(|&e| head(e) != tail(e)));
        let cycle = Cycle::from_sequence(g, &path).expect("directed cycle of the graph");
        let affinity = affinities_from_gaps(g, &cycle).total;
        terms.push(PositiveTerm {
            cycle,
            weight,
            affinity,
            term: weight * affinity,
        });
    }
    let residual = residual
        .iter()
        .zip(&dir)
        .map(|(&r, &d)| if d { r } else { -r })
        .collect();
    let entropy = terms.iter().map(|t| t.term).sum();
    PositiveDecomposition {
        terms,
        residual,
        entropy,
    }
}

/// Lexicographically smallest directed simple cycle (length >= 3), as a
/// vertex sequence starting at its minimum vertex.
fn smallest_cycle(n: usize, out: &[Vec<(usize, usize)>]) -> Option<Vec<usize>> {
    for s in 0..n {
        let mut path = vec![s];
        let mut on_path = vec![false; n];
        on_path[s] = true;
        if !reaches(s, s, out, &on_path, s) {
            continue;
        }
        loop {
            let v = *path.last().expect("nonempty");
            let mut next = None;
            for &(w, _) in &out[v] {
                if w == s && path.len() >= 3 {
                    return Some(path);
                }
                if w > s && !on_path[w] && reaches(w, s, out, &on_path, s) {
                    next = Some(w);
                    break;
                }
            }
            match next {
                Some(w) => {
                    on_path[w] = true;
                    path.push(w);
                }
                None => break,
            }
        }
    }
    None
}

// Can `from` reach `s` through vertices > s that are not on the path?
// Two-vertex returns (from == s's neighbor via the same edge) are excluded by
// requiring cycles of length >= 3 at the caller, and a reverse edge with
// positive residual cannot coexist with its forward twin.
fn reaches(
    from: usize,
    s: usize,
    out: &[Vec<(usize, usize)>],
    on_path: &[bool],
    min: usize,
) -> bool {
    let mut seen = vec![false; out.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        for &(w, _) in &out[v] {
            if w == s && v != s {
                return true;
            }
            if w > min && !on_path[w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{maximal_trees, Caps};
    use crate::hill::decompose;
    use crate::models::{Model, FIG5};
    use crate::par::Execution;
    use crate::steady::steady_nullspace;

    #[test]
    fn fundamental_set_of_g4() {
        let g = FIG5
            .build(
                Model::G4 {
                    omega_c_prime: None,
                },
                1.0,
            )
            .unwrap();
        let p = steady_nullspace(&g).unwrap().populations;
        // tree {1-3, 2-3, 3-4}
        let tree = MaximalTree {
            edges: vec![1, 2, 3],
        };
        let fs = schnakenberg(&g, &tree, &p).unwrap();
        let chords: Vec<(usize, usize)> = fs
            .terms
            .iter()
            .map(|t| (g.edges()[t.chord].lo + 1, g.edges()[t.chord].hi + 1))
            .collect();
        assert_eq!(chords, vec![(1, 2), (2, 4)]);
        let ids: Vec<String> = fs.terms.iter().map(|t| t.cycle.circuit.id()).collect();
        assert_eq!(ids, vec!["1-2-3", "2-3-4"]);
        let hill = decompose(&g, &Caps::default(), Execution::Sequential).unwrap();
        for t in maximal_trees(&g, 100).unwrap() {
            let fs = schnakenberg(&g, &t, &p).unwrap();
            assert!((fs.entropy - hill.entropy).abs() < 1e-9 * hill.entropy);
        }
        assert!(schnakenberg(&g, &MaximalTree { edges: vec![0, 1] }, &p).is_err());
    }

    #[test]
    fn kalpazidou_on_g4_refrigerator() {
        let g = FIG5
            .build(
                Model::G4 {
                    omega_c_prime: None,
                },
                1.0,
            )
            .unwrap();
        let p = steady_nullspace(&g).unwrap().populations;
        let k = kalpazidou(&g, &p);
        let hill = decompose(&g, &Caps::default(), Execution::Sequential).unwrap();
        assert!((k.entropy - hill.entropy).abs() < 1e-9 * hill.entropy);
        assert!(k.terms.len() <= g.u());
        assert!(k.terms.iter().all(|t| t.weight >= 0.0 && t.term >= 0.0));
        let mut ids: Vec<String> = k.terms.iter().map(|t| t.cycle.circuit.id()).collect();
        ids.sort();
        assert_eq!(ids, vec!["1-2-3", "2-3-4"]);
        assert!(k.residual.iter().all(|&r| r == 0.0));
    }
}
