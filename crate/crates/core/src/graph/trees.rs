use serde::{Deserialize, Serialize};

use super::{laplacian, Circuit, LabeledGraph, OrientedEdge};
use crate::error::{Error, Result};
use crate::linalg::{log_det, principal_submatrix};

/// Spanning tree given by its (sorted) edge indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MaximalTree {
    pub edges: Vec<usize>,
}

struct RollbackDsu {
    parent: Vec<usize>,
    size: Vec<usize>,
    log: Vec<usize>,
}

impl RollbackDsu {
    fn new(n: usize) -> Self {
        RollbackDsu {
            parent: (0..n).collect(),
            size: vec![1; n],
            log: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.log.push(b);
        true
    }

    fn rollback(&mut self) {
        let b = self.log.pop().expect("rollback without union");
        let a = self.parent[b];
        self.size[a] -= self.size[b];
        self.parent[b] = b;
    }
}

/// All spanning trees of a multigraph on `n` vertices, as index lists into
/// `edges`. Fails once more than `cap` trees are found.
pub fn spanning_trees(n: usize, edges: &[(usize, usize)], cap: usize) -> Result<Vec<Vec<usize>>> {
    struct Search<'a> {
        n: usize,
        edges: &'a [(usize, usize)],
        cap: usize,
        dsu: RollbackDsu,
        chosen: Vec<usize>,
        out: Vec<Vec<usize>>,
    }

    impl Search<'_> {
        // can the current partial forest still be completed using edges[k..]?
        fn completable(&self, k: usize) -> bool {
            let mut roots: Vec<usize> = (0..self.n).map(|v| self.dsu.find(v)).collect();
            let mut comps = roots.iter().enumerate().filter(|&(v, &r)| v == r).count();
            fn find(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            for &(a, b) in &self.edges[k..] {
                let (ra, rb) = (find(&mut roots, a), find(&mut roots, b));
                if ra != rb {
                    roots[rb] = ra;
                    comps -= 1;
                    if comps == 1 {
                        return true;
                    }
                }
            }
            comps == 1
        }

        fn run(&mut self, k: usize) -> Result<()> {
            if self.chosen.len() + 1 == self.n {
                if self.out.len() == self.cap {
                    return Err(Error::CapExceeded {
                        what: "spanning tree",
                        cap: self.cap,
                    });
                }
                self.out.push(self.chosen.clone());
                return Ok(());
            }
            if k == self.edges.len() || self.edges.len() - k < self.n - 1 - self.chosen.len() {
                return Ok(());
            }
            let (a, b) = self.edges[k];
            if self.dsu.union(a, b) {
                self.chosen.push(k);
                let r = self.run(k + 1);
                self.chosen.pop();
                self.dsu.rollback();
                r?;
            }
            if self.completable(k + 1) {
                self.run(k + 1)?;
            }
            Ok(())
        }
    }

    if n == 0 {
        return Ok(Vec::new());
    }
    let mut s = Search {
        n,
        edges,
        cap,
        dsu: RollbackDsu::new(n),
        chosen: Vec::new(),
        out: Vec::new(),
    };
    if s.completable(0) {
        s.run(0)?;
    }
    Ok(s.out)
}

/// Number of spanning trees from the unweighted Laplacian (matrix-tree theorem).
pub fn kirchhoff_tree_count(g: &LabeledGraph) -> f64 {
    if g.n() <= 1 {
        return 1.0;
    }
    let keep: Vec<usize> = (1..g.n()).collect();
    log_det(&principal_submatrix(&laplacian(g), &keep)).value()
}

/// Every maximal tree of `g` exactly once.
pub fn maximal_trees(g: &LabeledGraph, cap: usize) -> Result<Vec<MaximalTree>> {
    let expected = kirchhoff_tree_count(g);
    if expected > cap as f64 + 0.5 {
        return Err(Error::CapExceeded {
            what: "maximal tree",
            cap,
        });
    }
    let pairs: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.lo, e.hi)).collect();
    Ok(spanning_trees(g.n(), &pairs, cap)?
        .into_iter()
        .map(|edges| MaximalTree { edges })
        .collect())
}

/// Directs every edge of `tree` along its tree path toward `root`.
pub fn orient_tree_towards(
    g: &LabeledGraph,
    tree: &MaximalTree,
    root: usize,
) -> Result<Vec<OrientedEdge>> {
    if root >= g.n() {
        return Err(Error::NoSuchVertex(root + 1));
    }
    let mut adj = vec![Vec::new(); g.n()];
    for &e in &tree.edges {
        let edge = &g.edges()[e];
        adj[edge.lo].push((edge.hi, e));
        adj[edge.hi].push((edge.lo, e));
    }
    let mut out = Vec::with_capacity(tree.edges.len());
    let mut seen = vec![false; g.n()];
    seen[root] = true;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                // w -> v
                out.push(OrientedEdge {
                    edge: e,
                    up: g.edges()[e].lo == w,
                });
                queue.push_back(w);
            }
        }
    }
    if out.len() != tree.edges.len() {
        return Err(Error::InvalidParams(
            "edge set is not a tree containing the root".into(),
        ));
    }
    out.sort_unstable();
    Ok(out)
}

/// Forests of a circuit: spanning forests of the off-circuit vertices with
/// each component rooted on the circuit, edges directed toward the circuit.
pub fn forests_of_circuit(
    g: &LabeledGraph,
    c: &Circuit,
    cap: usize,
) -> Result<Vec<Vec<OrientedEdge>>> {
    // contract the circuit into vertex 0
    let mut map = vec![usize::MAX; g.n()];
    for &v in &c.vertices {
        map[v] = 0;
    }
    let mut next = 1;
    for m in map.iter_mut() {
        if *m == usize::MAX {
            *m = next;
            next += 1;
        }
    }
    let mut ids = Vec::new();
    let mut pairs = Vec::new();
    for (k, e) in g.edges().iter().enumerate() {
        let (a, b) = (map[e.lo], map[e.hi]);
        if a != 0 || b != 0 {
            ids.push(k);
            pairs.push((a, b));
        }
    }
    let trees = spanning_trees(next, &pairs, cap)?;
    let mut out = Vec::with_capacity(trees.len());
    for t in trees {
        let mut adj = vec![Vec::new(); next];
        for &k in &t {
            let (a, b) = pairs[k];
            adj[a].push((b, k));
            adj[b].push((a, k));
        }
        let mut seen = vec![false; next];
        seen[0] = true;
        let mut stack = vec![0];
        let mut forest = Vec::with_capacity(t.len());
        while let Some(v) = stack.pop() {
            for &(w, k) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    let e = &g.edges()[ids[k]];
                    // the child endpoint is the one contracted to w
                    forest.push(OrientedEdge {
                        edge: ids[k],
                        up: map[e.lo] == w,
                    });
                    stack.push(w);
                }
            }
        }
        forest.sort_unstable();
        out.push(forest);
    }
    Ok(out)
}

/// Σ over forests of the product of their oriented rates.
pub fn forest_weight_sum(g: &LabeledGraph, forests: &[Vec<OrientedEdge>]) -> f64 {
    forests
        .iter()
        .map(|f| f.iter().map(|e| e.rate(g)).product::<f64>())
        .sum()
}
