use std::fmt;

use serde::{Deserialize, Serialize};

use super::{LabeledGraph, OrientedEdge};
use crate::error::{Error, Result};

/// Undirected simple circuit in canonical form: the smallest vertex leads and
/// the second vertex is smaller than the last. `edges[k]` joins
/// `vertices[k]` and `vertices[(k + 1) % len]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Circuit {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Ord for Circuit {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.len(), &self.vertices).cmp(&(other.len(), &other.vertices))
    }
}

impl PartialOrd for Circuit {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Circuit {
    /// Builds the canonical circuit through `seq` (any rotation/direction).
    pub fn from_vertices(g: &LabeledGraph, seq: &[usize]) -> Result<Circuit> {
        Cycle::from_sequence(g, seq).map(|c| c.circuit)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }

    /// 1-based identifier such as `1-2-3`.
    pub fn id(&self) -> String {
        self.vertices
            .iter()
            .map(|v| (v + 1).to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    pub fn forward(&self) -> Cycle {
        Cycle {
            circuit: self.clone(),
            forward: true,
        }
    }

    fn from_canonical(g: &LabeledGraph, vertices: Vec<usize>) -> Circuit {
        let l = vertices.len();
        let edges = (0..l)
            .map(|k| {
                g.edge_between(vertices[k], vertices[(k + 1) % l])
                    .expect("adjacent")
            })
            .collect();
        Circuit { vertices, edges }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// A circuit with an orientation; `forward` follows the canonical vertex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cycle {
    pub circuit: Circuit,
    pub forward: bool,
}

impl Cycle {
    /// Orientation given by a vertex sequence (closing edge implied).
    pub fn from_sequence(g: &LabeledGraph, seq: &[usize]) -> Result<Cycle> {
        let l = seq.len();
        if l < 3 {
            return Err(Error::InvalidParams(
                "a circuit needs at least three vertices".into(),
            ));
        }
        let mut sorted = seq.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams("circuit repeats a vertex".into()));
        }
        if let Some(&v) = sorted.iter().find(|&&v| v >= g.n()) {
            return Err(Error::NoSuchVertex(v + 1));
        }
        for k in 0..l {
            if g.edge_between(seq[k], seq[(k + 1) % l]).is_none() {
                return Err(Error::InvalidParams(format!(
                    "levels {} and {} are not connected",
                    seq[k] + 1,
                    seq[(k + 1) % l] + 1
                )));
            }
        }
        let start = (0..l).min_by_key(|&k| seq[k]).expect("nonempty");
        let fwd: Vec<usize> = (0..l).map(|k| seq[(start + k) % l]).collect();
        let forward = fwd[1] < fwd[l - 1];
        let canon = if forward {
            fwd
        } else {
            std::iter::once(fwd[0])
                .chain(fwd[1..].iter().rev().copied())
                .collect()
        };
        Ok(Cycle {
            circuit: Circuit::from_canonical(g, canon),
            forward,
        })
    }

    pub fn reversed(&self) -> Cycle {
        Cycle {
            circuit: self.circuit.clone(),
            forward: !self.forward,
        }
    }

    /// Vertices in traversal order, starting from the smallest.
    pub fn vertex_sequence(&self) -> Vec<usize> {
        let v = &self.circuit.vertices;
        if self.forward {
            v.clone()
        } else {
            std::iter::once(v[0])
                .chain(v[1..].iter().rev().copied())
                .collect()
        }
    }

    pub fn oriented_edges(&self, g: &LabeledGraph) -> Vec<OrientedEdge> {
        let seq = self.vertex_sequence();
        let l = seq.len();
        (0..l)
            .map(|k| g.oriented(seq[k], seq[(k + 1) % l]).expect("circuit edge"))
            .collect()
    }

    /// 1-based identifier such as `1>3>2`.
    pub fn id(&self) -> String {
        self.vertex_sequence()
            .iter()
            .map(|v| (v + 1).to_string())
            .collect::<Vec<_>>()
            .join(">")
    }
}

/// Johnson's algorithm on the symmetric digraph; calls `emit` once per
/// undirected circuit (canonical vertex order). Stops early when `emit`
/// returns false.
fn johnson(g: &LabeledGraph, mut emit: impl FnMut(&[usize]) -> bool) {
    let n = g.n();
    let mut blocked = vec![false; n];
    let mut bset: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp = vec![false; n];

    fn unblock(u: usize, blocked: &mut [bool], bset: &mut [Vec<usize>]) {
        let mut work = vec![u];
        while let Some(x) = work.pop() {
            if blocked[x] {
                blocked[x] = false;
                work.append(&mut bset[x]);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn circuit(
        g: &LabeledGraph,
        v: usize,
        s: usize,
        comp: &[bool],
        blocked: &mut [bool],
        bset: &mut [Vec<usize>],
        stack: &mut Vec<usize>,
        emit: &mut dyn FnMut(&[usize]) -> bool,
        stop: &mut bool,
    ) -> bool {
        let mut found = false;
        stack.push(v);
        blocked[v] = true;
        for &(w, _) in g.neighbors(v) {
            if *stop {
                break;
            }
            if !comp[w] {
                continue;
            }
            if w == s {
                let l = stack.len();
                if l >= 3 && stack[1] < stack[l - 1] && !emit(stack) {
                    *stop = true;
                }
                found = true;
            } else if !blocked[w] && circuit(g, w, s, comp, blocked, bset, stack, emit, stop) {
                found = true;
            }
        }
        if found {
            unblock(v, blocked, bset);
        } else {
            for &(w, _) in g.neighbors(v) {
                if comp[w] && !bset[w].contains(&v) {
                    bset[w].push(v);
                }
            }
        }
        stack.pop();
        found
    }

    let mut stop = false;
    for s in 0..n {
        // component of s in the subgraph induced by vertices >= s
        comp.iter_mut().for_each(|c| *c = false);
        comp[s] = true;
        let mut todo = vec![s];
        while let Some(v) = todo.pop() {
            for &(w, _) in g.neighbors(v) {
                if w > s && !comp[w] {
                    comp[w] = true;
                    todo.push(w);
                }
            }
        }
        for v in 0..n {
            if comp[v] {
                blocked[v] = false;
                bset[v].clear();
            }
        }
        circuit(
            g,
            s,
            s,
            &comp,
            &mut blocked,
            &mut bset,
            &mut stack,
            &mut emit,
            &mut stop,
        );
        if stop {
            return;
        }
    }
}

/// All simple circuits, canonical, sorted by (length, vertex sequence).
pub fn enumerate_circuits(g: &LabeledGraph, cap: usize) -> Result<Vec<Circuit>> {
    let mut out = Vec::new();
    let mut over = false;
    johnson(g, |seq| {
        if out.len() == cap {
            over = true;
            return false;
        }
        out.push(Circuit::from_canonical(g, seq.to_vec()));
        true
    });
    if over {
        return Err(Error::CapExceeded {
            what: "circuit",
            cap,
        });
    }
    out.sort_unstable();
    Ok(out)
}

/// Number of simple circuits without materializing them; fails above `limit`.
pub fn count_circuits(g: &LabeledGraph, limit: usize) -> Result<usize> {
    let mut count = 0usize;
    johnson(g, |_| {
        count += 1;
        count <= limit
    });
    if count > limit {
        return Err(Error::CapExceeded {
            what: "circuit",
            cap: limit,
        });
    }
    Ok(count)
}

/// Circuits of exactly `len` edges, canonical and sorted.
pub fn circuits_of_length(g: &LabeledGraph, len: usize, cap: usize) -> Result<Vec<Circuit>> {
    fn extend(
        g: &LabeledGraph,
        s: usize,
        len: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        found: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        let v = *path.last().expect("nonempty path");
        for &(w, _) in g.neighbors(v) {
            if path.len() == len {
                if w == s && path[1] < path[len - 1] {
                    if found.len() == cap {
                        return false;
                    }
                    found.push(path.clone());
                }
                continue;
            }
            if w > s && !on_path[w] {
                on_path[w] = true;
                path.push(w);
                let ok = extend(g, s, len, path, on_path, found, cap);
                path.pop();
                on_path[w] = false;
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    if len < 3 {
        return Ok(Vec::new());
    }
    let mut found = Vec::new();
    let mut on_path = vec![false; g.n()];
    for s in 0..g.n() {
        let mut path = vec![s];
        on_path[s] = true;
        let ok = extend(g, s, len, &mut path, &mut on_path, &mut found, cap);
        on_path[s] = false;
        if !ok {
            return Err(Error::CapExceeded {
                what: "circuit",
                cap,
            });
        }
    }
    let mut out: Vec<Circuit> = found
        .into_iter()
        .map(|v| Circuit::from_canonical(g, v))
        .collect();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Model, FIG5};

    #[test]
    fn g4_has_three_circuits() {
        let g = FIG5
            .build(
                Model::G4 {
                    omega_c_prime: None,
                },
                1.0,
            )
            .unwrap();
        let cs = enumerate_circuits(&g, 100).unwrap();
        let ids: Vec<String> = cs.iter().map(|c| c.id()).collect();
        assert_eq!(ids, vec!["1-2-3", "2-3-4", "1-2-4-3"]);
        assert_eq!(count_circuits(&g, 100).unwrap(), 3);
        assert_eq!(circuits_of_length(&g, 3, 100).unwrap(), cs[..2].to_vec());
    }

    #[test]
    fn cycle_orientation() {
        let g = FIG5.build(Model::C3Cwh, 1.0).unwrap();
        let c = Cycle::from_sequence(&g, &[2, 1, 0]).unwrap();
        assert!(!c.forward);
        assert_eq!(c.circuit.vertices, vec![0, 1, 2]);
        assert_eq!(c.vertex_sequence(), vec![0, 2, 1]);
        assert_eq!(c.reversed().vertex_sequence(), vec![0, 1, 2]);
        let e = c.oriented_edges(&g);
        assert_eq!(e.len(), 3);
        assert_eq!((e[0].from(&g), e[0].to(&g)), (0, 2));
        assert!(Cycle::from_sequence(&g, &[0, 1]).is_err());
    }

    #[test]
    fn caps_are_enforced() {
        let g = FIG5.build(Model::G4B { b: 4 }, 1.0).unwrap();
        let n = count_circuits(&g, usize::MAX).unwrap();
        assert!(n > 10);
        assert!(matches!(
            enumerate_circuits(&g, 10),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            count_circuits(&g, 10),
            Err(Error::CapExceeded { .. })
        ));
    }
}
