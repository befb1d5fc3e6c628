//! Shared oracles and generators for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use hill_circuits::graph::{
    Edge, EdgeSpec, GraphSpec, LabeledGraph, Level, RateSource, ValidationOptions,
};
use hill_circuits::Bath;
use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn approx(x: &BigRational) -> f64 {
    x.to_f64().expect("representable")
}

/// Populations from `W p = 0`, `Σ p = 1` with the last balance row replaced
/// by the normalization, solved exactly over the rationals from the f64 rates.
pub fn dense_populations(g: &LabeledGraph) -> Vec<BigRational> {
    let n = g.n();
    let mut w = vec![vec![BigRational::zero(); n + 1]; n];
    for e in g.edges() {
        let (up, down) = (exact(e.rate_up), exact(e.rate_down));
        w[e.hi][e.lo] += &up;
        w[e.lo][e.lo] -= &up;
        w[e.lo][e.hi] += &down;
        w[e.hi][e.hi] -= &down;
    }
    for j in 0..=n {
        w[n - 1][j] = BigRational::one();
    }
    for k in 0..n {
        let piv = (k..n)
            .find(|&r| !w[r][k].is_zero())
            .expect("nonsingular balance system");
        w.swap(k, piv);
        for r in k + 1..n {
            if w[r][k].is_zero() {
                continue;
            }
            let f = &w[r][k] / &w[k][k];
            for c in k..=n {
                let t = &f * &w[k][c];
                w[r][c] -= t;
            }
        }
    }
    let mut p = vec![BigRational::zero(); n];
    for k in (0..n).rev() {
        let mut acc = w[k][n].clone();
        for c in k + 1..n {
            acc -= &w[k][c] * &p[c];
        }
        p[k] = acc / &w[k][k];
    }
    p
}

pub fn to_f64(p: &[BigRational]) -> Vec<f64> {
    p.iter().map(approx).collect()
}

fn edge_terms(e: &Edge, p: &[BigRational]) -> (BigRational, BigRational) {
    (&p[e.lo] * exact(e.rate_up), &p[e.hi] * exact(e.rate_down))
}

/// Heat per bath: Σ over the bath's edges of `J_e · (E_hi − E_lo)`.
pub fn direct_heat(g: &LabeledGraph, p: &[BigRational]) -> Vec<f64> {
    let mut q = vec![BigRational::zero(); g.baths().len()];
    for e in g.edges() {
        let (a, b) = edge_terms(e, p);
        q[e.bath] += (a - b) * (exact(g.energy(e.hi)) - exact(g.energy(e.lo)));
    }
    to_f64(&q)
}

/// `Σ_e J_e ln(W₊ p_lo / W₋ p_hi)`.
pub fn direct_entropy(g: &LabeledGraph, p: &[BigRational]) -> f64 {
    g.edges()
        .iter()
        .map(|e| {
            let (a, b) = edge_terms(e, p);
            let j = &a - &b;
            if j.is_zero() {
                0.0
            } else {
                approx(&j) * approx(&(&j / &b)).ln_1p()
            }
        })
        .sum()
}

/// All simple circuits (length ≥ 3) by exhaustive DFS, as canonical vertex lists.
pub fn brute_circuits(g: &LabeledGraph) -> BTreeSet<Vec<usize>> {
    fn dfs(g: &LabeledGraph, start: usize, path: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        let v = *path.last().unwrap();
        for &(w, _) in g.neighbors(v) {
            if w == start && path.len() >= 3 && path[1] < path[path.len() - 1] {
                out.insert(path.clone());
            } else if w > start && !path.contains(&w) {
                path.push(w);
                dfs(g, start, path, out);
                path.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    for s in 0..g.n() {
        dfs(g, s, &mut vec![s], &mut out);
    }
    out
}

/// Number of spanning trees by testing every (N−1)-subset of edges.
pub fn brute_tree_count(g: &LabeledGraph) -> usize {
    let (n, u) = (g.n(), g.u());
    let mut count = 0;
    for mask in 0u32..(1 << u) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let mut ok = true;
        for (k, e) in g.edges().iter().enumerate() {
            if mask & (1 << k) != 0 {
                let (a, b) = (find(&mut parent, e.lo), find(&mut parent, e.hi));
                if a == b {
                    ok = false;
                    break;
                }
                parent[a] = b;
            }
        }
        count += ok as usize;
    }
    count
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn random_baths<R: Rng>(rng: &mut R) -> Vec<Bath> {
    let tc = rng.random_range(0.5..2.0);
    let th = tc * rng.random_range(1.1..2.0);
    let tw = th * rng.random_range(1.1..2.0);
    let d = |r: &mut R| if r.random_bool(0.5) { 1 } else { 3 };
    vec![
        Bath::bosonic("c", tc, d(rng), rng.random_range(0.5..2.0)),
        Bath::bosonic("w", tw, d(rng), rng.random_range(0.5..2.0)),
        Bath::bosonic("h", th, d(rng), rng.random_range(0.5..2.0)),
    ]
}

/// Connected three-bath graph with `3..=n_max` levels at random distinct
/// energies and random bath assignments; degree ≤ 6.
pub fn random_graph<R: Rng>(rng: &mut R, n_max: usize) -> LabeledGraph {
    loop {
        let n = rng.random_range(3..=n_max);
        let mut energies: Vec<f64> = Vec::new();
        while energies.len() < n {
            let e: f64 = rng.random_range(0.0..3.0);
            if energies.iter().all(|x| (x - e).abs() > 0.05) {
                energies.push(e);
            }
        }
        let mut pairs = BTreeSet::new();
        for v in 1..n {
            pairs.insert((rng.random_range(0..v), v));
        }
        let extra = rng.random_range(0..=n);
        for _ in 0..extra {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                pairs.insert((a.min(b), a.max(b)));
            }
        }
        let mut degree = vec![0; n];
        for &(a, b) in &pairs {
            degree[a] += 1;
            degree[b] += 1;
        }
        if degree.iter().any(|&d| d > 6) {
            continue;
        }
        let edges = pairs
            .iter()
            .map(|&(i, j)| EdgeSpec {
                i,
                j,
                bath: rng.random_range(0..3),
                rates: RateSource::Amplitude(rng.random_range(0.5..2.0)),
            })
            .collect();
        let spec = GraphSpec {
            levels: energies
                .into_iter()
                .map(|energy| Level {
                    energy,
                    label: None,
                })
                .collect(),
            baths: random_baths(rng),
            edges,
        };
        match LabeledGraph::build(&spec, &ValidationOptions::default()) {
            Ok((g, _)) => return g,
            Err(_) => continue,
        }
    }
}

/// Random connected subgraph of the `(n_h, n_c)` lattice with `E = n_h ω_h + n_c ω_c`:
/// c edges along `n_c`, h edges along `n_h`, w edges on the diagonals.
pub fn random_lattice_graph<R: Rng>(rng: &mut R) -> LabeledGraph {
    let (wc, wh) = (rng.random_range(0.2..1.0), rng.random_range(1.2..3.0));
    let side = rng.random_range(2..=4usize);
    let n = 2 * side;
    let idx = |nh: usize, nc: usize| nh * side + nc;
    let mut all = Vec::new();
    for nh in 0..2 {
        for nc in 0..side {
            if nc + 1 < side {
                all.push((idx(nh, nc), idx(nh, nc + 1), 0));
            }
            if nh == 0 {
                all.push((idx(0, nc), idx(1, nc), 2));
                if nc + 1 < side {
                    all.push((idx(0, nc + 1), idx(1, nc), 1));
                }
            }
        }
    }
    let connected = |edges: &[(usize, usize, usize)]| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b, _) in edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    };
    let mut edges = all.clone();
    for _ in 0..rng.random_range(0..=all.len() / 2) {
        let k = rng.random_range(0..edges.len());
        let mut trial = edges.clone();
        trial.remove(k);
        if connected(&trial) {
            edges = trial;
        }
    }
    let levels = (0..n)
        .map(|v| Level {
            energy: (v / side) as f64 * wh + (v % side) as f64 * wc,
            label: None,
        })
        .collect();
    let spec = GraphSpec {
        levels,
        baths: random_baths(rng),
        edges: edges
            .into_iter()
            .map(|(i, j, bath)| EdgeSpec {
                i,
                j,
                bath,
                rates: RateSource::Amplitude(rng.random_range(0.5..2.0)),
            })
            .collect(),
    };
    LabeledGraph::build(&spec, &ValidationOptions::default())
        .expect("lattice graphs are valid")
        .0
}

/// Preset models of the consistency sweep, with the preset each is run on.
pub fn sweep_models() -> Vec<(hill_circuits::models::Preset, hill_circuits::Model)> {
    use hill_circuits::models::{FIG4, FIG5, FIG6};
    use hill_circuits::Model;
    let mut out = vec![
        (
            FIG5,
            Model::G4 {
                omega_c_prime: None,
            },
        ),
        (FIG4, Model::C3Cwh),
        (FIG4, Model::C3Wch),
    ];
    out.extend((0..=3).map(|m_h| (FIG4, Model::C3p2mh { m_h })));
    out.extend((0..=3).map(|n_plus| (FIG4, Model::C3p3np { n_plus })));
    out.extend((1..=6).map(|b| (FIG5, Model::G3B { b })));
    out.extend([1, 4, 9].map(|b| (FIG5, Model::G4B { b })));
    out.extend((1..=8).map(|n_max| (FIG6, Model::Gho { n_max })));
    out
}

/// G4 with random energies and explicit random detailed-balance rates.
pub fn random_g4<R: Rng>(rng: &mut R) -> (LabeledGraph, [f64; 4], [f64; 3]) {
    let mut e = [0.0; 4];
    for k in 1..4 {
        e[k] = e[k - 1] + rng.random_range(0.2..1.5);
    }
    let temps = [
        rng.random_range(0.5..2.0),
        rng.random_range(2.0..4.0),
        rng.random_range(1.0..3.0),
    ];
    let baths: Vec<Bath> = ["c", "w", "h"]
        .iter()
        .zip(temps)
        .map(|(l, t)| Bath::bosonic(l, t, 1, 1.0))
        .collect();
    // (i, j, bath) with 0-based vertices, bath order c, w, h
    let edges = [(0, 1, 0), (2, 3, 0), (1, 2, 1), (0, 2, 2), (1, 3, 2)];
    let spec = GraphSpec {
        levels: e
            .iter()
            .map(|&energy| Level {
                energy,
                label: None,
            })
            .collect(),
        baths,
        edges: edges
            .iter()
            .map(|&(i, j, b)| {
                let up = rng.random_range(0.1..3.0);
                let down = up * ((e[j] - e[i]) / temps[b]).exp();
                EdgeSpec {
                    i,
                    j,
                    bath: b,
                    rates: RateSource::Explicit { up, down },
                }
            })
            .collect(),
    };
    let lax = ValidationOptions {
        strict_pcd: false,
        ..Default::default()
    };
    (LabeledGraph::build(&spec, &lax).unwrap().0, e, temps)
}

/// Closed forms for the four-state machine with vertices 1..4 and circuits
/// C1 = 1-2-3, C3 = 1-2-4-3.
pub struct G4ClosedForms {
    pub i1: f64,
    /// Forest sum of C1: `W₂₄ʰ + W₃₄ᶜ` (rates out of state 4).
    pub forest1: f64,
    pub i3: f64,
    pub x1: [f64; 3],
    pub x3: [f64; 3],
}

pub fn g4_closed_forms(g: &LabeledGraph, e: &[f64; 4], temps: &[f64; 3]) -> G4ClosedForms {
    // w(i, j): rate from state i to state j (1-based)
    let w = |i: usize, j: usize| {
        let (a, b) = (i - 1, j - 1);
        let edge = &g.edges()[g.edge_between(a, b).unwrap()];
        if edge.lo == a {
            edge.rate_up
        } else {
            edge.rate_down
        }
    };
    let mut m = DMatrix::<f64>::zeros(4, 4);
    for e in g.edges() {
        m[(e.hi, e.lo)] += e.rate_up;
        m[(e.lo, e.lo)] -= e.rate_up;
        m[(e.lo, e.hi)] += e.rate_down;
        m[(e.hi, e.hi)] -= e.rate_down;
    }
    m.row_mut(0).fill(1.0);
    let d = m.determinant().abs();
    let forest1 = w(4, 2) + w(4, 3);
    let [tc, tw, th] = *temps;
    G4ClosedForms {
        i1: forest1 * (w(1, 2) * w(2, 3) * w(3, 1) - w(2, 1) * w(3, 2) * w(1, 3)) / d,
        forest1,
        i3: (w(1, 2) * w(4, 3) * w(2, 4) * w(3, 1) - w(2, 1) * w(3, 4) * w(4, 2) * w(1, 3)) / d,
        x1: [(e[0] - e[1]) / tc, (e[1] - e[2]) / tw, (e[2] - e[0]) / th],
        x3: [
            ((e[3] - e[2]) - (e[1] - e[0])) / tc,
            0.0,
            ((e[2] - e[0]) - (e[3] - e[1])) / th,
        ],
    }
}
