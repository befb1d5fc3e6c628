//! Labeled graph representation of a master equation and the combinatorial
//! machinery on top of it: maximal trees, circuits, forests, adjacency.

mod adjacency;
mod circuits;
mod trees;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Bath, Statistics};

pub use adjacency::{
    adjacency_matrix, count_triangles, degree_adjacency, laplacian, scaled_adjacency,
    AdjacencyMatrices,
};
pub use circuits::{circuits_of_length, count_circuits, enumerate_circuits, Circuit, Cycle};
pub use trees::{
    forest_weight_sum, forests_of_circuit, kirchhoff_tree_count, maximal_trees,
    orient_tree_towards, spanning_trees, MaximalTree,
};

/// Enumeration caps; determinant-based routes are never capped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_trees: usize,
    pub max_circuits: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_trees: 1_000_000,
            max_circuits: 100_000,
        }
    }
}

/// Rates below this are flushed to zero.
pub const RATE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// An undirected edge stored low-energy endpoint first.
///
/// `rate_up` is the absorption rate `lo -> hi`, `rate_down` the emission rate
/// `hi -> lo`; `scale` is the rate multiplier relative to unit coupling
/// amplitude (`|c|^2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub lo: usize,
    pub hi: usize,
    pub bath: usize,
    pub rate_up: f64,
    pub rate_down: f64,
    pub gap: f64,
    pub scale: f64,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.lo {
            self.hi
        } else {
            self.lo
        }
    }
}

/// An edge with a direction: `up == true` means `lo -> hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrientedEdge {
    pub edge: usize,
    pub up: bool,
}

impl OrientedEdge {
    pub fn reversed(self) -> Self {
        OrientedEdge {
            edge: self.edge,
            up: !self.up,
        }
    }

    pub fn from(self, g: &LabeledGraph) -> usize {
        let e = &g.edges[self.edge];
        if self.up {
            e.lo
        } else {
            e.hi
        }
    }

    pub fn to(self, g: &LabeledGraph) -> usize {
        let e = &g.edges[self.edge];
        if self.up {
            e.hi
        } else {
            e.lo
        }
    }

    /// Transition rate along this direction.
    pub fn rate(self, g: &LabeledGraph) -> f64 {
        let e = &g.edges[self.edge];
        if self.up {
            e.rate_up
        } else {
            e.rate_down
        }
    }

    /// Energy taken from the edge's bath when the transition is performed.
    pub fn energy_absorbed(self, g: &LabeledGraph) -> f64 {
        let e = &g.edges[self.edge];
        if self.up {
            e.gap
        } else {
            -e.gap
        }
    }
}

/// How the rates of an edge are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSource {
    /// Derived from the bath spectral function, scaled by `|amplitude|^2`.
    Amplitude(f64),
    /// Explicit `lo -> hi` and `hi -> lo` rates.
    Explicit { up: f64, down: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub i: usize,
    pub j: usize,
    pub bath: usize,
    pub rates: RateSource,
}

/// Unvalidated graph description (0-based vertex and bath indices).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphSpec {
    pub levels: Vec<Level>,
    pub baths: Vec<Bath>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    BadLevel,
    BadBath,
    BadVertex,
    SelfLoop,
    DegenerateEdge,
    DuplicateEdge,
    BadRate,
    DetailedBalance,
    Disconnected,
    Pcd,
    Degree,
    ChemicalPotential,
    TemperatureOrder,
    NonUniformGap,
    EqualColdWorkGap,
    Underflow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub severity: Severity,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{:?}]: {}", self.kind, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// When false, PCD and vertex-degree violations are reported as warnings.
    pub strict_pcd: bool,
    /// Relative tolerance on `rate_down / rate_up = exp(gap / T)`.
    pub balance_tol: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            strict_pcd: true,
            balance_tol: 1e-12,
        }
    }
}

/// Which bath plays the cold, work and hot role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BathRoles {
    pub cold: usize,
    pub work: usize,
    pub hot: usize,
}

/// Validated graph of a master equation. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    levels: Vec<Level>,
    baths: Vec<Bath>,
    edges: Vec<Edge>,
    // (neighbor, edge) sorted by neighbor
    adj: Vec<Vec<(usize, usize)>>,
    pairs: BTreeMap<(usize, usize), usize>,
}

impl LabeledGraph {
    /// Validates and builds a graph; returns it with any warnings.
    pub fn build(
        spec: &GraphSpec,
        opts: &ValidationOptions,
    ) -> Result<(LabeledGraph, Vec<Violation>)> {
        let (graph, violations) = assemble(spec, opts);
        if violations.iter().any(|v| v.severity == Severity::Error) {
            let errors = violations
                .into_iter()
                .filter(|v| v.severity == Severity::Error)
                .collect();
            return Err(Error::InvalidGraph(errors));
        }
        Ok((graph.expect("graph assembled when no errors"), violations))
    }

    /// Convenience: build with default options, discarding warnings.
    pub fn from_spec(spec: &GraphSpec) -> Result<LabeledGraph> {
        Self::build(spec, &ValidationOptions::default()).map(|(g, _)| g)
    }

    pub fn n(&self) -> usize {
        self.levels.len()
    }

    pub fn u(&self) -> usize {
        self.edges.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn energy(&self, v: usize) -> f64 {
        self.levels[v].energy
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn baths(&self) -> &[Bath] {
        &self.baths
    }

    pub fn temperature(&self, bath: usize) -> f64 {
        self.baths[bath].temperature
    }

    pub fn bath_index(&self, label: &str) -> Option<usize> {
        self.baths.iter().position(|b| b.label == label)
    }

    /// `(neighbor, edge)` pairs of `v`, sorted by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.pairs.get(&(a.min(b), a.max(b))).copied()
    }

    /// Oriented edge `from -> to`, if the vertices are adjacent.
    pub fn oriented(&self, from: usize, to: usize) -> Option<OrientedEdge> {
        self.edge_between(from, to).map(|e| OrientedEdge {
            edge: e,
            up: self.edges[e].lo == from,
        })
    }

    /// Cold/work/hot assignment: by label when the baths are named `c`, `w`
    /// and `h`, otherwise by temperature when there are exactly three baths.
    pub fn roles(&self) -> Option<BathRoles> {
        if let (Some(c), Some(w), Some(h)) = (
            self.bath_index("c"),
            self.bath_index("w"),
            self.bath_index("h"),
        ) {
            return Some(BathRoles {
                cold: c,
                work: w,
                hot: h,
            });
        }
        if self.baths.len() == 3 {
            let mut idx = [0usize, 1, 2];
            idx.sort_by(|&a, &b| {
                self.baths[a]
                    .temperature
                    .total_cmp(&self.baths[b].temperature)
            });
            return Some(BathRoles {
                cold: idx[0],
                hot: idx[1],
                work: idx[2],
            });
        }
        None
    }

    /// Same graph with every rate multiplied by `sigma`.
    pub fn scaled(&self, sigma: f64) -> LabeledGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.rate_up *= sigma;
            e.rate_down *= sigma;
        }
        g
    }

    /// Largest rate in the graph (0 for an edgeless graph).
    pub fn max_rate(&self) -> f64 {
        self.edges
            .iter()
            .fold(0.0f64, |m, e| m.max(e.rate_up).max(e.rate_down))
    }

    /// Subgraph made of the listed edges and the vertices they touch.
    /// Returns the graph and the map from new to old vertex indices.
    pub fn edge_subgraph(&self, edge_ids: &[usize]) -> (LabeledGraph, Vec<usize>) {
        let mut verts: Vec<usize> = edge_ids
            .iter()
            .flat_map(|&e| [self.edges[e].lo, self.edges[e].hi])
            .collect();
        verts.sort_unstable();
        verts.dedup();
        let index = |v: usize| verts.binary_search(&v).expect("vertex of a listed edge");
        let levels = verts.iter().map(|&v| self.levels[v].clone()).collect();
        let edges = edge_ids
            .iter()
            .map(|&e| {
                let mut ne = self.edges[e].clone();
                ne.lo = index(ne.lo);
                ne.hi = index(ne.hi);
                ne
            })
            .collect();
        (
            LabeledGraph::from_parts(levels, self.baths.clone(), edges),
            verts,
        )
    }

    fn from_parts(levels: Vec<Level>, baths: Vec<Bath>, edges: Vec<Edge>) -> LabeledGraph {
        let mut adj = vec![Vec::new(); levels.len()];
        let mut pairs = BTreeMap::new();
        for (k, e) in edges.iter().enumerate() {
            adj[e.lo].push((e.hi, k));
            adj[e.hi].push((e.lo, k));
            pairs.insert((e.lo.min(e.hi), e.lo.max(e.hi)), k);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        LabeledGraph {
            levels,
            baths,
            edges,
            adj,
            pairs,
        }
    }

    /// Back to an explicit-rate spec (used for file export).
    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            levels: self.levels.clone(),
            baths: self.baths.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    i: e.lo,
                    j: e.hi,
                    bath: e.bath,
                    rates: RateSource::Explicit {
                        up: e.rate_up,
                        down: e.rate_down,
                    },
                })
                .collect(),
        }
    }
}

/// Full list of violations of a spec, without building.
pub fn validate(spec: &GraphSpec, opts: &ValidationOptions) -> Vec<Violation> {
    assemble(spec, opts).1
}

fn err(kind: ViolationKind, message: String) -> Violation {
    Violation {
        severity: Severity::Error,
        kind,
        message,
    }
}

fn warn(kind: ViolationKind, message: String) -> Violation {
    Violation {
        severity: Severity::Warning,
        kind,
        message,
    }
}

fn assemble(spec: &GraphSpec, opts: &ValidationOptions) -> (Option<LabeledGraph>, Vec<Violation>) {
    let mut out = Vec::new();
    let n = spec.levels.len();
    if n == 0 {
        out.push(err(ViolationKind::BadLevel, "graph has no levels".into()));
    }
    for (i, l) in spec.levels.iter().enumerate() {
        if !l.energy.is_finite() {
            out.push(err(
                ViolationKind::BadLevel,
                format!("level {} has a non-finite energy", i + 1),
            ));
        }
    }
    for b in &spec.baths {
        if !(b.temperature > 0.0 && b.temperature.is_finite()) {
            out.push(err(
                ViolationKind::BadBath,
                format!("bath {} needs a finite temperature > 0", b.label),
            ));
        }
        if b.dimension < 1 {
            out.push(err(
                ViolationKind::BadBath,
                format!("bath {} needs dimension >= 1", b.label),
            ));
        }
        if !(b.coupling > 0.0 && b.coupling.is_finite()) {
            out.push(err(
                ViolationKind::BadBath,
                format!("bath {} needs a coupling > 0", b.label),
            ));
        }
    }
    let fermi_mu: Vec<f64> = spec
        .baths
        .iter()
        .filter(|b| b.statistics == Statistics::Fermionic)
        .map(|b| b.chemical_potential)
        .collect();
    if fermi_mu.windows(2).any(|w| w[0] != w[1]) {
        out.push(err(
            ViolationKind::ChemicalPotential,
            "fermionic baths must share one chemical potential".into(),
        ));
    }
    let mut labels: Vec<&str> = spec.baths.iter().map(|b| b.label.as_str()).collect();
    labels.sort_unstable();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        out.push(err(ViolationKind::BadBath, "duplicate bath label".into()));
    }
    if out.iter().any(|v| v.severity == Severity::Error) {
        return (None, out);
    }

    let mut edges = Vec::with_capacity(spec.edges.len());
    let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (k, es) in spec.edges.iter().enumerate() {
        let name = format!("edge #{} ({}, {})", k + 1, es.i + 1, es.j + 1);
        if es.i >= n || es.j >= n {
            out.push(err(
                ViolationKind::BadVertex,
                format!("{name} references a missing vertex"),
            ));
            continue;
        }
        if es.bath >= spec.baths.len() {
            out.push(err(
                ViolationKind::BadBath,
                format!("{name} references a missing bath"),
            ));
            continue;
        }
        if es.i == es.j {
            out.push(err(
                ViolationKind::SelfLoop,
                format!("{name} is a self-loop"),
            ));
            continue;
        }
        let (ei, ej) = (spec.levels[es.i].energy, spec.levels[es.j].energy);
        if ei == ej {
            out.push(err(
                ViolationKind::DegenerateEdge,
                format!("{name} joins two levels of equal energy"),
            ));
            continue;
        }
        let key = (es.i.min(es.j), es.i.max(es.j));
        if let Some(prev) = seen.insert(key, k) {
            out.push(err(
                ViolationKind::DuplicateEdge,
                format!(
                    "{name} duplicates edge #{} (one edge per vertex pair)",
                    prev + 1
                ),
            ));
            continue;
        }
        let (lo, hi) = if ei < ej { (es.i, es.j) } else { (es.j, es.i) };
        let gap = spec.levels[hi].energy - spec.levels[lo].energy;
        let bath = &spec.baths[es.bath];
        let beta_gap = gap / bath.temperature;
        let (mut up, mut down, scale) = match es.rates {
            RateSource::Amplitude(c) => {
                let s = c * c;
                let (g_down, g_up) =
                    crate::models::gamma_pair(gap, bath).expect("gap > 0 checked above");
                (bath.coupling * s * g_up, bath.coupling * s * g_down, s)
            }
            RateSource::Explicit { up, down } => (up, down, 1.0),
        };
        if !(up >= 0.0 && down >= 0.0 && up.is_finite() && down.is_finite()) {
            out.push(err(
                ViolationKind::BadRate,
                format!("{name} needs finite nonnegative rates"),
            ));
            continue;
        }
        if up < RATE_FLOOR && up > 0.0 {
            out.push(warn(
                ViolationKind::Underflow,
                format!("{name}: rate_up {up:e} flushed to zero"),
            ));
            up = 0.0;
        }
        if down < RATE_FLOOR && down > 0.0 {
            out.push(warn(
                ViolationKind::Underflow,
                format!("{name}: rate_down {down:e} flushed to zero"),
            ));
            down = 0.0;
        }
        if up == 0.0 && down == 0.0 {
            out.push(err(
                ViolationKind::BadRate,
                format!("{name} has zero rates in both directions"),
            ));
            continue;
        }
        if up > 0.0 && down > 0.0 {
            let resid = (down.ln() - up.ln()) - beta_gap;
            if resid.abs() > opts.balance_tol * beta_gap.abs().max(1.0) {
                out.push(err(
                    ViolationKind::DetailedBalance,
                    format!(
                        "{name}: rate_down/rate_up = {:e}, Boltzmann factor exp(gap/T) = {:e}",
                        down / up,
                        beta_gap.exp()
                    ),
                ));
            }
        } else if up == 0.0 && beta_gap < 690.0 && matches!(es.rates, RateSource::Explicit { .. }) {
            out.push(err(
                ViolationKind::DetailedBalance,
                format!(
                    "{name}: zero rate_up with finite Boltzmann factor {:e}",
                    beta_gap.exp()
                ),
            ));
        } else if down == 0.0 {
            out.push(err(
                ViolationKind::DetailedBalance,
                format!("{name}: zero rate_down"),
            ));
        }
        edges.push(Edge {
            lo,
            hi,
            bath: es.bath,
            rate_up: up,
            rate_down: down,
            gap,
            scale,
        });
    }
    let graph = LabeledGraph::from_parts(spec.levels.clone(), spec.baths.clone(), edges);

    // connectivity
    if n > 0 {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in graph.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        let missing: Vec<String> = (0..n)
            .filter(|&v| !seen[v])
            .map(|v| (v + 1).to_string())
            .collect();
        if !missing.is_empty() {
            out.push(err(
                ViolationKind::Disconnected,
                format!(
                    "graph is disconnected; unreachable from level 1: {}",
                    missing.join(", ")
                ),
            ));
        }
    }

    let structural = |kind, message| {
        if opts.strict_pcd {
            err(kind, message)
        } else {
            warn(kind, message)
        }
    };
    for v in 0..n {
        let nb = graph.neighbors(v);
        for (a, &(x, ex)) in nb.iter().enumerate() {
            for &(y, ey) in &nb[a + 1..] {
                let (bx, by) = (graph.edges[ex].bath, graph.edges[ey].bath);
                if bx == by && energies_equal(graph.energy(x), graph.energy(y)) {
                    out.push(structural(
                        ViolationKind::Pcd,
                        format!(
                            "level {} couples through bath {} to levels {} and {} of equal energy",
                            v + 1,
                            graph.baths[bx].label,
                            x + 1,
                            y + 1
                        ),
                    ));
                }
            }
        }
        if graph.baths.len() == 3 && nb.len() > 6 {
            out.push(structural(
                ViolationKind::Degree,
                format!("level {} has degree {} > 6", v + 1, nb.len()),
            ));
        }
    }

    if let (Some(c), Some(w), Some(h)) = (
        graph.bath_index("c"),
        graph.bath_index("w"),
        graph.bath_index("h"),
    ) {
        let (tc, tw, th) = (
            graph.temperature(c),
            graph.temperature(w),
            graph.temperature(h),
        );
        if !(tc < th && th < tw) {
            out.push(warn(
                ViolationKind::TemperatureOrder,
                format!("expected T_c < T_h < T_w, got {tc}, {th}, {tw}"),
            ));
        }
    }
    let mut gaps: Vec<Option<f64>> = vec![None; graph.baths.len()];
    let mut uniform = vec![true; graph.baths.len()];
    for e in &graph.edges {
        match gaps[e.bath] {
            None => gaps[e.bath] = Some(e.gap),
            Some(g0) if !energies_equal(g0, e.gap) => uniform[e.bath] = false,
            _ => {}
        }
    }
    for (b, ok) in uniform.iter().enumerate() {
        if !ok {
            out.push(warn(
                ViolationKind::NonUniformGap,
                format!(
                    "bath {} drives transitions of different energies (heat leaks possible)",
                    graph.baths[b].label
                ),
            ));
        }
    }
    if let (Some(c), Some(w)) = (graph.bath_index("c"), graph.bath_index("w")) {
        if let (Some(gc), Some(gw)) = (gaps[c], gaps[w]) {
            if uniform[c] && uniform[w] && energies_equal(gc, gw) {
                out.push(warn(
                    ViolationKind::EqualColdWorkGap,
                    format!("cold and work gaps are equal ({gc})"),
                ));
            }
        }
    }
    (Some(graph), out)
}

fn energies_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}
