//! Per-circuit algebraic values, affinities, fluxes and heat currents, and
//! the decomposition of the steady-state currents over all circuits.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{enumerate_circuits, Caps, Circuit, Cycle, LabeledGraph, OrientedEdge};
use crate::linalg::{gth_ln_minor, gth_stationary};
use crate::par::{self, Execution};
use crate::steady::normalized_rates;

/// Relative threshold below which a per-bath affinity counts as zero.
pub const TRIVIAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Trivial,
    TwoBathLeak,
    ThreeBathA,
    ThreeBathB,
    ThreeBathC,
    /// Three or more nonzero affinities without a c/w/h role assignment.
    MultiBath,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Trivial => "trivial",
            Classification::TwoBathLeak => "two-bath-leak",
            Classification::ThreeBathA => "three-bath(a)",
            Classification::ThreeBathB => "three-bath(b)",
            Classification::ThreeBathC => "three-bath(c)",
            Classification::MultiBath => "multi-bath",
        }
    }
}

/// Per-bath products of rates along an oriented subgraph.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicValue {
    pub per_bath: Vec<f64>,
    pub total: f64,
}

pub fn algebraic_value(g: &LabeledGraph, sub: &[OrientedEdge]) -> AlgebraicValue {
    let mut per_bath = vec![1.0; g.baths().len()];
    for e in sub {
        per_bath[g.edges()[e.edge].bath] *= e.rate(g);
    }
    let total = per_bath.iter().product();
    AlgebraicValue { per_bath, total }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Affinities {
    pub per_bath: Vec<f64>,
    pub total: f64,
}

/// Closed-form affinities `ln(A^α(→C) / A^α(−→C))` from the energy gaps,
/// with values below the trivial tolerance set to zero.
pub fn affinities_from_gaps(g: &LabeledGraph, cycle: &Cycle) -> Affinities {
    let mut x = vec![0.0; g.baths().len()];
    for e in cycle.oriented_edges(g) {
        let edge = &g.edges()[e.edge];
        let term = edge.gap / g.temperature(edge.bath);
        x[edge.bath] += if e.up { -term } else { term };
    }
    let raw: f64 = x.iter().sum();
    let tol = TRIVIAL_TOL * raw.abs().max(1.0);
    for v in &mut x {
        if v.abs() < tol {
            *v = 0.0;
        }
    }
    let total = x.iter().sum();
    Affinities { per_bath: x, total }
}

/// Cycle affinities; fails when a rate on the cycle vanishes.
pub fn cycle_affinities(g: &LabeledGraph, cycle: &Cycle) -> Result<Affinities> {
    for &e in &cycle.circuit.edges {
        let edge = &g.edges()[e];
        if edge.rate_up == 0.0 || edge.rate_down == 0.0 {
            return Err(Error::BlockedCycle { edge: e + 1 });
        }
    }
    Ok(affinities_from_gaps(g, cycle))
}

/// Shared per-graph data for circuit evaluations: `-W / s`, `ln s`, `ln D / s^{N-1}`.
#[derive(Debug, Clone)]
pub struct HillContext {
    // normalized rates, q[i][j] for i -> j
    rates: DMatrix<f64>,
    ln_s: f64,
    ln_d_norm: f64,
}

impl HillContext {
    pub fn new(g: &LabeledGraph) -> Result<Self> {
        let (rates, ln_s) = normalized_rates(g);
        let (_, ln_d_norm) = gth_stationary(&rates)?;
        Ok(HillContext {
            rates,
            ln_s,
            ln_d_norm,
        })
    }

    pub fn ln_d(&self, g: &LabeledGraph) -> f64 {
        self.ln_d_norm + (g.n() as f64 - 1.0) * self.ln_s
    }

    /// `ln det(-W|C)` of the normalized matrix; `None` when it vanishes.
    fn ln_forest_norm(&self, c: &Circuit) -> Option<f64> {
        let removed: Vec<bool> = (0..self.rates.nrows()).map(|v| c.contains(v)).collect();
        gth_ln_minor(&self.rates, &removed)
    }

    pub fn ln_forest_determinant(&self, g: &LabeledGraph, c: &Circuit) -> Option<f64> {
        self.ln_forest_norm(c)
            .map(|l| l + (g.n() - c.len()) as f64 * self.ln_s)
    }

    /// Cycle flux `D⁻¹ det(-W|C) [A(→C) − A(−→C)]` and the affinities used.
    fn flux(&self, g: &LabeledGraph, cycle: &Cycle) -> (f64, Affinities, bool) {
        let aff = affinities_from_gaps(g, cycle);
        let blocked = cycle.circuit.edges.iter().any(|&e| {
            let edge = &g.edges()[e];
            edge.rate_up == 0.0 || edge.rate_down == 0.0
        });
        if blocked || aff.total == 0.0 {
            return (0.0, aff, blocked);
        }
        let Some(ln_f) = self.ln_forest_norm(&cycle.circuit) else {
            return (0.0, aff, blocked);
        };
        let ln_a: f64 = cycle
            .oriented_edges(g)
            .iter()
            .map(|e| (e.rate(g).ln()) - self.ln_s)
            .sum();
        let x = aff.total;
        // |A − A⁻| = max(A, A⁻) (1 − e^{−|X|}), A⁻ = A e^{−X}
        let ln_max = ln_a + (-x).max(0.0);
        let ln_diff = ln_max + (-(-x.abs()).exp_m1()).ln();
        let ln_i = ln_f - self.ln_d_norm + ln_diff + self.ln_s;
        (x.signum() * ln_i.exp(), aff, blocked)
    }
}

/// `det(-W|C)`, the weighted sum of the circuit's forests.
pub fn forest_determinant(g: &LabeledGraph, c: &Circuit) -> Result<f64> {
    let ctx = HillContext::new(g)?;
    Ok(ctx.ln_forest_determinant(g, c).map_or(0.0, f64::exp))
}

pub fn cycle_flux(g: &LabeledGraph, cycle: &Cycle) -> Result<f64> {
    let ctx = HillContext::new(g)?;
    Ok(ctx.flux(g, cycle).0)
}

/// Heat currents and entropy production of one circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitReport {
    pub id: String,
    pub vertices: Vec<usize>,
    pub length: usize,
    /// Affinities of the canonical orientation, per bath.
    pub affinity: Vec<f64>,
    pub total_affinity: f64,
    /// `ln A(→C)` and `ln A(−→C)` (rates as given, unscaled).
    pub ln_a_forward: f64,
    pub ln_a_backward: f64,
    /// `ln det(-W|C)`; `None` when the determinant vanishes.
    pub ln_forest_det: Option<f64>,
    /// Flux of the canonical orientation.
    pub flux: f64,
    pub heat: Vec<f64>,
    pub entropy: f64,
    pub class: Classification,
    pub blocked: bool,
}

impl CircuitReport {
    pub fn circuit<'a>(&self, circuits: &'a [Circuit]) -> Option<&'a Circuit> {
        circuits.iter().find(|c| c.id() == self.id)
    }
}

fn report_with(ctx: &HillContext, g: &LabeledGraph, c: &Circuit) -> CircuitReport {
    let cycle = c.forward();
    let (flux, aff, blocked) = ctx.flux(g, &cycle);
    let heat: Vec<f64> = aff
        .per_bath
        .iter()
        .enumerate()
        .map(|(b, &x)| {
            if x == 0.0 {
                0.0
            } else {
                -g.temperature(b) * flux * x
            }
        })
        .collect();
    let entropy = flux * aff.total;
    let ln_rates = |edges: Vec<OrientedEdge>| edges.iter().map(|e| e.rate(g).ln()).sum::<f64>();
    let class = classify(g, &aff.per_bath);
    CircuitReport {
        id: c.id(),
        vertices: c.vertices.iter().map(|v| v + 1).collect(),
        length: c.len(),
        total_affinity: aff.total,
        ln_a_forward: ln_rates(cycle.oriented_edges(g)),
        ln_a_backward: ln_rates(cycle.reversed().oriented_edges(g)),
        ln_forest_det: ctx.ln_forest_determinant(g, c),
        affinity: aff.per_bath,
        flux,
        heat,
        entropy,
        class,
        blocked,
    }
}

pub fn circuit_currents(g: &LabeledGraph, c: &Circuit) -> Result<CircuitReport> {
    Ok(report_with(&HillContext::new(g)?, g, c))
}

/// Classification from the signs of the nonzero affinities.
pub fn classify(g: &LabeledGraph, affinity: &[f64]) -> Classification {
    let nonzero: Vec<usize> = (0..affinity.len())
        .filter(|&b| affinity[b] != 0.0)
        .collect();
    match nonzero.len() {
        0 => Classification::Trivial,
        1 => {
            debug_assert!(false, "single nonzero affinity contradicts Σ T X = 0");
            Classification::MultiBath
        }
        2 => Classification::TwoBathLeak,
        3 => match g.roles() {
            Some(r) if nonzero == sorted([r.cold, r.work, r.hot]) => {
                let s = |b: usize| affinity[b].signum();
                if s(r.cold) == s(r.work) {
                    Classification::ThreeBathC
                } else if s(r.cold) == s(r.hot) {
                    Classification::ThreeBathB
                } else {
                    Classification::ThreeBathA
                }
            }
            _ => Classification::MultiBath,
        },
        _ => Classification::MultiBath,
    }
}

fn sorted(mut v: [usize; 3]) -> Vec<usize> {
    v.sort_unstable();
    v.to_vec()
}

pub fn classify_circuit(g: &LabeledGraph, r: &CircuitReport) -> Classification {
    classify(g, &r.affinity)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CircuitCounts {
    pub total: usize,
    pub contributing: usize,
    pub counter_contributing: usize,
    pub trivial: usize,
    pub blocked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub bath_labels: Vec<String>,
    pub temperatures: Vec<f64>,
    pub n: usize,
    pub u: usize,
    pub ln_d: f64,
    pub circuits: Vec<CircuitReport>,
    pub heat: Vec<f64>,
    pub entropy: f64,
    pub counts: CircuitCounts,
}

impl DecompositionReport {
    pub fn heat_of(&self, label: &str) -> Option<f64> {
        self.bath_labels
            .iter()
            .position(|l| l == label)
            .map(|b| self.heat[b])
    }
}

/// Hill decomposition over every circuit of `g`.
pub fn decompose(g: &LabeledGraph, caps: &Caps, exec: Execution) -> Result<DecompositionReport> {
    let circuits = enumerate_circuits(g, caps.max_circuits)?;
    decompose_circuits(g, &circuits, exec)
}

/// Hill decomposition over a given circuit list.
pub fn decompose_circuits(
    g: &LabeledGraph,
    circuits: &[Circuit],
    exec: Execution,
) -> Result<DecompositionReport> {
    let ctx = HillContext::new(g)?;
    let reports = par::map(exec, circuits, |c| report_with(&ctx, g, c));
    let nb = g.baths().len();
    let mut heat = vec![0.0; nb];
    let mut entropy = 0.0;
    for r in &reports {
        for (h, q) in heat.iter_mut().zip(&r.heat) {
            *h += q;
        }
        entropy += r.entropy;
    }
    let reference = g.roles().map(|r| r.cold).unwrap_or(0);
    let mut counts = CircuitCounts {
        total: reports.len(),
        ..Default::default()
    };
    for r in &reports {
        if r.blocked {
            counts.blocked += 1;
        }
        if r.class == Classification::Trivial {
            counts.trivial += 1;
        } else if nb > 0 && r.heat[reference] * heat[reference] > 0.0 {
            counts.contributing += 1;
        } else if nb > 0 && r.heat[reference] * heat[reference] < 0.0 {
            counts.counter_contributing += 1;
        }
    }
    for v in heat.iter().chain([&entropy]) {
        if !v.is_finite() {
            return Err(Error::NonFinite("decomposition totals".into()));
        }
    }
    Ok(DecompositionReport {
        bath_labels: g.baths().iter().map(|b| b.label.clone()).collect(),
        temperatures: g.baths().iter().map(|b| b.temperature).collect(),
        n: g.n(),
        u: g.u(),
        ln_d: ctx.ln_d(g),
        circuits: reports,
        heat,
        entropy,
        counts,
    })
}

/// A circuit inside its graph compared with the same circuit as a machine
/// on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedComparison {
    /// `D(G)⁻¹ det(-W|C) D(C_iso)`.
    pub ratio: f64,
    pub embedded: CircuitReport,
    pub isolated: CircuitReport,
    pub performance_embedded: Option<f64>,
    pub performance_isolated: Option<f64>,
}

pub fn embedded_vs_isolated(g: &LabeledGraph, c: &Circuit) -> Result<EmbeddedComparison> {
    let ctx = HillContext::new(g)?;
    let embedded = report_with(&ctx, g, c);
    let (iso, old) = g.edge_subgraph(&c.edges);
    let seq: Vec<usize> = c
        .vertices
        .iter()
        .map(|v| old.binary_search(v).expect("circuit vertex"))
        .collect();
    let ci = Circuit::from_vertices(&iso, &seq)?;
    let ctx_iso = HillContext::new(&iso)?;
    let isolated = report_with(&ctx_iso, &iso, &ci);
    let ratio = match embedded.ln_forest_det {
        Some(lf) => (lf - ctx.ln_d(g) + ctx_iso.ln_d(&iso)).exp(),
        None => 0.0,
    };
    let perf = |r: &CircuitReport, graph: &LabeledGraph| {
        graph
            .roles()
            .and_then(|roles| crate::analysis::circuit_performance(graph, roles, &r.affinity).ok())
    };
    Ok(EmbeddedComparison {
        ratio,
        performance_embedded: perf(&embedded, g),
        performance_isolated: perf(&isolated, &iso),
        embedded,
        isolated,
    })
}
