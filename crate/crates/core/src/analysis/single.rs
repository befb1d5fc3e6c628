use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    enumerate_circuits, Caps, Circuit, Cycle, EdgeSpec, GraphSpec, LabeledGraph, Level, RateSource,
    ValidationOptions,
};
use crate::hill::{affinities_from_gaps, decompose, decompose_circuits, HillContext};
use crate::models::{Model, Preset};
use crate::par::Execution;

/// The single circuit of a circuit graph (every vertex of degree two).
pub fn sole_circuit(g: &LabeledGraph) -> Result<Circuit> {
    if g.n() < 3 || g.u() != g.n() || (0..g.n()).any(|v| g.degree(v) != 2) {
        return Err(Error::NotACircuit(format!("N = {}, U = {}", g.n(), g.u())));
    }
    let mut cs = enumerate_circuits(g, 2)?;
    match cs.len() {
        1 => Ok(cs.remove(0)),
        _ => Err(Error::NotACircuit("graph is not a single circuit".into())),
    }
}

/// Orientation with nonnegative total affinity.
pub fn favored_cycle(g: &LabeledGraph, c: &Circuit) -> Cycle {
    let f = c.forward();
    if affinities_from_gaps(g, &f).total >= 0.0 {
        f
    } else {
        f.reversed()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RFactor {
    /// `R = A(→C) / D(C)` for the favored orientation.
    pub r: f64,
    pub ln_r: f64,
    pub affinity: Vec<f64>,
    pub total_affinity: f64,
}

impl RFactor {
    /// `−T_α R (1 − e^{−X}) X^α`.
    pub fn heat(&self, g: &LabeledGraph) -> Vec<f64> {
        let f = -(-self.total_affinity).exp_m1();
        self.affinity
            .iter()
            .enumerate()
            .map(|(b, x)| -g.temperature(b) * self.r * f * x)
            .collect()
    }
}

pub fn r_factor(g: &LabeledGraph) -> Result<RFactor> {
    let c = sole_circuit(g)?;
    let cyc = favored_cycle(g, &c);
    let aff = affinities_from_gaps(g, &cyc);
    let ln_a: f64 = cyc.oriented_edges(g).iter().map(|e| e.rate(g).ln()).sum();
    let ln_r = ln_a - HillContext::new(g)?.ln_d(g);
    Ok(RFactor {
        r: ln_r.exp(),
        ln_r,
        affinity: aff.per_bath,
        total_affinity: aff.total,
    })
}

/// High-temperature estimate `[N Σ_e 1/W_e]⁻¹` with `W_e = √(W_+ W_−)`.
pub fn r_factor_high_t(g: &LabeledGraph) -> Result<f64> {
    sole_circuit(g)?;
    let s: f64 = g
        .edges()
        .iter()
        .map(|e| 1.0 / (e.rate_up * e.rate_down).sqrt())
        .sum();
    Ok(1.0 / (g.n() as f64 * s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentBound {
    pub bath: usize,
    pub heat: f64,
    /// `T_α W_m |X^α|`, with `W_m` the smallest rate along the favored cycle.
    pub bound: f64,
}

pub fn current_bound(g: &LabeledGraph) -> Result<Vec<CurrentBound>> {
    let c = sole_circuit(g)?;
    let cyc = favored_cycle(g, &c);
    let w_m = cyc
        .oriented_edges(g)
        .iter()
        .map(|e| e.rate(g))
        .fold(f64::INFINITY, f64::min);
    let aff = affinities_from_gaps(g, &cyc);
    let rep = decompose_circuits(g, &[c], Execution::Sequential)?;
    Ok((0..g.baths().len())
        .map(|b| CurrentBound {
            bath: b,
            heat: rep.heat[b],
            bound: g.temperature(b) * w_m * aff.per_bath[b].abs(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Cold,
    Work,
    Hot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `m` two-edge sets `{αα}` inserted into the triangle.
    TwoEdge(Role),
    /// `n_+` extra `{cwh}` sets.
    ThreeEdge,
    /// Two-edge sets only (`{cc}` and `{hh}`): trivial circuits of `2m + 2` states.
    TwoEdgeOnly,
}

/// Transitions `(role, absorbs)` around the circuit starting at the ground state.
pub fn family_steps(kind: FamilyKind, count: usize) -> Vec<(Role, bool)> {
    let rep = |r: Role, up: bool, k: usize| std::iter::repeat_n((r, up), k);
    match kind {
        FamilyKind::TwoEdge(a) => rep(Role::Cold, true, 1)
            .chain(rep(a, true, count))
            .chain(rep(Role::Work, true, 1))
            .chain(rep(Role::Hot, false, 1))
            .chain(rep(a, false, count))
            .collect(),
        FamilyKind::ThreeEdge => rep(Role::Cold, true, count + 1)
            .chain(rep(Role::Work, true, count + 1))
            .chain(rep(Role::Hot, false, count + 1))
            .collect(),
        FamilyKind::TwoEdgeOnly => rep(Role::Cold, true, count + 1)
            .chain(rep(Role::Hot, true, 1))
            .chain(rep(Role::Cold, false, count + 1))
            .chain(rep(Role::Hot, false, 1))
            .collect(),
    }
}

/// Circuit graph whose edges reuse the per-bath rates and gaps of `base`,
/// a triangle with one edge per bath.
pub fn circuit_from_steps(base: &LabeledGraph, steps: &[(Role, bool)]) -> Result<LabeledGraph> {
    let roles = base
        .roles()
        .ok_or_else(|| Error::InvalidParams("base needs c, w and h baths".into()))?;
    let edge_of = |bath: usize| {
        let es: Vec<_> = base.edges().iter().filter(|e| e.bath == bath).collect();
        match es.as_slice() {
            [e] => Ok(*e),
            _ => Err(Error::InvalidParams(
                "base must have exactly one edge per bath".into(),
            )),
        }
    };
    let (ec, ew, eh) = (
        edge_of(roles.cold)?,
        edge_of(roles.work)?,
        edge_of(roles.hot)?,
    );
    let pick = |r: Role| match r {
        Role::Cold => (ec, roles.cold),
        Role::Work => (ew, roles.work),
        Role::Hot => (eh, roles.hot),
    };
    let mut energies = vec![0.0];
    for &(r, up) in steps {
        let (e, _) = pick(r);
        let last = *energies.last().expect("nonempty");
        energies.push(if up { last + e.gap } else { last - e.gap });
    }
    let end = energies.pop().expect("nonempty");
    let scale = energies.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if end.abs() > 1e-12 * scale {
        return Err(Error::InvalidParams(format!(
            "steps do not close: energy mismatch {end}"
        )));
    }
    let l = steps.len();
    let edges = steps
        .iter()
        .enumerate()
        .map(|(k, &(r, _))| {
            let (e, bath) = pick(r);
            EdgeSpec {
                i: k,
                j: (k + 1) % l,
                bath,
                rates: RateSource::Explicit {
                    up: e.rate_up,
                    down: e.rate_down,
                },
            }
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
        baths: base.baths().to_vec(),
        edges,
    };
    let lax = ValidationOptions {
        strict_pcd: false,
        ..Default::default()
    };
    LabeledGraph::build(&spec, &lax).map(|(g, _)| g)
}

/// Family members with `0..=count` added sets.
pub fn circuit_family(
    base: &LabeledGraph,
    kind: FamilyKind,
    count: usize,
) -> Result<Vec<LabeledGraph>> {
    (0..=count)
        .map(|k| circuit_from_steps(base, &family_steps(kind, k)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleRatio {
    /// `Q̇^{wch} / Q̇^{cwh}` from the two decompositions (cold bath).
    pub currents: f64,
    /// `D(C_cwh) / D(C_wch)`.
    pub determinants: f64,
    /// `(W_c W_h + W_c W_w) / (W_c W_w + W_w W_h)` with emission rates.
    pub low_t: f64,
}

pub fn triangle_ratio(preset: &Preset, t: f64) -> Result<TriangleRatio> {
    let cwh = preset.build(Model::C3Cwh, t)?;
    let wch = preset.build(Model::C3Wch, t)?;
    let caps = Caps::default();
    let (a, b) = (
        decompose(&cwh, &caps, Execution::Sequential)?,
        decompose(&wch, &caps, Execution::Sequential)?,
    );
    let roles = cwh.roles().expect("preset baths");
    let w = |bath: usize| {
        cwh.edges()
            .iter()
            .find(|e| e.bath == bath)
            .expect("edge per bath")
            .rate_down
    };
    let (wc, ww, wh) = (w(roles.cold), w(roles.work), w(roles.hot));
    Ok(TriangleRatio {
        currents: b.heat[roles.cold] / a.heat[roles.cold],
        determinants: (a.ln_d - b.ln_d).exp(),
        low_t: (wc * wh + wc * ww) / (wc * ww + ww * wh),
    })
}
