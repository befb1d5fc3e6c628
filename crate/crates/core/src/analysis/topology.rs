use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{
    adjacency_matrix, circuits_of_length, count_circuits, count_triangles, kirchhoff_tree_count,
    laplacian, scaled_adjacency, Caps, Circuit, LabeledGraph,
};
use crate::hill::{Classification, DecompositionReport};
use crate::linalg::{log_det, principal_submatrix, spectral_radius, PowerIteration};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitLambda {
    pub id: String,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub n: usize,
    pub u: usize,
    pub n_trees: f64,
    /// `None` when the count exceeds the circuit cap.
    pub n_circuits: Option<usize>,
    pub n3: usize,
    pub length: usize,
    pub n_l: usize,
    pub tau: f64,
    pub tau_b: f64,
    pub lambdas: Vec<CircuitLambda>,
    pub rho_a: f64,
    pub rho_a_prime: f64,
}

/// `λ(C) = det(L|C) / N_T` from the unweighted Laplacian.
pub fn lambda(g: &LabeledGraph, c: &Circuit) -> f64 {
    let keep: Vec<usize> = (0..g.n()).filter(|v| !c.contains(*v)).collect();
    let ld = log_det(&principal_submatrix(&laplacian(g), &keep));
    (ld.ln_abs - kirchhoff_tree_count(g).ln()).exp()
}

/// Topological parameters for circuits of length `len`.
///
/// With a reference decomposition only its contributing circuits of that
/// length enter `N_L`; otherwise every circuit of length `len` does.
pub fn topology_params(
    g: &LabeledGraph,
    len: usize,
    reference: Option<&DecompositionReport>,
    caps: &Caps,
) -> Result<TopologyReport> {
    let mut circuits = circuits_of_length(g, len, caps.max_circuits)?;
    if let Some(rep) = reference {
        let cold = g.roles().map(|r| r.cold).unwrap_or(0);
        let total = rep.heat.get(cold).copied().unwrap_or(0.0);
        circuits.retain(|c| {
            let id = c.id();
            rep.circuits
                .iter()
                .find(|r| r.id == id)
                .is_some_and(|r| r.class != Classification::Trivial && r.heat[cold] * total > 0.0)
        });
    }
    let lambdas: Vec<CircuitLambda> = circuits
        .iter()
        .map(|c| CircuitLambda {
            id: c.id(),
            lambda: lambda(g, c),
        })
        .collect();
    let n = g.n() as f64;
    let opts = PowerIteration::default();
    Ok(TopologyReport {
        n: g.n(),
        u: g.u(),
        n_trees: kirchhoff_tree_count(g),
        n_circuits: count_circuits(g, caps.max_circuits).ok(),
        n3: count_triangles(g),
        length: len,
        n_l: circuits.len(),
        tau: lambdas.iter().map(|l| l.lambda).sum::<f64>() / n,
        tau_b: circuits.len() as f64 / n,
        lambdas,
        rho_a: spectral_radius(&adjacency_matrix(g), opts)?,
        rho_a_prime: spectral_radius(&scaled_adjacency(g, |e| g.edges()[e].scale), opts)?,
    })
}
