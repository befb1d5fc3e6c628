use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{adjacency_matrix, count_triangles, Caps};
use crate::hill::decompose;
use crate::linalg::{spectral_radius, PowerIteration};
use crate::models::{Model, Preset};
use crate::par::Execution;

/// `K = Q̇_c(G₃ᴮ) / Q̇_c(C³_cwh)` from full decompositions.
pub fn g3b_k_factor(b: usize, preset: &Preset, t: f64) -> Result<f64> {
    let caps = Caps::default();
    let g = preset.build(Model::G3B { b }, t)?;
    let tri = preset.build(Model::C3Cwh, t)?;
    let (a, r) = (
        decompose(&g, &caps, Execution::Sequential)?,
        decompose(&tri, &caps, Execution::Sequential)?,
    );
    let c = g.roles().expect("preset baths").cold;
    Ok(a.heat[c] / r.heat[c])
}

/// High-temperature limit `3 N_C / (2 N_C + 1)`.
pub fn k_high_t(n_circuits: usize) -> f64 {
    let n = n_circuits as f64;
    3.0 * n / (2.0 * n + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSeriesPoint {
    pub u: usize,
    pub n: usize,
    pub rho_a: f64,
    pub tau3_b: f64,
    /// `Q̇_c / Q̇_c^{cwh}`.
    pub heat_ratio: f64,
}

/// G₃ᴮ grown edge by edge (cold pendant, work, hot closing the triangle).
pub fn g3b_edge_series(preset: &Preset, t: f64, u_max: usize) -> Result<Vec<EdgeSeriesPoint>> {
    let caps = Caps::default();
    let tri = preset.build(Model::C3Cwh, t)?;
    let reference = decompose(&tri, &caps, Execution::Sequential)?;
    let c = tri.roles().expect("preset baths").cold;
    (1..=u_max)
        .map(|u| {
            let g = preset.build(Model::G3BEdges { u }, t)?;
            let rep = decompose(&g, &caps, Execution::Sequential)?;
            Ok(EdgeSeriesPoint {
                u,
                n: g.n(),
                rho_a: spectral_radius(&adjacency_matrix(&g), PowerIteration::default())?,
                tau3_b: count_triangles(&g) as f64 / g.n() as f64,
                heat_ratio: rep.heat[c] / reference.heat[c],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::FIG5;

    #[test]
    fn single_unit_is_the_triangle() {
        assert!((g3b_k_factor(1, &FIG5, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((k_high_t(2) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn pendant_edges_do_not_raise_currents() {
        let s = g3b_edge_series(&FIG5, 1.0, 7).unwrap();
        assert!((s[2].heat_ratio - 1.0).abs() < 1e-14);
        assert!(s[3].heat_ratio < s[2].heat_ratio);
        assert!(s[5].heat_ratio > s[2].heat_ratio);
        for w in s.windows(2) {
            assert!(w[1].rho_a > w[0].rho_a);
        }
    }
}
