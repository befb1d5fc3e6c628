use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::performance::{carnot, device_mode};
use super::single::r_factor;
use crate::error::{Error, Result};
use crate::graph::{
    adjacency_matrix, count_circuits, count_triangles, scaled_adjacency, Caps, LabeledGraph,
};
use crate::hill::decompose;
use crate::linalg::{spectral_radius, PowerIteration, DENSE_LIMIT};
use crate::models::{preset, Model, Preset};
use crate::par::{self, Execution};
use crate::steady::{edge_entropy, physical_currents_direct, steady_nullspace};

/// A scan grid: every size × t × σ combination of one model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub preset: String,
    /// Model family, e.g. `G4B:1`; the size is replaced by each entry of `sizes`.
    pub model: String,
    #[serde(default)]
    pub sizes: Vec<usize>,
    pub t: Vec<f64>,
    #[serde(default = "unit_sigma")]
    pub sigma: Vec<f64>,
}

fn unit_sigma() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub model: Model,
    pub t: f64,
    pub sigma: f64,
}

impl ScanPoint {
    pub fn key(&self) -> String {
        format!("{}|{}|{}", self.model, self.t, self.sigma)
    }
}

/// One row of scan output. Optional fields are left empty in CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub key: String,
    pub model: String,
    pub size: Option<usize>,
    pub t: f64,
    pub sigma: f64,
    pub n: Option<usize>,
    pub u: Option<usize>,
    pub route: Option<String>,
    pub q_c: Option<f64>,
    pub q_w: Option<f64>,
    pub q_h: Option<f64>,
    pub entropy: Option<f64>,
    pub q_c_norm: Option<f64>,
    pub q_w_norm: Option<f64>,
    pub q_h_norm: Option<f64>,
    pub r_factor: Option<f64>,
    pub mode: Option<String>,
    pub performance: Option<f64>,
    pub eps_carnot: Option<f64>,
    pub n3: Option<usize>,
    pub tau3_b: Option<f64>,
    pub rho_a: Option<f64>,
    pub rho_a_prime: Option<f64>,
    pub mean_nc: Option<f64>,
    pub mean_nh: Option<f64>,
    pub eff_size: Option<f64>,
    pub error: Option<String>,
}

impl ScanSpec {
    pub fn preset(&self) -> Result<Preset> {
        preset(&self.preset)
            .ok_or_else(|| Error::Config(format!("unknown preset '{}'", self.preset)))
    }

    /// Grid points in output order: size, then t, then σ.
    pub fn points(&self) -> Result<Vec<ScanPoint>> {
        let base: Model = self.model.parse()?;
        let models: Vec<Model> = if self.sizes.is_empty() {
            vec![base]
        } else {
            if base.size().is_none() {
                return Err(Error::Config(format!(
                    "model {} has no size parameter",
                    base.name()
                )));
            }
            self.sizes.iter().map(|&s| base.with_size(s)).collect()
        };
        for &v in self.t.iter().chain(&self.sigma) {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "grid values must be finite and > 0, got {v}"
                )));
            }
        }
        let mut out = Vec::new();
        for &model in &models {
            for &t in &self.t {
                for &sigma in &self.sigma {
                    out.push(ScanPoint { model, t, sigma });
                }
            }
        }
        Ok(out)
    }
}

/// Evaluates every grid point whose key is not in `skip`, in grid order.
pub fn run_scan(
    spec: &ScanSpec,
    caps: &Caps,
    exec: Execution,
    skip: &BTreeSet<String>,
) -> Result<Vec<ScanRow>> {
    let p = spec.preset()?;
    let points: Vec<ScanPoint> = spec
        .points()?
        .into_iter()
        .filter(|pt| !skip.contains(&pt.key()))
        .collect();
    Ok(par::map(exec, &points, |pt| scan_point(&p, pt, caps)))
}

fn empty_row(pt: &ScanPoint) -> ScanRow {
    ScanRow {
        key: pt.key(),
        model: pt.model.name().to_string(),
        size: pt.model.size(),
        t: pt.t,
        sigma: pt.sigma,
        n: None,
        u: None,
        route: None,
        q_c: None,
        q_w: None,
        q_h: None,
        entropy: None,
        q_c_norm: None,
        q_w_norm: None,
        q_h_norm: None,
        r_factor: None,
        mode: None,
        performance: None,
        eps_carnot: None,
        n3: None,
        tau3_b: None,
        rho_a: None,
        rho_a_prime: None,
        mean_nc: None,
        mean_nh: None,
        eff_size: None,
        error: None,
    }
}

/// One grid point; failures are recorded in the row's `error` field.
pub fn scan_point(p: &Preset, pt: &ScanPoint, caps: &Caps) -> ScanRow {
    let mut row = empty_row(pt);
    if let Err(e) = fill_row(p, pt, caps, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

/// Total heat currents and entropy: Hill decomposition when the circuits fit
/// under the cap, direct steady-state route otherwise.
pub fn totals(g: &LabeledGraph, caps: &Caps) -> Result<(Vec<f64>, f64, &'static str)> {
    if count_circuits(g, caps.max_circuits).is_ok() {
        let rep = decompose(g, caps, Execution::Sequential)?;
        Ok((rep.heat, rep.entropy, "hill"))
    } else {
        let s = steady_nullspace(g)?;
        Ok((
            physical_currents_direct(g, &s.populations),
            edge_entropy(g, &s.populations),
            "direct",
        ))
    }
}

fn fill_row(p: &Preset, pt: &ScanPoint, caps: &Caps, row: &mut ScanRow) -> Result<()> {
    let g = p.build(pt.model, pt.t)?.scaled(pt.sigma);
    let roles = g.roles().expect("preset baths carry roles");
    row.n = Some(g.n());
    row.u = Some(g.u());
    let (heat, entropy, route) = totals(&g, caps)?;
    let tri = p.build(Model::C3Cwh, pt.t)?.scaled(pt.sigma);
    let (tri_heat, _, _) = totals(&tri, caps)?;
    let (qc, qw, qh) = (heat[roles.cold], heat[roles.work], heat[roles.hot]);
    row.route = Some(route.to_string());
    (row.q_c, row.q_w, row.q_h, row.entropy) = (Some(qc), Some(qw), Some(qh), Some(entropy));
    let ratio = |a: f64, b: f64| (b != 0.0).then(|| a / b);
    row.q_c_norm = ratio(qc, tri_heat[roles.cold]);
    row.q_w_norm = ratio(qw, tri_heat[roles.work]);
    row.q_h_norm = ratio(qh, tri_heat[roles.hot]);
    row.r_factor = r_factor(&g).ok().map(|r| r.r);
    let dm = device_mode(qc, qw, qh);
    row.mode = dm.mode.map(|m| m.as_str().to_string());
    row.performance = dm.value;
    let (tc, th, tw) = p.temperatures(pt.t);
    row.eps_carnot = Some(carnot(tc, th, tw).0);
    let n3 = count_triangles(&g);
    row.n3 = Some(n3);
    row.tau3_b = Some(n3 as f64 / g.n() as f64);
    row.rho_a = Some(spectral_radius(
        &adjacency_matrix(&g),
        PowerIteration::default(),
    )?);
    row.rho_a_prime = Some(spectral_radius(
        &scaled_adjacency(&g, |e| g.edges()[e].scale),
        PowerIteration::default(),
    )?);
    if let Some(side) = grid_side(&pt.model) {
        let s = steady_nullspace(&g)?;
        let (nc, nh) = mean_quanta(side, &s.populations);
        (row.mean_nc, row.mean_nh, row.eff_size) = (Some(nc), Some(nh), Some((nc * nh).sqrt()));
    }
    for v in [
        row.q_c,
        row.q_w,
        row.q_h,
        row.entropy,
        row.q_c_norm,
        row.r_factor,
        row.performance,
    ]
    .into_iter()
    .flatten()
    {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("scan point {}", pt.key())));
        }
    }
    Ok(())
}

/// Number of `n_c` values per `n_h` row for the grid models.
pub fn grid_side(model: &Model) -> Option<usize> {
    match *model {
        Model::G4B { b } => Some((b as f64).sqrt().round() as usize + 1),
        Model::G4L { .. } => Some(2),
        Model::Gho { n_max } => Some(n_max + 1),
        _ => None,
    }
}

/// `(⟨n_c⟩, ⟨n_h⟩)` on a grid with vertex index `n_h * side + n_c`.
pub fn mean_quanta(side: usize, p: &[f64]) -> (f64, f64) {
    p.iter().enumerate().fold((0.0, 0.0), |(nc, nh), (i, &pi)| {
        (nc + pi * (i % side) as f64, nh + pi * (i / side) as f64)
    })
}

/// Relative change in the heat currents below which a doubled oscillator
/// truncation counts as converged.
pub const GHO_TRUNCATION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub n_max: usize,
    pub heat: Vec<f64>,
    pub mean_nc: f64,
    pub mean_nh: f64,
}

/// Doubles the oscillator truncation from `n_start` until the heat currents
/// move by less than `rel_tol`; returns the last (converged) truncation.
pub fn gho_truncation(p: &Preset, t: f64, n_start: usize, rel_tol: f64) -> Result<Truncation> {
    let eval = |n_max: usize| -> Result<Truncation> {
        let g = p.build(Model::Gho { n_max }, t)?;
        let s = steady_nullspace(&g)?;
        let (mean_nc, mean_nh) = mean_quanta(n_max + 1, &s.populations);
        Ok(Truncation {
            n_max,
            heat: physical_currents_direct(&g, &s.populations),
            mean_nc,
            mean_nh,
        })
    };
    let mut prev = eval(n_start.max(1))?;
    loop {
        let next_n = prev.n_max * 2;
        if (next_n + 1) * (next_n + 1) > DENSE_LIMIT {
            return Err(Error::NonConvergence(format!(
                "oscillator truncation (n_max = {} still moving at the dense size limit)",
                prev.n_max
            )));
        }
        let next = eval(next_n)?;
        let scale = next.heat.iter().fold(0.0f64, |m, q| m.max(q.abs()));
        let moved = next
            .heat
            .iter()
            .zip(&prev.heat)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if moved < rel_tol * scale {
            return Ok(next);
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::FIG5;

    #[test]
    fn grid_order_and_keys() {
        let spec = ScanSpec {
            preset: "fig5".into(),
            model: "G4B:1".into(),
            sizes: vec![1, 4],
            t: vec![0.5, 1.0],
            sigma: vec![1.0],
        };
        let pts = spec.points().unwrap();
        let keys: Vec<String> = pts.iter().map(|p| p.key()).collect();
        assert_eq!(
            keys,
            vec!["G4B:1|0.5|1", "G4B:1|1|1", "G4B:4|0.5|1", "G4B:4|1|1"]
        );
        let skip: BTreeSet<String> = keys[..3].iter().cloned().collect();
        let rows = run_scan(&spec, &Caps::default(), Execution::Sequential, &skip).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].error.is_none());
        assert!(rows[0].q_c_norm.unwrap() > 1.0);
    }

    #[test]
    fn empty_grid() {
        let spec = ScanSpec {
            preset: "fig4".into(),
            model: "C3_cwh".into(),
            sizes: vec![],
            t: vec![],
            sigma: vec![1.0],
        };
        assert!(run_scan(
            &spec,
            &Caps::default(),
            Execution::Parallel,
            &BTreeSet::new()
        )
        .unwrap()
        .is_empty());
    }

    #[test]
    fn failures_stay_in_their_row() {
        let spec = ScanSpec {
            preset: "fig5".into(),
            model: "G4B:1".into(),
            sizes: vec![2],
            t: vec![1.0],
            sigma: vec![1.0],
        };
        let rows = run_scan(
            &spec,
            &Caps::default(),
            Execution::Sequential,
            &BTreeSet::new(),
        )
        .unwrap();
        assert!(rows[0].error.as_deref().unwrap().contains("square"));
    }

    #[test]
    fn mean_quanta_on_grid() {
        let g = FIG5.build(Model::G4B { b: 1 }, 1.0).unwrap();
        let p = steady_nullspace(&g).unwrap().populations;
        let (nc, nh) = mean_quanta(2, &p);
        assert!((nc - (p[1] + p[3])).abs() < 1e-15 && (nh - (p[2] + p[3])).abs() < 1e-15);
    }
}
