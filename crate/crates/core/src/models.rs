//! Concrete absorption machines: bath spectral functions, level schemes and
//! coupling operators, and the figure parameter presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    EdgeSpec, GraphSpec, LabeledGraph, Level, RateSource, ValidationOptions, Violation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    #[default]
    Bosonic,
    Fermionic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bath {
    pub label: String,
    pub temperature: f64,
    #[serde(default)]
    pub statistics: Statistics,
    #[serde(default = "one_u32")]
    pub dimension: u32,
    #[serde(default = "one_f64")]
    pub coupling: f64,
    #[serde(default)]
    pub chemical_potential: f64,
}

fn one_u32() -> u32 {
    1
}

fn one_f64() -> f64 {
    1.0
}

impl Bath {
    pub fn bosonic(label: &str, temperature: f64, dimension: u32, coupling: f64) -> Bath {
        Bath {
            label: label.to_string(),
            temperature,
            statistics: Statistics::Bosonic,
            dimension,
            coupling,
            chemical_potential: 0.0,
        }
    }

    pub fn fermionic(label: &str, temperature: f64, coupling: f64, mu: f64) -> Bath {
        Bath {
            label: label.to_string(),
            temperature,
            statistics: Statistics::Fermionic,
            dimension: 1,
            coupling,
            chemical_potential: mu,
        }
    }
}

/// `(Γ_ω, Γ_{-ω})` for a bosonic bath: `ω^d (N + 1)` and `ω^d N`.
pub fn bosonic_gamma(omega: f64, bath: &Bath) -> Result<(f64, f64)> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "transition frequency must be > 0, got {omega}"
        )));
    }
    let x = omega / bath.temperature;
    let g = omega.powi(bath.dimension as i32) / -(-x).exp_m1();
    Ok((g, g * (-x).exp()))
}

/// `(Γ_ω, Γ_{-ω})` for a fermionic lead: `1 - f` and `f`, with `ω = E - μ`.
pub fn fermionic_gamma(omega: f64, bath: &Bath) -> Result<(f64, f64)> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "E - mu must be > 0, got {omega}"
        )));
    }
    let x = omega / bath.temperature;
    let g = 1.0 / (1.0 + (-x).exp());
    Ok((g, g * (-x).exp()))
}

pub fn gamma_pair(omega: f64, bath: &Bath) -> Result<(f64, f64)> {
    match bath.statistics {
        Statistics::Bosonic => bosonic_gamma(omega, bath),
        Statistics::Fermionic => fermionic_gamma(omega, bath),
    }
}

/// Model family with its size parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id")]
pub enum Model {
    /// Two-qubit / four-state machine; `omega_c_prime` shifts the upper cold gap.
    G4 {
        omega_c_prime: Option<f64>,
    },
    C3Cwh,
    C3Wch,
    C3p2mh {
        m_h: usize,
    },
    C3p3np {
        n_plus: usize,
    },
    G3B {
        b: usize,
    },
    /// First `u` edges of the G3B chain (c, w, h per unit).
    G3BEdges {
        u: usize,
    },
    G4B {
        b: usize,
    },
    G4L {
        b: usize,
    },
    Gho {
        n_max: usize,
    },
    /// Two quantum dots; energies are measured from the lead chemical potential.
    Photo {
        mu: f64,
    },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::G4 { .. } => "G4",
            Model::C3Cwh => "C3_cwh",
            Model::C3Wch => "C3_wch",
            Model::C3p2mh { .. } => "C_3p2mh",
            Model::C3p3np { .. } => "C_3p3np",
            Model::G3B { .. } => "G3B",
            Model::G3BEdges { .. } => "G3B_edges",
            Model::G4B { .. } => "G4B",
            Model::G4L { .. } => "G4L",
            Model::Gho { .. } => "GHO",
            Model::Photo { .. } => "photo",
        }
    }

    /// Size parameter (m_h, n_+, B, U, n_max), if any.
    pub fn size(&self) -> Option<usize> {
        match *self {
            Model::C3p2mh { m_h } => Some(m_h),
            Model::C3p3np { n_plus } => Some(n_plus),
            Model::G3B { b } | Model::G4B { b } | Model::G4L { b } => Some(b),
            Model::G3BEdges { u } => Some(u),
            Model::Gho { n_max } => Some(n_max),
            _ => None,
        }
    }

    /// Same family with a different size parameter.
    pub fn with_size(&self, n: usize) -> Model {
        match *self {
            Model::C3p2mh { .. } => Model::C3p2mh { m_h: n },
            Model::C3p3np { .. } => Model::C3p3np { n_plus: n },
            Model::G3B { .. } => Model::G3B { b: n },
            Model::G3BEdges { .. } => Model::G3BEdges { u: n },
            Model::G4B { .. } => Model::G4B { b: n },
            Model::G4L { .. } => Model::G4L { b: n },
            Model::Gho { .. } => Model::Gho { n_max: n },
            m => m,
        }
    }

    pub fn all_names() -> &'static [(&'static str, &'static str)] {
        &[
            ("G4", "four-state two-qubit machine; G4 or G4:<omega_c'>"),
            (
                "C3_cwh",
                "three-level triangle, cold edge at the ground state",
            ),
            (
                "C3_wch",
                "three-level triangle, work edge at the ground state",
            ),
            (
                "C_3p2mh:<m_h>",
                "triangle extended by m_h hot two-edge sets",
            ),
            (
                "C_3p3np:<n_+>",
                "triangle extended by n_+ cwh three-edge sets",
            ),
            ("G3B:<B>", "chain of B triangles sharing vertices"),
            ("G3B_edges:<U>", "first U edges of the G3B chain"),
            (
                "G4B:<B>",
                "square grid of B two-triangle units (B = 1, 4, 9, ...)",
            ),
            ("G4L:<B>", "row of B two-triangle units"),
            (
                "GHO:<n_max>",
                "two coupled oscillators truncated at n_max quanta each",
            ),
            (
                "photo:<mu>",
                "photoelectric double quantum dot with lead potential mu",
            ),
        ]
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::G4 {
                omega_c_prime: Some(p),
            } => write!(f, "G4:{p}"),
            Model::Photo { mu } => write!(f, "photo:{mu}"),
            m => match m.size() {
                Some(n) => write!(f, "{}:{n}", m.name()),
                None => f.write_str(m.name()),
            },
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Model> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s.trim(), None),
        };
        let bad = || {
            Error::InvalidParams(format!(
                "cannot parse model '{s}'; run `hillc models` for the list"
            ))
        };
        let int = || -> Result<usize> { arg.ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let real =
            || -> Result<Option<f64>> { arg.map(|a| a.parse().map_err(|_| bad())).transpose() };
        Ok(match name.to_ascii_lowercase().as_str() {
            "g4" => Model::G4 {
                omega_c_prime: real()?,
            },
            "c3_cwh" | "cwh" => Model::C3Cwh,
            "c3_wch" | "wch" => Model::C3Wch,
            "c_3p2mh" => Model::C3p2mh { m_h: int()? },
            "c_3p3np" => Model::C3p3np { n_plus: int()? },
            "g3b" => Model::G3B { b: int()? },
            "g3b_edges" => Model::G3BEdges { u: int()? },
            "g4b" => Model::G4B { b: int()? },
            "g4l" => Model::G4L { b: int()? },
            "gho" => Model::Gho { n_max: int()? },
            "photo" => Model::Photo {
                mu: real()?.unwrap_or(0.0),
            },
            _ => return Err(bad()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: Model,
    pub omega_c: f64,
    pub omega_h: f64,
}

impl ModelParams {
    pub fn omega_w(&self) -> f64 {
        self.omega_h - self.omega_c
    }
}

const C: usize = 0;
const W: usize = 1;
const H: usize = 2;

struct Builder {
    levels: Vec<f64>,
    edges: Vec<(usize, usize, usize, f64)>,
}

impl Builder {
    fn new(levels: Vec<f64>) -> Self {
        Builder {
            levels,
            edges: Vec::new(),
        }
    }

    fn edge(&mut self, i: usize, j: usize, role: usize, amplitude: f64) {
        self.edges.push((i, j, role, amplitude));
    }
}

/// Builds a model graph. Baths must carry the labels `c`, `w` and `h`.
pub fn build_model(p: &ModelParams, baths: &[Bath]) -> Result<(LabeledGraph, Vec<Violation>)> {
    build_model_with(p, baths, &ValidationOptions::default())
}

pub fn build_model_with(
    p: &ModelParams,
    baths: &[Bath],
    opts: &ValidationOptions,
) -> Result<(LabeledGraph, Vec<Violation>)> {
    let (wc, wh) = (p.omega_c, p.omega_h);
    if !(wc > 0.0 && wh > wc && wh.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "need 0 < omega_c < omega_h, got {wc}, {wh}"
        )));
    }
    let ww = wh - wc;
    let role_index = |label: &str| {
        baths
            .iter()
            .position(|b| b.label == label)
            .ok_or_else(|| Error::InvalidParams(format!("model needs a bath labelled '{label}'")))
    };
    let roles = [role_index("c")?, role_index("w")?, role_index("h")?];
    let b = match p.model {
        Model::G4 { omega_c_prime } => {
            let wcp = omega_c_prime.unwrap_or(wc);
            if !(wcp > 0.0) {
                return Err(Error::InvalidParams("omega_c' must be > 0".into()));
            }
            let mut b = Builder::new(vec![0.0, wc, wh, wh + wcp]);
            b.edge(0, 1, C, 1.0);
            b.edge(2, 3, C, 1.0);
            b.edge(1, 2, W, 1.0);
            b.edge(0, 2, H, 1.0);
            b.edge(1, 3, H, 1.0);
            b
        }
        Model::C3Cwh => {
            let mut b = Builder::new(vec![0.0, wc, wh]);
            b.edge(0, 1, C, 1.0);
            b.edge(1, 2, W, 1.0);
            b.edge(0, 2, H, 1.0);
            b
        }
        Model::C3Wch => {
            let mut b = Builder::new(vec![0.0, ww, wh]);
            b.edge(0, 1, W, 1.0);
            b.edge(1, 2, C, 1.0);
            b.edge(0, 2, H, 1.0);
            b
        }
        Model::C3p2mh { m_h } => {
            // 1-based |2n+1> = n wh, |2n> = (n-1) wh + wc
            let n = 3 + 2 * m_h;
            let levels = (1..=n)
                .map(|k| {
                    if k % 2 == 1 {
                        ((k - 1) / 2) as f64 * wh
                    } else {
                        (k / 2 - 1) as f64 * wh + wc
                    }
                })
                .collect();
            let mut b = Builder::new(levels);
            b.edge(0, 1, C, 1.0);
            for k in 0..=2 * m_h {
                b.edge(k, k + 2, H, 1.0);
            }
            b.edge(n - 2, n - 1, W, 1.0);
            b
        }
        Model::C3p3np { n_plus } => {
            // boundary of the triangle n_h + n_c <= n_+ + 1
            let s = n_plus + 1;
            let mut states = Vec::new();
            for nh in 0..=s {
                for nc in 0..=(s - nh) {
                    if nh == 0 || nc == 0 || nh + nc == s {
                        states.push((nh, nc));
                    }
                }
            }
            let idx = |nh: usize, nc: usize| {
                states
                    .iter()
                    .position(|&q| q == (nh, nc))
                    .expect("boundary state")
            };
            let mut b = Builder::new(
                states
                    .iter()
                    .map(|&(nh, nc)| nh as f64 * wh + nc as f64 * wc)
                    .collect(),
            );
            for nc in 0..s {
                b.edge(idx(0, nc), idx(0, nc + 1), C, 1.0);
            }
            for nh in 0..s {
                b.edge(idx(nh, s - nh), idx(nh + 1, s - nh - 1), W, 1.0);
            }
            for nh in 0..s {
                b.edge(idx(nh, 0), idx(nh + 1, 0), H, 1.0);
            }
            b
        }
        Model::G3B { b: units } => {
            if units == 0 {
                return Err(Error::InvalidParams("G3B needs B >= 1".into()));
            }
            g3b_edges(wc, wh, 3 * units)
        }
        Model::G3BEdges { u } => {
            if u == 0 {
                return Err(Error::InvalidParams("G3B_edges needs U >= 1".into()));
            }
            g3b_edges(wc, wh, u)
        }
        Model::G4B { b: units } => {
            let r = (units as f64).sqrt().round() as usize;
            if units == 0 || r * r != units {
                return Err(Error::InvalidParams(format!(
                    "G4B needs a square number of units, got {units}"
                )));
            }
            grid(wc, wh, r + 1, r + 1, false, true)
        }
        Model::G4L { b: units } => {
            if units == 0 {
                return Err(Error::InvalidParams("G4L needs B >= 1".into()));
            }
            grid(wc, wh, 2, units + 1, false, true)
        }
        Model::Gho { n_max } => {
            if n_max == 0 {
                return Err(Error::InvalidParams(
                    "GHO truncation n_max must be >= 1".into(),
                ));
            }
            grid(wc, wh, n_max + 1, n_max + 1, true, true)
        }
        Model::Photo { mu } => {
            let (ec, eh) = (wc - mu, wh - mu);
            if !(ec > 0.0) {
                return Err(Error::InvalidParams("photo model needs mu < E_c".into()));
            }
            let mut b = Builder::new(vec![0.0, ec, eh, ec + eh]);
            b.edge(0, 1, C, 1.0);
            b.edge(2, 3, C, 1.0);
            b.edge(1, 2, W, 1.0);
            b.edge(0, 2, H, 1.0);
            b.edge(1, 3, H, 1.0);
            b
        }
    };
    let spec = GraphSpec {
        levels: b
            .levels
            .into_iter()
            .map(|energy| Level {
                energy,
                label: None,
            })
            .collect(),
        baths: baths.to_vec(),
        edges: b
            .edges
            .into_iter()
            .map(|(i, j, role, a)| EdgeSpec {
                i,
                j,
                bath: roles[role],
                rates: RateSource::Amplitude(a),
            })
            .collect(),
    };
    LabeledGraph::build(&spec, opts)
}

/// Convenience wrapper discarding warnings.
pub fn build(p: &ModelParams, baths: &[Bath]) -> Result<LabeledGraph> {
    build_model(p, baths).map(|(g, _)| g)
}

fn g3b_edges(wc: f64, wh: f64, u: usize) -> Builder {
    let units = u.div_ceil(3);
    // 1-based |2n-1> = (n-1) wh, |2n> = (n-1) wh + wc
    let mut levels = Vec::new();
    for n in 1..=units {
        levels.push((n - 1) as f64 * wh);
        levels.push((n - 1) as f64 * wh + wc);
    }
    levels.push(units as f64 * wh);
    let mut b = Builder::new(levels);
    let mut added = 0;
    'outer: for n in 0..units {
        let (v1, v2, v3) = (2 * n, 2 * n + 1, 2 * n + 2);
        for (i, j, r) in [(v1, v2, C), (v2, v3, W), (v1, v3, H)] {
            if added == u {
                break 'outer;
            }
            b.edge(i, j, r, 1.0);
            added += 1;
        }
    }
    // drop the top vertex when the last unit stops after its cold edge
    if u % 3 == 1 {
        b.levels.pop();
    }
    b
}

/// Rectangular (n_c, n_h) grid; vertex index = n_h * nc_side + n_c.
fn grid(
    wc: f64,
    wh: f64,
    nc_side: usize,
    nh_side: usize,
    oscillator: bool,
    diagonals: bool,
) -> Builder {
    let idx = |nh: usize, nc: usize| nh * nc_side + nc;
    let mut levels = Vec::with_capacity(nc_side * nh_side);
    for nh in 0..nh_side {
        for nc in 0..nc_side {
            levels.push(nh as f64 * wh + nc as f64 * wc);
        }
    }
    let mut b = Builder::new(levels);
    let amp = |x: f64| if oscillator { x.sqrt() } else { 1.0 };
    for nh in 0..nh_side {
        for nc in 0..nc_side - 1 {
            b.edge(idx(nh, nc), idx(nh, nc + 1), C, amp((nc + 1) as f64));
        }
    }
    if diagonals {
        for nh in 1..nh_side {
            for nc in 0..nc_side - 1 {
                b.edge(
                    idx(nh - 1, nc + 1),
                    idx(nh, nc),
                    W,
                    amp((nh * (nc + 1)) as f64),
                );
            }
        }
    }
    for nh in 0..nh_side - 1 {
        for nc in 0..nc_side {
            b.edge(idx(nh, nc), idx(nh + 1, nc), H, amp((nh + 1) as f64));
        }
    }
    b
}

/// Bath temperatures of a preset are `(a_c t, a_h t, a_w t)`, with an
/// optional fixed work temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub dimension: u32,
    pub coupling: f64,
    pub omega_c: f64,
    pub omega_h: f64,
    pub t_factors: [f64; 3],
    pub fixed_tw: Option<f64>,
}

impl Preset {
    /// `(T_c, T_h, T_w)` at scan parameter `t`.
    pub fn temperatures(&self, t: f64) -> (f64, f64, f64) {
        let [a, b, c] = self.t_factors;
        (a * t, b * t, self.fixed_tw.unwrap_or(c * t))
    }

    /// Baths `c`, `w`, `h` (in that order) at scan parameter `t`.
    pub fn baths(&self, t: f64) -> Vec<Bath> {
        let (tc, th, tw) = self.temperatures(t);
        vec![
            Bath::bosonic("c", tc, self.dimension, self.coupling),
            Bath::bosonic("w", tw, self.dimension, self.coupling),
            Bath::bosonic("h", th, self.dimension, self.coupling),
        ]
    }

    /// Baths suited to `model`: the photo model uses fermionic leads for
    /// `c` and `h`.
    pub fn baths_for(&self, model: &Model, t: f64) -> Vec<Bath> {
        let mut baths = self.baths(t);
        if let Model::Photo { mu } = *model {
            for b in &mut baths {
                if b.label != "w" {
                    *b = Bath::fermionic(&b.label, b.temperature, b.coupling, mu);
                }
            }
        }
        baths
    }

    pub fn params(&self, model: Model) -> ModelParams {
        ModelParams {
            model,
            omega_c: self.omega_c,
            omega_h: self.omega_h,
        }
    }

    pub fn build(&self, model: Model, t: f64) -> Result<LabeledGraph> {
        build(&self.params(model), &self.baths_for(&model, t))
    }
}

pub const FIG4: Preset = Preset {
    name: "fig4",
    dimension: 3,
    coupling: 1.0,
    omega_c: 0.5,
    omega_h: 7.0,
    t_factors: [4.0, 5.0, 6.0],
    fixed_tw: None,
};

pub const FIG5: Preset = Preset {
    name: "fig5",
    dimension: 1,
    coupling: 1.0,
    omega_c: 0.5,
    omega_h: 1.0,
    t_factors: [5.0, 6.0, 7.0],
    fixed_tw: None,
};

pub const FIG6: Preset = Preset {
    name: "fig6",
    dimension: 3,
    coupling: 1.0,
    omega_c: 0.5,
    omega_h: 1.0,
    t_factors: [30.0, 34.0, 0.0],
    fixed_tw: Some(1e6),
};

pub fn figure_presets() -> [Preset; 3] {
    [FIG4, FIG5, FIG6]
}

pub fn preset(name: &str) -> Option<Preset> {
    figure_presets()
        .into_iter()
        .find(|p| p.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bosonic_limits() {
        let cold = Bath::bosonic("c", 1e-3, 1, 1.0);
        let (g, gm) = bosonic_gamma(1.0, &cold).unwrap();
        assert!((g - 1.0).abs() < 1e-12 && gm < 1e-300);
        let b = Bath::bosonic("c", 2.0 / std::f64::consts::LN_2, 1, 1.0);
        let (g, _) = bosonic_gamma(2.0, &b).unwrap();
        assert!((g - 4.0).abs() < 1e-12);
        assert!(bosonic_gamma(0.0, &b).is_err());
    }

    #[test]
    fn fermionic_limits() {
        let b = Bath::fermionic("c", 1.0, 1.0, 0.0);
        let (g, gm) = fermionic_gamma(1e-12, &b).unwrap();
        assert!((g - 0.5).abs() < 1e-9 && (gm - 0.5).abs() < 1e-9);
        let (g, gm) = fermionic_gamma(800.0, &b).unwrap();
        assert_eq!((g, gm), (1.0, 0.0));
        let (g, gm) = fermionic_gamma(0.7, &b).unwrap();
        assert!((gm / g - (-0.7f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn model_names_round_trip() {
        for s in [
            "G4",
            "G4:0.6",
            "C3_cwh",
            "C3_wch",
            "C_3p2mh:2",
            "C_3p3np:1",
            "G3B:3",
            "G3B_edges:7",
            "G4B:4",
            "G4L:2",
            "GHO:3",
            "photo:0.1",
        ] {
            let m: Model = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert!("G4B".parse::<Model>().is_err());
    }

    #[test]
    fn cwh_levels_and_edges() {
        let g = FIG4.build(Model::C3Cwh, 0.3).unwrap();
        let e: Vec<f64> = g.levels().iter().map(|l| l.energy).collect();
        assert_eq!(e, vec![0.0, 0.5, 7.0]);
        let labels: Vec<(usize, usize, &str)> = g
            .edges()
            .iter()
            .map(|e| (e.lo + 1, e.hi + 1, g.baths()[e.bath].label.as_str()))
            .collect();
        assert_eq!(labels, vec![(1, 2, "c"), (2, 3, "w"), (1, 3, "h")]);
    }

    #[test]
    fn sizes_of_families() {
        let n = |m: Model| FIG5.build(m, 1.0).unwrap();
        assert_eq!(
            (
                n(Model::C3p2mh { m_h: 1 }).n(),
                n(Model::C3p2mh { m_h: 1 }).u()
            ),
            (5, 5)
        );
        assert_eq!(
            (
                n(Model::C3p3np { n_plus: 1 }).n(),
                n(Model::C3p3np { n_plus: 1 }).u()
            ),
            (6, 6)
        );
        assert_eq!(
            (n(Model::G3B { b: 3 }).n(), n(Model::G3B { b: 3 }).u()),
            (7, 9)
        );
        assert_eq!(
            (n(Model::G4B { b: 4 }).n(), n(Model::G4B { b: 4 }).u()),
            (9, 16)
        );
        assert_eq!(
            (n(Model::G4L { b: 3 }).n(), n(Model::G4L { b: 3 }).u()),
            (8, 13)
        );
        assert_eq!(n(Model::Gho { n_max: 2 }).n(), 9);
        assert_eq!(n(Model::G3BEdges { u: 4 }).n(), 4);
        assert_eq!(n(Model::G3BEdges { u: 5 }).n(), 5);
        assert!(FIG5.build(Model::G4B { b: 2 }, 1.0).is_err());
    }

    #[test]
    fn g4b_unit_is_g4() {
        let a = FIG5.build(Model::G4B { b: 1 }, 1.0).unwrap();
        let b = FIG5
            .build(
                Model::G4 {
                    omega_c_prime: None,
                },
                1.0,
            )
            .unwrap();
        assert_eq!(a.levels(), b.levels());
        let key = |g: &LabeledGraph| {
            let mut v: Vec<_> = g
                .edges()
                .iter()
                .map(|e| (e.lo, e.hi, e.bath, e.rate_up.to_bits()))
                .collect();
            v.sort_unstable();
            v
        };
        assert_eq!(key(&a), key(&b));
    }

    #[test]
    fn g4_shift_warns_about_gaps() {
        let p = FIG5.params(Model::G4 {
            omega_c_prime: Some(0.6),
        });
        let (_, warnings) = build_model(&p, &FIG5.baths(1.0)).unwrap();
        assert!(warnings
            .iter()
            .any(|w| w.kind == crate::graph::ViolationKind::NonUniformGap));
        let (_, warnings) = build_model(
            &FIG5.params(Model::G4 {
                omega_c_prime: None,
            }),
            &FIG5.baths(1.0),
        )
        .unwrap();
        assert!(!warnings
            .iter()
            .any(|w| w.kind == crate::graph::ViolationKind::NonUniformGap));
    }

    #[test]
    fn oscillator_scales() {
        let g = FIG6.build(Model::Gho { n_max: 2 }, 0.01).unwrap();
        // w edge between (n_h=1, n_c=0) [index 3] and (n_h=0, n_c=1) [index 1]
        let e = &g.edges()[g.edge_between(1, 3).unwrap()];
        assert!((e.scale - 1.0).abs() < 1e-15);
        // (n_h, n_c) = (2, 1) down to (1, 2)
        let e = &g.edges()[g.edge_between(7, 5).unwrap()];
        assert!((e.scale - 4.0).abs() < 1e-12);
    }

    #[test]
    fn preset_temperatures() {
        assert_eq!(FIG4.temperatures(0.3), (0.3 * 4.0, 0.3 * 5.0, 0.3 * 6.0));
        assert_eq!(FIG5.temperatures(1.0), (5.0, 6.0, 7.0));
        assert_eq!(FIG6.temperatures(0.5).2, 1e6);
    }
}
