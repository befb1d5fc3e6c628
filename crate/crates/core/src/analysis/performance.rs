use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BathRoles, LabeledGraph};
use crate::hill::{Classification, DecompositionReport};

/// Distance from `x_r` below which the machine is at its reversible point.
pub const REVERSIBLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Refrigerator,
    Transformer,
    ReversiblePoint,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Refrigerator => "refrigerator",
            Mode::Transformer => "transformer",
            Mode::ReversiblePoint => "reversible-point",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub x: f64,
    pub x_r: f64,
    pub mode: Mode,
}

/// `x_r = T_c (T_w − T_h) / (T_h (T_w − T_c))`.
pub fn reversible_x(tc: f64, th: f64, tw: f64) -> f64 {
    tc * (tw - th) / (th * (tw - tc))
}

/// Carnot COP and efficiency `(ε_C, η_C)`.
pub fn carnot(tc: f64, th: f64, tw: f64) -> (f64, f64) {
    (
        tc * (tw - th) / (tw * (th - tc)),
        tw * (th - tc) / (th * (tw - tc)),
    )
}

fn mode_of(x: f64, x_r: f64) -> Mode {
    if (x - x_r).abs() < REVERSIBLE_TOL {
        Mode::ReversiblePoint
    } else if x < x_r {
        Mode::Refrigerator
    } else {
        Mode::Transformer
    }
}

/// `x = −T_c X^c / (T_h X^h)` for a useful circuit.
pub fn operating_point(xc: f64, xh: f64, tc: f64, th: f64, tw: f64) -> Result<OperatingPoint> {
    if xc == 0.0 || xh == 0.0 || xc.signum() == xh.signum() {
        return Err(Error::NotUseful(format!(
            "affinities X^c = {xc}, X^h = {xh} must be nonzero with opposite signs"
        )));
    }
    let x = -tc * xc / (th * xh);
    let x_r = reversible_x(tc, th, tw);
    Ok(OperatingPoint {
        x,
        x_r,
        mode: mode_of(x, x_r),
    })
}

/// COP `x / (1 − x)` for refrigerators (and at the reversible point),
/// efficiency `1 − x` for heat transformers.
pub fn performance(op: &OperatingPoint) -> Result<f64> {
    match op.mode {
        Mode::Refrigerator | Mode::ReversiblePoint => {
            if op.x == 1.0 {
                return Err(Error::Singular("COP x / (1 - x)"));
            }
            Ok(op.x / (1.0 - op.x))
        }
        Mode::Transformer => Ok(1.0 - op.x),
    }
}

fn role_temps(g: &LabeledGraph, r: BathRoles) -> (f64, f64, f64) {
    (
        g.temperature(r.cold),
        g.temperature(r.hot),
        g.temperature(r.work),
    )
}

/// Operating point of a circuit from its affinities.
pub fn circuit_operating_point(
    g: &LabeledGraph,
    roles: BathRoles,
    affinity: &[f64],
) -> Result<OperatingPoint> {
    let (tc, th, tw) = role_temps(g, roles);
    let (xc, xw, xh) = (
        affinity[roles.cold],
        affinity[roles.work],
        affinity[roles.hot],
    );
    if xc.signum() != xw.signum() {
        return Err(Error::NotUseful(
            "cold and work affinities differ in sign".into(),
        ));
    }
    operating_point(xc, xh, tc, th, tw)
}

pub fn circuit_performance(g: &LabeledGraph, roles: BathRoles, affinity: &[f64]) -> Result<f64> {
    performance(&circuit_operating_point(g, roles, affinity)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitPerformance {
    pub id: String,
    pub x: f64,
    pub mode: Mode,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub x: Option<f64>,
    pub x_r: f64,
    pub mode: Option<Mode>,
    /// COP for refrigerators, efficiency for heat transformers.
    pub value: Option<f64>,
    pub eps_carnot: f64,
    pub eta_carnot: f64,
    pub circuits: Vec<CircuitPerformance>,
    /// Best COP among the contributing refrigerating circuits.
    pub eps_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceMode {
    pub mode: Option<Mode>,
    pub x: Option<f64>,
    pub value: Option<f64>,
}

/// Mode and performance from total heat currents: COP `Q̇_c / Q̇_w` when
/// refrigerating, efficiency `−Q̇_w / Q̇_h` when transforming heat.
pub fn device_mode(qc: f64, qw: f64, qh: f64) -> DeviceMode {
    if qc > 0.0 && qw > 0.0 {
        let eps = qc / qw;
        DeviceMode {
            mode: Some(Mode::Refrigerator),
            x: Some(eps / (1.0 + eps)),
            value: Some(eps),
        }
    } else if qc < 0.0 && qw < 0.0 && qh > 0.0 {
        let eta = -qw / qh;
        DeviceMode {
            mode: Some(Mode::Transformer),
            x: Some(1.0 - eta),
            value: Some(eta),
        }
    } else if qc == 0.0 && qw == 0.0 && qh == 0.0 {
        DeviceMode {
            mode: Some(Mode::ReversiblePoint),
            x: None,
            value: None,
        }
    } else {
        DeviceMode {
            mode: None,
            x: None,
            value: None,
        }
    }
}

/// Device-level operating mode and performance from the decomposition totals.
pub fn device_performance(
    g: &LabeledGraph,
    rep: &DecompositionReport,
) -> Result<PerformanceReport> {
    let roles = g
        .roles()
        .ok_or_else(|| Error::InvalidParams("no cold/work/hot bath assignment".into()))?;
    let (tc, th, tw) = role_temps(g, roles);
    let (qc, qw, qh) = (
        rep.heat[roles.cold],
        rep.heat[roles.work],
        rep.heat[roles.hot],
    );
    let x_r = reversible_x(tc, th, tw);
    let (eps_carnot, eta_carnot) = carnot(tc, th, tw);
    let DeviceMode { mode, x, value } = device_mode(qc, qw, qh);
    let mut circuits = Vec::new();
    let mut eps_max: Option<f64> = None;
    for r in &rep.circuits {
        if r.class != Classification::ThreeBathC {
            continue;
        }
        let op = circuit_operating_point(g, roles, &r.affinity)?;
        let value = performance(&op)?;
        if op.mode == Mode::Refrigerator && r.heat[roles.cold] > 0.0 {
            eps_max = Some(eps_max.map_or(value, |m: f64| m.max(value)));
        }
        circuits.push(CircuitPerformance {
            id: r.id.clone(),
            x: op.x,
            mode: op.mode,
            value,
        });
    }
    Ok(PerformanceReport {
        x,
        x_r,
        mode,
        value,
        eps_carnot,
        eta_carnot,
        circuits,
        eps_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reversible_x_and_carnot() {
        assert!((reversible_x(4.0, 5.0, 6.0) - 0.4).abs() < 1e-15);
        let (ec, _) = carnot(4.0, 5.0, 6.0);
        assert!((ec - 2.0 / 3.0).abs() < 1e-15);
        let op = OperatingPoint {
            x: 0.5,
            x_r: 0.4,
            mode: mode_of(0.5, 0.4),
        };
        assert_eq!(op.mode, Mode::Transformer);
        assert!(
            (performance(&OperatingPoint {
                x: 0.6,
                x_r: 0.4,
                mode: Mode::Transformer
            })
            .unwrap()
                - 0.4)
                .abs()
                < 1e-15
        );
        assert_eq!(
            performance(&OperatingPoint {
                x: 0.5,
                x_r: 0.6,
                mode: Mode::Refrigerator
            })
            .unwrap(),
            1.0
        );
        // ε at x_r is the Carnot COP, η at x_r the Carnot efficiency
        let xr = reversible_x(4.0, 5.0, 6.0);
        assert!((xr / (1.0 - xr) - ec).abs() < 1e-15);
        assert!((1.0 - xr - carnot(4.0, 5.0, 6.0).1).abs() < 1e-15);
    }

    #[test]
    fn non_useful_affinities_are_rejected() {
        assert!(operating_point(1.0, 1.0, 4.0, 5.0, 6.0).is_err());
        assert!(operating_point(0.0, 1.0, 4.0, 5.0, 6.0).is_err());
        let a = operating_point(-0.1, 0.2, 4.0, 5.0, 6.0).unwrap();
        let b = operating_point(0.1, -0.2, 4.0, 5.0, 6.0).unwrap();
        assert_eq!(a, b);
    }
}
