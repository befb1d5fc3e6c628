//! Transition matrix, steady-state populations (kernel and matrix-tree
//! routes), the normalization `D`, edge fluxes and direct heat currents.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    kirchhoff_tree_count, maximal_trees, orient_tree_towards, LabeledGraph, OrientedEdge,
};
use crate::linalg::{gth_stationary, log_det, principal_submatrix, LogDet, DENSE_LIMIT};

/// `W[i][j]` is the rate `j -> i`; diagonal entries make columns sum to zero.
pub type TransitionMatrix = DMatrix<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Nullspace,
    Tree,
    Cofactor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub populations: Vec<f64>,
    /// `ln D(G)`; `D` itself overflows for large graphs.
    pub ln_d: f64,
    pub route: Route,
}

impl SteadyState {
    pub fn d(&self) -> f64 {
        self.ln_d.exp()
    }
}

pub fn assemble_w(g: &LabeledGraph) -> TransitionMatrix {
    assemble_scaled(g, 1.0)
}

fn assemble_scaled(g: &LabeledGraph, inv_scale: f64) -> TransitionMatrix {
    let n = g.n();
    let mut w = DMatrix::zeros(n, n);
    for e in g.edges() {
        w[(e.hi, e.lo)] += e.rate_up * inv_scale;
        w[(e.lo, e.hi)] += e.rate_down * inv_scale;
    }
    for j in 0..n {
        let s: f64 = (0..n).filter(|&i| i != j).map(|i| w[(i, j)]).sum();
        w[(j, j)] = -s;
    }
    w
}

/// `W / max_rate` together with `ln(max_rate)`.
pub fn normalized_w(g: &LabeledGraph) -> (TransitionMatrix, f64) {
    let s = g.max_rate();
    if s > 0.0 {
        (assemble_scaled(g, 1.0 / s), s.ln())
    } else {
        (assemble_w(g), 0.0)
    }
}

/// Rates `q[i][j]` for `i -> j` divided by the largest rate, with `ln(max_rate)`.
pub fn normalized_rates(g: &LabeledGraph) -> (DMatrix<f64>, f64) {
    let s = g.max_rate();
    let (inv, ln_s) = if s > 0.0 {
        (1.0 / s, s.ln())
    } else {
        (1.0, 0.0)
    };
    let mut q = DMatrix::zeros(g.n(), g.n());
    for e in g.edges() {
        q[(e.lo, e.hi)] += e.rate_up * inv;
        q[(e.hi, e.lo)] += e.rate_down * inv;
    }
    (q, ln_s)
}

fn check_size(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

/// `ln |det W̃|` with row `row` of the normalized `W` replaced by ones,
/// plus the scale restored.
pub fn ln_big_d_with_row(g: &LabeledGraph, row: usize) -> Result<f64> {
    if row >= g.n() {
        return Err(Error::NoSuchVertex(row + 1));
    }
    check_size(g.n())?;
    let (mut w, ln_s) = normalized_w(g);
    w.row_mut(row).fill(1.0);
    let ld = log_det(&w);
    if ld.sign == 0.0 {
        return Err(Error::DegenerateKernel);
    }
    Ok(ld.ln_abs + (g.n() as f64 - 1.0) * ln_s)
}

pub fn ln_big_d(g: &LabeledGraph) -> Result<f64> {
    check_size(g.n())?;
    let (q, ln_s) = normalized_rates(g);
    let (_, ln_d) = gth_stationary(&q)?;
    Ok(ln_d + (g.n() as f64 - 1.0) * ln_s)
}

/// `D(G) = |det W̃|`, the sum of all oriented maximal-tree weights.
pub fn big_d(g: &LabeledGraph) -> Result<f64> {
    ln_big_d(g).map(f64::exp)
}

/// Populations spanning the kernel of `W`, by subtraction-free elimination.
pub fn steady_nullspace(g: &LabeledGraph) -> Result<SteadyState> {
    check_size(g.n())?;
    let (q, ln_s) = normalized_rates(g);
    let (p, ln_d) = gth_stationary(&q)?;
    Ok(SteadyState {
        populations: p.iter().copied().collect(),
        ln_d: ln_d + (g.n() as f64 - 1.0) * ln_s,
        route: Route::Nullspace,
    })
}

/// Populations as normalized sums of oriented-tree weights. Enumerates trees
/// when there are at most `tree_cap` of them, otherwise uses the principal
/// minors of `-W` (matrix-tree theorem).
pub fn steady_tree(g: &LabeledGraph, tree_cap: usize) -> Result<SteadyState> {
    let n = g.n();
    check_size(n)?;
    let s = g.max_rate();
    let (inv, ln_s) = if s > 0.0 {
        (1.0 / s, s.ln())
    } else {
        (1.0, 0.0)
    };
    let restore = (n as f64 - 1.0) * ln_s;
    if kirchhoff_tree_count(g) <= tree_cap as f64 {
        let trees = maximal_trees(g, tree_cap)?;
        let mut weights = vec![0.0; n];
        for t in &trees {
            for (i, w) in weights.iter_mut().enumerate() {
                let o = orient_tree_towards(g, t, i)?;
                *w += o.iter().map(|e| e.rate(g) * inv).product::<f64>();
            }
        }
        let d: f64 = weights.iter().sum();
        if !(d > 0.0) {
            return Err(Error::DegenerateKernel);
        }
        return Ok(SteadyState {
            populations: weights.iter().map(|w| w / d).collect(),
            ln_d: d.ln() + restore,
            route: Route::Tree,
        });
    }
    let (w, _) = normalized_w(g);
    let neg = -w;
    let minors: Vec<LogDet> = (0..n)
        .map(|i| {
            let keep: Vec<usize> = (0..n).filter(|&k| k != i).collect();
            log_det(&principal_submatrix(&neg, &keep))
        })
        .collect();
    let top = minors
        .iter()
        .filter(|m| m.sign > 0.0)
        .map(|m| m.ln_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::DegenerateKernel);
    }
    let rel: Vec<f64> = minors
        .iter()
        .map(|m| {
            if m.sign > 0.0 {
                (m.ln_abs - top).exp()
            } else {
                0.0
            }
        })
        .collect();
    let sum: f64 = rel.iter().sum();
    Ok(SteadyState {
        populations: rel.iter().map(|r| r / sum).collect(),
        ln_d: top + sum.ln() + restore,
        route: Route::Cofactor,
    })
}

/// Net flux along each edge in its stored `lo -> hi` orientation.
pub fn edge_fluxes(g: &LabeledGraph, p: &[f64]) -> Vec<f64> {
    g.edges()
        .iter()
        .map(|e| e.rate_up * p[e.lo] - e.rate_down * p[e.hi])
        .collect()
}

/// Flux along an oriented edge.
pub fn oriented_flux(fluxes: &[f64], e: OrientedEdge) -> f64 {
    if e.up {
        fluxes[e.edge]
    } else {
        -fluxes[e.edge]
    }
}

/// `a * b` as an unevaluated sum `hi + lo`.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    (hi, a.mul_add(b, -hi))
}

/// `a + b` as an unevaluated sum `hi + lo`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `up p_lo − down p_hi` without cancellation error in the products.
fn exact_flux(up: f64, down: f64, lo: f64, hi: f64) -> f64 {
    let (a, ea) = two_prod(up, lo);
    let (b, eb) = two_prod(down, hi);
    let (d, ed) = two_sum(a, -b);
    d + (ed + (ea - eb))
}

/// Net edge fluxes of the steady state approximated by `p`.
///
/// Near equilibrium the net flux is a small difference of large one-way
/// fluxes, so `p` is first corrected by one step of mixed-precision
/// refinement (residual from error-free products, correction from a dense
/// solve) and the fluxes are evaluated from `p + δ`.
pub fn steady_fluxes(g: &LabeledGraph, p: &[f64]) -> Vec<f64> {
    let n = g.n();
    let raw: Vec<f64> = g
        .edges()
        .iter()
        .map(|e| exact_flux(e.rate_up, e.rate_down, p[e.lo], p[e.hi]))
        .collect();
    if !(2..=DENSE_LIMIT).contains(&n) || p.iter().any(|&x| !(x > 0.0)) {
        return raw;
    }
    // net inflow per state, summed with compensation
    let mut r = vec![(0.0, 0.0); n];
    let mut add = |v: usize, x: f64| {
        let (t, e) = two_sum(r[v].0, x);
        r[v] = (t, r[v].1 + e);
    };
    for (e, &j) in g.edges().iter().zip(&raw) {
        add(e.hi, j);
        add(e.lo, -j);
    }
    // Solve for y = δ / p in the one-way flux matrix with rows scaled by
    // the outflow, so tiny populations get relatively accurate corrections.
    let mut m = DMatrix::<f64>::zeros(n, n);
    for e in g.edges() {
        let (f, b) = (e.rate_up * p[e.lo], e.rate_down * p[e.hi]);
        m[(e.hi, e.lo)] += f;
        m[(e.lo, e.lo)] -= f;
        m[(e.lo, e.hi)] += b;
        m[(e.hi, e.hi)] -= b;
    }
    let mut rhs = DVector::from_iterator(n, r.iter().map(|(a, b)| -(a + b)));
    for i in 0..n {
        let out = -m[(i, i)];
        if out > 0.0 {
            m.row_mut(i).scale_mut(1.0 / out);
            rhs[i] /= out;
        }
    }
    let k = (0..n)
        .max_by(|&a, &b| p[a].total_cmp(&p[b]))
        .expect("n >= 2");
    for j in 0..n {
        m[(k, j)] = p[j];
    }
    let mass = p.iter().fold((0.0, 0.0), |(t, c), &x| {
        let (t2, e) = two_sum(t, x);
        (t2, c + e)
    });
    rhs[k] = (1.0 - mass.0) - mass.1;
    let y = match m.lu().solve(&rhs) {
        Some(y) if y.iter().all(|v| v.abs() < 1e-6) => y,
        _ => return raw,
    };
    g.edges()
        .iter()
        .zip(&raw)
        .map(|(e, &j)| j + (e.rate_up * p[e.lo] * y[e.lo] - e.rate_down * p[e.hi] * y[e.hi]))
        .collect()
}

/// Net flux that rounding the rates to f64 can produce on its own:
/// `U ε` times the largest one-way flux. Rates rounded independently
/// violate detailed balance at the `ε` level, so direct-route fluxes
/// below this bound carry no information about the exact model.
pub fn rounding_flux(g: &LabeledGraph, p: &[f64]) -> f64 {
    g.u() as f64 * f64::EPSILON * max_one_way_flux(g, p)
}

pub fn max_one_way_flux(g: &LabeledGraph, p: &[f64]) -> f64 {
    g.edges()
        .iter()
        .map(|e| (e.rate_up * p[e.lo]).max(e.rate_down * p[e.hi]))
        .fold(0.0f64, f64::max)
}

/// Heat current per bath from steady-state populations; positive means
/// energy flows from the bath into the system.
pub fn physical_currents_direct(g: &LabeledGraph, p: &[f64]) -> Vec<f64> {
    let j = steady_fluxes(g, p);
    let mut q = vec![0.0; g.baths().len()];
    for (e, jf) in g.edges().iter().zip(&j) {
        q[e.bath] += jf * e.gap;
    }
    q
}

/// Entropy production as the edge sum `Σ_e J ln(W_+ p_lo / W_- p_hi)`.
pub fn edge_entropy(g: &LabeledGraph, p: &[f64]) -> f64 {
    let j = steady_fluxes(g, p);
    g.edges()
        .iter()
        .zip(&j)
        .map(|(e, &jf)| {
            if jf == 0.0 {
                return 0.0;
            }
            let (fwd, back) = (e.rate_up * p[e.lo], e.rate_down * p[e.hi]);
            if back > 0.0 && fwd > 0.0 {
                let x = jf / back;
                jf * if x > -0.5 {
                    x.ln_1p()
                } else {
                    (fwd / back).ln()
                }
            } else {
                jf * (-e.gap / g.temperature(e.bath))
            }
        })
        .sum()
}

/// Residual `‖W p‖_∞ / ‖W‖_∞` of a population vector.
pub fn residual(g: &LabeledGraph, p: &[f64]) -> f64 {
    let (w, _) = normalized_w(g);
    let r = &w * DVector::from_column_slice(p);
    let norm = (0..w.nrows())
        .map(|i| w.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    r.amax() / norm.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeSpec, GraphSpec, Level, RateSource};
    use crate::models::{Bath, Model, FIG4, FIG5};

    fn explicit(levels: &[f64], edges: &[(usize, usize, f64, f64)], t: f64) -> LabeledGraph {
        LabeledGraph::from_spec(&GraphSpec {
            levels: levels
                .iter()
                .map(|&energy| Level {
                    energy,
                    label: None,
                })
                .collect(),
            baths: ["x", "y", "z"]
                .iter()
                .map(|l| Bath::bosonic(l, t, 1, 1.0))
                .collect(),
            edges: edges
                .iter()
                .enumerate()
                .map(|(k, &(i, j, up, down))| EdgeSpec {
                    i,
                    j,
                    bath: k % 3,
                    rates: RateSource::Explicit { up, down },
                })
                .collect(),
        })
        .unwrap()
    }

    #[test]
    fn two_level_matrix_and_d() {
        let e = 1.0;
        let t = 1.0 / (2.0f64).ln();
        // up = 1, down = e^{E/T} = 2
        let g = explicit(&[0.0, e], &[(0, 1, 1.0, 2.0)], t);
        let w = assemble_w(&g);
        assert_eq!(w, DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 1.0, -2.0]));
        assert!((big_d(&g).unwrap() - 3.0).abs() < 1e-14);
        let p = steady_nullspace(&g).unwrap().populations;
        assert!((p[1] / p[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn triangle_with_unit_rates() {
        let g = explicit(
            &[0.0, 1e-300, 2e-300],
            &[(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0), (0, 2, 1.0, 1.0)],
            1.0,
        );
        let s = steady_tree(&g, 100).unwrap();
        assert_eq!(s.route, Route::Tree);
        assert!((s.d() - 9.0).abs() < 1e-12);
        for p in &s.populations {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn routes_agree_on_presets() {
        for (preset, m, t) in [
            (
                FIG5,
                Model::G4 {
                    omega_c_prime: None,
                },
                1.0,
            ),
            (FIG4, Model::C3p3np { n_plus: 2 }, 0.3),
            (FIG5, Model::G4B { b: 4 }, 0.3),
        ] {
            let g = preset.build(m, t).unwrap();
            let a = steady_nullspace(&g).unwrap();
            let b = steady_tree(&g, 1_000_000).unwrap();
            let c = steady_tree(&g, 0).unwrap();
            assert_eq!(c.route, Route::Cofactor);
            for i in 0..g.n() {
                assert!((a.populations[i] - b.populations[i]).abs() <= 1e-9 * b.populations[i]);
                assert!((c.populations[i] - b.populations[i]).abs() <= 1e-9 * b.populations[i]);
            }
            assert!((a.ln_d - b.ln_d).abs() < 1e-10);
            assert!((c.ln_d - b.ln_d).abs() < 1e-10);
            assert!(residual(&g, &a.populations) < 1e-10);
            let d1 = ln_big_d_with_row(&g, 0).unwrap();
            let dn = ln_big_d_with_row(&g, g.n() - 1).unwrap();
            assert!((d1 - dn).abs() < 1e-12);
        }
    }

    #[test]
    fn fluxes_conserve_and_first_law_holds() {
        let g = FIG5.build(Model::G4B { b: 4 }, 1.0).unwrap();
        let p = steady_nullspace(&g).unwrap().populations;
        let j = edge_fluxes(&g, &p);
        let gross = g.edges().iter().fold(0.0f64, |m, e| {
            m.max(e.rate_up * p[e.lo]).max(e.rate_down * p[e.hi])
        });
        for v in 0..g.n() {
            let net: f64 = g
                .neighbors(v)
                .iter()
                .map(|&(_, e)| if g.edges()[e].lo == v { -j[e] } else { j[e] })
                .sum();
            assert!(net.abs() < 1e-13 * gross);
        }
        let q = physical_currents_direct(&g, &p);
        let qmax = q.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(q.iter().sum::<f64>().abs() < 1e-12 * qmax);
        let r = g.roles().unwrap();
        // transformer regime: X^c + X^w + X^h = -0.1 - 0.5/7 + 1/6 < 0
        assert!(q[r.cold] < 0.0 && q[r.work] < 0.0 && q[r.hot] > 0.0);
        assert!(edge_entropy(&g, &p) > 0.0);
    }

    #[test]
    fn equilibrium_has_no_flux() {
        let mut baths = FIG5.baths(1.0);
        for b in &mut baths {
            b.temperature = 2.0;
        }
        let g = crate::models::build(&FIG5.params(Model::G4B { b: 4 }), &baths).unwrap();
        let p = steady_nullspace(&g).unwrap().populations;
        for j in edge_fluxes(&g, &p) {
            assert!(j.abs() < 1e-14);
        }
    }

    #[test]
    fn homogeneity() {
        let g = FIG5
            .build(
                Model::G4 {
                    omega_c_prime: None,
                },
                1.0,
            )
            .unwrap();
        let s = 10.0;
        let gs = g.scaled(s);
        let (a, b) = (
            steady_tree(&g, 100).unwrap(),
            steady_tree(&gs, 100).unwrap(),
        );
        assert!((b.ln_d - a.ln_d - 3.0 * s.ln()).abs() < 1e-12);
        for i in 0..4 {
            assert!((a.populations[i] - b.populations[i]).abs() < 1e-15);
        }
    }
}
