use nalgebra::DMatrix;

use super::LabeledGraph;

/// The matrices of a graph used by the topology analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrices {
    pub a: DMatrix<f64>,
    pub a_tilde: DMatrix<f64>,
    pub a_prime: DMatrix<f64>,
}

impl AdjacencyMatrices {
    /// `A`, `Ã` and `A′` with per-edge multipliers from `scale`.
    pub fn new(g: &LabeledGraph, scale: impl Fn(usize) -> f64) -> Self {
        AdjacencyMatrices {
            a: adjacency_matrix(g),
            a_tilde: degree_adjacency(g),
            a_prime: scaled_adjacency(g, scale),
        }
    }
}

/// 0/1 adjacency matrix.
pub fn adjacency_matrix(g: &LabeledGraph) -> DMatrix<f64> {
    scaled_adjacency(g, |_| 1.0)
}

/// Adjacency matrix with vertex degrees on the diagonal.
pub fn degree_adjacency(g: &LabeledGraph) -> DMatrix<f64> {
    let mut m = adjacency_matrix(g);
    for v in 0..g.n() {
        m[(v, v)] = g.degree(v) as f64;
    }
    m
}

/// Unweighted Kirchhoff Laplacian: degrees on the diagonal, -1 per edge.
pub fn laplacian(g: &LabeledGraph) -> DMatrix<f64> {
    let mut m = -adjacency_matrix(g);
    for v in 0..g.n() {
        m[(v, v)] = g.degree(v) as f64;
    }
    m
}

/// Symmetric adjacency with entry `scale(edge)` for each edge.
pub fn scaled_adjacency(g: &LabeledGraph, scale: impl Fn(usize) -> f64) -> DMatrix<f64> {
    let n = g.n();
    let mut m = DMatrix::zeros(n, n);
    for (k, e) in g.edges().iter().enumerate() {
        let s = scale(k);
        m[(e.lo, e.hi)] = s;
        m[(e.hi, e.lo)] = s;
    }
    m
}

/// Number of triangles, `Tr(A^3) / 6`.
pub fn count_triangles(g: &LabeledGraph) -> usize {
    let a = adjacency_matrix(g);
    let a3 = &a * &a * &a;
    (a3.trace() / 6.0).round() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Model, FIG5};

    #[test]
    fn triangle_and_g4() {
        let t = FIG5.build(Model::C3Cwh, 1.0).unwrap();
        let m = AdjacencyMatrices::new(&t, |_| 1.0);
        assert_eq!(
            m.a,
            DMatrix::from_row_slice(3, 3, &[0., 1., 1., 1., 0., 1., 1., 1., 0.])
        );
        assert_eq!(m.a_tilde.diagonal().as_slice(), &[2., 2., 2.]);
        assert_eq!(m.a_prime, m.a);
        assert_eq!(count_triangles(&t), 1);

        let g = FIG5
            .build(
                Model::G4 {
                    omega_c_prime: None,
                },
                1.0,
            )
            .unwrap();
        assert_eq!(
            degree_adjacency(&g).diagonal().as_slice(),
            &[2., 3., 3., 2.]
        );
        assert_eq!(count_triangles(&g), 2);
        assert_eq!(
            laplacian(&g).row_sum().iter().map(|x| x.abs()).sum::<f64>(),
            0.0
        );
    }
}
