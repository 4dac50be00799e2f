use nalgebra::Vector2;

use crate::mesh::Point;

/// Where a Lagrange node of the reference triangle lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Vertex(usize),
    /// Interior node `position` (1..k) of local edge `edge`, counted from the
    /// edge's first vertex `(edge + 1) % 3` towards `(edge + 2) % 3`.
    Edge { edge: usize, position: usize },
    Interior(usize),
}

/// Equispaced degree-k Lagrange element on the unit triangle
/// `{x >= 0, y >= 0, x + y <= 1}`.
///
/// Local order: the three vertices, then the interior nodes of local edges
/// 0, 1, 2, then the cell-interior nodes.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    degree: usize,
    multi_indices: Vec<[usize; 3]>,
    nodes: Vec<Point>,
    kinds: Vec<NodeKind>,
}

impl ReferenceElement {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "Lagrange degree must be at least 1");
        let k = degree;
        let mut multi_indices = Vec::with_capacity((k + 1) * (k + 2) / 2);
        let mut kinds = Vec::new();
        for j in 0..3 {
            let mut a = [0; 3];
            a[j] = k;
            multi_indices.push(a);
            kinds.push(NodeKind::Vertex(j));
        }
        for j in 0..3 {
            let (p, q) = ((j + 1) % 3, (j + 2) % 3);
            for m in 1..k {
                let mut a = [0; 3];
                a[p] = k - m;
                a[q] = m;
                multi_indices.push(a);
                kinds.push(NodeKind::Edge { edge: j, position: m });
            }
        }
        let mut interior = 0;
        for a2 in 1..k {
            for a1 in 1..k {
                if a1 + a2 < k {
                    multi_indices.push([k - a1 - a2, a1, a2]);
                    kinds.push(NodeKind::Interior(interior));
                    interior += 1;
                }
            }
        }
        let nodes = multi_indices
            .iter()
            .map(|a| Point::new(a[1] as f64 / k as f64, a[2] as f64 / k as f64))
            .collect();
        Self { degree, multi_indices, nodes, kinds }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_interior(&self) -> usize {
        let k = self.degree;
        if k < 3 {
            0
        } else {
            (k - 1) * (k - 2) / 2
        }
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    /// Local node indices lying on the closed local edge `edge`, ordered
    /// from `(edge + 1) % 3` to `(edge + 2) % 3`.
    pub fn edge_closure(&self, edge: usize) -> Vec<usize> {
        let k = self.degree;
        let mut out = Vec::with_capacity(k + 1);
        out.push((edge + 1) % 3);
        out.extend((0..k - 1).map(|m| 3 + edge * (k - 1) + m));
        out.push((edge + 2) % 3);
        out
    }

    /// Basis values at `p`. Valid for any point in the plane (the basis
    /// functions are polynomials), not only inside the reference triangle.
    pub fn eval(&self, p: &Point, values: &mut [f64]) {
        let tables = self.factor_tables(p);
        for (i, a) in self.multi_indices.iter().enumerate() {
            values[i] = tables[0][a[0]].0 * tables[1][a[1]].0 * tables[2][a[2]].0;
        }
    }

    /// Basis values and reference gradients at `p`.
    pub fn eval_with_grad(&self, p: &Point, values: &mut [f64], grads: &mut [Vector2<f64>]) {
        let tables = self.factor_tables(p);
        for (i, a) in self.multi_indices.iter().enumerate() {
            let (f0, d0) = tables[0][a[0]];
            let (f1, d1) = tables[1][a[1]];
            let (f2, d2) = tables[2][a[2]];
            values[i] = f0 * f1 * f2;
            // derivatives with respect to the barycentric coordinates
            let g0 = d0 * f1 * f2;
            let g1 = f0 * d1 * f2;
            let g2 = f0 * f1 * d2;
            // lambda_0 = 1 - x - y, lambda_1 = x, lambda_2 = y
            grads[i] = Vector2::new(g1 - g0, g2 - g0);
        }
    }

    pub fn values_at(&self, p: &Point) -> Vec<f64> {
        let mut v = vec![0.0; self.num_nodes()];
        self.eval(p, &mut v);
        v
    }

    pub fn values_and_grads_at(&self, p: &Point) -> (Vec<f64>, Vec<Vector2<f64>>) {
        let mut v = vec![0.0; self.num_nodes()];
        let mut g = vec![Vector2::zeros(); self.num_nodes()];
        self.eval_with_grad(p, &mut v, &mut g);
        (v, g)
    }

    /// `tables[j][a] = (P_a(k lambda_j), d/dlambda_j P_a(k lambda_j))` with
    /// `P_a(s) = prod_{m<a} (s - m) / (m + 1)`.
    fn factor_tables(&self, p: &Point) -> [Vec<(f64, f64)>; 3] {
        let k = self.degree;
        let lambda = [1.0 - p.x - p.y, p.x, p.y];
        let kf = k as f64;
        lambda.map(|l| {
            let s = kf * l;
            let mut table = Vec::with_capacity(k + 1);
            let (mut value, mut deriv) = (1.0, 0.0);
            table.push((value, deriv));
            for m in 0..k {
                let denom = (m + 1) as f64;
                let f = (s - m as f64) / denom;
                deriv = deriv * f + value * kf / denom;
                value *= f;
                table.push((value, deriv));
            }
            table
        })
    }
}

/// 1D equispaced Lagrange interpolation helper on `[0, 1]`.
pub(crate) fn lagrange_1d(degree: usize, values: &[f64], s: f64) -> f64 {
    debug_assert_eq!(values.len(), degree + 1);
    if degree == 0 {
        return values[0];
    }
    let nodes: Vec<f64> = (0..=degree).map(|m| m as f64 / degree as f64).collect();
    let mut acc = 0.0;
    for (i, &vi) in values.iter().enumerate() {
        let mut w = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if j != i {
                w *= (s - xj) / (nodes[i] - xj);
            }
        }
        acc += w * vi;
    }
    acc
}
