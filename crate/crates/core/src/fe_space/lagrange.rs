use nalgebra::Vector2;

use super::reference::{NodeKind, ReferenceElement};
use crate::mesh::{Mesh, Point};

/// Global node numbering of the continuous degree-k Lagrange space on a mesh.
///
/// Numbering: mesh vertices first, then `k - 1` nodes per edge (ordered from
/// the lower to the higher vertex index), then the element-interior nodes.
#[derive(Debug, Clone)]
pub struct LagrangeSpace {
    reference: ReferenceElement,
    element_nodes: Vec<usize>,
    coords: Vec<Point>,
    on_boundary: Vec<bool>,
    num_vertices: usize,
}

impl LagrangeSpace {
    pub fn new(mesh: &Mesh, degree: usize) -> Self {
        let reference = ReferenceElement::new(degree);
        let k = degree;
        let nloc = reference.num_nodes();
        let nv = mesh.num_vertices();
        let ne = mesh.num_edges();
        let ni = reference.num_interior();
        let total = nv + ne * (k - 1) + mesh.num_elements() * ni;

        let mut coords = vec![Point::zeros(); total];
        let mut on_boundary = vec![false; total];
        for v in 0..nv {
            coords[v] = mesh.vertex(v);
            on_boundary[v] = mesh.is_boundary_vertex(v);
        }
        for (e, edge) in mesh.edges().iter().enumerate() {
            let (a, b) = (mesh.vertex(edge[0]), mesh.vertex(edge[1]));
            for m in 1..k {
                let g = nv + e * (k - 1) + m - 1;
                coords[g] = a + (b - a) * (m as f64 / k as f64);
                on_boundary[g] = mesh.is_boundary_edge(e);
            }
        }

        let mut element_nodes = Vec::with_capacity(mesh.num_elements() * nloc);
        for t in 0..mesh.num_elements() {
            let el = mesh.element(t);
            let edges = mesh.element_edges(t);
            let map = mesh.map(t);
            for (i, kind) in reference.kinds().iter().enumerate() {
                let g = match *kind {
                    NodeKind::Vertex(j) => el[j],
                    NodeKind::Edge { edge, position } => {
                        let e = edges[edge];
                        let first = el[(edge + 1) % 3];
                        let pos = if first == mesh.edges()[e][0] { position } else { k - position };
                        nv + e * (k - 1) + pos - 1
                    }
                    NodeKind::Interior(j) => {
                        let g = nv + ne * (k - 1) + t * ni + j;
                        coords[g] = map.apply(&reference.nodes()[i]);
                        g
                    }
                };
                element_nodes.push(g);
            }
        }
        Self { reference, element_nodes, coords, on_boundary, num_vertices: nv }
    }

    pub fn degree(&self) -> usize {
        self.reference.degree()
    }

    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_local(&self) -> usize {
        self.reference.num_nodes()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn is_vertex_node(&self, node: usize) -> bool {
        node < self.num_vertices
    }

    /// Global node indices of element `t` in reference-local order.
    pub fn element_nodes(&self, t: usize) -> &[usize] {
        let n = self.num_local();
        &self.element_nodes[t * n..(t + 1) * n]
    }

    pub fn node_coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn node(&self, g: usize) -> Point {
        self.coords[g]
    }

    /// Whether global node `g` lies on the outer boundary of the mesh.
    pub fn on_boundary(&self, g: usize) -> bool {
        self.on_boundary[g]
    }

    /// Nodal interpolation `I_k f`.
    pub fn interpolate<F: Fn(&Point) -> f64>(&self, f: F) -> Vec<f64> {
        self.coords.iter().map(f).collect()
    }

    /// Element-local evaluation of a scalar field given by global nodal values.
    pub fn eval_scalar(&self, t: usize, values: &[f64], ref_point: &Point) -> f64 {
        let phi = self.reference.values_at(ref_point);
        self.element_nodes(t).iter().zip(&phi).map(|(&g, &p)| values[g] * p).sum()
    }

    /// Element-local value and reference gradient of a scalar field.
    pub fn eval_scalar_with_ref_grad(&self, t: usize, values: &[f64], ref_point: &Point) -> (f64, Vector2<f64>) {
        let (phi, dphi) = self.reference.values_and_grads_at(ref_point);
        let mut v = 0.0;
        let mut g = Vector2::zeros();
        for (i, &node) in self.element_nodes(t).iter().enumerate() {
            v += values[node] * phi[i];
            g += values[node] * dphi[i];
        }
        (v, g)
    }
}
