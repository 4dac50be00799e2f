//! Simplicial background meshes on axis-aligned boxes.
//!
//! Elements are stored with positive orientation. Local edge `j` of an element
//! is the edge opposite its local vertex `j`.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, lo, hi)
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

/// Affine map `x = A x_hat + b` from the reference triangle onto an element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a: Matrix2<f64>,
    pub b: Point,
    pub det: f64,
    pub a_inv: Matrix2<f64>,
}

impl AffineMap {
    fn from_vertices(p0: &Point, p1: &Point, p2: &Point) -> Self {
        let a = Matrix2::from_columns(&[p1 - p0, p2 - p0]);
        let det = a.determinant();
        let a_inv = a.try_inverse().unwrap_or_else(Matrix2::zeros);
        Self { a, b: *p0, det, a_inv }
    }

    #[inline]
    pub fn apply(&self, ref_point: &Point) -> Point {
        self.a * ref_point + self.b
    }

    #[inline]
    pub fn inverse_apply(&self, x: &Point) -> Point {
        self.a_inv * (x - self.b)
    }

    /// `A^{-T}`, which maps reference gradients to physical ones.
    #[inline]
    pub fn inv_transpose(&self) -> Matrix2<f64> {
        self.a_inv.transpose()
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    elements: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_elements: Vec<(usize, Option<usize>)>,
    element_edges: Vec<[usize; 3]>,
    vertex_elements: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    maps: Vec<AffineMap>,
    h_max: f64,
}

impl Mesh {
    /// Builds a mesh and its adjacency from raw vertex and element lists.
    pub fn from_parts(vertices: Vec<Point>, elements: Vec<[usize; 3]>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidMesh("mesh has no elements".into()));
        }
        let nv = vertices.len();
        let mut maps = Vec::with_capacity(elements.len());
        for (t, el) in elements.iter().enumerate() {
            if el.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("element {t} references a missing vertex")));
            }
            let map = AffineMap::from_vertices(&vertices[el[0]], &vertices[el[1]], &vertices[el[2]]);
            if !(map.det > 0.0) {
                return Err(Error::InvalidMesh(format!("element {t} is not positively oriented")));
            }
            maps.push(map);
        }

        let (edges, edge_elements, element_edges) = build_edges(&elements)?;

        let mut vertex_elements = vec![Vec::new(); nv];
        for (t, el) in elements.iter().enumerate() {
            for &v in el {
                vertex_elements[v].push(t);
            }
        }

        let mut boundary_vertex = vec![false; nv];
        let mut h_max: f64 = 0.0;
        for (e, edge) in edges.iter().enumerate() {
            if edge_elements[e].1.is_none() {
                boundary_vertex[edge[0]] = true;
                boundary_vertex[edge[1]] = true;
            }
            h_max = h_max.max((vertices[edge[0]] - vertices[edge[1]]).norm());
        }

        Ok(Self {
            vertices,
            elements,
            edges,
            edge_elements,
            element_edges,
            vertex_elements,
            boundary_vertex,
            maps,
            h_max,
        })
    }

    /// Structured triangulation with `n` cells per axis, every cell split along
    /// one diagonal. Diagonal directions alternate in a checkerboard pattern.
    pub fn structured(domain: BoundingBox, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("subdivision count must be at least 1".into()));
        }
        let width = domain.x_max - domain.x_min;
        let height = domain.y_max - domain.y_min;
        if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
            return Err(Error::InvalidMesh("domain box has zero or negative extent".into()));
        }

        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                // Snap the far edge exactly onto the box boundary.
                let x = if i == n { domain.x_max } else { domain.x_min + width * i as f64 / n as f64 };
                let y = if j == n { domain.y_max } else { domain.y_min + height * j as f64 / n as f64 };
                vertices.push(Point::new(x, y));
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut elements = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (p00, p10, p01, p11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
                if (i + j) % 2 == 0 {
                    elements.push([p00, p10, p11]);
                    elements.push([p00, p11, p01]);
                } else {
                    elements.push([p00, p10, p01]);
                    elements.push([p10, p11, p01]);
                }
            }
        }
        Self::from_parts(vertices, elements)
    }

    /// Red refinement: every triangle is split into four congruent children
    /// through its edge midpoints. Parent vertices keep their indices.
    pub fn refine_uniform(&self) -> Self {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|e| 0.5 * (self.vertices[e[0]] + self.vertices[e[1]])));
        let mut elements = Vec::with_capacity(4 * self.elements.len());
        for (t, el) in self.elements.iter().enumerate() {
            let ed = &self.element_edges[t];
            let m = [nv + ed[0], nv + ed[1], nv + ed[2]];
            elements.push([el[0], m[2], m[1]]);
            elements.push([m[2], el[1], m[0]]);
            elements.push([m[1], m[0], el[2]]);
            elements.push([m[0], m[1], m[2]]);
        }
        Self::from_parts(vertices, elements).expect("refinement of a valid mesh is valid")
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn element(&self, t: usize) -> [usize; 3] {
        self.elements[t]
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// The one or two elements adjacent to edge `e`.
    pub fn edge_elements(&self, e: usize) -> (usize, Option<usize>) {
        self.edge_elements[e]
    }

    /// Global edge indices of element `t`; entry `j` is opposite local vertex `j`.
    pub fn element_edges(&self, t: usize) -> [usize; 3] {
        self.element_edges[t]
    }

    pub fn vertex_elements(&self, v: usize) -> &[usize] {
        &self.vertex_elements[v]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_elements[e].1.is_none()
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.boundary_vertex[v]).collect()
    }

    /// Longest edge length in the mesh.
    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    /// Diameter (longest edge) of element `t`.
    pub fn element_diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.elements[t];
        let p = &self.vertices;
        (p[a] - p[b]).norm().max((p[b] - p[c]).norm()).max((p[c] - p[a]).norm())
    }

    pub fn element_area(&self, t: usize) -> f64 {
        0.5 * self.maps[t].det
    }

    pub fn total_area(&self) -> f64 {
        self.maps.iter().map(|m| 0.5 * m.det).sum()
    }

    pub fn affine_map(&self, t: usize) -> Result<&AffineMap> {
        self.maps
            .get(t)
            .ok_or(Error::ElementOutOfRange { index: t, count: self.elements.len() })
    }

    /// Unchecked variant of [`Mesh::affine_map`] for hot loops.
    #[inline]
    pub fn map(&self, t: usize) -> &AffineMap {
        &self.maps[t]
    }

    /// Maps a reference point of the unit triangle onto element `t`.
    pub fn map_to_physical(&self, t: usize, ref_point: &Point) -> Result<Point> {
        Ok(self.affine_map(t)?.apply(ref_point))
    }

    pub fn element_centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.elements[t];
        (self.vertices[a] + self.vertices[b] + self.vertices[c]) / 3.0
    }

    /// Elements containing vertex `v`, optionally restricted to a marked subset.
    pub fn vertex_patch(&self, restriction: Option<&[bool]>, v: usize) -> Result<Vec<usize>> {
        let patch: Vec<usize> = self
            .vertex_elements
            .get(v)
            .ok_or(Error::EmptyPatch { vertex: v })?
            .iter()
            .copied()
            .filter(|&t| restriction.is_none_or(|r| r[t]))
            .collect();
        if patch.is_empty() {
            return Err(Error::EmptyPatch { vertex: v });
        }
        Ok(patch)
    }

    /// Writes the debugging text format: `v x y` lines followed by `t i j k`
    /// lines with zero-based vertex indices.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for p in &self.vertices {
            writeln!(out, "v {} {}", p.x, p.y)?;
        }
        for el in &self.elements {
            writeln!(out, "t {} {} {}", el[0], el[1], el[2])?;
        }
        Ok(())
    }
}

type EdgeTables = (Vec<[usize; 2]>, Vec<(usize, Option<usize>)>, Vec<[usize; 3]>);

fn build_edges(elements: &[[usize; 3]]) -> Result<EdgeTables> {
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(elements.len() * 2);
    let mut edges = Vec::new();
    let mut edge_elements: Vec<(usize, Option<usize>)> = Vec::new();
    let mut element_edges = Vec::with_capacity(elements.len());
    for (t, el) in elements.iter().enumerate() {
        let mut local = [0usize; 3];
        for (j, slot) in local.iter_mut().enumerate() {
            let (a, b) = (el[(j + 1) % 3], el[(j + 2) % 3]);
            let key = (a.min(b), a.max(b));
            let idx = *lookup.entry(key).or_insert_with(|| {
                edges.push([key.0, key.1]);
                edge_elements.push((t, None));
                edges.len() - 1
            });
            if edge_elements[idx].0 != t {
                if edge_elements[idx].1.is_some() {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({}, {}) is shared by more than two elements",
                        key.0, key.1
                    )));
                }
                edge_elements[idx].1 = Some(t);
            }
            *slot = idx;
        }
        element_edges.push(local);
    }
    Ok((edges, edge_elements, element_edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> BoundingBox {
        BoundingBox::square(0.0, 1.0)
    }

    #[test]
    fn minimal_tiling() {
        let m = Mesh::structured(unit(), 1).unwrap();
        assert_eq!(m.num_elements(), 2);
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_edges(), 5);
    }

    #[test]
    fn benchmark_domain_element_count() {
        let m = Mesh::structured(BoundingBox::square(-1.5, 1.5), 8).unwrap();
        assert_eq!(m.num_elements(), 128);
        assert!((m.total_area() - 9.0).abs() <= 1e-12 * 9.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Mesh::structured(unit(), 0).is_err());
        assert!(Mesh::structured(BoundingBox::new(0.0, 0.0, 0.0, 1.0), 3).is_err());
        let v = vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)];
        assert!(Mesh::from_parts(v, vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn refinement_counts_and_h() {
        let m = Mesh::structured(unit(), 1).unwrap();
        let r = m.refine_uniform();
        assert_eq!(r.num_elements(), 8);
        assert!((r.h_max() - m.h_max() / 2.0).abs() < 1e-15);
        assert!((r.total_area() - 1.0).abs() < 1e-12);
        let rr = Mesh::structured(unit(), 3).unwrap().refine_uniform().refine_uniform();
        assert_eq!(rr.num_elements(), 18 * 16);
        assert!((rr.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_nesting() {
        let m = Mesh::structured(BoundingBox::new(-1.0, 2.0, 0.5, 1.5), 3).unwrap();
        let r = m.refine_uniform();
        for v in 0..m.num_vertices() {
            assert_eq!(m.vertex(v), r.vertex(v));
        }
        for t in 0..m.num_elements() {
            let map = m.map(t);
            for c in 0..4 {
                for &v in &r.element(4 * t + c) {
                    let xh = map.inverse_apply(&r.vertex(v));
                    let lam = [1.0 - xh.x - xh.y, xh.x, xh.y];
                    assert!(lam.iter().all(|&l| l >= -1e-14), "child vertex outside parent");
                }
            }
        }
    }

    #[test]
    fn affine_map_identities() {
        let m = Mesh::structured(BoundingBox::new(-1.0, 2.0, 0.5, 1.5), 4).unwrap();
        for t in 0..m.num_elements() {
            let el = m.element(t);
            let map = m.affine_map(t).unwrap();
            assert_eq!(map.apply(&Point::zeros()), m.vertex(el[0]));
            let c = map.apply(&Point::new(1.0 / 3.0, 1.0 / 3.0));
            assert!((c - m.element_centroid(t)).norm() < 1e-14);
            assert!((map.det.abs() - 2.0 * m.element_area(t)).abs() < 1e-14);
        }
        assert!(m.affine_map(m.num_elements()).is_err());
    }

    #[test]
    fn patches() {
        let m = Mesh::structured(unit(), 4).unwrap();
        // grid vertex (1,1) sits on four diagonals, (2,1) on none
        let v = 5 + 1;
        assert_eq!(m.vertex_patch(None, v).unwrap().len(), 8);
        assert_eq!(m.vertex_patch(None, v + 1).unwrap().len(), 4);
        // interior edge midpoints created by refinement have valence 6
        let r = m.refine_uniform();
        let mid = (0..r.num_vertices())
            .skip(m.num_vertices())
            .find(|&w| !r.is_boundary_vertex(w))
            .unwrap();
        assert_eq!(r.vertex_patch(None, mid).unwrap().len(), 6);
        let corner = m.vertex_patch(None, 0).unwrap();
        assert!(corner.len() == 1 || corner.len() == 2);
        let mut mask = vec![false; m.num_elements()];
        mask[m.vertex_elements(v)[0]] = true;
        let restricted = m.vertex_patch(Some(&mask), v).unwrap();
        assert_eq!(restricted.len(), 1);
        assert!(m.vertex_patch(Some(&mask), 24).is_err());
    }

    #[test]
    fn edge_sharing() {
        let m = Mesh::structured(unit(), 5).unwrap().refine_uniform();
        let mut boundary = 0;
        for e in 0..m.num_edges() {
            if m.is_boundary_edge(e) {
                boundary += 1;
            }
        }
        assert_eq!(boundary, 4 * 10);
        let (edges, ee, el_edges) = build_edges(m.elements()).unwrap();
        assert_eq!(edges, m.edges);
        assert_eq!(ee, m.edge_elements);
        assert_eq!(el_edges, m.element_edges);
    }

    #[test]
    fn text_dump() {
        let m = Mesh::structured(unit(), 1).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(s.lines().filter(|l| l.starts_with("t ")).count(), 2);
    }
}
