//! Level-set interpolation and the piecewise planar reference interface.
//!
//! The cut state of an element is decided from the vertex values of the
//! piecewise linear interpolant only. The higher-order zero level of the
//! level-set function is never intersected geometrically; it is reached
//! through the mesh deformation.

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::fe_space::LagrangeSpace;
use crate::mesh::{Mesh, Point};

/// Sub-domain label. `Negative` is `{phi_lin < 0}` (the inner domain),
/// `Positive` is `{phi_lin > 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Negative,
    Positive,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Negative, Side::Positive];

    pub fn index(self) -> usize {
        match self {
            Side::Negative => 0,
            Side::Positive => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Negative => Side::Positive,
            Side::Positive => Side::Negative,
        }
    }

    pub fn of_value(v: f64) -> Side {
        if v < 0.0 {
            Side::Negative
        } else {
            Side::Positive
        }
    }
}

const REF_VERTICES: [Point; 3] = [
    Point::new(0.0, 0.0),
    Point::new(1.0, 0.0),
    Point::new(0.0, 1.0),
];

/// Level-set function in the degree-k Lagrange space together with its
/// piecewise linear nodal interpolant.
#[derive(Debug, Clone)]
pub struct LevelSetFE {
    degree: usize,
    nodal_values: Vec<f64>,
    p1_values: Vec<f64>,
}

impl LevelSetFE {
    /// Wraps given nodal values. Vertex values that are (numerically) zero
    /// are moved slightly to the positive side, in both the high-order and
    /// the linear representation.
    pub fn from_nodal_values(mesh: &Mesh, space: &LagrangeSpace, mut nodal_values: Vec<f64>) -> Result<Self> {
        assert_eq!(nodal_values.len(), space.num_nodes());
        for (g, v) in nodal_values.iter().enumerate() {
            if !v.is_finite() {
                let p = space.node(g);
                return Err(Error::NonFiniteLevelSet { node: g, x: p.x, y: p.y });
            }
        }
        let nv = mesh.num_vertices();
        let mut p1_values = nodal_values[..nv].to_vec();

        let grad_max = (0..mesh.num_elements())
            .map(|t| linear_gradient(mesh, t, &p1_values).norm())
            .fold(0.0, f64::max);
        let h = mesh.h_max();
        let threshold = 1e-12 * h * grad_max;
        for t in 0..mesh.num_elements() {
            if mesh.element(t).iter().all(|&v| p1_values[v].abs() <= threshold) {
                return Err(Error::DegenerateLevelSet { element: t });
            }
        }
        for v in 0..nv {
            if p1_values[v].abs() < threshold || p1_values[v] == 0.0 {
                p1_values[v] = 1e-12 * h;
                nodal_values[v] = p1_values[v];
            }
        }
        Ok(Self { degree: space.degree(), nodal_values, p1_values })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodal_values(&self) -> &[f64] {
        &self.nodal_values
    }

    /// Vertex values of the piecewise linear interpolant.
    pub fn p1_values(&self) -> &[f64] {
        &self.p1_values
    }

    /// Value of the piecewise linear interpolant on element `t`.
    pub fn eval_linear(&self, mesh: &Mesh, t: usize, ref_point: &Point) -> f64 {
        let [a, b, c] = mesh.element(t);
        let lam = [1.0 - ref_point.x - ref_point.y, ref_point.x, ref_point.y];
        lam[0] * self.p1_values[a] + lam[1] * self.p1_values[b] + lam[2] * self.p1_values[c]
    }

    /// Physical gradient of the piecewise linear interpolant on element `t`.
    pub fn linear_gradient(&self, mesh: &Mesh, t: usize) -> Vector2<f64> {
        linear_gradient(mesh, t, &self.p1_values)
    }
}

fn linear_gradient(mesh: &Mesh, t: usize, p1: &[f64]) -> Vector2<f64> {
    let [a, b, c] = mesh.element(t);
    let ref_grad = Vector2::new(p1[b] - p1[a], p1[c] - p1[a]);
    mesh.map(t).inv_transpose() * ref_grad
}

/// Nodal interpolation of `phi` into the Lagrange space.
pub fn interpolate_levelset<F: Fn(&Point) -> f64>(phi: F, mesh: &Mesh, space: &LagrangeSpace) -> Result<LevelSetFE> {
    LevelSetFE::from_nodal_values(mesh, space, space.interpolate(phi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementClass {
    Negative,
    Positive,
    Cut,
}

/// Geometry of one element cut by the linear interface, in reference coordinates.
#[derive(Debug, Clone)]
pub struct CutElement {
    pub element: usize,
    /// Local index of the vertex whose sign differs from the other two.
    pub lone_vertex: usize,
    /// Interface segment endpoints (reference coordinates).
    pub segment: [Point; 2],
    /// Positively oriented reference sub-triangles, indexed by [`Side::index`].
    pub sub_triangles: [Vec<[Point; 3]>; 2],
    /// Unit normal of the linear interface pointing from the negative to the positive side.
    pub normal: Vector2<f64>,
    /// Physical areas of the element parts on each side.
    pub side_area: [f64; 2],
}

impl CutElement {
    /// Physical length of the interface segment.
    pub fn segment_length(&self, mesh: &Mesh) -> f64 {
        let map = mesh.map(self.element);
        (map.apply(&self.segment[1]) - map.apply(&self.segment[0])).norm()
    }
}

/// Cut classification of all elements with respect to the linear interface.
#[derive(Debug, Clone)]
pub struct CutTopology {
    classes: Vec<ElementClass>,
    cut_index: Vec<Option<usize>>,
    cuts: Vec<CutElement>,
    band: Vec<bool>,
}

impl CutTopology {
    pub fn num_elements(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, t: usize) -> ElementClass {
        self.classes[t]
    }

    pub fn is_cut(&self, t: usize) -> bool {
        self.classes[t] == ElementClass::Cut
    }

    /// Elements cut by the linear interface, in element order.
    pub fn cut_elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.cuts.iter().map(|c| c.element)
    }

    pub fn cuts(&self) -> &[CutElement] {
        &self.cuts
    }

    pub fn cut(&self, t: usize) -> Option<&CutElement> {
        self.cut_index[t].map(|i| &self.cuts[i])
    }

    /// Mask of cut elements.
    pub fn cut_mask(&self) -> Vec<bool> {
        self.classes.iter().map(|c| *c == ElementClass::Cut).collect()
    }

    /// Whether `t` belongs to the extended band (cut elements plus all
    /// elements sharing a vertex with one).
    pub fn in_band(&self, t: usize) -> bool {
        self.band[t]
    }

    pub fn band_mask(&self) -> &[bool] {
        &self.band
    }

    /// Whether element `t` carries degrees of freedom for `side`.
    pub fn is_active(&self, t: usize, side: Side) -> bool {
        matches!(
            (self.classes[t], side),
            (ElementClass::Cut, _) | (ElementClass::Negative, Side::Negative) | (ElementClass::Positive, Side::Positive)
        )
    }

    /// Reference sub-triangles of element `t` on `side`; the full reference
    /// triangle for uncut elements lying on that side.
    pub fn side_triangles(&self, t: usize, side: Side) -> Vec<[Point; 3]> {
        match self.classes[t] {
            ElementClass::Cut => self.cut(t).unwrap().sub_triangles[side.index()].clone(),
            c if self.is_active(t, side) && c != ElementClass::Cut => vec![REF_VERTICES],
            _ => Vec::new(),
        }
    }
}

/// Classifies all elements by the vertex signs of the linear interpolant and
/// builds the reference cut geometry of the cut elements.
pub fn classify_cut(ls: &LevelSetFE, mesh: &Mesh) -> Result<CutTopology> {
    let nt = mesh.num_elements();
    let p1 = ls.p1_values();
    let mut classes = Vec::with_capacity(nt);
    let mut cut_index = vec![None; nt];
    let mut cuts = Vec::new();
    let mut vertex_marked = vec![false; mesh.num_vertices()];

    for t in 0..nt {
        let el = mesh.element(t);
        let vals = el.map(|v| p1[v]);
        if vals.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateLevelSet { element: t });
        }
        let signs = vals.map(Side::of_value);
        if signs.iter().all(|&s| s == Side::Negative) {
            classes.push(ElementClass::Negative);
            continue;
        }
        if signs.iter().all(|&s| s == Side::Positive) {
            classes.push(ElementClass::Positive);
            continue;
        }
        classes.push(ElementClass::Cut);
        for &v in &el {
            vertex_marked[v] = true;
        }
        cut_index[t] = Some(cuts.len());
        cuts.push(cut_geometry(mesh, t, &vals, &signs, ls.linear_gradient(mesh, t)));
    }

    let band = (0..nt)
        .map(|t| mesh.element(t).iter().any(|&v| vertex_marked[v]))
        .collect();
    Ok(CutTopology { classes, cut_index, cuts, band })
}

fn cut_geometry(mesh: &Mesh, t: usize, vals: &[f64; 3], signs: &[Side; 3], grad: Vector2<f64>) -> CutElement {
    let lone = (0..3)
        .find(|&j| signs[j] != signs[(j + 1) % 3] && signs[j] != signs[(j + 2) % 3])
        .expect("cut element has a lone vertex");
    let (b, c) = ((lone + 1) % 3, (lone + 2) % 3);
    let cross = |from: usize, to: usize| {
        let s = vals[from] / (vals[from] - vals[to]);
        REF_VERTICES[from] + (REF_VERTICES[to] - REF_VERTICES[from]) * s
    };
    let p_ab = cross(lone, b);
    let p_ac = cross(lone, c);
    let (ra, rb, rc) = (REF_VERTICES[lone], REF_VERTICES[b], REF_VERTICES[c]);

    let map = mesh.map(t);
    let lone_side = vec![oriented([ra, p_ab, p_ac])];
    let diag1 = (map.apply(&p_ab) - map.apply(&rc)).norm();
    let diag2 = (map.apply(&rb) - map.apply(&p_ac)).norm();
    let quad_side = if diag1 <= diag2 {
        vec![oriented([p_ab, rb, rc]), oriented([p_ab, rc, p_ac])]
    } else {
        vec![oriented([p_ab, rb, p_ac]), oriented([rb, rc, p_ac])]
    };

    let lone_sign = signs[lone];
    let mut sub_triangles: [Vec<[Point; 3]>; 2] = [Vec::new(), Vec::new()];
    sub_triangles[lone_sign.index()] = lone_side;
    sub_triangles[lone_sign.other().index()] = quad_side;

    let det = map.det;
    let side_area = [0, 1].map(|s| sub_triangles[s].iter().map(|tri| ref_area(tri) * det).sum());

    CutElement {
        element: t,
        lone_vertex: lone,
        segment: [p_ab, p_ac],
        sub_triangles,
        normal: grad / grad.norm(),
        side_area,
    }
}

pub(crate) fn ref_area(tri: &[Point; 3]) -> f64 {
    let (u, v) = (tri[1] - tri[0], tri[2] - tri[0]);
    0.5 * (u.x * v.y - u.y * v.x)
}

fn oriented(tri: [Point; 3]) -> [Point; 3] {
    if ref_area(&tri) < 0.0 {
        [tri[0], tri[2], tri[1]]
    } else {
        tri
    }
}

/// Total physical length of the linear interface.
pub fn gamma_lin_measure(ct: &CutTopology, mesh: &Mesh) -> f64 {
    ct.cuts().iter().map(|c| c.segment_length(mesh)).sum()
}
