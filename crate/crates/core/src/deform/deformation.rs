use nalgebra::{Matrix2, Vector2};

use super::extension::lenoir_extend_edge;
use super::step_length::{solve_dh, StepOptions};
use super::SearchDirection;
use crate::error::{Error, Result};
use crate::fe_space::LagrangeSpace;
use crate::levelset::{CutTopology, LevelSetFE};
use crate::mesh::{Mesh, Point};

/// Nodal displacement `Theta_h^Gamma - id` on the cut band, obtained by
/// averaging `d_h G_h` over all cut elements sharing a node. Nodes outside the
/// cut band map to `None`.
pub fn build_theta_gamma(
    ls: &LevelSetFE,
    gh: &SearchDirection,
    space: &LagrangeSpace,
    mesh: &Mesh,
    ct: &CutTopology,
    opts: &StepOptions,
) -> Result<Vec<Option<Vector2<f64>>>> {
    let nloc = space.num_local();
    let mut local = vec![Vector2::zeros(); mesh.num_elements() * nloc];
    for t in ct.cut_elements() {
        for (i, x) in space.reference().nodes().iter().enumerate() {
            let d = solve_dh(ls, gh, space, mesh, t, x, opts)?;
            local[t * nloc + i] = gh.nodal(t)[i] * d;
        }
    }
    let averaged = super::project_nodal(space, ct, &local);
    let limit = opts.alpha0 * mesh.h_max();
    for (node, v) in averaged.iter().enumerate() {
        if let Some(v) = v {
            if v.norm() > limit {
                return Err(Error::Resolution { node, displacement: v.norm(), limit });
            }
        }
    }
    Ok(averaged)
}

/// Global deformation `Theta_h`: the cut-band displacement, extended through
/// the edges of the cut band's boundary into the neighbouring elements, and
/// the identity elsewhere.
pub fn build_theta(
    ls: &LevelSetFE,
    gh: &SearchDirection,
    space: &LagrangeSpace,
    mesh: &Mesh,
    ct: &CutTopology,
    opts: &StepOptions,
) -> Result<Deformation> {
    let theta_gamma = build_theta_gamma(ls, gh, space, mesh, ct, opts)?;
    let mut displacement: Vec<Vector2<f64>> = theta_gamma.iter().map(|v| v.unwrap_or_else(Vector2::zeros)).collect();

    let re = space.reference();
    let k = space.degree();
    for t in 0..mesh.num_elements() {
        if !ct.in_band(t) || ct.is_cut(t) || re.num_interior() == 0 {
            continue;
        }
        let nodes = space.element_nodes(t);
        for (j, &e) in mesh.element_edges(t).iter().enumerate() {
            let (a, b) = mesh.edge_elements(e);
            let neighbour = if a == t { b } else { Some(a) };
            if !neighbour.is_some_and(|n| ct.is_cut(n)) {
                continue;
            }
            let closure = re.edge_closure(j);
            let tx: Vec<f64> = closure.iter().map(|&i| displacement[nodes[i]].x).collect();
            let ty: Vec<f64> = closure.iter().map(|&i| displacement[nodes[i]].y).collect();
            for (i, x) in re.nodes().iter().enumerate().skip(3 + 3 * (k - 1)) {
                let ext = Vector2::new(lenoir_extend_edge(&tx, j, x)?, lenoir_extend_edge(&ty, j, x)?);
                displacement[nodes[i]] += ext;
            }
        }
    }
    Ok(Deformation { space: space.clone(), displacement, band: ct.band_mask().to_vec() })
}

/// `F = D Theta_h` at a point with its determinant and inverse transpose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationGradient {
    pub f: Matrix2<f64>,
    pub det: f64,
    pub f_inv_t: Matrix2<f64>,
}

impl DeformationGradient {
    pub fn identity() -> Self {
        Self { f: Matrix2::identity(), det: 1.0, f_inv_t: Matrix2::identity() }
    }

    /// Volume measure factor `J_V = det F`.
    pub fn j_v(&self) -> f64 {
        self.det
    }

    /// Interface measure factor `J_Gamma = det F |F^{-T} n|` for the unit
    /// normal `n` of the undeformed interface.
    pub fn j_gamma(&self, n: &Vector2<f64>) -> f64 {
        self.det * (self.f_inv_t * n).norm()
    }
}

/// Everything needed at one quadrature point of an element.
#[derive(Debug, Clone)]
pub struct PointEvaluation {
    /// `Theta_h(Phi_T(x_hat))`.
    pub point: Point,
    pub gradient: DeformationGradient,
    pub basis: Vec<f64>,
    /// Physical basis gradients on the deformed element.
    pub basis_grads: Vec<Vector2<f64>>,
}

/// Isoparametric mesh deformation, stored as a degree-k Lagrange displacement.
#[derive(Debug, Clone)]
pub struct Deformation {
    space: LagrangeSpace,
    displacement: Vec<Vector2<f64>>,
    band: Vec<bool>,
}

impl Deformation {
    pub fn identity(space: &LagrangeSpace, mesh: &Mesh) -> Self {
        Self {
            space: space.clone(),
            displacement: vec![Vector2::zeros(); space.num_nodes()],
            band: vec![false; mesh.num_elements()],
        }
    }

    /// Deformation from explicit nodal displacements; `band` marks elements
    /// on which the displacement may be nonzero.
    pub fn from_displacement(space: &LagrangeSpace, displacement: Vec<Vector2<f64>>, band: Vec<bool>) -> Self {
        assert_eq!(displacement.len(), space.num_nodes());
        Self { space: space.clone(), displacement, band }
    }

    pub fn degree(&self) -> usize {
        self.space.degree()
    }

    pub fn space(&self) -> &LagrangeSpace {
        &self.space
    }

    pub fn displacement(&self) -> &[Vector2<f64>] {
        &self.displacement
    }

    pub fn in_band(&self, t: usize) -> bool {
        self.band[t]
    }

    pub fn max_displacement(&self) -> f64 {
        self.displacement.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn displacement_at(&self, t: usize, ref_point: &Point) -> Vector2<f64> {
        if !self.band[t] {
            return Vector2::zeros();
        }
        let phi = self.space.reference().values_at(ref_point);
        self.space.element_nodes(t).iter().zip(&phi).map(|(&g, p)| self.displacement[g] * *p).sum()
    }

    /// `Theta_h(Phi_T(x_hat))`.
    pub fn apply(&self, mesh: &Mesh, t: usize, ref_point: &Point) -> Point {
        mesh.map(t).apply(ref_point) + self.displacement_at(t, ref_point)
    }

    pub fn gradient(&self, mesh: &Mesh, t: usize, ref_point: &Point) -> Result<DeformationGradient> {
        Ok(self.evaluate(mesh, t, ref_point)?.gradient)
    }

    pub fn evaluate(&self, mesh: &Mesh, t: usize, ref_point: &Point) -> Result<PointEvaluation> {
        let map = mesh.map(t);
        let (basis, ref_grads) = self.space.reference().values_and_grads_at(ref_point);
        let a_inv_t = map.inv_transpose();
        let mut point = map.apply(ref_point);
        let flat: Vec<Vector2<f64>> = ref_grads.iter().map(|g| a_inv_t * g).collect();
        if !self.band[t] {
            return Ok(PointEvaluation { point, gradient: DeformationGradient::identity(), basis, basis_grads: flat });
        }
        let mut f = Matrix2::identity();
        for ((&g, p), grad) in self.space.element_nodes(t).iter().zip(&basis).zip(&flat) {
            let u = self.displacement[g];
            point += u * *p;
            f += u * grad.transpose();
        }
        let det = f.determinant();
        if det <= 1e-10 || !det.is_finite() {
            return Err(Error::SingularJacobian { element: t, det });
        }
        let f_inv_t = Matrix2::new(f[(1, 1)], -f[(1, 0)], -f[(0, 1)], f[(0, 0)]) / det;
        let basis_grads = flat.iter().map(|g| f_inv_t * g).collect();
        Ok(PointEvaluation { point, gradient: DeformationGradient { f, det, f_inv_t }, basis, basis_grads })
    }
}

/// Free-function form of [`Deformation::gradient`].
pub fn deformation_gradient(d: &Deformation, mesh: &Mesh, t: usize, ref_point: &Point) -> Result<DeformationGradient> {
    d.gradient(mesh, t, ref_point)
}
