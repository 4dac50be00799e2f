use nalgebra::Vector2;

use super::LagrangeSpace;
use crate::deform::Deformation;
use crate::error::{Error, Result};
use crate::levelset::{CutTopology, Side};
use crate::mesh::{Mesh, Point};

/// Doubled unfitted space: one copy of the Lagrange space restricted to the
/// elements touching each side of the linear interface.
///
/// Dofs are numbered side-major (all negative-side dofs first), then by
/// global Lagrange node index.
#[derive(Debug, Clone)]
pub struct UnfittedSpace {
    lagrange: LagrangeSpace,
    dof_of_node: [Vec<Option<usize>>; 2],
    dof_node: Vec<(Side, usize)>,
    active: [Vec<bool>; 2],
}

impl UnfittedSpace {
    pub fn new(lagrange: LagrangeSpace, ct: &CutTopology) -> Self {
        let n = lagrange.num_nodes();
        let mut dof_of_node = [vec![None; n], vec![None; n]];
        let mut active = [vec![false; ct.num_elements()], vec![false; ct.num_elements()]];
        let mut dof_node = Vec::new();
        for side in Side::BOTH {
            let s = side.index();
            let mut used = vec![false; n];
            for t in 0..ct.num_elements() {
                if ct.is_active(t, side) {
                    active[s][t] = true;
                    for &g in lagrange.element_nodes(t) {
                        used[g] = true;
                    }
                }
            }
            for (g, _) in used.iter().enumerate().filter(|(_, u)| **u) {
                dof_of_node[s][g] = Some(dof_node.len());
                dof_node.push((side, g));
            }
        }
        Self { lagrange, dof_of_node, dof_node, active }
    }

    pub fn lagrange(&self) -> &LagrangeSpace {
        &self.lagrange
    }

    pub fn degree(&self) -> usize {
        self.lagrange.degree()
    }

    pub fn num_dofs(&self) -> usize {
        self.dof_node.len()
    }

    pub fn num_dofs_on(&self, side: Side) -> usize {
        self.dof_of_node[side.index()].iter().filter(|d| d.is_some()).count()
    }

    pub fn is_active(&self, t: usize, side: Side) -> bool {
        self.active[side.index()][t]
    }

    pub fn dof(&self, side: Side, node: usize) -> Option<usize> {
        self.dof_of_node[side.index()][node]
    }

    /// Side and Lagrange node of a dof.
    pub fn dof_info(&self, dof: usize) -> (Side, usize) {
        self.dof_node[dof]
    }

    /// Dofs of element `t` on `side` in reference-local order.
    pub fn element_dofs(&self, t: usize, side: Side) -> Result<Vec<usize>> {
        if !self.is_active(t, side) {
            return Err(Error::InactiveSide { element: t, side });
        }
        Ok(self
            .lagrange
            .element_nodes(t)
            .iter()
            .map(|&g| self.dof_of_node[side.index()][g].expect("active element node has a dof"))
            .collect())
    }

    /// Dofs at nodes on the outer boundary, with their side and node.
    pub fn dirichlet_dofs(&self) -> Vec<(usize, Side, usize)> {
        self.dof_node
            .iter()
            .enumerate()
            .filter(|(_, (_, g))| self.lagrange.on_boundary(*g))
            .map(|(d, &(s, g))| (d, s, g))
            .collect()
    }

    /// Coefficient vector of per-side nodal interpolants `I_k f(side, .)`.
    pub fn interpolate<F: Fn(Side, &Point) -> f64>(&self, f: F) -> Vec<f64> {
        self.dof_node.iter().map(|&(s, g)| f(s, &self.lagrange.node(g))).collect()
    }
}

/// Builds the doubled space of degree `k` on `mesh`.
pub fn build_unfitted_space(mesh: &Mesh, ct: &CutTopology, k: usize) -> UnfittedSpace {
    UnfittedSpace::new(LagrangeSpace::new(mesh, k), ct)
}

/// Value and physical gradient of the `side` component of a discrete
/// function at the deformed image of a reference point of element `t`.
pub fn evaluate_isoparametric(
    space: &UnfittedSpace,
    coefficients: &[f64],
    d: &Deformation,
    mesh: &Mesh,
    t: usize,
    ref_point: &Point,
    side: Side,
) -> Result<(f64, Vector2<f64>)> {
    let dofs = space.element_dofs(t, side)?;
    let ev = d.evaluate(mesh, t, ref_point)?;
    let mut value = 0.0;
    let mut grad = Vector2::zeros();
    for (i, &dof) in dofs.iter().enumerate() {
        value += coefficients[dof] * ev.basis[i];
        grad += coefficients[dof] * ev.basis_grads[i];
    }
    Ok((value, grad))
}
