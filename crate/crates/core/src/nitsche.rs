//! Unfitted Nitsche discretization on the deformed cut mesh.
//!
//! All integrals are evaluated on the undeformed reference configuration
//! (sub-triangles of the linear cut and the planar interface segments) and
//! carried through `Theta_h` with the factors `F^{-T}`, `det F` and
//! `J_Gamma`.

use std::fmt;
use std::sync::Arc;

use nalgebra::Vector2;
use rand::Rng;

use crate::deform::Deformation;
use crate::error::{Error, Result};
use crate::fe_space::{ReferenceElement, UnfittedSpace};
use crate::levelset::{ref_area, CutTopology, Side};
use crate::mesh::{Mesh, Point};
use crate::quadrature::{mapped_interface_points, mapped_volume_points, segment_rule, triangle_rule};
use crate::sparse::CsrMatrix;

/// Scalar field given per side, evaluated at physical points.
pub type SideField = Arc<dyn Fn(Side, &Point) -> f64 + Send + Sync>;

/// Data of `-div(alpha_i grad u) = f_i` with Dirichlet values on the outer
/// boundary.
#[derive(Clone)]
pub struct ProblemData {
    pub alpha: [f64; 2],
    /// Source, evaluable slightly beyond each sub-domain.
    pub source: SideField,
    pub dirichlet: SideField,
    /// Penalty is `lambda_factor * k^2`.
    pub lambda_factor: f64,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData")
            .field("alpha", &self.alpha)
            .field("lambda_factor", &self.lambda_factor)
            .finish_non_exhaustive()
    }
}

impl ProblemData {
    pub fn alpha(&self, side: Side) -> f64 {
        self.alpha[side.index()]
    }

    pub fn alpha_mean(&self) -> f64 {
        0.5 * (self.alpha[0] + self.alpha[1])
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.lambda_factor * (k * k) as f64
    }
}

/// Exactness degrees of the quadrature rules used in the assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureDegrees {
    pub stiffness: usize,
    pub consistency: usize,
    pub penalty: usize,
    pub rhs: usize,
}

impl QuadratureDegrees {
    /// `max(1, 2k - 2)` for the gradient terms, `2k` for the penalty and
    /// the right-hand side.
    pub fn for_order(k: usize) -> Self {
        let low = (2 * k).saturating_sub(2).max(1);
        Self { stiffness: low, consistency: low, penalty: 2 * k, rhs: 2 * k }
    }
}

/// Heaviside weights `(kappa_1, kappa_2)`: the larger part of a cut element
/// gets weight 1, ties go to the negative side.
pub fn averaging_weights(vol1: f64, vol: f64) -> (f64, f64) {
    if vol1 >= 0.5 * vol {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    }
}

/// Assembled discrete system over the unfitted dofs.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    /// Symmetric system matrix before the boundary constraints are applied.
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Prescribed boundary values `(dof, value)`.
    pub constraints: Vec<(usize, f64)>,
}

impl AssembledSystem {
    /// Matrix and right-hand side after symmetric elimination of the
    /// boundary constraints.
    pub fn constrained(&self) -> (CsrMatrix, Vec<f64>) {
        self.matrix.eliminate(&self.rhs, &self.constraints)
    }
}

/// Assembles the isoparametric unfitted Nitsche system.
pub fn assemble(
    mesh: &Mesh,
    space: &UnfittedSpace,
    d: &Deformation,
    ct: &CutTopology,
    pd: &ProblemData,
    quad: &QuadratureDegrees,
) -> Result<AssembledSystem> {
    let lagrange = space.lagrange();
    for g in 0..lagrange.num_nodes() {
        if lagrange.on_boundary(g) && d.displacement()[g] != Vector2::zeros() {
            return Err(Error::BoundaryConflict { node: g });
        }
    }
    let k = space.degree();
    let nloc = lagrange.num_local();
    let penalty = pd.alpha_mean() * pd.lambda(k) / mesh.h_max();
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; space.num_dofs()];

    for t in 0..mesh.num_elements() {
        for side in Side::BOTH {
            if !space.is_active(t, side) {
                continue;
            }
            let dofs = space.element_dofs(t, side)?;
            let alpha = pd.alpha(side);
            let mut local = vec![0.0; nloc * nloc];
            for q in mapped_volume_points(mesh, ct, d, t, side, quad.stiffness)? {
                for i in 0..nloc {
                    let gi = q.basis_grads[i] * (alpha * q.weight);
                    for j in 0..nloc {
                        local[i * nloc + j] += gi.dot(&q.basis_grads[j]);
                    }
                }
            }
            for q in mapped_volume_points(mesh, ct, d, t, side, quad.rhs)? {
                let f = (pd.source)(side, &q.point) * q.weight;
                for i in 0..nloc {
                    rhs[dofs[i]] += f * q.basis[i];
                }
            }
            for i in 0..nloc {
                for j in 0..nloc {
                    triplets.push((dofs[i], dofs[j], local[i * nloc + j]));
                }
            }
        }

        let Some(cut) = ct.cut(t) else { continue };
        let dofs: Vec<usize> = [space.element_dofs(t, Side::Negative)?, space.element_dofs(t, Side::Positive)?].concat();
        let (k1, k2) = averaging_weights(cut.side_area[0], cut.side_area[0] + cut.side_area[1]);
        let m = 2 * nloc;
        let mut local = vec![0.0; m * m];
        // consistency and symmetry: N^c(u, v) + N^c(v, u) with
        // N^c(u, v) = int <-alpha grad u . n> [v]
        for q in mapped_interface_points(mesh, ct, d, t, quad.consistency)? {
            let jump: Vec<f64> = q.basis.iter().copied().chain(q.basis.iter().map(|v| -v)).collect();
            let flux: Vec<f64> = q
                .basis_grads
                .iter()
                .map(|g| -k1 * pd.alpha[0] * g.dot(&q.conormal))
                .chain(q.basis_grads.iter().map(|g| -k2 * pd.alpha[1] * g.dot(&q.conormal)))
                .collect();
            for i in 0..m {
                for j in 0..m {
                    local[i * m + j] += jump[i] * flux[j] + flux[i] * jump[j];
                }
            }
        }
        for q in mapped_interface_points(mesh, ct, d, t, quad.penalty)? {
            let w = penalty * q.weight;
            for i in 0..m {
                let ji = if i < nloc { q.basis[i] } else { -q.basis[i - nloc] };
                for j in 0..m {
                    let jj = if j < nloc { q.basis[j] } else { -q.basis[j - nloc] };
                    local[i * m + j] += w * ji * jj;
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                triplets.push((dofs[i], dofs[j], local[i * m + j]));
            }
        }
    }

    let constraints = space
        .dirichlet_dofs()
        .into_iter()
        .map(|(dof, side, g)| (dof, (pd.dirichlet)(side, &lagrange.node(g))))
        .collect();
    Ok(AssembledSystem { matrix: CsrMatrix::from_triplets(space.num_dofs(), triplets), rhs, constraints })
}

/// Largest observed ratio `kappa_i^2 |p|^2_{Gamma_hat} / |p|^2_{T_hat_i}` over
/// random polynomials `p` of degree `k` on cut element `t`, computed in the
/// reference configuration of the element.
pub fn inverse_estimate_probe<R: Rng>(ct: &CutTopology, k: usize, t: usize, side: Side, trials: usize, rng: &mut R) -> f64 {
    let Some(cut) = ct.cut(t) else { return 0.0 };
    let (k1, k2) = averaging_weights(cut.side_area[0], cut.side_area[0] + cut.side_area[1]);
    let kappa = if side == Side::Negative { k1 } else { k2 };
    if kappa == 0.0 {
        return 0.0;
    }
    let re = ReferenceElement::new(k);
    let seg = segment_rule(2 * k).expect("supported degree");
    let tri = triangle_rule(2 * k).expect("supported degree");
    let [a, b] = cut.segment;
    let len = (b - a).norm();
    let gamma_vals: Vec<(f64, Vec<f64>)> =
        seg.points.iter().zip(&seg.weights).map(|(s, w)| (w * len, re.values_at(&(a + (b - a) * *s)))).collect();
    let mut vol_vals = Vec::new();
    for sub in &cut.sub_triangles[side.index()] {
        let area2 = 2.0 * ref_area(sub);
        for (p, w) in tri.points.iter().zip(&tri.weights) {
            let x = sub[0] + (sub[1] - sub[0]) * p.x + (sub[2] - sub[0]) * p.y;
            vol_vals.push((w * area2, re.values_at(&x)));
        }
    }
    let norm2 = |vals: &[(f64, Vec<f64>)], c: &[f64]| -> f64 {
        vals.iter()
            .map(|(w, phi)| {
                let v: f64 = phi.iter().zip(c).map(|(a, b)| a * b).sum();
                w * v * v
            })
            .sum()
    };
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let c: Vec<f64> = if trial == 0 {
            vec![1.0; re.num_nodes()]
        } else {
            (0..re.num_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        let vol = norm2(&vol_vals, &c);
        if vol > 0.0 {
            worst = worst.max(kappa * kappa * norm2(&gamma_vals, &c) / vol);
        }
    }
    worst
}

/// The constant `c_kappa d! 2^{(d-1)/2} (k + d)(k + 1)` with `c_kappa = 2`
/// and `d = 2`.
pub fn inverse_estimate_bound(k: usize) -> f64 {
    2.0 * 2.0 * std::f64::consts::SQRT_2 * ((k + 2) * (k + 1)) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::{build_theta, search_direction, SearchVariant, StepOptions};
    use crate::fe_space::LagrangeSpace;
    use crate::levelset::{classify_cut, interpolate_levelset, LevelSetFE};
    use crate::mesh::BoundingBox;
    use crate::solver::{solve_direct, SolveOptions};
    use num_rational::Ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_problem(lambda_factor: f64) -> ProblemData {
        ProblemData {
            alpha: [1.0, 2.0],
            source: Arc::new(|_, _| 1.0),
            dirichlet: Arc::new(|_, _| 0.0),
            lambda_factor,
        }
    }

    #[test]
    fn heaviside_weights() {
        assert_eq!(averaging_weights(0.3, 1.0), (0.0, 1.0));
        assert_eq!(averaging_weights(0.7, 1.0), (1.0, 0.0));
        assert_eq!(averaging_weights(0.5, 1.0), (1.0, 0.0));
        for i in 1..100 {
            let v1 = i as f64 / 100.0;
            let (a, b) = averaging_weights(v1, 1.0);
            assert_eq!(a + b, 1.0);
            assert!(a * a <= 2.0 * v1 && b * b <= 2.0 * (1.0 - v1));
        }
    }

    /// Penalty block of a single cut element against exact rational integration.
    #[test]
    fn penalty_block_matches_exact_integration() {
        let mesh = Mesh::from_parts(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let lagrange = LagrangeSpace::new(&mesh, 1);
        // cut points at x = 1/4 on the bottom edge and y = 1/4 on the left edge
        let ls = LevelSetFE::from_nodal_values(&mesh, &lagrange, vec![-1.0, 3.0, 3.0]).unwrap();
        let ct = classify_cut(&ls, &mesh).unwrap();
        let space = UnfittedSpace::new(lagrange.clone(), &ct);
        let d = Deformation::identity(&lagrange, &mesh);
        let pd = ProblemData { alpha: [1.0, 1.0], ..zero_problem(20.0) };
        let quad = QuadratureDegrees { stiffness: 1, consistency: 1, penalty: 2, rhs: 2 };
        let full = assemble(&mesh, &space, &d, &ct, &pd, &quad).unwrap();
        let no_penalty = assemble(&mesh, &space, &d, &ct, &ProblemData { lambda_factor: 0.0, ..pd.clone() }, &quad).unwrap();

        // on the segment from (1/4, 0) to (0, 1/4) the hat functions are linear;
        // int psi_i psi_j = L/6 (1 + delta_ij-ish) via the endpoint values
        type Q = Ratio<i64>;
        let ends = [[Q::new(3, 4), Q::new(1, 4), Q::new(0, 1)], [Q::new(3, 4), Q::new(0, 1), Q::new(1, 4)]];
        let len = 0.25 * 2f64.sqrt();
        let h = mesh.h_max();
        let scale = pd.alpha_mean() * pd.lambda(1) / h * len;
        for i in 0..3 {
            for j in 0..3 {
                let (a0, a1, b0, b1) = (ends[0][i], ends[1][i], ends[0][j], ends[1][j]);
                let exact = (Q::from_integer(2) * a0 * b0 + a0 * b1 + a1 * b0 + Q::from_integer(2) * a1 * b1) / Q::from_integer(6);
                let exact = *exact.numer() as f64 / *exact.denom() as f64 * scale;
                let (di, dj) = (space.dof(Side::Negative, i).unwrap(), space.dof(Side::Negative, j).unwrap());
                let got = full.matrix.get(di, dj) - no_penalty.matrix.get(di, dj);
                assert!((got - exact).abs() < 1e-13 * scale, "{i} {j}: {got} vs {exact}");
                let dj2 = space.dof(Side::Positive, j).unwrap();
                let got = full.matrix.get(di, dj2) - no_penalty.matrix.get(di, dj2);
                assert!((got + exact).abs() < 1e-13 * scale);
            }
        }
    }

    fn benchmark_system(k: usize, lambda_factor: f64) -> (Mesh, UnfittedSpace, AssembledSystem) {
        let mesh = Mesh::structured(BoundingBox::square(-1.5, 1.5), 8).unwrap().refine_uniform();
        let lagrange = LagrangeSpace::new(&mesh, k);
        let ls = interpolate_levelset(|p| (p.x.powi(4) + p.y.powi(4)).powf(0.25) - 1.0, &mesh, &lagrange).unwrap();
        let ct = classify_cut(&ls, &mesh).unwrap();
        let gh = search_direction(&ls, &lagrange, &mesh, &ct, SearchVariant::Gradient);
        let d = build_theta(&ls, &gh, &lagrange, &mesh, &ct, &StepOptions::default()).unwrap();
        let space = UnfittedSpace::new(lagrange, &ct);
        let sys = assemble(&mesh, &space, &d, &ct, &zero_problem(lambda_factor), &QuadratureDegrees::for_order(k)).unwrap();
        (mesh, space, sys)
    }

    #[test]
    fn symmetric_and_positive_definite() {
        for k in 1..=3 {
            let (_, _, sys) = benchmark_system(k, 20.0);
            assert!(sys.matrix.asymmetry() <= 1e-12 * sys.matrix.norm_inf());
            let r = solve_direct(&sys, &SolveOptions::default()).unwrap();
            assert!(r.min_pivot > 0.0, "k={k}");
            let (_, _, sys) = benchmark_system(k, 40.0);
            assert!(solve_direct(&sys, &SolveOptions::default()).unwrap().min_pivot > 0.0);
        }
    }

    #[test]
    fn galerkin_residual_is_small() {
        let (_, _, sys) = benchmark_system(2, 20.0);
        let r = solve_direct(&sys, &SolveOptions::default()).unwrap();
        let au = sys.matrix.mul_vec(&r.solution);
        let bnorm = crate::sparse::norm2(&sys.rhs);
        let mut fixed = vec![false; sys.rhs.len()];
        for &(i, _) in &sys.constraints {
            fixed[i] = true;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let v: Vec<f64> = (0..au.len()).map(|i| if fixed[i] { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
            let vnorm = crate::sparse::norm2(&v);
            let res: f64 = au.iter().zip(&sys.rhs).zip(&v).map(|((a, b), v)| (a - b) * v).sum();
            assert!(res.abs() <= 1e-9 * bnorm * vnorm);
        }
    }

    #[test]
    fn inverse_probe_bounds() {
        let mesh = Mesh::from_parts(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let lagrange = LagrangeSpace::new(&mesh, 1);
        let ls = LevelSetFE::from_nodal_values(&mesh, &lagrange, vec![-1.0, 1.0, 1.0]).unwrap();
        let ct = classify_cut(&ls, &mesh).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // negative part (area 1/8) is the smaller one, so its weight is 0
        assert_eq!(inverse_estimate_probe(&ct, 1, 0, Side::Negative, 10, &mut rng), 0.0);
        // constant p: |Gamma_hat| / |T_hat_2|
        let r = inverse_estimate_probe(&ct, 1, 0, Side::Positive, 1, &mut rng);
        let expect = (0.5 * 2f64.sqrt()) / 0.375;
        assert!((r - expect).abs() < 1e-13);
        assert!(inverse_estimate_probe(&ct, 1, 0, Side::Positive, 1000, &mut rng) <= inverse_estimate_bound(1));
        assert!((inverse_estimate_bound(1) - 24.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn boundary_conflict_is_detected() {
        let mesh = Mesh::structured(BoundingBox::square(0.0, 1.0), 2).unwrap();
        let lagrange = LagrangeSpace::new(&mesh, 2);
        let ls = interpolate_levelset(|p| p.x - 0.3, &mesh, &lagrange).unwrap();
        let ct = classify_cut(&ls, &mesh).unwrap();
        let space = UnfittedSpace::new(lagrange.clone(), &ct);
        let mut disp = vec![Vector2::zeros(); lagrange.num_nodes()];
        let g = (0..lagrange.num_nodes()).find(|&g| lagrange.on_boundary(g) && !lagrange.is_vertex_node(g)).unwrap();
        disp[g] = Vector2::new(1e-3, 0.0);
        let d = Deformation::from_displacement(&lagrange, disp, vec![true; mesh.num_elements()]);
        let r = assemble(&mesh, &space, &d, &ct, &zero_problem(20.0), &QuadratureDegrees::for_order(2));
        assert_eq!(r.unwrap_err(), Error::BoundaryConflict { node: g });
    }
}
