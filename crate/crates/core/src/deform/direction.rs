use std::ops::{Add, Mul};

use nalgebra::Vector2;

use crate::fe_space::LagrangeSpace;
use crate::levelset::{CutTopology, LevelSetFE};
use crate::mesh::{Mesh, Point};

/// Which discrete search direction `G_h` is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchVariant {
    /// Element-wise gradient of the level-set interpolant.
    #[default]
    Gradient,
    /// Gradient averaged into a continuous field on the cut band.
    Projected,
}

/// Search direction stored as nodal vector values per cut element.
#[derive(Debug, Clone)]
pub struct SearchDirection {
    variant: SearchVariant,
    num_local: usize,
    values: Vec<Vector2<f64>>,
}

impl SearchDirection {
    pub fn variant(&self) -> SearchVariant {
        self.variant
    }

    /// Nodal values on element `t` in reference-local order. All zero on
    /// uncut elements.
    pub fn nodal(&self, t: usize) -> &[Vector2<f64>] {
        &self.values[t * self.num_local..(t + 1) * self.num_local]
    }

    /// `G_h` at a reference point of element `t`.
    pub fn eval(&self, space: &LagrangeSpace, t: usize, ref_point: &Point) -> Vector2<f64> {
        let phi = space.reference().values_at(ref_point);
        self.nodal(t).iter().zip(&phi).map(|(g, p)| g * *p).sum()
    }
}

/// Builds `G_h` on every cut element. The element gradient of `phi_h` has
/// degree `k - 1`, so its nodal values represent it exactly.
pub fn search_direction(
    ls: &LevelSetFE,
    space: &LagrangeSpace,
    mesh: &Mesh,
    ct: &CutTopology,
    variant: SearchVariant,
) -> SearchDirection {
    let nloc = space.num_local();
    let mut values = vec![Vector2::zeros(); mesh.num_elements() * nloc];
    for t in ct.cut_elements() {
        let a_inv_t = mesh.map(t).inv_transpose();
        for (i, x) in space.reference().nodes().iter().enumerate() {
            let (_, g) = space.eval_scalar_with_ref_grad(t, ls.nodal_values(), x);
            values[t * nloc + i] = a_inv_t * g;
        }
    }
    if variant == SearchVariant::Projected {
        let averaged = project_nodal(space, ct, &values);
        for t in ct.cut_elements() {
            for (i, &g) in space.element_nodes(t).iter().enumerate() {
                values[t * nloc + i] = averaged[g].expect("node of a cut element");
            }
        }
    }
    SearchDirection { variant, num_local: nloc, values }
}

/// Nodal averaging `P_h^Gamma`: every node of a cut element receives the mean
/// of the one-sided values of all cut elements containing it.
///
/// `element_values` holds `num_local` values per element (all elements, only
/// cut ones are read). Nodes outside the cut band map to `None`.
pub fn project_nodal<T>(space: &LagrangeSpace, ct: &CutTopology, element_values: &[T]) -> Vec<Option<T>>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let nloc = space.num_local();
    let mut sum = vec![T::default(); space.num_nodes()];
    let mut count = vec![0usize; space.num_nodes()];
    for t in ct.cut_elements() {
        for (i, &g) in space.element_nodes(t).iter().enumerate() {
            sum[g] = sum[g] + element_values[t * nloc + i];
            count[g] += 1;
        }
    }
    sum.into_iter()
        .zip(count)
        .map(|(s, c)| if c == 0 { None } else { Some(s * (1.0 / c as f64)) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelset::{classify_cut, interpolate_levelset};
    use crate::mesh::BoundingBox;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(k: usize, phi: impl Fn(&Point) -> f64) -> (Mesh, LagrangeSpace, LevelSetFE, CutTopology) {
        let mesh = Mesh::structured(BoundingBox::square(-1.5, 1.5), 8).unwrap();
        let space = LagrangeSpace::new(&mesh, k);
        let ls = interpolate_levelset(phi, &mesh, &space).unwrap();
        let ct = classify_cut(&ls, &mesh).unwrap();
        (mesh, space, ls, ct)
    }

    fn norm4(p: &Point) -> f64 {
        (p.x.powi(4) + p.y.powi(4)).powf(0.25) - 1.0
    }

    #[test]
    fn planar_direction_is_constant() {
        let (mesh, space, ls, ct) = setup(3, |p| p.x - 0.5);
        for variant in [SearchVariant::Gradient, SearchVariant::Projected] {
            let g = search_direction(&ls, &space, &mesh, &ct, variant);
            for t in ct.cut_elements() {
                for v in g.nodal(t) {
                    assert!((v - Vector2::new(1.0, 0.0)).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn raw_gradient_matches_finite_differences() {
        let (mesh, space, ls, ct) = setup(3, norm4);
        let g = search_direction(&ls, &space, &mesh, &ct, SearchVariant::Gradient);
        let interior = space.reference().num_nodes() - 1;
        for t in ct.cut_elements() {
            let map = mesh.map(t);
            let xr = space.reference().nodes()[interior];
            let step = 1e-7 * mesh.element_diameter(t);
            let eval = |x: Point| space.eval_scalar(t, ls.nodal_values(), &map.inverse_apply(&x));
            let x = map.apply(&xr);
            let e = [Vector2::new(step, 0.0), Vector2::new(0.0, step)];
            let fd = Vector2::new(
                (eval(x + e[0]) - eval(x - e[0])) / (2.0 * step),
                (eval(x + e[1]) - eval(x - e[1])) / (2.0 * step),
            );
            let exact = g.nodal(t)[interior];
            assert!((fd - exact).norm() <= 1e-6 * exact.norm(), "t={t}");
        }
    }

    #[test]
    fn projected_direction_is_continuous() {
        let (mesh, space, ls, ct) = setup(2, norm4);
        let g = search_direction(&ls, &space, &mesh, &ct, SearchVariant::Projected);
        let mut seen: Vec<Option<Vector2<f64>>> = vec![None; space.num_nodes()];
        for t in ct.cut_elements() {
            for (i, &node) in space.element_nodes(t).iter().enumerate() {
                let v = g.nodal(t)[i];
                match seen[node] {
                    Some(w) => assert_eq!(v, w),
                    None => seen[node] = Some(v),
                }
            }
        }
    }

    #[test]
    fn projection_of_constants_and_means() {
        let (_, space, _, ct) = setup(2, norm4);
        let nloc = space.num_local();
        let nt = ct.num_elements();
        let constant = vec![2.5f64; nt * nloc];
        for v in project_nodal(&space, &ct, &constant).into_iter().flatten() {
            assert_eq!(v, 2.5);
        }

        // a node shared by exactly two cut elements receives the mean
        let cuts: Vec<usize> = ct.cut_elements().collect();
        let mut vals = vec![0.0; nt * nloc];
        let (t0, t1, i0, i1) = cuts
            .iter()
            .flat_map(|&a| cuts.iter().map(move |&b| (a, b)))
            .filter(|(a, b)| a < b)
            .find_map(|(a, b)| {
                (3..nloc).find_map(|i| {
                    let g = space.element_nodes(a)[i];
                    space.element_nodes(b).iter().position(|&h| h == g).map(|j| (a, b, i, j))
                })
            })
            .expect("two cut elements share an edge");
        vals[t0 * nloc + i0] = 1.0;
        vals[t1 * nloc + i1] = 3.0;
        let p = project_nodal(&space, &ct, &vals);
        assert_eq!(p[space.element_nodes(t0)[i0]], Some(2.0));
    }

    #[test]
    fn projection_is_max_norm_stable() {
        let (_, space, _, ct) = setup(3, norm4);
        let nloc = space.num_local();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let vals: Vec<f64> = (0..ct.num_elements() * nloc).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let in_max = ct
                .cut_elements()
                .flat_map(|t| vals[t * nloc..(t + 1) * nloc].iter().copied())
                .fold(0.0f64, |a, v| a.max(v.abs()));
            let out_max = project_nodal(&space, &ct, &vals)
                .into_iter()
                .flatten()
                .fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(out_max <= in_max);
        }
    }
}
