//! Reference quadrature rules and quadrature points mapped through the mesh
//! deformation.

use nalgebra::{Matrix2, Vector2};

use crate::deform::Deformation;
use crate::error::{Error, Result};
use crate::levelset::{ref_area, CutTopology, Side};
use crate::mesh::{Mesh, Point};

/// Highest exactness degree offered by [`triangle_rule`] and [`segment_rule`].
pub const MAX_DEGREE: usize = 40;

/// Quadrature rule with positive weights on a reference domain.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Rule on the unit triangle; weights sum to 1/2.
pub type TriangleRule = QuadratureRule<Point>;
/// Rule on `[0, 1]`; weights sum to 1.
pub type SegmentRule = QuadratureRule<f64>;

impl<P> QuadratureRule<P> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss-Legendre rule on `[0, 1]` exact for polynomials of degree `degree`.
pub fn segment_rule(degree: usize) -> Result<SegmentRule> {
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedQuadrature(degree));
    }
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    Ok(QuadratureRule {
        points: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        weights: w.iter().map(|v| 0.5 * v).collect(),
        degree,
    })
}

/// Collapsed (Duffy) Gauss rule on the unit triangle exact for polynomials
/// of total degree `degree`.
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedQuadrature(degree));
    }
    // the collapse adds one degree in the first direction
    let n = (degree + 3) / 2;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        let u = 0.5 * (x[i] + 1.0);
        for j in 0..n {
            let v = 0.5 * (x[j] + 1.0);
            points.push(Point::new(u, (1.0 - u) * v));
            weights.push(0.25 * w[i] * w[j] * (1.0 - u));
        }
    }
    Ok(QuadratureRule { points, weights, degree })
}

/// Quadrature point carried through `Theta_h`.
///
/// `basis` and `basis_grads` hold the element's Lagrange basis values and
/// physical gradients `F^{-T} A_T^{-T} grad_hat psi_i` at the point.
#[derive(Debug, Clone)]
pub struct MappedQuadPoint {
    pub ref_point: Point,
    /// `Theta_h(Phi_T(x_hat))`.
    pub point: Point,
    /// Volume: reference weight times `det A_T * J_V`. Interface: reference
    /// weight times segment length times `J_Gamma`.
    pub weight: f64,
    /// `det F`.
    pub jacobian: f64,
    /// Unit normal of the deformed interface (interface points only).
    pub normal: Vector2<f64>,
    /// Reference weight times segment length times `det(F) F^{-T} n_lin`
    /// (interface points only).
    pub conormal: Vector2<f64>,
    pub basis: Vec<f64>,
    pub basis_grads: Vec<Vector2<f64>>,
}

/// Volume quadrature points on `T ∩ Omega_side^lin`, mapped through `Theta_h`.
pub fn mapped_volume_points(
    mesh: &Mesh,
    ct: &CutTopology,
    d: &Deformation,
    element: usize,
    side: Side,
    degree: usize,
) -> Result<Vec<MappedQuadPoint>> {
    let rule = triangle_rule(degree)?;
    let det_a = mesh.map(element).det;
    let mut out = Vec::new();
    for tri in ct.side_triangles(element, side) {
        let jac = Matrix2::from_columns(&[tri[1] - tri[0], tri[2] - tri[0]]);
        let scale = 2.0 * ref_area(&tri) * det_a;
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let r = tri[0] + jac * p;
            let ev = d.evaluate(mesh, element, &r)?;
            out.push(MappedQuadPoint {
                ref_point: r,
                point: ev.point,
                weight: w * scale * ev.gradient.det,
                jacobian: ev.gradient.det,
                normal: Vector2::zeros(),
                conormal: Vector2::zeros(),
                basis: ev.basis,
                basis_grads: ev.basis_grads,
            });
        }
    }
    Ok(out)
}

/// Interface quadrature points on the segment `Gamma^lin ∩ T`, mapped onto
/// `Gamma_h`. Empty for uncut elements.
pub fn mapped_interface_points(
    mesh: &Mesh,
    ct: &CutTopology,
    d: &Deformation,
    element: usize,
    degree: usize,
) -> Result<Vec<MappedQuadPoint>> {
    let Some(cut) = ct.cut(element) else {
        return Ok(Vec::new());
    };
    let rule = segment_rule(degree)?;
    let length = cut.segment_length(mesh);
    let [p, q] = cut.segment;
    let mut out = Vec::with_capacity(rule.len());
    for (s, w) in rule.points.iter().zip(&rule.weights) {
        let r = p + (q - p) * *s;
        let ev = d.evaluate(mesh, element, &r)?;
        let g = &ev.gradient;
        let co = g.det * (g.f_inv_t * cut.normal);
        let norm = co.norm();
        out.push(MappedQuadPoint {
            ref_point: r,
            point: ev.point,
            weight: w * length * norm,
            jacobian: g.det,
            normal: co / norm,
            conormal: co * (w * length),
            basis: ev.basis,
            basis_grads: ev.basis_grads,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn gauss_legendre_small_cases() {
        let (x, w) = gauss_legendre(1);
        assert_eq!(x, vec![0.0]);
        assert!((w[0] - 2.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_monomials() {
        for degree in 0..=MAX_DEGREE {
            let rule = triangle_rule(degree).unwrap();
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p.x.powi(a as i32) * p.y.powi(b as i32))
                        .sum();
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!((q - exact).abs() <= 1e-12 * exact, "deg {degree} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn segment_monomials() {
        for degree in 0..=MAX_DEGREE {
            let rule = segment_rule(degree).unwrap();
            for a in 0..=degree as i32 {
                let q: f64 = rule.points.iter().zip(&rule.weights).map(|(t, w)| w * t.powi(a)).sum();
                let exact = 1.0 / (a as f64 + 1.0);
                assert!((q - exact).abs() <= 1e-12 * exact, "deg {degree} a={a}");
            }
        }
        let r = segment_rule(2).unwrap();
        let q: f64 = r.points.iter().zip(&r.weights).map(|(t, w)| w * t * t).sum();
        assert!((q - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unsupported_degree() {
        assert_eq!(triangle_rule(MAX_DEGREE + 1), Err(Error::UnsupportedQuadrature(MAX_DEGREE + 1)));
        assert!(segment_rule(MAX_DEGREE + 1).is_err());
    }
}
