//! Discretization errors on the deformed geometry and estimated orders of
//! convergence.

use nalgebra::Vector2;

use crate::deform::Deformation;
use crate::error::{Error, Result};
use crate::fe_space::UnfittedSpace;
use crate::levelset::{CutTopology, Side};
use crate::mesh::{Mesh, Point};
use crate::quadrature::{mapped_interface_points, mapped_volume_points};

/// Exact solution given per side; each side's formula is its own extension.
pub trait ExactSolution {
    fn value(&self, side: Side, x: &Point) -> f64;
    fn gradient(&self, side: Side, x: &Point) -> Vector2<f64>;
}

/// Exactness degrees of the error quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorDegrees {
    pub volume: usize,
    pub interface: usize,
}

impl ErrorDegrees {
    pub fn for_order(k: usize) -> Self {
        Self { volume: 2 * k, interface: 2 * k + 2 }
    }
}

/// Errors of a single discrete solution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LevelErrors {
    /// `max |phi|` sampled on `Gamma_h`.
    pub d_gamma: f64,
    pub e_l2: f64,
    pub e_h1: f64,
    /// `L2(Gamma_h)` norm of the jump of `E_i u - u_h`.
    pub e_jump: f64,
}

impl LevelErrors {
    pub fn as_array(&self) -> [f64; 4] {
        [self.d_gamma, self.e_l2, self.e_h1, self.e_jump]
    }
}

#[allow(clippy::too_many_arguments)]
pub fn compute_errors(
    mesh: &Mesh,
    space: &UnfittedSpace,
    coefficients: &[f64],
    d: &Deformation,
    ct: &CutTopology,
    exact: &dyn ExactSolution,
    phi: &dyn Fn(&Point) -> f64,
    degrees: &ErrorDegrees,
) -> Result<LevelErrors> {
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for t in 0..mesh.num_elements() {
        for side in Side::BOTH {
            if !space.is_active(t, side) {
                continue;
            }
            let dofs = space.element_dofs(t, side)?;
            for q in mapped_volume_points(mesh, ct, d, t, side, degrees.volume)? {
                let (mut v, mut g) = (0.0, Vector2::zeros());
                for (i, &dof) in dofs.iter().enumerate() {
                    v += coefficients[dof] * q.basis[i];
                    g += coefficients[dof] * q.basis_grads[i];
                }
                l2 += q.weight * (exact.value(side, &q.point) - v).powi(2);
                h1 += q.weight * (exact.gradient(side, &q.point) - g).norm_squared();
            }
        }
    }

    let mut d_gamma: f64 = 0.0;
    let mut jump = 0.0;
    for cut in ct.cuts() {
        let t = cut.element;
        for end in &cut.segment {
            d_gamma = d_gamma.max(phi(&d.apply(mesh, t, end)).abs());
        }
        let neg = space.element_dofs(t, Side::Negative)?;
        let pos = space.element_dofs(t, Side::Positive)?;
        for q in mapped_interface_points(mesh, ct, d, t, degrees.interface)? {
            d_gamma = d_gamma.max(phi(&q.point).abs());
            let uh = |dofs: &[usize]| -> f64 { dofs.iter().zip(&q.basis).map(|(&i, b)| coefficients[i] * b).sum() };
            let e1 = exact.value(Side::Negative, &q.point) - uh(&neg);
            let e2 = exact.value(Side::Positive, &q.point) - uh(&pos);
            jump += q.weight * (e1 - e2).powi(2);
        }
    }
    Ok(LevelErrors { d_gamma, e_l2: l2.sqrt(), e_h1: h1.sqrt(), e_jump: jump.sqrt() })
}

/// `(|Omega_1,h|, |Omega_2,h|, |Gamma_h|)` measured with the mapped quadrature.
pub fn deformed_measures(mesh: &Mesh, ct: &CutTopology, d: &Deformation, degree: usize) -> Result<(f64, f64, f64)> {
    let mut vol = [0.0; 2];
    let mut gamma = 0.0;
    for t in 0..mesh.num_elements() {
        for side in Side::BOTH {
            vol[side.index()] += mapped_volume_points(mesh, ct, d, t, side, degree)?.iter().map(|q| q.weight).sum::<f64>();
        }
        gamma += mapped_interface_points(mesh, ct, d, t, degree)?.iter().map(|q| q.weight).sum::<f64>();
    }
    Ok((vol[0], vol[1], gamma))
}

/// `log2(e_coarse / e_fine)` for one uniform refinement step.
pub fn eoc(e_coarse: f64, e_fine: f64) -> Result<f64> {
    for e in [e_coarse, e_fine] {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::InvalidErrors(format!("cannot estimate an order from error value {e}")));
        }
    }
    Ok((e_coarse / e_fine).log2())
}

/// Errors of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub dofs: usize,
    pub h: f64,
    pub errors: LevelErrors,
}

/// Errors per level plus orders between consecutive levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub levels: Vec<LevelRecord>,
    /// `eoc[l]` compares level `l - 1` with level `l`; `None` at the first
    /// level and where an order is undefined.
    pub eoc: Vec<[Option<f64>; 4]>,
}

impl ErrorReport {
    /// Report with orders wherever they are defined.
    pub fn new(levels: Vec<LevelRecord>) -> Self {
        let mut eoc = vec![[None; 4]];
        for w in levels.windows(2) {
            let (a, b) = (w[0].errors.as_array(), w[1].errors.as_array());
            eoc.push(std::array::from_fn(|i| self::eoc(a[i], b[i]).ok()));
        }
        eoc.truncate(levels.len());
        Self { levels, eoc }
    }

    /// Orders between the two finest levels.
    pub fn finest_eoc(&self) -> Option<[Option<f64>; 4]> {
        (self.levels.len() >= 2).then(|| *self.eoc.last().unwrap())
    }
}

/// Strict order table: needs at least two levels and positive finite errors.
pub fn eoc_table(levels: Vec<LevelRecord>) -> Result<ErrorReport> {
    if levels.len() < 2 {
        return Err(Error::InvalidErrors("at least two levels are needed".into()));
    }
    for l in &levels {
        for e in l.errors.as_array() {
            eoc(e, 1.0)?;
        }
    }
    Ok(ErrorReport::new(levels))
}
