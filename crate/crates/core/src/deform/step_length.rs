use nalgebra::Vector2;

use super::SearchDirection;
use crate::error::{Error, Result};
use crate::fe_space::LagrangeSpace;
use crate::levelset::LevelSetFE;
use crate::mesh::{Mesh, Point};

/// Controls for the scalar step-length solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    /// Relative residual tolerance.
    pub tol: f64,
    /// Search bracket radius in units of the element diameter.
    pub alpha0: f64,
    pub max_newton: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self { tol: 1e-14, alpha0: 0.5, max_newton: 30 }
    }
}

const SCAN_SAMPLES: usize = 32;

/// Step length `d_h` at a reference point of cut element `t`: the root of
/// `p(d) = E_T phi_h(x + d G_h(x)) - phi_lin(x)` closest to zero.
///
/// Newton's method starts at 0. When an iterate leaves the bracket
/// `[-alpha0 h_T, alpha0 h_T]` or the derivative degenerates, the bracket is
/// scanned for sign changes and the change nearest to 0 is bisected.
pub fn solve_dh(
    ls: &LevelSetFE,
    gh: &SearchDirection,
    space: &LagrangeSpace,
    mesh: &Mesh,
    t: usize,
    ref_point: &Point,
    opts: &StepOptions,
) -> Result<f64> {
    let g = gh.eval(space, t, ref_point);
    let g_ref = mesh.map(t).a_inv * g;
    let target = ls.eval_linear(mesh, t, ref_point);
    let h = mesh.element_diameter(t);
    let f = StepFunction { space, values: ls.nodal_values(), t, x: *ref_point, dir: g_ref, target };
    let tol = opts.tol * (target.abs() + h);
    let bound = opts.alpha0 * h;

    let (mut d, (mut p, mut dp)) = (0.0, f.eval(0.0));
    for _ in 0..opts.max_newton {
        if p.abs() <= tol {
            return Ok(d);
        }
        if dp.abs() < 1e-14 {
            break;
        }
        let step = p / dp;
        let next = d - step;
        if !next.is_finite() || next.abs() > bound {
            break;
        }
        d = next;
        (p, dp) = f.eval(d);
        if step.abs() <= 4.0 * f64::EPSILON * h {
            return Ok(d);
        }
    }
    if p.abs() <= tol {
        return Ok(d);
    }
    bracketed_root(&f, bound, tol, h).ok_or(Error::NoRoot { element: t, xi: ref_point.x, eta: ref_point.y })
}

struct StepFunction<'a> {
    space: &'a LagrangeSpace,
    values: &'a [f64],
    t: usize,
    x: Point,
    dir: Vector2<f64>,
    target: f64,
}

impl StepFunction<'_> {
    fn eval(&self, d: f64) -> (f64, f64) {
        let y = self.x + self.dir * d;
        let (v, g) = self.space.eval_scalar_with_ref_grad(self.t, self.values, &y);
        (v - self.target, g.dot(&self.dir))
    }

    fn value(&self, d: f64) -> f64 {
        self.space.eval_scalar(self.t, self.values, &(self.x + self.dir * d)) - self.target
    }
}

fn bracketed_root(f: &StepFunction, bound: f64, tol: f64, h: f64) -> Option<f64> {
    let samples: Vec<(f64, f64)> = (0..=SCAN_SAMPLES)
        .map(|j| {
            let d = -bound + 2.0 * bound * j as f64 / SCAN_SAMPLES as f64;
            (d, f.value(d))
        })
        .collect();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for w in samples.windows(2) {
        let ((a, fa), (b, fb)) = (w[0], w[1]);
        if fa == 0.0 {
            best = closer(best, (a, a, fa, fa));
        } else if fa.signum() != fb.signum() {
            best = closer(best, (a, b, fa, fb));
        }
    }
    let (mut a, mut b, mut fa, _) = best?;
    if fa == 0.0 {
        return Some(a);
    }
    while b - a > 4.0 * f64::EPSILON * h {
        let m = 0.5 * (a + b);
        let fm = f.value(m);
        if fm.abs() <= tol {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

fn closer(best: Option<(f64, f64, f64, f64)>, cand: (f64, f64, f64, f64)) -> Option<(f64, f64, f64, f64)> {
    let dist = |c: &(f64, f64, f64, f64)| if c.0 <= 0.0 && c.1 >= 0.0 { 0.0 } else { c.0.abs().min(c.1.abs()) };
    match best {
        Some(b) if dist(&b) <= dist(&cand) => Some(b),
        _ => Some(cand),
    }
}
