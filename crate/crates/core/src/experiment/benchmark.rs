//! Built-in test problems.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::sync::Arc;

use nalgebra::Vector2;

use crate::levelset::Side;
use crate::mesh::Point;
use crate::metrics::ExactSolution;
use crate::nitsche::{ProblemData, SideField};

/// Level set, coefficients and exact solution of an interface problem.
#[derive(Clone)]
pub struct Problem {
    pub name: &'static str,
    pub phi: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    pub alpha: [f64; 2],
    pub exact: Arc<dyn ExactSolution + Send + Sync>,
    pub source: SideField,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem").field("name", &self.name).field("alpha", &self.alpha).finish_non_exhaustive()
    }
}

impl Problem {
    /// Discrete problem data; Dirichlet values are the exact solution.
    pub fn data(&self, lambda_factor: f64) -> ProblemData {
        let exact = self.exact.clone();
        ProblemData {
            alpha: self.alpha,
            source: self.source.clone(),
            dirichlet: Arc::new(move |side, x| exact.value(side, x)),
            lambda_factor,
        }
    }

    pub fn phi(&self, x: &Point) -> f64 {
        (self.phi)(x)
    }
}

/// `|x|_4^4`
fn s4(x: &Point) -> f64 {
    x.x.powi(4) + x.y.powi(4)
}

/// Smoothed square `|x|_4 = 1` with a kink across the interface.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmoothedSquare;

impl SmoothedSquare {
    pub const ALPHA: [f64; 2] = [1.0, 2.0];

    pub fn phi(x: &Point) -> f64 {
        s4(x).powf(0.25) - 1.0
    }

    pub fn laplacian(side: Side, x: &Point) -> f64 {
        let s = s4(x);
        let r2 = x.x * x.x + x.y * x.y;
        let r6 = x.x.powi(6) + x.y.powi(6);
        match side {
            Side::Negative => {
                let a = FRAC_PI_4 * s;
                SQRT_2 * PI * (PI * a.cos() * r6 + 3.0 * a.sin() * r2)
            }
            Side::Positive => 1.5 * PI * (r2 * s.powf(-0.75) - r6 * s.powf(-1.75)),
        }
    }

    pub fn source(side: Side, x: &Point) -> f64 {
        -Self::ALPHA[side.index()] * Self::laplacian(side, x)
    }
}

impl ExactSolution for SmoothedSquare {
    fn value(&self, side: Side, x: &Point) -> f64 {
        let s = s4(x);
        match side {
            Side::Negative => 1.0 + FRAC_PI_2 - SQRT_2 * (FRAC_PI_4 * s).cos(),
            Side::Positive => FRAC_PI_2 * s.powf(0.25),
        }
    }

    fn gradient(&self, side: Side, x: &Point) -> Vector2<f64> {
        let s = s4(x);
        let cube = Vector2::new(x.x.powi(3), x.y.powi(3));
        match side {
            Side::Negative => cube * (SQRT_2 * PI * (FRAC_PI_4 * s).sin()),
            Side::Positive if s == 0.0 => Vector2::zeros(),
            Side::Positive => cube * (FRAC_PI_2 * s.powf(-0.75)),
        }
    }
}

/// Straight interface `x = c` with a piecewise linear, flux-continuous
/// solution. The discrete space contains it exactly.
#[derive(Debug, Clone, Copy)]
pub struct PlanarPatch {
    pub c: f64,
}

impl PlanarPatch {
    pub const ALPHA: [f64; 2] = [1.0, 2.0];
    const SLOPE: [f64; 2] = [2.0, 1.0];
}

impl ExactSolution for PlanarPatch {
    fn value(&self, side: Side, x: &Point) -> f64 {
        1.0 + Self::SLOPE[side.index()] * (x.x - self.c) + 0.5 * x.y
    }

    fn gradient(&self, side: Side, _x: &Point) -> Vector2<f64> {
        Vector2::new(Self::SLOPE[side.index()], 0.5)
    }
}

/// Benchmark on `[-1.5, 1.5]^2`: `phi = |x|_4 - 1`, `alpha = (1, 2)`.
pub fn benchmark() -> Problem {
    Problem {
        name: "benchmark",
        phi: Arc::new(SmoothedSquare::phi),
        alpha: SmoothedSquare::ALPHA,
        exact: Arc::new(SmoothedSquare),
        source: Arc::new(SmoothedSquare::source),
    }
}

/// Patch test with the interface `x = 0.1`.
pub fn planar_patch() -> Problem {
    let c = 0.1;
    Problem {
        name: "planar-patch",
        phi: Arc::new(move |x: &Point| x.x - c),
        alpha: PlanarPatch::ALPHA,
        exact: Arc::new(PlanarPatch { c }),
        source: Arc::new(|_, _| 0.0),
    }
}

/// Point on `|x|_4 = 1` at parameter `t`.
pub fn smoothed_square_point(t: f64) -> Point {
    let (s, c) = t.sin_cos();
    Point::new(c.signum() * c.abs().sqrt(), s.signum() * s.abs().sqrt())
}
