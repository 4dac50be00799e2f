//! Small-scale invariant checks of every stage of the method.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deform::{lenoir_extend_edge, search_direction, solve_dh, SearchVariant, StepOptions};
use crate::error::Result;
use crate::fe_space::{LagrangeSpace, ReferenceElement};
use crate::levelset::{classify_cut, interpolate_levelset, Side};
use crate::mesh::{BoundingBox, Mesh, Point};
use crate::nitsche::{inverse_estimate_bound, inverse_estimate_probe, QuadratureDegrees};
use crate::quadrature::{segment_rule, triangle_rule};
use crate::solver::SolveOptions;

use super::benchmark::{benchmark, planar_patch, Problem};
use super::run::Discretization;

/// Result of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Parameters that the checks use; changing them away from the defaults is
/// expected to make the corresponding check fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfTestOptions {
    pub lambda_factor: f64,
    /// Exactness degree of the stiffness rule for `k = 3`; `None` is the
    /// default `2k - 2`.
    pub stiffness_degree: Option<usize>,
}

impl Default for SelfTestOptions {
    fn default() -> Self {
        Self { lambda_factor: 20.0, stiffness_degree: None }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn benchmark_mesh() -> Result<Mesh> {
    Mesh::structured(BoundingBox::square(-1.5, 1.5), 8)
}

fn quadrature_exactness() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for d in 0..=20 {
        let rule = triangle_rule(d)?;
        for a in 0..=d {
            for b in 0..=d - a {
                let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                let got: f64 = rule.points.iter().zip(&rule.weights).map(|(p, w)| w * p.x.powi(a as i32) * p.y.powi(b as i32)).sum();
                worst = worst.max((got - exact).abs() / exact);
            }
        }
        let seg = segment_rule(d)?;
        for a in 0..=d {
            let got: f64 = seg.points.iter().zip(&seg.weights).map(|(s, w)| w * s.powi(a as i32)).sum();
            worst = worst.max((got * (a + 1) as f64 - 1.0).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max relative monomial error {worst:.2e}")))
}

fn stiffness_exactness(degree: usize) -> Result<(bool, String)> {
    let re = ReferenceElement::new(3);
    let n = re.num_nodes();
    let local = |rule_degree: usize| -> Result<Vec<f64>> {
        let rule = triangle_rule(rule_degree)?;
        let mut k = vec![0.0; n * n];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let (_, g) = re.values_and_grads_at(p);
            for i in 0..n {
                for j in 0..n {
                    k[i * n + j] += w * g[i].dot(&g[j]);
                }
            }
        }
        Ok(k)
    };
    let got = local(degree)?;
    let reference = local(20)?;
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = got.iter().zip(&reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
    Ok((err <= 1e-12, format!("k=3 stiffness with degree {degree}: relative error {err:.2e}")))
}

fn partition_of_unity() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for k in 1..=6 {
        let re = ReferenceElement::new(k);
        for _ in 0..20 {
            let (x, y): (f64, f64) = (rng.gen(), rng.gen());
            let p = if x + y > 1.0 { Point::new(1.0 - x, 1.0 - y) } else { Point::new(x, y) };
            let (v, g) = re.values_and_grads_at(&p);
            worst = worst.max((v.iter().sum::<f64>() - 1.0).abs());
            worst = worst.max(g.iter().sum::<nalgebra::Vector2<f64>>().norm());
        }
    }
    (worst <= 1e-10, format!("max defect {worst:.2e} for k=1..6"))
}

fn cut_areas() -> Result<(bool, String)> {
    let mesh = benchmark_mesh()?;
    let space = LagrangeSpace::new(&mesh, 1);
    let ls = interpolate_levelset(|x| benchmark().phi(x), &mesh, &space)?;
    let ct = classify_cut(&ls, &mesh)?;
    let mut worst: f64 = 0.0;
    for cut in ct.cuts() {
        let area = mesh.element_area(cut.element);
        worst = worst.max((cut.side_area[0] + cut.side_area[1] - area).abs() / area);
    }
    Ok((worst <= 1e-13 && !ct.cuts().is_empty(), format!("{} cut elements, area defect {worst:.2e}", ct.cuts().len())))
}

fn affine_reduction() -> Result<(bool, String)> {
    let mesh = benchmark_mesh()?;
    let disc = Discretization::build(mesh, 3, &|x| x.x - 0.31 + 0.2 * x.y, SearchVariant::Gradient, &StepOptions::default())?;
    let m = disc.deformation.max_displacement();
    Ok((m <= 1e-13, format!("max nodal displacement {m:.2e}")))
}

fn dh_vertices() -> Result<(bool, String)> {
    let mesh = benchmark_mesh()?;
    let space = LagrangeSpace::new(&mesh, 2);
    let ls = interpolate_levelset(|x| benchmark().phi(x), &mesh, &space)?;
    let ct = classify_cut(&ls, &mesh)?;
    let gh = search_direction(&ls, &space, &mesh, &ct, SearchVariant::Gradient);
    let mut worst: f64 = 0.0;
    for t in ct.cut_elements() {
        for x in &space.reference().nodes()[..3] {
            worst = worst.max(solve_dh(&ls, &gh, &space, &mesh, t, x, &StepOptions::default())?.abs());
        }
    }
    Ok((worst <= 1e-13, format!("max |d_h| at vertices {worst:.2e}")))
}

fn extension_identities() -> Result<(bool, String)> {
    let corner = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
    let mut worst: f64 = 0.0;
    for k in 2..=6 {
        let trace: Vec<f64> = (0..=k).map(|m| if m == 0 || m == k { 0.0 } else { 1.0 + 0.3 * m as f64 }).collect();
        for edge in 0..3 {
            let (a, b, c) = (corner[(edge + 1) % 3], corner[(edge + 2) % 3], corner[edge]);
            for i in 0..10 {
                let s = (i as f64 + 0.5) / 10.0;
                let on = lenoir_extend_edge(&trace, edge, &(a + (b - a) * s))?;
                worst = worst.max((on - crate::fe_space::lagrange_1d(k, &trace, s)).abs());
                for p in [a + (c - a) * s, b + (c - b) * s] {
                    worst = worst.max(lenoir_extend_edge(&trace, edge, &p)?.abs());
                }
                let zero = lenoir_extend_edge(&vec![0.0; k + 1], edge, &Point::new(0.2, 0.3))?;
                worst = worst.max(zero.abs());
            }
        }
    }
    Ok((worst <= 1e-13, format!("max defect {worst:.2e} for k=2..6")))
}

fn inverse_estimate() -> Result<(bool, String)> {
    let mesh = benchmark_mesh()?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        let space = LagrangeSpace::new(&mesh, k);
        let ls = interpolate_levelset(|x| benchmark().phi(x), &mesh, &space)?;
        let ct = classify_cut(&ls, &mesh)?;
        for t in ct.cut_elements() {
            for side in Side::BOTH {
                let r = inverse_estimate_probe(&ct, k, t, side, 20, &mut rng);
                worst = worst.max(r / inverse_estimate_bound(k));
            }
        }
    }
    Ok((worst <= 1.0, format!("max ratio / bound {worst:.3}")))
}

/// Solves `problem` with degree `k` on the coarse benchmark mesh.
fn solve_coarse(problem: &Problem, k: usize, lambda_factor: f64) -> Result<(f64, f64, f64)> {
    let disc = Discretization::build(benchmark_mesh()?, k, &|x| problem.phi(x), SearchVariant::Gradient, &StepOptions::default())?;
    let sol = disc.solve(&problem.data(lambda_factor), &QuadratureDegrees::for_order(k), &SolveOptions::default())?;
    let e = disc.errors(&sol.solution, problem)?;
    Ok((sol.min_pivot, sol.relative_residual, e.e_h1))
}

fn outcome(name: &'static str, r: Result<(bool, String)>) -> Check {
    match r {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: e.to_string() },
    }
}

/// Runs every check; a check that errors counts as failed.
pub fn run_self_test(opts: &SelfTestOptions) -> Vec<Check> {
    let stiffness = opts.stiffness_degree.unwrap_or(QuadratureDegrees::for_order(3).stiffness);
    let mut checks = vec![
        outcome("quadrature-exactness", quadrature_exactness()),
        outcome("stiffness-exactness", stiffness_exactness(stiffness)),
        outcome("partition-of-unity", Ok(partition_of_unity())),
        outcome("cut-areas", cut_areas()),
        outcome("affine-reduction", affine_reduction()),
        outcome("dh-vertices", dh_vertices()),
        outcome("extension-identities", extension_identities()),
        outcome("inverse-estimate", inverse_estimate()),
    ];
    match solve_coarse(&benchmark(), 2, opts.lambda_factor) {
        Ok((pivot, residual, _)) => {
            checks.push(Check {
                name: "coercivity",
                passed: pivot > 0.0,
                detail: format!("k=2 benchmark, lambda factor {}: min pivot {pivot:.3e}", opts.lambda_factor),
            });
            checks.push(Check {
                name: "solver-residual",
                passed: residual <= 1e-9,
                detail: format!("relative residual {residual:.2e}"),
            });
        }
        Err(e) => checks.push(Check { name: "coercivity", passed: false, detail: e.to_string() }),
    }
    let patch = (1..=3).try_fold(0.0f64, |m, k| Ok(m.max(solve_coarse(&planar_patch(), k, 20.0)?.2)));
    checks.push(outcome("patch-test", patch.map(|e| (e <= 1e-9, format!("max H1 error {e:.2e} for k=1..3")))));
    checks
}
