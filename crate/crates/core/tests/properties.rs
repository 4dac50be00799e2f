use proptest::prelude::*;

use isofem::deform::{SearchVariant, StepOptions};
use isofem::experiment::{Direction, Discretization, ProblemKind, RunConfig};
use isofem::levelset::{classify_cut, interpolate_levelset};
use isofem::fe_space::LagrangeSpace;
use isofem::mesh::{BoundingBox, Mesh};
use isofem::metrics::eoc;
use isofem::nitsche::averaging_weights;
use isofem::quadrature::triangle_rule;
use isofem::solver::{solve_csr, SolveOptions};
use isofem::sparse::CsrMatrix;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn refinement_preserves_area(n in 1usize..6, x0 in -2.0f64..0.0, w in 0.5f64..3.0) {
        let mesh = Mesh::structured(BoundingBox::new(x0, x0 + w, -1.0, 1.0), n).unwrap();
        let fine = mesh.refine_uniform();
        prop_assert_eq!(fine.num_elements(), 4 * mesh.num_elements());
        prop_assert!((fine.total_area() - 2.0 * w).abs() < 1e-12 * w);
        prop_assert!((0..fine.num_elements()).all(|t| fine.element_area(t) > 0.0));
        prop_assert!((fine.h_max() - 0.5 * mesh.h_max()).abs() < 1e-12);
    }

    #[test]
    fn cut_sides_partition_elements(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -0.5f64..0.5, k in 1usize..4) {
        prop_assume!(a.abs() + b.abs() > 0.1);
        let mesh = Mesh::structured(BoundingBox::square(-1.0, 1.0), 4).unwrap();
        let space = LagrangeSpace::new(&mesh, k);
        let ls = interpolate_levelset(|x| a * x.x + b * x.y + c, &mesh, &space).unwrap();
        let ct = classify_cut(&ls, &mesh).unwrap();
        for cut in ct.cuts() {
            let area = mesh.element_area(cut.element);
            prop_assert!((cut.side_area[0] + cut.side_area[1] - area).abs() < 1e-13);
            let (k1, k2) = averaging_weights(cut.side_area[0], area);
            prop_assert_eq!(k1 + k2, 1.0);
            prop_assert!(k1 * k1 <= 2.0 * cut.side_area[0] / area && k2 * k2 <= 2.0 * cut.side_area[1] / area);
        }
    }

    #[test]
    fn affine_level_sets_give_identity(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -0.5f64..0.5, k in 1usize..5) {
        prop_assume!(a.abs() + b.abs() > 0.1);
        let mesh = Mesh::structured(BoundingBox::square(-1.0, 1.0), 4).unwrap();
        let d = Discretization::build(mesh, k, &|x| a * x.x + b * x.y + c, SearchVariant::Gradient, &StepOptions::default()).unwrap();
        prop_assert!(d.deformation.max_displacement() <= 1e-13);
    }

    #[test]
    fn triangle_rules_integrate_polynomials(d in 0usize..25, seed in 0u64..1000) {
        let rule = triangle_rule(d).unwrap();
        let mut exact = 0.0;
        let mut got = 0.0;
        let mut c = seed as f64;
        for a in 0..=d {
            for b in 0..=d - a {
                c = (c * 1.618 + 0.3) % 2.0 - 1.0;
                exact += c * factorial(a) * factorial(b) / factorial(a + b + 2);
                got += c * rule.points.iter().zip(&rule.weights).map(|(p, w)| w * p.x.powi(a as i32) * p.y.powi(b as i32)).sum::<f64>();
            }
        }
        prop_assert!((got - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn eoc_recovers_power(p in 0.1f64..8.0, c in 1e-8f64..1.0) {
        prop_assert!((eoc(c * 2f64.powf(p), c).unwrap() - p).abs() < 1e-10);
    }

    #[test]
    fn csr_matches_dense(entries in prop::collection::vec((0usize..6, 0usize..6, -1.0f64..1.0), 0..40), x in prop::collection::vec(-1.0f64..1.0, 6)) {
        let mut dense = [[0.0; 6]; 6];
        for &(i, j, v) in &entries {
            dense[i][j] += v;
        }
        let a = CsrMatrix::from_triplets(6, entries);
        let y = a.mul_vec(&x);
        for i in 0..6 {
            let e: f64 = (0..6).map(|j| dense[i][j] * x[j]).sum();
            prop_assert!((y[i] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn spd_solves_have_small_residual(n in 2usize..30, seed in prop::collection::vec(-1.0f64..1.0, 64)) {
        // diagonally dominant symmetric band matrix
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + seed[i % 64].abs()));
            for off in 1..3 {
                if i + off < n {
                    let v = seed[(i * 7 + off) % 64];
                    t.push((i, i + off, v));
                    t.push((i + off, i, v));
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let b: Vec<f64> = (0..n).map(|i| seed[(3 * i + 1) % 64] + 0.1).collect();
        let r = solve_csr(&a, &b, &SolveOptions::default()).unwrap();
        prop_assert!(r.relative_residual <= 1e-12);
        prop_assert!(r.min_pivot > 0.0);
    }

    #[test]
    fn config_round_trip(subdivisions in 1usize..20, lambda in 0.1f64..100.0, levels in prop::option::of(1usize..7),
                         degrees in prop::collection::vec(1usize..6, 1..4), patch in any::<bool>(), projected in any::<bool>(),
                         quad in prop::option::of(1usize..20), svg in any::<bool>()) {
        let cfg = RunConfig {
            problem: if patch { ProblemKind::PlanarPatch } else { ProblemKind::Benchmark },
            subdivisions,
            lambda_factor: lambda,
            levels,
            degrees,
            search_direction: if projected { Direction::Projected } else { Direction::Gradient },
            quad_penalty: quad,
            svg,
            ..RunConfig::default()
        };
        let text = cfg.to_toml();
        let parsed = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(parsed.to_toml(), text);
    }
}
