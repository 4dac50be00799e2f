//! Convergence study: per level, interpolate the level set, cut, deform,
//! assemble, solve and measure errors.

use std::io::Write;

use crate::deform::{build_theta, search_direction, Deformation, SearchVariant, StepOptions};
use crate::error::{Error, Result};
use crate::fe_space::{LagrangeSpace, UnfittedSpace};
use crate::levelset::{classify_cut, interpolate_levelset, CutTopology, LevelSetFE};
use crate::mesh::{Mesh, Point};
use crate::metrics::{compute_errors, ErrorDegrees, ErrorReport, LevelErrors, LevelRecord};
use crate::nitsche::{assemble, ProblemData, QuadratureDegrees};
use crate::solver::{solve_direct, SolveOptions, SolveReport};

use super::benchmark::Problem;
use super::config::RunConfig;

/// Geometry and unfitted space of one mesh.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub level_set: LevelSetFE,
    pub cut: CutTopology,
    pub deformation: Deformation,
    pub space: UnfittedSpace,
}

impl Discretization {
    pub fn build(
        mesh: Mesh,
        k: usize,
        phi: &dyn Fn(&Point) -> f64,
        variant: SearchVariant,
        step: &StepOptions,
    ) -> Result<Self> {
        let lagrange = LagrangeSpace::new(&mesh, k);
        let level_set = interpolate_levelset(phi, &mesh, &lagrange)?;
        let cut = classify_cut(&level_set, &mesh)?;
        let gh = search_direction(&level_set, &lagrange, &mesh, &cut, variant);
        let deformation = build_theta(&level_set, &gh, &lagrange, &mesh, &cut, step)?;
        let space = UnfittedSpace::new(lagrange, &cut);
        Ok(Self { mesh, level_set, cut, deformation, space })
    }

    pub fn solve(&self, data: &ProblemData, quad: &QuadratureDegrees, opts: &SolveOptions) -> Result<SolveReport> {
        let sys = assemble(&self.mesh, &self.space, &self.deformation, &self.cut, data, quad)?;
        solve_direct(&sys, opts)
    }

    pub fn errors(&self, coefficients: &[f64], problem: &Problem) -> Result<LevelErrors> {
        let k = self.space.degree();
        compute_errors(
            &self.mesh,
            &self.space,
            coefficients,
            &self.deformation,
            &self.cut,
            problem.exact.as_ref(),
            &|x| problem.phi(x),
            &ErrorDegrees::for_order(k),
        )
    }
}

/// Solver diagnostics of one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub level: usize,
    pub min_pivot: f64,
    pub relative_residual: f64,
}

/// All levels of one polynomial degree.
#[derive(Debug)]
pub struct DegreeRun {
    pub k: usize,
    pub report: ErrorReport,
    pub solves: Vec<SolveStats>,
    /// First level that could not be completed.
    pub failure: Option<(usize, Error)>,
}

#[derive(Debug)]
pub struct ConvergenceRun {
    pub runs: Vec<DegreeRun>,
}

impl ConvergenceRun {
    pub fn is_complete(&self) -> bool {
        self.runs.iter().all(|r| r.failure.is_none())
    }
}

/// Mesh of level `level`: the structured initial mesh refined `level` times.
pub fn level_mesh(cfg: &RunConfig, level: usize) -> Result<Mesh> {
    let mut mesh = Mesh::structured(cfg.bounding_box(), cfg.subdivisions)?;
    for _ in 0..level {
        mesh = mesh.refine_uniform();
    }
    Ok(mesh)
}

/// Runs one degree; a failing level ends the run for this degree.
pub fn run_degree(cfg: &RunConfig, k: usize) -> Result<DegreeRun> {
    let problem = cfg.problem();
    let data = problem.data(cfg.lambda_factor);
    let quad = cfg.quadrature(k);
    let mut mesh = level_mesh(cfg, 0)?;
    let mut records = Vec::new();
    let mut solves = Vec::new();
    let mut failure = None;
    for level in 0..cfg.levels_for(k) {
        if level > 0 {
            mesh = mesh.refine_uniform();
        }
        let h = mesh.h_max();
        let step = || -> Result<(LevelRecord, SolveStats)> {
            let disc = Discretization::build(mesh.clone(), k, &|x| problem.phi(x), cfg.variant(), &cfg.step_options())?;
            let sol = disc.solve(&data, &quad, &SolveOptions::default())?;
            let errors = disc.errors(&sol.solution, &problem)?;
            let stats = SolveStats { level, min_pivot: sol.min_pivot, relative_residual: sol.relative_residual };
            Ok((LevelRecord { level, dofs: disc.space.num_dofs(), h, errors }, stats))
        };
        match step() {
            Ok((record, stats)) => {
                records.push(record);
                solves.push(stats);
            }
            Err(e) => {
                failure = Some((level, e));
                break;
            }
        }
    }
    Ok(DegreeRun { k, report: ErrorReport::new(records), solves, failure })
}

pub fn run_convergence(cfg: &RunConfig) -> Result<ConvergenceRun> {
    cfg.validate()?;
    let runs = cfg.degrees.iter().map(|&k| run_degree(cfg, k)).collect::<Result<_>>()?;
    Ok(ConvergenceRun { runs })
}

pub const CSV_HEADER: [&str; 12] =
    ["k", "L", "dofs", "h", "d_gammah", "eoc_d", "e_L2", "eoc_L2", "e_H1", "eoc_H1", "e_jump", "eoc_jump"];

/// Writes the error table; orders are left empty where undefined.
pub fn write_csv<W: Write>(run: &ConvergenceRun, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in &run.runs {
        for (rec, eoc) in r.report.levels.iter().zip(&r.report.eoc) {
            let mut row = vec![r.k.to_string(), rec.level.to_string(), rec.dofs.to_string(), rec.h.to_string()];
            for (e, o) in rec.errors.as_array().iter().zip(eoc) {
                row.push(e.to_string());
                row.push(o.map(|v| v.to_string()).unwrap_or_default());
            }
            w.write_record(&row).map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// Human-readable table in the layout of the CSV file.
pub fn format_table(run: &ConvergenceRun) -> String {
    let mut s = format!(
        "{:>2} {:>2} {:>8} {:>11} {:>5} {:>11} {:>5} {:>11} {:>5} {:>11} {:>5}\n",
        "k", "L", "dofs", "d_gammah", "eoc", "e_L2", "eoc", "e_H1", "eoc", "e_jump", "eoc"
    );
    for r in &run.runs {
        for (rec, eoc) in r.report.levels.iter().zip(&r.report.eoc) {
            s += &format!("{:>2} {:>2} {:>8}", r.k, rec.level, rec.dofs);
            for (e, o) in rec.errors.as_array().iter().zip(eoc) {
                let o = o.map(|v| format!("{v:.1}")).unwrap_or_else(|| "-".into());
                s += &format!(" {e:>11.4e} {o:>5}");
            }
            s.push('\n');
        }
        if let Some((level, e)) = &r.failure {
            s += &format!("k={} stopped at L={level}: {e}\n", r.k);
        }
    }
    s
}
