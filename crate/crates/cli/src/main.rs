use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use isofem::experiment::{
    export_geometry, run_convergence, run_self_test, write_csv, Discretization, RunConfig, SelfTestOptions,
};
use isofem::experiment::run::{format_table, level_mesh};

#[derive(Parser)]
#[command(name = "isofem", version, about = "Isoparametric unfitted Nitsche FEM for 2D interface problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overrides `out_dir` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write SVG pictures of the coarsest geometry per degree.
        #[arg(long)]
        svg: bool,
    },
    /// Run the built-in invariant checks.
    SelfTest {
        #[arg(long, default_value_t = 20.0)]
        lambda_factor: f64,
        /// Exactness degree of the k=3 stiffness rule.
        #[arg(long)]
        stiffness_degree: Option<usize>,
    },
}

fn run(config: PathBuf, out: Option<PathBuf>, svg: bool) -> isofem::Result<bool> {
    let cfg = RunConfig::load(&config)?;
    let out = out.unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    std::fs::create_dir_all(&out).map_err(|e| isofem::Error::Io(format!("{}: {e}", out.display())))?;
    let result = run_convergence(&cfg)?;
    print!("{}", format_table(&result));
    let csv_path = out.join("convergence.csv");
    let file = File::create(&csv_path).map_err(|e| isofem::Error::Io(format!("{}: {e}", csv_path.display())))?;
    write_csv(&result, file)?;
    println!("wrote {}", csv_path.display());
    if svg || cfg.svg {
        let problem = cfg.problem();
        for &k in &cfg.degrees {
            let disc = Discretization::build(level_mesh(&cfg, 0)?, k, &|x| problem.phi(x), cfg.variant(), &cfg.step_options())?;
            let path = out.join(format!("geometry_k{k}.svg"));
            export_geometry(&disc.mesh, &disc.cut, &disc.deformation, &path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(result.is_complete())
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, svg } => match run(config, out, svg) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(2),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::SelfTest { lambda_factor, stiffness_degree } => {
            let checks = run_self_test(&SelfTestOptions { lambda_factor, stiffness_degree });
            for c in &checks {
                println!("{} {:<22} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
