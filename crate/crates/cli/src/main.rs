use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pefem::geometry::{geometry_report, InterfaceMap, InterfacePair};
use pefem::harness::{level_h, run_single, run_study, summary_table, Ratio, StudyConfig};
use pefem::mesh::BoundaryTag;
use pefem::solver::SolverMethod;
use pefem::{Error, Result, Side};

#[derive(Parser)]
#[command(name = "pefem-couple", version, about = "Polynomial-extension FEM on nonmatching disk/annulus interfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study over orders and interface ratios.
    Study {
        /// JSON study configuration; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Solve one level and dump the solution tables.
    Solve {
        #[arg(long)]
        order: usize,
        #[arg(long, default_value = "1:1")]
        ratio: Ratio,
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Directory for disk.csv, annulus.csv, lambda.csv and rho.csv.
        #[arg(long, default_value = "solve")]
        out: PathBuf,
        /// Also write both meshes as `<PATH>.disk.txt` and `<PATH>.annulus.txt`.
        #[arg(long)]
        dump_mesh: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        c_theta: Option<f64>,
        #[arg(long)]
        solver: Option<SolverMethod>,
    },
    /// Print interface map diagnostics for every ratio and level.
    CheckGeometry {
        #[arg(long, value_delimiter = ',', default_values_t = [Ratio::new(1, 1), Ratio::new(1, 2), Ratio::new(2, 1)])]
        ratios: Vec<Ratio>,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 8)]
        base_edges: usize,
        /// Gauss points sampled per interface edge.
        #[arg(long, default_value_t = 7)]
        points: usize,
    },
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<Ratio>>,
    #[arg(long)]
    base_edges: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    c_theta: Option<f64>,
    #[arg(long)]
    theta_exponent: Option<f64>,
    #[arg(long)]
    solver: Option<SolverMethod>,
    #[arg(long)]
    solver_tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(self, c: &mut StudyConfig) {
        if let Some(v) = self.problem {
            c.problem = v;
        }
        if let Some(v) = self.orders {
            c.orders = v;
        }
        if let Some(v) = self.ratios {
            c.ratios = v;
        }
        if let Some(v) = self.base_edges {
            c.base_edges = v;
        }
        if let Some(v) = self.levels {
            c.levels = v;
        }
        if self.c_theta.is_some() {
            c.c_theta = self.c_theta;
        }
        if let Some(v) = self.theta_exponent {
            c.theta_exponent = v;
        }
        if let Some(v) = self.solver {
            c.solver = v;
        }
        if let Some(v) = self.solver_tol {
            c.solver_tol = v;
        }
        if let Some(v) = self.out {
            c.out = v;
        }
    }
}

fn load(config: Option<PathBuf>) -> Result<StudyConfig> {
    match config {
        Some(path) => StudyConfig::load(&path),
        None => Ok(StudyConfig::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Study { config, overrides } => {
            let mut config = load(config)?;
            overrides.apply(&mut config);
            config.validate()?;
            let entries = run_study(&config)?;
            print!("{}", summary_table(&config, &entries));
            println!("wrote results to {}", config.out.display());
            if let Some(e) = entries.iter().find(|e| e.record.is_err()) {
                let err = e.record.as_ref().unwrap_err();
                return Err(Error::Assembly(format!("order {} ratio {} failed: {err}", e.order, e.ratio)));
            }
        }
        Command::Solve { order, ratio, level, out, dump_mesh, config, c_theta, solver } => {
            let mut config = load(config)?;
            Overrides { c_theta, solver, ..Default::default() }.apply(&mut config);
            config.validate()?;
            if let Some(path) = dump_mesh {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent)?;
                }
                let (disk, annulus) = config.mesh_family(ratio, level + 1)?.pop().expect("at least one level");
                disk.write_dump(&path.with_extension("disk.txt"))?;
                annulus.write_dump(&path.with_extension("annulus.txt"))?;
            }
            let s = run_single(&config, order, ratio, level, &out)?;
            println!("order {order} ratio {ratio} level {level}: h = {:.4}, dofs = {}", s.h, s.dofs);
            println!("L2 error {:.4e}, H1 error {:.4e}, relative residual {:.3e}", s.l2, s.h1, s.residual);
            println!("u_h(0,0) = {:.8}", s.center_value);
            println!("wrote {} rows to {}", s.rows, out.display());
        }
        Command::CheckGeometry { ratios, levels, base_edges, points } => {
            let config = StudyConfig { ratios: ratios.clone(), levels, base_edges, ..StudyConfig::default() };
            config.validate()?;
            println!(
                "{:>5} {:>5} {:>8} {:>11} {:>11} {:>11} {:>11} {:>11}",
                "ratio", "level", "h", "offset 1", "offset 2", "round trip", "cross trip", "max|J-1|"
            );
            for ratio in ratios {
                for (level, (disk, annulus)) in config.mesh_family(ratio, levels)?.into_iter().enumerate() {
                    let pair = InterfacePair::new(
                        InterfaceMap::new(Side::One, &disk, BoundaryTag::Interface)?,
                        InterfaceMap::new(Side::Two, &annulus, BoundaryTag::Interface)?,
                    )?;
                    let r = geometry_report(&pair, points)?;
                    println!(
                        "{:>5} {:>5} {:>8.4} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}",
                        ratio.to_string(),
                        level,
                        level_h(&disk, &annulus),
                        r.max_offset[0],
                        r.max_offset[1],
                        r.max_round_trip[0].max(r.max_round_trip[1]),
                        r.max_cross_round_trip,
                        r.max_jacobian_defect
                    );
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
