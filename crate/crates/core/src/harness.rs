//! Convergence studies and single solves driven by a JSON configuration.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{build_coupled_system, AssemblyOptions, CoupledSystem, FormContext};
use crate::error_analysis::{combined_errors, ConvergenceRecord, Rate};
use crate::mesh::{build_annulus_mesh, build_disk_mesh, refine, Mesh2D};
use crate::problem::{by_name, InterfaceProblem, INTERFACE_RADIUS, OUTER_RADIUS};
use crate::solver::{solve, SolveReport, SolverMethod, SolverOptions};
use crate::{Error, Result, Side};

/// Interface edge-count ratio `disk:annulus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ratio {
    pub disk: usize,
    pub annulus: usize,
}

impl Ratio {
    pub const fn new(disk: usize, annulus: usize) -> Self {
        Self { disk, annulus }
    }

    /// `a-b`, used in file names.
    pub fn file_tag(&self) -> String {
        format!("{}-{}", self.disk, self.annulus)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.disk, self.annulus)
    }
}

impl FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("ratio `{s}` is not of the form R:S with positive integers"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let disk: usize = a.trim().parse().map_err(|_| bad())?;
        let annulus: usize = b.trim().parse().map_err(|_| bad())?;
        if disk == 0 || annulus == 0 {
            return Err(bad());
        }
        Ok(Self { disk, annulus })
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_problem() -> String {
    "gaussian_disk_annulus".into()
}
fn default_base_edges() -> usize {
    8
}
fn default_theta_exponent() -> f64 {
    1.0
}
fn default_solver_tol() -> f64 {
    1e-12
}
fn default_out() -> PathBuf {
    PathBuf::from("results")
}

/// Study configuration.
///
/// Level 0 uses `base_edges * disk` edges on the disk polygon and
/// `base_edges * annulus` on the annulus's inner polygon; every further level
/// refines both meshes once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "default_problem")]
    pub problem: String,
    pub orders: Vec<usize>,
    pub ratios: Vec<Ratio>,
    #[serde(default = "default_base_edges")]
    pub base_edges: usize,
    pub levels: usize,
    #[serde(default)]
    pub c_theta: Option<f64>,
    #[serde(default = "default_theta_exponent")]
    pub theta_exponent: f64,
    #[serde(default = "default_solver")]
    pub solver: SolverMethod,
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_solver() -> SolverMethod {
    SolverMethod::Direct
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            problem: default_problem(),
            orders: vec![2, 3, 4],
            ratios: vec![Ratio::new(1, 1), Ratio::new(1, 2), Ratio::new(2, 1)],
            base_edges: default_base_edges(),
            levels: 4,
            c_theta: None,
            theta_exponent: default_theta_exponent(),
            solver: default_solver(),
            solver_tol: default_solver_tol(),
            out: default_out(),
        }
    }
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        by_name(&self.problem)?;
        if self.orders.is_empty() {
            return Err(Error::Config("orders must not be empty".into()));
        }
        if let Some(k) = self.orders.iter().find(|k| !(1..=4).contains(*k)) {
            return Err(Error::Config(format!("order {k} is outside 1..=4")));
        }
        if self.ratios.is_empty() {
            return Err(Error::Config("ratios must not be empty".into()));
        }
        if self.levels < crate::error_analysis::MIN_LEVELS {
            return Err(Error::Config(format!(
                "levels must be at least {} to fit rates, got {}",
                crate::error_analysis::MIN_LEVELS,
                self.levels
            )));
        }
        for r in &self.ratios {
            let (n1, n2) = self.edge_counts(*r);
            if n1 < 4 || n1 % 2 != 0 || n2 < 8 {
                return Err(Error::Config(format!(
                    "ratio {r} with base_edges {} gives {n1}:{n2} edges; the disk needs an even count >= 4 and the annulus >= 8",
                    self.base_edges
                )));
            }
        }
        if let Some(c) = self.c_theta {
            if !(c > 0.0) {
                return Err(Error::Config(format!("c_theta must be positive, got {c}")));
            }
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::Config(format!("solver_tol must be positive, got {}", self.solver_tol)));
        }
        Ok(())
    }

    /// Interface edge counts of the base meshes.
    pub fn edge_counts(&self, ratio: Ratio) -> (usize, usize) {
        (self.base_edges * ratio.disk, self.base_edges * ratio.annulus)
    }

    pub fn assembly_options(&self) -> AssemblyOptions {
        AssemblyOptions { c_theta: self.c_theta, theta_exponent: self.theta_exponent, edge_points: None }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { method: self.solver, tolerance: self.solver_tol, ..SolverOptions::default() }
    }

    /// Disk and annulus meshes of every level for one ratio.
    pub fn mesh_family(&self, ratio: Ratio, levels: usize) -> Result<Vec<(Mesh2D, Mesh2D)>> {
        let (n1, n2) = self.edge_counts(ratio);
        let mut disk = build_disk_mesh(INTERFACE_RADIUS, n1)?;
        let mut annulus = build_annulus_mesh(INTERFACE_RADIUS, OUTER_RADIUS, n2)?;
        let mut out = Vec::with_capacity(levels);
        for level in 0..levels {
            if level > 0 {
                disk = refine(&disk);
                annulus = refine(&annulus);
            }
            out.push((disk.clone(), annulus.clone()));
        }
        Ok(out)
    }

    pub fn csv_name(&self, order: usize, ratio: Ratio) -> String {
        format!("{}_{}_{}.csv", self.problem, order, ratio.file_tag())
    }
}

/// Study mesh size: the larger of the two subdomain mesh sizes.
pub fn level_h(disk: &Mesh2D, annulus: &Mesh2D) -> f64 {
    disk.h().max(annulus.h())
}

/// One solved instance.
pub struct Solved<'a> {
    pub ctx: FormContext<'a>,
    pub system: CoupledSystem,
    pub solution: Vec<f64>,
    pub report: SolveReport,
    pub h: f64,
    pub l2: f64,
    pub h1: f64,
}

impl Solved<'_> {
    pub fn parts(&self) -> [&[f64]; 4] {
        self.system.split(&self.solution)
    }
}

/// Assembles and solves one level and evaluates its errors.
pub fn solve_instance<'a>(
    problem: &'a InterfaceProblem,
    disk: Mesh2D,
    annulus: Mesh2D,
    order: usize,
    assembly: AssemblyOptions,
    solver: &SolverOptions,
) -> Result<Solved<'a>> {
    let h = level_h(&disk, &annulus);
    let ctx = FormContext::new(disk, annulus, order, problem, assembly)?;
    let system = build_coupled_system(&ctx)?;
    let (solution, report) = solve(&system, solver)?;
    let [u1, u2, _, _] = system.split(&solution);
    let (l2, h1) = combined_errors(&ctx, [u1, u2])?;
    Ok(Solved { ctx, system, solution, report, h, l2, h1 })
}

/// Convergence record of one `(order, ratio)` combination.
pub fn run_combination(config: &StudyConfig, order: usize, ratio: Ratio) -> Result<ConvergenceRecord> {
    let problem = by_name(&config.problem)?;
    let solver = config.solver_options();
    let mut record = ConvergenceRecord::new();
    for (disk, annulus) in config.mesh_family(ratio, config.levels)? {
        let s = solve_instance(&problem, disk, annulus, order, config.assembly_options(), &solver)?;
        record.push(s.h, s.l2, s.h1);
    }
    Ok(record)
}

/// Result of one combination of a study.
#[derive(Debug)]
pub struct StudyEntry {
    pub order: usize,
    pub ratio: Ratio,
    pub record: Result<ConvergenceRecord>,
}

/// Runs every `(order, ratio)` combination, writes one CSV per successful
/// combination and `summary.txt` into `config.out`.
pub fn run_study(config: &StudyConfig) -> Result<Vec<StudyEntry>> {
    config.validate()?;
    let combos: Vec<(usize, Ratio)> =
        config.ratios.iter().flat_map(|&r| config.orders.iter().map(move |&k| (k, r))).collect();
    let entries: Vec<StudyEntry> = combos
        .par_iter()
        .map(|&(order, ratio)| StudyEntry { order, ratio, record: run_combination(config, order, ratio) })
        .collect();
    fs::create_dir_all(&config.out)?;
    for e in &entries {
        match &e.record {
            Ok(record) => fs::write(config.out.join(config.csv_name(e.order, e.ratio)), record.to_csv()?)?,
            Err(err) => eprintln!("order {} ratio {}: {err}", e.order, e.ratio),
        }
    }
    fs::write(config.out.join("summary.txt"), summary_table(config, &entries))?;
    Ok(entries)
}

fn order_name(k: usize) -> String {
    match k {
        1 => "Linear".into(),
        2 => "Quadratic".into(),
        3 => "Cubic".into(),
        4 => "Quartic".into(),
        k => format!("P{k}"),
    }
}

/// Text table grouped by ratio: one `h` column, then L2/H1 error columns per
/// order, then a row of least-squares rates.
pub fn summary_table(config: &StudyConfig, entries: &[StudyEntry]) -> String {
    let mut out = String::new();
    for &ratio in &config.ratios {
        let cols: Vec<&StudyEntry> = entries.iter().filter(|e| e.ratio == ratio).collect();
        out.push_str(&format!("{ratio} ratio ({})\n", config.problem));
        let mut header = format!("{:>10}", "h");
        for e in &cols {
            header.push_str(&format!(" | {:>11} {:>11}", format!("{} L2", order_name(e.order)), "H1"));
        }
        out.push_str(&header);
        out.push('\n');
        let levels = cols.iter().filter_map(|e| e.record.as_ref().ok().map(|r| r.levels())).max().unwrap_or(0);
        for level in 0..levels {
            let h = cols.iter().find_map(|e| e.record.as_ref().ok().and_then(|r| r.h.get(level).copied()));
            let mut row = format!("{:>10}", h.map(|h| format!("{h:.4}")).unwrap_or_default());
            for e in &cols {
                match e.record.as_ref().ok().filter(|r| level < r.levels()) {
                    Some(r) => row.push_str(&format!(" | {:>11.3e} {:>11.3e}", r.l2[level], r.h1[level])),
                    None => row.push_str(&format!(" | {:>11} {:>11}", "", "")),
                }
            }
            out.push_str(&row);
            out.push('\n');
        }
        let mut rates = format!("{:>10}", "Rate");
        for e in &cols {
            let cell = |f: Result<crate::error_analysis::RateFit>| match f {
                Ok(fit) => fit.least_squares.to_string(),
                Err(_) => "-".into(),
            };
            match &e.record {
                Ok(r) => rates.push_str(&format!(" | {:>11} {:>11}", cell(r.l2_rate()), cell(r.h1_rate()))),
                Err(_) => rates.push_str(&format!(" | {:>11} {:>11}", "failed", "")),
            }
        }
        out.push_str(&rates);
        out.push_str("\n\n");
        for e in &cols {
            if let Err(err) = &e.record {
                out.push_str(&format!("order {} failed: {err}\n\n", e.order));
            }
        }
    }
    out
}

/// Least-squares L2 and H1 rates, `None` for exact reproduction.
pub fn record_rates(record: &ConvergenceRecord) -> Result<(Option<f64>, Option<f64>)> {
    let value = |r: Rate| r.value();
    Ok((value(record.l2_rate()?.least_squares), value(record.h1_rate()?.least_squares)))
}

/// Solves one level and writes `disk.csv`, `annulus.csv` (vertex tables
/// `x,y,u_h,u_exact`), `lambda.csv`, `rho.csv` (`x,y,value`) into `out`.
/// Returns the number of data rows written.
pub fn run_single(config: &StudyConfig, order: usize, ratio: Ratio, level: usize, out: &Path) -> Result<SingleSummary> {
    let problem = by_name(&config.problem)?;
    if !(1..=4).contains(&order) {
        return Err(Error::Config(format!("order {order} is outside 1..=4")));
    }
    let (disk, annulus) = config.mesh_family(ratio, level + 1)?.pop().expect("at least one level");
    let s = solve_instance(&problem, disk, annulus, order, config.assembly_options(), &config.solver_options())?;
    fs::create_dir_all(out)?;
    let [u1, u2, lambda, rho] = s.parts();
    let mut rows = 0;
    for (side, values, name) in [(Side::One, u1, "disk.csv"), (Side::Two, u2, "annulus.csv")] {
        let space = &s.ctx.side(side).space;
        let mut text = String::from("x,y,u_h,u_exact\n");
        for (v, p) in space.mesh().vertices().iter().enumerate() {
            // Vertex dofs carry the mesh vertex index.
            let exact = problem.eval_exact(side, p).0;
            text.push_str(&format!("{:e},{:e},{:e},{:e}\n", p.x, p.y, values[v], exact));
            rows += 1;
        }
        fs::write(out.join(name), text)?;
    }
    for (side, values, name) in [(Side::One, lambda, "lambda.csv"), (Side::Two, rho, "rho.csv")] {
        let sc = s.ctx.side(side);
        let mut text = String::from("x,y,value\n");
        for (p, v) in sc.interface.coords(&sc.space).zip(values) {
            text.push_str(&format!("{:e},{:e},{:e}\n", p.x, p.y, v));
            rows += 1;
        }
        fs::write(out.join(name), text)?;
    }
    Ok(SingleSummary {
        h: s.h,
        l2: s.l2,
        h1: s.h1,
        dofs: s.system.dim(),
        residual: s.report.residual,
        rows,
        center_value: u1[0],
    })
}

/// What `run_single` reports back.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleSummary {
    pub h: f64,
    pub l2: f64,
    pub h1: f64,
    pub dofs: usize,
    pub residual: f64,
    pub rows: usize,
    /// `u_h` at vertex 0 of the disk mesh, its center.
    pub center_value: f64,
}
