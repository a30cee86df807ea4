//! Linear solvers for the coupled system: equilibrated sparse LU with
//! iterative refinement, and restarted GMRES with an ILU(0) preconditioner.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use faer::prelude::*;
use faer::sparse::linalg::LuError;
use faer::Mat;

use crate::assembly::CoupledSystem;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    Direct,
    Iterative,
}

impl fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMethod::Direct => "direct",
            SolverMethod::Iterative => "iterative",
        })
    }
}

impl FromStr for SolverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SolverMethod::Direct),
            "iterative" => Ok(SolverMethod::Iterative),
            _ => Err(Error::Parse(format!("unknown solver `{s}` (expected direct or iterative)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub method: SolverMethod,
    /// Relative residual target of the iterative solver.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restart: usize,
    /// Iterative refinement steps after the direct solve.
    pub refinement_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: SolverMethod::Direct,
            tolerance: 1e-12,
            max_iterations: 10_000,
            restart: 200,
            refinement_steps: 3,
        }
    }
}

/// Largest accepted relative residual of a direct solve.
pub const DIRECT_RESIDUAL_LIMIT: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub method: SolverMethod,
    /// `|A x - b| / |b|`, recomputed from the original system.
    pub residual: f64,
    /// Refinement steps (direct) or Krylov iterations (iterative).
    pub iterations: usize,
    pub nnz: usize,
    /// Relative residual after each refinement step or restart cycle.
    pub history: Vec<f64>,
    pub wall_time: Duration,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `|A x - b| / |b|`, or `|A x|` when `b = 0`.
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let r: Vec<f64> = a.mul_vec(x).iter().zip(b).map(|(ax, bi)| ax - bi).collect();
    let nb = norm(b);
    if nb == 0.0 {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}

/// Row then column scaling so every row and column has largest entry 1.
fn equilibrate(a: &CsrMatrix) -> (Vec<f64>, Vec<f64>) {
    let mut r = vec![0.0f64; a.nrows()];
    for (i, _, v) in a.iter() {
        r[i] = r[i].max(v.abs());
    }
    let r: Vec<f64> = r.into_iter().map(|m| if m > 0.0 { 1.0 / m } else { 1.0 }).collect();
    let mut c = vec![0.0f64; a.ncols()];
    for (i, j, v) in a.iter() {
        c[j] = c[j].max((r[i] * v).abs());
    }
    let c = c.into_iter().map(|m| if m > 0.0 { 1.0 / m } else { 1.0 }).collect();
    (r, c)
}

/// Solves the coupled system with the chosen method.
pub fn solve(system: &CoupledSystem, options: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let a = &system.matrix;
    let b = &system.rhs;
    if a.nrows() != b.len() || a.ncols() != b.len() {
        return Err(Error::Assembly("system matrix and right-hand side disagree in size".into()));
    }
    let (x, iterations, history) = if norm(b) == 0.0 {
        (vec![0.0; b.len()], 0, vec![0.0])
    } else {
        match options.method {
            SolverMethod::Direct => solve_direct(system, options.refinement_steps)?,
            SolverMethod::Iterative => solve_iterative(system, options)?,
        }
    };
    let residual = relative_residual(a, &x, b);
    let report =
        SolveReport { method: options.method, residual, iterations, nnz: a.nnz(), history, wall_time: start.elapsed() };
    if options.method == SolverMethod::Direct && !(residual <= DIRECT_RESIDUAL_LIMIT) {
        return Err(Error::NotConverged { iterations, residual, history: report.history });
    }
    Ok((x, report))
}

fn singular(system: &CoupledSystem, index: usize) -> Error {
    Error::Singular { block: system.block_of(index).to_string(), row: index }
}

fn solve_direct(system: &CoupledSystem, refinement_steps: usize) -> Result<(Vec<f64>, usize, Vec<f64>)> {
    let a = &system.matrix;
    let b = &system.rhs;
    let n = b.len();
    let (r, c) = equilibrate(a);
    let scaled = a.scaled(&r, &c);
    let lu = scaled.to_faer()?.sp_lu().map_err(|e| match e {
        LuError::SymbolicSingular { index } => singular(system, index),
        other => Error::Singular { block: format!("factorisation failed: {other:?}"), row: 0 },
    })?;
    let apply = |rhs: &[f64]| -> Result<Vec<f64>> {
        let m = Mat::from_fn(n, 1, |i, _| r[i] * rhs[i]);
        let y = lu.solve(&m);
        let x: Vec<f64> = (0..n).map(|j| c[j] * y[(j, 0)]).collect();
        if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
            return Err(singular(system, bad));
        }
        Ok(x)
    };
    let mut x = apply(b)?;
    let mut history = vec![relative_residual(a, &x, b)];
    let mut steps = 0;
    for _ in 0..refinement_steps {
        let res: Vec<f64> = b.iter().zip(a.mul_vec(&x)).map(|(bi, ax)| bi - ax).collect();
        let dx = apply(&res)?;
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(xi, d)| xi + d).collect();
        let rel = relative_residual(a, &candidate, b);
        if rel >= *history.last().expect("non-empty") {
            break;
        }
        x = candidate;
        history.push(rel);
        steps += 1;
    }
    Ok((x, steps, history))
}

/// Row order that puts a structurally nonzero entry on every diagonal of the
/// coupled matrix.
fn pivot_order(system: &CoupledSystem) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..system.dim()).collect();
    for &(a, b) in &system.pivot_swaps {
        perm.swap(a, b);
    }
    perm
}

/// Incomplete LU with the sparsity pattern of the matrix.
struct Ilu0 {
    matrix: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    fn new(a: &CsrMatrix) -> Result<Self> {
        let (indptr, indices, values) = a.raw();
        let n = a.nrows();
        let mut vals = values.to_vec();
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for p in indptr[i]..indptr[i + 1] {
                if indices[p] == i {
                    diag[i] = p;
                }
            }
            if diag[i] == usize::MAX {
                return Err(Error::Singular { block: "missing diagonal in ILU(0)".into(), row: i });
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for p in indptr[i]..indptr[i + 1] {
                pos[indices[p]] = p;
            }
            for p in indptr[i]..indptr[i + 1] {
                let k = indices[p];
                if k >= i {
                    break;
                }
                let pivot = vals[diag[k]];
                if pivot == 0.0 {
                    return Err(Error::Singular { block: "zero pivot in ILU(0)".into(), row: k });
                }
                vals[p] /= pivot;
                let lik = vals[p];
                for q in diag[k] + 1..indptr[k + 1] {
                    let j = indices[q];
                    if pos[j] != usize::MAX {
                        vals[pos[j]] -= lik * vals[q];
                    }
                }
            }
            for p in indptr[i]..indptr[i + 1] {
                pos[indices[p]] = usize::MAX;
            }
            if vals[diag[i]] == 0.0 {
                return Err(Error::Singular { block: "zero pivot in ILU(0)".into(), row: i });
            }
        }
        let mut b = crate::sparse::TripletBuilder::new(n, n);
        for i in 0..n {
            for p in indptr[i]..indptr[i + 1] {
                b.push(i, indices[p], vals[p]);
            }
        }
        Ok(Self { matrix: b.build(), diag })
    }

    fn apply(&self, rhs: &[f64]) -> Vec<f64> {
        let (indptr, indices, values) = self.matrix.raw();
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 0..n {
            for p in indptr[i]..self.diag[i] {
                y[i] -= values[p] * y[indices[p]];
            }
        }
        for i in (0..n).rev() {
            for p in self.diag[i] + 1..indptr[i + 1] {
                y[i] -= values[p] * y[indices[p]];
            }
            y[i] /= values[self.diag[i]];
        }
        y
    }
}

fn solve_iterative(system: &CoupledSystem, options: &SolverOptions) -> Result<(Vec<f64>, usize, Vec<f64>)> {
    let perm = pivot_order(system);
    let a = system.matrix.permute_rows(&perm);
    let b: Vec<f64> = perm.iter().map(|&i| system.rhs[i]).collect();
    let (r, c) = equilibrate(&a);
    let scaled = a.scaled(&r, &c);
    let rhs: Vec<f64> = b.iter().zip(&r).map(|(x, s)| x * s).collect();
    let ilu = Ilu0::new(&scaled)?;
    let (y, iterations, history) = gmres(&scaled, &rhs, &ilu, options)?;
    Ok((y.iter().zip(&c).map(|(v, s)| v * s).collect(), iterations, history))
}

/// Right-preconditioned restarted GMRES.
fn gmres(a: &CsrMatrix, b: &[f64], m: &Ilu0, options: &SolverOptions) -> Result<(Vec<f64>, usize, Vec<f64>)> {
    let n = b.len();
    let nb = norm(b);
    let restart = options.restart.max(1);
    let mut x = vec![0.0; n];
    let mut history = Vec::new();
    let mut total = 0;
    loop {
        let res: Vec<f64> = b.iter().zip(a.mul_vec(&x)).map(|(bi, ax)| bi - ax).collect();
        let beta = norm(&res);
        history.push(beta / nb);
        if beta / nb <= options.tolerance {
            return Ok((x, total, history));
        }
        if total >= options.max_iterations {
            return Err(Error::NotConverged { iterations: total, residual: beta / nb, history });
        }
        let mut v: Vec<Vec<f64>> = vec![res.iter().map(|r| r / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut steps = 0;
        for j in 0..restart {
            let zj = m.apply(&v[j]);
            let mut w = a.mul_vec(&zj);
            z.push(zj);
            for i in 0..=j {
                h[i][j] = w.iter().zip(&v[i]).map(|(a, b)| a * b).sum();
                for (wk, vk) in w.iter_mut().zip(&v[i]) {
                    *wk -= h[i][j] * vk;
                }
            }
            h[j + 1][j] = norm(&w);
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = (h[j][j] * h[j][j] + h[j + 1][j] * h[j + 1][j]).sqrt();
            let (cj, sj) = if d == 0.0 { (1.0, 0.0) } else { (h[j][j] / d, h[j + 1][j] / d) };
            cs[j] = cj;
            sn[j] = sj;
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sj * g[j];
            g[j] *= cj;
            steps = j + 1;
            total += 1;
            let next_norm = norm(&w);
            if g[j + 1].abs() / nb <= options.tolerance || next_norm == 0.0 || total >= options.max_iterations {
                break;
            }
            v.push(w.iter().map(|x| x / next_norm).collect());
        }
        let mut yk = vec![0.0; steps];
        for i in (0..steps).rev() {
            let s: f64 = (i + 1..steps).map(|l| h[i][l] * yk[l]).sum();
            yk[i] = (g[i] - s) / h[i][i];
        }
        for (i, y) in yk.iter().enumerate() {
            for (xk, zk) in x.iter_mut().zip(&z[i]) {
                *xk += y * zk;
            }
        }
    }
}
