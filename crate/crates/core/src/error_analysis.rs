//! Broken error norms, convergence-rate fits and interface diagnostics of a
//! coupled solution.

use std::fmt;

use crate::assembly::FormContext;
use crate::extension::{extended_conormal, taylor_value, NormalChoice};
use crate::fe_space::FeSpace;
use crate::quadrature::{edge_gauss, triangle_quadrature};
use crate::{Error, Point, Result, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L2,
    /// Full `H^1` norm: value and gradient parts.
    H1,
}

/// `(|u_h - u|_{0}, |grad(u_h - u)|_{0})` summed over the elements of the
/// polygonal subdomain, each squared.
fn error_parts(space: &FeSpace, dofs: &[f64], exact: &dyn Fn(&Point) -> (f64, [f64; 2])) -> Result<(f64, f64)> {
    let rule = triangle_quadrature(2 * space.order() + 2)?;
    let (mut l2, mut grad) = (0.0, 0.0);
    for t in 0..space.element_count() {
        let map = space.element_map(t);
        let local = space.local_values(t, dofs);
        for (xhat, w) in rule.iter() {
            let x = map.to_physical(*xhat);
            let (values, grads) = space.eval_basis(t, *xhat);
            let mut v = 0.0;
            let mut g = [0.0; 2];
            for (l, c) in local.iter().enumerate() {
                v += c * values[l];
                g[0] += c * grads[l][0];
                g[1] += c * grads[l][1];
            }
            let (u, gu) = exact(&x);
            let jw = w * map.det;
            l2 += jw * (v - u) * (v - u);
            grad += jw * ((g[0] - gu[0]).powi(2) + (g[1] - gu[1]).powi(2));
        }
    }
    Ok((l2, grad))
}

/// Broken norm of `u_h - u` over one subdomain mesh.
pub fn broken_error(
    space: &FeSpace,
    dofs: &[f64],
    exact: &dyn Fn(&Point) -> (f64, [f64; 2]),
    norm: Norm,
) -> Result<f64> {
    let (l2, grad) = error_parts(space, dofs, exact)?;
    Ok(match norm {
        Norm::L2 => l2.sqrt(),
        Norm::H1 => (l2 + grad).sqrt(),
    })
}

/// Root of the sum of squares of the per-subdomain errors.
pub fn combined_errors(ctx: &FormContext, u: [&[f64]; 2]) -> Result<(f64, f64)> {
    let (mut l2, mut h1) = (0.0, 0.0);
    for side in Side::BOTH {
        let exact = |p: &Point| ctx.problem.eval_exact(side, p);
        let (a, b) = error_parts(&ctx.side(side).space, u[side.index()], &exact)?;
        l2 += a;
        h1 += a + b;
    }
    Ok((l2.sqrt(), h1.sqrt()))
}

/// A fitted convergence order, or exact reproduction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rate {
    Value(f64),
    Exact,
}

impl Rate {
    pub fn value(self) -> Option<f64> {
        match self {
            Rate::Value(v) => Some(v),
            Rate::Exact => None,
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Value(v) => write!(f, "{v:.3}"),
            Rate::Exact => f.write_str("exact"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    /// Least-squares slope of `log e` against `log h`.
    pub least_squares: Rate,
    /// Slope over the last two levels.
    pub last_interval: Rate,
}

/// Rates need at least this many levels.
pub const MIN_LEVELS: usize = 3;

pub fn fit_rate(h: &[f64], errors: &[f64]) -> Result<RateFit> {
    if h.len() != errors.len() {
        return Err(Error::Config("h and error columns differ in length".into()));
    }
    if h.len() < MIN_LEVELS {
        return Err(Error::TooFewLevels { needed: MIN_LEVELS, got: h.len() });
    }
    if errors.iter().any(|&e| !(e > 0.0)) {
        return Ok(RateFit { least_squares: Rate::Exact, last_interval: Rate::Exact });
    }
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let m = xs.len();
    let last = (ys[m - 1] - ys[m - 2]) / (xs[m - 1] - xs[m - 2]);
    Ok(RateFit { least_squares: Rate::Value(sxy / sxx), last_interval: Rate::Value(last) })
}

/// Errors per level of one study, levels in order of decreasing `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub h: Vec<f64>,
    pub l2: Vec<f64>,
    pub h1: Vec<f64>,
}

impl ConvergenceRecord {
    pub fn new() -> Self {
        Self { h: Vec::new(), l2: Vec::new(), h1: Vec::new() }
    }

    pub fn push(&mut self, h: f64, l2: f64, h1: f64) {
        self.h.push(h);
        self.l2.push(l2);
        self.h1.push(h1);
    }

    pub fn levels(&self) -> usize {
        self.h.len()
    }

    pub fn l2_rate(&self) -> Result<RateFit> {
        fit_rate(&self.h, &self.l2)
    }

    pub fn h1_rate(&self) -> Result<RateFit> {
        fit_rate(&self.h, &self.h1)
    }

    /// CSV with header `h,l2_error,h1_error`, one row per level and a final
    /// `rate,<l2>,<h1>` row of least-squares rates.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::from("h,l2_error,h1_error\n");
        for i in 0..self.levels() {
            out.push_str(&format!("{:e},{:e},{:e}\n", self.h[i], self.l2[i], self.h1[i]));
        }
        let l2 = self.l2_rate()?.least_squares;
        let h1 = self.h1_rate()?.least_squares;
        let fmt = |r: Rate| match r {
            Rate::Value(v) => format!("{v:e}"),
            Rate::Exact => "exact".to_string(),
        };
        out.push_str(&format!("rate,{},{}\n", fmt(l2), fmt(h1)));
        Ok(out)
    }

    /// Parses [`ConvergenceRecord::to_csv`] output; returns the record and the
    /// rate row.
    pub fn from_csv(text: &str) -> Result<(Self, [Rate; 2])> {
        let mut lines = text.lines();
        if lines.next() != Some("h,l2_error,h1_error") {
            return Err(Error::Parse("missing CSV header".into()));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad number `{s}`: {e}")));
        let rate = |s: &str| if s.trim() == "exact" { Ok(Rate::Exact) } else { num(s).map(Rate::Value) };
        let mut record = Self::new();
        for line in lines {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("expected 3 columns in `{line}`")));
            }
            if cols[0] == "rate" {
                return Ok((record, [rate(cols[1])?, rate(cols[2])?]));
            }
            record.push(num(cols[0])?, num(cols[1])?, num(cols[2])?);
        }
        Err(Error::Parse("missing rate row".into()))
    }
}

impl Default for ConvergenceRecord {
    fn default() -> Self {
        Self::new()
    }
}

/// Largest DOF-wise difference between the solved `lambda` and the trace
/// projection of `T^k u_1` on the disk polygon, relative to the largest
/// `|lambda|`.
pub fn lambda_recovery_defect(ctx: &FormContext, u1: &[f64], lambda: &[f64]) -> Result<f64> {
    let sc = ctx.side(Side::One);
    let projected =
        sc.interface.l2_projection(sc.mesh(), |e, xi| taylor_value(&sc.space, &sc.interface_map, e, u1, xi))?;
    let scale = lambda.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    Ok(projected.iter().zip(lambda).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale)
}

/// `L^2` norm on the disk polygon of `q_1(eta) + q_2(eta)`, the sum of the
/// extended co-normal derivatives of both subdomain solutions.
pub fn flux_imbalance(ctx: &FormContext, u1: &[f64], u2: &[f64]) -> Result<f64> {
    let s1 = ctx.side(Side::One);
    let s2 = ctx.side(Side::Two);
    let p1 = |p: &Point| ctx.problem.coefficient(Side::One, p);
    let p2 = |p: &Point| ctx.problem.coefficient(Side::Two, p);
    let rule = edge_gauss(ctx.order + 2)?;
    let mut total = 0.0;
    for edge in s1.interface.edges() {
        let id = edge.boundary_edge;
        let [a, b] = s1.mesh().edge_points(id);
        let len = (b - a).norm();
        for (t, w) in rule.unit_interval() {
            let xi = a + (b - a) * t;
            let q1 = extended_conormal(&s1.space, &s1.interface_map, id, u1, &xi, &p1, NormalChoice::Exact)?;
            let (e2, xi2) = ctx.pair.cross_map(Side::One, Side::Two, &xi)?;
            let q2 = extended_conormal(&s2.space, &s2.interface_map, e2, u2, &xi2, &p2, NormalChoice::Exact)?;
            total += w * len * (q1 + q2).powi(2);
        }
    }
    Ok(total.sqrt())
}

/// `L^2` distance on the annulus polygon between `rho` and the extended
/// co-normal derivative of `u_2`.
pub fn rho_defect(ctx: &FormContext, u2: &[f64], rho: &[f64]) -> Result<f64> {
    let s2 = ctx.side(Side::Two);
    let p2 = |p: &Point| ctx.problem.coefficient(Side::Two, p);
    let rule = edge_gauss(ctx.order + 2)?;
    let mut total = 0.0;
    for edge in s2.interface.edges() {
        let id = edge.boundary_edge;
        let [a, b] = s2.mesh().edge_points(id);
        let len = (b - a).norm();
        for (t, w) in rule.unit_interval() {
            let xi = a + (b - a) * t;
            let q = extended_conormal(&s2.space, &s2.interface_map, id, u2, &xi, &p2, NormalChoice::Exact)?;
            let r = s2.interface.evaluate(s2.mesh(), rho, id, &xi)?;
            total += w * len * (q - r).powi(2);
        }
    }
    Ok(total.sqrt())
}
