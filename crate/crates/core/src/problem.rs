//! Problem data: coefficients, sources, exact solutions and outer boundary
//! data for the disk/annulus interface problem.
//!
//! Every field is a global formula, so it can be evaluated wherever the
//! polygonal subdomains stick out of the exact ones.

use std::fmt;
use std::sync::Arc;

use crate::geometry::Circle;
use crate::polynomial::Poly2;
use crate::{Error, Point, Result, Side};

pub type ScalarField = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type GradientField = Arc<dyn Fn(&Point) -> (f64, [f64; 2]) + Send + Sync>;

/// Radius of the interface circle.
pub const INTERFACE_RADIUS: f64 = 0.25;

/// Radius of the outer boundary circle.
pub const OUTER_RADIUS: f64 = 0.5;

/// Names accepted by [`by_name`].
pub const REGISTERED: &[&str] = &["gaussian_disk_annulus"];

/// `-div(p_i grad u_i) = f_i` in the disk (side 1) and the annulus (side 2),
/// with `u_1 = u_2` and balanced fluxes on the interface and `u_2 = g0` on the
/// outer circle.
#[derive(Clone)]
pub struct InterfaceProblem {
    pub name: String,
    pub coefficient: [ScalarField; 2],
    pub source: [ScalarField; 2],
    pub exact: [GradientField; 2],
    pub outer_data: ScalarField,
    pub interface: Circle,
    pub outer: Circle,
}

impl fmt::Debug for InterfaceProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InterfaceProblem")
            .field("name", &self.name)
            .field("interface", &self.interface)
            .field("outer", &self.outer)
            .finish_non_exhaustive()
    }
}

impl InterfaceProblem {
    pub fn coefficient(&self, side: Side, p: &Point) -> f64 {
        (self.coefficient[side.index()])(p)
    }

    pub fn source(&self, side: Side, p: &Point) -> f64 {
        (self.source[side.index()])(p)
    }

    /// Exact value and gradient.
    pub fn eval_exact(&self, side: Side, p: &Point) -> (f64, [f64; 2]) {
        (self.exact[side.index()])(p)
    }

    pub fn outer_data(&self, p: &Point) -> f64 {
        (self.outer_data)(p)
    }

    /// Largest coefficient over a sample of both subdomains.
    pub fn max_coefficient(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..=20 {
            let r = OUTER_RADIUS * i as f64 / 20.0;
            for j in 0..16 {
                let t = std::f64::consts::TAU * j as f64 / 16.0;
                let p = Point::new(r * t.cos(), r * t.sin());
                m = m.max(self.coefficient(Side::One, &p)).max(self.coefficient(Side::Two, &p));
            }
        }
        m
    }
}

/// Looks up a registered problem.
pub fn by_name(name: &str) -> Result<InterfaceProblem> {
    match name {
        "gaussian_disk_annulus" => Ok(manufactured_case()),
        _ => Err(Error::UnknownProblem(name.to_string())),
    }
}

fn circles() -> (Circle, Circle) {
    (
        Circle::new(Point::origin(), INTERFACE_RADIUS).expect("positive radius"),
        Circle::new(Point::origin(), OUTER_RADIUS).expect("positive radius"),
    )
}

/// `u_1 = exp(-5 r^2)`, `u_2 = (exp(-5 r^2) + exp(-5/16)) / 2`, `p_1 = 1`,
/// `p_2 = 2`, so that `f_1 = f_2 = (20 - 100 r^2) exp(-5 r^2)`.
pub fn manufactured_case() -> InterfaceProblem {
    let shift = (-5.0f64 / 16.0).exp();
    let gauss = |p: &Point| (-5.0 * p.coords.norm_squared()).exp();
    let u1: GradientField = Arc::new(move |p| {
        let g = gauss(p);
        (g, [-10.0 * p.x * g, -10.0 * p.y * g])
    });
    let u2: GradientField = Arc::new(move |p| {
        let g = gauss(p);
        (0.5 * (g + shift), [-5.0 * p.x * g, -5.0 * p.y * g])
    });
    let f: ScalarField = Arc::new(move |p| (20.0 - 100.0 * p.coords.norm_squared()) * gauss(p));
    let outer_exact = u2.clone();
    let (interface, outer) = circles();
    InterfaceProblem {
        name: "gaussian_disk_annulus".into(),
        coefficient: [Arc::new(|_| 1.0), Arc::new(|_| 2.0)],
        source: [f.clone(), f],
        exact: [u1, u2],
        outer_data: Arc::new(move |p| outer_exact(p).0),
        interface,
        outer,
    }
}

/// Same polynomial on both sides with unit coefficients: `f = -lap P`,
/// `g0 = P`.
pub fn polynomial_patch(poly: Poly2) -> InterfaceProblem {
    let poly = Arc::new(poly);
    let exact: GradientField = {
        let poly = poly.clone();
        Arc::new(move |p| (poly.eval(p.x, p.y), poly.gradient(p.x, p.y)))
    };
    let source: ScalarField = {
        let poly = poly.clone();
        Arc::new(move |p| -poly.laplacian(p.x, p.y))
    };
    let (interface, outer) = circles();
    InterfaceProblem {
        name: "polynomial_patch".into(),
        coefficient: [Arc::new(|_| 1.0), Arc::new(|_| 1.0)],
        source: [source.clone(), source],
        exact: [exact.clone(), exact],
        outer_data: Arc::new(move |p| poly.eval(p.x, p.y)),
        interface,
        outer,
    }
}

/// Largest value jump and flux imbalance of the exact solution over
/// `npoints` equally spaced interface points.
pub fn interface_defects(problem: &InterfaceProblem, npoints: usize) -> (f64, f64) {
    let (mut jump, mut flux) = (0.0f64, 0.0f64);
    for j in 0..npoints {
        let theta = std::f64::consts::TAU * j as f64 / npoints as f64;
        let p = problem.interface.point_at(theta);
        let n = problem.interface.radial_normal(&p);
        let (v1, g1) = problem.eval_exact(Side::One, &p);
        let (v2, g2) = problem.eval_exact(Side::Two, &p);
        // Disk normal is +n, annulus normal is -n.
        let q1 = problem.coefficient(Side::One, &p) * (g1[0] * n.x + g1[1] * n.y);
        let q2 = -problem.coefficient(Side::Two, &p) * (g2[0] * n.x + g2[1] * n.y);
        jump = jump.max((v1 - v2).abs());
        flux = flux.max((q1 + q2).abs());
    }
    (jump, flux)
}

/// `|-div(p grad u) - f|` at `p`, with the divergence taken by second-order
/// central differences of step `step`.
pub fn finite_difference_residual(problem: &InterfaceProblem, side: Side, p: &Point, step: f64) -> f64 {
    let u = |q: Point| problem.eval_exact(side, &q).0;
    let c = |q: Point| problem.coefficient(side, &q);
    let mut div = 0.0;
    for d in [crate::Vector::new(step, 0.0), crate::Vector::new(0.0, step)] {
        let forward = c(p + d * 0.5) * (u(p + d) - u(*p));
        let backward = c(p - d * 0.5) * (u(*p) - u(p - d));
        div += (forward - backward) / (step * step);
    }
    (-div - problem.source(side, p)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interface_values() {
        let pb = manufactured_case();
        let p = Point::new(0.25, 0.0);
        let (u1, g1) = pb.eval_exact(Side::One, &p);
        let (u2, _) = pb.eval_exact(Side::Two, &p);
        assert_relative_eq!(u1, 0.731616, epsilon = 1e-6);
        assert_relative_eq!(u1, u2, epsilon = 1e-15);
        assert_relative_eq!(g1[0], -1.829039, epsilon = 1e-6);
        assert_eq!(pb.eval_exact(Side::One, &Point::origin()).0, 1.0);
        // (e^{-5/4} + e^{-5/16}) / 2
        assert_relative_eq!(pb.outer_data(&Point::new(0.0, 0.5)), 0.5090602, epsilon = 1e-7);
    }

    #[test]
    fn exact_solution_satisfies_interface_conditions() {
        let (jump, flux) = interface_defects(&manufactured_case(), 1000);
        assert!(jump <= 1e-12, "{jump}");
        assert!(flux <= 1e-10, "{flux}");
    }

    #[test]
    fn derived_source_matches_finite_differences() {
        let pb = manufactured_case();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let r: f64 = rng.gen_range(0.0..0.5);
            let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let p = Point::new(r * t.cos(), r * t.sin());
            let side = if r < 0.25 { Side::One } else { Side::Two };
            assert!(finite_difference_residual(&pb, side, &p, 1e-4) <= 1e-6);
        }
    }

    #[test]
    fn registry() {
        assert!(by_name("gaussian_disk_annulus").is_ok());
        let err = by_name("nope").unwrap_err();
        assert!(err.is_validation());
        assert_eq!(manufactured_case().max_coefficient(), 2.0);
    }

    #[test]
    fn patch_problem_is_consistent() {
        let pb = polynomial_patch(Poly2::from_terms(&[(2, 0, 1.0), (0, 1, 3.0)]));
        assert_eq!(pb.source(Side::Two, &Point::new(0.3, 0.1)), -2.0);
        let (jump, flux) = interface_defects(&pb, 100);
        assert!(jump == 0.0 && flux < 1e-14);
    }
}
