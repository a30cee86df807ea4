//! Gauss-Legendre edge rules and collapsed (Duffy) triangle rules.

use crate::{Error, Result};

/// Largest polynomial degree for which triangle rules are provided.
pub const MAX_TRIANGLE_DEGREE: usize = 10;

/// Largest number of points for edge rules.
pub const MAX_EDGE_POINTS: usize = 10;

/// Points in reference coordinates with positive weights and a guaranteed
/// exactness degree.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Rule on the reference triangle `{x >= 0, y >= 0, x + y <= 1}`.
pub type TriangleRule = QuadratureRule<[f64; 2]>;

/// Rule on `[-1, 1]`.
pub type EdgeRule = QuadratureRule<f64>;

impl<P> QuadratureRule<P> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

impl EdgeRule {
    /// Nodes mapped to `[0, 1]` with weights scaled to sum to 1.
    pub fn unit_interval(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.iter().map(|(&s, w)| (0.5 * (s + 1.0), 0.5 * w))
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` for any `n >= 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule with `npoints` nodes, exact to degree `2 npoints - 1`.
pub fn edge_gauss(npoints: usize) -> Result<EdgeRule> {
    if npoints == 0 || npoints > MAX_EDGE_POINTS {
        return Err(Error::Quadrature(format!("edge rule with {npoints} points (supported 1..={MAX_EDGE_POINTS})")));
    }
    let (points, weights) = gauss_legendre(npoints);
    Ok(EdgeRule { points, weights, degree: 2 * npoints - 1 })
}

/// Triangle rule exact for polynomials of total degree `degree`.
///
/// Built as a Gauss-Legendre product on the unit square collapsed onto the
/// triangle by `(u, v) -> (u, v (1 - u))`; all weights are positive. The rule
/// is checked against the monomial integrals `a! b! / (a + b + 2)!` before it
/// is returned.
pub fn triangle_quadrature(degree: usize) -> Result<TriangleRule> {
    if degree > MAX_TRIANGLE_DEGREE {
        return Err(Error::Quadrature(format!(
            "triangle rule of degree {degree} (supported 0..={MAX_TRIANGLE_DEGREE})"
        )));
    }
    // x^a y^b becomes u^a (1-u)^(b+1) v^b, of degree <= degree + 1 in u.
    let n = (degree + 3) / 2;
    let (gx, gw) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&su, &wu) in gx.iter().zip(&gw) {
        let u = 0.5 * (su + 1.0);
        for (&sv, &wv) in gx.iter().zip(&gw) {
            let v = 0.5 * (sv + 1.0);
            points.push([u, v * (1.0 - u)]);
            weights.push(0.25 * wu * wv * (1.0 - u));
        }
    }
    let rule = TriangleRule { points, weights, degree };
    verify_triangle_rule(&rule)?;
    Ok(rule)
}

/// Exact integral of `x^a y^b` over the reference triangle.
pub fn triangle_monomial_integral(a: usize, b: usize) -> f64 {
    factorial(a) * factorial(b) / factorial(a + b + 2)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn verify_triangle_rule(rule: &TriangleRule) -> Result<()> {
    for total in 0..=rule.degree {
        for a in 0..=total {
            let b = total - a;
            let approx: f64 = rule.iter().map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
            let exact = triangle_monomial_integral(a, b);
            if (approx - exact).abs() > 1e-13 * exact.max(1e-3) {
                return Err(Error::Quadrature(format!(
                    "degree-{} rule fails on x^{a} y^{b}: {approx} vs {exact}",
                    rule.degree
                )));
            }
        }
    }
    if rule.weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::Quadrature("non-positive weight".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn every_triangle_degree_is_exact() {
        for d in 0..=MAX_TRIANGLE_DEGREE {
            let rule = triangle_quadrature(d).unwrap();
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), 0.5, epsilon = 1e-15);
            assert!(rule.points.iter().all(|p| p[0] > 0.0 && p[1] > 0.0 && p[0] + p[1] < 1.0));
        }
        assert!(triangle_quadrature(11).is_err());
    }

    #[test]
    fn degree_two_rule_on_radius_squared() {
        // int x^2 + y^2 = 2 * (2! 0! / 4!) = 1/6
        let rule = triangle_quadrature(2).unwrap();
        let v: f64 = rule.iter().map(|(p, w)| w * (p[0] * p[0] + p[1] * p[1])).sum();
        assert_relative_eq!(v, 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn three_point_gauss_is_exact_for_quintics() {
        let rule = edge_gauss(3).unwrap();
        assert_eq!(rule.degree, 5);
        assert_relative_eq!(rule.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-15);
        let p = |x: f64| 3.0 * x.powi(5) - x.powi(4) + 2.0 * x * x + 1.0;
        let v: f64 = rule.iter().map(|(&x, w)| w * p(x)).sum();
        // odd terms vanish: -2/5 + 4/3 + 2
        assert_relative_eq!(v, -0.4 + 4.0 / 3.0 + 2.0, epsilon = 1e-14);
        // and fails on degree 6
        let q: f64 = rule.iter().map(|(&x, w)| w * x.powi(6)).sum();
        assert!((q - 2.0 / 7.0).abs() > 1e-3);
    }

    #[test]
    fn edge_rules_bounds() {
        assert!(edge_gauss(0).is_err());
        assert!(edge_gauss(11).is_err());
        for n in 1..=MAX_EDGE_POINTS {
            let rule = edge_gauss(n).unwrap();
            for k in 0..=rule.degree {
                let v: f64 = rule.iter().map(|(&x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert_relative_eq!(v, exact, epsilon = 1e-14);
            }
        }
    }
}
