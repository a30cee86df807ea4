//! Bivariate polynomials and the Lagrange `P_k` reference element.

use nalgebra::{DMatrix, Matrix2};

use crate::quadrature::factorial;
use crate::{Error, Result};

/// Number of monomials of total degree `<= degree` in two variables.
pub fn monomial_count(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Exponents `(a, b)` of `x^a y^b` in graded lexicographic order:
/// `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`.
pub fn multi_indices(degree: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(monomial_count(degree));
    for total in 0..=degree {
        for b in 0..=total {
            out.push((total - b, b));
        }
    }
    out
}

/// Position of `(a, b)` in [`multi_indices`].
pub fn multi_index_position(a: usize, b: usize) -> usize {
    let total = a + b;
    total * (total + 1) / 2 + b
}

/// `d^p/dx^p x^a = a! / (a - p)! x^(a - p)`, evaluated at `x`.
fn falling_power(x: f64, a: usize, p: usize) -> f64 {
    if p > a {
        return 0.0;
    }
    let coef: f64 = ((a - p + 1)..=a).map(|k| k as f64).product();
    coef * x.powi((a - p) as i32)
}

/// Dense polynomial in `x, y` with coefficients in graded lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2 {
    degree: usize,
    coeffs: Vec<f64>,
}

impl Poly2 {
    pub fn zero(degree: usize) -> Self {
        Self { degree, coeffs: vec![0.0; monomial_count(degree)] }
    }

    pub fn from_coeffs(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != monomial_count(degree) {
            return Err(Error::Space(format!(
                "degree {degree} polynomial needs {} coefficients, got {}",
                monomial_count(degree),
                coeffs.len()
            )));
        }
        Ok(Self { degree, coeffs })
    }

    /// Builds from `(a, b, c)` terms meaning `c x^a y^b`.
    pub fn from_terms(terms: &[(usize, usize, f64)]) -> Self {
        let degree = terms.iter().map(|&(a, b, _)| a + b).max().unwrap_or(0);
        let mut p = Self::zero(degree);
        for &(a, b, c) in terms {
            p.coeffs[multi_index_position(a, b)] += c;
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.derivative(0, 0, x, y)
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        [self.derivative(1, 0, x, y), self.derivative(0, 1, x, y)]
    }

    /// `d^(p+q) / dx^p dy^q` at `(x, y)`.
    pub fn derivative(&self, p: usize, q: usize, x: f64, y: f64) -> f64 {
        multi_indices(self.degree)
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(&(a, b), c)| c * falling_power(x, a, p) * falling_power(y, b, q))
            .sum()
    }

    pub fn laplacian(&self, x: f64, y: f64) -> f64 {
        self.derivative(2, 0, x, y) + self.derivative(0, 2, x, y)
    }
}

/// Expands the physical derivative `d^a/dx^a d^b/dy^b` into reference
/// derivatives for an affine map with inverse Jacobian `inv` (`xhat = inv (x - x0)`).
///
/// Returns the coefficient of `d^(p)/dxhat^p d^(q)/dyhat^q` for every `(p, q)`
/// with `p + q = a + b`, indexed by `q`.
pub fn chain_rule_weights(inv: &Matrix2<f64>, a: usize, b: usize) -> Vec<f64> {
    // d/dx = inv[(0,0)] d/dxhat + inv[(1,0)] d/dyhat, d/dy = inv[(0,1)] d/dxhat + inv[(1,1)] d/dyhat.
    let dx = [inv[(0, 0)], inv[(1, 0)]];
    let dy = [inv[(0, 1)], inv[(1, 1)]];
    // Homogeneous operator polynomial, coefficient list indexed by power of d/dyhat.
    let mut op = vec![1.0];
    for factor in std::iter::repeat_n(dx, a).chain(std::iter::repeat_n(dy, b)) {
        let mut next = vec![0.0; op.len() + 1];
        for (q, c) in op.iter().enumerate() {
            next[q] += c * factor[0];
            next[q + 1] += c * factor[1];
        }
        op = next;
    }
    op
}

/// Lagrange element of order `k` on the reference triangle with equispaced
/// nodes.
///
/// Node order: the three vertices `(0,0), (1,0), (0,1)`, then `k - 1` nodes on
/// each edge `v0 -> v1`, `v1 -> v2`, `v2 -> v0` in that direction, then the
/// interior nodes.
#[derive(Clone, Debug)]
pub struct ReferenceElement {
    order: usize,
    nodes: Vec<[f64; 2]>,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coeffs: Vec<Vec<f64>>,
    indices: Vec<(usize, usize)>,
}

impl ReferenceElement {
    pub fn new(order: usize) -> Result<Self> {
        if !(1..=4).contains(&order) {
            return Err(Error::Space(format!("Lagrange order must be 1..=4, got {order}")));
        }
        let nodes = lagrange_nodes(order);
        let indices = multi_indices(order);
        let n = nodes.len();
        // Vandermonde V[i][j] = m_j(node_i); basis coefficients are the columns of V^{-1}.
        let v = DMatrix::from_fn(n, n, |i, j| {
            let (a, b) = indices[j];
            nodes[i][0].powi(a as i32) * nodes[i][1].powi(b as i32)
        });
        let inv = v.try_inverse().ok_or_else(|| Error::Space("singular Lagrange Vandermonde matrix".into()))?;
        let coeffs = (0..n).map(|i| (0..n).map(|j| inv[(j, i)]).collect()).collect();
        Ok(Self { order, nodes, coeffs, indices })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    /// Local node indices on local edge `e`, from its first vertex to its second.
    pub fn edge_nodes(&self, e: usize) -> Vec<usize> {
        let k = self.order;
        let mut out = Vec::with_capacity(k + 1);
        out.push(e);
        out.extend((0..k - 1).map(|m| 3 + e * (k - 1) + m));
        out.push((e + 1) % 3);
        out
    }

    fn monomial_derivatives(&self, p: usize, q: usize, x: [f64; 2]) -> Vec<f64> {
        self.indices.iter().map(|&(a, b)| falling_power(x[0], a, p) * falling_power(x[1], b, q)).collect()
    }

    /// Reference derivative `d^(p+q)/dxhat^p dyhat^q` of every basis function.
    /// Valid at any point of the plane; the basis polynomials extend globally.
    pub fn derivatives(&self, p: usize, q: usize, x: [f64; 2]) -> Vec<f64> {
        let m = self.monomial_derivatives(p, q, x);
        self.coeffs.iter().map(|c| c.iter().zip(&m).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn values(&self, x: [f64; 2]) -> Vec<f64> {
        self.derivatives(0, 0, x)
    }

    /// Reference gradients `[d/dxhat, d/dyhat]` of every basis function.
    pub fn gradients(&self, x: [f64; 2]) -> Vec<[f64; 2]> {
        let gx = self.derivatives(1, 0, x);
        let gy = self.derivatives(0, 1, x);
        gx.into_iter().zip(gy).map(|(a, b)| [a, b]).collect()
    }
}

fn lagrange_nodes(k: usize) -> Vec<[f64; 2]> {
    let kf = k as f64;
    let lattice = |i: usize, j: usize| [i as f64 / kf, j as f64 / kf];
    let mut nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    for m in 1..k {
        nodes.push(lattice(m, 0));
    }
    for m in 1..k {
        nodes.push(lattice(k - m, m));
    }
    for m in 1..k {
        nodes.push(lattice(0, k - m));
    }
    for j in 1..k {
        for i in 1..k - j {
            nodes.push(lattice(i, j));
        }
    }
    nodes
}

/// 1D Lagrange basis of order `k` on equispaced nodes `t_i = i / k` of `[0, 1]`.
pub fn edge_basis(k: usize, t: f64) -> Vec<f64> {
    let nodes: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    (0..=k).map(|i| (0..=k).filter(|&j| j != i).map(|j| (t - nodes[j]) / (nodes[i] - nodes[j])).product()).collect()
}

/// `1 / (a! b!)` for Taylor sums.
pub fn inverse_multi_factorial(a: usize, b: usize) -> f64 {
    1.0 / (factorial(a) * factorial(b))
}
