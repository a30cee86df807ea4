//! Discrete Taylor extension of element polynomials from a boundary edge to the
//! exact curve.
//!
//! For a point `xi` on a boundary edge the adjacent element polynomial `v` is
//! extended to `eta(xi)` either by evaluating it there directly or by summing
//! `D^a v(xi) (eta - xi)^a / a!` over multi-indices `|a| <= k`. For polynomials
//! of degree `k` the two coincide; the direct form is used in production.

use crate::fe_space::FeSpace;
use crate::geometry::InterfaceMap;
use crate::polynomial::{inverse_multi_factorial, multi_indices};
use crate::{Error, Point, Result, Vector};

/// Which normal the co-normal derivative uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalChoice {
    /// Outward normal of the exact circle at `eta(xi)`, gradient and
    /// coefficient evaluated at `eta(xi)`.
    Exact,
    /// Outward normal of the polygon edge, everything evaluated at `xi`.
    Discrete,
}

/// Everything computed for one boundary point.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionEvaluation {
    pub edge_id: usize,
    pub xi: Point,
    pub eta: Point,
    pub offset: Vector,
    pub value: f64,
    /// Extended co-normal derivative with the exact normal.
    pub flux: f64,
}

fn element_of(space: &FeSpace, edge_id: usize) -> Result<usize> {
    space
        .mesh()
        .boundary_edges()
        .get(edge_id)
        .map(|e| e.triangle)
        .ok_or_else(|| Error::Extension(format!("{edge_id} is not a boundary edge")))
}

fn mapped_point(map: &InterfaceMap, edge_id: usize, xi: &Point) -> Result<Point> {
    map.eta(edge_id, xi).map_err(|e| Error::Extension(e.to_string()))
}

/// `T^k v` at `eta(xi)` by direct evaluation of the element polynomial.
pub fn taylor_value(space: &FeSpace, map: &InterfaceMap, edge_id: usize, dofs: &[f64], xi: &Point) -> Result<f64> {
    let element = element_of(space, edge_id)?;
    let eta = mapped_point(map, edge_id, xi)?;
    Ok(space.value_and_gradient(element, dofs, &eta).0)
}

/// `T^{k', k} v` at `eta(xi)`: the derivative sum over `k_start <= |a| <= k`.
pub fn taylor_value_truncated(
    space: &FeSpace,
    map: &InterfaceMap,
    edge_id: usize,
    dofs: &[f64],
    xi: &Point,
    k_start: usize,
) -> Result<f64> {
    let k = space.order();
    if k_start > k {
        return Err(Error::Extension(format!("truncation start {k_start} exceeds order {k}")));
    }
    let element = element_of(space, edge_id)?;
    let eta = mapped_point(map, edge_id, xi)?;
    let d = eta - xi;
    let derivs = space.eval_extended(element, dofs, xi, k)?;
    Ok(multi_indices(k)
        .into_iter()
        .zip(derivs)
        .filter(|((a, b), _)| a + b >= k_start)
        .map(|((a, b), dv)| dv * inverse_multi_factorial(a, b) * d.x.powi(a as i32) * d.y.powi(b as i32))
        .sum())
}

/// `T^k v` at `eta(xi)` as the full derivative sum.
pub fn taylor_value_sum(space: &FeSpace, map: &InterfaceMap, edge_id: usize, dofs: &[f64], xi: &Point) -> Result<f64> {
    taylor_value_truncated(space, map, edge_id, dofs, xi, 0)
}

/// Extended co-normal derivative `p(eta) T^{k-1}(grad v)(eta) . n` or its
/// polygon counterpart `p(xi) grad v(xi) . n_h`.
pub fn extended_conormal(
    space: &FeSpace,
    map: &InterfaceMap,
    edge_id: usize,
    dofs: &[f64],
    xi: &Point,
    coefficient: &dyn Fn(&Point) -> f64,
    normal: NormalChoice,
) -> Result<f64> {
    let element = element_of(space, edge_id)?;
    let eta = mapped_point(map, edge_id, xi)?;
    let mesh = space.mesh();
    let (at, n) = match normal {
        NormalChoice::Exact => (eta, map.exact_normal(mesh, edge_id, &eta)),
        NormalChoice::Discrete => (*xi, map.polygon_normal(mesh, edge_id)),
    };
    // grad v is a polynomial of degree k - 1, so its Taylor extension of that
    // order is the gradient of the extended polynomial.
    let (_, g) = space.value_and_gradient(element, dofs, &at);
    Ok(coefficient(&at) * (g[0] * n.x + g[1] * n.y))
}

/// Value and exact-normal flux at one boundary point.
pub fn evaluate(
    space: &FeSpace,
    map: &InterfaceMap,
    edge_id: usize,
    dofs: &[f64],
    xi: &Point,
    coefficient: &dyn Fn(&Point) -> f64,
) -> Result<ExtensionEvaluation> {
    let eta = mapped_point(map, edge_id, xi)?;
    Ok(ExtensionEvaluation {
        edge_id,
        xi: *xi,
        eta,
        offset: eta - xi,
        value: taylor_value(space, map, edge_id, dofs, xi)?,
        flux: extended_conormal(space, map, edge_id, dofs, xi, coefficient, NormalChoice::Exact)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_annulus_mesh, build_disk_mesh, BoundaryTag};
    use crate::quadrature::edge_gauss;
    use crate::Side;
    use approx::assert_relative_eq;

    fn setup(n: usize, k: usize) -> (FeSpace, InterfaceMap) {
        let mesh = build_disk_mesh(0.25, n).unwrap();
        let map = InterfaceMap::new(Side::One, &mesh, BoundaryTag::Interface).unwrap();
        (FeSpace::new(mesh, k).unwrap(), map)
    }

    fn gauss_points(space: &FeSpace, map: &InterfaceMap) -> Vec<(usize, Point)> {
        let rule = edge_gauss(space.order() + 2).unwrap();
        map.edges_in_angular_order()
            .flat_map(|e| {
                let [a, b] = space.mesh().edge_points(e);
                rule.unit_interval().map(move |(t, _)| (e, a + (b - a) * t)).collect::<Vec<_>>()
            })
            .collect()
    }

    #[test]
    fn linear_reproduction() {
        let (space, map) = setup(8, 1);
        let dofs = space.interpolate(|p| 2.0 * p.x + p.y - 3.0);
        for (e, xi) in gauss_points(&space, &map) {
            let eta = map.eta(e, &xi).unwrap();
            let v = taylor_value(&space, &map, e, &dofs, &xi).unwrap();
            assert_relative_eq!(v, 2.0 * eta.x + eta.y - 3.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn direct_and_sum_forms_agree() {
        for k in 1..=4 {
            let (space, map) = setup(16, k);
            let dofs = space.interpolate(|p| (-5.0 * p.coords.norm_squared()).exp());
            for (e, xi) in gauss_points(&space, &map) {
                let a = taylor_value(&space, &map, e, &dofs, &xi).unwrap();
                let b = taylor_value_sum(&space, &map, e, &dofs, &xi).unwrap();
                assert!((a - b).abs() < 1e-12, "k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn truncation_behaviour() {
        let (space, map) = setup(8, 2);
        let constant = space.interpolate(|_| 4.0);
        let dofs = space.interpolate(|p| p.x * p.x - p.x * p.y + 0.5);
        for (e, xi) in gauss_points(&space, &map).into_iter().take(10) {
            assert!(taylor_value_truncated(&space, &map, e, &constant, &xi, 1).unwrap().abs() < 1e-12);
            let full = taylor_value_sum(&space, &map, e, &dofs, &xi).unwrap();
            let tail = taylor_value_truncated(&space, &map, e, &dofs, &xi, 1).unwrap();
            assert_relative_eq!(full - tail, xi.x * xi.x - xi.x * xi.y + 0.5, epsilon = 1e-13);
            assert!(taylor_value_truncated(&space, &map, e, &dofs, &xi, 3).is_err());
        }
    }

    #[test]
    fn conormal_of_x_is_normal_component() {
        let (space, map) = setup(8, 1);
        let dofs = space.interpolate(|p| p.x);
        let one = |_: &Point| 1.0;
        let edge = map.owning_edge(&Point::new(0.25, 1e-3));
        let [a, b] = space.mesh().edge_points(edge);
        let xi = a + (b - a) * 0.4;
        let eta = map.eta(edge, &xi).unwrap();
        let f = extended_conormal(&space, &map, edge, &dofs, &xi, &one, NormalChoice::Exact).unwrap();
        assert_relative_eq!(f, eta.x / 0.25, epsilon = 1e-13);
        let fh = extended_conormal(&space, &map, edge, &dofs, &xi, &one, NormalChoice::Discrete).unwrap();
        assert_relative_eq!(fh, map.polygon_normal(space.mesh(), edge).x, epsilon = 1e-13);
    }

    #[test]
    fn normals_point_out_of_each_subdomain() {
        let disk = build_disk_mesh(0.25, 8).unwrap();
        let ann = build_annulus_mesh(0.25, 0.5, 8).unwrap();
        let p = Point::new(0.25, 0.0);
        let m1 = InterfaceMap::new(Side::One, &disk, BoundaryTag::Interface).unwrap();
        let m2 = InterfaceMap::new(Side::Two, &ann, BoundaryTag::Interface).unwrap();
        let n1 = m1.exact_normal(&disk, m1.owning_edge(&p), &p);
        let n2 = m2.exact_normal(&ann, m2.owning_edge(&p), &p);
        assert_relative_eq!(n1.x, 1.0);
        assert_relative_eq!(n2.x, -1.0);
    }

    #[test]
    fn offsets_are_bounded_by_sagitta() {
        let (space, map) = setup(16, 2);
        let dofs = space.interpolate(|p| p.x);
        let sagitta = space.mesh().max_sagitta(BoundaryTag::Interface);
        for (e, xi) in gauss_points(&space, &map) {
            let ev = evaluate(&space, &map, e, &dofs, &xi, &|_| 1.0).unwrap();
            assert!(ev.offset.norm() <= sagitta + 1e-15);
            assert!((ev.eta.coords.norm() - 0.25).abs() < 1e-14);
        }
    }
}
