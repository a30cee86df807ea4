//! Exact circles and the maps between a polygonal boundary and its curve.
//!
//! `eta` sends a point of a boundary edge radially onto the circle, `zeta` is
//! its inverse, and [`InterfacePair`] composes them to move points between the
//! two (generally different) polygonal interfaces of the subdomains.

use std::f64::consts::TAU;

use crate::mesh::{BoundaryTag, Mesh2D};
use crate::quadrature::gauss_legendre;
use crate::{Error, Point, Result, Side, Vector};

/// Tolerance used to decide that a point lies on a polygon edge.
pub const ON_EDGE_TOL: f64 = 1e-12;

/// Tolerance used to decide that a point lies on the circle.
pub const ON_CURVE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Geometry(format!("circle radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn radial_deviation(&self, p: &Point) -> f64 {
        ((p - self.center).norm() - self.radius).abs()
    }

    /// Radial projection; the center itself is left unchanged.
    pub fn project(&self, p: &Point) -> Point {
        let d = p - self.center;
        let n = d.norm();
        if n == 0.0 {
            return *p;
        }
        self.center + d * (self.radius / n)
    }

    /// Polar angle of `p` about the center, in `[0, 2pi)`.
    pub fn angle(&self, p: &Point) -> f64 {
        let d = p - self.center;
        wrap_angle(d.y.atan2(d.x))
    }

    pub fn point_at(&self, theta: f64) -> Point {
        self.center + Vector::new(theta.cos(), theta.sin()) * self.radius
    }

    /// Unit vector pointing away from the center.
    pub fn radial_normal(&self, p: &Point) -> Vector {
        (p - self.center).normalize()
    }
}

/// Maps any angle into `[0, 2pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// One polygon edge seen from the circle: `start -> end` runs counterclockwise
/// about the center, whatever the mesh orientation of the edge.
#[derive(Clone, Debug)]
struct MappedEdge {
    boundary_edge: usize,
    start: Point,
    end: Point,
    theta_start: f64,
    /// Distance from the center to the supporting line of the chord.
    distance: f64,
}

impl MappedEdge {
    /// Parameter in `[0, 1]` along `start -> end`, or `None` if `p` is off the edge.
    fn parameter(&self, p: &Point) -> Option<f64> {
        let d = self.end - self.start;
        let len2 = d.norm_squared();
        let t = (p - self.start).dot(&d) / len2;
        let off = ((p - self.start) - d * t).norm();
        let len = len2.sqrt();
        if off <= ON_EDGE_TOL * len.max(1.0) && (-ON_EDGE_TOL..=1.0 + ON_EDGE_TOL).contains(&t) {
            Some(t.clamp(0.0, 1.0))
        } else {
            None
        }
    }

    /// Intersection of the ray from `center` in direction `dir` with the chord.
    fn ray_hit(&self, center: &Point, dir: &Vector) -> Point {
        let a = self.start - center;
        let ab = self.end - self.start;
        let cross = |u: &Vector, v: &Vector| u.x * v.y - u.y * v.x;
        let t = (-cross(&a, dir) / cross(&ab, dir)).clamp(0.0, 1.0);
        self.start + ab * t
    }
}

/// Piecewise radial maps between the tagged boundary polygon of one subdomain
/// mesh and its exact circle.
///
/// Edge `j` owns the half-open angular interval `[theta_j, theta_{j+1})`, so
/// every point of the circle belongs to exactly one edge.
#[derive(Clone, Debug)]
pub struct InterfaceMap {
    side: Side,
    tag: BoundaryTag,
    circle: Circle,
    edges: Vec<MappedEdge>,
    /// Boundary-edge index of the mesh -> position in `edges`.
    slot: Vec<Option<usize>>,
}

impl InterfaceMap {
    pub fn new(side: Side, mesh: &Mesh2D, tag: BoundaryTag) -> Result<Self> {
        let circle = *mesh
            .circle(tag)
            .ok_or_else(|| Error::Geometry(format!("mesh has no circle for the {} boundary", tag.as_str())))?;
        let mut edges: Vec<MappedEdge> = mesh
            .boundary_edges_with(tag)
            .map(|(i, _)| {
                let [a, b] = mesh.edge_points(i);
                let cross = (a - circle.center).perp(&(b - circle.center));
                let (start, end) = if cross > 0.0 { (a, b) } else { (b, a) };
                let ab = end - start;
                let distance = (start - circle.center).perp(&ab).abs() / ab.norm();
                MappedEdge { boundary_edge: i, start, end, theta_start: circle.angle(&start), distance }
            })
            .collect();
        if edges.is_empty() {
            return Err(Error::Geometry(format!("no {} edges in mesh", tag.as_str())));
        }
        edges.sort_by(|x, y| x.theta_start.total_cmp(&y.theta_start));
        for w in 0..edges.len() {
            let next = &edges[(w + 1) % edges.len()];
            if (next.start - edges[w].end).norm() > ON_EDGE_TOL {
                return Err(Error::Geometry("boundary polygon is not a single closed loop".into()));
            }
        }
        let mut slot = vec![None; mesh.boundary_edges().len()];
        for (k, e) in edges.iter().enumerate() {
            slot[e.boundary_edge] = Some(k);
        }
        Ok(Self { side, tag, circle, edges, slot })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn tag(&self) -> BoundaryTag {
        self.tag
    }

    pub fn circle(&self) -> &Circle {
        &self.circle
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Mesh boundary-edge indices in counterclockwise angular order.
    pub fn edges_in_angular_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().map(|e| e.boundary_edge)
    }

    /// Angular interval `[start, end)` owned by `edge_id`; `end` may exceed 2pi
    /// for the edge that wraps through angle 0.
    pub fn angular_interval(&self, edge_id: usize) -> Result<(f64, f64)> {
        let k = self.slot_of(edge_id)?;
        let start = self.edges[k].theta_start;
        let next = self.edges[(k + 1) % self.edges.len()].theta_start;
        let end = if next <= start { next + TAU } else { next };
        Ok((start, end))
    }

    fn slot_of(&self, edge_id: usize) -> Result<usize> {
        self.slot
            .get(edge_id)
            .copied()
            .flatten()
            .ok_or_else(|| Error::Geometry(format!("boundary edge {edge_id} is not a {} edge", self.tag.as_str())))
    }

    /// Counterclockwise endpoints of an edge.
    pub fn edge_endpoints(&self, edge_id: usize) -> Result<[Point; 2]> {
        let e = &self.edges[self.slot_of(edge_id)?];
        Ok([e.start, e.end])
    }

    /// Parameter of `xi` along the counterclockwise edge, in `[0, 1]`.
    pub fn edge_parameter(&self, edge_id: usize, xi: &Point) -> Result<f64> {
        let e = &self.edges[self.slot_of(edge_id)?];
        e.parameter(xi).ok_or_else(|| Error::Geometry(format!("point {xi:?} is not on edge {edge_id}")))
    }

    /// The `eta` map: radial projection of an edge point onto the circle.
    pub fn eta(&self, edge_id: usize, xi: &Point) -> Result<Point> {
        self.edge_parameter(edge_id, xi)?;
        let d = xi - self.circle.center;
        let n = d.norm();
        if n == 0.0 {
            return Err(Error::Geometry("radial projection of the circle center".into()));
        }
        Ok(self.circle.center + d * (self.circle.radius / n))
    }

    /// Edge whose angular interval contains the polar angle of `p`.
    pub fn owning_edge(&self, p: &Point) -> usize {
        self.edges[self.owning_slot(self.circle.angle(p))].boundary_edge
    }

    fn owning_slot(&self, theta: f64) -> usize {
        // Largest start angle <= theta; angles below the first start wrap to the last edge.
        let k = self.edges.partition_point(|e| e.theta_start <= theta);
        if k == 0 {
            self.edges.len() - 1
        } else {
            k - 1
        }
    }

    /// The `zeta` map: the edge owning the angle of `p` and the point where the
    /// ray from the center through `p` crosses it.
    pub fn zeta(&self, p: &Point) -> Result<(usize, Point)> {
        if self.circle.radial_deviation(p) > ON_CURVE_TOL {
            return Err(Error::Geometry(format!("point {p:?} is not on the circle")));
        }
        Ok(self.zeta_unchecked(p))
    }

    fn zeta_unchecked(&self, p: &Point) -> (usize, Point) {
        let e = &self.edges[self.owning_slot(self.circle.angle(p))];
        (e.boundary_edge, e.ray_hit(&self.circle.center, &(p - self.circle.center)))
    }

    /// Locates the edge containing a polygon point.
    pub fn locate(&self, xi: &Point) -> Result<usize> {
        let edge = self.owning_edge(xi);
        self.edge_parameter(edge, xi)?;
        Ok(edge)
    }

    /// Arc-length speed `ds/dtheta = |xi - c|^2 / d` of the polygon parameterised by angle.
    fn speed(&self, edge_slot: usize, xi: &Point) -> f64 {
        (xi - self.circle.center).norm_squared() / self.edges[edge_slot].distance
    }

    /// Outward unit normal of the polygon edge relative to the subdomain.
    pub fn polygon_normal(&self, mesh: &Mesh2D, edge_id: usize) -> Vector {
        let [a, b] = mesh.edge_points(edge_id);
        let t = b - a;
        Vector::new(t.y, -t.x).normalize()
    }

    /// Exact outward unit normal at a circle point, oriented like `polygon_normal`.
    pub fn exact_normal(&self, mesh: &Mesh2D, edge_id: usize, eta: &Point) -> Vector {
        let radial = self.circle.radial_normal(eta);
        if radial.dot(&self.polygon_normal(mesh, edge_id)) >= 0.0 {
            radial
        } else {
            -radial
        }
    }
}

/// The interface maps of both subdomains, which share one circle.
#[derive(Clone, Debug)]
pub struct InterfacePair {
    maps: [InterfaceMap; 2],
}

impl InterfacePair {
    pub fn new(first: InterfaceMap, second: InterfaceMap) -> Result<Self> {
        let (c1, c2) = (first.circle(), second.circle());
        if (c1.center - c2.center).norm() > ON_EDGE_TOL || (c1.radius - c2.radius).abs() > ON_EDGE_TOL {
            return Err(Error::Geometry("interface maps do not share a circle".into()));
        }
        Ok(Self { maps: [first, second] })
    }

    pub fn map(&self, side: Side) -> &InterfaceMap {
        &self.maps[side.index()]
    }

    /// `zeta_to(eta_from(xi))`: the point of the `to` polygon seen through the
    /// circle from `xi` on the `from` polygon.
    pub fn cross_map(&self, from: Side, to: Side, xi: &Point) -> Result<(usize, Point)> {
        let source = self.map(from);
        let edge = source.locate(xi)?;
        let eta = source.eta(edge, xi)?;
        Ok(self.map(to).zeta_unchecked(&eta))
    }

    /// Derivative of target arc length with respect to source arc length along
    /// the cross map, from the chain rule through the polar angle.
    pub fn cross_jacobian(&self, from: Side, to: Side, xi: &Point) -> Result<f64> {
        let source = self.map(from);
        let edge = source.locate(xi)?;
        let slot = source.slot_of(edge)?;
        let t = source.edge_parameter(edge, xi)?;
        let len = (source.edges[slot].end - source.edges[slot].start).norm();
        if t * len <= ON_EDGE_TOL || (1.0 - t) * len <= ON_EDGE_TOL {
            return Err(Error::Geometry("cross-map Jacobian is undefined at polygon vertices".into()));
        }
        let target = self.map(to);
        let eta = source.eta(edge, xi)?;
        let theta = target.circle.angle(&eta);
        let target_slot = target.owning_slot(theta);
        let (_, image) = target.zeta_unchecked(&eta);
        Ok(target.speed(target_slot, &image) / source.speed(slot, xi))
    }
}

/// Diagnostics printed by `check-geometry`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GeometryReport {
    /// Largest `|eta(xi) - xi|` on each side.
    pub max_offset: [f64; 2],
    /// Largest `|zeta(eta(xi)) - xi|` on each side.
    pub max_round_trip: [f64; 2],
    /// Largest `|cross(2, 1, cross(1, 2, xi)) - xi|` over side-1 sample points.
    pub max_cross_round_trip: f64,
    /// `max |J_{1->2} - 1|` over side-1 sample points.
    pub max_jacobian_defect: f64,
}

/// Samples `npoints` Gauss points on every interface edge of both sides.
pub fn geometry_report(pair: &InterfacePair, npoints: usize) -> Result<GeometryReport> {
    let (nodes, _) = gauss_legendre(npoints);
    let mut report = GeometryReport::default();
    for side in Side::BOTH {
        let map = pair.map(side);
        for edge in map.edges_in_angular_order() {
            let [a, b] = map.edge_endpoints(edge)?;
            for &s in &nodes {
                let xi = a + (b - a) * (0.5 * (s + 1.0));
                let eta = map.eta(edge, &xi)?;
                let i = side.index();
                report.max_offset[i] = report.max_offset[i].max((eta - xi).norm());
                let (_, back) = map.zeta(&eta)?;
                report.max_round_trip[i] = report.max_round_trip[i].max((back - xi).norm());
                if side == Side::One {
                    let (_, there) = pair.cross_map(Side::One, Side::Two, &xi)?;
                    let (_, again) = pair.cross_map(Side::Two, Side::One, &there)?;
                    report.max_cross_round_trip = report.max_cross_round_trip.max((again - xi).norm());
                    let j = pair.cross_jacobian(Side::One, Side::Two, &xi)?;
                    report.max_jacobian_defect = report.max_jacobian_defect.max((j - 1.0).abs());
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_annulus_mesh, build_disk_mesh};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn disk_map(n: usize) -> (Mesh2D, InterfaceMap) {
        let mesh = build_disk_mesh(0.25, n).unwrap();
        let map = InterfaceMap::new(Side::One, &mesh, BoundaryTag::Interface).unwrap();
        (mesh, map)
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_relative_eq!(wrap_angle(-PI / 2.0), 1.5 * PI);
        assert_relative_eq!(wrap_angle(5.0 * PI), PI, epsilon = 1e-14);
        assert!(wrap_angle(-1e-300) < TAU);
    }

    #[test]
    fn vertices_are_fixed_points() {
        let (mesh, map) = disk_map(8);
        let edge = map.owning_edge(&Point::new(0.25, 0.0));
        let eta = map.eta(edge, &Point::new(0.25, 0.0)).unwrap();
        assert_relative_eq!(eta.x, 0.25, epsilon = 1e-16);
        assert_relative_eq!(eta.y, 0.0, epsilon = 1e-16);
        // The vertex at angle 0 starts the interval of the edge running towards angle pi/4.
        let [start, end] = map.edge_endpoints(edge).unwrap();
        assert_eq!(start, Point::new(0.25, 0.0));
        assert!(end.y > 0.0);
        let (owner, p) = map.zeta(&Point::new(0.25, 0.0)).unwrap();
        assert_eq!(owner, edge);
        assert_eq!(p, Point::new(0.25, 0.0));
        assert_eq!(map.edge_count(), mesh.edge_count(BoundaryTag::Interface));
    }

    #[test]
    fn square_chord_midpoint() {
        // A 4-gon has the chord (0.25, 0) -- (0, 0.25).
        let (_, map) = disk_map(4);
        let xi = Point::new(0.125, 0.125);
        let edge = map.locate(&xi).unwrap();
        let eta = map.eta(edge, &xi).unwrap();
        let expect = 0.25 / 2f64.sqrt();
        assert_relative_eq!(eta.x, expect, epsilon = 1e-15);
        assert_relative_eq!(eta.y, expect, epsilon = 1e-15);
        assert_relative_eq!(expect, 0.176776695, epsilon = 1e-9);
    }

    #[test]
    fn zeta_between_vertices_hits_midpoint() {
        let (_, map) = disk_map(8);
        let p = Point::new(0.25 * (PI / 8.0).cos(), 0.25 * (PI / 8.0).sin());
        let (edge, xi) = map.zeta(&p).unwrap();
        let [a, b] = map.edge_endpoints(edge).unwrap();
        let mid = Point::from((a.coords + b.coords) * 0.5);
        assert_relative_eq!((xi - mid).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn offset_maximised_at_midpoint_equals_sagitta() {
        let (_, map) = disk_map(16);
        let sagitta = 0.25 * (1.0 - (PI / 16.0).cos());
        let edge = map.edges_in_angular_order().next().unwrap();
        let [a, b] = map.edge_endpoints(edge).unwrap();
        let mut best = (0.0, 0.0);
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            let xi = a + (b - a) * t;
            let d = (map.eta(edge, &xi).unwrap() - xi).norm();
            if d > best.0 {
                best = (d, t);
            }
        }
        assert_relative_eq!(best.1, 0.5, epsilon = 1e-12);
        assert_relative_eq!(best.0, sagitta, epsilon = 1e-15);
    }

    #[test]
    fn eta_rejects_off_edge_points() {
        let (_, map) = disk_map(8);
        let edge = map.owning_edge(&Point::new(0.25, 0.0));
        assert!(map.eta(edge, &Point::new(0.0, 0.0)).is_err());
        assert!(map.eta(edge, &Point::new(0.2, 0.01)).is_err());
        assert!(map.zeta(&Point::new(0.3, 0.0)).is_err());
    }

    #[test]
    fn partition_of_circle() {
        let (_, map) = disk_map(16);
        let mut total = 0.0;
        for e in map.edges_in_angular_order() {
            let (a, b) = map.angular_interval(e).unwrap();
            assert!(b > a);
            total += b - a;
        }
        assert_relative_eq!(total, TAU, epsilon = 1e-12);
    }

    #[test]
    fn annulus_edges_are_reoriented() {
        // Inner annulus edges run clockwise in the mesh but counterclockwise here.
        let mesh = build_annulus_mesh(0.25, 0.5, 8).unwrap();
        let map = InterfaceMap::new(Side::Two, &mesh, BoundaryTag::Interface).unwrap();
        for e in map.edges_in_angular_order() {
            let [a, b] = map.edge_endpoints(e).unwrap();
            assert!(a.coords.perp(&b.coords) > 0.0);
            // polygon normal points towards the center (out of the annulus)
            let n = map.polygon_normal(&mesh, e);
            assert!(n.dot(&(a.coords + b.coords)) < 0.0);
            let eta = map.eta(e, &Point::from((a.coords + b.coords) * 0.5)).unwrap();
            let exact = map.exact_normal(&mesh, e, &eta);
            assert_relative_eq!(exact.dot(&eta.coords), -0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn identical_polygons_give_identity_cross_map() {
        let disk = build_disk_mesh(0.25, 16).unwrap();
        let ann = build_annulus_mesh(0.25, 0.5, 16).unwrap();
        let pair = InterfacePair::new(
            InterfaceMap::new(Side::One, &disk, BoundaryTag::Interface).unwrap(),
            InterfaceMap::new(Side::Two, &ann, BoundaryTag::Interface).unwrap(),
        )
        .unwrap();
        let report = geometry_report(&pair, 5).unwrap();
        assert!(report.max_jacobian_defect <= 1e-12);
        assert!(report.max_cross_round_trip <= 1e-12);
        let edge = pair.map(Side::One).owning_edge(&Point::new(0.25, 0.01));
        let [a, b] = pair.map(Side::One).edge_endpoints(edge).unwrap();
        let xi = a + (b - a) * 0.3;
        let (_, image) = pair.cross_map(Side::One, Side::Two, &xi).unwrap();
        assert!((image - xi).norm() <= 1e-12);
        assert_eq!(pair.cross_jacobian(Side::One, Side::Two, &xi).unwrap(), 1.0);
    }

    #[test]
    fn jacobian_rejects_vertices() {
        let disk = build_disk_mesh(0.25, 8).unwrap();
        let ann = build_annulus_mesh(0.25, 0.5, 16).unwrap();
        let pair = InterfacePair::new(
            InterfaceMap::new(Side::One, &disk, BoundaryTag::Interface).unwrap(),
            InterfaceMap::new(Side::Two, &ann, BoundaryTag::Interface).unwrap(),
        )
        .unwrap();
        assert!(pair.cross_jacobian(Side::One, Side::Two, &Point::new(0.25, 0.0)).is_err());
        // An 8-gon vertex lands on the coincident 16-gon vertex.
        let v = Point::new(0.0, 0.25);
        let (_, image) = pair.cross_map(Side::One, Side::Two, &v).unwrap();
        assert!((image - v).norm() <= 1e-15);
    }
}
