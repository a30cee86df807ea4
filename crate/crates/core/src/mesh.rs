//! Structured triangulations of the disk and the annulus.
//!
//! Boundary polygons are inscribed in their circles: every boundary vertex lies
//! on the exact curve, both at construction and after refinement, where new
//! boundary midpoints are projected radially back onto the circle.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::geometry::Circle;
use crate::{Error, Point, Result};

/// Tolerance on the distance of boundary vertices from their circle.
pub const ON_CIRCLE_TOL: f64 = 1e-12;

/// Smallest interior angle accepted by the mesh builders, in degrees.
pub const MIN_ANGLE_DEG: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Interface,
    Outer,
}

impl BoundaryTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::Interface => "interface",
            BoundaryTag::Outer => "outer",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "interface" => Ok(BoundaryTag::Interface),
            "outer" => Ok(BoundaryTag::Outer),
            other => Err(Error::Parse(format!("unknown boundary tag `{other}`"))),
        }
    }
}

/// A boundary edge `vertices[0] -> vertices[1]`, oriented with the domain on
/// its left, together with the triangle it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub triangle: usize,
    /// Local edge index in `triangle`: edge `e` joins local vertices `e` and `(e + 1) % 3`.
    pub local_edge: usize,
    pub tag: BoundaryTag,
}

#[derive(Clone, Debug)]
pub struct Mesh2D {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    circles: Vec<(BoundaryTag, Circle)>,
    h: f64,
}

impl Mesh2D {
    /// Builds a mesh from raw vertices and counterclockwise triangles.
    ///
    /// Boundary edges are detected by edge counting and tagged with the circle
    /// through both endpoints. With no circles every boundary edge is `Outer`.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, circles: Vec<(BoundaryTag, Circle)>) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::MeshInvariant(format!("triangle {t} references a missing vertex")));
            }
            let area = signed_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
            if area <= 0.0 {
                return Err(Error::MeshInvariant(format!("triangle {t} has non-positive area {area:e}")));
            }
        }

        // Directed edge -> (triangle, local edge).
        let mut directed: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                let key = (tri[e], tri[(e + 1) % 3]);
                if directed.insert(key, (t, e)).is_some() {
                    return Err(Error::MeshInvariant(format!(
                        "directed edge {key:?} appears twice (inconsistent orientation)"
                    )));
                }
            }
        }

        let mut boundary_edges = Vec::new();
        for (t, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                if directed.contains_key(&(b, a)) {
                    continue;
                }
                let tag = if circles.is_empty() {
                    BoundaryTag::Outer
                } else {
                    circles
                        .iter()
                        .find(|(_, c)| {
                            c.radial_deviation(&vertices[a]) <= ON_CIRCLE_TOL
                                && c.radial_deviation(&vertices[b]) <= ON_CIRCLE_TOL
                        })
                        .map(|(tag, _)| *tag)
                        .ok_or_else(|| {
                            Error::MeshInvariant(format!("boundary edge ({a}, {b}) lies on no boundary circle"))
                        })?
                };
                boundary_edges.push(BoundaryEdge { vertices: [a, b], triangle: t, local_edge: e, tag });
            }
        }

        // Closed loops: every boundary vertex has one incoming and one outgoing edge.
        let mut degree: HashMap<usize, (usize, usize)> = HashMap::new();
        for edge in &boundary_edges {
            degree.entry(edge.vertices[0]).or_default().0 += 1;
            degree.entry(edge.vertices[1]).or_default().1 += 1;
        }
        if let Some((v, d)) = degree.iter().find(|(_, d)| **d != (1, 1)) {
            return Err(Error::MeshInvariant(format!(
                "boundary vertex {v} has (out, in) degree {d:?}; boundary is not a set of closed loops"
            )));
        }

        let h = triangles
            .iter()
            .map(|tri| triangle_diameter(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]))
            .fold(0.0, f64::max);

        Ok(Self { vertices, triangles, boundary_edges, circles, h })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn circles(&self) -> &[(BoundaryTag, Circle)] {
        &self.circles
    }

    pub fn circle(&self, tag: BoundaryTag) -> Option<&Circle> {
        self.circles.iter().find(|(t, _)| *t == tag).map(|(_, c)| c)
    }

    /// Maximum triangle diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn boundary_edges_with(&self, tag: BoundaryTag) -> impl Iterator<Item = (usize, &BoundaryEdge)> {
        self.boundary_edges.iter().enumerate().filter(move |(_, e)| e.tag == tag)
    }

    pub fn edge_count(&self, tag: BoundaryTag) -> usize {
        self.boundary_edges_with(tag).count()
    }

    pub fn edge_points(&self, edge: usize) -> [Point; 2] {
        let e = &self.boundary_edges[edge];
        [self.vertices[e.vertices[0]], self.vertices[e.vertices[1]]]
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        let [a, b] = self.edge_points(edge);
        (b - a).norm()
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|tri| signed_area(&self.vertices[tri[0]], &self.vertices[tri[1]], &self.vertices[tri[2]]))
            .sum()
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        self.triangles
            .iter()
            .map(|tri| {
                let p = [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]];
                (0..3)
                    .map(|i| {
                        let u = p[(i + 1) % 3] - p[i];
                        let w = p[(i + 2) % 3] - p[i];
                        (u.dot(&w) / (u.norm() * w.norm())).clamp(-1.0, 1.0).acos().to_degrees()
                    })
                    .fold(180.0, f64::min)
            })
            .fold(180.0, f64::min)
    }

    /// Largest distance of a boundary vertex of `tag` from its circle.
    pub fn max_boundary_deviation(&self, tag: BoundaryTag) -> f64 {
        let Some(circle) = self.circle(tag) else { return 0.0 };
        self.boundary_edges_with(tag)
            .flat_map(|(_, e)| e.vertices)
            .map(|v| circle.radial_deviation(&self.vertices[v]))
            .fold(0.0, f64::max)
    }

    /// Largest chord-to-arc distance over the edges of `tag` (the sagitta of the
    /// polygon), measured at edge midpoints.
    pub fn max_sagitta(&self, tag: BoundaryTag) -> f64 {
        let Some(circle) = self.circle(tag) else { return 0.0 };
        self.boundary_edges_with(tag)
            .map(|(i, _)| {
                let [a, b] = self.edge_points(i);
                circle.radial_deviation(&Point::from((a.coords + b.coords) * 0.5))
            })
            .fold(0.0, f64::max)
    }

    fn check_quality(self) -> Result<Self> {
        let angle = self.min_angle_deg();
        if angle < MIN_ANGLE_DEG {
            return Err(Error::MeshInvariant(format!("minimum angle {angle:.2} deg is below {MIN_ANGLE_DEG} deg")));
        }
        Ok(self)
    }

    /// Writes the plain-text dump: `vertices`, `triangles` and `boundary_edges`
    /// sections, each headed by its entry count.
    pub fn to_dump_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(out, "{:e} {:e}", v.x, v.y);
        }
        let _ = writeln!(out, "triangles {}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(out, "boundary_edges {}", self.boundary_edges.len());
        for e in &self.boundary_edges {
            let _ = writeln!(out, "{} {} {}", e.vertices[0], e.vertices[1], e.tag.as_str());
        }
        out
    }

    pub fn write_dump(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_dump_string())?;
        Ok(())
    }
}

/// Raw contents of a mesh dump.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshDump {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<(usize, usize, BoundaryTag)>,
}

impl MeshDump {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut section = |name: &str| -> Result<Vec<Vec<String>>> {
            let header = lines.next().ok_or_else(|| Error::Parse(format!("missing `{name}` section")))?;
            let mut parts = header.split_whitespace();
            if parts.next() != Some(name) {
                return Err(Error::Parse(format!("expected `{name}` header, found `{header}`")));
            }
            let count: usize = parts
                .next()
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad count in `{header}`")))?;
            (0..count)
                .map(|_| {
                    lines
                        .next()
                        .map(|l| l.split_whitespace().map(str::to_owned).collect())
                        .ok_or_else(|| Error::Parse(format!("truncated `{name}` section")))
                })
                .collect()
        };
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
        let idx = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(e.to_string()));

        let vertices =
            section("vertices")?.iter().map(|r| Ok([num(field(r, 0)?)?, num(field(r, 1)?)?])).collect::<Result<_>>()?;
        let triangles = section("triangles")?
            .iter()
            .map(|r| Ok([idx(field(r, 0)?)?, idx(field(r, 1)?)?, idx(field(r, 2)?)?]))
            .collect::<Result<_>>()?;
        let boundary_edges = section("boundary_edges")?
            .iter()
            .map(|r| Ok((idx(field(r, 0)?)?, idx(field(r, 1)?)?, BoundaryTag::parse(field(r, 2)?)?)))
            .collect::<Result<_>>()?;
        Ok(Self { vertices, triangles, boundary_edges })
    }
}

fn field(row: &[String], i: usize) -> Result<&str> {
    row.get(i).map(String::as_str).ok_or_else(|| Error::Parse(format!("missing column {i}")))
}

/// Ordered refinement levels of one subdomain mesh.
#[derive(Clone, Debug)]
pub struct MeshFamily {
    meshes: Vec<Mesh2D>,
}

impl MeshFamily {
    /// `base` followed by `levels - 1` uniform refinements.
    pub fn new(base: Mesh2D, levels: usize) -> Self {
        let mut meshes = Vec::with_capacity(levels);
        meshes.push(base);
        for _ in 1..levels {
            let next = refine(meshes.last().expect("non-empty"));
            meshes.push(next);
        }
        Self { meshes }
    }

    pub fn levels(&self) -> usize {
        self.meshes.len()
    }

    pub fn mesh(&self, level: usize) -> &Mesh2D {
        &self.meshes[level]
    }

    pub fn meshes(&self) -> &[Mesh2D] {
        &self.meshes
    }

    pub fn h(&self) -> Vec<f64> {
        self.meshes.iter().map(Mesh2D::h).collect()
    }
}

/// Disk of radius `radius` centred at the origin whose boundary is the regular
/// `n_interface_edges`-gon with a vertex at angle 0.
///
/// Concentric rings at radii `radius * j / R`, `R = n / 4`, with ring `j`
/// holding `n * j / R` equally spaced vertices, stitched together and closed by
/// a central fan.
pub fn build_disk_mesh(radius: f64, n_interface_edges: usize) -> Result<Mesh2D> {
    let n = n_interface_edges;
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::MeshParameters(format!("disk needs an even edge count >= 4, got {n}")));
    }
    if !(radius > 0.0) {
        return Err(Error::MeshParameters(format!("disk radius must be positive, got {radius}")));
    }
    let rings = (n / 4).max(1);
    let mut vertices = vec![Point::origin()];
    let mut ring_ids: Vec<Vec<usize>> = Vec::with_capacity(rings);
    for j in 1..=rings {
        let count = if j == rings { n } else { (n * j + rings / 2) / rings };
        let r = if j == rings { radius } else { radius * j as f64 / rings as f64 };
        ring_ids.push(push_ring(&mut vertices, r, count));
    }

    let mut triangles = Vec::new();
    let first = &ring_ids[0];
    for m in 0..first.len() {
        triangles.push([0, first[m], first[(m + 1) % first.len()]]);
    }
    for j in 1..rings {
        stitch_rings(&ring_ids[j - 1], &ring_ids[j], &mut triangles);
    }

    let circle = Circle::new(Point::origin(), radius)?;
    Mesh2D::new(vertices, triangles, vec![(BoundaryTag::Interface, circle)])?.check_quality()
}

/// Annulus `r_inner < |x| < r_outer` with `n_inner_edges` sectors.
///
/// Every ring carries the same number of vertices; the ring count is the one
/// that brings the radial spacing closest to the average tangential size.
pub fn build_annulus_mesh(r_inner: f64, r_outer: f64, n_inner_edges: usize) -> Result<Mesh2D> {
    if !(r_inner > 0.0 && r_inner < r_outer) {
        return Err(Error::MeshParameters(format!(
            "annulus radii must satisfy 0 < r_inner < r_outer, got ({r_inner}, {r_outer})"
        )));
    }
    let n = n_inner_edges;
    if n < 8 {
        return Err(Error::MeshParameters(format!("annulus needs at least 8 inner edges, got {n}")));
    }
    let half_angle = (PI / n as f64).sin();
    let mean_chord = (r_inner + r_outer) * half_angle;
    let rings = (((r_outer - r_inner) / mean_chord).round() as usize).max(1);

    let mut vertices = Vec::new();
    let mut ring_ids = Vec::with_capacity(rings + 1);
    for j in 0..=rings {
        let r = match j {
            0 => r_inner,
            j if j == rings => r_outer,
            j => r_inner + (r_outer - r_inner) * j as f64 / rings as f64,
        };
        ring_ids.push(push_ring(&mut vertices, r, n));
    }
    let mut triangles = Vec::with_capacity(2 * n * rings);
    for j in 0..rings {
        let (inner, outer) = (&ring_ids[j], &ring_ids[j + 1]);
        for m in 0..n {
            let m1 = (m + 1) % n;
            triangles.push([inner[m], outer[m], outer[m1]]);
            triangles.push([inner[m], outer[m1], inner[m1]]);
        }
    }

    let circles = vec![
        (BoundaryTag::Interface, Circle::new(Point::origin(), r_inner)?),
        (BoundaryTag::Outer, Circle::new(Point::origin(), r_outer)?),
    ];
    Mesh2D::new(vertices, triangles, circles)?.check_quality()
}

fn push_ring(vertices: &mut Vec<Point>, r: f64, count: usize) -> Vec<usize> {
    (0..count)
        .map(|m| {
            let theta = 2.0 * PI * m as f64 / count as f64;
            vertices.push(Point::new(r * theta.cos(), r * theta.sin()));
            vertices.len() - 1
        })
        .collect()
}

/// Triangulates the band between two concentric rings whose vertices start at
/// angle 0, advancing whichever ring has the angularly nearer next vertex.
fn stitch_rings(inner: &[usize], outer: &[usize], triangles: &mut Vec<[usize; 3]>) {
    let (na, nb) = (inner.len(), outer.len());
    let (mut i, mut k) = (0, 0);
    while i < na || k < nb {
        // Compare (i + 1) / na against (k + 1) / nb exactly in integers.
        let advance_outer = i == na || (k < nb && (k + 1) * na < (i + 1) * nb);
        if advance_outer {
            triangles.push([inner[i % na], outer[k], outer[(k + 1) % nb]]);
            k += 1;
        } else {
            triangles.push([inner[i], outer[k % nb], inner[(i + 1) % na]]);
            i += 1;
        }
    }
}

/// Uniform red refinement: each triangle splits into four. Midpoints of
/// boundary edges are projected radially onto the edge's circle.
pub fn refine(mesh: &Mesh2D) -> Mesh2D {
    let mut vertices = mesh.vertices.clone();
    let boundary: HashMap<(usize, usize), BoundaryTag> = mesh
        .boundary_edges
        .iter()
        .map(|e| (e.vertices[0].min(e.vertices[1]), e.vertices[0].max(e.vertices[1])))
        .zip(mesh.boundary_edges.iter().map(|e| e.tag))
        .collect();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let mut p = Point::from((vertices[a].coords + vertices[b].coords) * 0.5);
            if let Some(tag) = boundary.get(&key) {
                if let Some(circle) = mesh.circle(*tag) {
                    p = circle.project(&p);
                }
            }
            vertices.push(p);
            vertices.len() - 1
        })
    };

    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for tri in &mesh.triangles {
        let [a, b, c] = *tri;
        let ab = midpoint(a, b, &mut vertices);
        let bc = midpoint(b, c, &mut vertices);
        let ca = midpoint(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    Mesh2D::new(vertices, triangles, mesh.circles.clone()).expect("red refinement preserves mesh invariants")
}

/// Maximum triangle diameter of `mesh`.
pub fn mesh_size(mesh: &Mesh2D) -> f64 {
    mesh.h()
}

pub fn signed_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Longest edge, i.e. the diameter of the triangle.
pub fn triangle_diameter(a: &Point, b: &Point, c: &Point) -> f64 {
    (b - a).norm().max((c - b).norm()).max((a - c).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_triangle_size_is_hypotenuse() {
        let mesh = Mesh2D::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
            vec![[0, 1, 2]],
            vec![],
        )
        .unwrap();
        assert_relative_eq!(mesh_size(&mesh), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(mesh.boundary_edges().len(), 3);
    }

    #[test]
    fn disk_with_eight_edges() {
        let mesh = build_disk_mesh(0.25, 8).unwrap();
        assert_eq!(mesh.edge_count(BoundaryTag::Interface), 8);
        assert_eq!(mesh.edge_count(BoundaryTag::Outer), 0);
        for (_, e) in mesh.boundary_edges_with(BoundaryTag::Interface) {
            for v in e.vertices {
                assert_relative_eq!(mesh.vertices()[v].coords.norm(), 0.25, epsilon = 1e-15);
            }
        }
        let h = mesh_size(&mesh);
        assert!(h > 0.0 && h <= 0.25, "h = {h}");
    }

    #[test]
    fn disk_h_halves_when_edges_double() {
        let coarse = build_disk_mesh(0.25, 8).unwrap();
        let fine = build_disk_mesh(0.25, 16).unwrap();
        assert!(fine.max_boundary_deviation(BoundaryTag::Interface) <= 1e-12);
        let ratio = fine.h() / coarse.h();
        assert!((0.45..=0.55).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn disk_rejects_bad_counts() {
        assert!(matches!(build_disk_mesh(0.25, 3), Err(Error::MeshParameters(_))));
        assert!(matches!(build_disk_mesh(0.25, 7), Err(Error::MeshParameters(_))));
        assert!(build_disk_mesh(0.25, 4).is_ok());
        assert!(build_disk_mesh(0.25, 6).is_ok());
    }

    #[test]
    fn annulus_boundaries_on_circles() {
        let mesh = build_annulus_mesh(0.25, 0.5, 16).unwrap();
        assert_eq!(mesh.edge_count(BoundaryTag::Interface), 16);
        assert!(mesh.max_boundary_deviation(BoundaryTag::Interface) <= 1e-12);
        assert!(mesh.max_boundary_deviation(BoundaryTag::Outer) <= 1e-12);
        let outer = mesh.circle(BoundaryTag::Outer).unwrap();
        assert_eq!(outer.radius, 0.5);
        // equal interface edge lengths
        let lengths: Vec<f64> =
            mesh.boundary_edges_with(BoundaryTag::Interface).map(|(i, _)| mesh.edge_length(i)).collect();
        for l in &lengths {
            assert_relative_eq!(*l, lengths[0], epsilon = 1e-14);
        }
    }

    #[test]
    fn annulus_rejects_bad_input() {
        assert!(matches!(build_annulus_mesh(0.5, 0.25, 16), Err(Error::MeshParameters(_))));
        assert!(matches!(build_annulus_mesh(0.25, 0.5, 6), Err(Error::MeshParameters(_))));
    }

    #[test]
    fn annulus_is_quasi_uniform() {
        for n in [8, 16, 32, 64] {
            let mesh = build_annulus_mesh(0.25, 0.5, n).unwrap();
            assert!(mesh.min_angle_deg() >= MIN_ANGLE_DEG);
            let chord_in = 2.0 * 0.25 * (PI / n as f64).sin();
            let chord_out = 2.0 * chord_in;
            let rings = mesh.vertices().len() / n - 1;
            let dr = 0.25 / rings as f64;
            assert!(dr <= 2.0 * chord_out && dr >= 0.5 * chord_in, "n = {n}");
        }
    }

    #[test]
    fn refinement_snaps_and_quadruples() {
        let mesh = build_disk_mesh(0.25, 8).unwrap();
        let fine = refine(&mesh);
        assert_eq!(fine.triangles().len(), 4 * mesh.triangles().len());
        assert_eq!(fine.edge_count(BoundaryTag::Interface), 16);
        assert!(fine.max_boundary_deviation(BoundaryTag::Interface) <= 1e-12);
        let ratio = fine.h() / mesh.h();
        assert!((0.45..=0.60).contains(&ratio), "ratio {ratio}");
        assert!(fine.h() < mesh.h());
    }

    #[test]
    fn disk_area_deficit_is_second_order() {
        // The inscribed n-gon has area n r^2 sin(2 pi / n) / 2, always below pi r^2.
        let mut mesh = build_disk_mesh(0.25, 8).unwrap();
        let mut scaled = Vec::new();
        for _ in 0..4 {
            let n = mesh.edge_count(BoundaryTag::Interface) as f64;
            let polygon = 0.5 * n * 0.0625 * (2.0 * PI / n).sin();
            assert_relative_eq!(mesh.area(), polygon, epsilon = 1e-13);
            let deficit = PI * 0.0625 - mesh.area();
            assert!(deficit > 0.0);
            scaled.push(deficit / mesh.h().powi(2));
            mesh = refine(&mesh);
        }
        let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(l, h), &s| (l.min(s), h.max(s)));
        assert!(hi / lo < 2.0, "deficit/h^2 not bounded: {scaled:?}");
    }

    #[test]
    fn sagitta_is_quadratic_in_h() {
        let mut mesh = build_annulus_mesh(0.25, 0.5, 8).unwrap();
        let mut constants = Vec::new();
        for _ in 0..4 {
            let n = mesh.edge_count(BoundaryTag::Interface) as f64;
            let sagitta = mesh.max_sagitta(BoundaryTag::Interface);
            assert_relative_eq!(sagitta, 0.25 * (1.0 - (PI / n).cos()), epsilon = 1e-15);
            constants.push(sagitta / mesh.h().powi(2));
            mesh = refine(&mesh);
        }
        assert!(constants.windows(2).all(|w| w[1] <= 1.5 * w[0]), "{constants:?}");
    }

    #[test]
    fn dump_round_trips() {
        let mesh = build_annulus_mesh(0.25, 0.5, 8).unwrap();
        let dump = MeshDump::parse(&mesh.to_dump_string()).unwrap();
        assert_eq!(dump.vertices.len(), mesh.vertices().len());
        assert_eq!(dump.triangles, mesh.triangles());
        for (d, e) in dump.boundary_edges.iter().zip(mesh.boundary_edges()) {
            assert_eq!((d.0, d.1, d.2), (e.vertices[0], e.vertices[1], e.tag));
        }
        for (d, v) in dump.vertices.iter().zip(mesh.vertices()) {
            assert_eq!(d[0], v.x);
            assert_eq!(d[1], v.y);
        }
    }

    #[test]
    fn rejects_clockwise_triangle() {
        let err = Mesh2D::new(
            vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)],
            vec![[0, 1, 2]],
            vec![],
        );
        assert!(matches!(err, Err(Error::MeshInvariant(_))));
    }
}
