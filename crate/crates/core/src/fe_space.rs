//! Continuous Lagrange `P_k` spaces on a subdomain mesh and their boundary
//! trace spaces.

use std::collections::BTreeMap;

use nalgebra::Matrix2;

use crate::mesh::{BoundaryTag, Mesh2D};
use crate::polynomial::{chain_rule_weights, edge_basis, multi_indices, ReferenceElement};
use crate::quadrature::{edge_gauss, EdgeRule};
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::{Error, Point, Result, Vector};

/// Affine map `x = origin + jacobian * xhat` of one triangle.
#[derive(Clone, Debug)]
pub struct ElementMap {
    pub origin: Point,
    pub jacobian: Matrix2<f64>,
    pub inverse: Matrix2<f64>,
    /// `|det jacobian|`, twice the triangle area.
    pub det: f64,
}

impl ElementMap {
    fn new(p: [Point; 3]) -> Self {
        let jacobian = Matrix2::from_columns(&[p[1] - p[0], p[2] - p[0]]);
        let det = jacobian.determinant();
        let inverse = jacobian.try_inverse().expect("mesh triangles have positive area");
        Self { origin: p[0], jacobian, inverse, det: det.abs() }
    }

    pub fn to_physical(&self, xhat: [f64; 2]) -> Point {
        self.origin + self.jacobian * Vector::new(xhat[0], xhat[1])
    }

    pub fn to_reference(&self, x: &Point) -> [f64; 2] {
        let r = self.inverse * (x - self.origin);
        [r.x, r.y]
    }

    /// Physical gradient from a reference gradient.
    pub fn gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let v = self.inverse.transpose() * Vector::new(g[0], g[1]);
        [v.x, v.y]
    }
}

/// Global continuous `P_k` space.
///
/// Degrees of freedom are numbered vertices first (same index as the mesh
/// vertex), then `k - 1` per mesh edge running from its lower to its higher
/// vertex index, then the interior nodes of each triangle.
#[derive(Clone, Debug)]
pub struct FeSpace {
    mesh: Mesh2D,
    reference: ReferenceElement,
    coords: Vec<Point>,
    element_dofs: Vec<Vec<usize>>,
    maps: Vec<ElementMap>,
    boundary_tag: Vec<Option<BoundaryTag>>,
}

impl FeSpace {
    pub fn new(mesh: Mesh2D, order: usize) -> Result<Self> {
        let reference = ReferenceElement::new(order)?;
        let k = order;
        let nv = mesh.vertices().len();

        let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for tri in mesh.triangles() {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_insert(0);
            }
        }
        for (n, id) in edges.values_mut().enumerate() {
            *id = n;
        }
        let edge_base = nv;
        let interior_base = nv + edges.len() * (k - 1);
        let per_interior = (k - 1) * k.saturating_sub(2) / 2;

        let maps: Vec<ElementMap> =
            (0..mesh.triangles().len()).map(|t| ElementMap::new(mesh.triangle_points(t))).collect();
        let mut element_dofs = Vec::with_capacity(mesh.triangles().len());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let mut dofs = Vec::with_capacity(reference.dim());
            dofs.extend_from_slice(tri);
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                let base = edge_base + edges[&(a.min(b), a.max(b))] * (k - 1);
                for m in 0..k - 1 {
                    dofs.push(if a < b { base + m } else { base + (k - 2 - m) });
                }
            }
            for m in 0..per_interior {
                dofs.push(interior_base + t * per_interior + m);
            }
            element_dofs.push(dofs);
        }
        let ndofs = interior_base + mesh.triangles().len() * per_interior;

        let mut coords = vec![Point::origin(); ndofs];
        for (t, dofs) in element_dofs.iter().enumerate() {
            for (local, &g) in dofs.iter().enumerate() {
                coords[g] = maps[t].to_physical(reference.nodes()[local]);
            }
        }

        let mut boundary_tag = vec![None; ndofs];
        for edge in mesh.boundary_edges() {
            let dofs = &element_dofs[edge.triangle];
            for local in reference.edge_nodes(edge.local_edge) {
                let g = dofs[local];
                match boundary_tag[g] {
                    Some(tag) if tag != edge.tag => {
                        return Err(Error::Space(format!("degree of freedom {g} touches both boundary parts")));
                    }
                    _ => boundary_tag[g] = Some(edge.tag),
                }
            }
        }

        Ok(Self { mesh, reference, coords, element_dofs, maps, boundary_tag })
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }

    pub fn order(&self) -> usize {
        self.reference.order()
    }

    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }

    pub fn ndofs(&self) -> usize {
        self.coords.len()
    }

    pub fn dof_coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn element_count(&self) -> usize {
        self.element_dofs.len()
    }

    pub fn element_dofs(&self, element: usize) -> &[usize] {
        &self.element_dofs[element]
    }

    pub fn element_map(&self, element: usize) -> &ElementMap {
        &self.maps[element]
    }

    /// Boundary part a degree of freedom lies on, if any.
    pub fn dof_tag(&self, dof: usize) -> Option<BoundaryTag> {
        self.boundary_tag[dof]
    }

    /// Sorted degrees of freedom on the `tag` boundary.
    pub fn boundary_dofs(&self, tag: BoundaryTag) -> Vec<usize> {
        (0..self.ndofs()).filter(|&d| self.boundary_tag[d] == Some(tag)).collect()
    }

    /// Shape function values and physical gradients at a reference point.
    pub fn eval_basis(&self, element: usize, xhat: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let map = &self.maps[element];
        let values = self.reference.values(xhat);
        let grads = self.reference.gradients(xhat).into_iter().map(|g| map.gradient(g)).collect();
        (values, grads)
    }

    /// Shape functions of `element`, extended as polynomials, at any physical point.
    pub fn eval_basis_at(&self, element: usize, x: &Point) -> (Vec<f64>, Vec<[f64; 2]>) {
        self.eval_basis(element, self.maps[element].to_reference(x))
    }

    /// Physical derivative `d^(a+b)/dx^a dy^b` of every shape function of
    /// `element`, extended as a polynomial, at `x`.
    pub fn basis_derivatives_at(&self, element: usize, x: &Point, a: usize, b: usize) -> Vec<f64> {
        let map = &self.maps[element];
        let xhat = map.to_reference(x);
        let weights = chain_rule_weights(&map.inverse, a, b);
        let order = a + b;
        let mut out = vec![0.0; self.reference.dim()];
        for (q, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            for (o, d) in out.iter_mut().zip(self.reference.derivatives(order - q, q, xhat)) {
                *o += w * d;
            }
        }
        out
    }

    /// All physical partial derivatives up to order `max_deriv` of the element
    /// polynomial of `dofs` at `x`, in graded lexicographic order
    /// (`v, v_x, v_y, v_xx, v_xy, v_yy, ...`).
    pub fn eval_extended(&self, element: usize, dofs: &[f64], x: &Point, max_deriv: usize) -> Result<Vec<f64>> {
        if max_deriv > self.order() {
            return Err(Error::Space(format!("derivative order {max_deriv} exceeds element order {}", self.order())));
        }
        let local = self.local_values(element, dofs);
        Ok(multi_indices(max_deriv)
            .into_iter()
            .map(|(a, b)| self.basis_derivatives_at(element, x, a, b).iter().zip(&local).map(|(d, c)| d * c).sum())
            .collect())
    }

    pub fn local_values(&self, element: usize, dofs: &[f64]) -> Vec<f64> {
        self.element_dofs[element].iter().map(|&g| dofs[g]).collect()
    }

    /// Value and gradient of the element polynomial of `dofs` at `x`.
    pub fn value_and_gradient(&self, element: usize, dofs: &[f64], x: &Point) -> (f64, [f64; 2]) {
        let (values, grads) = self.eval_basis_at(element, x);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for (local, &dof) in self.element_dofs[element].iter().enumerate() {
            v += values[local] * dofs[dof];
            g[0] += grads[local][0] * dofs[dof];
            g[1] += grads[local][1] * dofs[dof];
        }
        (v, g)
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(&Point) -> f64) -> Vec<f64> {
        self.coords.iter().map(f).collect()
    }
}

/// One boundary edge of a trace space: its mesh boundary-edge index and the
/// `k + 1` trace degrees of freedom from `vertices[0]` to `vertices[1]`.
#[derive(Clone, Debug)]
pub struct TraceEdge {
    pub boundary_edge: usize,
    pub element: usize,
    pub dofs: Vec<usize>,
}

/// Restriction of an [`FeSpace`] to the boundary edges with one tag: a
/// continuous piecewise `P_k` space on the closed boundary polygon.
#[derive(Clone, Debug)]
pub struct TraceSpace {
    tag: BoundaryTag,
    order: usize,
    /// Trace index -> volume degree of freedom (sorted).
    volume_dofs: Vec<usize>,
    /// Volume degree of freedom -> trace index.
    index_of: BTreeMap<usize, usize>,
    edges: Vec<TraceEdge>,
    /// Boundary-edge index -> position in `edges`.
    edge_slot: BTreeMap<usize, usize>,
}

impl TraceSpace {
    pub fn new(space: &FeSpace, tag: BoundaryTag) -> Result<Self> {
        let volume_dofs = space.boundary_dofs(tag);
        if volume_dofs.is_empty() {
            return Err(Error::Space(format!("no {} boundary in mesh", tag.as_str())));
        }
        let index_of: BTreeMap<usize, usize> = volume_dofs.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        let mut edges = Vec::new();
        let mut edge_slot = BTreeMap::new();
        for (id, edge) in space.mesh().boundary_edges_with(tag) {
            let element_dofs = space.element_dofs(edge.triangle);
            let dofs =
                space.reference().edge_nodes(edge.local_edge).iter().map(|&l| index_of[&element_dofs[l]]).collect();
            edge_slot.insert(id, edges.len());
            edges.push(TraceEdge { boundary_edge: id, element: edge.triangle, dofs });
        }
        Ok(Self { tag, order: space.order(), volume_dofs, index_of, edges, edge_slot })
    }

    pub fn tag(&self) -> BoundaryTag {
        self.tag
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.volume_dofs.len()
    }

    pub fn volume_dofs(&self) -> &[usize] {
        &self.volume_dofs
    }

    pub fn trace_index(&self, volume_dof: usize) -> Option<usize> {
        self.index_of.get(&volume_dof).copied()
    }

    pub fn edges(&self) -> &[TraceEdge] {
        &self.edges
    }

    pub fn edge(&self, boundary_edge: usize) -> Result<&TraceEdge> {
        self.edge_slot
            .get(&boundary_edge)
            .map(|&s| &self.edges[s])
            .ok_or_else(|| Error::Space(format!("boundary edge {boundary_edge} is not in the trace space")))
    }

    /// Trace basis values on `boundary_edge` at the point `xi`, paired with
    /// their trace indices.
    pub fn basis_at(&self, mesh: &Mesh2D, boundary_edge: usize, xi: &Point) -> Result<Vec<(usize, f64)>> {
        let edge = self.edge(boundary_edge)?;
        let [a, b] = mesh.edge_points(boundary_edge);
        let d = b - a;
        let t = (xi - a).dot(&d) / d.norm_squared();
        Ok(edge.dofs.iter().copied().zip(edge_basis(self.order, t)).collect())
    }

    /// Value of the trace function `values` on `boundary_edge` at `xi`.
    pub fn evaluate(&self, mesh: &Mesh2D, values: &[f64], boundary_edge: usize, xi: &Point) -> Result<f64> {
        Ok(self.basis_at(mesh, boundary_edge, xi)?.iter().map(|&(i, w)| w * values[i]).sum())
    }

    /// Restriction of a volume vector to the trace degrees of freedom.
    pub fn restrict(&self, volume: &[f64]) -> Vec<f64> {
        self.volume_dofs.iter().map(|&d| volume[d]).collect()
    }

    /// Nodal lifting: trace values on this boundary, zero everywhere else.
    pub fn lift(&self, space_dofs: usize, trace: &[f64]) -> Result<Vec<f64>> {
        if trace.len() != self.dim() {
            return Err(Error::Space(format!("trace vector has {} entries, expected {}", trace.len(), self.dim())));
        }
        let mut out = vec![0.0; space_dofs];
        for (&d, &v) in self.volume_dofs.iter().zip(trace) {
            out[d] = v;
        }
        Ok(out)
    }

    /// Boundary mass matrix `int phi_i phi_j` over the tagged edges.
    pub fn mass_matrix(&self, mesh: &Mesh2D) -> Result<CsrMatrix> {
        let rule = self.rule()?;
        let mut builder = TripletBuilder::new(self.dim(), self.dim());
        for edge in &self.edges {
            let len = mesh.edge_length(edge.boundary_edge);
            for (t, w) in rule.unit_interval() {
                let phi = edge_basis(self.order, t);
                for (i, &di) in edge.dofs.iter().enumerate() {
                    for (j, &dj) in edge.dofs.iter().enumerate() {
                        builder.push(di, dj, w * len * phi[i] * phi[j]);
                    }
                }
            }
        }
        Ok(builder.build())
    }

    /// Gauss rule exact to degree `2k + 2` on an edge.
    pub fn rule(&self) -> Result<EdgeRule> {
        edge_gauss(self.order + 2)
    }

    /// `L^2` projection onto the trace space of a function given per edge:
    /// `f(boundary_edge, xi)`.
    pub fn l2_projection(&self, mesh: &Mesh2D, f: impl Fn(usize, &Point) -> Result<f64>) -> Result<Vec<f64>> {
        let rule = self.rule()?;
        let mut rhs = vec![0.0; self.dim()];
        for edge in &self.edges {
            let [a, b] = mesh.edge_points(edge.boundary_edge);
            let len = (b - a).norm();
            for (t, w) in rule.unit_interval() {
                let xi = a + (b - a) * t;
                let value = f(edge.boundary_edge, &xi)?;
                for (&d, phi) in edge.dofs.iter().zip(edge_basis(self.order, t)) {
                    rhs[d] += w * len * value * phi;
                }
            }
        }
        self.mass_matrix(mesh)?.solve(&rhs)
    }

    /// `L^2` projection of a function of position.
    pub fn l2_projection_of(&self, mesh: &Mesh2D, f: impl Fn(&Point) -> f64) -> Result<Vec<f64>> {
        self.l2_projection(mesh, |_, p| Ok(f(p)))
    }

    /// `L^2` norm of a trace function.
    pub fn l2_norm(&self, mesh: &Mesh2D, values: &[f64]) -> Result<f64> {
        let m = self.mass_matrix(mesh)?;
        Ok(m.mul_vec(values).iter().zip(values).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
    }

    /// Coordinates of the trace degrees of freedom.
    pub fn coords<'a>(&'a self, space: &'a FeSpace) -> impl Iterator<Item = Point> + 'a {
        self.volume_dofs.iter().map(move |&d| space.dof_coords()[d])
    }
}
