//! Bilinear forms of both subdomains and the coupled four-field system.
//!
//! Unknowns are ordered `[u1 | u2 | lambda | rho]`: the volume vectors of the
//! disk and the annulus, the Dirichlet multiplier on the disk's interface
//! polygon and the flux multiplier on the annulus's interface polygon.
//!
//! The lifting is nodal, so `v - R v` is `v` with its boundary values removed.
//! Testing the Dirichlet problems with interior basis functions gives plain
//! stiffness rows, testing with boundary basis functions leaves only the
//! penalty term `theta <T^k u(eta) - data, v>`. Neumann rows test with the
//! lifted trace basis, which is the volume basis function at that boundary node.

use crate::fe_space::{FeSpace, TraceSpace};
use crate::geometry::{InterfaceMap, InterfacePair};
use crate::mesh::{BoundaryTag, Mesh2D};
use crate::polynomial::edge_basis;
use crate::problem::InterfaceProblem;
use crate::quadrature::{edge_gauss, triangle_quadrature, EdgeRule};
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::{Error, Point, Result, Side};

/// Tunable parts of the discretisation.
#[derive(Clone, Debug, PartialEq)]
pub struct AssemblyOptions {
    /// `C` in `theta_i = C / h_i^e`; `None` means `10 * max p`.
    pub c_theta: Option<f64>,
    /// `e` in `theta_i = C / h_i^e`.
    pub theta_exponent: f64,
    /// Gauss points per edge (or sub-segment) for boundary and coupling
    /// terms; `None` means `k + 2`.
    pub edge_points: Option<usize>,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { c_theta: None, theta_exponent: 1.0, edge_points: None }
    }
}

/// Space, trace spaces and boundary maps of one subdomain.
#[derive(Clone, Debug)]
pub struct SideContext {
    pub side: Side,
    pub space: FeSpace,
    pub interface: TraceSpace,
    pub interface_map: InterfaceMap,
    pub outer: Option<(TraceSpace, InterfaceMap)>,
}

impl SideContext {
    pub fn new(side: Side, mesh: Mesh2D, order: usize) -> Result<Self> {
        let interface_map = InterfaceMap::new(side, &mesh, BoundaryTag::Interface)?;
        let space = FeSpace::new(mesh, order)?;
        let interface = TraceSpace::new(&space, BoundaryTag::Interface)?;
        let outer = if space.mesh().edge_count(BoundaryTag::Outer) > 0 {
            let map = InterfaceMap::new(side, space.mesh(), BoundaryTag::Outer)?;
            Some((TraceSpace::new(&space, BoundaryTag::Outer)?, map))
        } else {
            None
        };
        Ok(Self { side, space, interface, interface_map, outer })
    }

    pub fn mesh(&self) -> &Mesh2D {
        self.space.mesh()
    }

    /// Trace space and map of one boundary part.
    pub fn boundary(&self, tag: BoundaryTag) -> Result<(&TraceSpace, &InterfaceMap)> {
        match tag {
            BoundaryTag::Interface => Ok((&self.interface, &self.interface_map)),
            BoundaryTag::Outer => self
                .outer
                .as_ref()
                .map(|(t, m)| (t, m))
                .ok_or_else(|| Error::Assembly(format!("side {} has no outer boundary", self.side))),
        }
    }

    /// Length of the longest interface edge.
    pub fn interface_h(&self) -> f64 {
        let mesh = self.mesh();
        mesh.boundary_edges_with(BoundaryTag::Interface).map(|(i, _)| mesh.edge_length(i)).fold(0.0, f64::max)
    }
}

/// Both subdomains, their interface pairing and the problem data.
#[derive(Clone, Debug)]
pub struct FormContext<'a> {
    pub sides: [SideContext; 2],
    pub pair: InterfacePair,
    pub problem: &'a InterfaceProblem,
    pub options: AssemblyOptions,
    pub order: usize,
}

impl<'a> FormContext<'a> {
    pub fn new(
        disk: Mesh2D,
        annulus: Mesh2D,
        order: usize,
        problem: &'a InterfaceProblem,
        options: AssemblyOptions,
    ) -> Result<Self> {
        let one = SideContext::new(Side::One, disk, order)?;
        let two = SideContext::new(Side::Two, annulus, order)?;
        if one.outer.is_some() {
            return Err(Error::Assembly("the disk mesh must not have an outer boundary".into()));
        }
        if two.outer.is_none() {
            return Err(Error::Assembly("the annulus mesh needs an outer boundary".into()));
        }
        let pair = InterfacePair::new(one.interface_map.clone(), two.interface_map.clone())?;
        if let Some(c) = options.c_theta {
            if !(c > 0.0) {
                return Err(Error::Config(format!("c_theta must be positive, got {c}")));
            }
        }
        Ok(Self { sides: [one, two], pair, problem, options, order })
    }

    pub fn side(&self, side: Side) -> &SideContext {
        &self.sides[side.index()]
    }

    pub fn c_theta(&self) -> f64 {
        self.options.c_theta.unwrap_or_else(|| 10.0 * self.problem.max_coefficient())
    }

    /// Penalty parameter `theta_i = C / h_i^e`.
    pub fn theta(&self, side: Side) -> f64 {
        self.c_theta() / self.side(side).interface_h().powf(self.options.theta_exponent)
    }

    pub fn edge_rule(&self) -> Result<EdgeRule> {
        edge_gauss(self.options.edge_points.unwrap_or(self.order + 2))
    }
}

/// `int p grad w . grad v` over the polygonal subdomain.
pub fn assemble_stiffness(ctx: &FormContext, side: Side) -> Result<CsrMatrix> {
    let sc = ctx.side(side);
    let space = &sc.space;
    let rule = triangle_quadrature(2 * ctx.order)?;
    let n = space.ndofs();
    let mut b = TripletBuilder::new(n, n);
    let nloc = space.reference().dim();
    let mut local = vec![0.0; nloc * nloc];
    for t in 0..space.element_count() {
        let map = space.element_map(t);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (xhat, w) in rule.iter() {
            let x = map.to_physical(*xhat);
            let c = w * map.det * ctx.problem.coefficient(side, &x);
            let (_, g) = space.eval_basis(t, *xhat);
            for i in 0..nloc {
                for j in 0..nloc {
                    local[i * nloc + j] += c * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
        }
        let dofs = space.element_dofs(t);
        for i in 0..nloc {
            for j in 0..nloc {
                b.push(dofs[i], dofs[j], local[i * nloc + j]);
            }
        }
    }
    Ok(b.build())
}

/// `int f v` over the polygonal subdomain.
pub fn assemble_load(ctx: &FormContext, side: Side) -> Result<Vec<f64>> {
    let space = &ctx.side(side).space;
    let rule = triangle_quadrature(2 * ctx.order + 2)?;
    let mut f = vec![0.0; space.ndofs()];
    for t in 0..space.element_count() {
        let map = space.element_map(t);
        let dofs = space.element_dofs(t);
        for (xhat, w) in rule.iter() {
            let x = map.to_physical(*xhat);
            let c = w * map.det * ctx.problem.source(side, &x);
            for (d, phi) in dofs.iter().zip(space.reference().values(*xhat)) {
                f[*d] += c * phi;
            }
        }
    }
    Ok(f)
}

/// Points and weights of the edge rule on the segment `a -> b`.
fn segment_points(rule: &EdgeRule, a: Point, b: Point) -> impl Iterator<Item = (Point, f64)> + '_ {
    let len = (b - a).norm();
    rule.unit_interval().map(move |(t, w)| (a + (b - a) * t, w * len))
}

/// `int_{Gamma_h} T^k w(eta(xi)) mu(xi) dxi` on one boundary part: rows are
/// trace indices, columns volume degrees of freedom.
pub fn assemble_taylor_mass(ctx: &FormContext, side: Side, tag: BoundaryTag) -> Result<CsrMatrix> {
    let sc = ctx.side(side);
    let (trace, map) = sc.boundary(tag)?;
    let space = &sc.space;
    let mesh = sc.mesh();
    let rule = ctx.edge_rule()?;
    let mut b = TripletBuilder::new(trace.dim(), space.ndofs());
    for edge in trace.edges() {
        let [a, e] = mesh.edge_points(edge.boundary_edge);
        let dofs = space.element_dofs(edge.element);
        for (xi, w) in segment_points(&rule, a, e) {
            let eta = map.eta(edge.boundary_edge, &xi)?;
            let (psi, _) = space.eval_basis_at(edge.element, &eta);
            for (j, mu) in trace.basis_at(mesh, edge.boundary_edge, &xi)? {
                for (d, p) in dofs.iter().zip(&psi) {
                    b.push(j, *d, w * mu * p);
                }
            }
        }
    }
    Ok(b.build())
}

/// Penalty rows and data of the Dirichlet problem on one boundary part:
/// `theta <T^k w(eta), mu>` and `theta <g(eta), mu>` (zero data on the interface,
/// whose values come from the multiplier instead).
pub fn assemble_dirichlet_block(ctx: &FormContext, side: Side, tag: BoundaryTag) -> Result<(CsrMatrix, Vec<f64>)> {
    let theta = ctx.theta(side);
    let m = assemble_taylor_mass(ctx, side, tag)?;
    let (trace, map) = ctx.side(side).boundary(tag)?;
    let mut rhs = vec![0.0; trace.dim()];
    if tag == BoundaryTag::Outer {
        let mesh = ctx.side(side).mesh();
        let rule = ctx.edge_rule()?;
        for edge in trace.edges() {
            let [a, e] = mesh.edge_points(edge.boundary_edge);
            for (xi, w) in segment_points(&rule, a, e) {
                let g = ctx.problem.outer_data(&map.eta(edge.boundary_edge, &xi)?);
                for (j, mu) in trace.basis_at(mesh, edge.boundary_edge, &xi)? {
                    rhs[j] += theta * w * g * mu;
                }
            }
        }
    }
    let scaled = m.scaled(&vec![theta; m.nrows()], &vec![1.0; m.ncols()]);
    Ok((scaled, rhs))
}

/// `tau(w, mu) = <p(eta) grad w(eta) . n - p(xi) grad w(xi) . n_h, mu>` on the
/// interface polygon: rows are interface trace indices.
pub fn assemble_tau(ctx: &FormContext, side: Side) -> Result<CsrMatrix> {
    let sc = ctx.side(side);
    let (trace, map) = (&sc.interface, &sc.interface_map);
    let space = &sc.space;
    let mesh = sc.mesh();
    let rule = ctx.edge_rule()?;
    let mut b = TripletBuilder::new(trace.dim(), space.ndofs());
    for edge in trace.edges() {
        let [a, e] = mesh.edge_points(edge.boundary_edge);
        let nh = map.polygon_normal(mesh, edge.boundary_edge);
        let dofs = space.element_dofs(edge.element);
        for (xi, w) in segment_points(&rule, a, e) {
            let eta = map.eta(edge.boundary_edge, &xi)?;
            let n = map.exact_normal(mesh, edge.boundary_edge, &eta);
            let (_, g_eta) = space.eval_basis_at(edge.element, &eta);
            let (_, g_xi) = space.eval_basis_at(edge.element, &xi);
            let (p_eta, p_xi) = (ctx.problem.coefficient(side, &eta), ctx.problem.coefficient(side, &xi));
            for (j, mu) in trace.basis_at(mesh, edge.boundary_edge, &xi)? {
                for (l, d) in dofs.iter().enumerate() {
                    let flux = p_eta * (g_eta[l][0] * n.x + g_eta[l][1] * n.y)
                        - p_xi * (g_xi[l][0] * nh.x + g_xi[l][1] * nh.y);
                    b.push(j, *d, w * mu * flux);
                }
            }
        }
    }
    Ok(b.build())
}

/// Parameters in `(0, 1)` along the counterclockwise test edge where the
/// trial polygon has a vertex, sorted, with 0 and 1 added.
fn kink_parameters(test: &InterfaceMap, trial: &InterfaceMap, edge: usize) -> Result<Vec<f64>> {
    let (start, end) = test.angular_interval(edge)?;
    let [a, b] = test.edge_endpoints(edge)?;
    let mut ts = vec![0.0, 1.0];
    for e in trial.edges_in_angular_order() {
        let (theta, _) = trial.angular_interval(e)?;
        for lifted in [theta, theta + std::f64::consts::TAU] {
            if lifted > start && lifted < end {
                let dir = crate::Vector::new(lifted.cos(), lifted.sin());
                let c = test.circle().center;
                // Ray from the center through the trial vertex, cut with the chord.
                let ab = b - a;
                let ac = a - c;
                let t = -(ac.x * dir.y - ac.y * dir.x) / (ab.x * dir.y - ab.y * dir.x);
                if t > 1e-14 && t < 1.0 - 1e-14 {
                    ts.push(t);
                }
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    Ok(ts)
}

/// `<mu_trial pulled back to the test polygon, mu_test>` integrated on the
/// test polygon; rows are test trace indices, columns trial trace indices.
///
/// Each test edge is split where the pulled-back trial function has kinks so
/// that every Gauss rule sees a smooth integrand.
pub fn assemble_cross_block(ctx: &FormContext, test: Side, trial: Side) -> Result<CsrMatrix> {
    let ts = ctx.side(test);
    let tr = ctx.side(trial);
    let rule = ctx.edge_rule()?;
    let (test_map, trial_map) = (ctx.pair.map(test), ctx.pair.map(trial));
    let mut b = TripletBuilder::new(ts.interface.dim(), tr.interface.dim());
    for edge in ts.interface.edges() {
        let id = edge.boundary_edge;
        let [a, e] = test_map.edge_endpoints(id)?;
        let cuts = kink_parameters(test_map, trial_map, id)?;
        for w2 in cuts.windows(2) {
            let (p, q) = (a + (e - a) * w2[0], a + (e - a) * w2[1]);
            for (xi, w) in segment_points(&rule, p, q) {
                let (trial_edge, image) = ctx.pair.cross_map(test, trial, &xi)?;
                let trial_basis = tr.interface.basis_at(tr.mesh(), trial_edge, &image)?;
                for (j, mu) in ts.interface.basis_at(ts.mesh(), id, &xi)? {
                    for &(l, nu) in &trial_basis {
                        b.push(j, l, w * mu * nu);
                    }
                }
            }
        }
    }
    Ok(b.build())
}

/// The four multiplier blocks of the coupled system.
#[derive(Clone, Debug)]
pub struct CouplingBlocks {
    /// `<lambda, v1>` on the disk polygon (interface mass matrix of side 1).
    pub v1_lambda: CsrMatrix,
    /// `<lambda pulled back, v2>` on the annulus polygon.
    pub v2_lambda: CsrMatrix,
    /// `<rho pulled back, mu1>` on the disk polygon.
    pub mu1_rho: CsrMatrix,
    /// `<rho, mu2>` on the annulus polygon (interface mass matrix of side 2).
    pub mu2_rho: CsrMatrix,
}

pub fn assemble_coupling_blocks(ctx: &FormContext) -> Result<CouplingBlocks> {
    let one = ctx.side(Side::One);
    let two = ctx.side(Side::Two);
    Ok(CouplingBlocks {
        v1_lambda: boundary_mass(ctx, one)?,
        v2_lambda: assemble_cross_block(ctx, Side::Two, Side::One)?,
        mu1_rho: assemble_cross_block(ctx, Side::One, Side::Two)?,
        mu2_rho: boundary_mass(ctx, two)?,
    })
}

fn boundary_mass(ctx: &FormContext, sc: &SideContext) -> Result<CsrMatrix> {
    let rule = ctx.edge_rule()?;
    let mesh = sc.mesh();
    let k = ctx.order;
    let mut b = TripletBuilder::new(sc.interface.dim(), sc.interface.dim());
    for edge in sc.interface.edges() {
        let len = mesh.edge_length(edge.boundary_edge);
        for (t, w) in rule.unit_interval() {
            let phi = edge_basis(k, t);
            for (i, &di) in edge.dofs.iter().enumerate() {
                for (j, &dj) in edge.dofs.iter().enumerate() {
                    b.push(di, dj, w * len * phi[i] * phi[j]);
                }
            }
        }
    }
    Ok(b.build())
}

pub const BLOCK_LABELS: [&str; 4] = ["u1", "u2", "lambda", "rho"];

/// The assembled four-field system.
#[derive(Clone, Debug)]
pub struct CoupledSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Start of each unknown block, plus the total dimension.
    pub offsets: [usize; 5],
    pub theta: [f64; 2],
    /// Row pairs to exchange so that no diagonal entry is structurally zero:
    /// each disk interface Dirichlet row with the Neumann row of the same node.
    pub pivot_swaps: Vec<(usize, usize)>,
}

impl CoupledSystem {
    pub fn dim(&self) -> usize {
        self.offsets[4]
    }

    /// Label of the unknown block that holds `index`.
    pub fn block_of(&self, index: usize) -> &'static str {
        let b = (0..4).rev().find(|&b| index >= self.offsets[b]).unwrap_or(0);
        BLOCK_LABELS[b]
    }

    /// Splits a solution vector into `(u1, u2, lambda, rho)`.
    pub fn split<'v>(&self, x: &'v [f64]) -> [&'v [f64]; 4] {
        let o = &self.offsets;
        [&x[o[0]..o[1]], &x[o[1]..o[2]], &x[o[2]..o[3]], &x[o[3]..o[4]]]
    }
}

/// Builds the coupled system from both subdomains.
pub fn build_coupled_system(ctx: &FormContext) -> Result<CoupledSystem> {
    let s1 = ctx.side(Side::One);
    let s2 = ctx.side(Side::Two);
    let (n1, n2) = (s1.space.ndofs(), s2.space.ndofs());
    let (m1, m2) = (s1.interface.dim(), s2.interface.dim());
    let offsets = [0, n1, n1 + n2, n1 + n2 + m1, n1 + n2 + m1 + m2];
    let (u1, u2, lam, rho) = (offsets[0], offsets[1], offsets[2], offsets[3]);
    let dim = offsets[4];
    let theta = [ctx.theta(Side::One), ctx.theta(Side::Two)];

    let a = [assemble_stiffness(ctx, Side::One)?, assemble_stiffness(ctx, Side::Two)?];
    let f = [assemble_load(ctx, Side::One)?, assemble_load(ctx, Side::Two)?];
    let (d1, _) = assemble_dirichlet_block(ctx, Side::One, BoundaryTag::Interface)?;
    let (d2, _) = assemble_dirichlet_block(ctx, Side::Two, BoundaryTag::Interface)?;
    let (d2o, g2o) = assemble_dirichlet_block(ctx, Side::Two, BoundaryTag::Outer)?;
    let tau = [assemble_tau(ctx, Side::One)?, assemble_tau(ctx, Side::Two)?];
    let c = assemble_coupling_blocks(ctx)?;
    let outer_trace = &s2.boundary(BoundaryTag::Outer)?.0;

    let mut b = TripletBuilder::new(dim, dim);
    let mut rhs = vec![0.0; dim];

    // Disk Dirichlet rows.
    for d in 0..n1 {
        match s1.interface.trace_index(d) {
            None => {
                b.extend_row(u1 + d, &a[0], d, u1, 1.0);
                rhs[u1 + d] = f[0][d];
            }
            Some(j) => {
                b.extend_row(u1 + d, &d1, j, u1, 1.0);
                b.extend_row(u1 + d, &c.v1_lambda, j, lam, -theta[0]);
            }
        }
    }
    // Annulus Dirichlet rows.
    for d in 0..n2 {
        let row = u2 + d;
        if let Some(j) = s2.interface.trace_index(d) {
            b.extend_row(row, &d2, j, u2, 1.0);
            b.extend_row(row, &c.v2_lambda, j, lam, -theta[1]);
        } else if let Some(j) = outer_trace.trace_index(d) {
            b.extend_row(row, &d2o, j, u2, 1.0);
            rhs[row] = g2o[j];
        } else {
            b.extend_row(row, &a[1], d, u2, 1.0);
            rhs[row] = f[1][d];
        }
    }
    // Neumann rows tested with the lifted interface basis.
    let mut pivot_swaps = Vec::with_capacity(m1);
    for (m, &d) in s1.interface.volume_dofs().iter().enumerate() {
        let row = lam + m;
        pivot_swaps.push((u1 + d, row));
        b.extend_row(row, &a[0], d, u1, 1.0);
        b.extend_row(row, &tau[0], m, u1, 1.0);
        b.extend_row(row, &c.mu1_rho, m, rho, 1.0);
        rhs[row] = f[0][d];
    }
    for (m, &d) in s2.interface.volume_dofs().iter().enumerate() {
        let row = rho + m;
        b.extend_row(row, &a[1], d, u2, 1.0);
        b.extend_row(row, &tau[1], m, u2, 1.0);
        b.extend_row(row, &c.mu2_rho, m, rho, -1.0);
        rhs[row] = f[1][d];
    }

    let matrix = b.build();
    if let Some(&r) = matrix.empty_rows().first() {
        let system = CoupledSystem { matrix, rhs, offsets, theta, pivot_swaps };
        return Err(Error::Assembly(format!("row {r} (block {}) is empty", system.block_of(r))));
    }
    Ok(CoupledSystem { matrix, rhs, offsets, theta, pivot_swaps })
}

impl TripletBuilder {
    /// Appends `scale * source[source_row, :]` to `row`, shifting columns by `col0`.
    fn extend_row(&mut self, row: usize, source: &CsrMatrix, source_row: usize, col0: usize, scale: f64) {
        for (j, v) in source.row(source_row) {
            self.push(row, col0 + j, scale * v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_annulus_mesh, build_disk_mesh};
    use crate::problem::manufactured_case;
    use approx::assert_relative_eq;

    fn context(pb: &InterfaceProblem, n1: usize, n2: usize, k: usize) -> FormContext<'_> {
        FormContext::new(
            build_disk_mesh(0.25, n1).unwrap(),
            build_annulus_mesh(0.25, 0.5, n2).unwrap(),
            k,
            pb,
            AssemblyOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn stiffness_is_symmetric_with_constant_kernel() {
        let pb = manufactured_case();
        let ctx = context(&pb, 8, 8, 3);
        for side in Side::BOTH {
            let a = assemble_stiffness(&ctx, side).unwrap();
            assert!(a.max_abs_diff(&a.transpose()) <= 1e-14);
            let ones = vec![1.0; a.ncols()];
            assert!(a.mul_vec(&ones).iter().all(|v| v.abs() < 1e-10));
        }
    }

    #[test]
    fn p1_reference_triangle_element_matrix() {
        let v = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let mesh = Mesh2D::new(v, vec![[0, 1, 2]], vec![]).unwrap();
        let space = FeSpace::new(mesh, 1).unwrap();
        let rule = triangle_quadrature(2).unwrap();
        let mut k = [[0.0; 3]; 3];
        for (xhat, w) in rule.iter() {
            let (_, g) = space.eval_basis(0, *xhat);
            for i in 0..3 {
                for j in 0..3 {
                    k[i][j] += w * space.element_map(0).det * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
        }
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(k[i][j], expect[i][j], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn theta_scales_with_inverse_edge_length() {
        let pb = manufactured_case();
        let coarse = context(&pb, 8, 8, 2);
        let fine = context(&pb, 16, 16, 2);
        let ratio = fine.theta(Side::One) / coarse.theta(Side::One);
        let h_ratio = coarse.side(Side::One).interface_h() / fine.side(Side::One).interface_h();
        assert_relative_eq!(ratio, h_ratio, epsilon = 1e-12);
        assert!((ratio - 2.0).abs() < 0.05);
        assert_eq!(coarse.c_theta(), 20.0);
    }

    #[test]
    fn tau_vanishes_on_constants() {
        let pb = manufactured_case();
        let ctx = context(&pb, 8, 16, 2);
        for side in Side::BOTH {
            let t = assemble_tau(&ctx, side).unwrap();
            let ones = vec![1.0; t.ncols()];
            assert!(t.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn cross_blocks_have_test_integral_row_sums() {
        let pb = manufactured_case();
        let ctx = context(&pb, 8, 16, 3);
        let c = assemble_coupling_blocks(&ctx).unwrap();
        for (block, test) in [(&c.v2_lambda, &c.mu2_rho), (&c.mu1_rho, &c.v1_lambda)] {
            let trial_ones = vec![1.0; block.ncols()];
            let test_ones = vec![1.0; test.ncols()];
            for (a, b) in block.mul_vec(&trial_ones).iter().zip(test.mul_vec(&test_ones)) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn identical_polygons_give_mass_matrix_cross_blocks() {
        let pb = manufactured_case();
        let ctx = context(&pb, 16, 16, 2);
        let c = assemble_coupling_blocks(&ctx).unwrap();
        // Both sides number their trace dofs differently; compare via vertex positions.
        let s1 = ctx.side(Side::One);
        let s2 = ctx.side(Side::Two);
        let p1: Vec<Point> = s1.interface.coords(&s1.space).collect();
        let p2: Vec<Point> = s2.interface.coords(&s2.space).collect();
        let perm: Vec<usize> =
            p2.iter().map(|q| p1.iter().position(|p| (p - q).norm() < 1e-13).expect("matching node")).collect();
        for (i, j, v) in c.v2_lambda.iter() {
            let inv = perm.iter().position(|&x| x == j).unwrap();
            assert_relative_eq!(v, c.mu2_rho.get(i, inv), epsilon = 1e-14);
        }
    }

    #[test]
    fn dimension_matches_count() {
        let pb = manufactured_case();
        let ctx = context(&pb, 8, 8, 2);
        let sys = build_coupled_system(&ctx).unwrap();
        let n1 = ctx.side(Side::One).space.ndofs();
        let n2 = ctx.side(Side::Two).space.ndofs();
        assert_eq!(sys.dim(), n1 + n2 + 16 + 16);
        assert_eq!(sys.block_of(n1 + n2 + 16), "rho");
        assert_eq!(sys.block_of(0), "u1");
    }

    #[test]
    fn kinks_at_trial_vertices() {
        let pb = manufactured_case();
        let ctx = context(&pb, 8, 16, 1);
        let m1 = ctx.pair.map(Side::One);
        let m2 = ctx.pair.map(Side::Two);
        for e in m1.edges_in_angular_order() {
            let ts = kink_parameters(m1, m2, e).unwrap();
            assert_eq!(ts.len(), 3);
            assert_relative_eq!(ts[1], 0.5, epsilon = 1e-12);
        }
        for e in m2.edges_in_angular_order() {
            assert_eq!(kink_parameters(m2, m1, e).unwrap(), vec![0.0, 1.0]);
        }
    }
}
