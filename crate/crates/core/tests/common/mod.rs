#![allow(dead_code)]

use pefem::extension::{extended_conormal, taylor_value, taylor_value_sum, NormalChoice};
use pefem::fe_space::FeSpace;
use pefem::geometry::{InterfaceMap, InterfacePair};
use pefem::mesh::{build_annulus_mesh, build_disk_mesh, refine, BoundaryTag, Mesh2D};
use pefem::polynomial::Poly2;
use pefem::quadrature::edge_gauss;
use pefem::{Point, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn gaussian(p: &Point) -> f64 {
    (-5.0 * p.coords.norm_squared()).exp()
}

/// A degree-`k` polynomial with all coefficients nonzero.
pub fn patch_polynomial(k: usize) -> Poly2 {
    let mut terms = Vec::new();
    for total in 0..=k {
        for b in 0..=total {
            terms.push((total - b, b, 0.3 + 0.17 * (total * 3 + b) as f64 * if b % 2 == 0 { 1.0 } else { -1.0 }));
        }
    }
    Poly2::from_terms(&terms)
}

/// Disk meshes with `n` interface edges refined `levels - 1` times.
pub fn disk_family(n: usize, levels: usize) -> Vec<Mesh2D> {
    let mut m = build_disk_mesh(0.25, n).unwrap();
    let mut out = vec![m.clone()];
    for _ in 1..levels {
        m = refine(&m);
        out.push(m.clone());
    }
    out
}

/// Interface pairs of a disk with `n1` and an annulus with `n2` interface
/// edges, refined together.
pub fn pair_family(n1: usize, n2: usize, levels: usize) -> Vec<(f64, InterfacePair)> {
    let mut disk = build_disk_mesh(0.25, n1).unwrap();
    let mut ann = build_annulus_mesh(0.25, 0.5, n2).unwrap();
    let mut out = Vec::new();
    for level in 0..levels {
        if level > 0 {
            disk = refine(&disk);
            ann = refine(&ann);
        }
        let pair = InterfacePair::new(
            InterfaceMap::new(Side::One, &disk, BoundaryTag::Interface).unwrap(),
            InterfaceMap::new(Side::Two, &ann, BoundaryTag::Interface).unwrap(),
        )
        .unwrap();
        let h = disk.edge_length(disk.boundary_edges_with(BoundaryTag::Interface).next().unwrap().0);
        out.push((h, pair));
    }
    out
}

/// Gauss points (`npoints` per edge) on the interface polygon of `space`.
pub fn interface_points(space: &FeSpace, map: &InterfaceMap, npoints: usize) -> Vec<(usize, Point)> {
    let rule = edge_gauss(npoints).unwrap();
    map.edges_in_angular_order()
        .flat_map(|e| {
            let [a, b] = space.mesh().edge_points(e);
            rule.unit_interval().map(move |(t, _)| (e, a + (b - a) * t)).collect::<Vec<_>>()
        })
        .collect()
}

fn setup(mesh: Mesh2D, k: usize) -> (FeSpace, InterfaceMap) {
    let map = InterfaceMap::new(Side::One, &mesh, BoundaryTag::Interface).unwrap();
    (FeSpace::new(mesh, k).unwrap(), map)
}

/// Largest `|T^k P_h(eta) - P(eta)|` for the interpolant of a degree-`k` polynomial.
pub fn polynomial_reproduction(k: usize) -> f64 {
    let (space, map) = setup(build_disk_mesh(0.25, 16).unwrap(), k);
    let poly = patch_polynomial(k);
    let dofs = space.interpolate(|p| poly.eval(p.x, p.y));
    let mut worst: f64 = 0.0;
    for (e, xi) in interface_points(&space, &map, k + 2) {
        let eta = map.eta(e, &xi).unwrap();
        let v = taylor_value(&space, &map, e, &dofs, &xi).unwrap();
        worst = worst.max((v - poly.eval(eta.x, eta.y)).abs());
    }
    worst
}

/// Largest difference between direct evaluation and the derivative sum.
pub fn dual_form_gap(k: usize) -> f64 {
    let (space, map) = setup(build_disk_mesh(0.25, 16).unwrap(), k);
    let dofs = space.interpolate(gaussian);
    let mut worst: f64 = 0.0;
    for (e, xi) in interface_points(&space, &map, k + 2) {
        let a = taylor_value(&space, &map, e, &dofs, &xi).unwrap();
        let b = taylor_value_sum(&space, &map, e, &dofs, &xi).unwrap();
        worst = worst.max((a - b).abs());
    }
    worst
}

/// `(h, max |T^k I_h u(eta) - u(eta)|)` per level for `u = exp(-5 r^2)`.
pub fn taylor_decay(k: usize, base_edges: usize, levels: usize) -> (Vec<f64>, Vec<f64>) {
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for mesh in disk_family(base_edges, levels) {
        hs.push(mesh.h());
        let (space, map) = setup(mesh, k);
        let dofs = space.interpolate(gaussian);
        let mut worst: f64 = 0.0;
        for (e, xi) in interface_points(&space, &map, k + 2) {
            let eta = map.eta(e, &xi).unwrap();
            let v = taylor_value(&space, &map, e, &dofs, &xi).unwrap();
            worst = worst.max((v - gaussian(&eta)).abs());
        }
        errs.push(worst);
    }
    (hs, errs)
}

/// `(h, max |extended co-normal - du/dn(eta)|)` per level for the disk solution.
pub fn conormal_decay(k: usize, base_edges: usize, levels: usize) -> (Vec<f64>, Vec<f64>) {
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    let one = |_: &Point| 1.0;
    for mesh in disk_family(base_edges, levels) {
        hs.push(mesh.h());
        let (space, map) = setup(mesh, k);
        let dofs = space.interpolate(gaussian);
        let mut worst: f64 = 0.0;
        for (e, xi) in interface_points(&space, &map, k + 2) {
            let eta = map.eta(e, &xi).unwrap();
            let q = extended_conormal(&space, &map, e, &dofs, &xi, &one, NormalChoice::Exact).unwrap();
            // Outward radial derivative of exp(-5 r^2) at r = 0.25.
            let exact = -10.0 * eta.coords.norm() * gaussian(&eta);
            worst = worst.max((q - exact).abs());
        }
        errs.push(worst);
    }
    (hs, errs)
}

/// Largest relative mismatch between the analytic cross-map Jacobian and a
/// central difference of target arc length at `samples` random side-1 points.
pub fn jacobian_fd_mismatch(pair: &InterfacePair, samples: usize, seed: u64) -> f64 {
    let map = pair.map(Side::One);
    let edges: Vec<usize> = map.edges_in_angular_order().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut taken = 0;
    while taken < samples {
        let e = edges[rng.gen_range(0..edges.len())];
        let [a, b] = map.edge_endpoints(e).unwrap();
        let t: f64 = rng.gen_range(0.05..0.95);
        let xi = a + (b - a) * t;
        let step = 1e-5 * (b - a).norm();
        let dir = (b - a).normalize();
        let (ep, plus) = pair.cross_map(Side::One, Side::Two, &(xi + dir * step)).unwrap();
        let (em, minus) = pair.cross_map(Side::One, Side::Two, &(xi - dir * step)).unwrap();
        if ep != em {
            // The difference stencil straddles a target vertex.
            continue;
        }
        let fd = (plus - minus).norm() / (2.0 * step);
        let j = pair.cross_jacobian(Side::One, Side::Two, &xi).unwrap();
        worst = worst.max((j - fd).abs() / fd);
        taken += 1;
    }
    worst
}

/// Largest `|J - 1|` at Gauss points of side 1.
pub fn jacobian_defect(pair: &InterfacePair) -> f64 {
    pefem::geometry::geometry_report(pair, 7).unwrap().max_jacobian_defect
}
