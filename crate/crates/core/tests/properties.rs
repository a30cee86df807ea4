use pefem::error_analysis::{fit_rate, ConvergenceRecord};
use pefem::fe_space::FeSpace;
use pefem::geometry::{InterfaceMap, InterfacePair};
use pefem::harness::Ratio;
use pefem::mesh::{build_annulus_mesh, build_disk_mesh, BoundaryTag};
use pefem::Side;
use proptest::prelude::*;
use std::f64::consts::TAU;

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn zeta_then_eta_is_identity(half in 2usize..40, theta in 0.0..TAU) {
        let mesh = build_disk_mesh(0.25, 2 * half).unwrap();
        let map = InterfaceMap::new(Side::One, &mesh, BoundaryTag::Interface).unwrap();
        let p = map.circle().point_at(theta);
        let (e, xi) = map.zeta(&p).unwrap();
        prop_assert!((map.eta(e, &xi).unwrap() - p).norm() <= 1e-12);
    }

    #[test]
    fn eta_then_zeta_is_identity(n in 8usize..64, edge in 0usize..1000, t in 0.0..1.0f64) {
        let mesh = build_annulus_mesh(0.25, 0.5, n).unwrap();
        let map = InterfaceMap::new(Side::Two, &mesh, BoundaryTag::Interface).unwrap();
        let edges: Vec<usize> = map.edges_in_angular_order().collect();
        let e = edges[edge % edges.len()];
        let [a, b] = map.edge_endpoints(e).unwrap();
        let xi = a + (b - a) * t;
        let (_, back) = map.zeta(&map.eta(e, &xi).unwrap()).unwrap();
        prop_assert!((back - xi).norm() <= 1e-12);
    }

    #[test]
    fn cross_map_round_trip(a in 1usize..4, b in 1usize..4, theta in 0.0..TAU) {
        let disk = build_disk_mesh(0.25, 8 * a).unwrap();
        let ann = build_annulus_mesh(0.25, 0.5, 8 * b).unwrap();
        let pair = InterfacePair::new(
            InterfaceMap::new(Side::One, &disk, BoundaryTag::Interface).unwrap(),
            InterfaceMap::new(Side::Two, &ann, BoundaryTag::Interface).unwrap(),
        ).unwrap();
        let (_, xi) = pair.map(Side::One).zeta(&pair.map(Side::One).circle().point_at(theta)).unwrap();
        let (_, there) = pair.cross_map(Side::One, Side::Two, &xi).unwrap();
        let (_, again) = pair.cross_map(Side::Two, Side::One, &there).unwrap();
        prop_assert!((again - xi).norm() <= 1e-12);
    }

    #[test]
    fn basis_is_a_partition_of_unity(k in 1usize..=4, elem in 0usize..1000, s in 0.0..1.0f64, t in 0.0..1.0f64) {
        let space = FeSpace::new(build_disk_mesh(0.25, 8).unwrap(), k).unwrap();
        let e = elem % space.element_count();
        let xhat = [s * (1.0 - t), t];
        let (values, grads) = space.eval_basis(e, xhat);
        prop_assert!((values.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let gx: f64 = grads.iter().map(|g| g[0]).sum();
        let gy: f64 = grads.iter().map(|g| g[1]).sum();
        prop_assert!(gx.abs() <= 1e-9 && gy.abs() <= 1e-9);
    }

    #[test]
    fn power_laws_recover_their_exponent(p in 0.5..7.0f64, c in 1e-6..1e3f64, levels in 3usize..7) {
        let h: Vec<f64> = (0..levels).map(|i| 0.4 * 0.5f64.powi(i as i32)).collect();
        let e: Vec<f64> = h.iter().map(|h| c * h.powf(p)).collect();
        let fit = fit_rate(&h, &e).unwrap();
        prop_assert!((fit.least_squares.value().unwrap() - p).abs() <= 1e-10);
        prop_assert!((fit.last_interval.value().unwrap() - p).abs() <= 1e-10);
    }

    #[test]
    fn convergence_csv_round_trip(rows in proptest::collection::vec((1e-3..1.0f64, 1e-12..1.0f64, 1e-12..1.0f64), 3..7)) {
        let mut record = ConvergenceRecord::new();
        let mut rows = rows;
        rows.sort_by(|a, b| b.0.total_cmp(&a.0));
        for (h, l2, h1) in rows {
            record.push(h, l2, h1);
        }
        let (back, _) = ConvergenceRecord::from_csv(&record.to_csv().unwrap()).unwrap();
        prop_assert_eq!(back, record);
    }

    #[test]
    fn ratio_display_round_trip(a in 1usize..50, b in 1usize..50) {
        let r = Ratio::new(a, b);
        prop_assert_eq!(r.to_string().parse::<Ratio>().unwrap(), r);
    }
}
