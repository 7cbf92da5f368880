use proptest::prelude::*;

use rem_core::bounds::{
    fano_upper_psi, feder_merhav_phi, rpe_estimate, rpe_scaling_upper, sensor_requirements_real,
    BoundsConfig,
};
use rem_core::metrics::{measured_rem_error, mesh_entropy, mesh_rpe, region_rpe};
use rem_core::{
    build_rem, deploy_one_per_mesh, CoverageScene, Disk, MeshDistribution, MeshGrid,
    NetworkCoverage, Point, RegionPartition, Rem,
};

fn disk() -> impl Strategy<Value = Disk> {
    (-0.2f64..1.2, -0.2f64..1.2, 0.05f64..0.6).prop_map(|(x, y, r)| Disk::new(x, y, r))
}

fn scene(max_networks: usize) -> impl Strategy<Value = CoverageScene> {
    prop::collection::vec(prop::collection::vec(disk(), 1..3), 1..=max_networks).prop_map(|nets| {
        let networks = nets
            .into_iter()
            .enumerate()
            .map(|(i, disks)| NetworkCoverage {
                index: i as u32 + 1,
                disks,
            })
            .collect();
        CoverageScene::new(1.0, networks).unwrap()
    })
}

fn distribution(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0f64..1.0, n).prop_filter_map("all-zero weights", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-9).then(|| w.iter().map(|x| x / s).collect())
    })
}

fn sized_distribution() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1u32..=8).prop_flat_map(|t| {
        let n = 1usize << t;
        (Just(n), distribution(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn radio_parameter_is_detection_bit_sum(s in scene(8), x in 0f64..=1.0, y in 0f64..=1.0) {
        let p = Point::new(x, y);
        let value = s.radio_parameter(p).unwrap();
        let expected: u32 = (1..=s.num_networks())
            .map(|k| (s.detect(k, p).unwrap() as u32) << (k - 1))
            .sum();
        prop_assert_eq!(value, expected);
        prop_assert!((value as usize) < s.num_parameters());
    }

    #[test]
    fn boundary_length_is_bounded_by_circumferences(s in scene(4)) {
        let xi = s.boundary_length();
        let total: f64 = s.networks().iter()
            .flat_map(|n| n.disks.iter())
            .map(|d| std::f64::consts::TAU * d.r)
            .sum();
        prop_assert!(xi >= 0.0);
        prop_assert!(xi <= total + 1e-9);
    }

    #[test]
    fn duplicated_and_nested_disks_leave_xi_unchanged(s in scene(3), shrink in 0.1f64..0.9) {
        let xi = s.boundary_length();
        let mut nets: Vec<NetworkCoverage> = s.networks().to_vec();
        let d = nets[0].disks[0];
        nets[0].disks.push(d);
        nets[0].disks.push(Disk::new(d.cx, d.cy, d.r * shrink));
        let padded = CoverageScene::new(1.0, nets).unwrap();
        prop_assert!((padded.boundary_length() - xi).abs() < 1e-9 * xi.max(1.0));
    }

    #[test]
    fn scene_json_round_trips(s in scene(8)) {
        let back = CoverageScene::from_json_str(&s.to_json_string().unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn mesh_metrics_stay_in_range((n, p) in sized_distribution()) {
        let d = MeshDistribution::new(p, 1.0).unwrap();
        let pe = mesh_rpe(&d);
        let h = mesh_entropy(&d);
        prop_assert!(pe >= 0.0 && pe <= 1.0 - 1.0 / n as f64 + 1e-12);
        prop_assert!(h >= -1e-12 && h <= (n as f64).log2() + 1e-9);
        prop_assert!(d.probs()[d.majority()] >= 1.0 - pe - 1e-15);
    }

    #[test]
    fn fano_sandwich_per_mesh((n, p) in sized_distribution()) {
        let d = MeshDistribution::new(p, 1.0).unwrap();
        let pe = mesh_rpe(&d);
        let h = mesh_entropy(&d);
        prop_assert!(feder_merhav_phi(pe, n).unwrap() <= h + 1e-9);
        prop_assert!(h <= fano_upper_psi(pe, n).unwrap() + 1e-9);
    }

    #[test]
    fn fusion_is_symmetric_and_entropy_non_decreasing(
        (a, b) in (1u32..=5).prop_flat_map(|t| (distribution(1 << t), distribution(1 << t))),
        sa in 0.01f64..2.0,
        sb in 0.01f64..2.0,
    ) {
        let da = MeshDistribution::new(a, sa).unwrap();
        let db = MeshDistribution::new(b, sb).unwrap();
        let ab = da.fuse(&db).unwrap();
        let ba = db.fuse(&da).unwrap();
        prop_assert!((ab.area() - (sa + sb)).abs() < 1e-12);
        for (x, y) in ab.probs().iter().zip(ba.probs()) {
            prop_assert!((x - y).abs() < 1e-15);
        }
        let weighted = (sa * mesh_entropy(&da) + sb * mesh_entropy(&db)) / (sa + sb);
        prop_assert!(weighted <= mesh_entropy(&ab) + 1e-12);
    }

    #[test]
    fn any_assignment_is_no_better_than_majority(
        metas in prop::collection::vec(distribution(4), 16),
        assignment in prop::collection::vec(0u32..4, 16),
    ) {
        let meshes: Vec<MeshDistribution> = metas
            .into_iter()
            .map(|p| MeshDistribution::new(p, 1.0 / 16.0).unwrap())
            .collect();
        let part = RegionPartition::new(meshes, 1.0).unwrap();
        let grid = MeshGrid::new(1.0, 4).unwrap();
        let rem = Rem::new(grid, assignment, vec![false; 16]).unwrap();
        prop_assert!(measured_rem_error(&part, &rem).unwrap() >= region_rpe(&part) - 1e-12);
    }

    #[test]
    fn one_per_mesh_fills_every_mesh(s in scene(3), side in 1usize..12, seed in any::<u64>()) {
        let grid = MeshGrid::for_scene(&s, side).unwrap();
        let dep = deploy_one_per_mesh(&s, &grid, seed);
        prop_assert!(dep.counts_per_mesh(&grid).iter().all(|&c| c == 1));
        let rem = build_rem(&s, &grid, &dep, seed);
        prop_assert_eq!(rem.empty_count(), 0);
        for (sensor, &a) in dep.sensors.iter().zip(rem.assignment()) {
            prop_assert_eq!(sensor.reading, a);
        }
    }

    #[test]
    fn estimate_never_exceeds_scaling_bound(xi in 0.01f64..50.0, edge in 0.1f64..10.0, t in 1u32..=8, m in 1usize..1_000_000) {
        let n = 1usize << t;
        prop_assert!(rpe_estimate(xi, edge, m) <= rpe_scaling_upper(xi, edge, n, m));
    }

    #[test]
    fn random_requirement_exceeds_one_per_mesh(
        xi in 0.1f64..20.0,
        t in 1u32..=8,
        beta in 0.001f64..0.99,
        k in 0.1f64..20.0,
    ) {
        let cfg = BoundsConfig { n: 1 << t, xi, edge: 1.0, beta, k };
        let (m1, m2, m3) = sensor_requirements_real(&cfg).unwrap();
        prop_assert!(m1 > 0.0 && m2 > 0.0);
        if let Some(m3) = m3 {
            prop_assert!(m3 > m2);
        }
    }
}
