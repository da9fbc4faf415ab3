mod common;

use common::{geometry_kernel_checks, random_medium, random_point_in, random_region};
use fissure_core::geometry::{collapsed_medium, epsilon_scale, LocalFrame, MediumSpec, validate_medium};
use fissure_core::mesh::{build_mesh, CellTag};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

proptest! {
    #[test]
    fn frame_is_a_rotation(s in -50.0f64..50.0, vx in -1e3f64..1e3, vz in -1e3f64..1e3) {
        let f = LocalFrame::from_slope(s);
        let l = f.to_local([vx, vz]);
        let n0 = (vx * vx + vz * vz).sqrt();
        prop_assert!(((l[0] * l[0] + l[1] * l[1]).sqrt() - n0).abs() <= 1e-12 * n0.max(1.0));
        prop_assert!(f.normal[1] > 0.0);
        prop_assert!((f.tangent[1] - s * f.tangent[0]).abs() < 1e-12 * s.abs().max(1.0));
    }

    #[test]
    fn kernel_properties_hold_on_random_media(seed in any::<u64>()) {
        let w = geometry_kernel_checks(&mut StdRng::seed_from_u64(seed), 20);
        for v in w {
            prop_assert!(v < 1e-12, "{w:?}");
        }
    }

    #[test]
    fn scaled_strip_area_is_eps_times_reference(seed in any::<u64>(), eps in 0.01f64..=1.0) {
        let m = random_medium(&mut StdRng::seed_from_u64(seed));
        let sc = epsilon_scale(&m, eps).unwrap();
        for i in 1..=m.n_fissures() {
            prop_assert!((sc.scaled().strip_area(i) - eps * m.strip_area(i)).abs() < 1e-12);
        }
        for j in 0..m.n_blocks() {
            prop_assert!((sc.scaled().block_area(j) - m.block_area(j)).abs() < 1e-12);
        }
    }

    #[test]
    fn locate_agrees_with_sampling(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_medium(&mut rng);
        for _ in 0..20 {
            let r = random_region(&mut rng, &m);
            let p = random_point_in(&mut rng, &m, r);
            prop_assert_eq!(m.locate(p).unwrap(), r);
        }
    }

    #[test]
    fn collapsed_medium_is_valid(seed in any::<u64>()) {
        let m = random_medium(&mut StdRng::seed_from_u64(seed));
        let c = collapsed_medium(&m);
        prop_assert!(c.validate().is_ok());
        prop_assert!((c.top - (m.top() - m.cumulative_height(m.n_fissures()))).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_medium(&mut rng);
        let spec = MediumSpec {
            domain: fissure_core::geometry::DomainSpec { x_lo: m.x_lo(), x_hi: m.x_hi(), bottom: m.bottom(), top: m.top(), slope_cap: m.slope_cap() },
            fissures: m.fissures().iter().map(|f| fissure_core::geometry::FissureSpec {
                height: f.height,
                breakpoints: f.curve.breakpoints().to_vec(),
                segments: f.curve.coefficients().iter().map(|c| c.to_vec()).collect(),
            }).collect(),
        };
        let back = MediumSpec::from_toml(&spec.to_toml()).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(validate_medium(&back).unwrap(), m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mesh_areas_sum_to_region_areas_for_polylines(
        zs in prop::collection::vec(0.3f64..0.6, 2..5),
        h in 0.1f64..0.3,
        target in 0.03f64..0.05,
    ) {
        let n = zs.len();
        let xs: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        let mesh = common::polyline_mesh(1.0, &xs, &zs, h, 0.0, 1.6, target);
        let m = mesh.medium().clone();
        let sum = |tag: CellTag| mesh.cells.iter().filter(|c| c.tag == tag).map(|c| c.area).sum::<f64>();
        prop_assert!((sum(CellTag::Strip(1)) - m.strip_area(1)).abs() < 1e-12);
        prop_assert!((sum(CellTag::Block(0)) - m.block_area(0)).abs() < 1e-12);
        prop_assert!((sum(CellTag::Block(1)) - m.block_area(1)).abs() < 1e-12);
        prop_assert!(mesh.cells.iter().all(|c| c.area > 0.0));
        prop_assert!(build_mesh(&m, target).unwrap() == mesh);
    }
}
