use center_manifold::geometry::frame::plane_rotation;
use center_manifold::geometry::variation::{bump_field, first_variation_residual};
use center_manifold::geometry::Frame;
use center_manifold::harness::{generate_surface, sample_surface, SurfaceKind, SurfaceSpec};

#[test]
fn plane_is_zero() {
    let t = generate_surface(&SurfaceSpec::new(SurfaceKind::Plane)).unwrap();
    assert_eq!(t.base.max_abs(), 0.0);
}

#[test]
fn enneper_is_minimal_up_to_discretization() {
    for res in [129, 257] {
        let spec = SurfaceSpec { kind: SurfaceKind::Enneper { eps: 0.1 }, resolution: res, radius: 1.0 };
        let t = generate_surface(&spec).unwrap();
        let h = spec.nominal_h();
        let k = bump_field([0.1, -0.05], 0.5, h, 1).unwrap();
        let r = first_variation_residual(&t.base, &k, None).unwrap();
        assert!(r.area_variation <= 10.0 * h * h, "{res}: {r:?}");
    }
}

#[test]
fn scherk_and_holomorphic_are_minimal() {
    for kind in [SurfaceKind::Scherk { eps: 0.1 }, SurfaceKind::Holomorphic { coeffs: vec![[0.0, 0.0], [0.0, 0.0], [0.1, 0.05]] }] {
        let spec = SurfaceSpec { kind, resolution: 129, radius: 1.0 };
        let t = generate_surface(&spec).unwrap();
        let h = spec.nominal_h();
        let k = bump_field([0.0, 0.1], 0.5, h, t.n()).unwrap();
        let r = first_variation_residual(&t.base, &k, None).unwrap();
        assert!(r.area_variation <= 10.0 * h * h, "{r:?}");
    }
}

#[test]
fn spiked_defects_are_seeded() {
    let kind = SurfaceKind::Spiked {
        base: Box::new(SurfaceKind::HarmonicQuadratic { eps: 0.05 }),
        defect_fraction: 1e-3,
        defect_mass: None,
        seed: 7,
    };
    let spec = SurfaceSpec { kind, resolution: 129, radius: 1.0 };
    let a = generate_surface(&spec).unwrap();
    let b = generate_surface(&spec).unwrap();
    assert_eq!(a.defects.len(), (1e-3f64 * 129.0 * 129.0).round() as usize);
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn steep_patches_are_rejected() {
    let spec = SurfaceSpec::new(SurfaceKind::HarmonicQuadratic { eps: 0.5 });
    assert!(generate_surface(&spec).is_err());
    let bad = SurfaceSpec { resolution: 20, ..SurfaceSpec::new(SurfaceKind::Plane) };
    assert!(generate_surface(&bad).is_err());
}

#[test]
fn sampling_over_a_tilted_frame_stays_on_the_surface() {
    let kind = SurfaceKind::Enneper { eps: 0.15 };
    let spec = SurfaceSpec::new(kind.clone());
    let frame = Frame::from_rotation(2, 1, plane_rotation(3, 0, 2, 0.07) * plane_rotation(3, 1, 2, -0.04)).unwrap();
    let t = sample_surface(&spec, &frame, [0.1, 0.05], 0.25, 1.0 / 64.0).unwrap();
    for j in (0..t.base.side()).step_by(5) {
        for i in (0..t.base.side()).step_by(5) {
            let p = t.node_point(i, j);
            let z = kind.value([p[0], p[1]]).unwrap();
            assert!((p[2] - z[0]).abs() < 1e-12);
        }
    }
}
