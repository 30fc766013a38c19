use center_manifold::config::ConstantsConfig;
use center_manifold::geometry::{tangent_plane, Frame};
use center_manifold::harness::{sample_surface, SurfaceKind, SurfaceSpec};
use center_manifold::interpolation::{interpolate, Interpolant};

const K: i32 = 7;

fn setup(kind: SurfaceKind, p0: [f64; 2], tangent: bool) -> (Interpolant, f64) {
    let cfg = ConstantsConfig::default();
    let h = 2f64.powi(-K);
    let rho = cfg.interp_radius_const * h;
    let spec = SurfaceSpec::new(kind.clone());
    let z = kind.value(p0).unwrap();
    let p = vec![p0[0], p0[1], z[0]];
    let reference = Frame::reference(2, 1);
    let frame = if tangent {
        let coarse = sample_surface(&spec, &reference, [0.0, 0.0], 0.5, h).unwrap();
        tangent_plane(&coarse, &p).unwrap()
    } else {
        reference
    };
    let local = frame.to_frame(&p);
    let t = sample_surface(&spec, &frame, [local[0], local[1]], 8.0 * rho + 8.0 * h, h).unwrap();
    (interpolate(&t, &p, rho, &cfg, h).unwrap(), rho)
}

#[test]
fn flat_plane_interpolates_to_zero() {
    let (it, _) = setup(SurfaceKind::Plane, [0.0, 0.0], false);
    assert!(it.g.max_abs() < 1e-15);
    assert!(it.jets.iter().flatten().all(|v| v.abs() < 1e-12));
}

#[test]
fn harmonic_quadratic_is_reproduced() {
    let eps = 0.1;
    let (it, rho) = setup(SurfaceKind::HarmonicQuadratic { eps }, [0.0, 0.0], false);
    let h = it.g.h;
    let mut err: f64 = 0.0;
    for j in 0..it.g.side() {
        for i in 0..it.g.side() {
            let x = it.g.node(i, j);
            err = err.max((it.g.value(i, j)[0] - eps * (x[0] * x[0] - x[1] * x[1])).abs());
        }
    }
    let e = it.excess;
    assert!(err <= 4.0 * (h * h + rho * e.powf(1.05)), "{err}");
    let d2 = &it.jets[2];
    assert!((d2[0] - 2.0 * eps).abs() < 0.05 * 2.0 * eps, "{d2:?}");
    assert!(d2[1].abs() < 0.05 * 2.0 * eps);
    assert!((d2[2] + 2.0 * eps).abs() < 0.05 * 2.0 * eps);
    let back = Interpolant::from_json(&it.to_json().unwrap()).unwrap();
    assert_eq!(back.g, it.g);
}

#[test]
fn tangent_plane_interpolation_agrees_with_reference() {
    let kind = SurfaceKind::HarmonicQuadratic { eps: 0.1 };
    let p0 = [0.1, -0.05];
    let (a, rho) = setup(kind.clone(), p0, false);
    let (b, _) = setup(kind, p0, true);
    assert_eq!(a.g.center, b.g.center);
    let diff = a.g.values.iter().zip(&b.g.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    println!("overlap difference {diff:e}, rho^3.1 = {:e}", rho.powf(3.1));
    assert!(diff <= rho.powf(3.1), "{diff}");
}
