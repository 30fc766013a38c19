use center_manifold::geometry::excess::{ball_excess, best_plane};
use center_manifold::geometry::frame::plane_rotation;
use center_manifold::geometry::multivector::{dot, norm};
use center_manifold::geometry::{
    cylindrical_excess, is_admissible, spherical_excess, tangent_plane, Defect, Frame, Region, SampledCurrent,
};
use center_manifold::config::ConstantsConfig;
use center_manifold::grid::GridFunction;
use nalgebra::DMatrix;
use proptest::prelude::*;
use std::f64::consts::PI;

fn graph<F: Fn([f64; 2]) -> f64>(frame: Frame, h: f64, radius: f64, f: F) -> SampledCurrent {
    let g = GridFunction::from_fn([0.0, 0.0], radius, h, 1, |x: [f64; 2], v: &mut [f64]| v[0] = f(x)).unwrap();
    SampledCurrent::graph(frame, g).unwrap()
}

fn reference_cylinder(r: f64) -> Region {
    Region::cylinder(&Frame::reference(2, 1), [0.0, 0.0], r).unwrap()
}

#[test]
fn flat_plane_has_zero_excess() {
    let t = graph(Frame::reference(2, 1), 1.0 / 32.0, 1.5, |_| 0.0);
    let rep = cylindrical_excess(&t, &reference_cylinder(1.0), &Frame::reference(2, 1)).unwrap();
    assert!(rep.value.abs() < 1e-12, "{}", rep.value);
    assert!(rep.mass_excess.unwrap().abs() < 1e-12);
    let sph = spherical_excess(&t, &Region::ball(vec![0.1, 0.0, 0.0], 0.7).unwrap()).unwrap();
    assert!(sph.value.abs() < 1e-12);
}

#[test]
fn linear_graph_cylinder_excess_is_exact() {
    let t = graph(Frame::reference(2, 1), 1.0 / 32.0, 1.5, |x| 0.5 * x[0]);
    let rep = cylindrical_excess(&t, &reference_cylinder(1.0), &Frame::reference(2, 1)).unwrap();
    assert!((rep.value - (1.25f64.sqrt() - 1.0)).abs() < 1e-10, "{}", rep.value);
}

#[test]
fn quadratic_cylinder_excess_matches_radial_integral() {
    for eps in [0.1, 0.05] {
        let t = graph(Frame::reference(2, 1), 1.0 / 64.0, 1.25, |x| eps * (x[0] * x[0] - x[1] * x[1]));
        let rep = cylindrical_excess(&t, &reference_cylinder(1.0), &Frame::reference(2, 1)).unwrap();
        let e2 = eps * eps;
        let oracle = 2.0 * (((1.0 + 4.0 * e2).powf(1.5) - 1.0) / (12.0 * e2) - 0.5);
        assert!((rep.value - oracle).abs() < 1e-4 * oracle, "{eps}: {} vs {oracle}", rep.value);
        assert!((rep.value - e2).abs() < 0.02 * e2);
    }
}

#[test]
fn tilted_plane_spherical_excess_vanishes_at_the_tilt() {
    let t = graph(Frame::reference(2, 1), 1.0 / 32.0, 1.5, |x| 0.3 * x[0] + 0.4 * x[1]);
    let b = Region::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap();
    let rep = spherical_excess(&t, &b).unwrap();
    assert!(rep.value.abs() < 1e-8, "{}", rep.value);
    let l = DMatrix::from_row_slice(1, 2, &[0.3, 0.4]);
    let exact = Frame::graph_plane(&Frame::reference(2, 1), &l).unwrap();
    assert!(rep.plane.plane_distance(&exact) < 1e-6);
}

/// Independent polar-grid evaluation of the ball excess of a graph over `e_3`,
/// minimized in closed form (`M - |W|`) since every 2-vector in `R^3` is simple.
fn polar_ball_excess<F: Fn([f64; 2]) -> f64, G: Fn([f64; 2]) -> [f64; 2]>(f: F, df: G, r: f64) -> f64 {
    let (nr, nt) = (1200, 1200);
    let (mut m, mut w) = (0.0, [0.0; 3]);
    for a in 0..nr {
        let rho = (a as f64 + 0.5) * r / nr as f64;
        for b in 0..nt {
            let th = (b as f64 + 0.5) * 2.0 * PI / nt as f64;
            let x = [rho * th.cos(), rho * th.sin()];
            let z = f(x);
            if rho * rho + z * z >= r * r {
                continue;
            }
            let g = df(x);
            let da = rho * (r / nr as f64) * (2.0 * PI / nt as f64);
            m += (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt() * da;
            w[0] += da;
            w[1] += g[1] * da;
            w[2] += -g[0] * da;
        }
    }
    (m - norm(&w)) / (PI * r * r)
}

#[test]
fn spherical_excess_matches_polar_oracle() {
    let eps = 0.3;
    let f = move |x: [f64; 2]| eps * (x[0] * x[0] - x[1] * x[1]) + 0.2 * x[0];
    let df = move |x: [f64; 2]| [2.0 * eps * x[0] + 0.2, -2.0 * eps * x[1]];
    let t = graph(Frame::reference(2, 1), 1.0 / 64.0, 1.0, f);
    let rep = spherical_excess(&t, &Region::ball(vec![0.0, 0.0, 0.0], 0.5).unwrap()).unwrap();
    let oracle = polar_ball_excess(f, df, 0.5);
    assert!((rep.value - oracle).abs() < 2e-3 * oracle, "{} vs {oracle}", rep.value);
}

#[test]
fn cylinder_over_tilted_plane() {
    let theta: f64 = 0.2;
    let t = graph(Frame::reference(2, 1), 1.0 / 64.0, 1.5, |_| 0.0);
    let tilted = Frame::from_rotation(2, 1, plane_rotation(3, 0, 2, theta)).unwrap();
    let c = Region::cylinder(&tilted, [0.0, 0.0], 0.8).unwrap();
    let rep = cylindrical_excess(&t, &c, &tilted).unwrap();
    let cos = theta.cos();
    assert!((rep.value - (1.0 - cos) / cos).abs() < 3e-3 * (1.0 - cos), "{}", rep.value);
    assert!((rep.mass_excess.unwrap() - (1.0 / cos - 1.0)).abs() < 1e-4, "{:?}", rep.mass_excess.unwrap() - (1.0 / cos - 1.0));
}

#[test]
fn defects_add_vertical_mass() {
    let t = graph(Frame::reference(2, 1), 1.0 / 32.0, 1.5, |_| 0.0);
    let fin = Frame::from_rotation(2, 1, plane_rotation(3, 1, 2, PI / 2.0)).unwrap().orientation();
    let inside = Defect { position: vec![0.2, 0.1, 0.3], tangent: fin.clone(), mass: 0.05 };
    let outside = Defect { position: vec![2.0, 0.0, 0.0], tangent: fin, mass: 1.0 };
    let t = SampledCurrent::new(t.frame.clone(), t.base.clone(), vec![inside, outside], None).unwrap();
    let rep = cylindrical_excess(&t, &reference_cylinder(1.0), &Frame::reference(2, 1)).unwrap();
    assert!((rep.value - 0.05 / PI).abs() < 1e-12);
}

#[test]
fn admissibility_of_plane_and_tilt() {
    let cfg = ConstantsConfig::default();
    let flat = graph(Frame::reference(2, 1), 1.0 / 32.0, 1.5, |_| 0.0);
    let a = is_admissible(&flat, &[0.0, 0.0, 0.0], 0.5, &Frame::reference(2, 1), &cfg).unwrap();
    assert!(a.admissible && (a.margin - cfg.admissible_budget(0.5)).abs() < 1e-12);
    let steep = graph(Frame::reference(2, 1), 1.0 / 32.0, 1.5, |x| 0.8 * x[0]);
    let b = is_admissible(&steep, &[0.0, 0.0, 0.0], 0.5, &Frame::reference(2, 1), &cfg).unwrap();
    assert!(!b.admissible && b.margin < 0.0);
}

#[test]
fn tangent_plane_of_quadratic() {
    let t = graph(Frame::reference(2, 1), 1.0 / 32.0, 1.0, |x| 0.2 * (x[0] * x[0] - x[1] * x[1]));
    let p = [0.3, 0.2, 0.2 * (0.09 - 0.04)];
    let plane = tangent_plane(&t, &p).unwrap();
    let l = DMatrix::from_row_slice(1, 2, &[0.12, -0.08]);
    let exact = Frame::graph_plane(&Frame::reference(2, 1), &l).unwrap();
    assert!(plane.plane_distance(&exact) < 1e-10);
}

#[test]
fn masked_columns_have_no_tangent() {
    let t = graph(Frame::reference(2, 1), 0.25, 1.0, |_| 0.0);
    let mut mask = vec![true; t.base.node_count()];
    mask[4 * t.base.side() + 4] = false;
    let t = SampledCurrent::new(t.frame.clone(), t.base.clone(), vec![], Some(mask)).unwrap();
    assert!(tangent_plane(&t, &[0.0, 0.0, 0.0]).is_err());
    assert!(tangent_plane(&t, &[0.5, 0.0, 0.0]).is_ok());
}

#[test]
fn best_plane_for_codimension_two() {
    let base = Frame::reference(2, 2);
    let l = DMatrix::from_row_slice(2, 2, &[0.1, -0.2, 0.05, 0.3]);
    let target = Frame::graph_plane(&base, &l).unwrap();
    let w: Vec<f64> = target.orientation().iter().map(|v| 2.5 * v).collect();
    let (plane, score) = best_plane(&base, &w).unwrap();
    assert!((score - 2.5).abs() < 1e-10);
    assert!(plane.plane_distance(&target) < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn excess_is_nonnegative(a in -0.5f64..0.5, b in -0.5f64..0.5, c in -0.5f64..0.5, r in 0.3f64..0.9) {
        let t = graph(Frame::reference(2, 1), 1.0 / 32.0, 1.0, move |x| a * x[0] * x[0] + b * x[0] * x[1] + c * x[1]);
        let rep = spherical_excess(&t, &Region::ball(vec![0.0, 0.0, 0.0], r).unwrap()).unwrap();
        prop_assert!(rep.value >= -1e-10);
        let cyl = cylindrical_excess(&t, &reference_cylinder(r), &Frame::reference(2, 1)).unwrap();
        prop_assert!(cyl.value >= -1e-10);
        prop_assert!(rep.value <= ball_excess(&t, &Region::ball(vec![0.0; 3], r).unwrap(), &Frame::reference(2, 1)).unwrap() + 1e-12);
    }

    #[test]
    fn spherical_excess_is_rotation_invariant(angle in -0.3f64..0.3, axis in 0usize..2) {
        let f = |x: [f64; 2]| 0.2 * (x[0] * x[0] - x[1] * x[1]) + 0.1 * x[1];
        let t = graph(Frame::reference(2, 1), 1.0 / 32.0, 1.0, f);
        let rot = plane_rotation(3, axis, 2, angle);
        let t2 = graph(t.frame.rotated(&rot).unwrap(), 1.0 / 32.0, 1.0, f);
        let b = Region::ball(vec![0.05, 0.0, 0.0], 0.6).unwrap();
        let moved = (&rot * nalgebra::DVector::from_column_slice(&b.center)).iter().copied().collect();
        let b2 = Region::ball(moved, 0.6).unwrap();
        let e1 = spherical_excess(&t, &b).unwrap();
        let e2 = spherical_excess(&t2, &b2).unwrap();
        prop_assert!((e1.value - e2.value).abs() < 1e-9 * (1.0 + e1.value));
        let o1 = e1.plane.orientation();
        let o2 = e2.plane.rotated(&rot.transpose()).unwrap().orientation();
        prop_assert!((dot(&o1, &o2) - 1.0).abs() < 1e-6);
    }
}
