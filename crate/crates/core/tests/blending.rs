use center_manifold::blending::partition::{multi_index, tensor_norm, MAX_ORDER, PARTIALS, SUPPORT};
use center_manifold::blending::{blend_fields, bump_partition, derivatives_at, dyadic_grid, BlendedSurface};
use center_manifold::grid::GridFunction;
use center_manifold::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn local_graphs<F: Fn([f64; 2]) -> f64>(k: u32, f: F) -> Vec<GridFunction<f64>> {
    let grid = dyadic_grid(k, 6).unwrap();
    let h = grid.step();
    (0..grid.cubes.len())
        .map(|i| GridFunction::from_fn(grid.center(i), 8.0 * h, h, 1, |x, v| v[0] = f(x)).unwrap())
        .collect()
}

fn blended<F: Fn([f64; 2]) -> f64>(k: u32, sub: usize, f: F) -> BlendedSurface {
    let grid = dyadic_grid(k, 6).unwrap();
    let pou = bump_partition(&grid).unwrap();
    let gs = local_graphs(k, f);
    let refs: Vec<&GridFunction<f64>> = gs.iter().collect();
    blend_fields(&refs, &pou, sub).unwrap()
}

#[test]
fn partition_sums_to_one_with_vanishing_derivatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 7..=9 {
        let pou = bump_partition(&dyadic_grid(k, 6).unwrap()).unwrap();
        let r = pou.grid.q_radius();
        let scale = (k as f64).exp2();
        for _ in 0..10_000 {
            let q = [rng.gen_range(-r..=r), rng.gen_range(-r..=r)];
            let s = pou.partial_sums(q);
            assert!((s[0] - 1.0).abs() <= 1e-12);
            for l in 1..=MAX_ORDER {
                for b in 0..=l {
                    let v = s[multi_index(l - b, b)] / scale.powi(l as i32);
                    assert!(v.abs() <= 1e-9, "k={k} l={l}: {v:e}");
                }
            }
        }
    }
}

#[test]
fn scaled_norms_follow_chain_rule() {
    let pou = bump_partition(&dyadic_grid(8, 6).unwrap()).unwrap();
    let idx = pou.grid.index_of([1, -2]).unwrap();
    let c = pou.grid.center(idx);
    let h = pou.grid.step();
    let mut sup = [0.0f64; MAX_ORDER + 1];
    for a in 0..=320 {
        for b in 0..=320 {
            let s = [-SUPPORT + a as f64 / 128.0, -SUPPORT + b as f64 / 128.0];
            let p = pou.partials(idx, [c[0] + h * s[0], c[1] + h * s[1]]);
            for (l, m) in sup.iter_mut().enumerate() {
                let parts: Vec<f64> = (0..=l).map(|b| p[multi_index(l - b, b)]).collect();
                *m = m.max(tensor_norm(&parts));
            }
        }
    }
    for l in 0..=MAX_ORDER {
        assert_eq!(sup[l], pou.scaled_norms[l]);
        assert_eq!(pou.scaled_norms[l], pou.profile_norms[l] * 256f64.powi(l as i32));
    }
}

#[test]
fn bumps_of_non_adjacent_cubes_are_disjoint() {
    let pou = bump_partition(&dyadic_grid(7, 6).unwrap()).unwrap();
    let r = pou.grid.q_radius();
    let h = pou.grid.step() / 8.0;
    let side = (2.0 * r / h).round() as i64;
    for a in 0..=side {
        for b in 0..=side {
            let q = [-r + a as f64 * h, -r + b as f64 * h];
            let act = pou.active(q);
            for &i in &act {
                for &j in &act {
                    assert!(pou.grid.adjacency[i].contains(&j));
                }
            }
            for i in 0..pou.grid.cubes.len() {
                if !act.contains(&i) {
                    assert_eq!(pou.value(i, q), 0.0);
                }
            }
        }
    }
}

#[test]
fn equal_charts_reproduce_the_graph() {
    let f = |x: [f64; 2]| 0.3 + 0.2 * x[0] - 0.1 * x[1] + 0.7 * (x[0] * x[0] - x[1] * x[1]) + 0.4 * x[0] * x[1];
    let hk = blended(7, 4, f);
    let side = hk.values.side();
    let mut worst = [0.0f64; 3];
    for j in 0..side {
        for i in 0..side {
            let x = hk.values.node(i, j);
            worst[0] = worst[0].max((hk.values.value(i, j)[0] - f(x)).abs());
            let d1 = hk.derivatives[0].value(i, j);
            worst[1] = worst[1].max((d1[0] - (0.2 + 1.4 * x[0] + 0.4 * x[1])).abs());
            worst[1] = worst[1].max((d1[1] - (-0.1 - 1.4 * x[1] + 0.4 * x[0])).abs());
            let d2 = hk.derivatives[1].value(i, j);
            worst[2] = worst[2].max((d2[0] - 1.4).abs().max((d2[1] - 0.4).abs()).max((d2[2] + 1.4).abs()));
        }
    }
    assert!(worst[0] < 1e-12, "{worst:?}");
    assert!(worst[1] < 1e-9, "{worst:?}");
    assert!(worst[2] < 1e-6, "{worst:?}");
    assert!(hk.sup_norm(4) < 1e-2);
}

#[test]
fn blend_of_zero_and_one_is_convex() {
    let grid = dyadic_grid(7, 6).unwrap();
    let pou = bump_partition(&grid).unwrap();
    let h = grid.step();
    let gs: Vec<GridFunction<f64>> = grid
        .cubes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let v = if c[0] > 0 { 1.0 } else { 0.0 };
            GridFunction::from_fn(grid.center(i), 8.0 * h, h, 1, |_, out| out[0] = v).unwrap()
        })
        .collect();
    let refs: Vec<&GridFunction<f64>> = gs.iter().collect();
    let hk = blend_fields(&refs, &pou, 4).unwrap();
    let vals = &hk.values.values;
    assert!(vals.iter().all(|v| (-1e-15..=1.0 + 1e-15).contains(v)));
    assert!(vals.iter().any(|v| *v > 0.01 && *v < 0.99));
    assert!(hk.derivatives[0].values.iter().all(|v| v.is_finite()));
}

#[test]
fn leibniz_fields_match_differences_of_values() {
    let f = |x: [f64; 2]| (3.0 * x[0]).sin() * (2.0 * x[1]).cos() + x[0] * x[1] * x[1];
    let mut errs = Vec::new();
    for k in [7u32, 8] {
        let hk = blended(k, 4, f);
        let v = &hk.values;
        let d = &hk.derivatives[0];
        let side = v.side();
        let mut worst = 0.0f64;
        for j in 2..side - 2 {
            for i in 2..side - 2 {
                worst = worst.max((v.partial(i, j, 1, 0, 0) - d.value(i, j)[0]).abs());
                worst = worst.max((v.partial(i, j, 0, 1, 0) - d.value(i, j)[1]).abs());
            }
        }
        errs.push(worst);
    }
    assert!(errs[0] < 1e-3, "{errs:?}");
    assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
}

#[test]
fn third_derivative_at_centers() {
    let f = |x: [f64; 2]| 0.5 * x[0].powi(3) - x[0] * x[1] * x[1] + 0.2 * x[1].powi(3);
    let grid = dyadic_grid(7, 6).unwrap();
    let pou = bump_partition(&grid).unwrap();
    let gs = local_graphs(7, f);
    let refs: Vec<&GridFunction<f64>> = gs.iter().collect();
    let hk = blend_fields(&refs, &pou, 4).unwrap();
    let i = grid.index_of([1, 0]).unwrap();
    let c = grid.center(i);
    let d = derivatives_at(&hk, c, 3).unwrap();
    let g3 = gs[i].derivative_tensor(gs[i].half, gs[i].half, 3);
    let scale = g3.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for b in 0..4 {
        assert!((d[3][b] - g3[b]).abs() <= 1e-8 * scale, "{:?} vs {:?}", d[3], g3);
    }
    // shifting a single neighbor changes D^3 h_k(c_i) through its bump derivatives
    let mut shifted = gs.clone();
    let j = grid.index_of([2, 0]).unwrap();
    shifted[j] = shifted[j].map_values(|v| v + 1e-6);
    let refs: Vec<&GridFunction<f64>> = shifted.iter().collect();
    let hk2 = blend_fields(&refs, &pou, 4).unwrap();
    let d2 = derivatives_at(&hk2, c, 3).unwrap();
    let p = pou.partials(j, c);
    for b in 0..4 {
        let expect = g3[b] + 1e-6 * p[multi_index(3 - b, b)];
        assert!((d2[3][b] - expect).abs() <= 1e-8 * scale.max(expect.abs()));
    }
    assert!(p[multi_index(3, 0)] != 0.0);
}

#[test]
fn json_round_trip_and_collar() {
    let hk = blended(7, 2, |x| x[0] * x[1]);
    let back = BlendedSurface::from_json(&hk.to_json().unwrap()).unwrap();
    assert_eq!(back.values, hk.values);
    assert_eq!(back.derivatives, hk.derivatives);
    let q = [0.003, -0.007];
    let exact = derivatives_at(&hk, q, 2).unwrap();
    let approx = derivatives_at(&back, q, 2).unwrap();
    for l in 0..=2 {
        for (a, b) in exact[l].iter().zip(&approx[l]) {
            assert!((a - b).abs() < 1e-6);
        }
    }
    assert!(matches!(derivatives_at(&hk, [0.02, 0.0], 1), Err(Error::BoundaryCollar)));
    let csv = hk.csv_table(1);
    assert!(csv.starts_with("q1,q2,d1_0_0,d1_0_1\n"));
    assert_eq!(csv.lines().count(), 1 + hk.values.side().pow(2));
    let _ = PARTIALS;
}

#[test]
fn missing_chart_is_reported() {
    let grid = dyadic_grid(7, 6).unwrap();
    let pou = bump_partition(&grid).unwrap();
    let gs = local_graphs(7, |_| 0.0);
    let refs: Vec<&GridFunction<f64>> = gs.iter().skip(1).collect();
    assert!(matches!(blend_fields(&refs, &pou, 2), Err(Error::MissingInterpolant([-3, -3]))));
}
