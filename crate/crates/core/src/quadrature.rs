//! Cell quadrature on lattices: exact disk/cell intersection moments and
//! sub-sampled weights for general regions.
//!
//! Every node owns the cell `[x - h/2, x + h/2]^2`. An integral over a region `D`
//! is approximated by `sum_k g_k |C_k ∩ D| + ∇g_k · ∫_{C_k ∩ D} (x - x_k)`, which is
//! second-order accurate for cut cells as well as for interior ones.

use crate::grid::GridFunction;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadNode {
    pub i: usize,
    pub j: usize,
    pub area: f64,
    /// First moment of the cut cell about its node.
    pub moment: [f64; 2],
}

/// Area and first moments `(|R ∩ D|, ∫x, ∫y)` of the intersection of the rectangle
/// `[x0, x1] x [y0, y1]` with the disk of radius `r` centered at the origin.
pub fn disk_rect_moments(r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> [f64; 3] {
    let a = x0.max(-r);
    let b = x1.min(r);
    if a >= b || y0 >= r || y1 <= -r || y0 >= y1 {
        return [0.0; 3];
    }
    let r2 = r * r;
    let s = |x: f64| (r2 - x * x).max(0.0).sqrt();
    let big_s = |x: f64| 0.5 * (x * s(x) + r2 * (x / r).clamp(-1.0, 1.0).asin());
    let xs_int = |x: f64| -(r2 - x * x).max(0.0).powf(1.5) / 3.0;
    let s2_int = |x: f64| r2 * x - x * x * x / 3.0;

    let mut cuts = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < r {
            let c = (r2 - y * y).sqrt();
            for x in [-c, c] {
                if x > a && x < b {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());

    let mut out = [0.0; 3];
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v - u <= 0.0 {
            continue;
        }
        let mid = 0.5 * (u + v);
        let sm = s(mid);
        let upper_is_s = sm < y1;
        let lower_is_s = -sm > y0;
        let up = if upper_is_s { sm } else { y1 };
        let lo = if lower_is_s { -sm } else { y0 };
        if up <= lo {
            continue;
        }
        // ∫ (U - L)
        let int_u = if upper_is_s { big_s(v) - big_s(u) } else { y1 * (v - u) };
        let int_l = if lower_is_s { -(big_s(v) - big_s(u)) } else { y0 * (v - u) };
        out[0] += int_u - int_l;
        // ∫ x (U - L)
        let x2 = 0.5 * (v * v - u * u);
        let xu = if upper_is_s { xs_int(v) - xs_int(u) } else { y1 * x2 };
        let xl = if lower_is_s { -(xs_int(v) - xs_int(u)) } else { y0 * x2 };
        out[1] += xu - xl;
        // ∫ (U^2 - L^2) / 2
        let u2 = if upper_is_s { s2_int(v) - s2_int(u) } else { y1 * y1 * (v - u) };
        let l2 = if lower_is_s { s2_int(v) - s2_int(u) } else { y0 * y0 * (v - u) };
        out[2] += 0.5 * (u2 - l2);
    }
    out
}

/// Quadrature nodes for the disk `|x - c| < r` on the lattice of `grid`.
/// Returns `None` if the disk is not covered by the lattice cells.
pub fn disk_nodes(grid: &GridFunction<f64>, c: [f64; 2], r: f64) -> Option<Vec<QuadNode>> {
    let h = grid.h;
    let lo = grid.node(0, 0);
    let side = grid.side();
    let ext = grid.radius() + 0.5 * h;
    if (0..2).any(|a| (c[a] - grid.center[a]).abs() + r > ext * (1.0 + 1e-12)) {
        return None;
    }
    let range = |a: usize| {
        let first = (((c[a] - r - lo[a]) / h) - 0.5).floor().max(0.0) as usize;
        let last = ((((c[a] + r - lo[a]) / h) + 0.5).ceil() as usize).min(side - 1);
        first..=last
    };
    let half = 0.5 * h;
    let full = h * h;
    let mut out = Vec::new();
    for j in range(1) {
        for i in range(0) {
            let x = grid.node(i, j);
            let dx = x[0] - c[0];
            let dy = x[1] - c[1];
            // farthest and nearest corner distances decide the cheap cases
            let far = (dx.abs() + half).hypot(dy.abs() + half);
            if far <= r {
                out.push(QuadNode { i, j, area: full, moment: [0.0; 2] });
                continue;
            }
            let nx = (dx.abs() - half).max(0.0);
            let ny = (dy.abs() - half).max(0.0);
            if nx.hypot(ny) >= r {
                continue;
            }
            let [area, mx, my] = disk_rect_moments(r, dx - half, dx + half, dy - half, dy + half);
            if area > 0.0 {
                out.push(QuadNode { i, j, area, moment: [mx - dx * area, my - dy * area] });
            }
        }
    }
    Some(out)
}

/// Quadrature nodes for a general region given by a membership predicate on base
/// points, restricted to nodes within the bounding box `[c - r, c + r]^2`. Cells that
/// are neither fully in nor fully out are split into `sub x sub` sub-cells.
pub fn region_nodes<F>(grid: &GridFunction<f64>, c: [f64; 2], r: f64, sub: usize, inside: F) -> Vec<QuadNode>
where
    F: Fn([f64; 2]) -> bool,
{
    let h = grid.h;
    let lo = grid.node(0, 0);
    let side = grid.side();
    let range = |a: usize| {
        let first = (((c[a] - r - lo[a]) / h) - 1.0).floor().max(0.0) as usize;
        let last = ((((c[a] + r - lo[a]) / h) + 1.0).ceil().max(0.0) as usize).min(side - 1);
        first..=last
    };
    let half = 0.5 * h;
    let mut out = Vec::new();
    for j in range(1) {
        for i in range(0) {
            let x = grid.node(i, j);
            let probes = [
                [x[0] - half, x[1] - half],
                [x[0] + half, x[1] - half],
                [x[0] - half, x[1] + half],
                [x[0] + half, x[1] + half],
                x,
            ];
            let hits = probes.iter().filter(|p| inside(**p)).count();
            if hits == 5 {
                out.push(QuadNode { i, j, area: h * h, moment: [0.0; 2] });
                continue;
            }
            if hits == 0 {
                continue;
            }
            let sh = h / sub as f64;
            let mut area = 0.0;
            let mut m = [0.0; 2];
            for b in 0..sub {
                for a in 0..sub {
                    let off = [-half + (a as f64 + 0.5) * sh, -half + (b as f64 + 0.5) * sh];
                    if inside([x[0] + off[0], x[1] + off[1]]) {
                        area += sh * sh;
                        m[0] += off[0] * sh * sh;
                        m[1] += off[1] * sh * sh;
                    }
                }
            }
            if area > 0.0 {
                out.push(QuadNode { i, j, area, moment: m });
            }
        }
    }
    out
}

/// Integrates a scalar nodal field over the quadrature nodes, using its
/// finite-difference gradient for the first-moment correction.
pub fn integrate(nodes: &[QuadNode], field: &GridFunction<f64>) -> f64 {
    debug_assert_eq!(field.n, 1);
    let mut acc = 0.0;
    for q in nodes {
        acc += field.value(q.i, q.j)[0] * q.area;
        if q.moment != [0.0, 0.0] {
            acc += field.partial(q.i, q.j, 1, 0, 0) * q.moment[0] + field.partial(q.i, q.j, 0, 1, 0) * q.moment[1];
        }
    }
    acc
}

/// Integrates several nodal fields sampled on the same lattice (`field.n` components).
pub fn integrate_components(nodes: &[QuadNode], field: &GridFunction<f64>) -> Vec<f64> {
    let mut acc = vec![0.0; field.n];
    for q in nodes {
        let v = field.value(q.i, q.j);
        for c in 0..field.n {
            acc[c] += v[c] * q.area;
            if q.moment != [0.0, 0.0] {
                acc[c] += field.partial(q.i, q.j, 1, 0, c) * q.moment[0]
                    + field.partial(q.i, q.j, 0, 1, c) * q.moment[1];
            }
        }
    }
    acc
}

pub fn total_area(nodes: &[QuadNode]) -> f64 {
    nodes.iter().map(|q| q.area).sum()
}
