//! Gauss-Legendre rules and cell integrals of kernels that blow up at the origin.

use crate::geometry::Point2;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

pub(crate) fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Integral of `f` over `[a, b]` with a composite `panels`-panel 8-point rule.
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gl8();
    let step = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * step;
        for (xi, wi) in x.iter().zip(w) {
            sum += wi * f(mid + 0.5 * step * xi);
        }
    }
    0.5 * step * sum
}

/// `∫_0^{π/4} cos(θ)^p dθ`.
pub fn cos_power_integral(p: f64) -> f64 {
    integrate_1d(|t| t.cos().powf(p), 0.0, PI / 4.0, 8)
}

/// `∫ |y|^{-beta} dy` over the square `[-a, a]^2`, `beta < 2`.
pub fn square_power_integral(beta: f64, a: f64) -> f64 {
    assert!(beta < 2.0);
    8.0 / (2.0 - beta) * a.powf(2.0 - beta) * cos_power_integral(beta - 2.0)
}

/// `∫ |y|^{-q} dy` over the exterior of the square `[-a, a]^2`, `q > 2`.
pub fn square_exterior_power_integral(q: f64, a: f64) -> f64 {
    assert!(q > 2.0);
    8.0 / (q - 2.0) * a.powf(2.0 - q) * cos_power_integral(q - 2.0)
}

/// Integral of a vector-valued `f` over the square with the given centre and
/// half side. Squares close to the origin are split recursively, so `f` may
/// blow up there as long as the origin is not inside the square.
pub fn cell_integral<const K: usize>(
    f: &impl Fn(Point2) -> [f64; K],
    center: Point2,
    half: f64,
) -> [f64; K] {
    let mut out = [0.0; K];
    cell_integral_rec(f, center, half, 0, &mut out);
    out
}

fn cell_integral_rec<const K: usize>(
    f: &impl Fn(Point2) -> [f64; K],
    c: Point2,
    half: f64,
    depth: usize,
    out: &mut [f64; K],
) {
    let gap = (c.x.abs() - half).max(0.0).hypot((c.y.abs() - half).max(0.0));
    if gap < 1.5 * half && depth < 10 {
        let q = 0.5 * half;
        for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
            cell_integral_rec(f, Point2::new(c.x + sx * q, c.y + sy * q), q, depth + 1, out);
        }
        return;
    }
    let (x, w) = gl8();
    let jac = half * half;
    for (xi, wi) in x.iter().zip(w) {
        for (yj, wj) in x.iter().zip(w) {
            let v = f(Point2::new(c.x + half * xi, c.y + half * yj));
            for k in 0..K {
                out[k] += wi * wj * jac * v[k];
            }
        }
    }
}

/// Moments `∫ g(z) dz` over the square `[c − half, c + half]²` containing
/// the origin, with `g` radially separable as `g(r, θ) = a(θ) r^{q}`, done in
/// polar coordinates about the origin: `∫ a(θ) ρ(θ)^{q+2}/(q+2) dθ`.
/// `a` returns up to `K` angular factors sharing the same power `q`.
pub fn polar_square_moments<const K: usize>(
    center: Point2,
    half: f64,
    q: f64,
    a: impl Fn(f64) -> [f64; K],
) -> [f64; K] {
    assert!(q > -2.0);
    let x0 = center.x - half;
    let x1 = center.x + half;
    let y0 = center.y - half;
    let y1 = center.y + half;
    debug_assert!(x0 <= 0.0 && x1 >= 0.0 && y0 <= 0.0 && y1 >= 0.0);
    let corners = [(x1, y0), (x1, y1), (x0, y1), (x0, y0)];
    let mut out = [0.0; K];
    let (gx, gw) = gl8();
    // each edge seen from the origin, edge k runs corner k -> corner k+1
    for k in 0..4 {
        let (ax, ay) = corners[k];
        let (bx, by) = corners[(k + 1) % 4];
        let t0 = ay.atan2(ax);
        let span = (ax * by - ay * bx).atan2(ax * bx + ay * by);
        if span <= 0.0 {
            continue;
        }
        let t1 = t0 + span;
        // distance from the origin to the edge line along the normal
        let (nx, ny, d) = match k {
            0 => (1.0, 0.0, x1),
            1 => (0.0, 1.0, y1),
            2 => (-1.0, 0.0, -x0),
            _ => (0.0, -1.0, -y0),
        };
        if d <= 0.0 {
            continue;
        }
        let panels = 4;
        let step = (t1 - t0) / panels as f64;
        for p in 0..panels {
            let mid = t0 + (p as f64 + 0.5) * step;
            for (xi, wi) in gx.iter().zip(gw) {
                let t = mid + 0.5 * step * xi;
                let cosn = t.cos() * nx + t.sin() * ny;
                if cosn <= 0.0 {
                    continue;
                }
                let rho = d / cosn;
                let radial = rho.powf(q + 2.0) / (q + 2.0);
                let ang = a(t);
                for j in 0..K {
                    out[j] += 0.5 * step * wi * ang[j] * radial;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let i8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((i8 - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn square_integral_matches_unit_square_area_for_beta_zero() {
        assert!((square_power_integral(0.0, 0.5) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn square_integral_beta_one_closed_form() {
        // ∫_{[-1,1]^2} 1/|y| = 8 asinh(1)
        let v = square_power_integral(1.0, 1.0);
        assert!((v - 8.0 * 1f64.asinh()).abs() < 1e-12);
    }

    #[test]
    fn polar_moments_match_closed_form_and_offset_cells() {
        let v = polar_square_moments(Point2::ORIGIN, 0.5, -1.5, |_| [1.0])[0];
        assert!((v - square_power_integral(1.5, 0.5)).abs() < 1e-10, "{v}");
        // off-centre square: compare with the fine midpoint oracle on |z|^{-1}
        let c = Point2::new(0.2, -0.1);
        let v = polar_square_moments(c, 0.5, -1.0, |_| [1.0])[0];
        let n = 3000;
        let h = 1.0 / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let p = Point2::new(c.x - 0.5 + (i as f64 + 0.5) * h, c.y - 0.5 + (j as f64 + 0.5) * h);
                s += 1.0 / p.norm();
            }
        }
        s *= h * h;
        assert!((v - s).abs() / s < 2e-3, "{v} {s}");
    }

    #[test]
    fn exterior_integral_q4() {
        let v = square_exterior_power_integral(4.0, 2.0);
        assert!((v - (PI + 2.0) / (2.0 * 4.0)).abs() < 1e-13);
    }

    #[test]
    fn cell_integral_of_near_singular_kernel() {
        // cell [0.5, 1.5] x [-0.5, 0.5] of |y|^{-1.5}, against a fine midpoint oracle
        let f = |p: Point2| [p.norm().powf(-1.5)];
        let v = cell_integral(&f, Point2::new(1.0, 0.0), 0.5)[0];
        let n = 4000;
        let h = 1.0 / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let p = Point2::new(0.5 + (i as f64 + 0.5) * h, -0.5 + (j as f64 + 0.5) * h);
                s += p.norm().powf(-1.5);
            }
        }
        s *= h * h;
        assert!((v - s).abs() / s < 1e-6, "{v} {s}");
    }
}
