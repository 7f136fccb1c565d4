//! Fractional integrals `K_α φ = A(2, α) φ ∗ |x|^{α−2}` and, for negative
//! order, the difference form `K_{−a} g(x) = A(2, −a) ∫ (g(x+y) − g(x)) |y|^{−2−a} dy`.

use crate::error::{Error, Result};
use crate::grid::{GridField, GridSpec};
use crate::kernels::NEAR;
use crate::geometry::Point2;
use crate::quadrature::{cell_integral, polar_square_moments, square_exterior_power_integral, square_power_integral};
use crate::special::riesz_constant;
use crate::spectral::Convolver;

fn warn_boundary(f: &GridField, what: &str) {
    let b = f.boundary_fraction();
    if b > 0.01 {
        log::warn!("{what}: {:.2}% of the input lies in the outer frame", 100.0 * b);
    }
}

/// `K_α φ` for `α ∈ (0, 2)` sampled on a concentric grid `out` with the
/// same spacing; the input is taken as zero off its grid.
pub fn frac_integral_on(phi: &GridField, alpha: f64, out: GridSpec) -> Result<GridField> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!("positive order must lie in (0, 2), got {alpha}")));
    }
    if (phi.spec.h() - out.h()).abs() > 1e-12 * out.h() {
        return Err(Error::InvalidParameter("input and output grids need equal spacing".into()));
    }
    warn_boundary(phi, "frac_integral");
    let a = riesz_constant(2, alpha)?;
    let conv = Convolver::new(phi.spec.n, out.n, 6, |dx, dy, o| moment_kernels(2.0 - alpha, out.h(), dx, dy, o));
    let dg = input_derivatives(phi);
    let data = conv.apply_sum(&[
        (phi.component(0), 0, a),
        (&dg[0], 1, a),
        (&dg[1], 2, a),
        (&dg[2], 3, a),
        (&dg[3], 4, a),
        (&dg[4], 5, a),
    ]);
    GridField::from_data(out, 1, data)
}

/// Behaviour of an input beyond its grid: `g(y) ≈ coef · |y|^{−decay}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarField {
    pub coef: f64,
    pub decay: f64,
}

/// Moments of `|y|^{−q}` over the cell at offset `(dx, dy)` about its centre
/// `c`: `[∫w, ∫w(y−c)₁, ∫w(y−c)₂, ∫w(y−c)₁², ∫w(y−c)₂², ∫w(y−c)₁(y−c)₂]`.
/// Far cells use the leading terms of the Taylor expansion of `w`.
fn outer_moments(q: f64, h: f64, dx: i64, dy: i64) -> [f64; 6] {
    let c = Point2::new(dx as f64 * h, dy as f64 * h);
    if dx == 0 && dy == 0 {
        assert!(q < 2.0, "origin cell needs an integrable power");
        let half_second = 0.5 * square_power_integral(q - 2.0, 0.5 * h);
        return [square_power_integral(q, 0.5 * h), 0.0, 0.0, half_second, half_second, 0.0];
    }
    if dx.abs() <= NEAR && dy.abs() <= NEAR {
        return cell_integral(
            &|z: Point2| {
                let w = z.norm().powf(-q);
                let (u, v) = (z.x - c.x, z.y - c.y);
                [w, w * u, w * v, w * u * u, w * v * v, w * u * v]
            },
            c,
            0.5 * h,
        );
    }
    let r2 = c.norm_sq();
    let w = r2.powf(-0.5 * q);
    let h2 = h * h;
    let h4 = h2 * h2;
    // ∇w = −q w y / r²
    let g = -q * w / r2;
    [
        h2 * w * (1.0 + q * q * h2 / (24.0 * r2)),
        h4 / 12.0 * g * c.x,
        h4 / 12.0 * g * c.y,
        h4 / 12.0 * w,
        h4 / 12.0 * w,
        0.0,
    ]
}

/// Convolution weights for the input and its derivatives
/// `[g, g_x, g_y, g_xx, g_yy, g_xy]` reproducing the cell integral of the
/// local quadratic model of `g`. The offset `(dx, dy)` runs from input to
/// output sample, the negated displacement, so odd moments flip.
fn moment_kernels(q: f64, h: f64, dx: i64, dy: i64, o: &mut [f64]) {
    let w = outer_moments(q, h, -dx, -dy);
    o.copy_from_slice(&[w[0], w[1], w[2], 0.5 * w[3], 0.5 * w[4], w[5]]);
}

/// Even moments `∫ y₁², y₁⁴, y₁²y₂²` against `|y|^{−2−a}` over the square of
/// `(2K+1)²` cells centred at the origin.
fn inner_moments(a: f64, h: f64, k: i64) -> [f64; 3] {
    let half = 0.5 * h;
    let c2 = polar_square_moments(Point2::ORIGIN, half, -a, |t| [t.cos().powi(2)]);
    let c4 = polar_square_moments(Point2::ORIGIN, half, 2.0 - a, |t| {
        let (c, s) = (t.cos(), t.sin());
        [c.powi(4), c * c * s * s]
    });
    let mut m = [c2[0], c4[0], c4[1]];
    for dy in -k..=k {
        for dx in -k..=k {
            if dx == 0 && dy == 0 {
                continue;
            }
            let c = Point2::new(dx as f64 * h, dy as f64 * h);
            let v = cell_integral(
                &|z: Point2| {
                    let w = z.norm().powf(-2.0 - a);
                    let (x2, y2) = (z.x * z.x, z.y * z.y);
                    [x2 * w, x2 * x2 * w, x2 * y2 * w]
                },
                c,
                half,
            );
            for i in 0..3 {
                m[i] += v[i];
            }
        }
    }
    m
}

struct Derivs {
    lap: Vec<f64>,
    quartic: Vec<f64>,
    mixed: Vec<f64>,
}

/// Fourth-order second derivatives and second-order fourth derivatives at
/// the output samples, read from the larger input grid.
fn derivatives(g: &GridField, out: GridSpec) -> Derivs {
    let n = g.spec.n;
    let off = (n - out.n) / 2;
    let h = g.spec.h();
    let d = g.component(0);
    let at = |i: usize, j: usize| d[j * n + i];
    let m = out.len();
    let (mut lap, mut quartic, mut mixed) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for jo in 0..out.n {
        for io in 0..out.n {
            let (i, j) = (io + off, jo + off);
            let xx = (-at(i - 2, j) + 16.0 * at(i - 1, j) - 30.0 * at(i, j) + 16.0 * at(i + 1, j) - at(i + 2, j))
                / (12.0 * h * h);
            let yy = (-at(i, j - 2) + 16.0 * at(i, j - 1) - 30.0 * at(i, j) + 16.0 * at(i, j + 1) - at(i, j + 2))
                / (12.0 * h * h);
            let x4 = (at(i - 2, j) - 4.0 * at(i - 1, j) + 6.0 * at(i, j) - 4.0 * at(i + 1, j) + at(i + 2, j)) / h.powi(4);
            let y4 = (at(i, j - 2) - 4.0 * at(i, j - 1) + 6.0 * at(i, j) - 4.0 * at(i, j + 1) + at(i, j + 2)) / h.powi(4);
            let dxx = |jj: usize| at(i - 1, jj) - 2.0 * at(i, jj) + at(i + 1, jj);
            let xy = (dxx(j - 1) - 2.0 * dxx(j) + dxx(j + 1)) / h.powi(4);
            let k = jo * out.n + io;
            lap[k] = xx + yy;
            quartic[k] = x4 + y4;
            mixed[k] = xy;
        }
    }
    Derivs { lap, quartic, mixed }
}

/// Central first and second differences of the whole input grid:
/// `[g_x, g_y, g_xx, g_yy, g_xy]`, zero on the outer ring.
fn input_derivatives(g: &GridField) -> [Vec<f64>; 5] {
    let n = g.spec.n;
    let h = g.spec.h();
    let d = g.component(0);
    let mut out: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n * n]);
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let k = j * n + i;
            out[0][k] = (d[k + 1] - d[k - 1]) / (2.0 * h);
            out[1][k] = (d[k + n] - d[k - n]) / (2.0 * h);
            out[2][k] = (d[k + 1] - 2.0 * d[k] + d[k - 1]) / (h * h);
            out[3][k] = (d[k + n] - 2.0 * d[k] + d[k - n]) / (h * h);
            out[4][k] = (d[k + n + 1] - d[k + n - 1] - d[k - n + 1] + d[k - n - 1]) / (4.0 * h * h);
        }
    }
    out
}

/// `K_{−a} g` on `out` for `a ∈ (0, 2)` by the shell scheme: a Taylor
/// expansion on the inner `(2K+1)²` cells, exact cell weights outside, a
/// closed-form tail beyond the input grid, and Richardson extrapolation
/// between `K = 1` and `K = 4` (inner half widths in ratio 3).
pub fn frac_laplacian_shell(g: &GridField, a: f64, out: GridSpec, far: Option<FarField>) -> Result<GridField> {
    if !(a > 0.0 && a < 2.0) {
        return Err(Error::InvalidParameter(format!("negative order must lie in (-2, 0), got {}", -a)));
    }
    let h = out.h();
    if (g.spec.h() - h).abs() > 1e-12 * h || g.spec.n < out.n + 16 {
        return Err(Error::InvalidParameter("input grid must extend the output grid at equal spacing".into()));
    }
    let reach = ((g.spec.n - out.n) / 2) as i64;
    let q = 2.0 + a;
    let cst = riesz_constant(2, -a)?;
    let der = derivatives(g, out);
    let tail_radius = (reach as f64 + 0.5) * h;
    let exterior = square_exterior_power_integral(q, tail_radius);
    let far_term = far.map_or(0.0, |f| f.coef * square_exterior_power_integral(q + f.decay, tail_radius));
    let center = g.crop(out);
    let mut levels = Vec::new();
    let dg = input_derivatives(g);
    for k in [1i64, 4] {
        let conv = Convolver::new(g.spec.n, out.n, 6, |dx, dy, o| {
            let m = dx.abs().max(dy.abs());
            if m <= k || m > reach {
                o.fill(0.0);
            } else {
                moment_kernels(q, h, dx, dy, o);
            }
        });
        let mut shell = 0.0;
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                if dx.abs().max(dy.abs()) > k {
                    shell += outer_moments(q, h, dx, dy)[0];
                }
            }
        }
        let m = inner_moments(a, h, k);
        let sum = conv.apply_sum(&[
            (g.component(0), 0, 1.0),
            (&dg[0], 1, 1.0),
            (&dg[1], 2, 1.0),
            (&dg[2], 3, 1.0),
            (&dg[3], 4, 1.0),
            (&dg[4], 5, 1.0),
        ]);
        let vals: Vec<f64> = (0..out.len())
            .map(|i| {
                let near = 0.5 * m[0] * der.lap[i] + (m[1] * der.quartic[i] + 6.0 * m[2] * der.mixed[i]) / 24.0;
                near + sum[i] - center.data[i] * (shell + exterior) + far_term
            })
            .collect();
        levels.push(vals);
    }
    let ratio = 3f64.powf(6.0 - a);
    let data = levels[0]
        .iter()
        .zip(&levels[1])
        .map(|(v1, v2)| cst * (ratio * v1 - v2) / (ratio - 1.0))
        .collect();
    GridField::from_data(out, 1, data)
}

/// `K_α φ` on the grid of `φ` for `0 < |α| < 2`. Negative orders use the
/// shell scheme with the input padded by zeros to twice the grid.
pub fn frac_integral(phi: &GridField, alpha: f64) -> Result<GridField> {
    if alpha > 0.0 {
        frac_integral_on(phi, alpha, phi.spec)
    } else if alpha < 0.0 && alpha > -2.0 {
        warn_boundary(phi, "frac_integral");
        let ext = phi.embed(phi.spec.enlarged(2));
        frac_laplacian_shell(&ext, -alpha, phi.spec, None)
    } else {
        Err(Error::InvalidParameter(format!("order must satisfy 0 < |alpha| < 2, got {alpha}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::relative_l2;

    fn gaussian(spec: GridSpec) -> GridField {
        GridField::from_fn(spec, |p| (-p.norm_sq() / 2.0).exp())
    }

    #[test]
    fn zero_in_zero_out() {
        let spec = GridSpec::new(4.0, 32).unwrap();
        let z = GridField::zeros(spec, 1);
        assert_eq!(frac_integral(&z, 0.7).unwrap().max_abs(), 0.0);
        assert_eq!(frac_integral(&z, -0.7).unwrap().max_abs(), 0.0);
        assert!(frac_integral(&z, 2.0).is_err());
        assert!(frac_integral(&z, 0.0).is_err());
    }

    #[test]
    fn positive_order_is_radial() {
        let spec = GridSpec::new(8.0, 128).unwrap();
        let k = frac_integral(&gaussian(spec), 1.5).unwrap();
        let scale = k.max_abs();
        // the eight symmetric images of a lattice point agree
        for (i, j) in [(72usize, 67usize), (77, 65), (82, 73)] {
            let v = k.data[spec.index(i, j)];
            let (a, b) = (i as i64 - 64, j as i64 - 64);
            for (p, q) in [(a, b), (-a, b), (a, -b), (-a, -b), (b, a), (-b, a), (b, -a), (-b, -a)] {
                let w = k.data[spec.index((p + 64) as usize, (q + 64) as usize)];
                assert!((v - w).abs() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn negative_order_of_gaussian_matches_closed_form() {
        // K_{-a} has multiplier |ξ|^a; for e^{-|x|²/2} the value at the origin
        // is Γ(1 + a/2) (2π²)^{-a/2}
        let spec = GridSpec::new(6.0, 128).unwrap();
        let a = 1.5;
        let k = frac_integral(&gaussian(spec), -a).unwrap();
        let want = statrs::function::gamma::gamma(1.0 + 0.5 * a) * (2.0 * std::f64::consts::PI.powi(2)).powf(-0.5 * a);
        let got = k.data[spec.index(64, 64)];
        assert!((got - want).abs() / want < 1e-4, "{got} vs {want}");
    }

    #[test]
    fn positive_order_of_gaussian_matches_closed_form() {
        // multiplier |ξ|^{-α}: value Γ(1 − α/2) (2π²)^{α/2} at the origin
        let spec = GridSpec::new(6.0, 128).unwrap();
        let alpha = 0.5;
        let k = frac_integral_on(&gaussian(spec), alpha, spec).unwrap();
        let want = statrs::function::gamma::gamma(1.0 - 0.5 * alpha) * (2.0 * std::f64::consts::PI.powi(2)).powf(0.5 * alpha);
        let got = k.data[spec.index(64, 64)];
        assert!((got - want).abs() / want < 1e-4, "{got} vs {want}");
    }

    #[test]
    fn semigroup_on_extended_grid() {
        let spec = GridSpec::new(4.0, 64).unwrap();
        let big = spec.enlarged(4);
        let phi = gaussian(spec);
        let (a, b) = (0.5, 0.7);
        let kb = frac_integral_on(&phi, b, big).unwrap();
        let mut kab = frac_integral_on(&kb, a, spec).unwrap();
        // monopole tail of K_b φ beyond the big grid
        let mass = phi.integral(0);
        let tail = riesz_constant(2, a).unwrap() * riesz_constant(2, b).unwrap() * mass
            * square_exterior_power_integral(4.0 - a - b, big.half_extent);
        kab.data.iter_mut().for_each(|v| *v += tail);
        let direct = frac_integral_on(&phi, a + b, spec).unwrap();
        let inner: Vec<usize> = (0..spec.len()).filter(|&k| spec.point_of(k).norm() <= 2.0).collect();
        let x: Vec<f64> = inner.iter().map(|&k| kab.data[k]).collect();
        let y: Vec<f64> = inner.iter().map(|&k| direct.data[k]).collect();
        assert!(relative_l2(&x, &y) < 0.02, "{}", relative_l2(&x, &y));
    }
}
