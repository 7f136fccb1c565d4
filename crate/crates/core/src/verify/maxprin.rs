//! Maximum principles for `R*η` and `V(Rν) + R*(gν)`, and the recovery of a
//! density from its potential.

use super::EstimateReport;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::grid::{relative_l2, GridField, GridSpec};
use crate::profiles::{frac_integral_on, frac_laplacian_shell, FarField, VProfile};
use crate::quadrature::{integrate_1d, square_exterior_power_integral};
use crate::riesz::{PotentialConvolver, RieszConvolver};
use crate::special::{reproduction_sigma, riesz_constant};
use crate::spectral::Convolver;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `exp(1 − 1/(1 − u²))` with `u = |p − c|/r`, zero outside the disk.
pub fn smooth_bump(c: Point2, r: f64, p: Point2) -> f64 {
    let u2 = (p - c).norm_sq() / (r * r);
    if u2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u2)).exp()
    }
}

/// A seeded sum of one to three smooth bumps kept inside the middle 80% of
/// the grid; `components` independent amplitudes per bump. With
/// `positive` the amplitudes are drawn from `[0.2, 1]`, otherwise from `[−1, 1]`.
pub fn random_smooth_field(seed: u64, spec: GridSpec, components: usize, positive: bool) -> GridField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = spec.half_extent;
    let count = rng.random_range(1..=3usize);
    let bumps: Vec<(Point2, f64, Vec<f64>)> = (0..count)
        .map(|_| {
            let r = rng.random_range(0.2 * l..0.35 * l);
            let reach = 0.8 * l - r;
            let c = Point2::new(rng.random_range(-reach..reach), rng.random_range(-reach..reach));
            let amp = (0..components).map(|_| if positive { rng.random_range(0.2..1.0) } else { rng.random_range(-1.0..1.0) }).collect();
            (c, r, amp)
        })
        .collect();
    let mut f = GridField::zeros(spec, components);
    let m = spec.len();
    for k in 0..m {
        let p = spec.point_of(k);
        for (c, r, amp) in &bumps {
            let b = smooth_bump(*c, *r, p);
            if b > 0.0 {
                for (comp, a) in amp.iter().enumerate() {
                    f.data[comp * m + k] += a * b;
                }
            }
        }
    }
    f
}

/// Rejects fields that are not resolved by the grid or not compactly supported in it.
fn check_smooth(f: &GridField) -> Result<()> {
    check_smooth_at(f, f.max_abs())
}

/// As [`check_smooth`], with tolerances relative to `scale`.
fn check_smooth_at(f: &GridField, scale: f64) -> Result<()> {
    let n = f.spec.n;
    if scale == 0.0 {
        return Ok(());
    }
    for c in 0..f.components {
        let d = f.component(c);
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                if i < 2 || j < 2 || i >= n - 2 || j >= n - 2 {
                    if d[k].abs() > 1e-12 * scale {
                        return Err(Error::Precondition("field is not compactly supported inside the grid".into()));
                    }
                    continue;
                }
                let lap = d[k - 1] + d[k + 1] + d[k - n] + d[k + n] - 4.0 * d[k];
                if lap.abs() > scale {
                    return Err(Error::Precondition("field is not resolved by the grid (non-smooth input)".into()));
                }
            }
        }
    }
    Ok(())
}

/// Nodes of the output grid lying within one cell of the support of `mask`.
fn dilated_support(input: GridSpec, output: GridSpec, mask: &[bool]) -> Vec<usize> {
    let n = input.n as i64;
    let off = ((output.n - input.n) / 2) as i64;
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let hit = (-1..=1).any(|dj: i64| {
                (-1..=1).any(|di: i64| {
                    let (a, b) = (i + di, j + dj);
                    a >= 0 && b >= 0 && a < n && b < n && mask[(b * n + a) as usize]
                })
            });
            if hit {
                out.push(((j + off) * output.n as i64 + i + off) as usize);
            }
        }
    }
    out
}

fn compare_maxima(name: &str, field: &GridField, support: &[usize]) -> EstimateReport {
    let global = field.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let local = support.iter().map(|&k| field.data[k]).fold(f64::NEG_INFINITY, f64::max);
    let scale = field.max_abs();
    let r = EstimateReport::upper(name, global, local, 1.0).with("scale", scale).with("n", field.spec.n as f64);
    if global <= 0.0 {
        // nothing to check unless the maximum is positive
        EstimateReport { pass: true, ..r }.with("vacuous", 1.0)
    } else {
        r.with_tolerance(1e-3 * scale).with("vacuous", 0.0)
    }
}

/// Global maximum of `R*η` over a grid twice as wide as the input against
/// its maximum over the one-cell dilation of `supp η`.
pub fn max_principle_check(eta: &GridField, s: f64) -> Result<EstimateReport> {
    if eta.components != 2 {
        return Err(Error::InvalidParameter("eta must be a vector field".into()));
    }
    check_smooth(eta)?;
    let out = eta.spec.enlarged(2);
    let conv = RieszConvolver::new(s, eta.spec, out)?;
    let field = conv.adjoint(eta);
    let scale = eta.max_abs();
    let mask: Vec<bool> = (0..eta.spec.len()).map(|k| {
        let v = eta.vec_at(k);
        v[0].hypot(v[1]) > 1e-12 * scale
    }).collect();
    let support = dilated_support(eta.spec, out, &mask);
    Ok(compare_maxima("max_principle", &field, &support).with("s", s))
}

/// The same comparison for `V(Rν) + R*(gν)` with `ν ≥ 0` smooth and `g` a smooth vector field.
pub fn max_principle_v_check(nu: &GridField, g: &GridField, s: f64) -> Result<EstimateReport> {
    if nu.components != 1 || g.components != 2 || nu.spec != g.spec {
        return Err(Error::InvalidParameter("need a scalar density and a vector field on one grid".into()));
    }
    if nu.data.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidParameter("nu must be nonnegative".into()));
    }
    check_smooth(nu)?;
    let spec = nu.spec;
    let m = spec.len();
    let mut gnu = GridField::zeros(spec, 2);
    for k in 0..m {
        gnu.data[k] = g.data[k] * nu.data[k];
        gnu.data[m + k] = g.data[m + k] * nu.data[k];
    }
    check_smooth_at(&gnu, g.max_abs() * nu.max_abs())?;
    let out = spec.enlarged(2);
    let conv = RieszConvolver::new(s, spec, out)?;
    let r = conv.transform(nu);
    let adj = conv.adjoint(&gnu);
    let v = VProfile::new();
    let mo = out.len();
    let data: Vec<f64> = (0..mo).map(|k| v.big_v([r.data[k], r.data[mo + k]]) + adj.data[k]).collect();
    let field = GridField::from_data(out, 1, data)?;
    let scale = nu.max_abs();
    let mask: Vec<bool> = nu.data.iter().map(|&x| x > 1e-12 * scale).collect();
    let support = dilated_support(spec, out, &mask);
    Ok(compare_maxima("max_principle_v", &field, &support).with("s", s))
}

#[derive(Debug, Clone)]
pub struct ReproductionReport {
    pub report: EstimateReport,
    /// The recovered density on the input grid.
    pub recovered: GridField,
    /// `max |recovered|` over `0.6L ≤ |x| ≤ 0.9L`, relative to `max |p|`.
    pub far_ratio: f64,
}

/// `C^∞` cutoff equal to 1 on `[0, b]` and 0 beyond `2b`.
fn cutoff(r: f64, b: f64) -> f64 {
    let t = ((r - b) / b).clamp(0.0, 1.0);
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let e = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    e(1.0 - t) / (e(1.0 - t) + e(t))
}

fn finish(p: &GridField, recovered: GridField, name: &str, s: f64) -> ReproductionReport {
    let err = relative_l2(&recovered.data, &p.data);
    let scale = p.max_abs();
    let l = p.spec.half_extent;
    let far = (0..p.spec.len())
        .filter(|&k| {
            let r = p.spec.point_of(k).norm();
            r >= 0.6 * l && r <= 0.9 * l
        })
        .map(|k| recovered.data[k].abs())
        .fold(0.0, f64::max);
    let far_ratio = if scale > 0.0 { far / scale } else { far };
    let report = EstimateReport::upper(name, err, 0.02, 1.0)
        .with("s", s)
        .with("n", p.spec.n as f64)
        .with("far_ratio", far_ratio)
        .with("boundary_fraction", p.boundary_fraction());
    ReproductionReport { report, recovered, far_ratio }
}

/// Recovers `p` as `σ ∫ (u(x+y) − u(x)) |y|^{s−5} dy` from `u = U(p m₂)`.
///
/// `u` is computed on a grid four times as wide. The integral is split by a
/// smooth cutoff at radius `1/2`: the inner part from the Taylor series of the
/// circular means (`Δu`, `Δ²u`, `Δ³u`), the outer part as a lattice sum, and
/// the part beyond the wide grid from the monopole behaviour of `u`.
pub fn reproduction_check(p: &GridField, s: f64) -> Result<ReproductionReport> {
    if !(s > 1.0 && s < 2.0) {
        return Err(Error::InvalidParameter(format!("reproduction needs s in (1,2), got {s}")));
    }
    if p.components != 1 {
        return Err(Error::InvalidParameter("density must be scalar".into()));
    }
    if p.boundary_fraction() > 0.01 {
        log::warn!("reproduction: density has {:.2}% of its mass in the outer frame", 100.0 * p.boundary_fraction());
    }
    let sigma = reproduction_sigma(s)?;
    let a = 3.0 - s;
    let spec = p.spec;
    let wide = spec.enlarged(4);
    let h = spec.h();
    let u = PotentialConvolver::new(s, spec, wide)?.potential(p);
    let l1 = u.laplacian();
    let l2 = l1.laplacian();
    let l3 = l2.laplacian();
    let b = 0.5f64.max(8.0 * h);
    let j = |k: f64| {
        2.0 * std::f64::consts::PI
            * (b.powf(k - a) / (k - a) + integrate_1d(|r| cutoff(r, b) * r.powf(k - 1.0 - a), b, 2.0 * b, 64))
    };
    let (j2, j4, j6) = (j(2.0), j(4.0), j(6.0));
    let reach = (3 * spec.n / 2) as i64;
    let weight = |dx: i64, dy: i64| {
        if dx.abs().max(dy.abs()) > reach || (dx == 0 && dy == 0) {
            return 0.0;
        }
        let r = h * ((dx * dx + dy * dy) as f64).sqrt();
        (1.0 - cutoff(r, b)) * r.powf(-2.0 - a) * h * h
    };
    let mut wsum = 0.0;
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            wsum += weight(dx, dy);
        }
    }
    let conv = Convolver::new(wide.n, spec.n, 1, |dx, dy, o| o[0] = weight(dx, dy));
    let lattice = conv.apply(u.component(0), 0);
    let edge = (reach as f64 + 0.5) * h;
    let exterior = square_exterior_power_integral(2.0 + a, edge);
    let mass = p.integral(0);
    let tail = -mass / (s - 1.0) * square_exterior_power_integral(4.0, edge);
    let uc = u.crop(spec);
    let (c1, c2, c3) = (l1.crop(spec), l2.crop(spec), l3.crop(spec));
    let data: Vec<f64> = (0..spec.len())
        .map(|k| {
            let near = c1.data[k] / 4.0 * j2 + c2.data[k] / 64.0 * j4 + c3.data[k] / 2304.0 * j6;
            let far = lattice[k] - uc.data[k] * wsum;
            sigma * (near + far - uc.data[k] * exterior + tail)
        })
        .collect();
    Ok(finish(p, GridField::from_data(spec, 1, data)?, "reproduction", s))
}

/// The second route: `K_{−α} K_α p` with `α = 3 − s`.
pub fn reproduction_via_fractional(p: &GridField, s: f64) -> Result<ReproductionReport> {
    if !(s > 1.0 && s < 2.0) {
        return Err(Error::InvalidParameter(format!("reproduction needs s in (1,2), got {s}")));
    }
    let a = 3.0 - s;
    let wide = p.spec.enlarged(4);
    let g = frac_integral_on(p, a, wide)?;
    let far = FarField { coef: riesz_constant(2, a)? * p.integral(0), decay: 2.0 - a };
    let rec = frac_laplacian_shell(&g, a, p.spec, Some(far))?;
    Ok(finish(p, rec, "reproduction_fractional", s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{build_standard_cap, phi_circ};

    #[test]
    fn zero_density_is_recovered_exactly() {
        let spec = GridSpec::new(4.0, 64).unwrap();
        let p = GridField::zeros(spec, 1);
        let r = reproduction_check(&p, 1.5).unwrap();
        assert_eq!(r.report.measured_lhs, 0.0);
        assert!(r.report.pass);
    }

    #[test]
    fn cutoff_is_a_smooth_step() {
        assert_eq!(cutoff(0.3, 0.5), 1.0);
        assert_eq!(cutoff(1.2, 0.5), 0.0);
        assert!((cutoff(0.75, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gaussian_recovered_by_both_routes() {
        let spec = GridSpec::new(8.0, 128).unwrap();
        let p = GridField::from_fn(spec, |x| (-0.5 * x.norm_sq()).exp());
        let a = reproduction_check(&p, 1.5).unwrap();
        let b = reproduction_via_fractional(&p, 1.5).unwrap();
        assert!(a.report.measured_lhs < 0.02, "{:?}", a.report);
        assert!(b.report.measured_lhs < 0.02, "{:?}", b.report);
        assert!(relative_l2(&a.recovered.data, &b.recovered.data) < 0.01);
        assert!(a.far_ratio < 1e-3, "{}", a.far_ratio);
    }

    #[test]
    fn truncated_cap_field_peaks_at_the_origin() {
        let spec = GridSpec::new(16.0, 256).unwrap();
        let cap = build_standard_cap(1.5, spec).unwrap();
        let small = GridSpec::new(8.0, 128).unwrap();
        let eta = GridField::from_vec_fn(small, |x| {
            let w = smooth_bump(Point2::ORIGIN, 7.5, x) / smooth_bump(Point2::ORIGIN, 7.5, Point2::ORIGIN);
            let v = cap.psi_at(x);
            [v[0] * w, v[1] * w]
        });
        let r = max_principle_check(&eta, 1.5).unwrap();
        assert!(r.pass, "{r:?}");
        // the maximum sits near φ∘(0) = e
        assert!((r.bound_rhs - phi_circ(Point2::ORIGIN)).abs() < 0.1 * std::f64::consts::E, "{r:?}");
    }

    #[test]
    fn nonpositive_adjoint_is_vacuous() {
        let spec = GridSpec::new(1.0, 64).unwrap();
        let eta = GridField::zeros(spec, 2);
        let r = max_principle_check(&eta, 1.5).unwrap();
        assert!(r.pass);
        assert_eq!(r.metadata["vacuous"], 1.0);
    }

    #[test]
    fn rough_input_is_rejected() {
        let spec = GridSpec::new(1.0, 64).unwrap();
        let mut eta = GridField::zeros(spec, 2);
        eta.data[spec.index(32, 32)] = 1.0;
        assert!(max_principle_check(&eta, 1.5).is_err());
    }

    #[test]
    fn small_seeded_corpus_passes() {
        let spec = GridSpec::new(1.0, 128).unwrap();
        for seed in 0..6 {
            let eta = random_smooth_field(seed, spec, 2, false);
            let r = max_principle_check(&eta, 1.25 + 0.5 * (seed % 2) as f64).unwrap();
            assert!(r.pass, "seed {seed}: {r:?}");
            let nu = random_smooth_field(1000 + seed, spec, 1, true);
            let g = random_smooth_field(2000 + seed, spec, 2, false);
            let r = max_principle_v_check(&nu, &g, 1.5).unwrap();
            assert!(r.pass, "seed {seed}: {r:?}");
        }
    }
}
