//! The s-Riesz transform `R`, its adjoint `R*`, the potential `U` and the
//! maximal transform, by direct summation and on grids.

use crate::error::{Error, Result};
use crate::geometry::{Disk, Point2};
use crate::grid::{GridField, GridSpec};
use crate::kernels::{PowerWeights, RieszWeights, NEAR};
use crate::measure::{Cap, Measure, VectorMeasure};
use crate::quadrature::{cell_integral, polar_square_moments};
use crate::spectral::{freq_index, Convolver, Fft2};
use crate::special::transform_sigma;
use num_complex::Complex64;
use rayon::prelude::*;

/// `x / |x|^{s+1}`.
pub fn kernel(s: f64, x: Point2) -> Result<[f64; 2]> {
    let r2 = x.norm_sq();
    if r2 == 0.0 {
        return Err(Error::SingularOrigin);
    }
    let k = r2.powf(-0.5 * (s + 1.0));
    Ok([x.x * k, x.y * k])
}

fn kernel_unchecked(s: f64, x: Point2) -> [f64; 2] {
    let k = x.norm_sq().powf(-0.5 * (s + 1.0));
    [x.x * k, x.y * k]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszEngine {
    pub s: f64,
    pub sigma: f64,
}

impl RieszEngine {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 2.0) {
            return Err(Error::InvalidParameter(format!("s = {s} outside (0, 2)")));
        }
        Ok(RieszEngine { s, sigma: transform_sigma(s) })
    }
}

/// Which sources to skip for a given evaluation point.
pub type Exclusion<'a> = &'a (dyn Fn(usize, Point2) -> bool + Sync);

/// Kernel integrals over one grid cell seen from `x`: zeroth moment and the
/// first-moment matrix `∫ K_a(x−y) (y − y_c)_b dy` (see [`RieszWeights`]).
fn cell_moments(s: f64, x: Point2, cell_center: Point2, h: f64) -> [f64; 6] {
    let c = x - cell_center;
    let half = 0.5 * h;
    if c.max_abs() <= half {
        let w0 = polar_square_moments(c, half, -s, |t| [t.cos(), t.sin()]);
        let m = polar_square_moments(c, half, 1.0 - s, |t| {
            let (ct, st) = (t.cos(), t.sin());
            [ct * ct, ct * st, st * st]
        });
        // (y − y_c) = c − z
        [w0[0], w0[1], c.x * w0[0] - m[0], c.y * w0[0] - m[1], c.x * w0[1] - m[1], c.y * w0[1] - m[2]]
    } else {
        let f = |z: Point2| {
            let k = z.norm().powf(-s - 1.0);
            let (kx, ky) = (z.x * k, z.y * k);
            let (ux, uy) = (c.x - z.x, c.y - z.y);
            [kx, ky, kx * ux, kx * uy, ky * ux, ky * uy]
        };
        cell_integral(&f, c, half)
    }
}

/// Local grid resolving a cap, for quadrature.
pub fn cap_grid(cap: &Cap, n: usize) -> GridField {
    let r = cap.support.radius;
    let spec = GridSpec { half_extent: r * 1.0625, n };
    let c = cap.support.center;
    GridField::from_fn(spec, |p| cap.density(p + c))
}

struct ShiftedGrid<'a> {
    field: &'a GridField,
    offset: Point2,
}

fn gridded_direct(
    grids: &[ShiftedGrid<'_>],
    s: f64,
    points: &[Point2],
    exclusion: Option<Exclusion<'_>>,
) -> Vec<[f64; 2]> {
    let grads: Vec<GridField> = grids.iter().map(|g| g.field.gradient()).collect();
    let tables: Vec<RieszWeights> = grids.iter().map(|g| RieszWeights::new(s, g.field.spec.h())).collect();
    points
        .par_iter()
        .enumerate()
        .map(|(pi, &x)| {
            let mut acc = [0.0, 0.0];
            for ((g, grad), table) in grids.iter().zip(&grads).zip(&tables) {
                let spec = g.field.spec;
                let h = spec.h();
                let n = spec.n;
                let d = g.field.component(0);
                let local = x - g.offset;
                let u = (local.x + spec.half_extent) / h;
                let v = (local.y + spec.half_extent) / h;
                let on_node = (u - u.round()).abs() < 1e-9 && (v - v.round()).abs() < 1e-9;
                let (iu, iv) = (u.round() as i64, v.round() as i64);
                for j in 0..n {
                    for i in 0..n {
                        let k = j * n + i;
                        let f = d[k];
                        if f == 0.0 && grad.data[k] == 0.0 && grad.data[n * n + k] == 0.0 {
                            continue;
                        }
                        let y = spec.point(i, j) + g.offset;
                        if let Some(ex) = exclusion {
                            if ex(pi, y) {
                                continue;
                            }
                        }
                        let (di, dj) = (iu - i as i64, iv - j as i64);
                        let near = di.abs() <= NEAR + 1 && dj.abs() <= NEAR + 1;
                        if !near && !on_node {
                            let kk = kernel_unchecked(s, x - y);
                            acc[0] += f * kk[0] * h * h;
                            acc[1] += f * kk[1] * h * h;
                            continue;
                        }
                        let w = if on_node {
                            table.weights(di, dj)
                        } else {
                            cell_moments(s, x, y, h)
                        };
                        let (gx, gy) = (grad.data[k], grad.data[n * n + k]);
                        acc[0] += f * w[0] + w[2] * gx + w[3] * gy;
                        acc[1] += f * w[1] + w[4] * gx + w[5] * gy;
                    }
                }
            }
            acc
        })
        .collect()
}

/// `Rμ(x) = ∫ K(x−y) dμ(y)` by direct summation. Grid cells near `x` are
/// integrated exactly against the locally linear density; caps are sampled
/// on their own local grids.
pub fn transform_direct(
    mu: &Measure,
    s: f64,
    points: &[Point2],
    exclusion: Option<Exclusion<'_>>,
) -> Result<Vec<[f64; 2]>> {
    match mu {
        Measure::Atomic(atoms) => points
            .par_iter()
            .enumerate()
            .map(|(pi, &x)| {
                let mut acc = [0.0, 0.0];
                for a in atoms {
                    if let Some(ex) = exclusion {
                        if ex(pi, a.at) {
                            continue;
                        }
                    }
                    let k = kernel(s, x - a.at)?;
                    acc[0] += a.weight * k[0];
                    acc[1] += a.weight * k[1];
                }
                Ok(acc)
            })
            .collect(),
        Measure::Gridded(f) => Ok(gridded_direct(&[ShiftedGrid { field: f, offset: Point2::ORIGIN }], s, points, exclusion)),
        Measure::CapSum(caps) => transform_caps(caps, s, 64, points, exclusion),
    }
}

/// `R` of a sum of caps, each sampled on its own `n × n` local grid.
pub fn transform_caps(
    caps: &[Cap],
    s: f64,
    n: usize,
    points: &[Point2],
    exclusion: Option<Exclusion<'_>>,
) -> Result<Vec<[f64; 2]>> {
    RieszEngine::new(s)?;
    let fields: Vec<(GridField, Point2)> = caps.iter().map(|c| (cap_grid(c, n), c.support.center)).collect();
    let grids: Vec<ShiftedGrid<'_>> = fields.iter().map(|(f, o)| ShiftedGrid { field: f, offset: *o }).collect();
    Ok(gridded_direct(&grids, s, points, exclusion))
}

/// `R*η = −Σ_j R_j η_j` at the given points.
pub fn adjoint_transform(eta: &VectorMeasure, s: f64, points: &[Point2]) -> Result<Vec<f64>> {
    match eta {
        VectorMeasure::Atomic(a) => points
            .par_iter()
            .map(|&x| {
                let mut acc = 0.0;
                for (y, e) in a {
                    let k = kernel(s, x - *y)?;
                    acc -= k[0] * e[0] + k[1] * e[1];
                }
                Ok(acc)
            })
            .collect(),
        VectorMeasure::Gridded(f) => {
            let spec = f.spec;
            let fx = GridField::from_data(spec, 1, f.component(0).to_vec())?;
            let fy = GridField::from_data(spec, 1, f.component(1).to_vec())?;
            let rx = transform_direct(&Measure::Gridded(fx), s, points, None)?;
            let ry = transform_direct(&Measure::Gridded(fy), s, points, None)?;
            Ok(rx.iter().zip(&ry).map(|(a, b)| -(a[0] + b[1])).collect())
        }
    }
}

/// `Uν(x) = −(s−1)^{-1} ∫ |x−y|^{1−s} dν(y)`.
pub fn newton_potential(nu: &Measure, s: f64, points: &[Point2]) -> Result<Vec<f64>> {
    if (s - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidParameter("the potential needs s != 1".into()));
    }
    let c = -1.0 / (s - 1.0);
    let beta = s - 1.0;
    match nu {
        Measure::Atomic(atoms) => points
            .par_iter()
            .map(|&x| {
                let mut acc = 0.0;
                for a in atoms {
                    let r = x.dist(a.at);
                    if r == 0.0 {
                        return Err(Error::SingularOrigin);
                    }
                    acc += a.weight * r.powf(-beta);
                }
                Ok(c * acc)
            })
            .collect(),
        Measure::Gridded(f) => {
            let spec = f.spec;
            let h = spec.h();
            let n = spec.n;
            let d = f.component(0);
            Ok(points
                .par_iter()
                .map(|&x| {
                    let u = (x.x + spec.half_extent) / h;
                    let v = (x.y + spec.half_extent) / h;
                    let (iu, iv) = (u.round() as i64, v.round() as i64);
                    let mut acc = 0.0;
                    for j in 0..n {
                        for i in 0..n {
                            let w = d[j * n + i];
                            if w == 0.0 {
                                continue;
                            }
                            let y = spec.point(i, j);
                            let near = (iu - i as i64).abs() <= NEAR && (iv - j as i64).abs() <= NEAR;
                            let k = if near {
                                let cc = x - y;
                                if cc.max_abs() <= 0.5 * h {
                                    polar_square_moments(cc, 0.5 * h, -beta, |_| [1.0])[0]
                                } else {
                                    cell_integral(&|z: Point2| [z.norm().powf(-beta)], cc, 0.5 * h)[0]
                                }
                            } else {
                                h * h * x.dist(y).powf(-beta)
                            };
                            acc += w * k;
                        }
                    }
                    c * acc
                })
                .collect())
        }
        Measure::CapSum(caps) => {
            let mut out = vec![0.0; points.len()];
            for cap in caps {
                let g = cap_grid(cap, 64);
                let shifted: Vec<Point2> = points.iter().map(|p| *p - cap.support.center).collect();
                let part = newton_potential(&Measure::Gridded(g), s, &shifted)?;
                out.iter_mut().zip(part).for_each(|(o, v)| *o += v);
            }
            Ok(out)
        }
    }
}

/// Disks centred at `x` with radii `r_min · 2^k` up to `r_max`.
pub fn dyadic_family(x: Point2, r_min: f64, r_max: f64) -> Vec<Disk> {
    let mut out = Vec::new();
    let mut r = r_min;
    while r <= r_max * (1.0 + 1e-12) {
        out.push(Disk::new(x, r));
        r *= 2.0;
    }
    out
}

/// `max_D |∫_{ℝ²∖2D} K(x−y) dν(y)|` over a family of disks containing `x`.
pub fn maximal_transform(nu: &Measure, s: f64, x: Point2, family: &[Disk]) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if let Some(bad) = family.iter().find(|d| !d.contains(x)) {
        return Err(Error::Precondition(format!("family disk {bad:?} does not contain the point")));
    }
    let atoms = nu.as_atoms();
    let mut best: f64 = 0.0;
    for d in family {
        let big = d.scaled(2.0);
        let mut acc = [0.0, 0.0];
        for a in &atoms {
            if big.contains(a.at) {
                continue;
            }
            let k = kernel(s, x - a.at)?;
            acc[0] += a.weight * k[0];
            acc[1] += a.weight * k[1];
        }
        best = best.max(acc[0].hypot(acc[1]));
    }
    Ok(best)
}

/// Result of a spectral evaluation together with the boundary-mass diagnostic.
#[derive(Debug, Clone)]
pub struct SpectralOutput {
    pub field: GridField,
    /// Fraction of the input's absolute mass in the outer 10% frame.
    pub boundary_fraction: f64,
}

impl SpectralOutput {
    pub fn boundary_warning(&self) -> bool {
        self.boundary_fraction > 0.01
    }
}

fn spectral_apply(
    inputs: &[&[f64]],
    spec: GridSpec,
    outputs: usize,
    multiplier: impl Fn(usize, usize, f64, f64) -> Complex64 + Sync,
) -> Vec<Vec<f64>> {
    let n = spec.n;
    let p = 2 * n;
    let fft = Fft2::new(p);
    let h = spec.h();
    let off = n / 2;
    let spectra: Vec<Vec<Complex64>> = inputs
        .iter()
        .map(|d| {
            let mut buf = vec![Complex64::default(); p * p];
            for j in 0..n {
                for i in 0..n {
                    buf[(j + off) * p + i + off] = Complex64::new(d[j * n + i], 0.0);
                }
            }
            fft.forward(&mut buf);
            buf
        })
        .collect();
    (0..outputs)
        .map(|o| {
            let mut acc = vec![Complex64::default(); p * p];
            for (c, sp) in spectra.iter().enumerate() {
                acc.par_chunks_mut(p).enumerate().for_each(|(r, row)| {
                    let ky = freq_index(r, p);
                    let eta = ky as f64 / (p as f64 * h);
                    for (q, v) in row.iter_mut().enumerate() {
                        let kx = freq_index(q, p);
                        let xi = kx as f64 / (p as f64 * h);
                        let m = multiplier(o, c, xi, eta);
                        let nyq = (kx.unsigned_abs() as usize == p / 2 && c == 0)
                            || (ky.unsigned_abs() as usize == p / 2 && c == 1);
                        if !nyq {
                            *v += m * sp[r * p + q];
                        }
                    }
                });
            }
            fft.inverse(&mut acc);
            let scale = 1.0 / (p * p) as f64;
            let mut out = vec![0.0; n * n];
            for j in 0..n {
                for i in 0..n {
                    out[j * n + i] = acc[(j + off) * p + i + off].re * scale;
                }
            }
            out
        })
        .collect()
}

/// `R(f m₂)` on the grid through the multiplier `iσ ξ |ξ|^{s−3}` on a 2×
/// zero-padded grid. The ξ = 0 mode and the odd Nyquist modes are zeroed.
pub fn transform_fft(density: &GridField, s: f64) -> Result<SpectralOutput> {
    let eng = RieszEngine::new(s)?;
    if density.components != 1 {
        return Err(Error::InvalidParameter("transform_fft takes a scalar density".into()));
    }
    let boundary_fraction = density.boundary_fraction();
    if boundary_fraction > 0.01 {
        log::warn!("transform_fft: {:.2}% of the mass lies in the outer frame", 100.0 * boundary_fraction);
    }
    let sigma = eng.sigma;
    let outs = spectral_apply(&[density.component(0)], density.spec, 2, |o, _, xi, eta| {
        let r = xi.hypot(eta);
        if r == 0.0 {
            return Complex64::default();
        }
        let comp = if o == 0 { xi } else { eta };
        Complex64::new(0.0, sigma * comp * r.powf(s - 3.0))
    });
    let mut data = outs[0].clone();
    data.extend_from_slice(&outs[1]);
    Ok(SpectralOutput { field: GridField::from_data(density.spec, 2, data)?, boundary_fraction })
}

/// `R*(η m₂)` on the grid through the multiplier `−iσ Σ ξ_j |ξ|^{s−3} η̂_j`.
pub fn adjoint_fft(eta: &GridField, s: f64) -> Result<SpectralOutput> {
    let eng = RieszEngine::new(s)?;
    if eta.components != 2 {
        return Err(Error::InvalidParameter("adjoint_fft takes a vector density".into()));
    }
    let boundary_fraction = eta.boundary_fraction();
    if boundary_fraction > 0.01 {
        log::warn!("adjoint_fft: {:.2}% of the mass lies in the outer frame", 100.0 * boundary_fraction);
    }
    let sigma = eng.sigma;
    let outs = spectral_apply(&[eta.component(0), eta.component(1)], eta.spec, 1, |_, c, xi, et| {
        let r = xi.hypot(et);
        if r == 0.0 {
            return Complex64::default();
        }
        let comp = if c == 0 { xi } else { et };
        Complex64::new(0.0, -sigma * comp * r.powf(s - 3.0))
    });
    Ok(SpectralOutput {
        field: GridField::from_data(eta.spec, 1, outs.into_iter().next().expect("one output"))?,
        boundary_fraction,
    })
}

/// Exact aperiodic `R` and `R*` between grids of equal spacing, with the
/// cell-linear correction; no wrap-around, unlike the multiplier route.
pub struct RieszConvolver {
    pub s: f64,
    pub input: GridSpec,
    pub output: GridSpec,
    conv: Convolver,
}

impl RieszConvolver {
    pub fn new(s: f64, input: GridSpec, output: GridSpec) -> Result<Self> {
        RieszEngine::new(s)?;
        if (input.h() - output.h()).abs() > 1e-12 * input.h() {
            return Err(Error::InvalidParameter("input and output grids need equal spacing".into()));
        }
        let w = RieszWeights::new(s, input.h());
        let conv = Convolver::new(input.n, output.n, 6, |dx, dy, out| out.copy_from_slice(&w.weights(dx, dy)));
        Ok(RieszConvolver { s, input, output, conv })
    }

    /// `R(f m₂)` sampled on the output grid.
    pub fn transform(&self, f: &GridField) -> GridField {
        assert_eq!(f.spec, self.input);
        let g = f.gradient();
        let (gx, gy) = (g.component(0), g.component(1));
        let d = f.component(0);
        let rx = self.conv.apply_sum(&[(d, 0, 1.0), (gx, 2, 1.0), (gy, 3, 1.0)]);
        let ry = self.conv.apply_sum(&[(d, 1, 1.0), (gx, 4, 1.0), (gy, 5, 1.0)]);
        let mut data = rx;
        data.extend(ry);
        GridField { spec: self.output, components: 2, data }
    }

    /// `R*(η m₂) = −(R_x η_x + R_y η_y)` sampled on the output grid.
    pub fn adjoint(&self, eta: &GridField) -> GridField {
        assert_eq!(eta.spec, self.input);
        assert_eq!(eta.components, 2);
        let spec = eta.spec;
        let ex = GridField { spec, components: 1, data: eta.component(0).to_vec() };
        let ey = GridField { spec, components: 1, data: eta.component(1).to_vec() };
        let gxx = ex.gradient();
        let gyy = ey.gradient();
        let data = self.conv.apply_sum(&[
            (ex.component(0), 0, -1.0),
            (gxx.component(0), 2, -1.0),
            (gxx.component(1), 3, -1.0),
            (ey.component(0), 1, -1.0),
            (gyy.component(0), 4, -1.0),
            (gyy.component(1), 5, -1.0),
        ]);
        GridField { spec: self.output, components: 1, data }
    }
}

/// `U(f m₂)` between grids of equal spacing by exact convolution.
pub struct PotentialConvolver {
    pub s: f64,
    pub input: GridSpec,
    pub output: GridSpec,
    conv: Convolver,
}

impl PotentialConvolver {
    pub fn new(s: f64, input: GridSpec, output: GridSpec) -> Result<Self> {
        if (s - 1.0).abs() < 1e-12 || !(s > 0.0 && s < 3.0) {
            return Err(Error::InvalidParameter(format!("potential needs s in (0,3), s != 1, got {s}")));
        }
        let w = PowerWeights::new(s - 1.0, input.h());
        let conv = Convolver::new(input.n, output.n, 1, |dx, dy, out| out[0] = w.weight(dx, dy));
        Ok(PotentialConvolver { s, input, output, conv })
    }

    pub fn potential(&self, f: &GridField) -> GridField {
        assert_eq!(f.spec, self.input);
        let c = -1.0 / (self.s - 1.0);
        let data = self.conv.apply_sum(&[(f.component(0), 0, c)]);
        GridField { spec: self.output, components: 1, data }
    }
}
