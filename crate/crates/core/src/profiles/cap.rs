//! The standard cap pair: `φ∘(x) = e^{1−|x|²}` and the vector field `ψ∘`
//! with `R*(ψ∘ m₂) = φ∘`, i.e. `ψ̂∘(ξ) = i σ^{−1} ξ |ξ|^{1−s} φ̂∘(ξ)`.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::grid::{GridField, GridSpec};
use crate::riesz::{adjoint_fft, RieszEngine};
use crate::spectral::{freq_index, Fft2};
use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma;
use std::f64::consts::{E, PI};

pub fn phi_circ(p: Point2) -> f64 {
    (1.0 - p.norm_sq()).exp()
}

/// `φ̂∘(ξ) = e π e^{−π²|ξ|²}`.
pub fn phi_circ_hat(r: f64) -> f64 {
    E * PI * (-PI * PI * r * r).exp()
}

#[derive(Debug, Clone)]
pub struct StandardCap {
    pub s: f64,
    pub sigma: f64,
    /// `ψ∘` sampled on the requested grid.
    pub psi: GridField,
    /// `sup |ψ∘(x)| (1 + |x|)^{4−s}` over the grid.
    pub decay_constant: f64,
    /// Radial profile: `ψ∘(x) = p(|x|) x/|x|`, tabulated at `k h`.
    radial: Vec<f64>,
    radial_h: f64,
    /// `p(r) ≈ tail_coef · r^{s−4}` beyond the table.
    pub tail_coef: f64,
}

/// Leading term of `p(r)` as `r → ∞`, from `φ̂∘(0)` and the Hankel integral
/// `∫ ρ^{3−s} J₁(aρ) dρ = 2^{3−s} a^{s−4} Γ((5−s)/2) / Γ((s−1)/2)`.
fn tail_coefficient(s: f64, sigma: f64) -> f64 {
    let g = gamma(0.5 * (s - 1.0));
    if !g.is_finite() {
        return 0.0;
    }
    let a = 2.0 * PI;
    -2.0 * PI / sigma * phi_circ_hat(0.0) * 2f64.powf(3.0 - s) * a.powf(s - 4.0) * gamma(0.5 * (5.0 - s)) / g
}

/// `ψ∘` on a grid four times larger than `spec` by sampling its spectrum;
/// the field is radial, so one inverse FFT of the first component suffices.
pub fn build_standard_cap(s: f64, spec: GridSpec) -> Result<StandardCap> {
    let eng = RieszEngine::new(s)?;
    if spec.half_extent < 16.0 {
        return Err(Error::InvalidParameter(format!(
            "standard cap needs L >= 16 for the decay window, got {}",
            spec.half_extent
        )));
    }
    let big = spec.enlarged(4);
    let n = big.n;
    let period = 2.0 * big.half_extent;
    let fft = Fft2::new(n);
    let inv_sigma = 1.0 / eng.sigma;
    let mut buf = vec![Complex64::default(); n * n];
    buf.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
        let ky = freq_index(r, n);
        let eta = ky as f64 / period;
        for (c, v) in row.iter_mut().enumerate() {
            let kx = freq_index(c, n);
            if kx == -(n as i64) / 2 {
                continue;
            }
            let xi = kx as f64 / period;
            let rho = xi.hypot(eta);
            if rho == 0.0 {
                continue;
            }
            // (−1)^{kx+ky} moves the origin to the grid centre
            let sign = if (kx + ky).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            *v = Complex64::new(0.0, sign * inv_sigma * xi * rho.powf(1.0 - s) * phi_circ_hat(rho));
        }
    });
    fft.inverse(&mut buf);
    let scale = 1.0 / (period * period);
    let psi_x: Vec<f64> = buf.iter().map(|z| z.re * scale).collect();
    // ψ_y(x, y) = ψ_x(y, x)
    let mut data = psi_x.clone();
    data.resize(2 * n * n, 0.0);
    for j in 0..n {
        for i in 0..n {
            data[n * n + j * n + i] = psi_x[i * n + j];
        }
    }
    let full = GridField::from_data(big, 2, data)?;
    let psi = full.crop(spec);
    let mid = n / 2;
    let keep = spec.n; // radii up to 2L, well inside the periodic cell
    let radial: Vec<f64> = (0..=keep).map(|k| psi_x[mid * n + mid + k]).collect();
    let decay_constant = (0..spec.len())
        .map(|k| {
            let v = psi.vec_at(k);
            v[0].hypot(v[1]) * (1.0 + spec.point_of(k).norm()).powf(4.0 - s)
        })
        .fold(0.0, f64::max);
    Ok(StandardCap {
        s,
        sigma: eng.sigma,
        psi,
        decay_constant,
        radial,
        radial_h: spec.h(),
        tail_coef: tail_coefficient(s, eng.sigma),
    })
}

impl StandardCap {
    /// Radial profile `p(r)`: cubic interpolation in the table, the
    /// asymptotic power law beyond it.
    pub fn profile(&self, r: f64) -> f64 {
        let x = r / self.radial_h;
        let last = self.radial.len() - 1;
        if x >= (last - 1) as f64 {
            return self.tail_coef * r.powf(self.s - 4.0);
        }
        let k = x.floor() as usize;
        let t = x - k as f64;
        // odd extension p(−r) = −p(r) keeps the stencil valid at the origin
        let at = |i: i64| if i < 0 { -self.radial[(-i) as usize] } else { self.radial[i as usize] };
        let k = k as i64;
        let (p0, p1, p2, p3) = (at(k - 1), at(k), at(k + 1), at(k + 2));
        p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)))
    }

    pub fn psi_at(&self, x: Point2) -> [f64; 2] {
        let r = x.norm();
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let p = self.profile(r) / r;
        [p * x.x, p * x.y]
    }

    /// Largest radius covered by the table.
    pub fn table_radius(&self) -> f64 {
        (self.radial.len() - 2) as f64 * self.radial_h
    }

    /// Least-squares slope of `log |p|` against `log r` on `[r0, r1]`.
    pub fn tail_slope(&self, r0: f64, r1: f64) -> f64 {
        let pts: Vec<(f64, f64)> = (0..self.radial.len())
            .map(|k| (k as f64 * self.radial_h, self.radial[k]))
            .filter(|&(r, p)| r >= r0 && r <= r1 && p != 0.0)
            .map(|(r, p)| (r.ln(), p.abs().ln()))
            .collect();
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
        num / den
    }
}

/// Largest relative error of `R*(ψ∘ m₂) = φ∘` on the closed unit disk, with
/// `R*` applied to the sampled `ψ∘` through the adjoint multiplier.
pub fn cap_identity_error(cap: &StandardCap) -> Result<f64> {
    let out = adjoint_fft(&cap.psi, cap.s)?.field;
    let spec = out.spec;
    Ok((0..spec.len())
        .filter(|&k| spec.point_of(k).norm() <= 1.0)
        .map(|k| {
            let want = phi_circ(spec.point_of(k));
            (out.data[k] - want).abs() / want
        })
        .fold(0.0, f64::max))
}
