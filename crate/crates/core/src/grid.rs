//! Uniform square grids and the fields sampled on them.
//!
//! Sample `(i, j)` sits at `(-L + i h, -L + j h)` with `h = 2L/n`, so index
//! `n/2` is the origin. Each sample stands for the `h x h` cell centred on it.
//! Storage is row-major with `j` (the y index) as the row.

use crate::error::{Error, Result};
use crate::geometry::{Disk, Point2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_extent: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(half_extent: f64, n: usize) -> Result<Self> {
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid half extent {half_extent}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid resolution {n} must be a power of two >= 8"
            )));
        }
        Ok(GridSpec { half_extent, n })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_extent / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_extent + i as f64 * self.h()
    }

    pub fn point(&self, i: usize, j: usize) -> Point2 {
        Point2::new(self.coord(i), self.coord(j))
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn point_of(&self, k: usize) -> Point2 {
        self.point(k % self.n, k / self.n)
    }

    /// Same spacing, `factor` times as many samples per side, same centre.
    pub fn enlarged(&self, factor: usize) -> GridSpec {
        GridSpec { half_extent: self.half_extent * factor as f64, n: self.n * factor }
    }

    /// Same extent, twice the resolution.
    pub fn refined(&self) -> GridSpec {
        GridSpec { half_extent: self.half_extent, n: self.n * 2 }
    }

    /// Nearest sample index along one axis (clamped).
    pub fn nearest_index(&self, t: f64) -> usize {
        let k = ((t + self.half_extent) / self.h()).round();
        k.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Indices of samples whose cell centre lies in the disk.
    pub fn indices_in_disk(&self, d: &Disk) -> Vec<usize> {
        let h = self.h();
        let lo = |c: f64| (((c - d.radius + self.half_extent) / h).floor().max(0.0)) as usize;
        let hi = |c: f64| {
            (((c + d.radius + self.half_extent) / h).ceil()).clamp(0.0, (self.n - 1) as f64) as usize
        };
        let mut out = Vec::new();
        for j in lo(d.center.y)..=hi(d.center.y) {
            for i in lo(d.center.x)..=hi(d.center.x) {
                if d.contains(self.point(i, j)) {
                    out.push(self.index(i, j));
                }
            }
        }
        out
    }
}

/// Scalar (`components == 1`) or vector (`components == 2`) samples.
/// Component `c` occupies `data[c*n*n .. (c+1)*n*n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub spec: GridSpec,
    pub components: usize,
    pub data: Vec<f64>,
}

impl GridField {
    pub fn zeros(spec: GridSpec, components: usize) -> Self {
        assert!(components == 1 || components == 2);
        GridField { spec, components, data: vec![0.0; components * spec.len()] }
    }

    pub fn from_data(spec: GridSpec, components: usize, data: Vec<f64>) -> Result<Self> {
        if !(components == 1 || components == 2) || data.len() != components * spec.len() {
            return Err(Error::InvalidParameter(format!(
                "field with {} samples does not fit {} x {}^2",
                data.len(),
                components,
                spec.n
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite sample".into()));
        }
        Ok(GridField { spec, components, data })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(Point2) -> f64) -> Self {
        let data = (0..spec.len()).map(|k| f(spec.point_of(k))).collect();
        GridField { spec, components: 1, data }
    }

    pub fn from_vec_fn(spec: GridSpec, f: impl Fn(Point2) -> [f64; 2]) -> Self {
        let mut out = GridField::zeros(spec, 2);
        let m = spec.len();
        for k in 0..m {
            let v = f(spec.point_of(k));
            out.data[k] = v[0];
            out.data[m + k] = v[1];
        }
        out
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let m = self.spec.len();
        &self.data[c * m..(c + 1) * m]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let m = self.spec.len();
        &mut self.data[c * m..(c + 1) * m]
    }

    pub fn vec_at(&self, k: usize) -> [f64; 2] {
        let m = self.spec.len();
        [self.data[k], self.data[m + k]]
    }

    /// `h^2` times the sum of one component.
    pub fn integral(&self, c: usize) -> f64 {
        let h = self.spec.h();
        self.component(c).iter().sum::<f64>() * h * h
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Fraction of `∫|f|` carried by the outer 10% frame of the grid.
    pub fn boundary_fraction(&self) -> f64 {
        let n = self.spec.n;
        let w = (n / 10).max(1);
        let mut edge = 0.0;
        let mut total = 0.0;
        for c in 0..self.components {
            let d = self.component(c);
            for j in 0..n {
                for i in 0..n {
                    let v = d[j * n + i].abs();
                    total += v;
                    if i < w || j < w || i >= n - w || j >= n - w {
                        edge += v;
                    }
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }

    /// Bilinear interpolation of component `c`; zero outside the grid.
    pub fn interpolate(&self, c: usize, p: Point2) -> f64 {
        let s = self.spec;
        let h = s.h();
        let u = (p.x + s.half_extent) / h;
        let v = (p.y + s.half_extent) / h;
        if u < 0.0 || v < 0.0 || u > (s.n - 1) as f64 || v > (s.n - 1) as f64 {
            return 0.0;
        }
        let i = (u.floor() as usize).min(s.n - 2);
        let j = (v.floor() as usize).min(s.n - 2);
        let (a, b) = (u - i as f64, v - j as f64);
        let d = self.component(c);
        let f = |ii: usize, jj: usize| d[jj * s.n + ii];
        (1.0 - a) * (1.0 - b) * f(i, j) + a * (1.0 - b) * f(i + 1, j) + (1.0 - a) * b * f(i, j + 1)
            + a * b * f(i + 1, j + 1)
    }

    /// Copy of the central `spec` window of a larger field with the same spacing.
    pub fn crop(&self, spec: GridSpec) -> GridField {
        let big = self.spec.n;
        let off = (big - spec.n) / 2;
        let mut out = GridField::zeros(spec, self.components);
        for c in 0..self.components {
            let src = self.component(c);
            let dst = out.component_mut(c);
            for j in 0..spec.n {
                let row = (j + off) * big + off;
                dst[j * spec.n..(j + 1) * spec.n].copy_from_slice(&src[row..row + spec.n]);
            }
        }
        out
    }

    /// Embed into the centre of a larger grid with the same spacing.
    pub fn embed(&self, spec: GridSpec) -> GridField {
        let small = self.spec.n;
        let off = (spec.n - small) / 2;
        let mut out = GridField::zeros(spec, self.components);
        for c in 0..self.components {
            let src = self.component(c);
            let dst = out.component_mut(c);
            for j in 0..small {
                let row = (j + off) * spec.n + off;
                dst[row..row + small].copy_from_slice(&src[j * small..(j + 1) * small]);
            }
        }
        out
    }

    /// Five-point Laplacian of component 0 (zero on the outer ring).
    pub fn laplacian(&self) -> GridField {
        let n = self.spec.n;
        let h2 = self.spec.h() * self.spec.h();
        let d = self.component(0);
        let mut out = GridField::zeros(self.spec, 1);
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let k = j * n + i;
                out.data[k] = (d[k - 1] + d[k + 1] + d[k - n] + d[k + n] - 4.0 * d[k]) / h2;
            }
        }
        out
    }

    /// Central-difference gradient of component 0.
    pub fn gradient(&self) -> GridField {
        let n = self.spec.n;
        let h = self.spec.h();
        let d = self.component(0);
        let m = self.spec.len();
        let mut out = GridField::zeros(self.spec, 2);
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                let gx = match i {
                    0 => (d[k + 1] - d[k]) / h,
                    _ if i == n - 1 => (d[k] - d[k - 1]) / h,
                    _ => (d[k + 1] - d[k - 1]) / (2.0 * h),
                };
                let gy = match j {
                    0 => (d[k + n] - d[k]) / h,
                    _ if j == n - 1 => (d[k] - d[k - n]) / h,
                    _ => (d[k + n] - d[k - n]) / (2.0 * h),
                };
                out.data[k] = gx;
                out.data[m + k] = gy;
            }
        }
        out
    }
}

/// Relative L² distance `‖a − b‖ / ‖b‖` over matching slices.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        num += (x - y) * (x - y);
        den += y * y;
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(1.0, 6).is_err());
        assert!(GridSpec::new(1.0, 48).is_err());
        assert!(GridSpec::new(-1.0, 64).is_err());
        let s = GridSpec::new(2.0, 64).unwrap();
        assert_eq!(s.h() * 64.0, 4.0);
        assert_eq!(s.point(32, 32), Point2::ORIGIN);
    }

    #[test]
    fn uniform_density_integrates_to_area() {
        let s = GridSpec::new(1.0, 64).unwrap();
        let f = GridField::from_fn(s, |_| 1.0);
        assert!((f.integral(0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn crop_inverts_embed() {
        let s = GridSpec::new(1.0, 16).unwrap();
        let f = GridField::from_fn(s, |p| p.x + 3.0 * p.y);
        let big = f.embed(s.enlarged(4));
        assert_eq!(big.crop(s), f);
        assert!((big.spec.h() - s.h()).abs() < 1e-15);
    }

    #[test]
    fn interpolation_is_exact_for_bilinear() {
        let s = GridSpec::new(1.0, 32).unwrap();
        let f = GridField::from_fn(s, |p| 1.0 + 2.0 * p.x - p.y + 0.5 * p.x * p.y);
        let p = Point2::new(0.123, -0.377);
        let want = 1.0 + 2.0 * p.x - p.y + 0.5 * p.x * p.y;
        assert!((f.interpolate(0, p) - want).abs() < 1e-12);
    }

    #[test]
    fn laplacian_of_quadratic() {
        let s = GridSpec::new(1.0, 32).unwrap();
        let f = GridField::from_fn(s, |p| p.x * p.x + 2.0 * p.y * p.y);
        let l = f.laplacian();
        assert!((l.data[s.index(10, 20)] - 6.0).abs() < 1e-9);
    }
}
