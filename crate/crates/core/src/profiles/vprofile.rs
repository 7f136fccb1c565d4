//! The convex profile `v` and `V(x) = v(|x|)`.
//!
//! `v'' = 2` on `[0, 1]`, `v'' = 2 q(t)` on `[1, 2]` and `v'' = 0` beyond,
//! where `q(t) = 1 − S(t − 1)` and `S` is the normalised integral of the bump
//! `exp(−1/(u(1 − u)))`.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::quadrature::gl8;
use std::sync::OnceLock;

const TABLE: usize = 4000;

fn bump(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        (-1.0 / (u * (1.0 - u))).exp()
    }
}

fn gl_integral(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gl8();
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(w).map(|(xi, wi)| wi * f(m + r * xi)).sum::<f64>() * r
}

/// Cubic Hermite data on `[1, 2]`: values and derivatives at the nodes.
struct Tables {
    q: Vec<f64>,
    dq: Vec<f64>,
    vp: Vec<f64>,
    v: Vec<f64>,
}

fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, dt: f64, u: f64) -> f64 {
    let (u2, u3) = (u * u, u * u * u);
    (2.0 * u3 - 3.0 * u2 + 1.0) * y0 + (u3 - 2.0 * u2 + u) * dt * d0 + (-2.0 * u3 + 3.0 * u2) * y1
        + (u3 - u2) * dt * d1
}

/// `∫_0^dt` of the Hermite cubic.
fn hermite_integral(y0: f64, d0: f64, y1: f64, d1: f64, dt: f64) -> f64 {
    dt * (0.5 * (y0 + y1) + dt * (d0 - d1) / 12.0)
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let dt = 1.0 / TABLE as f64;
        let mut cum = vec![0.0; TABLE + 1];
        for k in 0..TABLE {
            cum[k + 1] = cum[k] + gl_integral(bump, k as f64 * dt, (k + 1) as f64 * dt);
        }
        let z = cum[TABLE];
        let q: Vec<f64> = cum.iter().map(|c| 1.0 - c / z).collect();
        let dq: Vec<f64> = (0..=TABLE).map(|k| -bump(k as f64 * dt) / z).collect();
        let mut vp = vec![2.0; TABLE + 1];
        for k in 0..TABLE {
            vp[k + 1] = vp[k] + 2.0 * hermite_integral(q[k], dq[k], q[k + 1], dq[k + 1], dt);
        }
        let mut v = vec![1.0; TABLE + 1];
        for k in 0..TABLE {
            v[k + 1] = v[k] + hermite_integral(vp[k], 2.0 * q[k], vp[k + 1], 2.0 * q[k + 1], dt);
        }
        Tables { q, dq, vp, v }
    })
}

/// The fixed convex profile. Zero-sized; all data lives in shared tables.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VProfile;

impl VProfile {
    pub fn new() -> Self {
        VProfile
    }

    /// `v`, `v'` or `v''` at `t ≥ 0` for `order` 0, 1, 2.
    pub fn eval(&self, t: f64, order: u8) -> f64 {
        assert!(t >= 0.0, "v is defined on t >= 0");
        if t <= 1.0 {
            return match order {
                0 => t * t,
                1 => 2.0 * t,
                _ => 2.0,
            };
        }
        let tb = tables();
        if t >= 2.0 {
            return match order {
                0 => tb.v[TABLE] + tb.vp[TABLE] * (t - 2.0),
                1 => tb.vp[TABLE],
                _ => 0.0,
            };
        }
        let dt = 1.0 / TABLE as f64;
        let x = (t - 1.0) * TABLE as f64;
        let k = (x.floor() as usize).min(TABLE - 1);
        let u = x - k as f64;
        match order {
            0 => hermite(tb.v[k], tb.vp[k], tb.v[k + 1], tb.vp[k + 1], dt, u),
            1 => hermite(tb.vp[k], 2.0 * tb.q[k], tb.vp[k + 1], 2.0 * tb.q[k + 1], dt, u),
            _ => 2.0 * hermite(tb.q[k], tb.dq[k], tb.q[k + 1], tb.dq[k + 1], dt, u),
        }
    }

    pub fn v(&self, t: f64) -> f64 {
        self.eval(t, 0)
    }

    pub fn dv(&self, t: f64) -> f64 {
        self.eval(t, 1)
    }

    /// Largest slope of `v`, reached for `t ≥ 2`.
    pub fn max_slope(&self) -> f64 {
        tables().vp[TABLE]
    }

    pub fn big_v(&self, x: [f64; 2]) -> f64 {
        self.v(x[0].hypot(x[1]))
    }

    pub fn big_v_grad(&self, x: [f64; 2]) -> [f64; 2] {
        let r = x[0].hypot(x[1]);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let k = self.dv(r) / r;
        [k * x[0], k * x[1]]
    }

    /// `v*(τ) = sup_t (τ t − v(t))` on the slope range `[0, v'(2)]`.
    pub fn legendre(&self, tau: f64) -> Result<f64> {
        let top = self.max_slope();
        if !(0.0..=top * (1.0 + 1e-15)).contains(&tau) {
            return Err(Error::InvalidParameter(format!("tau = {tau} outside the slope range [0, {top}]")));
        }
        let t = self.slope_inverse(tau.min(top));
        Ok((tau * t - self.v(t)).max(0.0))
    }

    /// The `t ∈ [0, 2]` with `v'(t) = τ`.
    fn slope_inverse(&self, tau: f64) -> f64 {
        if tau <= 2.0 {
            return 0.5 * tau;
        }
        let (mut lo, mut hi) = (1.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.dv(mid) < tau {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// `max_τ (τ t − v*(τ))` by golden-section search over the slope range.
    pub fn legendre_biconjugate(&self, t: f64) -> f64 {
        let f = |tau: f64| tau * t - self.legendre(tau).unwrap_or(f64::INFINITY);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.0, self.max_slope());
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while b - a > 1e-12 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        f(a).max(f(b)).max(fc).max(fd)
    }
}

/// `V(x)` for a point argument.
pub fn big_v_at(p: Point2) -> f64 {
    VProfile.big_v([p.x, p.y])
}

/// Worst case of one profile inequality `lhs ≤ rhs` over a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub name: &'static str,
    pub points: usize,
    pub violations: usize,
    /// Largest `lhs − rhs`.
    pub worst: f64,
}

impl VProfile {
    /// The six inequalities `min(t,t²) ≤ v`, `v ≤ t²`, `v′ ≤ 4`, `tv′ ≤ 2v`,
    /// `v(at) ≤ a²v(t)` and `v′² ≤ 4v` on a `nt × na` lattice of
    /// `t ∈ [0, t_max]`, `a ∈ [1, a_max]`; equality cases get a relative slack of 1e-12.
    pub fn inequality_sweep(&self, nt: usize, na: usize, t_max: f64, a_max: f64) -> Vec<SweepResult> {
        let ts: Vec<f64> = (0..nt).map(|i| t_max * i as f64 / (nt - 1).max(1) as f64).collect();
        let as_: Vec<f64> = (0..na).map(|j| 1.0 + (a_max - 1.0) * j as f64 / (na - 1).max(1) as f64).collect();
        let mut out: Vec<SweepResult> = ["min(t,t^2) <= v", "v <= t^2", "v' <= 4", "t v' <= 2 v", "v(at) <= a^2 v(t)", "v'^2 <= 4 v"]
            .iter()
            .map(|&name| SweepResult { name, points: 0, violations: 0, worst: f64::NEG_INFINITY })
            .collect();
        let mut record = |k: usize, lhs: f64, rhs: f64| {
            let r = &mut out[k];
            r.points += 1;
            let gap = lhs - rhs;
            r.worst = r.worst.max(gap);
            if gap > 1e-12 * rhs.abs().max(1.0) {
                r.violations += 1;
            }
        };
        for &t in &ts {
            let (v, dv) = (self.v(t), self.dv(t));
            for &a in &as_ {
                record(0, t.min(t * t), v);
                record(1, v, t * t);
                record(2, dv, 4.0);
                record(3, t * dv, 2.0 * v);
                record(4, self.v(a * t), a * a * v);
                record(5, dv * dv, 4.0 * v);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let v = VProfile::new();
        assert_eq!(v.v(0.5), 0.25);
        assert_eq!(v.dv(0.5), 1.0);
        assert!((v.v(3.0) - (v.v(2.0) + v.dv(2.0))).abs() < 1e-12);
        assert!((3.0..=9.0).contains(&v.v(3.0)));
    }

    #[test]
    fn slope_at_two_is_three() {
        // the smoothstep is symmetric, so ∫q = 1/2
        assert!((VProfile.max_slope() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn table_is_smooth_across_nodes() {
        let v = VProfile;
        for t in [1.0f64, 1.25, 1.5, 1.999, 2.0] {
            let e: f64 = 1e-7;
            let lo = (t - e).max(0.0);
            let num = (v.v(t + e) - v.v(lo)) / (t + e - lo);
            assert!((num - v.dv(t)).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn big_v_examples() {
        let v = VProfile;
        assert_eq!(v.big_v([0.0, 0.0]), 0.0);
        assert!((v.big_v([0.6, 0.8]) - 1.0).abs() < 1e-15);
        assert_eq!(v.big_v_grad([0.0, 0.0]), [0.0, 0.0]);
    }

    #[test]
    fn inequality_sweep_is_clean() {
        let r = VProfile.inequality_sweep(400, 250, 20.0, 10.0);
        assert_eq!(r.len(), 6);
        for x in &r {
            assert_eq!(x.points, 100_000);
            assert_eq!(x.violations, 0, "{x:?}");
        }
    }

    #[test]
    fn legendre_examples() {
        let v = VProfile;
        assert_eq!(v.legendre(0.0).unwrap(), 0.0);
        assert!((v.legendre(1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((v.legendre(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(v.legendre(3.5).is_err());
        assert!(v.legendre(-0.1).is_err());
    }
}
