//! Cell-integrated kernel weights for grid convolutions.
//!
//! Weights are integrals of the kernel over the `h x h` cell at a given cell
//! offset. Cells within [`NEAR`] of the origin use adaptive Gauss-Legendre
//! quadrature, the origin cell uses closed forms, the rest are midpoint values.

use crate::geometry::Point2;
use crate::quadrature::{cell_integral, square_power_integral};
use rayon::prelude::*;

/// Offsets (in sup norm) integrated by quadrature rather than midpoint.
pub const NEAR: i64 = 6;

fn near_index(dx: i64, dy: i64) -> usize {
    let w = 2 * NEAR + 1;
    ((dy + NEAR) * w + dx + NEAR) as usize
}

fn near_offsets() -> Vec<(i64, i64)> {
    let mut v = Vec::new();
    for dy in -NEAR..=NEAR {
        for dx in -NEAR..=NEAR {
            v.push((dx, dy));
        }
    }
    v
}

/// Weights of the even kernel `|z|^{-beta}`, `beta < 2`.
#[derive(Debug, Clone)]
pub struct PowerWeights {
    pub beta: f64,
    pub h: f64,
    near: Vec<f64>,
}

impl PowerWeights {
    pub fn new(beta: f64, h: f64) -> Self {
        assert!(beta < 2.0, "power kernel must be locally integrable");
        let near = near_offsets()
            .into_par_iter()
            .map(|(dx, dy)| {
                if dx == 0 && dy == 0 {
                    square_power_integral(beta, 0.5 * h)
                } else {
                    let c = Point2::new(dx as f64 * h, dy as f64 * h);
                    cell_integral(&|z: Point2| [z.norm().powf(-beta)], c, 0.5 * h)[0]
                }
            })
            .collect();
        PowerWeights { beta, h, near }
    }

    pub fn weight(&self, dx: i64, dy: i64) -> f64 {
        if dx.abs() <= NEAR && dy.abs() <= NEAR {
            self.near[near_index(dx, dy)]
        } else {
            let r = (dx as f64).hypot(dy as f64) * self.h;
            self.h * self.h * r.powf(-self.beta)
        }
    }
}

/// Weights of the Riesz kernel `z/|z|^{s+1}` together with the first-moment
/// correction `M_ab = ∫ K_a(z) (d h − z)_b dz`, which carries the linear part of
/// the density inside each near cell.
#[derive(Debug, Clone)]
pub struct RieszWeights {
    pub s: f64,
    pub h: f64,
    near: Vec<[f64; 6]>,
}

impl RieszWeights {
    pub fn new(s: f64, h: f64) -> Self {
        let near = near_offsets()
            .into_par_iter()
            .map(|(dx, dy)| {
                if dx == 0 && dy == 0 {
                    // odd kernel: zeroth moment vanishes, ∫ z_a z_b |z|^{-s-1} = δ_ab/2 ∫|z|^{1-s}
                    let m = -0.5 * square_power_integral(s - 1.0, 0.5 * h);
                    [0.0, 0.0, m, 0.0, 0.0, m]
                } else {
                    let c = Point2::new(dx as f64 * h, dy as f64 * h);
                    let f = |z: Point2| {
                        let k = z.norm().powf(-s - 1.0);
                        let (kx, ky) = (z.x * k, z.y * k);
                        let (ux, uy) = (c.x - z.x, c.y - z.y);
                        [kx, ky, kx * ux, kx * uy, ky * ux, ky * uy]
                    };
                    cell_integral(&f, c, 0.5 * h)
                }
            })
            .collect();
        RieszWeights { s, h, near }
    }

    /// `[W_x, W_y, M_xx, M_xy, M_yx, M_yy]` at the given offset.
    pub fn weights(&self, dx: i64, dy: i64) -> [f64; 6] {
        if dx.abs() <= NEAR && dy.abs() <= NEAR {
            self.near[near_index(dx, dy)]
        } else {
            let z = Point2::new(dx as f64 * self.h, dy as f64 * self.h);
            let k = self.h * self.h * z.norm().powf(-self.s - 1.0);
            [z.x * k, z.y * k, 0.0, 0.0, 0.0, 0.0]
        }
    }

    pub fn is_near(dx: i64, dy: i64) -> bool {
        dx.abs() <= NEAR && dy.abs() <= NEAR
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riesz_weights_are_odd() {
        let w = RieszWeights::new(1.5, 0.1);
        let a = w.weights(2, -1);
        let b = w.weights(-2, 1);
        assert!((a[0] + b[0]).abs() < 1e-14 && (a[1] + b[1]).abs() < 1e-14);
        assert_eq!(w.weights(0, 0)[0], 0.0);
    }

    #[test]
    fn power_weights_sum_to_disk_like_integral() {
        // Σ over the 13x13 block equals ∫ over the square of half side 6.5h
        let h = 0.05;
        let w = PowerWeights::new(0.5, h);
        let mut s = 0.0;
        for dy in -NEAR..=NEAR {
            for dx in -NEAR..=NEAR {
                s += w.weight(dx, dy);
            }
        }
        let exact = square_power_integral(0.5, (NEAR as f64 + 0.5) * h);
        assert!((s - exact).abs() / exact < 1e-7, "{s} {exact}");
    }
}
