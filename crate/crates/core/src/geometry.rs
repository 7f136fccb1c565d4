//! Points, disks and exact disk/rectangle overlap areas.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Sup-norm, used for square (cell) membership.
    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(a: [f64; 2]) -> Self {
        Point2::new(a[0], a[1])
    }
}

/// Closed disk `D(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point2,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point2, radius: f64) -> Self {
        debug_assert!(radius > 0.0, "disk radius must be positive");
        Disk { center, radius }
    }

    pub fn contains(&self, p: Point2) -> bool {
        (p - self.center).norm_sq() <= self.radius * self.radius
    }

    /// Concentric dilate `k D`.
    pub fn scaled(&self, k: f64) -> Disk {
        Disk::new(self.center, self.radius * k)
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    pub fn intersects(&self, o: &Disk) -> bool {
        self.center.dist(o.center) <= self.radius + o.radius
    }

    /// Exact area of the intersection with the axis-aligned rectangle
    /// `[x0, x1] x [y0, y1]`.
    pub fn rect_overlap(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        let r = self.radius;
        let (x0, x1) = (x0 - self.center.x, x1 - self.center.x);
        let (y0, y1) = (y0 - self.center.y, y1 - self.center.y);
        let a = x0.max(-r);
        let b = x1.min(r);
        if a >= b || y0 >= r || y1 <= -r {
            return 0.0;
        }
        let mut cuts = vec![a, b];
        for y in [y0, y1] {
            if y.abs() < r {
                let w = (r * r - y * y).sqrt();
                for c in [-w, w] {
                    if c > a && c < b {
                        cuts.push(c);
                    }
                }
            }
        }
        cuts.sort_by(|p, q| p.total_cmp(q));
        let half_chord = |x: f64| (r * r - x * x).max(0.0).sqrt();
        // antiderivative of sqrt(r^2 - x^2)
        let prim = |x: f64| {
            let t = (x / r).clamp(-1.0, 1.0);
            0.5 * (x * half_chord(x) + r * r * t.asin())
        };
        let mut area = 0.0;
        for w in cuts.windows(2) {
            let (p, q) = (w[0], w[1]);
            if q <= p {
                continue;
            }
            let m = 0.5 * (p + q);
            let hm = half_chord(m);
            let upper_is_arc = y1 >= hm;
            let lower_is_arc = y0 <= -hm;
            let top = if upper_is_arc { hm } else { y1 };
            let bot = if lower_is_arc { -hm } else { y0 };
            if top <= bot {
                continue;
            }
            let arcs = upper_is_arc as u8 + lower_is_arc as u8;
            let mut piece = f64::from(arcs) * (prim(q) - prim(p));
            if !upper_is_arc {
                piece += y1 * (q - p);
            }
            if !lower_is_arc {
                piece -= y0 * (q - p);
            }
            area += piece;
        }
        area.max(0.0)
    }
}

/// Planar regions that only need a membership test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Disk(Disk),
    /// Closed axis-aligned square.
    Square { center: Point2, half: f64 },
    /// `pad`-neighbourhood of `outer ∖ ∪ removed`, tested conservatively:
    /// a point belongs if it is within `pad` of `outer` and not deeper than
    /// `pad` inside any removed disk.
    Carved { outer: Disk, removed: Vec<Disk>, pad: f64 },
}

impl Region {
    pub fn contains(&self, p: Point2) -> bool {
        match self {
            Region::Disk(d) => d.contains(p),
            Region::Square { center, half } => (p - *center).max_abs() <= *half,
            Region::Carved { outer, removed, pad } => {
                p.dist(outer.center) <= outer.radius + pad
                    && removed.iter().all(|d| p.dist(d.center) >= d.radius - pad)
            }
        }
    }

    /// A disk containing the region.
    pub fn bounding_disk(&self) -> Disk {
        match self {
            Region::Disk(d) => *d,
            Region::Square { center, half } => Disk::new(*center, half * std::f64::consts::SQRT_2),
            Region::Carved { outer, pad, .. } => Disk::new(outer.center, outer.radius + pad),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn overlap_of_enclosed_disk_is_its_area() {
        let d = Disk::new(Point2::new(0.3, -0.2), 0.5);
        let a = d.rect_overlap(-2.0, 2.0, -2.0, 2.0);
        assert!((a - PI * 0.25).abs() < 1e-14);
    }

    #[test]
    fn quadrant_overlap() {
        let d = Disk::new(Point2::ORIGIN, 1.0);
        let a = d.rect_overlap(0.0, 5.0, 0.0, 5.0);
        assert!((a - PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn overlaps_of_a_tiling_sum_to_disk_area() {
        let d = Disk::new(Point2::new(0.137, 0.071), 0.83);
        let h = 0.1;
        let mut total = 0.0;
        for i in -12..12 {
            for j in -12..12 {
                let (x0, y0) = (i as f64 * h, j as f64 * h);
                total += d.rect_overlap(x0, x0 + h, y0, y0 + h);
            }
        }
        assert!((total - d.area()).abs() < 1e-12);
    }

    #[test]
    fn overlap_against_monte_carlo_oracle() {
        // fine midpoint count as oracle
        let d = Disk::new(Point2::new(0.2, 0.1), 0.7);
        let (x0, x1, y0, y1) = (0.0, 1.0, -0.3, 0.4);
        let n = 2000;
        let mut hits = 0usize;
        for i in 0..n {
            for j in 0..n {
                let p = Point2::new(
                    x0 + (i as f64 + 0.5) * (x1 - x0) / n as f64,
                    y0 + (j as f64 + 0.5) * (y1 - y0) / n as f64,
                );
                hits += d.contains(p) as usize;
            }
        }
        let mc = hits as f64 / (n * n) as f64 * (x1 - x0) * (y1 - y0);
        let exact = d.rect_overlap(x0, x1, y0, y1);
        assert!((mc - exact).abs() < 1e-4, "{mc} vs {exact}");
    }

    #[test]
    fn closed_disk_contains_boundary() {
        let d = Disk::new(Point2::ORIGIN, 1.0);
        assert!(d.contains(Point2::new(1.0, 0.0)));
        assert!(!d.contains(Point2::new(1.0 + 1e-12, 0.0)));
    }
}
