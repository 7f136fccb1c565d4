//! Measures on the plane: weighted atoms, sums of smooth caps, gridded densities.

mod cantor_square;
mod json;

pub use cantor_square::{make_cantor_square, CantorSquare};
pub use json::MeasureDoc;

use crate::error::{Error, Result};
use crate::geometry::{Disk, Point2, Region};
use crate::grid::GridField;
use crate::quadrature::integrate_1d;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub at: Point2,
    pub weight: f64,
}

/// Shape of a cap: the bump `exp(1 − 1/(1 − u²))` on `|u| < 1`, optionally
/// flattened to 1 on `|u| ≤ plateau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapProfile {
    pub plateau: f64,
}

impl Default for CapProfile {
    fn default() -> Self {
        CapProfile { plateau: 0.0 }
    }
}

impl CapProfile {
    pub fn shape(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return 0.0;
        }
        if u <= self.plateau {
            return 1.0;
        }
        let t = (u - self.plateau) / (1.0 - self.plateau);
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }

    /// `∫_{|u|<1} shape(|u|) du`.
    pub fn unit_integral(&self) -> f64 {
        2.0 * PI * integrate_1d(|t| self.shape(t) * t, 0.0, 1.0, 64)
    }
}

/// A smooth bump of given mass supported in `support`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub support: Disk,
    pub mass: f64,
    pub profile: CapProfile,
}

impl Cap {
    pub fn new(support: Disk, mass: f64) -> Self {
        Cap { support, mass, profile: CapProfile::default() }
    }

    pub fn peak_density(&self) -> f64 {
        let r = self.support.radius;
        self.mass / (r * r * self.profile.unit_integral())
    }

    pub fn density(&self, p: Point2) -> f64 {
        let u = p.dist(self.support.center) / self.support.radius;
        if u >= 1.0 {
            0.0
        } else {
            self.peak_density() * self.profile.shape(u)
        }
    }

    /// Mass inside a disk, by polar quadrature over the cap support.
    pub fn mass_in(&self, d: &Disk) -> f64 {
        let c = self.support;
        let gap = c.center.dist(d.center);
        if gap + c.radius <= d.radius {
            return self.mass;
        }
        if gap >= c.radius + d.radius {
            return 0.0;
        }
        let (nr, nt) = (96usize, 192usize);
        let peak = self.peak_density();
        let mut sum = 0.0;
        for i in 0..nr {
            let u = (i as f64 + 0.5) / nr as f64;
            let shape = self.profile.shape(u);
            for k in 0..nt {
                let t = 2.0 * PI * (k as f64 + 0.5) / nt as f64;
                let p = c.center + Point2::new(t.cos(), t.sin()) * (u * c.radius);
                if d.contains(p) {
                    sum += shape * u;
                }
            }
        }
        peak * sum * c.radius * c.radius * (1.0 / nr as f64) * (2.0 * PI / nt as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Atomic(Vec<Atom>),
    CapSum(Vec<Cap>),
    Gridded(GridField),
}

impl Measure {
    pub fn atoms(points: &[(Point2, f64)]) -> Measure {
        Measure::Atomic(points.iter().map(|&(at, weight)| Atom { at, weight }).collect())
    }

    pub fn single(at: Point2, weight: f64) -> Measure {
        Measure::Atomic(vec![Atom { at, weight }])
    }

    /// Checks finiteness, positivity where required and cap disjointness.
    pub fn validate(&self) -> Result<()> {
        match self {
            Measure::Atomic(a) => {
                if a.iter().any(|x| !x.at.is_finite() || !x.weight.is_finite()) {
                    return Err(Error::InvalidParameter("non-finite atom".into()));
                }
            }
            Measure::CapSum(caps) => {
                for (i, c) in caps.iter().enumerate() {
                    if !(c.mass > 0.0 && c.support.radius > 0.0) {
                        return Err(Error::InvalidParameter(format!("cap {i} has non-positive mass or radius")));
                    }
                    for d in &caps[..i] {
                        let gap = c.support.center.dist(d.support.center);
                        if gap < c.support.radius + d.support.radius {
                            return Err(Error::InvalidParameter(format!("cap {i} overlaps an earlier cap")));
                        }
                    }
                }
            }
            Measure::Gridded(f) => {
                if f.components != 1 || f.data.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("gridded density must be finite scalar".into()));
                }
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            Measure::Atomic(a) => a.iter().map(|x| x.weight).sum(),
            Measure::CapSum(c) => c.iter().map(|x| x.mass).sum(),
            Measure::Gridded(f) => f.integral(0),
        }
    }

    /// Mass of the closed disk; grid cells count when their centre is inside.
    pub fn ball_mass(&self, d: &Disk) -> f64 {
        match self {
            Measure::Atomic(a) => a.iter().filter(|x| d.contains(x.at)).map(|x| x.weight).sum(),
            Measure::CapSum(c) => c.iter().map(|x| x.mass_in(d)).sum(),
            Measure::Gridded(f) => {
                let h = f.spec.h();
                f.spec.indices_in_disk(d).iter().map(|&k| f.data[k]).sum::<f64>() * h * h
            }
        }
    }

    /// Mass inside a region (atoms and grid cells by point membership, caps by
    /// their centre).
    pub fn region_mass(&self, r: &Region) -> f64 {
        match self {
            Measure::Atomic(a) => a.iter().filter(|x| r.contains(x.at)).map(|x| x.weight).sum(),
            Measure::CapSum(c) => c.iter().filter(|x| r.contains(x.support.center)).map(|x| x.mass).sum(),
            Measure::Gridded(f) => {
                let h = f.spec.h();
                (0..f.spec.len()).filter(|&k| r.contains(f.spec.point_of(k))).map(|k| f.data[k]).sum::<f64>() * h * h
            }
        }
    }

    /// Restriction to a region.
    pub fn restrict(&self, keep: impl Fn(Point2) -> bool) -> Measure {
        match self {
            Measure::Atomic(a) => Measure::Atomic(a.iter().copied().filter(|x| keep(x.at)).collect()),
            Measure::CapSum(c) => Measure::CapSum(c.iter().copied().filter(|x| keep(x.support.center)).collect()),
            Measure::Gridded(f) => {
                let mut g = f.clone();
                for k in 0..f.spec.len() {
                    if !keep(f.spec.point_of(k)) {
                        g.data[k] = 0.0;
                    }
                }
                Measure::Gridded(g)
            }
        }
    }

    /// Point masses representing the measure (grid cells become atoms at their centres).
    pub fn as_atoms(&self) -> Vec<Atom> {
        match self {
            Measure::Atomic(a) => a.clone(),
            Measure::CapSum(c) => c.iter().map(|x| Atom { at: x.support.center, weight: x.mass }).collect(),
            Measure::Gridded(f) => {
                let h2 = f.spec.h() * f.spec.h();
                (0..f.spec.len())
                    .filter(|&k| f.data[k] != 0.0)
                    .map(|k| Atom { at: f.spec.point_of(k), weight: f.data[k] * h2 })
                    .collect()
            }
        }
    }

    pub fn scaled(&self, k: f64) -> Measure {
        match self {
            Measure::Atomic(a) => Measure::Atomic(a.iter().map(|x| Atom { at: x.at, weight: x.weight * k }).collect()),
            Measure::CapSum(c) => Measure::CapSum(c.iter().map(|x| Cap { mass: x.mass * k, ..*x }).collect()),
            Measure::Gridded(f) => {
                let mut g = f.clone();
                g.data.iter_mut().for_each(|v| *v *= k);
                Measure::Gridded(g)
            }
        }
    }
}

/// Vector-valued measures, the inputs of the adjoint transform.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorMeasure {
    Atomic(Vec<(Point2, [f64; 2])>),
    Gridded(GridField),
}

/// Largest `μ(D)/r^s` over the disks; the empirical growth constant.
pub fn growth_constant(mu: &Measure, s: f64, disks: &[Disk]) -> Result<f64> {
    if disks.is_empty() {
        return Err(Error::EmptyFamily);
    }
    Ok(disks.iter().map(|d| mu.ball_mass(d) / d.radius.powf(s)).fold(0.0, f64::max))
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Deterministic low-discrepancy disk family: Halton centres in the square
/// `[c − a, c + a]²` and log-uniform radii in `[r_min, r_max]`.
pub fn halton_disks(center: Point2, a: f64, r_min: f64, r_max: f64, count: usize, offset: u64) -> Vec<Disk> {
    (0..count as u64)
        .map(|k| {
            let i = k + 1 + offset;
            let x = center.x + a * (2.0 * radical_inverse(i, 2) - 1.0);
            let y = center.y + a * (2.0 * radical_inverse(i, 3) - 1.0);
            let t = radical_inverse(i, 5);
            let r = r_min * (r_max / r_min).powf(t);
            Disk::new(Point2::new(x, y), r)
        })
        .collect()
}

/// One cell handed to [`mollify`]: the cell region and the disk carrying its cap.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifierCell {
    pub region: Region,
    pub cap_disk: Disk,
    /// Scale `ε ρ` entering the sup bound `μ′(Ω)/(ερ)²`.
    pub scale: f64,
}

/// Replace the measure on each cell by a smooth cap of the same mass.
pub fn mollify(mu_prime: &Measure, cells: &[MollifierCell], profile: CapProfile) -> Result<Measure> {
    let mut caps = Vec::new();
    for (j, cell) in cells.iter().enumerate() {
        if !cell.region.contains(cell.cap_disk.center) {
            return Err(Error::Precondition(format!("cap disk of cell {j} is not inside its region")));
        }
        let mass = mu_prime.region_mass(&cell.region);
        if mass <= 0.0 {
            continue;
        }
        let cap = Cap { support: cell.cap_disk, mass, profile };
        let bound = mass / (cell.scale * cell.scale);
        if cap.peak_density() > bound * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "cell {j}: cap peak {} exceeds mu'(Omega)/(eps rho)^2 = {bound}; widen the plateau",
                cap.peak_density()
            )));
        }
        caps.push(cap);
    }
    Ok(Measure::CapSum(caps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn total_mass_variants() {
        assert_eq!(Measure::single(Point2::ORIGIN, 1.0).total_mass(), 1.0);
        let c = Cap::new(Disk::new(Point2::ORIGIN, 0.1), 0.5);
        let c2 = Cap::new(Disk::new(Point2::new(1.0, 0.0), 0.1), 0.5);
        assert_eq!(Measure::CapSum(vec![c, c2]).total_mass(), 1.0);
        let g = GridField::from_fn(GridSpec::new(1.0, 64).unwrap(), |_| 1.0);
        assert!((Measure::Gridded(g).total_mass() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ball_mass_atoms() {
        let mu = Measure::single(Point2::ORIGIN, 1.0);
        assert_eq!(mu.ball_mass(&Disk::new(Point2::ORIGIN, 0.5)), 1.0);
        let far = Measure::single(Point2::new(2.0, 0.0), 1.0);
        assert_eq!(far.ball_mass(&Disk::new(Point2::ORIGIN, 0.5)), 0.0);
    }

    #[test]
    fn ball_mass_grid_against_cell_count_oracle() {
        let spec = GridSpec::new(1.0, 128).unwrap();
        let mu = Measure::Gridded(GridField::from_fn(spec, |_| 1.0));
        let d = Disk::new(Point2::ORIGIN, 0.5);
        let m = mu.ball_mass(&d);
        let h = spec.h();
        // oracle: brute count of centres
        let mut count = 0usize;
        for k in 0..spec.len() {
            count += (spec.point_of(k).norm() <= 0.5) as usize;
        }
        assert!((m - count as f64 * h * h).abs() < 1e-12);
        assert!((m - PI / 4.0).abs() < 2.0 * h);
    }

    #[test]
    fn growth_constant_single_atom() {
        let mu = Measure::single(Point2::ORIGIN, 1.0);
        let disks = [Disk::new(Point2::new(1.0, 0.0), 1.0), Disk::new(Point2::new(2.0, 0.0), 2.0)];
        assert!((growth_constant(&mu, 1.5, &disks).unwrap() - 1.0).abs() < 1e-15);
        let away = [Disk::new(Point2::new(5.0, 0.0), 1.0)];
        assert_eq!(growth_constant(&mu, 1.5, &away).unwrap(), 0.0);
        assert!(growth_constant(&mu, 1.5, &[]).is_err());
    }

    #[test]
    fn bump_integral_closed_form() {
        // π e (e^{-1} − E1(1)), E1(1) = 0.21938393439552029
        let want = PI * std::f64::consts::E * ((-1f64).exp() - 0.219_383_934_395_520_3);
        assert!((CapProfile::default().unit_integral() - want).abs() < 1e-9);
    }

    #[test]
    fn cap_mass_in_disk() {
        let c = Cap::new(Disk::new(Point2::ORIGIN, 1.0), 2.0);
        assert_eq!(c.mass_in(&Disk::new(Point2::ORIGIN, 1.5)), 2.0);
        let half = c.mass_in(&Disk::new(Point2::new(100.0, 0.0), 100.0));
        assert!((half - 1.0).abs() < 0.02, "{half}");
    }

    #[test]
    fn mollify_one_cell() {
        let mu = Measure::single(Point2::ORIGIN, 1.0);
        let cell = MollifierCell {
            region: Region::Disk(Disk::new(Point2::ORIGIN, 0.5)),
            cap_disk: Disk::new(Point2::ORIGIN, 0.1),
            scale: 0.1,
        };
        let out = mollify(&mu, &[cell], CapProfile::default()).unwrap();
        assert!((out.total_mass() - 1.0).abs() < 1e-12);
        if let Measure::CapSum(c) = &out {
            assert!(c[0].peak_density() <= 100.0);
        } else {
            panic!("expected caps");
        }
    }

    #[test]
    fn mollify_skips_empty_and_preserves_mass() {
        let mu = Measure::atoms(&[(Point2::new(-1.0, 0.0), 0.3), (Point2::new(1.0, 0.0), 0.7)]);
        let mk = |x: f64| MollifierCell {
            region: Region::Disk(Disk::new(Point2::new(x, 0.0), 0.4)),
            cap_disk: Disk::new(Point2::new(x, 0.0), 0.1),
            scale: 0.1,
        };
        let out = mollify(&mu, &[mk(-1.0), mk(1.0), mk(5.0)], CapProfile::default()).unwrap();
        assert!((out.total_mass() - 1.0).abs() < 1e-12);
        match out {
            Measure::CapSum(c) => assert_eq!(c.len(), 2),
            _ => panic!(),
        }
    }
}
