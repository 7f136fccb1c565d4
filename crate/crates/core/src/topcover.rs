//! Top cover `{T_j}`, the fields `ψ`, `Ψ_A`, `Ψ`, the g-functions and the
//! maximal function, with the checks built on them.

use crate::error::{Error, Result};
use crate::geometry::{Disk, Point2};
use crate::grid::{GridField, GridSpec};
use crate::measure::{Atom, Measure};
use crate::profiles::{StandardCap, VProfile};
use crate::riesz::{cap_grid, dyadic_family, kernel, transform_direct};
use crate::verify::EstimateReport;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverDisk {
    #[serde(rename = "c")]
    pub center: [f64; 2],
    #[serde(rename = "r")]
    pub radius: f64,
    /// `μ(T̃_j)` with `T̃_j = T_j ∖ ∪_{i<j} T_i`.
    pub tilde_mass: f64,
}

impl CoverDisk {
    pub fn disk(&self) -> Disk {
        Disk::new(self.center.into(), self.radius)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopCover {
    pub s: f64,
    pub r_star: f64,
    pub budget: f64,
    pub disks: Vec<CoverDisk>,
    /// `Σ r_j^s`.
    pub sum_rs: f64,
    /// Mass left outside `∪ T_j`.
    pub uncovered: f64,
    pub total_mass: f64,
}

/// Point masses standing for `μ`: caps are sampled on local grids.
pub fn sample_atoms(mu: &Measure) -> Vec<Atom> {
    match mu {
        Measure::CapSum(caps) => caps
            .iter()
            .flat_map(|c| {
                let g = cap_grid(c, 16);
                let off = c.support.center;
                Measure::Gridded(g).as_atoms().into_iter().map(move |a| Atom { at: a.at + off, weight: a.weight })
            })
            .collect(),
        _ => mu.as_atoms(),
    }
}

/// Index of the first disk containing `p`.
pub fn first_containing(disks: &[CoverDisk], p: Point2) -> Option<usize> {
    disks.iter().position(|d| d.disk().contains(p))
}

impl TopCover {
    /// `ν(T̃_j)` for every `j`.
    pub fn tilde_masses(&self, atoms: &[Atom]) -> Vec<f64> {
        let mut out = vec![0.0; self.disks.len()];
        for a in atoms {
            if let Some(j) = first_containing(&self.disks, a.at) {
                out[j] += a.weight;
            }
        }
        out
    }

    pub fn half_mass(&self) -> f64 {
        0.5 * self.total_mass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.disks).expect("cover serialises")
    }
}

/// Quadtree-greedy cover: the root square is sized so that leaves have
/// circumscribed radius exactly `r*`; every mass-carrying leaf emits its
/// circumscribed disk.
pub fn build_top_cover(mu: &Measure, s: f64, r_star: f64, budget: f64, epsilon: f64) -> Result<TopCover> {
    if !(r_star > 0.0 && budget > 0.0) {
        return Err(Error::InvalidParameter("r* and H must be positive".into()));
    }
    let atoms: Vec<Atom> = sample_atoms(mu).into_iter().filter(|a| a.weight > 0.0).collect();
    let total_mass: f64 = atoms.iter().map(|a| a.weight).sum();
    if atoms.is_empty() {
        return Err(Error::InvalidParameter("cannot cover a zero measure".into()));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for a in &atoms {
        x0 = x0.min(a.at.x);
        x1 = x1.max(a.at.x);
        y0 = y0.min(a.at.y);
        y1 = y1.max(a.at.y);
    }
    let center = Point2::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let need = 0.5 * (x1 - x0).max(y1 - y0);
    let leaf_half = r_star / 2f64.sqrt();
    let mut depth = 0u32;
    while leaf_half * f64::from(1u32 << depth.min(30)) < need * (1.0 + 1e-12) && depth < 30 {
        depth += 1;
    }
    let cells = 1i64 << depth;
    let side = 2.0 * leaf_half;
    let origin = center - Point2::new(leaf_half * cells as f64, leaf_half * cells as f64);
    let mut leaves: std::collections::BTreeMap<(i64, i64), f64> = std::collections::BTreeMap::new();
    for a in &atoms {
        let i = (((a.at.x - origin.x) / side).floor() as i64).clamp(0, cells - 1);
        let j = (((a.at.y - origin.y) / side).floor() as i64).clamp(0, cells - 1);
        *leaves.entry((j, i)).or_default() += a.weight;
    }
    let mut disks: Vec<CoverDisk> = leaves
        .keys()
        .map(|&(j, i)| {
            let c = origin + Point2::new((i as f64 + 0.5) * side, (j as f64 + 0.5) * side);
            CoverDisk { center: [c.x, c.y], radius: r_star, tilde_mass: 0.0 }
        })
        .collect();
    // nudge radii off atoms lying on a boundary
    for d in &mut disks {
        let c: Point2 = d.center.into();
        if atoms.iter().any(|a| (a.at.dist(c) - d.radius).abs() <= 1e-12 * d.radius) {
            d.radius *= 1.0 + 1e-9;
        }
    }
    let sum_rs: f64 = disks.iter().map(|d| d.radius.powf(s)).sum();
    if sum_rs > budget {
        return Err(Error::BudgetExceeded { achieved: sum_rs, budget });
    }
    let mut cover = TopCover { s, r_star, budget, disks, sum_rs, uncovered: 0.0, total_mass };
    let tm = cover.tilde_masses(&atoms);
    for (d, m) in cover.disks.iter_mut().zip(&tm) {
        d.tilde_mass = *m;
    }
    cover.uncovered = total_mass - tm.iter().sum::<f64>();
    if cover.uncovered >= epsilon * cover.half_mass() && cover.uncovered > 1e-12 * total_mass {
        log::warn!("top cover leaves mass {} uncovered", cover.uncovered);
    }
    Ok(cover)
}

/// `ψ`, `Ψ_A` for `A ∈ {2, 4, …, A_max}` and `Ψ = Σ A^{s−2} Ψ_A` on a grid.
#[derive(Debug, Clone)]
pub struct PsiBundle {
    pub s: f64,
    pub psi: GridField,
    pub psi_a: Vec<(f64, GridField)>,
    pub big_psi: GridField,
    pub a_max: f64,
    /// Measured `sup |ψ| / Ψ` over the samples with `Ψ > 0`.
    pub c5: f64,
}

/// Dilation set `{2, 4, …, A_max}`.
pub fn dilations(a_max: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut a = 2.0;
    while a <= a_max * (1.0 + 1e-12) {
        v.push(a);
        a *= 2.0;
    }
    v
}

impl PsiBundle {
    /// Smallest centred grid with `n` samples holding every `A_max T_j`.
    pub fn fitting_grid(cover: &TopCover, a_max: f64, n: usize) -> Result<GridSpec> {
        let reach = cover
            .disks
            .iter()
            .map(|d| d.center[0].abs().max(d.center[1].abs()) + a_max * d.radius)
            .fold(0.0, f64::max);
        GridSpec::new(reach * 1.02, n)
    }

    /// Share of `Σ_{A ≥ 2} A^{s−2}` dropped by stopping at `A_max`.
    pub fn tail_fraction(&self) -> f64 {
        let q = 2f64.powf(self.s - 2.0);
        let full = q / (1.0 - q);
        let kept: f64 = dilations(self.a_max).iter().map(|a| a.powf(self.s - 2.0)).sum();
        (full - kept) / full
    }

    pub fn integral_psi(&self) -> f64 {
        self.big_psi.integral(0)
    }
}

/// Normalised indicator field `Σ_j m_j χ_{D_j}/|D_j|` with exact cell overlaps.
fn indicator_field(spec: GridSpec, disks: &[(Disk, f64)]) -> GridField {
    let mut f = GridField::zeros(spec, 1);
    let h = spec.h();
    let n = spec.n as i64;
    for (d, m) in disks {
        if *m == 0.0 {
            continue;
        }
        let dens = m / (d.area() * h * h);
        let lo = |t: f64| (((t + spec.half_extent) / h - 0.5).floor() as i64).clamp(0, n - 1) as usize;
        let hi = |t: f64| (((t + spec.half_extent) / h + 0.5).ceil() as i64).clamp(0, n - 1) as usize;
        let c = d.center;
        for j in lo(c.y - d.radius)..=hi(c.y + d.radius) {
            for i in lo(c.x - d.radius)..=hi(c.x + d.radius) {
                let p = spec.point(i, j);
                let a = d.rect_overlap(p.x - 0.5 * h, p.x + 0.5 * h, p.y - 0.5 * h, p.y + 0.5 * h);
                if a > 0.0 {
                    f.data[j * spec.n + i] += dens * a;
                }
            }
        }
    }
    f
}

pub fn build_psi_bundle(cover: &TopCover, cap: &StandardCap, spec: GridSpec, a_max: f64) -> Result<PsiBundle> {
    let s = cover.s;
    let r_min = cover.disks.iter().map(|d| d.radius).fold(f64::INFINITY, f64::min);
    if spec.h() > r_min / 4.0 {
        return Err(Error::Resolution { h: spec.h(), needed: r_min / 4.0 });
    }
    if a_max < 2.0 || !(a_max.log2().fract() == 0.0) {
        return Err(Error::InvalidParameter(format!("A_max = {a_max} must be a power of two >= 2")));
    }
    for (j, d) in cover.disks.iter().enumerate() {
        let reach = d.center[0].abs().max(d.center[1].abs()) + a_max * d.radius;
        if reach > spec.half_extent {
            return Err(Error::Precondition(format!("A_max T_{j} leaves the grid (needs L >= {reach})")));
        }
    }
    let psi_data: Vec<[f64; 2]> = (0..spec.len())
        .into_par_iter()
        .map(|k| {
            let p = spec.point_of(k);
            let mut acc = [0.0, 0.0];
            for d in &cover.disks {
                let c: Point2 = d.center.into();
                let v = cap.psi_at((p - c) * (1.0 / d.radius));
                let w = d.tilde_mass / (d.radius * d.radius);
                acc[0] += w * v[0];
                acc[1] += w * v[1];
            }
            acc
        })
        .collect();
    let mut data = vec![0.0; 2 * spec.len()];
    for (k, v) in psi_data.iter().enumerate() {
        data[k] = v[0];
        data[spec.len() + k] = v[1];
    }
    let psi = GridField::from_data(spec, 2, data)?;
    let mut big_psi = GridField::zeros(spec, 1);
    let mut psi_a = Vec::new();
    for a in dilations(a_max) {
        let disks: Vec<(Disk, f64)> = cover.disks.iter().map(|d| (d.disk().scaled(a), d.tilde_mass)).collect();
        let f = indicator_field(spec, &disks);
        let w = a.powf(s - 2.0);
        big_psi.data.iter_mut().zip(&f.data).for_each(|(b, v)| *b += w * v);
        psi_a.push((a, f));
    }
    let c5 = (0..spec.len())
        .filter(|&k| big_psi.data[k] > 0.0)
        .map(|k| {
            let v = psi.vec_at(k);
            v[0].hypot(v[1]) / big_psi.data[k]
        })
        .fold(0.0, f64::max);
    Ok(PsiBundle { s, psi, psi_a, big_psi, a_max, c5 })
}

/// `Rν` at every grid node; atoms inside a node's own cell are skipped.
fn transform_on_nodes(nu: &[Atom], s: f64, spec: GridSpec) -> Vec<[f64; 2]> {
    let half = 0.5 * spec.h();
    (0..spec.len())
        .into_par_iter()
        .map(|k| {
            let x = spec.point_of(k);
            let mut acc = [0.0, 0.0];
            for a in nu {
                if (a.at - x).max_abs() < half {
                    continue;
                }
                let kk = kernel(s, x - a.at).expect("excluded coincidences");
                acc[0] += a.weight * kk[0];
                acc[1] += a.weight * kk[1];
            }
            acc
        })
        .collect()
}

fn check_admissible(nu: &[Atom], cover: &TopCover) -> Result<()> {
    let tm = cover.tilde_masses(nu);
    let bad: Vec<usize> = tm
        .iter()
        .zip(&cover.disks)
        .enumerate()
        .filter(|(_, (v, d))| **v > 2.0 * d.tilde_mass * (1.0 + 1e-12))
        .map(|(j, _)| j)
        .collect();
    if !bad.is_empty() {
        return Err(Error::Precondition(format!("nu(T~_j) > 2 mu(T~_j) for j in {bad:?}")));
    }
    let outside: f64 = nu.iter().filter(|a| first_containing(&cover.disks, a.at).is_none()).map(|a| a.weight).sum();
    if outside > 0.0 {
        return Err(Error::Precondition(format!("nu puts mass {outside} outside the cover")));
    }
    let total: f64 = nu.iter().map(|a| a.weight).sum();
    if total < cover.half_mass() * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!("nu has mass {total} < m = {}", cover.half_mass())));
    }
    Ok(())
}

/// Seeded measures admissible for [`check_psi_lower`]: every atom of `μ`
/// inside the cover is moved to a random point of the same `T̃_j` (kept in
/// place when the draw leaves it) and reweighted by a per-disk factor in
/// `[0.6, 2]`, so `ν(T̃_j) ≤ 2μ(T̃_j)` and `ν(ℝ²) ≥ 0.6 μ(∪T_j) ≥ m`.
pub fn admissible_corpus(mu: &Measure, cover: &TopCover, seed: u64, count: usize) -> Vec<Measure> {
    use rand::{Rng, SeedableRng};
    let atoms = sample_atoms(mu);
    (0..count as u64)
        .map(|k| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(k));
            let factors: Vec<f64> = cover.disks.iter().map(|_| rng.random_range(0.6..=2.0)).collect();
            let moved = atoms
                .iter()
                .filter_map(|a| {
                    let j = first_containing(&cover.disks, a.at)?;
                    let d = cover.disks[j].disk();
                    let r = d.radius * rng.random::<f64>().sqrt();
                    let t = 2.0 * PI * rng.random::<f64>();
                    let p = d.center + Point2::new(r * t.cos(), r * t.sin());
                    let at = if first_containing(&cover.disks, p) == Some(j) { p } else { a.at };
                    Some(Atom { at, weight: a.weight * factors[j] })
                })
                .collect();
            Measure::Atomic(moved)
        })
        .collect()
}

/// `∫|Rν| Ψ dm₂ ≥ m² / (2 C₅ H)`.
pub fn check_psi_lower(nu: &Measure, cover: &TopCover, bundle: &PsiBundle) -> Result<EstimateReport> {
    let atoms = sample_atoms(nu);
    check_admissible(&atoms, cover)?;
    let spec = bundle.big_psi.spec;
    let rv = transform_on_nodes(&atoms, cover.s, spec);
    let h2 = spec.h() * spec.h();
    let lhs: f64 = rv.iter().zip(&bundle.big_psi.data).map(|(v, p)| v[0].hypot(v[1]) * p).sum::<f64>() * h2;
    let m = cover.half_mass();
    let rhs = m * m / (2.0 * bundle.c5 * cover.budget);
    Ok(EstimateReport::lower("psi_lower", lhs, rhs, bundle.c5)
        .with("n", spec.n as f64)
        .with("A_max", bundle.a_max)
        .with("tail_fraction", bundle.tail_fraction()))
}

/// Jensen: `∫V(Rν)Ψ ≥ I v(I^{−1} ∫|Rν|Ψ)` with `I = ∫Ψ`.
pub fn jensen_lower(nu: &Measure, cover: &TopCover, bundle: &PsiBundle, v: &VProfile) -> Result<EstimateReport> {
    let atoms = sample_atoms(nu);
    let spec = bundle.big_psi.spec;
    let rv = transform_on_nodes(&atoms, cover.s, spec);
    let h2 = spec.h() * spec.h();
    let w = &bundle.big_psi.data;
    let lhs: f64 = rv.iter().zip(w).map(|(r, p)| v.big_v(*r) * p).sum::<f64>() * h2;
    let first: f64 = rv.iter().zip(w).map(|(r, p)| r[0].hypot(r[1]) * p).sum::<f64>() * h2;
    let i = bundle.integral_psi();
    let rhs = if i > 0.0 { i * v.v(first / i) } else { 0.0 };
    Ok(EstimateReport::lower("jensen", lhs, rhs, 1.0).with("I", i))
}

/// `g_A(x) = A^{−s} Σ_j μ(T̃_j)/r_j^s χ_{A T_j}(x)`.
pub fn g_function(cover: &TopCover, a: f64, x: Point2) -> f64 {
    let s = cover.s;
    cover
        .disks
        .iter()
        .filter(|d| d.disk().scaled(a).contains(x))
        .map(|d| d.tilde_mass / d.radius.powf(s))
        .sum::<f64>()
        * a.powf(-s)
}

/// `‖g_A‖²_{L²(μ)}`.
pub fn g_l2_norm(cover: &TopCover, a: f64, mu: &Measure) -> f64 {
    sample_atoms(mu).iter().map(|at| at.weight * g_function(cover, a, at.at).powi(2)).sum()
}

/// `sup_D μ(3D)^{−1} ∫_D f dμ` over dyadic disks centred at `x` (radii from
/// `r_min` to `r_max`) and the cover disks through `x`; `f` is given per atom.
pub fn hl_maximal(mu: &[Atom], f: &[f64], x: Point2, cover: Option<&TopCover>, r_min: f64, r_max: f64) -> f64 {
    assert_eq!(mu.len(), f.len());
    let mut family = dyadic_family(x, r_min, r_max);
    if let Some(c) = cover {
        family.extend(c.disks.iter().map(|d| d.disk()).filter(|d| d.contains(x)));
    }
    hl_maximal_over(mu, f, &family)
}

/// The maximal average over an explicit family of disks.
pub fn hl_maximal_over(mu: &[Atom], f: &[f64], family: &[Disk]) -> f64 {
    let mut best: f64 = 0.0;
    for d in family {
        let big = d.scaled(3.0);
        let denom: f64 = mu.iter().filter(|a| big.contains(a.at)).map(|a| a.weight).sum();
        if denom <= 0.0 {
            continue;
        }
        let num: f64 = mu.iter().zip(f).filter(|(a, _)| d.contains(a.at)).map(|(a, v)| a.weight * v).sum();
        best = best.max(num / denom);
    }
    best
}

/// Output of [`l2_psi_transform_check`].
#[derive(Debug, Clone)]
pub struct PsiTransformCheck {
    pub report: EstimateReport,
    /// Per dilation: `(A, max discrepancy / summed g bound)` over the atoms.
    pub comparison: Vec<(f64, f64)>,
}

/// `∫|R(Ψ m₂)|² dμ` against `C₉ m`, plus the comparison of `R(Ψ_A m₂)` with
/// `Σ_j χ_{ℝ²∖2AT_j} R(χ_{T̃_j} μ)`, whose gap is measured against
/// `Σ_{A′ ≥ A} (A/A′) g_{A′}` on the atoms.
pub fn l2_psi_transform_check(mu: &Measure, cover: &TopCover, bundle: &PsiBundle) -> Result<PsiTransformCheck> {
    let s = cover.s;
    let atoms = sample_atoms(mu);
    let pts: Vec<Point2> = atoms.iter().map(|a| a.at).collect();
    let rp = transform_direct(&Measure::Gridded(bundle.big_psi.clone()), s, &pts, None)?;
    let lhs: f64 = atoms.iter().zip(&rp).map(|(a, v)| a.weight * (v[0] * v[0] + v[1] * v[1])).sum();
    let m = cover.half_mass();
    let c9 = lhs / m;
    let owner: Vec<Option<usize>> = pts.iter().map(|&p| first_containing(&cover.disks, p)).collect();
    let mut comparison = Vec::new();
    for (a, field) in &bundle.psi_a {
        let ra = transform_direct(&Measure::Gridded(field.clone()), s, &pts, None)?;
        let mut worst: f64 = 0.0;
        for (i, &x) in pts.iter().enumerate() {
            let mut cmp = [0.0, 0.0];
            for (j, d) in cover.disks.iter().enumerate() {
                if d.disk().scaled(2.0 * a).contains(x) {
                    continue;
                }
                for (k, y) in atoms.iter().enumerate() {
                    if owner[k] == Some(j) {
                        let kk = kernel(s, x - y.at)?;
                        cmp[0] += y.weight * kk[0];
                        cmp[1] += y.weight * kk[1];
                    }
                }
            }
            let gap = (ra[i][0] - cmp[0]).hypot(ra[i][1] - cmp[1]);
            let mut bound = 0.0;
            let mut a2 = *a;
            for _ in 0..40 {
                bound += a / a2 * g_function(cover, a2, x);
                a2 *= 2.0;
            }
            if bound > 0.0 {
                worst = worst.max(gap / bound);
            } else if gap > 0.0 {
                worst = f64::INFINITY;
            }
        }
        comparison.push((*a, worst));
    }
    let report = EstimateReport::upper("l2_psi_transform", lhs, c9 * m, c9).with("n", bundle.big_psi.spec.n as f64);
    Ok(PsiTransformCheck { report, comparison })
}

/// `|ψ| ≤ C Ψ` where `Ψ > 0`, and the geometric constant `C₆ = Σ A^{s−2}`.
pub fn psi_integral_bound(bundle: &PsiBundle, cover: &TopCover) -> EstimateReport {
    let c6: f64 = dilations(bundle.a_max).iter().map(|a| a.powf(bundle.s - 2.0)).sum();
    let covered: f64 = cover.disks.iter().map(|d| d.tilde_mass).sum();
    EstimateReport::upper("psi_integral", bundle.integral_psi(), c6 * covered, c6)
}

/// Disk area used by the normalised indicators.
pub fn normalised_height(d: &CoverDisk, a: f64) -> f64 {
    d.tilde_mass / (PI * a * a * d.radius * d.radius)
}
