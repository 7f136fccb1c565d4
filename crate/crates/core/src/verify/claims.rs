//! Claims 1–3 on a built Cantor structure.

use super::{calibrate_oscillation_constant, holder_check, oscillation_bound_at, oscillation_dual, oscillation_points};
use super::{EstimateReport, OscillationSetup};
use crate::cantor::CantorStructure;
use crate::equilibrium::{first_order_residual, minimize_phi, CapSystem};
use crate::error::{Error, Result};
use crate::geometry::{Disk, Point2, Region};
use crate::measure::{mollify, Atom, Cap, CapProfile, Measure, MollifierCell};
use crate::profiles::VProfile;
use crate::riesz::{dyadic_family, kernel, maximal_transform, transform_caps};
use rayon::prelude::*;
use serde::Serialize;

/// `max_x (|Σ_n R⁽ⁿ⁾μ′(x)| − R♯μ′(x)) ≤ 1` over the atoms of `μ′`. The family
/// for `R♯` is the dyadic disks around `x` plus the birth disk of `Q⁽ᴺ⁾(x)`.
/// Also reports the largest `|∫_{2B∖Q⁽ᴺ⁾(x)} K dμ′|`, which must stay below 1
/// when `2M^sδ/ε^s < 1`.
pub fn claim1_check(st: &CantorStructure, s: f64) -> Result<EstimateReport> {
    let n_levels = st.depth();
    let atoms = st.prime_atoms();
    let sparsity = st.big_m.powf(s) * st.delta / st.epsilon.powf(s);
    let precondition = 2.0 * sparsity < 1.0;
    if n_levels == 0 || atoms.is_empty() {
        let r = EstimateReport::upper("claim1", 0.0, 1.0, 1.0).with("N", n_levels as f64);
        return Ok(if precondition { r } else { r.with("precondition_violated", 1.0) });
    }
    let pots = st.partial_potentials()?;
    let mu_prime = Measure::Atomic(atoms.clone());
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for a in &atoms {
        for b in &atoms {
            let d = a.at.dist(b.at);
            if d > 0.0 {
                lo = lo.min(d);
            }
            hi = hi.max(d);
        }
    }
    if !lo.is_finite() {
        lo = 1.0;
        hi = 1.0;
    }
    let rows: Vec<(f64, f64)> = (0..atoms.len())
        .into_par_iter()
        .map(|a| {
            let x = atoms[a].at;
            let mut sum = [0.0; 2];
            for level in &pots {
                sum[0] += level[a][0];
                sum[1] += level[a][1];
            }
            let leaf = &st.levels[n_levels][st.membership[a][n_levels]];
            let mut family = dyadic_family(x, 0.25 * lo, 4.0 * hi);
            if let Some(b) = leaf.ball {
                family.push(b);
            }
            let sharp = maximal_transform(&mu_prime, s, x, &family)?;
            let mut inner = [0.0; 2];
            if let Some(b) = leaf.ball {
                let big = b.scaled(2.0);
                for (k, y) in atoms.iter().enumerate() {
                    if st.membership[k][n_levels] != st.membership[a][n_levels] && big.contains(y.at) {
                        let kk = kernel(s, x - y.at)?;
                        inner[0] += y.weight * kk[0];
                        inner[1] += y.weight * kk[1];
                    }
                }
            }
            Ok((sum[0].hypot(sum[1]) - sharp, inner[0].hypot(inner[1])))
        })
        .collect::<Result<_>>()?;
    let excess = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let inner = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut r = EstimateReport::upper("claim1", excess, 1.0, 1.0)
        .with("inner_integral_max", inner)
        .with("sparsity", sparsity)
        .with("N", n_levels as f64)
        .with("atoms", atoms.len() as f64);
    if !precondition {
        r = r.with("precondition_violated", 1.0);
    } else if inner > 1.0 {
        r = r.failed("inner_integral_exceeds_one");
    }
    Ok(r)
}

/// Gram matrix of the partial potentials with the cancellation residuals and
/// the cross-term checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramReport {
    /// `G_{nk} = ∫⟨R⁽ⁿ⁾μ′, R⁽ᵏ⁾μ′⟩dμ′`.
    pub matrix: Vec<Vec<f64>>,
    /// Largest `|∫_{Q_j⁽ⁿ⁺¹⁾} Σ_{k>n} R⁽ᵏ⁾μ′ dμ′|` per `n`, summed pairwise.
    pub cancellation: Vec<f64>,
    /// The same residuals from the per-atom potentials, relative to `Σ|·|`.
    pub cancellation_relative: Vec<f64>,
    /// `max osc_{Q_j⁽ⁿ⁺¹⁾} R⁽ⁿ⁾μ′ / (M^sδ/ε^s + 1/M)`.
    pub c12: f64,
    /// One cross-term check per `n = 0, …, N−2`.
    pub claim2: Vec<EstimateReport>,
    /// `max_{n≠k} |G_{nk}| / min(G_{nn}, G_{kk})`.
    pub max_off_ratio: f64,
    /// `max_{n≠k} |G_{nk}| / (G_{nn} G_{kk})^{1/2}`.
    pub max_cosine: f64,
}

pub fn gram_matrix(st: &CantorStructure, s: f64) -> Result<GramReport> {
    let n_levels = st.depth();
    let atoms = st.prime_atoms();
    let pots = st.partial_potentials()?;
    let w: Vec<f64> = atoms.iter().map(|a| a.weight).collect();
    let mut matrix = vec![vec![0.0; n_levels]; n_levels];
    for n in 0..n_levels {
        for k in 0..n_levels {
            matrix[n][k] = (0..atoms.len()).map(|a| w[a] * (pots[n][a][0] * pots[k][a][0] + pots[n][a][1] * pots[k][a][1])).sum();
        }
    }
    let mut max_off_ratio: f64 = 0.0;
    let mut max_cosine: f64 = 0.0;
    for n in 0..n_levels {
        for k in 0..n_levels {
            if n != k {
                max_off_ratio = max_off_ratio.max(matrix[n][k].abs() / matrix[n][n].min(matrix[k][k]));
                max_cosine = max_cosine.max(matrix[n][k].abs() / (matrix[n][n] * matrix[k][k]).sqrt());
            }
        }
    }
    let sparsity = st.big_m.powf(s) * st.delta / st.epsilon.powf(s);
    let factor = sparsity + 1.0 / st.big_m;
    let mut cancellation = Vec::new();
    let mut cancellation_relative = Vec::new();
    let mut osc_max: f64 = 0.0;
    let mut cross = Vec::new();
    for n in 0..n_levels.saturating_sub(1) {
        let cells = st.levels[n + 1].len();
        let mut worst: f64 = 0.0;
        let mut worst_rel: f64 = 0.0;
        for j in 0..cells {
            let members: Vec<usize> = (0..atoms.len()).filter(|&a| st.membership[a][n + 1] == j).collect();
            // pairs split below n+1: each contributes K(x−y) + K(y−x) = 0
            let mut acc = [0.0; 2];
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    if st.membership[a][n_levels] == st.membership[b][n_levels] {
                        continue;
                    }
                    let d = atoms[a].at - atoms[b].at;
                    let ka = kernel(s, d)?;
                    let kb = kernel(s, Point2::ORIGIN - d)?;
                    let ww = w[a] * w[b];
                    acc[0] += ww * ka[0] + ww * kb[0];
                    acc[1] += ww * ka[1] + ww * kb[1];
                }
            }
            worst = worst.max(acc[0].hypot(acc[1]));
            let mut sum = [0.0; 2];
            let mut scale = 0.0;
            for &a in &members {
                for level in &pots[n + 1..] {
                    sum[0] += w[a] * level[a][0];
                    sum[1] += w[a] * level[a][1];
                    scale += w[a] * level[a][0].hypot(level[a][1]);
                }
            }
            if scale > 0.0 {
                worst_rel = worst_rel.max(sum[0].hypot(sum[1]) / scale);
            }
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    let (p, q) = (pots[n][a], pots[n][b]);
                    osc_max = osc_max.max((p[0] - q[0]).hypot(p[1] - q[1]));
                }
            }
        }
        cancellation.push(worst);
        cancellation_relative.push(worst_rel);
    }
    let c12 = osc_max / factor;
    for n in 0..n_levels.saturating_sub(1) {
        let lhs: f64 = (0..atoms.len())
            .map(|a| {
                let mut tail = [0.0; 2];
                for level in &pots[n + 1..] {
                    tail[0] += level[a][0];
                    tail[1] += level[a][1];
                }
                w[a] * (pots[n][a][0] * tail[0] + pots[n][a][1] * tail[1])
            })
            .sum::<f64>()
            .abs();
        let l1: f64 = (n + 1..n_levels).map(|k| (0..atoms.len()).map(|a| w[a] * pots[k][a][0].hypot(pots[k][a][1])).sum::<f64>()).sum();
        let rhs = c12 * factor * l1;
        cross.push(
            EstimateReport::upper("claim2", lhs, rhs, c12)
                .with_tolerance(1e-9 * rhs)
                .with("n", n as f64)
                .with("l1_tail", l1)
                .with("cancellation", cancellation[n]),
        );
    }
    Ok(GramReport { matrix, cancellation, cancellation_relative, c12, claim2: cross, max_off_ratio, max_cosine })
}

/// Knobs of the Claim 3 pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Claim3Pipeline {
    /// Local grid size of each cap.
    pub n_loc: usize,
    /// Plateau of the mollifying caps; wide enough for the sup bound `μ′(Ω)/(ερ)²`.
    pub plateau: f64,
    /// Descent budget of the equilibrium certificate; 0 skips it.
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for Claim3Pipeline {
    fn default() -> Self {
        Claim3Pipeline { n_loc: 16, plateau: 0.5, max_iters: 2000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim3Report {
    /// `∫|R⁽ⁿ⁾μ′|²dμ′` against the assembled lower bound.
    pub report: EstimateReport,
    pub level: usize,
    /// `∫|R⁽ⁿ⁾μ′|²dμ′`.
    pub measured: f64,
    /// `Σ_j ∫V(R̃μ′)dμ′`, i.e. `∫V(R⁽ⁿ⁾μ′)dμ′`.
    pub i_prime: f64,
    /// `Σ_j ∫V(R̃μ̃)dμ′`.
    pub i_mixed: f64,
    /// `Σ_j ∫V(R̃μ̃)dμ̃`.
    pub i_tilde_cut: f64,
    /// `Σ_j ∫V(Rμ̃)dμ̃`.
    pub i_tilde: f64,
    /// The three comparison steps, each against its formula bound.
    pub steps: Vec<EstimateReport>,
    /// `Σ_j [∫V(Rμ̃)dμ̃ − (d₁ + d₂ + d₃)]`.
    pub lower_bound: f64,
    /// `C₁₅` measured: total discrepancy over `(M^{2s}δ/ε^{2+s} + 1/M) Σ m_j`.
    pub c15: f64,
    /// `C₁₄` measured: `max_j ‖Rμ̃_j‖_∞ / (M^sδ/ε^s)`.
    pub c14: f64,
    /// `(Σ m_j⁵/H_j⁴, (Σm_j)⁵/(ΣH_j)⁴)`.
    pub holder: (f64, f64),
    /// `C₂₀` making `C₂₀^{-2} m⁵/H⁴` equal to the lower bound.
    pub c20: f64,
    /// Evaluations where `V(x) ≤ |x|²` failed.
    pub v_domination_violations: usize,
    /// Per-cell equilibrium certificate: first-order checks, weight bound.
    pub equilibrium: Vec<EstimateReport>,
    pub cells: usize,
}

struct CellData {
    measured: f64,
    i_prime: f64,
    i_mixed: f64,
    i_tilde_cut: f64,
    i_tilde: f64,
    d: [f64; 3],
    rhs: [f64; 3],
    sup_self: f64,
    violations: usize,
    m: f64,
    h: f64,
    equilibrium: Vec<EstimateReport>,
}

fn child_setup(region: &Region, ball: Disk, st: &CantorStructure, s: f64, c11: f64) -> OscillationSetup {
    OscillationSetup { omega: region.clone(), ball, epsilon: st.epsilon, big_m: st.big_m, s, c11 }
}

#[allow(clippy::too_many_arguments)]
fn claim3_cell(
    st: &CantorStructure,
    n: usize,
    j: usize,
    s: f64,
    pots: &[[f64; 2]],
    pipe: &Claim3Pipeline,
    c11: f64,
) -> Result<CellData> {
    let v = VProfile::new();
    let atoms_all = st.prime_atoms();
    let members: Vec<usize> = (0..atoms_all.len()).filter(|&a| st.membership[a][n] == j).collect();
    let children: Vec<usize> = {
        let mut c: Vec<usize> = members.iter().map(|&a| st.membership[a][n + 1]).collect();
        c.sort_unstable();
        c.dedup();
        c
    };
    let mut violations = 0;
    let mut measured = 0.0;
    let mut i_prime = 0.0;
    for &a in &members {
        let r = pots[a];
        let q = r[0] * r[0] + r[1] * r[1];
        let val = v.big_v(r);
        if val > q * (1.0 + 1e-12) + 1e-300 {
            violations += 1;
        }
        measured += atoms_all[a].weight * q;
        i_prime += atoms_all[a].weight * val;
    }
    // mollify child by child so caps follow `children`
    let mut caps: Vec<Cap> = Vec::new();
    let mut child_atoms: Vec<Vec<Atom>> = Vec::new();
    for &k in &children {
        let cell = &st.levels[n + 1][k];
        let (region, inner, ball) = match (&cell.region, cell.inner, cell.ball) {
            (Some(r), Some(i), Some(b)) => (r.clone(), i, b),
            _ => return Err(Error::Precondition(format!("cell {k} of level {} lacks its geometry", n + 1))),
        };
        let own: Vec<Atom> = members.iter().filter(|&&a| st.membership[a][n + 1] == k).map(|&a| atoms_all[a]).collect();
        let mc = MollifierCell { region, cap_disk: inner, scale: st.epsilon * ball.radius };
        match mollify(&Measure::Atomic(own.clone()), &[mc], CapProfile { plateau: pipe.plateau })? {
            Measure::CapSum(c) if c.len() == 1 => caps.push(c[0]),
            _ => return Err(Error::Precondition(format!("cell {k}: atoms outside its region")))
        }
        child_atoms.push(own);
    }
    let system = CapSystem::new(caps.clone(), s, pipe.n_loc)?;
    let ones = vec![1.0; caps.len()];
    let i_tilde = system.energy(&ones);
    let sparsity = st.big_m.powf(s) * st.delta / st.epsilon.powf(s);
    let mut i_mixed = 0.0;
    let mut i_tilde_cut = 0.0;
    let mut d = [0.0; 3];
    let mut rhs = [0.0; 3];
    let mut sup_self: f64 = 0.0;
    for (ci, &k) in children.iter().enumerate() {
        let cell = &st.levels[n + 1][k];
        let region = cell.region.clone().expect("checked above");
        let ball = cell.ball.expect("checked above");
        let setup = child_setup(&region, ball, st, s, c11);
        let others: Vec<Cap> = caps.iter().enumerate().filter(|(i, _)| *i != ci).map(|(_, c)| *c).collect();
        let own = &child_atoms[ci];
        let pts: Vec<Point2> = own.iter().map(|a| a.at).collect();
        let mixed = if others.is_empty() { vec![[0.0; 2]; pts.len()] } else { transform_caps(&others, s, pipe.n_loc, &pts, None)? };
        // step 1 measured: ∫|V(R̃μ′) − V(R̃μ̃)| dμ′ over Ω_k
        let own_ids: Vec<usize> = members.iter().copied().filter(|&a| st.membership[a][n + 1] == k).collect();
        for ((a, id), rm) in own.iter().zip(&own_ids).zip(&mixed) {
            let vm = v.big_v(*rm);
            i_mixed += a.weight * vm;
            d[0] += a.weight * (v.big_v(pots[*id]) - vm).abs();
        }
        // step 1 bound: dual oscillation with η = χ_Ω μ′ − μ̃_k against ν = μ′ off Ω_k
        let nodes = &system.nodes[ci];
        let node_sum: f64 = nodes.iter().map(|x| x.weight).sum();
        let own_mass: f64 = own.iter().map(|a| a.weight).sum();
        let mut eta: Vec<Atom> = own.clone();
        eta.extend(nodes.iter().map(|x| Atom { at: x.at, weight: -x.weight * own_mass / node_sum }));
        let nu: Vec<Atom> = members.iter().filter(|&&a| st.membership[a][n + 1] != k).map(|&a| atoms_all[a]).collect();
        let dual = oscillation_dual(&eta, &Measure::Atomic(nu), &setup)?;
        rhs[0] += 4.0 * dual.bound_rhs;
        // step 2: osc of V(R̃μ̃) over Ω_k times μ′(Ω_k)
        let field = system.field(&ones, ci);
        let mut cut_vals = Vec::with_capacity(nodes.len());
        for ((x, f), self_f) in nodes.iter().zip(&field).zip(&system.influence[ci][ci]) {
            let cut = [f[0] - self_f[0], f[1] - self_f[1]];
            let vc = v.big_v(cut);
            i_tilde_cut += x.weight * vc;
            cut_vals.push(vc);
            d[2] += x.weight * (vc - v.big_v(*f)).abs();
            sup_self = sup_self.max(self_f[0].hypot(self_f[1]));
        }
        let mut osc_pts = pts.clone();
        osc_pts.extend(oscillation_points(&Region::Disk(cell.inner.expect("checked above"))));
        let osc = if others.is_empty() {
            0.0
        } else {
            oscillation_bound_at(&Measure::CapSum(others.clone()), &setup, &osc_pts)?.bound_rhs
        };
        rhs[1] += 4.0 * osc * own_mass;
        // step 3: ‖Rμ̃_k‖_∞ on its nodes
        let sup_k = system.influence[ci][ci].iter().map(|f| f[0].hypot(f[1])).fold(0.0, f64::max);
        rhs[2] += 4.0 * sup_k * caps[ci].mass;
    }
    d[1] = (i_mixed - i_tilde_cut).abs();
    let parent = &st.levels[n][j];
    let mut equilibrium = Vec::new();
    if pipe.max_iters > 0 && i_tilde > 0.0 {
        // smallest λ for which ∫V(Rμ̃)dμ̃ ≤ λm holds
        let lambda = i_tilde / system.m;
        let w = minimize_phi(lambda, &system, pipe.max_iters, pipe.seed)?;
        let amax = w.a.iter().copied().fold(0.0, f64::max);
        equilibrium.push(
            EstimateReport::upper("weights_at_most_two", amax, 2.0, 2.0)
                .with_tolerance(1e-2)
                .with("cell", j as f64)
                .with("exhausted", if w.exhausted() { 1.0 } else { 0.0 }),
        );
        for c in 0..system.len() {
            if let Some(r) = first_order_residual(&w.a, lambda, c, &system)? {
                equilibrium.push(r.with("cell", j as f64));
            }
        }
    }
    let _ = sparsity;
    Ok(CellData {
        measured,
        i_prime,
        i_mixed,
        i_tilde_cut,
        i_tilde,
        d,
        rhs,
        sup_self,
        violations,
        m: parent.m,
        h: parent.h,
        equilibrium,
    })
}

/// Lower bound for `∫|R⁽ⁿ⁾μ′|²dμ′`: per cell `Q_j⁽ⁿ⁾` the local measure is
/// mollified onto caps over its children, `∫V(Rμ̃)dμ̃` is computed, the three
/// comparison steps back to `∫V(R̃μ′)dμ′` are measured and checked against
/// their bounds, and `V(x) ≤ |x|²` closes the chain.
pub fn claim3_lower(st: &CantorStructure, n: usize, s: f64, pipe: &Claim3Pipeline) -> Result<Claim3Report> {
    if n >= st.depth() {
        return Err(Error::InvalidParameter(format!("level {n} needs a structure deeper than {}", st.depth())));
    }
    let pots = st.partial_potentials()?;
    let c11 = calibrate_oscillation_constant(s, st.big_m)?;
    let cells: Vec<CellData> =
        (0..st.levels[n].len()).map(|j| claim3_cell(st, n, j, s, &pots[n], pipe, c11)).collect::<Result<_>>()?;
    let sum = |f: &dyn Fn(&CellData) -> f64| cells.iter().map(f).sum::<f64>();
    let measured = sum(&|c| c.measured);
    let i_prime = sum(&|c| c.i_prime);
    let i_tilde = sum(&|c| c.i_tilde);
    let d: Vec<f64> = (0..3).map(|k| sum(&|c| c.d[k])).collect();
    let rhs: Vec<f64> = (0..3).map(|k| sum(&|c| c.rhs[k])).collect();
    let lower_bound = i_tilde - d.iter().sum::<f64>();
    let sparsity = st.big_m.powf(s) * st.delta / st.epsilon.powf(s);
    let wide = st.big_m.powf(2.0 * s) * st.delta / st.epsilon.powf(2.0 + s) + 1.0 / st.big_m;
    let m_sum = sum(&|c| c.m);
    let c15 = d.iter().sum::<f64>() / (wide * m_sum);
    let c14 = cells.iter().map(|c| c.sup_self).fold(0.0, f64::max) / sparsity;
    let ms: Vec<f64> = cells.iter().map(|c| c.m).collect();
    let hs: Vec<f64> = cells.iter().map(|c| c.h).collect();
    let holder = holder_check(&ms, &hs)?;
    let c20 = if lower_bound > 0.0 { (holder.1 / lower_bound).sqrt() } else { f64::INFINITY };
    let names = ["step1_dual_oscillation", "step2_oscillation", "step3_cap_transform"];
    let steps: Vec<EstimateReport> =
        (0..3).map(|k| EstimateReport::upper(names[k], d[k], rhs[k], 4.0).with_tolerance(1e-9 * rhs[k]).with("level", n as f64)).collect();
    let violations: usize = cells.iter().map(|c| c.violations).sum();
    let mut report = EstimateReport::lower("claim3", measured, lower_bound, c15)
        .with("level", n as f64)
        .with("i_prime", i_prime)
        .with("i_tilde", i_tilde)
        .with("holder_lhs", holder.0)
        .with("holder_rhs", holder.1)
        .with("c14", c14)
        .with("c20", c20)
        .with("n_loc", pipe.n_loc as f64);
    if violations > 0 {
        report = report.failed("v_domination_violated");
    }
    Ok(Claim3Report {
        report,
        level: n,
        measured,
        i_prime,
        i_mixed: sum(&|c| c.i_mixed),
        i_tilde_cut: sum(&|c| c.i_tilde_cut),
        i_tilde,
        steps,
        lower_bound,
        c15,
        c14,
        holder,
        c20,
        v_domination_violations: violations,
        equilibrium: cells.iter().flat_map(|c| c.equilibrium.clone()).collect(),
        cells: cells.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::aligned_structure;
    use crate::measure::make_cantor_square;

    fn toy(kappa: f64, g: usize, levels: usize) -> CantorStructure {
        let sq = make_cantor_square(1.5, g, kappa, 1.0).unwrap();
        aligned_structure(&sq, levels, 0.01, 6.0, 1e-5).unwrap()
    }

    #[test]
    fn claim1_on_cantor_square() {
        let st = toy(8.0, 4, 3);
        let r = claim1_check(&st, 1.5).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(!r.metadata.contains_key("precondition_violated"));
    }

    #[test]
    fn claim1_flags_violated_precondition() {
        let sq = make_cantor_square(1.5, 3, 8.0, 1.0).unwrap();
        let st = aligned_structure(&sq, 2, 0.01, 6.0, 1e-3).unwrap();
        let r = claim1_check(&st, 1.5).unwrap();
        assert_eq!(r.metadata["precondition_violated"], 1.0);
    }

    #[test]
    fn claim1_single_level() {
        let st = toy(8.0, 2, 1);
        assert!(claim1_check(&st, 1.5).unwrap().pass);
    }

    #[test]
    fn gram_single_level_has_no_cross_terms() {
        let g = gram_matrix(&toy(8.0, 2, 1), 1.5).unwrap();
        assert_eq!(g.matrix.len(), 1);
        assert!(g.claim2.is_empty());
        assert!(g.matrix[0][0] > 0.0);
    }

    #[test]
    fn gram_cancellation_and_claim2() {
        let g = gram_matrix(&toy(8.0, 4, 4), 1.5).unwrap();
        assert!(g.cancellation.iter().all(|&r| r <= 1e-10), "{:?}", g.cancellation);
        assert!(g.cancellation_relative.iter().all(|&r| r <= 1e-10), "{:?}", g.cancellation_relative);
        for r in &g.claim2 {
            assert!(r.pass, "{r:?}");
        }
        // the diagonals grow like κ^{sn}, so neighbours are nearly orthogonal
        // as vectors while the lower diagonal alone does not dominate
        assert!(g.max_cosine <= 0.1, "{}", g.max_cosine);
        assert!(g.max_off_ratio > 0.1, "{}", g.max_off_ratio);
    }

    #[test]
    fn claim3_single_cell_two_atoms() {
        let sq = make_cantor_square(1.5, 1, 8.0, 1.0).unwrap();
        let st = aligned_structure(&sq, 1, 0.01, 6.0, 1e-5).unwrap();
        let pipe = Claim3Pipeline { max_iters: 0, ..Claim3Pipeline::default() };
        let r = claim3_lower(&st, 0, 1.5, &pipe).unwrap();
        assert!(r.measured > 0.0);
        assert_eq!(r.v_domination_violations, 0);
        assert!(r.report.pass, "{:?}", r.report);
    }

    #[test]
    fn claim3_on_balanced_square_is_self_similar() {
        let st = toy(1.0, 3, 2);
        let pipe = Claim3Pipeline { max_iters: 0, ..Claim3Pipeline::default() };
        let a = claim3_lower(&st, 0, 1.5, &pipe).unwrap();
        let b = claim3_lower(&st, 1, 1.5, &pipe).unwrap();
        assert!((a.measured / b.measured - 1.0).abs() < 0.25, "{} {}", a.measured, b.measured);
    }

    #[test]
    fn claim3_toy_reports_every_intermediate() {
        let st = toy(8.0, 3, 2);
        let r = claim3_lower(&st, 0, 1.5, &Claim3Pipeline::default()).unwrap();
        eprintln!("{r:#?}");
        assert!(r.report.pass, "{:?}", r.report);
        assert!(r.lower_bound > 0.0);
        assert!(r.lower_bound <= r.i_prime * (1.0 + 1e-12));
        for e in &r.equilibrium {
            assert!(e.pass, "{e:?}");
        }
        assert!(r.holder.0 >= r.holder.1);
    }

    #[test]
    fn deeper_level_is_rejected() {
        let st = toy(8.0, 2, 1);
        assert!(claim3_lower(&st, 1, 1.5, &Claim3Pipeline::default()).is_err());
    }
}
