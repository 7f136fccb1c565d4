//! The extremal problem over cap weights: `Φ(α) = λ m max α + ∫V(Rμ̃^α)dμ̃^α`
//! under `μ̃^α(ℝ²) = μ̃(ℝ²)`, its minimiser and the first-order condition.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::grid::GridField;
use crate::measure::{Atom, Cap, Measure};
use crate::profiles::VProfile;
use crate::riesz::{cap_grid, transform_caps, transform_direct};
use crate::verify::EstimateReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Caps `μ̃_j` with quadrature nodes and the influence fields `Rμ̃_j` at every node.
#[derive(Debug, Clone)]
pub struct CapSystem {
    pub s: f64,
    pub caps: Vec<Cap>,
    /// Quadrature nodes of each cap, weights summing to the cap mass.
    pub nodes: Vec<Vec<Atom>>,
    /// `influence[i][j][k] = Rμ̃_j` at node `k` of cap `i`.
    pub influence: Vec<Vec<Vec<[f64; 2]>>>,
    /// `μ̃_j(ℝ²)`.
    pub masses: Vec<f64>,
    /// `μ̃(ℝ²)`.
    pub total: f64,
    /// `m`, half of `μ̃(ℝ²)`.
    pub m: f64,
    /// Local grid size per cap.
    pub n_loc: usize,
}

impl CapSystem {
    pub fn new(caps: Vec<Cap>, s: f64, n_loc: usize) -> Result<Self> {
        if caps.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if caps.iter().any(|c| !(c.mass > 0.0)) {
            return Err(Error::InvalidParameter("caps must carry positive mass".into()));
        }
        let nodes: Vec<Vec<Atom>> = caps
            .iter()
            .map(|c| {
                let raw = Measure::Gridded(cap_grid(c, n_loc)).as_atoms();
                let sum: f64 = raw.iter().map(|a| a.weight).sum();
                raw.into_iter().map(|a| Atom { at: a.at + c.support.center, weight: a.weight * c.mass / sum }).collect()
            })
            .collect();
        let influence = nodes
            .iter()
            .map(|own| {
                let pts: Vec<Point2> = own.iter().map(|a| a.at).collect();
                caps.iter().map(|c| transform_caps(std::slice::from_ref(c), s, n_loc, &pts, None)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let masses: Vec<f64> = caps.iter().map(|c| c.mass).collect();
        let total: f64 = masses.iter().sum();
        Ok(CapSystem { s, caps, nodes, influence, masses, total, m: 0.5 * total, n_loc })
    }

    pub fn len(&self) -> usize {
        self.caps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.caps.is_empty()
    }

    /// `Rμ̃^α` at the nodes of cap `i`.
    pub fn field(&self, alpha: &[f64], i: usize) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; self.nodes[i].len()];
        for (j, &a) in alpha.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (o, f) in out.iter_mut().zip(&self.influence[i][j]) {
                o[0] += a * f[0];
                o[1] += a * f[1];
            }
        }
        out
    }

    /// `μ̃^α(ℝ²)`.
    pub fn mass_of(&self, alpha: &[f64]) -> f64 {
        alpha.iter().zip(&self.masses).map(|(a, m)| a * m).sum()
    }

    /// `∫V(Rμ̃^α)dμ̃^α`.
    pub fn energy(&self, alpha: &[f64]) -> f64 {
        let v = VProfile::new();
        (0..self.len())
            .map(|i| {
                if alpha[i] == 0.0 {
                    return 0.0;
                }
                let f = self.field(alpha, i);
                alpha[i] * self.nodes[i].iter().zip(&f).map(|(a, x)| a.weight * v.big_v(*x)).sum::<f64>()
            })
            .sum()
    }

    /// The caps reweighted by `α`, as a measure.
    pub fn weighted(&self, alpha: &[f64]) -> Measure {
        Measure::CapSum(self.caps.iter().zip(alpha).map(|(c, a)| Cap { mass: c.mass * a, ..*c }).collect())
    }
}

fn check_alpha(alpha: &[f64], system: &CapSystem) -> Result<()> {
    if alpha.len() != system.len() {
        return Err(Error::Inadmissible(format!("{} weights for {} caps", alpha.len(), system.len())));
    }
    if let Some(a) = alpha.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
        return Err(Error::Inadmissible(format!("weight {a} is not a finite nonnegative number")));
    }
    Ok(())
}

/// `Φ(α)`. Nonnegativity is enforced; the mass constraint is the optimiser's business.
pub fn phi_eval(alpha: &[f64], lambda: f64, system: &CapSystem) -> Result<f64> {
    check_alpha(alpha, system)?;
    let max = alpha.iter().copied().fold(0.0, f64::max);
    Ok(lambda * system.m * max + system.energy(alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub phi: f64,
    pub max_alpha: f64,
    /// `|μ̃^α(ℝ²) − μ̃(ℝ²)| / μ̃(ℝ²)`.
    pub residual: f64,
}

/// One descent run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Descent {
    pub start: Vec<f64>,
    pub weights: Vec<f64>,
    pub phi: f64,
    pub trace: Vec<TraceRow>,
    /// The iteration budget ran out before the step fell below tolerance.
    pub exhausted: bool,
}

/// Result of [`minimize_phi`]: the best run and every run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weights {
    pub lambda: f64,
    pub a: Vec<f64>,
    pub phi: f64,
    pub runs: Vec<Descent>,
}

impl Weights {
    pub fn best(&self) -> &Descent {
        self.runs.iter().min_by(|x, y| x.phi.total_cmp(&y.phi)).expect("at least one run")
    }

    pub fn exhausted(&self) -> bool {
        self.best().exhausted
    }
}

impl Descent {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,phi,max_alpha,residual\n");
        for r in &self.trace {
            out.push_str(&format!("{},{:e},{:e},{:e}\n", r.iter, r.phi, r.max_alpha, r.residual));
        }
        out
    }

    pub fn monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].phi <= w[0].phi)
    }
}

const STEP_TOL: f64 = 1e-7;

fn renormalise(alpha: &mut [f64], system: &CapSystem) {
    let k = system.total / system.mass_of(alpha);
    alpha.iter_mut().for_each(|a| *a *= k);
}

fn descend(start: Vec<f64>, lambda: f64, system: &CapSystem, max_iters: usize) -> Result<Descent> {
    let mut alpha = start.clone();
    renormalise(&mut alpha, system);
    let mut phi = phi_eval(&alpha, lambda, system)?;
    let row = |iter, alpha: &[f64], phi| TraceRow {
        iter,
        phi,
        max_alpha: alpha.iter().copied().fold(0.0, f64::max),
        residual: (system.mass_of(alpha) - system.total).abs() / system.total,
    };
    let mut trace = vec![row(0, &alpha, phi)];
    let mut step = 0.25;
    let mut iter = 0;
    while step >= STEP_TOL && iter < max_iters {
        iter += 1;
        let max = alpha.iter().copied().fold(0.0, f64::max);
        // coordinates below the max first, then the argmax ones in index order
        let mut order: Vec<usize> = (0..alpha.len()).filter(|&j| alpha[j] < max).collect();
        order.extend((0..alpha.len()).filter(|&j| alpha[j] >= max));
        let mut improved = false;
        for j in order {
            for sign in [1.0, -1.0] {
                let mut trial = alpha.clone();
                trial[j] = (trial[j] + sign * step * max.max(1e-12)).max(0.0);
                if trial == alpha || system.mass_of(&trial) <= 0.0 {
                    continue;
                }
                renormalise(&mut trial, system);
                let p = phi_eval(&trial, lambda, system)?;
                if p < phi {
                    alpha = trial;
                    phi = p;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
        trace.push(row(iter, &alpha, phi));
    }
    Ok(Descent { start, weights: alpha, phi, trace, exhausted: step >= STEP_TOL })
}

/// Projected coordinate descent with multiplicative renormalisation onto the
/// mass constraint and step halving. Runs from the uniform weights and two
/// seeded random starts; the lowest `Φ` wins.
pub fn minimize_phi(lambda: f64, system: &CapSystem, max_iters: usize, seed: u64) -> Result<Weights> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("lambda must be positive".into()));
    }
    let k = system.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![vec![1.0; k]];
    for _ in 0..2 {
        starts.push((0..k).map(|_| rng.random_range(0.25..1.75)).collect());
    }
    let runs: Vec<Descent> = starts.into_iter().map(|s| descend(s, lambda, system, max_iters)).collect::<Result<_>>()?;
    let mut w = Weights { lambda, a: Vec::new(), phi: f64::INFINITY, runs };
    let best = w.best().clone();
    w.a = best.weights;
    w.phi = best.phi;
    Ok(w)
}

/// `I_j = ∫[V(Rμ̃^a) + R*(∇V(Rμ̃^a)μ̃^a)]dμ̃_j`; the adjoint term is taken in
/// the dual form `∫⟨∇V(Rμ̃^a), Rμ̃_j⟩dμ̃^a`.
pub fn first_order_integral(a: &[f64], j: usize, system: &CapSystem) -> Result<f64> {
    check_alpha(a, system)?;
    let v = VProfile::new();
    let own = system.field(a, j);
    let first: f64 = system.nodes[j].iter().zip(&own).map(|(n, x)| n.weight * v.big_v(*x)).sum();
    let second: f64 = (0..system.len())
        .into_par_iter()
        .map(|i| {
            if a[i] == 0.0 {
                return 0.0;
            }
            let f = system.field(a, i);
            let acc: f64 = system.nodes[i]
                .iter()
                .zip(&f)
                .zip(&system.influence[i][j])
                .map(|((n, x), r)| {
                    let g = v.big_v_grad(*x);
                    n.weight * (g[0] * r[0] + g[1] * r[1])
                })
                .sum();
            a[i] * acc
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(first + second)
}

/// `I_j ≤ 6λ μ̃_j(ℝ²)`; `None` when `a_j = 0` (the condition does not apply).
pub fn first_order_residual(a: &[f64], lambda: f64, j: usize, system: &CapSystem) -> Result<Option<EstimateReport>> {
    check_alpha(a, system)?;
    if j >= system.len() {
        return Err(Error::InvalidParameter(format!("cap {j} out of range")));
    }
    if a[j] == 0.0 {
        return Ok(None);
    }
    let i = first_order_integral(a, j, system)?;
    let rhs = 6.0 * lambda * system.masses[j];
    Ok(Some(
        EstimateReport::upper("first_order", i, rhs, 6.0)
            .with_tolerance(1e-9 * rhs.abs())
            .with("cap", j as f64)
            .with("a_j", a[j])
            .with("lambda", lambda),
    ))
}

/// `|∇V| ≤ 4` at every node and `∫|∇V(Rμ̃^a)|²dμ̃^a ≤ 4∫V(Rμ̃^a)dμ̃^a ≤ 4Φ(a)`.
pub fn gradient_checks(a: &[f64], lambda: f64, system: &CapSystem) -> Result<Vec<EstimateReport>> {
    check_alpha(a, system)?;
    let v = VProfile::new();
    let mut sup: f64 = 0.0;
    let mut grad2 = 0.0;
    let mut energy = 0.0;
    for i in 0..system.len() {
        let f = system.field(a, i);
        for (n, x) in system.nodes[i].iter().zip(&f) {
            let g = v.big_v_grad(*x);
            let gn = g[0].hypot(g[1]);
            sup = sup.max(gn);
            grad2 += a[i] * n.weight * gn * gn;
            energy += a[i] * n.weight * v.big_v(*x);
        }
    }
    let phi = phi_eval(a, lambda, system)?;
    Ok(vec![
        EstimateReport::upper("grad_v_sup", sup, 4.0, 4.0),
        EstimateReport::upper("grad_v_energy", grad2, 4.0 * energy, 4.0).with_tolerance(1e-12 * energy),
        EstimateReport::upper("energy_phi", 4.0 * energy, 4.0 * phi, 4.0).with_tolerance(1e-12 * phi),
    ])
}

/// Integrates the first-order bound against `Ψ dm₂`:
/// `∫V(Rμ̃^a)Ψ + ∫⟨R(Ψm₂), ∇V(Rμ̃^a)⟩dμ̃^a ≤ (6λ + β)∫Ψ`, with `β` the measured
/// excess of `V(Rμ̃^a) + R*(∇V(Rμ̃^a)μ̃^a)` over `6λ` on the support.
pub fn psi_closing_check(a: &[f64], lambda: f64, system: &CapSystem, psi: &GridField) -> Result<EstimateReport> {
    check_alpha(a, system)?;
    let v = VProfile::new();
    let spec = psi.spec;
    let h2 = spec.h() * spec.h();
    let pts: Vec<(Point2, f64)> = (0..spec.len()).filter(|&k| psi.data[k] != 0.0).map(|k| (spec.point_of(k), psi.data[k])).collect();
    let field_pts: Vec<Point2> = pts.iter().map(|p| p.0).collect();
    let weighted: Vec<Cap> = system.caps.iter().zip(a).filter(|(_, w)| **w > 0.0).map(|(c, w)| Cap { mass: c.mass * w, ..*c }).collect();
    let r = transform_caps(&weighted, system.s, system.n_loc, &field_pts, None)?;
    let first: f64 = pts.iter().zip(&r).map(|((_, p), x)| p * v.big_v(*x) * h2).sum();
    // dual form of the adjoint term
    let all_nodes: Vec<Point2> = system.nodes.iter().flatten().map(|n| n.at).collect();
    let rpsi = transform_direct(&Measure::Gridded(psi.clone()), system.s, &all_nodes, None)?;
    let mut second = 0.0;
    let mut excess: f64 = f64::NEG_INFINITY;
    let mut offset = 0;
    for i in 0..system.len() {
        let f = system.field(a, i);
        let n_i = system.nodes[i].len();
        if a[i] > 0.0 {
            for (k, (n, x)) in system.nodes[i].iter().zip(&f).enumerate() {
                let g = v.big_v_grad(*x);
                let rp = rpsi[offset + k];
                second += a[i] * n.weight * (g[0] * rp[0] + g[1] * rp[1]);
            }
            // pointwise first-order field on the support, by the same dual pairing
            let pts_i: Vec<Point2> = system.nodes[i].iter().map(|n| n.at).collect();
            let adj = adjoint_at(a, system, &pts_i)?;
            for (k, x) in f.iter().enumerate() {
                if system.nodes[i][k].weight > 1e-9 * system.masses[i] / n_i as f64 {
                    excess = excess.max(v.big_v(*x) + adj[k] - 6.0 * lambda);
                }
            }
        }
        offset += n_i;
    }
    let beta = excess.max(0.0);
    let int_psi = psi.integral(0);
    let lhs = first + second;
    Ok(EstimateReport::upper("psi_closing", lhs, (6.0 * lambda + beta) * int_psi, 6.0)
        .with_tolerance(1e-9 * lhs.abs())
        .with("beta", beta)
        .with("int_psi", int_psi)
        .with("v_term", first)
        .with("adjoint_term", second))
}

/// `R*(∇V(Rμ̃^a)μ̃^a)` at the given points, summed over the quadrature nodes.
fn adjoint_at(a: &[f64], system: &CapSystem, points: &[Point2]) -> Result<Vec<f64>> {
    let v = VProfile::new();
    let mut sources = Vec::new();
    for i in 0..system.len() {
        if a[i] == 0.0 {
            continue;
        }
        let f = system.field(a, i);
        for (n, x) in system.nodes[i].iter().zip(&f) {
            let g = v.big_v_grad(*x);
            sources.push((n.at, [a[i] * n.weight * g[0], a[i] * n.weight * g[1]]));
        }
    }
    let s = system.s;
    Ok(points
        .par_iter()
        .map(|&x| {
            let mut acc = 0.0;
            for (y, e) in &sources {
                let d = *y - x;
                let r2 = d.norm_sq();
                if r2 == 0.0 {
                    continue;
                }
                let k = r2.powf(-0.5 * (s + 1.0));
                acc += k * (d.x * e[0] + d.y * e[1]);
            }
            acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Disk;
    use crate::measure::CapProfile;

    fn cap(x: f64, y: f64, r: f64, m: f64) -> Cap {
        Cap { support: Disk::new(Point2::new(x, y), r), mass: m, profile: CapProfile { plateau: 0.5 } }
    }

    fn symmetric() -> CapSystem {
        CapSystem::new(vec![cap(-1.0, 0.0, 0.3, 1.0), cap(1.0, 0.0, 0.3, 1.0)], 1.5, 16).unwrap()
    }

    fn three() -> CapSystem {
        CapSystem::new(vec![cap(-1.0, 0.0, 0.3, 1.0), cap(0.8, 0.1, 0.25, 0.7), cap(0.2, 1.2, 0.35, 1.4)], 1.5, 16).unwrap()
    }

    #[test]
    fn zero_weights_give_zero() {
        let sys = symmetric();
        assert_eq!(phi_eval(&[0.0, 0.0], 1.0, &sys).unwrap(), 0.0);
        assert!(matches!(phi_eval(&[-1.0, 1.0], 1.0, &sys), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn node_weights_carry_cap_mass() {
        let sys = three();
        for (n, m) in sys.nodes.iter().zip(&sys.masses) {
            let s: f64 = n.iter().map(|a| a.weight).sum();
            assert!((s - m).abs() < 1e-14 * m);
        }
    }

    #[test]
    fn single_cap_is_forced_and_above_lambda_m() {
        let sys = CapSystem::new(vec![cap(0.0, 0.0, 0.3, 1.0)], 1.5, 16).unwrap();
        let phi = phi_eval(&[1.0], 2.0, &sys).unwrap();
        assert!(phi > 2.0 * sys.m);
        let w = minimize_phi(2.0, &sys, 100, 1).unwrap();
        assert!((w.a[0] - 1.0).abs() < 1e-12);
        let r = first_order_residual(&w.a, 2.0, 0, &sys).unwrap().unwrap();
        assert!(r.measured_lhs > 0.0);
    }

    #[test]
    fn symmetric_caps_balance() {
        let sys = symmetric();
        let lambda = 2.0 * sys.energy(&[1.0, 1.0]) / sys.m;
        assert!(phi_eval(&[1.0, 1.0], lambda, &sys).unwrap() <= phi_eval(&[2.0, 0.0], lambda, &sys).unwrap());
        let w = minimize_phi(lambda, &sys, 2000, 7).unwrap();
        assert!((w.a[0] - 1.0).abs() < 1e-3 && (w.a[1] - 1.0).abs() < 1e-3, "{:?}", w.a);
        let i0 = first_order_integral(&[1.0, 1.0], 0, &sys).unwrap();
        let i1 = first_order_integral(&[1.0, 1.0], 1, &sys).unwrap();
        assert!((i0 - i1).abs() <= 1e-6 * i0.abs());
    }

    #[test]
    fn three_caps_descend_and_meet_first_order() {
        let sys = three();
        let lambda = sys.energy(&[1.0; 3]) / sys.m;
        let w = minimize_phi(lambda, &sys, 4000, 3).unwrap();
        assert!(w.phi <= phi_eval(&[1.0; 3], lambda, &sys).unwrap());
        for run in &w.runs {
            assert!(run.monotone());
            assert!(run.trace.iter().all(|r| r.residual <= 1e-10));
        }
        assert!(w.a.iter().all(|&a| a <= 2.0 + 1e-2), "{:?}", w.a);
        for j in 0..3 {
            if let Some(r) = first_order_residual(&w.a, lambda, j, &sys).unwrap() {
                assert!(r.pass, "{r:?}");
            }
        }
        for r in gradient_checks(&w.a, lambda, &sys).unwrap() {
            assert!(r.pass, "{r:?}");
        }
        assert!(w.runs[0].trace_csv().starts_with("iter,phi,max_alpha,residual\n"));
    }

    #[test]
    fn first_order_integral_matches_finite_difference() {
        // I_j is minus the derivative of the energy along −t μ̃_j
        let sys = three();
        let a = [1.1, 0.8, 0.95];
        let e = |t: f64| {
            let mut b = a;
            b[1] -= t;
            sys.energy(&b)
        };
        let t = 1e-5;
        let fd = (e(-t) - e(t)) / (2.0 * t);
        let i = first_order_integral(&a, 1, &sys).unwrap();
        assert!((fd - i).abs() < 1e-5 * i.abs(), "{fd} {i}");
    }

    #[test]
    fn non_optimal_weights_fail_the_first_order_check() {
        // a light cap with a strong self-field: uniform weights overload it
        let sys = CapSystem::new(vec![cap(-1.0, 0.0, 0.3, 1.0), cap(0.8, 0.1, 0.25, 0.7), cap(0.2, 1.2, 0.01, 0.15)], 1.5, 16).unwrap();
        let lambda = sys.energy(&[1.0; 3]) / sys.m;
        let r = first_order_residual(&[1.0; 3], lambda, 2, &sys).unwrap().unwrap();
        assert!(!r.pass, "{r:?}");
        let w = minimize_phi(lambda, &sys, 4000, 5).unwrap();
        for j in 0..3 {
            if let Some(r) = first_order_residual(&w.a, lambda, j, &sys).unwrap() {
                assert!(r.pass, "{:?} {r:?}", w.a);
            }
        }
    }

    #[test]
    fn zero_weight_skips_the_first_order_check() {
        let sys = three();
        assert!(first_order_residual(&[1.0, 0.0, 1.0], 1.0, 1, &sys).unwrap().is_none());
    }
}
