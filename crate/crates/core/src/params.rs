//! Construction parameters `s, N, ε, M, δ, m, H, r*, ρ*` and their side conditions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub s: f64,
    #[serde(rename = "N")]
    pub levels: usize,
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub delta: f64,
    /// Half of the total mass.
    pub m: f64,
    #[serde(rename = "H")]
    pub budget: f64,
    pub r_star: f64,
    pub rho_star: f64,
    /// Per-level loss constant `C` in `(1 − Cε)^N ≥ 1/2`.
    #[serde(default = "default_loss_constant")]
    pub loss_constant: f64,
}

fn default_loss_constant() -> f64 {
    10.0
}

/// One side condition and whether it holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Condition {
    fn less(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Condition { name, lhs, rhs, holds: lhs < rhs }
    }

    fn at_most(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Condition { name, lhs, rhs, holds: lhs <= rhs }
    }
}

/// Measured stand-ins for the abstract constants in the closing inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosingConstants {
    pub c12: f64,
    pub c18: f64,
    pub c19: f64,
    pub c20: f64,
}

impl Default for ClosingConstants {
    fn default() -> Self {
        ClosingConstants { c12: 1.0, c18: 1.0, c19: 1.0, c20: 1.0 }
    }
}

impl ConstructionParams {
    /// `M^s δ / ε^s`, the quantity every smallness condition is built from.
    pub fn sparsity(&self) -> f64 {
        self.big_m.powf(self.s) * self.delta / self.epsilon.powf(self.s)
    }

    /// Side conditions checked in the order the parameters are chosen
    /// (`N`, then `ε`, then `M`, then `δ`).
    pub fn conditions(&self) -> Vec<Condition> {
        let ms = self.big_m.powf(self.s);
        vec![
            Condition { name: "s in (1,2)", lhs: self.s, rhs: 2.0, holds: self.s > 1.0 && self.s < 2.0 },
            Condition { name: "epsilon in (0, 0.01]", lhs: self.epsilon, rhs: 0.01, holds: self.epsilon > 0.0 && self.epsilon <= 0.01 },
            Condition {
                name: "(1 - C eps)^N >= 1/2",
                lhs: (1.0 - self.loss_constant * self.epsilon).max(0.0).powi(self.levels as i32),
                rhs: 0.5,
                holds: (1.0 - self.loss_constant * self.epsilon).max(0.0).powi(self.levels as i32) >= 0.5,
            },
            Condition { name: "M >= 6", lhs: self.big_m, rhs: 6.0, holds: self.big_m >= 6.0 },
            Condition { name: "delta > 0", lhs: self.delta, rhs: 0.0, holds: self.delta > 0.0 },
            Condition::less("2 M^s delta / eps^s < 1", 2.0 * self.sparsity(), 1.0),
            Condition::less("2 pi M^s delta / eps^2 < 1", 2.0 * std::f64::consts::PI * ms * self.delta / (self.epsilon * self.epsilon), 1.0),
            Condition {
                name: "m, H, r*, rho* > 0",
                lhs: self.m.min(self.budget).min(self.r_star).min(self.rho_star),
                rhs: 0.0,
                holds: self.m > 0.0 && self.budget > 0.0 && self.r_star > 0.0 && self.rho_star > 0.0,
            },
        ]
    }

    pub fn violations(&self) -> Vec<Condition> {
        self.conditions().into_iter().filter(|c| !c.holds).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = self.violations();
        if bad.is_empty() {
            Ok(())
        } else {
            let names: Vec<String> = bad.iter().map(|c| format!("{} (lhs {:.6e}, rhs {:.6e})", c.name, c.lhs, c.rhs)).collect();
            Err(Error::Config(format!("construction parameters violate: {}", names.join("; "))))
        }
    }

    /// The three closing inequalities (Claim 1 slack, Claim 2, Claim 3) with
    /// measured constants; reported, never enforced.
    pub fn closing_conditions(&self, c: &ClosingConstants) -> Vec<Condition> {
        let s = self.s;
        let n = self.levels.max(1) as f64;
        let ratio = self.m / self.budget;
        let inv_m = 1.0 / self.big_m;
        let wide = self.big_m.powf(2.0 * s) * self.delta / self.epsilon.powf(2.0 + s);
        vec![
            Condition::less("claim 1: 2 M^s delta / eps^s < 1", 2.0 * self.sparsity(), 1.0),
            Condition::at_most(
                "claim 2: C12 (M^s delta/eps^s + 1/M) sqrt2 <= m^2/(4 N C20 H^2)",
                c.c12 * (self.sparsity() + inv_m) * std::f64::consts::SQRT_2,
                ratio * ratio / (4.0 * n * c.c20),
            ),
            Condition::at_most(
                "claim 3: C18 (M^2s delta/eps^(2+s) + 1/M) <= (m/H)^4 / (2 C19)",
                c.c18 * (wide + inv_m),
                ratio.powi(4) / (2.0 * c.c19),
            ),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> ConstructionParams {
        ConstructionParams {
            s: 1.5,
            levels: 2,
            epsilon: 0.01,
            big_m: 6.0,
            delta: 1e-6,
            m: 0.5,
            budget: 1.0,
            r_star: 0.1,
            rho_star: 0.05,
            loss_constant: 10.0,
        }
    }

    #[test]
    fn sample_is_admissible() {
        assert!(sample().validate().is_ok(), "{:?}", sample().violations());
    }

    #[test]
    fn large_epsilon_named_in_error() {
        let mut p = sample();
        p.epsilon = 0.5;
        let e = p.validate().unwrap_err().to_string();
        assert!(e.contains("epsilon in (0, 0.01]"), "{e}");
    }

    #[test]
    fn delta_too_large_breaks_claim1_slack() {
        let mut p = sample();
        p.delta = 1.0;
        let names: Vec<_> = p.violations().iter().map(|c| c.name).collect();
        assert!(names.contains(&"2 M^s delta / eps^s < 1"));
    }
}
