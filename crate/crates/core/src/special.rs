//! Gamma-function constants of the Riesz potentials.

use crate::error::{Error, Result};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

fn is_pole(x: f64) -> bool {
    x <= 0.0 && (x - x.round()).abs() < 1e-12
}

/// `A(d, α) = π^{α − d/2} Γ((d−α)/2) / Γ(α/2)`, the normalisation of `K_α`.
/// Zeros of `1/Γ(α/2)` give `A = 0`; poles of `Γ((d−α)/2)` are errors.
pub fn riesz_constant(d: u32, alpha: f64) -> Result<f64> {
    let d = f64::from(d);
    let num_arg = 0.5 * (d - alpha);
    if is_pole(num_arg) {
        return Err(Error::Pole(alpha));
    }
    if is_pole(0.5 * alpha) {
        return Ok(0.0);
    }
    Ok(PI.powf(alpha - 0.5 * d) * gamma(num_arg) / gamma(0.5 * alpha))
}

/// Multiplier constant `σ` of the s-Riesz transform: `R_j` acts on the Fourier
/// side as `i σ ξ_j |ξ|^{s−3}` with `f̂(ξ) = ∫ f e^{−2πi⟨x,ξ⟩}`.
///
/// Written as `−π^{s−1} Γ((3−s)/2) / Γ((s+1)/2)`, which is the same number as
/// `−2π / ((s−1) A(2, 3−s))` but has no removable singularity at `s = 1`.
pub fn transform_sigma(s: f64) -> f64 {
    -PI.powf(s - 1.0) * gamma(0.5 * (3.0 - s)) / gamma(0.5 * (s + 1.0))
}

/// Constant of the density reproduction formula
/// `p(x) = σ_rep ∫ (u(x+y) − u(x)) |y|^{s−5} dy` for `u = U(p m₂)`.
pub fn reproduction_sigma(s: f64) -> Result<f64> {
    let alpha = 3.0 - s;
    Ok(-(s - 1.0) * riesz_constant(2, alpha)? * riesz_constant(2, -alpha)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Γ(1/4), Γ(3/4) to 20 digits (mpmath)
    const GAMMA_QUARTER: f64 = 3.625_609_908_221_908_3;
    const GAMMA_THREE_QUARTERS: f64 = 1.225_416_702_465_177_6;

    #[test]
    fn a_of_one_is_one() {
        assert!((riesz_constant(2, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn a_matches_high_precision_gamma() {
        let a15 = PI.sqrt() * GAMMA_QUARTER / GAMMA_THREE_QUARTERS;
        assert!((riesz_constant(2, 1.5).unwrap() - a15).abs() / a15 < 1e-13);
        let a05 = PI.powf(-0.5) * GAMMA_THREE_QUARTERS / GAMMA_QUARTER;
        assert!((riesz_constant(2, 0.5).unwrap() - a05).abs() / a05 < 1e-13);
    }

    #[test]
    fn reflection_product() {
        // A(2,α)·A(2,2−α) = 1
        for alpha in [0.3, 0.5, 1.2, 1.7] {
            let p = riesz_constant(2, alpha).unwrap() * riesz_constant(2, 2.0 - alpha).unwrap();
            assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pole_is_reported() {
        assert_eq!(riesz_constant(2, 2.0), Err(Error::Pole(2.0)));
    }

    #[test]
    fn sigma_forms_agree() {
        for s in [0.5, 1.2, 1.5, 1.8] {
            let alt = -2.0 * PI / ((s - 1.0) * riesz_constant(2, 3.0 - s).unwrap());
            assert!((transform_sigma(s) - alt).abs() < 1e-12 * alt.abs());
        }
        assert!((transform_sigma(1.0) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn negative_order_constant_is_negative() {
        // A(2,−1.5) = π^{−2.5} Γ(1.75)/Γ(−0.75)
        let v = riesz_constant(2, -1.5).unwrap();
        let want = PI.powf(-2.5) * 0.919_062_526_848_883_5 / -4.834_146_544_295_877;
        assert!((v - want).abs() < 1e-12 * want.abs(), "{v} {want}");
    }
}
