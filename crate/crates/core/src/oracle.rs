//! Brute-force references: a refinement ladder for the transform of a
//! density, the comparison rule, and the frozen fixture format.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::measure::Atom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Refinement ladder for [`quad_transform`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Grid spacings, coarse to fine, each half the previous.
    pub spacings: Vec<f64>,
    /// Half width of the square that carries the density, centred at the origin.
    pub support: f64,
}

impl QuadratureSpec {
    pub fn ladder(h0: f64, levels: usize, support: f64) -> Self {
        QuadratureSpec { spacings: (0..levels).map(|k| h0 / 2f64.powi(k as i32)).collect(), support }
    }

    fn validate(&self) -> Result<()> {
        if self.spacings.len() < 2 {
            return Err(Error::InvalidParameter("the ladder needs at least two levels".into()));
        }
        for w in self.spacings.windows(2) {
            if (w[0] / w[1] - 2.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter("ladder spacings must halve".into()));
            }
        }
        Ok(())
    }
}

/// What the oracle integrates.
pub enum OracleInput<'a> {
    Atoms(&'a [Atom]),
    /// A density vanishing outside the support square of the ladder.
    Density(&'a (dyn Fn(Point2) -> f64 + Sync)),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: [f64; 2],
    /// Distance between the last two extrapolated values.
    pub error: f64,
    /// Raw midpoint values, coarse to fine.
    pub ladder: Vec<[f64; 2]>,
    /// Error estimate after each extrapolation stage, coarse to fine.
    pub errors: Vec<f64>,
    /// The error estimates decreased along the ladder.
    pub converged: bool,
}

/// `∫_{[-h/2,h/2]²} |z|^{1−s} dz` by polar integration over the eight triangles.
fn centre_cell_moment(s: f64, h: f64) -> f64 {
    let p = s - 3.0;
    let panels = 2000;
    let step = std::f64::consts::FRAC_PI_4 / panels as f64;
    let f = |t: f64| t.cos().powf(p);
    let mut acc = f(0.0) + f(std::f64::consts::FRAC_PI_4);
    for k in 1..panels {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * step);
    }
    let angular = acc * step / 3.0;
    8.0 / (3.0 - s) * (0.5 * h).powf(3.0 - s) * angular
}

/// Midpoint sum on the lattice `x + hℤ²`; the cell at `x` is integrated against
/// the linear part of the density, where only `−∇f·∫z z^T|z|^{-s-1}dz` survives.
fn midpoint(f: &(dyn Fn(Point2) -> f64 + Sync), s: f64, x: Point2, h: f64, support: f64) -> [f64; 2] {
    let reach = ((x.max_abs() + support) / h).ceil() as i64 + 1;
    let rows: Vec<[f64; 2]> = (-reach..=reach)
        .into_par_iter()
        .map(|j| {
            let mut acc = [0.0; 2];
            for i in -reach..=reach {
                if i == 0 && j == 0 {
                    continue;
                }
                let z = Point2::new(i as f64 * h, j as f64 * h);
                let y = x + z;
                if y.max_abs() > support {
                    continue;
                }
                let v = f(y);
                if v == 0.0 {
                    continue;
                }
                let k = z.norm().powf(-s - 1.0);
                acc[0] -= v * z.x * k;
                acc[1] -= v * z.y * k;
            }
            acc
        })
        .collect();
    let mut out = [0.0; 2];
    for r in rows {
        out[0] += r[0] * h * h;
        out[1] += r[1] * h * h;
    }
    let e = 1e-5 * h.max(1e-3);
    let gx = (f(x + Point2::new(e, 0.0)) - f(x - Point2::new(e, 0.0))) / (2.0 * e);
    let gy = (f(x + Point2::new(0.0, e)) - f(x - Point2::new(0.0, e))) / (2.0 * e);
    let c = 0.5 * centre_cell_moment(s, h);
    out[0] -= gx * c;
    out[1] -= gy * c;
    out
}

/// Exponents of the error expansion of the lattice sum, in the order they
/// are eliminated: `h^{3−s}` from the homogeneous centre term, then `h²`,
/// `h^{5−s}`, `h⁴`.
fn exponents(s: f64) -> [f64; 4] {
    [3.0 - s, 2.0, 5.0 - s, 4.0]
}

/// `Rμ(x)` by a refined midpoint ladder with Richardson extrapolation.
pub fn quad_transform(input: &OracleInput<'_>, s: f64, x: Point2, spec: &QuadratureSpec) -> Result<OracleValue> {
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::InvalidParameter(format!("s = {s} outside (0, 2)")));
    }
    match input {
        OracleInput::Atoms(atoms) => {
            let mut acc = [0.0; 2];
            for a in atoms.iter() {
                let z = x - a.at;
                let r2 = z.norm_sq();
                if r2 == 0.0 {
                    return Err(Error::SingularOrigin);
                }
                let k = r2.powf(-0.5 * (s + 1.0));
                acc[0] += a.weight * z.x * k;
                acc[1] += a.weight * z.y * k;
            }
            Ok(OracleValue { value: acc, error: 0.0, ladder: vec![acc], errors: vec![0.0], converged: true })
        }
        OracleInput::Density(f) => {
            spec.validate()?;
            let ladder: Vec<[f64; 2]> = spec.spacings.iter().map(|&h| midpoint(*f, s, x, h, spec.support)).collect();
            let mut table = ladder.clone();
            let mut errors = Vec::new();
            let mut best = *table.last().expect("validated");
            let mut err = f64::INFINITY;
            for p in exponents(s).iter().take(ladder.len() - 1) {
                let r = 2f64.powf(*p);
                let next: Vec<[f64; 2]> = table
                    .windows(2)
                    .map(|w| [(r * w[1][0] - w[0][0]) / (r - 1.0), (r * w[1][1] - w[0][1]) / (r - 1.0)])
                    .collect();
                let last = *next.last().expect("nonempty");
                err = (last[0] - best[0]).hypot(last[1] - best[1]);
                errors.push(err);
                best = last;
                table = next;
                if table.len() < 2 {
                    break;
                }
            }
            let converged = errors.windows(2).all(|w| w[1] <= w[0]);
            Ok(OracleValue { value: best, error: err, ladder, errors, converged })
        }
    }
}

/// `|fast − oracle| ≤ tolerance · max(|oracle|, 1e-12)`; returns the pass flag
/// and the ratio of the discrepancy to the allowed value.
pub fn refine_check(fast: f64, oracle: f64, tolerance: f64) -> (bool, f64) {
    let allowed = tolerance * oracle.abs().max(1e-12);
    let diff = (fast - oracle).abs();
    (diff <= allowed, diff / allowed)
}

/// Version descriptor hashed into every fixture.
const ORACLE_DESCRIPTOR: &str = "lattice midpoint, linear centre cell, Richardson 3-s/2/5-s/4, halving ladder; direct pair sums by split level";

pub fn oracle_version() -> String {
    hex::encode(&Sha256::digest(ORACLE_DESCRIPTOR.as_bytes())[..8])
}

/// One frozen derived value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub op: String,
    pub inputs: serde_json::Value,
    pub value: serde_json::Value,
    pub error: f64,
    pub oracle_version: String,
}

pub fn fixtures_to_json(f: &[Fixture]) -> String {
    serde_json::to_string_pretty(f).expect("fixtures serialise")
}

pub fn fixtures_from_json(text: &str) -> Result<Vec<Fixture>> {
    serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))
}

/// `G_{nk}` of a Cantor square by pair sums: the pair `(a, b)` feeds level
/// `n` when the atoms share their generation-`n` cell and not the next one.
/// Independent of the structure code.
pub fn cantor_gram_pairs(atoms: &[Atom], generations: usize, levels: usize, s: f64) -> Vec<Vec<f64>> {
    let split = |a: usize, b: usize| (0..levels).find(|&n| a >> (2 * (generations - n - 1)) != b >> (2 * (generations - n - 1)));
    let per_atom: Vec<Vec<[f64; 2]>> = (0..atoms.len())
        .into_par_iter()
        .map(|a| {
            let mut acc = vec![[0.0; 2]; levels];
            for b in 0..atoms.len() {
                if let Some(n) = split(a, b) {
                    let z = atoms[a].at - atoms[b].at;
                    let k = z.norm_sq().powf(-0.5 * (s + 1.0));
                    acc[n][0] += atoms[b].weight * z.x * k;
                    acc[n][1] += atoms[b].weight * z.y * k;
                }
            }
            acc
        })
        .collect();
    let mut g = vec![vec![0.0; levels]; levels];
    for n in 0..levels {
        for k in 0..levels {
            g[n][k] = per_atom.iter().zip(atoms).map(|(p, a)| a.weight * (p[n][0] * p[k][0] + p[n][1] * p[k][1])).sum();
        }
    }
    g
}

/// The Gaussian `e^{−|x|²/2}` used across the derived checks.
pub fn gaussian(p: Point2) -> f64 {
    (-0.5 * p.norm_sq()).exp()
}
