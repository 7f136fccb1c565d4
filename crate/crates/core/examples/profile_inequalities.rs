// The convex profile v: its six inequalities on a sweep and the Legendre
// biconjugate.
use rieszlab::profiles::VProfile;

/// `(total violations, largest |v − v**| on [0, 2])`.
pub fn run_example() -> (usize, f64) {
    let v = VProfile::new();
    let violations = v.inequality_sweep(200, 50, 20.0, 10.0).iter().map(|r| r.violations).sum();
    let dual = (0..=200).map(|k| 0.01 * k as f64).map(|t| (v.legendre_biconjugate(t) - v.v(t)).abs()).fold(0.0, f64::max);
    (violations, dual)
}

fn main() {
    let (violations, dual) = run_example();
    println!("{violations} violations, biconjugate error {dual:.2e}");
}
