// Minimising Φ over cap weights: two mirror-image caps keep equal weights.
use rieszlab::equilibrium::{first_order_residual, minimize_phi, CapSystem};
use rieszlab::geometry::{Disk, Point2};
use rieszlab::measure::Cap;

/// `(weights, Φ trace monotone, first-order checks passed)`.
pub fn run_example() -> (Vec<f64>, bool, bool) {
    let caps = vec![Cap::new(Disk::new(Point2::new(-1.0, 0.0), 0.3), 0.5), Cap::new(Disk::new(Point2::new(1.0, 0.0), 0.3), 0.5)];
    let sys = CapSystem::new(caps, 1.5, 16).unwrap();
    let lambda = 2.0 * sys.energy(&[1.0, 1.0]) / sys.m;
    let w = minimize_phi(lambda, &sys, 500, 0).unwrap();
    let first = (0..2).all(|j| first_order_residual(&w.a, lambda, j, &sys).unwrap().is_none_or(|r| r.pass));
    (w.a.clone(), w.best().monotone(), first)
}

fn main() {
    let (a, monotone, first) = run_example();
    println!("weights {a:?}, monotone {monotone}, first order {first}");
}
