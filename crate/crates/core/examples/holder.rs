// Σ a⁵/b⁴ ≥ (Σa)⁵/(Σb)⁴ on seeded positive vectors, with equality for
// proportional vectors.
use rand::{Rng, SeedableRng};
use rieszlab::verify::holder_check;

/// `(violations, relative gap for a proportional pair)`.
pub fn run_example() -> (usize, f64) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=20);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let (l, r) = holder_check(&a, &b).unwrap();
        violations += usize::from(l < r * (1.0 - 1e-12));
    }
    let a = [1.0, 2.0, 3.0];
    let b = [0.5, 1.0, 1.5];
    let (l, r) = holder_check(&a, &b).unwrap();
    (violations, (l - r).abs() / r)
}

fn main() {
    let (violations, gap) = run_example();
    println!("{violations} violations, proportional gap {gap:.1e}");
}
