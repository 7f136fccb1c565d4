// The standard cap: R*(ψ∘ m₂) reproduces φ∘ on the unit disk and ψ∘ decays
// like |x|^{s-4}.
use rieszlab::grid::GridSpec;
use rieszlab::profiles::{build_standard_cap, cap_identity_error};

/// `(identity error on the unit disk, tail slope on [4, 16])`.
pub fn run_example() -> (f64, f64) {
    let cap = build_standard_cap(1.5, GridSpec::new(16.0, 256).unwrap()).unwrap();
    (cap_identity_error(&cap).unwrap(), cap.tail_slope(4.0, 16.0))
}

fn main() {
    let (e, slope) = run_example();
    println!("identity error {:.3}%, tail slope {slope:.3}", 100.0 * e);
}
