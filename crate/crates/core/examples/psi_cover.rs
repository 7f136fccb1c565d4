// Top cover of a Cantor square, the Ψ functions built on it and the lower
// bound for ∫|Rν|Ψ over seeded admissible ν.
use rieszlab::grid::GridSpec;
use rieszlab::measure::{make_cantor_square, Measure};
use rieszlab::profiles::build_standard_cap;
use rieszlab::topcover::{admissible_corpus, build_psi_bundle, build_top_cover, check_psi_lower, PsiBundle};

/// `(Σ μ(T̃_j), ∫Ψ_A for each A, passing corpus cases, corpus size)`.
pub fn run_example() -> (f64, Vec<f64>, usize, usize) {
    let sq = make_cantor_square(1.5, 3, 1.0, 1.0).unwrap();
    let mu = Measure::Atomic(sq.atoms().to_vec());
    let cover = build_top_cover(&mu, 1.5, 0.1, 100.0, 0.01).unwrap();
    let cap = build_standard_cap(1.5, GridSpec::new(16.0, 128).unwrap()).unwrap();
    let spec = PsiBundle::fitting_grid(&cover, 4.0, 256).unwrap();
    let bundle = build_psi_bundle(&cover, &cap, spec, 4.0).unwrap();
    let tilde = cover.disks.iter().map(|d| d.tilde_mass).sum();
    let integrals = bundle.psi_a.iter().map(|(_, f)| f.integral(0)).collect();
    let corpus = admissible_corpus(&mu, &cover, 0, 3);
    let pass = corpus.iter().filter(|nu| check_psi_lower(nu, &cover, &bundle).unwrap().pass).count();
    (tilde, integrals, pass, corpus.len())
}

fn main() {
    let (tilde, integrals, pass, n) = run_example();
    println!("sum of tilde masses {tilde:.6}, integrals {integrals:?}, psi lower bound {pass}/{n}");
}
