// The three claims on a two-level structure over the κ = 8 Cantor square.
use rieszlab::cantor::aligned_structure;
use rieszlab::measure::make_cantor_square;
use rieszlab::verify::{claim1_check, claim3_lower, gram_matrix, Claim3Pipeline, EstimateReport};

pub fn run_example() -> Vec<EstimateReport> {
    let sq = make_cantor_square(1.5, 3, 8.0, 1.0).unwrap();
    let st = aligned_structure(&sq, 2, 0.01, 6.0, 1e-6).unwrap();
    let mut out = vec![claim1_check(&st, 1.5).unwrap()];
    out.extend(gram_matrix(&st, 1.5).unwrap().claim2);
    out.push(claim3_lower(&st, 0, 1.5, &Claim3Pipeline::default()).unwrap().report);
    out
}

fn main() {
    for r in run_example() {
        println!("{}: lhs {:.4e} rhs {:.4e} pass {}", r.name, r.measured_lhs, r.bound_rhs, r.pass);
    }
}
