// Bottom cover of a sparse atomic measure: Besicovitch-selected disks and
// their carved cells. Atoms must be light, μ(D(x, Mt)) ≤ δt^s needs a
// radius t at which the atom itself is negligible.
use rieszlab::cantor::{build_bottom_cover, BottomCover};
use rieszlab::measure::make_cantor_square;
use rieszlab::params::ConstructionParams;

pub fn run_example() -> BottomCover {
    let sq = make_cantor_square(1.5, 3, 8.0, 1e-9).unwrap();
    let p = ConstructionParams {
        s: 1.5,
        levels: 1,
        epsilon: 0.01,
        big_m: 6.0,
        delta: 1e-6,
        m: 0.5,
        budget: 1.0,
        r_star: 0.01,
        rho_star: 0.5,
        loss_constant: 10.0,
    };
    build_bottom_cover(&sq.measure, &p)
}

fn main() {
    let c = run_example();
    println!(
        "{} cells, covering number {}, exceptional mass {:.3e}, bad points {}",
        c.cells.len(),
        c.covering_number,
        c.exceptional_mass,
        c.bad_points
    );
}
