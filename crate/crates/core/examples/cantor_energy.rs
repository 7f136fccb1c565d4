// Energy of the partial potentials of Cantor squares: the balanced square
// grows linearly in the number of levels, the sparse one by κ^{s} per level.
use rieszlab::cantor::{aligned_structure, energy_table, gram_from_partials, EnergyRow};
use rieszlab::measure::make_cantor_square;

pub fn table(kappa: f64, g: usize) -> Vec<EnergyRow> {
    let sq = make_cantor_square(1.5, g, kappa, 1.0).unwrap();
    let st = aligned_structure(&sq, g, 0.01, 6.0, 1e-6).unwrap();
    energy_table(&gram_from_partials(&st, &st.partial_potentials().unwrap()))
}

/// Energy tables for κ = 1 and κ = 8 at four generations.
pub fn run_example() -> (Vec<EnergyRow>, Vec<EnergyRow>) {
    (table(1.0, 4), table(8.0, 4))
}

fn main() {
    let (balanced, sparse) = run_example();
    for (name, rows) in [("kappa 1", balanced), ("kappa 8", sparse)] {
        println!("{name}");
        for r in rows {
            println!("  N = {}: energy/N {:.4e}, max off-diagonal ratio {:.3}", r.levels, r.energy_per_level, r.max_off_ratio);
        }
    }
}
