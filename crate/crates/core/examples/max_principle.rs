// Seeded smooth fields: the global maximum of R*η is attained near the
// support of η.
use rieszlab::grid::GridSpec;
use rieszlab::verify::{max_principle_check, max_principle_v_check, random_smooth_field};

/// Number of failed cases out of the returned total.
pub fn run_example() -> (usize, usize) {
    let spec = GridSpec::new(1.0, 128).unwrap();
    let mut failed = 0;
    let mut total = 0;
    for seed in 0..4u64 {
        for s in [1.25, 1.75] {
            let eta = random_smooth_field(seed, spec, 2, false);
            failed += usize::from(!max_principle_check(&eta, s).unwrap().pass);
            total += 1;
        }
        let nu = random_smooth_field(100 + seed, spec, 1, true);
        let g = random_smooth_field(200 + seed, spec, 2, false);
        failed += usize::from(!max_principle_v_check(&nu, &g, 1.5).unwrap().pass);
        total += 1;
    }
    (failed, total)
}

fn main() {
    let (failed, total) = run_example();
    println!("{failed} of {total} cases failed");
}
