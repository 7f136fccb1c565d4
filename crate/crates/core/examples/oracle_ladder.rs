// The brute-force ladder for a Gaussian density against the fast direct sum.
use rieszlab::geometry::Point2;
use rieszlab::grid::{GridField, GridSpec};
use rieszlab::measure::Measure;
use rieszlab::oracle::{gaussian, quad_transform, refine_check, OracleInput, QuadratureSpec};
use rieszlab::riesz::transform_direct;

/// `(oracle value, oracle error, fast value, agrees within 1%)`.
pub fn run_example() -> (f64, f64, f64, bool) {
    let x = Point2::new(1.0, 0.0);
    let o = quad_transform(&OracleInput::Density(&gaussian), 1.5, x, &QuadratureSpec::ladder(0.25, 5, 7.0)).unwrap();
    let f = GridField::from_fn(GridSpec::new(8.0, 256).unwrap(), gaussian);
    let fast = transform_direct(&Measure::Gridded(f), 1.5, &[x], None).unwrap()[0][0];
    (o.value[0], o.error, fast, refine_check(fast, o.value[0], 0.01).0)
}

fn main() {
    let (v, e, fast, ok) = run_example();
    println!("oracle {v:.8} ± {e:.1e}, fast {fast:.8}, agree {ok}");
}
