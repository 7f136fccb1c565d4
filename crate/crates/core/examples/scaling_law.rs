// Dilating an atomic measure by r multiplies its transform by r^{-s}.
use rieszlab::geometry::Point2;
use rieszlab::measure::make_cantor_square;
use rieszlab::riesz::transform_direct;

/// Largest relative deviation from the scaling identity over `r ∈ {0.5, 2}`.
pub fn run_example() -> f64 {
    let s = 1.5;
    let sq = make_cantor_square(s, 2, 2.0, 1.0).unwrap();
    let x = Point2::new(0.9, 0.4);
    let base = transform_direct(&sq.measure, s, &[x], None).unwrap()[0];
    let mut worst: f64 = 0.0;
    for r in [0.5, 2.0] {
        let moved: Vec<(Point2, f64)> = sq.atoms().iter().map(|a| (Point2::new(r * a.at.x, r * a.at.y), a.weight)).collect();
        let v = transform_direct(&rieszlab::Measure::atoms(&moved), s, &[Point2::new(r * x.x, r * x.y)], None).unwrap()[0];
        let k = r.powf(-s);
        worst = worst.max((v[0] - k * base[0]).hypot(v[1] - k * base[1]) / (k * base[0].hypot(base[1])));
    }
    worst
}

fn main() {
    println!("scaling identity deviation {:.2e}", run_example());
}
