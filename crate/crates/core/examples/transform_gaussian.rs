// Spectral transform of a Gaussian bump against the direct gridded sum on
// the inscribed disk.
use rieszlab::grid::{relative_l2, GridField, GridSpec};
use rieszlab::measure::Measure;
use rieszlab::riesz::{transform_direct, transform_fft};

/// `(s, relative L² discrepancy)` for three values of `s`.
pub fn run_example() -> Vec<(f64, f64)> {
    let spec = GridSpec::new(8.0, 128).unwrap();
    let f = GridField::from_fn(spec, |p| (-0.5 * p.norm_sq()).exp());
    let idx: Vec<usize> = (0..spec.len())
        .filter(|&k| spec.point_of(k).norm() <= 4.0 && (k % spec.n) % 2 == 0 && (k / spec.n) % 2 == 0)
        .collect();
    let pts: Vec<_> = idx.iter().map(|&k| spec.point_of(k)).collect();
    [1.2, 1.5, 1.8]
        .iter()
        .map(|&s| {
            let fft = transform_fft(&f, s).unwrap().field;
            let direct = transform_direct(&Measure::Gridded(f.clone()), s, &pts, None).unwrap();
            let a: Vec<f64> = idx.iter().flat_map(|&k| fft.vec_at(k)).collect();
            let b: Vec<f64> = direct.iter().flat_map(|v| *v).collect();
            (s, relative_l2(&a, &b))
        })
        .collect()
}

fn main() {
    for (s, e) in run_example() {
        println!("s = {s}: relative L2 {:.3}%", 100.0 * e);
    }
}
