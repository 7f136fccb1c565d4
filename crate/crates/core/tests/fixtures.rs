// Fast paths against the frozen oracle values in tests/fixtures/derived.json.

use rieszlab::cantor::{aligned_structure, gram_from_partials};
use rieszlab::geometry::Point2;
use rieszlab::grid::{GridField, GridSpec};
use rieszlab::measure::{make_cantor_square, Measure};
use rieszlab::oracle::{fixtures_from_json, gaussian, oracle_version, refine_check, Fixture};
use rieszlab::riesz::transform_direct;
use rieszlab::special::riesz_constant;
use rieszlab::verify::gram_matrix;

fn load() -> Vec<Fixture> {
    fixtures_from_json(include_str!("fixtures/derived.json")).unwrap()
}

fn f64s(v: &serde_json::Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn fixtures_carry_the_current_oracle_version() {
    let all = load();
    assert!(!all.is_empty());
    for f in &all {
        assert_eq!(f.oracle_version, oracle_version(), "{}", f.op);
    }
}

#[test]
fn gridded_direct_transform_matches_gaussian_fixtures() {
    let f = GridField::from_fn(GridSpec::new(8.0, 256).unwrap(), gaussian);
    let mu = Measure::Gridded(f);
    let mut seen = 0;
    for fx in load().iter().filter(|f| f.op == "transform_gaussian") {
        let s = fx.inputs["s"].as_f64().unwrap();
        let x = f64s(&fx.inputs["x"]);
        let want = f64s(&fx.value);
        let got = transform_direct(&mu, s, &[Point2::new(x[0], x[1])], None).unwrap()[0];
        let (ok, ratio) = refine_check(got[0].hypot(got[1]), want[0].hypot(want[1]), 0.01);
        assert!(ok, "s = {s}, x = {x:?}: ratio {ratio}");
        let angle = (got[0] * want[1] - got[1] * want[0]).abs() / (got[0].hypot(got[1]) * want[0].hypot(want[1]));
        assert!(angle < 1e-3, "{angle}");
        seen += 1;
    }
    assert_eq!(seen, 9);
}

#[test]
fn structure_gram_matches_pair_sums() {
    let mut seen = 0;
    for fx in load().iter().filter(|f| f.op == "cantor_gram") {
        let g = fx.inputs["g"].as_u64().unwrap() as usize;
        let kappa = fx.inputs["kappa"].as_f64().unwrap();
        let want: Vec<Vec<f64>> = fx.value.as_array().unwrap().iter().map(f64s).collect();
        let sq = make_cantor_square(1.5, g, kappa, 1.0).unwrap();
        let st = aligned_structure(&sq, g, 0.01, 6.0, 1e-6).unwrap();
        let a = gram_from_partials(&st, &st.partial_potentials().unwrap());
        let b = gram_matrix(&st, 1.5).unwrap().matrix;
        for i in 0..g {
            for k in 0..g {
                let tol = 1e-10 * want[i][i].min(want[k][k]);
                assert!((a[i][k] - want[i][k]).abs() <= tol, "kappa {kappa} ({i},{k})");
                assert!((b[i][k] - want[i][k]).abs() <= tol, "kappa {kappa} ({i},{k})");
            }
        }
        seen += 1;
    }
    assert_eq!(seen, 2);
}

#[test]
fn riesz_constant_matches_tabulated_gamma() {
    for fx in load().iter().filter(|f| f.op == "riesz_constant") {
        let alpha = fx.inputs["alpha"].as_f64().unwrap();
        let want = fx.value.as_f64().unwrap();
        let got = riesz_constant(2, alpha).unwrap();
        assert!((got - want).abs() <= 1e-12 * want, "alpha {alpha}: {got} vs {want}");
    }
}
