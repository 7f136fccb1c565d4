// Regenerates tests/fixtures/derived.json from the brute-force oracles.
// Run with `cargo run --release --example freeze_fixtures`.
use rieszlab::geometry::Point2;
use rieszlab::measure::make_cantor_square;
use rieszlab::oracle::{cantor_gram_pairs, gaussian, oracle_version, quad_transform, Fixture, OracleInput, QuadratureSpec};
use serde_json::json;

pub fn run_example() -> Vec<Fixture> {
    let version = oracle_version();
    let mut out = Vec::new();
    for s in [1.2, 1.5, 1.8] {
        for x in [Point2::new(1.0, 0.0), Point2::new(0.5, 0.5), Point2::new(2.0, -1.0)] {
            let spec = QuadratureSpec::ladder(0.25, 5, 7.0);
            let v = quad_transform(&OracleInput::Density(&gaussian), s, x, &spec).unwrap();
            out.push(Fixture {
                op: "transform_gaussian".into(),
                inputs: json!({ "s": s, "x": [x.x, x.y], "spacings": spec.spacings, "support": spec.support }),
                value: json!(v.value),
                error: v.error,
                oracle_version: version.clone(),
            });
        }
    }
    for (kappa, g) in [(8.0, 4usize), (1.0, 4)] {
        let sq = make_cantor_square(1.5, g, kappa, 1.0).unwrap();
        let m = cantor_gram_pairs(sq.atoms(), g, g, 1.5);
        out.push(Fixture {
            op: "cantor_gram".into(),
            inputs: json!({ "s": 1.5, "g": g, "kappa": kappa, "mass": 1.0 }),
            value: json!(m),
            error: 0.0,
            oracle_version: version.clone(),
        });
    }
    // A(2, α) = π^{α−1} Γ((2−α)/2) / Γ(α/2) from tabulated Γ(1/4), Γ(3/4)
    let (g14, g34) = (3.625_609_908_221_908_3, 1.225_416_702_465_177_6);
    for (alpha, v) in [(1.5, std::f64::consts::PI.sqrt() * g14 / g34), (0.5, g34 / (std::f64::consts::PI.sqrt() * g14))] {
        out.push(Fixture {
            op: "riesz_constant".into(),
            inputs: json!({ "d": 2, "alpha": alpha }),
            value: json!(v),
            error: 1e-15 * v,
            oracle_version: version.clone(),
        });
    }
    out
}

fn main() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/derived.json");
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(&path, rieszlab::oracle::fixtures_to_json(&run_example()) + "\n").unwrap();
    println!("wrote {}", path.display());
}
