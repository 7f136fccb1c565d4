// Every cargo example, compiled into this test binary and checked.

#[allow(dead_code)]
mod transform_gaussian {
    include!("../examples/transform_gaussian.rs");

    #[test]
    fn within_two_percent() {
        for (s, e) in run_example() {
            assert!(e <= 0.02, "s = {s}: {e}");
        }
    }
}

#[allow(dead_code)]
mod scaling_law {
    include!("../examples/scaling_law.rs");

    #[test]
    fn identity_holds() {
        assert!(run_example() <= 1e-10);
    }
}

#[allow(dead_code)]
mod standard_cap {
    include!("../examples/standard_cap.rs");

    #[test]
    fn identity_and_decay() {
        let (e, slope) = run_example();
        assert!(e <= 0.01, "{e}");
        assert!((slope + 2.5).abs() <= 0.3, "{slope}");
    }
}

#[allow(dead_code)]
mod reproduction {
    include!("../examples/reproduction.rs");

    #[test]
    fn both_paths_recover_the_density() {
        let (a, b, gap) = run_example();
        assert!(a <= 0.02 && b <= 0.02, "{a} {b}");
        assert!(gap <= 0.01, "{gap}");
    }
}

#[allow(dead_code)]
mod max_principle {
    include!("../examples/max_principle.rs");

    #[test]
    fn no_failures() {
        assert_eq!(run_example().0, 0);
    }
}

#[allow(dead_code)]
mod cantor_energy {
    include!("../examples/cantor_energy.rs");

    #[test]
    fn balanced_is_linear_sparse_is_not() {
        let (balanced, sparse) = run_example();
        let per: Vec<f64> = balanced.iter().map(|r| r.energy_per_level).collect();
        let (lo, hi) = per.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(hi / lo <= 1.25, "{per:?}");
        assert!(sparse[3].energy_per_level / sparse[1].energy_per_level > 1e3);
    }
}

#[allow(dead_code)]
mod claims_toy {
    include!("../examples/claims_toy.rs");

    #[test]
    fn all_pass() {
        let r = run_example();
        assert_eq!(r.len(), 3);
        for x in r {
            assert!(x.pass, "{x:?}");
        }
    }
}

#[allow(dead_code)]
mod psi_cover {
    include!("../examples/psi_cover.rs");

    #[test]
    fn integrals_match_tilde_masses() {
        let (tilde, integrals, pass, n) = run_example();
        for i in integrals {
            assert!((i - tilde).abs() <= 1e-6 * tilde, "{i} {tilde}");
        }
        assert_eq!(pass, n);
    }
}

#[allow(dead_code)]
mod equilibrium_caps {
    include!("../examples/equilibrium_caps.rs");

    #[test]
    fn symmetric_weights() {
        let (a, monotone, first) = run_example();
        assert!((a[0] - 1.0).abs() <= 1e-3 && (a[1] - 1.0).abs() <= 1e-3, "{a:?}");
        assert!(monotone && first);
    }
}

#[allow(dead_code)]
mod profile_inequalities {
    include!("../examples/profile_inequalities.rs");

    #[test]
    fn clean_sweep() {
        let (violations, dual) = run_example();
        assert_eq!(violations, 0);
        assert!(dual <= 1e-6);
    }
}

#[allow(dead_code)]
mod holder {
    include!("../examples/holder.rs");

    #[test]
    fn never_violated() {
        let (violations, gap) = run_example();
        assert_eq!(violations, 0);
        assert!(gap <= 1e-12);
    }
}

#[allow(dead_code)]
mod oracle_ladder {
    include!("../examples/oracle_ladder.rs");

    #[test]
    fn fast_path_agrees() {
        let (v, e, _, ok) = run_example();
        assert!(e <= 1e-6 * v.abs());
        assert!(ok);
    }
}

#[allow(dead_code)]
mod bottom_cover {
    include!("../examples/bottom_cover.rs");

    #[test]
    fn cells_are_found() {
        let c = run_example();
        assert!(!c.cells.is_empty());
        assert_eq!(c.bad_points, 0);
        assert!(c.covering_number >= 1);
    }
}

#[allow(dead_code)]
mod run_config {
    include!("../examples/run_config.rs");

    #[test]
    fn writes_claim_artifacts() {
        let (files, pass) = run_example();
        assert_eq!(files, ["claims.csv", "claims.json", "structure.json"]);
        assert!(pass);
    }
}

#[allow(dead_code)]
mod freeze_fixtures {
    include!("../examples/freeze_fixtures.rs");

    #[test]
    fn committed_fixtures_are_current() {
        let committed = rieszlab::oracle::fixtures_from_json(include_str!("fixtures/derived.json")).unwrap();
        let fresh = run_example();
        assert_eq!(fresh.len(), committed.len());
        for (a, b) in fresh.iter().zip(&committed) {
            assert_eq!((&a.op, &a.inputs, &a.oracle_version), (&b.op, &b.inputs, &b.oracle_version));
            assert!(close(&a.value, &b.value), "{}: {} vs {}", a.op, a.value, b.value);
        }
    }

    // JSON floats round-trip to within an ulp or two
    fn close(a: &serde_json::Value, b: &serde_json::Value) -> bool {
        use serde_json::Value;
        match (a, b) {
            (Value::Number(x), Value::Number(y)) => {
                let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300)
            }
            (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| close(p, q)),
            _ => a == b,
        }
    }
}
