use proptest::prelude::*;
use rieszlab::cantor::energy_table;
use rieszlab::oracle::refine_check;
use rieszlab::riesz::kernel;
use rieszlab::verify::holder_check;
use rieszlab::{Measure, Point2};

fn point() -> impl Strategy<Value = Point2> {
    (-10.0f64..10.0, -10.0f64..10.0)
        .prop_filter("away from the origin", |(x, y)| x.hypot(*y) > 1e-3)
        .prop_map(|(x, y)| Point2::new(x, y))
}

proptest! {
    #[test]
    fn kernel_is_odd(s in 1.01f64..1.99, p in point()) {
        let a = kernel(s, p).unwrap();
        let b = kernel(s, -p).unwrap();
        prop_assert!((a[0] + b[0]).abs() <= 1e-12 * a[0].abs().max(1e-300));
        prop_assert!((a[1] + b[1]).abs() <= 1e-12 * a[1].abs().max(1e-300));
    }

    #[test]
    fn kernel_is_homogeneous(s in 1.01f64..1.99, p in point(), r in 0.1f64..10.0) {
        let a = kernel(s, p).unwrap();
        let b = kernel(s, p * r).unwrap();
        let k = r.powf(-s);
        prop_assert!((b[0] - k * a[0]).abs() <= 1e-10 * (a[0].abs() + a[1].abs()) * k);
        prop_assert!((b[1] - k * a[1]).abs() <= 1e-10 * (a[0].abs() + a[1].abs()) * k);
    }

    #[test]
    fn holder_never_inverts(pairs in prop::collection::vec((0.01f64..10.0, 0.01f64..10.0), 1..20)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let (l, r) = holder_check(&a, &b).unwrap();
        prop_assert!(l >= r * (1.0 - 1e-12));
    }

    #[test]
    fn holder_equality_for_proportional(b in prop::collection::vec(0.01f64..10.0, 1..20), c in 0.1f64..10.0) {
        let a: Vec<f64> = b.iter().map(|x| c * x).collect();
        let (l, r) = holder_check(&a, &b).unwrap();
        prop_assert!((l - r).abs() <= 1e-10 * r);
    }

    #[test]
    fn refine_check_ratio_is_relative(oracle in 0.1f64..10.0, rel in 0.0f64..0.5, tol in 1e-6f64..0.1) {
        let (pass, ratio) = refine_check(oracle * (1.0 + rel), oracle, tol);
        prop_assert!((ratio * tol - rel).abs() <= 1e-9);
        prop_assert_eq!(pass, ratio <= 1.0);
    }

    #[test]
    fn energy_rows_sum_leading_blocks(vals in prop::collection::vec(-1.0f64..1.0, 16), diag in prop::collection::vec(1.0f64..5.0, 4)) {
        let mut g = vec![vec![0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                g[i][j] = if i == j { diag[i] } else { vals[4 * i.min(j) + i.max(j)] };
            }
        }
        let rows = energy_table(&g);
        prop_assert_eq!(rows.len(), 4);
        for (k, row) in rows.iter().enumerate() {
            let n = k + 1;
            let sum: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| g[i][j]).sum();
            prop_assert_eq!(row.levels, n);
            prop_assert!((row.energy - sum).abs() <= 1e-12 * sum.abs().max(1.0));
        }
    }

    #[test]
    fn measure_json_round_trip(atoms in prop::collection::vec((point(), 0.0f64..5.0), 1..12)) {
        let m = Measure::atoms(&atoms);
        let back = Measure::from_json(&m.to_json()).unwrap();
        prop_assert!((back.total_mass() - m.total_mass()).abs() <= 1e-12 * m.total_mass().max(1.0));
    }
}
