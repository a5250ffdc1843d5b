use hessrad::solution::*;
use hessrad::*;

fn operators() -> Vec<OperatorSpec> {
    vec![
        OperatorSpec::sigma_k(3, 2).unwrap(),
        OperatorSpec::sigma_k(5, 3).unwrap(),
        OperatorSpec::monge_ampere(4).unwrap(),
        OperatorSpec::hessian_quotient(4, 3, 1).unwrap(),
        OperatorSpec::hessian_quotient(5, 4, 2).unwrap(),
    ]
}

fn solve(op: OperatorSpec, x: f64, b: f64) -> (GProfile, RadialSolution) {
    let p = GProfile::build(op, 32).unwrap();
    let alpha = x * p.c_star();
    let sol = assemble_solution(
        &p,
        alpha,
        b,
        DEFAULT_R_OUT,
        DEFAULT_POINTS,
        &Tolerances::default(),
    )
    .unwrap();
    (p, sol)
}

#[test]
fn boundary_value_is_exact() {
    for b in [0.0, 1.5, -3.0] {
        let (_, sol) = solve(OperatorSpec::sigma_k(3, 2).unwrap(), 2.0, b);
        assert_eq!(sol.u[0], b);
        assert_eq!(sol.grid[0], 1.0);
        assert_eq!(*sol.grid.last().unwrap(), DEFAULT_R_OUT);
    }
}

#[test]
fn finite_differences_match_derivatives() {
    for op in operators() {
        let (_, sol) = solve(op, 2.0, 0.0);
        let m = sol.grid.len();
        // the grid is uniform in t = ln r, where df/dt = r f′
        let dt = sol.grid[1].ln();
        let d = |v: &[f64], i: usize| {
            (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * dt) / sol.grid[i]
        };
        for i in 2..m - 2 {
            let r = sol.grid[i];
            let (du, dup) = (d(&sol.u, i), d(&sol.uprime, i));
            assert!(
                (du - sol.uprime[i]).abs() <= 1e-4 * sol.uprime[i].abs(),
                "{op} r={r}"
            );
            assert!(
                (dup - sol.usecond[i]).abs() <= 1e-4 * sol.usecond[i].abs().max(1e-3),
                "{op} r={r}: {dup} vs {}",
                sol.usecond[i]
            );
        }
    }
}

#[test]
fn admissible_everywhere() {
    for op in operators() {
        for x in [1.0, 2.0, 5.0] {
            let (p, sol) = solve(op, x, 0.0);
            for i in 0..sol.grid.len() {
                let gamma = sol.uprime[i] / sol.grid[i];
                assert!(gamma > p.gamma0());
                assert!(op.in_cone_ray(RayPoint::new(sol.usecond[i], gamma)));
            }
            assert_eq!(residual_report(&sol).cone_violations, 0);
        }
    }
}

#[test]
fn quadratic_leading_term() {
    for op in operators() {
        let (_, sol) = solve(op, 3.0, 2.0);
        let r = *sol.grid.last().unwrap();
        let lead = (sol.u.last().unwrap() - sol.b) / (r * r);
        assert!(
            (lead - 0.5 * sol.c_star).abs() < 1e-3 * sol.c_star,
            "{op}: {lead}"
        );
    }
}

#[test]
fn residual_and_expansion() {
    let tol = Tolerances::default();
    for op in operators() {
        for x in [1.0, 2.0] {
            let (_, sol) = solve(op, x, 0.0);
            let rep = residual_report(&sol);
            assert!(
                rep.max_residual < 100.0 * tol.ode_tol,
                "{op}: {}",
                rep.max_residual
            );
            if let Some(slope) = rep.decay_slope {
                assert!((slope + (op.n() as f64 - 2.0)).abs() < 0.1, "{op}: {slope}");
            } else {
                assert_eq!(x, 1.0);
            }
            assert!(
                (rep.c_estimate - sol.c).abs() < 1e-5,
                "{op}: {} vs {}",
                rep.c_estimate,
                sol.c
            );
        }
    }
}

#[test]
fn remainder_matches_definition() {
    let (_, sol) = solve(OperatorSpec::sigma_k(4, 2).unwrap(), 2.5, 1.0);
    for i in (0..sol.grid.len()).step_by(37) {
        let r = sol.grid[i];
        let direct = sol.u[i] - (0.5 * sol.c_star * r * r + sol.c);
        assert!(
            (direct - sol.remainder[i]).abs() < 1e-8 * (1.0 + r * r * sol.c_star),
            "r={r}"
        );
    }
}

#[test]
fn rejects_bad_inputs() {
    let p = GProfile::build(OperatorSpec::hessian_quotient(4, 3, 1).unwrap(), 32).unwrap();
    let tol = Tolerances::default();
    let below = assemble_solution(&p, 0.5 * p.gamma0(), 0.0, 1e3, 64, &tol).unwrap_err();
    assert!(matches!(below, Error::Admissibility { .. }));
    for (r_out, points) in [(5.0, 64), (1e3, 1), (f64::NAN, 64)] {
        let err = assemble_solution(&p, 1.0, 0.0, r_out, points, &tol).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }
}

#[test]
fn csv_round_trip() {
    let (_, sol) = solve(OperatorSpec::sigma_k(3, 3).unwrap(), 1.7, 0.25);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    export_solution(&sol, &path, Format::Csv).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,u,uprime,usecond,residual"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), sol.grid.len());
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(
            row,
            &vec![
                sol.grid[i],
                sol.u[i],
                sol.uprime[i],
                sol.usecond[i],
                sol.residual[i]
            ]
        );
    }
}

#[test]
fn json_has_the_documented_keys() {
    let (_, sol) = solve(OperatorSpec::hessian_quotient(5, 4, 2).unwrap(), 2.0, 0.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.json");
    export_solution(&sol, &path, Format::Json).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        [
            "family", "n", "k", "l", "alpha", "b", "c", "c_star", "gamma0", "r", "u", "uprime",
            "usecond", "residual"
        ]
    );
    assert_eq!(v["family"], "hessian-quotient");
    assert_eq!(v["u"].as_array().unwrap().len(), DEFAULT_POINTS);
    assert_eq!(v["c"].as_f64().unwrap(), sol.c);
}

#[test]
fn export_to_missing_directory_is_io_error() {
    let (_, sol) = solve(OperatorSpec::sigma_k(3, 2).unwrap(), 2.0, 0.0);
    let err = export_solution(
        &sol,
        std::path::Path::new("/nonexistent/dir/u.csv"),
        Format::Csv,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Io(_)));
    assert!(!err.is_numerical());
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

    #[test]
    fn log_grid_is_increasing(r_out in 10.0f64..1e6, points in 2usize..2000) {
        let g = log_grid(r_out, points);
        proptest::prop_assert_eq!(g.len(), points);
        proptest::prop_assert_eq!(g[0], 1.0);
        proptest::prop_assert_eq!(*g.last().unwrap(), r_out);
        proptest::prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn constant_shift_in_b(b in -5.0f64..5.0) {
        let (_, base) = solve(OperatorSpec::sigma_k(3, 2).unwrap(), 1.5, 0.0);
        let (_, shifted) = solve(OperatorSpec::sigma_k(3, 2).unwrap(), 1.5, b);
        for i in (0..base.grid.len()).step_by(64) {
            proptest::prop_assert!((shifted.u[i] - base.u[i] - b).abs() < 1e-9 * base.u[i].abs().max(1.0));
        }
        proptest::prop_assert!((shifted.c - base.c - b).abs() < 1e-12 * b.abs().max(1.0));
    }
}
