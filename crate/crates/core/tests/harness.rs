use fracobs::harness::{to_json_string, CSV_COLUMNS};
use fracobs::solver::{complementarity_residual, gap_function};
use fracobs::{
    build_grid, catalog_problem, gagliardo_seminorm, lewy_stampacchia_residual, recover_quasi_characteristic,
    run_eps_sweep, run_s_sweep, solve_vi, DiscreteOperator, Format, FractionalParams, Report, SolverOptions,
    SweepOptions, SweepReport,
};

#[test]
fn single_row_sweep_matches_direct_calls() {
    let g = build_grid(-1.0, 1.0, 256).unwrap();
    let problem = catalog_problem("CAT-B", g).unwrap();
    let opts = SweepOptions::default();
    let rep = run_s_sweep(&problem, 2.0, &[0.8], 1.0, 0.5, &opts).unwrap();
    assert_eq!(rep.rows.len(), 1);
    assert!(rep.rate_fits.is_empty());

    let solve = |s: f64| {
        let op = DiscreteOperator::new(g, FractionalParams::new(s, 2.0).unwrap()).unwrap();
        solve_vi(&op, &problem, &opts.solver).unwrap()
    };
    let diff = solve(0.8).u.sub(&solve(1.0).u).unwrap();
    let row = &rep.rows[0];
    assert_eq!(row.sup_diff, diff.max_abs());
    let wr = gagliardo_seminorm(&g, 0.5, 2.0, &diff).unwrap().value;
    assert!((row.wr_diff - wr).abs() <= 1e-12 * wr, "{} vs {wr}", row.wr_diff);
}

#[test]
fn trivial_problem_gives_zero_rows() {
    let g = build_grid(-1.0, 1.0, 128).unwrap();
    let problem = catalog_problem("CAT-A", g).unwrap();
    let opts = SweepOptions::default();
    let s = run_s_sweep(&problem, 3.0, &[0.5, 0.7, 0.9], 1.0, 0.5, &opts).unwrap();
    let e = run_eps_sweep(
        &problem,
        FractionalParams::new(0.5, 3.0).unwrap(),
        &[1e-1, 1e-2, 1e-3],
        &opts,
    )
    .unwrap();
    for rep in [&s, &e] {
        assert!(rep.all_converged());
        assert!(rep.rate_fits.is_empty());
        for row in &rep.rows {
            for (name, v) in row.metrics() {
                assert_eq!(v, 0.0, "{name} at {}", row.param);
            }
        }
    }
}

#[test]
fn invalid_lists_are_rejected() {
    let g = build_grid(-1.0, 1.0, 32).unwrap();
    let problem = catalog_problem("CAT-B", g).unwrap();
    let opts = SweepOptions::default();
    let params = FractionalParams::new(0.5, 2.0).unwrap();
    assert!(run_eps_sweep(&problem, params, &[1e-2, 1e-1], &opts).is_err());
    assert!(run_eps_sweep(&problem, params, &[1e-1, 1e-1], &opts).is_err());
    assert!(run_eps_sweep(&problem, params, &[0.0], &opts).is_err());
    assert!(run_s_sweep(&problem, 2.0, &[0.5, 0.99], 1.0, 0.5, &opts).is_err());
    assert!(run_s_sweep(&problem, 2.0, &[0.7, 0.5], 1.0, 0.5, &opts).is_err());
    assert!(run_s_sweep(&problem, 2.0, &[0.5], 1.0, 1.0, &opts).is_err());
    assert!(run_s_sweep(&problem, 2.0, &[0.5], 1.2, 0.5, &opts).is_err());
}

#[test]
fn report_json_round_trips() {
    let g = build_grid(-1.0, 1.0, 128).unwrap();
    let problem = catalog_problem("CAT-B", g).unwrap();
    let rep = run_s_sweep(&problem, 2.0, &[0.6, 0.8, 0.9], 1.0, 0.5, &SweepOptions::default()).unwrap();
    let back: SweepReport = serde_json::from_str(&to_json_string(&rep).unwrap()).unwrap();
    assert_eq!(back, rep);
    let text = Report::Sweep(&rep).to_json().unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(value["rows"][0]["d_L"].is_number());

    let csv = Report::Sweep(&rep).to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(lines.count(), 3);
    assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
    assert!("yaml".parse::<Format>().is_err());
}

#[test]
fn local_limit_satisfies_all_checks() {
    let g = build_grid(-1.0, 1.0, 512).unwrap();
    let problem = catalog_problem("CAT-B", g).unwrap();
    let op = DiscreteOperator::new(g, FractionalParams::new(1.0, 2.0).unwrap()).unwrap();
    let sol = solve_vi(&op, &problem, &SolverOptions::default()).unwrap();
    assert!(sol.converged);
    let tol = sol.tol;
    assert!(lewy_stampacchia_residual(&op, &sol, &problem).unwrap() <= 10.0 * tol);
    assert!(complementarity_residual(&op, &sol.u, &problem).unwrap() <= 10.0 * tol);
    let q = recover_quasi_characteristic(&sol, &problem, 1e-12).unwrap();
    let gap = gap_function(&sol.u, &problem.psi).unwrap();
    for i in g.interior() {
        if !q.valid_mask[i] {
            continue;
        }
        let t = q.theta.values()[i];
        assert!((-1e3 * tol..=1.0 + 1e3 * tol).contains(&t), "node {i}: {t}");
        if gap.values()[i] > sol.tol_u {
            assert!(t >= 1.0 - 1e3 * tol);
        }
    }
}

#[test]
fn holder_column_stays_near_the_limit() {
    let g = build_grid(-1.0, 1.0, 512).unwrap();
    let problem = catalog_problem("CAT-B", g).unwrap();
    let rep = run_s_sweep(
        &problem,
        2.0,
        &[0.6, 0.7, 0.8, 0.9, 0.95],
        1.0,
        0.5,
        &SweepOptions::default(),
    )
    .unwrap();
    let h = rep.column("holder_beta");
    assert_eq!(h.len(), 5);
    let last = h[4];
    for v in &h {
        assert!(*v <= 2.0 * last && *v >= 0.5 * last, "{h:?}");
    }
    // differences shrink toward the limit
    let wr = rep.column("wr_diff");
    assert!(wr.windows(2).all(|w| w[1] < w[0]), "{wr:?}");
    assert!(rep.rate_fits["wr_diff"].slope > 0.0);
}
