use fracobs::solver::{complementarity_residual, solve_penalized, PenaltyFn, SemilinearTerm, SolverMethod};
use fracobs::{
    build_grid, catalog_problem, gagliardo_seminorm, solve_semilinear, solve_vi, DiscreteOperator, FractionalParams,
    Grid, GridFunction, SolverOptions,
};

fn op(n: usize, s: f64, p: f64) -> DiscreteOperator {
    DiscreteOperator::new(build_grid(-1.0, 1.0, n).unwrap(), FractionalParams::new(s, p).unwrap()).unwrap()
}

#[test]
fn cat_b_local_positivity_set_is_one_interval() {
    let op = op(1024, 1.0, 2.0);
    let problem = catalog_problem("CAT-B", *op.grid()).unwrap();
    let sol = solve_vi(&op, &problem, &SolverOptions::default()).unwrap();
    assert!(sol.converged);
    let fb = &sol.free_boundary;
    assert_eq!(fb.len(), 2);
    assert!(fb[1] > 0.5 && fb[1] < 1.0 && (fb[0] + fb[1]).abs() < 1e-12, "{fb:?}");
    let g = op.grid();
    for i in g.interior() {
        let inside = g.node(i).abs() < fb[1] - 2.0 * g.h();
        if inside {
            assert!(sol.u.values()[i] > sol.tol_u);
        }
    }
}

#[test]
fn different_starting_points_agree() {
    let op = op(256, 0.6, 3.0);
    let problem = catalog_problem("CAT-D", *op.grid()).unwrap();
    let tol = 1e-8;
    let cold = solve_vi(&op, &problem, &SolverOptions::with_tol(tol)).unwrap();
    let start = GridFunction::from_interior_fn(*op.grid(), |x| (0.1 - x * x).max(0.0) + 1.0);
    let warm = solve_vi(
        &op,
        &problem,
        &SolverOptions {
            initial: Some(start),
            ..SolverOptions::with_tol(tol)
        },
    )
    .unwrap();
    assert!(cold.converged && warm.converged);
    assert!(cold.u.sub(&warm.u).unwrap().max_abs() <= 10.0 * tol);
}

#[test]
fn solves_are_deterministic() {
    let op = op(128, 0.5, 1.5);
    let problem = catalog_problem("CAT-C", *op.grid()).unwrap();
    let a = solve_vi(&op, &problem, &SolverOptions::default()).unwrap();
    let b = solve_vi(&op, &problem, &SolverOptions::default()).unwrap();
    assert_eq!(a.u.values(), b.u.values());
    assert_eq!(a.residual.to_bits(), b.residual.to_bits());
}

#[test]
fn sweep_limit_is_reported_not_raised() {
    let op = op(64, 0.5, 2.0);
    let problem = catalog_problem("CAT-B", *op.grid()).unwrap();
    let opts = SolverOptions {
        method: SolverMethod::GaussSeidel,
        max_sweeps: 2,
        ..SolverOptions::default()
    };
    let sol = solve_vi(&op, &problem, &opts).unwrap();
    assert!(!sol.converged);
    assert!(sol.residual > opts.tol);
    assert_eq!(sol.sweeps, 2);
}

#[test]
fn residual_examples() {
    let op = op(64, 0.5, 2.0);
    let g = *op.grid();
    let zero = GridFunction::zeros(g);
    let a = catalog_problem("CAT-A", g).unwrap();
    assert_eq!(complementarity_residual(&op, &zero, &a).unwrap(), 0.0);
    let b = catalog_problem("CAT-B", g).unwrap();
    assert_eq!(complementarity_residual(&op, &zero, &b).unwrap(), 2.0);
}

#[test]
fn penalized_solution_is_admissible_and_converges() {
    let op = op(512, 0.5, 3.0);
    let problem = catalog_problem("CAT-B", *op.grid()).unwrap();
    let tol = SolverOptions::default().tol;
    let exact = solve_vi(&op, &problem, &SolverOptions::default()).unwrap();
    let mut last = f64::INFINITY;
    let mut last_neg = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let pen = PenaltyFn::ramp(eps).unwrap();
        let sol = solve_penalized(&op, &problem, &pen, &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        let min = sol.u.values().iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min >= -tol, "eps = {eps}: min {min}");
        let neg = (-min).max(0.0);
        assert!(neg <= last_neg + tol);
        last_neg = neg;
        let d = gagliardo_seminorm(op.grid(), 0.5, 3.0, &sol.u.sub(&exact.u).unwrap())
            .unwrap()
            .value;
        assert!(d < last, "eps = {eps}: {d} >= {last}");
        last = d;
    }
}

#[test]
fn nonzero_obstacle_penalization() {
    let op = op(256, 0.5, 2.0);
    let problem = catalog_problem("CAT-D", *op.grid()).unwrap();
    let exact = solve_vi(&op, &problem, &SolverOptions::default()).unwrap();
    let mut prev = f64::INFINITY;
    for eps in [1e-2, 1e-3, 1e-4] {
        let sol = solve_penalized(&op, &problem, &PenaltyFn::ramp(eps).unwrap(), &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        let d = sol.u.sub(&exact.u).unwrap().max_abs();
        assert!(d < prev);
        prev = d;
    }
    assert!(prev < 1e-2);
}

fn constant(g: Grid, c: f64) -> GridFunction {
    GridFunction::from_interior_fn(g, |_| c)
}

#[test]
fn semilinear_zero_data() {
    let op = op(64, 0.5, 3.0);
    let g = *op.grid();
    for term in [SemilinearTerm::None, SemilinearTerm::LinearDecay { c: 2.0 }] {
        let sol = solve_semilinear(&op, &GridFunction::zeros(g), &term, &SolverOptions::default()).unwrap();
        assert!(sol.u.values().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn semilinear_comparison() {
    let op = op(256, 0.5, 2.0);
    let g = *op.grid();
    let one = constant(g, 1.0);
    let free = solve_semilinear(&op, &one, &SemilinearTerm::None, &SolverOptions::default()).unwrap();
    let damped = solve_semilinear(
        &op,
        &one,
        &SemilinearTerm::LinearDecay { c: 1.0 },
        &SolverOptions::default(),
    )
    .unwrap();
    assert!(free.converged && damped.converged);
    for i in g.interior() {
        let (a, b) = (damped.u.values()[i], free.u.values()[i]);
        assert!(a >= 0.0 && a <= b + 1e-12, "node {i}: {a} vs {b}");
    }
    assert!(SemilinearTerm::from_id("linear-decay", -1.0, None, None).is_err());
    assert!(SemilinearTerm::from_id("cubic", 1.0, None, None).is_err());
}

#[test]
fn data_to_solution_map_is_lipschitz_at_p2() {
    let op = op(512, 0.5, 2.0);
    let g = *op.grid();
    let opts = SolverOptions::with_tol(1e-11);
    let base = solve_semilinear(&op, &constant(g, 1.0), &SemilinearTerm::None, &opts).unwrap();
    let ks: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&d| {
            let pert = solve_semilinear(&op, &constant(g, 1.0 + d), &SemilinearTerm::None, &opts).unwrap();
            let diff = gagliardo_seminorm(&g, 0.5, 2.0, &pert.u.sub(&base.u).unwrap())
                .unwrap()
                .value;
            // ||g1 - g2|| in the discrete L^2 norm
            let norm = d * (g.h() * g.n_interior() as f64).sqrt();
            diff / norm
        })
        .collect();
    for k in &ks {
        assert!((k / ks[0] - 1.0).abs() < 0.05, "{ks:?}");
    }
}

#[test]
fn bad_options_are_rejected() {
    let op = op(32, 0.5, 2.0);
    let problem = catalog_problem("CAT-B", *op.grid()).unwrap();
    assert!(solve_vi(&op, &problem, &SolverOptions::with_tol(0.0)).is_err());
    let tol_u = SolverOptions {
        tol_u: Some(-1.0),
        ..SolverOptions::default()
    };
    assert!(solve_vi(&op, &problem, &tol_u).is_err());
    let other = build_grid(-1.0, 1.0, 64).unwrap();
    let start = SolverOptions {
        initial: Some(GridFunction::zeros(other)),
        ..SolverOptions::default()
    };
    assert!(solve_vi(&op, &problem, &start).is_err());
}
