use fracobs::free_boundary::{default_tol_u, growth_check};
use fracobs::solver::gap_function;
use fracobs::{
    build_grid, catalog_problem, coincidence_set, holder_seminorm, lebesgue_distance, lewy_stampacchia_residual,
    recover_quasi_characteristic, solve_vi, DiscreteOperator, FractionalParams, GridFunction, SolveReport,
    SolverOptions,
};

fn solve(id: &str, n: usize, s: f64, p: f64) -> (DiscreteOperator, fracobs::ProblemSpec, SolveReport) {
    let g = build_grid(-1.0, 1.0, n).unwrap();
    let op = DiscreteOperator::new(g, FractionalParams::new(s, p).unwrap()).unwrap();
    let problem = catalog_problem(id, g).unwrap();
    let sol = solve_vi(&op, &problem, &SolverOptions::default()).unwrap();
    assert!(sol.converged, "{id} s = {s} p = {p}: residual {}", sol.residual);
    (op, problem, sol)
}

#[test]
fn cat_c_local_coincidence_is_one_central_interval() {
    let (_, _, coarse) = solve("CAT-C", 2048, 1.0, 2.0);
    let (_, _, fine) = solve("CAT-C", 8192, 1.0, 2.0);
    assert_eq!(coarse.coincidence_intervals.len(), 1);
    let (l, r) = coarse.coincidence_intervals[0];
    assert!(l < 0.0 && r > 0.0);
    let (fl, fr) = fine.coincidence_intervals[0];
    let h = 2.0 / 2048.0;
    assert!(
        (l - fl).abs() <= 2.0 * h && (r - fr).abs() <= 2.0 * h,
        "({l}, {r}) vs ({fl}, {fr})"
    );
    assert!((r - 0.0337).abs() < 2.0 * h);
}

#[test]
fn coincidence_set_examples() {
    let g = build_grid(-1.0, 1.0, 16).unwrap();
    let c = coincidence_set(&GridFunction::zeros(g), 1e-10);
    assert_eq!(c.intervals, vec![(-1.0 + g.h() / 2.0, 1.0 - g.h() / 2.0)]);
    let u = GridFunction::from_interior_fn(g, |x| 1.0 - x * x);
    assert!(coincidence_set(&u, 1e-10).indices.is_empty());
    // monotone in the threshold
    let small = coincidence_set(&u, 0.1);
    let large = coincidence_set(&u, 0.5);
    assert!(small.indices.iter().all(|i| large.indices.contains(i)));
    assert_eq!(default_tol_u(1e-8, 2.0, 0.0), 1e-10);
    assert!((default_tol_u(1e-8, 2.0, 1.0) - 1e-6).abs() < 1e-20);
    assert!((default_tol_u(1e-8, 3.0, 2.0) - 2e-3).abs() < 1e-15);
}

#[test]
fn quasi_characteristic_examples() {
    let (_, problem, sol) = solve("CAT-A", 64, 0.5, 2.0);
    let q = recover_quasi_characteristic(&sol, &problem, 1e-12).unwrap();
    for i in problem.grid().interior() {
        assert!(q.valid_mask[i]);
        assert_eq!(q.theta.values()[i], 0.0);
    }
    let (_, problem, sol) = solve("CAT-C", 1024, 0.9, 2.0);
    let q = recover_quasi_characteristic(&sol, &problem, 1e-12).unwrap();
    for i in problem.grid().interior() {
        if problem.f.values()[i] > 0.0 {
            assert!(!q.valid_mask[i]);
        }
        if q.valid_mask[i] {
            let t = q.theta.values()[i];
            assert!((-1e-4..=1.0 + 1e-4).contains(&t), "node {i}: {t}");
        }
    }
}

#[test]
fn lebesgue_examples() {
    let g = build_grid(-1.0, 1.0, 100).unwrap();
    let one = GridFunction::from_interior_fn(g, |_| 1.0);
    let zero = GridFunction::zeros(g);
    assert_eq!(lebesgue_distance(&one, &one, None).unwrap(), 0.0);
    assert!((lebesgue_distance(&one, &zero, None).unwrap() - 2.0).abs() <= g.h() + 1e-12);
    assert!((lebesgue_distance(&one, &zero, Some((0.0, 0.5))).unwrap() - 0.5).abs() <= g.h() + 1e-12);
    let other = build_grid(-1.0, 1.0, 50).unwrap();
    assert!(lebesgue_distance(&one, &GridFunction::zeros(other), None).is_err());
}

#[test]
fn holder_examples() {
    let g = build_grid(-1.0, 1.0, 64).unwrap();
    let tent = GridFunction::from_interior_fn(g, |x| 1.0 - x.abs());
    assert!((holder_seminorm(&tent, 1.0, (-0.5, 0.5)).unwrap() - 1.0).abs() < 1e-12);
    let flat = GridFunction::from_interior_fn(g, |_| 3.0);
    assert_eq!(holder_seminorm(&flat, 0.5, (-0.5, 0.5)).unwrap(), 0.0);
    assert!(holder_seminorm(&flat, 0.5, (-2.0, 0.5)).is_err());
    assert!(holder_seminorm(&flat, 0.0, (-0.5, 0.5)).is_err());
}

#[test]
fn holder_bound_is_uniform_in_s() {
    let (_, _, limit) = solve("CAT-B", 1024, 1.0, 2.0);
    let reference = holder_seminorm(&limit.u, 0.1, (-0.9, 0.9)).unwrap();
    for s in [0.6, 0.7, 0.8, 0.9, 0.95] {
        let (_, _, sol) = solve("CAT-B", 1024, s, 2.0);
        let v = holder_seminorm(&sol.u, 0.1, (-0.9, 0.9)).unwrap();
        assert!(
            v <= 2.0 * reference && v >= 0.5 * reference,
            "s = {s}: {v} vs {reference}"
        );
    }
}

#[test]
fn lewy_stampacchia_examples() {
    let (op, problem, sol) = solve("CAT-A", 64, 0.5, 2.0);
    assert_eq!(lewy_stampacchia_residual(&op, &sol, &problem).unwrap(), 0.0);
    for (s, p) in [(0.5, 2.0), (0.7, 3.0), (1.0, 1.5)] {
        let (op, problem, sol) = solve("CAT-D", 256, s, p);
        assert!(lewy_stampacchia_residual(&op, &sol, &problem).unwrap() <= 10.0 * sol.tol);
        let (op, problem, sol) = solve("CAT-B", 256, s, p);
        assert!(lewy_stampacchia_residual(&op, &sol, &problem).unwrap() <= 10.0 * sol.tol);
    }
}

#[test]
fn growth_examples() {
    let g = build_grid(-1.0, 1.0, 64).unwrap();
    let zero = GridFunction::zeros(g);
    let rep = growth_check(&zero, &coincidence_set(&zero, 1e-10), &[0.1, 0.2], 2.0).unwrap();
    assert!(rep.samples.is_empty() && rep.c1_hat == 0.0 && rep.exponent.is_none());

    let (_, problem, sol) = solve("CAT-B", 1024, 1.0, 2.0);
    let coin = coincidence_set(&gap_function(&sol.u, &problem.psi).unwrap(), sol.tol_u);
    let rep = growth_check(&sol.u, &coin, &[0.04, 0.06, 0.08, 0.1, 0.12], 2.0).unwrap();
    assert!(rep.c1_hat > 0.0);
    assert!((rep.exponent.unwrap() - 2.0).abs() <= 0.3);
    for s in &rep.samples {
        assert!(s.sup_ball >= s.bound * (1.0 - 1e-12));
    }
}
