use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn inf() -> f64 {
    f64::INFINITY
}

/// Checks primal feasibility, dual sign conditions, complementary slackness
/// and a zero duality gap: together these certify optimality.
fn assert_certified(model: &LpModel<f64>, sol: &LpSolution<f64>) {
    assert_eq!(sol.status, LpStatus::Optimal);
    let eps = 1e-7;
    assert!(model.max_violation(&sol.primal) < eps, "primal infeasible");
    let min = model.sense == ObjectiveSense::Minimize;
    for (i, c) in model.constraints.iter().enumerate() {
        let y = if min { sol.duals[i] } else { -sol.duals[i] };
        let slack = model.row_activity(i, &sol.primal) - c.rhs;
        match c.relation {
            Relation::Ge => assert!(y >= -eps, "row {i} dual sign"),
            Relation::Le => assert!(y <= eps, "row {i} dual sign"),
            Relation::Eq => {}
        }
        assert!((y * slack).abs() < 1e-6, "row {i} complementary slackness");
    }
    for (j, v) in model.variables.iter().enumerate() {
        let d = if min { sol.reduced_costs[j] } else { -sol.reduced_costs[j] };
        let x = sol.primal[j];
        if d > eps {
            assert!((x - v.lower).abs() < 1e-6, "var {j} should sit at its lower bound");
        }
        if d < -eps {
            assert!((x - v.upper).abs() < 1e-6, "var {j} should sit at its upper bound");
        }
    }
    let dual = dual_objective(sol, model).unwrap();
    assert!(
        (dual - sol.objective_value).abs() < 1e-6 * (1.0 + dual.abs()),
        "duality gap: primal {} dual {dual}",
        sol.objective_value
    );
}

#[test]
fn textbook_max() {
    // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18
    let mut m = LpModel::<f64>::new(ObjectiveSense::Maximize);
    let x = m.add_variable("x", 0.0, inf(), false);
    let y = m.add_variable("y", 0.0, inf(), false);
    m.objective = vec![(x, 3.0), (y, 5.0)];
    m.add_constraint("r1", vec![(x, 1.0)], Relation::Le, 4.0);
    m.add_constraint("r2", vec![(y, 2.0)], Relation::Le, 12.0);
    m.add_constraint("r3", vec![(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
    let s = solve(&m).unwrap();
    assert!((s.objective_value - 36.0).abs() < 1e-9);
    assert!((s.primal[0] - 2.0).abs() < 1e-9 && (s.primal[1] - 6.0).abs() < 1e-9);
    // Shadow prices of the textbook example.
    assert!((s.duals[1] - 1.5).abs() < 1e-9);
    assert!((s.duals[2] - 1.0).abs() < 1e-9);
    assert_certified(&m, &s);
}

#[test]
fn equality_and_ge_rows_need_phase_one() {
    // min x + 2y + 3z, x + y + z = 1, x - y >= -0.5, z >= 0.2
    let mut m = LpModel::<f64>::new(ObjectiveSense::Minimize);
    let x = m.add_variable("x", 0.0, inf(), false);
    let y = m.add_variable("y", 0.0, inf(), false);
    let z = m.add_variable("z", 0.0, inf(), false);
    m.objective = vec![(x, 1.0), (y, 2.0), (z, 3.0)];
    m.add_constraint("sum", vec![(x, 1.0), (y, 1.0), (z, 1.0)], Relation::Eq, 1.0);
    m.add_constraint("d", vec![(x, 1.0), (y, -1.0)], Relation::Ge, -0.5);
    m.add_constraint("zmin", vec![(z, 1.0)], Relation::Ge, 0.2);
    let s = solve(&m).unwrap();
    assert!((s.objective_value - (0.8 + 0.6)).abs() < 1e-9);
    assert_certified(&m, &s);
}

#[test]
fn boxed_and_free_variables() {
    // min -x + y, -1 <= x <= 2, y free, y >= x - 3, y >= -x
    let mut m = LpModel::<f64>::new(ObjectiveSense::Minimize);
    let x = m.add_variable("x", -1.0, 2.0, false);
    let y = m.add_variable("y", -inf(), inf(), false);
    m.objective = vec![(x, -1.0), (y, 1.0)];
    m.add_constraint("a", vec![(y, 1.0), (x, -1.0)], Relation::Ge, -3.0);
    m.add_constraint("b", vec![(y, 1.0), (x, 1.0)], Relation::Ge, 0.0);
    let s = solve(&m).unwrap();
    // y = max(x - 3, -x); objective -x + y minimized at x = 2, y = -1.
    assert!((s.objective_value + 3.0).abs() < 1e-9, "{}", s.objective_value);
    assert_certified(&m, &s);
}

#[test]
fn empty_constraint_set() {
    let mut m = LpModel::<f64>::new(ObjectiveSense::Minimize);
    let x = m.add_variable("x", 1.0, 3.0, false);
    let y = m.add_variable("y", -2.0, 5.0, false);
    m.objective = vec![(x, 2.0), (y, -1.0)];
    m.objective_constant = 10.0;
    let s = solve(&m).unwrap();
    assert!((s.objective_value - (10.0 + 2.0 - 5.0)).abs() < 1e-12);
    assert_certified(&m, &s);
}

#[test]
fn unbounded_detected() {
    let mut m = LpModel::<f64>::new(ObjectiveSense::Maximize);
    let x = m.add_variable("x", 0.0, inf(), false);
    let y = m.add_variable("y", 0.0, inf(), false);
    m.objective = vec![(x, 1.0)];
    m.add_constraint("r", vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
    assert_eq!(solve(&m).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn infeasible_with_certificate() {
    // x + y <= 1, x + y >= 2
    let mut m = LpModel::<f64>::new(ObjectiveSense::Minimize);
    let x = m.add_variable("x", 0.0, inf(), false);
    let y = m.add_variable("y", 0.0, inf(), false);
    m.add_constraint("le", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
    m.add_constraint("ge", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 2.0);
    let s = solve(&m).unwrap();
    assert_eq!(s.status, LpStatus::Infeasible);
    let y = s.farkas.unwrap();
    assert!(verify_farkas(&m, &y));
    assert!((farkas_gap(&m, &y).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn infeasible_through_bounds_only() {
    // x in [0, 1], 2x = 3
    let mut m = LpModel::<f64>::new(ObjectiveSense::Minimize);
    let x = m.add_variable("x", 0.0, 1.0, false);
    m.add_constraint("e", vec![(x, 2.0)], Relation::Eq, 3.0);
    let s = solve(&m).unwrap();
    assert_eq!(s.status, LpStatus::Infeasible);
    assert!(verify_farkas(&m, s.farkas.as_ref().unwrap()));
}

#[test]
fn farkas_rejects_wrong_signs() {
    let mut m = LpModel::<f64>::new(ObjectiveSense::Minimize);
    let x = m.add_variable("x", 0.0, inf(), false);
    m.add_constraint("ge", vec![(x, 1.0)], Relation::Ge, 1.0);
    assert!(!verify_farkas(&m, &[-1.0]));
    assert!(!verify_farkas(&m, &[1.0]));
}

/// Degenerate transportation problem: supplies and demands all equal, so
/// every basis has many zero basics. Exercises the anti-cycling switch.
#[test]
fn degenerate_transportation() {
    let n = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut m = LpModel::<f64>::new(ObjectiveSense::Minimize);
    let mut var = vec![vec![0; n]; n];
    for (i, row) in var.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m.add_variable(format!("x[{i},{j}]"), 0.0, inf(), false);
            m.objective.push((*v, f64::from(rng.gen_range(0..3u8))));
        }
    }
    for i in 0..n {
        m.add_constraint(format!("s{i}"), (0..n).map(|j| (var[i][j], 1.0)).collect(), Relation::Eq, 1.0);
        m.add_constraint(format!("d{i}"), (0..n).map(|k| (var[k][i], 1.0)).collect(), Relation::Eq, 1.0);
    }
    let s = solve(&m).unwrap();
    assert_certified(&m, &s);
    // Same as the assignment problem optimum.
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m.objective_dense()[var[i][j]]).collect())
        .collect();
    let lap = crate::lap::solve_lap(&cost, crate::lap::Sense::Min).unwrap();
    assert!((lap.value - s.objective_value).abs() < 1e-9);
}

#[test]
fn bland_from_the_start_still_solves() {
    let opts = SimplexOptions {
        bland_after: 0,
        ..SimplexOptions::default()
    };
    let mut m = LpModel::<f64>::new(ObjectiveSense::Maximize);
    let x = m.add_variable("x", 0.0, inf(), false);
    let y = m.add_variable("y", 0.0, inf(), false);
    m.objective = vec![(x, 3.0), (y, 5.0)];
    m.add_constraint("r1", vec![(x, 1.0)], Relation::Le, 4.0);
    m.add_constraint("r2", vec![(y, 2.0)], Relation::Le, 12.0);
    m.add_constraint("r3", vec![(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
    let s = solve_with(&m, &opts).unwrap();
    assert!((s.objective_value - 36.0).abs() < 1e-9);
}

#[test]
fn iteration_limit_is_reported() {
    let opts = SimplexOptions {
        max_iterations: Some(0),
        ..SimplexOptions::default()
    };
    let mut m = LpModel::<f64>::new(ObjectiveSense::Maximize);
    let x = m.add_variable("x", 0.0, 1.0, false);
    m.objective = vec![(x, 1.0)];
    m.add_constraint("r", vec![(x, 1.0)], Relation::Le, 4.0);
    assert_eq!(solve_with(&m, &opts).unwrap().status, LpStatus::IterationLimit);
}

#[test]
fn fix_variables_pins_bounds() {
    let mut m = LpModel::<f64>::new(ObjectiveSense::Minimize);
    let x = m.add_variable("x", 0.0, 1.0, false);
    let y = m.add_variable("y", 0.0, 1.0, false);
    m.objective = vec![(x, 1.0), (y, 1.0)];
    m.add_constraint("r", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 1.0);
    let fixed = m.fix_variables(&[(x, 0.25)]).unwrap();
    let s = solve(&fixed).unwrap();
    assert!((s.primal[0] - 0.25).abs() < 1e-12 && (s.primal[1] - 0.75).abs() < 1e-9);
    assert_certified(&fixed, &s);
    assert!(m.fix_variables(&[(x, 2.0)]).is_err());
    assert!(m.fix_variables(&[(9, 0.0)]).is_err());
}

#[test]
fn validate_rejects_bad_models() {
    let mut m = LpModel::<f64>::new(ObjectiveSense::Minimize);
    m.add_variable("x", 1.0, 0.0, false);
    assert!(solve(&m).is_err());
    let mut m = LpModel::<f64>::new(ObjectiveSense::Minimize);
    m.add_variable("x", 0.0, 1.0, false);
    m.add_constraint("r", vec![(3, 1.0)], Relation::Le, 1.0);
    assert!(m.validate().is_err());
}

#[test]
fn f32_solve() {
    let mut m = LpModel::<f32>::new(ObjectiveSense::Maximize);
    let x = m.add_variable("x", 0.0, f32::INFINITY, false);
    let y = m.add_variable("y", 0.0, f32::INFINITY, false);
    m.objective = vec![(x, 3.0), (y, 5.0)];
    m.add_constraint("r1", vec![(x, 1.0)], Relation::Le, 4.0);
    m.add_constraint("r2", vec![(y, 2.0)], Relation::Le, 12.0);
    m.add_constraint("r3", vec![(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
    let s = solve(&m).unwrap();
    assert!((s.objective_value - 36.0).abs() < 1e-4);
}

#[test]
fn lp_text_round_trip() {
    let mut m = LpModel::<f64>::new(ObjectiveSense::Maximize);
    let x = m.add_variable("x[1,2]", 0.0, 1.0, true);
    let y = m.add_variable("y", -inf(), inf(), false);
    let z = m.add_variable("z", -2.5, 7.0, true);
    let w = m.add_variable("w", 1.0 / 3.0, 1.0 / 3.0, false);
    m.objective = vec![(x, 0.1), (y, -2.0), (z, 1e-9), (w, 123456.789012345)];
    m.objective_constant = -4.5;
    m.add_constraint("row[1]", vec![(x, 1.0), (y, -1.0 / 7.0)], Relation::Le, 2.0);
    m.add_constraint("row[2]", vec![(z, 3.0), (y, 1.0)], Relation::Ge, -1e20);
    m.add_constraint("row[3]", vec![(w, 1.0)], Relation::Eq, 0.0);
    let text = write_lp(&m);
    let back: LpModel<f64> = read_lp(&text).unwrap();
    assert_eq!(back.sense, m.sense);
    assert_eq!(back.num_vars(), 4);
    assert_eq!(back.variables[0].name, "x(1,2)");
    assert_eq!(back.constraints[1].name, "row(2)");
    assert_eq!(back.objective_dense(), m.objective_dense());
    assert_eq!(back.objective_constant, -4.5);
    for (a, b) in back.variables.iter().zip(&m.variables) {
        assert_eq!((a.lower, a.upper, a.integer), (b.lower, b.upper, b.integer));
    }
    for (a, b) in back.constraints.iter().zip(&m.constraints) {
        assert_eq!(a.coeffs, b.coeffs);
        assert_eq!(a.relation, b.relation);
        assert_eq!(a.rhs, b.rhs);
    }
    // Writing the re-imported model reproduces the text.
    assert_eq!(write_lp(&back), text);
}

#[test]
fn lp_reader_accepts_hand_written_files() {
    let text = r"\ a comment
MINIMIZE
 cost: 2 a + 3 b
   - c
SUBJECT TO
 -a - b >= -4
 lim: a
   + c <= 3
 c >= 1
BOUNDS
 b <= 2
 -1 <= c
GENERAL
 a
END
";
    let m: LpModel<f64> = read_lp(text).unwrap();
    assert_eq!(m.num_vars(), 3);
    assert_eq!(m.num_constraints(), 3);
    assert_eq!(m.constraints[0].name, "c0");
    assert_eq!(m.constraints[1].name, "lim");
    assert_eq!(m.constraints[0].coeffs, vec![(0, -1.0), (1, -1.0)]);
    assert_eq!(m.variables[1].upper, 2.0);
    assert_eq!(m.variables[2].lower, -1.0);
    assert!(m.variables[0].integer);
    let s = solve(&m).unwrap();
    assert!((s.objective_value + 3.0).abs() < 1e-9);
}

#[test]
fn lp_reader_reports_position() {
    let err = read_lp::<f64>("Minimize\n obj: x\nSubject To\n r: x + >= 1\nEnd\n").unwrap_err();
    match err {
        QapError::Parse { position, .. } => assert_eq!(position, 8),
        other => panic!("unexpected {other:?}"),
    }
    assert!(read_lp::<f64>("Subject To\n x >= 1\n").is_err());
    assert!(read_lp::<f64>("Minimize\n obj: x\nSubject To\n r: x 1\n").is_err());
}

#[test]
fn row_permutation_keeps_objective() {
    let mut m = LpModel::<f64>::new(ObjectiveSense::Minimize);
    let x = m.add_variable("x", 0.0, inf(), false);
    let y = m.add_variable("y", 0.0, inf(), false);
    m.objective = vec![(x, 1.0), (y, 1.0)];
    m.add_constraint("a", vec![(x, 1.0), (y, 2.0)], Relation::Ge, 4.0);
    m.add_constraint("b", vec![(x, 3.0), (y, 1.0)], Relation::Ge, 6.0);
    m.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Relation::Le, 10.0);
    let s1 = solve(&m).unwrap();
    let s2 = solve(&m.permute_rows(&[2, 0, 1]).unwrap()).unwrap();
    assert!((s1.objective_value - s2.objective_value).abs() < 1e-12);
    assert!(m.permute_rows(&[0, 0, 1]).is_err());
}

fn random_model(seed: u64, rows: usize, cols: usize) -> LpModel<f64> {
    // Feasible by construction: rows are built around a random point.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point: Vec<f64> = (0..cols).map(|_| rng.gen_range(0.0..2.0)).collect();
    let mut m = LpModel::<f64>::new(if rng.gen_bool(0.5) {
        ObjectiveSense::Minimize
    } else {
        ObjectiveSense::Maximize
    });
    for j in 0..cols {
        let (lo, hi) = match rng.gen_range(0..4) {
            0 => (0.0, inf()),
            1 => (0.0, 3.0),
            2 => (-1.0, 2.5),
            _ => (-inf(), inf()),
        };
        m.add_variable(format!("v{j}"), lo, hi, false);
        m.objective.push((j, rng.gen_range(-1.0..1.0)));
    }
    for i in 0..rows {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for j in 0..cols {
            if rng.gen_bool(0.6) {
                coeffs.push((j, f64::from(rng.gen_range(-4i8..=4))));
            }
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * point[j]).sum();
        let (rel, rhs) = match rng.gen_range(0..3) {
            0 => (Relation::Le, act + rng.gen_range(0.0..1.0)),
            1 => (Relation::Ge, act - rng.gen_range(0.0..1.0)),
            _ => (Relation::Eq, act),
        };
        m.add_constraint(format!("r{i}"), coeffs, rel, rhs);
    }
    // A bounding row keeps the problem from being unbounded.
    let all: Vec<(usize, f64)> = (0..cols).map(|j| (j, 1.0)).collect();
    let l1: f64 = point.iter().sum();
    m.add_constraint("cap", all.clone(), Relation::Le, l1 + 10.0);
    m.add_constraint("floor", all, Relation::Ge, l1 - 10.0);
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_feasible_models_are_certified(seed in any::<u64>(), rows in 1usize..12, cols in 1usize..10) {
        let m = random_model(seed, rows, cols);
        let s = solve(&m).unwrap();
        if s.status == LpStatus::Optimal {
            assert_certified(&m, &s);
        } else {
            // Free variables can make the capped model unbounded only if a
            // direction keeps the coordinate sum fixed.
            prop_assert_eq!(s.status, LpStatus::Unbounded);
        }
    }

    #[test]
    fn random_infeasible_models_have_certificates(seed in any::<u64>(), rows in 1usize..8, cols in 1usize..8) {
        let mut m = random_model(seed, rows, cols);
        let all: Vec<(usize, f64)> = (0..cols).map(|j| (j, 1.0)).collect();
        let cap = m.constraints[m.num_constraints() - 2].rhs;
        m.add_constraint("clash", all, Relation::Ge, cap + 1.0);
        let s = solve(&m).unwrap();
        prop_assert_eq!(s.status, LpStatus::Infeasible);
        prop_assert!(verify_farkas(&m, s.farkas.as_ref().unwrap()));
    }

    #[test]
    fn lp_text_round_trip_is_exact(seed in any::<u64>(), rows in 0usize..6, cols in 1usize..6) {
        let m = random_model(seed, rows, cols);
        let back: LpModel<f64> = read_lp(&write_lp(&m)).unwrap();
        prop_assert_eq!(back.objective_dense(), m.objective_dense());
        for (a, b) in back.constraints.iter().zip(&m.constraints) {
            prop_assert_eq!(&a.coeffs, &b.coeffs);
            prop_assert_eq!(a.rhs, b.rhs);
        }
        for (a, b) in back.variables.iter().zip(&m.variables) {
            prop_assert_eq!((a.lower, a.upper), (b.lower, b.upper));
        }
    }
}
