//! Solver and residual checks against the classical finite-difference oracle.

mod common;

use common::*;
use fracvar::nonlinearity::Nonlinearity;
use fracvar::solver::{minimize, weak_residual, SolutionRecord, SolverConfig};

#[test]
fn classical_solution_matches_finite_differences() {
    let p = problem(1.0, 1.0, 1024, 64, power_sum());
    let cfg = SolverConfig { grad_tol: 1e-10, ..Default::default() };
    let rec = minimize(&p, 0.25, &cfg).unwrap();
    let oracle = classical_oracle(p.nonlinearity(), 0.25, 1.0, 1024);
    let err = max_abs_diff(&rec.node_values, &oracle);
    let rel = err / max_abs(&oracle);
    println!("‖u − u_fd‖_∞ = {err:.3e}, relative {rel:.3e}, ‖u_fd‖_∞ = {:.3e}", max_abs(&oracle));
    assert!(rec.converged && rec.nontrivial);
    assert!(err <= 1e-3 && rel <= 1e-3);
}

#[test]
fn oracle_solution_has_small_weak_residual() {
    let p = problem(1.0, 1.0, 1024, 64, power_sum());
    let rec = minimize(&p, 0.25, &SolverConfig::default()).unwrap();
    let oracle = classical_oracle(p.nonlinearity(), 0.25, 1.0, 1024);
    let projected = p.space().project(&oracle).unwrap();
    let as_record = SolutionRecord { coeffs: projected, ..rec };
    let res = weak_residual(&as_record, &p).unwrap();
    println!("oracle residual {res:.3e}");
    assert!(res <= 1e-4);
}

#[test]
fn oracle_collapses_below_the_first_eigenvalue() {
    // 2u″ + μu = 0 has only u = 0 below μ = 2π², and the oracle's Picard sweep
    // must collapse to it.
    let linear = Nonlinearity::custom_with_potential("linear", |x| x, |x| 0.5 * x * x).unwrap();
    let u = classical_oracle(&linear, 5.0, 1.0, 256);
    assert!(max_abs(&u) < 1e-12);
}

#[test]
fn zero_datum_has_zero_residual() {
    let p = problem(0.75, 1.0, 256, 16, Nonlinearity::zero());
    let rec = minimize(&p, 0.3, &SolverConfig::default()).unwrap();
    assert_eq!(weak_residual(&rec, &p).unwrap(), 0.0);
}
