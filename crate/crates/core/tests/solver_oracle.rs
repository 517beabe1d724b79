mod common;

use polycone::solver::{oracle_solve, SolverSettings, Status};

fn compare(kind: &str, make: fn(&mut rand_chacha::ChaCha8Rng) -> polycone::QpProblem, seed: u64) {
    let mut r = common::rng(seed);
    let settings = SolverSettings::default();
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let qp = make(&mut r);
        let exact = oracle_solve(&qp).unwrap();
        assert_eq!(exact.status, Status::Optimal, "{kind} {case}: oracle {:?}", exact.status);
        let sol = common::solve_checked(&qp, &settings);
        assert_eq!(sol.status, Status::Optimal, "{kind} {case}");
        let gap = (sol.objective - exact.objective).abs();
        worst = worst.max(gap);
        assert!(gap <= 1e-6, "{kind} {case}: {} vs {} (polished {})", sol.objective, exact.objective, sol.polished);
    }
    println!("{kind}: worst objective gap {worst:.2e}");
}

#[test]
fn random_qps_match_oracle() {
    compare("qp", common::random_qp, 11);
}

#[test]
fn random_lps_match_oracle() {
    compare("lp", common::random_lp, 12);
}
