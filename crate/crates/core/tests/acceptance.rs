//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::f64::consts::FRAC_PI_8;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use polycone::analytic::{lower_convex_hull_1d, sample_step1d, variant_value, Step1DSolution, VariantSolution};
use polycone::cone::{certify, second_difference_rows};
use polycone::fd::{assemble_centered_dx, assemble_dxx_1d, assemble_grad_quad_1d, assemble_laplacian_2d};
use polycone::grid::{sample, Grid, GridFunction};
use polycone::problems::{
    build, evaluate_functional, grid_part, Norm, ProblemKind, ProblemSpec, QuadratureRule,
};
use polycone::solver::{oracle_solve, SolverSettings, Status};
use polycone::stencil::{directions, StencilSet};
use polycone::targets::{self, TargetParams};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

fn dense(m: &polycone::SparseMatrix) -> Vec<Vec<f64>> {
    m.to_dense()
}

fn operators() -> Outcome {
    let dxx = vec![
        vec![1., -2., 1., 0., 0.],
        vec![0., 1., -2., 1., 0.],
        vec![0., 0., 1., -2., 1.],
    ];
    let gq = vec![
        vec![1., -1., 0., 0., 0.],
        vec![-1., 2., -1., 0., 0.],
        vec![0., -1., 2., -1., 0.],
        vec![0., 0., -1., 2., -1.],
        vec![0., 0., 0., -1., 1.],
    ];
    let cd = vec![
        vec![-1., 1., 0., 0., 0.],
        vec![-0.5, 0., 0.5, 0., 0.],
        vec![0., -0.5, 0., 0.5, 0.],
        vec![0., 0., -0.5, 0., 0.5],
        vec![0., 0., 0., -1., 1.],
    ];
    #[rustfmt::skip]
    let lap = vec![
        vec![ 2., -1.,  0., -1.,  0.,  0.,  0.,  0.,  0.],
        vec![-1.,  3., -1.,  0., -1.,  0.,  0.,  0.,  0.],
        vec![ 0., -1.,  2.,  0.,  0., -1.,  0.,  0.,  0.],
        vec![-1.,  0.,  0.,  3., -1.,  0., -1.,  0.,  0.],
        vec![ 0., -1.,  0., -1.,  4., -1.,  0., -1.,  0.],
        vec![ 0.,  0., -1.,  0., -1.,  3.,  0.,  0., -1.],
        vec![ 0.,  0.,  0., -1.,  0.,  0.,  2., -1.,  0.],
        vec![ 0.,  0.,  0.,  0., -1.,  0., -1.,  3., -1.],
        vec![ 0.,  0.,  0.,  0.,  0., -1.,  0., -1.,  2.],
    ];
    let checks = [
        ("dxx", dense(&assemble_dxx_1d(5, 1.0).unwrap()) == dxx),
        ("grad_quad", dense(&assemble_grad_quad_1d(5, 1.0).unwrap()) == gq),
        ("centered_dx", dense(&assemble_centered_dx(5, 1.0).unwrap()) == cd),
        ("laplacian", dense(&assemble_laplacian_2d(3, 1.0).unwrap()) == lap),
    ];
    let bad: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(bad.is_empty(), if bad.is_empty() { "4/4 matrices exact".to_string() } else { format!("mismatch: {bad:?}") })
}

fn table_one() -> Outcome {
    let dtheta = [0.39, 0.23, 0.16, 0.12];
    let tan2 = [0.17, 0.056, 0.026, 0.015];
    let mut pass = true;
    let mut parts = vec![];
    for w in 1..=4 {
        let s = StencilSet::new(w, 2).unwrap();
        pass &= (s.dtheta - dtheta[w - 1]).abs() <= 0.005 && (s.tan2_dtheta - tan2[w - 1]).abs() <= 0.003;
        parts.push(format!("w{w}: {:.4}/{:.4}", s.dtheta, s.tan2_dtheta));
    }
    outcome(pass, parts.join(", "))
}

fn step_1d() -> Outcome {
    let g = Grid::new_1d(-1.0, 1.0, 201).unwrap();
    let f = sample(&g, targets::step(1.0)).unwrap();
    let spec = ProblemSpec::new(ProblemKind::Custom1dSource, g.clone()).with_target(f);
    let qp = build(&spec).unwrap();
    let sol = common::solve_checked(&qp, &SolverSettings::default());
    let exact = sample_step1d(&g, &Step1DSolution::optimal(1.0).unwrap()).unwrap();
    let err = linf(&sol.x, &exact.values);
    let obj = qp.full_objective(&sol.x);
    let pass = sol.is_optimal() && err <= 5e-3 && (obj + 0.026143).abs() <= 1e-4;
    outcome(pass, format!("linf {err:.2e} (<= 5e-3), objective {obj:.6} (target -0.026143 +- 1e-4)"))
}

fn variant_solution(n: usize, rule: QuadratureRule) -> (f64, f64) {
    let g = Grid::unit_square(n).unwrap();
    let spec = ProblemSpec::new(ProblemKind::MonopolistVariant, g.clone()).with_quadrature(rule);
    let qp = build(&spec).unwrap();
    let sol = common::solve_checked(&qp, &SolverSettings::default());
    assert_eq!(sol.status, Status::Optimal);
    let exact = sample(&g, |p| variant_value(p[0], p[1])).unwrap();
    (linf(&sol.x[..g.node_count()], &exact.values), qp.full_objective(&sol.x))
}

fn variant_errors() -> Outcome {
    let expected = [0.05, 0.005, 0.01, 0.005];
    let errs: Vec<f64> =
        [8, 16, 32, 64].iter().map(|&n| variant_solution(n, QuadratureRule::Trapezoidal).0).collect();
    let within = errs.iter().zip(&expected).all(|(e, p)| *e >= p / 3.0 && *e <= p * 3.0);
    let pass = within && errs[3] <= errs[0];
    outcome(pass, format!("errors {:.4} {:.4} {:.4} {:.4} vs .05 .005 .01 .005 (x3)", errs[0], errs[1], errs[2], errs[3]))
}

fn variant_value_check() -> Outcome {
    let (_, obj) = variant_solution(64, QuadratureRule::Trapezoidal);
    let exact = VariantSolution::value();
    let pass = (obj.abs() - exact).abs() <= 2e-3;
    outcome(pass, format!("|objective| {:.5} vs 2/27(6+sqrt2) = {exact:.5} (+- 2e-3)", obj.abs()))
}

fn width_sweep() -> Outcome {
    let g = Grid::unit_square(21).unwrap();
    let target = sample(&g, targets::neg_bump).unwrap();
    let sols: Vec<Vec<f64>> = (1..=4)
        .map(|w| {
            let spec = ProblemSpec::projection(Norm::L2, target.clone())
                .with_width(w)
                .with_quadrature(QuadratureRule::Zeroth);
            let sol = common::solve_checked(&build(&spec).unwrap(), &SolverSettings::default());
            assert!(sol.is_optimal());
            sol.x
        })
        .collect();
    let d: Vec<f64> = (0..3).map(|w| linf(&sols[w], &sols[3])).collect();
    let expected = [0.02, 0.01, 0.003];
    let within = d.iter().zip(&expected).all(|(v, p)| (v - p).abs() <= 0.5 * p);
    let pass = within && d[0] > d[1] && d[1] > d[2];
    outcome(pass, format!("max|u_w - u_4| = {:.4} {:.4} {:.4} vs .02 .01 .003 (+-50%)", d[0], d[1], d[2]))
}

fn certification() -> Outcome {
    // spacing 1/8 keeps every sample and difference exact, so margins are compared with zero
    let g = Grid::new_2d(-1.0, 1.0, 17).unwrap();
    let exact = |u: &GridFunction, s: &StencilSet| certify(u, s, 0.0).unwrap().feasible;
    let xy = sample(&g, targets::xy).unwrap();
    let rot = sample(
        &g,
        targets::builtin("rotated", TargetParams { alpha: -0.1, theta: FRAC_PI_8, c: 1.0 }).unwrap(),
    )
    .unwrap();
    let abs = sample(&g, targets::abs_x_minus_3y).unwrap();
    let w = |k| StencilSet::new(k, 2).unwrap();
    let checks = [
        ("xy fails width 1", !exact(&xy, &w(1))),
        ("xy passes axes", exact(&xy, &StencilSet::axes())),
        ("g(-0.1,pi/8) passes width 1", exact(&rot, &w(1))),
        ("g(-0.1,pi/8) fails width 2", !exact(&rot, &w(2))),
        ("|x-3y| passes widths 1-3", (1..=3).all(|k| exact(&abs, &w(k)))),
    ];
    let bad: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(bad.is_empty(), if bad.is_empty() { "5/5 checks".to_string() } else { format!("failed: {bad:?}") })
}

fn envelope() -> Outcome {
    let g = Grid::new_1d(-1.0, 1.0, 101).unwrap();
    let t = sample(&g, targets::sin_pi).unwrap();
    let spec = ProblemSpec::new(ProblemKind::ConvexEnvelope, g.clone()).with_target(t.clone());
    let sol = common::solve_checked(&build(&spec).unwrap(), &SolverSettings::default());
    let pts: Vec<(f64, f64)> = (0..101).map(|k| (g.point(k)[0], t.values[k])).collect();
    let hull = lower_convex_hull_1d(&pts).unwrap();
    let err = linf(&sol.x, &hull);
    outcome(sol.is_optimal() && err <= 1e-4, format!("linf vs hull {err:.2e} (<= 1e-4)"))
}

fn oracle() -> Outcome {
    let settings = SolverSettings::default();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for (seed, make) in [(101, common::random_qp as fn(&mut _) -> _), (202, common::random_lp)] {
        let mut r = common::rng(seed);
        for _ in 0..50 {
            let qp = make(&mut r);
            let exact = oracle_solve(&qp).unwrap();
            let sol = common::solve_checked(&qp, &settings);
            if exact.status != Status::Optimal || !sol.is_optimal() {
                failures += 1;
                continue;
            }
            let gap = (sol.objective - exact.objective).abs();
            worst = worst.max(gap);
            failures += usize::from(gap > 1e-6);
        }
    }
    outcome(failures == 0, format!("100 problems, worst objective gap {worst:.1e}, {failures} failures; KKT checked on every solve"))
}

fn properties() -> Outcome {
    let settings = SolverSettings::default();
    let tol = 10.0 * settings.eps_abs;
    let mut r = common::rng(7);
    let mut notes = vec![];
    let mut pass = true;

    // idempotence for every norm
    let g = Grid::new_2d(-1.0, 1.0, 9).unwrap();
    for norm in [Norm::L1, Norm::L2, Norm::Linf, Norm::H1, Norm::H1Zero, Norm::H1Gradbox] {
        let vals: Vec<f64> = (0..g.node_count()).map(|_| r.random_range(-1.0..1.0)).collect();
        let t = GridFunction::new(g.clone(), vals).unwrap();
        let first = common::solve_checked(&build(&ProblemSpec::projection(norm, t)).unwrap(), &settings);
        let u1 = grid_part(&ProblemSpec::projection(norm, GridFunction::zeros(g.clone())), &first.x).unwrap();
        let second = common::solve_checked(&build(&ProblemSpec::projection(norm, u1.clone())).unwrap(), &settings);
        let mut d: Vec<f64> = second.x[..u1.values.len()].iter().zip(&u1.values).map(|(a, b)| a - b).collect();
        if norm == Norm::H1 {
            // the seminorm only fixes the minimizer up to a constant
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            d.iter_mut().for_each(|v| *v -= mean);
        }
        let e = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        pass &= first.is_optimal() && second.is_optimal() && e <= tol;
        notes.push(format!("{norm:?} {e:.0e}"));
    }

    // convex quadratics are fixed points
    let g33 = Grid::unit_square(33).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (a, c): (f64, f64) = (r.random_range(0.1..2.0), r.random_range(0.1..2.0));
        let b = r.random_range(-1.0..1.0) * (a * c).sqrt();
        let (d, e) = (r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let t = sample(&g33, |p| a * p[0] * p[0] + 2.0 * b * p[0] * p[1] + c * p[1] * p[1] + d * p[0] + e * p[1]).unwrap();
        let sol = common::solve_checked(&build(&ProblemSpec::projection(Norm::L2, t.clone())).unwrap(), &settings);
        pass &= sol.is_optimal();
        worst = worst.max(linf(&sol.x, &t.values));
    }
    pass &= worst <= 1e-5;
    notes.push(format!("fixed points {worst:.1e}"));

    // assembled gradient against finite differences of the directly evaluated functional
    let g6 = Grid::new_2d(0.0, 1.0, 6).unwrap();
    let t6 = sample(&g6, targets::spiky).unwrap();
    let g1 = Grid::new_1d(-1.0, 1.0, 15).unwrap();
    let specs = [
        ProblemSpec::projection(Norm::L2, t6.clone()),
        ProblemSpec::projection(Norm::H1, t6.clone()),
        ProblemSpec::projection(Norm::H1Zero, t6.clone()),
        ProblemSpec::new(ProblemKind::ConvexEnvelope, g6.clone()).with_target(t6.clone()),
        ProblemSpec { c: 0.7, ..ProblemSpec::new(ProblemKind::Monopolist, g6.clone()) },
        ProblemSpec::new(ProblemKind::RochetChone, g6.clone()),
        ProblemSpec::new(ProblemKind::MonopolistVariant, g6.clone()),
        ProblemSpec::new(ProblemKind::Custom1dSource, g1.clone()).with_target(sample(&g1, targets::step(1.0)).unwrap()),
    ];
    let mut worst_fd: f64 = 0.0;
    for spec in &specs {
        let qp = build(spec).unwrap();
        let n = spec.grid.node_count();
        for _ in 0..5 {
            let u: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let mut x = u.clone();
            x.resize(qp.num_vars(), 0.0);
            let pu = qp.p.mul_vec(&x);
            let step = 1e-4;
            let mut num = 0.0_f64;
            let mut den = 1.0_f64;
            for k in 0..n {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[k] += step;
                dn[k] -= step;
                let fd = (evaluate_functional(spec, &up).unwrap() - evaluate_functional(spec, &dn).unwrap()) / (2.0 * step);
                let an = pu[k] + qp.q[k];
                num = num.max((fd - an).abs());
                den = den.max(an.abs());
            }
            worst_fd = worst_fd.max(num / den);
        }
    }
    pass &= worst_fd <= 1e-6;
    notes.push(format!("gradient check {worst_fd:.1e}"));

    // cones: cumulative direction sets, shrinking resolution, nested feasible sets
    let mut cone_ok = true;
    for w in 1..=4 {
        let (a, b) = (directions(w, 2).unwrap(), directions(w + 1, 2).unwrap());
        cone_ok &= a.iter().all(|d| b.contains(d));
        cone_ok &= StencilSet::new(w + 1, 2).unwrap().dtheta < StencilSet::new(w, 2).unwrap().dtheta;
        cone_ok &= second_difference_rows(&g33, &StencilSet::new(w + 1, 2).unwrap()).unwrap().rows()
            > second_difference_rows(&g33, &StencilSet::new(w, 2).unwrap()).unwrap().rows();
    }
    for _ in 0..20 {
        let (a, b, c) = (r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let u = sample(&g, |p| a * p[0] * p[0] + b * p[0] * p[1] + c * p[1] * p[1]).unwrap();
        for w in 1..4 {
            let wide = certify(&u, &StencilSet::new(w + 1, 2).unwrap(), 1e-9).unwrap().feasible;
            let narrow = certify(&u, &StencilSet::new(w, 2).unwrap(), 1e-9).unwrap().feasible;
            cone_ok &= !wide || narrow;
        }
    }
    pass &= cone_ok;
    notes.push(format!("cone nesting {}", if cone_ok { "ok" } else { "violated" }));
    outcome(pass, notes.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 10] = [
        (1, "operator bit-exactness", Duration::from_secs(1), operators),
        (2, "directional resolution table", Duration::from_secs(1), table_one),
        (3, "1D step source vs closed form", Duration::from_secs(10), step_1d),
        (4, "variant error table (trapezoidal)", Duration::from_secs(60), variant_errors),
        (5, "variant optimal value", Duration::from_secs(30), variant_value_check),
        (6, "stencil width sweep", Duration::from_secs(60), width_sweep),
        (7, "counterexample certification", Duration::from_secs(5), certification),
        (8, "convex envelope vs hull", Duration::from_secs(5), envelope),
        (9, "solver vs active-set oracle", Duration::from_secs(30), oracle),
        (10, "property suite", Duration::from_secs(120), properties),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= limit, o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        failed += usize::from(!pass);
        println!(
            "criterion {id:>2} {}: {name}: {detail} [{:.2}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {}/10 passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
