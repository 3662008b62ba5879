//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test -- --nocapture`). Tolerances are pinned here;
//! regression baselines were frozen from the first verified run and hold
//! exactly because every run is deterministic.

use std::sync::OnceLock;
use std::time::Instant;

use mascope::commands;
use mascope::scenario::{self, BuildParams};
use mascope_core::{
    box_vi_holds, centralized_solve, dot, norm2, rate_envelope, run, running_average_update,
    solve_linear, BoxSet, ConstraintSet, Engine, EngineKind, Matrix, Objective, RunTrace,
    SplitMix64, StepSchedule, Vector,
};

fn vecn(v: &[f64]) -> Vector {
    Vector::new(v.to_vec()).unwrap()
}

/// Criterion 3 regression baseline: distance to the optimum at k = 10^4 on
/// the harmonic two-agent run, frozen from the first verified run.
const TWO_AGENT_HARMONIC_DIST_1E4: f64 = 0.0016688342814864848;

/// Criterion 5 consensus constant, frozen from the first verified run of the
/// desk-scale robust-regression trace (the complete graph reaches exact
/// consensus after one step, so this bounds float noise only).
const CONSENSUS_RATE_C: f64 = 1e-13;

fn robust_desk_trace() -> &'static RunTrace {
    static TRACE: OnceLock<RunTrace> = OnceLock::new();
    TRACE.get_or_init(|| {
        let built = scenario::build("robust_desk", &BuildParams::default()).unwrap();
        run(&built.config).unwrap()
    })
}

#[test]
fn criterion_1_fixed_point() {
    let start = Instant::now();
    let report = commands::fixed_point_check().unwrap();
    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE 1 (fixed point): {} — max deviation {:.3e} over {} iterations, \
         base-case certificates {:?}, later certificates {}, {:.3}s",
        if report.pass { "PASS" } else { "FAIL" },
        report.max_deviation,
        report.iterations,
        report.base_case_vi,
        report.later_steps_vi,
        elapsed.as_secs_f64()
    );
    assert!(report.max_deviation <= 1e-9, "{}", report.text);
    assert!(report.base_case_vi.iter().all(|&b| b), "{}", report.text);
    assert!(report.later_steps_vi, "{}", report.text);
    assert!(report.pass);
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1s");
}

#[test]
fn criterion_2_reference_optimum() {
    let start = Instant::now();
    let (agents, _) = scenario::two_agent_data();
    let total = Objective::sum(agents.iter().map(|a| a.objective.clone()).collect()).unwrap();
    let feasible = ConstraintSet::Box(
        BoxSet::new(vecn(&[0.5, 0.5]), vecn(&[1.0, 1.0])).unwrap(),
    );
    let reference = centralized_solve(
        &total,
        &feasible,
        20_000,
        &StepSchedule::inv_sqrt(0.5).unwrap(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let err = (reference.x_star[0] - 0.5)
        .abs()
        .max((reference.x_star[1] - 1.0).abs());
    println!(
        "ACCEPTANCE 2 (reference optimum): {} — x* = [{:.6}, {:.6}], error {:.2e}, {:.3}s",
        if err <= 1e-4 { "PASS" } else { "FAIL" },
        reference.x_star[0],
        reference.x_star[1],
        err,
        elapsed.as_secs_f64()
    );
    assert!(err <= 1e-4);
    // corroborating closed-form route: project -(1/8) Q^{-1}(q1+q2) onto the
    // intersection box
    let q = Matrix::new(2, 2, vec![1.2, 0.4, 0.4, 1.8]).unwrap();
    let unconstrained = solve_linear(&q, &vecn(&[8.0 + 2.93, -4.0 - 11.46]))
        .unwrap()
        .scale(-1.0 / 8.0);
    let closed = feasible.project(&unconstrained).unwrap();
    assert!((closed[0] - 0.5).abs() < 1e-12 && (closed[1] - 1.0).abs() < 1e-12);
    assert!(
        norm2(&reference.x_star.sub(&closed).unwrap()) <= 1e-4,
        "both routes must agree"
    );
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5s");
}

#[test]
fn criterion_3_iterate_convergence() {
    let start = Instant::now();
    let built = scenario::build("two_agent_harmonic", &BuildParams::default()).unwrap();
    let trace = run(&built.config).unwrap();
    let elapsed = start.elapsed();
    let at_100 = trace.row_at(100).expect("k=100 logged").dist_to_opt;
    let at_1e4 = trace.row_at(10_000).expect("k=10^4 logged").dist_to_opt;
    let pass = at_1e4 < 0.2 && at_1e4 < at_100;
    println!(
        "ACCEPTANCE 3 (iterate convergence): {} — dist(10^2) = {:.6}, dist(10^4) = {:.6}, {:.3}s",
        if pass { "PASS" } else { "FAIL" },
        at_100,
        at_1e4,
        elapsed.as_secs_f64()
    );
    assert!(at_1e4 < 0.2);
    assert!(at_1e4 < at_100);
    let rel = (at_1e4 - TWO_AGENT_HARMONIC_DIST_1E4).abs() / TWO_AGENT_HARMONIC_DIST_1E4;
    assert!(
        rel <= 1e-9,
        "regression against pinned baseline: got {at_1e4}, pinned {TWO_AGENT_HARMONIC_DIST_1E4}"
    );
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10s");
}

#[test]
fn criterion_4_rate_envelope() {
    let start = Instant::now();
    let trace = robust_desk_trace();
    let (first, last) = rate_envelope(trace, 100).unwrap();
    let elapsed = start.elapsed();
    let pass = last <= 1.1 * first;
    println!(
        "ACCEPTANCE 4 (rate envelope): {} — gap(k) sqrt(k)/ln(k): first-decade max {:.5}, \
         last-decade max {:.5}, ratio {:.3}, {:.3}s",
        if pass { "PASS" } else { "FAIL" },
        first,
        last,
        last / first,
        elapsed.as_secs_f64()
    );
    assert!(first.is_finite() && last.is_finite() && first > 0.0);
    assert!(pass, "envelope grew: first {first}, last {last}");
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60s");
}

#[test]
fn criterion_5_consensus_rate() {
    let trace = robust_desk_trace();
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for row in &trace.rows {
        if row.k < 100 {
            continue;
        }
        let k = row.k as f64;
        let bound = CONSENSUS_RATE_C * k.ln() / k.sqrt();
        worst = worst.max(row.consensus_residual * k.sqrt() / k.ln());
        if row.consensus_residual > bound {
            violations += 1;
        }
    }
    let pass = violations == 0;
    println!(
        "ACCEPTANCE 5 (consensus rate): {} — max consensus*sqrt(k)/ln(k) = {:.3e} \
         against pinned C = {:.1e}, violations {}",
        if pass { "PASS" } else { "FAIL" },
        worst,
        CONSENSUS_RATE_C,
        violations
    );
    assert!(pass, "consensus exceeded C ln(k)/sqrt(k) at {violations} logged rows");
}

#[test]
fn criterion_6_baseline_ordering() {
    let start = Instant::now();
    let built = scenario::build("l2_l1_desk", &BuildParams::default()).unwrap();
    let m = built.config.agents.len() as f64;
    let mut algo1_config = built.config.clone();
    algo1_config.engine = EngineKind::Algo1;
    let algo1_trace = run(&algo1_config).unwrap();
    let mut prox_config = built.config.clone();
    prox_config.engine = EngineKind::ProxNoAvg;
    let prox_trace = run(&prox_config).unwrap();
    let elapsed = start.elapsed();

    let mut checked = 0;
    for row in algo1_trace.rows.iter().filter(|r| r.k >= 100) {
        let other = prox_trace.row_at(row.k).expect("same log stride");
        let avg_a = row.dist_to_opt / m;
        let avg_p = other.dist_to_opt / m;
        assert!(
            avg_a <= 1.05 * avg_p,
            "averaging engine behind at k={}: {avg_a} vs {avg_p}",
            row.k
        );
        checked += 1;
    }
    let final_a = algo1_trace.rows.last().unwrap().dist_to_opt / m;
    let final_p = prox_trace.rows.last().unwrap().dist_to_opt / m;
    let pass = final_a < final_p;
    println!(
        "ACCEPTANCE 6 (baseline ordering): {} — avg dist at final k: averaging {:.6} vs \
         proximal {:.6}, {} logged points checked, {:.3}s",
        if pass { "PASS" } else { "FAIL" },
        final_a,
        final_p,
        checked,
        elapsed.as_secs_f64()
    );
    assert!(checked >= 5);
    assert!(pass, "final: {final_a} vs {final_p}");
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}, budget 120s");
}

#[test]
fn criterion_7_property_suites() {
    let start = Instant::now();

    // mixing properties on every packaged scenario
    for info in scenario::SCENARIOS {
        let assembled = scenario::assemble(info.name, &BuildParams::default()).unwrap();
        for matrix in assembled.schedule.matrices() {
            let report = mascope_core::validate_mixing(matrix, matrix.eta_bound());
            assert!(report.all_pass(), "{}: {report:?}", info.name);
        }
        // independent window-scan oracle for the certified window
        let m = assembled.schedule.agent_count();
        let period = assembled.schedule.period();
        let certified = assembled.schedule.certified_window();
        let mut oracle = None;
        'window: for t in 1..=period {
            for phase in 0..period {
                let mut adj = vec![vec![]; m];
                for offset in 0..t {
                    for (a, b) in assembled.schedule.matrices()[(phase + offset) % period]
                        .support_edges()
                    {
                        adj[a].push(b);
                        adj[b].push(a);
                    }
                }
                let mut seen = vec![false; m];
                let mut stack = vec![0];
                seen[0] = true;
                let mut count = 1;
                while let Some(u) = stack.pop() {
                    for &v in &adj[u] {
                        if !seen[v] {
                            seen[v] = true;
                            count += 1;
                            stack.push(v);
                        }
                    }
                }
                if count != m {
                    continue 'window;
                }
            }
            oracle = Some(t);
            break;
        }
        assert_eq!(oracle, Some(certified), "{}", info.name);
    }
    println!("  mixing + schedule connectivity on all packaged scenarios: ok");

    // projection properties
    let sets = [
        ConstraintSet::Box(BoxSet::new(vecn(&[-1.0, -1.5]), vecn(&[2.0, 0.5])).unwrap()),
        ConstraintSet::Ball(mascope_core::BallSet::new(Vector::zeros(2), 3.0).unwrap()),
    ];
    let mut rng = SplitMix64::new(7001);
    for set in &sets {
        for _ in 0..1000 {
            let x = vecn(&[rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)]);
            let y = vecn(&[rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)]);
            let px = set.project(&x).unwrap();
            let py = set.project(&y).unwrap();
            // idempotence
            let pxx = set.project(&px).unwrap();
            assert!(norm2(&pxx.sub(&px).unwrap()) <= 1e-15);
            // non-expansiveness
            assert!(
                norm2(&px.sub(&py).unwrap())
                    <= norm2(&x.sub(&y).unwrap()) * (1.0 + 1e-12)
            );
            // projection variational inequality, sampled
            let gap = x.sub(&px).unwrap();
            let bbox = set.bounding_box();
            for _ in 0..5 {
                let xi = set
                    .project(&vecn(&[
                        rng.uniform(bbox.lower()[0], bbox.upper()[0]),
                        rng.uniform(bbox.lower()[1], bbox.upper()[1]),
                    ]))
                    .unwrap();
                assert!(dot(&gap, &xi.sub(&px).unwrap()).unwrap() <= 1e-9);
            }
        }
    }
    println!("  projection idempotence, non-expansiveness, variational inequality: ok");

    // box optimality certificates against 2^n vertex enumeration, n <= 10
    let mut rng = SplitMix64::new(7002);
    for n in 1..=10usize {
        for _ in 0..20 {
            let lo: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 0.0)).collect();
            let hi: Vec<f64> = (0..n).map(|_| rng.uniform(0.1, 2.0)).collect();
            let b = BoxSet::new(vecn(&lo), vecn(&hi)).unwrap();
            let x: Vec<f64> = (0..n)
                .map(|j| match rng.next_index(3) {
                    0 => lo[j],
                    1 => hi[j],
                    _ => 0.5 * (lo[j] + hi[j]),
                })
                .collect();
            let g: Vec<f64> = (0..n)
                .map(|_| match rng.next_index(3) {
                    0 => rng.uniform(0.1, 3.0),
                    1 => -rng.uniform(0.1, 3.0),
                    _ => 0.0,
                })
                .collect();
            let fast = box_vi_holds(&vecn(&g), &vecn(&x), &b, 0.0).unwrap();
            let mut brute = true;
            for mask in 0..(1u32 << n) {
                let mut inner = 0.0;
                for j in 0..n {
                    let v = if mask & (1 << j) == 0 { lo[j] } else { hi[j] };
                    inner += g[j] * (v - x[j]);
                }
                if inner < 0.0 {
                    brute = false;
                    break;
                }
            }
            assert_eq!(fast, brute);
        }
    }
    println!("  box certificate vs vertex enumeration (n <= 10): ok");

    // subgradient inequality, 1000 pairs per oracle kind
    let q = Matrix::new(2, 2, vec![1.2, 0.4, 0.4, 1.8]).unwrap();
    let oracles: Vec<Objective> = vec![
        Objective::Quadratic(
            mascope_core::QuadraticFn::new(q, vecn(&[8.0, -4.0]), 20.0).unwrap(),
        ),
        Objective::AbsResidual(
            mascope_core::AbsResidualFn::new(vecn(&[0.7, -0.3]), 0.4).unwrap(),
        ),
        Objective::SquaredResidual(
            mascope_core::SquaredResidualFn::new(vecn(&[0.5, 0.9]), -0.2).unwrap(),
        ),
        Objective::L1Reg(mascope_core::L1RegFn::new(0.8).unwrap()),
    ];
    let mut rng = SplitMix64::new(7003);
    for f in &oracles {
        for _ in 0..1000 {
            let x = vecn(&[rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)]);
            let y = vecn(&[rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)]);
            let linear = dot(&f.subgrad(&x).unwrap(), &y.sub(&x).unwrap()).unwrap();
            assert!(f.value(&y).unwrap() >= f.value(&x).unwrap() + linear - 1e-9);
        }
    }
    println!("  subgradient inequality on 1000 pairs per oracle: ok");

    // running-average recursion vs direct convex combination over 1000 steps
    let sched = StepSchedule::inv_sqrt(1.0).unwrap();
    let mut rng = SplitMix64::new(7004);
    let mut xhat = Vector::zeros(1);
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..1000 {
        let x = vecn(&[rng.uniform(-1.0, 1.0)]);
        xhat = running_average_update(&xhat, &x, &sched, k).unwrap();
        let c = sched.step_size(k + 1);
        num += c * x[0];
        den += c;
        assert!((xhat[0] - num / den).abs() <= 1e-10);
    }
    println!("  running-average recursion vs direct combination: ok");

    // local-update argmin: closed form == projection form, and both match a
    // 1e-3 grid oracle on a 2-D instance
    let set = ConstraintSet::Box(BoxSet::new(vecn(&[-1.0, -1.0]), vecn(&[1.0, 1.0])).unwrap());
    let z = vecn(&[0.9, -0.4]);
    let d = vecn(&[2.0, -1.5]);
    let c = 0.6;
    let closed = mascope_core::algo1_argmin_form(&d, &z, c, &set).unwrap();
    let projected = set.project(&z.sub(&d.scale(c)).unwrap()).unwrap();
    assert_eq!(closed, projected);
    let mut best = (f64::INFINITY, [0.0f64, 0.0]);
    let steps = 2000;
    for i in 0..=steps {
        for j in 0..=steps {
            let x = [
                -1.0 + 2.0 * i as f64 / steps as f64,
                -1.0 + 2.0 * j as f64 / steps as f64,
            ];
            let diff = [z[0] - x[0], z[1] - x[1]];
            let v = d[0] * x[0] + d[1] * x[1]
                + (diff[0] * diff[0] + diff[1] * diff[1]) / (2.0 * c);
            if v < best.0 {
                best = (v, x);
            }
        }
    }
    assert!((closed[0] - best.1[0]).abs() <= 1.5e-3);
    assert!((closed[1] - best.1[1]).abs() <= 1.5e-3);
    println!("  local-update argmin vs projection vs grid oracle: ok");

    // square-summable displacement tail on the harmonic-step scenarios
    for name in ["two_agent_harmonic", "l2_l1_desk"] {
        let built = scenario::build(name, &BuildParams::default()).unwrap();
        let mut engine = Engine::new(&built.config).unwrap();
        let iters = built.config.iters;
        let mut total = 0.0;
        let mut at_tail_start = 0.0;
        for k in 0..iters {
            let outcome = engine.step().unwrap();
            total += outcome.error_norms.iter().map(|e| e * e).sum::<f64>();
            if k + 1 == iters / 10 {
                at_tail_start = total;
            }
        }
        let tail = total - at_tail_start;
        assert!(
            tail <= 0.01 * total,
            "{name}: last-decade displacement energy {tail} vs total {total}"
        );
    }
    println!("  square-summable displacement tail on harmonic traces: ok");

    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE 7 (assumption/property suites): PASS — {:.3}s",
        elapsed.as_secs_f64()
    );
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10s");
}

#[test]
fn criterion_8_determinism() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    for info in scenario::SCENARIOS {
        let params = BuildParams {
            iters: Some(info.default_iters.min(400)),
            ..BuildParams::default()
        };
        let dir_a = tmp.path().join(format!("{}_a", info.name));
        let dir_b = tmp.path().join(format!("{}_b", info.name));
        commands::run_scenario(info.name, &params, &dir_a).unwrap();
        commands::run_scenario(info.name, &params, &dir_b).unwrap();
        for file in ["trace.csv", "trace.svg", "meta.txt"] {
            let a = std::fs::read(dir_a.join(info.name).join(file)).unwrap();
            let b = std::fs::read(dir_b.join(info.name).join(file)).unwrap();
            assert_eq!(a, b, "{}: {file} differs between identical runs", info.name);
        }
    }
    println!(
        "ACCEPTANCE 8 (determinism): PASS — byte-identical CSV/SVG/meta for all {} scenarios, {:.3}s",
        scenario::SCENARIOS.len(),
        start.elapsed().as_secs_f64()
    );
}
