//! One pass/fail line per acceptance criterion. Exits non-zero if any fail.

mod common;

use std::time::Instant;

use proptest::prelude::any;

use tunespace::bench::{avg_constraint_evaluations, brute_force_solve, run_benchmark, BenchConfig, ProblemDoc, SuiteSpace};
use tunespace::compiler::compile_constraints;
use tunespace::solver::solve_with;
use tunespace::synth::{generate_space, SuiteGrid, SyntheticSpec};
use tunespace::Domain;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn evaluation_counts() -> Outcome {
    let rows = [
        ("Dedispersion", 22272, 11130, 3, 33414),
        ("ExpDist", 9732096, 294000, 4, 23889240),
        ("GEMM", 663552, 116928, 8, 2576736),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, cartesian, valid, constraints, expected) in rows {
        let got = avg_constraint_evaluations(cartesian, valid, constraints).unwrap();
        pass &= got.as_integer() == Some(expected);
        parts.push(format!("{name}={got}"));
    }
    outcome(pass, parts.join(" "))
}

fn chained_comparison_pipeline() -> Outcome {
    let x = Domain::ints([1, 2, 4, 8, 16].into_iter().chain((1..=32).map(|i| 32 * i))).unwrap();
    let y = Domain::ints((0..6).map(|i| 1i64 << i)).unwrap();
    let params = vec![("block_size_x".to_string(), x.clone()), ("block_size_y".to_string(), y)];
    let compiled = compile_constraints(&["2 <= block_size_y <= 32 <= block_size_x * block_size_y <= 1024"], &params).unwrap();
    let mut kinds: Vec<String> = compiled.constraints.iter().map(|c| c.to_string()).collect();
    kinds.sort();
    let expected = [
        "MaxProduct(1024, [block_size_x, block_size_y])",
        "MinProduct(32, [block_size_x, block_size_y])",
    ];
    let y_pruned = compiled.domains[1].1 == Domain::ints([2, 4, 8, 16, 32]).unwrap();
    let x_kept = compiled.domains[0].1 == x;
    outcome(
        kinds == expected && y_pruned && x_kept,
        format!("{kinds:?}, y = {:?}", compiled.domains[1].1.values().iter().map(|v| v.to_string()).collect::<Vec<_>>()),
    )
}

fn oracle_equivalence() -> Outcome {
    let sizes = [1_000u64, 10_000, 90_000];
    let mut checked = 0;
    let mut failures = Vec::new();
    let start = Instant::now();
    for i in 0..120u64 {
        let dims = 2 + (i % 4) as usize;
        let constraints = 1 + ((i / 4) % 6) as usize;
        let size = sizes[(i / 24) as usize % sizes.len()];
        let spec = SyntheticSpec {
            size,
            dims,
            constraints,
            seed: 1000 + i,
        };
        let problem = generate_space(&spec).unwrap();
        assert!(problem.cartesian_size() <= 100_000);
        let reference = brute_force_solve(&problem).unwrap();
        for options in TOGGLES {
            let got = solve_with(&problem, options).unwrap();
            if !got.same_set(&reference) {
                failures.push(format!("{} {options:?}", spec.id()));
            }
        }
        checked += 1;
    }
    outcome(
        failures.is_empty(),
        format!(
            "{checked} problems x 4 toggles, {} mismatches, {:.1}s {}",
            failures.len(),
            start.elapsed().as_secs_f64(),
            failures.first().cloned().unwrap_or_default()
        ),
    )
}

fn property_suites() -> Outcome {
    let results = [
        ("round-trip", run_property(500, arb_expr(), check_round_trip)),
        ("compiler", run_property(300, arb_small_problem(), check_compiler_equivalence)),
        ("preprocessing", run_property(300, arb_small_problem(), check_preprocessing_soundness)),
        ("neighbors", run_property(100, arb_small_problem(), check_neighbors)),
        ("sampling", {
            let d = sampling_deviation(10_000);
            if d <= 0.05 {
                Ok(())
            } else {
                Err(format!("max deviation {d}"))
            }
        }),
        ("determinism", run_property(10, any::<u64>(), check_determinism)),
    ];
    let failed: Vec<String> = results
        .iter()
        .filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}")))
        .collect();
    let names: Vec<&str> = results.iter().map(|(n, _)| *n).collect();
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            names.join(", ")
        } else {
            failed.join("; ")
        },
    )
}

fn main() {
    let mut lines: Vec<(&str, Outcome)> = vec![
        ("1 evaluation counts", evaluation_counts()),
        ("2 chained-comparison pipeline", chained_comparison_pipeline()),
        ("3 oracle equivalence", oracle_equivalence()),
    ];

    let suite: Vec<SuiteSpace> = SuiteGrid::default()
        .specs(2024)
        .iter()
        .map(|spec| SuiteSpace {
            id: spec.id(),
            doc: ProblemDoc::from_problem(&generate_space(spec).unwrap()),
        })
        .collect();
    let config = BenchConfig {
        repetitions: 3,
        ..BenchConfig::default()
    };
    let started = Instant::now();
    let report = run_benchmark(&suite, &config);
    let elapsed = started.elapsed().as_secs_f64();
    match report {
        Ok(report) => {
            let a = &report.aggregates;
            let speedup = a.speedup.unwrap_or(0.0);
            lines.push((
                "4 suite speedup >= 10x",
                outcome(
                    speedup >= 10.0,
                    format!(
                        "{speedup:.1}x (optimized {:.3}s, brute force {:.3}s, {} spaces validated, bench {elapsed:.0}s)",
                        a.optimized_seconds.unwrap_or(0.0),
                        a.bruteforce_seconds.unwrap_or(0.0),
                        a.validated
                    ),
                ),
            ));
            let small: Vec<_> = report
                .spaces
                .iter()
                .filter(|r| r.method == tunespace::bench::Method::Optimized && r.cartesian_size <= 1_000_000)
                .collect();
            let slowest = small.iter().max_by(|x, y| x.seconds.total_cmp(&y.seconds));
            let max = slowest.map_or(0.0, |r| r.seconds);
            lines.push((
                "5 every space < 2s",
                outcome(
                    !small.is_empty() && max < 2.0,
                    format!(
                        "{} spaces with cartesian <= 1e6, slowest {} at {max:.3}s",
                        small.len(),
                        slowest.map_or("-", |r| r.space.as_str())
                    ),
                ),
            ));
            let slope = a.loglog_slope.unwrap_or(f64::INFINITY);
            lines.push(("6 log-log slope <= 1.0", outcome(slope <= 1.0, format!("slope {slope:.3}"))));
        }
        Err(e) => {
            for name in ["4 suite speedup >= 10x", "5 every space < 2s", "6 log-log slope <= 1.0"] {
                lines.push((name, outcome(false, format!("benchmark failed: {e}"))));
            }
        }
    }
    lines.push(("7 property suites", property_suites()));

    let mut all = true;
    for (name, o) in &lines {
        all &= o.pass;
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
