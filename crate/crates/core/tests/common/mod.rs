#![allow(dead_code)]

use std::collections::HashMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use tunespace::bench::{brute_force_from_sources, brute_force_solve, ORACLE_LIMIT};
use tunespace::compiler::CompileError;
use tunespace::expr::{evaluate, parse_expression, BinaryOp, Expr, UnaryOp};
use tunespace::solver::{preprocess, solve_with, Problem, ProblemError, SolverOptions};
use tunespace::space::{build_search_space, Neighborhood};
use tunespace::value::{ArithOp, CmpOp};
use tunespace::{Configuration, Domain, ParamValue};

pub const TOGGLES: [SolverOptions; 4] = [
    SolverOptions {
        preprocess: true,
        partial_checks: true,
    },
    SolverOptions {
        preprocess: true,
        partial_checks: false,
    },
    SolverOptions {
        preprocess: false,
        partial_checks: true,
    },
    SolverOptions {
        preprocess: false,
        partial_checks: false,
    },
];

/// Runs `test` on `cases` inputs from a fixed-seed generator.
pub fn run_property<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let config = Config {
        cases,
        failure_persistence: None,
        max_global_rejects: cases * 20,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn arb_literal() -> impl Strategy<Value = ParamValue> {
    prop_oneof![
        (-60i64..60).prop_map(ParamValue::Int),
        (-400i64..400).prop_map(|k| ParamValue::Real(k as f64 / 8.0)),
        any::<bool>().prop_map(ParamValue::Bool),
        "[a-z' \\\\]{0,4}".prop_map(ParamValue::text),
    ]
}

fn arb_cmp() -> impl Strategy<Value = CmpOp> {
    prop_oneof![
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Gt),
        Just(CmpOp::Ge),
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
    ]
}

fn arb_binary() -> impl Strategy<Value = BinaryOp> {
    prop_oneof![
        Just(BinaryOp::Arith(ArithOp::Add)),
        Just(BinaryOp::Arith(ArithOp::Sub)),
        Just(BinaryOp::Arith(ArithOp::Mul)),
        Just(BinaryOp::Arith(ArithOp::Div)),
        Just(BinaryOp::Arith(ArithOp::FloorDiv)),
        Just(BinaryOp::Arith(ArithOp::Mod)),
        Just(BinaryOp::Arith(ArithOp::Pow)),
        Just(BinaryOp::And),
        Just(BinaryOp::Or),
    ]
}

/// Arbitrary syntax trees over parameters `a`, `b`, `c`.
pub fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        arb_literal().prop_map(Expr::Literal),
        prop::sample::select(vec!["a", "b", "c"]).prop_map(Expr::param),
    ];
    leaf.prop_recursive(5, 40, 3, |inner| {
        prop_oneof![
            (prop_oneof![Just(UnaryOp::Neg), Just(UnaryOp::Not)], inner.clone())
                .prop_map(|(op, e)| Expr::unary(op, e)),
            (arb_binary(), inner.clone(), inner.clone()).prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (prop::collection::vec(inner, 2..=4), prop::collection::vec(arb_cmp(), 3)).prop_map(
                |(operands, ops)| {
                    let n = operands.len() - 1;
                    Expr::Compare {
                        operands,
                        ops: ops[..n].to_vec(),
                    }
                }
            ),
        ]
    })
}

pub fn check_round_trip(e: Expr) -> Result<(), TestCaseError> {
    let text = e.to_string();
    let parsed = parse_expression(&text).map_err(|err| TestCaseError::fail(format!("`{text}`: {err}")))?;
    prop_assert_eq!(&parsed, &e, "text `{}`", text);
    prop_assert_eq!(parsed.to_string(), text);
    Ok(())
}

/// A small integer problem over up to three parameters with at most 256
/// Cartesian combinations and one to three templated constraints.
#[derive(Debug, Clone)]
pub struct SmallProblem {
    pub params: Vec<(String, Vec<i64>)>,
    pub constraints: Vec<String>,
}

impl SmallProblem {
    pub fn domains(&self) -> Vec<(String, Domain)> {
        self.params
            .iter()
            .map(|(n, v)| (n.clone(), Domain::ints(v.iter().copied()).unwrap()))
            .collect()
    }

    pub fn problem(&self) -> Problem {
        Problem::new(self.domains(), &self.constraints).unwrap()
    }

    /// Compiles, unless some conjunct is constant false; that is only
    /// accepted when the oracle agrees there are no solutions.
    pub fn try_problem(&self) -> Result<Option<Problem>, TestCaseError> {
        match Problem::new(self.domains(), &self.constraints) {
            Ok(p) => Ok(Some(p)),
            Err(ProblemError::Compile(CompileError::Unsatisfiable(_))) => {
                let reference = brute_force_from_sources(&self.domains(), &self.constraints, ORACLE_LIMIT)
                    .map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert!(reference.is_empty(), "{:?} rejected as unsatisfiable", self.constraints);
                Ok(None)
            }
            Err(e) => Err(TestCaseError::fail(format!("{:?}: {e}", self.constraints))),
        }
    }
}

const TEMPLATES: &[&str] = &[
    "a * b <= {0}",
    "a * b >= {0}",
    "a + b <= {0}",
    "a + b >= {0}",
    "a + b == {0}",
    "a * b == {0}",
    "{0} <= a * b <= {1}",
    "{0} <= b <= {1} <= a * b",
    "a - b > {0}",
    "a % 3 == {2}",
    "a // 2 + b >= {0}",
    "not a < {0} or b > {1}",
    "a <= b <= c",
    "a * b * c <= {0}",
    "a + b + c >= {0}",
    "a != {0} and b > {1}",
    "a ** 2 <= {0}",
    "a / 2 <= {0}",
    "2 * a + b >= {0}",
    "a * b * c == {0}",
    "b * c < {0}",
    "(a + c > {0}) == True",
    "a + c > {0} == True",
    "c * c <= {1}",
];

fn arb_domain() -> impl Strategy<Value = Vec<i64>> {
    prop_oneof![
        prop::sample::subsequence((1..=16).collect::<Vec<i64>>(), 1..=6),
        prop::sample::subsequence((-4..=6).collect::<Vec<i64>>(), 1..=6),
        prop::sample::subsequence(vec![1, 2, 4, 8, 16, 32, 64], 1..=6),
    ]
    .prop_shuffle()
}

pub fn arb_small_problem() -> impl Strategy<Value = SmallProblem> {
    (
        prop::collection::vec(arb_domain(), 3),
        prop::collection::vec(
            (prop::sample::select(TEMPLATES), -8i64..70, -8i64..70, 0i64..3),
            1..=3,
        ),
    )
        .prop_filter("at most 256 combinations", |(doms, _)| {
            doms.iter().map(Vec::len).product::<usize>() <= 256
        })
        .prop_map(|(doms, cons)| SmallProblem {
            params: ["a", "b", "c"].iter().map(|n| n.to_string()).zip(doms).collect(),
            constraints: cons
                .into_iter()
                .map(|(t, k0, k1, k2)| {
                    t.replace("{0}", &k0.to_string())
                        .replace("{1}", &k1.to_string())
                        .replace("{2}", &k2.to_string())
                })
                .collect(),
        })
}

/// True when every constraint evaluates without error on every combination.
pub fn error_free(p: &SmallProblem) -> bool {
    let exprs: Vec<Expr> = p.constraints.iter().map(|c| parse_expression(c).unwrap()).collect();
    let mut env: HashMap<&str, ParamValue> = HashMap::new();
    let (a, b, c) = (&p.params[0].1, &p.params[1].1, &p.params[2].1);
    for &x in a {
        for &y in b {
            for &z in c {
                env.insert("a", ParamValue::Int(x));
                env.insert("b", ParamValue::Int(y));
                env.insert("c", ParamValue::Int(z));
                if exprs.iter().any(|e| !matches!(evaluate(e, &env), Ok(ParamValue::Bool(_)))) {
                    return false;
                }
            }
        }
    }
    true
}

/// The compiled solver agrees with the oracle under every toggle.
pub fn check_compiler_equivalence(p: SmallProblem) -> Result<(), TestCaseError> {
    prop_assume!(error_free(&p));
    let Some(problem) = p.try_problem()? else {
        return Ok(());
    };
    let reference = brute_force_solve(&problem).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for options in TOGGLES {
        let got = solve_with(&problem, options).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(
            got.same_set(&reference),
            "{:?} {:?}: {} vs {} solutions, diff {:?}",
            p.constraints,
            options,
            got.len(),
            reference.len(),
            got.difference_sample(&reference, 5)
        );
    }
    Ok(())
}

/// Pruning never removes a value that occurs in some solution.
pub fn check_preprocessing_soundness(p: SmallProblem) -> Result<(), TestCaseError> {
    prop_assume!(error_free(&p));
    let Some(problem) = p.try_problem()? else {
        return Ok(());
    };
    let pre = preprocess(&problem);
    let reference = brute_force_solve(&problem).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for i in 0..problem.parameters().len() {
        let live = pre.live_domain(i);
        for v in live.values() {
            prop_assert!(problem.live_domain(i).position(v).is_some());
        }
        for s in reference.configurations() {
            prop_assert!(
                live.position(&s.0[i]).is_some(),
                "{:?}: value {} of {} pruned",
                p.constraints,
                s.0[i],
                problem.parameters()[i].name
            );
        }
    }
    Ok(())
}

fn hamming(a: &Configuration, b: &Configuration) -> usize {
    a.0.iter().zip(&b.0).filter(|(x, y)| x != y).count()
}

/// Neighborhoods are symmetric, match their definition, and adjacent-index
/// neighbors are a subset of the widest Hamming neighborhood.
pub fn check_neighbors(p: SmallProblem) -> Result<(), TestCaseError> {
    prop_assume!(error_free(&p));
    let Some(problem) = p.try_problem()? else {
        return Ok(());
    };
    let space = build_search_space(&problem).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let configs: Vec<Configuration> = space.configurations().collect();
    let width = p.params.len();
    for d in 1..=width {
        let lists: Vec<Vec<usize>> = configs
            .iter()
            .map(|c| space.neighbor_indices(c, Neighborhood::Hamming(d)).unwrap())
            .collect();
        for (i, list) in lists.iter().enumerate() {
            let expected: Vec<usize> = (0..configs.len())
                .filter(|&j| (1..=d).contains(&hamming(&configs[i], &configs[j])))
                .collect();
            prop_assert_eq!(list, &expected);
            for &j in list {
                prop_assert!(lists[j].contains(&i), "hamming({}) asymmetric for {} and {}", d, configs[i], configs[j]);
            }
        }
    }
    for c in &configs {
        let adjacent = space.neighbor_indices(c, Neighborhood::AdjacentIndex).unwrap();
        let wide = space.neighbor_indices(c, Neighborhood::Hamming(width)).unwrap();
        prop_assert!(adjacent.iter().all(|i| wide.contains(i)));
        for &j in &adjacent {
            let back = space.neighbor_indices(&configs[j], Neighborhood::AdjacentIndex).unwrap();
            prop_assert!(back.contains(&space.index_of(c).unwrap().unwrap()));
        }
    }
    Ok(())
}

/// Frequencies of single draws from a six-configuration space, one seed per
/// draw. Returns the largest deviation from 1/6.
pub fn sampling_deviation(draws: u64) -> f64 {
    let problem = Problem::new(
        vec![
            ("x".into(), Domain::ints([1, 2, 4]).unwrap()),
            ("y".into(), Domain::ints([1, 2, 4]).unwrap()),
        ],
        &["x * y <= 4"],
    )
    .unwrap();
    let space = build_search_space(&problem).unwrap();
    assert_eq!(space.len(), 6);
    let mut counts = [0u64; 6];
    for seed in 0..draws {
        counts[space.sample_indices(1, seed).unwrap()[0]] += 1;
    }
    counts
        .iter()
        .map(|&c| (c as f64 / draws as f64 - 1.0 / 6.0).abs())
        .fold(0.0, f64::max)
}

/// Same inputs, same bytes: generation, solving, export and sampling.
pub fn check_determinism(seed: u64) -> Result<(), TestCaseError> {
    use tunespace::bench::ProblemDoc;
    use tunespace::space::{export, ExportFormat};
    use tunespace::synth::{generate_space, SyntheticSpec};

    let spec = SyntheticSpec {
        size: 2000,
        dims: 3,
        constraints: 3,
        seed,
    };
    let run = || {
        let problem = generate_space(&spec).unwrap();
        let doc = ProblemDoc::from_problem(&problem).to_json_string();
        let space = build_search_space(&problem).unwrap();
        let exported = serde_json::to_string(&export(&space, ExportFormat::Rows)).unwrap();
        let n = space.len().min(5);
        let sample = format!("{:?}", space.sample(n, seed).unwrap());
        (doc, exported, sample)
    };
    prop_assert_eq!(run(), run());
    Ok(())
}
