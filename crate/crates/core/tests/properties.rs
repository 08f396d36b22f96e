mod common;

use proptest::prelude::*;
use rug::ops::Pow;
use rug::Rational;
use vtd::harness::{builtin_cases, CaseConfig, ConvergenceTable, Norm, NormColumn, TableFormat};
use vtd::nodes::{NodeKind, NodeSet, QuadRule};
use vtd::operators::{InterpCascade, JOperator};
use vtd::problem::{
    manufactured_problem, nonlinear_test_problem, total_derivative, Jet, OdeProblem, PolynomialCurve,
};
use vtd::{BigScalar, Precision, VtdError};

use common::{max_deviation, monomial, Operators};

fn prec() -> Precision {
    Precision::default()
}

fn node_kind() -> impl Strategy<Value = NodeKind> {
    prop_oneof![
        (1usize..=7).prop_map(NodeKind::Gauss),
        (1usize..=7).prop_map(NodeKind::RadauLeft),
        (2usize..=7).prop_map(NodeKind::Lobatto),
        explicit_nodes(1..=7),
    ]
}

fn explicit_nodes(count: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = NodeKind> {
    count
        .prop_flat_map(|n| proptest::sample::subsequence((-30i64..=30).collect::<Vec<_>>(), n))
        .prop_map(|ks| NodeKind::Explicit(ks.into_iter().map(|k| Rational::from((k, 30))).collect()))
}

fn exact_integral(p: Precision, degree: usize) -> BigScalar {
    if degree % 2 == 1 {
        p.zero()
    } else {
        p.ratio(2, degree as i64 + 1)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn interpolatory_rules_integrate_their_interpolation_space(kind in explicit_nodes(1..=8)) {
        let p = prec();
        let nodes = NodeSet::new(p, kind).unwrap();
        let n = nodes.len();
        let rule = QuadRule::new(p, nodes).unwrap();
        for d in 0..n {
            let err = (rule.integrate(p, |x| x.clone().pow(d as u32)) - exact_integral(p, d)).abs();
            prop_assert!(err < p.pow2(-440), "degree {} of {} nodes", d, n);
        }
    }

    #[test]
    fn j_is_linear(case in 0usize..12, a in -50i64..50, b in -50i64..50, c in 1i64..8) {
        let ops = Operators::of(&builtin_cases()[case]);
        let p = ops.prec;
        let (a, b, c) = (p.ratio(a, 7), p.ratio(b, 11), p.ratio(c, 4));
        let v = |t: &BigScalar, i: usize| (t.clone() * &c).exp() * c.clone().pow(i as u32);
        let w = |t: &BigScalar, i: usize| monomial(p, 5, t, i) - monomial(p, 2, t, i);
        let combo = |t: &BigScalar, i: usize| v(t, i) * &a + w(t, i) * &b;
        let lhs = ops.j.apply(&combo).unwrap();
        let jv = ops.j.apply(&v).unwrap();
        let jw = ops.j.apply(&w).unwrap();
        let rhs_at = |t: &BigScalar| jv.eval(p, t)[0].clone() * &a + jw.eval(p, t)[0].clone() * &b;
        prop_assert!(max_deviation(p, &lhs, rhs_at) < 1e-140);
    }

    #[test]
    fn j_preserves_the_guaranteed_degree(
        rule in node_kind(),
        stage in node_kind(),
        (r, k) in (1usize..=6).prop_flat_map(|r| (Just(r), 0..=r)),
    ) {
        let p = prec();
        let rule = QuadRule::new(p, NodeSet::new(p, rule).unwrap()).unwrap();
        let cascade = InterpCascade::single(NodeSet::new(p, stage).unwrap());
        let j = match JOperator::new(p, &rule, &cascade, r, k) {
            Ok(j) => j,
            Err(VtdError::AssumptionViolated { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        // ill-conditioned node sets lose digits; keep a margin proportional to cond(J)
        let tol = 1e-120 * j.condition().to_f64().max(1.0);
        let bound = (cascade.reproduction_degree().unwrap() + 1).min(r);
        for d in 0..=bound {
            let v = |t: &BigScalar, i: usize| monomial(p, d, t, i);
            let dev = max_deviation(p, &j.apply(&v).unwrap(), |t| v(t, 0));
            prop_assert!(dev < tol, "degree {} deviates by {}", d, dev);
        }
    }

    #[test]
    fn manufactured_total_derivatives_follow_the_curve(
        coeffs in proptest::collection::vec(-20i64..20, 2..7),
        lambda in -3i64..3,
        t in -8i64..8,
    ) {
        let p = prec();
        let curve = PolynomialCurve {
            coeffs: vec![coeffs.iter().map(|&c| Rational::from((c, 3))).collect()],
        };
        let problem = manufactured_problem(curve.clone(), Rational::from(lambda), Rational::from(0), Rational::from(1));
        let t = p.ratio(t, 4);
        let jet = exact_jet(&problem, &t, curve.degree() + 2);
        for i in 0..=curve.degree() {
            let got = total_derivative(p, problem.rhs.as_ref(), i, &jet).unwrap();
            let want = curve.eval(p, &t, i + 1);
            prop_assert!((got[0].clone() - &want[0]).abs() < p.pow2(-450));
        }
    }

    #[test]
    fn case_configs_survive_toml(case in 0usize..12, bits in 128u32..1024, steps in proptest::collection::btree_set(1usize..4096, 1..6)) {
        let cfg = CaseConfig {
            bits,
            steps: steps.into_iter().collect(),
            ..builtin_cases()[case].clone()
        };
        prop_assert_eq!(CaseConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn csv_tables_round_trip(errors in proptest::collection::vec(1e-30f64..1.0, 2..7)) {
        let steps: Vec<usize> = (0..errors.len()).map(|j| 8 << j).collect();
        let table = ConvergenceTable {
            name: "random".into(),
            steps,
            columns: vec![
                NormColumn::new(Norm::Linf, errors.iter().copied().map(Some).collect(), Some(4)),
                NormColumn::new(Norm::MeshLinf, errors.iter().map(|e| Some(e * 0.5)).collect(), None),
            ],
        };
        let parsed = ConvergenceTable::parse_csv(&table.emit(TableFormat::Csv, false)).unwrap();
        prop_assert_eq!(&parsed.steps, &table.steps);
        for norm in [Norm::Linf, Norm::MeshLinf] {
            prop_assert_eq!(&parsed.column(norm).unwrap().errors, &table.column(norm).unwrap().errors);
        }
    }
}

/// Jet of the exact solution at `t`.
fn exact_jet(problem: &OdeProblem, t: &BigScalar, order: usize) -> Jet {
    let p = prec();
    Jet {
        t: t.clone(),
        values: (0..=order).map(|j| problem.exact(p, t, j).unwrap()).collect(),
    }
}

#[test]
fn total_derivatives_along_the_exact_solution() {
    let p = prec();
    let problem = nonlinear_test_problem();
    for t in ["0", "0.3", "1.7", "4.25", "11"] {
        let t = p.f64(t.parse().unwrap());
        let jet = exact_jet(&problem, &t, 7);
        for i in 0..=6 {
            let got = total_derivative(p, problem.rhs.as_ref(), i, &jet).unwrap();
            let want = problem.exact(p, &t, i + 1).unwrap();
            for (g, w) in got.iter().zip(&want) {
                assert!((g.clone() - w).abs() < p.pow2(-440), "i={i}");
            }
        }
    }
}

#[test]
fn total_derivatives_match_central_differences() {
    // d/dt of the (i-1)-th total derivative along the exact trajectory
    let p = prec();
    let problem = nonlinear_test_problem();
    let h = p.pow2(-60);
    for t in ["0.2", "2.9", "7.5"] {
        let t = p.f64(t.parse().unwrap());
        for i in 1..=6 {
            let at = |s: &BigScalar| {
                total_derivative(p, problem.rhs.as_ref(), i - 1, &exact_jet(&problem, s, i)).unwrap()
            };
            let plus = at(&(t.clone() + &h));
            let minus = at(&(t.clone() - &h));
            let got = total_derivative(p, problem.rhs.as_ref(), i, &exact_jet(&problem, &t, i + 1)).unwrap();
            for c in 0..2 {
                let fd = (plus[c].clone() - &minus[c]) / (h.clone() * 2u32);
                let scale = got[c].clone().abs().to_f64().max(1.0);
                assert!((fd - &got[c]).abs().to_f64() < 1e-30 * scale, "t={t}, i={i}");
            }
        }
    }
}

#[test]
fn derivatives_beyond_the_supplied_order_are_refused() {
    let p = prec();
    let problem = nonlinear_test_problem();
    let jet = exact_jet(&problem, &p.zero(), 9);
    let err = total_derivative(p, problem.rhs.as_ref(), 7, &jet).unwrap_err();
    assert!(matches!(err, VtdError::TotalDerivativeUnavailable { requested: 7, .. }));
}
