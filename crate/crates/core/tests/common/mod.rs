#![allow(dead_code)]

use rug::ops::Pow;
use vtd::harness::{CaseConfig, Norm};
use vtd::nodes::QuadRule;
use vtd::operators::{InterpCascade, JOperator, POperator};
use vtd::poly::RefPolynomial;
use vtd::{BigScalar, Precision};

pub const STEPS: [usize; 6] = [32, 64, 128, 256, 512, 1024];

/// One printed column of a convergence table: errors for `STEPS` and the
/// orders printed next to them (none for the first row).
pub struct ReferenceColumn {
    pub case: &'static str,
    pub norm: Norm,
    pub errors: [f64; 6],
    pub eocs: [f64; 5],
}

const fn col(case: &'static str, norm: Norm, errors: [f64; 6], eocs: [f64; 5]) -> ReferenceColumn {
    ReferenceColumn {
        case,
        norm,
        errors,
        eocs,
    }
}

pub const REFERENCE_CASE1: [ReferenceColumn; 3] = [
    col(
        "case1",
        Norm::Linf,
        [1.648e-03, 1.413e-04, 1.408e-05, 1.615e-06, 1.961e-07, 2.426e-08],
        [3.54, 3.33, 3.12, 3.04, 3.01],
    ),
    col(
        "case1",
        Norm::W1inf,
        [1.126e-02, 1.423e-03, 1.876e-04, 2.369e-05, 2.965e-06, 3.711e-07],
        [2.98, 2.92, 2.99, 3.00, 3.00],
    ),
    col(
        "case1",
        Norm::MeshLinf,
        [9.439e-04, 1.046e-04, 1.264e-05, 1.559e-06, 1.937e-07, 2.415e-08],
        [3.17, 3.05, 3.02, 3.01, 3.00],
    ),
];

pub const REFERENCE_OTHER: [ReferenceColumn; 19] = [
    col(
        "case2a",
        Norm::Linf,
        [8.482e-06, 1.477e-07, 2.398e-09, 3.759e-11, 5.862e-13, 9.160e-15],
        [5.84, 5.95, 6.00, 6.00, 6.00],
    ),
    col(
        "case2a_star",
        Norm::Linf,
        [7.745e-06, 1.500e-07, 3.498e-09, 9.412e-11, 2.775e-12, 8.508e-14],
        [5.69, 5.42, 5.22, 5.08, 5.03],
    ),
    col(
        "case2b",
        Norm::Linf,
        [8.910e-07, 9.394e-09, 1.081e-10, 1.465e-12, 2.175e-14, 3.344e-16],
        [6.57, 6.44, 6.21, 6.07, 6.02],
    ),
    col(
        "case2c",
        Norm::Linf,
        [1.996e-06, 2.792e-08, 4.251e-10, 6.604e-12, 1.034e-13, 1.617e-15],
        [6.16, 6.04, 6.01, 6.00, 6.00],
    ),
    col(
        "case3a",
        Norm::Linf,
        [2.306e-05, 3.786e-07, 7.266e-09, 1.716e-10, 4.688e-12, 1.400e-13],
        [5.93, 5.70, 5.40, 5.19, 5.07],
    ),
    col(
        "case3a",
        Norm::W1inf,
        [3.193e-04, 1.044e-05, 3.411e-07, 1.072e-08, 3.353e-10, 1.048e-11],
        [4.94, 4.94, 4.99, 5.00, 5.00],
    ),
    col(
        "case3b",
        Norm::Linf,
        [1.242e-03, 8.223e-05, 5.037e-06, 3.069e-07, 1.886e-08, 1.168e-09],
        [3.92, 4.03, 4.04, 4.02, 4.01],
    ),
    col(
        "case3b",
        Norm::W1inf,
        [1.717e-02, 2.169e-03, 2.842e-04, 3.581e-05, 4.479e-06, 5.604e-07],
        [2.98, 2.93, 2.99, 3.00, 3.00],
    ),
    col(
        "case3c",
        Norm::Linf,
        [7.603e-07, 6.524e-09, 5.181e-11, 4.068e-13, 3.181e-15, 2.486e-17],
        [6.86, 6.98, 6.99, 7.00, 7.00],
    ),
    col(
        "case3c",
        Norm::W1inf,
        [1.669e-05, 2.870e-07, 4.556e-09, 7.155e-11, 1.119e-12, 1.749e-14],
        [5.86, 5.98, 5.99, 6.00, 6.00],
    ),
    col(
        "case3c",
        Norm::MeshLinf,
        [7.587e-10, 7.087e-13, 6.862e-16, 6.689e-19, 6.529e-22, 6.375e-25],
        [10.06, 10.01, 10.00, 10.00, 10.00],
    ),
    col(
        "case4a",
        Norm::Linf,
        [1.058e-05, 1.717e-07, 2.835e-09, 4.464e-11, 6.981e-13, 1.092e-14],
        [5.94, 5.92, 5.99, 6.00, 6.00],
    ),
    col(
        "case4a",
        Norm::MeshLinf,
        [8.552e-08, 3.348e-10, 1.310e-12, 5.120e-15, 2.005e-17, 7.833e-20],
        [8.00, 8.00, 8.00, 8.00, 8.00],
    ),
    col(
        "case4b",
        Norm::Linf,
        [7.560e-07, 6.529e-09, 5.183e-11, 4.068e-13, 3.181e-15, 2.486e-17],
        [6.86, 6.98, 6.99, 7.00, 7.00],
    ),
    col(
        "case4b",
        Norm::MeshLinf,
        [5.899e-10, 5.610e-13, 5.452e-16, 5.318e-19, 5.192e-22, 5.070e-25],
        [10.04, 10.01, 10.00, 10.00, 10.00],
    ),
    col(
        "case4c",
        Norm::Linf,
        [1.617e-06, 1.387e-08, 1.101e-10, 8.654e-13, 6.759e-15, 5.283e-17],
        [6.86, 6.98, 6.99, 7.00, 7.00],
    ),
    col(
        "case4c",
        Norm::MeshLinf,
        [4.037e-08, 1.654e-10, 6.522e-13, 2.565e-15, 1.002e-17, 3.916e-20],
        [7.93, 7.99, 7.99, 8.00, 8.00],
    ),
    col(
        "case4d",
        Norm::Linf,
        [7.603e-04, 4.955e-05, 3.219e-06, 2.028e-07, 1.268e-08, 7.929e-10],
        [3.94, 3.94, 3.99, 4.00, 4.00],
    ),
    col(
        "case4d",
        Norm::MeshLinf,
        [1.867e-04, 1.132e-05, 7.017e-07, 4.377e-08, 2.735e-09, 1.710e-10],
        [4.04, 4.01, 4.00, 4.00, 4.00],
    ),
];

/// Summary row: observed order at N = 512 and predicted order, per norm
/// (L_inf, W1_inf, l_inf).
pub struct SummaryRow {
    pub case: &'static str,
    pub eoc: [f64; 3],
    pub theo: [i64; 3],
}

const fn row(case: &'static str, eoc: [f64; 3], theo: [i64; 3]) -> SummaryRow {
    SummaryRow { case, eoc, theo }
}

pub const SUMMARY: [SummaryRow; 12] = [
    row("case1", [3.04, 3.00, 3.01], [3, 3, 3]),
    row("case2a", [6.00, 5.00, 6.00], [5, 5, 5]),
    row("case2a_star", [5.08, 5.00, 5.00], [5, 5, 5]),
    row("case2b", [6.07, 6.00, 6.00], [6, 6, 6]),
    row("case2c", [6.00, 5.99, 6.00], [6, 6, 6]),
    row("case3a", [5.19, 5.00, 5.02], [5, 5, 5]),
    row("case3b", [4.02, 3.00, 4.12], [4, 3, 4]),
    row("case3c", [7.00, 6.00, 10.00], [7, 6, 10]),
    row("case4a", [6.00, 5.00, 8.00], [6, 5, 8]),
    row("case4b", [7.00, 6.00, 10.00], [7, 6, 10]),
    row("case4c", [7.00, 6.00, 8.00], [7, 6, 8]),
    row("case4d", [4.00, 3.00, 4.00], [4, 3, 4]),
];

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Rule, cascade, `J` and `P` of a case configuration.
pub struct Operators {
    pub prec: Precision,
    pub r: usize,
    pub k: usize,
    pub rule: QuadRule,
    pub cascade: InterpCascade,
    pub j: JOperator,
    pub p: POperator,
}

impl Operators {
    pub fn of(case: &CaseConfig) -> Self {
        let prec = case.precision().unwrap();
        let rule = QuadRule::parse(prec, &case.integrator).unwrap();
        let cascade = InterpCascade::parse(prec, &case.cascade).unwrap();
        let j = JOperator::new(prec, &rule, &cascade, case.r, case.k).unwrap();
        let p = POperator::new(prec, &rule, &cascade, case.r, case.k).unwrap();
        Self {
            prec,
            r: case.r,
            k: case.k,
            rule,
            cascade,
            j,
            p,
        }
    }
}

/// `d^i/dt^i t^degree`.
pub fn monomial(prec: Precision, degree: usize, t: &BigScalar, i: usize) -> BigScalar {
    if i > degree {
        return prec.zero();
    }
    let falling: u64 = (degree - i + 1..=degree).map(|v| v as u64).product();
    prec.int(falling as i64) * t.clone().pow((degree - i) as u32)
}

/// Equispaced probe points in `[-1, 1]`.
pub fn probe_points(prec: Precision, count: usize) -> Vec<BigScalar> {
    (0..count)
        .map(|i| prec.ratio(2 * i as i64 - (count as i64 - 1), count as i64 - 1))
        .collect()
}

/// `max |p(x) - v(x)|` over probe points.
pub fn max_deviation(prec: Precision, p: &RefPolynomial, v: impl Fn(&BigScalar) -> BigScalar) -> f64 {
    probe_points(prec, 41)
        .iter()
        .map(|x| (p.eval(prec, x)[0].clone() - v(x)).abs().to_f64())
        .fold(0.0, f64::max)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Empirical orders of `sup |v - J v|` and `|(v - J v)(right end)|` for
/// `v = exp` on intervals of width `2^-j`, `j = 2..=9`, centred at 1/2.
pub fn shrinking_interval_orders(ops: &Operators) -> (f64, f64) {
    let prec = ops.prec;
    let mut xs = Vec::new();
    let mut sup_log = Vec::new();
    let mut end_log = Vec::new();
    for j in 2..=9i32 {
        let half = prec.pow2(-j - 1);
        let centre = prec.ratio(1, 2);
        let v = |x: &BigScalar, i: usize| -> BigScalar {
            (centre.clone() + x.clone() * &half).exp() * half.clone().pow(i as u32)
        };
        let jv = ops.j.apply(&v).unwrap();
        let sup = max_deviation(prec, &jv, |x| v(x, 0));
        let one = prec.one();
        let end = (jv.eval(prec, &one)[0].clone() - v(&one, 0)).abs().to_f64();
        xs.push(-(j as f64));
        sup_log.push(sup.log2());
        end_log.push(end.log2());
    }
    (ls_slope(&xs, &sup_log), ls_slope(&xs, &end_log))
}
