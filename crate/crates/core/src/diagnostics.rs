//! Approximation-order integers of an integrator/interpolation pair, their
//! structural lower bounds for Lagrange cascades, and the convergence orders
//! they predict.

#![allow(non_snake_case)]

use std::cmp::Ordering;
use std::fmt;

use crate::error::Result;
use crate::linalg::Matrix;
use crate::nodes::QuadRule;
use crate::operators::{CascadeSampler, InterpCascade};
use crate::poly::{legendre_values, RefPolynomial};
use crate::precision::{BigScalar, Precision};

/// A polynomial degree that may be unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Degree {
    Finite(i64),
    /// Every tested degree up to the value passed, without a structural proof of more.
    AtLeast(i64),
    Infinite,
}

/// Stand-in for infinity in order arithmetic; far above any reachable order.
pub const INFINITE_ORDER: i64 = 1 << 40;

impl Degree {
    /// Value used in order formulas: `AtLeast(c)` counts as `c`.
    pub fn bound(self) -> i64 {
        match self {
            Degree::Finite(n) | Degree::AtLeast(n) => n,
            Degree::Infinite => INFINITE_ORDER,
        }
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Degree::Finite(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Degree::Infinite
    }

    pub fn shift(self, by: i64) -> Degree {
        match self {
            Degree::Finite(n) => Degree::Finite(n + by),
            Degree::AtLeast(n) => Degree::AtLeast(n + by),
            Degree::Infinite => Degree::Infinite,
        }
    }

    fn key(self) -> (i64, u8) {
        match self {
            Degree::Finite(n) => (n, 0),
            Degree::AtLeast(n) => (n, 1),
            Degree::Infinite => (i64::MAX, 2),
        }
    }
}

impl PartialOrd for Degree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Degree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Finite(n) => write!(f, "{n}"),
            Degree::AtLeast(n) => write!(f, ">={n}"),
            Degree::Infinite => write!(f, "inf"),
        }
    }
}

/// Approximation orders of a quadrature rule `I` and interpolation `If`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderDiagnostics {
    /// `I` integrates `P_{r_ex_I}` exactly.
    pub r_ex_I: Degree,
    /// `If` preserves integrals on `P_{r_ex_If}`.
    pub r_ex_If: Degree,
    /// `If` reproduces `P_{r_If}`.
    pub r_If: Degree,
    /// `I[(phi - If phi) psi] = 0` for `phi` in `P_{r_If_I[i]}`, `psi` in `P_i`, `i = 0..=r-k`.
    pub r_If_I: Vec<Degree>,
    pub r_I_I: Degree,
    /// `min_i (r_If_I[i] + i)`.
    pub r_var: Degree,
    pub cutoff: i64,
}

/// Recommended scan cutoff: above `2r+5` and above every exactness degree the
/// rule or any cascade stage can have.
pub fn default_cutoff(r: usize, rule: &QuadRule, cascade: &InterpCascade) -> i64 {
    let widest = cascade
        .stages()
        .iter()
        .map(|s| s.len())
        .chain(std::iter::once(rule.len()))
        .max()
        .unwrap_or(1);
    (2 * r + 5).max(2 * widest + 1) as i64
}

fn exact_monomial_integral(prec: Precision, j: usize) -> BigScalar {
    if j % 2 == 1 {
        prec.zero()
    } else {
        prec.ratio(2, j as i64 + 1)
    }
}

fn first_failure(cutoff: i64, mut passes: impl FnMut(usize) -> bool) -> Degree {
    for j in 0..=cutoff.max(0) as usize {
        if !passes(j) {
            return Degree::Finite(j as i64 - 1);
        }
    }
    Degree::AtLeast(cutoff)
}

/// Mean-exactness of a rule: largest degree integrated exactly.
pub fn rule_exactness(prec: Precision, rule: &QuadRule, cutoff: i64) -> Degree {
    let tol = prec.zero_tolerance(&rule.weight_l1(prec));
    first_failure(cutoff, |j| {
        let approx = rule.integrate(prec, |x| monomial(x, j));
        (approx - exact_monomial_integral(prec, j)).abs() <= tol
    })
}

fn monomial(x: &BigScalar, j: usize) -> BigScalar {
    use rug::ops::Pow;
    x.clone().pow(j as u32)
}

/// Legendre coefficients of the cascade applied to `t^j`.
fn cascade_monomial(prec: Precision, map: &Matrix, nodes: &[BigScalar], j: usize) -> Vec<BigScalar> {
    let samples: Vec<BigScalar> = nodes.iter().map(|y| monomial(y, j)).collect();
    map.mul_vec(prec, &samples)
}

fn reproduces(prec: Precision, coeffs: &[BigScalar], j: usize, tol: &BigScalar) -> bool {
    let poly = RefPolynomial::scalar(coeffs.to_vec());
    let count = j.max(coeffs.len().saturating_sub(1)) + 1;
    (0..count).all(|m| {
        // distinct probes in (-1, 1)
        let x = prec.ratio(2 * m as i64 + 1, count as i64) - 1u32;
        (poly.eval(prec, &x)[0].clone() - monomial(&x, j)).abs() <= *tol
    })
}

/// Every stage interpolates at all rule nodes, so `(If phi)(x_m) = phi(x_m)` exactly.
fn stages_contain_rule_nodes(rule: &QuadRule, cascade: &InterpCascade) -> bool {
    cascade
        .stages()
        .iter()
        .all(|s| s.contains_all(rule.node_set()))
}

/// Scans monomials `t^j`, `j = 0..=cutoff`, against each defining identity.
pub fn compute_diagnostics(
    prec: Precision,
    rule: &QuadRule,
    cascade: &InterpCascade,
    r: usize,
    k: usize,
    cutoff: i64,
) -> Result<OrderDiagnostics> {
    assert!(k <= r, "need 0 <= k <= r");
    let tol = prec.zero_tolerance(&rule.weight_l1(prec));
    let r_ex_I = rule_exactness(prec, rule, cutoff);

    let (r_ex_If, r_If) = match (cascade.composed_matrix(prec)?, cascade.input_nodes()) {
        (Some(map), Some(nodes)) => {
            let mean = first_failure(cutoff, |j| {
                let c = cascade_monomial(prec, &map, nodes, j);
                (c[0].clone() * 2u32 - exact_monomial_integral(prec, j)).abs() <= tol
            });
            let repro = first_failure(cutoff, |j| {
                let c = cascade_monomial(prec, &map, nodes, j);
                reproduces(prec, &c, j, &tol)
            });
            (mean, repro)
        }
        _ => (Degree::Infinite, Degree::Infinite),
    };

    let tests = r - k;
    let r_If_I: Vec<Degree> = if cascade.is_identity() || stages_contain_rule_nodes(rule, cascade) {
        vec![Degree::Infinite; tests + 1]
    } else {
        let sampler = CascadeSampler::new(prec, rule, cascade)?;
        let weighted_basis: Vec<Vec<BigScalar>> = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(x, w)| {
                legendre_values(prec, tests, x)
                    .into_iter()
                    .map(|l| l * w)
                    .collect()
            })
            .collect();
        // first degree failing against L_q, per q
        let mut fail: Vec<Option<i64>> = vec![None; tests + 1];
        for j in 0..=cutoff.max(0) as usize {
            if fail.iter().all(Option::is_some) {
                break;
            }
            let samples: Vec<BigScalar> = sampler.sample_nodes().iter().map(|y| monomial(y, j)).collect();
            let interp = sampler.at_rule().mul_vec(prec, &samples);
            let defect: Vec<BigScalar> = rule
                .nodes()
                .iter()
                .zip(&interp)
                .map(|(x, v)| monomial(x, j) - v)
                .collect();
            for (q, f) in fail.iter_mut().enumerate() {
                if f.is_some() {
                    continue;
                }
                let mut acc = prec.zero();
                for (wb, d) in weighted_basis.iter().zip(&defect) {
                    acc += wb[q].clone() * d;
                }
                if acc.abs() > tol {
                    *f = Some(j as i64);
                }
            }
        }
        let mut out = Vec::with_capacity(tests + 1);
        let mut running = Degree::AtLeast(cutoff);
        for f in fail {
            if let Some(j) = f {
                running = running.min(Degree::Finite(j - 1));
            }
            out.push(running);
        }
        out
    };
    let r_I_I = r_If_I[tests];
    let r_var = r_If_I
        .iter()
        .enumerate()
        .map(|(i, d)| d.shift(i as i64))
        .min()
        .expect("at least one test degree");
    Ok(OrderDiagnostics {
        r_ex_I,
        r_ex_If,
        r_If,
        r_If_I,
        r_I_I,
        r_var,
        cutoff,
    })
}

/// Reproduction and mean-exactness degrees of one Lagrange stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageOrders {
    pub reproduction: i64,
    pub mean_exactness: Degree,
}

/// Per-stage orders, outermost stage first.
pub fn stage_orders(prec: Precision, cascade: &InterpCascade, cutoff: i64) -> Result<Vec<StageOrders>> {
    cascade
        .stages()
        .iter()
        .map(|stage| {
            let rule = QuadRule::new(prec, stage.clone())?;
            Ok(StageOrders {
                reproduction: stage.len() as i64 - 1,
                mean_exactness: rule_exactness(prec, &rule, cutoff),
            })
        })
        .collect()
}

/// Structural lower bounds for `r_If_I[i]`, `i = 0..=r-k`, of a Lagrange cascade.
///
/// `stages` lists the per-stage orders outermost first and `image_degree` is the
/// degree of the cascade output (`None` for the identity, which gives `Infinite`).
pub fn cascade_lower_bounds(
    d: &OrderDiagnostics,
    stages: &[StageOrders],
    image_degree: Option<usize>,
    r: usize,
    k: usize,
) -> Vec<Degree> {
    let count = r - k + 1;
    let Some(image_degree) = image_degree else {
        return vec![Degree::Infinite; count];
    };
    let r_i = stages.iter().map(|s| s.reproduction).min().expect("non-empty cascade");
    let l = stages.len();
    (0..count as i64)
        .map(|i| {
            let stage_value = |s: &StageOrders| s.reproduction.max(s.mean_exactness.bound() - i);
            let mut int_bound = stage_value(&stages[l - 1]);
            for j in 0..l - 1 {
                let inner_min = stages[j + 1..].iter().map(|s| s.reproduction).min().expect("j < l-1");
                let v = stage_value(&stages[j]);
                if v < inner_min {
                    int_bound = int_bound.min(v);
                }
            }
            // the sharper bound needs If to map into P_{r_I}
            let bound = if image_degree as i64 == r_i {
                r_i.max((d.r_ex_I.bound() - i).min(int_bound))
            } else {
                r_i
            };
            Degree::Finite(bound)
        })
        .collect()
}

/// Convergence orders predicted from the diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredictedOrders {
    /// `min{r, r_I_I + 1}`.
    pub linf_basic: i64,
    /// Sharper sup-norm order, available when `gate_ok`.
    pub linf_improved: Option<i64>,
    pub w1inf: i64,
    /// Order at the mesh points; falls back to [`Self::linf`] unless `bounded_U_ok`.
    pub linf_mesh: i64,
    pub gate_ok: bool,
    pub bounded_U_ok: bool,
}

impl PredictedOrders {
    /// Best available sup-norm order.
    pub fn linf(&self) -> i64 {
        self.linf_improved.unwrap_or(self.linf_basic)
    }
}

pub fn predict_orders(d: &OrderDiagnostics, r: usize, k: usize) -> PredictedOrders {
    let r = r as i64;
    let k = k as i64;
    let r_ex = d.r_ex_I.bound();
    let r_ii = d.r_I_I.bound();
    let linf_basic = r.min(r_ii + 1);
    let gate_ok = r_ex.max(r_ii + 1) >= r - 1;
    let tail = (r_ex + 1).max(linf_basic);
    let linf_improved = gate_ok.then(|| {
        (r + 1)
            .min(r_ii + 2)
            .min(d.r_If_I[0].bound() + 1)
            .min(tail)
    });
    let bounded_U_ok = r_ii >= r - 2;
    let linf_mesh = if bounded_U_ok {
        let mut m = (2 * r - k + 1).min(d.r_var.bound() + 1).min(tail);
        if k == 0 {
            m = m.min(2 * r_ii + 4);
        }
        m
    } else {
        linf_improved.unwrap_or(linf_basic)
    };
    PredictedOrders {
        linf_basic,
        linf_improved,
        w1inf: linf_basic,
        linf_mesh,
        gate_ok,
        bounded_U_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(rule: &str, cascade: &[&str], r: usize, k: usize) -> OrderDiagnostics {
        let prec = Precision::default();
        let rule = QuadRule::parse(prec, rule).unwrap();
        let cascade = InterpCascade::parse(prec, cascade).unwrap();
        let cutoff = default_cutoff(r, &rule, &cascade);
        compute_diagnostics(prec, &rule, &cascade, r, k, cutoff).unwrap()
    }

    #[test]
    fn degree_ordering() {
        assert!(Degree::Finite(3) < Degree::AtLeast(3));
        assert!(Degree::AtLeast(100) < Degree::Infinite);
        assert_eq!(Degree::Infinite.shift(4), Degree::Infinite);
        assert_eq!(Degree::Finite(2).to_string(), "2");
        assert_eq!(Degree::AtLeast(17).bound(), 17);
    }

    #[test]
    fn midpoint_rule() {
        let d = diag("gauss:1", &[], 0, 0);
        assert_eq!(d.r_ex_I, Degree::Finite(1));
        assert_eq!(d.r_If, Degree::Infinite);
    }

    #[test]
    fn gauss_six_identity() {
        let d = diag("gauss:6", &[], 6, 3);
        assert_eq!(d.r_ex_I, Degree::Finite(11));
        assert_eq!(d.r_If, Degree::Infinite);
        assert_eq!(d.r_I_I, Degree::Infinite);
    }

    #[test]
    fn first_case_configuration() {
        let d = diag("explicit:[-3/4,-1/4,1/4,3/4]", &["radau_left:3"], 6, 3);
        assert_eq!(d.r_ex_I, Degree::Finite(3));
        assert_eq!(d.r_I_I, Degree::Finite(2));
        assert_eq!(d.r_If, Degree::Finite(2));
        let p = predict_orders(&d, 6, 3);
        assert!(!p.gate_ok);
        assert_eq!((p.linf(), p.w1inf, p.linf_mesh), (3, 3, 3));
    }

    #[test]
    fn gauss_rule_with_gauss_cascade() {
        let d = diag("gauss:6", &["gauss:5"], 6, 3);
        assert_eq!(d.r_I_I, Degree::Finite(6));
        assert_eq!(d.r_If_I[0], Degree::Finite(9));
        assert_eq!(d.r_var, Degree::Finite(9));
        let p = predict_orders(&d, 6, 3);
        assert_eq!((p.linf(), p.w1inf, p.linf_mesh), (7, 6, 10));
    }

    #[test]
    fn radau_cascade_on_gauss_rule() {
        let d = diag("gauss:6", &["radau_left:3"], 6, 3);
        let p = predict_orders(&d, 6, 3);
        assert_eq!(p.linf_improved, Some(4));
        assert_eq!(p.w1inf, 3);
    }

    #[test]
    fn lower_bound_single_stage_formula() {
        let d = OrderDiagnostics {
            r_ex_I: Degree::Finite(3),
            r_ex_If: Degree::Finite(9),
            r_If: Degree::Finite(4),
            r_If_I: vec![Degree::Finite(5)],
            r_I_I: Degree::Finite(5),
            r_var: Degree::Finite(5),
            cutoff: 20,
        };
        let stages = [StageOrders {
            reproduction: 4,
            mean_exactness: Degree::Finite(9),
        }];
        assert_eq!(cascade_lower_bounds(&d, &stages, Some(4), 3, 3), vec![Degree::Finite(4)]);
        assert_eq!(cascade_lower_bounds(&d, &[], None, 3, 3), vec![Degree::Infinite]);
    }

    #[test]
    fn commutation_degrees_are_nonincreasing() {
        let d = diag("gauss:6", &["lobatto:5"], 6, 0);
        for w in d.r_If_I.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(d.r_If_I.iter().all(|x| *x >= d.r_If));
        assert!(d.r_ex_If >= d.r_If);
    }
}
