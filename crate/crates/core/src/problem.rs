//! ODE initial value problems `u' = f(t, u)`, total derivatives of `f` along a
//! trajectory, and the built-in test problems.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Result, VtdError};
use crate::linalg::Matrix;
use crate::precision::{BigScalar, Precision};

/// Right-hand side `f(t, u)` together with its partial derivatives.
pub trait RightHandSide: Send + Sync {
    fn dim(&self) -> usize;

    /// Highest total order of partial derivatives the problem supplies.
    fn max_order(&self) -> usize;

    /// `d^(a+|beta|) f / dt^a du^beta` at `(t, u)`.
    fn partial(&self, prec: Precision, t: &BigScalar, u: &[BigScalar], a: usize, beta: &[usize]) -> Vec<BigScalar>;

    fn eval(&self, prec: Precision, t: &BigScalar, u: &[BigScalar]) -> Vec<BigScalar> {
        self.partial(prec, t, u, 0, &vec![0; self.dim()])
    }

    /// `df/du` as a `d x d` matrix, entry `(i, j) = df_i / du_j`.
    fn jacobian(&self, prec: Precision, t: &BigScalar, u: &[BigScalar]) -> Matrix {
        let d = self.dim();
        let mut jac = Matrix::zeros(prec, d, d);
        let mut beta = vec![0; d];
        for j in 0..d {
            beta[j] = 1;
            for (i, v) in self.partial(prec, t, u, 0, &beta).into_iter().enumerate() {
                jac[(i, j)] = v;
            }
            beta[j] = 0;
        }
        jac
    }
}

/// Exact solution `u^{(deriv)}(t)`.
pub trait ExactSolution: Send + Sync {
    fn eval(&self, prec: Precision, t: &BigScalar, deriv: usize) -> Vec<BigScalar>;
}

/// An initial value problem on `(t0, t_end)`. Data are stored exactly and
/// rounded on demand, so one problem serves every precision.
#[derive(Clone)]
pub struct OdeProblem {
    pub name: String,
    pub t0: Rational,
    pub t_end: Rational,
    pub u0: Vec<Rational>,
    pub rhs: Arc<dyn RightHandSide>,
    pub exact: Option<Arc<dyn ExactSolution>>,
}

impl std::fmt::Debug for OdeProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OdeProblem")
            .field("name", &self.name)
            .field("t0", &self.t0)
            .field("t_end", &self.t_end)
            .field("u0", &self.u0)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl OdeProblem {
    pub fn dim(&self) -> usize {
        self.rhs.dim()
    }

    pub fn u0(&self, prec: Precision) -> Vec<BigScalar> {
        self.u0.iter().map(|v| prec.rational(v)).collect()
    }

    pub fn f(&self, prec: Precision, t: &BigScalar, u: &[BigScalar]) -> Vec<BigScalar> {
        self.rhs.eval(prec, t, u)
    }

    pub fn exact(&self, prec: Precision, t: &BigScalar, deriv: usize) -> Result<Vec<BigScalar>> {
        match &self.exact {
            Some(e) => Ok(e.eval(prec, t, deriv)),
            None => Err(VtdError::ExactSolutionMissing(self.name.clone())),
        }
    }

    /// Largest deviation of `exact(t, 1)` from `f(t, exact(t, 0))` over `samples`
    /// points spread through the time span.
    pub fn consistency_defect(&self, prec: Precision, samples: usize) -> Result<BigScalar> {
        let t0 = prec.rational(&self.t0);
        let span = prec.rational(&self.t_end) - &t0;
        let golden = (prec.f64(5.0).sqrt() - 1u32) / 2u32;
        let mut worst = prec.zero();
        for s in 1..=samples {
            let frac = (golden.clone() * s as u32).fract();
            let t = t0.clone() + span.clone() * frac;
            let u = self.exact(prec, &t, 0)?;
            let du = self.exact(prec, &t, 1)?;
            for (a, b) in du.iter().zip(self.f(prec, &t, &u)) {
                let diff = (a.clone() - b).abs();
                if diff > worst {
                    worst = diff;
                }
            }
        }
        Ok(worst)
    }
}

/// Derivatives `u^{(0)}(t), ..., u^{(m)}(t)` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub t: BigScalar,
    pub values: Vec<Vec<BigScalar>>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }
}

/// One term of the multivariate Faa di Bruno expansion of `d^j/dt^j f(t, u(t))`,
/// over the variables `x_0 = t`, `x_m = u_m`.
#[derive(Clone, Debug)]
struct FdbTerm {
    coef: Integer,
    t_order: usize,
    beta: Vec<usize>,
    /// `(derivative order i, variable m >= 1, multiplicity q)`
    factors: Vec<(usize, usize, u32)>,
}

type FdbCache = Mutex<HashMap<(usize, usize), Arc<Vec<FdbTerm>>>>;

fn fdb_terms(j: usize, d: usize) -> Arc<Vec<FdbTerm>> {
    static CACHE: OnceLock<FdbCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(terms) = cache.lock().expect("cache lock").get(&(j, d)) {
        return terms.clone();
    }
    let terms = Arc::new(enumerate_fdb(j, d));
    cache.lock().expect("cache lock").insert((j, d), terms.clone());
    terms
}

fn enumerate_fdb(j: usize, d: usize) -> Vec<FdbTerm> {
    // slots (i, m); t only has a nonzero first derivative
    let mut slots = vec![(1, 0)];
    for i in 1..=j {
        for m in 1..=d {
            slots.push((i, m));
        }
    }
    let mut out = Vec::new();
    let mut q = vec![0u32; slots.len()];
    fn recurse(slots: &[(usize, usize)], idx: usize, remaining: usize, q: &mut [u32], j: usize, d: usize, out: &mut Vec<FdbTerm>) {
        if idx == slots.len() {
            if remaining == 0 {
                out.push(build_term(slots, q, j, d));
            }
            return;
        }
        let i = slots[idx].0;
        for mult in 0..=remaining / i {
            q[idx] = mult as u32;
            recurse(slots, idx + 1, remaining - mult * i, q, j, d, out);
        }
        q[idx] = 0;
    }
    recurse(&slots, 0, j, &mut q, j, d, &mut out);
    out
}

fn build_term(slots: &[(usize, usize)], q: &[u32], j: usize, d: usize) -> FdbTerm {
    let mut denom = Integer::from(1);
    let mut t_order = 0;
    let mut beta = vec![0; d];
    let mut factors = Vec::new();
    for (&(i, m), &mult) in slots.iter().zip(q) {
        if mult == 0 {
            continue;
        }
        denom *= Integer::from(Integer::factorial(mult));
        denom *= Integer::from(Integer::factorial(i as u32)).pow(mult);
        if m == 0 {
            t_order += mult as usize;
        } else {
            beta[m - 1] += mult as usize;
            factors.push((i, m, mult));
        }
    }
    let coef = Integer::from(Integer::factorial(j as u32)) / denom;
    FdbTerm {
        coef,
        t_order,
        beta,
        factors,
    }
}

/// `d^i/dt^i f(t, u(t))` from the problem's partial derivatives and the jet of `u`.
pub fn total_derivative(prec: Precision, rhs: &dyn RightHandSide, i: usize, jet: &Jet) -> Result<Vec<BigScalar>> {
    if i > rhs.max_order() {
        return Err(VtdError::TotalDerivativeUnavailable {
            requested: i,
            available: rhs.max_order(),
        });
    }
    if jet.values.len() <= i {
        return Err(VtdError::LengthMismatch {
            expected: i + 1,
            actual: jet.values.len(),
        });
    }
    let u = &jet.values[0];
    if i == 0 {
        return Ok(rhs.eval(prec, &jet.t, u));
    }
    let d = rhs.dim();
    let mut out = vec![prec.zero(); d];
    for term in fdb_terms(i, d).iter() {
        let mut scale = Float::with_val(prec.bits(), &term.coef);
        for &(order, m, mult) in &term.factors {
            let x = &jet.values[order][m - 1];
            if x.is_zero() {
                scale = prec.zero();
                break;
            }
            scale *= Float::with_val(prec.bits(), x.clone().pow(mult));
        }
        if scale.is_zero() {
            continue;
        }
        let partial = rhs.partial(prec, &jet.t, u, term.t_order, &term.beta);
        for (o, p) in out.iter_mut().zip(partial) {
            if !p.is_zero() {
                *o += p * &scale;
            }
        }
    }
    Ok(out)
}

/// Jet of the solution at `t0` up to order `m`, from repeated total derivatives.
pub fn initial_jet(prec: Precision, problem: &OdeProblem, m: usize) -> Result<Jet> {
    let mut jet = Jet {
        t: prec.rational(&problem.t0),
        values: vec![problem.u0(prec)],
    };
    for j in 1..=m {
        let next = total_derivative(prec, problem.rhs.as_ref(), j - 1, &jet)?;
        jet.values.push(next);
    }
    Ok(jet)
}

/// `u1' = -u1^2 - u2`, `u2' = u1 - u1 u2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NonlinearTestRhs;

impl RightHandSide for NonlinearTestRhs {
    fn dim(&self) -> usize {
        2
    }

    fn max_order(&self) -> usize {
        6
    }

    fn partial(&self, prec: Precision, _t: &BigScalar, u: &[BigScalar], a: usize, beta: &[usize]) -> Vec<BigScalar> {
        let (u1, u2) = (&u[0], &u[1]);
        if a > 0 {
            return vec![prec.zero(), prec.zero()];
        }
        match (beta[0], beta[1]) {
            (0, 0) => vec![
                -(u1.clone().square()) - u2,
                u1.clone() - u1.clone() * u2,
            ],
            (1, 0) => vec![u1.clone() * -2i32, prec.one() - u2],
            (0, 1) => vec![prec.int(-1), -u1.clone()],
            (2, 0) => vec![prec.int(-2), prec.zero()],
            (1, 1) => vec![prec.zero(), prec.int(-1)],
            _ => vec![prec.zero(), prec.zero()],
        }
    }
}

/// `u1 = cos t / (2 + sin t)`, `u2 = sin t / (2 + sin t)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NonlinearTestExact;

impl ExactSolution for NonlinearTestExact {
    fn eval(&self, prec: Precision, t: &BigScalar, deriv: usize) -> Vec<BigScalar> {
        let (sin, cos) = t.clone().sin_cos(prec.zero());
        // Taylor coefficients in h of sin(t+h) and cos(t+h)
        let n = deriv;
        let mut s = Vec::with_capacity(n + 1);
        let mut c = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let inv = prec.one() / prec.factorial(j as u32);
            let (ds, dc) = match j % 4 {
                0 => (sin.clone(), cos.clone()),
                1 => (cos.clone(), -sin.clone()),
                2 => (-sin.clone(), -cos.clone()),
                _ => (-cos.clone(), sin.clone()),
            };
            s.push(ds * &inv);
            c.push(dc * &inv);
        }
        let mut denom = s.clone();
        denom[0] += 2u32;
        let divide = |num: &[BigScalar]| {
            let mut q: Vec<BigScalar> = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let mut acc = num[k].clone();
                for l in 1..=k {
                    acc -= denom[l].clone() * &q[k - l];
                }
                q.push(acc / &denom[0]);
            }
            q
        };
        let f = prec.factorial(n as u32);
        vec![divide(&c)[n].clone() * &f, divide(&s)[n].clone() * &f]
    }
}

pub fn nonlinear_test_problem() -> OdeProblem {
    OdeProblem {
        name: "nonlinear-test".into(),
        t0: Rational::from(0),
        t_end: Rational::from(32),
        u0: vec![Rational::from((1, 2)), Rational::from(0)],
        rhs: Arc::new(NonlinearTestRhs),
        exact: Some(Arc::new(NonlinearTestExact)),
    }
}

/// Componentwise polynomial `p_c(t) = sum_j coeffs[c][j] t^j` with exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialCurve {
    pub coeffs: Vec<Vec<Rational>>,
}

impl PolynomialCurve {
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.len().saturating_sub(1)).max().unwrap_or(0)
    }

    pub fn eval(&self, prec: Precision, t: &BigScalar, deriv: usize) -> Vec<BigScalar> {
        self.coeffs
            .iter()
            .map(|c| {
                // Horner on the differentiated coefficients
                let mut acc = prec.zero();
                for j in (deriv..c.len()).rev() {
                    let falling = (j - deriv + 1..=j).fold(Integer::from(1), |a, v| a * v as u32);
                    acc = acc * t + prec.rational(&(c[j].clone() * falling));
                }
                acc
            })
            .collect()
    }
}

/// `f(t, u) = p'(t) + lambda (u - p(t))`, which has solution `p` for `u0 = p(t0)`.
#[derive(Clone, Debug)]
pub struct ManufacturedRhs {
    pub curve: PolynomialCurve,
    pub lambda: Rational,
}

impl RightHandSide for ManufacturedRhs {
    fn dim(&self) -> usize {
        self.curve.dim()
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn partial(&self, prec: Precision, t: &BigScalar, u: &[BigScalar], a: usize, beta: &[usize]) -> Vec<BigScalar> {
        let d = self.dim();
        let order: usize = beta.iter().sum();
        let lambda = prec.rational(&self.lambda);
        match order {
            0 => {
                let dp = self.curve.eval(prec, t, a + 1);
                let p = self.curve.eval(prec, t, a);
                (0..d)
                    .map(|c| {
                        let coupling = if a == 0 { u[c].clone() - &p[c] } else { -p[c].clone() };
                        dp[c].clone() + coupling * &lambda
                    })
                    .collect()
            }
            1 if a == 0 => {
                let m = beta.iter().position(|&b| b == 1).expect("order one");
                (0..d).map(|c| if c == m { lambda.clone() } else { prec.zero() }).collect()
            }
            _ => vec![prec.zero(); d],
        }
    }
}

#[derive(Clone, Debug)]
pub struct CurveSolution(pub PolynomialCurve);

impl ExactSolution for CurveSolution {
    fn eval(&self, prec: Precision, t: &BigScalar, deriv: usize) -> Vec<BigScalar> {
        self.0.eval(prec, t, deriv)
    }
}

/// Problem on `(t0, t_end)` whose exact solution is `curve`; `lambda = 0`
/// gives the pure quadrature problem `u' = p'(t)`.
pub fn manufactured_problem(curve: PolynomialCurve, lambda: Rational, t0: Rational, t_end: Rational) -> OdeProblem {
    let u0 = curve
        .coeffs
        .iter()
        .map(|c| {
            let mut acc = Rational::new();
            for coef in c.iter().rev() {
                acc = acc * &t0 + coef;
            }
            acc
        })
        .collect();
    OdeProblem {
        name: format!("manufactured-degree-{}", curve.degree()),
        t0,
        t_end,
        u0,
        rhs: Arc::new(ManufacturedRhs {
            curve: curve.clone(),
            lambda,
        }),
        exact: Some(Arc::new(CurveSolution(curve))),
    }
}

/// Two-component polynomial of exact degree `m` with small rational coefficients.
pub fn sample_curve(m: usize) -> PolynomialCurve {
    let first = (0..=m).map(|j| Rational::from((j as i64 % 3 + 1, j as i64 + 2))).collect();
    let second = (0..=m)
        .map(|j| Rational::from((if j % 2 == 0 { -1 } else { 2 }, j as i64 + 1)))
        .collect();
    PolynomialCurve {
        coeffs: vec![first, second],
    }
}

/// Names accepted by [`problem_by_name`].
pub const PROBLEM_NAMES: &[&str] = &["nonlinear-test", "manufactured:<m>", "manufactured-linear:<m>"];

/// Built-in problems: `nonlinear-test`, and on `(0, 1)` the polynomial
/// problems `manufactured:<m>` (`u' = p'`) and `manufactured-linear:<m>`
/// (`u' = p' - (u - p)`).
pub fn problem_by_name(name: &str) -> Result<OdeProblem> {
    if name == "nonlinear-test" {
        return Ok(nonlinear_test_problem());
    }
    let (lambda, degree) = if let Some(m) = name.strip_prefix("manufactured-linear:") {
        (-1, m)
    } else if let Some(m) = name.strip_prefix("manufactured:") {
        (0, m)
    } else {
        return Err(VtdError::UnknownProblem(name.into()));
    };
    let m: usize = degree.trim().parse().map_err(|_| VtdError::UnknownProblem(name.into()))?;
    Ok(manufactured_problem(
        sample_curve(m),
        Rational::from(lambda),
        Rational::from(0),
        Rational::from(1),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn test_problem_data() {
        let prec = p();
        let problem = nonlinear_test_problem();
        let zero = prec.zero();
        assert_eq!(problem.exact(prec, &zero, 0).unwrap(), vec![prec.ratio(1, 2), prec.zero()]);
        let f0 = problem.f(prec, &zero, &problem.u0(prec));
        assert_eq!(f0, vec![prec.ratio(-1, 4), prec.ratio(1, 2)]);
        let half_pi = prec.pi() / 2u32;
        let at = problem.exact(prec, &half_pi, 0).unwrap();
        assert!(at[0].clone().abs() < prec.pow2(-500));
        assert!((at[1].clone() - prec.ratio(1, 3)).abs() < prec.pow2(-500));
        assert!(problem.consistency_defect(prec, 32).unwrap() < prec.pow2(-500));
    }

    #[test]
    fn faa_di_bruno_term_counts() {
        // univariate Bell-polynomial terms are partitions of j: 1, 2, 3, 5, 7
        let counts: Vec<usize> = (1..=5)
            .map(|j| fdb_terms(j, 1).iter().filter(|t| t.t_order == 0).count())
            .collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 7]);
        let coefs: Vec<i64> = fdb_terms(3, 1)
            .iter()
            .filter(|t| t.t_order == 0)
            .map(|t| t.coef.to_i64().unwrap())
            .collect();
        let mut sorted = coefs.clone();
        sorted.sort();
        assert_eq!(sorted, vec![1, 1, 3]);
    }

    #[derive(Clone, Copy)]
    struct Linear;
    impl RightHandSide for Linear {
        fn dim(&self) -> usize {
            1
        }
        fn max_order(&self) -> usize {
            8
        }
        fn partial(&self, prec: Precision, _t: &BigScalar, u: &[BigScalar], a: usize, beta: &[usize]) -> Vec<BigScalar> {
            match (a, beta[0]) {
                (0, 0) => vec![u[0].clone()],
                (0, 1) => vec![prec.one()],
                _ => vec![prec.zero()],
            }
        }
    }

    #[test]
    fn exponential_jet() {
        let prec = p();
        let jet = Jet {
            t: prec.zero(),
            values: vec![vec![prec.one()]; 4],
        };
        assert_eq!(total_derivative(prec, &Linear, 3, &jet).unwrap(), vec![prec.one()]);
        let err = total_derivative(prec, &Linear, 9, &jet).unwrap_err();
        assert!(matches!(err, VtdError::TotalDerivativeUnavailable { requested: 9, available: 8 }));
    }

    #[test]
    fn first_total_derivative_by_hand() {
        let prec = p();
        let problem = nonlinear_test_problem();
        let t = prec.ratio(7, 5);
        let values: Vec<Vec<BigScalar>> = (0..3).map(|j| problem.exact(prec, &t, j).unwrap()).collect();
        let jet = Jet { t: t.clone(), values: values.clone() };
        let d1 = total_derivative(prec, problem.rhs.as_ref(), 1, &jet).unwrap();
        let (u1, u2) = (&values[0][0], &values[0][1]);
        let (du1, du2) = (&values[1][0], &values[1][1]);
        let expected = u1.clone() * du1 * -2i32 - du2;
        assert!((d1[0].clone() - expected).abs() < prec.pow2(-500));
        let expected2 = du1.clone() - du1.clone() * u2 - u1.clone() * du2;
        assert!((d1[1].clone() - expected2).abs() < prec.pow2(-500));
    }

    #[test]
    fn initial_jet_matches_exact_derivatives() {
        let prec = p();
        let problem = nonlinear_test_problem();
        let jet = initial_jet(prec, &problem, 7).unwrap();
        assert_eq!(jet.values[1], vec![prec.ratio(-1, 4), prec.ratio(1, 2)]);
        for (j, v) in jet.values.iter().enumerate() {
            let exact = problem.exact(prec, &prec.zero(), j).unwrap();
            for (a, b) in v.iter().zip(&exact) {
                assert!((a.clone() - b).abs() < prec.pow2(-490), "order {j}");
            }
        }
    }

    #[test]
    fn manufactured_problem_is_consistent() {
        let prec = p();
        for name in ["manufactured:4", "manufactured-linear:5"] {
            let problem = problem_by_name(name).unwrap();
            assert!(problem.consistency_defect(prec, 32).unwrap() < prec.pow2(-500), "{name}");
            let u0 = problem.exact(prec, &prec.zero(), 0).unwrap();
            assert_eq!(u0, problem.u0(prec));
        }
        assert!(matches!(problem_by_name("nope"), Err(VtdError::UnknownProblem(_))));
    }
}
