//! Interpolation cascades and the reference-interval approximation operators
//! `J` (built from the local problem's coupling conditions) and `P`
//! (its derivative counterpart, `P(v') = (J v)'`).

use crate::error::{Result, VtdError};
use crate::linalg::{LuFactorization, Matrix};
use crate::nodes::{NodeSet, QuadRule};
use crate::poly::{legendre_derivative_table, legendre_endpoint_derivative, legendre_values, RefPolynomial};
use crate::precision::{BigScalar, Precision};

/// Composition `I^1 o ... o I^l` of Lagrange interpolation operators.
/// `stages[0]` is the outermost operator; the last stage sees the function first.
/// An empty list is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpCascade {
    stages: Vec<NodeSet>,
}

impl InterpCascade {
    pub fn identity() -> Self {
        Self { stages: Vec::new() }
    }

    pub fn new(stages: Vec<NodeSet>) -> Self {
        Self { stages }
    }

    pub fn single(stage: NodeSet) -> Self {
        Self {
            stages: vec![stage],
        }
    }

    pub fn parse<S: AsRef<str>>(prec: Precision, specs: &[S]) -> Result<Self> {
        let stages = specs
            .iter()
            .map(|s| NodeSet::parse(prec, s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { stages })
    }

    pub fn is_identity(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn stages(&self) -> &[NodeSet] {
        &self.stages
    }

    /// Largest degree reproduced exactly; `None` for the identity.
    pub fn reproduction_degree(&self) -> Option<usize> {
        self.stages.iter().map(|s| s.len() - 1).min()
    }

    /// Degree of the output polynomial; `None` for the identity.
    pub fn output_degree(&self) -> Option<usize> {
        self.stages.first().map(|s| s.len() - 1)
    }

    /// Nodes at which the cascade samples its argument.
    pub fn input_nodes(&self) -> Option<&[BigScalar]> {
        self.stages.last().map(NodeSet::nodes)
    }

    /// Linear map from samples at [`Self::input_nodes`] to the Legendre
    /// coefficients of the cascade output. `None` for the identity.
    pub fn composed_matrix(&self, prec: Precision) -> Result<Option<Matrix>> {
        let Some(last) = self.stages.last() else {
            return Ok(None);
        };
        let mut map = last.interpolation_matrix(prec)?;
        for stage in self.stages.iter().rev().skip(1) {
            // evaluate the current polynomial at this stage's nodes, then interpolate
            let degree = map.rows() - 1;
            let eval = Matrix::from_fn(stage.len(), degree + 1, |i, j| {
                crate::poly::legendre_eval(prec, j, &stage.nodes()[i])
            });
            let samples = eval.mul(prec, &map);
            map = stage.interpolation_matrix(prec)?.mul(prec, &samples);
        }
        Ok(Some(map))
    }

    /// Applies the cascade to a vector-valued function of dimension `dim`.
    pub fn apply(
        &self,
        prec: Precision,
        dim: usize,
        f: impl Fn(&BigScalar) -> Vec<BigScalar>,
    ) -> Result<RefPolynomial> {
        let (Some(map), Some(nodes)) = (self.composed_matrix(prec)?, self.input_nodes()) else {
            return Err(VtdError::InvalidNodeSet(
                "the identity cascade has no polynomial output".into(),
            ));
        };
        let samples: Vec<Vec<BigScalar>> = nodes.iter().map(&f).collect();
        if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
            return Err(VtdError::LengthMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        let coeffs = (0..map.rows())
            .map(|j| {
                (0..dim)
                    .map(|c| {
                        let mut acc = prec.zero();
                        for (s, sample) in samples.iter().enumerate() {
                            acc += map[(j, s)].clone() * &sample[c];
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(RefPolynomial::from_coeffs(coeffs))
    }
}

/// Where a rule/cascade pair samples the integrand, and how those samples
/// become values of the interpolated integrand at the rule nodes:
/// `(I f)(x_m) = sum_s at_rule[m][s] f(y_s)`.
#[derive(Clone, Debug)]
pub struct CascadeSampler {
    sample_nodes: Vec<BigScalar>,
    at_rule: Matrix,
}

impl CascadeSampler {
    pub fn new(prec: Precision, rule: &QuadRule, cascade: &InterpCascade) -> Result<Self> {
        match cascade.composed_matrix(prec)? {
            None => Ok(Self {
                sample_nodes: rule.nodes().to_vec(),
                at_rule: Matrix::identity(prec, rule.len()),
            }),
            Some(map) => {
                let degree = map.rows() - 1;
                let eval = Matrix::from_fn(rule.len(), degree + 1, |m, j| {
                    crate::poly::legendre_eval(prec, j, &rule.nodes()[m])
                });
                Ok(Self {
                    sample_nodes: cascade.input_nodes().expect("non-identity").to_vec(),
                    at_rule: eval.mul(prec, &map),
                })
            }
        }
    }

    pub fn sample_nodes(&self) -> &[BigScalar] {
        &self.sample_nodes
    }

    pub fn at_rule(&self) -> &Matrix {
        &self.at_rule
    }

    /// `G[i][s] = sum_m w_m phi_i(x_m) at_rule[m][s]`, so that
    /// `I[(I f) phi_i] = sum_s G[i][s] f(y_s)`.
    pub fn moments(&self, prec: Precision, rule: &QuadRule, tests: &[RefPolynomial]) -> Matrix {
        let weighted: Vec<Vec<BigScalar>> = tests
            .iter()
            .map(|phi| {
                rule.nodes()
                    .iter()
                    .zip(rule.weights())
                    .map(|(x, w)| phi.eval(prec, x)[0].clone() * w)
                    .collect()
            })
            .collect();
        let mut g = Matrix::zeros(prec, tests.len(), self.sample_nodes.len());
        for (i, row) in weighted.iter().enumerate() {
            for (m, wm) in row.iter().enumerate() {
                for s in 0..self.sample_nodes.len() {
                    g[(i, s)] += wm.clone() * &self.at_rule[(m, s)];
                }
            }
        }
        g
    }
}

/// Scalar Legendre polynomial `L_i`.
pub fn legendre_basis(prec: Precision, i: usize) -> RefPolynomial {
    let mut c = vec![prec.zero(); i + 1];
    c[i] = prec.one();
    RefPolynomial::scalar(c)
}

/// `I[(I f) test]` on the reference interval for a scalar test polynomial.
pub fn integrate_interpolant(
    prec: Precision,
    rule: &QuadRule,
    cascade: &InterpCascade,
    dim: usize,
    f: impl Fn(&BigScalar) -> Vec<BigScalar>,
    test: &RefPolynomial,
) -> Result<Vec<BigScalar>> {
    let sampler = CascadeSampler::new(prec, rule, cascade)?;
    let g = sampler.moments(prec, rule, std::slice::from_ref(test));
    let samples: Vec<Vec<BigScalar>> = sampler.sample_nodes().iter().map(f).collect();
    let mut out = vec![prec.zero(); dim];
    for (s, sample) in samples.iter().enumerate() {
        if sample.len() != dim {
            return Err(VtdError::LengthMismatch {
                expected: dim,
                actual: sample.len(),
            });
        }
        for (o, v) in out.iter_mut().zip(sample) {
            *o += g[(0, s)].clone() * v;
        }
    }
    Ok(out)
}

/// Smooth scalar function given through its derivatives: `v(t, i) = v^{(i)}(t)`.
pub type ScalarJet<'a> = &'a dyn Fn(&BigScalar, usize) -> BigScalar;

fn assumption_violated(r: usize, k: usize, err: VtdError) -> VtdError {
    match err {
        VtdError::SingularMatrix { .. } => VtdError::AssumptionViolated {
            r,
            k,
            detail: err.to_string(),
        },
        other => other,
    }
}

fn check_rk(r: usize, k: usize) -> Result<()> {
    if k > r {
        return Err(VtdError::InvalidMethod(format!("need 0 <= k <= r, got r={r}, k={k}")));
    }
    Ok(())
}

/// The operator `J: C^{k_J+1} -> P_r`:
/// matches `v^{(i)}(-1)` for `i <= (k-1)/2`, `v^{(i)}(+1)` for `1 <= i <= k/2`,
/// and `I[(J v)' phi] + d_{0k} (J v)(-1) phi(-1) = I[(I v') phi] + d_{0k} v(-1) phi(-1)`
/// for all `phi` in `P_{r-k}`.
#[derive(Clone, Debug)]
pub struct JOperator {
    prec: Precision,
    r: usize,
    k: usize,
    left_orders: Vec<usize>,
    right_orders: Vec<usize>,
    sampler: CascadeSampler,
    moments: Matrix,
    lu: LuFactorization,
    condition: BigScalar,
}

impl JOperator {
    pub fn new(prec: Precision, rule: &QuadRule, cascade: &InterpCascade, r: usize, k: usize) -> Result<Self> {
        check_rk(r, k)?;
        let left_orders: Vec<usize> = if k >= 1 { (0..=(k - 1) / 2).collect() } else { Vec::new() };
        let right_orders: Vec<usize> = if k >= 2 { (1..=k / 2).collect() } else { Vec::new() };
        let n = r + 1;
        let mut a = Matrix::zeros(prec, n, n);
        let mut row = 0;
        for &i in &left_orders {
            for j in 0..n {
                a[(row, j)] = legendre_endpoint_derivative(prec, j, i, false);
            }
            row += 1;
        }
        for &i in &right_orders {
            for j in 0..n {
                a[(row, j)] = legendre_endpoint_derivative(prec, j, i, true);
            }
            row += 1;
        }
        // variational rows with phi = L_i
        let node_tables: Vec<Vec<Vec<BigScalar>>> = rule
            .nodes()
            .iter()
            .map(|x| legendre_derivative_table(prec, r, 1, x))
            .collect();
        for i in 0..=r - k {
            for j in 0..n {
                let mut v = prec.zero();
                for (tab, w) in node_tables.iter().zip(rule.weights()) {
                    v += tab[1][j].clone() * &tab[0][i] * w;
                }
                if k == 0 {
                    v += sign(prec, i + j);
                }
                a[(row, j)] = v;
            }
            row += 1;
        }
        debug_assert_eq!(row, n);
        let lu = LuFactorization::new(prec, &a).map_err(|e| assumption_violated(r, k, e))?;
        let condition = lu.condition_inf();
        let sampler = CascadeSampler::new(prec, rule, cascade)?;
        let tests: Vec<RefPolynomial> = (0..=r - k).map(|i| legendre_basis(prec, i)).collect();
        let moments = sampler.moments(prec, rule, &tests);
        Ok(Self {
            prec,
            r,
            k,
            left_orders,
            right_orders,
            sampler,
            moments,
            lu,
            condition,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Infinity-norm condition number of the defining matrix.
    pub fn condition(&self) -> &BigScalar {
        &self.condition
    }

    /// `J v` as a scalar polynomial of degree `r`.
    pub fn apply(&self, v: ScalarJet<'_>) -> Result<RefPolynomial> {
        let prec = self.prec;
        let minus_one = prec.int(-1);
        let one = prec.one();
        let mut rhs = Vec::with_capacity(self.r + 1);
        for &i in &self.left_orders {
            rhs.push(v(&minus_one, i));
        }
        for &i in &self.right_orders {
            rhs.push(v(&one, i));
        }
        let dv: Vec<BigScalar> = self.sampler.sample_nodes().iter().map(|y| v(y, 1)).collect();
        let v_left = if self.k == 0 { Some(v(&minus_one, 0)) } else { None };
        for i in 0..=self.r - self.k {
            let mut acc = crate::precision::dot(prec, self.moments.row(i), &dv);
            if let Some(vl) = &v_left {
                acc += sign(prec, i) * vl;
            }
            rhs.push(acc);
        }
        Ok(RefPolynomial::scalar(self.lu.solve(&rhs)?))
    }
}

/// The operator `P: C^{k_J} -> P_{r-1}`:
/// matches `v^{(i)}(-1)` for `i < (k-1)/2` (`k >= 3`), `v^{(i)}(+1)` for `i < k/2`
/// (`k >= 2`), and `I[(P v) phi] = I[(I v) phi]` for `phi` in `P_{r-k}` with
/// `d_{0k} phi(-1) = 0`. For `r = 0` it returns the zero polynomial.
#[derive(Clone, Debug)]
pub struct POperator {
    prec: Precision,
    r: usize,
    k: usize,
    left_orders: Vec<usize>,
    right_orders: Vec<usize>,
    sampler: CascadeSampler,
    moments: Matrix,
    lu: Option<LuFactorization>,
}

impl POperator {
    pub fn new(prec: Precision, rule: &QuadRule, cascade: &InterpCascade, r: usize, k: usize) -> Result<Self> {
        check_rk(r, k)?;
        let sampler = CascadeSampler::new(prec, rule, cascade)?;
        if r == 0 {
            return Ok(Self {
                prec,
                r,
                k,
                left_orders: Vec::new(),
                right_orders: Vec::new(),
                moments: Matrix::zeros(prec, 0, sampler.sample_nodes().len()),
                sampler,
                lu: None,
            });
        }
        let left_orders: Vec<usize> = if k >= 3 { (0..(k - 1) / 2).collect() } else { Vec::new() };
        let right_orders: Vec<usize> = if k >= 2 { (0..k / 2).collect() } else { Vec::new() };
        let tests: Vec<RefPolynomial> = if k == 0 {
            // L_i - L_i(-1), which vanish at -1
            (1..=r)
                .map(|i| {
                    let mut p = legendre_basis(prec, i);
                    let shift = sign(prec, i);
                    let mut c = p.component(0);
                    c[0] -= shift;
                    p = RefPolynomial::scalar(c);
                    p
                })
                .collect()
        } else {
            (0..=r - k).map(|i| legendre_basis(prec, i)).collect()
        };
        let n = r;
        let mut a = Matrix::zeros(prec, n, n);
        let mut row = 0;
        for &i in &left_orders {
            for j in 0..n {
                a[(row, j)] = legendre_endpoint_derivative(prec, j, i, false);
            }
            row += 1;
        }
        for &i in &right_orders {
            for j in 0..n {
                a[(row, j)] = legendre_endpoint_derivative(prec, j, i, true);
            }
            row += 1;
        }
        let node_basis: Vec<Vec<BigScalar>> = rule
            .nodes()
            .iter()
            .map(|x| legendre_values(prec, n - 1, x))
            .collect();
        for phi in &tests {
            let phi_at: Vec<BigScalar> = rule.nodes().iter().map(|x| phi.eval(prec, x)[0].clone()).collect();
            for j in 0..n {
                let mut v = prec.zero();
                for ((basis, w), p) in node_basis.iter().zip(rule.weights()).zip(&phi_at) {
                    v += basis[j].clone() * p * w;
                }
                a[(row, j)] = v;
            }
            row += 1;
        }
        debug_assert_eq!(row, n);
        let lu = LuFactorization::new(prec, &a).map_err(|e| assumption_violated(r, k, e))?;
        let moments = sampler.moments(prec, rule, &tests);
        Ok(Self {
            prec,
            r,
            k,
            left_orders,
            right_orders,
            sampler,
            moments,
            lu: Some(lu),
        })
    }

    /// `P v` as a scalar polynomial of degree `r - 1` (degree 0 zero for `r = 0`).
    pub fn apply(&self, v: ScalarJet<'_>) -> Result<RefPolynomial> {
        let prec = self.prec;
        let Some(lu) = &self.lu else {
            return Ok(RefPolynomial::zero(prec, 0, 1));
        };
        let minus_one = prec.int(-1);
        let one = prec.one();
        let mut rhs = Vec::with_capacity(self.r);
        for &i in &self.left_orders {
            rhs.push(v(&minus_one, i));
        }
        for &i in &self.right_orders {
            rhs.push(v(&one, i));
        }
        let samples: Vec<BigScalar> = self.sampler.sample_nodes().iter().map(|y| v(y, 0)).collect();
        for i in 0..self.moments.rows() {
            rhs.push(crate::precision::dot(prec, self.moments.row(i), &samples));
        }
        Ok(RefPolynomial::scalar(lu.solve(&rhs)?))
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

fn sign(prec: Precision, n: usize) -> BigScalar {
    if n.is_multiple_of(2) {
        prec.one()
    } else {
        prec.int(-1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    fn monomial_coeffs(prec: Precision, degree: usize) -> RefPolynomial {
        // interpolate t^degree at enough Gauss nodes: exact for polynomials
        let nodes = NodeSet::new(prec, crate::nodes::NodeKind::Gauss(degree + 1)).unwrap();
        let inv = nodes.interpolation_matrix(prec).unwrap();
        let samples: Vec<BigScalar> = nodes.nodes().iter().map(|x| x.clone().pow(degree as u32)).collect();
        RefPolynomial::scalar(inv.mul_vec(prec, &samples))
    }

    trait PowU {
        fn pow(self, e: u32) -> BigScalar;
    }
    impl PowU for BigScalar {
        fn pow(self, e: u32) -> BigScalar {
            use rug::ops::Pow;
            Pow::pow(self, e)
        }
    }

    fn max_diff(prec: Precision, a: &RefPolynomial, b: &RefPolynomial) -> BigScalar {
        a.sub(prec, b).max_abs_coeff(prec)
    }

    #[test]
    fn single_stage_preserves_low_degree() {
        let prec = p();
        let c = InterpCascade::parse(prec, &["gauss:3"]).unwrap();
        let out = c
            .apply(prec, 1, |t| vec![t.clone() * t * 3u32 - 1u32 + t.clone()])
            .unwrap();
        assert_eq!(out.degree(), 2);
        for x in ["-0.7", "0.1", "0.9"] {
            let t = prec.f64(x.parse().unwrap());
            let expected = t.clone() * &t * 3u32 - 1u32 + &t;
            assert!((out.eval(prec, &t)[0].clone() - expected).abs() < prec.pow2(-500));
        }
    }

    #[test]
    fn interpolation_conditions_hold_at_nodes() {
        let prec = p();
        let c = InterpCascade::parse(prec, &["gauss:5"]).unwrap();
        let out = c.apply(prec, 1, |t| vec![t.clone().pow(5)]).unwrap();
        for x in c.input_nodes().unwrap() {
            let diff = out.eval(prec, x)[0].clone() - x.clone().pow(5);
            assert!(diff.abs() < prec.pow2(-500));
        }
        let probe = prec.ratio(1, 3);
        assert!((out.eval(prec, &probe)[0].clone() - probe.clone().pow(5)).abs() > prec.pow2(-20));
    }

    #[test]
    fn two_stage_cascade_composes() {
        let prec = p();
        let c = InterpCascade::parse(prec, &["gauss:3", "gauss:5"]).unwrap();
        let out = c.apply(prec, 1, |t| vec![t.clone().pow(4)]).unwrap();
        // stage 2 reproduces t^4; stage 1 interpolates t^4 at the Gauss(3) nodes
        let direct = InterpCascade::parse(prec, &["gauss:3"])
            .unwrap()
            .apply(prec, 1, |t| vec![t.clone().pow(4)])
            .unwrap();
        assert!(max_diff(prec, &out, &direct) < prec.pow2(-490));
        assert_eq!(out.degree(), 2);
    }

    #[test]
    fn integrate_interpolant_examples() {
        let prec = p();
        let g1 = QuadRule::parse(prec, "gauss:1").unwrap();
        let one = legendre_basis(prec, 0);
        let v = integrate_interpolant(prec, &g1, &InterpCascade::identity(), 1, |_| vec![prec.one()], &one).unwrap();
        assert_eq!(v[0], 2);

        let rule = QuadRule::parse(prec, "explicit:[-3/4,-1/4,1/4,3/4]").unwrap();
        let cascade = InterpCascade::parse(prec, &["gauss:5"]).unwrap();
        let v = integrate_interpolant(prec, &rule, &cascade, 1, |t| vec![t.clone().pow(6)], &one).unwrap();
        let interp = cascade.apply(prec, 1, |t| vec![t.clone().pow(6)]).unwrap();
        let expected = rule.integrate(prec, |x| interp.eval(prec, x)[0].clone());
        assert!((v[0].clone() - expected).abs() < prec.pow2(-500));
        let raw = rule.integrate(prec, |x| x.clone().pow(6));
        assert!((v[0].clone() - raw).abs() > prec.pow2(-30));

        let zero = RefPolynomial::scalar(vec![prec.zero()]);
        let v = integrate_interpolant(prec, &rule, &cascade, 1, |t| vec![t.clone().exp()], &zero).unwrap();
        assert!(v[0].is_zero());
    }

    fn poly_jet(prec: Precision, poly: RefPolynomial) -> impl Fn(&BigScalar, usize) -> BigScalar {
        move |t: &BigScalar, i: usize| poly.eval_derivative(prec, t, i)[0].clone()
    }

    #[test]
    fn j_reproduces_polynomials_and_zero() {
        let prec = p();
        let rule = QuadRule::parse(prec, "explicit:[-3/4,-1/4,1/4,3/4]").unwrap();
        let cascade = InterpCascade::parse(prec, &["gauss:5"]).unwrap();
        let j = JOperator::new(prec, &rule, &cascade, 6, 3).unwrap();
        for degree in 0..=5 {
            let v = monomial_coeffs(prec, degree);
            let jv = j.apply(&poly_jet(prec, v.clone())).unwrap();
            assert!(max_diff(prec, &jv, &v) < prec.pow2(-480), "degree {degree}");
        }
        let zero = j.apply(&|_t: &BigScalar, _i: usize| prec.zero()).unwrap();
        assert!(zero.max_abs_coeff(prec).is_zero());
    }

    #[test]
    fn p_of_derivative_is_derivative_of_j() {
        let prec = p();
        let cascade = InterpCascade::parse(prec, &["radau_left:3"]).unwrap();
        // a q-point rule only supports k + q >= r + 1
        let configs = [
            ("explicit:[-3/4,-1/4,1/4,3/4]", 3..=6),
            ("gauss:6", 0..=6),
        ];
        for (spec, ks) in configs {
            let rule = QuadRule::parse(prec, spec).unwrap();
            for k in ks {
                check_p_j_identity(prec, &rule, &cascade, k);
            }
        }
    }

    fn check_p_j_identity(prec: Precision, rule: &QuadRule, cascade: &InterpCascade, k: usize) {
        let j = JOperator::new(prec, rule, cascade, 6, k).unwrap();
        let pp = POperator::new(prec, rule, cascade, 6, k).unwrap();
        let exp = |t: &BigScalar, _i: usize| t.clone().exp();
        let lhs = pp.apply(&exp).unwrap();
        let rhs = j.apply(&exp).unwrap().derivative(prec);
        assert!(max_diff(prec, &lhs, &rhs) < prec.pow2(-470), "k={k}");
    }

    #[test]
    fn p_is_zero_for_r_zero() {
        let prec = p();
        let rule = QuadRule::parse(prec, "gauss:1").unwrap();
        let pp = POperator::new(prec, &rule, &InterpCascade::identity(), 0, 0).unwrap();
        let out = pp.apply(&|t: &BigScalar, _| t.clone().exp()).unwrap();
        assert!(out.max_abs_coeff(prec).is_zero());
    }

    #[test]
    fn singular_configuration_reports_assumption() {
        let prec = p();
        // a one-point rule cannot pin down the variational part of VTD(3,0)
        let rule = QuadRule::parse(prec, "gauss:1").unwrap();
        let err = JOperator::new(prec, &rule, &InterpCascade::identity(), 3, 0).unwrap_err();
        assert!(matches!(err, VtdError::AssumptionViolated { r: 3, k: 0, .. }));
    }
}
