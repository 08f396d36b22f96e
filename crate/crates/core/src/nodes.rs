//! Node sets on `[-1, 1]` and interpolatory quadrature rules built on them.

use std::fmt;
use std::str::FromStr;

use rug::{Float, Rational};

use crate::error::{Result, VtdError};
use crate::linalg::{LuFactorization, Matrix};
use crate::poly::{legendre_derivative_table, legendre_values};
use crate::precision::{BigScalar, Precision};

/// How a node set is generated.
///
/// Config syntax: `gauss:5`, `radau_left:3`, `lobatto:5`,
/// `explicit:[-3/4,-1/4,1/4,3/4]`. Explicit nodes are kept as exact
/// rationals until a precision is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Gauss(usize),
    RadauLeft(usize),
    Lobatto(usize),
    Explicit(Vec<Rational>),
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Gauss(n) => write!(f, "gauss:{n}"),
            NodeKind::RadauLeft(n) => write!(f, "radau_left:{n}"),
            NodeKind::Lobatto(n) => write!(f, "lobatto:{n}"),
            NodeKind::Explicit(xs) => {
                write!(f, "explicit:[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
        }
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || VtdError::Parse(format!("invalid node value '{s}'"));
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if s.contains('/') {
            return Err(bad());
        }
        let negative = int_part.trim_start().starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let num = rug::Integer::from_str(&digits).map_err(|_| bad())?;
        let den = rug::Integer::from(rug::Integer::u_pow_u(10, frac_part.len() as u32));
        let r = Rational::from((num, den));
        return Ok(if negative { -r } else { r });
    }
    Rational::from_str(s).map_err(|_| bad())
}

impl FromStr for NodeKind {
    type Err = VtdError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| VtdError::Parse(format!("node spec '{s}' lacks ':'")))?;
        let count = || {
            arg.trim()
                .parse::<usize>()
                .map_err(|_| VtdError::Parse(format!("invalid node count in '{s}'")))
        };
        match kind.trim().to_ascii_lowercase().as_str() {
            "gauss" => Ok(NodeKind::Gauss(count()?)),
            "radau_left" | "radau" => Ok(NodeKind::RadauLeft(count()?)),
            "lobatto" => Ok(NodeKind::Lobatto(count()?)),
            "explicit" => {
                let inner = arg
                    .trim()
                    .strip_prefix('[')
                    .and_then(|a| a.strip_suffix(']'))
                    .ok_or_else(|| VtdError::Parse(format!("explicit nodes must be bracketed: '{s}'")))?;
                let xs = inner
                    .split(',')
                    .filter(|p| !p.trim().is_empty())
                    .map(parse_rational)
                    .collect::<Result<Vec<_>>>()?;
                Ok(NodeKind::Explicit(xs))
            }
            other => Err(VtdError::Parse(format!("unknown node kind '{other}'"))),
        }
    }
}

/// Sorted, pairwise distinct points in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    kind: NodeKind,
    nodes: Vec<BigScalar>,
}

impl NodeSet {
    pub fn new(prec: Precision, kind: NodeKind) -> Result<Self> {
        let nodes = match &kind {
            NodeKind::Gauss(n) => {
                if *n == 0 {
                    return Err(VtdError::InvalidNodeSet("gauss needs n >= 1".into()));
                }
                let n = *n;
                interior_roots(prec, n, move |p, x| {
                    let t = legendre_derivative_table(p, n, 1, x);
                    (t[0][n].clone(), t[1][n].clone())
                })
            }
            NodeKind::RadauLeft(n) => {
                if *n == 0 {
                    return Err(VtdError::InvalidNodeSet("radau_left needs n >= 1".into()));
                }
                let n = *n;
                let mut xs = vec![prec.int(-1)];
                if n > 1 {
                    // roots of L_{n-1} + L_n other than -1
                    xs.extend(interior_roots(prec, n - 1, move |p, x| {
                        let t = legendre_derivative_table(p, n, 1, x);
                        (
                            t[0][n - 1].clone() + &t[0][n],
                            t[1][n - 1].clone() + &t[1][n],
                        )
                    }));
                }
                xs
            }
            NodeKind::Lobatto(n) => {
                if *n < 2 {
                    return Err(VtdError::InvalidNodeSet("lobatto needs n >= 2".into()));
                }
                let m = *n - 1;
                let mut xs = vec![prec.int(-1)];
                if m >= 2 {
                    xs.extend(interior_roots(prec, m - 1, move |p, x| {
                        let t = legendre_derivative_table(p, m, 2, x);
                        (t[1][m].clone(), t[2][m].clone())
                    }));
                }
                xs.push(prec.one());
                xs
            }
            NodeKind::Explicit(values) => {
                let xs: Vec<BigScalar> = values.iter().map(|r| prec.rational(r)).collect();
                validate_points(&xs)?;
                let mut sorted = xs;
                sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                sorted
            }
        };
        validate_points(&nodes)?;
        Ok(Self { kind, nodes })
    }

    /// Explicit node set from arbitrary scalars (converted exactly to rationals).
    pub fn from_points(prec: Precision, points: &[BigScalar]) -> Result<Self> {
        let rationals = points
            .iter()
            .map(|p| {
                p.to_rational()
                    .ok_or_else(|| VtdError::InvalidNodeSet("non-finite node".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(prec, NodeKind::Explicit(rationals))
    }

    pub fn parse(prec: Precision, spec: &str) -> Result<Self> {
        Self::new(prec, spec.parse()?)
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    pub fn nodes(&self) -> &[BigScalar] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Whether every point of `other` is also a node of `self`.
    pub fn contains_all(&self, other: &NodeSet) -> bool {
        other.nodes.iter().all(|x| self.nodes.iter().any(|y| y == x))
    }

    /// `V[i][j] = L_j(x_i)`, the Legendre-Vandermonde matrix of the nodes.
    pub fn vandermonde(&self, prec: Precision) -> Matrix {
        let n = self.len();
        let mut v = Matrix::zeros(prec, n, n);
        for (i, x) in self.nodes.iter().enumerate() {
            for (j, val) in legendre_values(prec, n - 1, x).into_iter().enumerate() {
                v[(i, j)] = val;
            }
        }
        v
    }

    /// Matrix mapping samples at the nodes to Legendre coefficients of the
    /// interpolating polynomial of degree `len - 1`.
    pub fn interpolation_matrix(&self, prec: Precision) -> Result<Matrix> {
        Ok(LuFactorization::new(prec, &self.vandermonde(prec))?.inverse())
    }
}

fn validate_points(xs: &[BigScalar]) -> Result<()> {
    if xs.is_empty() {
        return Err(VtdError::InvalidNodeSet("empty node set".into()));
    }
    for x in xs {
        if !x.is_finite() || *x < -1 || *x > 1 {
            return Err(VtdError::InvalidNodeSet(format!(
                "node {} outside [-1, 1]",
                x.to_f64()
            )));
        }
    }
    for (i, a) in xs.iter().enumerate() {
        if xs[i + 1..].iter().any(|b| b == a) {
            return Err(VtdError::InvalidNodeSet(format!(
                "duplicate node {}",
                a.to_f64()
            )));
        }
    }
    Ok(())
}

/// Finds `count` simple roots of `f` inside `(-1, 1)`: sign changes on a fine
/// double-precision grid give brackets, bisection in double gives seeds, and
/// Newton at full width polishes them.
fn interior_roots(
    prec: Precision,
    count: usize,
    f: impl Fn(Precision, &Float) -> (Float, Float),
) -> Vec<BigScalar> {
    let lo_prec = Precision::new(Precision::MIN_BITS).expect("valid");
    let eval_f64 = |x: f64| f(lo_prec, &lo_prec.f64(x)).0.to_f64();
    let grid = 400 * count.max(1);
    let h = 2.0 / grid as f64;
    // stay off the endpoints, where Radau/Lobatto factors vanish
    let mut a = -1.0 + 0.25 * h;
    let mut fa = eval_f64(a);
    let mut roots = Vec::with_capacity(count);
    for step in 1..=grid {
        let b = if step == grid { 1.0 - 0.25 * h } else { -1.0 + step as f64 * h };
        let fb = eval_f64(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            let (mut l, mut r, mut fl) = (a, b, fa);
            for _ in 0..60 {
                let m = 0.5 * (l + r);
                let fm = eval_f64(m);
                if fm == 0.0 {
                    l = m;
                    r = m;
                    break;
                }
                if fm.signum() == fl.signum() {
                    l = m;
                    fl = fm;
                } else {
                    r = m;
                }
            }
            roots.push(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    assert_eq!(roots.len(), count, "root bracketing missed roots");
    let tol = prec.pow2(16 - prec.bits() as i32);
    roots
        .into_iter()
        .map(|seed| {
            let mut x = prec.f64(seed);
            for _ in 0..64 {
                let (v, dv) = f(prec, &x);
                let step = v / dv;
                let small = step.clone().abs() <= prec.pow2(-(prec.bits() as i32) - 4);
                x -= step;
                if small {
                    break;
                }
            }
            debug_assert!(f(prec, &x).0.abs() < tol);
            x
        })
        .collect()
}

/// Interpolatory quadrature rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct QuadRule {
    nodes: NodeSet,
    weights: Vec<BigScalar>,
}

impl QuadRule {
    /// Weights are the exact integrals of the Lagrange basis polynomials:
    /// `w_m = 2 (V^{-1})_{0m}` with `V` the Legendre-Vandermonde matrix.
    pub fn new(prec: Precision, nodes: NodeSet) -> Result<Self> {
        let vt = nodes.vandermonde(prec).transpose();
        let lu = LuFactorization::new(prec, &vt)?;
        let mut rhs = vec![prec.zero(); nodes.len()];
        rhs[0] = prec.int(2);
        let weights = lu.solve(&rhs)?;
        Ok(Self { nodes, weights })
    }

    pub fn parse(prec: Precision, spec: &str) -> Result<Self> {
        Self::new(prec, NodeSet::parse(prec, spec)?)
    }

    pub fn node_set(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn nodes(&self) -> &[BigScalar] {
        self.nodes.nodes()
    }

    pub fn weights(&self) -> &[BigScalar] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sum of absolute weights.
    pub fn weight_l1(&self, prec: Precision) -> BigScalar {
        self.weights
            .iter()
            .fold(prec.zero(), |acc, w| acc + w.clone().abs())
    }

    /// `sum_m w_m samples[m]` for vector-valued samples.
    pub fn apply(&self, prec: Precision, samples: &[Vec<BigScalar>]) -> Result<Vec<BigScalar>> {
        if samples.len() != self.len() {
            return Err(VtdError::LengthMismatch {
                expected: self.len(),
                actual: samples.len(),
            });
        }
        let dim = samples.first().map_or(0, Vec::len);
        let mut out = vec![prec.zero(); dim];
        for (w, s) in self.weights.iter().zip(samples) {
            if s.len() != dim {
                return Err(VtdError::LengthMismatch {
                    expected: dim,
                    actual: s.len(),
                });
            }
            for (o, v) in out.iter_mut().zip(s) {
                *o += w.clone() * v;
            }
        }
        Ok(out)
    }

    /// Scalar convenience form of [`QuadRule::apply`].
    pub fn apply_scalar(&self, prec: Precision, samples: &[BigScalar]) -> Result<BigScalar> {
        if samples.len() != self.len() {
            return Err(VtdError::LengthMismatch {
                expected: self.len(),
                actual: samples.len(),
            });
        }
        Ok(crate::precision::dot(prec, &self.weights, samples))
    }

    /// Rule applied to a function evaluated at the nodes.
    pub fn integrate(&self, prec: Precision, f: impl Fn(&BigScalar) -> BigScalar) -> BigScalar {
        let samples: Vec<_> = self.nodes().iter().map(f).collect();
        crate::precision::dot(prec, &self.weights, &samples)
    }
}
