//! The VTD(r, k) time-marching scheme: per-interval local problems solved by
//! Newton's method, and the piecewise-polynomial discrete solution.
//!
//! On `I_n = (t_{n-1}, t_n]` the solution is `U(t) = U^(T_n^{-1} t)` with
//! `T_n(x) = t_{n-1} + tau_n (x + 1) / 2`, and `U^` is stored in Legendre
//! coefficients on the reference interval.

use crate::error::{Result, VtdError};
use crate::linalg::{LuFactorization, Matrix};
use crate::nodes::{NodeKind, NodeSet, QuadRule};
use crate::operators::{legendre_basis, CascadeSampler, InterpCascade};
use crate::poly::{legendre_derivative_table, legendre_endpoint_derivative, legendre_values, RefPolynomial};
use crate::precision::{norm_inf, BigScalar, Precision};
use crate::problem::{initial_jet, total_derivative, Jet, OdeProblem};

#[derive(Clone, Debug)]
pub struct NewtonSettings {
    pub tol: BigScalar,
    pub max_iter: usize,
}

/// The method VTD(r, k) with its integrator and interpolation cascade.
#[derive(Clone, Debug)]
pub struct MethodConfig {
    pub r: usize,
    pub k: usize,
    pub rule: QuadRule,
    pub cascade: InterpCascade,
    pub newton: NewtonSettings,
    pub prec: Precision,
}

impl MethodConfig {
    pub fn new(prec: Precision, r: usize, k: usize, rule: QuadRule, cascade: InterpCascade) -> Result<Self> {
        if k > r {
            return Err(VtdError::InvalidMethod(format!("need 0 <= k <= r, got r={r}, k={k}")));
        }
        Ok(Self {
            r,
            k,
            rule,
            cascade,
            newton: NewtonSettings {
                tol: prec.newton_tolerance(),
                max_iter: 50,
            },
            prec,
        })
    }

    /// Builds a configuration from node-set strings, e.g. `"gauss:6"` and `["gauss:5"]`.
    pub fn parse<S: AsRef<str>>(prec: Precision, r: usize, k: usize, rule: &str, cascade: &[S]) -> Result<Self> {
        Self::new(prec, r, k, QuadRule::parse(prec, rule)?, InterpCascade::parse(prec, cascade)?)
    }

    /// Order of the highest total derivative of `f` the endpoint conditions use.
    pub fn k_j(&self) -> usize {
        (self.k / 2).saturating_sub(1)
    }

    /// Number of right-endpoint derivative conditions.
    pub fn right_conditions(&self) -> usize {
        if self.k >= 2 {
            self.k / 2
        } else {
            0
        }
    }

    /// Number of left-endpoint derivative conditions.
    pub fn left_conditions(&self) -> usize {
        if self.k >= 3 {
            (self.k - 1) / 2
        } else {
            0
        }
    }

    /// Total number of scalar conditions per interval for a `d`-dimensional problem.
    pub fn condition_count(&self, d: usize) -> usize {
        let continuity = usize::from(self.k >= 1);
        d * (continuity + self.right_conditions() + self.left_conditions() + self.r - self.k + 1)
    }
}

/// Mesh `t_0 < t_1 < ... < t_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeMesh {
    points: Vec<BigScalar>,
}

impl TimeMesh {
    pub fn uniform(prec: Precision, t0: &BigScalar, t_end: &BigScalar, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(VtdError::InvalidMesh("need at least one interval".into()));
        }
        let span = t_end.clone() - t0;
        let points = (0..=n)
            .map(|i| {
                if i == n {
                    prec.convert(t_end)
                } else {
                    t0.clone() + span.clone() * i as u32 / n as u32
                }
            })
            .collect();
        Self::from_points(points)
    }

    /// `points` lists `t_0, ..., t_N`.
    pub fn from_points(points: Vec<BigScalar>) -> Result<Self> {
        if points.len() < 2 {
            return Err(VtdError::InvalidMesh("need at least one interval".into()));
        }
        if let Some(w) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(VtdError::InvalidMesh(format!("points not increasing at index {}", w + 1)));
        }
        Ok(Self { points })
    }

    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[BigScalar] {
        &self.points
    }

    pub fn t0(&self) -> &BigScalar {
        &self.points[0]
    }

    pub fn t_end(&self) -> &BigScalar {
        self.points.last().expect("nonempty")
    }

    /// Left end of interval `n` (zero-based).
    pub fn left(&self, n: usize) -> &BigScalar {
        &self.points[n]
    }

    pub fn right(&self, n: usize) -> &BigScalar {
        &self.points[n + 1]
    }

    pub fn tau(&self, n: usize) -> BigScalar {
        self.points[n + 1].clone() - &self.points[n]
    }

    pub fn max_tau(&self) -> BigScalar {
        (0..self.intervals())
            .map(|n| self.tau(n))
            .reduce(|a, b| if b > a { b } else { a })
            .expect("nonempty")
    }

    /// Interval containing `t` under the right-closed convention `(t_{n-1}, t_n]`.
    pub fn locate(&self, t: &BigScalar) -> Option<usize> {
        if t <= self.t0() || t > self.t_end() {
            return None;
        }
        // first n with t <= t_{n+1}
        let idx = self.points[1..].partition_point(|p| p < t);
        Some(idx)
    }

    /// `T_n(x)`.
    pub fn to_global(&self, n: usize, x: &BigScalar) -> BigScalar {
        self.tau(n) * (x.clone() + 1u32) / 2u32 + &self.points[n]
    }

    /// `T_n^{-1}(t)`.
    pub fn to_reference(&self, n: usize, t: &BigScalar) -> BigScalar {
        (t.clone() - &self.points[n]) * 2u32 / self.tau(n) - 1u32
    }
}

/// Piecewise polynomial solution, one degree-`r` piece per interval.
#[derive(Clone, Debug)]
pub struct DiscreteSolution {
    pub mesh: TimeMesh,
    pub pieces: Vec<RefPolynomial>,
    pub u0: Vec<BigScalar>,
    prec: Precision,
}

impl DiscreteSolution {
    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    /// `U^{(deriv)}(t)` for `t` in `(t_0, t_N]`.
    pub fn eval(&self, t: &BigScalar, deriv: usize) -> Result<Vec<BigScalar>> {
        let n = self.mesh.locate(t).ok_or_else(|| VtdError::OutOfDomain(t.to_f64()))?;
        let x = self.mesh.to_reference(n, t);
        Ok(self.eval_piece(n, &x, deriv))
    }

    /// Derivative of piece `n` at reference point `x`, in global time units.
    pub fn eval_piece(&self, n: usize, x: &BigScalar, deriv: usize) -> Vec<BigScalar> {
        let scale = chain_factor(self.prec, &self.mesh.tau(n), deriv);
        self.pieces[n]
            .eval_derivative(self.prec, x, deriv)
            .into_iter()
            .map(|v| v * &scale)
            .collect()
    }

    /// `U(t_n^-)`, the left limit at the right end of interval `n` (zero-based).
    pub fn left_limit(&self, n: usize) -> Vec<BigScalar> {
        self.pieces[n].eval(self.prec, &self.prec.one())
    }

    /// `U(t_n^+)`, the right limit at the left end of interval `n`.
    pub fn right_limit(&self, n: usize) -> Vec<BigScalar> {
        self.pieces[n].eval(self.prec, &self.prec.int(-1))
    }
}

/// `(2 / tau)^deriv`.
fn chain_factor(prec: Precision, tau: &BigScalar, deriv: usize) -> BigScalar {
    let base = prec.int(2) / tau;
    (0..deriv).fold(prec.one(), |acc, _| acc * &base)
}

/// Newton statistics, one entry per interval.
#[derive(Clone, Debug, Default)]
pub struct NewtonReport {
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
}

impl NewtonReport {
    pub fn max_iterations(&self) -> usize {
        self.iterations.iter().copied().max().unwrap_or(0)
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    fn push(&mut self, entry: NewtonEntry) {
        self.iterations.push(entry.iterations);
        self.residuals.push(entry.residual);
        self.converged.push(entry.converged);
    }
}

/// Outcome of one local Newton solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonEntry {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Geometry of one interval.
#[derive(Clone, Debug)]
pub struct IntervalData {
    pub index: usize,
    pub t_left: BigScalar,
    pub tau: BigScalar,
}

impl IntervalData {
    pub fn of(mesh: &TimeMesh, n: usize) -> Self {
        Self {
            index: n,
            t_left: mesh.left(n).clone(),
            tau: mesh.tau(n),
        }
    }

    fn to_global(&self, x: &BigScalar) -> BigScalar {
        self.tau.clone() * (x.clone() + 1u32) / 2u32 + &self.t_left
    }
}

/// Everything about the local problem that does not depend on the interval.
#[derive(Clone, Debug)]
pub struct LocalAssembler {
    cfg: MethodConfig,
    d: usize,
    /// `B[i][j] = I[L_j' L_i]`, `i = 0..=r-k`.
    b: Matrix,
    /// `G[i][s]`: moments of `L_i` against samples at `sample_nodes`.
    g: Matrix,
    sample_nodes: Vec<BigScalar>,
    /// `L_j(y_s)`.
    sample_basis: Vec<Vec<BigScalar>>,
    /// `[side][m][j] = L_j^{(m)}(+-1)`, side 0 left, 1 right.
    endpoint: [Vec<Vec<BigScalar>>; 2],
    /// Interpolation at `r+1` Gauss points, used for warm starts.
    start_nodes: Vec<BigScalar>,
    start_inverse: Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Left = 0,
    Right = 1,
}

impl LocalAssembler {
    pub fn new(cfg: &MethodConfig, d: usize) -> Result<Self> {
        let prec = cfg.prec;
        let (r, k) = (cfg.r, cfg.k);
        let rule = &cfg.rule;
        let sampler = CascadeSampler::new(prec, rule, &cfg.cascade)?;
        let tests: Vec<RefPolynomial> = (0..=r - k).map(|i| legendre_basis(prec, i)).collect();
        let g = sampler.moments(prec, rule, &tests);
        let tables: Vec<Vec<Vec<BigScalar>>> = rule
            .nodes()
            .iter()
            .map(|x| legendre_derivative_table(prec, r, 1, x))
            .collect();
        let mut b = Matrix::zeros(prec, r - k + 1, r + 1);
        for i in 0..=r - k {
            for j in 0..=r {
                let mut v = prec.zero();
                for (tab, w) in tables.iter().zip(rule.weights()) {
                    v += tab[1][j].clone() * &tab[0][i] * w;
                }
                b[(i, j)] = v;
            }
        }
        let sample_nodes = sampler.sample_nodes().to_vec();
        let sample_basis = sample_nodes.iter().map(|y| legendre_values(prec, r, y)).collect();
        let max_m = cfg.right_conditions().max(cfg.left_conditions()).max(1);
        let endpoint_table = |right: bool| {
            (0..=max_m)
                .map(|m| (0..=r).map(|j| legendre_endpoint_derivative(prec, j, m, right)).collect())
                .collect()
        };
        let start = NodeSet::new(prec, NodeKind::Gauss(r + 1))?;
        Ok(Self {
            cfg: cfg.clone(),
            d,
            b,
            g,
            sample_nodes,
            sample_basis,
            endpoint: [endpoint_table(false), endpoint_table(true)],
            start_nodes: start.nodes().to_vec(),
            start_inverse: start.interpolation_matrix(prec)?,
        })
    }

    pub fn config(&self) -> &MethodConfig {
        &self.cfg
    }

    pub fn unknowns(&self) -> usize {
        self.d * (self.cfg.r + 1)
    }

    fn prec(&self) -> Precision {
        self.cfg.prec
    }

    /// `U^{(m)}(+-1)` on the reference interval, component vector.
    fn endpoint_value(&self, a: &[BigScalar], side: Side, m: usize) -> Vec<BigScalar> {
        let row = &self.endpoint[side as usize][m];
        (0..self.d)
            .map(|c| {
                let mut acc = self.prec().zero();
                for (j, l) in row.iter().enumerate() {
                    acc += a[j * self.d + c].clone() * l;
                }
                acc
            })
            .collect()
    }

    fn sample_values(&self, a: &[BigScalar], s: usize) -> Vec<BigScalar> {
        (0..self.d)
            .map(|c| {
                let mut acc = self.prec().zero();
                for (j, l) in self.sample_basis[s].iter().enumerate() {
                    acc += a[j * self.d + c].clone() * l;
                }
                acc
            })
            .collect()
    }

    /// Row `i` of an endpoint derivative condition:
    /// `U^{(i+1)}(+-1) - (tau/2)^{i+1} D^i f` with the jet taken from `U` itself.
    fn endpoint_rows(
        &self,
        problem: &OdeProblem,
        interval: &IntervalData,
        a: &[BigScalar],
        side: Side,
        i: usize,
    ) -> Result<Vec<BigScalar>> {
        let prec = self.prec();
        let half_tau = interval.tau.clone() / 2u32;
        let t = match side {
            Side::Left => interval.t_left.clone(),
            Side::Right => interval.t_left.clone() + &interval.tau,
        };
        let mut values = Vec::with_capacity(i + 1);
        let mut scale = prec.one();
        for j in 0..=i {
            values.push(self.endpoint_value(a, side, j).into_iter().map(|v| v * &scale).collect());
            scale /= &half_tau;
        }
        let jet = Jet { t, values };
        let df = total_derivative(prec, problem.rhs.as_ref(), i, &jet)?;
        let factor = (0..=i).fold(prec.one(), |acc, _| acc * &half_tau);
        Ok(self
            .endpoint_value(a, side, i + 1)
            .into_iter()
            .zip(df)
            .map(|(u, f)| u - f * &factor)
            .collect())
    }

    /// Residual of the local conditions, ordered: continuity, right-endpoint
    /// conditions, left-endpoint conditions, variational conditions.
    pub fn residual(
        &self,
        problem: &OdeProblem,
        interval: &IntervalData,
        u_in: &[BigScalar],
        a: &[BigScalar],
    ) -> Result<Vec<BigScalar>> {
        let prec = self.prec();
        let (r, k, d) = (self.cfg.r, self.cfg.k, self.d);
        if a.len() != self.unknowns() {
            return Err(VtdError::LengthMismatch {
                expected: self.unknowns(),
                actual: a.len(),
            });
        }
        let mut out = Vec::with_capacity(self.unknowns());
        let jump: Vec<BigScalar> = self
            .endpoint_value(a, Side::Left, 0)
            .into_iter()
            .zip(u_in)
            .map(|(u, v)| u - v)
            .collect();
        if k >= 1 {
            out.extend(jump.iter().cloned());
        }
        for i in 0..self.cfg.right_conditions() {
            out.extend(self.endpoint_rows(problem, interval, a, Side::Right, i)?);
        }
        for i in 0..self.cfg.left_conditions() {
            out.extend(self.endpoint_rows(problem, interval, a, Side::Left, i)?);
        }
        let half_tau = interval.tau.clone() / 2u32;
        let f_samples: Vec<Vec<BigScalar>> = (0..self.sample_nodes.len())
            .map(|s| {
                let t = interval.to_global(&self.sample_nodes[s]);
                problem.f(prec, &t, &self.sample_values(a, s))
            })
            .collect();
        for i in 0..=r - k {
            for c in 0..d {
                let mut acc = prec.zero();
                for j in 0..=r {
                    acc += self.b[(i, j)].clone() * &a[j * d + c];
                }
                if k == 0 {
                    if i % 2 == 0 {
                        acc += &jump[c];
                    } else {
                        acc -= &jump[c];
                    }
                }
                let mut rhs = prec.zero();
                for (s, fs) in f_samples.iter().enumerate() {
                    rhs += self.g[(i, s)].clone() * &fs[c];
                }
                acc -= rhs * &half_tau;
                out.push(acc);
            }
        }
        debug_assert_eq!(out.len(), self.unknowns());
        Ok(out)
    }

    /// Jacobian of [`Self::residual`] with respect to the coefficients.
    pub fn jacobian(
        &self,
        problem: &OdeProblem,
        interval: &IntervalData,
        a: &[BigScalar],
    ) -> Result<Matrix> {
        let prec = self.prec();
        let (r, k, d) = (self.cfg.r, self.cfg.k, self.d);
        let n = self.unknowns();
        let mut jac = Matrix::zeros(prec, n, n);
        let half_tau = interval.tau.clone() / 2u32;
        let mut row = 0;
        let left0 = &self.endpoint[Side::Left as usize][0];
        if k >= 1 {
            for c in 0..d {
                for j in 0..=r {
                    jac[(row + c, j * d + c)] = left0[j].clone();
                }
            }
            row += d;
        }
        let mut fd_blocks = Vec::new();
        for (side, count) in [(Side::Right, self.cfg.right_conditions()), (Side::Left, self.cfg.left_conditions())] {
            for i in 0..count {
                if i == 0 {
                    let t = match side {
                        Side::Left => interval.t_left.clone(),
                        Side::Right => interval.t_left.clone() + &interval.tau,
                    };
                    let u = self.endpoint_value(a, side, 0);
                    let jf = problem.rhs.jacobian(prec, &t, &u);
                    let l0 = &self.endpoint[side as usize][0];
                    let l1 = &self.endpoint[side as usize][1];
                    for c in 0..d {
                        for j in 0..=r {
                            jac[(row + c, j * d + c)] += &l1[j];
                            for e in 0..d {
                                jac[(row + c, j * d + e)] -= jf[(c, e)].clone() * &l0[j] * &half_tau;
                            }
                        }
                    }
                } else {
                    fd_blocks.push((row, side, i));
                }
                row += d;
            }
        }
        if !fd_blocks.is_empty() {
            let h = prec.pow2(-(prec.bits() as i32) / 2);
            let base: Vec<Vec<BigScalar>> = fd_blocks
                .iter()
                .map(|&(_, side, i)| self.endpoint_rows(problem, interval, a, side, i))
                .collect::<Result<_>>()?;
            let mut shifted = a.to_vec();
            for col in 0..n {
                shifted[col] += &h;
                for (&(start, side, i), b0) in fd_blocks.iter().zip(&base) {
                    let moved = self.endpoint_rows(problem, interval, &shifted, side, i)?;
                    for c in 0..d {
                        jac[(start + c, col)] = (moved[c].clone() - &b0[c]) / &h;
                    }
                }
                shifted[col] = a[col].clone();
            }
        }
        // variational rows
        let jf_samples: Vec<Matrix> = (0..self.sample_nodes.len())
            .map(|s| {
                let t = interval.to_global(&self.sample_nodes[s]);
                problem.rhs.jacobian(prec, &t, &self.sample_values(a, s))
            })
            .collect();
        for i in 0..=r - k {
            // sum_s G[i][s] Jf(y_s) L_j(y_s), a d x d block per j
            for j in 0..=r {
                let mut block = Matrix::zeros(prec, d, d);
                for (s, jf) in jf_samples.iter().enumerate() {
                    let w = self.g[(i, s)].clone() * &self.sample_basis[s][j];
                    if w.is_zero() {
                        continue;
                    }
                    for c in 0..d {
                        for e in 0..d {
                            block[(c, e)] += jf[(c, e)].clone() * &w;
                        }
                    }
                }
                for c in 0..d {
                    let mut diag = self.b[(i, j)].clone();
                    if k == 0 {
                        let l = left0[j].clone();
                        if i % 2 == 0 {
                            diag += l;
                        } else {
                            diag -= l;
                        }
                    }
                    jac[(row + c, j * d + c)] += diag;
                    for e in 0..d {
                        jac[(row + c, j * d + e)] -= block[(c, e)].clone() * &half_tau;
                    }
                }
            }
            row += d;
        }
        debug_assert_eq!(row, n);
        Ok(jac)
    }

    /// Flat coefficients of the degree-`r` interpolant of `g` at `r+1` Gauss points.
    fn interpolate(&self, g: impl Fn(&BigScalar) -> Vec<BigScalar>) -> Vec<BigScalar> {
        let prec = self.prec();
        let samples: Vec<Vec<BigScalar>> = self.start_nodes.iter().map(g).collect();
        let r = self.cfg.r;
        let mut flat = vec![prec.zero(); self.unknowns()];
        for j in 0..=r {
            for c in 0..self.d {
                let mut acc = prec.zero();
                for (s, sample) in samples.iter().enumerate() {
                    acc += self.start_inverse[(j, s)].clone() * &sample[c];
                }
                flat[j * self.d + c] = acc;
            }
        }
        flat
    }

    /// Warm start from a Taylor expansion at the left end of the interval.
    pub fn taylor_start(&self, jet: &Jet, interval: &IntervalData) -> Vec<BigScalar> {
        let prec = self.prec();
        let half_tau = interval.tau.clone() / 2u32;
        self.interpolate(|x| {
            // h = t - t_left = (tau/2)(x+1)
            let h = half_tau.clone() * (x.clone() + 1u32);
            let mut out = vec![prec.zero(); self.d];
            let mut power = prec.one();
            for (j, v) in jet.values.iter().enumerate().take(self.cfg.r + 1) {
                let coef = power.clone() / prec.factorial(j as u32);
                for (o, vc) in out.iter_mut().zip(v) {
                    *o += vc.clone() * &coef;
                }
                power *= &h;
            }
            out
        })
    }

    /// Warm start continuing the previous piece onto the current interval.
    pub fn continuation_start(&self, prev: &RefPolynomial, prev_tau: &BigScalar, interval: &IntervalData) -> Vec<BigScalar> {
        let prec = self.prec();
        let ratio = interval.tau.clone() / prev_tau;
        self.interpolate(|x| {
            let xp = ratio.clone() * (x.clone() + 1u32) + 1u32;
            prev.eval(prec, &xp)
        })
    }

    /// Newton iteration from `start` on one interval.
    pub fn newton(
        &self,
        problem: &OdeProblem,
        interval: &IntervalData,
        u_in: &[BigScalar],
        start: Vec<BigScalar>,
    ) -> Result<(RefPolynomial, NewtonEntry)> {
        let prec = self.prec();
        let tol = &self.cfg.newton.tol;
        let mut a = start;
        let mut res = self.residual(problem, interval, u_in, &a)?;
        let mut res_norm = norm_inf(prec, &res);
        for iter in 1..=self.cfg.newton.max_iter {
            let jac = self.jacobian(problem, interval, &a)?;
            let lu = LuFactorization::new(prec, &jac).map_err(|_| VtdError::SingularJacobian {
                interval: interval.index,
            })?;
            let neg: Vec<BigScalar> = res.iter().map(|v| -v.clone()).collect();
            let delta = lu.solve(&neg)?;
            for (ai, di) in a.iter_mut().zip(delta) {
                *ai += di;
            }
            res = self.residual(problem, interval, u_in, &a)?;
            res_norm = norm_inf(prec, &res);
            if !res_norm.is_finite() {
                break;
            }
            if res_norm <= *tol {
                return Ok((
                    RefPolynomial::from_flat(&a, self.d),
                    NewtonEntry {
                        iterations: iter,
                        residual: res_norm.to_f64(),
                        converged: true,
                    },
                ));
            }
        }
        Err(VtdError::NewtonDiverged {
            interval: interval.index,
            iterations: self.cfg.newton.max_iter,
            residual: res_norm.to_f64(),
        })
    }
}

/// Solves the local problem on one interval given `U(t_{n-1}^-) = u_in`,
/// starting Newton from a Taylor expansion of `u_in` built from `jet` when
/// supplied, and from the constant `u_in` otherwise.
pub fn solve_local(
    cfg: &MethodConfig,
    problem: &OdeProblem,
    u_in: &[BigScalar],
    interval: &IntervalData,
    jet: Option<&Jet>,
) -> Result<(RefPolynomial, NewtonEntry)> {
    let assembler = LocalAssembler::new(cfg, problem.dim())?;
    let start = match jet {
        Some(jet) => assembler.taylor_start(jet, interval),
        None => assembler.taylor_start(
            &Jet {
                t: interval.t_left.clone(),
                values: vec![u_in.to_vec()],
            },
            interval,
        ),
    };
    assembler.newton(problem, interval, u_in, start)
}

/// Marches through the mesh, passing `U(t_n^-)` from interval to interval.
pub fn run_vtd(cfg: &MethodConfig, problem: &OdeProblem, mesh: &TimeMesh) -> Result<(DiscreteSolution, NewtonReport)> {
    let prec = cfg.prec;
    let d = problem.dim();
    let assembler = LocalAssembler::new(cfg, d)?;
    let u0 = problem.u0(prec);
    let order = cfg.r.min(problem.rhs.max_order().saturating_add(1));
    let jet = initial_jet(prec, problem, order)?;
    let mut pieces: Vec<RefPolynomial> = Vec::with_capacity(mesh.intervals());
    let mut report = NewtonReport::default();
    let mut u_in = u0.clone();
    for n in 0..mesh.intervals() {
        let interval = IntervalData::of(mesh, n);
        let start = match pieces.last() {
            None => assembler.taylor_start(&jet, &interval),
            Some(prev) => assembler.continuation_start(prev, &mesh.tau(n - 1), &interval),
        };
        let (piece, entry) = assembler.newton(problem, &interval, &u_in, start)?;
        u_in = piece.eval(prec, &prec.one());
        pieces.push(piece);
        report.push(entry);
    }
    Ok((
        DiscreteSolution {
            mesh: mesh.clone(),
            pieces,
            u0,
            prec,
        },
        report,
    ))
}
