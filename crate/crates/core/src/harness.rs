//! Convergence studies: error norms, experimental orders, the built-in case
//! registry and table output.

use std::fmt::Write as _;

use rayon::prelude::*;
use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{compute_diagnostics, default_cutoff, predict_orders, OrderDiagnostics, PredictedOrders};
use crate::error::{Result, VtdError};
use crate::operators::JOperator;
use crate::precision::{norm2, BigScalar, Precision};
use crate::problem::{problem_by_name, OdeProblem};
use crate::solver::{run_vtd, DiscreteSolution, MethodConfig, NewtonReport, TimeMesh};

/// Chebyshev points per interval used for the sup-norms, besides both endpoints.
pub const CHEBYSHEV_SAMPLES: usize = 33;

/// Errors of one discrete solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub n: usize,
    /// `sup_t |u - U|`
    pub linf: f64,
    /// `sup_t |u' - U'|`
    pub w1inf: f64,
    /// `max_n |u(t_n) - U(t_n^-)|`
    pub mesh_linf: f64,
    pub samples_per_interval: usize,
}

fn error_at(sol: &DiscreteSolution, problem: &OdeProblem, n: usize, x: &BigScalar, deriv: usize) -> Result<f64> {
    let prec = sol.precision();
    let t = sol.mesh.to_global(n, x);
    let exact = problem.exact(prec, &t, deriv)?;
    let diff: Vec<BigScalar> = sol
        .eval_piece(n, x, deriv)
        .into_iter()
        .zip(exact)
        .map(|(a, b)| a - b)
        .collect();
    Ok(norm2(prec, &diff).to_f64())
}

/// Maximizes `f` on `[lo, hi]` by golden-section search.
fn golden_max(lo: f64, hi: f64, f: &mut impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut best = fc.max(fd);
    while b - a > 1e-9 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
        best = best.max(fc).max(fd);
    }
    Ok(best)
}

/// Sup-norm of the error (or its derivative) over all intervals: sampling at
/// Chebyshev points and both endpoints, then refining the largest local maxima
/// of every interval that comes close to the global sampled maximum.
fn sup_error(sol: &DiscreteSolution, problem: &OdeProblem, xs: &[f64], deriv: usize) -> Result<f64> {
    let prec = sol.precision();
    let n_int = sol.mesh.intervals();
    let sampled: Vec<Vec<f64>> = (0..n_int)
        .into_par_iter()
        .map(|n| {
            xs.iter()
                .map(|&x| error_at(sol, problem, n, &prec.f64(x), deriv))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let global = sampled.iter().flatten().copied().fold(0.0, f64::max);
    let refined = (0..n_int)
        .into_par_iter()
        .filter(|&n| sampled[n].iter().copied().fold(0.0, f64::max) >= 0.9 * global)
        .map(|n| {
            let e = &sampled[n];
            let mut peaks: Vec<usize> = (0..e.len())
                .filter(|&i| (i == 0 || e[i] >= e[i - 1]) && (i + 1 == e.len() || e[i] >= e[i + 1]))
                .collect();
            peaks.sort_by(|&a, &b| e[b].total_cmp(&e[a]));
            let mut best: f64 = 0.0;
            for &i in peaks.iter().take(3) {
                let lo = xs[i.saturating_sub(1)];
                let hi = xs[(i + 1).min(xs.len() - 1)];
                let mut f = |x: f64| error_at(sol, problem, n, &prec.f64(x), deriv);
                best = best.max(golden_max(lo, hi, &mut f)?).max(e[i]);
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(refined.into_iter().fold(global, f64::max))
}

/// Reference sample points: both endpoints and the Chebyshev points, ascending.
pub fn sample_points() -> Vec<f64> {
    let m = CHEBYSHEV_SAMPLES;
    let mut xs = vec![-1.0];
    xs.extend((0..m).rev().map(|i| ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * m) as f64).cos()));
    xs.push(1.0);
    xs
}

pub fn error_norms(sol: &DiscreteSolution, problem: &OdeProblem) -> Result<ErrorReport> {
    if problem.exact.is_none() {
        return Err(VtdError::ExactSolutionMissing(problem.name.clone()));
    }
    let prec = sol.precision();
    let xs = sample_points();
    let linf = sup_error(sol, problem, &xs, 0)?;
    let w1inf = sup_error(sol, problem, &xs, 1)?;
    let one = prec.one();
    let mesh_linf = (0..sol.mesh.intervals())
        .map(|n| error_at(sol, problem, n, &one, 0))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(ErrorReport {
        n: sol.mesh.intervals(),
        linf,
        w1inf,
        mesh_linf,
        samples_per_interval: xs.len(),
    })
}

/// `log2(coarse / fine)` for errors on meshes with step ratio 2.
pub fn eoc(coarse: f64, fine: f64) -> Result<f64> {
    if !(coarse > 0.0 && fine > 0.0 && coarse.is_finite() && fine.is_finite()) {
        return Err(VtdError::ZeroError);
    }
    Ok((coarse / fine).log2())
}

fn default_steps() -> Vec<usize> {
    vec![32, 64, 128, 256, 512, 1024]
}

fn default_bits() -> u32 {
    Precision::DEFAULT_BITS
}

fn default_problem() -> String {
    "nonlinear-test".into()
}

/// One convergence study: method, operators, mesh sizes and problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseConfig {
    pub name: String,
    pub r: usize,
    pub k: usize,
    pub integrator: String,
    #[serde(default)]
    pub cascade: Vec<String>,
    #[serde(default = "default_steps")]
    pub steps: Vec<usize>,
    #[serde(default = "default_bits")]
    pub bits: u32,
    #[serde(default = "default_problem")]
    pub problem: String,
    /// Overrides the end of the problem's time span, e.g. `"16"` or `"5/2"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<String>,
}

impl CaseConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: CaseConfig = toml::from_str(text).map_err(|e| VtdError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("case configs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() || self.steps.windows(2).any(|w| w[1] <= w[0]) || self.steps[0] == 0 {
            return Err(VtdError::InvalidMesh(format!(
                "step counts must be positive and strictly increasing: {:?}",
                self.steps
            )));
        }
        if self.k > self.r {
            return Err(VtdError::InvalidMethod(format!("need k <= r, got r={}, k={}", self.r, self.k)));
        }
        Precision::new(self.bits)?;
        self.end_time()?;
        Ok(())
    }

    pub fn end_time(&self) -> Result<Option<Rational>> {
        self.t_end
            .as_deref()
            .map(|s| s.trim().parse::<Rational>().map_err(|_| VtdError::Parse(format!("end time {s:?}"))))
            .transpose()
    }

    /// The named problem with the end-time override applied.
    pub fn build_problem(&self) -> Result<OdeProblem> {
        let mut problem = problem_by_name(&self.problem)?;
        if let Some(t_end) = self.end_time()? {
            if t_end <= problem.t0 {
                return Err(VtdError::InvalidMesh(format!("end time {t_end} not after start {}", problem.t0)));
            }
            problem.t_end = t_end;
        }
        Ok(problem)
    }

    pub fn precision(&self) -> Result<Precision> {
        Precision::new(self.bits)
    }

    pub fn method(&self) -> Result<MethodConfig> {
        MethodConfig::parse(self.precision()?, self.r, self.k, &self.integrator, &self.cascade)
    }
}

const FOUR_POINT: &str = "explicit:[-3/4,-1/4,1/4,3/4]";

fn study_case(name: &str, integrator: &str, cascade: &str) -> CaseConfig {
    CaseConfig {
        name: name.into(),
        r: 6,
        k: 3,
        integrator: integrator.into(),
        cascade: vec![cascade.into()],
        steps: default_steps(),
        bits: default_bits(),
        problem: default_problem(),
        t_end: Some("16".into()),
    }
}

/// The twelve VTD(6,3) studies on the nonlinear test problem.
pub fn builtin_cases() -> Vec<CaseConfig> {
    let six_uniform = "explicit:[-1,-3/5,-1/5,1/5,3/5,1]";
    vec![
        study_case("case1", FOUR_POINT, "radau_left:3"),
        study_case("case2a", FOUR_POINT, "gauss:5"),
        study_case("case2a_star", FOUR_POINT, "explicit:[-5/6,-13/23,1/10,12/17,4/5]"),
        study_case("case2b", FOUR_POINT, FOUR_POINT),
        study_case("case2c", six_uniform, six_uniform),
        study_case("case3a", "gauss:6", "explicit:[-1,-1/2,1/4,3/4,1]"),
        study_case("case3b", "gauss:6", "radau_left:3"),
        study_case("case3c", "gauss:6", "gauss:5"),
        study_case("case4a", "gauss:6", "lobatto:5"),
        study_case("case4b", "gauss:6", "gauss:6"),
        study_case("case4c", "gauss:4", "gauss:4"),
        study_case("case4d", "gauss:6", "gauss:3"),
    ]
}

pub fn case_by_name(name: &str) -> Result<CaseConfig> {
    let key = name.trim().to_ascii_lowercase().replace('*', "_star");
    builtin_cases()
        .into_iter()
        .find(|c| c.name == key)
        .ok_or_else(|| VtdError::UnknownCase(name.into()))
}

/// Operators, problem and order diagnostics of a case, ready to run.
#[derive(Clone, Debug)]
pub struct CaseSetup {
    pub case: CaseConfig,
    pub method: MethodConfig,
    pub problem: OdeProblem,
    pub diagnostics: OrderDiagnostics,
    pub predicted: PredictedOrders,
    /// Infinity-norm condition number of the matrix defining `J`.
    pub j_condition: f64,
}

impl CaseSetup {
    pub fn new(case: &CaseConfig) -> Result<Self> {
        case.validate()?;
        let method = case.method()?;
        let problem = case.build_problem()?;
        let prec = method.prec;
        let j = JOperator::new(prec, &method.rule, &method.cascade, case.r, case.k)?;
        let cutoff = default_cutoff(case.r, &method.rule, &method.cascade);
        let diagnostics = compute_diagnostics(prec, &method.rule, &method.cascade, case.r, case.k, cutoff)?;
        let predicted = predict_orders(&diagnostics, case.r, case.k);
        Ok(Self {
            case: case.clone(),
            method,
            problem,
            diagnostics,
            predicted,
            j_condition: j.condition().to_f64(),
        })
    }

    /// Runs the method on a uniform mesh with `n` intervals.
    pub fn solve(&self, n: usize) -> Result<(DiscreteSolution, NewtonReport)> {
        let prec = self.method.prec;
        let mesh = TimeMesh::uniform(prec, &prec.rational(&self.problem.t0), &prec.rational(&self.problem.t_end), n)?;
        run_vtd(&self.method, &self.problem, &mesh)
    }
}

/// Result of a full sweep over the mesh sizes of a case.
#[derive(Clone, Debug)]
pub struct CaseResult {
    pub setup: CaseSetup,
    pub reports: Vec<ErrorReport>,
    pub newton: Vec<NewtonReport>,
    pub table: ConvergenceTable,
}

/// Solves a case for every mesh size (concurrently) and tabulates the errors.
pub fn run_case(case: &CaseConfig) -> Result<CaseResult> {
    let setup = CaseSetup::new(case)?;
    let runs: Vec<(ErrorReport, NewtonReport)> = case
        .steps
        .par_iter()
        .map(|&n| {
            let (sol, newton) = setup.solve(n)?;
            Ok((error_norms(&sol, &setup.problem)?, newton))
        })
        .collect::<Result<_>>()?;
    let (reports, newton): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let table = ConvergenceTable::from_reports(&case.name, &reports, &setup.predicted);
    Ok(CaseResult {
        setup,
        reports,
        newton,
        table,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    Linf,
    W1inf,
    MeshLinf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::Linf, Norm::W1inf, Norm::MeshLinf];

    /// Column key in machine-readable output.
    pub fn key(self) -> &'static str {
        match self {
            Norm::Linf => "L_inf",
            Norm::W1inf => "W1_inf",
            Norm::MeshLinf => "l_inf",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Norm::Linf => "‖e‖_L∞",
            Norm::W1inf => "‖e′‖_L∞",
            Norm::MeshLinf => "‖e‖_ℓ∞",
        }
    }

    fn from_key(key: &str) -> Option<Norm> {
        Norm::ALL.into_iter().find(|n| n.key() == key)
    }

    pub fn of(self, report: &ErrorReport) -> f64 {
        match self {
            Norm::Linf => report.linf,
            Norm::W1inf => report.w1inf,
            Norm::MeshLinf => report.mesh_linf,
        }
    }

    pub fn predicted(self, p: &PredictedOrders) -> i64 {
        match self {
            Norm::Linf => p.linf(),
            Norm::W1inf => p.w1inf,
            Norm::MeshLinf => p.linf_mesh,
        }
    }
}

/// Errors of one norm over the mesh sizes, with experimental orders.
#[derive(Clone, Debug, PartialEq)]
pub struct NormColumn {
    pub norm: Norm,
    pub errors: Vec<Option<f64>>,
    /// `eocs[j]` compares rows `j-1` and `j`; the first entry is always `None`.
    pub eocs: Vec<Option<f64>>,
    pub theo: Option<i64>,
}

impl NormColumn {
    pub fn new(norm: Norm, errors: Vec<Option<f64>>, theo: Option<i64>) -> Self {
        let eocs = (0..errors.len())
            .map(|j| match (j.checked_sub(1).and_then(|i| errors[i]), errors[j]) {
                (Some(c), Some(f)) => eoc(c, f).ok(),
                _ => None,
            })
            .collect();
        Self { norm, errors, eocs, theo }
    }

    fn is_empty(&self) -> bool {
        self.errors.iter().all(Option::is_none)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub name: String,
    pub steps: Vec<usize>,
    pub columns: Vec<NormColumn>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl ConvergenceTable {
    pub fn from_reports(name: &str, reports: &[ErrorReport], predicted: &PredictedOrders) -> Self {
        let columns = Norm::ALL
            .into_iter()
            .map(|norm| {
                NormColumn::new(
                    norm,
                    reports.iter().map(|r| Some(norm.of(r))).collect(),
                    Some(norm.predicted(predicted)),
                )
            })
            .collect();
        Self {
            name: name.into(),
            steps: reports.iter().map(|r| r.n).collect(),
            columns,
        }
    }

    pub fn column(&self, norm: Norm) -> Option<&NormColumn> {
        self.columns.iter().find(|c| c.norm == norm)
    }

    /// Experimental order between the rows for `coarse` and `2 * coarse` steps.
    pub fn eoc_at(&self, norm: Norm, coarse: usize) -> Option<f64> {
        let j = self.steps.iter().position(|&n| n == 2 * coarse)?;
        if j == 0 || self.steps[j - 1] != coarse {
            return None;
        }
        self.column(norm)?.eocs[j]
    }

    /// Renders the table; `compact` writes exponents without the `e`
    /// (`2.415-08`). CSV keeps full precision so that [`Self::parse_csv`] inverts it.
    pub fn emit(&self, format: TableFormat, compact: bool) -> String {
        let cols: Vec<&NormColumn> = self.columns.iter().filter(|c| !c.is_empty()).collect();
        match format {
            TableFormat::Csv => self.emit_csv(&cols),
            TableFormat::Markdown => self.emit_markdown(&cols, compact),
        }
    }

    fn emit_csv(&self, cols: &[&NormColumn]) -> String {
        let mut out = format!("# {}\nN", self.name);
        for c in cols {
            let _ = write!(out, ",{0},{0}_eoc", c.norm.key());
        }
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for (j, n) in self.steps.iter().enumerate() {
            out.push_str(&n.to_string());
            for c in cols {
                let _ = write!(out, ",{},{}", opt(c.errors[j]), opt(c.eocs[j]));
            }
            out.push('\n');
        }
        out.push_str("theo");
        for c in cols {
            let _ = write!(out, ",,{}", c.theo.map(|t| t.to_string()).unwrap_or_default());
        }
        out.push('\n');
        out
    }

    fn emit_markdown(&self, cols: &[&NormColumn], compact: bool) -> String {
        let mut out = format!("### {}\n\n| N |", self.name);
        for c in cols {
            let _ = write!(out, " {} | eoc |", c.norm.title());
        }
        out.push_str("\n|---:|");
        for _ in cols {
            out.push_str("---:|---:|");
        }
        out.push('\n');
        for (j, n) in self.steps.iter().enumerate() {
            let _ = write!(out, "| {n} |");
            for c in cols {
                let err = c.errors[j].map(|e| format_error(e, compact)).unwrap_or_default();
                let rate = c.eocs[j].map(|e| format!("{e:.2}")).unwrap_or_default();
                let _ = write!(out, " {err} | {rate} |");
            }
            out.push('\n');
        }
        out.push_str("| theo |");
        for c in cols {
            let _ = write!(out, " | {} |", c.theo.map(|t| t.to_string()).unwrap_or_default());
        }
        out.push('\n');
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let bad = |msg: &str| VtdError::Parse(msg.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let name = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| bad("missing table name"))?
            .to_string();
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("missing header"))?.split(',').collect();
        if header.first() != Some(&"N") || header.len() % 2 != 1 {
            return Err(bad("malformed header"));
        }
        let norms: Vec<Norm> = header[1..]
            .chunks(2)
            .map(|pair| Norm::from_key(pair[0]).ok_or_else(|| bad(pair[0])))
            .collect::<Result<_>>()?;
        let mut steps = Vec::new();
        let mut errors = vec![Vec::new(); norms.len()];
        let mut eocs = vec![Vec::new(); norms.len()];
        let mut theo = vec![None; norms.len()];
        let field = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(s))
            }
        };
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(bad(line));
            }
            if cells[0] == "theo" {
                for (i, pair) in cells[1..].chunks(2).enumerate() {
                    theo[i] = if pair[1].is_empty() {
                        None
                    } else {
                        Some(pair[1].parse().map_err(|_| bad(pair[1]))?)
                    };
                }
                continue;
            }
            steps.push(cells[0].parse().map_err(|_| bad(cells[0]))?);
            for (i, pair) in cells[1..].chunks(2).enumerate() {
                errors[i].push(field(pair[0])?);
                eocs[i].push(field(pair[1])?);
            }
        }
        let columns = norms
            .into_iter()
            .enumerate()
            .map(|(i, norm)| NormColumn {
                norm,
                errors: std::mem::take(&mut errors[i]),
                eocs: std::mem::take(&mut eocs[i]),
                theo: theo[i],
            })
            .collect();
        Ok(Self { name, steps, columns })
    }
}

/// Four significant digits; `compact` drops the exponent marker.
pub fn format_error(value: f64, compact: bool) -> String {
    let s = format!("{value:.3e}");
    let (mantissa, exp) = s.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    if compact {
        format!("{mantissa}{sign}{:02}", exp.abs())
    } else {
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}
