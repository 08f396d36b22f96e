use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vtd::harness::{builtin_cases, case_by_name, run_case, CaseConfig, CaseSetup, TableFormat};
use vtd::VtdError;

#[derive(Parser)]
#[command(name = "vtd", version, about = "Variational time discretization convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in cases.
    ListCases,
    /// Print the order diagnostics and predicted convergence orders of a case.
    Diagnose {
        #[arg(long)]
        case: String,
    },
    /// Run a convergence study and print its table.
    Run {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        case: Option<String>,
        /// TOML file describing a case.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated step counts, e.g. 32,64,128.
        #[arg(long, value_delimiter = ',')]
        steps: Option<Vec<usize>>,
        #[arg(long, env = "VTD_BITS")]
        bits: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
        /// Write errors as 2.415-08 instead of 2.415e-08.
        #[arg(long)]
        compact: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), VtdError> {
    match cli.command {
        Command::ListCases => {
            for case in builtin_cases() {
                println!(
                    "{:<12} VTD({},{})  integrator {:<34} cascade {}",
                    case.name,
                    case.r,
                    case.k,
                    case.integrator,
                    case.cascade.join(" o ")
                );
            }
        }
        Command::Diagnose { case } => {
            let setup = CaseSetup::new(&case_by_name(&case)?)?;
            print_diagnostics(&setup);
        }
        Command::Run {
            case,
            config,
            steps,
            bits,
            format,
            compact,
        } => {
            let mut cfg = match (case, config) {
                (Some(name), _) => case_by_name(&name)?,
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| VtdError::Parse(format!("{}: {e}", path.display())))?;
                    CaseConfig::from_toml(&text)?
                }
                (None, None) => unreachable!("clap requires one of --case/--config"),
            };
            if let Some(steps) = steps {
                cfg.steps = steps;
            }
            if let Some(bits) = bits {
                cfg.bits = bits;
            }
            cfg.validate()?;
            let result = run_case(&cfg)?;
            eprintln!("{}", diagnostics_text(&result.setup));
            let format = match format {
                Format::Csv => TableFormat::Csv,
                Format::Markdown => TableFormat::Markdown,
            };
            print!("{}", result.table.emit(format, compact));
        }
    }
    Ok(())
}

fn print_diagnostics(setup: &CaseSetup) {
    println!("{}", diagnostics_text(setup));
}

fn diagnostics_text(setup: &CaseSetup) -> String {
    let d = &setup.diagnostics;
    let p = &setup.predicted;
    let r_if_i: Vec<String> = d.r_If_I.iter().map(ToString::to_string).collect();
    let opt = |v: Option<i64>| v.map_or("n/a".to_string(), |x| x.to_string());
    format!(
        "case {name}: VTD({r},{k}), integrator {int}, cascade [{cas}]\n\
         cond(J) = {cond:.3e}\n\
         r_ex(I) = {rex}, r_ex(If) = {rexf}, r(If) = {rif}, r_If_I(i) = [{rifi}], r_I_I = {rii}, r_var = {rvar}\n\
         predicted: L_inf basic {lb}, improved {li} (gate {gate}), W1_inf {w1}, l_inf {mesh} (bounded U {bu})",
        name = setup.case.name,
        r = setup.case.r,
        k = setup.case.k,
        int = setup.case.integrator,
        cas = setup.case.cascade.join(", "),
        cond = setup.j_condition,
        rex = d.r_ex_I,
        rexf = d.r_ex_If,
        rif = d.r_If,
        rifi = r_if_i.join(", "),
        rii = d.r_I_I,
        rvar = d.r_var,
        lb = p.linf_basic,
        li = opt(p.linf_improved),
        gate = p.gate_ok,
        w1 = p.w1inf,
        mesh = p.linf_mesh,
        bu = p.bounded_U_ok,
    )
}
