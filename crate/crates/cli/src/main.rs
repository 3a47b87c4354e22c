//! Command-line front end: theorem suites, ad-hoc exact brackets and
//! commutators, admissibility solves, the Drach scan, and trajectory
//! integration with conservation monitoring.
//!
//! Exit codes: 0 all checks passed, 1 a check failed (the failing ids are
//! printed to stderr), 2 usage or parse errors.

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use superint_core::detsys;
use superint_core::dynamics::{integrate, TrajectorySpec, TrajectoryStatus};
use superint_core::models::{self, DrachParams, Flavor};
use superint_core::phasepoly::{PhasePoint, PhasePolynomial};
use superint_core::rational::parse_rational;
use superint_core::report::VerificationReport;
use superint_core::symexpr::Expression;
use superint_core::weylop::WeylOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct OutputOpts {
    /// Output format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the output to a file instead of stdout.
    #[arg(long)]
    out: Option<String>,
    /// Include per-check timing in machine-readable reports (breaks
    /// byte-determinism; off by default).
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct SymbolOpts {
    /// Substitute an exact rational value (e.g. "2" or "-1/3") for alpha
    /// before computing; alpha stays symbolic when omitted.
    #[arg(long)]
    alpha: Option<String>,
    /// Substitute an exact rational value for hbar before computing;
    /// hbar stays symbolic when omitted.
    #[arg(long)]
    hbar: Option<String>,
}

impl SymbolOpts {
    fn apply_phase(&self, p: PhasePolynomial) -> Result<PhasePolynomial, String> {
        let mut p = p;
        if let Some(a) = &self.alpha {
            p = p.substitute_alpha(&parse_rational(a).map_err(|e| e.to_string())?);
        }
        if let Some(h) = &self.hbar {
            p = p.substitute_hbar(&parse_rational(h).map_err(|e| e.to_string())?);
        }
        Ok(p)
    }

    fn apply_expr(&self, e: Expression) -> Result<Expression, String> {
        let mut e = e;
        if let Some(a) = &self.alpha {
            e = e.substitute_alpha(&parse_rational(a).map_err(|e| e.to_string())?);
        }
        if let Some(h) = &self.hbar {
            e = e.substitute_hbar(&parse_rational(h).map_err(|e| e.to_string())?);
        }
        Ok(e)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "superint",
    about = "Exact verification of 2D superintegrable systems with third- and fourth-order integrals",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every theorem-level suite on the shipped classical and quantum
    /// systems; exit 0 iff all checks pass.
    VerifyAll {
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Exact Poisson bracket of two phase-space expressions
    /// (convention {x, p1} = +1).
    Bracket {
        expr1: String,
        expr2: String,
        #[command(flatten)]
        symbols: SymbolOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Exact operator commutator of the Weyl quantizations of two
    /// phase-space expressions.
    Commutator {
        expr1: String,
        expr2: String,
        #[command(flatten)]
        symbols: SymbolOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Exact basis of admissible leading-term constants for an integral of
    /// the given order over the given potential (necessary condition).
    Detsolve {
        #[arg(long)]
        order: u8,
        #[arg(long)]
        potential: String,
        #[command(flatten)]
        symbols: SymbolOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Admissibility scan of the Drach-family potential
    /// x^(-2/3) (a + b y + c (4x^2 + 3y^2)).
    Drach {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        c: String,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Integrate the classical flow and monitor conservation of H, X, Y;
    /// emits CSV samples.
    Simulate {
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long, default_value_t = 0.0)]
        y0: f64,
        #[arg(long, default_value_t = 0.0)]
        p10: f64,
        #[arg(long, default_value_t = 1.0)]
        p20: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 5.0)]
        tend: f64,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        /// Sample every this many steps.
        #[arg(long, default_value_t = 10)]
        stride: usize,
        /// Fail (exit 1) when any monitor drifts beyond this relative
        /// tolerance.
        #[arg(long)]
        drift_tol: Option<f64>,
        /// Write the CSV to a file instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
}

fn emit(output: &OutputOpts, text: String) -> Result<(), String> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {path}: {e}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report_output(reports: &[VerificationReport], output: &OutputOpts) -> String {
    match output.format {
        Format::Text => reports
            .iter()
            .map(|r| r.to_text())
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Json => {
            let docs: Vec<serde_json::Value> = reports
                .iter()
                .map(|r| serde_json::from_str(&r.to_json(output.timings)).unwrap())
                .collect();
            let doc = json!({
                "schema_version": superint_core::report::REPORT_SCHEMA_VERSION,
                "suites": docs,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
        }
    }
}

/// Exit code 1 when a suite has failures, with the ids on stderr.
fn finish_reports(reports: Vec<VerificationReport>, output: &OutputOpts) -> Result<u8, String> {
    let text = report_output(&reports, output);
    emit(output, text)?;
    let failing: Vec<String> = reports
        .iter()
        .flat_map(|r| r.failing_ids().into_iter().map(String::from))
        .collect();
    if failing.is_empty() {
        Ok(0)
    } else {
        eprintln!("failed checks: {}", failing.join(", "));
        Ok(1)
    }
}

fn parse_phase(text: &str) -> Result<PhasePolynomial, String> {
    PhasePolynomial::parse(text).map_err(|e| format!("in {text:?}: {e}"))
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::VerifyAll { output } => {
            let reports = vec![
                models::verify_theorem(&models::reference_system(Flavor::Classical)),
                models::verify_theorem(&models::reference_system(Flavor::Quantum)),
            ];
            finish_reports(reports, &output)
        }
        Command::Bracket {
            expr1,
            expr2,
            symbols,
            output,
        } => {
            let a = symbols.apply_phase(parse_phase(&expr1)?)?;
            let b = symbols.apply_phase(parse_phase(&expr2)?)?;
            let result = a.poisson_bracket(&b);
            let text = match output.format {
                Format::Text => format!("{result}\n"),
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&json!({
                        "schema_version": superint_core::report::REPORT_SCHEMA_VERSION,
                        "operation": "poisson-bracket",
                        "result": result.to_string(),
                    }))
                    .unwrap()
                ),
            };
            emit(&output, text)?;
            Ok(0)
        }
        Command::Commutator {
            expr1,
            expr2,
            symbols,
            output,
        } => {
            let a = WeylOperator::quantize(&symbols.apply_phase(parse_phase(&expr1)?)?);
            let b = WeylOperator::quantize(&symbols.apply_phase(parse_phase(&expr2)?)?);
            let result = a.commutator(&b);
            let text = match output.format {
                Format::Text => format!(
                    "normal-ordered: {result}\nsymmetrized: {}\n",
                    result.to_symmetrized_string()
                ),
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&json!({
                        "schema_version": superint_core::report::REPORT_SCHEMA_VERSION,
                        "operation": "commutator",
                        "normal_ordered": result.to_string(),
                        "symmetrized": result.to_symmetrized_string(),
                    }))
                    .unwrap()
                ),
            };
            emit(&output, text)?;
            Ok(0)
        }
        Command::Detsolve {
            order,
            potential,
            symbols,
            output,
        } => {
            if !(2..=4).contains(&order) {
                return Err("order must be 2, 3, or 4".into());
            }
            let v = symbols.apply_expr(
                Expression::parse(&potential)
                    .map_err(|e| format!("in potential {potential:?}: {e}"))?,
            )?;
            let sol = detsys::solve_admissible(order, &v);
            let text = match output.format {
                Format::Text => {
                    let mut s = format!(
                        "order {} admissible basis (dimension {}; system {}x{}, rank {}):\n",
                        order,
                        sol.dimension(),
                        sol.rows,
                        sol.cols,
                        sol.rank
                    );
                    for b in &sol.basis {
                        s.push_str(&format!("  {b}\n"));
                    }
                    s.push_str("verdict: necessary condition only\n");
                    s
                }
                Format::Json => {
                    let basis: Vec<serde_json::Value> = sol
                        .basis
                        .iter()
                        .map(|b| {
                            let entries: serde_json::Map<String, serde_json::Value> = b
                                .iter()
                                .map(|(&(j, k, l), v)| {
                                    (format!("A{j}{k}{l}"), json!(v.to_string()))
                                })
                                .collect();
                            serde_json::Value::Object(entries)
                        })
                        .collect();
                    format!(
                        "{}\n",
                        serde_json::to_string_pretty(&json!({
                            "schema_version": superint_core::report::REPORT_SCHEMA_VERSION,
                            "operation": "detsolve",
                            "order": order,
                            "system": {
                                "rows": sol.rows,
                                "cols": sol.cols,
                                "rank": sol.rank,
                            },
                            "dimension": sol.dimension(),
                            "verdict": "necessary condition only",
                            "basis": basis,
                        }))
                        .unwrap()
                    )
                }
            };
            emit(&output, text)?;
            Ok(0)
        }
        Command::Drach { a, b, c, output } => {
            let params = DrachParams {
                a: parse_rational(&a).map_err(|e| e.to_string())?,
                b: parse_rational(&b).map_err(|e| e.to_string())?,
                c: parse_rational(&c).map_err(|e| e.to_string())?,
            };
            finish_reports(vec![models::drach_suite(&params)], &output)
        }
        Command::Simulate {
            x0,
            y0,
            p10,
            p20,
            alpha,
            tend,
            dt,
            stride,
            drift_tol,
            out,
        } => {
            let system = models::reference_system(Flavor::Classical);
            let h = system.hamiltonian.phase().unwrap().clone();
            let mut spec = TrajectorySpec::new(
                PhasePoint {
                    x: x0,
                    y: y0,
                    p1: p10,
                    p2: p20,
                },
                alpha,
                tend,
                dt,
            )
            .with_monitor("H", h.clone());
            for (name, o) in &system.integrals {
                spec = spec.with_monitor(name, o.phase().unwrap().clone());
            }
            spec.sample_stride = stride.max(1);
            let record = integrate(&h, &spec).map_err(|e| e.to_string())?;

            let mut csv = Vec::new();
            record.write_csv(&mut csv).map_err(|e| e.to_string())?;
            match &out {
                Some(path) => {
                    fs::write(path, &csv).map_err(|e| format!("cannot write {path}: {e}"))?
                }
                None => std::io::stdout()
                    .write_all(&csv)
                    .map_err(|e| e.to_string())?,
            }

            for (i, name) in record.monitor_names.iter().enumerate() {
                eprintln!(
                    "{name}: max relative drift {:.3e}",
                    record.max_relative_drift[i]
                );
            }
            match record.status {
                TrajectoryStatus::Completed => {}
                TrajectoryStatus::DomainExit => {
                    eprintln!(
                        "domain-exit at t = {:.6}: x reached the singular axis; partial record emitted",
                        record.final_time
                    );
                    return Ok(1);
                }
                TrajectoryStatus::NonFinite => {
                    eprintln!(
                        "non-finite state at t = {:.6}; partial record emitted",
                        record.final_time
                    );
                    return Ok(1);
                }
            }
            if let Some(tol) = drift_tol {
                for (i, name) in record.monitor_names.iter().enumerate() {
                    if record.max_relative_drift[i] > tol {
                        eprintln!("failed check: drift.{name} exceeds {tol:e}");
                        return Ok(1);
                    }
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
