//! Command-line front end. `run_cli` never exits the process; it returns the
//! text to print and the exit code.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use ranking_core::gain::PriceTable;
use ranking_core::graph::{generate_family, Family};
use ranking_core::Engine;
use ranking_lp::{
    build_lp, evaluate_price_table, export_mps, export_mps_streaming, solve, verify_solution, LpStatus,
    PivotRule, SolverOptions,
};

use crate::error::ForgeError;
use crate::montecarlo::{exact_ratio, monte_carlo_ratio};
use crate::sweep::{lemma_sweep, CorpusSelector, SweepConfig};
use crate::table::{published_alpha, reproduce_lp_table, table_csv, TABLE_TOLERANCE};
use crate::with_jobs;

/// Largest k solved in-process; larger k must go through `--export`.
pub const IN_PROCESS_K_MAX: u32 = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExitCode {
    Success = 0,
    Violation = 1,
    Usage = 2,
    ResourceLimit = 3,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommandOutcome {
    pub exit_code: ExitCode,
    /// One-line verdict.
    pub summary: String,
    /// Full text for stdout, ending with the summary line.
    pub output: String,
    pub artifacts: Vec<PathBuf>,
}

impl CommandOutcome {
    fn new(exit_code: ExitCode, lines: Vec<String>, summary: String, artifacts: Vec<PathBuf>) -> Self {
        let mut output = lines.join("\n");
        if !output.is_empty() {
            output.push('\n');
        }
        output.push_str(&summary);
        output.push('\n');
        CommandOutcome {
            exit_code,
            summary,
            output,
            artifacts,
        }
    }

    fn error(exit_code: ExitCode, message: impl Into<String>) -> Self {
        CommandOutcome::new(exit_code, Vec::new(), format!("error: {}", message.into()), Vec::new())
    }
}

#[derive(Parser, Debug)]
#[command(name = "ranking-forge", about = "RANKING analysis: LP bounds, price tables, lemma sweeps, simulation")]
struct Cli {
    /// Worker threads.
    #[arg(long, global = true, env = "RANKING_FORGE_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and solve the LP for k buckets; optionally write it as MPS.
    SolveLp {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        export: Option<PathBuf>,
        /// Residual tolerance for the exact verification.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Use Bland's rule from the first pivot.
        #[arg(long)]
        bland: bool,
        /// Write the solution as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Evaluate a price table and report its guaranteed ratio.
    ValidateF {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, requires = "tol")]
        expect: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the structural-lemma sweep.
    VerifyLemmas {
        #[arg(long, default_value_t = 5)]
        max_n: usize,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        exhaustive: bool,
        /// Orders and rank vectors per instance when sampling.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// default, small or appendix.
        #[arg(long, default_value = "default")]
        corpus: String,
        /// Run against the deliberately broken engine.
        #[arg(long, hide = true)]
        mutate: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Estimate the approximation ratio on a graph family.
    Simulate {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        /// Also average over every order exactly.
        #[arg(long)]
        exact: bool,
    },
    /// Reproduce the LP table for k = 1..=k-max.
    Reproduce {
        #[arg(long, required = true)]
        table1: bool,
        #[arg(long)]
        k_max: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn exit_for(e: &ForgeError) -> ExitCode {
    use ranking_core::Error as CoreError;
    use ranking_lp::LpError;
    match e {
        ForgeError::Core(CoreError::SizeLimit { .. } | CoreError::EnumerationLimit { .. })
        | ForgeError::Lp(LpError::Core(CoreError::SizeLimit { .. } | CoreError::EnumerationLimit { .. }))
        | ForgeError::Lp(LpError::Stall(_))
        | ForgeError::Pool(_) => ExitCode::ResourceLimit,
        _ => ExitCode::Usage,
    }
}

fn failed(e: ForgeError) -> CommandOutcome {
    CommandOutcome::error(exit_for(&e), e.to_string())
}

fn write_text(path: &Path, text: &str) -> Result<(), ForgeError> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn run_cli<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ExitCode::Usage } else { ExitCode::Success };
            let text = e.render().to_string();
            return CommandOutcome {
                exit_code: code,
                summary: text.lines().next().unwrap_or_default().to_string(),
                output: text,
                artifacts: Vec::new(),
            };
        }
    };
    let jobs = cli.jobs;
    match with_jobs(jobs, move || dispatch(cli.command)) {
        Ok(outcome) => outcome,
        Err(e) => failed(e),
    }
}

fn dispatch(command: Command) -> CommandOutcome {
    match command {
        Command::SolveLp {
            k,
            export,
            tol,
            bland,
            json,
        } => solve_lp(k, export, tol, bland, json),
        Command::ValidateF { file, expect, tol, json } => validate_f(&file, expect, tol, json),
        Command::VerifyLemmas {
            max_n,
            k,
            seed,
            exhaustive,
            samples,
            corpus,
            mutate,
            json,
        } => {
            let corpus = match corpus.as_str() {
                "default" => CorpusSelector::Default,
                "small" => CorpusSelector::Small,
                "appendix" => CorpusSelector::Appendix,
                other => return CommandOutcome::error(ExitCode::Usage, format!("unknown corpus `{other}`")),
            };
            let cfg = SweepConfig {
                max_n,
                k,
                corpus,
                exhaustive,
                samples,
                seed,
                engine: if mutate { Engine::MUTATED } else { Engine::FAITHFUL },
                ..SweepConfig::default()
            };
            verify_lemmas(&cfg, json)
        }
        Command::Simulate {
            family,
            n,
            k,
            trials,
            seed,
            density,
            exact,
        } => simulate(&family, n, k, trials, seed, density, exact),
        Command::Reproduce { k_max, csv, .. } => reproduce(k_max, csv),
    }
}

fn solve_lp(k: u32, export: Option<PathBuf>, tol: f64, bland: bool, json: Option<PathBuf>) -> CommandOutcome {
    if k == 0 {
        return CommandOutcome::error(ExitCode::Usage, "k must be ≥ 1");
    }
    if tol.is_nan() || tol <= 0.0 {
        return CommandOutcome::error(ExitCode::Usage, "tol must be positive");
    }
    let in_process = k <= IN_PROCESS_K_MAX;
    if !in_process && export.is_none() {
        return CommandOutcome::error(
            ExitCode::ResourceLimit,
            format!("k={k} exceeds the in-process budget (k ≤ {IN_PROCESS_K_MAX}); use --export"),
        );
    }
    let mut lines = Vec::new();
    let mut artifacts = Vec::new();
    if let Some(path) = &export {
        let written = (|| -> Result<_, ForgeError> {
            let mut w = BufWriter::new(File::create(path)?);
            let summary = if in_process {
                export_mps(&build_lp(k)?, &mut w)?
            } else {
                export_mps_streaming(k, &mut w)?
            };
            w.flush()?;
            Ok(summary)
        })();
        match written {
            Ok(s) => {
                lines.push(format!(
                    "wrote {} ({} rows, {} columns, {} nonzeros)",
                    path.display(),
                    s.rows,
                    s.columns,
                    s.nonzeros
                ));
                artifacts.push(path.clone());
            }
            Err(ForgeError::Lp(ranking_lp::LpError::InvalidParameter(m))) => {
                return CommandOutcome::error(ExitCode::ResourceLimit, m)
            }
            Err(e) => return failed(e),
        }
    }
    if !in_process {
        let summary = format!("k={k}: exported only, in-process solve skipped");
        return CommandOutcome::new(ExitCode::Success, lines, summary, artifacts);
    }
    let opts = SolverOptions {
        pivot_rule: if bland { PivotRule::Bland } else { SolverOptions::default().pivot_rule },
        ..SolverOptions::default()
    };
    let result = (|| -> Result<_, ForgeError> {
        let m = build_lp(k)?;
        let s = solve(&m, &opts)?;
        let report = verify_solution(&m, &s, tol)?;
        Ok((s, report))
    })();
    let (s, report) = match result {
        Ok(r) => r,
        Err(e) => return failed(e),
    };
    if s.status != LpStatus::Optimal {
        let code = if s.status == LpStatus::Limit { ExitCode::ResourceLimit } else { ExitCode::Violation };
        return CommandOutcome::new(code, lines, format!("k={k}: solver status {:?}", s.status), artifacts);
    }
    lines.push(format!("iterations={} time={:.5}s", s.iterations, s.elapsed_secs));
    lines.push(format!(
        "verify: {} (max row residual {:.5e}, bound {:.5e}, objective gap {:.5e}, tol {tol:e})",
        if report.pass { "pass" } else { "FAIL" },
        report.max_row_violation,
        report.max_bound_violation,
        report.objective_gap
    ));
    let mut ok = report.pass;
    if let Some(p) = published_alpha(k) {
        let matches = (s.alpha - p).abs() <= TABLE_TOLERANCE;
        ok &= matches;
        lines.push(format!("published={p:.5} {}", if matches { "match" } else { "MISMATCH" }));
    }
    if let Some(path) = json {
        if let Err(e) = write_text(&path, &s.to_json()) {
            return failed(e);
        }
        artifacts.push(path);
    }
    let code = if ok { ExitCode::Success } else { ExitCode::Violation };
    CommandOutcome::new(code, lines, format!("k={k} α={:.5}", s.alpha), artifacts)
}

fn validate_f(file: &Path, expect: Option<f64>, tol: Option<f64>, json: Option<PathBuf>) -> CommandOutcome {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return CommandOutcome::error(ExitCode::Usage, format!("{}: {e}", file.display())),
    };
    let table = match PriceTable::from_json(&text) {
        Ok(t) => t,
        Err(ranking_core::Error::PriceTable(m)) => {
            return CommandOutcome::error(ExitCode::Violation, format!("table is not a valid price function: {m}"))
        }
        Err(e) => return CommandOutcome::error(ExitCode::Usage, e.to_string()),
    };
    let eval = match evaluate_price_table(&table) {
        Ok(e) => e,
        Err(e) => return failed(e.into()),
    };
    let mut lines: Vec<String> = eval
        .buckets
        .iter()
        .map(|b| format!("bucket {}: {:.5} ({:?})", b.x_u, b.alpha_i, b.binding))
        .collect();
    let mut artifacts = Vec::new();
    if let Some(path) = json {
        if let Err(e) = write_text(&path, &eval.to_json()) {
            return failed(e);
        }
        artifacts.push(path);
    }
    let mut code = ExitCode::Success;
    let mut summary = format!("k={} α={:.5}", eval.k, eval.alpha);
    if let (Some(want), Some(tol)) = (expect, tol) {
        let within = (eval.alpha - want).abs() <= tol;
        lines.push(format!("expected {want:.5} ± {tol:.5}: {}", if within { "ok" } else { "MISMATCH" }));
        if !within {
            code = ExitCode::Violation;
            summary.push_str(" (mismatch)");
        }
    }
    CommandOutcome::new(code, lines, summary, artifacts)
}

fn verify_lemmas(cfg: &SweepConfig, json: Option<PathBuf>) -> CommandOutcome {
    let report = match lemma_sweep(cfg) {
        Ok(r) => r,
        Err(e) => return failed(e),
    };
    let mut lines = vec![format!("corpus: {}", report.corpus)];
    lines.extend(report.claims_checked.iter().map(|(c, n)| format!("{c}: {n} checks")));
    lines.push(format!("backup matched observed: {}", report.backup_matched_observed));
    lines.extend(report.violations.iter().take(5).map(|v| format!("violation: {v}")));
    let mut artifacts = Vec::new();
    if let Some(path) = json {
        if let Err(e) = write_text(&path, &report.to_json()) {
            return failed(e);
        }
        artifacts.push(path);
    }
    let code = if report.passed() { ExitCode::Success } else { ExitCode::Violation };
    CommandOutcome::new(code, lines, report.summary_line(), artifacts)
}

fn simulate(family: &str, n: usize, k: u32, trials: u64, seed: u64, density: f64, exact: bool) -> CommandOutcome {
    let result = (|| -> Result<_, ForgeError> {
        let g = generate_family(&Family::from_name(family, n, density, seed)?)?;
        let mc = monte_carlo_ratio(&g, trials, k, seed)?;
        let ex = if exact { Some(exact_ratio(&g)?) } else { None };
        Ok((g, mc, ex))
    })();
    let (g, mc, ex) = match result {
        Ok(r) => r,
        Err(e) => return failed(e),
    };
    let mut lines = vec![
        format!("graph: {} vertices, {} edges, |M*|={}", g.vertex_count(), g.edge_count(), mc.optimum),
        format!("trials={} k={} seed={}", mc.samples, mc.k, mc.seed),
        format!("95% interval [{:.5}, {:.5}]", mc.lower(), mc.upper()),
    ];
    if let Some(e) = &ex {
        lines.push(format!("exact ratio {} = {:.5} over {} orders", e.ratio(), e.value(), e.orders));
    }
    let summary = format!("ratio={:.5} ± {:.5}", mc.mean, mc.half_width);
    CommandOutcome::new(ExitCode::Success, lines, summary, Vec::new())
}

fn reproduce(k_max: u32, csv: Option<PathBuf>) -> CommandOutcome {
    if k_max == 0 {
        return CommandOutcome::error(ExitCode::Usage, "k-max must be ≥ 1");
    }
    if k_max > IN_PROCESS_K_MAX {
        return CommandOutcome::error(
            ExitCode::ResourceLimit,
            format!("k-max={k_max} exceeds the in-process budget (k ≤ {IN_PROCESS_K_MAX})"),
        );
    }
    let ks: Vec<u32> = (1..=k_max).collect();
    let rows = reproduce_lp_table(&ks);
    let text = table_csv(&rows);
    let mut artifacts = Vec::new();
    if let Some(path) = csv {
        if let Err(e) = write_text(&path, &text) {
            return failed(e);
        }
        artifacts.push(path);
    }
    let bad = rows.iter().filter(|r| !r.matches()).count();
    let code = if bad == 0 { ExitCode::Success } else { ExitCode::Violation };
    let lines = vec![text.trim_end().to_string()];
    let summary = format!("{} of {} rows match within {TABLE_TOLERANCE:e}", rows.len() - bad, rows.len());
    CommandOutcome::new(code, lines, summary, artifacts)
}
