//! Command-line front end shared by the `approval` binary and its tests.
//!
//! Exit codes: 0 success, 1 a verification check did not pass, 2 malformed
//! input, 3 input outside a mechanism's domain, 4 the strategy oracle
//! disagreed with a closed-form rule.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::mechanisms::Mechanism;
use crate::model::{BeliefProfile, Domain, OptionSet, SelectionPlan};
use crate::sim::{run_simulation, SimConfig};
use crate::strategy::{brute_force_optimal, brute_force_optimal_utility, rule_relative_belief, rule_threshold};
use crate::verify::{run_suite, Suite, SuiteParams};

/// Environment variable naming the default mechanism config file.
pub const CONFIG_ENV: &str = "APPROVAL_CONFIG";

pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "approval", version, about = "Approval-voting payment mechanisms for crowdsourcing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one payment per evaluation row.
    Pay(PayArgs),
    /// Compute the incentivised selection for each belief row.
    Solve(SolveArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Simulate a worker population.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct PayArgs {
    /// Mechanism config (JSON). Defaults to $APPROVAL_CONFIG.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Evaluations CSV, one row of G signed integers per worker.
    pub evaluations: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Round payments to two decimals.
    #[arg(long)]
    pub round_cents: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Beliefs CSV, one row of B probabilities per question.
    pub beliefs: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Cross-check every row against the exhaustive oracle.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// ic-mech1, ic-mech2, frugality, nfl, lemma1, impossibility-grid,
    /// threshold-relations, boundary-equality or all.
    pub suite: String,
    #[arg(long = "B", alias = "num-options", default_value_t = 3)]
    pub num_options: usize,
    #[arg(long = "G", alias = "num-gold", default_value_t = 2)]
    pub num_gold: usize,
    #[arg(long = "N", alias = "num-questions", default_value_t = 3)]
    pub num_questions: usize,
    #[arg(long, default_value_t = 0.2)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.3)]
    pub sigma: f64,
    #[arg(long, default_value_t = 50)]
    pub resolution: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimFormat {
    Json,
    Table,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config (JSON).
    pub config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = SimFormat::Json)]
    pub format: SimFormat,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn malformed(message: impl Into<String>) -> Self {
        Self { code: EXIT_MALFORMED, message: message.into() }
    }

    fn from_lib(context: &str, err: Error) -> Self {
        let code = match err {
            Error::DomainError(_)
            | Error::EmptySelectionInMech1Context { .. }
            | Error::DegenerateBelief(_)
            | Error::InstanceTooLarge { .. } => EXIT_DOMAIN,
            _ => EXIT_MALFORMED,
        };
        Self { code, message: format!("{context}: {err}") }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Formats a float with 17 significant digits, positional for decimal
/// exponents in `-5..=16` and scientific otherwise. Integral values keep a
/// trailing `.0`.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    if !(-5..=16).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        let tail = if tail.is_empty() { "0" } else { tail };
        return format!("{sign}{head}.{tail}e{exp}");
    }
    let (int_part, frac_part) = if exp < 0 {
        ("0".to_string(), format!("{}{digits}", "0".repeat((-exp - 1) as usize)))
    } else {
        let point = exp as usize + 1;
        if digits.len() > point {
            (digits[..point].to_string(), digits[point..].to_string())
        } else {
            (format!("{digits}{}", "0".repeat(point - digits.len())), String::new())
        }
    };
    let frac_part = if frac_part.is_empty() { "0".to_string() } else { frac_part };
    format!("{sign}{int_part}.{frac_part}")
}

/// One line per question: 1-based options joined by commas, `-` for none.
pub fn format_plan(plan: &SelectionPlan) -> String {
    plan.selected().iter().map(|s| format!("{s}\n")).collect()
}

/// Inverse of [`format_plan`] for a single line.
pub fn parse_plan_line(line: &str) -> Result<OptionSet, String> {
    let line = line.trim();
    if line == "-" {
        return Ok(OptionSet::EMPTY);
    }
    line.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&o| (1..=crate::model::MAX_OPTIONS).contains(&o))
                .map(|o| o - 1)
                .ok_or_else(|| format!("bad option {t:?}"))
        })
        .collect()
}

/// Writes rows as comma-separated values.
pub fn format_rows<T, F: Fn(&T) -> String>(rows: &[Vec<T>], cell: F) -> String {
    rows.iter()
        .map(|r| r.iter().map(&cell).collect::<Vec<_>>().join(",") + "\n")
        .collect()
}

/// Parses a header-less comma-separated file of numbers. Blank lines and
/// lines starting with `#` are skipped; errors name the 1-based line.
pub fn parse_numeric_csv<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<(u64, Vec<T>)>> {
    let mut rows = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index as u64 + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let values = trimmed
            .split(',')
            .enumerate()
            .map(|(col, field)| {
                let field = field.trim();
                field.parse::<T>().map_err(|_| {
                    CliError::malformed(format!("{what}: line {line}, column {}: cannot parse {field:?}", col + 1))
                })
            })
            .collect::<CliResult<Vec<T>>>()?;
        rows.push((line, values));
    }
    Ok(rows)
}

fn read(path: &Path, what: &str) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::malformed(format!("{what} {}: {e}", path.display())))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> CliResult<T> {
    let text = read(path, what)?;
    serde_json::from_str(&text).map_err(|e| {
        // serde_json already appends "at line L column C" when it knows the position
        CliError::malformed(format!("{what} {}: {e}", path.display()))
    })
}

fn config_path(explicit: &Option<PathBuf>, env_default: Option<&Path>) -> CliResult<PathBuf> {
    explicit
        .clone()
        .or_else(|| env_default.map(Path::to_path_buf))
        .ok_or_else(|| CliError::malformed(format!("no --config given and {CONFIG_ENV} is not set")))
}

fn load_mechanism(path: &Path) -> CliResult<Mechanism> {
    let mechanism: Mechanism = load_json(path, "config")?;
    mechanism
        .validate()
        .map_err(|e| CliError::from_lib(&format!("config {}", path.display()), e))?;
    Ok(mechanism)
}

fn emit(output: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::malformed(format!("output {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::malformed(format!("stdout: {e}"))),
    }
}

fn cmd_pay(args: &PayArgs, env_config: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    let mechanism = load_mechanism(&config_path(&args.config, env_config)?)?;
    let rows = parse_numeric_csv::<i32>(&read(&args.evaluations, "evaluations")?, "evaluations")?;
    let mut out = String::from("row,payment\n");
    for (index, (line, eval)) in rows.iter().enumerate() {
        if eval.len() != mechanism.num_gold() {
            return Err(CliError::malformed(format!(
                "evaluations: line {line}: expected {} entries, found {}",
                mechanism.num_gold(),
                eval.len()
            )));
        }
        let paid = mechanism
            .payment(eval)
            .map_err(|e| CliError::from_lib(&format!("evaluations: line {line}"), e))?
            .amount();
        let shown = if args.round_cents { format!("{paid:.2}") } else { format_number(paid) };
        out.push_str(&format!("{},{shown}\n", index + 1));
    }
    emit(&args.output, stdout, &out)
}

/// How `solve` picks a set for one belief row, with its single-question oracle.
enum SolveRule {
    Relative { rho: f64, oracle: Mechanism },
    Threshold { tc: crate::model::ThresholdConfig },
}

fn solve_rule(mechanism: &Mechanism) -> CliResult<SolveRule> {
    fn single<T>(r: crate::Result<T>) -> CliResult<T> {
        r.map_err(|e| CliError::from_lib("config", e))
    }
    match mechanism {
        Mechanism::Approval(c) => Ok(SolveRule::Relative {
            rho: c.coarseness(),
            oracle: Mechanism::Approval(single(c.with_questions(1, 1))?),
        }),
        Mechanism::Utility { config, utility } => Ok(SolveRule::Relative {
            rho: config.coarseness(),
            oracle: Mechanism::Utility { config: single(config.with_questions(1, 1))?, utility: *utility },
        }),
        Mechanism::Threshold(t) | Mechanism::ThresholdMultiplicative(t) => Ok(SolveRule::Threshold {
            tc: single(t.with_questions(1, 1))?,
        }),
        other => Err(CliError::malformed(format!(
            "solve supports mech1, utility and mech2 configs, not {}",
            other.name()
        ))),
    }
}

fn cmd_solve(args: &SolveArgs, env_config: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let mechanism = load_mechanism(&config_path(&args.config, env_config)?)?;
    let rule = solve_rule(&mechanism)?;
    let rows = parse_numeric_csv::<f64>(&read(&args.beliefs, "beliefs")?, "beliefs")?;
    let expected_b = mechanism.shape().map(|s| s.1);
    let mut selected = Vec::with_capacity(rows.len());
    let mut min_margin = f64::INFINITY;
    for (line, row) in &rows {
        let at = |e| CliError::from_lib(&format!("beliefs: line {line}"), e);
        if let Some(b) = expected_b {
            if row.len() != b {
                return Err(CliError::malformed(format!(
                    "beliefs: line {line}: expected {b} entries, found {}",
                    row.len()
                )));
            }
        }
        let profile = BeliefProfile::from_rows(vec![row.clone()]).map_err(at)?;
        let row = profile.row(0);
        let set = match &rule {
            SolveRule::Relative { rho, .. } => rule_relative_belief(row, *rho).map_err(at)?,
            SolveRule::Threshold { tc } => rule_threshold(row, tc).map_err(at)?,
        };
        if args.oracle {
            let result = match &rule {
                SolveRule::Relative { oracle, .. } => match oracle {
                    Mechanism::Utility { utility, .. } => {
                        brute_force_optimal_utility(1, utility, oracle, &profile, Domain::Approval)
                    }
                    _ => brute_force_optimal(1, oracle, &profile, Domain::Approval),
                },
                SolveRule::Threshold { tc } => brute_force_optimal(1, tc, &profile, Domain::threshold(tc)),
            }
            .map_err(at)?;
            let plan = SelectionPlan::new(vec![set]);
            if !result.contains(&plan) {
                return Err(CliError {
                    code: EXIT_ORACLE,
                    message: format!(
                        "beliefs: line {line}: rule chose {set} but the oracle's optimum is {}",
                        result.best()
                    ),
                });
            }
            if let Some(m) = result.margin.filter(|_| result.is_unique()) {
                min_margin = min_margin.min(m);
            }
        }
        selected.push(set);
    }
    emit(&args.output, stdout, &format_plan(&SelectionPlan::new(selected)))?;
    if args.oracle {
        let _ = writeln!(
            stderr,
            "oracle: {} rows agree, smallest strict margin {}",
            rows.len(),
            if min_margin.is_finite() { format_number(min_margin) } else { "n/a".into() }
        );
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<bool> {
    let suite: Suite = args.suite.parse().map_err(|e: Error| CliError::malformed(e.to_string()))?;
    let params = SuiteParams {
        num_options: args.num_options,
        num_gold: args.num_gold,
        num_questions: args.num_questions,
        rho: args.rho,
        sigma: args.sigma,
        resolution: args.resolution,
        trials: args.trials,
        seed: args.seed,
        ..SuiteParams::default()
    };
    let reports = run_suite(suite, &params).map_err(|e| CliError::from_lib(&format!("verify {suite}"), e))?;
    for r in &reports {
        let _ = writeln!(stderr, "{r}");
    }
    let text = match args.format {
        ReportFormat::Json => serde_json::to_string_pretty(&reports).expect("reports serialise") + "\n",
        ReportFormat::Text => reports.iter().map(|r| format!("{r}\n")).collect(),
    };
    emit(&args.output, stdout, &text)?;
    Ok(reports.iter().all(|r| r.passed()))
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut config: SimConfig = load_json(&args.config, "simulation config")?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config
        .validate()
        .map_err(|e| CliError::malformed(format!("simulation config {}: {e}", args.config.display())))?;
    let report = run_simulation(&config).map_err(|e| CliError::from_lib("simulate", e))?;
    let text = match args.format {
        SimFormat::Json => report.to_json() + "\n",
        SimFormat::Table => report.to_table(),
    };
    emit(&args.output, stdout, &text)
}

/// Runs a parsed command, writing data to `stdout` and diagnostics to
/// `stderr`, and returns the exit code.
pub fn execute(cli: &Cli, env_config: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Pay(a) => cmd_pay(a, env_config, stdout).map(|_| 0),
        Command::Solve(a) => cmd_solve(a, env_config, stdout, stderr).map(|_| 0),
        Command::Verify(a) => cmd_verify(a, stdout, stderr).map(|ok| if ok { 0 } else { EXIT_VERIFY_FAILED }),
        Command::Simulate(a) => cmd_simulate(a, stdout).map(|_| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code
        }
    }
}

/// Entry point for the binary: parses `std::env::args`, reads
/// `$APPROVAL_CONFIG`, and returns the exit code.
pub fn main_from_env() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let env_config = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    let stdout = io::stdout();
    let stderr = io::stderr();
    execute(&cli, env_config.as_deref(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_format_examples() {
        assert_eq!(format_number(1.0), "1.0");
        assert_eq!(format_number(0.0), "0.0");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(0.729), "0.72899999999999998");
        assert_eq!(format_number(-2.5e-7), "-2.4999999999999999e-7");
        assert_eq!(format_number(2f64.powi(-20)), "9.5367431640625e-7");
        assert_eq!(format_number(1e20), "1.0e20");
        assert_eq!(format_number(123.0), "123.0");
    }

    #[test]
    fn plan_lines() {
        let plan = SelectionPlan::new(vec![[0usize, 1].into_iter().collect(), OptionSet::EMPTY]);
        assert_eq!(format_plan(&plan), "1,2\n-\n");
        assert_eq!(parse_plan_line("1,2").unwrap(), plan.selected()[0]);
        assert_eq!(parse_plan_line("-").unwrap(), OptionSet::EMPTY);
        assert!(parse_plan_line("0").is_err());
    }

    #[test]
    fn csv_diagnostics_name_the_line() {
        let err = parse_numeric_csv::<i32>("1,1\n# note\n\n2,x\n", "evaluations").unwrap_err();
        assert_eq!(err.code, EXIT_MALFORMED);
        assert!(err.message.contains("line 4"), "{}", err.message);
        let rows = parse_numeric_csv::<i32>("1, -1\n\n# c\n2,3\n", "e").unwrap();
        assert_eq!(rows, vec![(1, vec![1, -1]), (4, vec![2, 3])]);
    }

    proptest! {
        #[test]
        fn numbers_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
            prop_assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }

        #[test]
        fn belief_rows_round_trip(rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 1..6), 1..6)) {
            let text = format_rows(&rows, |x| format_number(*x));
            let parsed: Vec<Vec<f64>> = parse_numeric_csv::<f64>(&text, "b").unwrap().into_iter().map(|r| r.1).collect();
            prop_assert_eq!(parsed, rows);
        }

        #[test]
        fn evaluation_rows_round_trip(rows in prop::collection::vec(prop::collection::vec(-9i32..10, 1..6), 1..6)) {
            let text = format_rows(&rows, |x| x.to_string());
            let parsed: Vec<Vec<i32>> = parse_numeric_csv::<i32>(&text, "e").unwrap().into_iter().map(|r| r.1).collect();
            prop_assert_eq!(parsed, rows);
        }

        #[test]
        fn plans_round_trip(bits in prop::collection::vec(0u64..64, 1..8)) {
            let plan = SelectionPlan::new(bits.iter().map(|&b| OptionSet::from_bits(b)).collect());
            let text = format_plan(&plan);
            let parsed: Vec<OptionSet> = text.lines().map(|l| parse_plan_line(l).unwrap()).collect();
            prop_assert_eq!(parsed, plan.selected().to_vec());
        }
    }
}
