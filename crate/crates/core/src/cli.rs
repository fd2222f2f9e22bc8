//! The `colprob` command line: `eval`, `bayes`, `repl` and `check`.
//!
//! Exit codes: 0 when the answer is determined, 2 when it is undetermined,
//! 1 for any error.

use std::ffi::OsString;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::bayes::{self, BayesError, Partition, PartitionReport, Variant};
use crate::eval::{prob, ProbResult};
use crate::explain::prob_explain;
use crate::model::Model;
use crate::oracle::{self, McEstimate, SampleConfig};
use crate::rational::Rational;
use crate::semantics::{denote, shared_experiment_warnings, to_set_normal_form, Denotation};
use crate::syntax::{parse_formula, parse_model, Formula};

pub const EXIT_DETERMINED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNDETERMINED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "colprob", version, about = "Exact probabilities for event formulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one query against a model file.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        query: String,
        /// Print the rule-by-rule derivation.
        #[arg(long)]
        explain: bool,
        /// Cross-check against brute-force enumeration.
        #[arg(long)]
        oracle: bool,
        /// Also estimate by Monte Carlo with this many samples.
        #[arg(long)]
        mc_samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Posterior probabilities of partition cells given evidence.
    Bayes {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        variant: Variant,
        #[arg(long = "cell", required = true)]
        cells: Vec<String>,
        #[arg(long)]
        evidence: String,
        #[arg(long)]
        json: bool,
    },
    /// Interactive session.
    Repl {
        #[arg(long)]
        model: PathBuf,
    },
    /// Validate a model file.
    Check {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Determined,
    Undetermined,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub status: Status,
    pub value: Option<String>,
    pub agrees: bool,
}

/// One query's result as printed by `--json`. Field order is the output key
/// order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryOutput {
    pub query: String,
    pub status: Status,
    pub value: Option<String>,
    pub decimal: Option<String>,
    pub reason: Option<String>,
    pub derivation: Option<String>,
    pub oracle: Option<OracleCheck>,
    pub mc: Option<McEstimate>,
}

impl QueryOutput {
    fn new(query: &str) -> Self {
        QueryOutput {
            query: query.to_string(),
            status: Status::Error,
            value: None,
            decimal: None,
            reason: None,
            derivation: None,
            oracle: None,
            mc: None,
        }
    }

    fn set_result(&mut self, result: &ProbResult) {
        match result {
            ProbResult::Determined(v) => self.set_value(v),
            ProbResult::Undetermined(reason) => {
                self.status = Status::Undetermined;
                self.reason = Some(reason.clone());
            }
        }
    }

    fn set_value(&mut self, v: &Rational) {
        self.status = Status::Determined;
        self.value = Some(v.to_string());
        self.decimal = Some(v.to_decimal());
    }

    fn set_error(&mut self, message: String) {
        self.status = Status::Error;
        self.value = None;
        self.decimal = None;
        self.reason = Some(message);
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Determined => EXIT_DETERMINED,
            Status::Undetermined => EXIT_UNDETERMINED,
            Status::Error => EXIT_ERROR,
        }
    }

    /// `1/3 (≈0.3333)`, `undetermined: ...` or `error: ...`.
    pub fn headline(&self) -> String {
        match self.status {
            Status::Determined => format!(
                "{} (≈{})",
                self.value.as_deref().unwrap_or_default(),
                self.decimal.as_deref().unwrap_or_default()
            ),
            Status::Undetermined => format!("undetermined: {}", self.reason.as_deref().unwrap_or_default()),
            Status::Error => format!("error: {}", self.reason.as_deref().unwrap_or_default()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("query output serializes")
    }
}

/// Options for [`run_query`].
#[derive(Clone, Copy, Debug, Default)]
pub struct QueryFlags {
    pub explain: bool,
    pub oracle: bool,
    pub mc: Option<SampleConfig>,
}

/// Evaluates `query` against an already loaded model.
pub fn evaluate_query(model: &Model, query: &str, flags: QueryFlags) -> QueryOutput {
    let mut out = QueryOutput::new(query);
    let formula = match parse_formula(query) {
        Ok(f) => f,
        Err(e) => {
            out.set_error(format!("parse error: {e}"));
            return out;
        }
    };
    let evaluated = if flags.explain {
        prob_explain(&formula, model).map(|(r, d)| (r, Some(d.render())))
    } else {
        prob(&formula, model).map(|r| (r, None))
    };
    let result = match evaluated {
        Ok((result, derivation)) => {
            out.derivation = derivation;
            result
        }
        Err(e) => {
            out.set_error(e.to_string());
            return out;
        }
    };
    out.set_result(&result);

    if flags.oracle {
        out.oracle = Some(match oracle::enumerate_prob(&formula, model) {
            Ok(check) => OracleCheck {
                status: if check.is_determined() {
                    Status::Determined
                } else {
                    Status::Undetermined
                },
                value: check.value().map(ToString::to_string),
                agrees: check.same_verdict(&result),
            },
            Err(_) => OracleCheck {
                status: Status::Error,
                value: None,
                agrees: false,
            },
        });
    }
    if let (Some(cfg), true) = (flags.mc, result.is_determined()) {
        out.mc = oracle::mc_estimate(&formula, model, cfg).ok();
    }
    out
}

/// Loads the model at `model_path` and evaluates `query`.
pub fn run_query(model_path: &Path, query: &str, flags: QueryFlags) -> Result<QueryOutput, String> {
    let model = load_model(model_path)?;
    Ok(evaluate_query(&model, query, flags))
}

pub fn load_model(path: &Path) -> Result<Model, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_model(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Posteriors for every cell, plus the partition report.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesOutput {
    pub report: PartitionReport,
    pub posteriors: Vec<QueryOutput>,
}

/// Runs the chosen Bayes rule. On a partition violation the report is
/// returned alongside the error so it can be shown before aborting.
pub fn evaluate_bayes(
    model: &Model,
    cells: &[String],
    evidence: &str,
    variant: Variant,
) -> Result<BayesOutput, (Option<PartitionReport>, String)> {
    let parse = |t: &str| parse_formula(t).map_err(|e| (None, format!("parse error in `{t}`: {e}")));
    let formulas = cells.iter().map(|c| parse(c)).collect::<Result<Vec<Formula>, _>>()?;
    let evidence_f = parse(evidence)?;
    let partition = Partition::new(formulas).map_err(|e| (None, e.to_string()))?;
    let report = bayes::check_partition(&partition, model, variant).map_err(|e| (None, e.to_string()))?;
    if !report.is_disjoint() {
        let message = BayesError::NotDisjoint(report.overlaps.clone()).to_string();
        return Err((Some(report), message));
    }
    let fail = |e: BayesError| (Some(report.clone()), e.to_string());
    let posteriors = match variant {
        Variant::Additive => bayes::bayes_additive(&partition, &evidence_f, model).map_err(fail)?,
        Variant::Parallel => {
            let joint = bayes::bayes_parallel(&partition, &evidence_f, model).map_err(fail)?;
            let by_likelihood = bayes::bayes_parallel_by_likelihood(&partition, &evidence_f, model).map_err(fail)?;
            if joint != by_likelihood {
                return Err((
                    Some(report),
                    format!("joint form {joint:?} disagrees with likelihood form {by_likelihood:?}"),
                ));
            }
            joint
        }
    };
    let op = match variant {
        Variant::Additive => "given",
        Variant::Parallel => "pgiven",
    };
    let posteriors = cells
        .iter()
        .zip(&posteriors)
        .map(|(cell, value)| {
            let query = format!("{} {op} {}", grouped(cell), grouped(evidence));
            let mut out = QueryOutput::new(&query);
            out.set_value(value);
            out
        })
        .collect();
    Ok(BayesOutput { report, posteriors })
}

fn grouped(text: &str) -> String {
    match parse_formula(text) {
        Ok(Formula::Atom(_)) => text.trim().to_string(),
        _ => format!("({})", text.trim()),
    }
}

/// Loads the model and runs [`evaluate_bayes`].
pub fn run_bayes(
    model_path: &Path,
    cells: &[String],
    evidence: &str,
    variant: Variant,
) -> Result<Vec<QueryOutput>, String> {
    let model = load_model(model_path)?;
    evaluate_bayes(&model, cells, evidence, variant)
        .map(|b| b.posteriors)
        .map_err(|(_, e)| e)
}

fn write_query(out: &mut dyn Write, q: &QueryOutput) -> io::Result<()> {
    writeln!(out, "{}", q.headline())?;
    if let Some(oracle) = &q.oracle {
        let value = oracle.value.as_deref().unwrap_or("undetermined");
        let verdict = if oracle.agrees { "agrees" } else { "DISAGREES" };
        writeln!(out, "oracle: {value} ({verdict})")?;
    }
    if let Some(mc) = &q.mc {
        writeln!(
            out,
            "monte carlo: {:.4} ± {:.4} ({} samples, seed {})",
            mc.estimate, mc.stderr, mc.samples, mc.seed
        )?;
    }
    if let Some(d) = &q.derivation {
        write!(out, "derivation:\n{d}")?;
    }
    Ok(())
}

fn warn_shared(model: &Model, query: &str, err: &mut dyn Write) -> io::Result<()> {
    if let Ok(f) = parse_formula(query) {
        for w in shared_experiment_warnings(&f, model) {
            writeln!(err, "warning: {w}")?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_DETERMINED };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, input, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    match command {
        Command::Eval {
            model,
            query,
            explain,
            oracle,
            mc_samples,
            seed,
            json,
        } => {
            let model = match load_model(&model) {
                Ok(m) => m,
                Err(e) => {
                    writeln!(err, "error: {e}")?;
                    return Ok(EXIT_ERROR);
                }
            };
            warn_shared(&model, &query, err)?;
            let flags = QueryFlags {
                explain,
                oracle,
                mc: mc_samples.map(|sample_count| SampleConfig { sample_count, seed }),
            };
            let q = evaluate_query(&model, &query, flags);
            if q.status == Status::Error {
                writeln!(err, "{}", q.headline())?;
            }
            if json {
                writeln!(out, "{}", q.to_json())?;
            } else if q.status != Status::Error {
                write_query(out, &q)?;
            }
            Ok(q.exit_code())
        }
        Command::Bayes {
            model,
            variant,
            cells,
            evidence,
            json,
        } => {
            let model = match load_model(&model) {
                Ok(m) => m,
                Err(e) => {
                    writeln!(err, "error: {e}")?;
                    return Ok(EXIT_ERROR);
                }
            };
            match evaluate_bayes(&model, &cells, &evidence, variant) {
                Ok(result) => {
                    if json {
                        writeln!(
                            out,
                            "{}",
                            serde_json::to_string(&result.posteriors).expect("serializes")
                        )?;
                    } else {
                        writeln!(out, "partition: {}", result.report)?;
                        if variant == Variant::Parallel {
                            writeln!(out, "joint form and prior-times-likelihood form agree")?;
                        }
                        for q in &result.posteriors {
                            writeln!(out, "p({}) = {}", q.query, q.headline())?;
                        }
                    }
                    Ok(EXIT_DETERMINED)
                }
                Err((report, message)) => {
                    if let Some(report) = report {
                        writeln!(err, "partition: {report}")?;
                    }
                    writeln!(err, "error: {message}")?;
                    Ok(EXIT_ERROR)
                }
            }
        }
        Command::Repl { model } => {
            let model = match load_model(&model) {
                Ok(m) => m,
                Err(e) => {
                    writeln!(err, "error: {e}")?;
                    return Ok(EXIT_ERROR);
                }
            };
            repl(&model, input, out)?;
            Ok(EXIT_DETERMINED)
        }
        Command::Check { model } => match load_model(&model) {
            Ok(m) => {
                writeln!(out, "ok: {} experiment(s)", m.experiments().len())?;
                Ok(EXIT_DETERMINED)
            }
            Err(e) => {
                writeln!(err, "error: {e}")?;
                Ok(EXIT_ERROR)
            }
        },
    }
}

const REPL_HELP: &str = "\
<formula>                          probability of a formula
:space <formula>                   event space and set normal form
:explain <formula>                 probability with its derivation
:bayes <variant> [c1, c2, ...] <evidence>
                                   posteriors (variant: additive | parallel)
:help                              this text
:quit                              leave";

/// Reads one command per line until `:quit` or end of input. Errors are
/// reported inline and never end the session.
pub fn repl(model: &Model, input: &mut dyn BufRead, out: &mut dyn Write) -> io::Result<()> {
    let mut line = String::new();
    loop {
        write!(out, "colprob> ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(());
        }
        let command = line.trim();
        if command.is_empty() {
            continue;
        }
        let (head, rest) = command.split_once(char::is_whitespace).unwrap_or((command, ""));
        let rest = rest.trim();
        match head {
            ":quit" | ":q" => return Ok(()),
            ":help" => writeln!(out, "{REPL_HELP}")?,
            ":space" => repl_space(model, rest, out)?,
            ":explain" => {
                let q = evaluate_query(
                    model,
                    rest,
                    QueryFlags {
                        explain: true,
                        ..Default::default()
                    },
                );
                if let Some(d) = &q.derivation {
                    write!(out, "{d}")?;
                }
                writeln!(out, "{}", q.headline())?;
            }
            ":bayes" => repl_bayes(model, rest, out)?,
            h if h.starts_with(':') => writeln!(out, "error: unknown command `{h}` (try :help)")?,
            _ => {
                let q = evaluate_query(model, command, QueryFlags::default());
                writeln!(out, "{}", q.headline())?;
            }
        }
    }
}

fn repl_space(model: &Model, text: &str, out: &mut dyn Write) -> io::Result<()> {
    let formula = match parse_formula(text) {
        Ok(f) => f,
        Err(e) => return writeln!(out, "error: parse error: {e}"),
    };
    match denote(&formula, model) {
        Ok(Denotation::Space(space)) => {
            writeln!(out, "{space}")?;
            match to_set_normal_form(&space) {
                Ok(snf) => writeln!(out, "{snf}"),
                Err(e) => writeln!(out, "({e})"),
            }
        }
        Ok(Denotation::Undetermined(reason)) => writeln!(out, "undetermined: {reason}"),
        Err(e) => writeln!(out, "error: {e}"),
    }
}

/// `<variant> [c1, c2, ...] <evidence>`
fn repl_bayes(model: &Model, text: &str, out: &mut dyn Write) -> io::Result<()> {
    let usage = "usage: :bayes additive|parallel [cell, cell, ...] evidence";
    let Some((variant, rest)) = text.split_once(char::is_whitespace) else {
        return writeln!(out, "error: {usage}");
    };
    let variant: Variant = match variant.parse() {
        Ok(v) => v,
        Err(e) => return writeln!(out, "error: {e}"),
    };
    let rest = rest.trim();
    let (Some(open), Some(close)) = (rest.find('['), rest.find(']')) else {
        return writeln!(out, "error: {usage}");
    };
    if open != 0 || close < open {
        return writeln!(out, "error: {usage}");
    }
    let cells: Vec<String> = rest[1..close]
        .split(',')
        .map(|c| c.trim().to_string())
        .filter(|c| !c.is_empty())
        .collect();
    let evidence = rest[close + 1..].trim();
    match evaluate_bayes(model, &cells, evidence, variant) {
        Ok(result) => {
            writeln!(out, "partition: {}", result.report)?;
            for q in &result.posteriors {
                writeln!(out, "p({}) = {}", q.query, q.headline())?;
            }
            Ok(())
        }
        Err((report, message)) => {
            if let Some(report) = report {
                writeln!(out, "partition: {report}")?;
            }
            writeln!(out, "error: {message}")
        }
    }
}
