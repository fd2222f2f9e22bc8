//! Line-oriented model files.
//!
//! ```text
//! experiment c : H, T                     # uniform
//! experiment d : 1=1/2, 2=1/4, 3=1/4      # explicit weights, all or none
//! experiment R : 0, 1 depends T           # followed by its cpt lines
//! cpt 0 | T=0 = 9/10
//! predicate alien = 1/1000                # outcomes true/false
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use super::parser::ParseError;
use crate::model::{ExperimentDecl, ExperimentId, Model, Outcome, ValidationError};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelFileError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{}", render_invalid(.0))]
    Invalid(Vec<LocatedValidationError>),
}

/// A validation failure paired with the line of the offending declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocatedValidationError {
    pub line: usize,
    pub error: ValidationError,
}

impl fmt::Display for LocatedValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.error)
    }
}

fn render_invalid(errors: &[LocatedValidationError]) -> String {
    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_outcome(s: &str) -> bool {
    (is_ident(s) || (!s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())))
        && !matches!(s, "depends" | "given" | "pgiven")
}

struct LineCtx<'a> {
    line: usize,
    text: &'a str,
}

impl LineCtx<'_> {
    /// Error pointing at the first occurrence of `fragment` on this line.
    fn error_at(&self, fragment: &str, message: impl Into<String>, expected: Option<&str>) -> ParseError {
        let column = self
            .text
            .find(fragment)
            .filter(|_| !fragment.is_empty())
            .map(|byte| self.text[..byte].chars().count() + 1)
            .unwrap_or(1);
        ParseError {
            line: self.line,
            column,
            message: message.into(),
            expected: expected.map(str::to_string),
        }
    }

    fn ident(&self, s: &str, what: &str) -> Result<String, ParseError> {
        let s = s.trim();
        if is_ident(s) {
            Ok(s.to_string())
        } else {
            Err(self.error_at(s, format!("invalid {what} `{s}`"), Some(what)))
        }
    }

    fn outcome(&self, s: &str) -> Result<Outcome, ParseError> {
        let s = s.trim();
        if is_outcome(s) {
            Ok(Outcome::from(s))
        } else {
            Err(self.error_at(s, format!("invalid outcome `{s}`"), Some("identifier or integer")))
        }
    }

    fn rational(&self, s: &str) -> Result<Rational, ParseError> {
        let s = s.trim();
        s.parse::<Rational>()
            .map_err(|e| self.error_at(s, e.to_string(), Some("<int> or <int>/<int>")))
    }
}

struct PendingCpt {
    line: usize,
    outcome: Outcome,
    parents: Vec<(ExperimentId, Outcome)>,
    prob: Rational,
}

struct PendingDecl {
    line: usize,
    decl: ExperimentDecl,
    cpt: Vec<PendingCpt>,
}

/// Parses and validates a model file.
pub fn parse_model(text: &str) -> Result<Model, ModelFileError> {
    let mut decls: Vec<PendingDecl> = Vec::new();

    for (index, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let ctx = LineCtx {
            line: index + 1,
            text: raw,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (keyword, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        match keyword {
            "experiment" => decls.push(parse_experiment(&ctx, rest)?),
            "predicate" => {
                let (name, prob) = rest.split_once('=').ok_or_else(|| {
                    ctx.error_at(
                        rest.trim(),
                        "missing `=` in predicate",
                        Some("`predicate <id> = <rat>`"),
                    )
                })?;
                let name = ctx.ident(name, "predicate name")?;
                let prob = ctx.rational(prob)?;
                decls.push(PendingDecl {
                    line: ctx.line,
                    decl: ExperimentDecl::predicate(name.as_str(), prob),
                    cpt: Vec::new(),
                });
            }
            "cpt" => {
                let entry = parse_cpt(&ctx, rest)?;
                match decls.last_mut() {
                    Some(last) if !last.decl.parents.is_empty() => last.cpt.push(entry),
                    _ => {
                        return Err(ctx
                            .error_at("cpt", "cpt line must follow an experiment with `depends`", None)
                            .into())
                    }
                }
            }
            other => {
                return Err(ctx
                    .error_at(
                        other,
                        format!("unknown declaration `{other}`"),
                        Some("`experiment`, `cpt` or `predicate`"),
                    )
                    .into())
            }
        }
    }

    let mut lines: HashMap<ExperimentId, usize> = HashMap::new();
    let mut located = Vec::new();
    let mut finished = Vec::with_capacity(decls.len());
    for pending in decls {
        lines.entry(pending.decl.id.clone()).or_insert(pending.line);
        let (decl, errs) = attach_cpt(pending);
        located.extend(errs);
        finished.push(decl);
    }
    if !located.is_empty() {
        located.sort_by_key(|e| e.line);
        return Err(ModelFileError::Invalid(located));
    }

    Model::new(finished).map_err(|errors| {
        let mut located: Vec<_> = errors
            .into_iter()
            .map(|error| LocatedValidationError {
                line: error_line(&error, &lines),
                error,
            })
            .collect();
        located.sort_by_key(|e| e.line);
        ModelFileError::Invalid(located)
    })
}

fn error_line(error: &ValidationError, lines: &HashMap<ExperimentId, usize>) -> usize {
    let id = match error {
        ValidationError::DuplicateExperiment(id) | ValidationError::NoOutcomes(id) => id,
        ValidationError::Cycle(path) => match path.first() {
            Some(id) => id,
            None => return 0,
        },
        ValidationError::DuplicateOutcome { experiment, .. }
        | ValidationError::UnknownParent { experiment, .. }
        | ValidationError::RowSum { experiment, .. }
        | ValidationError::MissingRow { experiment, .. }
        | ValidationError::MissingEntry { experiment, .. }
        | ValidationError::UnknownCptOutcome { experiment, .. }
        | ValidationError::BadRow { experiment, .. }
        | ValidationError::OutOfRange { experiment, .. } => experiment,
    };
    lines.get(id).copied().unwrap_or(0)
}

fn parse_experiment(ctx: &LineCtx<'_>, rest: &str) -> Result<PendingDecl, ParseError> {
    let (name, body) = rest
        .split_once(':')
        .ok_or_else(|| ctx.error_at(rest.trim(), "missing `:` after experiment name", Some("`:`")))?;
    let id = ctx.ident(name, "experiment name")?;

    let (outcome_list, parents) = match split_word(body, "depends") {
        Some((before, after)) => {
            let parents = after
                .split(',')
                .map(|p| ctx.ident(p, "parent experiment").map(ExperimentId::from))
                .collect::<Result<Vec<_>, _>>()?;
            (before, parents)
        }
        None => (body, Vec::new()),
    };

    let mut outcomes = Vec::new();
    let mut weights = Vec::new();
    for item in outcome_list.split(',') {
        match item.split_once('=') {
            Some((o, w)) => {
                outcomes.push(ctx.outcome(o)?);
                weights.push(ctx.rational(w)?);
            }
            None => outcomes.push(ctx.outcome(item)?),
        }
    }
    if !weights.is_empty() && weights.len() != outcomes.len() {
        return Err(ctx.error_at(outcome_list.trim(), "give weights for all outcomes or for none", None));
    }
    if !weights.is_empty() && !parents.is_empty() {
        return Err(ctx.error_at(
            "depends",
            "a dependent experiment takes its probabilities from cpt lines",
            None,
        ));
    }

    let decl = if !parents.is_empty() {
        ExperimentDecl {
            id: ExperimentId::from(id),
            outcomes,
            parents,
            cpt: BTreeMap::new(),
        }
    } else if weights.is_empty() {
        ExperimentDecl::uniform(id.as_str(), outcomes)
    } else {
        ExperimentDecl::weighted(id.as_str(), outcomes.into_iter().zip(weights))
    };
    Ok(PendingDecl {
        line: ctx.line,
        decl,
        cpt: Vec::new(),
    })
}

/// Splits on a whitespace-delimited `word`.
fn split_word<'a>(text: &'a str, word: &str) -> Option<(&'a str, &'a str)> {
    let mut offset = 0;
    while let Some(found) = text[offset..].find(word) {
        let start = offset + found;
        let end = start + word.len();
        let before_ok = start == 0 || text[..start].ends_with(char::is_whitespace);
        let after_ok = end == text.len() || text[end..].starts_with(char::is_whitespace);
        if before_ok && after_ok {
            return Some((&text[..start], &text[end..]));
        }
        offset = end;
    }
    None
}

fn parse_cpt(ctx: &LineCtx<'_>, rest: &str) -> Result<PendingCpt, ParseError> {
    let (outcome, tail) = rest
        .split_once('|')
        .ok_or_else(|| ctx.error_at(rest.trim(), "missing `|` in cpt line", Some("`|`")))?;
    let (assignment, prob) = tail
        .rsplit_once('=')
        .ok_or_else(|| ctx.error_at(tail.trim(), "missing `= <rat>` in cpt line", Some("`=`")))?;
    let mut parents = Vec::new();
    for pair in assignment.split(',') {
        let (p, o) = pair
            .split_once('=')
            .ok_or_else(|| ctx.error_at(pair.trim(), "expected `<parent>=<outcome>`", Some("`=`")))?;
        parents.push((ExperimentId::from(ctx.ident(p, "parent experiment")?), ctx.outcome(o)?));
    }
    Ok(PendingCpt {
        line: ctx.line,
        outcome: ctx.outcome(outcome)?,
        parents,
        prob: ctx.rational(prob)?,
    })
}

fn attach_cpt(pending: PendingDecl) -> (ExperimentDecl, Vec<LocatedValidationError>) {
    let PendingDecl { mut decl, cpt, .. } = pending;
    let mut errors = Vec::new();
    for entry in cpt {
        let by_parent: BTreeMap<&ExperimentId, &Outcome> = entry.parents.iter().map(|(p, o)| (p, o)).collect();
        let row_text = entry
            .parents
            .iter()
            .map(|(p, o)| format!("{p}={o}"))
            .collect::<Vec<_>>()
            .join(", ");
        let key: Option<Vec<Outcome>> = decl
            .parents
            .iter()
            .map(|p| by_parent.get(p).map(|o| (*o).clone()))
            .collect();
        let key = match key {
            Some(key) if by_parent.len() == decl.parents.len() && entry.parents.len() == key.len() => key,
            _ => {
                errors.push(LocatedValidationError {
                    line: entry.line,
                    error: ValidationError::BadRow {
                        experiment: decl.id.clone(),
                        row: row_text,
                    },
                });
                continue;
            }
        };
        let row = decl.cpt.entry(key).or_default();
        if row.insert(entry.outcome.clone(), entry.prob).is_some() {
            errors.push(LocatedValidationError {
                line: entry.line,
                error: ValidationError::DuplicateOutcome {
                    experiment: decl.id.clone(),
                    outcome: entry.outcome,
                },
            });
        }
    }
    (decl, errors)
}
