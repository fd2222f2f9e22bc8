//! Posterior probabilities over a partition, in two flavours.
//!
//! The additive rule conditions within one experiment and combines cells
//! with `&`; the parallel rule conditions across experiments and combines
//! with `&&`. Using the additive rule across experiments is rejected with a
//! support mismatch instead of silently producing zeros.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::eval::{cond_parallel, prob, EvalError, ProbResult};
use crate::model::Model;
use crate::rational::Rational;
use crate::semantics::{self, render_support};
use crate::syntax::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Additive,
    Parallel,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Additive => "additive",
            Variant::Parallel => "parallel",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "additive" => Ok(Variant::Additive),
            "parallel" => Ok(Variant::Parallel),
            other => Err(format!(
                "unknown Bayes variant `{other}` (expected additive or parallel)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BayesError {
    #[error("a partition needs at least two cells, got {0}")]
    TooFewCells(usize),
    #[error("cell {index} is undetermined: {reason}")]
    UndeterminedCell { index: usize, reason: String },
    #[error("evidence is undetermined: {0}")]
    UndeterminedEvidence(String),
    #[error("support mismatch {left} vs {right}")]
    SupportMismatch { left: String, right: String },
    #[error("{}", render_overlaps(.0))]
    NotDisjoint(Vec<(usize, usize)>),
    #[error("evidence has probability 0 under every cell")]
    ZeroDenominator,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn render_overlaps(pairs: &[(usize, usize)]) -> String {
    pairs
        .iter()
        .map(|(i, j)| format!("cells {i},{j} not disjoint"))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Candidate partition cells, in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Formula>,
}

impl Partition {
    pub fn new(cells: Vec<Formula>) -> Result<Self, BayesError> {
        if cells.len() < 2 {
            return Err(BayesError::TooFewCells(cells.len()));
        }
        Ok(Partition { cells })
    }

    pub fn cells(&self) -> &[Formula] {
        &self.cells
    }
}

/// Outcome of checking a partition. Cell indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionReport {
    pub overlaps: Vec<(usize, usize)>,
    pub total: Rational,
    pub exhaustive: bool,
}

impl PartitionReport {
    pub fn is_disjoint(&self) -> bool {
        self.overlaps.is_empty()
    }
}

impl fmt::Display for PartitionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_disjoint() {
            f.write_str("cells pairwise disjoint")?;
        } else {
            f.write_str(&render_overlaps(&self.overlaps))?;
        }
        if self.exhaustive {
            write!(f, "; exhaustive (total probability {})", self.total)
        } else {
            write!(f, "; not exhaustive (total probability {})", self.total)
        }
    }
}

fn determined(result: ProbResult, on_undetermined: impl FnOnce(String) -> BayesError) -> Result<Rational, BayesError> {
    match result {
        ProbResult::Determined(v) => Ok(v),
        ProbResult::Undetermined(reason) => Err(on_undetermined(reason)),
    }
}

fn combine(variant: Variant, l: &Formula, r: &Formula) -> Formula {
    match variant {
        Variant::Additive => Formula::choice_and(l.clone(), r.clone()),
        Variant::Parallel => Formula::par_and(l.clone(), r.clone()),
    }
}

/// Checks pairwise disjointness under the variant's conjunction and reports
/// whether the cells' probabilities sum to 1.
pub fn check_partition(partition: &Partition, model: &Model, variant: Variant) -> Result<PartitionReport, BayesError> {
    let cells = partition.cells();
    let mut total = Rational::zero();
    for (i, cell) in cells.iter().enumerate() {
        let p = determined(prob(cell, model)?, |reason| BayesError::UndeterminedCell {
            index: i + 1,
            reason,
        })?;
        total = total + p;
    }

    if variant == Variant::Additive {
        let first = semantics::support(&cells[0]).map_err(BayesError::UndeterminedEvidence)?;
        for cell in &cells[1..] {
            let other = semantics::support(cell).map_err(BayesError::UndeterminedEvidence)?;
            if other != first {
                return Err(BayesError::SupportMismatch {
                    left: render_support(&first),
                    right: render_support(&other),
                });
            }
        }
    }

    let mut overlaps = Vec::new();
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let both = combine(variant, &cells[i], &cells[j]);
            let p = determined(prob(&both, model)?, |reason| BayesError::UndeterminedCell {
                index: i + 1,
                reason,
            })?;
            if !p.is_zero() {
                overlaps.push((i + 1, j + 1));
            }
        }
    }

    let exhaustive = total.is_one();
    Ok(PartitionReport {
        overlaps,
        total,
        exhaustive,
    })
}

fn checked(partition: &Partition, model: &Model, variant: Variant) -> Result<PartitionReport, BayesError> {
    let report = check_partition(partition, model, variant)?;
    if report.is_disjoint() {
        Ok(report)
    } else {
        Err(BayesError::NotDisjoint(report.overlaps))
    }
}

fn normalize(numerators: Vec<Rational>) -> Result<Vec<Rational>, BayesError> {
    let total: Rational = numerators.iter().sum();
    if total.is_zero() {
        return Err(BayesError::ZeroDenominator);
    }
    Ok(numerators.into_iter().map(|n| n / &total).collect())
}

/// `p(E_i given F) = p(E_i & F) / Σ_j p(E_j & F)`.
pub fn bayes_additive(partition: &Partition, evidence: &Formula, model: &Model) -> Result<Vec<Rational>, BayesError> {
    checked(partition, model, Variant::Additive)?;
    let cell_support = semantics::support(&partition.cells()[0]).map_err(BayesError::UndeterminedEvidence)?;
    let evidence_support = semantics::support(evidence).map_err(BayesError::UndeterminedEvidence)?;
    if cell_support != evidence_support {
        return Err(BayesError::SupportMismatch {
            left: render_support(&cell_support),
            right: render_support(&evidence_support),
        });
    }
    let numerators = partition
        .cells()
        .iter()
        .map(|cell| {
            let joint = Formula::choice_and(cell.clone(), evidence.clone());
            determined(prob(&joint, model)?, BayesError::UndeterminedEvidence)
        })
        .collect::<Result<Vec<_>, _>>()?;
    normalize(numerators)
}

/// `p(E_i pgiven F) = p(E_i && F) / Σ_j p(E_j && F)`.
pub fn bayes_parallel(partition: &Partition, evidence: &Formula, model: &Model) -> Result<Vec<Rational>, BayesError> {
    checked(partition, model, Variant::Parallel)?;
    let numerators = partition
        .cells()
        .iter()
        .map(|cell| {
            let joint = Formula::par_and(cell.clone(), evidence.clone());
            determined(prob(&joint, model)?, BayesError::UndeterminedEvidence)
        })
        .collect::<Result<Vec<_>, _>>()?;
    normalize(numerators)
}

/// The parallel rule in prior-times-likelihood form:
/// `p(E_i) p(F pgiven E_i) / Σ_j p(E_j) p(F pgiven E_j)`.
pub fn bayes_parallel_by_likelihood(
    partition: &Partition,
    evidence: &Formula,
    model: &Model,
) -> Result<Vec<Rational>, BayesError> {
    checked(partition, model, Variant::Parallel)?;
    let numerators = partition
        .cells()
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let prior = determined(prob(cell, model)?, |reason| BayesError::UndeterminedCell {
                index: i + 1,
                reason,
            })?;
            if prior.is_zero() {
                return Ok(Rational::zero());
            }
            let likelihood = determined(cond_parallel(evidence, cell, model)?, BayesError::UndeterminedEvidence)?;
            Ok(prior * likelihood)
        })
        .collect::<Result<Vec<_>, BayesError>>()?;
    normalize(numerators)
}
