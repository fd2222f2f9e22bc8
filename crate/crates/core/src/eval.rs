//! Exact probabilities of event formulas.

use std::fmt;

use thiserror::Error;

use crate::model::Model;
use crate::rational::Rational;
use crate::semantics::{self, denote, lift, render_support, Denotation, EventSpace, SemanticsError};
use crate::syntax::Formula;

/// Probability of a query: an exact value, or the verdict that the theory
/// assigns none.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ProbResult {
    Determined(Rational),
    Undetermined(String),
}

impl ProbResult {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            ProbResult::Determined(v) => Some(v),
            ProbResult::Undetermined(_) => None,
        }
    }

    pub fn is_determined(&self) -> bool {
        matches!(self, ProbResult::Determined(_))
    }

    /// Same rational, or both undetermined (reasons may differ).
    pub fn same_verdict(&self, other: &ProbResult) -> bool {
        match (self, other) {
            (ProbResult::Determined(a), ProbResult::Determined(b)) => a == b,
            (ProbResult::Undetermined(_), ProbResult::Undetermined(_)) => true,
            _ => false,
        }
    }
}

impl fmt::Display for ProbResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbResult::Determined(v) => write!(f, "{v}"),
            ProbResult::Undetermined(reason) => write!(f, "undetermined ({reason})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("conditioning on null event `{0}` (probability 0)")]
    NullConditioning(String),
}

impl From<crate::model::ModelError> for EvalError {
    fn from(e: crate::model::ModelError) -> Self {
        EvalError::Semantics(e.into())
    }
}

/// Sum of point probabilities after lifting `space` to the ancestral
/// closure of its support, so unmentioned parents are marginalized.
pub fn space_prob(space: &EventSpace, model: &Model) -> Result<Rational, EvalError> {
    let closure = model.ancestral_closure(space.support())?;
    let lifted = lift(space, &closure, model)?;
    let mut total = Rational::zero();
    for point in lifted.points() {
        total = total + model.joint_point_prob(point.assignment())?;
    }
    Ok(total)
}

fn check_query(f: &Formula, model: &Model) -> Result<(), EvalError> {
    match f {
        Formula::GivenAdd { event, condition } | Formula::GivenPar { event, condition } => {
            semantics::check_event_formula(event, model)?;
            semantics::check_event_formula(condition, model)?;
        }
        _ => semantics::check_event_formula(f, model)?,
    }
    Ok(())
}

/// `p(f)`. A conditional at the root is evaluated as a ratio; anywhere else
/// it is an error.
pub fn prob(f: &Formula, model: &Model) -> Result<ProbResult, EvalError> {
    check_query(f, model)?;
    match f {
        Formula::GivenAdd { event, condition } => cond_additive(event, condition, model),
        Formula::GivenPar { event, condition } => cond_parallel(event, condition, model),
        _ => match denote(f, model)? {
            Denotation::Space(space) => Ok(ProbResult::Determined(space_prob(&space, model)?)),
            Denotation::Undetermined(reason) => Ok(ProbResult::Undetermined(reason)),
        },
    }
}

/// `p(e given f) = p(e & f) / p(f)`, within a single support.
pub fn cond_additive(e: &Formula, f: &Formula, model: &Model) -> Result<ProbResult, EvalError> {
    semantics::check_event_formula(e, model)?;
    semantics::check_event_formula(f, model)?;
    let (es, fs) = match (denote(e, model)?, denote(f, model)?) {
        (Denotation::Undetermined(r), _) | (_, Denotation::Undetermined(r)) => return Ok(ProbResult::Undetermined(r)),
        (Denotation::Space(es), Denotation::Space(fs)) => (es, fs),
    };
    if es.support() != fs.support() {
        return Ok(ProbResult::Undetermined(format!(
            "`given` across distinct supports {} and {}",
            render_support(es.support()),
            render_support(fs.support())
        )));
    }
    let denominator = space_prob(&fs, model)?;
    let joint = EventSpace::new(es.support().clone(), es.points().intersection(fs.points()).cloned())?;
    ratio(space_prob(&joint, model)?, denominator, f)
}

/// `p(e pgiven f) = p(e && f) / p(f)`.
pub fn cond_parallel(e: &Formula, f: &Formula, model: &Model) -> Result<ProbResult, EvalError> {
    semantics::check_event_formula(e, model)?;
    semantics::check_event_formula(f, model)?;
    let (es, fs) = match (denote(e, model)?, denote(f, model)?) {
        (Denotation::Undetermined(r), _) | (_, Denotation::Undetermined(r)) => return Ok(ProbResult::Undetermined(r)),
        (Denotation::Space(es), Denotation::Space(fs)) => (es, fs),
    };
    let denominator = space_prob(&fs, model)?;
    let joint = semantics::cartesian_conj(&es, &fs);
    ratio(space_prob(&joint, model)?, denominator, f)
}

fn ratio(numerator: Rational, denominator: Rational, condition: &Formula) -> Result<ProbResult, EvalError> {
    numerator
        .checked_div(&denominator)
        .map(ProbResult::Determined)
        .ok_or_else(|| EvalError::NullConditioning(condition.to_string()))
}
