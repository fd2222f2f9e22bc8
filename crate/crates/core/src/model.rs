//! Experiments, their (conditional) distributions, and joint-distribution
//! machinery over a set of declared experiments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::rational::Rational;

/// Name of a declared experiment, the tag after `@` in `6@d`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExperimentId(String);

/// One outcome symbol of an experiment (identifier or number literal).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome(String);

macro_rules! string_newtype {
    ($ty:ident) => {
        impl $ty {
            pub fn new(name: impl Into<String>) -> Self {
                $ty(name.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $ty {
            fn from(s: &str) -> Self {
                $ty(s.to_string())
            }
        }

        impl From<String> for $ty {
            fn from(s: String) -> Self {
                $ty(s)
            }
        }
    };
}

string_newtype!(ExperimentId);
string_newtype!(Outcome);

/// Outcome symbols of a predicate pseudo-experiment.
pub const TRUE: &str = "true";
pub const FALSE: &str = "false";

/// A ground atomic event: one outcome of one experiment.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub experiment: ExperimentId,
    pub outcome: Outcome,
}

impl Atom {
    pub fn new(outcome: impl Into<Outcome>, experiment: impl Into<ExperimentId>) -> Self {
        Atom {
            experiment: experiment.into(),
            outcome: outcome.into(),
        }
    }

    /// The atom `true@name` that a bare predicate name stands for.
    pub fn predicate(name: impl Into<ExperimentId>) -> Self {
        Atom::new(TRUE, name)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.outcome, self.experiment)
    }
}

/// A full assignment of outcomes to a set of experiments.
pub type Assignment = BTreeMap<ExperimentId, Outcome>;

/// Declaration of a single experiment.
///
/// `cpt` maps each assignment of the parents (listed in `parents` order) to
/// a row giving the probability of every own outcome. A parentless
/// experiment has exactly one row keyed by the empty assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentDecl {
    pub id: ExperimentId,
    pub outcomes: Vec<Outcome>,
    pub parents: Vec<ExperimentId>,
    pub cpt: BTreeMap<Vec<Outcome>, BTreeMap<Outcome, Rational>>,
}

impl ExperimentDecl {
    /// Parentless experiment with equiprobable outcomes.
    pub fn uniform<I, O>(id: impl Into<ExperimentId>, outcomes: I) -> Self
    where
        I: IntoIterator<Item = O>,
        O: Into<Outcome>,
    {
        let outcomes: Vec<Outcome> = outcomes.into_iter().map(Into::into).collect();
        let weight = Rational::new(1, outcomes.len().max(1) as i64);
        let row = outcomes.iter().map(|o| (o.clone(), weight.clone())).collect();
        ExperimentDecl {
            id: id.into(),
            outcomes,
            parents: Vec::new(),
            cpt: BTreeMap::from([(Vec::new(), row)]),
        }
    }

    /// Parentless experiment with explicit weights.
    pub fn weighted<I, O>(id: impl Into<ExperimentId>, weights: I) -> Self
    where
        I: IntoIterator<Item = (O, Rational)>,
        O: Into<Outcome>,
    {
        let mut outcomes = Vec::new();
        let mut row = BTreeMap::new();
        for (o, w) in weights {
            let o = o.into();
            outcomes.push(o.clone());
            row.insert(o, w);
        }
        ExperimentDecl {
            id: id.into(),
            outcomes,
            parents: Vec::new(),
            cpt: BTreeMap::from([(Vec::new(), row)]),
        }
    }

    /// A predicate event: outcomes `true`/`false` with `p(true) = p`.
    pub fn predicate(id: impl Into<ExperimentId>, p: Rational) -> Self {
        let q = Rational::one() - &p;
        ExperimentDecl::weighted(id, [(TRUE, p), (FALSE, q)])
    }

    /// Experiment whose distribution depends on `parents`. Each row is
    /// `(parent outcomes in order, own outcome probabilities in order)`.
    pub fn dependent<I, O, P, R>(id: impl Into<ExperimentId>, outcomes: I, parents: P, rows: R) -> Self
    where
        I: IntoIterator<Item = O>,
        O: Into<Outcome>,
        P: IntoIterator<Item = ExperimentId>,
        R: IntoIterator<Item = (Vec<Outcome>, Vec<Rational>)>,
    {
        let outcomes: Vec<Outcome> = outcomes.into_iter().map(Into::into).collect();
        let cpt = rows
            .into_iter()
            .map(|(parent_outcomes, probs)| {
                let row = outcomes.iter().cloned().zip(probs).collect();
                (parent_outcomes, row)
            })
            .collect();
        ExperimentDecl {
            id: id.into(),
            outcomes,
            parents: parents.into_iter().collect(),
            cpt,
        }
    }

    pub fn has_outcome(&self, outcome: &Outcome) -> bool {
        self.outcomes.contains(outcome)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("duplicate experiment `{0}`")]
    DuplicateExperiment(ExperimentId),
    #[error("experiment `{0}` declares no outcomes")]
    NoOutcomes(ExperimentId),
    #[error("experiment `{experiment}` declares outcome `{outcome}` twice")]
    DuplicateOutcome { experiment: ExperimentId, outcome: Outcome },
    #[error("experiment `{experiment}` depends on unknown experiment `{parent}`")]
    UnknownParent {
        experiment: ExperimentId,
        parent: ExperimentId,
    },
    #[error("cycle: {}", render_cycle(.0))]
    Cycle(Vec<ExperimentId>),
    #[error("experiment `{experiment}`: cpt row{} sums to {sum}", render_row(.row))]
    RowSum {
        experiment: ExperimentId,
        row: String,
        sum: Rational,
    },
    #[error("experiment `{experiment}`: missing cpt row for {row}")]
    MissingRow { experiment: ExperimentId, row: String },
    #[error("experiment `{experiment}`: missing cpt entry for outcome `{outcome}`{}", render_row(.row))]
    MissingEntry {
        experiment: ExperimentId,
        outcome: Outcome,
        row: String,
    },
    #[error("experiment `{experiment}`: cpt entry for undeclared outcome `{outcome}`")]
    UnknownCptOutcome { experiment: ExperimentId, outcome: Outcome },
    #[error("experiment `{experiment}`: cpt row {row} does not match the parent list")]
    BadRow { experiment: ExperimentId, row: String },
    #[error("experiment `{experiment}`: probability {value} is outside [0, 1]")]
    OutOfRange { experiment: ExperimentId, value: Rational },
}

fn render_cycle(path: &[ExperimentId]) -> String {
    path.iter().map(ExperimentId::as_str).collect::<Vec<_>>().join("→")
}

fn render_row(row: &str) -> String {
    if row.is_empty() {
        String::new()
    } else {
        format!(" ({row})")
    }
}

fn describe_row(parents: &[ExperimentId], outcomes: &[Outcome]) -> String {
    parents
        .iter()
        .zip(outcomes)
        .map(|(p, o)| format!("{p}={o}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Errors raised when querying a valid model with bad input.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(ExperimentId),
    #[error("`{outcome}` is not an outcome of experiment `{experiment}`")]
    UnknownOutcome { experiment: ExperimentId, outcome: Outcome },
    #[error("assignment is not ancestrally closed: `{experiment}` needs parent `{parent}`")]
    NotAncestrallyClosed {
        experiment: ExperimentId,
        parent: ExperimentId,
    },
}

/// Checks every declaration and cross-declaration invariant, reporting all
/// violations found.
pub fn validate_model(decls: &[ExperimentDecl]) -> Result<(), Vec<ValidationError>> {
    let mut errors = Vec::new();
    let mut by_id: BTreeMap<&ExperimentId, &ExperimentDecl> = BTreeMap::new();
    for decl in decls {
        if by_id.insert(&decl.id, decl).is_some() {
            errors.push(ValidationError::DuplicateExperiment(decl.id.clone()));
        }
    }

    for decl in decls {
        validate_decl(decl, &by_id, &mut errors);
    }

    if let Some(cycle) = find_cycle(decls, &by_id) {
        errors.push(ValidationError::Cycle(cycle));
    }

    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn validate_decl(
    decl: &ExperimentDecl,
    by_id: &BTreeMap<&ExperimentId, &ExperimentDecl>,
    errors: &mut Vec<ValidationError>,
) {
    let id = &decl.id;
    if decl.outcomes.is_empty() {
        errors.push(ValidationError::NoOutcomes(id.clone()));
    }
    let mut seen = BTreeSet::new();
    for o in &decl.outcomes {
        if !seen.insert(o) {
            errors.push(ValidationError::DuplicateOutcome {
                experiment: id.clone(),
                outcome: o.clone(),
            });
        }
    }

    let mut parents_known = true;
    for parent in &decl.parents {
        if !by_id.contains_key(parent) {
            parents_known = false;
            errors.push(ValidationError::UnknownParent {
                experiment: id.clone(),
                parent: parent.clone(),
            });
        }
    }

    for (key, row) in &decl.cpt {
        let row_name = describe_row(&decl.parents, key);
        if key.len() != decl.parents.len() {
            errors.push(ValidationError::BadRow {
                experiment: id.clone(),
                row: format!("[{}]", join(key)),
            });
            continue;
        }
        if parents_known {
            let valid = decl.parents.iter().zip(key).all(|(p, o)| by_id[p].has_outcome(o));
            if !valid {
                errors.push(ValidationError::BadRow {
                    experiment: id.clone(),
                    row: row_name.clone(),
                });
                continue;
            }
        }
        for (o, p) in row {
            if !decl.has_outcome(o) {
                errors.push(ValidationError::UnknownCptOutcome {
                    experiment: id.clone(),
                    outcome: o.clone(),
                });
            }
            if p.is_negative() || p > &Rational::one() {
                errors.push(ValidationError::OutOfRange {
                    experiment: id.clone(),
                    value: p.clone(),
                });
            }
        }
        let mut complete = true;
        for o in &decl.outcomes {
            if !row.contains_key(o) {
                complete = false;
                errors.push(ValidationError::MissingEntry {
                    experiment: id.clone(),
                    outcome: o.clone(),
                    row: row_name.clone(),
                });
            }
        }
        let sum: Rational = row.values().sum();
        if complete && !sum.is_one() {
            errors.push(ValidationError::RowSum {
                experiment: id.clone(),
                row: row_name,
                sum,
            });
        }
    }

    if parents_known {
        let parent_outcomes: Vec<&[Outcome]> = decl.parents.iter().map(|p| by_id[p].outcomes.as_slice()).collect();
        for key in cartesian(&parent_outcomes) {
            if !decl.cpt.contains_key(&key) {
                errors.push(ValidationError::MissingRow {
                    experiment: id.clone(),
                    row: describe_row(&decl.parents, &key),
                });
            }
        }
    }
}

fn join(outcomes: &[Outcome]) -> String {
    outcomes.iter().map(Outcome::as_str).collect::<Vec<_>>().join(", ")
}

/// All tuples picking one element from each slot, in lexicographic slot order.
fn cartesian(slots: &[&[Outcome]]) -> Vec<Vec<Outcome>> {
    let mut out = vec![Vec::new()];
    for slot in slots {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                slot.iter().map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o.clone());
                    next
                })
            })
            .collect();
    }
    out
}

fn find_cycle(decls: &[ExperimentDecl], by_id: &BTreeMap<&ExperimentId, &ExperimentDecl>) -> Option<Vec<ExperimentId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }

    fn visit<'a>(
        id: &'a ExperimentId,
        by_id: &BTreeMap<&'a ExperimentId, &'a ExperimentDecl>,
        marks: &mut BTreeMap<&'a ExperimentId, Mark>,
        stack: &mut Vec<&'a ExperimentId>,
    ) -> Option<Vec<ExperimentId>> {
        match marks.get(id) {
            Some(Mark::Done) => return None,
            Some(Mark::Open) => {
                let start = stack.iter().position(|s| *s == id).unwrap_or(0);
                let mut cycle: Vec<ExperimentId> = stack[start..].iter().map(|s| (*s).clone()).collect();
                cycle.push(id.clone());
                return Some(cycle);
            }
            None => {}
        }
        let decl = by_id.get(id)?;
        marks.insert(id, Mark::Open);
        stack.push(id);
        for parent in &decl.parents {
            if let Some(cycle) = visit(parent, by_id, marks, stack) {
                return Some(cycle);
            }
        }
        stack.pop();
        marks.insert(id, Mark::Done);
        None
    }

    let mut marks = BTreeMap::new();
    for decl in decls {
        let mut stack = Vec::new();
        if let Some(cycle) = visit(&decl.id, by_id, &mut marks, &mut stack) {
            return Some(cycle);
        }
    }
    None
}

/// A validated set of experiments. Immutable once built.
#[derive(Clone, Debug)]
pub struct Model {
    decls: Vec<ExperimentDecl>,
    index: BTreeMap<ExperimentId, usize>,
    topo: Vec<ExperimentId>,
}

impl Model {
    pub fn new(decls: Vec<ExperimentDecl>) -> Result<Model, Vec<ValidationError>> {
        validate_model(&decls)?;
        let index: BTreeMap<ExperimentId, usize> = decls.iter().enumerate().map(|(i, d)| (d.id.clone(), i)).collect();

        // Acyclic, so repeatedly emitting experiments whose parents are
        // already placed terminates.
        let mut topo = Vec::with_capacity(decls.len());
        let mut placed = BTreeSet::new();
        while topo.len() < decls.len() {
            for d in &decls {
                if !placed.contains(&d.id) && d.parents.iter().all(|p| placed.contains(p)) {
                    placed.insert(d.id.clone());
                    topo.push(d.id.clone());
                }
            }
        }
        Ok(Model { decls, index, topo })
    }

    /// Declarations in file order.
    pub fn experiments(&self) -> &[ExperimentDecl] {
        &self.decls
    }

    pub fn experiment(&self, id: &ExperimentId) -> Option<&ExperimentDecl> {
        self.index.get(id).map(|&i| &self.decls[i])
    }

    fn require(&self, id: &ExperimentId) -> Result<&ExperimentDecl, ModelError> {
        self.experiment(id)
            .ok_or_else(|| ModelError::UnknownExperiment(id.clone()))
    }

    /// Experiments ordered so that every parent precedes its children.
    pub fn topological_order(&self) -> &[ExperimentId] {
        &self.topo
    }

    pub fn check_atom(&self, atom: &Atom) -> Result<(), ModelError> {
        let decl = self.require(&atom.experiment)?;
        if decl.has_outcome(&atom.outcome) {
            Ok(())
        } else {
            Err(ModelError::UnknownOutcome {
                experiment: atom.experiment.clone(),
                outcome: atom.outcome.clone(),
            })
        }
    }

    /// Smallest superset of `support` closed under the parent relation.
    pub fn ancestral_closure<'a, I>(&self, support: I) -> Result<BTreeSet<ExperimentId>, ModelError>
    where
        I: IntoIterator<Item = &'a ExperimentId>,
    {
        let mut closed = BTreeSet::new();
        let mut pending: Vec<ExperimentId> = support.into_iter().cloned().collect();
        while let Some(id) = pending.pop() {
            let decl = self.require(&id)?;
            if closed.insert(id) {
                pending.extend(decl.parents.iter().cloned());
            }
        }
        Ok(closed)
    }

    /// `p(outcome | parents)` read from the experiment's table.
    pub fn conditional_prob(
        &self,
        id: &ExperimentId,
        outcome: &Outcome,
        parent_outcomes: &[Outcome],
    ) -> Result<Rational, ModelError> {
        let decl = self.require(id)?;
        let unknown = || ModelError::UnknownOutcome {
            experiment: id.clone(),
            outcome: outcome.clone(),
        };
        let row = decl.cpt.get(parent_outcomes).ok_or_else(unknown)?;
        row.get(outcome).cloned().ok_or_else(unknown)
    }

    /// Probability of a single point: the product of each experiment's
    /// conditional probability given its parents' outcomes.
    pub fn joint_point_prob(&self, assignment: &Assignment) -> Result<Rational, ModelError> {
        let mut prob = Rational::one();
        for (id, outcome) in assignment {
            let decl = self.require(id)?;
            let mut parent_outcomes = Vec::with_capacity(decl.parents.len());
            for parent in &decl.parents {
                let o = assignment.get(parent).ok_or_else(|| ModelError::NotAncestrallyClosed {
                    experiment: id.clone(),
                    parent: parent.clone(),
                })?;
                parent_outcomes.push(o.clone());
            }
            if !decl.has_outcome(outcome) {
                return Err(ModelError::UnknownOutcome {
                    experiment: id.clone(),
                    outcome: outcome.clone(),
                });
            }
            prob = prob * self.conditional_prob(id, outcome, &parent_outcomes)?;
            if prob.is_zero() {
                break;
            }
        }
        Ok(prob)
    }

    /// Every full assignment over `support`, in lexicographic order of
    /// experiment id and then declared outcome order.
    pub fn assignments<'a, I>(&self, support: I) -> Result<Vec<Assignment>, ModelError>
    where
        I: IntoIterator<Item = &'a ExperimentId>,
    {
        let support: BTreeSet<&ExperimentId> = support.into_iter().collect();
        let mut out = vec![Assignment::new()];
        for id in support {
            let decl = self.require(id)?;
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    decl.outcomes.iter().map(move |o| {
                        let mut next = prefix.clone();
                        next.insert(id.clone(), o.clone());
                        next
                    })
                })
                .collect();
        }
        Ok(out)
    }

    /// Number of full assignments over `support`, saturating.
    pub fn assignment_count<'a, I>(&self, support: I) -> Result<u128, ModelError>
    where
        I: IntoIterator<Item = &'a ExperimentId>,
    {
        let mut count: u128 = 1;
        for id in support {
            count = count.saturating_mul(self.require(id)?.outcomes.len() as u128);
        }
        Ok(count)
    }
}
