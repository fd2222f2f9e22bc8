//! Independent checks for the evaluator.
//!
//! Both paths read a formula as a truth condition on full joint assignments
//! rather than going through event spaces. Over full assignments `&` and
//! `&&` (and `|` and `||`) coincide, so the support conditions that make a
//! choice connective undetermined are re-checked here separately.

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::eval::ProbResult;
use crate::model::{Assignment, ExperimentId, Model, ModelError, Outcome};
use crate::rational::Rational;
use crate::syntax::Formula;

/// Largest joint space `enumerate_prob` will walk.
pub const MAX_ASSIGNMENTS: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("conditional `{0}` is only allowed at the top of a query")]
    NestedConditional(String),
    #[error("joint space of {0} assignments exceeds the enumeration bound")]
    StateSpace(u128),
    #[error("conditioning on null event `{0}` (probability 0)")]
    NullConditioning(String),
    #[error("cannot sample an undetermined formula: {0}")]
    Undetermined(String),
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("no sample satisfied the condition `{0}`")]
    ConditionNeverSampled(String),
}

/// Settings for a Monte Carlo run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    pub sample_count: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Binomial standard error of `estimate`.
    pub stderr: f64,
    /// Samples that entered the frequency (those satisfying the condition,
    /// for conditional queries).
    pub samples: u64,
    pub seed: u64,
}

/// Experiments mentioned by `f`, or the reason `f` is undetermined.
fn mentioned(f: &Formula) -> Result<BTreeSet<ExperimentId>, String> {
    let binary = |l: &Formula, r: &Formula| -> Result<(BTreeSet<ExperimentId>, BTreeSet<ExperimentId>), String> {
        Ok((mentioned(l)?, mentioned(r)?))
    };
    match f {
        Formula::Atom(a) => Ok([a.experiment.clone()].into()),
        Formula::Not(inner) => mentioned(inner),
        Formula::ChoiceAnd(l, r) | Formula::ChoiceOr(l, r) => {
            let (a, b) = binary(l, r)?;
            if a != b {
                return Err(format!("choice connective in `{f}` spans different experiments"));
            }
            Ok(a)
        }
        Formula::ParAnd(l, r) | Formula::ParOr(l, r) => {
            let (mut a, b) = binary(l, r)?;
            a.extend(b);
            Ok(a)
        }
        Formula::GivenAdd { event, condition } => {
            let (a, b) = binary(event, condition)?;
            if a != b {
                return Err(format!("`given` in `{f}` spans different experiments"));
            }
            Ok(a)
        }
        Formula::GivenPar { event, condition } => {
            let (mut a, b) = binary(event, condition)?;
            a.extend(b);
            Ok(a)
        }
    }
}

fn holds(f: &Formula, world: &Assignment) -> bool {
    match f {
        Formula::Atom(a) => world.get(&a.experiment) == Some(&a.outcome),
        Formula::Not(inner) => !holds(inner, world),
        Formula::ChoiceAnd(l, r) | Formula::ParAnd(l, r) => holds(l, world) && holds(r, world),
        Formula::ChoiceOr(l, r) | Formula::ParOr(l, r) => holds(l, world) || holds(r, world),
        Formula::GivenAdd { .. } | Formula::GivenPar { .. } => {
            unreachable!("conditionals are split off at the root")
        }
    }
}

fn nested_conditional(f: &Formula) -> Option<&Formula> {
    match f {
        Formula::Atom(_) => None,
        Formula::GivenAdd { .. } | Formula::GivenPar { .. } => Some(f),
        Formula::Not(inner) => nested_conditional(inner),
        Formula::ChoiceAnd(l, r) | Formula::ChoiceOr(l, r) | Formula::ParAnd(l, r) | Formula::ParOr(l, r) => {
            nested_conditional(l).or_else(|| nested_conditional(r))
        }
    }
}

/// A query split into the event and, for conditional roots, the condition.
struct Query<'a> {
    event: &'a Formula,
    condition: Option<&'a Formula>,
}

fn split_query<'a>(f: &'a Formula, model: &Model) -> Result<Query<'a>, OracleError> {
    let (event, condition) = match f {
        Formula::GivenAdd { event, condition } | Formula::GivenPar { event, condition } => {
            (&**event, Some(&**condition))
        }
        other => (other, None),
    };
    for part in [Some(event), condition].into_iter().flatten() {
        if let Some(c) = nested_conditional(part) {
            return Err(OracleError::NestedConditional(c.to_string()));
        }
    }
    for atom in f.atoms() {
        model.check_atom(atom)?;
    }
    Ok(Query { event, condition })
}

/// Full joint assignments over `ids`, visited in odometer order.
fn for_each_world(
    model: &Model,
    ids: &BTreeSet<ExperimentId>,
    mut visit: impl FnMut(&Assignment) -> Result<(), OracleError>,
) -> Result<(), OracleError> {
    let slots: Vec<(&ExperimentId, &[Outcome])> = ids
        .iter()
        .map(|id| {
            model
                .experiment(id)
                .map(|d| (id, d.outcomes.as_slice()))
                .ok_or_else(|| ModelError::UnknownExperiment(id.clone()))
        })
        .collect::<Result<_, _>>()?;
    let mut digits = vec![0usize; slots.len()];
    let mut world: Assignment = slots
        .iter()
        .map(|(id, outcomes)| ((*id).clone(), outcomes[0].clone()))
        .collect();
    loop {
        visit(&world)?;
        let mut i = 0;
        loop {
            if i == slots.len() {
                return Ok(());
            }
            digits[i] += 1;
            if digits[i] < slots[i].1.len() {
                world.insert(slots[i].0.clone(), slots[i].1[digits[i]].clone());
                break;
            }
            digits[i] = 0;
            world.insert(slots[i].0.clone(), slots[i].1[0].clone());
            i += 1;
        }
    }
}

/// `p(f)` by brute force over every joint assignment of the ancestral
/// closure of the experiments `f` mentions.
pub fn enumerate_prob(f: &Formula, model: &Model) -> Result<ProbResult, OracleError> {
    let query = split_query(f, model)?;
    let ids = match mentioned(f) {
        Ok(ids) => ids,
        Err(reason) => return Ok(ProbResult::Undetermined(reason)),
    };
    let closure = model.ancestral_closure(&ids)?;
    let count = model.assignment_count(&closure)?;
    if count > MAX_ASSIGNMENTS {
        return Err(OracleError::StateSpace(count));
    }

    let mut event_mass = Rational::zero();
    let mut both_mass = Rational::zero();
    let mut condition_mass = Rational::zero();
    for_each_world(model, &closure, |world| {
        let in_event = holds(query.event, world);
        let in_condition = query.condition.is_none_or(|c| holds(c, world));
        if !(in_event || in_condition && query.condition.is_some()) {
            return Ok(());
        }
        let weight = model.joint_point_prob(world)?;
        if in_event {
            event_mass = &event_mass + &weight;
        }
        if query.condition.is_some() && in_condition {
            condition_mass = &condition_mass + &weight;
            if in_event {
                both_mass = &both_mass + &weight;
            }
        }
        Ok(())
    })?;

    match query.condition {
        None => Ok(ProbResult::Determined(event_mass)),
        Some(condition) => both_mass
            .checked_div(&condition_mass)
            .map(ProbResult::Determined)
            .ok_or_else(|| OracleError::NullConditioning(condition.to_string())),
    }
}

/// Per-experiment samplers, one per parent assignment.
struct Sampler<'m> {
    order: Vec<&'m ExperimentId>,
    tables: BTreeMap<&'m ExperimentId, BTreeMap<Vec<Outcome>, WeightedIndex<f64>>>,
    model: &'m Model,
}

impl<'m> Sampler<'m> {
    fn new(model: &'m Model, ids: &BTreeSet<ExperimentId>) -> Self {
        let order: Vec<&ExperimentId> = model
            .topological_order()
            .iter()
            .filter(|id| ids.contains(*id))
            .collect();
        let tables = order
            .iter()
            .map(|id| {
                let decl = model.experiment(id).expect("declared");
                let rows = decl
                    .cpt
                    .iter()
                    .map(|(key, row)| {
                        let weights: Vec<f64> = decl.outcomes.iter().map(|o| row[o].to_f64()).collect();
                        (key.clone(), WeightedIndex::new(weights).expect("rows sum to 1"))
                    })
                    .collect();
                (*id, rows)
            })
            .collect();
        Sampler { order, tables, model }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, world: &mut Assignment) {
        world.clear();
        for id in &self.order {
            let decl = self.model.experiment(id).expect("declared");
            let key: Vec<Outcome> = decl.parents.iter().map(|p| world[p].clone()).collect();
            let index = self.tables[id][&key].sample(rng);
            world.insert((*id).clone(), decl.outcomes[index].clone());
        }
    }
}

/// Frequency estimate of `p(f)` from `cfg.sample_count` ancestral samples.
/// For conditional queries the frequency is taken over the samples that
/// satisfy the condition.
pub fn mc_estimate(f: &Formula, model: &Model, cfg: SampleConfig) -> Result<McEstimate, OracleError> {
    if cfg.sample_count == 0 {
        return Err(OracleError::NoSamples);
    }
    let query = split_query(f, model)?;
    let ids = mentioned(f).map_err(OracleError::Undetermined)?;
    let closure = model.ancestral_closure(&ids)?;
    let sampler = Sampler::new(model, &closure);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut world = Assignment::new();
    let (mut trials, mut hits) = (0u64, 0u64);
    for _ in 0..cfg.sample_count {
        sampler.draw(&mut rng, &mut world);
        if let Some(condition) = query.condition {
            if !holds(condition, &world) {
                continue;
            }
        }
        trials += 1;
        if holds(query.event, &world) {
            hits += 1;
        }
    }
    if trials == 0 {
        let condition = query.condition.map(ToString::to_string).unwrap_or_default();
        return Err(OracleError::ConditionNeverSampled(condition));
    }
    let estimate = hits as f64 / trials as f64;
    let stderr = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok(McEstimate {
        estimate,
        stderr,
        samples: trials,
        seed: cfg.seed,
    })
}
