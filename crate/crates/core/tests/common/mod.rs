//! Shared corpus generators and check suites for the integration tests.
//!
//! Every generator draws from a `ChaCha8Rng` with a fixed seed, so a failing
//! case is reproduced by rerunning the same suite.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use colprob::bayes::bayes_parallel_by_likelihood;
use colprob::eval::EvalError;
use colprob::model::{Assignment, ExperimentDecl, ExperimentId, Outcome};
use colprob::oracle::OracleError;
use colprob::semantics::EventSpace;
use colprob::{
    bayes_additive, bayes_parallel, denote, enumerate_prob, mc_estimate, parse_formula, parse_model, prob,
    prob_explain, to_set_normal_form, BayesError, Denotation, Formula, Model, Partition, ProbResult, Rational,
    SampleConfig,
};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_DEPTH: usize = 5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models")
}

pub fn load(name: &str) -> Model {
    let path = models_dir().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_model(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// Pass/fail tally for one suite.
#[derive(Debug, Default)]
pub struct Tally {
    pub passed: usize,
    pub total: usize,
    pub failures: Vec<String>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < 10 {
            self.failures.push(describe());
        }
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.passed as f64 / self.total as f64
        }
    }
}

// ---------------------------------------------------------------------------
// random models

const EXPERIMENT_NAMES: &[&str] = &["d", "c", "x", "R", "T", "die2"];
const PREDICATE_NAMES: &[&str] = &["p", "q", "alien"];

fn random_row(rng: &mut ChaCha8Rng, n: usize, allow_zero: bool) -> Vec<Rational> {
    if rng.random_bool(0.4) {
        return vec![r(1, n as i64); n];
    }
    let low = if allow_zero { 0 } else { 1 };
    let mut weights: Vec<i64> = (0..n).map(|_| rng.random_range(low..=4)).collect();
    if weights.iter().all(|w| *w == 0) {
        let i = rng.random_range(0..n);
        weights[i] = 1;
    }
    let total: i64 = weights.iter().sum();
    weights.into_iter().map(|w| r(w, total)).collect()
}

fn random_outcomes(rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let n = if rng.random_bool(0.05) {
        1
    } else {
        rng.random_range(2..=6)
    };
    match rng.random_range(0..3) {
        0 => (1..=n).map(|i| Outcome::new(i.to_string())).collect(),
        1 => (0..n).map(|i| Outcome::new(format!("o{i}"))).collect(),
        _ => ["H", "T", "lo", "hi", "Mid", "zero"][..n]
            .iter()
            .map(|o| Outcome::from(*o))
            .collect(),
    }
}

/// At most three experiments with at most six outcomes each, at most one
/// dependency edge, occasional predicates and zero weights.
pub fn random_model(rng: &mut ChaCha8Rng) -> Model {
    let count = rng.random_range(1..=3);
    let mut names: Vec<&str> = EXPERIMENT_NAMES.to_vec();
    names.shuffle(rng);
    let mut predicates: Vec<&str> = PREDICATE_NAMES.to_vec();
    predicates.shuffle(rng);

    let mut decls: Vec<ExperimentDecl> = Vec::new();
    for i in 0..count {
        let (id, outcomes) = if rng.random_bool(0.2) {
            (predicates[i], vec![Outcome::from("true"), Outcome::from("false")])
        } else {
            (names[i], random_outcomes(rng))
        };
        let allow_zero = rng.random_bool(0.3);
        let row = random_row(rng, outcomes.len(), allow_zero);
        decls.push(ExperimentDecl::weighted(id, outcomes.into_iter().zip(row)));
    }

    if count >= 2 && rng.random_bool(0.4) {
        let child = rng.random_range(1..count);
        let parent = rng.random_range(0..child);
        let parent_id = decls[parent].id.clone();
        let parent_outcomes = decls[parent].outcomes.clone();
        let outcomes = decls[child].outcomes.clone();
        let rows: Vec<(Vec<Outcome>, Vec<Rational>)> = parent_outcomes
            .iter()
            .map(|po| (vec![po.clone()], random_row(rng, outcomes.len(), true)))
            .collect();
        let id = decls[child].id.clone();
        decls[child] = ExperimentDecl::dependent(id, outcomes, [parent_id], rows);
    }
    Model::new(decls).expect("generated model is valid")
}

// ---------------------------------------------------------------------------
// random formulas

fn random_atom(rng: &mut ChaCha8Rng, model: &Model, exp: usize) -> Formula {
    let decl = &model.experiments()[exp];
    let outcome = decl.outcomes.choose(rng).expect("nonempty outcomes");
    Formula::atom(outcome.as_str(), decl.id.as_str())
}

fn split(rng: &mut ChaCha8Rng, scope: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut shuffled = scope.to_vec();
    shuffled.shuffle(rng);
    let cut = rng.random_range(1..shuffled.len());
    let (mut a, mut b) = (shuffled[..cut].to_vec(), shuffled[cut..].to_vec());
    // occasional overlap exercises same-experiment parallel connectives
    if rng.random_bool(0.2) {
        let extra = *scope.choose(rng).unwrap();
        if !a.contains(&extra) {
            a.push(extra);
        } else if !b.contains(&extra) {
            b.push(extra);
        }
    }
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

fn random_scope(rng: &mut ChaCha8Rng, model: &Model) -> Vec<usize> {
    let n = model.experiments().len();
    loop {
        let scope: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if !scope.is_empty() {
            return scope;
        }
    }
}

fn different_scope(rng: &mut ChaCha8Rng, model: &Model, scope: &[usize]) -> Vec<usize> {
    for _ in 0..8 {
        let other = random_scope(rng, model);
        if other != scope {
            return other;
        }
    }
    scope.to_vec()
}

/// Depth needed to mention every experiment of `scope`.
fn min_depth(scope: &[usize]) -> usize {
    match scope.len() {
        0 | 1 => 0,
        2 => 1,
        _ => 2,
    }
}

/// An event formula of depth at most `depth` whose support is exactly
/// `scope`, except where a deliberate mismatch makes it undetermined.
pub fn event_over(rng: &mut ChaCha8Rng, model: &Model, scope: &[usize], depth: usize) -> Formula {
    debug_assert!(depth >= min_depth(scope));
    let need = min_depth(scope);
    if scope.len() == 1 && (depth == 0 || rng.random_bool(0.3)) {
        return random_atom(rng, model, scope[0]);
    }
    if depth == need && scope.len() > 1 {
        let (a, b) = split(rng, scope);
        let (a, b) = if min_depth(&a).max(min_depth(&b)) < depth {
            (a, b)
        } else {
            halves(scope)
        };
        return parallel(rng, model, &a, &b, depth);
    }
    match rng.random_range(0..100) {
        0..=19 => Formula::not(event_over(rng, model, scope, depth - 1)),
        20..=54 => {
            let l = event_over(rng, model, scope, depth - 1);
            let r = event_over(rng, model, scope, depth - 1);
            if rng.random_bool(0.5) {
                Formula::choice_and(l, r)
            } else {
                Formula::choice_or(l, r)
            }
        }
        55..=61 if min_depth(&different_scope(&mut rng.clone(), model, scope)) < depth => {
            let other = different_scope(rng, model, scope);
            let l = event_over(rng, model, scope, depth - 1);
            let r = event_over(rng, model, &other, depth - 1);
            if rng.random_bool(0.5) {
                Formula::choice_and(l, r)
            } else {
                Formula::choice_or(l, r)
            }
        }
        55..=61 => Formula::not(event_over(rng, model, scope, depth - 1)),
        _ if scope.len() == 1 => {
            let l = event_over(rng, model, scope, depth - 1);
            let r = event_over(rng, model, scope, depth - 1);
            if rng.random_bool(0.5) {
                Formula::par_and(l, r)
            } else {
                Formula::par_or(l, r)
            }
        }
        _ => {
            let (a, b) = split(rng, scope);
            let (a, b) = if min_depth(&a).max(min_depth(&b)) < depth {
                (a, b)
            } else {
                halves(scope)
            };
            parallel(rng, model, &a, &b, depth)
        }
    }
}

fn halves(scope: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let cut = scope.len() / 2;
    (scope[..cut].to_vec(), scope[cut..].to_vec())
}

fn parallel(rng: &mut ChaCha8Rng, model: &Model, a: &[usize], b: &[usize], depth: usize) -> Formula {
    let l = event_over(rng, model, a, depth - 1);
    let r = event_over(rng, model, b, depth - 1);
    if rng.random_bool(0.5) {
        Formula::par_and(l, r)
    } else {
        Formula::par_or(l, r)
    }
}

/// A random event formula over a random scope of `model`.
pub fn random_event(rng: &mut ChaCha8Rng, model: &Model, max_depth: usize) -> Formula {
    let scope = random_scope(rng, model);
    let depth = rng.random_range(min_depth(&scope)..=max_depth.max(min_depth(&scope)));
    event_over(rng, model, &scope, depth)
}

/// A query: usually an event, sometimes a conditional at the root.
pub fn random_query(rng: &mut ChaCha8Rng, model: &Model) -> Formula {
    match rng.random_range(0..8) {
        0 => {
            let scope = random_scope(rng, model);
            let condition_scope = if rng.random_bool(0.85) {
                scope.clone()
            } else {
                random_scope(rng, model)
            };
            let event_depth = rng.random_range(min_depth(&scope)..=MAX_DEPTH - 1);
            let condition_depth = rng.random_range(min_depth(&condition_scope)..=MAX_DEPTH - 1);
            let e = event_over(rng, model, &scope, event_depth);
            let c = event_over(rng, model, &condition_scope, condition_depth);
            Formula::given(e, c)
        }
        1 => {
            let e = random_event(rng, model, MAX_DEPTH - 1);
            let c = random_event(rng, model, MAX_DEPTH - 1);
            Formula::pgiven(e, c)
        }
        _ => random_event(rng, model, MAX_DEPTH),
    }
}

pub struct Case {
    pub model: Model,
    pub query: Formula,
}

/// `n` (model, query) pairs.
pub fn corpus(seed: u64, n: usize) -> Vec<Case> {
    let mut rng = rng(seed);
    (0..n)
        .map(|_| {
            let model = random_model(&mut rng);
            let query = random_query(&mut rng, &model);
            Case { model, query }
        })
        .collect()
}

pub const CORPUS_SEED: u64 = 0x5EED_0001;
pub const CORPUS_SIZE: usize = 1000;

// ---------------------------------------------------------------------------
// random syntax trees, unconstrained by any model

const AST_EXPERIMENTS: &[&str] = &["d", "d1", "c", "R", "T", "given", "pgiven", "x_2"];
const AST_OUTCOMES: &[&str] = &["1", "6", "H", "T", "true", "false", "given", "pgiven", "o_1", "42"];

fn random_ast_event(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        let exp = AST_EXPERIMENTS.choose(rng).unwrap();
        return if rng.random_bool(0.2) {
            Formula::predicate(exp)
        } else {
            Formula::atom(AST_OUTCOMES.choose(rng).unwrap(), exp)
        };
    }
    let d = depth - 1;
    match rng.random_range(0..5) {
        0 => Formula::not(random_ast_event(rng, d)),
        1 => Formula::choice_and(random_ast_event(rng, d), random_ast_event(rng, d)),
        2 => Formula::choice_or(random_ast_event(rng, d), random_ast_event(rng, d)),
        3 => Formula::par_and(random_ast_event(rng, d), random_ast_event(rng, d)),
        _ => Formula::par_or(random_ast_event(rng, d), random_ast_event(rng, d)),
    }
}

pub fn random_ast(rng: &mut ChaCha8Rng) -> Formula {
    match rng.random_range(0..6) {
        0 => Formula::given(random_ast_event(rng, 4), random_ast_event(rng, 4)),
        1 => Formula::pgiven(random_ast_event(rng, 4), random_ast_event(rng, 4)),
        _ => random_ast_event(rng, MAX_DEPTH),
    }
}

// ---------------------------------------------------------------------------
// random spaces

/// A nonempty event space over a random scope of a random model.
pub fn random_space(rng: &mut ChaCha8Rng) -> (Model, EventSpace) {
    let model = random_model(rng);
    let scope = random_scope(rng, &model);
    let support: BTreeSet<ExperimentId> = scope.iter().map(|&i| model.experiments()[i].id.clone()).collect();
    let universe: Vec<Assignment> = model.assignments(&support).expect("known experiments");
    let keep = rng.random_range(0.1..=1.0);
    let mut points: Vec<Assignment> = universe.iter().filter(|_| rng.random_bool(keep)).cloned().collect();
    if points.is_empty() {
        points.push(universe.choose(rng).unwrap().clone());
    }
    let space = EventSpace::new(support, points.into_iter().map(colprob::Point::new)).expect("points in support");
    (model, space)
}

// ---------------------------------------------------------------------------
// verdicts

/// Outcome of a query with errors reduced to their kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Determined(Rational),
    Undetermined,
    NullConditioning,
    Error(String),
}

impl From<Result<ProbResult, EvalError>> for Verdict {
    fn from(r: Result<ProbResult, EvalError>) -> Self {
        match r {
            Ok(ProbResult::Determined(v)) => Verdict::Determined(v),
            Ok(ProbResult::Undetermined(_)) => Verdict::Undetermined,
            Err(EvalError::NullConditioning(_)) => Verdict::NullConditioning,
            Err(e) => Verdict::Error(e.to_string()),
        }
    }
}

impl From<Result<ProbResult, OracleError>> for Verdict {
    fn from(r: Result<ProbResult, OracleError>) -> Self {
        match r {
            Ok(ProbResult::Determined(v)) => Verdict::Determined(v),
            Ok(ProbResult::Undetermined(_)) => Verdict::Undetermined,
            Err(OracleError::NullConditioning(_)) => Verdict::NullConditioning,
            Err(e) => Verdict::Error(e.to_string()),
        }
    }
}

pub fn det(f: &Formula, model: &Model) -> Option<Rational> {
    match prob(f, model) {
        Ok(ProbResult::Determined(v)) => Some(v),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// suites

pub struct Golden {
    pub model: &'static str,
    pub query: &'static str,
    /// `None` for undetermined.
    pub expected: Option<(i64, i64)>,
}

pub const GOLDEN: &[Golden] = &[
    Golden {
        model: "dice.mdl",
        query: "4@d | 5@d",
        expected: Some((1, 3)),
    },
    Golden {
        model: "two_dice.mdl",
        query: "(4@d1|5@d1) || (4@d2|5@d2)",
        expected: Some((5, 9)),
    },
    Golden {
        model: "coins.mdl",
        query: "(H@c1 && H@c2) | (H@c1 && T@c2) | (T@c1 && H@c2)",
        expected: Some((3, 4)),
    },
    Golden {
        model: "coin_dice.mdl",
        query: "H@c || 6@d",
        expected: Some((7, 12)),
    },
    Golden {
        model: "two_dice.mdl",
        query: "6@d1 || 6@d2",
        expected: Some((11, 36)),
    },
    Golden {
        model: "two_dice.mdl",
        query: "(6@d1&&5@d2 | 6@d2&&5@d1) & (6@d1||6@d2)",
        expected: Some((1, 18)),
    },
    Golden {
        model: "two_dice.mdl",
        query: "(6@d1&&5@d2 | 6@d2&&5@d1) given (6@d1||6@d2)",
        expected: Some((2, 11)),
    },
    Golden {
        model: "coins.mdl",
        query: "H@c1 && H@c2",
        expected: Some((1, 4)),
    },
    Golden {
        model: "coin_dice.mdl",
        query: "H@c && 6@d",
        expected: Some((1, 12)),
    },
    Golden {
        model: "coin_pair.mdl",
        query: "H@c & T@c",
        expected: Some((0, 1)),
    },
    Golden {
        model: "coin_pair.mdl",
        query: "H@c & H@c",
        expected: Some((1, 2)),
    },
    Golden {
        model: "coin_pair.mdl",
        query: "H@c given T@c",
        expected: Some((0, 1)),
    },
    Golden {
        model: "coin_pair.mdl",
        query: "H@c | T@d",
        expected: None,
    },
    Golden {
        model: "coin_pair.mdl",
        query: "H@c & T@d",
        expected: None,
    },
    Golden {
        model: "alien.mdl",
        query: "alien",
        expected: Some((1, 1000)),
    },
    Golden {
        model: "alien.mdl",
        query: "alien && alien",
        expected: Some((1, 1000)),
    },
    Golden {
        model: "alien.mdl",
        query: "alien || alien",
        expected: Some((1, 1000)),
    },
];

/// Each golden query must match through the evaluator and the enumeration
/// oracle.
pub fn golden_suite() -> Tally {
    let mut t = Tally::default();
    for g in GOLDEN {
        let model = load(g.model);
        let f = parse_formula(g.query).expect("golden query parses");
        let want = match g.expected {
            Some((n, d)) => Verdict::Determined(r(n, d)),
            None => Verdict::Undetermined,
        };
        let by_eval = Verdict::from(prob(&f, &model));
        let by_oracle = Verdict::from(enumerate_prob(&f, &model));
        t.check(by_eval == want && by_oracle == want, || {
            format!(
                "{} [{}]: want {want:?}, evaluator {by_eval:?}, oracle {by_oracle:?}",
                g.query, g.model
            )
        });
    }
    t
}

/// Joint table of the noisy channel written out by hand:
/// `p(T=t, R=r) = 1/2 * (9/10 if t == r else 1/10)`.
pub fn channel_joint(t: u8, received: u8) -> Rational {
    let flip = if t == received { r(9, 10) } else { r(1, 10) };
    r(1, 2) * flip
}

/// Posterior of each input bit given that `received` arrived, from the hand
/// table alone.
pub fn channel_posterior(received: u8) -> [Rational; 2] {
    let evidence = channel_joint(0, received) + channel_joint(1, received);
    [
        channel_joint(0, received) / &evidence,
        channel_joint(1, received) / &evidence,
    ]
}

pub fn bayes_suite() -> Tally {
    let mut t = Tally::default();
    let model = load("channel.mdl");
    let cells = Partition::new(vec![parse_formula("0@T").unwrap(), parse_formula("1@T").unwrap()]).unwrap();
    let evidence = parse_formula("0@R").unwrap();
    let want = channel_posterior(0).to_vec();

    let joint = bayes_parallel(&cells, &evidence, &model);
    t.check(joint.as_ref() == Ok(&want), || {
        format!("joint form: {joint:?}, want {want:?}")
    });
    let likelihood = bayes_parallel_by_likelihood(&cells, &evidence, &model);
    t.check(likelihood.as_ref() == Ok(&want), || {
        format!("likelihood form: {likelihood:?}, want {want:?}")
    });
    for (cell, w) in cells.cells().iter().zip(&want) {
        let q = Formula::pgiven(cell.clone(), evidence.clone());
        let e = Verdict::from(enumerate_prob(&q, &model));
        t.check(e == Verdict::Determined(w.clone()), || {
            format!("enumeration of {q}: {e:?}")
        });
    }
    let additive = bayes_additive(&cells, &evidence, &model);
    t.check(
        matches!(&additive, Err(e @ BayesError::SupportMismatch { .. }) if e.to_string() == "support mismatch {T} vs {R}"),
        || format!("additive rule should be rejected, got {additive:?}"),
    );
    t
}

/// Evaluator and enumeration oracle give the same verdict.
pub fn oracle_suite(cases: &[Case]) -> Tally {
    let mut t = Tally::default();
    for (i, c) in cases.iter().enumerate() {
        let a = Verdict::from(prob(&c.query, &c.model));
        let b = Verdict::from(enumerate_prob(&c.query, &c.model));
        t.check(a == b && !matches!(a, Verdict::Error(_)), || {
            format!("case {i}: {} evaluator {a:?} oracle {b:?}", c.query)
        });
    }
    t
}

/// Determined/undetermined/null counts of a corpus, for reporting.
pub fn corpus_mix(cases: &[Case]) -> (usize, usize, usize) {
    let mut mix = (0, 0, 0);
    for c in cases {
        match Verdict::from(prob(&c.query, &c.model)) {
            Verdict::Determined(_) => mix.0 += 1,
            Verdict::Undetermined => mix.1 += 1,
            _ => mix.2 += 1,
        }
    }
    mix
}

/// Complement, inclusion-exclusion, both forms of the parallel
/// disjunction, independence and predicate idempotence, checked wherever
/// their side conditions hold.
pub fn identity_suite(seed: u64, n: usize) -> Tally {
    let mut t = Tally::default();
    let mut rng = rng(seed);
    let one = Rational::one();
    for i in 0..n {
        let model = random_model(&mut rng);
        let scope = random_scope(&mut rng, &model);
        let depth = |rng: &mut ChaCha8Rng| rng.random_range(min_depth(&scope)..=3.max(min_depth(&scope)));
        let d1 = depth(&mut rng);
        let e = event_over(&mut rng, &model, &scope, d1);
        let d2 = depth(&mut rng);
        let same = event_over(&mut rng, &model, &scope, d2);
        let other = random_event(&mut rng, &model, 3);

        if let Some(pe) = det(&e, &model) {
            let not_e = det(&Formula::not(e.clone()), &model);
            t.check(not_e.as_ref() == Some(&(&one - &pe)), || format!("case {i} R1: {e}"));
        }

        if let (Some(pe), Some(pf)) = (det(&e, &model), det(&same, &model)) {
            let or = det(&Formula::choice_or(e.clone(), same.clone()), &model);
            let and = det(&Formula::choice_and(e.clone(), same.clone()), &model);
            let ok = matches!((&or, &and), (Some(o), Some(a)) if *o == &(&pe + &pf) - a);
            t.check(ok, || format!("case {i} R2: {e} | {same}"));
        }

        if let (Some(pe), Some(pf)) = (det(&e, &model), det(&other, &model)) {
            let par_or = det(&Formula::par_or(e.clone(), other.clone()), &model);
            let neither = det(
                &Formula::par_and(Formula::not(e.clone()), Formula::not(other.clone())),
                &model,
            );
            let both = det(&Formula::par_and(e.clone(), other.clone()), &model);
            let complement_form = matches!((&par_or, &neither), (Some(o), Some(n)) if *o == &one - n);
            let sum_form = matches!((&par_or, &both), (Some(o), Some(b)) if *o == &(&pe + &pf) - b);
            t.check(complement_form, || {
                format!("case {i} R4 complement form: {e} || {other}")
            });
            t.check(sum_form, || format!("case {i} R4 sum form: {e} || {other}"));

            if independent(&e, &other, &model) {
                t.check(both == Some(&pe * &pf), || format!("case {i} R5: {e} && {other}"));
            }
        }

        for decl in model.experiments() {
            if decl.outcomes.iter().map(|o| o.as_str()).collect::<Vec<_>>() == ["true", "false"] {
                let a = Formula::predicate(decl.id.as_str());
                let pa = det(&a, &model);
                let and = det(&Formula::par_and(a.clone(), a.clone()), &model);
                let or = det(&Formula::par_or(a.clone(), a.clone()), &model);
                t.check(pa.is_some() && and == pa && or == pa, || {
                    format!("case {i} idempotence: {a}")
                });
            }
        }
    }
    t
}

/// Disjoint ancestral closures.
fn independent(a: &Formula, b: &Formula, model: &Model) -> bool {
    let ids = |f: &Formula| -> BTreeSet<ExperimentId> { f.atoms().into_iter().map(|a| a.experiment.clone()).collect() };
    let ca = model.ancestral_closure(&ids(a)).unwrap();
    let cb = model.ancestral_closure(&ids(b)).unwrap();
    ca.is_disjoint(&cb)
}

/// Display then parse returns the same tree.
pub fn parser_roundtrip_suite(seed: u64, n: usize) -> Tally {
    let mut t = Tally::default();
    let mut rng = rng(seed);
    for i in 0..n {
        let f = random_ast(&mut rng);
        let text = f.to_string();
        let back = parse_formula(&text);
        t.check(back.as_ref() == Ok(&f), || {
            format!("case {i}: `{text}` parsed as {back:?}")
        });
    }
    t
}

/// A nonempty space survives the trip through its set normal form.
pub fn normal_form_suite(seed: u64, n: usize) -> Tally {
    let mut t = Tally::default();
    let mut rng = rng(seed);
    for i in 0..n {
        let (model, space) = random_space(&mut rng);
        let ok = match to_set_normal_form(&space) {
            Ok(f) => matches!(denote(&f, &model), Ok(Denotation::Space(back)) if back == space),
            Err(_) => false,
        };
        t.check(ok, || format!("case {i}: {space}"));
    }
    t
}

/// Explanations reach the evaluator's verdict.
pub fn explain_suite(cases: &[Case]) -> Tally {
    let mut t = Tally::default();
    for (i, c) in cases.iter().enumerate() {
        let plain = Verdict::from(prob(&c.query, &c.model));
        let explained = Verdict::from(prob_explain(&c.query, &c.model).map(|(r, _)| r));
        t.check(plain == explained, || {
            format!("case {i}: {} {plain:?} vs {explained:?}", c.query)
        });
    }
    t
}

pub const MC_SAMPLES: u64 = 10_000;

/// Fraction of determined queries whose Monte Carlo estimate lies within
/// four standard errors of the exact value. The standard error is that of
/// the exact probability over the samples that entered the frequency.
pub fn monte_carlo_suite(cases: &[Case]) -> Tally {
    let mut t = Tally::default();
    for (i, c) in cases.iter().enumerate() {
        let Some(exact) = det(&c.query, &c.model) else { continue };
        let cfg = SampleConfig {
            sample_count: MC_SAMPLES,
            seed: i as u64,
        };
        let ok = match mc_estimate(&c.query, &c.model, cfg) {
            Ok(mc) => {
                let p = exact.to_f64();
                let se = (p * (1.0 - p) / mc.samples as f64).sqrt();
                (mc.estimate - p).abs() <= 4.0 * se + 1e-12
            }
            Err(_) => false,
        };
        t.check(ok, || format!("case {i}: {} exact {exact}", c.query));
    }
    t
}
