//! Denotation of event formulas as event spaces: sets of mutually exclusive
//! points, each assigning one outcome to every experiment in the support.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{Assignment, Atom, ExperimentId, Model, ModelError, Outcome, FALSE, TRUE};
use crate::syntax::Formula;

/// An unordered tuple of atomic events, at most one per experiment.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Point(Assignment);

impl Point {
    pub fn new(assignment: Assignment) -> Self {
        Point(assignment)
    }

    pub fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> Self {
        Point(atoms.into_iter().map(|a| (a.experiment, a.outcome)).collect())
    }

    pub fn assignment(&self) -> &Assignment {
        &self.0
    }

    pub fn get(&self, id: &ExperimentId) -> Option<&Outcome> {
        self.0.get(id)
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.0.iter().map(|(e, o)| Atom {
            experiment: e.clone(),
            outcome: o.clone(),
        })
    }

    /// Union of two points, or `None` if they disagree on a shared experiment.
    pub fn merge(&self, other: &Point) -> Option<Point> {
        let mut merged = self.0.clone();
        for (id, outcome) in &other.0 {
            match merged.get(id) {
                Some(existing) if existing != outcome => return None,
                Some(_) => {}
                None => {
                    merged.insert(id.clone(), outcome.clone());
                }
            }
        }
        Some(Point(merged))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (id, o)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{id}={o}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A set of points sharing one support.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EventSpace {
    support: BTreeSet<ExperimentId>,
    points: BTreeSet<Point>,
}

impl EventSpace {
    /// Fails if some point does not assign exactly the experiments in `support`.
    pub fn new<I>(support: BTreeSet<ExperimentId>, points: I) -> Result<Self, SemanticsError>
    where
        I: IntoIterator<Item = Point>,
    {
        let points: BTreeSet<Point> = points.into_iter().collect();
        for p in &points {
            if !p.0.keys().eq(support.iter()) {
                return Err(SemanticsError::PointOutsideSupport(p.to_string()));
            }
        }
        Ok(EventSpace { support, points })
    }

    pub fn empty(support: BTreeSet<ExperimentId>) -> Self {
        EventSpace {
            support,
            points: BTreeSet::new(),
        }
    }

    /// The singleton space `{atom}`.
    pub fn atom(atom: &Atom) -> Self {
        let point = Point::from_atoms([atom.clone()]);
        EventSpace {
            support: BTreeSet::from([atom.experiment.clone()]),
            points: BTreeSet::from([point]),
        }
    }

    /// Every joint outcome of the experiments in `support`.
    pub fn universe(support: &BTreeSet<ExperimentId>, model: &Model) -> Result<Self, ModelError> {
        let points = model.assignments(support)?.into_iter().map(Point).collect();
        Ok(EventSpace {
            support: support.clone(),
            points,
        })
    }

    pub fn support(&self) -> &BTreeSet<ExperimentId> {
        &self.support
    }

    pub fn points(&self) -> &BTreeSet<Point> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, point: &Point) -> bool {
        self.points.contains(point)
    }
}

impl fmt::Display for EventSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.points.is_empty() {
            return f.write_str("{ }");
        }
        f.write_str("{ ")?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(" }")
    }
}

/// Value of a formula under the denotation: an event space, or the verdict
/// that no event space is determined.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Denotation {
    Space(EventSpace),
    Undetermined(String),
}

impl Denotation {
    pub fn space(&self) -> Option<&EventSpace> {
        match self {
            Denotation::Space(s) => Some(s),
            Denotation::Undetermined(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("conditional `{0}` has no event space; conditionals are only allowed at the top of a query")]
    Conditional(String),
    #[error("cannot lift: target is missing experiment `{0}`")]
    LiftTarget(ExperimentId),
    #[error("point {0} does not match the space's support")]
    PointOutsideSupport(String),
    #[error("the empty event space has no set normal form")]
    EmptySpace,
}

pub(crate) fn render_support(support: &BTreeSet<ExperimentId>) -> String {
    let names: Vec<&str> = support.iter().map(ExperimentId::as_str).collect();
    format!("{{{}}}", names.join(","))
}

/// Checks that every atom is declared and that no conditional occurs.
pub fn check_event_formula(f: &Formula, model: &Model) -> Result<(), SemanticsError> {
    if f.contains_conditional() {
        let offending = find_conditional(f).map(ToString::to_string).unwrap_or_default();
        return Err(SemanticsError::Conditional(offending));
    }
    for atom in f.atoms() {
        model.check_atom(atom)?;
    }
    Ok(())
}

fn find_conditional(f: &Formula) -> Option<&Formula> {
    match f {
        Formula::Atom(_) => None,
        Formula::GivenAdd { .. } | Formula::GivenPar { .. } => Some(f),
        Formula::Not(inner) => find_conditional(inner),
        Formula::ChoiceAnd(l, r) | Formula::ChoiceOr(l, r) | Formula::ParAnd(l, r) | Formula::ParOr(l, r) => {
            find_conditional(l).or_else(|| find_conditional(r))
        }
    }
}

/// Maps a formula to its event space.
///
/// `&` and `|` denote intersection and union and require both operands to
/// have the same support; otherwise the result is undetermined. `~E` is the
/// complement within the joint space of `E`'s support. `&&` is the
/// Cartesian conjunction and `||` is expanded as
/// `(E && F) | (~E && F) | (E && ~F)`.
pub fn denote(f: &Formula, model: &Model) -> Result<Denotation, SemanticsError> {
    check_event_formula(f, model)?;
    match denote_checked(f, model) {
        Ok(space) => Ok(Denotation::Space(space)),
        Err(Failure::Undetermined(reason)) => Ok(Denotation::Undetermined(reason)),
        Err(Failure::Error(e)) => Err(e),
    }
}

enum Failure {
    Undetermined(String),
    Error(SemanticsError),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Error(e.into())
    }
}

fn same_support(op: &str, l: &EventSpace, r: &EventSpace) -> Result<(), Failure> {
    if l.support == r.support {
        Ok(())
    } else {
        Err(Failure::Undetermined(format!(
            "`{op}` across distinct supports {} and {}",
            render_support(&l.support),
            render_support(&r.support)
        )))
    }
}

fn denote_checked(f: &Formula, model: &Model) -> Result<EventSpace, Failure> {
    match f {
        Formula::Atom(atom) => Ok(EventSpace::atom(atom)),
        Formula::Not(inner) => {
            let space = denote_checked(inner, model)?;
            Ok(complement(&space, model)?)
        }
        Formula::ChoiceOr(l, r) => {
            let (l, r) = (denote_checked(l, model)?, denote_checked(r, model)?);
            same_support("|", &l, &r)?;
            let points = l.points.union(&r.points).cloned().collect();
            Ok(EventSpace {
                support: l.support,
                points,
            })
        }
        Formula::ChoiceAnd(l, r) => {
            let (l, r) = (denote_checked(l, model)?, denote_checked(r, model)?);
            same_support("&", &l, &r)?;
            let points = l.points.intersection(&r.points).cloned().collect();
            Ok(EventSpace {
                support: l.support,
                points,
            })
        }
        Formula::ParAnd(l, r) => {
            let (l, r) = (denote_checked(l, model)?, denote_checked(r, model)?);
            Ok(cartesian_conj(&l, &r))
        }
        Formula::ParOr(l, r) => {
            let (e, f) = (denote_checked(l, model)?, denote_checked(r, model)?);
            let (not_e, not_f) = (complement(&e, model)?, complement(&f, model)?);
            let both = cartesian_conj(&e, &f);
            let only_f = cartesian_conj(&not_e, &f);
            let only_e = cartesian_conj(&e, &not_f);
            let points = both
                .points
                .into_iter()
                .chain(only_f.points)
                .chain(only_e.points)
                .collect();
            Ok(EventSpace {
                support: both.support,
                points,
            })
        }
        Formula::GivenAdd { .. } | Formula::GivenPar { .. } => {
            Err(Failure::Error(SemanticsError::Conditional(f.to_string())))
        }
    }
}

/// Support of `f`'s event space, computed from the syntax alone; `Err`
/// carries the undetermined reason. Agrees with [`denote`].
pub fn support(f: &Formula) -> Result<BTreeSet<ExperimentId>, String> {
    match f {
        Formula::Atom(a) => Ok(BTreeSet::from([a.experiment.clone()])),
        Formula::Not(inner) => support(inner),
        Formula::ChoiceAnd(l, r) | Formula::ChoiceOr(l, r) => {
            let (ls, rs) = (support(l)?, support(r)?);
            if ls == rs {
                Ok(ls)
            } else {
                let op = if matches!(f, Formula::ChoiceAnd(..)) { "&" } else { "|" };
                Err(format!(
                    "`{op}` across distinct supports {} and {}",
                    render_support(&ls),
                    render_support(&rs)
                ))
            }
        }
        Formula::ParAnd(l, r) | Formula::ParOr(l, r) => {
            let mut ls = support(l)?;
            ls.extend(support(r)?);
            Ok(ls)
        }
        Formula::GivenAdd { event, condition } | Formula::GivenPar { event, condition } => {
            let mut es = support(event)?;
            es.extend(support(condition)?);
            Ok(es)
        }
    }
}

/// `U − s`, with `U` the joint space over `s`'s support.
pub fn complement(s: &EventSpace, model: &Model) -> Result<EventSpace, ModelError> {
    let universe = EventSpace::universe(&s.support, model)?;
    let points = universe.points.difference(&s.points).cloned().collect();
    Ok(EventSpace {
        support: s.support.clone(),
        points,
    })
}

/// Unordered, flattened Cartesian conjunction. Points that disagree on a
/// shared experiment are dropped; identical shared atoms collapse.
pub fn cartesian_conj(s: &EventSpace, t: &EventSpace) -> EventSpace {
    let support = s.support.union(&t.support).cloned().collect();
    let points = s
        .points
        .iter()
        .flat_map(|p| t.points.iter().filter_map(move |q| p.merge(q)))
        .collect();
    EventSpace { support, points }
}

/// Extends every point of `s` by all outcome combinations of the
/// experiments in `target` that `s` does not mention.
pub fn lift(s: &EventSpace, target: &BTreeSet<ExperimentId>, model: &Model) -> Result<EventSpace, SemanticsError> {
    if let Some(missing) = s.support.difference(target).next() {
        return Err(SemanticsError::LiftTarget(missing.clone()));
    }
    let extra: BTreeSet<ExperimentId> = target.difference(&s.support).cloned().collect();
    if extra.is_empty() {
        return Ok(s.clone());
    }
    let fill = EventSpace::universe(&extra, model)?;
    Ok(cartesian_conj(s, &fill))
}

/// The space written as a `|` of `&&`-chains of atoms, one chain per point.
pub fn to_set_normal_form(s: &EventSpace) -> Result<Formula, SemanticsError> {
    s.points
        .iter()
        .filter(|p| !p.0.is_empty())
        .map(|p| {
            p.atoms()
                .map(Formula::Atom)
                .reduce(Formula::par_and)
                .expect("point is nonempty")
        })
        .reduce(Formula::choice_or)
        .ok_or(SemanticsError::EmptySpace)
}

/// Parallel connectives whose operands share a non-predicate experiment.
///
/// Such formulas still have a meaning (conflicting points are dropped), but
/// `&&`/`||` are meant for events under different experiments.
pub fn shared_experiment_warnings(f: &Formula, model: &Model) -> Vec<String> {
    let mut out = Vec::new();
    collect_warnings(f, model, &mut out);
    out
}

fn is_predicate(id: &ExperimentId, model: &Model) -> bool {
    model.experiment(id).is_some_and(|d| {
        d.parents.is_empty()
            && d.outcomes.len() == 2
            && d.outcomes.iter().any(|o| o.as_str() == TRUE)
            && d.outcomes.iter().any(|o| o.as_str() == FALSE)
    })
}

fn collect_warnings(f: &Formula, model: &Model, out: &mut Vec<String>) {
    match f {
        Formula::Atom(_) => {}
        Formula::Not(inner) => collect_warnings(inner, model, out),
        Formula::ParAnd(l, r) | Formula::ParOr(l, r) => {
            let left: BTreeSet<ExperimentId> = l.atoms().into_iter().map(|a| a.experiment.clone()).collect();
            let right: BTreeSet<ExperimentId> = r.atoms().into_iter().map(|a| a.experiment.clone()).collect();
            let shared: BTreeSet<ExperimentId> = left
                .intersection(&right)
                .filter(|id| !is_predicate(id, model))
                .cloned()
                .collect();
            if !shared.is_empty() {
                out.push(format!(
                    "parallel connective in `{f}` joins events of the same experiment(s) {}",
                    render_support(&shared)
                ));
            }
            collect_warnings(l, model, out);
            collect_warnings(r, model, out);
        }
        Formula::ChoiceAnd(l, r) | Formula::ChoiceOr(l, r) => {
            collect_warnings(l, model, out);
            collect_warnings(r, model, out);
        }
        Formula::GivenAdd { event, condition } | Formula::GivenPar { event, condition } => {
            collect_warnings(event, model, out);
            collect_warnings(condition, model, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ExperimentDecl;
    use crate::rational::Rational;
    use crate::syntax::parse_formula;

    fn dice(id: &str) -> ExperimentDecl {
        ExperimentDecl::uniform(id, ["1", "2", "3", "4", "5", "6"])
    }

    fn model() -> Model {
        Model::new(vec![
            dice("d"),
            dice("d1"),
            dice("d2"),
            ExperimentDecl::uniform("c", ["H", "T"]),
            ExperimentDecl::uniform("c1", ["H", "T"]),
            ExperimentDecl::uniform("c2", ["H", "T"]),
            ExperimentDecl::predicate("alien", Rational::new(1, 1000)),
        ])
        .unwrap()
    }

    fn space_of(text: &str) -> EventSpace {
        match denote(&parse_formula(text).unwrap(), &model()).unwrap() {
            Denotation::Space(s) => s,
            Denotation::Undetermined(r) => panic!("undetermined: {r}"),
        }
    }

    fn pt(pairs: &[(&str, &str)]) -> Point {
        Point::from_atoms(pairs.iter().map(|(e, o)| Atom::new(*o, *e)))
    }

    fn ids(names: &[&str]) -> BTreeSet<ExperimentId> {
        names.iter().map(|n| ExperimentId::from(*n)).collect()
    }

    #[test]
    fn choice_or_is_union() {
        let s = space_of("4@d | 5@d");
        assert_eq!(s.support(), &ids(&["d"]));
        assert_eq!(s.points(), &BTreeSet::from([pt(&[("d", "4")]), pt(&[("d", "5")])]));
    }

    #[test]
    fn choice_and_is_intersection() {
        let s = space_of("(3@d | 4@d) & 4@d");
        assert_eq!(s.to_string(), "{ {d=4} }");
    }

    #[test]
    fn cross_experiment_choice_is_undetermined() {
        let d = denote(&parse_formula("H@c | 4@d").unwrap(), &model()).unwrap();
        match d {
            Denotation::Undetermined(reason) => {
                assert!(reason.contains("{c}") && reason.contains("{d}"), "{reason}");
                assert!(reason.contains('|'));
            }
            other => panic!("{other:?}"),
        }
        let d = denote(&parse_formula("~(H@c & 4@d)").unwrap(), &model()).unwrap();
        assert!(matches!(d, Denotation::Undetermined(_)));
    }

    #[test]
    fn parallel_or_of_sixes() {
        let s = space_of("6@d1 || 6@d2");
        assert_eq!(s.len(), 11);
        assert!(s
            .points()
            .iter()
            .all(|p| p.get(&"d1".into()).unwrap().as_str() == "6" || p.get(&"d2".into()).unwrap().as_str() == "6"));
    }

    #[test]
    fn flattened_product() {
        // {(0,1),(1,2)} over {a,b} times {0,1} over {x}
        let s = EventSpace::new(
            ids(&["a", "b"]),
            [pt(&[("a", "0"), ("b", "1")]), pt(&[("a", "1"), ("b", "2")])],
        )
        .unwrap();
        let t = EventSpace::new(ids(&["x"]), [pt(&[("x", "0")]), pt(&[("x", "1")])]).unwrap();
        let st = cartesian_conj(&s, &t);
        assert_eq!(st.support(), &ids(&["a", "b", "x"]));
        let expected: BTreeSet<Point> = [
            [("a", "0"), ("b", "1"), ("x", "0")],
            [("a", "0"), ("b", "1"), ("x", "1")],
            [("a", "1"), ("b", "2"), ("x", "0")],
            [("a", "1"), ("b", "2"), ("x", "1")],
        ]
        .iter()
        .map(|p| pt(p))
        .collect();
        assert_eq!(st.points(), &expected);
    }

    #[test]
    fn predicate_collapses() {
        let a = space_of("alien");
        assert_eq!(cartesian_conj(&a, &a), a);
        assert_eq!(space_of("alien && alien"), a);
        assert_eq!(space_of("alien || alien"), a);
    }

    #[test]
    fn conflicting_merge_is_empty() {
        let s = space_of("H@c && T@c");
        assert!(s.is_empty());
        assert_eq!(s.support(), &ids(&["c"]));
    }

    #[test]
    fn lift_examples() {
        let m = model();
        let six = space_of("6@d");
        let lifted = lift(&six, &ids(&["c", "d"]), &m).unwrap();
        assert_eq!(
            lifted.points(),
            &BTreeSet::from([pt(&[("d", "6"), ("c", "H")]), pt(&[("d", "6"), ("c", "T")])])
        );
        assert_eq!(lift(&six, &ids(&["d"]), &m).unwrap(), six);
        let empty = EventSpace::empty(ids(&["c"]));
        let lifted = lift(&empty, &ids(&["c", "d"]), &m).unwrap();
        assert!(lifted.is_empty());
        assert_eq!(lifted.support(), &ids(&["c", "d"]));
        assert!(matches!(
            lift(&six, &ids(&["c"]), &m),
            Err(SemanticsError::LiftTarget(_))
        ));
    }

    #[test]
    fn set_normal_form() {
        let m = model();
        let four = space_of("4@d");
        assert_eq!(to_set_normal_form(&four).unwrap().to_string(), "4@d");

        let mixed = EventSpace::new(
            ids(&["c1", "c2"]),
            [pt(&[("c1", "H"), ("c2", "T")]), pt(&[("c1", "T"), ("c2", "H")])],
        )
        .unwrap();
        let snf = to_set_normal_form(&mixed).unwrap();
        assert_eq!(snf.to_string(), "H@c1 && T@c2 | T@c1 && H@c2");
        assert_eq!(denote(&snf, &m).unwrap(), Denotation::Space(mixed));

        let sixes = space_of("6@d1 || 6@d2");
        let snf = to_set_normal_form(&sixes).unwrap();
        assert_eq!(snf.to_string().matches(" | ").count(), 10);
        assert_eq!(denote(&snf, &m).unwrap(), Denotation::Space(sixes));

        assert_eq!(
            to_set_normal_form(&EventSpace::empty(ids(&["c"]))),
            Err(SemanticsError::EmptySpace)
        );
    }

    #[test]
    fn errors() {
        let m = model();
        assert!(matches!(
            denote(&parse_formula("7@d").unwrap(), &m),
            Err(SemanticsError::Model(ModelError::UnknownOutcome { .. }))
        ));
        assert!(matches!(
            denote(&parse_formula("H@q").unwrap(), &m),
            Err(SemanticsError::Model(ModelError::UnknownExperiment(_)))
        ));
        assert!(matches!(
            denote(&parse_formula("~(H@c given T@c)").unwrap(), &m),
            Err(SemanticsError::Conditional(_))
        ));
    }

    #[test]
    fn warnings_for_same_experiment_parallel() {
        let m = model();
        let w = shared_experiment_warnings(&parse_formula("H@c && T@c").unwrap(), &m);
        assert_eq!(w.len(), 1);
        assert!(shared_experiment_warnings(&parse_formula("alien && alien").unwrap(), &m).is_empty());
        assert!(shared_experiment_warnings(&parse_formula("6@d1 || 6@d2").unwrap(), &m).is_empty());
    }
}
