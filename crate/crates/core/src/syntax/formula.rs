use std::fmt;

use crate::model::{Atom, ExperimentId, TRUE};

/// An event formula.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    Atom(Atom),
    /// `~E`, complement.
    Not(Box<Formula>),
    /// `E & F`, both outcomes within one experiment (set intersection).
    ChoiceAnd(Box<Formula>, Box<Formula>),
    /// `E | F`, either outcome within one experiment (set union).
    ChoiceOr(Box<Formula>, Box<Formula>),
    /// `E && F`, both events under different experiments.
    ParAnd(Box<Formula>, Box<Formula>),
    /// `E || F`, at least one event under different experiments.
    ParOr(Box<Formula>, Box<Formula>),
    /// `E given F`, conditional within a single experiment.
    GivenAdd {
        event: Box<Formula>,
        condition: Box<Formula>,
    },
    /// `E pgiven F`, conditional across experiments.
    GivenPar {
        event: Box<Formula>,
        condition: Box<Formula>,
    },
}

impl Formula {
    pub fn atom(outcome: &str, experiment: &str) -> Formula {
        Formula::Atom(Atom::new(outcome, experiment))
    }

    pub fn predicate(name: &str) -> Formula {
        Formula::Atom(Atom::predicate(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn choice_and(l: Formula, r: Formula) -> Formula {
        Formula::ChoiceAnd(Box::new(l), Box::new(r))
    }

    pub fn choice_or(l: Formula, r: Formula) -> Formula {
        Formula::ChoiceOr(Box::new(l), Box::new(r))
    }

    pub fn par_and(l: Formula, r: Formula) -> Formula {
        Formula::ParAnd(Box::new(l), Box::new(r))
    }

    pub fn par_or(l: Formula, r: Formula) -> Formula {
        Formula::ParOr(Box::new(l), Box::new(r))
    }

    pub fn given(event: Formula, condition: Formula) -> Formula {
        Formula::GivenAdd {
            event: Box::new(event),
            condition: Box::new(condition),
        }
    }

    pub fn pgiven(event: Formula, condition: Formula) -> Formula {
        Formula::GivenPar {
            event: Box::new(event),
            condition: Box::new(condition),
        }
    }

    pub fn is_conditional(&self) -> bool {
        matches!(self, Formula::GivenAdd { .. } | Formula::GivenPar { .. })
    }

    /// True if a conditional node occurs anywhere in the tree.
    pub fn contains_conditional(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::GivenAdd { .. } | Formula::GivenPar { .. } => true,
            Formula::Not(f) => f.contains_conditional(),
            Formula::ChoiceAnd(l, r) | Formula::ChoiceOr(l, r) | Formula::ParAnd(l, r) | Formula::ParOr(l, r) => {
                l.contains_conditional() || r.contains_conditional()
            }
        }
    }

    /// Every atom, left to right.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::Not(f) => f.collect_atoms(out),
            Formula::ChoiceAnd(l, r) | Formula::ChoiceOr(l, r) | Formula::ParAnd(l, r) | Formula::ParOr(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
            Formula::GivenAdd { event, condition } | Formula::GivenPar { event, condition } => {
                event.collect_atoms(out);
                condition.collect_atoms(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f) => 1 + f.depth(),
            Formula::ChoiceAnd(l, r)
            | Formula::ChoiceOr(l, r)
            | Formula::ParAnd(l, r)
            | Formula::ParOr(l, r)
            | Formula::GivenAdd { event: l, condition: r }
            | Formula::GivenPar { event: l, condition: r } => 1 + l.depth().max(r.depth()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::GivenAdd { .. } | Formula::GivenPar { .. } => 0,
            Formula::ChoiceOr(..) | Formula::ParOr(..) => 1,
            Formula::ChoiceAnd(..) | Formula::ParAnd(..) => 2,
            Formula::Not(_) => 3,
            Formula::Atom(_) => 4,
        }
    }
}

pub(crate) const KEYWORDS: &[&str] = &["given", "pgiven"];

/// True for names that the parser reads as a bare predicate.
pub(crate) fn is_predicate_name(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_lowercase()) && !KEYWORDS.contains(&name)
}

fn write_atom(atom: &Atom, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if atom.outcome.as_str() == TRUE && is_predicate_name(atom.experiment.as_str()) {
        f.write_str(atom.experiment.as_str())
    } else {
        write!(f, "{atom}")
    }
}

fn write_child(child: &Formula, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

/// Renders with the fewest parentheses that reparse to the same tree.
/// Binary connectives are left-associative, so a right operand at the same
/// level is parenthesized.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, r, op) = match self {
            Formula::Atom(a) => return write_atom(a, f),
            Formula::Not(inner) => {
                f.write_str("~")?;
                return write_child(inner, 3, f);
            }
            Formula::ChoiceAnd(l, r) => (l, r, "&"),
            Formula::ChoiceOr(l, r) => (l, r, "|"),
            Formula::ParAnd(l, r) => (l, r, "&&"),
            Formula::ParOr(l, r) => (l, r, "||"),
            Formula::GivenAdd { event, condition } => (event, condition, "given"),
            Formula::GivenPar { event, condition } => (event, condition, "pgiven"),
        };
        let prec = self.precedence();
        write_child(l, if prec == 0 { 1 } else { prec }, f)?;
        write!(f, " {op} ")?;
        write_child(r, prec + 1, f)
    }
}

/// Minimal-parentheses rendering of `f`.
pub fn format_formula(f: &Formula) -> String {
    f.to_string()
}

/// Experiments mentioned by `f`, without duplicates, in sorted order.
pub fn mentioned_experiments(f: &Formula) -> Vec<ExperimentId> {
    let mut ids: Vec<ExperimentId> = f.atoms().into_iter().map(|a| a.experiment.clone()).collect();
    ids.sort();
    ids.dedup();
    ids
}
