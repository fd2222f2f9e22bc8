//! Rule-by-rule derivations of `p(E)`.
//!
//! Connectives are rewritten top-down with the probability rules (complement,
//! inclusion-exclusion, conditional product, parallel-or via complement,
//! parallel-and via independence or conditional product). Whenever a rule's
//! side condition fails the derivation falls back to enumerating the event
//! space.

use std::collections::BTreeSet;
use std::fmt;

use crate::eval::{cond_additive, cond_parallel, prob, space_prob, EvalError, ProbResult};
use crate::model::{Atom, ExperimentId, Model};
use crate::rational::Rational;
use crate::semantics::{self, denote, lift, Denotation};
use crate::syntax::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    /// `p(~E) = 1 − p(E)`
    R1,
    /// `p(E | F) = p(E) + p(F) − p(E & F)`
    R2,
    /// `p(E & F) = p(F) p(E given F)`
    R3,
    /// `p(E || F) = 1 − p(~E && ~F)`
    R4,
    /// `p(E && F) = p(F) p(E pgiven F)`
    R5,
    /// `p(E && F) = p(E) p(F)` for independent operands
    R5Independence,
    /// `p(E) = p(E*)`
    R6,
    /// sum over mutually exclusive points
    R7,
    /// single point as a parallel conjunction of atoms
    R8,
    /// direct lookup in a distribution table
    Cpt,
    /// conditional ratio computed from enumerated event spaces
    Enumeration,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::R1 => "R1",
            Rule::R2 => "R2",
            Rule::R3 => "R3",
            Rule::R4 => "R4",
            Rule::R5 => "R5",
            Rule::R5Independence => "R5 independence",
            Rule::R6 => "R6",
            Rule::R7 => "R7",
            Rule::R8 => "R8",
            Rule::Cpt => "cpt",
            Rule::Enumeration => "enumeration",
        };
        f.write_str(s)
    }
}

/// One step of a derivation: `p(formula) = result`, justified by `rule`
/// applied to the children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub formula: String,
    pub result: ProbResult,
    /// How the children combine, e.g. `1 − 25/36`.
    pub detail: String,
    pub children: Vec<Derivation>,
}

impl Derivation {
    fn leaf(rule: Rule, formula: String, result: ProbResult, detail: String) -> Self {
        Derivation {
            rule,
            formula,
            result,
            detail,
            children: Vec::new(),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Derivation::size).sum::<usize>()
    }

    /// Post-order rendering, conclusion last. Long point sums are elided
    /// after `MAX_SHOWN` terms.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, depth: usize, out: &mut String) {
        const MAX_SHOWN: usize = 12;
        for child in self.children.iter().take(MAX_SHOWN) {
            child.render_into(depth + 1, out);
        }
        if self.children.len() > MAX_SHOWN {
            out.push_str(&"  ".repeat(depth + 1));
            out.push_str(&format!("… {} more\n", self.children.len() - MAX_SHOWN));
        }
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!("[{}] p({})", self.rule, self.formula));
        if !self.detail.is_empty() {
            out.push_str(&format!(" = {}", self.detail));
        }
        out.push_str(&format!(" = {}\n", self.result));
    }
}

/// `prob(f)` together with the derivation that produced it.
pub fn prob_explain(f: &Formula, model: &Model) -> Result<(ProbResult, Derivation), EvalError> {
    // Same up-front checks as `prob`, so both report identical errors.
    let expected = prob(f, model)?;
    let derivation = match f {
        Formula::GivenAdd { event, condition } => {
            let joint = Formula::choice_and((**event).clone(), (**condition).clone());
            conditional_root(f, condition, joint, Rule::R3, model)?
        }
        Formula::GivenPar { event, condition } => {
            let joint = Formula::par_and((**event).clone(), (**condition).clone());
            conditional_root(f, condition, joint, Rule::R5, model)?
        }
        _ => explain(f, model)?,
    };
    debug_assert!(derivation.result.same_verdict(&expected));
    Ok((derivation.result.clone(), derivation))
}

fn conditional_root(
    root: &Formula,
    condition: &Formula,
    joint: Formula,
    rule: Rule,
    model: &Model,
) -> Result<Derivation, EvalError> {
    let joint_d = explain(&joint, model)?;
    let cond_d = explain(condition, model)?;
    // A support mismatch in `given` already makes the joint undetermined.
    let result = match (&joint_d.result, &cond_d.result) {
        (ProbResult::Determined(j), ProbResult::Determined(c)) => ProbResult::Determined(
            j.checked_div(c)
                .ok_or_else(|| EvalError::NullConditioning(condition.to_string()))?,
        ),
        (ProbResult::Undetermined(r), _) | (_, ProbResult::Undetermined(r)) => ProbResult::Undetermined(r.clone()),
    };
    let detail = format!("p({}) / p({})", joint_d.formula, cond_d.formula);
    Ok(Derivation {
        rule,
        formula: root.to_string(),
        result,
        detail,
        children: vec![joint_d, cond_d],
    })
}

fn undetermined_child(children: &[Derivation]) -> Option<ProbResult> {
    children
        .iter()
        .find(|c| !c.result.is_determined())
        .map(|c| c.result.clone())
}

fn closure(f: &Formula, model: &Model) -> Result<Option<BTreeSet<ExperimentId>>, EvalError> {
    match semantics::support(f) {
        Ok(s) => Ok(Some(model.ancestral_closure(&s)?)),
        Err(_) => Ok(None),
    }
}

fn explain(f: &Formula, model: &Model) -> Result<Derivation, EvalError> {
    let text = f.to_string();
    match f {
        Formula::Atom(atom) => explain_atom(atom, f, model),
        Formula::Not(inner) => {
            let child = explain(inner, model)?;
            let result = match &child.result {
                ProbResult::Determined(v) => ProbResult::Determined(Rational::one() - v),
                other => other.clone(),
            };
            let detail = format!("1 − {}", child.result);
            Ok(Derivation {
                rule: Rule::R1,
                formula: text,
                result,
                detail,
                children: vec![child],
            })
        }
        Formula::ChoiceOr(l, r) => {
            let children = vec![explain(l, model)?, explain(r, model)?];
            if let Some(u) = undetermined_child(&children) {
                return Ok(Derivation {
                    rule: Rule::R2,
                    formula: text,
                    result: u,
                    detail: String::new(),
                    children,
                });
            }
            if let Err(reason) = semantics::support(f) {
                return Ok(Derivation {
                    rule: Rule::R2,
                    formula: text,
                    result: ProbResult::Undetermined(reason),
                    detail: String::new(),
                    children,
                });
            }
            let both = explain(&Formula::choice_and((**l).clone(), (**r).clone()), model)?;
            let values: Vec<Rational> = children
                .iter()
                .chain(std::iter::once(&both))
                .map(|c| c.result.value().cloned().expect("determined"))
                .collect();
            let detail = format!("{} + {} − {}", values[0], values[1], values[2]);
            let result = ProbResult::Determined(&(&values[0] + &values[1]) - &values[2]);
            let mut children = children;
            children.push(both);
            Ok(Derivation {
                rule: Rule::R2,
                formula: text,
                result,
                detail,
                children,
            })
        }
        Formula::ChoiceAnd(l, r) => {
            let children = vec![explain(l, model)?, explain(r, model)?];
            if let Some(u) = undetermined_child(&children) {
                return Ok(Derivation {
                    rule: Rule::R3,
                    formula: text,
                    result: u,
                    detail: String::new(),
                    children,
                });
            }
            if let Err(reason) = semantics::support(f) {
                return Ok(Derivation {
                    rule: Rule::R3,
                    formula: text,
                    result: ProbResult::Undetermined(reason),
                    detail: String::new(),
                    children,
                });
            }
            let right = children.into_iter().nth(1).expect("two children");
            let pf = right.result.value().cloned().expect("determined");
            if pf.is_zero() {
                return enumerate(f, model);
            }
            let cond = conditional_step(l, r, Rule::R3, model)?;
            let pc = cond.result.value().cloned().expect("determined");
            let detail = format!("{pf} · {pc}");
            Ok(Derivation {
                rule: Rule::R3,
                formula: text,
                result: ProbResult::Determined(&pf * &pc),
                detail,
                children: vec![right, cond],
            })
        }
        Formula::ParOr(l, r) => {
            let neither = Formula::par_and(Formula::not((**l).clone()), Formula::not((**r).clone()));
            let child = explain(&neither, model)?;
            let (result, detail) = match &child.result {
                ProbResult::Determined(v) => (ProbResult::Determined(Rational::one() - v), format!("1 − {v}")),
                other => (other.clone(), String::new()),
            };
            Ok(Derivation {
                rule: Rule::R4,
                formula: text,
                result,
                detail,
                children: vec![child],
            })
        }
        Formula::ParAnd(l, r) => {
            let (lc, rc) = (closure(l, model)?, closure(r, model)?);
            let independent = matches!((&lc, &rc), (Some(a), Some(b)) if a.is_disjoint(b));
            let children = vec![explain(l, model)?, explain(r, model)?];
            if let Some(u) = undetermined_child(&children) {
                return Ok(Derivation {
                    rule: Rule::R5,
                    formula: text,
                    result: u,
                    detail: String::new(),
                    children,
                });
            }
            let pe = children[0].result.value().cloned().expect("determined");
            let pf = children[1].result.value().cloned().expect("determined");
            if independent {
                return Ok(Derivation {
                    rule: Rule::R5Independence,
                    formula: text,
                    detail: format!("{pe} · {pf}"),
                    result: ProbResult::Determined(&pe * &pf),
                    children,
                });
            }
            if pf.is_zero() {
                return enumerate(f, model);
            }
            let right = children.into_iter().nth(1).expect("two children");
            let cond = conditional_step(l, r, Rule::R5, model)?;
            let pc = cond.result.value().cloned().expect("determined");
            Ok(Derivation {
                rule: Rule::R5,
                formula: text,
                detail: format!("{pf} · {pc}"),
                result: ProbResult::Determined(&pf * &pc),
                children: vec![right, cond],
            })
        }
        Formula::GivenAdd { .. } | Formula::GivenPar { .. } => {
            Err(EvalError::Semantics(semantics::SemanticsError::Conditional(text)))
        }
    }
}

/// `p(e given f)` or `p(e pgiven f)` by enumeration, shown with the two
/// enumerated spaces as children.
fn conditional_step(e: &Formula, f: &Formula, rule: Rule, model: &Model) -> Result<Derivation, EvalError> {
    let (joint, result, op) = if rule == Rule::R3 {
        (
            Formula::choice_and(e.clone(), f.clone()),
            cond_additive(e, f, model)?,
            "given",
        )
    } else {
        (
            Formula::par_and(e.clone(), f.clone()),
            cond_parallel(e, f, model)?,
            "pgiven",
        )
    };
    let children = vec![enumerate(&joint, model)?, enumerate(f, model)?];
    let detail = format!("{} / {}", children[0].result, children[1].result);
    Ok(Derivation {
        rule: Rule::Enumeration,
        formula: format!("{} {op} {}", paren(e), paren(f)),
        result,
        detail,
        children,
    })
}

fn paren(f: &Formula) -> String {
    match f {
        Formula::Atom(_) | Formula::Not(_) => f.to_string(),
        _ => format!("({f})"),
    }
}

fn explain_atom(atom: &Atom, f: &Formula, model: &Model) -> Result<Derivation, EvalError> {
    model.check_atom(atom)?;
    let decl = model
        .experiment(&atom.experiment)
        .expect("checked atom has a declaration");
    if decl.parents.is_empty() {
        let v = model.conditional_prob(&atom.experiment, &atom.outcome, &[])?;
        return Ok(Derivation::leaf(
            Rule::Cpt,
            f.to_string(),
            ProbResult::Determined(v),
            String::new(),
        ));
    }
    enumerate(f, model)
}

/// `p(E) = p(E*)`, then the sum over the points of `E*` lifted to the
/// ancestral closure, each point a product of table entries.
fn enumerate(f: &Formula, model: &Model) -> Result<Derivation, EvalError> {
    let text = f.to_string();
    let space = match denote(f, model)? {
        Denotation::Space(s) => s,
        Denotation::Undetermined(reason) => {
            return Ok(Derivation::leaf(
                Rule::R6,
                text,
                ProbResult::Undetermined(reason),
                String::new(),
            ))
        }
    };
    let closure = model.ancestral_closure(space.support())?;
    let lifted = lift(&space, &closure, model)?;
    let mut points = Vec::with_capacity(lifted.len());
    for point in lifted.points() {
        let mut factors = Vec::new();
        for (id, outcome) in point.assignment() {
            let decl = model.experiment(id).expect("declared");
            let parents: Vec<_> = decl
                .parents
                .iter()
                .map(|p| point.get(p).cloned().expect("closed"))
                .collect();
            factors.push(model.conditional_prob(id, outcome, &parents)?.to_string());
        }
        let value = model.joint_point_prob(point.assignment())?;
        let formula = point.atoms().map(|a| a.to_string()).collect::<Vec<_>>().join(" && ");
        points.push(Derivation::leaf(
            Rule::R8,
            formula,
            ProbResult::Determined(value),
            factors.join(" · "),
        ));
    }
    let total = space_prob(&space, model)?;
    let sum = Derivation {
        rule: Rule::R7,
        formula: lifted.to_string(),
        result: ProbResult::Determined(total.clone()),
        detail: format!("sum over {} point(s)", lifted.len()),
        children: points,
    };
    Ok(Derivation {
        rule: Rule::R6,
        formula: text,
        result: ProbResult::Determined(total),
        detail: format!("p({space})"),
        children: vec![sum],
    })
}
