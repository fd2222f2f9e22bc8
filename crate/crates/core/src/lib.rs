//! Exact probabilities for event formulas over declared experiments.
//!
//! Formulas combine experiment-tagged atoms (`6@d`) with choice connectives
//! (`&`, `|`: outcomes of a single experiment), parallel connectives (`&&`,
//! `||`: events under different experiments), complement (`~`) and the two
//! conditionals `given` / `pgiven`. Every formula without a conditional
//! denotes an [`EventSpace`](semantics::EventSpace); its probability is the
//! exact sum of its points.
//!
//! ```
//! use colprob::{parse_formula, parse_model, prob, ProbResult, Rational};
//!
//! let model = parse_model("experiment d1 : 1, 2, 3, 4, 5, 6\nexperiment d2 : 1, 2, 3, 4, 5, 6").unwrap();
//! let sixes = parse_formula("6@d1 || 6@d2").unwrap();
//! assert_eq!(prob(&sixes, &model).unwrap(), ProbResult::Determined(Rational::new(11, 36)));
//! ```

pub mod bayes;
pub mod cli;
pub mod eval;
pub mod explain;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod semantics;
pub mod syntax;

pub use bayes::{bayes_additive, bayes_parallel, check_partition, BayesError, Partition, PartitionReport, Variant};
pub use eval::{cond_additive, cond_parallel, prob, EvalError, ProbResult};
pub use explain::{prob_explain, Derivation, Rule};
pub use model::{Atom, ExperimentDecl, ExperimentId, Model, Outcome};
pub use oracle::{enumerate_prob, mc_estimate, McEstimate, SampleConfig};
pub use rational::Rational;
pub use semantics::{denote, to_set_normal_form, Denotation, EventSpace, Point};
pub use syntax::{format_formula, parse_formula, parse_model, Formula};
