//! The textbook dice and coin questions, each answered exactly by the
//! evaluator and checked against brute-force enumeration.
//!
//! Run with `cargo run --example worked_examples`.

use colprob::{enumerate_prob, parse_formula, parse_model, prob};

const MODEL: &str = include_str!("../models/coin_dice.mdl");

const QUERIES: &[(&str, &str)] = &[
    ("a four or a five", "4@d | 5@d"),
    (
        "at least one head, spelled out",
        "(H@c1 && H@c2) | (H@c1 && T@c2) | (T@c1 && H@c2)",
    ),
    ("a four or a five on either die", "(4@d1|5@d1) || (4@d2|5@d2)"),
    ("a head or a six", "H@c || 6@d"),
    ("at least one six", "6@d1 || 6@d2"),
    (
        "a six and a five, with some six",
        "(6@d1 && 5@d2 | 6@d2 && 5@d1) & (6@d1 || 6@d2)",
    ),
    (
        "a six and a five, given some six",
        "(6@d1 && 5@d2 | 6@d2 && 5@d1) given (6@d1 || 6@d2)",
    ),
    ("two heads", "H@c1 && H@c2"),
    ("a head and a six", "H@c && 6@d"),
    ("head and tail on one toss", "H@c & T@c"),
    ("head given tail", "H@c given T@c"),
    ("coin or die, one experiment at a time", "H@c | 4@d"),
];

fn main() {
    let model = parse_model(MODEL).expect("bundled model is valid");
    for (label, text) in QUERIES {
        let f = parse_formula(text).expect("bundled query parses");
        let exact = prob(&f, &model).expect("query evaluates");
        let oracle = enumerate_prob(&f, &model).expect("oracle evaluates");
        let check = if exact.same_verdict(&oracle) { "ok" } else { "MISMATCH" };
        println!("{label:40} p({f}) = {exact}  [enumeration {check}]");
    }
}
