//! Derivation trees: every step names the identity it used.
//!
//! Run with `cargo run --example explain`.

use colprob::{parse_formula, parse_model, prob_explain};

fn main() {
    let model = parse_model(include_str!("../models/coin_dice.mdl")).expect("bundled model is valid");
    for text in [
        "~(4@d | 5@d)",
        "6@d1 || 6@d2",
        "H@c && 6@d",
        "(6@d1 && 5@d2 | 6@d2 && 5@d1) given (6@d1 || 6@d2)",
    ] {
        let f = parse_formula(text).expect("parses");
        let (result, derivation) = prob_explain(&f, &model).expect("evaluates");
        println!("p({f}) = {result}  ({} steps)", derivation.size());
        print!("{}", derivation.render());
        println!();
    }
}
