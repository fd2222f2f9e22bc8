//! Formulas denote sets of points over the experiments they mention.
//! Shows the denotation, its set normal form, and the cases where the
//! choice connectives refuse to mix experiments.
//!
//! Run with `cargo run --example event_spaces`.

use colprob::{denote, parse_formula, parse_model, to_set_normal_form, Denotation};

fn main() {
    let model = parse_model(include_str!("../models/coin_dice.mdl")).expect("bundled model is valid");
    for text in [
        "(3@d | 4@d) & 4@d",
        "~(4@d | 5@d)",
        "H@c1 || H@c2",
        "6@d1 && 6@d1",
        "H@c & T@c",
        "H@c | 4@d",
    ] {
        let f = parse_formula(text).expect("parses");
        match denote(&f, &model).expect("denotes") {
            Denotation::Space(space) => {
                let snf = to_set_normal_form(&space)
                    .map(|n| n.to_string())
                    .unwrap_or_else(|e| format!("({e})"));
                println!("{text:22} => {space}");
                println!("{:22}    normal form: {snf}", "");
            }
            Denotation::Undetermined(reason) => println!("{text:22} => undetermined: {reason}"),
        }
    }
}
