//! Model files: declarations, conditional tables, predicates, and the
//! validation errors a malformed file produces.
//!
//! Run with `cargo run --example model_files`.

use colprob::{parse_formula, parse_model, prob};

const MIXED: &str = "\
# weights given for some outcomes only
experiment weather : sun, rain=1/4, sun=3/4
";

const FIXED: &str = "\
experiment weather : rain=1/4, sun=3/4
experiment report : dry, wet depends weather
cpt wet | weather=rain = 4/5
cpt dry | weather=rain = 1/5
cpt wet | weather=sun = 1/10
cpt dry | weather=sun = 9/10
predicate umbrella = 1/3
";

const CYCLIC: &str = "\
experiment a : x, y depends b
cpt x | b=x = 1/2
cpt y | b=x = 1/2
cpt x | b=y = 1/2
cpt y | b=y = 1/2
experiment b : x, y depends a
cpt x | a=x = 1/2
cpt y | a=x = 1/2
cpt x | a=y = 1/2
";

fn main() {
    for (name, text) in [("mixed weights", MIXED), ("cyclic", CYCLIC)] {
        match parse_model(text) {
            Ok(_) => println!("{name}: accepted"),
            Err(e) => println!("{name}: rejected\n  {}", e.to_string().replace('\n', "\n  ")),
        }
    }

    let model = parse_model(FIXED).expect("valid model");
    for text in [
        "wet@report",
        "rain@weather pgiven wet@report",
        "umbrella || wet@report",
        "umbrella && umbrella",
    ] {
        let f = parse_formula(text).expect("parses");
        println!("p({f}) = {}", prob(&f, &model).expect("evaluates"));
    }
}
