//! Drives the interactive loop from a script, as `colprob repl` would.
//!
//! Run with `cargo run --example repl_session`.

use std::io::{self, Cursor};

use colprob::cli::repl;
use colprob::parse_model;

const SCRIPT: &str = "\
4@d | 5@d
:space (3@d | 4@d) & 4@d
:explain 6@d1 || 6@d2
:bayes additive [1@d | 2@d, 3@d | 4@d, 5@d | 6@d] ~6@d
4@d |
:quit
";

fn main() -> io::Result<()> {
    let model = parse_model(include_str!("../models/coin_dice.mdl")).expect("bundled model is valid");
    let mut input = Cursor::new(SCRIPT);
    repl(&model, &mut input, &mut io::stdout())
}
