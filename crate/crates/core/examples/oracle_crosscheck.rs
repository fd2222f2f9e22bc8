//! Exact answers against the two independent oracles: enumeration over
//! every full assignment, and a seeded Monte Carlo estimate.
//!
//! Run with `cargo run --example oracle_crosscheck`.

use colprob::{enumerate_prob, mc_estimate, parse_formula, parse_model, prob, SampleConfig};

fn main() {
    let model = parse_model(include_str!("../models/channel.mdl")).expect("bundled model is valid");
    let cfg = SampleConfig {
        sample_count: 20_000,
        seed: 42,
    };
    for text in ["0@R", "0@T && 0@R", "0@T pgiven 0@R", "~(1@T && 1@R)", "0@R || 1@T"] {
        let f = parse_formula(text).expect("parses");
        let exact = prob(&f, &model).expect("evaluates");
        let enumerated = enumerate_prob(&f, &model).expect("enumerates");
        let mc = mc_estimate(&f, &model, cfg).expect("samples");
        let z = match exact.value() {
            Some(v) if mc.stderr > 0.0 => format!("{:+.2} se", (mc.estimate - v.to_f64()) / mc.stderr),
            _ => "-".to_string(),
        };
        println!(
            "{text:18} exact {exact:6} enumeration {enumerated:6} monte carlo {:.4} ± {:.4} ({z})",
            mc.estimate, mc.stderr
        );
    }
}
