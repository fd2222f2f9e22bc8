//! Decoding a noisy bit: which input was sent, given the received bit.
//! Only the parallel rule applies across the input and output experiments.
//!
//! Run with `cargo run --example bayes_channel`.

use colprob::bayes::bayes_parallel_by_likelihood;
use colprob::{bayes_additive, bayes_parallel, check_partition, parse_formula, parse_model, Partition, Variant};

fn main() {
    let model = parse_model(include_str!("../models/channel.mdl")).expect("bundled model is valid");
    let cells = Partition::new(vec![parse_formula("0@T").unwrap(), parse_formula("1@T").unwrap()]).expect("two cells");
    let evidence = parse_formula("0@R").unwrap();

    let report = check_partition(&cells, &model, Variant::Parallel).expect("cells evaluate");
    println!("partition: {report}");

    let joint = bayes_parallel(&cells, &evidence, &model).expect("parallel rule applies");
    let likelihood = bayes_parallel_by_likelihood(&cells, &evidence, &model).expect("parallel rule applies");
    for (cell, (a, b)) in cells.cells().iter().zip(joint.iter().zip(&likelihood)) {
        println!("p({cell} pgiven {evidence}) = {a}  (prior x likelihood: {b})");
    }

    match bayes_additive(&cells, &evidence, &model) {
        Ok(v) => println!("additive rule unexpectedly gave {v:?}"),
        Err(e) => println!("additive rule rejected: {e}"),
    }
}
