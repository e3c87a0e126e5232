#![allow(dead_code)]

mod divided_differences {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/divided_differences.rs"));
}
mod majorization {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/majorization.rs"));
}
mod bound_chain {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/bound_chain.rs"));
}
mod fink_identity {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fink_identity.rs"));
}
mod divergence_sandwich {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/divergence_sandwich.rs"));
}
mod cli_report {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/cli_report.rs"));
}

#[test]
fn divided_differences_example_runs() {
    divided_differences::run_example().expect("divided differences example should run");
}

#[test]
fn majorization_example_runs() {
    majorization::run_example().expect("majorization example should run");
}

#[test]
fn bound_chain_example_runs() {
    bound_chain::run_example().expect("bound chain example should run");
}

#[test]
fn fink_identity_example_runs() {
    fink_identity::run_example().expect("fink identity example should run");
}

#[test]
fn divergence_sandwich_example_runs() {
    divergence_sandwich::run_example().expect("divergence sandwich example should run");
}

#[test]
fn cli_report_example_runs() {
    cli_report::run_example().expect("cli report example should run");
}
