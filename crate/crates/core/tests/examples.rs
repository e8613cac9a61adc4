#[allow(dead_code)]
mod boundary_matrix {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/boundary_matrix.rs"));
}

#[test]
fn boundary_matrix_example_runs() {
    boundary_matrix::run_example().expect("boundary_matrix example should run");
}

#[allow(dead_code)]
mod persistence_diagram {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/persistence_diagram.rs"));
}

#[test]
fn persistence_diagram_example_runs() {
    persistence_diagram::run_example().expect("persistence_diagram example should run");
}

#[allow(dead_code)]
mod sample_models {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sample_models.rs"));
}

#[test]
fn sample_models_example_runs() {
    sample_models::run_example().expect("sample_models example should run");
}

#[allow(dead_code)]
mod pb_density {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/pb_density.rs"));
}

#[test]
fn pb_density_example_runs() {
    pb_density::run_example().expect("pb_density example should run");
}

#[allow(dead_code)]
mod mean_diagram {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/mean_diagram.rs"));
}

#[test]
fn mean_diagram_example_runs() {
    mean_diagram::run_example().expect("mean_diagram example should run");
}

#[allow(dead_code)]
mod rate_function {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/rate_function.rs"));
}

#[test]
fn rate_function_example_runs() {
    rate_function::run_example().expect("rate_function example should run");
}

#[allow(dead_code)]
mod block_gaps {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/block_gaps.rs"));
}

#[test]
fn block_gaps_example_runs() {
    block_gaps::run_example().expect("block_gaps example should run");
}

#[allow(dead_code)]
mod property_suite {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/property_suite.rs"));
}

#[test]
fn property_suite_example_runs() {
    property_suite::run_example().expect("property_suite example should run");
}
