mod heterotic_check {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/heterotic_check.rs"));
}
mod iwasawa_moduli {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/iwasawa_moduli.rs"));
}
mod symbol_scan {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/symbol_scan.rs"));
}
mod local_trivialization {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/local_trivialization.rs"));
}
mod custom_model {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/custom_model.rs"));
}
mod adjoint_duality {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/adjoint_duality.rs"));
}

#[test]
fn heterotic_check_runs() {
    heterotic_check::run_example().expect("check example should run");
}

#[test]
fn iwasawa_moduli_runs() {
    assert_eq!(iwasawa_moduli::run_example().unwrap(), vec![6, 11, 11, 6]);
}

#[test]
fn symbol_scan_runs() {
    assert!(symbol_scan::run_example().unwrap());
}

#[test]
fn local_trivialization_runs() {
    assert!(local_trivialization::run_example().unwrap());
}

#[test]
fn custom_model_runs() {
    let h = custom_model::run_example().unwrap();
    assert_eq!(h.len(), 4);
    assert_eq!(h[0], h[3]);
}

#[test]
fn adjoint_duality_runs() {
    assert!(adjoint_duality::run_example().unwrap());
}
