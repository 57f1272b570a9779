// Runs the heterotic system check on every built-in model.

use hetmod::models::builtins;

pub fn run_example() -> hetmod::Result<()> {
    for m in builtins() {
        let r = m.check_heterotic_system()?;
        println!(
            "{:<15} F1 {} F2 {} D1 {} D2 {}  anomaly residual: {}",
            m.name,
            r.f1_pass(),
            r.f2_pass(),
            r.d1_pass(),
            r.d2_pass(),
            r.f2_symbolic
        );
        if !r.f1_pass() {
            println!("  dΩ = {}", r.f1);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
