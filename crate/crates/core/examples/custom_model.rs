// Loads a model from JSON: the Iwasawa nilmanifold with the gauge field
// doubled, which moves the anomaly to α′ = −1.

use hetmod::cohomology::cohomology;
use hetmod::models::parse_model_file;
use hetmod::qcomplex::{QComplex, QOptions};

const MODEL: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/iwasawa_doubled_f.json"));

pub fn run_example() -> hetmod::Result<Vec<usize>> {
    let m = parse_model_file(MODEL)?;
    let r = m.check_heterotic_system()?;
    println!("{}: anomaly residual {}, system holds at α′ = {}: {}", m.name, r.f2_symbolic, m.alpha_prime, r.all_pass());
    let c = cohomology(&QComplex::new(&m, QOptions::default())?, &m.alpha_prime)?;
    println!("h = {:?}, harmonic = {:?}", c.h(), c.harmonic());
    Ok(c.h())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
