// Principal-symbol injectivity scan at a few values of α′.

use hetmod::cohomology::{injectivity_scan, symbol_samples};
use hetmod::models::builtins;
use hetmod::qcomplex::{QComplex, QOptions};
use hetmod::scalar::GaussRat;

pub fn run_example() -> hetmod::Result<bool> {
    let mut all = true;
    let samples = symbol_samples(3).len();
    for m in builtins() {
        let q = QComplex::new(&m, QOptions::default())?;
        for a in ["0", "-4", "1/7"] {
            let alpha: GaussRat = a.parse()?;
            let r = injectivity_scan(&q, &alpha, samples, &[])?;
            println!("{:<15} α′ = {:<4} {} covectors, injective {}", m.name, a, r.samples, r.injective);
            all &= r.injective;
        }
    }
    Ok(all)
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
