// Invariant D̄-cohomology of the Iwasawa solution, with and without the
// off-diagonal blocks.

use hetmod::cohomology::cohomology;
use hetmod::models::build_iwasawa;
use hetmod::qcomplex::{QComplex, QOptions};

pub fn run_example() -> hetmod::Result<Vec<usize>> {
    let m = build_iwasawa();
    let full = cohomology(&QComplex::new(&m, QOptions::default())?, &m.alpha_prime)?;
    let diag = cohomology(&QComplex::new(&m, QOptions { diagonal: true })?, &m.alpha_prime)?;
    for d in &full.degrees {
        println!("p = {}: dim {:>2} ker {:>2} rank {:>2} h {:>2} harmonic {:>2}", d.p, d.dim, d.ker, d.rank, d.h, d.harmonic);
    }
    println!("serre {} euler {}", full.serre(), full.euler);
    println!("diagonal ∂̄ only: h = {:?}", diag.h());
    Ok(full.h())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
