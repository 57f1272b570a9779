// Compares the formula adjoint D̄* with the Gram adjoint and evaluates the
// duality pairing on random closed sections.

use hetmod::cohomology::duality_samples;
use hetmod::models::builtins;
use hetmod::qcomplex::{QComplex, QOptions};
use hetmod::scalar::GaussRat;

pub fn run_example() -> hetmod::Result<bool> {
    let mut ok = true;
    for m in builtins() {
        let q = QComplex::new(&m, QOptions::default())?;
        let alpha = GaussRat::frac(1, 7);
        let adj = (1..=q.n).map(|p| q.adjointness_residual(p, &alpha).map(|r| r.is_zero())).collect::<hetmod::Result<Vec<_>>>()?;
        let pairs = duality_samples(&q, &m.alpha_prime, 10, 1)?;
        let equal = pairs.iter().filter(|(l, r)| l == r).count();
        println!("{:<15} adjoint residual zero per degree {:?}, duality {equal}/10", m.name, adj);
        ok &= adj.iter().all(|x| *x) && equal == pairs.len();
    }
    Ok(ok)
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
