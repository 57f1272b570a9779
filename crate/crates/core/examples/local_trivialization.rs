// Builds the chart potentials A and τ̃ on the Iwasawa chart and checks that
// φ conjugates D̄ to ∂̄ on low-degree polynomial sections.

use hetmod::chartlocal::{trivialize, TrivializationData};
use hetmod::models::build_iwasawa;

pub fn run_example() -> hetmod::Result<bool> {
    let m = build_iwasawa();
    let t = TrivializationData::build(&m)?;
    for (k, a) in t.a_form.iter().enumerate() {
        println!("A[{}][{}] = {}", k / 2 + 1, k % 2 + 1, a);
    }
    for j in 0..3 {
        for l in 0..3 {
            if !t.tau[j][l].is_zero() {
                println!("τ̃[{}][{}] = {}", j + 1, l + 1, t.tau[j][l]);
            }
        }
    }
    let r = trivialize(&m, 2)?;
    println!("{} sections through degree 2, residual zero {}", r.sections, r.residual_zero);
    for tr in &r.transitions {
        println!("ψ for {}: holomorphic {} cocycle {}", tr.name, tr.holomorphic, tr.cocycle);
    }
    Ok(r.all_pass())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
