//! The constant ledger and the quantization dichotomy.
//!
//! cargo run --example constants_ledger

use meanvalue::constants::{epsilon_ab, epsilon_prime, mu_ab, quantization_dichotomy, BoundParams, ConstantLedger};

fn main() -> meanvalue::Result<()> {
    let (a, b, c) = (2.0, 0.5, 1.0);
    let eps = epsilon_ab(a, b, c)?;
    println!("ε(a,b) = {eps:.12}, residual a ε² + b ε − 1/(2C) = {:.2e}", a * eps * eps + b * eps - 0.5 / c);
    println!("μ(a,b) at n = 2: {:.12}", mu_ab(a, b, c, 2)?);

    let ledger = ConstantLedger::configured(2, a, b, c)?;
    print!("{}", ledger.to_key_value());

    // ε′ for a radius-1 ball with A₁ = 1
    let p = BoundParams { a1: 1.0, a, b, ..BoundParams::zero(2) };
    let ep = epsilon_prime(&p, 1.0, c, eps)?;
    println!("ε′ = {:.6} (capped at ε: {})", ep.value, ep.capped);
    for c in &ep.certificates {
        println!("  {}: applies {} bound {:.4} holds {}", c.condition, c.applies, c.bound, c.holds);
    }

    // the branch flips once R^{n/2} outgrows C ħ
    let hbar = ledger.hbar().expect("a + b > 0");
    for r in [0.02, 0.05, 0.1, 0.2, 0.5] {
        let d = quantization_dichotomy(r, &BoundParams { a, b, ..BoundParams::zero(2) }, hbar, c)?;
        println!("R = {r:>5}: lhs {:.4} rhs {:.4} {:?}", d.lhs, d.rhs, d.branch);
    }
    Ok(())
}
