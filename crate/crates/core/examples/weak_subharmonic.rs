//! The distributional test ∫ e Δψ ≤ 0 against Neumann test functions.
//!
//! cargo run --example weak_subharmonic

use meanvalue::calculus::{weak_subharmonic_test, Tolerance, WeakTestSet};
use meanvalue::grid::make_half_ball_domain;
use meanvalue::synth::{gen, GeneratorSpec};
use std::sync::Arc;

fn main() -> meanvalue::Result<()> {
    let d = Arc::new(make_half_ball_domain(&[0.0, 0.0], 1.0, 1.0 / 64.0, 2)?);
    let tests = WeakTestSet::standard(&d);
    let cases = [
        ("|x|² + 1", GeneratorSpec::Quadratic { center: vec![0.0, 0.0], amplitude: 1.0, offset: 1.0 }),
        ("2 − |x|²", GeneratorSpec::Quadratic { center: vec![0.0, 0.0], amplitude: -1.0, offset: 2.0 }),
        ("1 + x₀", GeneratorSpec::LinearX0 { slope: 1.0, offset: 1.0 }),
        ("1 − x₀/2", GeneratorSpec::LinearX0 { slope: -0.5, offset: 1.0 }),
    ];
    println!("{} test functions", tests.len());
    for (name, g) in cases {
        let e = gen(&g, &d)?.field;
        let rep = weak_subharmonic_test(&e, &tests, Tolerance::new(10.0))?;
        let worst = rep.worst.map(|i| rep.values[i]).unwrap_or(0.0);
        println!("{name:>10}: worst ∫eΔψ = {worst:+.4e} → {:?}", rep.verdict);
    }
    Ok(())
}
