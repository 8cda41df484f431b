//! Plant three shrinking bubbles, write the sequence to disk as field files
//! plus a manifest, read it back, and extract the concentration points.
//!
//! cargo run --example detect_bubbles [-- <output dir>]

use meanvalue::config::SequenceManifest;
use meanvalue::constants::ConstantLedger;
use meanvalue::grid::{make_ball_domain, MetricSpec};
use meanvalue::io::{save_field, write_bubbles_csv};
use meanvalue::quantization::{detect_concentration, DetectorOptions};
use meanvalue::synth::{bubble_unit_mass, gen_sequence, GeneratorSpec};
use std::path::PathBuf;
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("meanvalue-bubbles"));
    std::fs::create_dir_all(&out)?;

    let h = 1.0 / 256.0;
    let d = Arc::new(make_ball_domain(&[0.0, 0.0], 1.0, h, 2, MetricSpec::identity())?);
    let centers = [[0.5, 0.0], [-0.25, 0.4375], [-0.25, -0.4375]];
    let templates: Vec<_> = centers
        .iter()
        .map(|c| GeneratorSpec::Bubble { center: c.to_vec(), lambda: 1.0, amplitude: 1.0 })
        .collect();
    let seq = gen_sequence(&templates, &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0], &GeneratorSpec::Constant { value: 0.0 }, &d)?;

    let mut names = Vec::new();
    for (i, f) in seq.fields.iter().enumerate() {
        let name = format!("e{i}.field");
        save_field(f, &out.join(&name))?;
        names.push(name);
    }
    let manifest = SequenceManifest { energy_bound: seq.energy_bound, fields: names.into_iter().map(PathBuf::from).collect(), params: Default::default() };
    let path = out.join("sequence.toml");
    std::fs::write(&path, toml::to_string(&manifest)?)?;
    println!("wrote {} fields and {}", seq.len(), path.display());

    let seq = SequenceManifest::load(&path)?.into_sequence()?;
    // ħ = m/2 with m the bubble mass: each bubble carries enough energy
    let ledger = ConstantLedger::configured(2, 1.0 / (2.0 * bubble_unit_mass(2)), 0.0, 1.0)?;
    let rep = detect_concentration(&seq, &ledger, 100.0, &DetectorOptions::default())?;
    println!("ħ = {:.4}, E = {:.4}, at most {} points", rep.hbar, rep.energy_bound, rep.max_points);
    for p in &rep.points {
        println!("  point {:?}: certified energy {:.4}, onset at index {}", p.point, p.certified_energy, p.onset);
    }
    write_bubbles_csv(&rep, std::fs::File::create(out.join("bubbles.csv"))?)?;
    println!("uniformly bounded after removal: {}", rep.uniformly_bounded());
    Ok(())
}
