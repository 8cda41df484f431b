//! TOML run configuration and sequence manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constants::BoundParams;
use crate::error::{Error, Result};
use crate::grid::{DomainSpec, ScalarField};
use crate::io::load_field;
use crate::quantization::{DensitySequence, DetectorOptions};
use crate::synth::GeneratorSpec;

/// Everything a subcommand may read. Relative paths resolve against the
/// directory of the config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub input: InputSpec,
    #[serde(default)]
    pub params: ParamsSpec,
    #[serde(default)]
    pub ledger: LedgerSpec,
    pub tolerance_k: Option<f64>,
    #[serde(default)]
    pub monotonicity: MonotonicitySpec,
    #[serde(default)]
    pub heinz: HeinzSpec,
    #[serde(default)]
    pub detect: DetectSpec,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// At most one of the three sources.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub generator: Option<GeneratorSpec>,
    pub field: Option<PathBuf>,
    /// `"standard"`: the built-in subharmonic family for the domain kind.
    pub family: Option<FamilyChoice>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyChoice {
    Standard,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(default)]
    pub a0: f64,
    #[serde(default)]
    pub a1: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b0: f64,
    #[serde(default)]
    pub b1: f64,
    #[serde(default)]
    pub b: f64,
    /// Replace `a` (and `b`) by the values each field requires.
    #[serde(default)]
    pub fit: bool,
}

impl ParamsSpec {
    pub fn to_params(&self, n: usize) -> BoundParams {
        BoundParams {
            n,
            a0: self.a0,
            a1: self.a1,
            a: self.a,
            b0: self.b0,
            b1: self.b1,
            b: self.b,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerSpec {
    pub c: Option<f64>,
    #[serde(default)]
    pub measure: bool,
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotonicitySpec {
    pub center: Option<Vec<f64>>,
    pub radii: Option<Vec<f64>>,
    /// Default radii: `r_min_h·h, (r_min_h + step_h)·h, …` up to `0.9 R`.
    #[serde(default = "sixteen")]
    pub r_min_h: f64,
    #[serde(default = "four")]
    pub step_h: f64,
}

fn sixteen() -> f64 {
    16.0
}

fn four() -> f64 {
    4.0
}

impl Default for MonotonicitySpec {
    fn default() -> Self {
        Self {
            center: None,
            radii: None,
            r_min_h: 16.0,
            step_h: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeinzSpec {
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    #[serde(default = "resolution")]
    pub rho_resolution: usize,
}

fn resolution() -> usize {
    crate::heinz::DEFAULT_RHO_RESOLUTION
}

impl Default for HeinzSpec {
    fn default() -> Self {
        Self {
            center: None,
            radius: None,
            rho_resolution: resolution(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectSpec {
    pub manifest: Option<PathBuf>,
    pub planted: Option<PlantedSpec>,
    #[serde(default = "threshold")]
    pub divergence_threshold: f64,
    #[serde(default)]
    pub options: DetectorOptions,
    /// `(a, b)` for `ħ = μ(a, b)`; the sequence's fitted values when unset.
    pub ledger_a: Option<f64>,
    pub ledger_b: Option<f64>,
}

fn threshold() -> f64 {
    100.0
}

impl Default for DetectSpec {
    fn default() -> Self {
        Self {
            manifest: None,
            planted: None,
            divergence_threshold: threshold(),
            options: DetectorOptions::default(),
            ledger_a: None,
            ledger_b: None,
        }
    }
}

/// Bubbles shrinking along `schedule` on top of `background`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedSpec {
    #[serde(default)]
    pub templates: Vec<GeneratorSpec>,
    /// Adds seeded bubble centers on a ring.
    pub seeded: Option<SeededSpec>,
    pub schedule: Vec<f64>,
    #[serde(default = "zero_background")]
    pub background: GeneratorSpec,
}

fn zero_background() -> GeneratorSpec {
    GeneratorSpec::Constant { value: 0.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeededSpec {
    pub count: usize,
    pub ring: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

/// Ordered field files plus the energy bound and constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceManifest {
    pub energy_bound: f64,
    pub fields: Vec<PathBuf>,
    #[serde(default)]
    pub params: ParamsSpec,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn check_exists(p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("input file `{}` does not exist", p.display())))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses, resolves relative paths, and validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(f) = &mut cfg.input.field {
            resolve(base, f);
        }
        if let Some(m) = &mut cfg.detect.manifest {
            resolve(base, m);
        }
        if let Some(o) = &mut cfg.out {
            resolve(base, o);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// One input source at most, and every named file present.
    pub fn validate(&self) -> Result<()> {
        let i = &self.input;
        let sources = usize::from(i.generator.is_some()) + usize::from(i.field.is_some()) + usize::from(i.family.is_some());
        if sources > 1 {
            return Err(Error::Config("[input] takes exactly one of generator, field, family".into()));
        }
        if self.detect.manifest.is_some() && self.detect.planted.is_some() {
            return Err(Error::Config("[detect] takes one of manifest, planted".into()));
        }
        if let Some(f) = &i.field {
            check_exists(f)?;
        }
        if let Some(m) = &self.detect.manifest {
            check_exists(m)?;
        }
        if let Some(k) = self.tolerance_k {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::Config(format!("tolerance_k = {k} must be positive")));
            }
        }
        if let (Some(_), true) = (self.ledger.c, self.ledger.measure) {
            return Err(Error::Config("[ledger] takes either c or measure = true".into()));
        }
        Ok(())
    }
}

impl SequenceManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut m: Self = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for f in &mut m.fields {
            resolve(base, f);
            check_exists(f)?;
        }
        Ok(m)
    }

    /// Loads every field; they must share one domain description.
    pub fn into_sequence(self) -> Result<DensitySequence> {
        let mut fields: Vec<ScalarField> = Vec::with_capacity(self.fields.len());
        for p in &self.fields {
            let f = load_field(p)?;
            let f = match fields.first() {
                None => f,
                // share one domain so the sequence sees a common grid
                Some(first) if f.domain().spec() == first.domain().spec() => {
                    ScalarField::from_box_values(first.domain(), f.values().to_vec(), f.is_density())?
                }
                Some(_) => return Err(Error::DomainMismatch),
            };
            fields.push(f);
        }
        let n = fields
            .first()
            .map(|f| f.domain().dim())
            .ok_or_else(|| Error::Config("manifest lists no fields".into()))?;
        DensitySequence::new(fields, self.energy_bound, self.params.to_params(n))
    }
}
