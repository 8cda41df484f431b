//! Bubble extraction on finite sequences of densities.

use serde::{Deserialize, Serialize};

use crate::calculus::{integrate, Region};
use crate::constants::{quantization_dichotomy, BoundParams, Branch, ConstantLedger};
use crate::error::{Error, Result};
use crate::grid::{DomainKind, ScalarField};

/// Densities on one domain with a uniform energy bound.
#[derive(Clone, Debug)]
pub struct DensitySequence {
    pub fields: Vec<ScalarField>,
    pub energy_bound: f64,
    pub energies: Vec<f64>,
    pub params: BoundParams,
    /// Fitted `(a, b)` per index, when known.
    pub fitted: Vec<(f64, f64)>,
}

impl DensitySequence {
    /// Validates a common domain and `∫e_i ≤ E` up to a relative `10⁻⁹`.
    pub fn new(fields: Vec<ScalarField>, energy_bound: f64, params: BoundParams) -> Result<Self> {
        params.validate()?;
        if let Some(first) = fields.first() {
            for f in &fields[1..] {
                if !std::sync::Arc::ptr_eq(f.domain(), first.domain()) {
                    return Err(Error::DomainMismatch);
                }
            }
            if first.domain().dim() != params.n {
                return Err(Error::DimensionMismatch {
                    expected: first.domain().dim(),
                    got: params.n,
                });
            }
        }
        let energies = fields.iter().map(|f| integrate(f, None)).collect::<Result<Vec<_>>>()?;
        for &e in &energies {
            if e > energy_bound * (1.0 + 1e-9) {
                return Err(Error::EnergyBoundExceeded { energy: e, bound: energy_bound });
            }
        }
        Ok(Self {
            fields,
            energy_bound,
            energies,
            params,
            fitted: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

/// `∫_{B_δ(x)} e`, clipped to the domain (so `D_δ(x)` on a half-ball).
pub fn concentration_energy(e: &ScalarField, x: &[f64], delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidLength { name: "delta", value: delta });
    }
    let region = match e.domain().kind() {
        DomainKind::Ball => Region::ball(x, delta),
        DomainKind::HalfBall => Region::half_ball(x, delta),
    };
    integrate(e, Some(&region))
}

/// Finite surrogates for the asymptotic parts of the extraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorOptions {
    /// Argmaxes within this many `h` of a point count toward its cluster.
    pub cluster_radius_h: f64,
    /// Smallest exclusion radius, in units of `h`.
    pub exclusion_floor_h: f64,
    /// Witnesses a blow-up point needs; `⌈√L⌉` when unset.
    pub min_cluster: Option<usize>,
}

impl Default for DetectorOptions {
    fn default() -> Self {
        Self {
            cluster_radius_h: 4.0,
            exclusion_floor_h: 8.0,
            min_cluster: None,
        }
    }
}

/// One witness index of a candidate point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessStep {
    pub index: usize,
    pub z: Vec<f64>,
    pub node: usize,
    /// `R_i = e_i(z_i)^{1/n}`.
    pub r: f64,
    /// `δ_i = R_i^{−1/2}`.
    pub delta: f64,
    /// `∫_{B_{δ_i}(z_i)} e_i`.
    pub energy: f64,
    pub branch: Branch,
    pub dichotomy_lhs: f64,
    pub dichotomy_rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationPoint {
    /// The last witness `z_i`.
    pub point: Vec<f64>,
    pub witnesses: Vec<WitnessStep>,
    /// First witness index at which concentration is forced.
    pub onset: usize,
    pub delta_exclusion: f64,
    /// Energy at the last forced witness.
    pub certified_energy: f64,
}

/// A blow-up candidate whose dichotomy never forced concentration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedCandidate {
    pub point: Vec<f64>,
    pub witnesses: Vec<WitnessStep>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub hbar: f64,
    pub c: f64,
    pub energy_bound: f64,
    pub divergence_threshold: f64,
    pub cluster_radius: f64,
    pub min_cluster: usize,
    /// `⌊E/ħ⌋`.
    pub max_points: usize,
    pub points: Vec<ConcentrationPoint>,
    pub bounded_candidates: Vec<BoundedCandidate>,
    /// `sup e_i` off the exclusion balls of the points, per index.
    pub residual_bound: Vec<f64>,
    pub residual_max: f64,
    /// Extraction stopped because another point would exceed `⌊E/ħ⌋`.
    pub truncated: bool,
}

impl ConcentrationReport {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Off the extracted points, every blow-up candidate was certified
    /// bounded by the dichotomy, and extraction was not cut off at `⌊E/ħ⌋`.
    pub fn uniformly_bounded(&self) -> bool {
        !self.truncated
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// Extracts concentration points from a finite sequence.
///
/// A point blows up when at least `min_cluster` indices have a sup above
/// `divergence_threshold` within `cluster_radius` of it. Witnesses are
/// checked against the dichotomy at `R_i`; a forced step whose measured
/// energy does not exceed `ħ` is an error.
pub fn detect_concentration(
    seq: &DensitySequence,
    ledger: &ConstantLedger,
    divergence_threshold: f64,
    options: &DetectorOptions,
) -> Result<ConcentrationReport> {
    let hbar = ledger.hbar().ok_or(Error::BothNonlinearitiesZero)?;
    if !(divergence_threshold > 0.0) {
        return Err(Error::InvalidConstant {
            name: "divergence_threshold",
            value: divergence_threshold,
        });
    }
    let c = ledger.c.value;
    let len = seq.len();
    let max_points = (seq.energy_bound / hbar).floor() as usize;
    let min_cluster = options.min_cluster.unwrap_or((len as f64).sqrt().ceil() as usize).max(1);
    let Some(first) = seq.fields.first() else {
        return Ok(ConcentrationReport {
            hbar,
            c,
            energy_bound: seq.energy_bound,
            divergence_threshold,
            cluster_radius: 0.0,
            min_cluster,
            max_points,
            points: Vec::new(),
            bounded_candidates: Vec::new(),
            residual_bound: Vec::new(),
            residual_max: 0.0,
            truncated: false,
        });
    };
    let domain = first.domain().clone();
    let n = domain.dim();
    let h = domain.spacing();
    let cluster_radius = options.cluster_radius_h * h;
    let floor = options.exclusion_floor_h * h;

    let mut points: Vec<ConcentrationPoint> = Vec::new();
    let mut bounded: Vec<BoundedCandidate> = Vec::new();
    // (center, radius) removed from the candidate search
    let mut excluded: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut truncated = false;

    loop {
        let free = |node: usize| {
            let x = domain.point(node);
            excluded.iter().all(|(p, r)| dist(&x, p) > *r)
        };
        let anchors: Vec<usize> = seq
            .fields
            .iter()
            .filter_map(|e| e.argmax_where(free))
            .filter(|&(_, v)| v > divergence_threshold)
            .map(|(node, _)| node)
            .collect();
        // the anchor with the most witnesses, earliest on ties
        let mut best: Option<(Vec<f64>, Vec<usize>)> = None;
        for &a in &anchors {
            let x = domain.point(a);
            let near = |node: usize| free(node) && dist(&domain.point(node), &x) <= cluster_radius;
            let witnesses: Vec<usize> = (0..len)
                .filter(|&i| seq.fields[i].argmax_where(near).is_some_and(|(_, v)| v > divergence_threshold))
                .collect();
            if best.as_ref().is_none_or(|b| witnesses.len() > b.1.len()) {
                best = Some((x, witnesses));
            }
        }
        let Some((anchor, witness_idx)) = best.filter(|b| b.1.len() >= min_cluster) else {
            break;
        };

        let mut steps = Vec::with_capacity(witness_idx.len());
        for &i in &witness_idx {
            let e = &seq.fields[i];
            let near = |node: usize| free(node) && dist(&domain.point(node), &anchor) <= cluster_radius;
            let (node, peak) = e.argmax_where(near).expect("witness has a local max");
            let z = domain.point(node);
            let r = peak.powf(1.0 / n as f64);
            let delta = r.powf(-0.5);
            let energy = concentration_energy(e, &z, delta)?;
            let d = quantization_dichotomy(r, &seq.params, hbar, c)?;
            if d.branch == Branch::ConcentrationForced && energy <= hbar {
                return Err(Error::QuantizationViolated {
                    index: i,
                    measured: energy,
                    hbar,
                });
            }
            steps.push(WitnessStep {
                index: i,
                z,
                node,
                r,
                delta,
                energy,
                branch: d.branch,
                dichotomy_lhs: d.lhs,
                dichotomy_rhs: d.rhs,
            });
        }
        let point = steps.last().expect("nonempty witnesses").z.clone();
        let delta_exclusion = steps.iter().map(|s| s.delta).fold(floor, f64::max);
        let forced: Vec<&WitnessStep> = steps.iter().filter(|s| s.branch == Branch::ConcentrationForced).collect();
        if forced.is_empty() {
            excluded.push((point.clone(), delta_exclusion.max(cluster_radius)));
            bounded.push(BoundedCandidate { point, witnesses: steps });
            continue;
        }
        if points.len() + 1 > max_points {
            truncated = true;
            break;
        }
        for p in &points {
            let separation = 2.0 * p.delta_exclusion.max(delta_exclusion);
            if dist(&p.point, &point) <= separation {
                return Err(Error::ExclusionOverlap {
                    first: p.point.clone(),
                    second: point,
                    separation,
                });
            }
        }
        excluded.push((point.clone(), delta_exclusion));
        points.push(ConcentrationPoint {
            onset: forced[0].index,
            certified_energy: forced.last().unwrap().energy,
            point,
            witnesses: steps,
            delta_exclusion,
        });
    }

    let residual_bound: Vec<f64> = seq
        .fields
        .iter()
        .map(|e| {
            e.argmax_where(|node| {
                let x = domain.point(node);
                points.iter().all(|p| dist(&x, &p.point) > p.delta_exclusion)
            })
            .map_or(0.0, |(_, v)| v)
        })
        .collect();
    let residual_max = residual_bound.iter().copied().fold(0.0, f64::max);
    Ok(ConcentrationReport {
        hbar,
        c,
        energy_bound: seq.energy_bound,
        divergence_threshold,
        cluster_radius,
        min_cluster,
        max_points,
        points,
        bounded_candidates: bounded,
        residual_bound,
        residual_max,
        truncated,
    })
}
