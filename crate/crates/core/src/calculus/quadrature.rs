//! Volume quadrature on masked grids.
//!
//! Every node owns the cube of side `h` around it. Cubes that straddle the
//! region boundary are resolved with `4ⁿ` subcell samples; samples that fall
//! in the cube of an outside node are handed to the nearest in-mask node, so
//! the region is covered without gaps. Weights carry `√det g`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, DomainKind, ScalarField, MAX_DIM};

const SUBSAMPLES: usize = 4;

/// Integration subregion: a Euclidean ball, or a ball clipped to `x₀ ≥ 0`.
/// It is always intersected with the domain itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    HalfBall { center: Vec<f64>, radius: f64 },
}

impl Region {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        Region::Ball {
            center: center.to_vec(),
            radius,
        }
    }

    pub fn half_ball(center: &[f64], radius: f64) -> Self {
        Region::HalfBall {
            center: center.to_vec(),
            radius,
        }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            Region::Ball { center, .. } | Region::HalfBall { center, .. } => center,
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            Region::Ball { radius, .. } | Region::HalfBall { radius, .. } => *radius,
        }
    }

    fn level(&self, x: &[f64]) -> f64 {
        let c = self.center();
        let d = c
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let l = d - self.radius();
        match self {
            Region::Ball { .. } => l,
            Region::HalfBall { .. } => l.max(-x[0]),
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Ball { .. } => self.level(x) < 0.0,
            Region::HalfBall { .. } => x[0] >= 0.0 && self.level_ball(x) < 0.0,
        }
    }

    fn level_ball(&self, x: &[f64]) -> f64 {
        let c = self.center();
        c.iter()
            .zip(x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            - self.radius()
    }
}

fn domain_level(domain: &Domain, x: &[f64]) -> f64 {
    let l = domain.distance_to_center(x) - domain.radius();
    match domain.kind() {
        DomainKind::Ball => l,
        DomainKind::HalfBall => l.max(-x[0]),
    }
}

/// Quadrature weights `(node, w)` for `domain ∩ region`, sorted by node.
///
/// The full-domain weights are cached on the domain.
pub fn quadrature_weights(domain: &Domain, region: Option<&Region>) -> Result<Vec<(usize, f64)>> {
    match region {
        None => Ok(domain.cached_weights(|| build_weights(domain, None)).to_vec()),
        Some(r) => {
            validate_region(domain, r)?;
            Ok(build_weights(domain, Some(r)))
        }
    }
}

fn validate_region(domain: &Domain, region: &Region) -> Result<()> {
    let c = region.center();
    if c.len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: c.len(),
        });
    }
    if !(region.radius() > 0.0) || !region.radius().is_finite() {
        return Err(Error::InvalidLength {
            name: "subregion radius",
            value: region.radius(),
        });
    }
    if !domain.contains(c) {
        return Err(Error::SubregionOutsideDomain { center: c.to_vec() });
    }
    Ok(())
}

fn build_weights(domain: &Domain, region: Option<&Region>) -> Vec<(usize, f64)> {
    let n = domain.dim();
    let h = domain.spacing();
    let lat = domain.lattice();
    let cell = h.powi(n as i32);
    let sub_w = cell / (SUBSAMPLES.pow(n as u32)) as f64;
    let half_diag = 0.5 * h * (n as f64).sqrt();
    let lipschitz = if domain.metric().is_identity() { 1.0 } else { 1.25 };
    let margin = lipschitz * half_diag * (1.0 + 1e-9) + 1e-12;

    // candidate cells: whole box, or the region's bounding box
    let candidates: Vec<usize> = match region {
        None => (0..lat.len()).collect(),
        Some(r) => {
            let c = r.center();
            let rad = r.radius() + 2.0 * h;
            let mut lo = [0.0; MAX_DIM];
            let mut hi = [0.0; MAX_DIM];
            for i in 0..n {
                lo[i] = c[i] - rad;
                hi[i] = c[i] + rad;
            }
            let (klo, _) = lat.locate(&lo[..n]);
            let (khi, _) = lat.locate(&hi[..n]);
            let mut out = Vec::new();
            let mut k = klo;
            'outer: loop {
                if let Some(node) = lat.node_from_offsets(&k[..n]) {
                    out.push(node);
                }
                let mut axis = n;
                loop {
                    if axis == 0 {
                        break 'outer;
                    }
                    axis -= 1;
                    if k[axis] < khi[axis] + 1 {
                        k[axis] += 1;
                        break;
                    }
                    k[axis] = klo[axis];
                }
            }
            out
        }
    };

    let level = |x: &[f64]| -> f64 {
        let l = domain_level(domain, x);
        match region {
            Some(r) => l.max(r.level(x)),
            None => l,
        }
    };
    let inside = |x: &[f64]| -> bool { domain.contains(x) && region.is_none_or(|r| r.contains(x)) };

    let offsets: Vec<f64> = (0..SUBSAMPLES)
        .map(|s| ((s as f64 + 0.5) / SUBSAMPLES as f64 - 0.5) * h)
        .collect();
    let total_sub = SUBSAMPLES.pow(n as u32);

    let contributions: Vec<Vec<(usize, f64)>> = candidates
        .par_iter()
        .map(|&node| {
            let x = domain.coords(node);
            let lv = level(&x[..n]);
            if lv >= margin {
                return Vec::new();
            }
            if lv <= -margin {
                return vec![(node, cell)];
            }
            let own = domain.is_in_mask(node);
            let mut local: Vec<(usize, f64)> = Vec::new();
            let mut p = [0.0; MAX_DIM];
            for s in 0..total_sub {
                let mut rem = s;
                for i in 0..n {
                    p[i] = x[i] + offsets[rem % SUBSAMPLES];
                    rem /= SUBSAMPLES;
                }
                if !inside(&p[..n]) {
                    continue;
                }
                let owner = if own {
                    Some(node)
                } else {
                    nearest_in_mask(domain, node, &p[..n])
                };
                if let Some(o) = owner {
                    match local.iter_mut().find(|(i, _)| *i == o) {
                        Some(entry) => entry.1 += sub_w,
                        None => local.push((o, sub_w)),
                    }
                }
            }
            local
        })
        .collect();

    let mut flat: Vec<(usize, f64)> = contributions.into_iter().flatten().collect();
    flat.sort_by_key(|&(i, _)| i);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(flat.len());
    for (i, w) in flat {
        match merged.last_mut() {
            Some(last) if last.0 == i => last.1 += w,
            _ => merged.push((i, w)),
        }
    }
    if !domain.metric().is_identity() {
        let metric = domain.metric();
        let mut g = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, w) in merged.iter_mut() {
            let x = domain.coords(*i);
            metric.eval(n, &x[..n], &mut g);
            let (sqrt_det, _) = crate::grid::volume_and_flux_coefficients(n, &g);
            *w *= sqrt_det;
        }
    }
    merged
}

/// Nearest in-mask node to `p` in the `3ⁿ` (then `5ⁿ`) block around `node`.
fn nearest_in_mask(domain: &Domain, node: usize, p: &[f64]) -> Option<usize> {
    let lat = domain.lattice();
    let n = domain.dim();
    let base = lat.offsets(node);
    for reach in [1i64, 2] {
        let width = (2 * reach + 1) as usize;
        let mut best: Option<(f64, usize)> = None;
        for s in 0..width.pow(n as u32) {
            let mut k = base;
            let mut rem = s;
            for ki in k.iter_mut().take(n) {
                *ki += (rem % width) as i64 - reach;
                rem /= width;
            }
            let Some(cand) = lat.node_from_offsets(&k[..n]) else {
                continue;
            };
            if !domain.is_in_mask(cand) {
                continue;
            }
            let x = domain.coords(cand);
            let d: f64 = (0..n).map(|i| (x[i] - p[i]) * (x[i] - p[i])).sum();
            if best.is_none_or(|(bd, bi)| d < bd || (d == bd && cand < bi)) {
                best = Some((d, cand));
            }
        }
        if let Some((_, i)) = best {
            return Some(i);
        }
    }
    None
}

/// `∫ e √det g` over the domain, optionally restricted to a subregion.
pub fn integrate(e: &ScalarField, region: Option<&Region>) -> Result<f64> {
    integrate_weighted(e, region, |_, _| 1.0)
}

/// `∫ e · w(x)` with `w` evaluated at the nodes.
pub fn integrate_weighted(
    e: &ScalarField,
    region: Option<&Region>,
    w: impl Fn(usize, &[f64]) -> f64,
) -> Result<f64> {
    let domain = e.domain();
    let n = domain.dim();
    let sum = |weights: &[(usize, f64)]| -> f64 {
        weights
            .iter()
            .map(|&(i, q)| {
                let x = domain.coords(i);
                q * e.value(i) * w(i, &x[..n])
            })
            .sum()
    };
    match region {
        None => Ok(sum(domain.cached_weights(|| build_weights(domain, None)))),
        Some(r) => {
            validate_region(domain, r)?;
            Ok(sum(&build_weights(domain, Some(r))))
        }
    }
}

/// Measure of `domain ∩ region` under the grid quadrature.
pub fn region_volume(domain: &Domain, region: Option<&Region>) -> Result<f64> {
    Ok(quadrature_weights(domain, region)?.iter().map(|&(_, w)| w).sum())
}
