use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{volume_and_flux_coefficients, Domain, DomainKind, NodeClass, ScalarField, MAX_DIM};

/// Node values that exist only where a stencil fits.
#[derive(Clone, Debug)]
pub struct StencilField {
    domain: Arc<Domain>,
    values: Vec<f64>,
    defined: Vec<bool>,
}

impl StencilField {
    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn get(&self, node: usize) -> Option<f64> {
        self.defined[node].then(|| self.values[node])
    }

    pub fn is_defined(&self, node: usize) -> bool {
        self.defined[node]
    }

    /// Defined nodes with their values, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.defined
            .iter()
            .enumerate()
            .filter(|(_, &d)| d)
            .map(|(i, _)| (i, self.values[i]))
    }

    pub fn defined_count(&self) -> usize {
        self.defined.iter().filter(|&&d| d).count()
    }

    /// In-mask nodes without a full stencil.
    pub fn undefined_in_mask(&self) -> usize {
        self.domain
            .nodes()
            .filter(|&i| !self.defined[i])
            .count()
    }

    /// Largest defined value and its node (first node on ties).
    pub fn max(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in self.iter() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best
    }
}

/// Positive-definite Laplace–Beltrami operator
/// `Δ_g e = −(1/√det g) ∂ᵢ(√det g gⁱʲ ∂ⱼ e)` by centered flux differences.
///
/// For `g = 1` this is `−Σ ∂ᵢ²e` with the standard second-order stencil.
/// Nodes without a full stencil are left undefined.
pub fn laplacian(e: &ScalarField) -> StencilField {
    let domain = e.domain();
    let n = domain.dim();
    let h = domain.spacing();
    let lat = domain.lattice();
    let metric = domain.metric();
    let identity = metric.is_identity();
    let diagonal = metric.is_diagonal();
    let vals = e.values();

    let out: Vec<Option<f64>> = (0..lat.len())
        .into_par_iter()
        .map(|node| {
            if domain.class(node) != NodeClass::Interior {
                return None;
            }
            let mut nb = [[0usize; 2]; MAX_DIM];
            for (axis, pair) in nb.iter_mut().enumerate().take(n) {
                pair[0] = lat.step(node, axis, -1)?;
                pair[1] = lat.step(node, axis, 1)?;
            }
            let u0 = vals[node];
            if identity {
                let s: f64 = (0..n)
                    .map(|a| vals[nb[a][0]] + vals[nb[a][1]] - 2.0 * u0)
                    .sum();
                return Some(-s / (h * h));
            }
            let x = domain.coords(node);
            let mut g = [[0.0; MAX_DIM]; MAX_DIM];
            metric.eval(n, &x[..n], &mut g);
            let (sqrt_det, _) = volume_and_flux_coefficients(n, &g);
            let mut div = 0.0;
            for i in 0..n {
                let mut xp = x;
                let mut xm = x;
                xp[i] += 0.5 * h;
                xm[i] -= 0.5 * h;
                metric.eval(n, &xp[..n], &mut g);
                let ap = volume_and_flux_coefficients(n, &g).1[i][i];
                metric.eval(n, &xm[..n], &mut g);
                let am = volume_and_flux_coefficients(n, &g).1[i][i];
                div += (ap * (vals[nb[i][1]] - u0) - am * (u0 - vals[nb[i][0]])) / (h * h);
            }
            if !diagonal {
                for i in 0..n {
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        let mut flux = [0.0; 2];
                        for (slot, dir) in [(0usize, -1i64), (1, 1)] {
                            let base = nb[i][slot];
                            let jp = lat.step(base, j, 1)?;
                            let jm = lat.step(base, j, -1)?;
                            if !domain.is_in_mask(jp) || !domain.is_in_mask(jm) {
                                return None;
                            }
                            let mut xs = x;
                            xs[i] += dir as f64 * h;
                            metric.eval(n, &xs[..n], &mut g);
                            let a = volume_and_flux_coefficients(n, &g).1[i][j];
                            flux[slot] = a * (vals[jp] - vals[jm]) / (2.0 * h);
                        }
                        div += (flux[1] - flux[0]) / (2.0 * h);
                    }
                }
            }
            Some(-div / sqrt_det)
        })
        .collect();

    let defined = out.iter().map(Option::is_some).collect();
    let values = out.into_iter().map(|v| v.unwrap_or(0.0)).collect();
    StencilField {
        domain: Arc::clone(domain),
        values,
        defined,
    }
}

/// Outer normal derivative `∂e/∂ν = −∂e/∂x₀` on the flat boundary.
#[derive(Clone, Debug)]
pub struct NormalDerivative {
    /// `(flat node, ∂e/∂ν)` in lexicographic order.
    pub values: Vec<(usize, f64)>,
    /// Flat nodes whose one-sided stencil leaves the mask.
    pub skipped: Vec<usize>,
}

impl NormalDerivative {
    pub fn max(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for &(i, v) in &self.values {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best
    }
}

/// One-sided second-order stencil `−(−3e₀ + 4e₁ − e₂)/(2h)` at every flat node.
pub fn normal_derivative(e: &ScalarField) -> Result<NormalDerivative> {
    let domain = e.domain();
    if domain.kind() != DomainKind::HalfBall {
        return Err(Error::DomainHasNoFlatBoundary);
    }
    let lat = domain.lattice();
    let h = domain.spacing();
    let mut values = Vec::new();
    let mut skipped = Vec::new();
    for node in domain.nodes_of(NodeClass::FlatBoundary) {
        let one = lat.step(node, 0, 1).filter(|&i| domain.is_in_mask(i));
        let two = lat.step(node, 0, 2).filter(|&i| domain.is_in_mask(i));
        match (one, two) {
            (Some(i1), Some(i2)) => {
                let d0 = (-3.0 * e.value(node) + 4.0 * e.value(i1) - e.value(i2)) / (2.0 * h);
                values.push((node, -d0));
            }
            _ => skipped.push(node),
        }
    }
    if values.is_empty() && skipped.is_empty() {
        return Err(Error::DomainHasNoFlatBoundary);
    }
    Ok(NormalDerivative { values, skipped })
}
