//! Clipped spherical-shell quadrature.
//!
//! Shells about `y = (y₀, ȳ)` are parametrised as
//! `(y₀ + r cos φ, ȳ + r sin φ · z)` with `φ ∈ [0, φ₀(r)]`, `z ∈ S^{n−2}` and
//! `φ₀(r) = arccos(−y₀/r)` (π when `y₀ ≥ r`). The surface element is
//! `r^{n−1} sin^{n−2}φ dφ dvol_{S^{n−2}}`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DomainKind, ScalarField, MAX_DIM};

const PANEL_ORDER: usize = 4;

fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("nonzero order"));
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Quadrature nodes of one shell.
#[derive(Clone, Debug)]
pub struct ShellNodes {
    pub radius: f64,
    pub phi0: f64,
    pub points: Vec<[f64; MAX_DIM]>,
    pub weights: Vec<f64>,
}

impl ShellNodes {
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_clipped(&self) -> bool {
        self.phi0 < PI
    }
}

/// Product quadrature over a family of clipped shells about one center.
#[derive(Clone, Debug)]
pub struct ShellQuadrature {
    dim: usize,
    center: Vec<f64>,
    clip: bool,
    radii: Vec<f64>,
    spacing: f64,
    phi_rule: Vec<(f64, f64)>,
}

impl ShellQuadrature {
    /// `clip = true` cuts shells at the plane `x₀ = 0`.
    pub fn new(dim: usize, center: &[f64], clip: bool, radii: &[f64], spacing: f64) -> Self {
        Self {
            dim,
            center: center.to_vec(),
            clip,
            radii: radii.to_vec(),
            spacing,
            phi_rule: gauss_legendre(PANEL_ORDER),
        }
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Clipping angle `φ₀(r)`.
    pub fn phi0(&self, r: f64) -> f64 {
        let y0 = self.center[0];
        if !self.clip || y0 >= r {
            PI
        } else {
            (-y0 / r).acos()
        }
    }

    /// Points and weights on `S^{n−2}` for a shell of radius `r`.
    fn sphere_rule(&self, r: f64) -> Vec<([f64; 3], f64)> {
        let h = self.spacing;
        match self.dim {
            2 => vec![([-1.0, 0.0, 0.0], 1.0), ([1.0, 0.0, 0.0], 1.0)],
            3 => {
                let m = ((2.0 * PI * r / h).ceil() as usize).max(16);
                (0..m)
                    .map(|k| {
                        let t = 2.0 * PI * k as f64 / m as f64;
                        ([t.cos(), t.sin(), 0.0], 2.0 * PI / m as f64)
                    })
                    .collect()
            }
            4 => {
                let p = ((PI * r / (2.0 * h)).ceil() as usize).max(8);
                let az = 2 * p;
                let polar = gauss_legendre(p);
                let mut out = Vec::with_capacity(p * az);
                for &(mu, w) in &polar {
                    let s = (1.0 - mu * mu).max(0.0).sqrt();
                    for k in 0..az {
                        let t = 2.0 * PI * k as f64 / az as f64;
                        out.push(([mu, s * t.cos(), s * t.sin()], w * 2.0 * PI / az as f64));
                    }
                }
                out
            }
            _ => unreachable!("dimension validated by the domain"),
        }
    }

    /// Nodes of the shell of radius `r`; the panel grid in `φ` ends exactly
    /// at `φ₀(r)`.
    pub fn shell(&self, r: f64) -> ShellNodes {
        let n = self.dim;
        let phi0 = self.phi0(r);
        let panels = ((PI * r / self.spacing).ceil() as usize).max(1);
        let dphi = phi0 / panels as f64;
        let sphere = self.sphere_rule(r);
        let mut points = Vec::with_capacity(panels * PANEL_ORDER * sphere.len());
        let mut weights = Vec::with_capacity(points.capacity());
        let area = r.powi(n as i32 - 1);
        for p in 0..panels {
            let a = p as f64 * dphi;
            for &(t, w) in &self.phi_rule {
                let phi = a + 0.5 * dphi * (t + 1.0);
                let wphi = 0.5 * dphi * w;
                let (s, c) = phi.sin_cos();
                let jac = s.powi(n as i32 - 2);
                for (z, wz) in &sphere {
                    let mut x = [0.0; MAX_DIM];
                    x[0] = (self.center[0] + r * c).max(if self.clip { 0.0 } else { f64::MIN });
                    for i in 1..n {
                        x[i] = self.center[i] + r * s * z[i - 1];
                    }
                    points.push(x);
                    weights.push(area * jac * wphi * wz);
                }
            }
        }
        ShellNodes {
            radius: r,
            phi0,
            points,
            weights,
        }
    }
}

/// One row of a shell profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellSample {
    pub radius: f64,
    /// `M(r) = r^{1−n} ∫_{Γ_r} e`.
    pub mean: f64,
    pub nodes: usize,
    pub clipped: bool,
}

/// Normalised shell integrals `M(r) = r^{1−n} ∫_{Γ_r} e` about `center`,
/// with field values by multilinear interpolation.
pub fn shell_profile(e: &ScalarField, center: &[f64], radii: &[f64]) -> Result<Vec<ShellSample>> {
    let domain = e.domain();
    let n = domain.dim();
    if center.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: center.len(),
        });
    }
    let h = domain.spacing();
    let clip = domain.kind() == DomainKind::HalfBall;
    if clip && center[0] < 0.0 {
        return Err(Error::CenterBelowBoundary(center[0]));
    }
    let quad = ShellQuadrature::new(n, center, clip, radii, h);
    radii
        .iter()
        .map(|&r| {
            if !(r >= 4.0 * h) {
                return Err(Error::RadiusBelowResolution {
                    radius: r,
                    limit: 4.0 * h,
                });
            }
            let shell = quad.shell(r);
            let mut acc = 0.0;
            for (x, w) in shell.points.iter().zip(&shell.weights) {
                let v = e.interpolate(&x[..n]).ok_or_else(|| Error::ShellExitsDomain {
                    radius: r,
                    point: x[..n].to_vec(),
                })?;
                acc += w * v;
            }
            Ok(ShellSample {
                radius: r,
                mean: acc * r.powi(1 - n as i32),
                nodes: shell.points.len(),
                clipped: shell.is_clipped(),
            })
        })
        .collect()
}
