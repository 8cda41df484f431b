//! Discrete differential and integral operators on masked grids.
//!
//! The Laplacian is the positive-definite one, `Δ = d*d`, so `Δ|x|² = −2n`.

mod quadrature;
mod shell;
mod stencil;
mod weak;

use serde::{Deserialize, Serialize};

pub use quadrature::{integrate, integrate_weighted, quadrature_weights, region_volume, Region};
pub use shell::{shell_profile, ShellNodes, ShellQuadrature, ShellSample};
pub use stencil::{laplacian, normal_derivative, NormalDerivative, StencilField};
pub use weak::{weak_subharmonic_test, TestFunction, WeakTestReport, WeakTestSet, WeakVerdict};

/// `Vol S^{n−1}`, the area of the unit sphere in `ℝⁿ` (`S⁰` counts two points).
pub fn unit_sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        _ => panic!("unit_sphere_area: dimension {n} unsupported"),
    }
}

/// Verdict tolerance `K · h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub k: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { k: 10.0 }
    }
}

impl Tolerance {
    pub fn new(k: f64) -> Self {
        Self { k }
    }

    pub fn at(&self, h: f64) -> f64 {
        self.k * h
    }
}
