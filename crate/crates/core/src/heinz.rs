//! The Heinz scan `f(ρ) = (1−ρ)ⁿ sup_{B_{ρr}} e` and the comparison
//! functions of the mean value proofs.

use serde::{Deserialize, Serialize};

use crate::calculus::{laplacian, normal_derivative};
use crate::constants::BoundParams;
use crate::error::{Error, Result};
use crate::grid::{DomainKind, ScalarField};

pub const DEFAULT_RHO_RESOLUTION: usize = 256;

/// One grid-arithmetic inequality of the scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeinzCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeinzReport {
    /// Exact maximiser over the distance jumps of the sup function.
    pub rho_bar: f64,
    /// Maximiser over the uniform sample grid (smallest index on ties).
    pub rho_bar_sampled: f64,
    pub c_bar: f64,
    pub x_bar: Vec<f64>,
    pub x_bar_node: usize,
    pub eps: f64,
    /// `f(k / resolution)`, `k = 0 … resolution − 1`.
    pub f_values: Vec<f64>,
    pub checks: Vec<HeinzCheck>,
}

impl HeinzReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `f(ρ̄) = (1 − ρ̄)ⁿ c̄ = (2ε)ⁿ c̄`.
    pub fn f_max(&self) -> f64 {
        (2.0 * self.eps).powi(self.x_bar.len() as i32) * self.c_bar
    }
}

/// Scans `f(ρ) = (1−ρ)ⁿ sup_{B_{ρr}(center)} e` for `ρ ∈ [0, 1)`, where the
/// ball is closed and Euclidean and the sup runs over in-mask nodes (so on a
/// half-ball it is the clipped `D_{ρr}`).
///
/// The sup is a step function of `ρ` that jumps only at node distances, and
/// `(1−ρ)ⁿ` decreases, so the maximum of `f` sits at one of those jumps; `ρ̄`
/// is taken there exactly. The uniform samples are reported alongside.
pub fn heinz_scan(e: &ScalarField, center: &[f64], r: f64, rho_resolution: usize) -> Result<HeinzReport> {
    let domain = e.domain();
    let n = domain.dim();
    if center.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: center.len(),
        });
    }
    if !(r > 0.0) {
        return Err(Error::InvalidLength { name: "r", value: r });
    }
    if rho_resolution < 64 {
        return Err(Error::Config(format!("rho_resolution {rho_resolution} is below 64")));
    }
    let center_node = domain.node_at(center).ok_or(Error::EmptyBall)?;

    // (distance, node) for nodes of the open ball B_r(center), nearest first
    let dist = |node: usize| -> f64 {
        let x = domain.coords(node);
        x[..n].iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    };
    let mut ring: Vec<(f64, usize)> = domain
        .nodes()
        .map(|i| (dist(i), i))
        .filter(|&(d, _)| d < r)
        .collect();
    ring.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    // running sup with the lexicographically smallest node on ties
    let mut steps: Vec<(f64, f64, usize)> = Vec::new(); // (ρ, sup, argmax) after each distance group
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    let mut k = 0;
    while k < ring.len() {
        let d = ring[k].0;
        while k < ring.len() && ring[k].0 == d {
            let node = ring[k].1;
            let v = e.value(node);
            if v > best.0 || (v == best.0 && node < best.1) {
                best = (v, node);
            }
            k += 1;
        }
        steps.push((d / r, best.0, best.1));
    }
    let nn = n as i32;
    let f = |rho: f64, sup: f64| (1.0 - rho).powi(nn) * sup;

    let mut exact = (0usize, f64::NEG_INFINITY);
    for (j, &(rho, sup, _)) in steps.iter().enumerate() {
        let v = f(rho, sup);
        if v > exact.1 {
            exact = (j, v);
        }
    }
    let (rho_bar, c_bar, x_bar_node) = steps[exact.0];

    let sup_at = |rho: f64| -> f64 {
        match steps.partition_point(|s| s.0 <= rho) {
            0 => f64::NEG_INFINITY,
            p => steps[p - 1].1,
        }
    };
    let f_values: Vec<f64> = (0..rho_resolution)
        .map(|k| {
            let rho = k as f64 / rho_resolution as f64;
            f(rho, sup_at(rho))
        })
        .collect();
    let mut sampled = 0;
    for (k, &v) in f_values.iter().enumerate() {
        if v > f_values[sampled] {
            sampled = k;
        }
    }

    let eps = 0.5 * (1.0 - rho_bar);
    let two_n = 2f64.powi(nn);
    let center_value = e.value(center_node);
    let f_bar = f(rho_bar, c_bar);
    let x_bar = domain.point(x_bar_node);
    let near_radius = eps * r;
    let sup_near = domain
        .nodes()
        .filter(|&i| {
            let x = domain.coords(i);
            x[..n].iter().zip(&x_bar).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= near_radius
        })
        .map(|i| e.value(i))
        .fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![
        HeinzCheck {
            name: "e(center) <= (2 eps)^n c_bar".into(),
            lhs: center_value,
            rhs: f_bar,
            passed: center_value <= f_bar,
        },
        HeinzCheck {
            name: "sup over B_{eps r}(x_bar) <= 2^n c_bar".into(),
            lhs: sup_near,
            rhs: two_n * c_bar,
            passed: sup_near <= two_n * c_bar,
        },
    ];
    Ok(HeinzReport {
        rho_bar,
        rho_bar_sampled: sampled as f64 / rho_resolution as f64,
        c_bar,
        x_bar,
        x_bar_node,
        eps,
        f_values,
        checks,
    })
}

/// `v = e + (1/n)(A₀ + 2ⁿ c̄ (A₁ + 4a c̄^{2/n})) |x − x̄|²`.
pub fn comparison_function_interior(e: &ScalarField, x_bar: &[f64], params: &BoundParams, c_bar: f64) -> Result<ScalarField> {
    params.validate()?;
    let n = e.domain().dim();
    if x_bar.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x_bar.len(),
        });
    }
    let nf = n as f64;
    let k = (params.a0 + 2f64.powi(n as i32) * c_bar * (params.a1 + 4.0 * params.a * c_bar.powf(2.0 / nf))) / nf;
    e.add_fn(false, |x| {
        k * x.iter().zip(x_bar).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    })
}

/// `v = e + (1/2n) A |x − y|² + (B + A y₀/n) x₀`; the `x₀` term is dropped
/// when the domain radius is at most `y₀`. With `Δe ≤ A` and `∂e/∂ν ≤ B`
/// this gives `Δv = Δe − A ≤ 0` and `∂v/∂ν = ∂e/∂ν − B ≤ 0`.
pub fn comparison_function_boundary(e: &ScalarField, y: &[f64], a: f64, b: f64) -> Result<ScalarField> {
    let domain = e.domain();
    if domain.kind() != DomainKind::HalfBall {
        return Err(Error::WrongDomainKind { expected: "half-ball" });
    }
    let n = domain.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let nf = n as f64;
    let linear = if domain.radius() <= y[0] { 0.0 } else { b + a * y[0] / nf };
    e.add_fn(false, |x| {
        a / (2.0 * nf) * x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() + linear * x[0]
    })
}

/// Largest `Δv` (and `∂v/∂ν` on half-balls) over stencil-valid nodes of the
/// closed ball `B_ρ(center)`, or the whole domain when `region` is `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCheck {
    pub max_laplacian: f64,
    pub max_normal_derivative: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn check_comparison(v: &ScalarField, region: Option<(&[f64], f64)>, tolerance: f64) -> Result<ComparisonCheck> {
    let domain = v.domain();
    let n = domain.dim();
    let inside = |node: usize| match region {
        None => true,
        Some((c, rho)) => {
            let x = domain.coords(node);
            x[..n].iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= rho * rho
        }
    };
    let lap = laplacian(v);
    let max_laplacian = lap
        .iter()
        .filter(|&(i, _)| inside(i))
        .map(|(_, d)| d)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_normal_derivative = if domain.kind() == DomainKind::HalfBall {
        match normal_derivative(v) {
            Ok(nd) => Some(
                nd.values
                    .iter()
                    .filter(|&&(i, _)| inside(i))
                    .map(|&(_, d)| d)
                    .fold(f64::NEG_INFINITY, f64::max),
            ),
            Err(Error::DomainHasNoFlatBoundary) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let passed = max_laplacian <= tolerance && max_normal_derivative.is_none_or(|d| d <= tolerance);
    Ok(ComparisonCheck {
        max_laplacian,
        max_normal_derivative,
        tolerance,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_ball_domain, make_half_ball_domain, MetricSpec};
    use crate::synth::{gen, GeneratorSpec};
    use std::sync::Arc;

    fn disk(h: f64) -> Arc<crate::grid::Domain> {
        Arc::new(make_ball_domain(&[0.0, 0.0], 1.0, h, 2, MetricSpec::identity()).unwrap())
    }

    #[test]
    fn constant_field() {
        let d = disk(1.0 / 32.0);
        let e = ScalarField::density(&d, |_| 3.0).unwrap();
        let rep = heinz_scan(&e, &[0.0, 0.0], 1.0, 256).unwrap();
        assert_eq!(rep.rho_bar, 0.0);
        assert_eq!(rep.rho_bar_sampled, 0.0);
        assert_eq!(rep.c_bar, 3.0);
        assert_eq!(rep.eps, 0.5);
        assert!(rep.passed());
        assert_eq!(rep.checks[0].lhs, rep.checks[0].rhs);
        assert_eq!(rep.f_values.len(), 256);
    }

    /// Brute force: evaluate f at every node distance directly.
    fn brute_argmax(e: &ScalarField, r: f64) -> (f64, f64) {
        let d = e.domain();
        let nodes: Vec<(f64, f64)> = d
            .nodes()
            .map(|i| {
                let x = d.coords(i);
                ((x[0] * x[0] + x[1] * x[1]).sqrt(), e.value(i))
            })
            .filter(|&(dist, _)| dist < r)
            .collect();
        let mut best = (0.0, f64::NEG_INFINITY);
        for &(rho_d, _) in &nodes {
            let sup = nodes.iter().filter(|p| p.0 <= rho_d).map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            let f = (1.0 - rho_d / r).powi(2) * sup;
            if f > best.1 || (f == best.1 && rho_d < best.0) {
                best = (rho_d / r, f);
            }
        }
        best
    }

    #[test]
    fn single_spike() {
        let h = 1.0 / 32.0;
        let d = disk(h);
        let spike = [0.25, 0.125];
        let e = ScalarField::density(&d, |x| {
            if (x[0] - spike[0]).abs() < 1e-9 && (x[1] - spike[1]).abs() < 1e-9 {
                50.0
            } else {
                1.0
            }
        })
        .unwrap();
        let rep = heinz_scan(&e, &[0.0, 0.0], 1.0, 256).unwrap();
        let dist = (spike[0] * spike[0] + spike[1] * spike[1]).sqrt();
        assert!((rep.rho_bar - dist).abs() < 1e-12);
        assert_eq!(rep.x_bar, spike.to_vec());
        assert_eq!(rep.c_bar, 50.0);
        let (brute_rho, brute_f) = brute_argmax(&e, 1.0);
        assert!((brute_rho - rep.rho_bar).abs() < 1e-12);
        assert!((brute_f - rep.f_max()).abs() < 1e-12);
        assert!((rep.rho_bar_sampled - dist).abs() <= 1.0 / 256.0 + 1e-12);
        assert!(rep.passed());
    }

    #[test]
    fn centered_bubble() {
        let d = disk(1.0 / 64.0);
        let g = gen(
            &GeneratorSpec::Bubble {
                center: vec![0.0, 0.0],
                lambda: 0.05,
                amplitude: 1.0,
            },
            &d,
        )
        .unwrap();
        let rep = heinz_scan(&g.field, &[0.0, 0.0], 1.0, 256).unwrap();
        assert_eq!(rep.rho_bar, 0.0);
        assert_eq!(rep.c_bar, g.field.value(d.center_node().unwrap()));
    }

    #[test]
    fn off_node_center_is_empty() {
        let d = disk(1.0 / 32.0);
        let e = ScalarField::density(&d, |_| 1.0).unwrap();
        assert!(matches!(heinz_scan(&e, &[0.01, 0.0], 0.5, 256), Err(Error::EmptyBall)));
    }

    #[test]
    fn interior_comparison_examples() {
        let d = disk(1.0 / 32.0);
        let zero = ScalarField::density(&d, |_| 0.0).unwrap();
        let p = BoundParams {
            a0: 2.0,
            ..BoundParams::zero(2)
        };
        let v = comparison_function_interior(&zero, &[0.0, 0.0], &p, 0.0).unwrap();
        for i in d.nodes() {
            let x = d.coords(i);
            assert!((v.value(i) - (x[0] * x[0] + x[1] * x[1])).abs() < 1e-14);
        }
        let chk = check_comparison(&v, None, 0.0).unwrap();
        assert!((chk.max_laplacian + 4.0).abs() < 1e-9);
        let e = ScalarField::density(&d, |x| 1.0 + x[0]).unwrap();
        let same = comparison_function_interior(&e, &[0.0, 0.0], &BoundParams::zero(2), 5.0).unwrap();
        assert_eq!(same.values(), e.values());
    }

    #[test]
    fn boundary_comparison_examples() {
        let d = Arc::new(make_half_ball_domain(&[0.0, 0.0], 1.0, 1.0 / 32.0, 2).unwrap());
        let zero = ScalarField::density(&d, |_| 0.0).unwrap();
        let v = comparison_function_boundary(&zero, &[0.0, 0.0], 0.0, 1.0).unwrap();
        let chk = check_comparison(&v, None, 1e-12).unwrap();
        assert!((chk.max_normal_derivative.unwrap() + 1.0).abs() < 1e-12);
        assert!(chk.passed);

        let e = ScalarField::density(&d, |x| x[0]).unwrap();
        let v = comparison_function_boundary(&e, &[0.0, 0.0], 0.0, 2.0).unwrap();
        for i in d.nodes() {
            assert!((v.value(i) - 3.0 * d.coords(i)[0]).abs() < 1e-14);
        }

        // Δe = 4 ≤ A, ∂e/∂ν = 0 ≤ B for e = 2 − |x − y|² about an interior y
        let dy = Arc::new(make_half_ball_domain(&[0.25, 0.0], 1.0, 1.0 / 32.0, 2).unwrap());
        let y = [0.25, 0.0];
        let e = ScalarField::density(&dy, |x| 3.0 - (x[0] - 0.25).powi(2) - x[1] * x[1] + 0.5 * x[0]).unwrap();
        // ∂ν e = −(0.5 + 2·0.25) = −1 at x₀ = 0
        let v = comparison_function_boundary(&e, &y, 4.0, 0.0).unwrap();
        let chk = check_comparison(&v, None, 1e-9).unwrap();
        assert!(chk.passed, "{chk:?}");

        let ball = disk(1.0 / 32.0);
        let z = ScalarField::density(&ball, |_| 0.0).unwrap();
        assert!(matches!(
            comparison_function_boundary(&z, &[0.0, 0.0], 1.0, 1.0),
            Err(Error::WrongDomainKind { .. })
        ));
    }
}
