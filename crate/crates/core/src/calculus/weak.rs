//! Weak Neumann subharmonicity: `∫ e Δψ ≤ 0` for nonnegative test
//! functions `ψ` with `∂ψ/∂ν = 0` on the flat boundary.

use serde::{Deserialize, Serialize};

use super::quadrature::integrate_weighted;
use super::Tolerance;
use crate::error::{Error, Result};
use crate::grid::{Domain, DomainKind, ScalarField};

/// `ψ(x) = (1 − s)⁶₊ · (1 + α cos(ω x₀)) · (1 + β u²)` with
/// `s = |x − c|²/ρ²` and `u = (x_a − c_a)/ρ`.
///
/// Even in `x₀` about the flat boundary whenever `c₀ = 0`; supported away
/// from it whenever `c₀ ≥ ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: Vec<f64>,
    pub radius: f64,
    pub cos_amplitude: f64,
    pub cos_frequency: f64,
    pub poly_amplitude: f64,
    pub poly_axis: usize,
}

impl TestFunction {
    pub fn bump(center: &[f64], radius: f64) -> Self {
        Self {
            center: center.to_vec(),
            radius,
            cos_amplitude: 0.0,
            cos_frequency: 0.0,
            poly_amplitude: 0.0,
            poly_axis: 1,
        }
    }

    pub fn with_cosine(mut self, amplitude: f64, frequency: f64) -> Self {
        self.cos_amplitude = amplitude;
        self.cos_frequency = frequency;
        self
    }

    pub fn with_polynomial(mut self, amplitude: f64, axis: usize) -> Self {
        self.poly_amplitude = amplitude;
        self.poly_axis = axis;
        self
    }

    fn parts(&self, x: &[f64]) -> Option<(f64, f64)> {
        let rho2 = self.radius * self.radius;
        let r2: f64 = self
            .center
            .iter()
            .zip(x)
            .map(|(c, v)| (v - c) * (v - c))
            .sum();
        let s = r2 / rho2;
        (s < 1.0).then_some((s, r2))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let Some((s, _)) = self.parts(x) else {
            return 0.0;
        };
        let f = (1.0 - s).powi(6);
        let q0 = 1.0 + self.cos_amplitude * (self.cos_frequency * x[0]).cos();
        let u = (x[self.poly_axis] - self.center[self.poly_axis]) / self.radius;
        f * q0 * (1.0 + self.poly_amplitude * u * u)
    }

    /// Positive-definite Laplacian `Δψ = −Σ ∂ᵢ²ψ`, in closed form.
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let Some((s, r2)) = self.parts(x) else {
            return 0.0;
        };
        let rho = self.radius;
        let rho2 = rho * rho;
        // sixth power keeps Δψ C³ at the support edge, so lattice sums converge fast
        let f = (1.0 - s).powi(6);
        let f1 = -6.0 * (1.0 - s).powi(5);
        let f2 = 30.0 * (1.0 - s).powi(4);
        let lap_f = f2 * 4.0 * r2 / (rho2 * rho2) + f1 * 2.0 * n as f64 / rho2;

        let (alpha, omega, beta, a) = (
            self.cos_amplitude,
            self.cos_frequency,
            self.poly_amplitude,
            self.poly_axis,
        );
        let (sin0, cos0) = (omega * x[0]).sin_cos();
        let q0 = 1.0 + alpha * cos0;
        let dq0 = -alpha * omega * sin0;
        let ddq0 = -alpha * omega * omega * cos0;
        let u = (x[a] - self.center[a]) / rho;
        let q1 = 1.0 + beta * u * u;
        let dq1 = 2.0 * beta * u / rho;
        let ddq1 = 2.0 * beta / rho2;

        let p = q0 * q1;
        let mut grad_p = vec![0.0; n];
        grad_p[0] += dq0 * q1;
        grad_p[a] += q0 * dq1;
        let lap_p = ddq0 * q1 + q0 * ddq1 + if a == 0 { 2.0 * dq0 * dq1 } else { 0.0 };

        let grad_f_dot: f64 = (0..n)
            .map(|i| f1 * 2.0 * (x[i] - self.center[i]) / rho2 * grad_p[i])
            .sum();
        -(p * lap_f + 2.0 * grad_f_dot + f * lap_p)
    }

    fn fits(&self, domain: &Domain) -> bool {
        let dist: f64 = self
            .center
            .iter()
            .zip(domain.center())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let inside = dist + self.radius <= 0.95 * domain.radius();
        let neumann = match domain.kind() {
            DomainKind::Ball => true,
            DomainKind::HalfBall => {
                self.center[0] == 0.0 || self.center[0] >= self.radius
            }
        };
        inside && neumann && self.cos_amplitude.abs() < 1.0 && self.poly_amplitude >= 0.0
    }
}

/// A family of admissible test functions for one domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakTestSet {
    pub tests: Vec<TestFunction>,
}

impl WeakTestSet {
    /// Explicit family; every member must vanish near the cap and satisfy the
    /// flat Neumann condition.
    pub fn new(domain: &Domain, tests: Vec<TestFunction>) -> Result<Self> {
        for t in &tests {
            if t.center.len() != domain.dim() || !t.fits(domain) {
                return Err(Error::Config(format!(
                    "test function centered at {:?} (radius {}) is not admissible",
                    t.center, t.radius
                )));
            }
        }
        Ok(Self { tests })
    }

    /// At least 16 bumps, boundary-centered ones first when the domain has a
    /// flat boundary, each in plain, cosine and polynomial variants.
    pub fn standard(domain: &Domain) -> Self {
        let n = domain.dim();
        let r = domain.radius();
        let y = domain.center();
        let mut bases: Vec<TestFunction> = Vec::new();
        let has_flat = domain.kind() == DomainKind::HalfBall && y[0] < 0.95 * r;
        if has_flat {
            for rho_f in [0.3, 0.45] {
                for shift in [-0.25, 0.0, 0.25] {
                    let mut c = y.to_vec();
                    c[0] = 0.0;
                    c[1] += shift * r;
                    bases.push(TestFunction::bump(&c, rho_f * r));
                }
            }
        }
        for rho_f in [0.2, 0.35] {
            for shift in [-0.3, 0.0, 0.3] {
                for axis in 0..n.min(2) {
                    let mut c = y.to_vec();
                    if domain.kind() == DomainKind::HalfBall {
                        c[0] = c[0].max(rho_f * r + 0.3 * r);
                    }
                    c[axis] += shift * r;
                    bases.push(TestFunction::bump(&c, rho_f * r));
                }
            }
        }
        let mut tests = Vec::new();
        for b in bases {
            let omega = std::f64::consts::PI / b.radius;
            for t in [
                b.clone(),
                b.clone().with_cosine(0.5, omega),
                b.clone().with_polynomial(1.0, 1),
            ] {
                if t.fits(domain) && !tests.contains(&t) {
                    tests.push(t);
                }
            }
        }
        Self { tests }
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeakVerdict {
    Subharmonic,
    NotSubharmonic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakTestReport {
    /// `∫ e Δψ` per test function.
    pub values: Vec<f64>,
    /// `∫ |e| ψ / r²` with `r` the domain radius, the scale each value is
    /// judged against.
    pub scales: Vec<f64>,
    /// Per-test threshold `K h · scale`.
    pub thresholds: Vec<f64>,
    pub worst: Option<usize>,
    pub verdict: WeakVerdict,
}

/// Evaluates `∫ e Δψ` for every test function; the verdict is `Subharmonic`
/// iff each value stays below `K h ∫|e| ψ / r²`.
pub fn weak_subharmonic_test(e: &ScalarField, tests: &WeakTestSet, tol: Tolerance) -> Result<WeakTestReport> {
    let h = e.domain().spacing();
    let r2 = e.domain().radius().powi(2);
    let mut values = Vec::with_capacity(tests.len());
    let mut scales = Vec::with_capacity(tests.len());
    let mut thresholds = Vec::with_capacity(tests.len());
    for t in &tests.tests {
        let v = integrate_weighted(e, None, |_, x| t.laplacian(x))?;
        let s = integrate_weighted(e, None, |node, x| t.value(x) * e.value(node).signum())? / r2;
        values.push(v);
        scales.push(s);
        thresholds.push(tol.at(h) * s);
    }
    let mut worst = None;
    let mut worst_excess = f64::NEG_INFINITY;
    for (i, (v, th)) in values.iter().zip(&thresholds).enumerate() {
        let excess = v - th;
        if excess > worst_excess {
            worst_excess = excess;
            worst = Some(i);
        }
    }
    let verdict = if worst_excess <= 0.0 {
        WeakVerdict::Subharmonic
    } else {
        WeakVerdict::NotSubharmonic
    };
    Ok(WeakTestReport {
        values,
        scales,
        thresholds,
        worst,
        verdict,
    })
}
