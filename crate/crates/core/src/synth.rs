//! Densities with analytically known Laplacian, normal derivative and mass.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{integrate, laplacian, normal_derivative, Tolerance};
use crate::constants::BoundParams;
use crate::error::{Error, Result};
use crate::grid::{Domain, DomainKind, ScalarField};
use crate::quantization::DensitySequence;
use crate::verify::{fit_boundary_nonlinearity, fit_nonlinearity};

/// A closed-form density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Constant {
        value: f64,
    },
    /// `offset + amplitude |x − center|²`.
    Quadratic {
        center: Vec<f64>,
        amplitude: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `offset + amplitude cos(ω x_i) cosh(ω x_j)`, harmonic.
    HarmonicProduct {
        amplitude: f64,
        frequency: f64,
        offset: f64,
        #[serde(default)]
        cos_axis: usize,
        #[serde(default = "one")]
        cosh_axis: usize,
    },
    /// `amplitude (|ξ − c|² − |x − c|²) / |x − ξ|ⁿ`, the Poisson kernel of the
    /// ball about `c` through the pole `ξ`; harmonic and positive inside it.
    PoissonPeak {
        center: Vec<f64>,
        pole: Vec<f64>,
        amplitude: f64,
    },
    /// `amplitude λ^{−n} (1 + |x − c|²/λ²)^{−n}`.
    Bubble {
        center: Vec<f64>,
        lambda: f64,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// Bubble plus its mirror image in `x₀ = 0`; even in `x₀`.
    ReflectedBubble {
        center: Vec<f64>,
        lambda: f64,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// `offset + slope x₀`.
    LinearX0 {
        slope: f64,
        #[serde(default)]
        offset: f64,
    },
    Sum {
        terms: Vec<GeneratorSpec>,
    },
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

fn dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `∫_{ℝⁿ} (1 + |x|²)^{−n} dx = Vol S^{n−1} · ½ B(n/2, n/2)`.
pub fn bubble_unit_mass(n: usize) -> f64 {
    match n {
        2 => PI,
        3 => PI * PI / 4.0,
        4 => PI * PI / 6.0,
        _ => panic!("bubble_unit_mass: dimension {n} unsupported"),
    }
}

/// Fraction of a bubble's mass inside `|x − c| < tλ`.
///
/// With `s = tan θ` the radial integrand becomes `(sin θ cos θ)^{n−1}`, which
/// is smooth, so a fixed Gauss–Legendre rule is exact to rounding.
pub fn bubble_mass_fraction(n: usize, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let top = t.atan();
    let radial = |hi: f64| -> f64 {
        let rule = gauss_quad::legendre::GaussLegendre::new(std::num::NonZeroUsize::new(48).unwrap());
        rule.integrate(0.0, hi, |th: f64| (th.sin() * th.cos()).powi(n as i32 - 1))
    };
    radial(top) / radial(PI / 2.0)
}

/// Bubble profile and its first two radial derivatives in closed form.
fn bubble_parts(x: &[f64], c: &[f64], lambda: f64, amp: f64) -> (f64, f64, [f64; 4]) {
    let n = x.len();
    let nf = n as f64;
    let s = dist2(x, c) / (lambda * lambda);
    let u = 1.0 + s;
    let value = amp * lambda.powi(-(n as i32)) * u.powi(-(n as i32));
    // Δβ = A λ^{−n−2} u^{−n−2} (2n² − (2n² + 4n) s)
    let lap = amp * lambda.powi(-(n as i32) - 2) * u.powi(-(n as i32) - 2) * (2.0 * nf * nf - (2.0 * nf * nf + 4.0 * nf) * s);
    let mut grad = [0.0; 4];
    let g = -2.0 * nf * amp * lambda.powi(-(n as i32) - 2) * u.powi(-(n as i32) - 1);
    for i in 0..n {
        grad[i] = g * (x[i] - c[i]);
    }
    (value, lap, grad)
}

fn mirror(c: &[f64]) -> Vec<f64> {
    let mut m = c.to_vec();
    m[0] = -m[0];
    m
}

/// A checkable analytic statement about a generated field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Claim {
    /// `Δe` equals this constant everywhere.
    LaplacianEquals(f64),
    /// `Δe ≤ 0` everywhere.
    Subharmonic,
    /// `∂e/∂ν` equals this constant on the flat boundary.
    NormalDerivativeEquals(f64),
    /// `∂e/∂ν ≤ 0` on the flat boundary.
    NeumannNonpositive,
    /// `∂e/∂ν = 0` on the flat boundary by reflection symmetry.
    NeumannZero,
    /// Mass over `ℝⁿ` (bubbles) or over the half space (reflected bubbles).
    Mass(f64),
    /// `sup e` attained at this point.
    SupAt { point: Vec<f64>, value: f64 },
}

impl GeneratorSpec {
    /// Same generator with every bubble scale replaced by `lambda`.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        match self {
            Self::Bubble { center, amplitude, .. } => Self::Bubble {
                center: center.clone(),
                lambda,
                amplitude: *amplitude,
            },
            Self::ReflectedBubble { center, amplitude, .. } => Self::ReflectedBubble {
                center: center.clone(),
                lambda,
                amplitude: *amplitude,
            },
            Self::Sum { terms } => Self::Sum {
                terms: terms.iter().map(|t| t.with_lambda(lambda)).collect(),
            },
            other => other.clone(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Quadratic { center, amplitude, offset } => offset + amplitude * dist2(x, center),
            Self::HarmonicProduct {
                amplitude,
                frequency,
                offset,
                cos_axis,
                cosh_axis,
            } => offset + amplitude * (frequency * x[*cos_axis]).cos() * (frequency * x[*cosh_axis]).cosh(),
            Self::PoissonPeak { center, pole, amplitude } => {
                let n = x.len() as i32;
                amplitude * (dist2(pole, center) - dist2(x, center)) / dist2(x, pole).sqrt().powi(n)
            }
            Self::Bubble { center, lambda, amplitude } => bubble_parts(x, center, *lambda, *amplitude).0,
            Self::ReflectedBubble { center, lambda, amplitude } => {
                bubble_parts(x, center, *lambda, *amplitude).0 + bubble_parts(x, &mirror(center), *lambda, *amplitude).0
            }
            Self::LinearX0 { slope, offset } => offset + slope * x[0],
            Self::Sum { terms } => terms.iter().map(|t| t.value(x)).sum(),
        }
    }

    /// Positive-definite Laplacian `−Σ ∂ᵢ²e`.
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        match self {
            Self::Constant { .. } | Self::HarmonicProduct { .. } | Self::PoissonPeak { .. } | Self::LinearX0 { .. } => 0.0,
            Self::Quadratic { amplitude, .. } => -2.0 * x.len() as f64 * amplitude,
            Self::Bubble { center, lambda, amplitude } => bubble_parts(x, center, *lambda, *amplitude).1,
            Self::ReflectedBubble { center, lambda, amplitude } => {
                bubble_parts(x, center, *lambda, *amplitude).1 + bubble_parts(x, &mirror(center), *lambda, *amplitude).1
            }
            Self::Sum { terms } => terms.iter().map(|t| t.laplacian(x)).sum(),
        }
    }

    /// `∂e/∂x₀`.
    pub fn d0(&self, x: &[f64]) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Quadratic { center, amplitude, .. } => 2.0 * amplitude * (x[0] - center[0]),
            Self::HarmonicProduct {
                amplitude,
                frequency: w,
                cos_axis,
                cosh_axis,
                ..
            } => {
                let (i, j) = (*cos_axis, *cosh_axis);
                let mut d = 0.0;
                if i == 0 {
                    d -= amplitude * w * (w * x[i]).sin() * (w * x[j]).cosh();
                }
                if j == 0 {
                    d += amplitude * w * (w * x[i]).cos() * (w * x[j]).sinh();
                }
                d
            }
            Self::PoissonPeak { center, pole, amplitude } => {
                let n = x.len() as f64;
                let num = dist2(pole, center) - dist2(x, center);
                let d2 = dist2(x, pole);
                let dnum = -2.0 * (x[0] - center[0]);
                let dden = -n * (x[0] - pole[0]) / d2;
                amplitude * (dnum + num * dden) / d2.powf(n / 2.0)
            }
            Self::Bubble { center, lambda, amplitude } => bubble_parts(x, center, *lambda, *amplitude).2[0],
            Self::ReflectedBubble { center, lambda, amplitude } => {
                bubble_parts(x, center, *lambda, *amplitude).2[0] + bubble_parts(x, &mirror(center), *lambda, *amplitude).2[0]
            }
            Self::LinearX0 { slope, .. } => *slope,
            Self::Sum { terms } => terms.iter().map(|t| t.d0(x)).sum(),
        }
    }

    /// Analytic claims, for dimension `n`.
    pub fn claims(&self, n: usize) -> Vec<Claim> {
        let mut out = Vec::new();
        match self {
            Self::Constant { .. } => {
                out.push(Claim::LaplacianEquals(0.0));
                out.push(Claim::NeumannZero);
            }
            Self::Quadratic { center, amplitude, .. } => {
                out.push(Claim::LaplacianEquals(-2.0 * n as f64 * amplitude));
                // ∂ν = −∂₀ = 2A c₀ at x₀ = 0
                out.push(Claim::NormalDerivativeEquals(2.0 * amplitude * center[0]));
            }
            Self::HarmonicProduct { .. } => {
                // sin(0) = sinh(0) = 0, whichever axis is normal
                out.push(Claim::LaplacianEquals(0.0));
                out.push(Claim::NeumannZero);
            }
            Self::PoissonPeak { center, pole, .. } => {
                out.push(Claim::LaplacianEquals(0.0));
                if center[0] == 0.0 && pole[0] == 0.0 {
                    out.push(Claim::NeumannZero);
                }
            }
            Self::Bubble { center, lambda, amplitude } => {
                out.push(Claim::Mass(amplitude * bubble_unit_mass(n)));
                out.push(Claim::SupAt {
                    point: center.clone(),
                    value: amplitude * lambda.powi(-(n as i32)),
                });
                if center[0] == 0.0 {
                    out.push(Claim::NeumannZero);
                } else if center[0] > 0.0 {
                    out.push(Claim::NeumannNonpositive);
                }
            }
            Self::ReflectedBubble { amplitude, .. } => {
                out.push(Claim::Mass(amplitude * bubble_unit_mass(n)));
                out.push(Claim::NeumannZero);
            }
            Self::LinearX0 { slope, .. } => {
                out.push(Claim::LaplacianEquals(0.0));
                out.push(Claim::NormalDerivativeEquals(-slope));
            }
            Self::Sum { terms } => {
                let parts: Vec<Vec<Claim>> = terms.iter().map(|t| t.claims(n)).collect();
                let lap: Option<f64> = parts.iter().try_fold(0.0, |acc, cl| {
                    cl.iter().find_map(|c| match c {
                        Claim::LaplacianEquals(v) => Some(acc + v),
                        _ => None,
                    })
                });
                if let Some(v) = lap {
                    out.push(Claim::LaplacianEquals(v));
                }
                let nd: Option<f64> = parts.iter().try_fold(0.0, |acc, cl| {
                    cl.iter().find_map(|c| match c {
                        Claim::NormalDerivativeEquals(v) => Some(acc + v),
                        Claim::NeumannZero => Some(acc),
                        _ => None,
                    })
                });
                if let Some(v) = nd {
                    out.push(Claim::NormalDerivativeEquals(v));
                }
            }
        }
        let mut derived = Vec::new();
        for c in &out {
            match c {
                Claim::LaplacianEquals(v) if *v <= 0.0 => derived.push(Claim::Subharmonic),
                Claim::NormalDerivativeEquals(v) if *v <= 0.0 => derived.push(Claim::NeumannNonpositive),
                Claim::NeumannZero => derived.push(Claim::NeumannNonpositive),
                _ => {}
            }
        }
        for d in derived {
            if !out.contains(&d) {
                out.push(d);
            }
        }
        out
    }

    fn centers(&self) -> Vec<(&'static str, &[f64])> {
        match self {
            Self::Quadratic { center, .. } => vec![("quadratic center", center)],
            Self::PoissonPeak { center, pole, .. } => vec![("poisson center", center), ("poisson pole", pole)],
            Self::Bubble { center, .. } | Self::ReflectedBubble { center, .. } => vec![("bubble center", center)],
            Self::Sum { terms } => terms.iter().flat_map(|t| t.centers()).collect(),
            _ => vec![],
        }
    }

    fn validate(&self, domain: &Domain) -> Result<()> {
        let n = domain.dim();
        for (name, c) in self.centers() {
            if c.len() != n {
                return Err(Error::SpecOutOfDomain(format!("{name} has {} coordinates, domain has {n}", c.len())));
            }
        }
        let bad = |msg: String| Err(Error::SpecOutOfDomain(msg));
        match self {
            Self::Bubble { center, lambda, amplitude } | Self::ReflectedBubble { center, lambda, amplitude } => {
                if !(*lambda > 0.0 && amplitude.is_finite() && *amplitude >= 0.0) {
                    return bad(format!("bubble needs λ > 0 and amplitude ≥ 0, got λ = {lambda}, A = {amplitude}"));
                }
                if !domain.contains(center) {
                    return bad(format!("bubble center {center:?} lies outside the domain"));
                }
                if matches!(self, Self::ReflectedBubble { .. }) && center[0] < 0.0 {
                    return bad("reflected bubble center below x₀ = 0".into());
                }
            }
            Self::PoissonPeak { center, pole, .. } => {
                let reach = dist2(pole, center).sqrt();
                let far = dist2(domain.center(), center).sqrt() + domain.radius() + 2.0 * domain.spacing();
                if far >= reach {
                    return bad(format!("Poisson pole {pole:?} is not outside the domain's reach ({far} ≥ {reach})"));
                }
            }
            Self::HarmonicProduct { cos_axis, cosh_axis, .. } => {
                if *cos_axis >= n || *cosh_axis >= n || cos_axis == cosh_axis {
                    return bad(format!("harmonic product axes ({cos_axis}, {cosh_axis}) invalid in dimension {n}"));
                }
            }
            Self::Sum { terms } => {
                for t in terms {
                    t.validate(domain)?;
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// A sampled field with the analytic claims of its generator.
#[derive(Clone, Debug)]
pub struct Generated {
    pub spec: GeneratorSpec,
    pub field: ScalarField,
    pub claims: Vec<Claim>,
}

/// Samples `spec` at the in-mask nodes of `domain` as a density.
pub fn gen(spec: &GeneratorSpec, domain: &Arc<Domain>) -> Result<Generated> {
    spec.validate(domain)?;
    let field = ScalarField::density(domain, |x| spec.value(x)).map_err(|e| match e {
        Error::InvalidFieldValue { node, value } => Error::SpecOutOfDomain(format!(
            "generator takes the value {value} at {:?}",
            domain.point(node)
        )),
        other => other,
    })?;
    Ok(Generated {
        spec: spec.clone(),
        claims: spec.claims(domain.dim()),
        field,
    })
}

/// Outcome of measuring one claim on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim: Claim,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Measures every claim with the discrete operators.
///
/// Equalities are held to `K` times the stencil's truncation error on the
/// closed form (an `O(h²)` quantity); sign claims use `K h · max(1, sup e)`;
/// mass claims compare with the in-domain fraction of the radial mass
/// function within `K h`.
pub fn check_claims(g: &Generated, tol: Tolerance) -> Result<Vec<ClaimCheck>> {
    let domain = g.field.domain();
    let h = domain.spacing();
    let n = domain.dim();
    let half = domain.kind() == DomainKind::HalfBall;
    let lap = laplacian(&g.field);
    let nd = if half && domain.count(crate::grid::NodeClass::FlatBoundary) > 0 {
        Some(normal_derivative(&g.field)?)
    } else {
        None
    };
    let scale = g.field.sup().max(1.0);
    let spec = &g.spec;
    // Truncation error of the stencils on the closed form, by comparing step
    // h with step h/2 (second order, so the h-error is 4/3 of the gap).
    let lap_at = |x: &[f64], step: f64| -> f64 {
        let mut p = x.to_vec();
        let mut acc = 0.0;
        for i in 0..n {
            p[i] = x[i] + step;
            acc += spec.value(&p);
            p[i] = x[i] - step;
            acc += spec.value(&p);
            p[i] = x[i];
            acc -= 2.0 * spec.value(x);
        }
        -acc / (step * step)
    };
    let nd_at = |x: &[f64], step: f64| -> f64 {
        let mut p = x.to_vec();
        let e0 = spec.value(x);
        p[0] = step;
        let e1 = spec.value(&p);
        p[0] = 2.0 * step;
        let e2 = spec.value(&p);
        (-3.0 * e0 + 4.0 * e1 - e2) / (2.0 * step)
    };
    let floor = 1e-6 * h * h * scale;
    let lap_check = |v: f64| -> (f64, f64) {
        let mut err: f64 = 0.0;
        let mut tau: f64 = 0.0;
        for (node, d) in lap.iter() {
            let x = domain.coords(node);
            let x = &x[..n];
            err = err.max((d - v).abs());
            tau = tau.max((lap_at(x, h) - lap_at(x, 0.5 * h)).abs() * 4.0 / 3.0);
        }
        (err, tol.k * tau + floor)
    };
    let nd_check = |nd: &crate::calculus::NormalDerivative, v: f64| -> (f64, f64) {
        let mut err: f64 = 0.0;
        let mut tau: f64 = 0.0;
        for &(node, d) in &nd.values {
            let x = domain.coords(node);
            let x = &x[..n];
            err = err.max((d - v).abs());
            tau = tau.max((nd_at(x, h) - nd_at(x, 0.5 * h)).abs() * 4.0 / 3.0);
        }
        (err, tol.k * tau + floor)
    };
    let mut out = Vec::new();
    for claim in &g.claims {
        let (measured, tolerance, passed) = match claim {
            Claim::LaplacianEquals(v) => {
                let (err, t) = lap_check(*v);
                (err, t, err <= t)
            }
            Claim::Subharmonic => {
                let m = lap.max().map_or(f64::NEG_INFINITY, |(_, v)| v);
                let t = tol.at(h) * scale;
                (m, t, m <= t)
            }
            Claim::NormalDerivativeEquals(v) => match &nd {
                Some(nd) => {
                    let (err, t) = nd_check(nd, *v);
                    (err, t, err <= t)
                }
                None => continue,
            },
            Claim::NeumannZero => match &nd {
                Some(nd) => {
                    let (err, t) = nd_check(nd, 0.0);
                    (err, t, err <= t)
                }
                None => continue,
            },
            Claim::NeumannNonpositive => match &nd {
                Some(nd) => {
                    let m = nd.max().map_or(f64::NEG_INFINITY, |(_, v)| v);
                    let t = tol.at(h) * scale;
                    (m, t, m <= t)
                }
                None => continue,
            },
            Claim::Mass(m) => {
                let (center, lambda, reflected) = match &g.spec {
                    GeneratorSpec::Bubble { center, lambda, .. } => (center, *lambda, false),
                    GeneratorSpec::ReflectedBubble { center, lambda, .. } => (center, *lambda, true),
                    _ => continue,
                };
                if reflected && center[0] != 0.0 {
                    continue;
                }
                let dc = dist2(center, domain.center()).sqrt();
                if dc > 0.0 || (half && domain.center_height() > 0.0) || (!half && reflected) {
                    continue;
                }
                let frac = bubble_mass_fraction(n, domain.radius() / lambda);
                let expect = m * frac;
                let got = integrate(&g.field, None)?;
                let err = (got - expect).abs() / expect;
                let t = tol.at(h);
                (err, t, err <= t)
            }
            Claim::SupAt { point, value } => match domain.node_at(point) {
                Some(node) => {
                    let err = (g.field.value(node) - value).abs().max(g.field.sup() - value);
                    let t = 1e-12 * value.abs().max(1.0);
                    (err, t, err <= t)
                }
                None => continue,
            },
        };
        out.push(ClaimCheck {
            claim: claim.clone(),
            measured,
            tolerance,
            passed,
        });
    }
    Ok(out)
}

/// `e_i = background + Σ templates(λ_i)`, with the energy bound `E = max ∫e_i`
/// and the fitted nonlinearities `a = max_i a_i`, `b = max_i b_i`
/// (`A₀ = A₁ = B₀ = B₁ = 0`).
pub fn gen_sequence(
    templates: &[GeneratorSpec],
    schedule: &[f64],
    background: &GeneratorSpec,
    domain: &Arc<Domain>,
) -> Result<DensitySequence> {
    let h = domain.spacing();
    for (i, &l) in schedule.iter().enumerate() {
        let decreasing = i == 0 || l < schedule[i - 1];
        if !(l >= 4.0 * h) || !decreasing {
            return Err(Error::UnresolvableScale { lambda: l, limit: 4.0 * h });
        }
    }
    let mut fields = Vec::with_capacity(schedule.len());
    let mut fits = Vec::with_capacity(schedule.len());
    for &l in schedule {
        let mut terms = vec![background.clone()];
        terms.extend(templates.iter().map(|t| t.with_lambda(l)));
        let g = gen(&GeneratorSpec::Sum { terms }, domain)?;
        let a = fit_nonlinearity(&g.field, 0.0, 0.0).unwrap_or(0.0);
        let b = if domain.kind() == DomainKind::HalfBall {
            fit_boundary_nonlinearity(&g.field, 0.0, 0.0).unwrap_or(0.0)
        } else {
            0.0
        };
        fits.push((a, b));
        fields.push(g.field);
    }
    let energies = fields.iter().map(|f| integrate(f, None)).collect::<Result<Vec<_>>>()?;
    let energy_bound = energies.iter().cloned().fold(0.0, f64::max);
    let params = BoundParams {
        a: fits.iter().map(|f| f.0).fold(0.0, f64::max),
        b: fits.iter().map(|f| f.1).fold(0.0, f64::max),
        ..BoundParams::zero(domain.dim())
    };
    let mut seq = DensitySequence::new(fields, energy_bound, params)?;
    seq.fitted = fits;
    Ok(seq)
}

/// Up to `max_count` (at least one) bubble centers on the circle of radius
/// `ring` about the domain center in the `(x₀, x₁)` plane, with jittered
/// angles, snapped to grid nodes. Deterministic in `seed`.
pub fn seeded_bubble_centers(seed: u64, max_count: usize, ring: f64, domain: &Domain) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(1..=max_count.max(1));
    let phase: f64 = rng.random_range(0.0..2.0 * PI);
    let c = domain.center();
    (0..count)
        .map(|k| {
            let jitter: f64 = rng.random_range(-0.2..0.2);
            let t = phase + 2.0 * PI * (k as f64 + jitter) / count as f64;
            let mut x = c.to_vec();
            x[0] += ring * t.cos();
            x[1] += ring * t.sin();
            let node = domain.lattice().nearest(&x).expect("ring lies inside the box");
            domain.point(node)
        })
        .collect()
}

/// Twelve subharmonic densities on a ball domain.
pub fn interior_family(domain: &Domain) -> Vec<GeneratorSpec> {
    let n = domain.dim();
    let c = domain.center().to_vec();
    let r = domain.radius();
    let shifted = |axis: usize, by: f64| {
        let mut p = c.clone();
        p[axis] += by;
        p
    };
    let reach = dist2(&c, &vec![0.0; n]).sqrt() + r;
    let product = |w: f64| GeneratorSpec::HarmonicProduct {
        amplitude: 1.0,
        frequency: w,
        offset: 1.25 * (w * reach).cosh(),
        cos_axis: 0,
        cosh_axis: 1,
    };
    vec![
        GeneratorSpec::Constant { value: 1.0 },
        GeneratorSpec::Constant { value: 3.5 },
        GeneratorSpec::Quadratic {
            center: c.clone(),
            amplitude: 1.0,
            offset: 0.0,
        },
        GeneratorSpec::Quadratic {
            center: shifted(0, 0.3 * r),
            amplitude: 2.0,
            offset: 0.2,
        },
        GeneratorSpec::Quadratic {
            center: shifted(1, 1.5 * r),
            amplitude: 0.5,
            offset: 0.0,
        },
        product(1.0 / r),
        product(2.0 / r),
        GeneratorSpec::PoissonPeak {
            center: c.clone(),
            pole: shifted(0, 1.5 * r),
            amplitude: 1.0,
        },
        GeneratorSpec::PoissonPeak {
            center: c.clone(),
            pole: shifted(1, 1.35 * r),
            amplitude: 1.0,
        },
        GeneratorSpec::LinearX0 {
            slope: 1.0,
            offset: reach,
        },
        GeneratorSpec::Sum {
            terms: vec![
                GeneratorSpec::Quadratic {
                    center: shifted(1, -0.2 * r),
                    amplitude: 1.0,
                    offset: 0.0,
                },
                GeneratorSpec::PoissonPeak {
                    center: c.clone(),
                    pole: shifted(0, -1.6 * r),
                    amplitude: 0.5,
                },
            ],
        },
        GeneratorSpec::Sum {
            terms: vec![
                GeneratorSpec::Constant { value: 0.5 },
                product(1.5 / r),
                GeneratorSpec::Quadratic {
                    center: shifted(0, -0.4 * r),
                    amplitude: 0.3,
                    offset: 0.0,
                },
            ],
        },
    ]
}

/// Eight Neumann-subharmonic densities (`Δe ≤ 0`, `∂e/∂ν ≤ 0`) on a
/// half-ball domain.
pub fn boundary_family(domain: &Domain) -> Vec<GeneratorSpec> {
    let n = domain.dim();
    let y = domain.center().to_vec();
    let r = domain.radius();
    let mut foot = y.clone();
    foot[0] = 0.0;
    let at = |d0: f64, d1: f64| {
        let mut p = foot.clone();
        p[0] += d0;
        p[1] += d1;
        p
    };
    let reach = dist2(&y, &vec![0.0; n]).sqrt() + r;
    let product = |w: f64| GeneratorSpec::HarmonicProduct {
        amplitude: 1.0,
        frequency: w,
        offset: 1.25 * (w * reach).cosh(),
        cos_axis: 0,
        cosh_axis: 1,
    };
    vec![
        GeneratorSpec::Constant { value: 2.0 },
        GeneratorSpec::Quadratic {
            center: foot.clone(),
            amplitude: 1.0,
            offset: 0.0,
        },
        GeneratorSpec::Quadratic {
            center: at(-0.3 * r, 0.2 * r),
            amplitude: 1.0,
            offset: 0.1,
        },
        GeneratorSpec::LinearX0 { slope: 1.0, offset: 0.5 },
        product(1.0 / r),
        GeneratorSpec::PoissonPeak {
            center: foot.clone(),
            pole: at(0.0, 1.5 * (r + y[0])),
            amplitude: 1.0,
        },
        GeneratorSpec::Sum {
            terms: vec![
                GeneratorSpec::LinearX0 { slope: 0.5, offset: 0.0 },
                GeneratorSpec::Quadratic {
                    center: foot.clone(),
                    amplitude: 1.0,
                    offset: 0.0,
                },
            ],
        },
        GeneratorSpec::Sum {
            terms: vec![GeneratorSpec::Constant { value: 0.25 }, product(2.0 / r)],
        },
    ]
}
