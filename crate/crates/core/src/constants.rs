//! Closed-form constants of the mean value inequalities and the
//! quantization dichotomy.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of the hypotheses
/// `Δe ≤ A₀ + A₁e + a·e^{(n+2)/n}` and `∂e/∂ν ≤ B₀ + B₁e + b·e^{(n+1)/n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    pub n: usize,
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
}

impl BoundParams {
    /// All six constants zero.
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            a0: 0.0,
            a1: 0.0,
            a: 0.0,
            b0: 0.0,
            b1: 0.0,
            b: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.n) {
            return Err(Error::UnsupportedDimension(self.n));
        }
        for (name, value) in [
            ("A0", self.a0),
            ("A1", self.a1),
            ("a", self.a),
            ("B0", self.b0),
            ("B1", self.b1),
            ("b", self.b),
        ] {
            check_constant(name, value)?;
        }
        Ok(())
    }
}

fn check_constant(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConstant { name, value })
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConstant { name, value })
    }
}

/// Unique positive root of `a ε² + b ε = 1/(2C)`.
///
/// Evaluated as `2K / (b + √(b² + 4aK))` with `K = 1/(2C)`, which is the
/// textbook root without the cancellation at small `a`.
pub fn epsilon_ab(a: f64, b: f64, c: f64) -> Result<f64> {
    check_constant("a", a)?;
    check_constant("b", b)?;
    check_positive("C", c)?;
    if a == 0.0 && b == 0.0 {
        return Err(Error::BothNonlinearitiesZero);
    }
    let k = 0.5 / c;
    Ok(2.0 * k / (b + (b * b + 4.0 * a * k).sqrt()))
}

/// `μ(a,b) = ε(a,b)ⁿ / (2C)`, which is also the energy quantum ħ.
pub fn mu_ab(a: f64, b: f64, c: f64, n: usize) -> Result<f64> {
    if !(2..=4).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(epsilon_ab(a, b, c)?.powi(n as i32) / (2.0 * c))
}

/// Energy threshold of the interior inequality, `μ·a^{−n/2}`, read as
/// `μ(a, 0) = (2C)^{−(n+2)/2} a^{−n/2}`. `None` when `a = 0` (no threshold).
pub fn interior_threshold(a: f64, c: f64, n: usize) -> Result<Option<f64>> {
    if a == 0.0 {
        check_positive("C", c)?;
        return Ok(None);
    }
    mu_ab(a, 0.0, c, n).map(Some)
}

/// `C A₀ r² + C (A₁^{n/2} + r^{−n}) E`, valid for `0 < r ≤ 1`.
pub fn interior_rhs(params: &BoundParams, r: f64, energy: f64, c: f64) -> Result<f64> {
    params.validate()?;
    check_positive("C", c)?;
    check_constant("energy", energy)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::RadiusOutOfRange(r));
    }
    let n = params.n as f64;
    Ok(c * params.a0 * r * r + c * (params.a1.powf(n / 2.0) + r.powf(-n)) * energy)
}

/// `C A₀ r² + C B₀ r + C (A₁^{n/2} + B₁ⁿ + r^{−n}) E`, any `r > 0`.
pub fn boundary_rhs(params: &BoundParams, r: f64, energy: f64, c: f64) -> Result<f64> {
    params.validate()?;
    check_positive("C", c)?;
    check_constant("energy", energy)?;
    check_positive("r", r)?;
    let n = params.n as f64;
    Ok(c * params.a0 * r * r
        + c * params.b0 * r
        + c * (params.a1.powf(n / 2.0) + params.b1.powf(n) + r.powf(-n)) * energy)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `LHS > RHS`: the low-energy alternative is impossible.
    ConcentrationForced,
    BoundConsistent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dichotomy {
    pub lhs: f64,
    pub rhs: f64,
    pub branch: Branch,
}

/// Both sides of the rescaled estimate at blow-up rate `R`:
/// `R^{n/2}` against
/// `C A₀ R^{−(n+2)/2} + C B₀ R^{−(n+1)/2} + C ħ (A₁^{n/2} R^{−n/2} + B₁ⁿ R^{−n/2} + 1)`.
/// Ties are `BoundConsistent`.
pub fn quantization_dichotomy(big_r: f64, params: &BoundParams, hbar: f64, c: f64) -> Result<Dichotomy> {
    params.validate()?;
    check_positive("R", big_r)?;
    check_constant("hbar", hbar)?;
    check_positive("C", c)?;
    let n = params.n as f64;
    let lhs = big_r.powf(n / 2.0);
    let rhs = c * params.a0 * big_r.powf(-(n + 2.0) / 2.0)
        + c * params.b0 * big_r.powf(-(n + 1.0) / 2.0)
        + c * hbar
            * (params.a1.powf(n / 2.0) * big_r.powf(-n / 2.0)
                + params.b1.powf(n) * big_r.powf(-n / 2.0)
                + 1.0);
    let branch = if lhs > rhs {
        Branch::ConcentrationForced
    } else {
        Branch::BoundConsistent
    };
    Ok(Dichotomy { lhs, rhs, branch })
}

/// One of the two lower bounds on `t = ε′r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub condition: String,
    pub applies: bool,
    pub bound: f64,
    /// `t ≥ bound`; vacuous (true) when the condition does not apply.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonPrime {
    pub value: f64,
    /// Uncapped root `t` of `A₁t² + B₁t = 2^{−n−1}C^{−1}`.
    pub root: f64,
    pub capped: bool,
    pub certificates: Vec<Certificate>,
}

/// `ε′` from `A₁(ε′r)² + B₁ε′r = 2^{−n−1}C^{−1}`, capped at `ε`.
///
/// The certificates are the completed-square lower bounds on `t = ε′r`,
/// stated with the constant `C′ = 2^{n+1}C` for which the defining equation
/// reads `A₁t² + B₁t = C′^{−1}`.
pub fn epsilon_prime(params: &BoundParams, r: f64, c: f64, eps: f64) -> Result<EpsilonPrime> {
    params.validate()?;
    check_positive("r", r)?;
    check_positive("C", c)?;
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidConstant {
            name: "eps",
            value: eps,
        });
    }
    let (a1, b1) = (params.a1, params.b1);
    if a1 == 0.0 && b1 == 0.0 {
        return Err(Error::BothLinearTermsZero);
    }
    let c_eff = 2f64.powi(params.n as i32 + 1) * c;
    let k = 1.0 / c_eff;
    let root = 2.0 * k / (b1 + (b1 * b1 + 4.0 * a1 * k).sqrt());
    let capped = a1 * (eps * r).powi(2) + b1 * eps * r <= k;
    let value = if capped { eps } else { root / r };

    let sqrt2m1 = std::f64::consts::SQRT_2 - 1.0;
    let first_applies = b1 <= 2.0 * c_eff.powf(-0.5) * a1.sqrt();
    let first_bound = if a1 > 0.0 {
        sqrt2m1 * c_eff.powf(-0.5) / a1.sqrt()
    } else {
        f64::INFINITY
    };
    let second_applies = a1 <= c_eff / 4.0 * b1 * b1;
    let second_bound = if b1 > 0.0 {
        2.0 * sqrt2m1 / (c_eff * b1)
    } else {
        f64::INFINITY
    };
    let certificates = vec![
        Certificate {
            condition: "B1 <= 2 C'^(-1/2) sqrt(A1)".into(),
            applies: first_applies,
            bound: first_bound,
            holds: !first_applies || root >= first_bound * (1.0 - 1e-12),
        },
        Certificate {
            condition: "A1 <= C' B1^2 / 4".into(),
            applies: second_applies,
            bound: second_bound,
            holds: !second_applies || root >= second_bound * (1.0 - 1e-12),
        },
    ];
    Ok(EpsilonPrime {
        value,
        root,
        capped,
        certificates,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Configured,
    Measured,
    Derived,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Configured => "configured",
            Provenance::Measured => "measured",
            Provenance::Derived => "derived",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub value: f64,
    pub provenance: Provenance,
}

impl Entry {
    pub fn new(value: f64, provenance: Provenance) -> Self {
        Self { value, provenance }
    }
}

/// `(C, δ, ε(a,b), μ(a,b), ħ, ε′)` with where each came from.
///
/// `ħ` is always `μ(a,b)`; it cannot be set independently.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantLedger {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: Entry,
    pub delta: Entry,
    pub eps_ab: Option<Entry>,
    pub mu_ab: Option<Entry>,
    pub hbar: Option<Entry>,
    pub eps_prime: Option<Entry>,
}

pub const DEFAULT_DELTA: f64 = 0.05;

impl ConstantLedger {
    /// Derives `ε, μ, ħ` from `(a, b, C)`; they stay empty when `a = b = 0`.
    pub fn new(n: usize, a: f64, b: f64, c: Entry, delta: Entry) -> Result<Self> {
        check_positive("C", c.value)?;
        check_constant("delta", delta.value)?;
        let (eps_ab, mu_ab) = match epsilon_ab(a, b, c.value) {
            Ok(eps) => (
                Some(Entry::new(eps, Provenance::Derived)),
                Some(Entry::new(mu_ab(a, b, c.value, n)?, Provenance::Derived)),
            ),
            Err(Error::BothNonlinearitiesZero) => {
                if !(2..=4).contains(&n) {
                    return Err(Error::UnsupportedDimension(n));
                }
                (None, None)
            }
            Err(e) => return Err(e),
        };
        Ok(Self {
            n,
            a,
            b,
            c,
            delta,
            eps_ab,
            hbar: mu_ab,
            mu_ab,
            eps_prime: None,
        })
    }

    /// Ledger with a configured `C` and the default `δ`.
    pub fn configured(n: usize, a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(
            n,
            a,
            b,
            Entry::new(c, Provenance::Configured),
            Entry::new(DEFAULT_DELTA, Provenance::Configured),
        )
    }

    pub fn with_eps_prime(mut self, value: f64) -> Self {
        self.eps_prime = Some(Entry::new(value, Provenance::Derived));
        self
    }

    pub fn hbar(&self) -> Option<f64> {
        self.hbar.map(|e| e.value)
    }

    /// Flat `key = value  # provenance` block.
    pub fn to_key_value(&self) -> String {
        let mut out = format!("n = {}\na = {}\nb = {}\n", self.n, self.a, self.b);
        let mut line = |k: &str, e: Option<Entry>| match e {
            Some(e) => out.push_str(&format!("{k} = {}  # {}\n", e.value, e.provenance)),
            None => out.push_str(&format!("{k} = none\n")),
        };
        line("C", Some(self.c));
        line("delta", Some(self.delta));
        line("eps_ab", self.eps_ab);
        line("mu_ab", self.mu_ab);
        line("hbar", self.hbar);
        line("eps_prime", self.eps_prime);
        out
    }
}
