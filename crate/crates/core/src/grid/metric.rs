//! Riemannian metrics close to the Euclidean one.
//!
//! A metric is a smooth map from points to symmetric positive-definite
//! matrices. Only metrics with a small `W^{1,∞}` distance to the identity are
//! meaningful here; geodesic distances are evaluated to first order in `g - 1`.

use serde::{Deserialize, Serialize};

use super::MAX_DIM;

pub type Mat = [[f64; MAX_DIM]; MAX_DIM];

/// One monomial contribution `coefficient * Π x_k^{powers[k]}` to the entry
/// `(row, col)` (and its mirror) of `g - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub row: usize,
    pub col: usize,
    pub coefficient: f64,
    pub powers: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum MetricKind {
    Identity,
    /// `(1 + c) * 1`.
    Scaled { c: f64 },
    /// `(1 + Σ_k coefficients[k] x_k) * 1`.
    Conformal { coefficients: Vec<f64> },
    /// `1 + amplitude * sin(x_axis) * (E_row,col + E_col,row)`, diagonal entries
    /// counted once.
    SinEntry {
        amplitude: f64,
        row: usize,
        col: usize,
        axis: usize,
    },
    /// `1 + Σ terms`, each term symmetrised.
    Polynomial { terms: Vec<PolyTerm> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    #[serde(flatten)]
    pub kind: MetricKind,
    /// Intended bound on `‖g - 1‖_{W^{1,∞}}`.
    #[serde(default)]
    pub declared_deviation: f64,
}

impl Default for MetricSpec {
    fn default() -> Self {
        Self::identity()
    }
}

impl MetricSpec {
    pub fn identity() -> Self {
        Self {
            kind: MetricKind::Identity,
            declared_deviation: 0.0,
        }
    }

    pub fn new(kind: MetricKind, declared_deviation: f64) -> Self {
        Self {
            kind,
            declared_deviation,
        }
    }

    pub fn is_identity(&self) -> bool {
        match &self.kind {
            MetricKind::Identity => true,
            MetricKind::Scaled { c } => *c == 0.0,
            MetricKind::Conformal { coefficients } => coefficients.iter().all(|&c| c == 0.0),
            MetricKind::SinEntry { amplitude, .. } => *amplitude == 0.0,
            MetricKind::Polynomial { terms } => terms.iter().all(|t| t.coefficient == 0.0),
        }
    }

    /// True when `g` is diagonal everywhere, so the Laplace–Beltrami stencil
    /// needs no mixed differences.
    pub fn is_diagonal(&self) -> bool {
        match &self.kind {
            MetricKind::Identity | MetricKind::Scaled { .. } | MetricKind::Conformal { .. } => {
                true
            }
            MetricKind::SinEntry { row, col, .. } => row == col,
            MetricKind::Polynomial { terms } => terms
                .iter()
                .all(|t| t.row == t.col || t.coefficient == 0.0),
        }
    }

    /// Evaluates `g(x)` into the leading `dim × dim` block of `out`.
    pub fn eval(&self, dim: usize, x: &[f64], out: &mut Mat) {
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if i == j { 1.0 } else { 0.0 };
            }
        }
        match &self.kind {
            MetricKind::Identity => {}
            MetricKind::Scaled { c } => {
                for (i, row) in out.iter_mut().enumerate().take(dim) {
                    row[i] += c;
                }
            }
            MetricKind::Conformal { coefficients } => {
                let s: f64 = coefficients
                    .iter()
                    .zip(x.iter())
                    .take(dim)
                    .map(|(c, xi)| c * xi)
                    .sum();
                for (i, row) in out.iter_mut().enumerate().take(dim) {
                    row[i] += s;
                }
            }
            MetricKind::SinEntry {
                amplitude,
                row,
                col,
                axis,
            } => {
                let v = amplitude * x[*axis].sin();
                out[*row][*col] += v;
                if row != col {
                    out[*col][*row] += v;
                }
            }
            MetricKind::Polynomial { terms } => {
                for t in terms {
                    let mono: f64 = t
                        .powers
                        .iter()
                        .zip(x.iter())
                        .map(|(&p, &xi)| xi.powi(p as i32))
                        .product();
                    let v = t.coefficient * mono;
                    out[t.row][t.col] += v;
                    if t.row != t.col {
                        out[t.col][t.row] += v;
                    }
                }
            }
        }
    }

    /// Index bounds referenced by the preset, for validation against `dim`.
    pub(crate) fn max_index(&self) -> usize {
        match &self.kind {
            MetricKind::Identity | MetricKind::Scaled { .. } => 0,
            MetricKind::Conformal { coefficients } => coefficients.len().saturating_sub(1),
            MetricKind::SinEntry { row, col, axis, .. } => *row.max(col).max(axis),
            MetricKind::Polynomial { terms } => terms
                .iter()
                .map(|t| t.row.max(t.col).max(t.powers.len().saturating_sub(1)))
                .max()
                .unwrap_or(0),
        }
    }

    /// First-order geodesic distance between `a` and `b`: the Euclidean length
    /// of the chord corrected by `½ ∫₀¹ ûᵀ (g − 1) û dt` along it.
    pub fn distance(&self, dim: usize, a: &[f64], b: &[f64]) -> f64 {
        let mut d = [0.0; MAX_DIM];
        for i in 0..dim {
            d[i] = b[i] - a[i];
        }
        let len = d[..dim].iter().map(|v| v * v).sum::<f64>().sqrt();
        if self.is_identity() || len == 0.0 {
            return len;
        }
        let u: Vec<f64> = d[..dim].iter().map(|v| v / len).collect();
        // 3-point Gauss–Legendre on [0, 1]
        const NODES: [f64; 3] = [0.112_701_665_379_258_3, 0.5, 0.887_298_334_620_741_7];
        const WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
        let mut g = [[0.0; MAX_DIM]; MAX_DIM];
        let mut x = [0.0; MAX_DIM];
        let mut corr = 0.0;
        for (t, w) in NODES.iter().zip(WEIGHTS) {
            for i in 0..dim {
                x[i] = a[i] + t * d[i];
            }
            self.eval(dim, &x[..dim], &mut g);
            let mut q = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    q += u[i] * (g[i][j] - delta) * u[j];
                }
            }
            corr += w * q;
        }
        len * (1.0 + 0.5 * corr)
    }
}

/// Cholesky factor of the leading `dim × dim` block, or `None` when the block
/// is not symmetric positive definite.
pub fn cholesky(dim: usize, m: &Mat) -> Option<Mat> {
    let mut l = [[0.0; MAX_DIM]; MAX_DIM];
    for i in 0..dim {
        for j in 0..i {
            if (m[i][j] - m[j][i]).abs() > 1e-12 * (1.0 + m[i][j].abs()) {
                return None;
            }
        }
    }
    for j in 0..dim {
        let mut s = m[j][j];
        for k in 0..j {
            s -= l[j][k] * l[j][k];
        }
        if !(s > 0.0) {
            return None;
        }
        l[j][j] = s.sqrt();
        for i in j + 1..dim {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    Some(l)
}

/// `(√det g, √det g · g⁻¹)`, the coefficient pair of the divergence-form
/// Laplace–Beltrami operator. Assumes `g` is positive definite.
pub fn volume_and_flux_coefficients(dim: usize, g: &Mat) -> (f64, Mat) {
    let l = cholesky(dim, g).expect("metric validated positive definite");
    let sqrt_det: f64 = (0..dim).map(|i| l[i][i]).product();
    // invert via forward/back substitution on unit vectors
    let mut inv = [[0.0; MAX_DIM]; MAX_DIM];
    for c in 0..dim {
        let mut y = [0.0; MAX_DIM];
        for i in 0..dim {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i][k] * y[k];
            }
            y[i] = s / l[i][i];
        }
        let mut x = [0.0; MAX_DIM];
        for i in (0..dim).rev() {
            let mut s = y[i];
            for k in i + 1..dim {
                s -= l[k][i] * x[k];
            }
            x[i] = s / l[i][i];
        }
        for r in 0..dim {
            inv[r][c] = sqrt_det * x[r];
        }
    }
    (sqrt_det, inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_coefficients_of_scaled_metric() {
        let m = MetricSpec::new(MetricKind::Scaled { c: 0.21 }, 0.21);
        let mut g = [[0.0; MAX_DIM]; MAX_DIM];
        m.eval(3, &[0.1, 0.2, 0.3], &mut g);
        let (sd, a) = volume_and_flux_coefficients(3, &g);
        assert!((sd - 1.21f64.powf(1.5)).abs() < 1e-13);
        assert!((a[1][1] - 1.21f64.sqrt()).abs() < 1e-13);
        assert_eq!(a[0][1], 0.0);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut g = [[0.0; MAX_DIM]; MAX_DIM];
        g[0][0] = 1.0;
        g[1][1] = -0.5;
        assert!(cholesky(2, &g).is_none());
    }

    #[test]
    fn conformal_distance_first_order() {
        // along the x1 axis ûᵀ(g-1)û = c x1, so the correction is c * mean(x1) / 2
        let m = MetricSpec::new(
            MetricKind::Conformal {
                coefficients: vec![0.0, 0.01],
            },
            0.01,
        );
        let d = m.distance(2, &[0.0, 0.0], &[0.0, 0.8]);
        assert!((d - 0.8 * (1.0 + 0.5 * 0.01 * 0.4)).abs() < 1e-14);
    }
}
