use std::sync::Arc;

use rayon::prelude::*;

use super::{Domain, MAX_DIM};
use crate::error::{Error, Result};

/// Node values on a domain. Outside nodes carry 0 and are never read.
///
/// Density fields (`density = true`) are nonnegative; comparison functions
/// reuse the container without the sign constraint.
#[derive(Clone, Debug)]
pub struct ScalarField {
    domain: Arc<Domain>,
    values: Vec<f64>,
    density: bool,
}

impl ScalarField {
    /// Samples `f` at every in-mask node.
    pub fn from_fn<F>(domain: &Arc<Domain>, density: bool, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let n = domain.dim();
        let values: Vec<f64> = (0..domain.lattice().len())
            .into_par_iter()
            .map(|node| {
                if domain.is_in_mask(node) {
                    let x = domain.coords(node);
                    f(&x[..n])
                } else {
                    0.0
                }
            })
            .collect();
        Self::from_box_values(domain, values, density)
    }

    /// Density field sampled from `f`.
    pub fn density<F>(domain: &Arc<Domain>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        Self::from_fn(domain, true, f)
    }

    /// Builds a field from one value per bounding-box node.
    pub fn from_box_values(domain: &Arc<Domain>, mut values: Vec<f64>, density: bool) -> Result<Self> {
        if values.len() != domain.lattice().len() {
            return Err(Error::Config(format!(
                "expected {} box values, got {}",
                domain.lattice().len(),
                values.len()
            )));
        }
        for (node, v) in values.iter_mut().enumerate() {
            if !domain.is_in_mask(node) {
                *v = 0.0;
                continue;
            }
            if !v.is_finite() || (density && *v < 0.0) {
                return Err(Error::InvalidFieldValue { node, value: *v });
            }
        }
        Ok(Self {
            domain: Arc::clone(domain),
            values,
            density,
        })
    }

    /// Builds a field from in-mask values given in lexicographic node order.
    pub fn from_mask_values(domain: &Arc<Domain>, mask_values: &[f64], density: bool) -> Result<Self> {
        if mask_values.len() != domain.in_mask_count() {
            return Err(Error::Config(format!(
                "expected {} in-mask values, got {}",
                domain.in_mask_count(),
                mask_values.len()
            )));
        }
        let mut values = vec![0.0; domain.lattice().len()];
        for (node, &v) in domain.nodes().zip(mask_values) {
            values[node] = v;
        }
        Self::from_box_values(domain, values, density)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn is_density(&self) -> bool {
        self.density
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn mask_values(&self) -> Vec<f64> {
        self.domain.nodes().map(|i| self.values[i]).collect()
    }

    /// Value at the in-mask node located at `x`.
    pub fn value_at(&self, x: &[f64]) -> Result<f64> {
        self.domain
            .node_at(x)
            .map(|node| self.values[node])
            .ok_or_else(|| Error::NotANode { point: x.to_vec() })
    }

    pub fn center_value(&self) -> Result<f64> {
        self.value_at(self.domain.center())
    }

    /// Largest in-mask value; ties go to the lexicographically smallest node.
    pub fn argmax(&self) -> Option<(usize, f64)> {
        self.argmax_where(|_| true)
    }

    pub fn argmax_where(&self, keep: impl Fn(usize) -> bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for node in self.domain.nodes() {
            if !keep(node) {
                continue;
            }
            let v = self.values[node];
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((node, v));
            }
        }
        best
    }

    pub fn sup(&self) -> f64 {
        self.argmax().map_or(0.0, |(_, v)| v)
    }

    /// Multilinear interpolation; `None` if a corner with nonzero weight is
    /// outside the mask.
    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        let lat = self.domain.lattice();
        let n = lat.dim();
        let (k, t) = lat.locate(x);
        let mut acc = 0.0;
        let mut corner = [0i64; MAX_DIM];
        for mask in 0..(1usize << n) {
            let mut w = 1.0;
            for i in 0..n {
                let up = (mask >> i) & 1 == 1;
                w *= if up { t[i] } else { 1.0 - t[i] };
                corner[i] = k[i] + up as i64;
            }
            if w == 0.0 {
                continue;
            }
            let node = lat.node_from_offsets(&corner[..n])?;
            if !self.domain.is_in_mask(node) {
                return None;
            }
            acc += w * self.values[node];
        }
        Some(acc)
    }

    /// Pointwise combination with another field on the same domain.
    pub fn zip_with(&self, other: &ScalarField, density: bool, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !Arc::ptr_eq(&self.domain, &other.domain) {
            return Err(Error::DomainMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_box_values(&self.domain, values, density)
    }

    /// Adds `f(x)` at every in-mask node.
    pub fn add_fn(&self, density: bool, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        let n = self.domain.dim();
        let values: Vec<f64> = self
            .values
            .par_iter()
            .enumerate()
            .map(|(node, &v)| {
                if self.domain.is_in_mask(node) {
                    let x = self.domain.coords(node);
                    v + f(&x[..n])
                } else {
                    0.0
                }
            })
            .collect();
        Self::from_box_values(&self.domain, values, density)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_ball_domain, make_half_ball_domain, MetricSpec};

    #[test]
    fn density_rejects_negative_values() {
        let d = Arc::new(make_ball_domain(&[0.0, 0.0], 1.0, 0.1, 2, MetricSpec::identity()).unwrap());
        assert!(ScalarField::density(&d, |x| x[0]).is_err());
        assert!(ScalarField::from_fn(&d, false, |x| x[0]).is_ok());
        assert!(ScalarField::density(&d, |_| f64::NAN).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_multilinear() {
        let d = Arc::new(make_half_ball_domain(&[0.0, 0.0, 0.0], 1.0, 0.0625, 3).unwrap());
        let e = ScalarField::from_fn(&d, false, |x| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[2]).unwrap();
        let p = [0.013, 0.21, -0.37];
        let v = e.interpolate(&p).unwrap();
        assert!((v - (1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[2])).abs() < 1e-13);
        // on the flat plane the lower layer is never touched
        assert!(e.interpolate(&[0.0, 0.1, 0.1]).is_some());
        assert!(e.interpolate(&[0.0, 0.999, 0.0]).is_none());
    }

    #[test]
    fn argmax_ties_pick_first_node() {
        let d = Arc::new(make_ball_domain(&[0.0, 0.0], 1.0, 0.1, 2, MetricSpec::identity()).unwrap());
        let e = ScalarField::density(&d, |_| 2.0).unwrap();
        let (node, v) = e.argmax().unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(node, d.nodes().next().unwrap());
    }
}
