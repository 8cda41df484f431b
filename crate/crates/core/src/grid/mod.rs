//! Masked uniform Cartesian grids over balls and clipped half-balls.
//!
//! Grids are vertex-centered. A ball grid is anchored at its center; a
//! half-ball grid is anchored at `(0, ȳ)` so that the flat boundary `x₀ = 0`
//! is a grid plane. Nodes are stored in a bounding box in lexicographic
//! order (last axis fastest) and classified as interior, flat boundary, cap
//! boundary or outside.

mod field;
mod metric;

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use field::ScalarField;
pub use metric::{
    cholesky, volume_and_flux_coefficients, Mat, MetricKind, MetricSpec, PolyTerm,
};

pub const MAX_DIM: usize = 4;

/// Relative slack when comparing lengths that should be exact multiples.
const GRID_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Ball,
    HalfBall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeClass {
    Interior,
    FlatBoundary,
    CapBoundary,
    Outside,
}

impl NodeClass {
    pub fn in_mask(self) -> bool {
        !matches!(self, NodeClass::Outside)
    }

    pub(crate) fn code(self) -> char {
        match self {
            NodeClass::Interior => 'I',
            NodeClass::FlatBoundary => 'F',
            NodeClass::CapBoundary => 'C',
            NodeClass::Outside => 'O',
        }
    }

    pub(crate) fn from_code(c: char) -> Option<Self> {
        Some(match c {
            'I' => NodeClass::Interior,
            'F' => NodeClass::FlatBoundary,
            'C' => NodeClass::CapBoundary,
            'O' => NodeClass::Outside,
            _ => return None,
        })
    }
}

/// Serializable description of a domain, as read from configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub center: Vec<f64>,
    pub radius: f64,
    pub spacing: f64,
    pub dimension: usize,
    #[serde(default)]
    pub metric: MetricSpec,
}

impl DomainSpec {
    pub fn build(&self) -> Result<Arc<Domain>> {
        let d = match self.kind {
            DomainKind::Ball => make_ball_domain(
                &self.center,
                self.radius,
                self.spacing,
                self.dimension,
                self.metric.clone(),
            )?,
            DomainKind::HalfBall => {
                if !self.metric.is_identity() {
                    return Err(Error::Config(
                        "half-ball domains carry the Euclidean metric only".into(),
                    ));
                }
                make_half_ball_domain(&self.center, self.radius, self.spacing, self.dimension)?
            }
        };
        Ok(Arc::new(d))
    }
}

/// Uniform lattice `anchor + (lo + k) h`, `0 ≤ k < shape`, per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    dim: usize,
    spacing: f64,
    anchor: [f64; MAX_DIM],
    lo: [i64; MAX_DIM],
    shape: [usize; MAX_DIM],
    strides: [usize; MAX_DIM],
    len: usize,
}

impl Lattice {
    fn new(dim: usize, spacing: f64, anchor: [f64; MAX_DIM], lo: [i64; MAX_DIM], hi: [i64; MAX_DIM]) -> Self {
        let mut shape = [1usize; MAX_DIM];
        for i in 0..dim {
            shape[i] = (hi[i] - lo[i] + 1) as usize;
        }
        let mut strides = [0usize; MAX_DIM];
        let mut s = 1;
        for i in (0..dim).rev() {
            strides[i] = s;
            s *= shape[i];
        }
        Self {
            dim,
            spacing,
            anchor,
            lo,
            shape,
            strides,
            len: s,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim]
    }

    /// Integer lattice offsets of `node` relative to the anchor.
    pub fn offsets(&self, node: usize) -> [i64; MAX_DIM] {
        let mut k = [0i64; MAX_DIM];
        let mut rem = node;
        for i in 0..self.dim {
            let q = rem / self.strides[i];
            rem -= q * self.strides[i];
            k[i] = self.lo[i] + q as i64;
        }
        k
    }

    pub fn node_from_offsets(&self, k: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for i in 0..self.dim {
            let q = k[i] - self.lo[i];
            if q < 0 || q as usize >= self.shape[i] {
                return None;
            }
            idx += q as usize * self.strides[i];
        }
        Some(idx)
    }

    pub fn coords(&self, node: usize) -> [f64; MAX_DIM] {
        let k = self.offsets(node);
        let mut x = [0.0; MAX_DIM];
        for i in 0..self.dim {
            x[i] = self.anchor[i] + k[i] as f64 * self.spacing;
        }
        x
    }

    pub fn step(&self, node: usize, axis: usize, delta: i64) -> Option<usize> {
        let mut k = self.offsets(node);
        k[axis] += delta;
        self.node_from_offsets(&k[..self.dim])
    }

    /// Lower-corner offsets and fractional position of `x` in its cell.
    pub fn locate(&self, x: &[f64]) -> ([i64; MAX_DIM], [f64; MAX_DIM]) {
        let mut k = [0i64; MAX_DIM];
        let mut t = [0.0; MAX_DIM];
        for i in 0..self.dim {
            let s = (x[i] - self.anchor[i]) / self.spacing;
            let mut f = s.floor();
            let mut frac = s - f;
            if frac > 1.0 - GRID_EPS {
                f += 1.0;
                frac = 0.0;
            } else if frac < GRID_EPS {
                frac = 0.0;
            }
            k[i] = f as i64;
            t[i] = frac;
        }
        (k, t)
    }

    /// Nearest lattice node to `x`, if it lies in the box.
    pub fn nearest(&self, x: &[f64]) -> Option<usize> {
        let mut k = [0i64; MAX_DIM];
        for i in 0..self.dim {
            k[i] = ((x[i] - self.anchor[i]) / self.spacing).round() as i64;
        }
        self.node_from_offsets(&k[..self.dim])
    }
}

/// A ball `B_r(c)` (with metric) or a clipped Euclidean half-ball `D_r(y)`,
/// gridded with spacing `h`.
#[derive(Debug)]
pub struct Domain {
    kind: DomainKind,
    center: Vec<f64>,
    radius: f64,
    metric: MetricSpec,
    lattice: Lattice,
    classes: Vec<NodeClass>,
    in_mask: usize,
    weights: OnceLock<Vec<(usize, f64)>>,
}

fn check_dimension(n: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

fn check_point(n: usize, p: &[f64]) -> Result<()> {
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("non-finite coordinate in {p:?}")));
    }
    Ok(())
}

fn check_resolution(r: f64, h: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidLength {
            name: "radius",
            value: r,
        });
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidLength {
            name: "spacing",
            value: h,
        });
    }
    let limit = r / 8.0;
    if h > limit * (1.0 + GRID_EPS) {
        return Err(Error::ResolutionTooCoarse { spacing: h, limit });
    }
    Ok(())
}

/// Grid over the geodesic ball of radius `r` about `center`.
///
/// Geodesic distance is approximated to first order in `g - 1`.
pub fn make_ball_domain(
    center: &[f64],
    r: f64,
    h: f64,
    n: usize,
    metric: MetricSpec,
) -> Result<Domain> {
    check_dimension(n)?;
    check_point(n, center)?;
    check_resolution(r, h)?;
    if metric.max_index() >= n {
        return Err(Error::Config(format!(
            "metric references an index outside dimension {n}"
        )));
    }
    let reach = if metric.is_identity() { r } else { 1.25 * r };
    let k = (reach / h).ceil() as i64 + 2;
    let mut anchor = [0.0; MAX_DIM];
    anchor[..n].copy_from_slice(center);
    let mut lo = [0i64; MAX_DIM];
    let mut hi = [0i64; MAX_DIM];
    for i in 0..n {
        lo[i] = -k;
        hi[i] = k;
    }
    let lattice = Lattice::new(n, h, anchor, lo, hi);
    if !metric.is_identity() {
        validate_metric(&metric, &lattice)?;
    }
    Ok(Domain::classify(
        DomainKind::Ball,
        center.to_vec(),
        r,
        metric,
        lattice,
    ))
}

/// Grid over `D_r(y) = B_r(y) ∩ ℍⁿ` with the Euclidean metric.
pub fn make_half_ball_domain(y: &[f64], r: f64, h: f64, n: usize) -> Result<Domain> {
    check_dimension(n)?;
    check_point(n, y)?;
    if y[0] < 0.0 {
        return Err(Error::CenterBelowBoundary(y[0]));
    }
    check_resolution(r, h)?;
    let m = (y[0] / h).round();
    if (y[0] / h - m).abs() > 1e-7 {
        return Err(Error::CenterOffGrid {
            y0: y[0],
            spacing: h,
        });
    }
    let m = m as i64;
    let k = (r / h).ceil() as i64 + 2;
    let mut anchor = [0.0; MAX_DIM];
    anchor[1..n].copy_from_slice(&y[1..n]);
    let mut lo = [0i64; MAX_DIM];
    let mut hi = [0i64; MAX_DIM];
    lo[0] = (m - k).max(0);
    hi[0] = m + k;
    for i in 1..n {
        lo[i] = -k;
        hi[i] = k;
    }
    let lattice = Lattice::new(n, h, anchor, lo, hi);
    let mut center = y.to_vec();
    center[0] = m as f64 * h;
    Ok(Domain::classify(
        DomainKind::HalfBall,
        center,
        r,
        MetricSpec::identity(),
        lattice,
    ))
}

fn validate_metric(metric: &MetricSpec, lattice: &Lattice) -> Result<()> {
    let n = lattice.dim;
    (0..lattice.len)
        .into_par_iter()
        .try_for_each(|node| {
            let x = lattice.coords(node);
            let mut g = [[0.0; MAX_DIM]; MAX_DIM];
            metric.eval(n, &x[..n], &mut g);
            if cholesky(n, &g).is_none() {
                Err(Error::MetricNotPositiveDefinite {
                    point: x[..n].to_vec(),
                })
            } else {
                Ok(())
            }
        })
}

impl Domain {
    fn classify(
        kind: DomainKind,
        center: Vec<f64>,
        radius: f64,
        metric: MetricSpec,
        lattice: Lattice,
    ) -> Self {
        let n = lattice.dim;
        let inside: Vec<bool> = (0..lattice.len)
            .into_par_iter()
            .map(|node| {
                let x = lattice.coords(node);
                region_contains(kind, &center, radius, &metric, n, &x[..n])
            })
            .collect();
        let classes: Vec<NodeClass> = (0..lattice.len)
            .into_par_iter()
            .map(|node| {
                if !inside[node] {
                    return NodeClass::Outside;
                }
                if kind == DomainKind::HalfBall && lattice.offsets(node)[0] == 0 {
                    return NodeClass::FlatBoundary;
                }
                let full = (0..n).all(|axis| {
                    [-1, 1].iter().all(|&d| {
                        lattice
                            .step(node, axis, d)
                            .is_some_and(|nb| inside[nb])
                    })
                });
                if full {
                    NodeClass::Interior
                } else {
                    NodeClass::CapBoundary
                }
            })
            .collect();
        let in_mask = classes.iter().filter(|c| c.in_mask()).count();
        Self {
            kind,
            center,
            radius,
            metric,
            lattice,
            classes,
            in_mask,
            weights: OnceLock::new(),
        }
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim
    }

    pub fn spacing(&self) -> f64 {
        self.lattice.spacing
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// The normal coordinate `y₀` of a half-ball center (0 for balls).
    pub fn center_height(&self) -> f64 {
        match self.kind {
            DomainKind::Ball => 0.0,
            DomainKind::HalfBall => self.center[0],
        }
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.metric
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.classes
    }

    pub fn class(&self, node: usize) -> NodeClass {
        self.classes[node]
    }

    pub fn is_in_mask(&self, node: usize) -> bool {
        self.classes[node].in_mask()
    }

    pub fn in_mask_count(&self) -> usize {
        self.in_mask
    }

    pub fn count(&self, class: NodeClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    /// In-mask nodes in lexicographic order.
    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.in_mask())
            .map(|(i, _)| i)
    }

    pub fn nodes_of(&self, class: NodeClass) -> impl Iterator<Item = usize> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == class)
            .map(|(i, _)| i)
    }

    pub fn coords(&self, node: usize) -> [f64; MAX_DIM] {
        self.lattice.coords(node)
    }

    pub fn point(&self, node: usize) -> Vec<f64> {
        self.lattice.coords(node)[..self.dim()].to_vec()
    }

    /// Distance from the domain center, geodesic (first order) for balls.
    pub fn distance_to_center(&self, x: &[f64]) -> f64 {
        self.metric.distance(self.dim(), &self.center, x)
    }

    /// Continuum membership test for the domain region.
    pub fn contains(&self, x: &[f64]) -> bool {
        region_contains(
            self.kind,
            &self.center,
            self.radius,
            &self.metric,
            self.dim(),
            x,
        )
    }

    /// The in-mask node at `x` (within rounding), if any.
    pub fn node_at(&self, x: &[f64]) -> Option<usize> {
        let node = self.lattice.nearest(x)?;
        let c = self.coords(node);
        let h = self.spacing();
        let close = (0..self.dim()).all(|i| (c[i] - x[i]).abs() <= 1e-7 * h);
        (close && self.is_in_mask(node)).then_some(node)
    }

    pub fn center_node(&self) -> Option<usize> {
        self.node_at(&self.center)
    }

    /// Measured volume `#in-mask · hⁿ`.
    pub fn node_volume(&self) -> f64 {
        self.in_mask as f64 * self.spacing().powi(self.dim() as i32)
    }

    pub fn spec(&self) -> DomainSpec {
        DomainSpec {
            kind: self.kind,
            center: self.center.clone(),
            radius: self.radius,
            spacing: self.spacing(),
            dimension: self.dim(),
            metric: self.metric.clone(),
        }
    }

    pub(crate) fn cached_weights(&self, build: impl FnOnce() -> Vec<(usize, f64)>) -> &[(usize, f64)] {
        self.weights.get_or_init(build)
    }
}

fn region_contains(
    kind: DomainKind,
    center: &[f64],
    radius: f64,
    metric: &MetricSpec,
    n: usize,
    x: &[f64],
) -> bool {
    if kind == DomainKind::HalfBall && x[0] < 0.0 {
        return false;
    }
    metric.distance(n, center, x) < radius
}

/// Measured `‖g − 1‖_{W^{1,∞}}` over in-mask nodes: the larger of the entry
/// sup norm and the sup of first derivatives by central differences.
pub fn metric_deviation(domain: &Domain) -> Result<f64> {
    if domain.kind() != DomainKind::Ball {
        return Err(Error::WrongDomainKind { expected: "ball" });
    }
    let metric = domain.metric();
    if metric.is_identity() {
        return Ok(0.0);
    }
    let n = domain.dim();
    let h = domain.spacing();
    let nodes: Vec<usize> = domain.nodes().collect();
    let dev = nodes
        .par_iter()
        .map(|&node| {
            let x = domain.coords(node);
            let mut g = [[0.0; MAX_DIM]; MAX_DIM];
            metric.eval(n, &x[..n], &mut g);
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((g[i][j] - delta).abs());
                }
            }
            let mut gp = [[0.0; MAX_DIM]; MAX_DIM];
            let mut gm = [[0.0; MAX_DIM]; MAX_DIM];
            for k in 0..n {
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                metric.eval(n, &xp[..n], &mut gp);
                metric.eval(n, &xm[..n], &mut gm);
                for i in 0..n {
                    for j in 0..n {
                        worst = worst.max(((gp[i][j] - gm[i][j]) / (2.0 * h)).abs());
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(h: f64) -> Domain {
        make_ball_domain(&[0.0, 0.0], 1.0, h, 2, MetricSpec::identity()).unwrap()
    }

    #[test]
    fn euclidean_disk_node_count() {
        let d = disk(1.0 / 64.0);
        let expected = std::f64::consts::PI * 64.0 * 64.0;
        // boundary layer: perimeter / h nodes
        let layer = 2.0 * std::f64::consts::PI * 64.0;
        assert!((d.in_mask_count() as f64 - expected).abs() < layer);
    }

    #[test]
    fn coarse_resolution_rejected() {
        let e = make_ball_domain(&[0.0, 0.0], 1.0, 0.25, 2, MetricSpec::identity());
        assert!(matches!(e, Err(Error::ResolutionTooCoarse { .. })));
        // h = r/8 is the finest admissible limit
        assert!(make_ball_domain(&[0.0, 0.0], 1.0, 0.125, 2, MetricSpec::identity()).is_ok());
    }

    #[test]
    fn dimension_checked() {
        assert!(matches!(
            make_ball_domain(&[0.0], 1.0, 0.1, 1, MetricSpec::identity()),
            Err(Error::UnsupportedDimension(1))
        ));
        assert!(matches!(
            make_half_ball_domain(&[0.0, 0.0, 0.0], 1.0, 0.1, 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn half_disk_flat_segment() {
        let h = 1.0 / 64.0;
        let d = make_half_ball_domain(&[0.0, 0.0], 1.0, h, 2).unwrap();
        let flat: Vec<usize> = d.nodes_of(NodeClass::FlatBoundary).collect();
        // |x1| < 1 on x0 = 0: offsets -63..=63
        assert_eq!(flat.len(), 127);
        for &f in &flat {
            let x = d.coords(f);
            assert_eq!(x[0], 0.0);
            assert!(x[1].abs() < 1.0);
        }
    }

    #[test]
    fn far_half_ball_is_full_disk() {
        let h = 1.0 / 64.0;
        let hb = make_half_ball_domain(&[2.0, 0.0], 1.0, h, 2).unwrap();
        let b = make_ball_domain(&[2.0, 0.0], 1.0, h, 2, MetricSpec::identity()).unwrap();
        assert_eq!(hb.count(NodeClass::FlatBoundary), 0);
        assert_eq!(hb.in_mask_count(), b.in_mask_count());
        let hb_pts: Vec<Vec<f64>> = hb.nodes().map(|i| hb.point(i)).collect();
        let b_pts: Vec<Vec<f64>> = b.nodes().map(|i| b.point(i)).collect();
        assert_eq!(hb_pts, b_pts);
    }

    #[test]
    fn clipped_disk_flat_width() {
        let h = 1.0 / 64.0;
        let d = make_half_ball_domain(&[0.5, 0.0], 1.0, h, 2).unwrap();
        let xs: Vec<f64> = d
            .nodes_of(NodeClass::FlatBoundary)
            .map(|i| d.coords(i)[1])
            .collect();
        let width = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
        assert!((width - 3f64.sqrt()).abs() <= 2.0 * h);
    }

    #[test]
    fn half_ball_center_checks() {
        assert!(matches!(
            make_half_ball_domain(&[-0.1, 0.0], 1.0, 1.0 / 64.0, 2),
            Err(Error::CenterBelowBoundary(_))
        ));
        assert!(matches!(
            make_half_ball_domain(&[0.01, 0.0], 1.0, 1.0 / 64.0, 2),
            Err(Error::CenterOffGrid { .. })
        ));
    }

    #[test]
    fn interior_nodes_have_full_stencils() {
        let d = make_half_ball_domain(&[0.25, 0.1, -0.2], 0.5, 1.0 / 32.0, 3).unwrap();
        for node in d.nodes_of(NodeClass::Interior) {
            for axis in 0..3 {
                for dir in [-1, 1] {
                    let nb = d.lattice().step(node, axis, dir).unwrap();
                    assert!(d.is_in_mask(nb));
                }
            }
        }
        for node in d.nodes_of(NodeClass::FlatBoundary) {
            assert_eq!(d.coords(node)[0], 0.0);
        }
    }

    #[test]
    fn metric_deviation_presets() {
        let h = 1.0 / 64.0;
        assert_eq!(metric_deviation(&disk(h)).unwrap(), 0.0);
        let scaled = make_ball_domain(
            &[0.0, 0.0],
            1.0,
            h,
            2,
            MetricSpec::new(MetricKind::Scaled { c: 0.03 }, 0.03),
        )
        .unwrap();
        assert!((metric_deviation(&scaled).unwrap() - 0.03).abs() < 1e-14);
        let hb = make_half_ball_domain(&[0.0, 0.0], 1.0, h, 2).unwrap();
        assert!(matches!(
            metric_deviation(&hb),
            Err(Error::WrongDomainKind { .. })
        ));
    }

    #[test]
    fn indefinite_metric_rejected() {
        let m = MetricSpec::new(MetricKind::Scaled { c: -1.5 }, 1.5);
        assert!(matches!(
            make_ball_domain(&[0.0, 0.0], 1.0, 0.1, 2, m),
            Err(Error::MetricNotPositiveDefinite { .. })
        ));
    }
}
