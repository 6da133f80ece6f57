//! Deterministic quadrature grids and the singular-point exclusion policy.
//!
//! Volume grids are tensor products over a box. Every node carries a positive
//! weight and the weights of a grid sum to the box volume. Integrals of kernels
//! with integrable point singularities drop every node lying within
//! `exclusion_radius` of a singular point; the dropped volume is reported
//! alongside the value. With the default radius (one cell diagonal) the bias for
//! `1/r` kernels is O(h²) and is not corrected.

use crate::error::{Error, Result};
use crate::geometry::{Point3, TransversePoint};
use crate::scalar::{is_finite_complex, Real};
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex;
use std::num::NonZeroUsize;

/// Closed interval `[lo, hi]` in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains_strictly(&self, v: T) -> bool {
        v > self.lo && v < self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum QuadratureRule {
    /// Cell-centred midpoint rule; one node per cell, weight = cell volume.
    #[default]
    Midpoint,
    /// Tensor Gauss–Legendre over the whole box.
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<T> {
    pub point: Point3<T>,
    pub weight: T,
}

/// Nodes and weights over a 3-D box.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid<T> {
    bounds: [Interval<T>; 3],
    counts: [usize; 3],
    rule: QuadratureRule,
    nodes: Vec<Node<T>>,
    exclusion_radius: T,
}

/// Result of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: Complex<T>,
    /// Sum of the weights of the nodes dropped by the exclusion policy.
    pub excluded_volume: T,
    pub retained: usize,
}

/// Builds a tensor grid over `bounds` with `counts` nodes per axis.
///
/// Nodes are ordered with `x` slowest and `z` fastest. The exclusion radius
/// defaults to the diagonal of one cell `(len_x/n_x, len_y/n_y, len_z/n_z)`.
pub fn build_grid<T: Real>(
    bounds: [Interval<T>; 3],
    counts: [usize; 3],
    rule: QuadratureRule,
) -> Result<QuadratureGrid<T>> {
    for (axis, iv) in bounds.iter().enumerate() {
        if !(iv.lo.is_finite() && iv.hi.is_finite()) || iv.len() <= T::zero() {
            return Err(Error::param(
                "bounds",
                format!("axis {axis} interval [{}, {}] has non-positive length", iv.lo, iv.hi),
            ));
        }
    }
    if counts.contains(&0) {
        return Err(Error::param("counts", "every axis needs at least one node"));
    }

    let axes: Vec<Vec<(T, T)>> = bounds
        .iter()
        .zip(counts.iter())
        .map(|(iv, &n)| match rule {
            QuadratureRule::Midpoint => midpoint_1d(*iv, n),
            QuadratureRule::GaussLegendre => gauss_legendre_1d(*iv, n),
        })
        .collect();

    let mut nodes = Vec::with_capacity(counts[0] * counts[1] * counts[2]);
    for &(x, wx) in &axes[0] {
        for &(y, wy) in &axes[1] {
            for &(z, wz) in &axes[2] {
                nodes.push(Node {
                    point: Point3::new(x, y, z),
                    weight: wx * wy * wz,
                });
            }
        }
    }

    let cell = [0, 1, 2].map(|a| bounds[a].len() / T::from_usize_lossy(counts[a]));
    let exclusion_radius = (cell[0] * cell[0] + cell[1] * cell[1] + cell[2] * cell[2]).sqrt();

    let grid = QuadratureGrid {
        bounds,
        counts,
        rule,
        nodes,
        exclusion_radius,
    };

    let volume = grid.volume();
    let total = compensated_sum(grid.nodes.iter().map(|n| n.weight));
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    if ((total - volume) / volume).abs() > tol {
        return Err(Error::param(
            "counts",
            format!("weights sum to {total}, box volume is {volume}"),
        ));
    }
    Ok(grid)
}

fn midpoint_1d<T: Real>(iv: Interval<T>, n: usize) -> Vec<(T, T)> {
    let h = iv.len() / T::from_usize_lossy(n);
    (0..n)
        .map(|i| (iv.lo + (T::from_usize_lossy(i) + T::lit(0.5)) * h, h))
        .collect()
}

/// Gauss–Legendre nodes and weights mapped onto `iv`, ascending.
pub fn gauss_legendre_1d<T: Real>(iv: Interval<T>, n: usize) -> Vec<(T, T)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("n >= 1"));
    let half = iv.len() / T::lit(2.0);
    let mid = (iv.lo + iv.hi) / T::lit(2.0);
    let mut out: Vec<(T, T)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * T::lit(x), half * T::lit(w)))
        .collect();
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
    out
}

/// Composite Gauss–Legendre integral of a real function over `[a, b]`.
pub fn composite_gauss_legendre<T: Real>(
    a: T,
    b: T,
    panels: usize,
    order: usize,
    f: impl Fn(T) -> T,
) -> T {
    let h = (b - a) / T::from_usize_lossy(panels);
    let unit = gauss_legendre_1d(Interval::new(T::zero(), T::one()), order);
    compensated_sum((0..panels).flat_map(|p| {
        let lo = a + T::from_usize_lossy(p) * h;
        let f = &f;
        unit.iter().map(move |&(t, w)| w * h * f(lo + t * h))
    }))
}

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum<T: Real>(terms: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            carry = carry + ((sum - s) + t);
        } else {
            carry = carry + ((t - s) + sum);
        }
        sum = s;
    }
    sum + carry
}

impl<T: Real> QuadratureGrid<T> {
    pub fn bounds(&self) -> &[Interval<T>; 3] {
        &self.bounds
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn exclusion_radius(&self) -> T {
        self.exclusion_radius
    }

    pub fn volume(&self) -> T {
        self.bounds[0].len() * self.bounds[1].len() * self.bounds[2].len()
    }

    /// Diagonal of one grid cell.
    pub fn cell_diagonal(&self) -> T {
        let c = [0, 1, 2].map(|a| self.bounds[a].len() / T::from_usize_lossy(self.counts[a]));
        (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
    }

    pub fn with_exclusion_radius(mut self, radius: T) -> Result<Self> {
        if !(radius >= T::zero()) || !radius.is_finite() {
            return Err(Error::param("exclusion_radius", "must be finite and >= 0"));
        }
        self.exclusion_radius = radius;
        Ok(self)
    }

    /// True if `p` lies within the exclusion ball of any singular point.
    #[inline]
    pub fn is_excluded(&self, p: &Point3<T>, singular_points: &[Point3<T>]) -> bool {
        singular_points
            .iter()
            .any(|s| p.distance(s) <= self.exclusion_radius)
    }
}

/// Weighted sum of `f` over the retained nodes of `grid`.
pub fn integrate<T: Real>(
    grid: &QuadratureGrid<T>,
    f: impl Fn(&Point3<T>) -> Complex<T>,
    singular_points: &[Point3<T>],
) -> Result<Integral<T>> {
    integrate_nodes(grid, |_, node| f(&node.point), singular_points)
}

/// Like [`integrate`] but the integrand also sees the node index, for
/// integrands built from per-cell data such as a sampled field.
pub fn integrate_nodes<T: Real>(
    grid: &QuadratureGrid<T>,
    mut f: impl FnMut(usize, &Node<T>) -> Complex<T>,
    singular_points: &[Point3<T>],
) -> Result<Integral<T>> {
    let mut re = Vec::with_capacity(grid.len());
    let mut im = Vec::with_capacity(grid.len());
    let mut excluded = Vec::new();
    for (i, node) in grid.nodes.iter().enumerate() {
        if grid.is_excluded(&node.point, singular_points) {
            excluded.push(node.weight);
            continue;
        }
        let v = f(i, node);
        if !is_finite_complex(v) {
            return Err(Error::NonFinite { node: i });
        }
        re.push(v.re * node.weight);
        im.push(v.im * node.weight);
    }
    let excluded_count = excluded.len();
    Ok(Integral {
        value: Complex::new(compensated_sum(re), compensated_sum(im)),
        excluded_volume: compensated_sum(excluded.iter().copied()),
        retained: grid.len() - excluded_count,
    })
}

/// Quadrature over a disk of radius `radius` centred on the axis.
///
/// Gauss–Legendre in `s = r²` (so `dA = ½ ds dθ`) times Gauss–Legendre in angle on
/// `[0, π)`; the second angular half is the exact point reflection of the first,
/// so the node set is symmetric under `x → −x` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskGrid<T> {
    radius: T,
    n_radial: usize,
    n_angular: usize,
    points: Vec<TransversePoint<T>>,
    weights: Vec<T>,
    partner: Vec<usize>,
}

impl<T: Real> DiskGrid<T> {
    pub fn new(radius: T, n_radial: usize, n_angular: usize) -> Result<Self> {
        if !(radius > T::zero()) || !(radius * radius).is_finite() {
            return Err(Error::param("radius", "must be positive with a finite square"));
        }
        if n_radial == 0 || n_angular < 2 || !n_angular.is_multiple_of(2) {
            return Err(Error::param(
                "counts",
                "need n_radial >= 1 and an even n_angular >= 2",
            ));
        }
        let s_rule = gauss_legendre_1d(Interval::new(T::zero(), radius * radius), n_radial);
        let half = n_angular / 2;
        let t_rule = gauss_legendre_1d(Interval::new(T::zero(), T::PI()), half);
        let mut points = Vec::with_capacity(n_radial * n_angular);
        let mut weights = Vec::with_capacity(n_radial * n_angular);
        let mut partner = Vec::with_capacity(n_radial * n_angular);
        for &(s, ws) in &s_rule {
            let r = s.sqrt();
            let base = points.len();
            for &(t, wt) in &t_rule {
                let (sn, cs) = t.sin_cos();
                points.push(TransversePoint::new(r * cs, r * sn));
                weights.push(ws * wt / T::lit(2.0));
            }
            for k in 0..half {
                let p = points[base + k];
                points.push(-p);
                weights.push(weights[base + k]);
            }
            for k in 0..half {
                partner.push(base + half + k);
            }
            for k in 0..half {
                partner.push(base + k);
            }
        }
        Ok(Self {
            radius,
            n_radial,
            n_angular,
            points,
            weights,
            partner,
        })
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn counts(&self) -> (usize, usize) {
        (self.n_radial, self.n_angular)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[TransversePoint<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Index of the node at `−x` for each node.
    pub fn partner(&self) -> &[usize] {
        &self.partner
    }

    pub fn area(&self) -> T {
        T::PI() * self.radius * self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube() -> [Interval<f64>; 3] {
        [Interval::new(0.0, 1.0); 3]
    }

    #[test]
    fn midpoint_two_per_axis() {
        let g = build_grid(unit_cube(), [2, 2, 2], QuadratureRule::Midpoint).unwrap();
        assert_eq!(g.len(), 8);
        assert!(g.nodes().iter().all(|n| n.weight == 0.125));
    }

    #[test]
    fn single_midpoint_node_sits_at_centre() {
        let g = build_grid(unit_cube(), [1, 1, 1], QuadratureRule::Midpoint).unwrap();
        assert_eq!(g.nodes()[0].point, Point3::new(0.5, 0.5, 0.5));
        assert_eq!(g.nodes()[0].weight, 1.0);
    }

    #[test]
    fn gauss_legendre_weights_sum_to_volume() {
        let b = [Interval::new(0.0f64, 2.0); 3];
        let g = build_grid(b, [4, 4, 4], QuadratureRule::GaussLegendre).unwrap();
        let s = compensated_sum(g.nodes().iter().map(|n| n.weight));
        assert!((s - 8.0).abs() / 8.0 < 1e-12);
        assert!(g.nodes().iter().all(|n| n.weight > 0.0));
        assert!(g
            .nodes()
            .iter()
            .all(|n| (0..3).all(|a| b[a].contains_strictly([n.point.x, n.point.y, n.point.z][a]))));
    }

    #[test]
    fn rejects_degenerate_boxes_and_zero_counts() {
        let mut b = unit_cube();
        b[1] = Interval::new(1.0, 1.0);
        assert!(build_grid(b, [1, 1, 1], QuadratureRule::Midpoint).is_err());
        assert!(build_grid(unit_cube(), [1, 0, 1], QuadratureRule::Midpoint).is_err());
    }

    #[test]
    fn constant_and_linear_integrands() {
        let g = build_grid(unit_cube(), [3, 4, 5], QuadratureRule::Midpoint).unwrap();
        let one = integrate(&g, |_| Complex::new(1.0, 0.0), &[]).unwrap();
        assert!((one.value.re - 1.0).abs() < 1e-14);
        assert_eq!(one.excluded_volume, 0.0);
        let x = integrate(&g, |p| Complex::new(p.x, 0.0), &[]).unwrap();
        assert!((x.value.re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let g = build_grid(unit_cube(), [2, 2, 2], QuadratureRule::Midpoint).unwrap();
        let r = integrate(&g, |p| Complex::new(1.0 / (p.x - 0.25), 0.0), &[]);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn excluded_volume_shrinks_with_refinement() {
        let s = Point3::new(0.5, 0.5, 0.5);
        let mut prev = f64::INFINITY;
        for n in [4, 8, 16] {
            let g = build_grid(unit_cube(), [n; 3], QuadratureRule::Midpoint).unwrap();
            let r = integrate(&g, |_| Complex::new(1.0, 0.0), &[s]).unwrap();
            assert!(r.excluded_volume < prev);
            prev = r.excluded_volume;
        }
        assert!(prev < 0.01);
    }

    #[test]
    fn disk_grid_is_point_symmetric_and_exact_in_area() {
        let d = DiskGrid::new(0.7f64, 6, 10).unwrap();
        let area = compensated_sum(d.weights().iter().copied());
        assert!((area - d.area()).abs() / d.area() < 1e-12);
        for (i, &j) in d.partner().iter().enumerate() {
            assert_eq!(d.points()[j], -d.points()[i]);
            assert_eq!(d.weights()[j], d.weights()[i]);
            assert_eq!(d.partner()[j], i);
        }
        assert!(DiskGrid::new(1.0f64, 4, 5).is_err());
    }

    #[test]
    fn composite_gauss_legendre_is_exact_for_polynomials() {
        let v = composite_gauss_legendre(0.0f64, 2.0, 3, 4, |x| x.powi(5));
        assert!((v - 64.0 / 6.0).abs() < 1e-12);
    }
}
