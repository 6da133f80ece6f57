//! Phase-conjugation (time-reversal) refocusing through a frozen turbulent
//! medium: forward propagation to a mirror, conjugation, back-propagation,
//! and ensemble statistics of the refocused field.

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::montecarlo::{mc_mean_vec, MonteCarloSpec};
use crate::quadrature::{compensated_sum, QuadratureGrid};
use crate::rytov::{Convention, GreenEvaluator, RatioKernel};
use crate::scalar::Real;
use crate::turbulence::{sample_field, TurbulenceSpec};
use crate::wave::WaveParams;
use num_complex::Complex;
use rayon::prelude::*;

/// Phase-conjugating mirror as a list of elements with area weights. A single
/// point mirror has one element of weight 1. Mirrors conventionally sit in the
/// plane `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorSpec<T> {
    elements: Vec<Point3<T>>,
    weights: Vec<T>,
}

impl<T: Real> MirrorSpec<T> {
    pub fn new(elements: Vec<Point3<T>>, weights: Vec<T>) -> Result<Self> {
        if elements.is_empty() || elements.len() != weights.len() {
            return Err(Error::param("mirror", "need a non-empty element list with one weight each"));
        }
        if weights.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(Error::param("mirror", "element weights must be positive"));
        }
        if elements.iter().any(|p| !p.is_finite()) {
            return Err(Error::param("mirror", "element positions must be finite"));
        }
        Ok(Self { elements, weights })
    }

    pub fn point(p: Point3<T>) -> Self {
        Self {
            elements: vec![p],
            weights: vec![T::one()],
        }
    }

    /// `n × n` square of elements of pitch `pitch` centred on the axis in `x = 0`.
    pub fn square(n: usize, pitch: T) -> Result<Self> {
        if n == 0 || !(pitch > T::zero()) {
            return Err(Error::param("mirror", "need n >= 1 and a positive pitch"));
        }
        let half = T::from_usize_lossy(n - 1) / T::lit(2.0);
        let mut elements = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let y = (T::from_usize_lossy(i) - half) * pitch;
                let z = (T::from_usize_lossy(j) - half) * pitch;
                elements.push(Point3::new(T::zero(), y, z));
            }
        }
        Self::new(elements, vec![pitch * pitch; n * n])
    }

    pub fn elements(&self) -> &[Point3<T>] {
        &self.elements
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Input field `Ψ₀` sampled on nodes with weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceField<T> {
    points: Vec<Point3<T>>,
    amplitudes: Vec<Complex<T>>,
    weights: Vec<T>,
}

impl<T: Real> SourceField<T> {
    pub fn new(points: Vec<Point3<T>>, amplitudes: Vec<Complex<T>>, weights: Vec<T>) -> Result<Self> {
        if points.is_empty() || points.len() != amplitudes.len() || points.len() != weights.len() {
            return Err(Error::param("source", "need non-empty, equally long point/amplitude/weight lists"));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::param("source", "amplitudes must be finite"));
        }
        if weights.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(Error::param("source", "weights must be positive"));
        }
        Ok(Self {
            points,
            amplitudes,
            weights,
        })
    }

    /// Unit point source.
    pub fn point(p: Point3<T>) -> Self {
        Self {
            points: vec![p],
            amplitudes: vec![Complex::from(T::one())],
            weights: vec![T::one()],
        }
    }

    pub fn points(&self) -> &[Point3<T>] {
        &self.points
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| *a * c).collect(),
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Back-propagated field at a set of points.
///
/// For a single realization `intensity = |psi|²`. For ensemble results `psi`
/// holds `E(Ψ^B)` and `intensity` holds `E(I)`; the standard errors are filled in
/// by Monte Carlo only.
#[derive(Debug, Clone, PartialEq)]
pub struct RefocusResult<T> {
    pub points: Vec<Point3<T>>,
    pub psi: Vec<Complex<T>>,
    pub intensity: Vec<T>,
    pub psi_se: Option<Vec<T>>,
    pub intensity_se: Option<Vec<T>>,
}

/// `Ψ_m = Σ_s G(r_m, r_s)·Ψ₀(r_s)·w_s` at every mirror element.
pub fn mirror_field<T: Real, G: GreenEvaluator<T> + ?Sized>(
    src: &SourceField<T>,
    mirror: &MirrorSpec<T>,
    green: &G,
) -> Result<Vec<Complex<T>>> {
    mirror
        .elements
        .iter()
        .map(|m| {
            let mut terms = Vec::with_capacity(src.len());
            for ((s, a), w) in src.points.iter().zip(&src.amplitudes).zip(&src.weights) {
                if m == s {
                    return Err(Error::CoincidentPoints("mirror element coincides with a source node"));
                }
                terms.push(green.green(m, s)? * *a * *w);
            }
            Ok(complex_sum(terms))
        })
        .collect()
}

/// `Ψ^B(r) = Σ_m G(r, r_m)·conj(Ψ_m)·w_m`.
pub fn backpropagate<T: Real, G: GreenEvaluator<T> + ?Sized>(
    psi_m: &[Complex<T>],
    mirror: &MirrorSpec<T>,
    eval_points: &[Point3<T>],
    green: &G,
) -> Result<RefocusResult<T>> {
    if psi_m.len() != mirror.len() {
        return Err(Error::param("mirror field", "one value per mirror element required"));
    }
    let psi = eval_points
        .iter()
        .map(|r| {
            let mut terms = Vec::with_capacity(mirror.len());
            for ((m, v), w) in mirror.elements.iter().zip(psi_m).zip(&mirror.weights) {
                if r == m {
                    return Err(Error::CoincidentPoints("evaluation point coincides with a mirror element"));
                }
                terms.push(green.green(r, m)? * v.conj() * *w);
            }
            Ok(complex_sum(terms))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(single(eval_points, psi))
}

fn single<T: Real>(points: &[Point3<T>], psi: Vec<Complex<T>>) -> RefocusResult<T> {
    RefocusResult {
        points: points.to_vec(),
        intensity: psi.iter().map(|p| p.norm_sqr()).collect(),
        psi,
        psi_se: None,
        intensity_se: None,
    }
}

fn complex_sum<T: Real>(terms: Vec<Complex<T>>) -> Complex<T> {
    Complex::new(
        compensated_sum(terms.iter().map(|t| t.re)),
        compensated_sum(terms.iter().map(|t| t.im)),
    )
}

/// Ratio kernels of both legs: mirror ← source (`m·S + s`) and evaluation ←
/// mirror (`r·M + m`).
struct Legs<T> {
    forward: Vec<RatioKernel<T>>,
    backward: Vec<RatioKernel<T>>,
}

impl<T: Real> Legs<T> {
    fn build(
        src: &SourceField<T>,
        mirror: &MirrorSpec<T>,
        eval_points: &[Point3<T>],
        grid: &QuadratureGrid<T>,
        wave: &WaveParams<T>,
    ) -> Result<Self> {
        let forward = mirror
            .elements
            .par_iter()
            .flat_map_iter(|m| src.points.iter().map(move |s| RatioKernel::spherical(m, s, grid, wave)))
            .collect::<Result<Vec<_>>>()?;
        let backward = eval_points
            .par_iter()
            .flat_map_iter(|r| mirror.elements.iter().map(move |m| RatioKernel::spherical(r, m, grid, wave)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { forward, backward })
    }
}

/// Point-source/point-mirror mean intensity at the source,
/// `|G₀|⁴·exp(c′δ²σ²k₀⁴∫(Re K)²)` with `c′ = 32` (Gaussian) or `64` (paper).
pub fn point_point_mean_intensity<T: Real>(
    source: &Point3<T>,
    mirror: &Point3<T>,
    spec: &TurbulenceSpec<T>,
    wave: &WaveParams<T>,
    convention: Convention,
) -> Result<T> {
    let grid = spec.grid();
    let kern = RatioKernel::spherical(source, mirror, grid, wave)?;
    let re2 = compensated_sum(kern.values().iter().zip(grid.nodes()).map(|(k, n)| k.re * k.re * n.weight));
    let k2 = wave.k0() * wave.k0();
    let c = T::lit(32.0) * convention.scale::<T>();
    let g2 = kern.base().norm_sqr();
    Ok(g2 * g2 * (c * spec.delta() * spec.delta() * spec.sigma() * spec.sigma() * k2 * k2 * re2).exp())
}

/// White-noise means `E(Ψ^B)` and `E(I)` at every evaluation point.
///
/// Each product of Green's functions contributes its free-space value times
/// `exp(c·δ²σ²k₀⁴∫f²)`, where `f` is the sum of the kernels (conjugated on the
/// conjugated legs) and `c` is 2 (Gaussian) or 4 (paper). `E(I)` needs all
/// pairs of such products, so its cost grows as `(M·S)²` per point.
pub fn mean_refocus<T: Real>(
    src: &SourceField<T>,
    mirror: &MirrorSpec<T>,
    eval_points: &[Point3<T>],
    spec: &TurbulenceSpec<T>,
    wave: &WaveParams<T>,
    convention: Convention,
) -> Result<RefocusResult<T>> {
    let grid = spec.grid();
    let forward = mirror
        .elements
        .iter()
        .flat_map(|m| src.points.iter().map(move |s| RatioKernel::spherical(m, s, grid, wave)))
        .collect::<Result<Vec<_>>>()?;
    let k2 = wave.k0() * wave.k0();
    let coef = convention.mean_green_coefficient::<T>()
        * spec.delta()
        * spec.delta()
        * spec.sigma()
        * spec.sigma()
        * k2
        * k2;
    let (ns, nm) = (src.len(), mirror.len());
    let weights: Vec<T> = grid.nodes().iter().map(|n| n.weight).collect();

    let per_point = eval_points
        .par_iter()
        .map(|r| -> Result<(Complex<T>, T)> {
            let back = mirror
                .elements
                .iter()
                .map(|m| RatioKernel::spherical(r, m, grid, wave))
                .collect::<Result<Vec<_>>>()?;
            // one path per (m, s): free-space amplitude and summed kernel
            let mut amp = Vec::with_capacity(nm * ns);
            let mut kern: Vec<Vec<Complex<T>>> = Vec::with_capacity(nm * ns);
            for m in 0..nm {
                for s in 0..ns {
                    let f = &forward[m * ns + s];
                    let b = &back[m];
                    amp.push(
                        b.base() * f.base().conj() * src.amplitudes[s].conj() * (mirror.weights[m] * src.weights[s]),
                    );
                    kern.push(b.values().iter().zip(f.values()).map(|(x, y)| *x + y.conj()).collect());
                }
            }
            let exp_of = |f: &dyn Fn(usize) -> Complex<T>| -> Complex<T> {
                if coef == T::zero() {
                    return Complex::from(T::one());
                }
                let re = compensated_sum((0..weights.len()).map(|i| (f(i) * f(i)).re * weights[i]));
                let im = compensated_sum((0..weights.len()).map(|i| (f(i) * f(i)).im * weights[i]));
                (Complex::new(re, im) * coef).exp()
            };
            let psi = complex_sum(
                (0..amp.len())
                    .map(|p| amp[p] * exp_of(&|i| kern[p][i]))
                    .collect(),
            );
            let mut terms = Vec::with_capacity(amp.len() * amp.len());
            for p in 0..amp.len() {
                for q in 0..amp.len() {
                    let e = exp_of(&|i| kern[p][i] + kern[q][i].conj());
                    terms.push(amp[p] * amp[q].conj() * e);
                }
            }
            Ok((psi, complex_sum(terms).re))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RefocusResult {
        points: eval_points.to_vec(),
        psi: per_point.iter().map(|p| p.0).collect(),
        intensity: per_point.iter().map(|p| p.1).collect(),
        psi_se: None,
        intensity_se: None,
    })
}

/// Monte Carlo estimate of `E(Ψ^B)` and `E(I)`: realization `i` is
/// `sample_field` with the Monte Carlo seed and index `i`, frozen for both legs.
pub fn mc_refocus<T: Real>(
    src: &SourceField<T>,
    mirror: &MirrorSpec<T>,
    eval_points: &[Point3<T>],
    spec: &TurbulenceSpec<T>,
    wave: &WaveParams<T>,
    mc: &MonteCarloSpec,
) -> Result<RefocusResult<T>> {
    let grid = spec.grid();
    let legs = Legs::build(src, mirror, eval_points, grid, wave)?;
    let seeded = spec.with_seed(mc.seed());
    let delta = spec.delta();
    let (ns, nm) = (src.len(), mirror.len());
    let est = mc_mean_vec(
        mc,
        |_, i| sample_field(&seeded, i as u64),
        |field| {
            let g = |k: &RatioKernel<T>| {
                let e = k.exponent(field.values(), grid) * delta;
                k.base() * e.exp()
            };
            let psi_m: Vec<Complex<T>> = (0..nm)
                .map(|m| {
                    complex_sum(
                        (0..ns)
                            .map(|s| g(&legs.forward[m * ns + s]) * src.amplitudes[s] * src.weights[s])
                            .collect(),
                    )
                })
                .collect();
            let psi: Vec<Complex<T>> = (0..eval_points.len())
                .map(|r| {
                    complex_sum(
                        (0..nm)
                            .map(|m| g(&legs.backward[r * nm + m]) * psi_m[m].conj() * mirror.weights[m])
                            .collect(),
                    )
                })
                .collect();
            let intensity = psi.iter().map(|p| Complex::from(p.norm_sqr()));
            psi.iter().copied().chain(intensity).collect()
        },
    )?;
    let n = eval_points.len();
    Ok(RefocusResult {
        points: eval_points.to_vec(),
        psi: est[..n].iter().map(|e| e.mean).collect(),
        intensity: est[n..].iter().map(|e| e.mean.re).collect(),
        psi_se: Some(est[..n].iter().map(|e| e.standard_error).collect()),
        intensity_se: Some(est[n..].iter().map(|e| e.standard_error).collect()),
    })
}

/// Full width at half maximum of a sampled profile, with linear interpolation
/// of the half-maximum crossings. `None` if the profile does not fall below half
/// its maximum on both sides.
pub fn spot_fwhm<T: Real>(positions: &[T], values: &[T]) -> Option<T> {
    if positions.len() != values.len() || positions.len() < 3 {
        return None;
    }
    let (peak, vmax) = values
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    let half = vmax / T::lit(2.0);
    let cross = |a: usize, b: usize| {
        let t = (values[a] - half) / (values[a] - values[b]);
        positions[a] + t * (positions[b] - positions[a])
    };
    let left = (1..=peak).rev().find(|&i| values[i - 1] < half).map(|i| cross(i, i - 1))?;
    let right = (peak..positions.len() - 1).find(|&i| values[i + 1] < half).map(|i| cross(i, i + 1))?;
    Some((right - left).abs())
}
