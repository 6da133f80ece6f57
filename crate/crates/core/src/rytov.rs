//! First-order Rytov perturbations and the turbulent Green's functions built
//! from them, for a frozen realization and in the white-noise mean.

use crate::error::{Error, Result};
use crate::geometry::{ParaxialCoords, Point3};
use crate::greens::{g0, gp, kernel_k_distances, kernel_kprime};
use crate::quadrature::{compensated_sum, integrate_nodes, QuadratureGrid};
use crate::scalar::{cis, Real};
use crate::turbulence::{RefractiveFieldRealization, TurbulenceSpec};
use crate::wave::WaveParams;
use num_complex::Complex;

/// Constant in front of ensemble-mean exponents.
///
/// `Gaussian` uses `E[e^X] = e^{E[X²]/2}` for a centred Gaussian `X`; `Paper`
/// keeps the doubled coefficients (4 for the mean Green's function, 64 for the
/// mean refocused intensity) as they are usually printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Convention {
    #[default]
    Gaussian,
    Paper,
}

impl Convention {
    /// Multiplier relative to the Gaussian coefficient.
    pub fn scale<T: Real>(self) -> T {
        match self {
            Convention::Gaussian => T::one(),
            Convention::Paper => T::lit(2.0),
        }
    }

    /// Coefficient `c` of `exp(c·δ²σ²k₀⁴∫K²)` for the mean Green's function.
    pub fn mean_green_coefficient<T: Real>(self) -> T {
        T::lit(2.0) * self.scale::<T>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackgroundKind<T> {
    PlaneWave,
    /// Gaussian beam with waist parameter `α` (1/m), `u₀(0,ρ) = exp(−αk₀ρ²/2)`.
    BeamWave { alpha: T },
    /// Spherical wave from `source`.
    PointSource { source: Point3<T> },
}

/// Unperturbed field `u₀` the Rytov expansion is built around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundField<T> {
    kind: BackgroundKind<T>,
    wave: WaveParams<T>,
}

impl<T: Real> BackgroundField<T> {
    pub fn plane_wave(wave: WaveParams<T>) -> Self {
        Self {
            kind: BackgroundKind::PlaneWave,
            wave,
        }
    }

    pub fn beam_wave(wave: WaveParams<T>, alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::param("alpha", "beam parameter must be positive"));
        }
        Ok(Self {
            kind: BackgroundKind::BeamWave { alpha },
            wave,
        })
    }

    pub fn point_source(wave: WaveParams<T>, source: Point3<T>) -> Self {
        Self {
            kind: BackgroundKind::PointSource { source },
            wave,
        }
    }

    pub fn kind(&self) -> BackgroundKind<T> {
        self.kind
    }

    pub fn wave(&self) -> &WaveParams<T> {
        &self.wave
    }

    /// `u₀(r)`.
    pub fn u0(&self, r: &Point3<T>) -> Result<Complex<T>> {
        let k = self.wave.k0();
        match self.kind {
            BackgroundKind::PlaneWave => Ok(cis(k * r.x)),
            BackgroundKind::BeamWave { alpha } => Ok(beam_field(&r.to_paraxial(), alpha, &self.wave)),
            BackgroundKind::PointSource { source } => g0(r, &source, &self.wave),
        }
    }

    /// Slowly varying envelope `v₀ = u₀·e^{−ik₀x}` of the paraxial problem. For a
    /// point source this is the paraxial Green's function from the source.
    pub fn v0(&self, p: &ParaxialCoords<T>) -> Result<Complex<T>> {
        match self.kind {
            BackgroundKind::PlaneWave => Ok(Complex::from(T::one())),
            BackgroundKind::BeamWave { alpha } => Ok(beam_envelope(p, alpha, &self.wave)),
            BackgroundKind::PointSource { source } => gp(p, &source.to_paraxial(), &self.wave),
        }
    }

    fn singular_points(&self) -> Vec<Point3<T>> {
        match self.kind {
            BackgroundKind::PointSource { source } => vec![source],
            _ => Vec::new(),
        }
    }
}

/// Gaussian beam `u₀ = e^{ik₀x}/(1+ixα)·exp(−αk₀ρ²/(2(1+ixα)))`.
pub fn beam_field<T: Real>(p: &ParaxialCoords<T>, alpha: T, wave: &WaveParams<T>) -> Complex<T> {
    beam_envelope(p, alpha, wave) * cis(wave.k0() * p.x)
}

fn beam_envelope<T: Real>(p: &ParaxialCoords<T>, alpha: T, wave: &WaveParams<T>) -> Complex<T> {
    let q = Complex::new(T::one(), p.x * alpha);
    let arg = -Complex::from(alpha * wave.k0() * p.rho.norm_sq()) / (q * T::lit(2.0));
    arg.exp() / q
}

/// `Φ₁` at one point together with quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPerturbation<T> {
    pub point: Point3<T>,
    pub value: Complex<T>,
    pub excluded_volume: T,
    pub retained: usize,
}

/// `Φ₁(r) = k₀²/(2π u₀(r)) ∫ u₀(r′) n₁(r′) e^{ik₀|r−r′|}/|r−r′| dV′`.
///
/// Cells within the grid's exclusion radius of `r` (and of a point-source
/// background's source) are dropped.
pub fn phi1_full<T: Real>(
    r: &Point3<T>,
    background: &BackgroundField<T>,
    field: &RefractiveFieldRealization<T>,
    grid: &QuadratureGrid<T>,
) -> Result<LogPerturbation<T>> {
    field.check_grid(grid)?;
    let u_r = background.u0(r)?;
    if u_r == Complex::from(T::zero()) {
        return Err(Error::ZeroDenominator("background field vanishes at r"));
    }
    let k = background.wave.k0();
    let n1 = field.values();
    let mut singular = background.singular_points();
    singular.push(*r);
    let mut err = None;
    let integral = integrate_nodes(
        grid,
        |i, node| {
            if n1[i] == T::zero() {
                return Complex::from(T::zero());
            }
            let d = r.distance(&node.point);
            match background.u0(&node.point) {
                Ok(u) => u * cis(k * d) * (n1[i] / d),
                Err(e) => {
                    err.get_or_insert(e);
                    Complex::from(T::zero())
                }
            }
        },
        &singular,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(LogPerturbation {
        point: *r,
        value: integral.value * (k * k / (T::TAU())) / u_r,
        excluded_volume: integral.excluded_volume,
        retained: integral.retained,
    })
}

/// Paraxial `Φ₁(x,ρ) = 2k₀²/v₀(x,ρ) ∫ v₀ n₁ G_p dσ dθ`; every cell must lie
/// upstream of `obs` (and downstream of a point-source background).
pub fn phi1_parabolic<T: Real>(
    obs: &ParaxialCoords<T>,
    background: &BackgroundField<T>,
    field: &RefractiveFieldRealization<T>,
    grid: &QuadratureGrid<T>,
) -> Result<LogPerturbation<T>> {
    field.check_grid(grid)?;
    let upstream = grid.bounds()[0].hi;
    if !(upstream < obs.x) {
        return Err(Error::Ordering(format!(
            "field slab reaches x = {upstream}, observation at x = {}",
            obs.x
        )));
    }
    if let BackgroundKind::PointSource { source } = background.kind {
        if !(grid.bounds()[0].lo > source.x) {
            return Err(Error::Ordering("field slab must lie downstream of the source".into()));
        }
    }
    let v_obs = background.v0(obs)?;
    if v_obs == Complex::from(T::zero()) {
        return Err(Error::ZeroDenominator("background envelope vanishes at observation"));
    }
    let k = background.wave.k0();
    let n1 = field.values();
    let two = T::lit(2.0);
    let mut err = None;
    let integral = integrate_nodes(
        grid,
        |i, node| {
            if n1[i] == T::zero() {
                return Complex::from(T::zero());
            }
            let c = node.point.to_paraxial();
            let gap = obs.x - c.x;
            match background.v0(&c) {
                Ok(v) => v * cis(k * obs.rho.distance_sq(&c.rho) / (two * gap)) * (n1[i] / gap),
                Err(e) => {
                    err.get_or_insert(e);
                    Complex::from(T::zero())
                }
            }
        },
        &[],
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(LogPerturbation {
        point: obs.to_point(),
        value: integral.value * (k * k / T::TAU()) / v_obs,
        excluded_volume: integral.excluded_volume,
        retained: integral.retained,
    })
}

/// Free-space kernel between two points and the ratio kernel `K` (or `K′`)
/// sampled on every cell of a grid, zero on excluded cells.
///
/// Building it once and re-using it across realizations is what makes ensemble
/// sweeps cheap: the exponent of the turbulent Green's function is then a dot
/// product with the field.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioKernel<T> {
    observation: Point3<T>,
    source: Point3<T>,
    base: Complex<T>,
    k: Vec<Complex<T>>,
    excluded_volume: T,
    retained: usize,
    k0: T,
}

impl<T: Real> RatioKernel<T> {
    /// `G₀(r, ξ)` and `K(r, ξ, ζ)`; cells near `r` or `ξ` are excluded.
    pub fn spherical(r: &Point3<T>, xi: &Point3<T>, grid: &QuadratureGrid<T>, wave: &WaveParams<T>) -> Result<Self> {
        let base = g0(r, xi, wave)?;
        let d = r.distance(xi);
        let k0 = wave.k0();
        let singular = [*r, *xi];
        let mut k = Vec::with_capacity(grid.len());
        let mut excluded = Vec::new();
        for node in grid.nodes() {
            if grid.is_excluded(&node.point, &singular) {
                k.push(Complex::from(T::zero()));
                excluded.push(node.weight);
            } else {
                let d1 = node.point.distance(xi);
                let d2 = r.distance(&node.point);
                k.push(kernel_k_distances(d, d1, d2, k0));
            }
        }
        Ok(Self {
            observation: *r,
            source: *xi,
            base,
            retained: grid.len() - excluded.len(),
            excluded_volume: compensated_sum(excluded),
            k,
            k0,
        })
    }

    /// `G_p` and `K′`; every cell must lie strictly between the two planes.
    pub fn paraxial(
        obs: &ParaxialCoords<T>,
        src: &ParaxialCoords<T>,
        grid: &QuadratureGrid<T>,
        wave: &WaveParams<T>,
    ) -> Result<Self> {
        let xb = grid.bounds()[0];
        if !(src.x < xb.lo && xb.hi < obs.x) {
            return Err(Error::Ordering(format!(
                "field slab [{}, {}] must lie strictly between x = {} and x = {}",
                xb.lo, xb.hi, src.x, obs.x
            )));
        }
        let base = gp(obs, src, wave)?;
        let k = grid
            .nodes()
            .iter()
            .map(|n| kernel_kprime(obs, src, &n.point.to_paraxial(), wave))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            observation: obs.to_point(),
            source: src.to_point(),
            base,
            k,
            excluded_volume: T::zero(),
            retained: grid.len(),
            k0: wave.k0(),
        })
    }

    pub fn observation(&self) -> &Point3<T> {
        &self.observation
    }

    pub fn source(&self) -> &Point3<T> {
        &self.source
    }

    /// Free-space value (`G₀` or `G_p`).
    pub fn base(&self) -> Complex<T> {
        self.base
    }

    /// Kernel values per cell, zero where excluded.
    pub fn values(&self) -> &[Complex<T>] {
        &self.k
    }

    pub fn excluded_volume(&self) -> T {
        self.excluded_volume
    }

    pub fn retained(&self) -> usize {
        self.retained
    }

    pub fn k0(&self) -> T {
        self.k0
    }

    /// `∫ 2k₀² n₁ K dζ` for one realization (without the factor `δ`).
    pub fn exponent(&self, field: &[T], grid: &QuadratureGrid<T>) -> Complex<T> {
        let nodes = grid.nodes();
        let re = compensated_sum(self.k.iter().zip(field).zip(nodes).map(|((k, n), w)| k.re * *n * w.weight));
        let im = compensated_sum(self.k.iter().zip(field).zip(nodes).map(|((k, n), w)| k.im * *n * w.weight));
        Complex::new(re, im) * (T::lit(2.0) * self.k0 * self.k0)
    }

    /// `∫ K² dζ` (not `|K|²`).
    pub fn square_integral(&self, grid: &QuadratureGrid<T>) -> Complex<T> {
        let nodes = grid.nodes();
        let sq = |k: &Complex<T>| *k * *k;
        let re = compensated_sum(self.k.iter().zip(nodes).map(|(k, w)| sq(k).re * w.weight));
        let im = compensated_sum(self.k.iter().zip(nodes).map(|(k, w)| sq(k).im * w.weight));
        Complex::new(re, im)
    }

    pub fn turbulent(&self, delta: T, field: &RefractiveFieldRealization<T>, grid: &QuadratureGrid<T>) -> Result<TurbulentGreens<T>> {
        field.check_grid(grid)?;
        if self.k.len() != grid.len() {
            return Err(Error::param("grid", "kernel was built on a different grid"));
        }
        let exponent = if delta == T::zero() {
            Complex::from(T::zero())
        } else {
            self.exponent(field.values(), grid) * delta
        };
        let value = if delta == T::zero() { self.base } else { self.base * exponent.exp() };
        Ok(TurbulentGreens {
            observation: self.observation,
            source: self.source,
            value,
            exponent,
            delta,
            seed: field.seed(),
            realization: field.index(),
            excluded_volume: self.excluded_volume,
        })
    }

    /// White-noise mean `base·exp(c·δ²σ²k₀⁴∫K²)`.
    pub fn mean(&self, delta: T, sigma: T, grid: &QuadratureGrid<T>, convention: Convention) -> Complex<T> {
        let k2 = self.k0 * self.k0;
        let c = convention.mean_green_coefficient::<T>() * delta * delta * sigma * sigma * k2 * k2;
        if c == T::zero() {
            return self.base;
        }
        self.base * (self.square_integral(grid) * c).exp()
    }
}

/// Turbulent Green's function for one frozen realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulentGreens<T> {
    pub observation: Point3<T>,
    pub source: Point3<T>,
    pub value: Complex<T>,
    /// `δ∫2k₀²n₁K`.
    pub exponent: Complex<T>,
    pub delta: T,
    pub seed: u64,
    pub realization: u64,
    pub excluded_volume: T,
}

/// `G(r, ξ) = G₀(r, ξ)·exp(δ∫2k₀²n₁(ζ)K(r,ξ,ζ)dζ)` for one realization.
pub fn turbulent_green<T: Real>(
    r: &Point3<T>,
    xi: &Point3<T>,
    delta: T,
    field: &RefractiveFieldRealization<T>,
    grid: &QuadratureGrid<T>,
    wave: &WaveParams<T>,
) -> Result<TurbulentGreens<T>> {
    RatioKernel::spherical(r, xi, grid, wave)?.turbulent(delta, field, grid)
}

/// Ensemble mean of [`turbulent_green`] under white noise of strength `spec.sigma()`.
pub fn mean_turbulent_green<T: Real>(
    r: &Point3<T>,
    xi: &Point3<T>,
    spec: &TurbulenceSpec<T>,
    wave: &WaveParams<T>,
    convention: Convention,
) -> Result<Complex<T>> {
    let grid = spec.grid();
    Ok(RatioKernel::spherical(r, xi, grid, wave)?.mean(spec.delta(), spec.sigma(), grid, convention))
}

/// `G′ = G_p·exp(δ∫2k₀²n₁K′)` for one realization; the field slab must sit
/// strictly between `src` and `obs`.
pub fn parabolic_turbulent_green<T: Real>(
    obs: &ParaxialCoords<T>,
    src: &ParaxialCoords<T>,
    delta: T,
    field: &RefractiveFieldRealization<T>,
    grid: &QuadratureGrid<T>,
    wave: &WaveParams<T>,
) -> Result<TurbulentGreens<T>> {
    RatioKernel::paraxial(obs, src, grid, wave)?.turbulent(delta, field, grid)
}

/// Anything that returns a Green's function `G(obs, src)`.
pub trait GreenEvaluator<T: Real>: Sync {
    fn green(&self, obs: &Point3<T>, src: &Point3<T>) -> Result<Complex<T>>;
}

/// Homogeneous medium: `G = G₀`.
#[derive(Debug, Clone, Copy)]
pub struct FreeSpace<T> {
    pub wave: WaveParams<T>,
}

impl<T: Real> GreenEvaluator<T> for FreeSpace<T> {
    fn green(&self, obs: &Point3<T>, src: &Point3<T>) -> Result<Complex<T>> {
        g0(obs, src, &self.wave)
    }
}

/// One frozen realization of the turbulent medium.
#[derive(Debug, Clone, Copy)]
pub struct FrozenMedium<'a, T> {
    pub wave: WaveParams<T>,
    pub delta: T,
    pub field: &'a RefractiveFieldRealization<T>,
    pub grid: &'a QuadratureGrid<T>,
}

impl<T: Real> GreenEvaluator<T> for FrozenMedium<'_, T> {
    fn green(&self, obs: &Point3<T>, src: &Point3<T>) -> Result<Complex<T>> {
        Ok(turbulent_green(obs, src, self.delta, self.field, self.grid, &self.wave)?.value)
    }
}

/// `max |G(a,b) − G(b,a)| / |G(a,b)|` over the pairs.
pub fn reciprocity_defect<T: Real, E: GreenEvaluator<T> + ?Sized>(g: &E, pairs: &[(Point3<T>, Point3<T>)]) -> Result<T> {
    let mut worst = T::zero();
    for (a, b) in pairs {
        let ab = g.green(a, b)?;
        let ba = g.green(b, a)?;
        worst = worst.max((ab - ba).norm() / ab.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_grid, Interval, QuadratureRule};
    use crate::turbulence::sample_field;
    use std::f64::consts::PI;

    fn cube(n: usize) -> QuadratureGrid<f64> {
        let b = [Interval::new(-1.0, 1.0); 3];
        build_grid(b, [n; 3], QuadratureRule::Midpoint).unwrap()
    }

    fn single_cell(grid: &QuadratureGrid<f64>, c: usize, v: f64) -> RefractiveFieldRealization<f64> {
        let mut vals = vec![0.0; grid.len()];
        vals[c] = v;
        RefractiveFieldRealization::from_values(grid, vals).unwrap()
    }

    #[test]
    fn convention_coefficients() {
        assert_eq!(Convention::Gaussian.mean_green_coefficient::<f64>(), 2.0);
        assert_eq!(Convention::Paper.mean_green_coefficient::<f64>(), 4.0);
    }

    #[test]
    fn zero_field_gives_zero_phi1() {
        let g = cube(4);
        let w = WaveParams::from_wavelength(1.0).unwrap();
        let r = Point3::new(3.0, 0.2, 0.1);
        let z = RefractiveFieldRealization::zeros(&g);
        assert_eq!(phi1_full(&r, &BackgroundField::plane_wave(w), &z, &g).unwrap().value, Complex::new(0.0, 0.0));
    }

    #[test]
    fn single_cell_phi1_plane_wave() {
        let g = cube(4);
        let w = WaveParams::from_wavelength(0.9).unwrap();
        let k = w.k0();
        let r = Point3::new(3.0, 0.2, 0.1);
        let c = 37;
        let f = single_cell(&g, c, 0.7);
        let node = g.nodes()[c];
        let d = r.distance(&node.point);
        let expect = cis(k * (node.point.x - r.x)) * cis(k * d) * (k * k / (2.0 * PI) * 0.7 * node.weight / d);
        let got = phi1_full(&r, &BackgroundField::plane_wave(w), &f, &g).unwrap().value;
        assert!((got - expect).norm() < 1e-13 * expect.norm());
    }

    #[test]
    fn phi1_rejects_vanishing_background() {
        let g = cube(2);
        let w = WaveParams::from_wavelength(1.0).unwrap();
        let bg = BackgroundField::beam_wave(w, 1e3).unwrap();
        let r = Point3::new(0.0, 10.0, 0.0);
        let f = RefractiveFieldRealization::zeros(&g);
        assert!(matches!(phi1_full(&r, &bg, &f, &g), Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn single_cell_exponent_identity() {
        let g = cube(4);
        let w = WaveParams::from_wavelength(1.3).unwrap();
        let (r, xi) = (Point3::new(2.5, 0.0, 0.3), Point3::new(-2.0, 0.4, 0.0));
        let c = 21;
        let f = single_cell(&g, c, -0.4);
        let node = g.nodes()[c];
        let delta = 0.01;
        let t = turbulent_green(&r, &xi, delta, &f, &g, &w).unwrap();
        let kk = crate::greens::kernel_k(&r, &xi, &node.point, &w).unwrap();
        let expect = kk * (delta * 2.0 * w.k0().powi(2) * -0.4 * node.weight);
        assert!((t.exponent - expect).norm() < 1e-13 * expect.norm());
        let zero = turbulent_green(&r, &xi, 0.0, &f, &g, &w).unwrap();
        assert_eq!(zero.value, g0(&r, &xi, &w).unwrap());
    }

    #[test]
    fn frozen_medium_is_reciprocal() {
        let g = cube(6);
        let w = WaveParams::from_wavelength(0.5).unwrap();
        let spec = TurbulenceSpec::new(0.05, 0.1, g, 3).unwrap();
        let f = sample_field(&spec, 0);
        let m = FrozenMedium {
            wave: w,
            delta: 0.05,
            field: &f,
            grid: spec.grid(),
        };
        let pairs = [
            (Point3::new(0.1, 0.2, 0.3), Point3::new(-0.5, 0.9, -0.2)),
            (Point3::new(4.0, 0.0, 0.0), Point3::new(-4.0, 1.0, 0.0)),
        ];
        assert_eq!(reciprocity_defect(&m, &pairs).unwrap(), 0.0);
    }

    #[test]
    fn mean_without_noise_is_free_space() {
        let g = cube(4);
        let w = WaveParams::from_wavelength(1.0).unwrap();
        let spec = TurbulenceSpec::new(0.1, 0.0, g, 1).unwrap();
        let (r, xi) = (Point3::new(2.0, 0.0, 0.0), Point3::new(-2.0, 0.0, 0.0));
        let m = mean_turbulent_green(&r, &xi, &spec, &w, Convention::Paper).unwrap();
        assert_eq!(m, g0(&r, &xi, &w).unwrap());
    }

    #[test]
    fn beam_wave_limits() {
        let w = WaveParams::from_wavelength(0.6).unwrap();
        let k = w.k0();
        let a = 0.3;
        let p0 = ParaxialCoords::new(0.0, crate::TransversePoint::new(0.4, -0.2));
        let v = beam_field(&p0, a, &w);
        assert!((v.re - (-(0.2f64) * a * k / 2.0).exp()).abs() < 1e-15 && v.im.abs() < 1e-15);
        let axis = ParaxialCoords::new(2.0, crate::TransversePoint::origin());
        let v = beam_field(&axis, a, &w);
        let e = cis(k * 2.0) / Complex::new(1.0, 2.0 * a);
        assert!((v - e).norm() < 1e-15);
        // α → 0 recovers the plane wave
        let p = ParaxialCoords::new(3.0, crate::TransversePoint::new(0.1, 0.05));
        for small in [1e-4, 1e-6] {
            let err = (beam_field(&p, small, &w) - cis(k * 3.0)).norm();
            assert!(err < small * 3.0 * (1.0 + k * p.rho.norm_sq() / 2.0) * 1.01);
        }
    }

    #[test]
    fn beam_envelope_solves_the_paraxial_equation() {
        let w = WaveParams::from_wavelength(1.0).unwrap();
        let a = 0.2;
        let f = |p: &ParaxialCoords<f64>| beam_envelope(p, a, &w);
        let probe = ParaxialCoords::new(1.5, crate::TransversePoint::new(0.3, -0.6));
        let r1 = crate::paraxial_residual(f, &w, &probe, 0.02, None).unwrap().norm();
        let r2 = crate::paraxial_residual(f, &w, &probe, 0.01, None).unwrap().norm();
        assert!((r1 / r2).log2() > 1.9, "{}", (r1 / r2).log2());
    }

    #[test]
    fn plane_wave_parabolic_equals_general_with_unit_envelope() {
        let b = [Interval::new(0.5, 2.5), Interval::new(-1.0, 1.0), Interval::new(-1.0, 1.0)];
        let g = build_grid(b, [4, 3, 3], QuadratureRule::Midpoint).unwrap();
        let w = WaveParams::from_wavelength(0.8).unwrap();
        let k = w.k0();
        let spec = TurbulenceSpec::new(0.1, 0.3, g, 5).unwrap();
        let f = sample_field(&spec, 2);
        let obs = ParaxialCoords::new(4.0, crate::TransversePoint::new(0.1, -0.2));
        let got = phi1_parabolic(&obs, &BackgroundField::plane_wave(w), &f, spec.grid()).unwrap().value;
        let mut expect = Complex::new(0.0, 0.0);
        for (node, n1) in spec.grid().nodes().iter().zip(f.values()) {
            let c = node.point.to_paraxial();
            let gap = obs.x - c.x;
            expect += cis(k * obs.rho.distance_sq(&c.rho) / (2.0 * gap)) * (n1 / gap * node.weight);
        }
        expect *= k * k / (2.0 * PI);
        assert!((got - expect).norm() < 1e-12 * expect.norm());
        let far = ParaxialCoords::new(2.0, crate::TransversePoint::origin());
        assert!(phi1_parabolic(&far, &BackgroundField::plane_wave(w), &f, spec.grid()).is_err());
    }

    #[test]
    fn parabolic_green_single_cell_and_reflection() {
        let b = [Interval::new(1.0, 3.0), Interval::new(-1.0, 1.0), Interval::new(-1.0, 1.0)];
        let (nx, ny, nz) = (4, 3, 3);
        let g = build_grid(b, [nx, ny, nz], QuadratureRule::Midpoint).unwrap();
        let w = WaveParams::from_wavelength(0.7).unwrap();
        let obs = ParaxialCoords::new(4.0, crate::TransversePoint::new(0.2, 0.1));
        let src = ParaxialCoords::new(0.0, crate::TransversePoint::new(-0.3, 0.0));
        let zero = RefractiveFieldRealization::zeros(&g);
        let t0 = parabolic_turbulent_green(&obs, &src, 0.3, &zero, &g, &w).unwrap();
        assert_eq!(t0.value, gp(&obs, &src, &w).unwrap());

        let c = 10;
        let f = single_cell(&g, c, 1.5);
        let node = g.nodes()[c];
        let t = parabolic_turbulent_green(&obs, &src, 0.02, &f, &g, &w).unwrap();
        let kp = kernel_kprime(&obs, &src, &node.point.to_paraxial(), &w).unwrap();
        let expect = kp * (0.02 * 2.0 * w.k0().powi(2) * 1.5 * node.weight);
        assert!((t.exponent - expect).norm() < 1e-13 * expect.norm());

        // x -> 4 - x maps the slab onto itself; reflect the field along with the endpoints
        let spec = TurbulenceSpec::new(0.02, 0.2, g.clone(), 8).unwrap();
        let f = sample_field(&spec, 0);
        let mut refl = vec![0.0; g.len()];
        for ix in 0..nx {
            for j in 0..ny * nz {
                refl[(nx - 1 - ix) * ny * nz + j] = f.values()[ix * ny * nz + j];
            }
        }
        let fr = RefractiveFieldRealization::from_values(&g, refl).unwrap();
        let a = parabolic_turbulent_green(&obs, &src, 0.02, &f, &g, &w).unwrap();
        let src_r = ParaxialCoords::new(4.0, src.rho);
        let obs_r = ParaxialCoords::new(0.0, obs.rho);
        let b = parabolic_turbulent_green(&src_r, &obs_r, 0.02, &fr, &g, &w).unwrap();
        assert!((a.exponent - b.exponent).norm() < 1e-12 * a.exponent.norm());
        assert!(parabolic_turbulent_green(&ParaxialCoords::new(2.0, obs.rho), &src, 0.02, &f, &g, &w).is_err());
    }
}
