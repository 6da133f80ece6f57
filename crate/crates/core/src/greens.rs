//! Free-space kernels of the Helmholtz and paraxial wave equations, the ratio
//! kernels `K` and `K′`, and finite-difference residual checkers.

use crate::error::{Error, Result};
use crate::geometry::{ParaxialCoords, Point3, TransversePoint};
use crate::scalar::{cis, imag, Real};
use crate::wave::WaveParams;
use num_complex::Complex;

/// A kernel value together with the points it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensSample<T> {
    pub source: Point3<T>,
    pub observation: Point3<T>,
    pub value: Complex<T>,
}

impl<T: Real> GreensSample<T> {
    pub fn evaluate(observation: Point3<T>, source: Point3<T>, wave: &WaveParams<T>) -> Result<Self> {
        Ok(Self {
            source,
            observation,
            value: g0(&observation, &source, wave)?,
        })
    }
}

fn four_pi<T: Real>() -> T {
    T::lit(4.0) * T::PI()
}

/// `e^{ik₀d}/(4πd)`.
#[inline]
pub(crate) fn g0_distance<T: Real>(d: T, k: T) -> Complex<T> {
    cis(k * d) / (four_pi::<T>() * d)
}

/// Outgoing spherical wave `e^{ik₀|r−ξ|}/(4π|r−ξ|)`.
pub fn g0<T: Real>(r: &Point3<T>, xi: &Point3<T>, wave: &WaveParams<T>) -> Result<Complex<T>> {
    let d = r.distance(xi);
    if !(d > T::zero()) {
        return Err(Error::CoincidentPoints("g0 needs r != xi"));
    }
    Ok(g0_distance(d, wave.k0()))
}

/// `|r·(∂G/∂r − ik₀G)|` for `g0` centred at `xi`, along the `+x` direction.
pub fn radiation_defect<T: Real>(xi: &Point3<T>, wave: &WaveParams<T>, radii: &[T]) -> Result<Vec<T>> {
    if radii.iter().any(|r| !(*r > T::zero())) {
        return Err(Error::param("radii", "must be positive"));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("radii", "must be increasing"));
    }
    let k = wave.k0();
    radii
        .iter()
        .map(|&r| {
            let p = *xi + Point3::new(r, T::zero(), T::zero());
            let g = g0(&p, xi, wave)?;
            let dg_dr = (imag(k) - Complex::from(T::one() / r)) * g;
            Ok(((dg_dr - imag(k) * g) * r).norm())
        })
        .collect()
}

/// `Δu + k₀²n²u` at `probe` by the 7-point central-difference Laplacian of step `h`.
///
/// `singularities` lists points where `field` is not smooth; the probe must be
/// farther than `3h` from each.
pub fn helmholtz_residual<T: Real>(
    field: impl Fn(&Point3<T>) -> Complex<T>,
    n: impl Fn(&Point3<T>) -> T,
    wave: &WaveParams<T>,
    probe: &Point3<T>,
    h: T,
    singularities: &[Point3<T>],
) -> Result<Complex<T>> {
    check_step(h)?;
    for s in singularities {
        let d = probe.distance(s);
        if !(d > T::lit(3.0) * h) {
            return Err(too_close(d, h));
        }
    }
    let u = field(probe);
    let z = T::zero();
    let steps = [
        Point3::new(h, z, z),
        Point3::new(z, h, z),
        Point3::new(z, z, h),
    ];
    let mut lap = u * T::lit(-6.0);
    for s in steps {
        lap = lap + field(&(*probe + s)) + field(&(*probe - s));
    }
    let k = wave.k0();
    let ni = n(probe);
    Ok(lap / (h * h) + u * (k * k * ni * ni))
}

/// `2ik₀∂ₓv + Δ_ρ v` at `probe` by central differences of step `h` in all three
/// directions. `source`, if given, must lie farther than `3h` away.
pub fn paraxial_residual<T: Real>(
    field: impl Fn(&ParaxialCoords<T>) -> Complex<T>,
    wave: &WaveParams<T>,
    probe: &ParaxialCoords<T>,
    h: T,
    source: Option<&ParaxialCoords<T>>,
) -> Result<Complex<T>> {
    check_step(h)?;
    if let Some(s) = source {
        let d = probe.to_point().distance(&s.to_point());
        if !(d > T::lit(3.0) * h) {
            return Err(too_close(d, h));
        }
    }
    let at = |dx: T, dy: T, dz: T| {
        field(&ParaxialCoords::new(
            probe.x + dx,
            TransversePoint::new(probe.rho.y + dy, probe.rho.z + dz),
        ))
    };
    let z = T::zero();
    let v = at(z, z, z);
    let dvdx = (at(h, z, z) - at(-h, z, z)) / (T::lit(2.0) * h);
    let lap = (at(z, h, z) + at(z, -h, z) + at(z, z, h) + at(z, z, -h) - v * T::lit(4.0)) / (h * h);
    Ok(imag(T::lit(2.0) * wave.k0()) * dvdx + lap)
}

fn check_step<T: Real>(h: T) -> Result<()> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::param("h", "step must be positive"));
    }
    Ok(())
}

fn too_close<T: Real>(d: T, h: T) -> Error {
    Error::ProbeTooClose {
        distance: d.to_f64_lossy(),
        required: (T::lit(3.0) * h).to_f64_lossy(),
    }
}

/// Paraxial Green's function `e^{ik₀|ρ−θ|²/(2(x−σ))}/(4π(x−σ))`, forward only.
pub fn gp<T: Real>(obs: &ParaxialCoords<T>, src: &ParaxialCoords<T>, wave: &WaveParams<T>) -> Result<Complex<T>> {
    let gap = axial_gap(obs, src)?;
    Ok(gp_parts(gap, obs.rho.distance_sq(&src.rho), wave.k0()))
}

#[inline]
fn gp_parts<T: Real>(gap: T, offset_sq: T, k: T) -> Complex<T> {
    cis(k * offset_sq / (T::lit(2.0) * gap)) / (four_pi::<T>() * gap)
}

fn axial_gap<T: Real>(obs: &ParaxialCoords<T>, src: &ParaxialCoords<T>) -> Result<T> {
    let gap = obs.x - src.x;
    if !(gap > T::zero()) {
        return Err(Error::Ordering(format!(
            "paraxial kernel needs obs.x > src.x (got {} <= {})",
            obs.x, src.x
        )));
    }
    Ok(gap)
}

/// `K(r, ξ, ζ) = G₀(ζ,ξ)·G₀(r,ζ)/G₀(r,ξ)`.
///
/// Evaluated as `e^{ik₀(d₁+d₂−d)}·d/(4π d₁ d₂)`, which is exactly symmetric in
/// `r ↔ ξ`.
pub fn kernel_k<T: Real>(r: &Point3<T>, xi: &Point3<T>, zeta: &Point3<T>, wave: &WaveParams<T>) -> Result<Complex<T>> {
    let d = r.distance(xi);
    if !(d > T::zero()) {
        return Err(Error::CoincidentPoints("kernel K needs r != xi"));
    }
    let d1 = zeta.distance(xi);
    let d2 = r.distance(zeta);
    if !(d1 > T::zero() && d2 > T::zero()) {
        return Err(Error::CoincidentPoints("kernel K needs zeta away from r and xi"));
    }
    Ok(kernel_k_distances(d, d1, d2, wave.k0()))
}

#[inline]
pub(crate) fn kernel_k_distances<T: Real>(d: T, d1: T, d2: T, k: T) -> Complex<T> {
    cis(k * ((d1 + d2) - d)) * (d / (four_pi::<T>() * (d1 * d2)))
}

/// Paraxial counterpart `K′ = gp(mid,src)·gp(obs,mid)/gp(obs,src)`.
pub fn kernel_kprime<T: Real>(
    obs: &ParaxialCoords<T>,
    src: &ParaxialCoords<T>,
    mid: &ParaxialCoords<T>,
    wave: &WaveParams<T>,
) -> Result<Complex<T>> {
    let g = axial_gap(obs, src)?;
    let g1 = axial_gap(mid, src)?;
    let g2 = axial_gap(obs, mid)?;
    let two = T::lit(2.0);
    let phase = mid.rho.distance_sq(&src.rho) / (two * g1) + obs.rho.distance_sq(&mid.rho) / (two * g2)
        - obs.rho.distance_sq(&src.rho) / (two * g);
    Ok(cis(wave.k0() * phase) * (g / (four_pi::<T>() * (g1 * g2))))
}
