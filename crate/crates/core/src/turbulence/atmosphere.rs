use crate::error::{Error, Result};
use crate::scalar::Real;

/// Optical-band value of `3C₁/(2k)` in the linearised Lorenz–Lorentz relation,
/// in K/mbar.
pub const REFRACTIVITY_COEFFICIENT: f64 = 79e-6;

/// Air pressure (millibars), temperature (kelvins) and adiabatic exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphericState<T> {
    pressure_mb: T,
    temperature_k: T,
    gamma: T,
}

impl<T: Real> AtmosphericState<T> {
    /// State with the adiabatic exponent of air, `γ = 1.4`.
    pub fn new(pressure_mb: T, temperature_k: T) -> Result<Self> {
        Self::with_gamma(pressure_mb, temperature_k, T::lit(1.4))
    }

    pub fn with_gamma(pressure_mb: T, temperature_k: T, gamma: T) -> Result<Self> {
        if !(pressure_mb > T::zero()) || !pressure_mb.is_finite() {
            return Err(Error::param("pressure", "must be positive (mbar)"));
        }
        if !(temperature_k > T::zero()) || !temperature_k.is_finite() {
            return Err(Error::param("temperature", "must be positive (K)"));
        }
        if !(gamma > T::one()) || !gamma.is_finite() {
            return Err(Error::param("gamma", "adiabatic exponent must exceed 1"));
        }
        Ok(Self {
            pressure_mb,
            temperature_k,
            gamma,
        })
    }

    pub fn pressure_mb(&self) -> T {
        self.pressure_mb
    }

    pub fn temperature_k(&self) -> T {
        self.temperature_k
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }
}

/// `n − 1 = 79·10⁻⁶ · p / T`.
pub fn refractivity<T: Real>(state: &AtmosphericState<T>) -> T {
    T::lit(REFRACTIVITY_COEFFICIENT) * state.pressure_mb / state.temperature_k
}

/// Index fluctuation produced by an adiabatic temperature fluctuation:
/// `δn = 79·10⁻⁶/(γ − 1) · p/T² · δT`.
pub fn delta_n_from_delta_t<T: Real>(state: &AtmosphericState<T>, delta_t: T) -> T {
    T::lit(REFRACTIVITY_COEFFICIENT) / (state.gamma - T::one()) * state.pressure_mb
        / (state.temperature_k * state.temperature_k)
        * delta_t
}

/// Index structure constant from the temperature structure constant:
/// `Cₙ = 79·10⁻⁶ · p/T² · C_T`.
pub fn cn_from_ct<T: Real>(state: &AtmosphericState<T>, c_t: T) -> Result<T> {
    if !(c_t >= T::zero()) || !c_t.is_finite() {
        return Err(Error::param("C_T", "must be finite and >= 0"));
    }
    Ok(T::lit(REFRACTIVITY_COEFFICIENT) * state.pressure_mb
        / (state.temperature_k * state.temperature_k)
        * c_t)
}
