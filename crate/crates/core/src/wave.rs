use crate::error::{Error, Result};
use crate::scalar::Real;

/// Monochromatic wave: wavelength and free-space wavenumber `k₀ = 2π/λ`.
///
/// The static limit `k₀ = 0` is representable through
/// [`WaveParams::from_wavenumber`]; its wavelength is `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams<T> {
    wavelength: T,
    wavenumber: T,
}

impl<T: Real> WaveParams<T> {
    pub fn from_wavelength(wavelength: T) -> Result<Self> {
        if !(wavelength > T::zero()) || !wavelength.is_finite() {
            return Err(Error::param("wavelength", format!("must be positive and finite, got {wavelength}")));
        }
        Ok(Self {
            wavelength,
            wavenumber: T::TAU() / wavelength,
        })
    }

    pub fn from_wavenumber(wavenumber: T) -> Result<Self> {
        if !(wavenumber >= T::zero()) || !wavenumber.is_finite() {
            return Err(Error::param("wavenumber", format!("must be finite and >= 0, got {wavenumber}")));
        }
        let wavelength = if wavenumber == T::zero() {
            T::infinity()
        } else {
            T::TAU() / wavenumber
        };
        Ok(Self {
            wavelength,
            wavenumber,
        })
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    /// `k₀` in 1/m.
    pub fn k0(&self) -> T {
        self.wavenumber
    }
}
