use crate::error::{Error, Result};
use crate::quadrature::QuadratureGrid;
use crate::rng::NormalStream;
use crate::scalar::Real;
use std::sync::Arc;

/// Strength and discretization of the white-noise index fluctuation `δ·n₁`.
///
/// `σ` has units m^(3/2): `E[n₁(ζ₁) n₁(ζ₂)] = σ² δ³(ζ₁ − ζ₂)`.
#[derive(Debug, Clone)]
pub struct TurbulenceSpec<T> {
    delta: T,
    sigma: T,
    grid: Arc<QuadratureGrid<T>>,
    seed: u64,
}

impl<T: Real> TurbulenceSpec<T> {
    pub fn new(delta: T, sigma: T, grid: impl Into<Arc<QuadratureGrid<T>>>, seed: u64) -> Result<Self> {
        if !(delta >= T::zero()) || !delta.is_finite() {
            return Err(Error::param("delta", "must be finite and >= 0"));
        }
        if !(sigma >= T::zero()) || !sigma.is_finite() {
            return Err(Error::param("sigma", "must be finite and >= 0"));
        }
        Ok(Self {
            delta,
            sigma,
            grid: grid.into(),
            seed,
        })
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid<T>> {
        &self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn with_delta(&self, delta: T) -> Result<Self> {
        Self::new(delta, self.sigma, self.grid.clone(), self.seed)
    }

    /// Typical size of `δ·n₁` on the smallest cell, `δσ/√V_min`. Not enforced;
    /// first-order theory wants it well below 1.
    pub fn smallness(&self) -> T {
        let v_min = self
            .grid
            .nodes()
            .iter()
            .map(|n| n.weight)
            .fold(T::infinity(), T::min);
        self.delta * self.sigma / v_min.sqrt()
    }

    /// `δ²σ²k₀⁴·ℓ` with `ℓ` the grid diagonal, the scale of the log-amplitude
    /// variance in the white-noise closure.
    pub fn closure_strength(&self, k0: T) -> T {
        let b = self.grid.bounds();
        let diag = (b[0].len().powi(2) + b[1].len().powi(2) + b[2].len().powi(2)).sqrt();
        let k2 = k0 * k0;
        self.delta * self.delta * self.sigma * self.sigma * k2 * k2 * diag
    }
}

/// One sample of `n₁`, one value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RefractiveFieldRealization<T> {
    values: Vec<T>,
    seed: u64,
    index: u64,
}

impl<T: Real> RefractiveFieldRealization<T> {
    /// Field with explicit cell values, e.g. a single excited cell.
    pub fn from_values(grid: &QuadratureGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::param(
                "field",
                format!("{} values for a grid of {} cells", values.len(), grid.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("field", "values must be finite"));
        }
        Ok(Self {
            values,
            seed: 0,
            index: 0,
        })
    }

    pub fn zeros(grid: &QuadratureGrid<T>) -> Self {
        Self {
            values: vec![T::zero(); grid.len()],
            seed: 0,
            index: 0,
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            values: self.values.iter().map(|v| *v * a).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn check_grid(&self, grid: &QuadratureGrid<T>) -> Result<()> {
        if self.values.len() != grid.len() {
            return Err(Error::param(
                "field",
                format!("realization has {} cells, grid has {}", self.values.len(), grid.len()),
            ));
        }
        Ok(())
    }
}

/// Realization `index` of the field: cell `c` is `σ/√V_c · Z`, `Z` the standard
/// normal deviate `c` of stream `(seed, index)`.
pub fn sample_field<T: Real>(spec: &TurbulenceSpec<T>, realization_index: u64) -> RefractiveFieldRealization<T> {
    let mut rng = NormalStream::new(spec.seed, realization_index);
    let values = spec
        .grid
        .nodes()
        .iter()
        .map(|n| {
            let z = rng.next_normal();
            if spec.sigma == T::zero() {
                T::zero()
            } else {
                spec.sigma / n.weight.sqrt() * T::lit(z)
            }
        })
        .collect();
    RefractiveFieldRealization {
        values,
        seed: spec.seed,
        index: realization_index,
    }
}
