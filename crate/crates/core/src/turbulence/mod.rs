//! Refractive-index physics of the turbulent atmosphere and white-noise
//! realizations of the fluctuation field `n₁`.

mod atmosphere;
mod field;
mod profile;

pub use atmosphere::{cn_from_ct, delta_n_from_delta_t, refractivity, AtmosphericState, REFRACTIVITY_COEFFICIENT};
pub use field::{sample_field, RefractiveFieldRealization, TurbulenceSpec};
pub use profile::{rytov_validity, CnProfile, RytovValidity};
