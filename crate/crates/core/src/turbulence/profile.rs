use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss_legendre, compensated_sum};
use crate::scalar::Real;
use crate::wave::WaveParams;
use std::path::Path;

/// Built-in standard profile: height in km, `Cₙ` in units of `10⁻⁸ m^(−1/3)`.
const STANDARD_TABLE: [(f64, f64); 8] = [
    (0.001, 30.0),
    (0.003, 20.0),
    (0.01, 15.0),
    (0.03, 10.0),
    (0.1, 6.0),
    (0.3, 4.0),
    (1.0, 1.0),
    (3.0, 1.0),
];

/// Index structure constant `Cₙ` (m^(−1/3)) as a function of height.
#[derive(Debug, Clone, PartialEq)]
pub enum CnProfile<T> {
    /// Knots `(height km, Cₙ)`, strictly increasing in height, interpolated
    /// linearly in `ln(height)`.
    Tabulated { heights_km: Vec<T>, cn: Vec<T> },
    Constant(T),
}

impl<T: Real> CnProfile<T> {
    /// The typical daytime profile shipped with the library (8 knots, 1 m to 3 km).
    pub fn standard() -> Self {
        Self::Tabulated {
            heights_km: STANDARD_TABLE.iter().map(|r| T::lit(r.0)).collect(),
            cn: STANDARD_TABLE.iter().map(|r| T::lit(r.1 * 1e-8)).collect(),
        }
    }

    pub fn tabulated(heights_km: Vec<T>, cn: Vec<T>) -> Result<Self> {
        if heights_km.len() != cn.len() || heights_km.is_empty() {
            return Err(Error::param("profile", "need matching, non-empty height and Cn columns"));
        }
        if heights_km.iter().any(|h| !(*h > T::zero()) || !h.is_finite()) {
            return Err(Error::param("profile", "heights must be positive"));
        }
        if heights_km.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("profile", "heights must be strictly increasing"));
        }
        if cn.iter().any(|c| !(*c > T::zero()) || !c.is_finite()) {
            return Err(Error::param("profile", "Cn values must be positive"));
        }
        Ok(Self::Tabulated { heights_km, cn })
    }

    pub fn constant(cn: T) -> Result<Self> {
        if !(cn >= T::zero()) || !cn.is_finite() {
            return Err(Error::param("Cn", "must be finite and >= 0"));
        }
        Ok(Self::Constant(cn))
    }

    /// Constant profile given by `Cₙ²` (m^(−2/3)).
    pub fn constant_cn2(cn2: T) -> Result<Self> {
        if !(cn2 >= T::zero()) {
            return Err(Error::param("Cn2", "must be >= 0"));
        }
        Self::constant(cn2.sqrt())
    }

    /// Parses two whitespace- or comma-separated columns `height_km Cn`.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut h = Vec::new();
        let mut c = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|ch: char| ch == ',' || ch.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::ProfileParse {
                    line: i + 1,
                    reason: format!("expected 2 columns, found {}", cols.len()),
                });
            }
            let num = |s: &str| {
                s.parse::<f64>().map(T::lit).map_err(|e| Error::ProfileParse {
                    line: i + 1,
                    reason: format!("`{s}`: {e}"),
                })
            };
            h.push(num(cols[0])?);
            c.push(num(cols[1])?);
        }
        Self::tabulated(h, c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }

    /// Height range in km; unbounded for a constant profile.
    pub fn range_km(&self) -> (T, T) {
        match self {
            Self::Tabulated { heights_km, .. } => (heights_km[0], *heights_km.last().unwrap()),
            Self::Constant(_) => (T::zero(), T::infinity()),
        }
    }

    /// `Cₙ` at `height_km`. Exact at the knots; no extrapolation.
    pub fn cn_lookup(&self, height_km: T) -> Result<T> {
        match self {
            Self::Constant(c) => {
                if !(height_km >= T::zero()) || !height_km.is_finite() {
                    return Err(out_of_range(height_km, T::zero(), T::infinity()));
                }
                Ok(*c)
            }
            Self::Tabulated { heights_km, cn } => {
                let (lo, hi) = self.range_km();
                if !(height_km >= lo && height_km <= hi) {
                    return Err(out_of_range(height_km, lo, hi));
                }
                // index of the first knot >= height
                let j = heights_km.partition_point(|h| *h < height_km);
                if heights_km[j] == height_km {
                    return Ok(cn[j]);
                }
                let (h0, h1) = (heights_km[j - 1], heights_km[j]);
                let t = (height_km / h0).ln() / (h1 / h0).ln();
                Ok(cn[j - 1] + t * (cn[j] - cn[j - 1]))
            }
        }
    }
}

fn out_of_range<T: Real>(h: T, lo: T, hi: T) -> Error {
    Error::OutOfRange {
        height_km: h.to_f64_lossy(),
        min_km: lo.to_f64_lossy(),
        max_km: hi.to_f64_lossy(),
    }
}

/// Result of the weak-fluctuation test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RytovValidity<T> {
    pub value: T,
    pub valid: bool,
}

/// `k₀^(7/6) ∫₀ᴸ Cₙ²(z) z^(5/6) dz` along a vertical path starting at the ground,
/// and whether it is below 1.
///
/// Heights below the first knot of a tabulated profile take the first knot's
/// value; a path reaching above the last knot is an error. The integral is
/// computed in `u = z^(1/6)`, which turns `z^(5/6) dz` into the polynomial
/// `6u¹⁰ du`; panels are split at the knots.
pub fn rytov_validity<T: Real>(wave: &WaveParams<T>, profile: &CnProfile<T>, path_length: T) -> Result<RytovValidity<T>> {
    if !(path_length > T::zero()) || !path_length.is_finite() {
        return Err(Error::param("L", "path length must be positive"));
    }
    let km = T::lit(1000.0);
    let sixth = T::one() / T::lit(6.0);
    let mut breaks = vec![T::zero()];
    if let CnProfile::Tabulated { heights_km, .. } = profile {
        let top = *heights_km.last().unwrap() * km;
        if path_length > top {
            return Err(out_of_range(path_length / km, T::zero(), top / km));
        }
        breaks.extend(heights_km.iter().map(|h| *h * km).filter(|z| *z < path_length));
    }
    breaks.push(path_length);
    let (first_km, _) = profile.range_km();
    let mut pieces = Vec::with_capacity(breaks.len());
    for w in breaks.windows(2) {
        let (u0, u1) = (w[0].powf(sixth), w[1].powf(sixth));
        let err = std::cell::Cell::new(None);
        let v = composite_gauss_legendre(u0, u1, 4, 16, |u| {
            let u2 = u * u;
            let z = u2 * u2 * u2;
            let h = (z / km).max(first_km);
            let c = profile.cn_lookup(h).unwrap_or_else(|e| {
                err.set(Some(e));
                T::zero()
            });
            let u5 = u2 * u2 * u;
            c * c * T::lit(6.0) * u5 * u5
        });
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        pieces.push(v);
    }
    let value = wave.k0().powf(T::lit(7.0) / T::lit(6.0)) * compensated_sum(pieces);
    Ok(RytovValidity {
        value,
        valid: value < T::one(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_table_is_reproduced_at_knots() {
        let p = CnProfile::<f64>::standard();
        for (h, c) in STANDARD_TABLE {
            assert_eq!(p.cn_lookup(h).unwrap(), c * 1e-8);
        }
        assert_eq!(p.cn_lookup(0.001).unwrap(), 30e-8);
        assert_eq!(p.cn_lookup(1.0).unwrap(), 1e-8);
    }

    #[test]
    fn interpolation_is_linear_in_log_height() {
        let p = CnProfile::<f64>::standard();
        // geometric midpoint of 0.1 and 0.3 km sits halfway between 6 and 4
        let v = p.cn_lookup((0.1f64 * 0.3).sqrt()).unwrap();
        assert!((v - 5e-8).abs() < 1e-20);
    }

    #[test]
    fn lookup_refuses_to_extrapolate() {
        let p = CnProfile::<f64>::standard();
        assert!(matches!(p.cn_lookup(0.0005), Err(Error::OutOfRange { .. })));
        assert!(p.cn_lookup(3.5).is_err());
    }

    #[test]
    fn constant_profile_matches_closed_form() {
        let w = WaveParams::from_wavenumber(1e7).unwrap();
        let p = CnProfile::constant_cn2(1e-15).unwrap();
        let r = rytov_validity(&w, &p, 1000.0).unwrap();
        let exact = 1e7f64.powf(7.0 / 6.0) * 1e-15 * 1000f64.powf(11.0 / 6.0) * 6.0 / 11.0;
        assert!((r.value / exact - 1.0).abs() < 1e-12, "{} vs {exact}", r.value);
        assert!((r.value - 2.53e-2).abs() < 5e-4);
        assert!(r.valid);
    }

    #[test]
    fn zero_turbulence_is_always_valid() {
        let w = WaveParams::from_wavelength(5e-7).unwrap();
        let r = rytov_validity(&w, &CnProfile::constant(0.0).unwrap(), 1e4).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.valid);
    }

    #[test]
    fn standard_profile_value_grows_with_path_length() {
        let w = WaveParams::from_wavelength(5e-7).unwrap();
        let p = CnProfile::standard();
        let mut last = 0.0;
        for l in [0.5, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0] {
            let v = rytov_validity(&w, &p, l).unwrap().value;
            assert!(v > last, "L = {l}");
            last = v;
        }
        assert!(rytov_validity(&w, &p, 3001.0).is_err());
    }

    #[test]
    fn tabulated_constant_profile_agrees_with_constant_variant() {
        let w = WaveParams::from_wavelength(1e-6).unwrap();
        let t = CnProfile::tabulated(vec![0.001f64, 0.5, 2.0], vec![3e-8; 3]).unwrap();
        let c = CnProfile::constant(3e-8).unwrap();
        let a = rytov_validity(&w, &t, 1500.0).unwrap().value;
        let b = rytov_validity(&w, &c, 1500.0).unwrap().value;
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn profile_text_round_trip() {
        let p = CnProfile::<f64>::parse("# h  Cn\n0.001, 3e-7\n0.01 1.5e-7\n\n1.0\t1e-8\n").unwrap();
        assert_eq!(p.cn_lookup(0.01).unwrap(), 1.5e-7);
        assert!(CnProfile::<f64>::parse("1 2 3\n").is_err());
        assert!(CnProfile::<f64>::parse("1 2\n0.5 2\n").is_err());
    }
}
