//! Country attribution: ccTLD lookup for web pages, nearest city within a
//! radius for tweets.

use core::fmt;
use core::str::FromStr;

mod city;
mod countries;
mod tld;

pub use city::{assign_city, CityIndex, CityMatch, CityRecord, DEFAULT_RADIUS_KM};
pub use tld::{hostname, TldTable, DEFAULT_EXCLUDED_TLDS};

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// ISO 3166-1 alpha-3 country code.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 3]);

impl CountryCode {
    /// Accepts any three uppercase ASCII letters; see
    /// [`CountryCode::is_assigned`] for membership in the ISO table.
    pub fn new(code: &str) -> Result<Self, GeoError> {
        match code.as_bytes() {
            &[a, b, c] if [a, b, c].iter().all(u8::is_ascii_uppercase) => {
                Ok(CountryCode([a, b, c]))
            }
            _ => Err(GeoError::InvalidCountry),
        }
    }

    /// Parses and requires the code to be in the built-in ISO 3166 table.
    pub fn known(code: &str) -> Result<Self, GeoError> {
        let c = Self::new(code)?;
        if c.is_assigned() {
            Ok(c)
        } else {
            Err(GeoError::UnknownCountry)
        }
    }

    pub fn as_str(&self) -> &str {
        core::str::from_utf8(&self.0).unwrap()
    }

    pub fn is_assigned(&self) -> bool {
        countries::ISO3166
            .iter()
            .any(|(_, a3)| *a3 == self.as_str())
    }

    /// Looks up an alpha-2 code (case-insensitive).
    pub fn from_alpha2(code: &str) -> Option<Self> {
        countries::ISO3166
            .iter()
            .find(|(a2, _)| a2.eq_ignore_ascii_case(code))
            .map(|(_, a3)| CountryCode::new(a3).unwrap())
    }

    /// Every code in the built-in table, with its alpha-2 form.
    pub fn all() -> impl Iterator<Item = (&'static str, CountryCode)> {
        countries::ISO3166
            .iter()
            .map(|(a2, a3)| (*a2, CountryCode::new(a3).unwrap()))
    }
}

impl FromStr for CountryCode {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CountryCode::new(s)
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CountryCode({})", self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeoError {
    InvalidCountry,
    UnknownCountry,
    BadUrl,
    OutOfRange,
    EmptyIndex,
}

impl fmt::Display for GeoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeoError::InvalidCountry => "country code must be 3 uppercase ASCII letters",
            GeoError::UnknownCountry => "country code is not in the ISO 3166 table",
            GeoError::BadUrl => "no hostname in url",
            GeoError::OutOfRange => "coordinates out of range",
            GeoError::EmptyIndex => "city index is empty",
        })
    }
}

impl core::error::Error for GeoError {}

/// Latitude/longitude in decimal degrees, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) {
            Ok(GeoPoint { lat, lon })
        } else {
            Err(GeoError::OutOfRange)
        }
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

/// Great-circle distance on a sphere of radius [`EARTH_RADIUS_KM`].
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = p2 - p1;
    let dlon = (b.lon - a.lon).to_radians();
    let s1 = libm::sin(dlat / 2.0);
    let s2 = libm::sin(dlon / 2.0);
    let h = (s1 * s1 + libm::cos(p1) * libm::cos(p2) * s2 * s2).clamp(0.0, 1.0);
    2.0 * EARTH_RADIUS_KM * libm::atan2(libm::sqrt(h), libm::sqrt(1.0 - h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    #[test]
    fn country_codes() {
        assert!(CountryCode::new("NZL").is_ok());
        assert_eq!(CountryCode::new("nzl"), Err(GeoError::InvalidCountry));
        assert_eq!(CountryCode::new("NZ"), Err(GeoError::InvalidCountry));
        assert_eq!(CountryCode::known("QQQ"), Err(GeoError::UnknownCountry));
        assert_eq!(CountryCode::from_alpha2("ca").unwrap().as_str(), "CAN");
        assert_eq!(CountryCode::all().count(), 250);
    }

    #[test]
    fn haversine_reference_values() {
        assert_eq!(haversine_km(p(10.0, 20.0), p(10.0, 20.0)), 0.0);
        // Half the circumference: pi * R.
        let half = haversine_km(p(0.0, 0.0), p(0.0, 180.0));
        assert!((half - 20015.1).abs() <= 0.5, "{half}");
        assert!((half - core::f64::consts::PI * EARTH_RADIUS_KM).abs() < 1e-9);
        // Paris to London.
        let d = haversine_km(p(48.8566, 2.3522), p(51.5074, -0.1278));
        assert!((d - 343.0).abs() <= 2.0, "{d}");
    }

    #[test]
    fn out_of_range() {
        assert_eq!(GeoPoint::new(90.1, 0.0), Err(GeoError::OutOfRange));
        assert_eq!(GeoPoint::new(0.0, -180.5), Err(GeoError::OutOfRange));
        assert_eq!(GeoPoint::new(f64::NAN, 0.0), Err(GeoError::OutOfRange));
    }

    fn point() -> impl Strategy<Value = GeoPoint> {
        (-90.0..=90.0f64, -180.0..=180.0f64).prop_map(|(a, b)| p(a, b))
    }

    proptest! {
        #[test]
        fn symmetric_and_triangle(a in point(), b in point(), c in point()) {
            let ab = haversine_km(a, b);
            prop_assert_eq!(ab, haversine_km(b, a));
            prop_assert!(ab >= 0.0);
            prop_assert!(haversine_km(a, c) <= ab + haversine_km(b, c) + 1e-6);
        }
    }
}
