use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{haversine_km, CountryCode, GeoError, GeoPoint, EARTH_RADIUS_KM};

/// Collection radius around each city.
pub const DEFAULT_RADIUS_KM: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CityRecord {
    pub name: String,
    pub country: CountryCode,
    pub location: GeoPoint,
}

impl CityRecord {
    pub fn new(name: &str, country: CountryCode, lat: f64, lon: f64) -> Result<Self, GeoError> {
        Ok(CityRecord {
            name: name.into(),
            country,
            location: GeoPoint::new(lat, lon)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CityMatch<'a> {
    pub city: &'a CityRecord,
    pub distance_km: f64,
}

impl CityMatch<'_> {
    pub fn country(&self) -> CountryCode {
        self.city.country
    }
}

/// Total order for candidates: distance, then name, then country and
/// coordinates so duplicate names still resolve deterministically.
fn closer(a: &CityMatch<'_>, b: &CityMatch<'_>) -> Ordering {
    a.distance_km
        .total_cmp(&b.distance_km)
        .then_with(|| a.city.name.cmp(&b.city.name))
        .then_with(|| a.city.country.cmp(&b.city.country))
        .then_with(|| a.city.location.lat.total_cmp(&b.city.location.lat))
        .then_with(|| a.city.location.lon.total_cmp(&b.city.location.lon))
}

/// Nearest city within `radius_km` by linear scan.
pub fn assign_city(
    lat: f64,
    lon: f64,
    cities: &[CityRecord],
    radius_km: f64,
) -> Result<Option<CityMatch<'_>>, GeoError> {
    let q = GeoPoint::new(lat, lon)?;
    if cities.is_empty() {
        return Err(GeoError::EmptyIndex);
    }
    Ok(cities
        .iter()
        .map(|city| CityMatch {
            city,
            distance_km: haversine_km(q, city.location),
        })
        .filter(|m| m.distance_km <= radius_km)
        .min_by(closer))
}

const LAT_CELLS: usize = 180;
const LON_CELLS: usize = 360;

fn lat_cell(lat: f64) -> i32 {
    (libm::floor(lat) as i32).clamp(-90, 89)
}

/// Longitude cell in `-180..180`; 180° wraps onto -180°.
fn wrap_lon_cell(cell: i32) -> i32 {
    (cell + 180).rem_euclid(360) - 180
}

fn slot(lat_cell: i32, lon_cell: i32) -> usize {
    (lat_cell + 90) as usize * LON_CELLS + (lon_cell + 180) as usize
}

/// 1°×1° grid over the city list. Answers exactly what [`assign_city`]
/// answers, scanning only cells that can hold a city within the radius.
#[derive(Debug, Clone)]
pub struct CityIndex {
    cities: Vec<CityRecord>,
    cells: Vec<Vec<u32>>,
    radius_km: f64,
}

impl CityIndex {
    pub fn new(cities: Vec<CityRecord>, radius_km: f64) -> Result<Self, GeoError> {
        if cities.is_empty() {
            return Err(GeoError::EmptyIndex);
        }
        if !(radius_km.is_finite() && radius_km >= 0.0) {
            return Err(GeoError::OutOfRange);
        }
        let mut cells = vec![Vec::new(); LAT_CELLS * LON_CELLS];
        for (i, c) in cities.iter().enumerate() {
            let lon = wrap_lon_cell(libm::floor(c.location.lon) as i32);
            cells[slot(lat_cell(c.location.lat), lon)].push(i as u32);
        }
        Ok(CityIndex {
            cities,
            cells,
            radius_km,
        })
    }

    pub fn cities(&self) -> &[CityRecord] {
        &self.cities
    }

    pub fn radius_km(&self) -> f64 {
        self.radius_km
    }

    pub fn assign(&self, lat: f64, lon: f64) -> Result<Option<CityMatch<'_>>, GeoError> {
        let q = GeoPoint::new(lat, lon)?;
        // Angular radius in degrees, padded against rounding at cell edges.
        let theta = self.radius_km / EARTH_RADIUS_KM;
        let margin = 1e-6;
        let dlat = theta.to_degrees() + margin;
        let lat_lo = lat_cell(lat - dlat);
        let lat_hi = lat_cell(lat + dlat);

        let cos_lat = libm::cos(lat.to_radians());
        let sin_theta = libm::sin(theta);
        let all_lons = theta >= core::f64::consts::FRAC_PI_2 || cos_lat <= sin_theta;
        let (lon_lo, lon_hi) = if all_lons {
            (-180, 179)
        } else {
            let dlon = libm::asin(sin_theta / cos_lat).to_degrees() + margin;
            if dlon >= 179.0 {
                (-180, 179)
            } else {
                (
                    libm::floor(lon - dlon) as i32,
                    libm::floor(lon + dlon) as i32,
                )
            }
        };

        let mut best: Option<CityMatch<'_>> = None;
        for lc in lat_lo..=lat_hi {
            for raw in lon_lo..=lon_hi {
                for &i in &self.cells[slot(lc, wrap_lon_cell(raw))] {
                    let city = &self.cities[i as usize];
                    let m = CityMatch {
                        city,
                        distance_km: haversine_km(q, city.location),
                    };
                    if m.distance_km > self.radius_km {
                        continue;
                    }
                    if best.map_or(true, |b| closer(&m, &b) == Ordering::Less) {
                        best = Some(m);
                    }
                }
            }
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn city(name: &str, iso: &str, lat: f64, lon: f64) -> CityRecord {
        CityRecord::new(name, CountryCode::new(iso).unwrap(), lat, lon).unwrap()
    }

    /// Point `km` kilometres due north of (lat, lon).
    fn north(lat: f64, km: f64) -> f64 {
        lat + (km / EARTH_RADIUS_KM).to_degrees()
    }

    #[test]
    fn lone_city_radius() {
        let cities = vec![city("Wellington", "NZL", -41.2865, 174.7762)];
        let idx = CityIndex::new(cities.clone(), DEFAULT_RADIUS_KM).unwrap();
        let near = north(-41.2865, 1.0);
        let m = idx.assign(near, 174.7762).unwrap().unwrap();
        assert_eq!(m.city.name, "Wellington");
        assert_eq!(m.country().as_str(), "NZL");
        assert!((m.distance_km - 1.0).abs() < 1e-6);

        let far = north(-41.2865, 51.0);
        assert!(idx.assign(far, 174.7762).unwrap().is_none());
        assert!(assign_city(far, 174.7762, &cities, DEFAULT_RADIUS_KM)
            .unwrap()
            .is_none());
    }

    #[test]
    fn ties_by_name() {
        // Symmetric about the query point on the equator.
        let cities = vec![
            city("Zeta", "ECU", 0.0, 0.1),
            city("Alpha", "ECU", 0.0, -0.1),
        ];
        let idx = CityIndex::new(cities.clone(), 50.0).unwrap();
        assert_eq!(idx.assign(0.0, 0.0).unwrap().unwrap().city.name, "Alpha");
        assert_eq!(
            assign_city(0.0, 0.0, &cities, 50.0)
                .unwrap()
                .unwrap()
                .city
                .name,
            "Alpha"
        );
    }

    #[test]
    fn antimeridian_and_poles() {
        let cities = vec![
            city("East", "FJI", -17.0, 179.9),
            city("Pole", "ATA", -89.9, 0.0),
        ];
        let idx = CityIndex::new(cities, 50.0).unwrap();
        assert_eq!(
            idx.assign(-17.0, -179.9).unwrap().unwrap().city.name,
            "East"
        );
        assert_eq!(idx.assign(-89.9, 180.0).unwrap().unwrap().city.name, "Pole");
        assert_eq!(idx.assign(-90.0, -45.0).unwrap().unwrap().city.name, "Pole");
    }

    #[test]
    fn errors() {
        let idx = CityIndex::new(vec![city("A", "FRA", 0.0, 0.0)], 50.0).unwrap();
        assert_eq!(idx.assign(95.0, 0.0), Err(GeoError::OutOfRange));
        assert_eq!(
            CityIndex::new(vec![], 50.0).err(),
            Some(GeoError::EmptyIndex)
        );
        assert_eq!(assign_city(0.0, 0.0, &[], 50.0), Err(GeoError::EmptyIndex));
        assert!(CityRecord::new("x", CountryCode::new("FRA").unwrap(), 0.0, 200.0).is_err());
    }
}
