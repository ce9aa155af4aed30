use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};

use super::{CountryCode, GeoError};

/// ccTLDs that are used as generic domains rather than by their country.
pub const DEFAULT_EXCLUDED_TLDS: &[&str] = &["ag", "ai", "fm", "io", "ly", "tv"];

/// Lowercased hostname of `url`, with userinfo, port and any trailing dot
/// removed. A missing scheme is tolerated (`example.ca/page`).
pub fn hostname(url: &str) -> Result<String, GeoError> {
    let url = url.trim();
    let rest = match url.find("://") {
        Some(p) => &url[p + 3..],
        None => url.strip_prefix("//").unwrap_or(url),
    };
    let authority = rest.split(['/', '?', '#']).next().unwrap_or("");
    let host_port = authority.rsplit('@').next().unwrap_or("");
    let host = if let Some(v6) = host_port.strip_prefix('[') {
        v6.split(']').next().unwrap_or("")
    } else {
        host_port.split(':').next().unwrap_or("")
    };
    let host = host.strip_suffix('.').unwrap_or(host);
    let valid = !host.is_empty()
        && !host.starts_with('.')
        && !host.contains("..")
        && host
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '-' | '.' | '_' | ':'));
    if valid {
        Ok(host.to_lowercase())
    } else {
        Err(GeoError::BadUrl)
    }
}

/// ccTLD → country map plus the set of TLDs that never geolocate.
///
/// The excluded set always wins: mappings for excluded TLDs are dropped
/// when the table is built, so the two never overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct TldTable {
    mapped: BTreeMap<String, CountryCode>,
    excluded: BTreeSet<String>,
}

fn normalize(tld: &str) -> String {
    tld.trim().trim_start_matches('.').to_lowercase()
}

impl TldTable {
    pub fn new<M, E>(mapped: M, excluded: E) -> Self
    where
        M: IntoIterator<Item = (String, CountryCode)>,
        E: IntoIterator<Item = String>,
    {
        let excluded: BTreeSet<String> = excluded.into_iter().map(|t| normalize(&t)).collect();
        let mapped = mapped
            .into_iter()
            .map(|(t, c)| (normalize(&t), c))
            .filter(|(t, _)| !excluded.contains(t))
            .collect();
        TldTable { mapped, excluded }
    }

    /// Every ISO 3166 country under its alpha-2 ccTLD, `.uk` for the
    /// United Kingdom, minus [`DEFAULT_EXCLUDED_TLDS`].
    pub fn builtin() -> Self {
        let gbr = CountryCode::new("GBR").unwrap();
        let mapped = CountryCode::all()
            .map(|(a2, c)| (a2.to_lowercase(), c))
            .chain(core::iter::once(("uk".to_string(), gbr)));
        Self::new(mapped, DEFAULT_EXCLUDED_TLDS.iter().map(|t| t.to_string()))
    }

    /// Same mappings with additional exclusions.
    pub fn with_excluded<E: IntoIterator<Item = String>>(self, extra: E) -> Self {
        let excluded = self.excluded.into_iter().chain(extra);
        Self::new(self.mapped, excluded)
    }

    pub fn is_excluded(&self, tld: &str) -> bool {
        self.excluded.contains(&normalize(tld))
    }

    pub fn lookup(&self, tld: &str) -> Option<CountryCode> {
        let tld = normalize(tld);
        if self.excluded.contains(&tld) {
            return None;
        }
        self.mapped.get(&tld).copied()
    }

    pub fn mapped(&self) -> impl Iterator<Item = (&str, CountryCode)> {
        self.mapped.iter().map(|(t, c)| (t.as_str(), *c))
    }

    pub fn excluded(&self) -> impl Iterator<Item = &str> {
        self.excluded.iter().map(String::as_str)
    }

    /// Country of a web page by the final label of its hostname. `None` for
    /// excluded, generic or unknown TLDs.
    pub fn tld_to_country(&self, url: &str) -> Result<Option<CountryCode>, GeoError> {
        let host = hostname(url)?;
        let tld = host.rsplit('.').next().unwrap_or(&host);
        Ok(self.lookup(tld))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn hostnames() {
        assert_eq!(hostname("http://example.ca/page").unwrap(), "example.ca");
        assert_eq!(
            hostname("HTTPS://User:pw@WWW.Ex.NZ:8080/a?b#c").unwrap(),
            "www.ex.nz"
        );
        assert_eq!(hostname("example.de/path").unwrap(), "example.de");
        assert_eq!(hostname("//cdn.example.fr").unwrap(), "cdn.example.fr");
        assert_eq!(hostname("http://example.jp./").unwrap(), "example.jp");
        assert_eq!(hostname("http://[::1]:80/").unwrap(), "::1");
        for bad in [
            "",
            "http://",
            "http:///path",
            "http://a b.com",
            "http://.ca",
            "http://a..ca",
        ] {
            assert_eq!(hostname(bad), Err(GeoError::BadUrl), "{bad:?}");
        }
    }

    #[test]
    fn builtin_table() {
        let t = TldTable::builtin();
        let c = |u: &str| t.tld_to_country(u).unwrap().map(|c| c.to_string());
        assert_eq!(c("http://example.ca/page").as_deref(), Some("CAN"));
        assert_eq!(c("https://startup.io"), None);
        assert_eq!(c("https://example.com"), None);
        assert_eq!(c("https://bbc.co.uk").as_deref(), Some("GBR"));
        assert_eq!(c("https://gov.GB").as_deref(), Some("GBR"));
        assert_eq!(c("http://127.0.0.1/"), None);
        for tld in DEFAULT_EXCLUDED_TLDS {
            assert!(t.is_excluded(tld));
            assert_eq!(t.lookup(tld), None);
        }
        assert_eq!(t.tld_to_country("http://"), Err(GeoError::BadUrl));
    }

    #[test]
    fn exclusion_beats_mapping() {
        let fr = CountryCode::new("FRA").unwrap();
        let t = TldTable::new(
            vec![("fr".into(), fr), (".TV".into(), fr)],
            vec!["tv".into()],
        );
        assert_eq!(t.lookup("fr"), Some(fr));
        assert_eq!(t.lookup("tv"), None);
        assert!(t.mapped().all(|(tld, _)| !t.is_excluded(tld)));
        let t = t.with_excluded(vec!["FR".into()]);
        assert_eq!(t.lookup("fr"), None);
    }

    proptest! {
        #[test]
        fn excluded_never_resolves(tld in "[a-z]{2,3}", host in "[a-z]{1,8}") {
            let fr = CountryCode::new("FRA").unwrap();
            let t = TldTable::new(vec![(tld.clone(), fr)], vec![tld.clone()]);
            let url = alloc::format!("http://{host}.{tld}/x");
            prop_assert_eq!(t.tld_to_country(&url).unwrap(), None);
        }
    }
}
