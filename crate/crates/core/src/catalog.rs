//! Curated catalog of architectural styles, landmarks and socio-cultural regions.
//!
//! A catalog is a single UTF-8 JSON document with the keys `version`, `regions`,
//! `styles`, `landmarks` and `tokens`. It is validated once on load and is
//! immutable afterwards, so a `Catalog` can be shared freely between threads.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::calendar::{MAX_YEAR, MIN_YEAR};

/// The only catalog format version understood by this crate.
pub const CATALOG_VERSION: &str = "1";

/// Marker ids 0-3 are the board corners and 4 is the slider; style tokens start here.
pub const FIRST_TOKEN_MARKER_ID: u32 = 5;

const MAX_CHARACTERISTICS: usize = 10;
const MAX_ARCHITECTS: usize = 10;

static BUILTIN_CATALOG: &str = include_str!("../data/catalog.json");

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("catalog parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid catalog record `{record}`: {message}")]
    Validation { record: String, message: String },
    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },
    #[error("catalog i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CatalogError {
    fn invalid(record: impl Into<String>, message: impl Into<String>) -> Self {
        CatalogError::Validation {
            record: record.into(),
            message: message.into(),
        }
    }
}

/// A socio-cultural region used to group styles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Region {
    pub id: String,
    pub display_name: String,
}

/// A closed interval of signed calendar years. Negative years are BCE and
/// there is no year 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct YearInterval {
    pub start: i32,
    pub end: i32,
}

impl YearInterval {
    pub fn new(start: i32, end: i32) -> Result<Self, String> {
        let interval = YearInterval { start, end };
        interval.validate()?;
        Ok(interval)
    }

    pub fn validate(&self) -> Result<(), String> {
        for year in [self.start, self.end] {
            if year == 0 {
                return Err("year 0 does not exist (1 BCE is -1)".into());
            }
            if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
                return Err(format!("year {year} outside [{MIN_YEAR}, {MAX_YEAR}]"));
            }
        }
        if self.start > self.end {
            return Err(format!(
                "period start {} is after end {}",
                self.start, self.end
            ));
        }
        Ok(())
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn overlaps(&self, other: &YearInterval) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl fmt::Display for YearInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} to {}",
            crate::calendar::format_year(self.start),
            crate::calendar::format_year(self.end)
        )
    }
}

/// A point on the globe in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct GeoCoord {
    pub lat: f64,
    pub lon: f64,
}

impl GeoCoord {
    /// Builds a coordinate, wrapping the longitude into `[-180, 180)`.
    pub fn new(lat: f64, lon: f64) -> Result<Self, String> {
        if !lat.is_finite() || !lon.is_finite() {
            return Err("coordinates must be finite".into());
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(format!("latitude {lat} outside [-90, 90]"));
        }
        Ok(GeoCoord {
            lat,
            lon: wrap_longitude(lon),
        })
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.lat.is_finite() || !self.lon.is_finite() {
            return Err("coordinates must be finite".into());
        }
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(format!("latitude {} outside [-90, 90]", self.lat));
        }
        if !(-180.0..180.0).contains(&self.lon) {
            return Err(format!("longitude {} outside [-180, 180)", self.lon));
        }
        Ok(())
    }

    /// Same point with the longitude wrapped into `[-180, 180)`.
    pub fn normalized(self) -> Self {
        GeoCoord {
            lat: self.lat,
            lon: wrap_longitude(self.lon),
        }
    }
}

fn wrap_longitude(lon: f64) -> f64 {
    // In-range values pass through untouched so they survive bit for bit.
    if (-180.0..180.0).contains(&lon) {
        return lon;
    }
    let wrapped = (lon + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// One curated architectural style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct StyleRecord {
    pub id: String,
    pub name: String,
    pub region_id: String,
    pub period: YearInterval,
    pub characteristics: Vec<String>,
    #[serde(default)]
    pub architects: Vec<String>,
    pub origin: GeoCoord,
    pub summary: String,
    /// Alternative names that must not appear in a poem for this style.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
}

impl StyleRecord {
    /// Checks every invariant that does not need the rest of the catalog.
    pub fn validate(&self) -> Result<(), String> {
        check_token(&self.id)?;
        if self.name.trim().is_empty() {
            return Err("name is empty".into());
        }
        self.period.validate()?;
        if self.characteristics.is_empty() {
            return Err("characteristics must not be empty".into());
        }
        if self.characteristics.len() > MAX_CHARACTERISTICS {
            return Err(format!(
                "at most {MAX_CHARACTERISTICS} characteristics allowed"
            ));
        }
        if self.characteristics.iter().any(|c| c.trim().is_empty()) {
            return Err("characteristics contain an empty entry".into());
        }
        if self.architects.len() > MAX_ARCHITECTS {
            return Err(format!("at most {MAX_ARCHITECTS} architects allowed"));
        }
        self.origin.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Landmark {
    pub id: String,
    pub name: String,
    pub coord: GeoCoord,
    pub native_style_id: String,
    /// Asset reference of the photograph used as the restyle base.
    pub source_image: String,
}

/// Binds a printed marker id to the style its 3D token represents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct TokenBinding {
    pub marker_id: u32,
    pub style_id: String,
}

/// On-disk layout of a catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CatalogFile {
    pub version: String,
    pub regions: Vec<Region>,
    pub styles: Vec<StyleRecord>,
    #[serde(default)]
    pub landmarks: Vec<Landmark>,
    #[serde(default)]
    pub tokens: Vec<TokenBinding>,
}

/// A validated, immutable catalog.
#[derive(Debug, Clone)]
pub struct Catalog {
    file: CatalogFile,
    regions: HashMap<String, usize>,
    styles: HashMap<String, usize>,
    landmarks: HashMap<String, usize>,
    tokens: HashMap<u32, usize>,
}

impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        self.file == other.file
    }
}

impl Catalog {
    pub fn new(file: CatalogFile) -> Result<Self, CatalogError> {
        if file.version != CATALOG_VERSION {
            return Err(CatalogError::invalid(
                "version",
                format!(
                    "unsupported version {:?}, expected {CATALOG_VERSION:?}",
                    file.version
                ),
            ));
        }
        if file.regions.is_empty() {
            return Err(CatalogError::invalid(
                "regions",
                "at least one region required",
            ));
        }

        let mut regions = HashMap::new();
        for (i, region) in file.regions.iter().enumerate() {
            check_token(&region.id).map_err(|m| CatalogError::invalid(&region.id, m))?;
            if region.display_name.trim().is_empty() {
                return Err(CatalogError::invalid(&region.id, "display_name is empty"));
            }
            if regions.insert(region.id.clone(), i).is_some() {
                return Err(CatalogError::invalid(&region.id, "duplicate region id"));
            }
        }

        let mut styles = HashMap::new();
        for (i, style) in file.styles.iter().enumerate() {
            style
                .validate()
                .map_err(|m| CatalogError::invalid(&style.id, m))?;
            if !regions.contains_key(&style.region_id) {
                return Err(CatalogError::invalid(
                    &style.id,
                    format!("unknown region `{}`", style.region_id),
                ));
            }
            if styles.insert(style.id.clone(), i).is_some() {
                return Err(CatalogError::invalid(&style.id, "duplicate style id"));
            }
        }

        let mut landmarks = HashMap::new();
        for (i, landmark) in file.landmarks.iter().enumerate() {
            check_token(&landmark.id).map_err(|m| CatalogError::invalid(&landmark.id, m))?;
            landmark
                .coord
                .validate()
                .map_err(|m| CatalogError::invalid(&landmark.id, m))?;
            if !styles.contains_key(&landmark.native_style_id) {
                return Err(CatalogError::invalid(
                    &landmark.id,
                    format!("unknown native style `{}`", landmark.native_style_id),
                ));
            }
            if landmark.source_image.trim().is_empty() {
                return Err(CatalogError::invalid(&landmark.id, "source_image is empty"));
            }
            if landmarks.insert(landmark.id.clone(), i).is_some() {
                return Err(CatalogError::invalid(&landmark.id, "duplicate landmark id"));
            }
        }

        let mut tokens = HashMap::new();
        for (i, token) in file.tokens.iter().enumerate() {
            let record = format!("token {}", token.marker_id);
            if token.marker_id < FIRST_TOKEN_MARKER_ID {
                return Err(CatalogError::invalid(
                    record,
                    format!("marker ids below {FIRST_TOKEN_MARKER_ID} are reserved"),
                ));
            }
            if !styles.contains_key(&token.style_id) {
                return Err(CatalogError::invalid(
                    record,
                    format!("unknown style `{}`", token.style_id),
                ));
            }
            if tokens.insert(token.marker_id, i).is_some() {
                return Err(CatalogError::invalid(record, "duplicate marker id"));
            }
        }

        Ok(Catalog {
            file,
            regions,
            styles,
            landmarks,
            tokens,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self, CatalogError> {
        let file: CatalogFile = serde_json::from_str(text).map_err(|e| CatalogError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Catalog::new(file)
    }

    /// The catalog shipped with the crate.
    pub fn builtin() -> Self {
        Catalog::from_json_str(BUILTIN_CATALOG).expect("builtin catalog is valid")
    }

    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.file).expect("catalog serializes");
        out.push('\n');
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CatalogError> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn file(&self) -> &CatalogFile {
        &self.file
    }

    pub fn regions(&self) -> &[Region] {
        &self.file.regions
    }

    pub fn styles(&self) -> &[StyleRecord] {
        &self.file.styles
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.file.landmarks
    }

    pub fn tokens(&self) -> &[TokenBinding] {
        &self.file.tokens
    }

    pub fn region_by_id(&self, id: &str) -> Result<&Region, CatalogError> {
        self.regions
            .get(id)
            .map(|&i| &self.file.regions[i])
            .ok_or_else(|| not_found("region", id))
    }

    pub fn style_by_id(&self, id: &str) -> Result<&StyleRecord, CatalogError> {
        self.styles
            .get(id)
            .map(|&i| &self.file.styles[i])
            .ok_or_else(|| not_found("style", id))
    }

    pub fn landmark_by_id(&self, id: &str) -> Result<&Landmark, CatalogError> {
        self.landmarks
            .get(id)
            .map(|&i| &self.file.landmarks[i])
            .ok_or_else(|| not_found("landmark", id))
    }

    /// Style bound to a printed marker id, if any.
    pub fn style_for_marker(&self, marker_id: u32) -> Option<&StyleRecord> {
        let token = &self.file.tokens[*self.tokens.get(&marker_id)?];
        self.style_by_id(&token.style_id).ok()
    }

    pub fn marker_for_style(&self, style_id: &str) -> Option<u32> {
        self.file
            .tokens
            .iter()
            .find(|t| t.style_id == style_id)
            .map(|t| t.marker_id)
    }

    pub fn bound_marker_ids(&self) -> BTreeSet<u32> {
        self.tokens.keys().copied().collect()
    }
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let text = std::fs::read_to_string(path)?;
    Catalog::from_json_str(&text)
}

pub fn save_catalog(catalog: &Catalog, path: impl AsRef<Path>) -> Result<(), CatalogError> {
    catalog.save(path)
}

fn not_found(kind: &'static str, id: &str) -> CatalogError {
    CatalogError::NotFound {
        kind,
        id: id.to_string(),
    }
}

/// Ids are non-empty and made of lowercase ASCII letters, digits and hyphens.
pub fn check_token(id: &str) -> Result<(), String> {
    if id.is_empty() {
        return Err("id is empty".into());
    }
    if !id
        .chars()
        .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
    {
        return Err(format!(
            "id `{id}` may only contain lowercase letters, digits and hyphens"
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gothic() -> StyleRecord {
        StyleRecord {
            id: "gothic".into(),
            name: "Gothic".into(),
            region_id: "europe".into(),
            period: YearInterval { start: 1140, end: 1520 },
            characteristics: vec!["pointed arches".into()],
            architects: vec![],
            origin: GeoCoord { lat: 48.9, lon: 2.3 },
            summary: "Tall and light.".into(),
            aliases: vec![],
        }
    }

    fn small_file() -> CatalogFile {
        CatalogFile {
            version: "1".into(),
            regions: vec![Region {
                id: "europe".into(),
                display_name: "Europe".into(),
            }],
            styles: vec![gothic()],
            landmarks: vec![],
            tokens: vec![TokenBinding {
                marker_id: 5,
                style_id: "gothic".into(),
            }],
        }
    }

    #[test]
    fn empty_regions_rejected() {
        let mut file = small_file();
        file.regions.clear();
        let err = Catalog::new(file).unwrap_err();
        assert!(err.to_string().contains("at least one region required"), "{err}");
    }

    #[test]
    fn inverted_period_names_style() {
        let mut file = small_file();
        file.styles[0].period = YearInterval { start: 500, end: 300 };
        match Catalog::new(file).unwrap_err() {
            CatalogError::Validation { record, .. } => assert_eq!(record, "gothic"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn year_zero_rejected() {
        assert!(YearInterval::new(0, 10).is_err());
        assert!(YearInterval::new(-10, -1).is_ok());
        assert!(YearInterval::new(-5001, 10).is_err());
    }

    #[test]
    fn lookups_are_case_sensitive() {
        let catalog = Catalog::new(small_file()).unwrap();
        assert_eq!(catalog.style_by_id("gothic").unwrap().id, "gothic");
        assert!(matches!(
            catalog.style_by_id("Gothic"),
            Err(CatalogError::NotFound { .. })
        ));
        assert!(matches!(
            catalog.style_by_id("baroque"),
            Err(CatalogError::NotFound { .. })
        ));
        assert!(catalog.landmark_by_id("x").is_err());
    }

    #[test]
    fn reserved_marker_ids_rejected() {
        let mut file = small_file();
        file.tokens[0].marker_id = 4;
        assert!(Catalog::new(file).is_err());
    }

    #[test]
    fn dangling_token_rejected() {
        let mut file = small_file();
        file.tokens[0].style_id = "baroque".into();
        assert!(Catalog::new(file).is_err());
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = Catalog::from_json_str("{\n  \"version\": \"1\",\n  \"regions\": [,]\n}").unwrap_err();
        match err {
            CatalogError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let mut file = small_file();
        file.version = "2".into();
        assert!(Catalog::new(file).is_err());
    }

    #[test]
    fn longitude_wraps() {
        assert_eq!(GeoCoord::new(0.0, 180.0).unwrap().lon, -180.0);
        assert_eq!(GeoCoord::new(0.0, -180.0).unwrap().lon, -180.0);
        assert_eq!(GeoCoord::new(10.0, 190.0).unwrap().lon, -170.0);
        assert_eq!(GeoCoord::new(48.85, 2.35).unwrap().lon, 2.35);
        assert_eq!(GeoCoord::new(0.0, -179.999).unwrap().lon, -179.999);
        assert!(GeoCoord::new(91.0, 0.0).is_err());
        assert!(GeoCoord::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn builtin_catalog_loads() {
        let catalog = Catalog::builtin();
        assert_eq!(catalog.styles().len(), 30);
        assert!(catalog.regions().len() >= 3);
        assert_eq!(catalog.tokens().len(), 30);
        for landmark in catalog.landmarks() {
            catalog.style_by_id(&landmark.native_style_id).unwrap();
        }
    }
}
