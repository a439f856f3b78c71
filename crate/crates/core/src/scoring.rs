//! Proximity scoring of a guess against the round's ground truth.
//!
//! Component maxima: style 2500, geography 5000, time 2500 (total 10000).
//! Geography decays as `5000 * exp(-d / 2000 km)`, time as `2500 * exp(-gap / 300 years)`.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::calendar::{year_gap, SLIDER_MAX_YEAR, SLIDER_MIN_YEAR};
use crate::catalog::{Catalog, GeoCoord, StyleRecord, YearInterval};
use crate::clock::Timestamp;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

pub const MAX_STYLE_POINTS: f64 = 2500.0;
pub const MAX_GEO_POINTS: f64 = 5000.0;
pub const MAX_TIME_POINTS: f64 = 2500.0;
pub const MAX_TOTAL_POINTS: f64 = MAX_STYLE_POINTS + MAX_GEO_POINTS + MAX_TIME_POINTS;

const GEO_DECAY_KM: f64 = 2000.0;
const TIME_DECAY_YEARS: f64 = 300.0;

const NEAR_MISS_POINTS: f64 = 1000.0;
const SIGHTS_SLOT_POINTS: f64 = 1250.0;
const SIGHTS_NEAR_MISS_POINTS: f64 = 500.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error("{count} style tokens submitted outside Sights mode")]
    ModeMismatch { count: usize },
    #[error("invalid guess: {0}")]
    InvalidGuess(String),
    #[error("invalid round: {0}")]
    InvalidRound(String),
    #[error("unknown style `{0}`")]
    UnknownStyle(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
pub enum GameMode {
    #[serde(alias = "image")]
    Image,
    #[serde(alias = "sights")]
    Sights,
    #[serde(alias = "poem")]
    Poem,
}

impl std::str::FromStr for GameMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "image" => Ok(GameMode::Image),
            "sights" => Ok(GameMode::Sights),
            "poem" => Ok(GameMode::Poem),
            _ => Err(format!("unknown game mode `{s}`")),
        }
    }
}

/// A player's answer for one round.
///
/// In Sights mode `style_token_ids` is `[original, fused]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Guess {
    pub style_token_ids: Vec<String>,
    pub coord: GeoCoord,
    pub year: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submitted_at: Option<Timestamp>,
}

impl Guess {
    pub fn validate(&self) -> Result<(), ScoringError> {
        let n = self.style_token_ids.len();
        if !(1..=2).contains(&n) {
            return Err(ScoringError::InvalidGuess(format!(
                "expected 1 or 2 style tokens, got {n}"
            )));
        }
        self.coord
            .validate()
            .map_err(ScoringError::InvalidGuess)?;
        if !(SLIDER_MIN_YEAR..=SLIDER_MAX_YEAR).contains(&self.year) || self.year == 0 {
            return Err(ScoringError::InvalidGuess(format!(
                "year {} outside [{SLIDER_MIN_YEAR}, {SLIDER_MAX_YEAR}] or zero",
                self.year
            )));
        }
        Ok(())
    }
}

/// Ground truth of a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct RoundSpec {
    pub mode: GameMode,
    pub truth_style_id: String,
    pub truth_coord: GeoCoord,
    pub truth_period: YearInterval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landmark_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fusion_style_id: Option<String>,
}

impl RoundSpec {
    pub fn validate(&self) -> Result<(), ScoringError> {
        match self.mode {
            GameMode::Sights => match (&self.landmark_id, &self.fusion_style_id) {
                (Some(_), Some(fusion)) if fusion != &self.truth_style_id => Ok(()),
                (Some(_), Some(_)) => Err(ScoringError::InvalidRound(
                    "fusion style must differ from the native style".into(),
                )),
                _ => Err(ScoringError::InvalidRound(
                    "Sights rounds need a landmark and a fusion style".into(),
                )),
            },
            _ if self.landmark_id.is_some() || self.fusion_style_id.is_some() => Err(
                ScoringError::InvalidRound("only Sights rounds carry a landmark or fusion".into()),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Score {
    pub style_points: f64,
    pub geo_points: f64,
    pub time_points: f64,
    pub total: f64,
    pub distance_km: f64,
    pub year_delta: u32,
}

/// Great-circle distance on a sphere of radius 6371 km.
pub fn haversine_km(a: GeoCoord, b: GeoCoord) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.clamp(0.0, 1.0).sqrt().asin()
}

pub fn geo_points(distance_km: f64) -> f64 {
    MAX_GEO_POINTS * (-distance_km.max(0.0) / GEO_DECAY_KM).exp()
}

/// Years between `year` and the nearest end of `period`; zero inside it.
pub fn year_delta(year: i32, period: &YearInterval) -> u32 {
    if period.contains(year) {
        0
    } else if year < period.start {
        year_gap(year, period.start)
    } else {
        year_gap(year, period.end)
    }
}

pub fn time_points(year: i32, period: &YearInterval) -> f64 {
    MAX_TIME_POINTS * (-f64::from(year_delta(year, period)) / TIME_DECAY_YEARS).exp()
}

fn near_miss(guessed: &StyleRecord, truth: &StyleRecord) -> bool {
    guessed.region_id == truth.region_id && guessed.period.overlaps(&truth.period)
}

fn slot_points(
    guessed_id: &str,
    truth_id: &str,
    catalog: &Catalog,
    exact: f64,
    near: f64,
) -> Result<f64, ScoringError> {
    let guessed = catalog
        .style_by_id(guessed_id)
        .map_err(|_| ScoringError::UnknownStyle(guessed_id.to_string()))?;
    if guessed.id == truth_id {
        return Ok(exact);
    }
    let truth = catalog
        .style_by_id(truth_id)
        .map_err(|_| ScoringError::UnknownStyle(truth_id.to_string()))?;
    Ok(if near_miss(guessed, truth) { near } else { 0.0 })
}

pub fn style_points(
    guessed_ids: &[String],
    spec: &RoundSpec,
    catalog: &Catalog,
) -> Result<f64, ScoringError> {
    match spec.mode {
        GameMode::Image | GameMode::Poem => {
            if guessed_ids.len() != 1 {
                return Err(ScoringError::ModeMismatch {
                    count: guessed_ids.len(),
                });
            }
            slot_points(
                &guessed_ids[0],
                &spec.truth_style_id,
                catalog,
                MAX_STYLE_POINTS,
                NEAR_MISS_POINTS,
            )
        }
        GameMode::Sights => {
            let fusion = spec
                .fusion_style_id
                .as_deref()
                .ok_or_else(|| ScoringError::InvalidRound("missing fusion style".into()))?;
            let mut points = 0.0;
            if let Some(original) = guessed_ids.first() {
                points += slot_points(
                    original,
                    &spec.truth_style_id,
                    catalog,
                    SIGHTS_SLOT_POINTS,
                    SIGHTS_NEAR_MISS_POINTS,
                )?;
            }
            if let Some(fused) = guessed_ids.get(1) {
                points += slot_points(
                    fused,
                    fusion,
                    catalog,
                    SIGHTS_SLOT_POINTS,
                    SIGHTS_NEAR_MISS_POINTS,
                )?;
            }
            Ok(points)
        }
    }
}

pub fn score_guess(guess: &Guess, spec: &RoundSpec, catalog: &Catalog) -> Result<Score, ScoringError> {
    if spec.mode != GameMode::Sights && guess.style_token_ids.len() == 2 {
        return Err(ScoringError::ModeMismatch { count: 2 });
    }
    guess.validate()?;
    spec.validate()?;

    let style = style_points(&guess.style_token_ids, spec, catalog)?;
    let distance_km = haversine_km(guess.coord, spec.truth_coord);
    let geo = geo_points(distance_km);
    let delta = year_delta(guess.year, &spec.truth_period);
    let time = time_points(guess.year, &spec.truth_period);
    Ok(Score {
        style_points: style,
        geo_points: geo,
        time_points: time,
        total: style + geo + time,
        distance_km,
        year_delta: delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(lat: f64, lon: f64) -> GeoCoord {
        GeoCoord { lat, lon }
    }

    fn image_round(catalog: &Catalog, style_id: &str) -> RoundSpec {
        let s = catalog.style_by_id(style_id).unwrap();
        RoundSpec {
            mode: GameMode::Image,
            truth_style_id: s.id.clone(),
            truth_coord: s.origin,
            truth_period: s.period,
            landmark_id: None,
            fusion_style_id: None,
        }
    }

    #[test]
    fn haversine_reference_values() {
        assert_eq!(haversine_km(c(10.0, 20.0), c(10.0, 20.0)), 0.0);
        let half = haversine_km(c(0.0, 0.0), c(0.0, 180.0));
        assert!((half - std::f64::consts::PI * 6371.0).abs() < 1e-9);
        assert!((half - 20015.09).abs() < 0.01);
    }

    #[test]
    fn geo_points_reference_values() {
        assert_eq!(geo_points(0.0), 5000.0);
        assert!((geo_points(2000.0 * 2f64.ln()) - 2500.0).abs() < 0.01);
        assert!((geo_points(20015.0) - 0.226).abs() < 0.01);
    }

    #[test]
    fn time_points_reference_values() {
        let period = YearInterval { start: 1140, end: 1520 };
        assert_eq!(time_points(1200, &period), 2500.0);
        assert!((time_points(1820, &period) - 2500.0 / std::f64::consts::E).abs() < 0.01);
        assert!((time_points(1820, &period) - 919.70).abs() < 0.01);
        let bce = YearInterval { start: -300, end: -1 };
        assert_eq!(year_delta(1, &bce), 1);
    }

    #[test]
    fn style_points_cases() {
        let catalog = Catalog::builtin();
        let spec = image_round(&catalog, "gothic");
        assert_eq!(style_points(&["gothic".into()], &spec, &catalog).unwrap(), 2500.0);
        // Romanesque: same region, 1000-1200 overlaps 1140-1520
        assert_eq!(style_points(&["romanesque".into()], &spec, &catalog).unwrap(), 1000.0);
        // Bauhaus: same region, no overlap
        assert_eq!(style_points(&["bauhaus".into()], &spec, &catalog).unwrap(), 0.0);
        // Khmer: overlapping period, other region
        assert_eq!(style_points(&["khmer".into()], &spec, &catalog).unwrap(), 0.0);
        assert!(matches!(
            style_points(&["nope".into()], &spec, &catalog),
            Err(ScoringError::UnknownStyle(_))
        ));
    }

    fn sights_round(catalog: &Catalog) -> RoundSpec {
        let castle = catalog.landmark_by_id("neuschwanstein").unwrap();
        let native = catalog.style_by_id(&castle.native_style_id).unwrap();
        RoundSpec {
            mode: GameMode::Sights,
            truth_style_id: native.id.clone(),
            truth_coord: castle.coord,
            truth_period: native.period,
            landmark_id: Some(castle.id.clone()),
            fusion_style_id: Some("chinese-imperial".into()),
        }
    }

    #[test]
    fn sights_slots() {
        let catalog = Catalog::builtin();
        let spec = sights_round(&catalog);
        let both = vec!["romanesque".to_string(), "chinese-imperial".to_string()];
        assert_eq!(style_points(&both, &spec, &catalog).unwrap(), 2500.0);
        assert_eq!(
            style_points(&["romanesque".into()], &spec, &catalog).unwrap(),
            1250.0
        );
        // gothic is a near miss for romanesque; metabolism is no match for chinese imperial
        let near = vec!["gothic".to_string(), "metabolism".to_string()];
        assert_eq!(style_points(&near, &spec, &catalog).unwrap(), 500.0);
    }

    #[test]
    fn perfect_guess_is_ten_thousand() {
        let catalog = Catalog::builtin();
        let spec = image_round(&catalog, "bauhaus");
        let guess = Guess {
            style_token_ids: vec!["bauhaus".into()],
            coord: spec.truth_coord,
            year: 1925,
            submitted_at: None,
        };
        let score = score_guess(&guess, &spec, &catalog).unwrap();
        assert_eq!(score.total, 10000.0);
        assert_eq!(score.total, MAX_TOTAL_POINTS);
        assert_eq!(score.year_delta, 0);
    }

    #[test]
    fn perfect_style_and_time_at_half_geo_distance() {
        let catalog = Catalog::builtin();
        let mut spec = image_round(&catalog, "bauhaus");
        spec.truth_coord = c(0.0, 0.0);
        // a point on the equator at the distance where geo points halve
        let d = 2000.0 * 2f64.ln();
        let lon = (d / EARTH_RADIUS_KM).to_degrees();
        let guess = Guess {
            style_token_ids: vec!["bauhaus".into()],
            coord: c(0.0, lon),
            year: 1925,
            submitted_at: None,
        };
        let score = score_guess(&guess, &spec, &catalog).unwrap();
        assert!((score.distance_km - 1386.29).abs() < 0.01);
        assert!((score.total - 7500.0).abs() < 0.01, "{score:?}");
    }

    #[test]
    fn two_tokens_outside_sights_is_mode_mismatch() {
        let catalog = Catalog::builtin();
        let mut spec = image_round(&catalog, "gothic");
        spec.mode = GameMode::Poem;
        let guess = Guess {
            style_token_ids: vec!["gothic".into(), "baroque".into()],
            coord: c(0.0, 0.0),
            year: 1200,
            submitted_at: None,
        };
        assert_eq!(
            score_guess(&guess, &spec, &catalog),
            Err(ScoringError::ModeMismatch { count: 2 })
        );
    }

    #[test]
    fn invalid_guesses() {
        let catalog = Catalog::builtin();
        let spec = image_round(&catalog, "gothic");
        let mut guess = Guess {
            style_token_ids: vec![],
            coord: c(0.0, 0.0),
            year: 1200,
            submitted_at: None,
        };
        assert!(score_guess(&guess, &spec, &catalog).is_err());
        guess.style_token_ids.push("gothic".into());
        guess.year = 2026;
        assert!(score_guess(&guess, &spec, &catalog).is_err());
        guess.year = 0;
        assert!(score_guess(&guess, &spec, &catalog).is_err());
    }

    #[test]
    fn round_spec_invariants() {
        let catalog = Catalog::builtin();
        let mut spec = sights_round(&catalog);
        assert!(spec.validate().is_ok());
        spec.fusion_style_id = Some(spec.truth_style_id.clone());
        assert!(spec.validate().is_err());
        let mut image = image_round(&catalog, "gothic");
        image.landmark_id = Some("parthenon".into());
        assert!(image.validate().is_err());
    }

    #[test]
    fn component_maxima_sum() {
        assert_eq!(MAX_STYLE_POINTS + MAX_GEO_POINTS + MAX_TIME_POINTS, 10000.0);
    }

    proptest! {
        #[test]
        fn geo_strictly_decreasing(a in 0.0f64..20000.0, b in 0.0f64..20000.0) {
            prop_assume!((a - b).abs() > 1e-6);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(geo_points(lo) > geo_points(hi));
            prop_assert!(geo_points(hi) <= MAX_GEO_POINTS);
        }

        #[test]
        fn antimeridian_representation_is_irrelevant(lat in -89.0f64..89.0, glat in -89.0f64..89.0, glon in -179.0f64..179.0) {
            let a = haversine_km(c(lat, 180.0), c(glat, glon));
            let b = haversine_km(c(lat, -180.0), c(glat, glon));
            prop_assert!((a - b).abs() < 1e-6);
        }

        #[test]
        fn truth_coordinate_maximizes_total(lat in -80.0f64..80.0, lon in -179.0f64..179.0) {
            let catalog = Catalog::builtin();
            let spec = image_round(&catalog, "maya");
            let truth = Guess { style_token_ids: vec!["maya".into()], coord: spec.truth_coord, year: 500, submitted_at: None };
            let other = Guess { coord: c(lat, lon), ..truth.clone() };
            let best = score_guess(&truth, &spec, &catalog).unwrap().total;
            prop_assert!(score_guess(&other, &spec, &catalog).unwrap().total <= best);
        }
    }
}
