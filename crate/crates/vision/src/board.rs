//! The physical game board: calibration from the corner markers, map
//! coordinates, and the year slider.

use std::path::Path;

use archiguesser_core::calendar::{snap_year_zero, SLIDER_MAX_YEAR, SLIDER_MIN_YEAR};
use archiguesser_core::GeoCoord;
use image::GrayImage;
use serde::{Deserialize, Serialize};

use crate::detect::{detect_markers_with, DetectorParams, MarkerDetection};
use crate::dictionary::{MarkerDictionary, CORNER_IDS, SLIDER_ID};
use crate::geometry::{Homography, Point};
use crate::VisionError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerMarker {
    pub id: u32,
    /// Marker center in board units. Corner markers lie unrotated on the board.
    pub center: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliderAxis {
    pub start: Point,
    pub end: Point,
    pub start_year: i32,
    pub end_year: i32,
}

/// Layout of the printed board. Board units are arbitrary; the map occupies
/// `[0, width] × [0, height]` with x to the east and y to the south.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardSpec {
    pub width: f64,
    pub height: f64,
    pub corner_marker_size: f64,
    pub corners: Vec<CornerMarker>,
    pub slider: SliderAxis,
    pub slider_marker_size: f64,
    pub token_marker_size: f64,
    /// How far outside the map a token may sit and still be clamped onto it.
    pub tolerance: f64,
}

impl Default for BoardSpec {
    fn default() -> Self {
        BoardSpec {
            width: 360.0,
            height: 180.0,
            corner_marker_size: 28.0,
            corners: vec![
                CornerMarker { id: 0, center: [-24.0, -24.0] },
                CornerMarker { id: 1, center: [384.0, -24.0] },
                CornerMarker { id: 2, center: [384.0, 244.0] },
                CornerMarker { id: 3, center: [-24.0, 244.0] },
            ],
            slider: SliderAxis {
                start: [0.0, 212.0],
                end: [360.0, 212.0],
                start_year: SLIDER_MIN_YEAR,
                end_year: SLIDER_MAX_YEAR,
            },
            slider_marker_size: 24.0,
            token_marker_size: 24.0,
            tolerance: 0.5,
        }
    }
}

impl BoardSpec {
    pub fn from_json_str(text: &str) -> Result<Self, VisionError> {
        let spec: BoardSpec =
            serde_json::from_str(text).map_err(|e| VisionError::InvalidBoard(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, VisionError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("board spec serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), VisionError> {
        let positive = [
            self.width,
            self.height,
            self.corner_marker_size,
            self.slider_marker_size,
            self.token_marker_size,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(VisionError::InvalidBoard("board dimensions and marker sizes must be positive".into()));
        }
        let mut ids: Vec<u32> = self.corners.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        if ids != CORNER_IDS {
            return Err(VisionError::InvalidBoard(format!(
                "corner markers must be ids 0-3 exactly once, got {ids:?}"
            )));
        }
        let s = &self.slider;
        if s.start == s.end {
            return Err(VisionError::InvalidBoard("slider axis has zero length".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(VisionError::InvalidBoard("tolerance must be non-negative".into()));
        }
        Ok(())
    }

    /// Board-unit corners (canonical order) of a marker of side `size` at
    /// `center`, turned `rotation` clockwise quarter turns.
    pub fn marker_corners(center: Point, size: f64, rotation: u32) -> [Point; 4] {
        let h = size / 2.0;
        let upright = [
            [center[0] - h, center[1] - h],
            [center[0] - h, center[1] + h],
            [center[0] + h, center[1] + h],
            [center[0] + h, center[1] - h],
        ];
        let mut out = [[0.0; 2]; 4];
        for (k, c) in out.iter_mut().enumerate() {
            *c = upright[(k + 4 - (rotation as usize % 4)) % 4];
        }
        out
    }

    /// Board point of the slider axis at fraction `f`.
    pub fn slider_point(&self, f: f64) -> Point {
        let s = &self.slider;
        [
            s.start[0] + f * (s.end[0] - s.start[0]),
            s.start[1] + f * (s.end[1] - s.start[1]),
        ]
    }

    /// Bounding box `(min, max)` of the map and every reserved marker.
    pub fn extent(&self) -> (Point, Point) {
        let mut lo = [0.0f64, 0.0f64];
        let mut hi = [self.width, self.height];
        let mut grow = |p: Point, half: f64| {
            lo[0] = lo[0].min(p[0] - half);
            lo[1] = lo[1].min(p[1] - half);
            hi[0] = hi[0].max(p[0] + half);
            hi[1] = hi[1].max(p[1] + half);
        };
        for c in &self.corners {
            grow(c.center, self.corner_marker_size / 2.0);
        }
        grow(self.slider.start, self.slider_marker_size / 2.0);
        grow(self.slider.end, self.slider_marker_size / 2.0);
        (lo, hi)
    }
}

/// Camera-to-board mapping plus what is needed to read map and slider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardCalibration {
    /// Pixel to board units.
    pub homography: Homography,
    pub board_width: f64,
    pub board_height: f64,
    pub slider_axis: SliderAxis,
    pub tolerance: f64,
    /// Reprojection RMS of the fitted correspondences, in pixels.
    pub rms_px: f64,
}

pub fn calibrate_board(
    detections: &[MarkerDetection],
    spec: &BoardSpec,
) -> Result<BoardCalibration, VisionError> {
    let mut missing = Vec::new();
    let mut pixels: Vec<Point> = Vec::new();
    let mut board: Vec<Point> = Vec::new();
    for corner in &spec.corners {
        let best = detections
            .iter()
            .filter(|d| d.marker_id == corner.id)
            .min_by_key(|d| d.decode_errors);
        match best {
            Some(det) => {
                pixels.push(det.center());
                board.push(corner.center);
                let expected = BoardSpec::marker_corners(corner.center, spec.corner_marker_size, 0);
                pixels.extend_from_slice(&det.corners);
                board.extend_from_slice(&expected);
            }
            None => missing.push(corner.id),
        }
    }
    if !missing.is_empty() {
        return Err(VisionError::MissingCorners(missing));
    }
    let centers: Vec<Point> = pixels.iter().step_by(5).copied().collect();
    let board_centers: Vec<Point> = board.iter().step_by(5).copied().collect();
    // Four centers must already fix the plane; reject near-collinear layouts.
    Homography::fit(&centers, &board_centers)?;
    let homography = Homography::fit(&pixels, &board)?;
    let back = homography.inverse()?;
    let rms_px = back.rms_error(&board, &pixels);
    Ok(BoardCalibration {
        homography,
        board_width: spec.width,
        board_height: spec.height,
        slider_axis: spec.slider,
        tolerance: spec.tolerance,
        rms_px,
    })
}

/// Equirectangular map: x = 0 is 180° W, y = 0 is 90° N.
pub fn board_to_geo(width: f64, height: f64, p: Point) -> GeoCoord {
    let lon = -180.0 + 360.0 * p[0] / width;
    let lat = 90.0 - 180.0 * p[1] / height;
    GeoCoord { lat, lon }.normalized()
}

pub fn geo_to_board(width: f64, height: f64, coord: GeoCoord) -> Point {
    [(coord.lon + 180.0) / 360.0 * width, (90.0 - coord.lat) / 180.0 * height]
}

impl BoardCalibration {
    pub fn to_board(&self, pixel: Point) -> Point {
        self.homography.apply(pixel)
    }

    /// Map coordinate under a board point, clamping points within tolerance.
    pub fn board_point_to_geo(&self, b: Point) -> Result<GeoCoord, VisionError> {
        let eps = self.tolerance;
        let (w, h) = (self.board_width, self.board_height);
        if !(b[0] >= -eps && b[0] <= w + eps && b[1] >= -eps && b[1] <= h + eps) {
            return Err(VisionError::OutsideBoard { x: b[0], y: b[1] });
        }
        Ok(board_to_geo(w, h, [b[0].clamp(0.0, w), b[1].clamp(0.0, h)]))
    }
}

pub fn pixel_to_geo(calibration: &BoardCalibration, pixel: Point) -> Result<GeoCoord, VisionError> {
    calibration.board_point_to_geo(calibration.to_board(pixel))
}

/// `round(start + f·(end − start))`, halves away from zero, 0 becomes −1.
///
/// The raw value is first snapped to a micro-year grid so that a fraction
/// a few ulps off a half year still rounds as the tie it stands for.
pub fn fraction_to_year(f: f64, start_year: i32, end_year: i32) -> i32 {
    let f = f.clamp(0.0, 1.0);
    let raw = start_year as f64 + f * (end_year - start_year) as f64;
    let year = ((raw * 1e6).round() / 1e6).round() as i32;
    snap_year_zero(year)
}

/// Scalar projection of `p` onto the axis, clamped to [0, 1].
pub fn axis_fraction(axis: &SliderAxis, p: Point) -> f64 {
    let d = [axis.end[0] - axis.start[0], axis.end[1] - axis.start[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let f = ((p[0] - axis.start[0]) * d[0] + (p[1] - axis.start[1]) * d[1]) / len2;
    f.clamp(0.0, 1.0)
}

pub fn slider_to_year(
    calibration: &BoardCalibration,
    detection: &MarkerDetection,
) -> Result<i32, VisionError> {
    if detection.marker_id != SLIDER_ID {
        return Err(VisionError::NotSliderMarker(detection.marker_id));
    }
    let b = calibration.to_board(detection.center());
    let axis = &calibration.slider_axis;
    Ok(fraction_to_year(axis_fraction(axis, b), axis.start_year, axis.end_year))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenReading {
    pub marker_id: u32,
    pub coord: GeoCoord,
    /// Marker center in board units.
    pub board: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardReading {
    pub tokens: Vec<TokenReading>,
    pub slider_year: Option<i32>,
    /// Markers seen but not turned into tokens: unbound ids and tokens off the map.
    pub unmatched: Vec<u32>,
    pub calibration: BoardCalibration,
}

pub fn read_board(
    image: &GrayImage,
    dictionary: &MarkerDictionary,
    spec: &BoardSpec,
) -> Result<BoardReading, VisionError> {
    read_board_with(image, dictionary, spec, &DetectorParams::default(), |_| true)
}

/// Like [`read_board`], with detector settings and a predicate telling
/// which marker ids are bound to a style.
pub fn read_board_with(
    image: &GrayImage,
    dictionary: &MarkerDictionary,
    spec: &BoardSpec,
    params: &DetectorParams,
    is_bound: impl Fn(u32) -> bool,
) -> Result<BoardReading, VisionError> {
    let detections = detect_markers_with(image, dictionary, params)?;
    reading_from_detections(&detections, spec, is_bound)
}

pub fn reading_from_detections(
    detections: &[MarkerDetection],
    spec: &BoardSpec,
    is_bound: impl Fn(u32) -> bool,
) -> Result<BoardReading, VisionError> {
    let calibration = calibrate_board(detections, spec)?;
    let mut tokens = Vec::new();
    let mut unmatched = Vec::new();
    let mut slider_year = None;
    for det in detections {
        if CORNER_IDS.contains(&det.marker_id) {
            continue;
        }
        if det.marker_id == SLIDER_ID {
            if slider_year.is_none() {
                slider_year = Some(slider_to_year(&calibration, det)?);
            }
            continue;
        }
        if !is_bound(det.marker_id) {
            unmatched.push(det.marker_id);
            continue;
        }
        let board = calibration.to_board(det.center());
        match calibration.board_point_to_geo(board) {
            Ok(coord) => tokens.push(TokenReading {
                marker_id: det.marker_id,
                coord,
                board,
            }),
            Err(VisionError::OutsideBoard { .. }) => unmatched.push(det.marker_id),
            Err(e) => return Err(e),
        }
    }
    unmatched.sort_unstable();
    unmatched.dedup();
    Ok(BoardReading {
        tokens,
        slider_year,
        unmatched,
        calibration,
    })
}
