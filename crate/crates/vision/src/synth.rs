//! Synthetic rasters: printable markers and camera views of a populated board.

use archiguesser_core::GeoCoord;
use image::{GrayImage, Luma};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::board::{geo_to_board, BoardSpec};
use crate::dictionary::{rotate, MarkerDictionary, CORNER_IDS, SLIDER_ID};
use crate::geometry::{Homography, Point};
use crate::VisionError;

pub const SHEET: u8 = 225;
pub const INK: u8 = 25;

/// One marker lying on the board, in board units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedMarker {
    pub id: u32,
    pub center: Point,
    pub size: f64,
    /// Clockwise quarter turns.
    pub rotation: u32,
}

/// Whether the marker cell under `(u, v)` is white. `u` and `v` run over
/// `[0, grid + 2)` across the black square, rows top to bottom.
fn cell_is_white(shown: u32, grid: u32, u: f64, v: f64) -> bool {
    let (col, row) = (u.floor() as i64, v.floor() as i64);
    let g = grid as i64;
    if col < 1 || row < 1 || col > g || row > g {
        return false;
    }
    let bit = ((row - 1) * g + (col - 1)) as u32;
    (shown >> bit) & 1 == 1
}

/// Square raster of marker `id`, `px` pixels on a side, with a one-cell
/// white quiet zone around the black border.
pub fn render_marker(dictionary: &MarkerDictionary, id: u32, px: u32) -> Result<GrayImage, VisionError> {
    let code = dictionary
        .code(id)
        .ok_or_else(|| VisionError::InvalidArgument(format!("marker id {id} is not in the dictionary")))?;
    let grid = dictionary.grid;
    let total = (grid + 4) as f64;
    if (px as f64) < total {
        return Err(VisionError::InvalidArgument(format!(
            "marker needs at least {} pixels per side",
            grid + 4
        )));
    }
    let scale = total / px as f64;
    let ss = 4;
    let image = GrayImage::from_fn(px, px, |x, y| {
        let mut white = 0;
        for sy in 0..ss {
            for sx in 0..ss {
                let u = (x as f64 + (sx as f64 + 0.5) / ss as f64) * scale - 1.0;
                let v = (y as f64 + (sy as f64 + 0.5) / ss as f64) * scale - 1.0;
                let inside = u >= 0.0 && v >= 0.0 && u < total - 2.0 && v < total - 2.0;
                if !inside || cell_is_white(code, grid, u, v) {
                    white += 1;
                }
            }
        }
        shade(white as f64 / (ss * ss) as f64)
    });
    Ok(image)
}

fn shade(white_fraction: f64) -> Luma<u8> {
    let v = INK as f64 + white_fraction * (SHEET - INK) as f64;
    Luma([v.round() as u8])
}

/// Fraction along the slider axis for `year`.
pub fn year_to_fraction(spec: &BoardSpec, year: i32) -> f64 {
    let s = &spec.slider;
    ((year - s.start_year) as f64 / (s.end_year - s.start_year) as f64).clamp(0.0, 1.0)
}

/// The four corner markers, the slider at `slider_year`, and style tokens
/// at the given coordinates.
pub fn board_scene(
    spec: &BoardSpec,
    tokens: &[(u32, GeoCoord)],
    slider_year: Option<i32>,
) -> Vec<PlacedMarker> {
    let mut markers: Vec<PlacedMarker> = spec
        .corners
        .iter()
        .map(|c| PlacedMarker {
            id: c.id,
            center: c.center,
            size: spec.corner_marker_size,
            rotation: 0,
        })
        .collect();
    if let Some(year) = slider_year {
        markers.push(PlacedMarker {
            id: SLIDER_ID,
            center: spec.slider_point(year_to_fraction(spec, year)),
            size: spec.slider_marker_size,
            rotation: 0,
        });
    }
    for (i, (id, coord)) in tokens.iter().enumerate() {
        markers.push(PlacedMarker {
            id: *id,
            center: geo_to_board(spec.width, spec.height, *coord),
            size: spec.token_marker_size,
            rotation: (i as u32) % 4,
        });
    }
    markers
}

/// Camera (board to image) showing the whole board with `margin` pixels to spare.
pub fn fit_camera(spec: &BoardSpec, width: u32, height: u32, margin: f64) -> Homography {
    let (lo, hi) = spec.extent();
    let sx = (width as f64 - 2.0 * margin) / (hi[0] - lo[0]);
    let sy = (height as f64 - 2.0 * margin) / (hi[1] - lo[1]);
    let s = sx.min(sy);
    let ox = (width as f64 - s * (hi[0] - lo[0])) / 2.0 - s * lo[0];
    let oy = (height as f64 - s * (hi[1] - lo[1])) / 2.0 - s * lo[1];
    Homography([[s, 0.0, ox], [0.0, s, oy], [0.0, 0.0, 1.0]])
}

/// [`fit_camera`] with each extent corner moved up to `jitter` pixels, a
/// mild perspective tilt.
pub fn jittered_camera<R: Rng>(
    spec: &BoardSpec,
    width: u32,
    height: u32,
    margin: f64,
    jitter: f64,
    rng: &mut R,
) -> Homography {
    let base = fit_camera(spec, width, height, margin + jitter);
    let (lo, hi) = spec.extent();
    let src = [lo, [lo[0], hi[1]], hi, [hi[0], lo[1]]];
    let dst: Vec<Point> = src
        .iter()
        .map(|p| {
            let q = base.apply(*p);
            [
                q[0] + rng.gen_range(-jitter..=jitter),
                q[1] + rng.gen_range(-jitter..=jitter),
            ]
        })
        .collect();
    Homography::fit(&src, &dst).unwrap_or(base)
}

/// Random view of a unit marker centered at the board origin: side
/// `min_px..max_px` pixels, in-plane tilt up to `max_tilt_deg`, each corner
/// displaced up to `perspective` of the side for a projective skew.
pub fn random_marker_camera<R: Rng>(
    rng: &mut R,
    width: u32,
    height: u32,
    min_px: f64,
    max_px: f64,
    max_tilt_deg: f64,
    perspective: f64,
) -> Homography {
    let side = rng.gen_range(min_px..=max_px);
    let angle = rng.gen_range(-max_tilt_deg..=max_tilt_deg).to_radians();
    let reach = side * 0.75 + 2.0;
    let cx = rng.gen_range(reach..=(width as f64 - reach));
    let cy = rng.gen_range(reach..=(height as f64 - reach));
    let (sin, cos) = angle.sin_cos();
    let src = [[-0.5, -0.5], [-0.5, 0.5], [0.5, 0.5], [0.5, -0.5]];
    let dst: Vec<Point> = src
        .iter()
        .map(|p| {
            let (x, y) = (p[0] * side, p[1] * side);
            let j = perspective * side;
            [
                cx + cos * x - sin * y + rng.gen_range(-j..=j),
                cy + sin * x + cos * y + rng.gen_range(-j..=j),
            ]
        })
        .collect();
    Homography::fit(&src, &dst).expect("jittered square stays non-degenerate")
}

/// Renders `markers` on a plain board seen through `camera` (board to image).
pub fn render_board(
    dictionary: &MarkerDictionary,
    markers: &[PlacedMarker],
    camera: &Homography,
    width: u32,
    height: u32,
) -> Result<GrayImage, VisionError> {
    let to_board = camera.inverse()?;
    let grid = dictionary.grid;
    let cells = (grid + 2) as f64;

    struct Prepared {
        shown: u32,
        origin: Point,
        cell: f64,
        bbox: [f64; 4],
    }
    let mut prepared = Vec::with_capacity(markers.len());
    for m in markers {
        let code = dictionary.code(m.id).ok_or_else(|| {
            VisionError::InvalidArgument(format!("marker id {} is not in the dictionary", m.id))
        })?;
        let corners = BoardSpec::marker_corners(m.center, m.size, 0);
        let img: Vec<Point> = corners.iter().map(|p| camera.apply(*p)).collect();
        let bbox = [
            img.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min) - 1.0,
            img.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min) - 1.0,
            img.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max) + 1.0,
            img.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max) + 1.0,
        ];
        prepared.push(Prepared {
            shown: rotate(code, grid, m.rotation),
            origin: [m.center[0] - m.size / 2.0, m.center[1] - m.size / 2.0],
            cell: m.size / cells,
            bbox,
        });
    }

    let ss = 4;
    let mut image = GrayImage::from_pixel(width, height, Luma([SHEET]));
    for (x, y, pixel) in image.enumerate_pixels_mut() {
        let (fx, fy) = (x as f64, y as f64);
        let near: Vec<&Prepared> = prepared
            .iter()
            .filter(|p| fx >= p.bbox[0] && fx <= p.bbox[2] && fy >= p.bbox[1] && fy <= p.bbox[3])
            .collect();
        if near.is_empty() {
            continue;
        }
        let mut white = 0;
        for sy in 0..ss {
            for sx in 0..ss {
                let q = [
                    fx - 0.5 + (sx as f64 + 0.5) / ss as f64,
                    fy - 0.5 + (sy as f64 + 0.5) / ss as f64,
                ];
                let b = to_board.apply(q);
                let mut is_white = true;
                for p in &near {
                    let u = (b[0] - p.origin[0]) / p.cell;
                    let v = (b[1] - p.origin[1]) / p.cell;
                    if u >= 0.0 && v >= 0.0 && u < cells && v < cells {
                        is_white = cell_is_white(p.shown, grid, u, v);
                        break;
                    }
                }
                if is_white {
                    white += 1;
                }
            }
        }
        *pixel = shade(white as f64 / (ss * ss) as f64);
    }
    Ok(image)
}

/// Adds zero-mean Gaussian noise with standard deviation `sigma` gray levels.
pub fn add_gaussian_noise<R: Rng>(image: &mut GrayImage, sigma: f64, rng: &mut R) {
    if sigma <= 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("positive sigma");
    for p in image.pixels_mut() {
        let v = p.0[0] as f64 + normal.sample(rng);
        p.0[0] = v.round().clamp(0.0, 255.0) as u8;
    }
}

/// Image-space canonical corners a detector should report for `marker`.
pub fn expected_corners(marker: &PlacedMarker, camera: &Homography) -> [Point; 4] {
    let board = BoardSpec::marker_corners(marker.center, marker.size, marker.rotation);
    board.map(|p| camera.apply(p))
}

/// Whether `id` is one of the board's own markers rather than a style token.
pub fn is_reserved(id: u32) -> bool {
    CORNER_IDS.contains(&id) || id == SLIDER_ID
}
