//! Marker detection in grayscale frames.
//!
//! Pixel centers sit at integer coordinates; pixel `(x, y)` covers
//! `[x - 0.5, x + 0.5) × [y - 0.5, y + 0.5)`.

use image::GrayImage;
use serde::{Deserialize, Serialize};

use crate::dictionary::MarkerDictionary;
use crate::geometry::{line_intersection, quad_center, Homography, Point};
use crate::VisionError;

pub const MIN_IMAGE_SIDE: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorParams {
    /// Side of the adaptive threshold window in pixels.
    pub window: u32,
    /// Offset subtracted from the window mean.
    pub offset: i32,
    pub min_area: f64,
    pub min_aspect: f64,
    pub max_aspect: f64,
    /// Minimum gray-level gap between the dark and light classes of a marker.
    pub min_contrast: f64,
    pub refine_corners: bool,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            window: 15,
            offset: 7,
            min_area: 100.0,
            min_aspect: 0.3,
            max_aspect: 3.0,
            min_contrast: 20.0,
            refine_corners: true,
        }
    }
}

/// A decoded marker. `corners` start at the top-left corner of the
/// un-rotated marker and run counter-clockwise as seen on screen
/// (top-left, bottom-left, bottom-right, top-right of the canonical marker).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerDetection {
    pub marker_id: u32,
    /// Clockwise quarter turns of the marker relative to the image axes.
    pub rotation: u32,
    pub corners: [Point; 4],
    pub decode_errors: u32,
}

impl MarkerDetection {
    pub fn center(&self) -> Point {
        quad_center(&self.corners)
    }

    fn min_side(&self) -> f64 {
        (0..4)
            .map(|i| dist(self.corners[i], self.corners[(i + 1) % 4]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn detect_markers(
    image: &GrayImage,
    dictionary: &MarkerDictionary,
) -> Result<Vec<MarkerDetection>, VisionError> {
    detect_markers_with(image, dictionary, &DetectorParams::default())
}

pub fn detect_markers_with(
    image: &GrayImage,
    dictionary: &MarkerDictionary,
    params: &DetectorParams,
) -> Result<Vec<MarkerDetection>, VisionError> {
    let (w, h) = image.dimensions();
    if w < MIN_IMAGE_SIDE || h < MIN_IMAGE_SIDE {
        return Err(VisionError::ImageFormat(format!(
            "image is {w}x{h}, at least {MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE} required"
        )));
    }
    if params.window < 3 {
        return Err(VisionError::InvalidArgument("threshold window must be at least 3".into()));
    }
    let binary = adaptive_threshold(image, params.window, params.offset);
    let mut found = Vec::new();
    for component in components(&binary, w as usize, h as usize) {
        let contour = trace_outer(&binary, w as usize, h as usize, component.start);
        let Some(quad) = approximate_quad(&contour) else {
            continue;
        };
        if !accept_quad(&quad, params) {
            continue;
        }
        let quad = if params.refine_corners {
            refine_quad(image, &quad, dictionary.grid).unwrap_or(quad)
        } else {
            quad
        };
        if let Some(det) = decode(image, &quad, dictionary, params) {
            found.push(det);
        }
    }
    Ok(dedup(found))
}

/// 1 where the pixel is at most `mean(window) - offset`, i.e. darker than its surroundings.
pub fn adaptive_threshold(image: &GrayImage, window: u32, offset: i32) -> Vec<u8> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let raw = image.as_raw();
    let stride = w + 1;
    let mut integral = vec![0u64; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0u64;
        for x in 0..w {
            row += raw[y * w + x] as u64;
            integral[(y + 1) * stride + x + 1] = integral[y * stride + x + 1] + row;
        }
    }
    let half = (window / 2) as usize;
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        let y0 = y.saturating_sub(half);
        let y1 = (y + half + 1).min(h);
        for x in 0..w {
            let x0 = x.saturating_sub(half);
            let x1 = (x + half + 1).min(w);
            let sum = integral[y1 * stride + x1] + integral[y0 * stride + x0]
                - integral[y0 * stride + x1]
                - integral[y1 * stride + x0];
            let count = ((y1 - y0) * (x1 - x0)) as i64;
            let v = raw[y * w + x] as i64;
            if (v + offset as i64) * count <= sum as i64 {
                out[y * w + x] = 1;
            }
        }
    }
    out
}

struct Component {
    /// First pixel in raster order; its west and north neighbours are background.
    start: (usize, usize),
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

/// 8-connected foreground components whose bounding box could hold a marker.
fn components(binary: &[u8], w: usize, h: usize) -> Vec<Component> {
    let mut labels = vec![0u32; w * h];
    let mut parent: Vec<u32> = vec![0];
    for y in 0..h {
        for x in 0..w {
            if binary[y * w + x] == 0 {
                continue;
            }
            let mut neighbours = [0u32; 4];
            let mut n = 0;
            if x > 0 && labels[y * w + x - 1] != 0 {
                neighbours[n] = labels[y * w + x - 1];
                n += 1;
            }
            if y > 0 {
                for dx in [-1isize, 0, 1] {
                    let nx = x as isize + dx;
                    if nx >= 0 && (nx as usize) < w {
                        let l = labels[(y - 1) * w + nx as usize];
                        if l != 0 {
                            neighbours[n] = l;
                            n += 1;
                        }
                    }
                }
            }
            if n == 0 {
                let l = parent.len() as u32;
                parent.push(l);
                labels[y * w + x] = l;
            } else {
                let mut root = find(&mut parent, neighbours[0]);
                for &other in &neighbours[1..n] {
                    let r = find(&mut parent, other);
                    if r != root {
                        // Keep the smaller label as root: it was created first in raster order.
                        let (lo, hi) = if r < root { (r, root) } else { (root, r) };
                        parent[hi as usize] = lo;
                        root = lo;
                    }
                }
                labels[y * w + x] = root;
            }
        }
    }

    let n_labels = parent.len();
    let mut min_x = vec![usize::MAX; n_labels];
    let mut max_x = vec![0usize; n_labels];
    let mut min_y = vec![usize::MAX; n_labels];
    let mut max_y = vec![0usize; n_labels];
    let mut start = vec![None; n_labels];
    for y in 0..h {
        for x in 0..w {
            let l = labels[y * w + x];
            if l == 0 {
                continue;
            }
            let r = find(&mut parent, l) as usize;
            if start[r].is_none() {
                start[r] = Some((x, y));
            }
            min_x[r] = min_x[r].min(x);
            max_x[r] = max_x[r].max(x);
            min_y[r] = min_y[r].min(y);
            max_y[r] = max_y[r].max(y);
        }
    }
    (1..n_labels)
        .filter_map(|r| {
            let s = start[r]?;
            let bw = max_x[r] - min_x[r] + 1;
            let bh = max_y[r] - min_y[r] + 1;
            (bw >= 8 && bh >= 8 && bw * bh >= 100).then_some(Component { start: s })
        })
        .collect()
}

/// Clockwise neighbour offsets (image coordinates, y down) starting west.
const RING: [(isize, isize); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

/// Moore-neighbour tracing of the outer boundary starting at `start`.
fn trace_outer(binary: &[u8], w: usize, h: usize, start: (usize, usize)) -> Vec<(usize, usize)> {
    let fg = |x: isize, y: isize| {
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && binary[y as usize * w + x as usize] != 0
    };
    let mut contour = vec![start];
    let (sx, sy) = (start.0 as isize, start.1 as isize);
    let (mut cx, mut cy) = (sx, sy);
    // Backtrack: index in RING (relative to the current pixel) of the last background pixel.
    let mut back = 0usize;
    let mut first_move: Option<(isize, isize)> = None;
    let limit = 4 * w * h;
    for _ in 0..limit {
        let mut next = None;
        for i in 1..=8 {
            let k = (back + i) % 8;
            let (dx, dy) = RING[k];
            if fg(cx + dx, cy + dy) {
                next = Some((k, (back + i - 1) % 8));
                break;
            }
        }
        let Some((k, prev_bg)) = next else {
            break;
        };
        let (nx, ny) = (cx + RING[k].0, cy + RING[k].1);
        // The background pixel examined last, expressed relative to the new pixel.
        let (bx, by) = (cx + RING[prev_bg].0 - nx, cy + RING[prev_bg].1 - ny);
        back = RING
            .iter()
            .position(|&(dx, dy)| dx == bx && dy == by)
            .unwrap_or(0);
        if (cx, cy) == (sx, sy) {
            match first_move {
                None => first_move = Some((nx, ny)),
                Some(m) if m == (nx, ny) => break,
                _ => {}
            }
        }
        cx = nx;
        cy = ny;
        if (cx, cy) != (sx, sy) {
            contour.push((cx as usize, cy as usize));
        }
    }
    contour
}

fn point_line_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = (dx * dx + dy * dy).sqrt();
    if len == 0.0 {
        return dist(p, a);
    }
    ((p[0] - a[0]) * dy - (p[1] - a[1]) * dx).abs() / len
}

/// Douglas–Peucker on an open chain; returns kept indices including both ends.
fn douglas_peucker(points: &[Point], eps: f64, out: &mut Vec<usize>, offset: usize) {
    let n = points.len();
    if n < 3 {
        return;
    }
    let (a, b) = (points[0], points[n - 1]);
    let mut best = (0usize, 0.0f64);
    for (i, p) in points.iter().enumerate().take(n - 1).skip(1) {
        let d = point_line_distance(*p, a, b);
        if d > best.1 {
            best = (i, d);
        }
    }
    if best.1 > eps {
        douglas_peucker(&points[..=best.0], eps, out, offset);
        out.push(offset + best.0);
        douglas_peucker(&points[best.0..], eps, out, offset + best.0);
    }
}

/// Four-vertex approximation of a closed contour, ordered top-left,
/// bottom-left, bottom-right, top-right as seen on screen.
fn approximate_quad(contour: &[(usize, usize)]) -> Option<[Point; 4]> {
    if contour.len() < 12 {
        return None;
    }
    let pts: Vec<Point> = contour.iter().map(|&(x, y)| [x as f64, y as f64]).collect();
    let n = pts.len();
    let farthest = |from: Point| {
        (0..n)
            .max_by(|&i, &j| dist(pts[i], from).total_cmp(&dist(pts[j], from)))
            .unwrap_or(0)
    };
    let a = farthest(pts[0]);
    let b = farthest(pts[a]);
    let (i0, i1) = if a < b { (a, b) } else { (b, a) };
    let eps = (0.03 * n as f64).max(1.5);

    let chain1: Vec<Point> = pts[i0..=i1].to_vec();
    let mut chain2: Vec<Point> = pts[i1..].to_vec();
    chain2.extend_from_slice(&pts[..=i0]);

    let mut keep1 = vec![0];
    douglas_peucker(&chain1, eps, &mut keep1, 0);
    let mut keep2 = vec![0];
    douglas_peucker(&chain2, eps, &mut keep2, 0);

    let mut poly: Vec<Point> = keep1.iter().map(|&i| chain1[i]).collect();
    poly.extend(keep2.iter().map(|&i| chain2[i]));
    if poly.len() != 4 {
        return None;
    }
    let mut quad = [poly[0], poly[1], poly[2], poly[3]];
    if signed_area(&quad) > 0.0 {
        quad.reverse();
    }
    let first = (0..4)
        .min_by(|&i, &j| {
            let (p, q) = (quad[i], quad[j]);
            (p[0] + p[1]).total_cmp(&(q[0] + q[1])).then(p[1].total_cmp(&q[1]))
        })
        .unwrap_or(0);
    quad.rotate_left(first);
    Some(quad)
}

/// Shoelace area; negative for top-left, bottom-left, bottom-right, top-right order.
fn signed_area(q: &[Point; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        let (a, b) = (q[i], q[(i + 1) % 4]);
        s += a[0] * b[1] - b[0] * a[1];
    }
    s / 2.0
}

fn accept_quad(q: &[Point; 4], params: &DetectorParams) -> bool {
    let mut sign = 0.0f64;
    for i in 0..4 {
        let (a, b, c) = (q[i], q[(i + 1) % 4], q[(i + 2) % 4]);
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross == 0.0 || (sign != 0.0 && cross.signum() != sign) {
            return false;
        }
        sign = cross.signum();
    }
    if signed_area(q).abs() < params.min_area {
        return false;
    }
    let sides: Vec<f64> = (0..4).map(|i| dist(q[i], q[(i + 1) % 4])).collect();
    if sides.iter().any(|&s| s < 4.0) {
        return false;
    }
    let aspect = (sides[0] + sides[2]) / (sides[1] + sides[3]);
    (params.min_aspect..=params.max_aspect).contains(&aspect)
}

fn bilinear(image: &GrayImage, p: Point) -> Option<f64> {
    let (w, h) = (image.width() as f64, image.height() as f64);
    if !(p[0] >= 0.0 && p[1] >= 0.0 && p[0] <= w - 1.0 && p[1] <= h - 1.0) {
        return None;
    }
    let (x0, y0) = (p[0].floor(), p[1].floor());
    let (fx, fy) = (p[0] - x0, p[1] - y0);
    let (x0, y0) = (x0 as u32, y0 as u32);
    let x1 = (x0 + 1).min(image.width() - 1);
    let y1 = (y0 + 1).min(image.height() - 1);
    let g = |x: u32, y: u32| image.get_pixel(x, y).0[0] as f64;
    Some(
        g(x0, y0) * (1.0 - fx) * (1.0 - fy)
            + g(x1, y0) * fx * (1.0 - fy)
            + g(x0, y1) * (1.0 - fx) * fy
            + g(x1, y1) * fx * fy,
    )
}

/// Otsu threshold over real-valued samples in [0, 255]; returns
/// (threshold, mean of dark class, mean of light class).
fn otsu(samples: &[f64]) -> (f64, f64, f64) {
    let mut hist = [0u32; 256];
    for &s in samples {
        hist[s.round().clamp(0.0, 255.0) as usize] += 1;
    }
    let total = samples.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best = (0.0f64, 127usize, 0.0, 0.0);
    for (t, &c) in hist.iter().enumerate() {
        w0 += c as f64;
        sum0 += t as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1).powi(2);
        if between > best.0 {
            best = (between, t, m0, m1);
        }
    }
    (best.1 as f64 + 0.5, best.2, best.3)
}

const SAMPLES_PER_AXIS: usize = 3;

/// Reads the cell grid inside `quad` and matches it against the dictionary.
fn decode(
    image: &GrayImage,
    quad: &[Point; 4],
    dictionary: &MarkerDictionary,
    params: &DetectorParams,
) -> Option<MarkerDetection> {
    let grid = dictionary.grid as usize;
    let cells = grid + 2;
    let c = cells as f64;
    let canon = [[0.0, 0.0], [0.0, c], [c, c], [c, 0.0]];
    let h = Homography::fit(&canon, quad).ok()?;

    let per_cell = SAMPLES_PER_AXIS * SAMPLES_PER_AXIS;
    let mut samples = Vec::with_capacity(cells * cells * per_cell);
    for row in 0..cells {
        for col in 0..cells {
            for sy in 0..SAMPLES_PER_AXIS {
                for sx in 0..SAMPLES_PER_AXIS {
                    // Central 60 % of the cell.
                    let u = col as f64 + 0.2 + 0.6 * (sx as f64 + 0.5) / SAMPLES_PER_AXIS as f64;
                    let v = row as f64 + 0.2 + 0.6 * (sy as f64 + 0.5) / SAMPLES_PER_AXIS as f64;
                    samples.push(bilinear(image, h.apply([u, v]))?);
                }
            }
        }
    }
    let (threshold, dark, light) = otsu(&samples);
    if light - dark < params.min_contrast {
        return None;
    }
    let white = |row: usize, col: usize| {
        let base = (row * cells + col) * per_cell;
        let bright = samples[base..base + per_cell]
            .iter()
            .filter(|&&s| s > threshold)
            .count();
        bright * 2 > per_cell
    };
    for i in 0..cells {
        if white(0, i) || white(cells - 1, i) || white(i, 0) || white(i, cells - 1) {
            return None;
        }
    }
    let mut observed = 0u32;
    for row in 0..grid {
        for col in 0..grid {
            if white(row + 1, col + 1) {
                observed |= 1 << (row * grid + col);
            }
        }
    }
    let (id, rotation, errors) = dictionary.identify(observed)?;
    let mut corners = [[0.0; 2]; 4];
    for (k, corner) in corners.iter_mut().enumerate() {
        *corner = quad[(k + 4 - rotation as usize) % 4];
    }
    Some(MarkerDetection {
        marker_id: id,
        rotation,
        corners,
        decode_errors: errors,
    })
}

/// Fits each edge to the strongest dark-to-light transition along its
/// normal and intersects adjacent edge lines.
fn refine_quad(image: &GrayImage, quad: &[Point; 4], grid: u32) -> Option<[Point; 4]> {
    let centroid = [
        quad.iter().map(|p| p[0]).sum::<f64>() / 4.0,
        quad.iter().map(|p| p[1]).sum::<f64>() / 4.0,
    ];
    let min_side = (0..4)
        .map(|i| dist(quad[i], quad[(i + 1) % 4]))
        .fold(f64::INFINITY, f64::min);
    let cell = min_side / (grid + 2) as f64;
    let reach = (0.45 * cell).clamp(1.0, 4.0);
    const STEP: f64 = 0.25;

    let mut lines = Vec::with_capacity(4);
    for i in 0..4 {
        let (a, b) = (quad[i], quad[(i + 1) % 4]);
        let len = dist(a, b);
        let d = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        let mut n = [d[1], -d[0]];
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        if (mid[0] - centroid[0]) * n[0] + (mid[1] - centroid[1]) * n[1] < 0.0 {
            n = [-n[0], -n[1]];
        }
        let count = ((len / 1.5) as usize).clamp(6, 48);
        let mut edge_points = Vec::with_capacity(count);
        let steps = (2.0 * reach / STEP).round() as usize;
        for k in 0..count {
            let t = 0.12 + 0.76 * (k as f64 + 0.5) / count as f64;
            let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let profile: Option<Vec<f64>> = (0..=steps)
                .map(|s| {
                    let off = -reach + s as f64 * STEP;
                    let mut acc = 0.0;
                    for tang in [-0.5, 0.0, 0.5] {
                        let q = [
                            p[0] + off * n[0] + tang * d[0],
                            p[1] + off * n[1] + tang * d[1],
                        ];
                        acc += bilinear(image, q)?;
                    }
                    Some(acc / 3.0)
                })
                .collect();
            let Some(profile) = profile else { continue };
            // Outward derivative: dark inside, light outside gives a positive peak.
            let grad: Vec<f64> = (1..profile.len() - 1)
                .map(|s| (profile[s + 1] - profile[s - 1]) / (2.0 * STEP))
                .collect();
            let Some((best, &g)) = grad.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)) else {
                continue;
            };
            if g < 4.0 || best == 0 || best + 1 == grad.len() {
                continue;
            }
            let (gl, gr) = (grad[best - 1], grad[best + 1]);
            let den = gl - 2.0 * g + gr;
            let shift = if den.abs() > 1e-12 { 0.5 * (gl - gr) / den } else { 0.0 };
            let off = -reach + (best as f64 + 1.0 + shift) * STEP;
            edge_points.push([p[0] + off * n[0], p[1] + off * n[1]]);
        }
        if edge_points.len() < 4 {
            return None;
        }
        lines.push(fit_line(&edge_points)?);
    }
    let mut out = [[0.0; 2]; 4];
    for i in 0..4 {
        let prev = &lines[(i + 3) % 4];
        let cur = &lines[i];
        let p = line_intersection(prev.0, prev.1, cur.0, cur.1)?;
        if dist(p, quad[i]) > 3.0 {
            return None;
        }
        out[i] = p;
    }
    Some(out)
}

/// Total least squares line through `points`, returned as two points on it.
fn fit_line(points: &[Point]) -> Option<(Point, Point)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let dir = [angle.cos(), angle.sin()];
    if !dir[0].is_finite() {
        return None;
    }
    Some(([mx, my], [mx + dir[0], my + dir[1]]))
}

/// Drops detections that overlap a better one (fewer bit errors, then larger).
fn dedup(mut found: Vec<MarkerDetection>) -> Vec<MarkerDetection> {
    found.sort_by(|a, b| {
        a.decode_errors
            .cmp(&b.decode_errors)
            .then(b.min_side().total_cmp(&a.min_side()))
    });
    let mut kept: Vec<MarkerDetection> = Vec::new();
    for det in found {
        let c = det.center();
        let overlaps = kept.iter().any(|k| {
            dist(k.center(), c) < 0.5 * k.min_side().max(det.min_side())
        });
        if !overlaps {
            kept.push(det);
        }
    }
    kept.sort_by(|a, b| {
        a.marker_id.cmp(&b.marker_id).then(
            a.center()[0]
                .total_cmp(&b.center()[0])
                .then(a.center()[1].total_cmp(&b.center()[1])),
        )
    });
    kept
}
