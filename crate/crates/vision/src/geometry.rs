//! Planar projective transforms.

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::VisionError;

pub type Point = [f64; 2];

/// 3×3 projective map, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Homography(pub [[f64; 3]; 3]);

impl Homography {
    pub fn identity() -> Self {
        Homography([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Homography([[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]])
    }

    pub fn from_matrix(m: Matrix3<f64>) -> Self {
        let mut a = [[0.0; 3]; 3];
        for (r, row) in a.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = m[(r, c)];
            }
        }
        Homography(a)
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        let a = &self.0;
        Matrix3::new(
            a[0][0], a[0][1], a[0][2], a[1][0], a[1][1], a[1][2], a[2][0], a[2][1], a[2][2],
        )
    }

    pub fn apply(&self, p: Point) -> Point {
        let a = &self.0;
        let w = a[2][0] * p[0] + a[2][1] * p[1] + a[2][2];
        [
            (a[0][0] * p[0] + a[0][1] * p[1] + a[0][2]) / w,
            (a[1][0] * p[0] + a[1][1] * p[1] + a[1][2]) / w,
        ]
    }

    pub fn determinant(&self) -> f64 {
        self.matrix().determinant()
    }

    pub fn inverse(&self) -> Result<Self, VisionError> {
        self.matrix()
            .try_inverse()
            .map(|m| Homography::from_matrix(m).normalized())
            .ok_or_else(|| VisionError::Degenerate("homography is singular".into()))
    }

    /// `self` after `first`: p ↦ self(first(p)).
    pub fn compose(&self, first: &Homography) -> Self {
        Homography::from_matrix(self.matrix() * first.matrix()).normalized()
    }

    /// Scaled so that h33 = 1 when possible, otherwise to unit Frobenius norm.
    pub fn normalized(&self) -> Self {
        let m = self.matrix();
        let h33 = m[(2, 2)];
        if h33.abs() > 1e-12 {
            Homography::from_matrix(m / h33)
        } else {
            Homography::from_matrix(m / m.norm())
        }
    }

    /// Normalized direct linear transform mapping `src[i]` to `dst[i]`,
    /// least squares when more than four pairs are given.
    pub fn fit(src: &[Point], dst: &[Point]) -> Result<Self, VisionError> {
        if src.len() != dst.len() {
            return Err(VisionError::InvalidArgument(
                "correspondence lists differ in length".into(),
            ));
        }
        if src.len() < 4 {
            return Err(VisionError::Degenerate(format!(
                "need at least 4 correspondences, got {}",
                src.len()
            )));
        }
        if !spans_plane(src) || !spans_plane(dst) {
            return Err(VisionError::Degenerate(
                "correspondences are collinear".into(),
            ));
        }
        let (ts, ns) = normalizer(src);
        let (td, nd) = normalizer(dst);
        let rows = (2 * src.len()).max(9);
        let mut a = DMatrix::<f64>::zeros(rows, 9);
        for (i, (s, d)) in ns.iter().zip(&nd).enumerate() {
            let (x, y, u, v) = (s[0], s[1], d[0], d[1]);
            let r = 2 * i;
            a.row_mut(r)
                .copy_from_slice(&[-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u]);
            a.row_mut(r + 1)
                .copy_from_slice(&[0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]);
        }
        let svd = a.svd(false, true);
        let v_t = svd
            .v_t
            .ok_or_else(|| VisionError::Degenerate("SVD did not converge".into()))?;
        let (min_index, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nine singular values");
        let h = v_t.row(min_index);
        let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
        let m = td
            .try_inverse()
            .ok_or_else(|| VisionError::Degenerate("normalization failed".into()))?
            * hn
            * ts;
        let result = Homography::from_matrix(m).normalized();
        if result.determinant().abs() <= 1e-12 || !result.0.iter().flatten().all(|v| v.is_finite()) {
            return Err(VisionError::Degenerate("fitted homography is singular".into()));
        }
        Ok(result)
    }

    /// Root mean square of `|H(src[i]) - dst[i]|`.
    pub fn rms_error(&self, src: &[Point], dst: &[Point]) -> f64 {
        if src.is_empty() {
            return 0.0;
        }
        let sum: f64 = src
            .iter()
            .zip(dst)
            .map(|(s, d)| {
                let p = self.apply(*s);
                (p[0] - d[0]).powi(2) + (p[1] - d[1]).powi(2)
            })
            .sum();
        (sum / src.len() as f64).sqrt()
    }
}

/// Similarity moving the centroid to the origin and the mean distance to √2.
fn normalizer(points: &[Point]) -> (Matrix3<f64>, Vec<Point>) {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let mean = points
        .iter()
        .map(|p| ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    let s = if mean > 0.0 { std::f64::consts::SQRT_2 / mean } else { 1.0 };
    let t = Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0);
    let mapped = points
        .iter()
        .map(|p| [s * (p[0] - cx), s * (p[1] - cy)])
        .collect();
    (t, mapped)
}

/// True when the points are not all on one line (relative tolerance).
fn spans_plane(points: &[Point]) -> bool {
    let scale = points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let a = points[0];
    let far = points
        .iter()
        .max_by(|p, q| dist2(a, **p).total_cmp(&dist2(a, **q)))
        .copied()
        .unwrap_or(a);
    if dist2(a, far).sqrt() <= 1e-9 * scale {
        return false;
    }
    points.iter().any(|p| {
        let cross = (far[0] - a[0]) * (p[1] - a[1]) - (far[1] - a[1]) * (p[0] - a[0]);
        cross.abs() > 1e-9 * scale * scale
    })
}

fn dist2(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Intersection of the diagonals of a quadrilateral, the projective center of a square.
pub fn quad_center(q: &[Point; 4]) -> Point {
    line_intersection(q[0], q[2], q[1], q[3]).unwrap_or([
        (q[0][0] + q[1][0] + q[2][0] + q[3][0]) / 4.0,
        (q[0][1] + q[1][1] + q[2][1] + q[3][1]) / 4.0,
    ])
}

/// Intersection of line a1–a2 with line b1–b2.
pub fn line_intersection(a1: Point, a2: Point, b1: Point, b2: Point) -> Option<Point> {
    let d1 = [a2[0] - a1[0], a2[1] - a1[1]];
    let d2 = [b2[0] - b1[0], b2[1] - b1[1]];
    let den = d1[0] * d2[1] - d1[1] * d2[0];
    if den.abs() < 1e-12 {
        return None;
    }
    let t = ((b1[0] - a1[0]) * d2[1] - (b1[1] - a1[1]) * d2[0]) / den;
    Some([a1[0] + t * d1[0], a1[1] + t * d1[1]])
}
