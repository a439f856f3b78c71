//! Square binary marker codes with a guaranteed rotation-aware Hamming distance.
//!
//! Bit `row * grid + col` of a code is the payload cell at that row and
//! column of the un-rotated marker; 1 is white, 0 is black.

use std::path::Path;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::VisionError;

/// Marker ids 0..=3 are the board corners, 4 is the slider.
pub const CORNER_IDS: [u32; 4] = [0, 1, 2, 3];
pub const SLIDER_ID: u32 = 4;
pub const RESERVED_IDS: u32 = 5;

pub const DEFAULT_GRID: u32 = 5;
pub const DEFAULT_MIN_DISTANCE: u32 = 7;
pub const DEFAULT_COUNT: usize = 64;
pub const DEFAULT_SEED: u64 = 42;
pub const PROPOSAL_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerDictionary {
    pub grid: u32,
    pub min_distance: u32,
    pub seed: u64,
    pub codes: Vec<u32>,
}

/// Rotates a `grid`×`grid` code by `quarter_turns` clockwise quarter turns.
pub fn rotate(code: u32, grid: u32, quarter_turns: u32) -> u32 {
    let n = grid as usize;
    let mut out = code;
    for _ in 0..quarter_turns % 4 {
        let src = out;
        out = 0;
        for r in 0..n {
            for c in 0..n {
                // Clockwise: new[r][c] = old[n-1-c][r].
                let bit = (src >> ((n - 1 - c) * n + r)) & 1;
                out |= bit << (r * n + c);
            }
        }
    }
    out
}

pub fn hamming(a: u32, b: u32) -> u32 {
    (a ^ b).count_ones()
}

/// Smallest distance of `code` to itself under rotations 1..=3.
pub fn self_rotation_distance(code: u32, grid: u32) -> u32 {
    (1..4)
        .map(|r| hamming(code, rotate(code, grid, r)))
        .min()
        .unwrap_or(0)
}

/// Smallest distance between `a` and any rotation of `b`.
pub fn rotation_distance(a: u32, b: u32, grid: u32) -> u32 {
    (0..4)
        .map(|r| hamming(a, rotate(b, grid, r)))
        .min()
        .unwrap_or(0)
}

/// Deterministic greedy search: propose random codes and keep each one that
/// is far enough from itself rotated and from every code kept so far.
pub fn generate_dictionary(
    count: usize,
    grid: u32,
    min_distance: u32,
    seed: u64,
) -> Result<MarkerDictionary, VisionError> {
    if count == 0 {
        return Err(VisionError::InvalidArgument("count must be at least 1".into()));
    }
    if !(2..=5).contains(&grid) {
        return Err(VisionError::InvalidArgument(format!(
            "grid must be between 2 and 5 cells, got {grid}"
        )));
    }
    let bits = grid * grid;
    let mask = if bits == 32 { u32::MAX } else { (1u32 << bits) - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut codes: Vec<u32> = Vec::with_capacity(count);
    // Rotations of accepted codes, so each proposal is a flat scan.
    let mut rotated: Vec<u32> = Vec::with_capacity(count * 4);

    if min_distance <= bits {
        for _ in 0..PROPOSAL_BUDGET {
            let candidate = rng.gen::<u32>() & mask;
            if self_rotation_distance(candidate, grid) < min_distance {
                continue;
            }
            if rotated.iter().any(|&r| hamming(candidate, r) < min_distance) {
                continue;
            }
            codes.push(candidate);
            rotated.extend((0..4).map(|r| rotate(candidate, grid, r)));
            if codes.len() == count {
                return Ok(MarkerDictionary {
                    grid,
                    min_distance,
                    seed,
                    codes,
                });
            }
        }
    }
    Err(VisionError::Exhausted {
        found: codes.len(),
        wanted: count,
        budget: PROPOSAL_BUDGET,
    })
}

impl MarkerDictionary {
    /// The dictionary the game ships with: 64 codes, 5×5, distance 7, seed 42.
    pub fn builtin() -> Self {
        static BUILTIN: OnceLock<MarkerDictionary> = OnceLock::new();
        BUILTIN
            .get_or_init(|| {
                generate_dictionary(DEFAULT_COUNT, DEFAULT_GRID, DEFAULT_MIN_DISTANCE, DEFAULT_SEED)
                    .expect("default dictionary parameters are satisfiable")
            })
            .clone()
    }

    /// Number of bit errors a match may correct.
    pub fn correction_capacity(&self) -> u32 {
        self.min_distance.saturating_sub(1) / 2
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn code(&self, id: u32) -> Option<u32> {
        self.codes.get(id as usize).copied()
    }

    /// Checks the distance guarantees over every pair and rotation.
    pub fn verify(&self) -> Result<(), VisionError> {
        for (i, &a) in self.codes.iter().enumerate() {
            let own = self_rotation_distance(a, self.grid);
            if own < self.min_distance {
                return Err(VisionError::InvalidDictionary(format!(
                    "code {i} is within {own} of its own rotation"
                )));
            }
            for (j, &b) in self.codes.iter().enumerate().skip(i + 1) {
                let d = rotation_distance(a, b, self.grid);
                if d < self.min_distance {
                    return Err(VisionError::InvalidDictionary(format!(
                        "codes {i} and {j} are {d} bits apart"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Best `(id, rotation, bit_errors)` for an observed payload, if within capacity.
    /// `rotation` is how many clockwise quarter turns the observation is from the code.
    pub fn identify(&self, observed: u32) -> Option<(u32, u32, u32)> {
        let t = self.correction_capacity();
        let mut best: Option<(u32, u32, u32)> = None;
        for (id, &code) in self.codes.iter().enumerate() {
            for r in 0..4 {
                let d = hamming(observed, rotate(code, self.grid, r));
                if d <= t && best.map_or(true, |(_, _, e)| d < e) {
                    best = Some((id as u32, r, d));
                }
            }
        }
        best
    }

    pub fn from_json_str(text: &str) -> Result<Self, VisionError> {
        let dict: MarkerDictionary =
            serde_json::from_str(text).map_err(|e| VisionError::InvalidDictionary(e.to_string()))?;
        if !(2..=5).contains(&dict.grid) {
            return Err(VisionError::InvalidDictionary(format!("unsupported grid {}", dict.grid)));
        }
        let bits = dict.grid * dict.grid;
        if let Some(c) = dict.codes.iter().find(|&&c| bits < 32 && c >> bits != 0) {
            return Err(VisionError::InvalidDictionary(format!(
                "code {c} has bits beyond the {bits}-bit payload"
            )));
        }
        dict.verify()?;
        Ok(dict)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, VisionError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dictionary serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), VisionError> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}
