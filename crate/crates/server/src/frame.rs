//! Turning a camera frame of the board into a guess.

use archiguesser_core::scoring::{haversine_km, GameMode, Guess, RoundSpec};
use archiguesser_core::Catalog;
use archiguesser_vision::board::{read_board_with, BoardReading, BoardSpec, TokenReading};
use archiguesser_vision::detect::DetectorParams;
use archiguesser_vision::dictionary::MarkerDictionary;
use archiguesser_vision::raster::decode_gray;

use crate::error::ApiError;

/// Media types accepted for the `frame` multipart field.
pub const FRAME_MEDIA_TYPES: [&str; 2] = ["image/png", "image/x-portable-graymap"];

pub struct FrameReader<'a> {
    pub catalog: &'a Catalog,
    pub dictionary: &'a MarkerDictionary,
    pub board: &'a BoardSpec,
    pub params: &'a DetectorParams,
}

impl FrameReader<'_> {
    pub fn read(&self, bytes: &[u8]) -> Result<BoardReading, ApiError> {
        let image = decode_gray(bytes)?;
        let bound = self.catalog.bound_marker_ids();
        Ok(read_board_with(
            &image,
            self.dictionary,
            self.board,
            self.params,
            |id| bound.contains(&id),
        )?)
    }

    pub fn guess(&self, bytes: &[u8], spec: &RoundSpec) -> Result<Guess, ApiError> {
        let reading = self.read(bytes)?;
        reading_to_guess(&reading, self.catalog, self.board, spec)
    }
}

/// Distance in board units from `token` to the slider axis line.
fn slider_distance(board: &BoardSpec, token: &TokenReading) -> f64 {
    let (a, b, p) = (board.slider.start, board.slider.end, token.board);
    let d = [b[0] - a[0], b[1] - a[1]];
    let cross = d[0] * (p[1] - a[1]) - d[1] * (p[0] - a[0]);
    cross.abs() / d[0].hypot(d[1])
}

/// Builds the guess a board reading stands for.
///
/// Sights mode with two tokens: the token nearer the slider edge is the
/// original style, the other the fused style, and the token nearer the
/// landmark gives the location.
pub fn reading_to_guess(
    reading: &BoardReading,
    catalog: &Catalog,
    board: &BoardSpec,
    spec: &RoundSpec,
) -> Result<Guess, ApiError> {
    let mut tokens: Vec<&TokenReading> = reading.tokens.iter().collect();
    tokens.sort_by_key(|t| t.marker_id);
    tokens.dedup_by_key(|t| t.marker_id);
    if tokens.is_empty() {
        return Err(ApiError::unprocessable("no_tokens", "no style token found on the map"));
    }
    let Some(year) = reading.slider_year else {
        return Err(ApiError::unprocessable("no_slider", "the year slider marker was not found"));
    };
    if spec.mode == GameMode::Sights && tokens.len() == 2 {
        tokens.sort_by(|a, b| {
            slider_distance(board, a)
                .total_cmp(&slider_distance(board, b))
                .then(a.marker_id.cmp(&b.marker_id))
        });
    }
    let located = tokens
        .iter()
        .min_by(|a, b| {
            haversine_km(a.coord, spec.truth_coord)
                .total_cmp(&haversine_km(b.coord, spec.truth_coord))
                .then(a.marker_id.cmp(&b.marker_id))
        })
        .expect("at least one token");
    let coord = if spec.mode == GameMode::Sights { located.coord } else { tokens[0].coord };
    let style_token_ids = tokens
        .iter()
        .map(|t| {
            catalog
                .style_for_marker(t.marker_id)
                .map(|s| s.id.clone())
                .ok_or_else(|| ApiError::internal(format!("marker {} lost its binding", t.marker_id)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Guess {
        style_token_ids,
        coord,
        year,
        submitted_at: None,
    })
}
