//! Square fiducial markers: dictionary generation, detection in grayscale
//! images, and reading token positions and the year slider off the board.

pub mod board;
pub mod detect;
pub mod dictionary;
pub mod geometry;
pub mod raster;
pub mod synth;

pub use board::{
    calibrate_board, pixel_to_geo, read_board, read_board_with, slider_to_year, BoardCalibration,
    BoardReading, BoardSpec, TokenReading,
};
pub use detect::{detect_markers, detect_markers_with, DetectorParams, MarkerDetection};
pub use dictionary::{generate_dictionary, MarkerDictionary};
pub use geometry::{Homography, Point};
pub use raster::{decode_gray, encode_png, load_gray, save_gray};

#[derive(Debug, thiserror::Error)]
pub enum VisionError {
    #[error("unsupported image: {0}")]
    ImageFormat(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid dictionary: {0}")]
    InvalidDictionary(String),
    #[error("invalid board spec: {0}")]
    InvalidBoard(String),
    #[error("found {found} of {wanted} codes within {budget} proposals")]
    Exhausted { found: usize, wanted: usize, budget: u64 },
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("corner markers not found: {0:?}")]
    MissingCorners(Vec<u32>),
    #[error("point ({x:.2}, {y:.2}) is outside the map")]
    OutsideBoard { x: f64, y: f64 },
    #[error("marker {0} is not the slider")]
    NotSliderMarker(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
