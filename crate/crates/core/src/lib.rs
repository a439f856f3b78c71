//! Core of the ArchiGuesser game: the curated style catalog, the content
//! curation pipeline, generative adapters with a content-addressed cache,
//! prompt construction, scoring and the event-sourced game engine.

pub mod api;
pub mod calendar;
pub mod catalog;
pub mod clock;
pub mod curation;
pub mod engine;
pub mod genai;
pub mod prompt;
pub mod scoring;
pub mod text;

pub use catalog::{Catalog, CatalogError, GeoCoord, Landmark, Region, StyleRecord, YearInterval};
pub use scoring::{GameMode, Guess, RoundSpec, Score};
