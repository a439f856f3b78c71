//! Deterministic text client that answers curation prompts from a reference catalog.
//!
//! Listings are noisy the way repeated model answers are: styles drop out at
//! random, spellings vary, and each answer contains one invented style name.

use std::collections::HashMap;

use parking_lot::Mutex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::calendar::century;
use crate::catalog::{Catalog, StyleRecord};
use crate::genai::{ClientError, TextClient};
use crate::text::canonical_name;

use super::StyleSummary;

const KEEP_PROBABILITY: f64 = 0.85;
const VARIANT_PROBABILITY: f64 = 0.2;

const INVENTED_PREFIXES: &[&str] = &[
    "Crystal", "Floating", "Lunar", "Verdant", "Obsidian", "Coral", "Hollow", "Amber", "Silent",
    "Spiral", "Mirror", "Ember",
];
const INVENTED_SUFFIXES: &[&str] = &[
    "Revival", "Vernacular", "Terrace Style", "Court Style", "Monumentalism", "Lattice School",
    "Dome Tradition", "Canopy Style", "Rampart Style", "Stepwell Style",
];

pub struct FixtureTextClient {
    reference: Catalog,
    seed: u64,
    calls: Mutex<HashMap<String, u64>>,
}

impl FixtureTextClient {
    pub fn new(reference: Catalog, seed: u64) -> Self {
        FixtureTextClient {
            reference,
            seed,
            calls: Mutex::new(HashMap::new()),
        }
    }

    fn rng_for(&self, prompt: &str, call: u64) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(call.to_le_bytes());
        hasher.update(prompt.as_bytes());
        ChaCha8Rng::from_seed(hasher.finalize().into())
    }

    fn find_style(&self, name: &str) -> Option<&StyleRecord> {
        let wanted = canonical_name(name);
        self.reference.styles().iter().find(|s| {
            canonical_name(&s.name) == wanted || s.aliases.iter().any(|a| canonical_name(a) == wanted)
        })
    }

    fn listing(&self, prompt: &str, region_name: &str) -> Result<String, ClientError> {
        let call = {
            let mut calls = self.calls.lock();
            let n = calls.entry(prompt.to_string()).or_default();
            *n += 1;
            *n
        };
        let wanted = canonical_name(region_name);
        let region = self
            .reference
            .regions()
            .iter()
            .find(|r| canonical_name(&r.display_name) == wanted || r.id == region_name)
            .ok_or_else(|| ClientError(format!("unknown region {region_name:?}")))?;

        let mut rng = self.rng_for(prompt, call);
        let mut names: Vec<String> = Vec::new();
        for style in self.reference.styles().iter().filter(|s| s.region_id == region.id) {
            if !rng.gen_bool(KEEP_PROBABILITY) {
                continue;
            }
            let name = if rng.gen_bool(VARIANT_PROBABILITY) {
                match rng.gen_range(0..3) {
                    0 => style.name.to_lowercase(),
                    1 => style.name.to_uppercase(),
                    _ => style.name.replace(' ', "-"),
                }
            } else {
                style.name.clone()
            };
            names.push(name);
        }
        names.shuffle(&mut rng);
        let invented = format!(
            "{} {}",
            INVENTED_PREFIXES.choose(&mut rng).unwrap(),
            INVENTED_SUFFIXES.choose(&mut rng).unwrap()
        );
        let at = rng.gen_range(0..=names.len());
        names.insert(at, invented);
        names.truncate(10);
        Ok(names
            .iter()
            .enumerate()
            .map(|(i, n)| format!("{}. {n}", i + 1))
            .collect::<Vec<_>>()
            .join("\n"))
    }

    fn summary(&self, prompt: &str, style_name: &str) -> String {
        let summary = match self.find_style(style_name) {
            Some(style) => StyleSummary {
                name: style.name.clone(),
                period: style.period,
                characteristics: style.characteristics.clone(),
                architects: style.architects.clone(),
                origin: style.origin,
                summary: style.summary.clone(),
            },
            None => {
                let mut rng = self.rng_for(prompt, 0);
                let start = rng.gen_range(1000..1900);
                StyleSummary {
                    name: style_name.to_string(),
                    period: crate::catalog::YearInterval {
                        start,
                        end: start + 50,
                    },
                    characteristics: vec!["ornamented facades".into()],
                    architects: vec![],
                    origin: crate::catalog::GeoCoord { lat: 0.0, lon: 0.0 },
                    summary: "A loosely defined regional tradition.".into(),
                }
            }
        };
        serde_json::to_string(&summary).expect("summary serializes")
    }
}

/// Text between the first pair of double quotes.
fn quoted(prompt: &str) -> Option<&str> {
    let start = prompt.find('"')? + 1;
    let len = prompt[start..].find('"')?;
    Some(&prompt[start..start + len])
}

impl TextClient for FixtureTextClient {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        let subject =
            quoted(prompt).ok_or_else(|| ClientError("prompt names no subject".into()))?;
        if prompt.starts_with("List the top") {
            self.listing(prompt, subject)
        } else if prompt.starts_with("Give a concise JSON summary") {
            Ok(self.summary(prompt, subject))
        } else if prompt.starts_with("In which century") {
            self.find_style(subject)
                .map(|s| century(s.period.start).to_string())
                .ok_or_else(|| ClientError(format!("unknown style {subject:?}")))
        } else if prompt.starts_with("Which socio-cultural region") {
            self.find_style(subject)
                .and_then(|s| self.reference.region_by_id(&s.region_id).ok())
                .map(|r| r.display_name.clone())
                .ok_or_else(|| ClientError(format!("unknown style {subject:?}")))
        } else if prompt.starts_with("Which architectural style is the architect") {
            let wanted = canonical_name(subject);
            self.reference
                .styles()
                .iter()
                .find(|s| s.architects.iter().any(|a| canonical_name(a) == wanted))
                .map(|s| s.name.clone())
                .ok_or_else(|| ClientError(format!("unknown architect {subject:?}")))
        } else {
            Err(ClientError("unrecognized prompt".into()))
        }
    }
}
