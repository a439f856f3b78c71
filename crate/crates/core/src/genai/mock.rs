//! Deterministic stand-ins for the text, image and speech services.
//!
//! Each payload is a pure function of the request: the SHA-256 of the
//! canonical request string seeds everything.

use std::io::Cursor;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{GenBackend, GenError, GenKind, GenRequest, Payload};

const ADJECTIVES: &[&str] = &[
    "tall", "quiet", "golden", "pale", "heavy", "slender", "carved", "patient", "hidden", "broad",
    "silent", "weathered", "luminous", "deep", "warm", "cold", "narrow", "open", "old", "bright",
];
const NOUNS: &[&str] = &[
    "stone", "light", "arch", "vault", "column", "shadow", "court", "tower", "dome", "wall",
    "window", "garden", "river", "sky", "dawn", "dusk", "silence", "echo", "step", "gate", "hall",
    "roof", "beam", "stair", "pillar", "threshold", "lantern", "terrace",
];
const VERBS: &[&str] = &[
    "rises", "rests", "leans", "gathers", "holds", "shelters", "whispers", "turns", "waits",
    "climbs", "remembers", "opens",
];

const SAMPLE_RATE: u32 = 16_000;
const TONE_MS: u32 = 150;
const MAX_TONES: usize = 200;

#[derive(Debug, Default, Clone, Copy)]
pub struct MockBackend;

impl MockBackend {
    pub fn new() -> Self {
        MockBackend
    }
}

impl GenBackend for MockBackend {
    fn produce(&self, request: &GenRequest) -> Result<Payload, GenError> {
        request.validate()?;
        let digest: [u8; 32] = Sha256::digest(request.canonical_string().as_bytes()).into();
        match request.kind {
            GenKind::Text => Ok(mock_text(request, digest)),
            GenKind::Image | GenKind::ImageRestyle => mock_image(request, digest),
            GenKind::Speech => mock_speech(&request.prompt),
        }
    }
}

fn hex_prefix(digest: &[u8; 32]) -> String {
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// A short verse built from a neutral vocabulary; never names a style.
pub(crate) fn mock_verse(rng: &mut ChaCha8Rng) -> String {
    let lines = rng.gen_range(8..=12);
    let mut out = Vec::with_capacity(lines);
    for _ in 0..lines {
        let line = format!(
            "{} {} {} where {} {} {}",
            capitalize(ADJECTIVES.choose(rng).unwrap()),
            NOUNS.choose(rng).unwrap(),
            VERBS.choose(rng).unwrap(),
            ADJECTIVES.choose(rng).unwrap(),
            NOUNS.choose(rng).unwrap(),
            VERBS.choose(rng).unwrap(),
        );
        out.push(line);
    }
    out.join("\n")
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn mock_text(request: &GenRequest, digest: [u8; 32]) -> Payload {
    let mut rng = ChaCha8Rng::from_seed(digest);
    match request.params.get("format").map(String::as_str) {
        Some("json") => {
            let body = serde_json::json!({
                "request": hex_prefix(&digest),
                "text": format!(
                    "{} {} {}.",
                    capitalize(ADJECTIVES.choose(&mut rng).unwrap()),
                    NOUNS.choose(&mut rng).unwrap(),
                    VERBS.choose(&mut rng).unwrap()
                ),
            });
            Payload {
                media_type: "application/json".into(),
                bytes: body.to_string().into_bytes(),
            }
        }
        Some("descriptor") => {
            let mut words: Vec<&str> = ADJECTIVES.choose_multiple(&mut rng, 3).copied().collect();
            words.extend(NOUNS.choose_multiple(&mut rng, 2));
            Payload {
                media_type: "text/plain; charset=utf-8".into(),
                bytes: words.join(", ").into_bytes(),
            }
        }
        _ => Payload {
            media_type: "text/plain; charset=utf-8".into(),
            bytes: mock_verse(&mut rng).into_bytes(),
        },
    }
}

const IMAGE_SIDE: u32 = 128;
const IMAGE_CELL: u32 = 16;

/// 128x128 RGB placeholder: hash-tinted background with the first 64 digest
/// bits drawn as an 8x8 block pattern; the prompt and key are embedded as text chunks.
fn mock_image(request: &GenRequest, digest: [u8; 32]) -> Result<Payload, GenError> {
    let tint = [digest[8], digest[9], digest[10]];
    let mut pixels = Vec::with_capacity((IMAGE_SIDE * IMAGE_SIDE * 3) as usize);
    for y in 0..IMAGE_SIDE {
        for x in 0..IMAGE_SIDE {
            let bit = (y / IMAGE_CELL) * 8 + x / IMAGE_CELL;
            let on = digest[(bit / 8) as usize] >> (bit % 8) & 1 == 1;
            let border = x % IMAGE_CELL == 0 || y % IMAGE_CELL == 0;
            let rgb = if border {
                [255, 255, 255]
            } else if on {
                tint
            } else {
                [tint[0] / 4, tint[1] / 4, tint[2] / 4]
            };
            pixels.extend_from_slice(&rgb);
        }
    }

    let mut bytes = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut bytes, IMAGE_SIDE, IMAGE_SIDE);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let png_err = |e: png::EncodingError| GenError::Backend(e.to_string());
        encoder
            .add_itxt_chunk("Title".into(), request.prompt.clone())
            .map_err(png_err)?;
        encoder
            .add_text_chunk(
                "Comment".into(),
                format!("archiguesser mock {}", super::sha256_hex(request.canonical_string().as_bytes())),
            )
            .map_err(png_err)?;
        if let Some(base) = &request.base_asset {
            encoder
                .add_itxt_chunk("Source".into(), base.clone())
                .map_err(png_err)?;
        }
        let mut writer = encoder.write_header().map_err(png_err)?;
        writer.write_image_data(&pixels).map_err(png_err)?;
    }
    Ok(Payload {
        media_type: "image/png".into(),
        bytes,
    })
}

/// 16 kHz mono WAV: one 150 ms tone per word, pitch taken from the text hash.
fn mock_speech(text: &str) -> Result<Payload, GenError> {
    let digest: [u8; 32] = Sha256::digest(text.as_bytes()).into();
    let words = text.split_whitespace().count().clamp(1, MAX_TONES);
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: SAMPLE_RATE,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let samples_per_tone = SAMPLE_RATE * TONE_MS / 1000;
    let fade = samples_per_tone / 10;
    let mut cursor = Cursor::new(Vec::new());
    {
        let wav_err = |e: hound::Error| GenError::Backend(e.to_string());
        let mut writer = hound::WavWriter::new(&mut cursor, spec).map_err(wav_err)?;
        for i in 0..words {
            let freq = 220.0 + f64::from(digest[i % 32]) * 3.0;
            for n in 0..samples_per_tone {
                let t = f64::from(n) / f64::from(SAMPLE_RATE);
                let edge = n.min(samples_per_tone - 1 - n);
                let envelope = (f64::from(edge) / f64::from(fade)).min(1.0);
                let value = 0.3 * envelope * (2.0 * std::f64::consts::PI * freq * t).sin();
                writer
                    .write_sample((value * f64::from(i16::MAX)) as i16)
                    .map_err(wav_err)?;
            }
        }
        writer.finalize().map_err(wav_err)?;
    }
    Ok(Payload {
        media_type: "audio/wav".into(),
        bytes: cursor.into_inner(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_mocks_agree_byte_for_byte() {
        for kind in [GenKind::Text, GenKind::Image, GenKind::Speech] {
            let req = GenRequest::new(kind, "Building of Bauhaus architectural style");
            let a = MockBackend::new().produce(&req).unwrap();
            let b = MockBackend::new().produce(&req).unwrap();
            assert_eq!(a, b, "{kind}");
        }
    }

    #[test]
    fn speech_is_a_wav_with_one_tone_per_word() {
        let poem = (0..40).map(|i| format!("word{i}")).collect::<Vec<_>>().join(" ");
        let payload = MockBackend::new()
            .produce(&GenRequest::new(GenKind::Speech, poem))
            .unwrap();
        assert_eq!(payload.media_type, "audio/wav");
        assert_eq!(&payload.bytes[..4], b"RIFF");
        assert_eq!(&payload.bytes[8..12], b"WAVE");
        let reader = hound::WavReader::new(Cursor::new(&payload.bytes)).unwrap();
        assert_eq!(reader.spec().sample_rate, SAMPLE_RATE);
        assert_eq!(reader.spec().channels, 1);
        assert_eq!(reader.len(), 40 * SAMPLE_RATE * TONE_MS / 1000);
    }

    #[test]
    fn image_is_png_labelled_with_prompt() {
        let req = GenRequest::new(GenKind::ImageRestyle, "Reinterpret in Khmer architectural style")
            .with_base_asset("landmark-parthenon");
        let payload = MockBackend::new().produce(&req).unwrap();
        assert_eq!(payload.media_type, "image/png");
        let decoder = png::Decoder::new(Cursor::new(&payload.bytes));
        let reader = decoder.read_info().unwrap();
        let info = reader.info();
        assert_eq!((info.width, info.height), (IMAGE_SIDE, IMAGE_SIDE));
        let titles: Vec<String> = info
            .utf8_text
            .iter()
            .map(|c| c.get_text().unwrap())
            .collect();
        assert!(titles.contains(&req.prompt));
        assert!(titles.contains(&"landmark-parthenon".to_string()));
    }

    #[test]
    fn text_formats() {
        let verse = MockBackend::new()
            .produce(&GenRequest::new(GenKind::Text, "poem please"))
            .unwrap();
        let lines = std::str::from_utf8(&verse.bytes).unwrap().lines().count();
        assert!((8..=12).contains(&lines));

        let json = MockBackend::new()
            .produce(&GenRequest::new(GenKind::Text, "x").with_param("format", "json"))
            .unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json.bytes).unwrap();
        assert!(v["text"].is_string());

        let desc = MockBackend::new()
            .produce(&GenRequest::new(GenKind::Text, "x").with_param("format", "descriptor"))
            .unwrap();
        assert_eq!(std::str::from_utf8(&desc.bytes).unwrap().split(", ").count(), 5);
    }
}
