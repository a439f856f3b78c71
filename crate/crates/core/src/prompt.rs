//! Prompt families for the three game modes.

use crate::catalog::{Landmark, StyleRecord};
use crate::genai::{GenKind, GenRequest};
use crate::text::{canonical_joined, canonical_name};

/// Default number of poem generations before a round gives up.
pub const DEFAULT_POEM_ATTEMPTS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("landmark `{landmark}` already has style `{style}`; pick a different target")]
    SameStyle { landmark: String, style: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImagePromptVariant<'a> {
    /// `Building of <name> architectural style by <architect>`.
    Template,
    /// `Building, <descriptor>` with a descriptor written by the text model.
    Descriptor(&'a str),
}

pub fn build_image_prompt(style: &StyleRecord, variant: ImagePromptVariant<'_>) -> String {
    match variant {
        ImagePromptVariant::Template => match style.architects.first() {
            Some(architect) => format!(
                "Building of {} architectural style by {}",
                style.name, architect
            ),
            None => format!("Building of {} architectural style", style.name),
        },
        ImagePromptVariant::Descriptor(text) => format!("Building, {text}"),
    }
}

/// Text request asking for the nouns-and-adjectives summary used by
/// [`ImagePromptVariant::Descriptor`].
pub fn descriptor_request(style: &StyleRecord) -> GenRequest {
    GenRequest::new(
        GenKind::Text,
        format!(
            "Summarize the {} architectural style using only nouns and adjectives, \
             as a short comma-separated list.",
            style.name
        ),
    )
    .with_param("format", "descriptor")
}

pub fn build_sights_request(
    landmark: &Landmark,
    target_style: &StyleRecord,
) -> Result<GenRequest, PromptError> {
    if target_style.id == landmark.native_style_id {
        return Err(PromptError::SameStyle {
            landmark: landmark.id.clone(),
            style: target_style.id.clone(),
        });
    }
    Ok(GenRequest::new(
        GenKind::ImageRestyle,
        format!("Reinterpret in {} architectural style", target_style.name),
    )
    .with_base_asset(landmark.source_image.clone()))
}

/// Poem prompt that describes the style through its characteristics only.
pub fn build_poem_prompt(style: &StyleRecord, landmark: Option<&Landmark>) -> String {
    let mut prompt = format!(
        "Write a short poem of 8 to 12 lines about a building whose architecture shows \
         these features: {}.",
        style.characteristics.join("; ")
    );
    if let Some(landmark) = landmark {
        prompt.push_str(&format!(" Describe the landmark {}.", landmark.name));
    }
    prompt.push_str(
        " Do not mention the name of the architectural style or any of its alternative names.",
    );
    prompt
}

/// Text request for attempt `attempt` (1-based) of a poem; the attempt number is
/// part of the content address so a rejected poem is never served again from cache.
pub fn poem_request(style: &StyleRecord, landmark: Option<&Landmark>, attempt: u32) -> GenRequest {
    GenRequest::new(GenKind::Text, build_poem_prompt(style, landmark))
        .with_param("format", "verse")
        .with_param("attempt", attempt.to_string())
}

/// `false` when the poem gives the style away by name or alias.
///
/// Both the poem and each name are folded twice: punctuation as a word break
/// ("Art-Deco" ~ "art deco") and punctuation deleted ("Goth-ic" ~ "gothic").
pub fn validate_poem(poem: &str, style: &StyleRecord) -> bool {
    let spaced = canonical_name(poem);
    let joined = canonical_joined(poem);
    for name in std::iter::once(&style.name).chain(&style.aliases) {
        for needle in [canonical_name(name), canonical_joined(name)] {
            if needle.is_empty() {
                continue;
            }
            if spaced.contains(&needle) || joined.contains(&needle) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Catalog, GeoCoord, YearInterval};
    use proptest::prelude::*;

    fn style(name: &str, architects: &[&str], characteristics: &[&str]) -> StyleRecord {
        StyleRecord {
            id: crate::text::slug(name),
            name: name.into(),
            region_id: "europe".into(),
            period: YearInterval { start: 1140, end: 1520 },
            characteristics: characteristics.iter().map(|s| s.to_string()).collect(),
            architects: architects.iter().map(|s| s.to_string()).collect(),
            origin: GeoCoord { lat: 0.0, lon: 0.0 },
            summary: String::new(),
            aliases: vec![],
        }
    }

    #[test]
    fn template_prompts() {
        let bauhaus = style("Bauhaus", &["Walter Gropius"], &["flat roofs"]);
        assert_eq!(
            build_image_prompt(&bauhaus, ImagePromptVariant::Template),
            "Building of Bauhaus architectural style by Walter Gropius"
        );
        let brutalist = style("Brutalist", &[], &["concrete"]);
        assert_eq!(
            build_image_prompt(&brutalist, ImagePromptVariant::Template),
            "Building of Brutalist architectural style"
        );
        assert_eq!(
            build_image_prompt(
                &brutalist,
                ImagePromptVariant::Descriptor("geometric, glass, functional")
            ),
            "Building, geometric, glass, functional"
        );
    }

    #[test]
    fn sights_requests() {
        let catalog = Catalog::builtin();
        let castle = catalog.landmark_by_id("neuschwanstein").unwrap();
        let chinese = catalog.style_by_id("chinese-imperial").unwrap();
        let req = build_sights_request(castle, chinese).unwrap();
        assert_eq!(req.kind, GenKind::ImageRestyle);
        assert_eq!(req.base_asset.as_deref(), Some(castle.source_image.as_str()));
        assert_eq!(req.prompt, "Reinterpret in Chinese Imperial architectural style");
        assert!(req.validate().is_ok());

        let native = catalog.style_by_id(&castle.native_style_id).unwrap();
        assert!(matches!(
            build_sights_request(castle, native),
            Err(PromptError::SameStyle { .. })
        ));
    }

    #[test]
    fn poem_prompt_hides_name() {
        let gothic = style(
            "Gothic",
            &[],
            &["pointed arches", "ribbed vaults", "flying buttresses"],
        );
        let prompt = build_poem_prompt(&gothic, None);
        assert!(prompt.contains("pointed arches"));
        assert!(prompt.contains("Do not mention the name"));
        assert!(validate_poem(&prompt, &gothic), "{prompt}");

        let catalog = Catalog::builtin();
        let notre_dame = catalog.landmark_by_id("notre-dame-de-paris").unwrap();
        assert!(build_poem_prompt(&gothic, Some(notre_dame)).contains("Notre-Dame de Paris"));

        let single = style("Gothic", &[], &["pointed arches"]);
        assert!(build_poem_prompt(&single, None).contains("pointed arches."));
    }

    #[test]
    fn poem_validation() {
        let gothic = style("Gothic", &[], &["pointed arches"]);
        assert!(!validate_poem("a gothic night", &gothic));
        assert!(!validate_poem("the Goth-ic spire", &gothic));
        assert!(validate_poem("stone rises into light", &gothic));

        let mut deco = style("Art Deco", &[], &["chevrons"]);
        assert!(!validate_poem("an art-deco lobby", &deco));
        assert!(!validate_poem("ART   DECO", &deco));
        assert!(validate_poem("an artful decoration", &deco));
        deco.aliases.push("Streamline".into());
        assert!(!validate_poem("streamline curves", &deco));
    }

    #[test]
    fn builtin_prompts_never_leak_names() {
        for s in Catalog::builtin().styles() {
            let prompt = build_poem_prompt(s, None);
            assert!(validate_poem(&prompt, s), "{}: {prompt}", s.name);
        }
    }

    proptest! {
        #[test]
        fn template_starts_and_names_once(name in "[A-Z][a-z]{3,12}", architect in "[A-Z][a-z]{2,8} [A-Z][a-z]{2,10}") {
            prop_assume!(!architect.contains(&name));
            let s = style(&name, &[architect.as_str()], &["x"]);
            let prompt = build_image_prompt(&s, ImagePromptVariant::Template);
            prop_assert!(prompt.starts_with("Building of "));
            prop_assert_eq!(prompt.matches(name.as_str()).count(), 1);
        }

        #[test]
        fn name_substring_always_rejected(prefix in "[ -~]{0,20}", suffix in "[ -~]{0,20}", name in "[A-Za-z][A-Za-z -]{1,15}") {
            let s = style(&name, &[], &["x"]);
            prop_assume!(!canonical_name(&name).is_empty());
            let poem = format!("{prefix}{name}{suffix}");
            if canonical_name(&poem).contains(&canonical_name(&name)) {
                prop_assert!(!validate_poem(&poem, &s));
            }
        }
    }
}
