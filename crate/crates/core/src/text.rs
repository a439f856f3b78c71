//! Name canonicalization shared by consistency selection and poem validation.

use unicode_normalization::UnicodeNormalization;

/// NFC, lowercase, every non-alphanumeric character replaced by a space,
/// whitespace runs collapsed to one space and trimmed.
///
/// Diacritics are kept: "Café" and "Cafe" stay distinct.
pub fn canonical_name(raw: &str) -> String {
    fold(raw, ' ')
}

/// Like [`canonical_name`] but punctuation is deleted instead of becoming a
/// word break, so "Goth-ic" folds to "gothic".
pub fn canonical_joined(raw: &str) -> String {
    fold(raw, '\0')
}

fn fold(raw: &str, punct: char) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.nfc().flat_map(char::to_lowercase) {
        let c = if c.is_alphanumeric() || c.is_whitespace() {
            c
        } else {
            punct
        };
        if c == '\0' {
            continue;
        }
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.push(c);
    }
    out
}

/// Catalog id derived from a name: canonical form with spaces as hyphens,
/// non-ASCII letters dropped.
pub fn slug(raw: &str) -> String {
    let canonical = canonical_name(raw);
    let mut out = String::with_capacity(canonical.len());
    for c in canonical.chars() {
        if c == ' ' {
            if !out.ends_with('-') && !out.is_empty() {
                out.push('-');
            }
        } else if c.is_ascii_alphanumeric() {
            out.push(c);
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_case_punctuation_whitespace() {
        assert_eq!(canonical_name("Art-Deco"), "art deco");
        assert_eq!(canonical_name("  art   deco "), "art deco");
        assert_eq!(canonical_name("Sudano–Sahelian!"), "sudano sahelian");
        assert_eq!(canonical_name("GOTHIC."), "gothic");
    }

    #[test]
    fn keeps_diacritics_but_normalizes_composition() {
        // precomposed vs combining acute accent
        assert_eq!(canonical_name("Caf\u{e9}"), canonical_name("Cafe\u{301}"));
        assert_ne!(canonical_name("Café"), canonical_name("Cafe"));
    }

    #[test]
    fn joined_form_closes_punctuation_gaps() {
        assert_eq!(canonical_joined("Goth-ic"), "gothic");
        assert_eq!(canonical_joined("in carved"), "in carved");
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Art Deco"), "art-deco");
        assert_eq!(slug("Sudano-Sahelian"), "sudano-sahelian");
        assert_eq!(slug("Ernő's style"), "ern-s-style");
    }
}
