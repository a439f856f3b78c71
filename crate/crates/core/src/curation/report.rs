use std::collections::BTreeSet;
use std::fmt::Write;

use super::{ConsistencyTally, ControlCheck, CurateConfig};

/// Human-readable summary of a curation run. Contains no timestamps so that
/// identical runs produce identical reports.
#[derive(Debug, Clone, Default)]
pub struct CurationReport {
    pub regions: Vec<String>,
    pub repetitions: u32,
    pub keep: usize,
    pub region_gaps: Vec<(String, String)>,
    pub selected: Vec<ConsistencyTally>,
    pub skipped: Vec<(String, String)>,
    pub checks: Vec<ControlCheck>,
    pub dropped_landmarks: Vec<String>,
}

impl CurationReport {
    pub(super) fn new(config: &CurateConfig) -> Self {
        CurationReport {
            regions: config.regions.iter().map(|r| r.id.clone()).collect(),
            repetitions: config.repetitions,
            keep: config.keep,
            ..Default::default()
        }
    }

    /// Style ids with at least one failed control check; these need review.
    pub fn flagged_styles(&self) -> BTreeSet<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.style_id.clone())
            .collect()
    }

    pub fn needs_review(&self, style_id: &str) -> bool {
        self.checks
            .iter()
            .any(|c| c.style_id == style_id && !c.passed)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Curation report\n");
        let _ = writeln!(
            out,
            "- regions: {}\n- repetitions per region: {}\n- keep: {}\n- selected: {}\n- skipped: {}\n- flagged for review: {}\n",
            self.regions.join(", "),
            self.repetitions,
            self.keep,
            self.selected.len(),
            self.skipped.len(),
            self.flagged_styles().len()
        );

        if !self.region_gaps.is_empty() {
            let _ = writeln!(out, "## Region gaps\n");
            for (region, reason) in &self.region_gaps {
                let _ = writeln!(out, "- `{region}`: {reason}");
            }
            out.push('\n');
        }

        let _ = writeln!(out, "## Selected styles\n");
        let _ = writeln!(out, "| rank | style | mentions | regions |");
        let _ = writeln!(out, "|---:|---|---:|---|");
        for (i, t) in self.selected.iter().enumerate() {
            let regions: Vec<&str> = t.regions.iter().map(String::as_str).collect();
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                i + 1,
                t.display_name,
                t.count,
                regions.join(", ")
            );
        }
        out.push('\n');

        if !self.skipped.is_empty() {
            let _ = writeln!(out, "## Skipped\n");
            for (name, reason) in &self.skipped {
                let _ = writeln!(out, "- {name}: {reason}");
            }
            out.push('\n');
        }

        let flagged = self.flagged_styles();
        let _ = writeln!(out, "## Needs review\n");
        if flagged.is_empty() {
            let _ = writeln!(out, "All control checks passed.");
        }
        for style in &flagged {
            let _ = writeln!(out, "### `{style}` (needs_review: true)\n");
            for c in self.checks.iter().filter(|c| &c.style_id == style && !c.passed) {
                let _ = writeln!(
                    out,
                    "- {}\n  - expected: {}\n  - observed: {}",
                    c.question, c.expected, c.observed
                );
            }
            out.push('\n');
        }

        if !self.dropped_landmarks.is_empty() {
            let _ = writeln!(out, "\n## Dropped landmarks\n");
            for id in &self.dropped_landmarks {
                let _ = writeln!(out, "- `{id}`: native style was not curated");
            }
        }
        out
    }
}
