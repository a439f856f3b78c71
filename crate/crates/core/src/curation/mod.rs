//! Catalog curation from repeated text-model queries.
//!
//! The pipeline asks for the top styles of each region several times, keeps
//! the names that recur most often across repetitions, asks for a JSON summary
//! of each survivor, and re-asks control questions to flag summaries for
//! human review. Flags never modify a record.

mod fixture;
mod report;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calendar::century;
use crate::catalog::{
    Catalog, CatalogError, CatalogFile, GeoCoord, Landmark, Region, StyleRecord, TokenBinding,
    YearInterval, CATALOG_VERSION, FIRST_TOKEN_MARKER_ID,
};
use crate::genai::{ClientError, TextClient};
use crate::text::{canonical_name, slug};

pub use fixture::FixtureTextClient;
pub use report::CurationReport;

pub const DEFAULT_REPETITIONS: u32 = 10;
pub const DEFAULT_KEEP: usize = 30;
pub const DEFAULT_CLIENT_RETRIES: u32 = 2;
pub const SUMMARY_ATTEMPTS: u32 = 3;
const STYLES_PER_REGION: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum CurationError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("text client failed for region `{region}`, repetition {repetition}: {source}")]
    Client {
        region: String,
        repetition: u32,
        #[source]
        source: ClientError,
    },
    #[error("summary for `{style}` failed after {attempts} attempts: {last_error}")]
    Summary {
        style: String,
        attempts: u32,
        last_error: String,
    },
    #[error("no styles survived curation")]
    NothingCurated,
    #[error("invalid curation config: {0}")]
    Config(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One verbatim answer to the per-region listing prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawListingRun {
    pub region_id: String,
    pub repetition_index: u32,
    pub style_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyTally {
    pub canonical_name: String,
    pub display_name: String,
    pub count: u32,
    pub regions: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlCheck {
    pub style_id: String,
    pub question: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

pub fn listing_prompt(region: &Region) -> String {
    format!(
        "List the top {STYLES_PER_REGION} architectural styles of the socio-cultural region \
         \"{}\". Answer with one style name per line and nothing else.",
        region.display_name
    )
}

/// Splits a listing answer into names, dropping list markers such as `1.` or `-`.
pub fn parse_listing(answer: &str) -> Vec<String> {
    answer
        .lines()
        .map(strip_list_marker)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn strip_list_marker(line: &str) -> &str {
    let line = line.trim();
    let digits = line.trim_start_matches(|c: char| c.is_ascii_digit());
    let line = if digits.len() < line.len() {
        match digits.strip_prefix(['.', ')']) {
            Some(rest) => rest,
            None => line,
        }
    } else {
        line
    };
    line.trim_start_matches(['-', '*', '\u{2022}'])
        .trim()
}

pub fn collect_listings(
    client: &dyn TextClient,
    regions: &[Region],
    repetitions: u32,
    retries: u32,
) -> Result<Vec<RawListingRun>, CurationError> {
    if repetitions == 0 {
        return Err(CurationError::Precondition(
            "repetitions must be at least 1".into(),
        ));
    }
    let mut runs = Vec::with_capacity(regions.len() * repetitions as usize);
    for region in regions {
        let prompt = listing_prompt(region);
        for repetition in 0..repetitions {
            let answer = with_retries(retries, || client.complete(&prompt)).map_err(|source| {
                CurationError::Client {
                    region: region.id.clone(),
                    repetition,
                    source,
                }
            })?;
            runs.push(RawListingRun {
                region_id: region.id.clone(),
                repetition_index: repetition,
                style_names: parse_listing(&answer),
            });
        }
    }
    Ok(runs)
}

fn with_retries<T>(
    retries: u32,
    mut call: impl FnMut() -> Result<T, ClientError>,
) -> Result<T, ClientError> {
    let mut attempt = 0;
    loop {
        match call() {
            Ok(v) => return Ok(v),
            Err(e) if attempt < retries => {
                tracing::debug!(attempt, error = %e, "text client call failed, retrying");
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Ranks canonical style names by how many runs mention them and keeps `keep`.
///
/// A name counts at most once per run. The display name is the most frequent
/// raw spelling, ties going to the lexicographically smallest.
pub fn select_consistent(runs: &[RawListingRun], keep: usize) -> Vec<ConsistencyTally> {
    struct Acc {
        count: u32,
        regions: BTreeSet<String>,
        spellings: BTreeMap<String, u32>,
    }

    let mut tallies: HashMap<String, Acc> = HashMap::new();
    for run in runs {
        let mut seen = BTreeSet::new();
        for raw in &run.style_names {
            let raw = raw.trim();
            let canonical = canonical_name(raw);
            if canonical.is_empty() || !seen.insert(canonical.clone()) {
                continue;
            }
            let acc = tallies.entry(canonical).or_insert_with(|| Acc {
                count: 0,
                regions: BTreeSet::new(),
                spellings: BTreeMap::new(),
            });
            acc.count += 1;
            acc.regions.insert(run.region_id.clone());
            *acc.spellings.entry(raw.to_string()).or_default() += 1;
        }
    }

    let mut out: Vec<ConsistencyTally> = tallies
        .into_iter()
        .map(|(canonical_name, acc)| {
            // BTreeMap iterates in lexicographic order, so max_by keeps the first maximum
            // only if we compare counts and break ties towards the smaller string.
            let display_name = acc
                .spellings
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
                .map(|(s, _)| s.clone())
                .unwrap_or_default();
            ConsistencyTally {
                canonical_name,
                display_name,
                count: acc.count,
                regions: acc.regions,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.canonical_name.cmp(&b.canonical_name))
    });
    out.truncate(keep);
    out
}

/// JSON shape requested from the text model for one style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleSummary {
    pub name: String,
    pub period: YearInterval,
    pub characteristics: Vec<String>,
    #[serde(default)]
    pub architects: Vec<String>,
    pub origin: GeoCoord,
    pub summary: String,
}

pub const SUMMARY_SCHEMA: &str = r#"{"name": string, "period": {"start": integer year (negative for BCE, never 0), "end": integer year}, "characteristics": [1 to 10 short strings], "architects": [0 to 10 names], "origin": {"lat": degrees, "lon": degrees}, "summary": one sentence}"#;

pub fn summary_prompt(style_name: &str, region: &Region, previous_error: Option<&str>) -> String {
    let mut prompt = format!(
        "Give a concise JSON summary of the \"{style_name}\" architectural style from the \
         region \"{}\", covering its time period, characteristics and notable architects. \
         Reply with a single JSON object matching this schema: {SUMMARY_SCHEMA}",
        region.display_name
    );
    if let Some(err) = previous_error {
        prompt.push_str(&format!(
            " Your previous answer was rejected ({err}). Reply again with JSON that matches \
             the schema exactly."
        ));
    }
    prompt
}

fn extract_json_object(answer: &str) -> Option<&str> {
    let start = answer.find('{')?;
    let end = answer.rfind('}')?;
    (end > start).then(|| &answer[start..=end])
}

fn parse_summary(answer: &str, region: &Region) -> Result<StyleRecord, String> {
    let json = extract_json_object(answer).ok_or("no JSON object in answer")?;
    let summary: StyleSummary =
        serde_json::from_str(json).map_err(|e| format!("malformed JSON: {e}"))?;
    let id = slug(&summary.name);
    let record = StyleRecord {
        id,
        name: summary.name.trim().to_string(),
        region_id: region.id.clone(),
        period: summary.period,
        characteristics: summary.characteristics,
        architects: summary.architects,
        origin: summary.origin.normalized(),
        summary: summary.summary,
        aliases: vec![],
    };
    record.validate()?;
    Ok(record)
}

/// Asks for a JSON summary, retrying with the schema and the rejection reason
/// until [`SUMMARY_ATTEMPTS`] answers have been tried.
pub fn summarize_style(
    client: &dyn TextClient,
    tally: &ConsistencyTally,
    region: &Region,
) -> Result<StyleRecord, CurationError> {
    let mut last_error: Option<String> = None;
    for _ in 0..SUMMARY_ATTEMPTS {
        let prompt = summary_prompt(&tally.display_name, region, last_error.as_deref());
        let outcome = client
            .complete(&prompt)
            .map_err(|e| format!("client error: {e}"))
            .and_then(|answer| parse_summary(&answer, region));
        match outcome {
            Ok(record) => return Ok(record),
            Err(e) => last_error = Some(e),
        }
    }
    Err(CurationError::Summary {
        style: tally.display_name.clone(),
        attempts: SUMMARY_ATTEMPTS,
        last_error: last_error.unwrap_or_default(),
    })
}

pub fn century_question(style_name: &str) -> String {
    format!(
        "In which century did the \"{style_name}\" architectural style begin? Answer with the \
         century number only, negative for BCE."
    )
}

pub fn region_question(style_name: &str) -> String {
    format!(
        "Which socio-cultural region does the \"{style_name}\" architectural style come from? \
         Answer with the region name only."
    )
}

pub fn architect_question(architect: &str) -> String {
    format!(
        "Which architectural style is the architect \"{architect}\" most associated with? \
         Answer with the style name only."
    )
}

/// Reads a century such as `12`, `12th century` or `5th century BCE`.
pub fn parse_century(answer: &str) -> Option<i32> {
    let lower = answer.to_lowercase();
    let start = lower.find(|c: char| c.is_ascii_digit())?;
    let negative_sign = lower[..start].trim_end().ends_with('-');
    let digits: String = lower[start..]
        .chars()
        .take_while(char::is_ascii_digit)
        .collect();
    let value: i32 = digits.parse().ok()?;
    let bce = negative_sign || lower.contains("bce") || lower.contains(" bc");
    Some(if bce { -value } else { value })
}

const CLIENT_ERROR_OBSERVED: &str = "<client-error>";

pub fn run_control_checks(
    client: &dyn TextClient,
    record: &StyleRecord,
    region: &Region,
) -> Vec<ControlCheck> {
    let mut checks = Vec::with_capacity(3);

    let question = century_question(&record.name);
    let expected = century(record.period.start);
    let (observed, passed) = match client.complete(&question) {
        Ok(answer) => {
            let passed = parse_century(&answer) == Some(expected);
            (answer.trim().to_string(), passed)
        }
        Err(_) => (CLIENT_ERROR_OBSERVED.to_string(), false),
    };
    checks.push(ControlCheck {
        style_id: record.id.clone(),
        question,
        expected: expected.to_string(),
        observed,
        passed,
    });

    let question = region_question(&record.name);
    let (observed, passed) = match client.complete(&question) {
        Ok(answer) => {
            let got = canonical_name(&answer);
            let passed =
                got == canonical_name(&region.display_name) || got == canonical_name(&region.id);
            (answer.trim().to_string(), passed)
        }
        Err(_) => (CLIENT_ERROR_OBSERVED.to_string(), false),
    };
    checks.push(ControlCheck {
        style_id: record.id.clone(),
        question,
        expected: region.display_name.clone(),
        observed,
        passed,
    });

    if let Some(architect) = record.architects.first() {
        let question = architect_question(architect);
        let (observed, passed) = match client.complete(&question) {
            Ok(answer) => {
                let passed = canonical_name(&answer) == canonical_name(&record.name);
                (answer.trim().to_string(), passed)
            }
            Err(_) => (CLIENT_ERROR_OBSERVED.to_string(), false),
        };
        checks.push(ControlCheck {
            style_id: record.id.clone(),
            question,
            expected: record.name.clone(),
            observed,
            passed,
        });
    }
    checks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClientChoice {
    #[default]
    Mock,
    Live,
}

/// Landmark declared in the curation config; its native style is given by
/// name and resolved against the curated styles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSeed {
    pub id: String,
    pub name: String,
    pub coord: GeoCoord,
    pub native_style: String,
    pub source_image: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurateConfig {
    pub regions: Vec<Region>,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default = "default_keep")]
    pub keep: usize,
    #[serde(default)]
    pub client: ClientChoice,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default)]
    pub landmarks: Vec<LandmarkSeed>,
}

fn default_repetitions() -> u32 {
    DEFAULT_REPETITIONS
}

fn default_keep() -> usize {
    DEFAULT_KEEP
}

fn default_retries() -> u32 {
    DEFAULT_CLIENT_RETRIES
}

impl CurateConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CurationError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CurationError::Config(e.to_string()))
    }

    /// Text client named by `client`. Only the fixture-backed mock ships with the crate.
    pub fn make_client(&self) -> Result<Box<dyn TextClient>, CurationError> {
        match self.client {
            ClientChoice::Mock => Ok(Box::new(FixtureTextClient::new(
                Catalog::builtin(),
                self.seed,
            ))),
            ClientChoice::Live => Err(CurationError::Config(
                "no live text client is registered; use client \"mock\" or embed a TextClient"
                    .into(),
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CurationOutput {
    pub catalog: Catalog,
    pub report: CurationReport,
}

/// Runs listing, selection, summarization and control checks and assembles a catalog.
///
/// A region whose listing fails is recorded as a gap; a style whose summary
/// fails is skipped. Only an empty result is fatal.
pub fn curate(
    config: &CurateConfig,
    client: &dyn TextClient,
) -> Result<CurationOutput, CurationError> {
    if config.regions.is_empty() {
        return Err(CurationError::Precondition("no regions configured".into()));
    }
    if config.repetitions == 0 {
        return Err(CurationError::Precondition(
            "repetitions must be at least 1".into(),
        ));
    }
    if config.keep == 0 {
        return Err(CurationError::Precondition("keep must be at least 1".into()));
    }

    // one worker per region; results are reassembled in config order
    let per_region: Vec<Result<Vec<RawListingRun>, CurationError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .regions
            .iter()
            .map(|region| {
                scope.spawn(move || {
                    collect_listings(
                        client,
                        std::slice::from_ref(region),
                        config.repetitions,
                        config.retries,
                    )
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("listing worker panicked"))
            .collect()
    });

    let mut report = CurationReport::new(config);
    let mut runs = Vec::new();
    for (region, result) in config.regions.iter().zip(per_region) {
        match result {
            Ok(r) => runs.extend(r),
            Err(e) => {
                tracing::warn!(region = %region.id, error = %e, "region listing failed");
                report.region_gaps.push((region.id.clone(), e.to_string()));
            }
        }
    }

    let tallies = select_consistent(&runs, config.keep);
    report.selected = tallies.clone();
    let regions_by_id: HashMap<&str, &Region> =
        config.regions.iter().map(|r| (r.id.as_str(), r)).collect();

    let mut styles: Vec<StyleRecord> = Vec::new();
    for tally in &tallies {
        let region_id = primary_region(&runs, &tally.canonical_name);
        let region = regions_by_id[region_id.as_str()];
        match summarize_style(client, tally, region) {
            Ok(record) => {
                if styles.iter().any(|s| s.id == record.id) {
                    report
                        .skipped
                        .push((tally.display_name.clone(), format!("duplicate id `{}`", record.id)));
                    continue;
                }
                let checks = run_control_checks(client, &record, region);
                report.checks.extend(checks);
                styles.push(record);
            }
            Err(e) => {
                tracing::warn!(style = %tally.display_name, error = %e, "summary skipped");
                report.skipped.push((tally.display_name.clone(), e.to_string()));
            }
        }
    }
    if styles.is_empty() {
        return Err(CurationError::NothingCurated);
    }

    let mut landmarks = Vec::new();
    for seed in &config.landmarks {
        let wanted = canonical_name(&seed.native_style);
        match styles.iter().find(|s| canonical_name(&s.name) == wanted) {
            Some(style) => landmarks.push(Landmark {
                id: seed.id.clone(),
                name: seed.name.clone(),
                coord: seed.coord.normalized(),
                native_style_id: style.id.clone(),
                source_image: seed.source_image.clone(),
            }),
            None => report.dropped_landmarks.push(seed.id.clone()),
        }
    }

    let used_regions: BTreeSet<&str> = styles.iter().map(|s| s.region_id.as_str()).collect();
    let regions = config
        .regions
        .iter()
        .filter(|r| used_regions.contains(r.id.as_str()))
        .cloned()
        .collect();
    let tokens = styles
        .iter()
        .enumerate()
        .map(|(i, s)| TokenBinding {
            marker_id: FIRST_TOKEN_MARKER_ID + i as u32,
            style_id: s.id.clone(),
        })
        .collect();
    let catalog = Catalog::new(CatalogFile {
        version: CATALOG_VERSION.to_string(),
        regions,
        styles,
        landmarks,
        tokens,
    })?;
    Ok(CurationOutput { catalog, report })
}

/// Region that listed the name most often; ties go to the smaller id.
fn primary_region(runs: &[RawListingRun], canonical: &str) -> String {
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for run in runs {
        if run
            .style_names
            .iter()
            .any(|n| canonical_name(n) == canonical)
        {
            *counts.entry(run.region_id.as_str()).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(r, _)| r.to_string())
        .expect("selected names come from at least one run")
}

/// Runs [`curate`] and writes the catalog JSON and the markdown report.
pub fn curate_to_files(
    config: &CurateConfig,
    client: &dyn TextClient,
    catalog_path: impl AsRef<Path>,
    report_path: impl AsRef<Path>,
) -> Result<CurationOutput, CurationError> {
    let output = curate(config, client)?;
    output.catalog.save(catalog_path)?;
    std::fs::write(report_path, output.report.to_markdown())?;
    Ok(output)
}
