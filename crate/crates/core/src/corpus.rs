//! Corpus construction: exclusion filtering, author-name disambiguation,
//! institution/country normalization, descriptive statistics and the
//! period timeline.
//!
//! The corpus is built once (single-owner phase) and is immutable
//! afterwards; all analysis passes read it through shared references.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::diag::Diagnostic;
use crate::tables::NormalizationTables;
use crate::wos::Publication;
use crate::{Error, Result};

/// Canonical author identifier: the normalized name key the variants
/// merged into (e.g. `"cumming, DJ"`).
pub type CanonicalAuthorId = String;

/// Inclusion filter for the analysis corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// Minimum citation count, inclusive: a publication is retained when
    /// `times_cited >= min_citations`.
    pub min_citations: u32,
    /// Drop publications whose byline is empty.
    pub exclude_anonymous: bool,
    /// Optional inclusive year window; publications without a year fail a
    /// present window.
    pub year_range: Option<(i32, i32)>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_citations: 100,
            exclude_anonymous: true,
            year_range: None,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some((from, to)) = self.year_range {
            if from > to {
                return Err(Error::InvalidConfig(format!(
                    "year range {from}..={to} is empty (from > to)"
                )));
            }
        }
        Ok(())
    }
}

/// One disambiguated author: the canonical key, a display form, and every
/// raw variant that maps to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalAuthor {
    pub id: CanonicalAuthorId,
    /// Longest raw variant (ties broken lexicographically) — typically the
    /// full name when one was exported.
    pub display_name: String,
    pub variants: Vec<String>,
}

/// The filtered analysis corpus with its normalization maps.
///
/// Invariants: every publication satisfies `filter_config`; every raw
/// author string appearing anywhere in a retained publication has an entry
/// in `canonical_authors`; all three canonical maps are idempotent (each
/// map value is itself a key mapping to itself).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub publications: Vec<Publication>,
    /// Raw author string → canonical author id.
    pub canonical_authors: BTreeMap<String, CanonicalAuthorId>,
    /// Raw institution text → canonical institution.
    pub institutions: BTreeMap<String, String>,
    /// Raw country text → canonical country.
    pub countries: BTreeMap<String, String>,
    pub filter_config: FilterConfig,
}

impl Corpus {
    /// Canonical id for a raw author string (normalizing on the fly for
    /// strings never seen at construction).
    pub fn canonical_author(&self, raw: &str) -> CanonicalAuthorId {
        self.canonical_authors
            .get(raw)
            .cloned()
            .unwrap_or_else(|| normalize_author_name(raw))
    }

    pub fn canonical_institution(&self, raw: &str) -> String {
        self.institutions
            .get(raw)
            .cloned()
            .unwrap_or_else(|| normalize_institution(raw, NormalizationTables::builtin()))
    }

    pub fn canonical_country(&self, raw: &str) -> String {
        self.countries.get(raw).cloned().unwrap_or_else(|| {
            let mut sink = Vec::new();
            extract_country(raw, NormalizationTables::builtin(), &mut sink)
        })
    }

    /// Canonical byline: the publication's authors in byline order, mapped
    /// to canonical ids, first occurrence kept when variants collapse.
    pub fn canonical_byline(&self, publication: &Publication) -> Vec<CanonicalAuthorId> {
        let mut seen = BTreeSet::new();
        let mut byline = Vec::new();
        for raw in &publication.authors {
            let id = self.canonical_author(raw);
            if seen.insert(id.clone()) {
                byline.push(id);
            }
        }
        byline
    }

    /// Rewrite the author map through a disambiguation result (raw →
    /// canonical id), preserving the idempotence invariant.
    pub fn apply_author_map(&mut self, map: &BTreeMap<String, CanonicalAuthorId>) {
        for value in self.canonical_authors.values_mut() {
            if let Some(canonical) = map.get(value.as_str()) {
                *value = canonical.clone();
            }
        }
        let canonicals: Vec<String> = self.canonical_authors.values().cloned().collect();
        for c in canonicals {
            self.canonical_authors.entry(c.clone()).or_insert(c);
        }
    }
}

/// Diacritic folding: NFD decomposition with combining marks removed
/// (`"José"` → `"Jose"`).
pub fn fold_diacritics(s: &str) -> String {
    s.nfd().filter(|c| !is_combining_mark(*c)).collect()
}

fn clean_name_part(s: &str) -> String {
    let mut out = String::new();
    let mut pending_space = false;
    for c in fold_diacritics(s).chars() {
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(c.to_lowercase());
        } else if c.is_whitespace() {
            pending_space = true;
        }
        // punctuation: dropped entirely ("O'Brien" → "obrien")
    }
    out
}

/// Normalize a raw author name to its matching key: last name lowercased
/// with punctuation and diacritics stripped, `", "`, then uppercase
/// initials. An all-uppercase given-name token of up to three letters is
/// taken whole as an initials block (`"DJ"` → `DJ`); other tokens
/// contribute their first letter; hyphenated given names contribute one
/// letter per part. A name without a comma normalizes to the cleaned last
/// name alone.
pub fn normalize_author_name(raw: &str) -> String {
    let raw = raw.trim();
    let Some((last, given)) = raw.split_once(',') else {
        return clean_name_part(raw);
    };
    let last = clean_name_part(last);
    let mut initials = String::new();
    for token in given.split(|c: char| c.is_whitespace() || c == '-') {
        let token = fold_diacritics(token);
        let cleaned: String = token.chars().filter(|c| c.is_alphanumeric()).collect();
        if cleaned.is_empty() {
            continue;
        }
        let is_initials_block = cleaned.chars().count() <= 3
            && cleaned
                .chars()
                .all(|c| c.is_uppercase() || c.is_ascii_digit());
        if is_initials_block {
            initials.push_str(&cleaned);
        } else if let Some(first) = cleaned.chars().next() {
            initials.extend(first.to_uppercase());
        }
    }
    if initials.is_empty() {
        last
    } else {
        format!("{last}, {initials}")
    }
}

/// Canonicalize a raw country value: trim (including a trailing period),
/// apply the normalization table, collapse `<STATE> <ZIP> USA` tails to
/// `USA`; unknown values pass through unchanged with a diagnostic. Total
/// and idempotent.
pub fn extract_country(
    raw: &str,
    tables: &NormalizationTables,
    diags: &mut Vec<Diagnostic>,
) -> String {
    let trimmed = raw.trim().trim_end_matches('.').trim();
    if trimmed.is_empty() {
        return String::new();
    }
    if let Some(canonical) = tables.countries.get(trimmed) {
        return canonical.clone();
    }
    if trimmed == "USA" || trimmed.ends_with(" USA") {
        return "USA".to_string();
    }
    diags.push(Diagnostic::warning(
        "corpus/country",
        format!("unrecognized country value {trimmed:?}; passed through unchanged"),
    ));
    trimmed.to_string()
}

/// Canonicalize an institution name: alias lookup on the raw text,
/// otherwise lowercase + strip punctuation/diacritics, expand abbreviated
/// tokens (`univ` → `university`), then try the alias table once more on
/// the expanded form. Idempotent.
pub fn normalize_institution(raw: &str, tables: &NormalizationTables) -> String {
    let trimmed = raw.trim();
    if let Some(alias) = tables.institution_aliases.get(trimmed) {
        return alias.clone();
    }
    let cleaned = clean_name_part(trimmed);
    let expanded: Vec<String> = cleaned
        .split_whitespace()
        .map(|token| {
            tables
                .institution_abbrev
                .get(token)
                .cloned()
                .unwrap_or_else(|| token.to_string())
        })
        .collect();
    let expanded = expanded.join(" ");
    if let Some(alias) = tables.institution_aliases.get(&expanded) {
        return alias.clone();
    }
    expanded
}

/// Apply the exclusion criteria and build the corpus with its normalization
/// maps seeded from every raw author/institution/country string in the
/// retained publications. Uses the built-in normalization tables.
pub fn apply_exclusions(
    pubs: Vec<Publication>,
    cfg: &FilterConfig,
) -> Result<(Corpus, Vec<Diagnostic>)> {
    apply_exclusions_with_tables(pubs, cfg, NormalizationTables::builtin())
}

/// [`apply_exclusions`] with caller-supplied normalization tables.
pub fn apply_exclusions_with_tables(
    pubs: Vec<Publication>,
    cfg: &FilterConfig,
    tables: &NormalizationTables,
) -> Result<(Corpus, Vec<Diagnostic>)> {
    cfg.validate()?;
    let mut diags = Vec::new();
    let total = pubs.len();
    let mut below_threshold = 0usize;
    let mut anonymous = 0usize;
    let mut outside_years = 0usize;

    let kept: Vec<Publication> = pubs
        .into_iter()
        .filter(|p| {
            if p.times_cited < cfg.min_citations {
                below_threshold += 1;
                return false;
            }
            if cfg.exclude_anonymous && p.authors.is_empty() {
                anonymous += 1;
                return false;
            }
            if let Some((from, to)) = cfg.year_range {
                if !matches!(p.year, Some(y) if y >= from && y <= to) {
                    outside_years += 1;
                    return false;
                }
            }
            true
        })
        .collect();

    if below_threshold > 0 {
        diags.push(Diagnostic::info(
            "corpus/filter",
            format!(
                "excluded {below_threshold} of {total} publications below the citation threshold ({})",
                cfg.min_citations
            ),
        ));
    }
    if anonymous > 0 {
        diags.push(Diagnostic::info(
            "corpus/filter",
            format!("excluded {anonymous} anonymous publication(s)"),
        ));
    }
    if outside_years > 0 {
        diags.push(Diagnostic::info(
            "corpus/filter",
            format!("excluded {outside_years} publication(s) outside the year range"),
        ));
    }
    if kept.is_empty() {
        diags.push(Diagnostic::warning(
            "corpus/filter",
            "empty corpus: no publication passes the active filter",
        ));
    }

    let mut canonical_authors: BTreeMap<String, String> = BTreeMap::new();
    let mut institutions: BTreeMap<String, String> = BTreeMap::new();
    let mut countries: BTreeMap<String, String> = BTreeMap::new();

    for p in &kept {
        let author_strings = p
            .authors
            .iter()
            .chain(p.full_names.iter())
            .chain(p.addresses.iter().flat_map(|a| a.linked_authors.iter()))
            .chain(p.reprint_entries.iter().map(|r| &r.author));
        for raw in author_strings {
            if !canonical_authors.contains_key(raw) {
                canonical_authors.insert(raw.clone(), normalize_author_name(raw));
            }
        }
        let institution_strings = p
            .addresses
            .iter()
            .map(|a| &a.institution_raw)
            .chain(p.reprint_entries.iter().map(|r| &r.institution_raw));
        for raw in institution_strings {
            if !institutions.contains_key(raw) {
                institutions.insert(raw.clone(), normalize_institution(raw, tables));
            }
        }
        let country_strings = p
            .addresses
            .iter()
            .map(|a| &a.country_raw)
            .chain(p.reprint_entries.iter().map(|r| &r.country_raw));
        for raw in country_strings {
            if !countries.contains_key(raw) {
                let canonical = extract_country(raw, tables, &mut diags);
                countries.insert(raw.clone(), canonical);
            }
        }
    }

    // Idempotence rows: every canonical value maps to itself.
    for map in [&mut canonical_authors, &mut institutions, &mut countries] {
        let values: Vec<String> = map.values().cloned().collect();
        for v in values {
            map.entry(v.clone()).or_insert(v);
        }
    }

    Ok((
        Corpus {
            publications: kept,
            canonical_authors,
            institutions,
            countries,
            filter_config: cfg.clone(),
        },
        diags,
    ))
}

fn key_last_name(key: &str) -> &str {
    key.split(", ").next().unwrap_or(key)
}

fn key_initials(key: &str) -> &str {
    key.split_once(", ").map(|(_, i)| i).unwrap_or("")
}

/// Resolve a key through the parent map with cycle detection.
fn resolve_key(parent: &BTreeMap<String, String>, start: &str) -> Result<String> {
    let mut current = start.to_string();
    let mut hops = 0usize;
    loop {
        match parent.get(&current) {
            Some(next) if *next != current => {
                current = next.clone();
                hops += 1;
                if hops > parent.len() {
                    return Err(Error::InvalidConfig(format!(
                        "author override cycle involving '{start}'"
                    )));
                }
            }
            _ => return Ok(current),
        }
    }
}

/// Disambiguate author keys: two keys merge when their last names match
/// exactly and one initial string is a proper prefix of the other, unless a
/// third key with the same last name makes the assignment ambiguous, in
/// which case the shorter key stays unmerged and a diagnostic is emitted.
/// Overrides (pairs of raw strings; both sides are normalized first) always
/// win over the automatic rule.
///
/// Returns the complete raw string → canonical id map for the corpus.
pub fn disambiguate_authors(
    corpus: &Corpus,
    overrides: &[(String, String)],
) -> Result<(BTreeMap<String, CanonicalAuthorId>, Vec<Diagnostic>)> {
    let mut diags = Vec::new();

    let mut override_map: BTreeMap<String, String> = BTreeMap::new();
    for (raw_from, raw_to) in overrides {
        let from = normalize_author_name(raw_from);
        let to = normalize_author_name(raw_to);
        if let Some(existing) = override_map.get(&from) {
            if *existing != to {
                return Err(Error::ConflictingOverride {
                    raw: from,
                    first: existing.clone(),
                    second: to,
                });
            }
        } else {
            override_map.insert(from, to);
        }
    }

    let keys: BTreeSet<String> = corpus
        .canonical_authors
        .values()
        .cloned()
        .chain(override_map.keys().cloned())
        .chain(override_map.values().cloned())
        .collect();

    let mut parent: BTreeMap<String, String> =
        keys.iter().map(|k| (k.clone(), k.clone())).collect();
    for (from, to) in &override_map {
        parent.insert(from.clone(), to.clone());
    }

    // Group keys by last name and process longest initials first, so a
    // shorter key merges into the already-resolved representative of its
    // extensions.
    let mut by_last_name: BTreeMap<&str, Vec<&String>> = BTreeMap::new();
    for key in &keys {
        by_last_name
            .entry(key_last_name(key))
            .or_default()
            .push(key);
    }
    for group in by_last_name.values_mut() {
        group.sort_by(|a, b| {
            let (ia, ib) = (key_initials(a), key_initials(b));
            ib.len().cmp(&ia.len()).then_with(|| a.cmp(b))
        });
    }

    for group in by_last_name.values() {
        for key in group {
            if override_map.contains_key(*key) {
                continue; // pinned by override
            }
            let initials = key_initials(key);
            let mut representatives = BTreeSet::new();
            for other in group {
                let other_initials = key_initials(other);
                if other_initials.len() > initials.len() && other_initials.starts_with(initials) {
                    representatives.insert(resolve_key(&parent, other)?);
                }
            }
            representatives.remove(*key);
            match representatives.len() {
                0 => {}
                1 => {
                    let rep = representatives.into_iter().next().unwrap();
                    diags.push(Diagnostic::info(
                        "corpus/authors",
                        format!("merged author key '{key}' into '{rep}'"),
                    ));
                    parent.insert((*key).clone(), rep);
                }
                _ => {
                    let listed: Vec<String> = representatives.into_iter().collect();
                    diags.push(Diagnostic::warning(
                        "corpus/authors",
                        format!(
                            "ambiguous author key '{key}': compatible with {}; left unmerged",
                            listed
                                .iter()
                                .map(|r| format!("'{r}'"))
                                .collect::<Vec<_>>()
                                .join(" and ")
                        ),
                    ));
                }
            }
        }
    }

    // Path-compress and build the final raw → canonical map.
    let mut key_to_canonical: BTreeMap<String, String> = BTreeMap::new();
    for key in &keys {
        key_to_canonical.insert(key.clone(), resolve_key(&parent, key)?);
    }

    let mut result: BTreeMap<String, CanonicalAuthorId> = BTreeMap::new();
    for (raw, key) in &corpus.canonical_authors {
        let canonical = key_to_canonical
            .get(key)
            .cloned()
            .unwrap_or_else(|| key.clone());
        result.insert(raw.clone(), canonical);
    }
    let canonicals: Vec<String> = result.values().cloned().collect();
    for c in canonicals {
        result.entry(c.clone()).or_insert(c);
    }
    Ok((result, diags))
}

/// Group the corpus's raw author variants under their canonical ids.
pub fn canonical_author_registry(corpus: &Corpus) -> BTreeMap<CanonicalAuthorId, CanonicalAuthor> {
    let mut variants: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for p in &corpus.publications {
        let author_strings = p
            .authors
            .iter()
            .chain(p.full_names.iter())
            .chain(p.addresses.iter().flat_map(|a| a.linked_authors.iter()))
            .chain(p.reprint_entries.iter().map(|r| &r.author));
        for raw in author_strings {
            let id = corpus.canonical_author(raw);
            variants.entry(id).or_default().insert(raw.clone());
        }
    }
    variants
        .into_iter()
        .map(|(id, variants)| {
            let display_name = variants
                .iter()
                .max_by(|a, b| {
                    a.chars()
                        .count()
                        .cmp(&b.chars().count())
                        .then_with(|| b.cmp(a)) // longest, then lexicographically least
                })
                .cloned()
                .unwrap_or_else(|| id.clone());
            (
                id.clone(),
                CanonicalAuthor {
                    id,
                    display_name,
                    variants: variants.into_iter().collect(),
                },
            )
        })
        .collect()
}

/// Descriptive corpus statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub publication_count: usize,
    /// Count per document type, keyed by the type's snake_case name.
    pub doc_type_counts: BTreeMap<String, usize>,
    /// Distinct canonical byline authors.
    pub author_count: usize,
    /// Authors appearing in at least one single-authored publication
    /// (single-authored = exactly one distinct canonical byline author).
    pub single_authored_authors: usize,
}

pub fn corpus_stats(corpus: &Corpus) -> Stats {
    let mut doc_type_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut authors: BTreeSet<String> = BTreeSet::new();
    let mut solo_authors: BTreeSet<String> = BTreeSet::new();
    for p in &corpus.publications {
        *doc_type_counts
            .entry(p.doc_type.as_str().to_string())
            .or_insert(0) += 1;
        let byline = corpus.canonical_byline(p);
        if byline.len() == 1 {
            solo_authors.insert(byline[0].clone());
        }
        authors.extend(byline);
    }
    Stats {
        publication_count: corpus.publications.len(),
        doc_type_counts,
        author_count: authors.len(),
        single_authored_authors: solo_authors.len(),
    }
}

/// Default period breakpoints: five half-open periods 1991-1995 through
/// 2011-2017.
pub const DEFAULT_BREAKPOINTS: [i32; 6] = [1991, 1996, 2001, 2006, 2011, 2018];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelinePeriod {
    /// Inclusive-range label, e.g. `"1991-1995"`.
    pub label: String,
    pub start: i32,
    pub end_exclusive: i32,
    pub pub_count: usize,
    /// Arithmetic mean of times_cited within the period; 0.0 when empty.
    pub mean_citations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub periods: Vec<TimelinePeriod>,
    /// Publications whose year is absent or falls outside every period.
    pub unknown: usize,
}

/// Partition publications into half-open periods `[b_i, b_{i+1})` defined
/// by strictly increasing breakpoints. Publications without a year, or with
/// a year outside every period, land in the `unknown` bucket, so period
/// counts plus `unknown` always sum to the corpus size.
pub fn summarize_timeline(
    corpus: &Corpus,
    breakpoints: &[i32],
) -> Result<(Timeline, Vec<Diagnostic>)> {
    if breakpoints.len() < 2 {
        return Err(Error::InvalidConfig(
            "timeline needs at least two breakpoints".to_string(),
        ));
    }
    if !breakpoints.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidConfig(format!(
            "timeline breakpoints must be strictly increasing, got {breakpoints:?}"
        )));
    }

    let mut counts = vec![0usize; breakpoints.len() - 1];
    let mut citation_sums = vec![0u64; breakpoints.len() - 1];
    let mut unknown = 0usize;
    for p in &corpus.publications {
        let bucket = p
            .year
            .and_then(|y| breakpoints.windows(2).position(|w| y >= w[0] && y < w[1]));
        match bucket {
            Some(i) => {
                counts[i] += 1;
                citation_sums[i] += u64::from(p.times_cited);
            }
            None => unknown += 1,
        }
    }

    let periods = breakpoints
        .windows(2)
        .enumerate()
        .map(|(i, w)| TimelinePeriod {
            label: format!("{}-{}", w[0], w[1] - 1),
            start: w[0],
            end_exclusive: w[1],
            pub_count: counts[i],
            mean_citations: if counts[i] == 0 {
                0.0
            } else {
                citation_sums[i] as f64 / counts[i] as f64
            },
        })
        .collect();

    let mut diags = Vec::new();
    if unknown > 0 {
        diags.push(Diagnostic::info(
            "corpus/timeline",
            format!("{unknown} publication(s) with missing or out-of-range year counted in the unknown bucket"),
        ));
    }
    Ok((Timeline { periods, unknown }, diags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wos::DocType;

    fn pub_with(id: &str, authors: &[&str], tc: u32, year: Option<i32>) -> Publication {
        Publication {
            id: id.to_string(),
            title: format!("title {id}"),
            year,
            doc_type: DocType::Article,
            source: "JOURNAL".to_string(),
            times_cited: tc,
            language: "English".to_string(),
            authors: authors.iter().map(|a| a.to_string()).collect(),
            full_names: authors.iter().map(|a| a.to_string()).collect(),
            addresses: Vec::new(),
            reprint_entries: Vec::new(),
        }
    }

    fn corpus_of(pubs: Vec<Publication>, cfg: &FilterConfig) -> Corpus {
        apply_exclusions(pubs, cfg).unwrap().0
    }

    #[test]
    fn author_key_examples() {
        assert_eq!(normalize_author_name("Cumming, D"), "cumming, D");
        assert_eq!(normalize_author_name("Cumming, Douglas"), "cumming, D");
        assert_eq!(normalize_author_name("Cumming, Douglas J."), "cumming, DJ");
        assert_eq!(normalize_author_name("ZAHRA, Shaker A."), "zahra, SA");
        assert_eq!(normalize_author_name("Zahra, SA"), "zahra, SA");
    }

    #[test]
    fn author_key_handles_diacritics_hyphens_and_apostrophes() {
        assert_eq!(normalize_author_name("Gómez, José"), "gomez, J");
        assert_eq!(normalize_author_name("Lee, Jong-Wook"), "lee, JW");
        assert_eq!(normalize_author_name("O'Brien, Dan"), "obrien, D");
        assert_eq!(normalize_author_name("van der Berg, J"), "van der berg, J");
        assert_eq!(normalize_author_name("[Anonymous]"), "anonymous");
        // An all-uppercase given name longer than an initials block is a
        // word, not initials.
        assert_eq!(normalize_author_name("CUMMING, DOUGLAS"), "cumming, D");
    }

    #[test]
    fn author_key_is_idempotent_on_its_own_output() {
        for raw in [
            "Cumming, Douglas J.",
            "ZAHRA, Shaker A.",
            "Gómez, José",
            "Lee, Jong-Wook",
            "[Anonymous]",
        ] {
            let key = normalize_author_name(raw);
            assert_eq!(normalize_author_name(&key), key, "not a fixed point: {raw}");
        }
    }

    #[test]
    fn threshold_retains_at_and_above_only() {
        let pubs = vec![
            pub_with("a", &["A, B"], 99, Some(2000)),
            pub_with("b", &["A, B"], 100, Some(2001)),
            pub_with("c", &["A, B"], 150, Some(2002)),
        ];
        let (corpus, _) = apply_exclusions(pubs, &FilterConfig::default()).unwrap();
        let ids: Vec<&str> = corpus.publications.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["b", "c"]);
    }

    #[test]
    fn anonymous_publication_is_excluded_even_when_highly_cited() {
        let pubs = vec![pub_with("a", &[], 500, Some(2000))];
        let (corpus, diags) = apply_exclusions(pubs, &FilterConfig::default()).unwrap();
        assert!(corpus.publications.is_empty());
        assert!(diags
            .iter()
            .any(|d| d.message.contains("anonymous publication")));
        assert!(diags.iter().any(|d| d.message.contains("empty corpus")));
    }

    #[test]
    fn zero_threshold_without_anonymous_exclusion_is_identity() {
        let pubs = vec![
            pub_with("a", &[], 0, None),
            pub_with("b", &["A, B"], 3, Some(1999)),
        ];
        let cfg = FilterConfig {
            min_citations: 0,
            exclude_anonymous: false,
            year_range: None,
        };
        let (corpus, _) = apply_exclusions(pubs.clone(), &cfg).unwrap();
        assert_eq!(corpus.publications, pubs);
    }

    #[test]
    fn year_range_is_inclusive_and_absent_years_fail_it() {
        let pubs = vec![
            pub_with("a", &["A, B"], 200, Some(1990)),
            pub_with("b", &["A, B"], 200, Some(1991)),
            pub_with("c", &["A, B"], 200, Some(2017)),
            pub_with("d", &["A, B"], 200, None),
        ];
        let cfg = FilterConfig {
            year_range: Some((1991, 2017)),
            ..FilterConfig::default()
        };
        let (corpus, _) = apply_exclusions(pubs, &cfg).unwrap();
        let ids: Vec<&str> = corpus.publications.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["b", "c"]);
    }

    #[test]
    fn invalid_year_range_is_rejected() {
        let cfg = FilterConfig {
            year_range: Some((2000, 1990)),
            ..FilterConfig::default()
        };
        assert!(matches!(
            apply_exclusions(Vec::new(), &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn canonical_maps_cover_all_raw_strings_and_are_idempotent() {
        let mut p = pub_with("a", &["Zahra, SA", "Cumming, D"], 150, Some(2005));
        p.full_names = vec![
            "Zahra, Shaker A.".to_string(),
            "Cumming, Douglas".to_string(),
        ];
        p.addresses = vec![crate::wos::AddressEntry {
            linked_authors: vec!["Zahra, Shaker A.".to_string()],
            institution_raw: "Univ Minnesota".to_string(),
            country_raw: "MN 55455 USA".to_string(),
            full_text: "[Zahra, Shaker A.] Univ Minnesota, Minneapolis, MN 55455 USA".to_string(),
        }];
        p.reprint_entries = vec![crate::wos::ReprintEntry {
            author: "Zahra, SA".to_string(),
            institution_raw: "Univ Minnesota".to_string(),
            country_raw: "USA".to_string(),
        }];
        let (corpus, _) = apply_exclusions(vec![p], &FilterConfig::default()).unwrap();

        for raw in [
            "Zahra, SA",
            "Zahra, Shaker A.",
            "Cumming, D",
            "Cumming, Douglas",
        ] {
            assert!(corpus.canonical_authors.contains_key(raw), "missing {raw}");
        }
        assert_eq!(corpus.canonical_authors["Zahra, SA"], "zahra, SA");
        assert_eq!(corpus.canonical_authors["Zahra, Shaker A."], "zahra, SA");
        assert_eq!(
            corpus.institutions["Univ Minnesota"],
            "university minnesota"
        );
        assert_eq!(corpus.countries["MN 55455 USA"], "USA");

        for map in [
            &corpus.canonical_authors,
            &corpus.institutions,
            &corpus.countries,
        ] {
            for value in map.values() {
                assert_eq!(map.get(value), Some(value), "map not idempotent at {value}");
            }
        }
    }

    #[test]
    fn two_key_prefix_merge() {
        let pubs = vec![pub_with(
            "a",
            &["Cumming, D", "Cumming, DJ"],
            150,
            Some(2005),
        )];
        let corpus = corpus_of(pubs, &FilterConfig::default());
        let (map, _) = disambiguate_authors(&corpus, &[]).unwrap();
        assert_eq!(map["Cumming, D"], "cumming, DJ");
        assert_eq!(map["Cumming, DJ"], "cumming, DJ");
    }

    #[test]
    fn ambiguous_prefix_stays_unmerged_with_diagnostic() {
        // Oracle, enumerated by hand over the 3-key prefix-compatibility
        // graph {D, DA, DJ}: D→DA and D→DJ are both proper-prefix edges, so
        // D has two candidate targets (ambiguous → unmerged); DA and DJ have
        // none (distinct authors).
        let pubs = vec![
            pub_with("a", &["Cumming, DA"], 150, Some(2005)),
            pub_with("b", &["Cumming, DJ"], 150, Some(2006)),
            pub_with("c", &["Cumming, D"], 150, Some(2007)),
        ];
        let corpus = corpus_of(pubs, &FilterConfig::default());
        let (map, diags) = disambiguate_authors(&corpus, &[]).unwrap();
        assert_eq!(map["Cumming, DA"], "cumming, DA");
        assert_eq!(map["Cumming, DJ"], "cumming, DJ");
        assert_eq!(map["Cumming, D"], "cumming, D");
        let ambiguous: Vec<_> = diags
            .iter()
            .filter(|d| d.message.contains("ambiguous author key 'cumming, D'"))
            .collect();
        assert_eq!(ambiguous.len(), 1, "{diags:?}");
    }

    #[test]
    fn prefix_chain_collapses_to_longest_key() {
        // Oracle, by hand for {D, DJ, DJX}: DJX has no extensions; DJ's only
        // extension is DJX (unique → merge); D's extensions {DJ, DJX} both
        // resolve to DJX (unique representative → merge). All three collapse.
        let pubs = vec![
            pub_with("a", &["Cumming, D"], 150, Some(2005)),
            pub_with("b", &["Cumming, DJ"], 150, Some(2006)),
            pub_with("c", &["Cumming, DJX"], 150, Some(2007)),
        ];
        let corpus = corpus_of(pubs, &FilterConfig::default());
        let (map, _) = disambiguate_authors(&corpus, &[]).unwrap();
        for raw in ["Cumming, D", "Cumming, DJ", "Cumming, DJX"] {
            assert_eq!(map[raw], "cumming, DJX");
        }
    }

    #[test]
    fn override_pins_ambiguous_key() {
        let pubs = vec![
            pub_with("a", &["Smith, J"], 150, Some(2005)),
            pub_with("b", &["Smith, JA"], 150, Some(2006)),
            pub_with("c", &["Smith, JB"], 150, Some(2007)),
        ];
        let corpus = corpus_of(pubs, &FilterConfig::default());
        let overrides = vec![("Smith, J".to_string(), "Smith, JA".to_string())];
        let (map, diags) = disambiguate_authors(&corpus, &overrides).unwrap();
        assert_eq!(map["Smith, J"], "smith, JA");
        assert_eq!(map["Smith, JB"], "smith, JB");
        assert!(
            !diags.iter().any(|d| d.message.contains("ambiguous")),
            "override resolves the ambiguity: {diags:?}"
        );
    }

    #[test]
    fn conflicting_overrides_are_fatal() {
        let pubs = vec![pub_with("a", &["Smith, J"], 150, Some(2005))];
        let corpus = corpus_of(pubs, &FilterConfig::default());
        let overrides = vec![
            ("Smith, J".to_string(), "Smith, JA".to_string()),
            ("Smith, J.".to_string(), "Smith, JB".to_string()), // same key
        ];
        match disambiguate_authors(&corpus, &overrides) {
            Err(Error::ConflictingOverride { raw, first, second }) => {
                assert_eq!(raw, "smith, J");
                assert_eq!(first, "smith, JA");
                assert_eq!(second, "smith, JB");
            }
            other => panic!("expected ConflictingOverride, got {other:?}"),
        }
    }

    #[test]
    fn override_cycle_is_invalid_config() {
        let pubs = vec![pub_with("a", &["Smith, JA", "Smith, JB"], 150, Some(2005))];
        let corpus = corpus_of(pubs, &FilterConfig::default());
        let overrides = vec![
            ("Smith, JA".to_string(), "Smith, JB".to_string()),
            ("Smith, JB".to_string(), "Smith, JA".to_string()),
        ];
        assert!(matches!(
            disambiguate_authors(&corpus, &overrides),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn disambiguation_is_idempotent() {
        let pubs = vec![
            pub_with(
                "a",
                &["Cumming, D", "Cumming, DJ", "Cumming, DJX"],
                150,
                Some(2005),
            ),
            pub_with(
                "b",
                &["Smith, JA", "Smith, JB", "Smith, J"],
                150,
                Some(2006),
            ),
        ];
        let mut corpus = corpus_of(pubs, &FilterConfig::default());
        let (map, _) = disambiguate_authors(&corpus, &[]).unwrap();
        corpus.apply_author_map(&map);
        let (map2, _) = disambiguate_authors(&corpus, &[]).unwrap();
        for (raw, canonical) in &map {
            assert_eq!(&map2[canonical], canonical, "canonical moved for {raw}");
        }
        for p in &corpus.publications {
            for raw in &p.authors {
                assert_eq!(
                    map2[&corpus.canonical_author(raw)],
                    corpus.canonical_author(raw)
                );
            }
        }
    }

    #[test]
    fn registry_groups_variants_with_longest_display_name() {
        let mut p = pub_with("a", &["Cumming, D"], 150, Some(2005));
        p.full_names = vec!["Cumming, Douglas".to_string()];
        let mut corpus = corpus_of(vec![p], &FilterConfig::default());
        let (map, _) = disambiguate_authors(&corpus, &[]).unwrap();
        corpus.apply_author_map(&map);
        let registry = canonical_author_registry(&corpus);
        let author = &registry["cumming, D"];
        assert_eq!(author.display_name, "Cumming, Douglas");
        assert_eq!(author.variants, ["Cumming, D", "Cumming, Douglas"]);
    }

    #[test]
    fn country_extraction_examples() {
        let tables = NormalizationTables::builtin();
        let mut diags = Vec::new();
        assert_eq!(extract_country("MN 55455 USA", tables, &mut diags), "USA");
        assert_eq!(
            extract_country("Peoples R China", tables, &mut diags),
            "China"
        );
        assert_eq!(
            extract_country("England", tables, &mut diags),
            "United Kingdom"
        );
        assert_eq!(
            extract_country("Scotland", tables, &mut diags),
            "United Kingdom"
        );
        assert_eq!(extract_country("Canada.", tables, &mut diags), "Canada");
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(
            extract_country("Ruritania", tables, &mut diags),
            "Ruritania"
        );
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, crate::Severity::Warning);
    }

    #[test]
    fn country_extraction_is_idempotent_on_examples() {
        let tables = NormalizationTables::builtin();
        let mut sink = Vec::new();
        for raw in [
            "MN 55455 USA",
            "Peoples R China",
            "England",
            "Ruritania",
            "Canada.",
        ] {
            let once = extract_country(raw, tables, &mut sink);
            let twice = extract_country(&once, tables, &mut sink);
            assert_eq!(once, twice, "not idempotent for {raw}");
        }
    }

    #[test]
    fn institution_normalization_examples() {
        let tables = NormalizationTables::builtin();
        assert_eq!(
            normalize_institution("Univ Minnesota", tables),
            "university minnesota"
        );
        assert_eq!(
            normalize_institution("MIT", tables),
            "massachusetts institute technology"
        );
        assert_eq!(
            normalize_institution("Harvard Univ.", tables),
            "harvard university"
        );
        // already-canonical input is a fixed point
        assert_eq!(
            normalize_institution("university minnesota", tables),
            "university minnesota"
        );
        assert_eq!(
            normalize_institution("massachusetts institute technology", tables),
            "massachusetts institute technology"
        );
    }

    #[test]
    fn stats_count_authors_and_solo_authors() {
        let pubs = vec![
            pub_with("a", &["Alpha, A"], 150, Some(2005)),
            pub_with("b", &["Alpha, A", "Beta, B"], 150, Some(2006)),
        ];
        let corpus = corpus_of(pubs, &FilterConfig::default());
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.publication_count, 2);
        assert_eq!(stats.author_count, 2);
        assert_eq!(stats.single_authored_authors, 1);
        assert_eq!(stats.doc_type_counts["article"], 2);
    }

    #[test]
    fn stats_on_empty_corpus_are_all_zero() {
        let corpus = corpus_of(Vec::new(), &FilterConfig::default());
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.publication_count, 0);
        assert_eq!(stats.author_count, 0);
        assert_eq!(stats.single_authored_authors, 0);
        assert!(stats.doc_type_counts.is_empty());
    }

    #[test]
    fn timeline_means_and_buckets() {
        let pubs = vec![
            pub_with("a", &["A, B"], 200, Some(1992)),
            pub_with("b", &["A, B"], 100, Some(1993)),
            pub_with("c", &["A, B"], 400, Some(2017)),
            pub_with("d", &["A, B"], 100, None),
            pub_with("e", &["A, B"], 100, Some(1960)),
        ];
        let corpus = corpus_of(pubs, &FilterConfig::default());
        let (timeline, diags) = summarize_timeline(&corpus, &DEFAULT_BREAKPOINTS).unwrap();
        assert_eq!(timeline.periods.len(), 5);
        let first = &timeline.periods[0];
        assert_eq!(first.label, "1991-1995");
        assert_eq!(first.pub_count, 2);
        assert!((first.mean_citations - 150.0).abs() < 1e-12);
        let second = &timeline.periods[1];
        assert_eq!((second.pub_count, second.mean_citations), (0, 0.0));
        let last = &timeline.periods[4];
        assert_eq!(last.label, "2011-2017");
        assert_eq!(last.pub_count, 1);
        assert_eq!(timeline.unknown, 2, "absent year + out-of-range year");
        let total: usize = timeline.periods.iter().map(|p| p.pub_count).sum();
        assert_eq!(total + timeline.unknown, corpus.publications.len());
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn timeline_rejects_bad_breakpoints() {
        let corpus = corpus_of(Vec::new(), &FilterConfig::default());
        assert!(matches!(
            summarize_timeline(&corpus, &[1991]),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            summarize_timeline(&corpus, &[1991, 1991]),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            summarize_timeline(&corpus, &[1996, 1991]),
            Err(Error::InvalidConfig(_))
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_pub() -> impl Strategy<Value = Publication> {
            ("[a-c]{1,8}", 0u32..400, proptest::option::of(1985i32..2025)).prop_map(
                |(author, tc, year)| {
                    let mut p = pub_with("x", &[], tc, year);
                    p.id = format!("{author}-{tc}");
                    p.authors = vec![format!(
                        "{}, {}",
                        {
                            let mut c = author.chars();
                            let first = c.next().unwrap().to_uppercase();
                            format!("{first}{}", c.as_str())
                        },
                        "Q"
                    )];
                    p.full_names = p.authors.clone();
                    p
                },
            )
        }

        proptest! {
            #[test]
            fn filter_is_monotone_in_threshold(
                pubs in proptest::collection::vec(arb_pub(), 0..24),
                t1 in 0u32..300,
                t2 in 0u32..300,
            ) {
                let (lo, hi) = (t1.min(t2), t1.max(t2));
                let cfg_lo = FilterConfig { min_citations: lo, ..FilterConfig::default() };
                let cfg_hi = FilterConfig { min_citations: hi, ..FilterConfig::default() };
                let (corpus_lo, _) = apply_exclusions(pubs.clone(), &cfg_lo).unwrap();
                let (corpus_hi, _) = apply_exclusions(pubs, &cfg_hi).unwrap();
                let lo_ids: BTreeSet<&str> =
                    corpus_lo.publications.iter().map(|p| p.id.as_str()).collect();
                for p in &corpus_hi.publications {
                    prop_assert!(lo_ids.contains(p.id.as_str()));
                }
            }

            #[test]
            fn timeline_buckets_partition_the_corpus(
                pubs in proptest::collection::vec(arb_pub(), 0..24),
            ) {
                let cfg = FilterConfig { min_citations: 0, ..FilterConfig::default() };
                let (corpus, _) = apply_exclusions(pubs, &cfg).unwrap();
                let (timeline, _) = summarize_timeline(&corpus, &DEFAULT_BREAKPOINTS).unwrap();
                let total: usize = timeline.periods.iter().map(|p| p.pub_count).sum();
                prop_assert_eq!(total + timeline.unknown, corpus.publications.len());
            }

            #[test]
            fn author_keys_are_fixed_points(raw in "[A-Z][a-z]{1,10}, [A-Z][a-z]{0,9}( [A-Z]\\.)?") {
                let key = normalize_author_name(&raw);
                prop_assert_eq!(normalize_author_name(&key), key);
            }
        }
    }
}
