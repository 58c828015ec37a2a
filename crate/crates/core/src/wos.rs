//! Web of Science tagged-export parsing.
//!
//! The tagged plain-text format is line-oriented: a field starts with a
//! two-character uppercase-alphanumeric tag followed by one space; lines
//! beginning with exactly three spaces continue the most recent field; `ER`
//! terminates a record and `EF` ends the file. Multi-valued fields (AU, AF,
//! C1) keep one logical value per line, while free-text fields (TI, SO, AB)
//! are joined with single spaces downstream.
//!
//! A tab-delimited export variant is also accepted: the first row is the tag
//! header, each following row one record (detected by sniffing the first
//! line for a tab).
//!
//! Parsing is best-effort: malformed lines produce [`Diagnostic`]s, never
//! aborts. [`serialize_export`] is the exact inverse on well-formed input —
//! re-serializing parsed records reproduces the original text modulo
//! trailing whitespace.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diag::Diagnostic;
use crate::{Error, Result};

/// One field of a raw record: a two-character tag and its source lines
/// (first line plus continuations), stored verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawField {
    pub tag: String,
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub first_line: usize,
    pub last_line: usize,
}

/// One record of a tagged export, field order preserved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub fields: Vec<RawField>,
    pub source_file: String,
    pub source_span: SourceSpan,
}

impl RawRecord {
    /// First field with the given tag.
    pub fn field(&self, tag: &str) -> Option<&RawField> {
        self.fields.iter().find(|f| f.tag == tag)
    }

    /// Lines of the first field with the given tag (empty when absent).
    pub fn lines(&self, tag: &str) -> &[String] {
        self.field(tag).map(|f| f.lines.as_slice()).unwrap_or(&[])
    }

    /// Lines of the first field with the given tag, joined with single
    /// spaces — the free-text reading (TI, SO, AB, RP).
    pub fn joined(&self, tag: &str) -> Option<String> {
        self.field(tag).map(|f| {
            f.lines
                .iter()
                .map(|l| l.trim())
                .collect::<Vec<_>>()
                .join(" ")
        })
    }
}

/// Document type from the DT tag.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    Article,
    Review,
    ProceedingsPaper,
    Editorial,
    Book,
    BookChapter,
    #[default]
    Other,
}

impl DocType {
    /// Case-insensitive mapping; a multi-valued DT (`A; B`) is read from its
    /// first component; anything unknown maps to `Other`.
    pub fn parse(raw: &str) -> DocType {
        let first = raw.split(';').next().unwrap_or("").trim();
        match first.to_ascii_lowercase().as_str() {
            "article" => DocType::Article,
            "review" => DocType::Review,
            "proceedings paper" => DocType::ProceedingsPaper,
            "editorial material" | "editorial" => DocType::Editorial,
            "book" => DocType::Book,
            "book chapter" => DocType::BookChapter,
            _ => DocType::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::ProceedingsPaper => "proceedings_paper",
            DocType::Editorial => "editorial",
            DocType::Book => "book",
            DocType::BookChapter => "book_chapter",
            DocType::Other => "other",
        }
    }
}

/// One address segment from the C1 field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressEntry {
    /// Authors named in a leading `[...]` bracket, empty for unbracketed
    /// segments.
    pub linked_authors: Vec<String>,
    /// First comma-separated token of the address part.
    pub institution_raw: String,
    /// Final comma-separated token, trimmed of the terminating period; a
    /// `<STATE> <ZIP> USA` tail collapses to `USA`.
    pub country_raw: String,
    /// The original segment text, verbatim.
    pub full_text: String,
}

/// One corresponding-author clause from the RP field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReprintEntry {
    pub author: String,
    pub institution_raw: String,
    pub country_raw: String,
}

/// One normalized bibliographic record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publication {
    /// UT accession number, or a synthesized stable id when UT is absent.
    pub id: String,
    pub title: String,
    pub year: Option<i32>,
    pub doc_type: DocType,
    pub source: String,
    pub times_cited: u32,
    pub language: String,
    /// Byline in order; position 1 is the first author (AU short form).
    pub authors: Vec<String>,
    /// Full (AF) names aligned with `authors`; falls back to the AU form
    /// when AF is absent or misaligned. Display only.
    pub full_names: Vec<String>,
    pub addresses: Vec<AddressEntry>,
    pub reprint_entries: Vec<ReprintEntry>,
}

fn is_tag_start(line: &str) -> bool {
    let bytes = line.as_bytes();
    bytes.len() >= 3
        && bytes[0].is_ascii_uppercase() | bytes[0].is_ascii_digit()
        && bytes[1].is_ascii_uppercase() | bytes[1].is_ascii_digit()
        && bytes[2] == b' '
}

fn is_continuation(line: &str) -> bool {
    line.starts_with("   ") && !line.starts_with("    ")
}

/// Parse a tagged or tab-delimited export. `source_name` labels diagnostics
/// and record spans. Returns the records in source order plus diagnostics;
/// fails only when no record could be parsed at all.
pub fn parse_export(text: &str, source_name: &str) -> Result<(Vec<RawRecord>, Vec<Diagnostic>)> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut diags = Vec::new();
    let records = match text.lines().next() {
        Some(first) if first.contains('\t') => parse_tab_delimited(text, source_name, &mut diags),
        _ => parse_tagged(text, source_name, &mut diags),
    };
    if records.is_empty() {
        return Err(Error::EmptyExport {
            path: source_name.to_string(),
        });
    }
    Ok((records, diags))
}

fn parse_tagged(text: &str, source_name: &str, diags: &mut Vec<Diagnostic>) -> Vec<RawRecord> {
    let mut records: Vec<RawRecord> = Vec::new();
    let mut fields: Vec<RawField> = Vec::new();
    let mut record_first_line = 0usize;
    let mut saw_ef = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        let trimmed_end = line.trim_end();

        if trimmed_end.is_empty() {
            continue; // blank separator between records
        }
        if trimmed_end == "ER" {
            if fields.is_empty() {
                diags.push(Diagnostic::warning(
                    format!("{source_name}:{lineno}"),
                    "ER terminator with no preceding fields; empty record skipped",
                ));
            } else {
                records.push(RawRecord {
                    fields: std::mem::take(&mut fields),
                    source_file: source_name.to_string(),
                    source_span: SourceSpan {
                        first_line: record_first_line,
                        last_line: lineno,
                    },
                });
            }
            continue;
        }
        if trimmed_end == "EF" {
            if saw_ef {
                diags.push(Diagnostic::warning(
                    format!("{source_name}:{lineno}"),
                    "duplicate EF marker",
                ));
            }
            saw_ef = true;
            continue;
        }
        if saw_ef {
            diags.push(Diagnostic::warning(
                format!("{source_name}:{lineno}"),
                "content after EF marker",
            ));
            saw_ef = false; // report once, then keep parsing best-effort
        }
        if is_tag_start(line) {
            if fields.is_empty() {
                record_first_line = lineno;
            }
            fields.push(RawField {
                tag: line[..2].to_string(),
                lines: vec![line[3..].to_string()],
            });
        } else if is_continuation(line) {
            match fields.last_mut() {
                Some(field) => field.lines.push(line[3..].to_string()),
                None => diags.push(Diagnostic::warning(
                    format!("{source_name}:{lineno}"),
                    "continuation line with no open field; skipped",
                )),
            }
        } else {
            diags.push(Diagnostic::warning(
                format!("{source_name}:{lineno}"),
                format!(
                    "malformed line (neither tag, continuation, ER nor EF): {:?}",
                    truncate(trimmed_end, 60)
                ),
            ));
        }
    }

    if !fields.is_empty() {
        diags.push(Diagnostic::warning(
            format!("{source_name}:{}", text.lines().count()),
            format!(
                "{} trailing field(s) not terminated by ER; discarded",
                fields.len()
            ),
        ));
    }
    if !saw_ef && !records.is_empty() {
        diags.push(Diagnostic::warning(source_name, "missing EF"));
    }
    records
}

/// Multi-valued tags whose tab-export cells hold `; `-separated values that
/// the tagged format would keep one per line.
const MULTILINE_TAGS: [&str; 3] = ["AU", "AF", "C1"];

fn parse_tab_delimited(
    text: &str,
    source_name: &str,
    diags: &mut Vec<Diagnostic>,
) -> Vec<RawRecord> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Vec::new();
    };
    let tags: Vec<Option<String>> = header
        .trim_end_matches('\r')
        .split('\t')
        .enumerate()
        .map(|(col, cell)| {
            let cell = cell.trim();
            if cell.len() == 2
                && cell
                    .bytes()
                    .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit())
                && cell != "ER"
                && cell != "EF"
            {
                Some(cell.to_string())
            } else {
                diags.push(Diagnostic::warning(
                    format!("{source_name}:1"),
                    format!(
                        "invalid tag {cell:?} in header column {}; column ignored",
                        col + 1
                    ),
                ));
                None
            }
        })
        .collect();

    let mut records = Vec::new();
    for (idx, raw_line) in lines {
        let lineno = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = Vec::new();
        for (cell, tag) in line.split('\t').zip(&tags) {
            let Some(tag) = tag else { continue };
            let cell = cell.trim();
            if cell.is_empty() {
                continue;
            }
            let lines = if MULTILINE_TAGS.contains(&tag.as_str()) {
                cell.split("; ").map(|v| v.to_string()).collect()
            } else {
                vec![cell.to_string()]
            };
            fields.push(RawField {
                tag: tag.clone(),
                lines,
            });
        }
        if fields.is_empty() {
            diags.push(Diagnostic::warning(
                format!("{source_name}:{lineno}"),
                "row with no usable cells; skipped",
            ));
        } else {
            records.push(RawRecord {
                fields,
                source_file: source_name.to_string(),
                source_span: SourceSpan {
                    first_line: lineno,
                    last_line: lineno,
                },
            });
        }
    }
    records
}

/// Serialize one record back to tagged text (fields in order, continuations
/// indented three spaces, `ER` terminator). Inverse of parsing modulo
/// trailing whitespace.
pub fn serialize_record(record: &RawRecord) -> String {
    let mut out = String::new();
    for field in &record.fields {
        for (i, line) in field.lines.iter().enumerate() {
            if i == 0 {
                out.push_str(&field.tag);
                out.push(' ');
            } else {
                out.push_str("   ");
            }
            out.push_str(line);
            out.push('\n');
        }
        if field.lines.is_empty() {
            out.push_str(&field.tag);
            out.push('\n');
        }
    }
    out.push_str("ER\n");
    out
}

/// Serialize a whole export: records separated by blank lines, then the
/// `EF` end-of-file marker.
pub fn serialize_export(records: &[RawRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serialize_record(record));
        out.push('\n');
    }
    out.push_str("EF\n");
    out
}

/// Split the trailing clause token: final comma-separated token of a
/// segment, trimmed of the terminating period, with a US `STATE ZIP USA`
/// tail collapsed to `USA`.
fn segment_country(segment: &str) -> String {
    let last = segment
        .rsplit(',')
        .next()
        .unwrap_or(segment)
        .trim()
        .trim_end_matches('.')
        .trim()
        .to_string();
    if last == "USA" || last.ends_with(" USA") {
        "USA".to_string()
    } else {
        last
    }
}

fn segment_institution(address: &str) -> String {
    address
        .split(',')
        .next()
        .unwrap_or("")
        .trim()
        .trim_end_matches('.')
        .trim()
        .to_string()
}

/// Parse the joined RP field into corresponding-author entries. Splits on
/// `(corresponding author)` clauses; a clause naming several authors
/// (`A; B (corresponding author), addr`) yields one entry per author with
/// the shared address. Unparseable clauses are skipped with a diagnostic.
pub fn parse_reprint(
    rp_text: &str,
    location: &str,
    diags: &mut Vec<Diagnostic>,
) -> Vec<ReprintEntry> {
    const MARKER: &str = "(corresponding author)";
    let text = rp_text.trim();
    if text.is_empty() {
        return Vec::new();
    }
    let parts: Vec<&str> = text.split(MARKER).collect();
    if parts.len() == 1 {
        // No marker at all: old-style "Name, Addr..." reprint line. Treat it
        // as unparseable rather than guessing a name/address boundary.
        diags.push(Diagnostic::warning(
            location,
            "RP field has no '(corresponding author)' clause; skipped",
        ));
        return Vec::new();
    }

    // Chunk i of the split holds, in `;`-separated segments, the address of
    // clause i-1 followed by the author name(s) of clause i. Chunk 0 is all
    // names, the final chunk all address. A segment reads as a name when it
    // has at most one comma and no terminating period; addresses carry
    // several commas and end with one.
    let clause_count = parts.len() - 1;
    let mut clause_names: Vec<Vec<String>> = Vec::with_capacity(clause_count);
    let mut clause_addresses: Vec<String> = Vec::with_capacity(clause_count);
    for (i, part) in parts.iter().enumerate() {
        let segments: Vec<&str> = part.split(';').collect();
        let is_first = i == 0;
        let is_last = i == parts.len() - 1;
        let boundary = if is_last {
            segments.len()
        } else if is_first {
            0
        } else {
            let mut k = segments.len();
            while k > 0 {
                let s = segments[k - 1].trim();
                let looks_like_name =
                    !s.is_empty() && !s.ends_with('.') && s.matches(',').count() <= 1;
                if looks_like_name {
                    k -= 1;
                } else {
                    break;
                }
            }
            k
        };
        if !is_first {
            let address = segments[..boundary].join(";");
            let address = address.trim().trim_start_matches(',').trim();
            clause_addresses.push(address.to_string());
        }
        if !is_last {
            let names: Vec<String> = segments[boundary..]
                .iter()
                .map(|s| s.trim().trim_end_matches(',').trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            clause_names.push(names);
        }
    }

    let mut entries = Vec::new();
    for (names, address) in clause_names.iter().zip(&clause_addresses) {
        if address.is_empty() {
            diags.push(Diagnostic::warning(
                location,
                "corresponding-author clause with empty address; skipped",
            ));
            continue;
        }
        if names.is_empty() {
            diags.push(Diagnostic::warning(
                location,
                "corresponding-author clause with empty author name; skipped",
            ));
            continue;
        }
        let institution_raw = segment_institution(address);
        let country_raw = segment_country(address);
        for name in names {
            entries.push(ReprintEntry {
                author: name.clone(),
                institution_raw: institution_raw.clone(),
                country_raw: country_raw.clone(),
            });
        }
    }
    entries
}

/// Parse C1 lines into address entries. Bracketed segments
/// (`[Name; Name] Address`) fill `linked_authors`; unbracketed segments
/// leave it empty. A line may carry several bracketed segments separated by
/// `; `.
pub fn parse_addresses(
    c1_lines: &[String],
    location: &str,
    diags: &mut Vec<Diagnostic>,
) -> Vec<AddressEntry> {
    let mut entries = Vec::new();
    for line in c1_lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let segments: Vec<String> = if line.starts_with('[') {
            // "[A] addr1.; [B] addr2." -> restore the bracket eaten by split.
            line.split("; [")
                .enumerate()
                .map(|(i, s)| {
                    if i == 0 {
                        s.to_string()
                    } else {
                        format!("[{s}")
                    }
                })
                .collect()
        } else {
            vec![line.to_string()]
        };
        for segment in segments {
            let segment_trim = segment.trim();
            if segment_trim.is_empty() {
                continue;
            }
            let (linked, address) = if let Some(rest) = segment_trim.strip_prefix('[') {
                match rest.split_once(']') {
                    Some((names, addr)) => {
                        let linked: Vec<String> = names
                            .split(';')
                            .map(|n| n.trim().to_string())
                            .filter(|n| !n.is_empty())
                            .collect();
                        (linked, addr.trim())
                    }
                    None => {
                        diags.push(Diagnostic::warning(
                            location,
                            format!(
                                "unclosed author bracket in C1 segment: {:?}",
                                truncate(segment_trim, 60)
                            ),
                        ));
                        (Vec::new(), segment_trim)
                    }
                }
            } else {
                (Vec::new(), segment_trim)
            };
            if address.is_empty() {
                diags.push(Diagnostic::warning(
                    location,
                    "C1 segment with empty address; skipped",
                ));
                continue;
            }
            entries.push(AddressEntry {
                linked_authors: linked,
                institution_raw: segment_institution(address),
                country_raw: segment_country(address),
                full_text: segment_trim.to_string(),
            });
        }
    }
    entries
}

/// Stable id for records without a UT accession number: content hash over
/// (first author, year, title).
fn synthesize_id(first_author: &str, year: &str, title: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(first_author.as_bytes());
    hasher.update([0]);
    hasher.update(year.as_bytes());
    hasher.update([0]);
    hasher.update(title.as_bytes());
    let digest = hasher.finalize();
    format!("SYN:{}", &hex::encode(digest)[..16])
}

/// Convert a raw record to a normalized publication. Total over parseable
/// records: every data problem is handled with a documented default plus a
/// diagnostic (missing TC -> 0, unknown DT -> other, neither AU nor AF ->
/// empty byline left for downstream anonymous-record exclusion).
pub fn record_to_publication(record: &RawRecord, diags: &mut Vec<Diagnostic>) -> Publication {
    let location = format!("{}:{}", record.source_file, record.source_span.first_line);

    let authors: Vec<String> = record
        .lines("AU")
        .iter()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect();
    let af_lines: Vec<String> = record
        .lines("AF")
        .iter()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect();
    let (authors, full_names) = if authors.is_empty() && !af_lines.is_empty() {
        (af_lines.clone(), af_lines)
    } else if af_lines.len() == authors.len() {
        (authors, af_lines)
    } else {
        let full = authors.clone();
        (authors, full)
    };
    if authors.is_empty() {
        diags.push(Diagnostic::warning(
            &location,
            "anonymous record: neither AU nor AF present",
        ));
    }

    let title = record.joined("TI").unwrap_or_default();
    let source = record.joined("SO").unwrap_or_default();
    let language = record.joined("LA").unwrap_or_default();

    let year = match record.joined("PY") {
        None => None,
        Some(raw) => match raw.trim().parse::<i32>() {
            Ok(y) => Some(y),
            Err(_) => {
                diags.push(Diagnostic::warning(
                    &location,
                    format!("unparseable PY value {:?}; year treated as absent", raw),
                ));
                None
            }
        },
    };

    let times_cited = match record.joined("TC") {
        None => {
            diags.push(Diagnostic::warning(
                &location,
                "missing TC tag; times_cited defaults to 0",
            ));
            0
        }
        Some(raw) => match raw.trim().parse::<u32>() {
            Ok(tc) => tc,
            Err(_) => {
                diags.push(Diagnostic::warning(
                    &location,
                    format!("unparseable TC value {:?}; times_cited defaults to 0", raw),
                ));
                0
            }
        },
    };

    let doc_type = record
        .joined("DT")
        .map(|raw| DocType::parse(&raw))
        .unwrap_or_default();

    let addresses = parse_addresses(record.lines("C1"), &location, diags);
    let reprint_entries = match record.joined("RP") {
        Some(rp) => parse_reprint(&rp, &location, diags),
        None => Vec::new(),
    };

    let id = match record.joined("UT") {
        Some(ut) if !ut.trim().is_empty() => ut.trim().to_string(),
        _ => synthesize_id(
            authors.first().map(String::as_str).unwrap_or(""),
            &year.map(|y| y.to_string()).unwrap_or_default(),
            &title,
        ),
    };

    Publication {
        id,
        title,
        year,
        doc_type,
        source,
        times_cited,
        language,
        authors,
        full_names,
        addresses,
        reprint_entries,
    }
}

/// Number of `ER` terminator lines in tagged text (used by the
/// record-count invariant).
pub fn count_er_lines(text: &str) -> usize {
    text.lines()
        .filter(|l| l.trim_end_matches('\r').trim_end() == "ER")
        .count()
}

/// Distinct tags appearing in a record set, sorted (introspection helper).
pub fn tag_inventory(records: &[RawRecord]) -> Vec<String> {
    let tags: BTreeSet<String> = records
        .iter()
        .flat_map(|r| r.fields.iter().map(|f| f.tag.clone()))
        .collect();
    tags.into_iter().collect()
}

fn truncate(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        s.to_string()
    } else {
        let cut: String = s.chars().take(max).collect();
        format!("{cut}…")
    }
}
