//! Two-column normalization tables.
//!
//! Country normalization, institution abbreviations/aliases, author
//! overrides and the region map all share one plain-text format: one
//! `raw<TAB>canonical` mapping per line, `#` comments and blank lines
//! ignored. Default tables ship embedded in the library; every one of them
//! can be replaced by a CLI flag pointing at a file in the same format.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use crate::{Error, Result};

pub const DEFAULT_COUNTRIES: &str = include_str!("../data/countries.tsv");
pub const DEFAULT_INSTITUTION_ABBREV: &str = include_str!("../data/institution_abbrev.tsv");
pub const DEFAULT_INSTITUTION_ALIASES: &str = include_str!("../data/institution_aliases.tsv");
pub const DEFAULT_REGIONS: &str = include_str!("../data/regions.tsv");

/// Parse two-column `raw<TAB>canonical` text. Returns pairs in file order
/// (later duplicates of the same key win when collected into a map).
pub fn parse_two_column(text: &str, path_label: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((raw, canonical)) = line.split_once('\t') else {
            return Err(Error::MalformedTable {
                path: path_label.to_string(),
                line: idx + 1,
                message: "expected two tab-separated columns".to_string(),
            });
        };
        let raw = raw.trim();
        let canonical = canonical.trim();
        if raw.is_empty() || canonical.is_empty() {
            return Err(Error::MalformedTable {
                path: path_label.to_string(),
                line: idx + 1,
                message: "empty column".to_string(),
            });
        }
        pairs.push((raw.to_string(), canonical.to_string()));
    }
    Ok(pairs)
}

/// Read and parse a two-column table file.
pub fn load_two_column(path: &Path) -> Result<Vec<(String, String)>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_two_column(&text, &path.display().to_string())
}

fn to_map(pairs: Vec<(String, String)>) -> BTreeMap<String, String> {
    pairs.into_iter().collect()
}

/// The three lookup tables used by corpus normalization.
#[derive(Debug, Clone)]
pub struct NormalizationTables {
    /// Exact raw country string -> canonical country.
    pub countries: BTreeMap<String, String>,
    /// Lowercased token -> expansion, applied word-by-word to institution
    /// names.
    pub institution_abbrev: BTreeMap<String, String>,
    /// Whole-name institution aliases, matched both on the raw trimmed
    /// string and on the token-expanded form.
    pub institution_aliases: BTreeMap<String, String>,
}

impl NormalizationTables {
    /// The tables shipped with the library.
    pub fn builtin() -> &'static NormalizationTables {
        static BUILTIN: OnceLock<NormalizationTables> = OnceLock::new();
        BUILTIN.get_or_init(|| NormalizationTables {
            countries: to_map(
                parse_two_column(DEFAULT_COUNTRIES, "builtin:countries")
                    .expect("builtin country table is well-formed"),
            ),
            institution_abbrev: to_map(
                parse_two_column(DEFAULT_INSTITUTION_ABBREV, "builtin:institution_abbrev")
                    .expect("builtin abbreviation table is well-formed"),
            ),
            institution_aliases: to_map(
                parse_two_column(DEFAULT_INSTITUTION_ALIASES, "builtin:institution_aliases")
                    .expect("builtin alias table is well-formed"),
            ),
        })
    }

    /// Builtin tables with any subset replaced by files.
    pub fn with_overrides(
        countries: Option<&Path>,
        abbrev: Option<&Path>,
        aliases: Option<&Path>,
    ) -> Result<NormalizationTables> {
        let builtin = Self::builtin();
        Ok(NormalizationTables {
            countries: match countries {
                Some(p) => to_map(load_two_column(p)?),
                None => builtin.countries.clone(),
            },
            institution_abbrev: match abbrev {
                Some(p) => to_map(load_two_column(p)?),
                None => builtin.institution_abbrev.clone(),
            },
            institution_aliases: match aliases {
                Some(p) => to_map(load_two_column(p)?),
                None => builtin.institution_aliases.clone(),
            },
        })
    }
}
