//! First-author / corresponding-author credit tallies and the Y-index.
//!
//! For every entity (author, institution or country) the ledger counts FP
//! (publications where the entity holds byline position 1, or is linked to
//! the first author at the affiliation levels) and RP (publications where
//! the entity appears among the corresponding-author entries). The Y-index
//! characterizes each entity by `j = FP + RP` (volume) and
//! `h = arctan(RP/FP)` (supervision-vs-leadership mix), with polar-plot
//! coordinates `x = j·cos h`, `y = j·sin h`.
//!
//! Tallying is a fold over publications with a commutative, associative
//! merge of `(fp, rp)` pairs, so the result is independent of publication
//! order.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::diag::Diagnostic;
use crate::wos::Publication;
use crate::{Error, Level, Result};

/// Ledger key for publications whose affiliation cannot be resolved at the
/// institution/country level. Excluded from rankings.
pub const UNKNOWN_ENTITY: &str = "UNKNOWN";

/// Per-entity first-author / corresponding-author publication counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Credit {
    pub fp: u32,
    pub rp: u32,
}

/// All credits at one analysis level. Entities with `fp = rp = 0` never
/// appear (credits are only inserted when earned).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreditLedger {
    pub level: Level,
    pub entries: BTreeMap<String, Credit>,
}

/// The Y-index of one entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YIndex {
    pub entity: String,
    pub fp: u32,
    pub rp: u32,
    /// j = fp + rp.
    pub j: u32,
    /// h = arctan(rp/fp) in radians, in [0, π/2]; 0 when rp = 0 < fp and
    /// π/2 when fp = 0 < rp.
    pub h: f64,
    /// x = j·cos(h).
    pub x: f64,
    /// y = j·sin(h).
    pub y: f64,
}

/// Productivity counting mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    /// 1 credit per publication to every distinct byline entity.
    Full,
    /// 1/N credit per author on an N-author byline; affiliation levels
    /// split each author's share equally across that author's affiliations.
    Fractional,
}

impl std::str::FromStr for CountMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(CountMode::Full),
            "fractional" => Ok(CountMode::Fractional),
            other => Err(Error::InvalidConfig(format!(
                "unknown counting mode '{other}' (expected full or fractional)"
            ))),
        }
    }
}

fn or_unknown(entity: String) -> String {
    if entity.is_empty() {
        UNKNOWN_ENTITY.to_string()
    } else {
        entity
    }
}

fn entity_of_address(corpus: &Corpus, address: &crate::wos::AddressEntry, level: Level) -> String {
    match level {
        Level::Institution => or_unknown(corpus.canonical_institution(&address.institution_raw)),
        Level::Country => or_unknown(corpus.canonical_country(&address.country_raw)),
        Level::Author => unreachable!("address entities exist only at affiliation levels"),
    }
}

fn entity_of_reprint(corpus: &Corpus, entry: &crate::wos::ReprintEntry, level: Level) -> String {
    match level {
        Level::Author => corpus.canonical_author(&entry.author),
        Level::Institution => or_unknown(corpus.canonical_institution(&entry.institution_raw)),
        Level::Country => or_unknown(corpus.canonical_country(&entry.country_raw)),
    }
}

/// Affiliations of the publication's first author, resolved in order:
/// C1 entries bracket-linked to the first author → reprint entries whose
/// author is the first author → the first C1 segment → `UNKNOWN`.
pub(crate) fn first_author_affiliations(
    corpus: &Corpus,
    publication: &Publication,
    first_author: &str,
    level: Level,
) -> Vec<String> {
    let bracketed: BTreeSet<String> = publication
        .addresses
        .iter()
        .filter(|a| {
            a.linked_authors
                .iter()
                .any(|name| corpus.canonical_author(name) == first_author)
        })
        .map(|a| entity_of_address(corpus, a, level))
        .collect();
    if !bracketed.is_empty() {
        return bracketed.into_iter().collect();
    }
    let via_reprint: BTreeSet<String> = publication
        .reprint_entries
        .iter()
        .filter(|r| corpus.canonical_author(&r.author) == first_author)
        .map(|r| entity_of_reprint(corpus, r, level))
        .collect();
    if !via_reprint.is_empty() {
        return via_reprint.into_iter().collect();
    }
    if let Some(first_segment) = publication.addresses.first() {
        return vec![entity_of_address(corpus, first_segment, level)];
    }
    vec![UNKNOWN_ENTITY.to_string()]
}

/// Affiliations of an arbitrary byline author, for productivity counting:
/// bracket-linked C1 entries → the publication's unbracketed C1 entries →
/// `UNKNOWN`.
fn author_affiliations(
    corpus: &Corpus,
    publication: &Publication,
    author: &str,
    level: Level,
) -> Vec<String> {
    let bracketed: BTreeSet<String> = publication
        .addresses
        .iter()
        .filter(|a| {
            a.linked_authors
                .iter()
                .any(|name| corpus.canonical_author(name) == author)
        })
        .map(|a| entity_of_address(corpus, a, level))
        .collect();
    if !bracketed.is_empty() {
        return bracketed.into_iter().collect();
    }
    let unbracketed: BTreeSet<String> = publication
        .addresses
        .iter()
        .filter(|a| a.linked_authors.is_empty())
        .map(|a| entity_of_address(corpus, a, level))
        .collect();
    if !unbracketed.is_empty() {
        return unbracketed.into_iter().collect();
    }
    vec![UNKNOWN_ENTITY.to_string()]
}

/// The distinct entities earning FP and RP credit on one publication: the
/// first byline author (or, at affiliation levels, each affiliation
/// resolved for the first author) on the FP side; each distinct entity
/// across the corresponding-author entries on the RP side.
pub(crate) fn publication_credits(
    corpus: &Corpus,
    publication: &Publication,
    level: Level,
) -> (BTreeSet<String>, BTreeSet<String>) {
    let byline = corpus.canonical_byline(publication);
    let fp_entities: BTreeSet<String> = match (level, byline.first()) {
        (_, None) => BTreeSet::new(), // anonymous record retained by config
        (Level::Author, Some(first)) => BTreeSet::from([first.clone()]),
        (_, Some(first)) => first_author_affiliations(corpus, publication, first, level)
            .into_iter()
            .collect(),
    };
    let rp_entities: BTreeSet<String> = publication
        .reprint_entries
        .iter()
        .map(|r| entity_of_reprint(corpus, r, level))
        .collect();
    (fp_entities, rp_entities)
}

/// Tally FP/RP credits for every entity at the given level.
///
/// Per publication: the first byline author (or, at affiliation levels,
/// each distinct affiliation resolved for the first author) earns FP+1;
/// each distinct entity across the corresponding-author entries earns RP+1.
/// Credits are per-publication-distinct: one publication never grants an
/// entity more than one FP or more than one RP.
pub fn tally_credits(corpus: &Corpus, level: Level) -> (CreditLedger, Vec<Diagnostic>) {
    let mut entries: BTreeMap<String, Credit> = BTreeMap::new();
    let mut diags = Vec::new();
    let location = format!("tally/{level}");

    for p in &corpus.publications {
        if p.reprint_entries.is_empty() {
            diags.push(Diagnostic::warning(
                &location,
                format!(
                    "{}: no corresponding-author entry; publication contributes FP only",
                    p.id
                ),
            ));
        }

        let (fp_entities, rp_entities) = publication_credits(corpus, p, level);
        for entity in fp_entities {
            entries.entry(entity).or_default().fp += 1;
        }
        for entity in rp_entities {
            entries.entry(entity).or_default().rp += 1;
        }
    }

    (CreditLedger { level, entries }, diags)
}

/// Compute the Y-index for one entity from its credit pair.
pub fn compute_y_index(entity: impl Into<String>, fp: u32, rp: u32) -> Result<YIndex> {
    let entity = entity.into();
    if fp == 0 && rp == 0 {
        return Err(Error::UndefinedIndex { entity });
    }
    let h = if fp == 0 {
        FRAC_PI_2
    } else if rp == 0 {
        0.0
    } else {
        (f64::from(rp) / f64::from(fp)).atan()
    };
    let j = fp + rp;
    Ok(YIndex {
        entity,
        fp,
        rp,
        j,
        h,
        x: f64::from(j) * h.cos(),
        y: f64::from(j) * h.sin(),
    })
}

/// Rank entities passing the j cutoff: j descending, ties by rp descending,
/// then entity id ascending. The `UNKNOWN` bucket is excluded.
pub fn rank_entities(ledger: &CreditLedger, min_j: u32, inclusive: bool) -> Vec<YIndex> {
    let mut ranked: Vec<YIndex> = ledger
        .entries
        .iter()
        .filter(|(entity, credit)| entity.as_str() != UNKNOWN_ENTITY && credit.fp + credit.rp > 0)
        .map(|(entity, credit)| {
            compute_y_index(entity.clone(), credit.fp, credit.rp)
                .expect("fp + rp > 0 was just checked")
        })
        .filter(|y| if inclusive { y.j >= min_j } else { y.j > min_j })
        .collect();
    ranked.sort_by(|a, b| {
        b.j.cmp(&a.j)
            .then_with(|| b.rp.cmp(&a.rp))
            .then_with(|| a.entity.cmp(&b.entity))
    });
    ranked
}

/// Full or fractional productivity per entity.
///
/// Author level: full mode grants 1 per publication to each distinct byline
/// author, fractional grants 1/N on an N-author byline. Affiliation levels
/// resolve each author's affiliations (bracket-linked C1 entries, falling
/// back to the publication's unbracketed entries, then `UNKNOWN`); full
/// mode grants 1 to each distinct affiliation on the publication,
/// fractional splits each author's 1/N share equally across that author's
/// affiliations, so scores still sum to the publication count.
pub fn count_productivity(corpus: &Corpus, level: Level, mode: CountMode) -> BTreeMap<String, f64> {
    let mut scores: BTreeMap<String, f64> = BTreeMap::new();
    for p in &corpus.publications {
        let byline = corpus.canonical_byline(p);
        let n = byline.len();
        if n == 0 {
            continue;
        }
        match level {
            Level::Author => {
                let share = match mode {
                    CountMode::Full => 1.0,
                    CountMode::Fractional => 1.0 / n as f64,
                };
                for author in byline {
                    *scores.entry(author).or_insert(0.0) += share;
                }
            }
            Level::Institution | Level::Country => match mode {
                CountMode::Full => {
                    let mut on_publication: BTreeSet<String> = BTreeSet::new();
                    for author in &byline {
                        on_publication.extend(author_affiliations(corpus, p, author, level));
                    }
                    for entity in on_publication {
                        *scores.entry(entity).or_insert(0.0) += 1.0;
                    }
                }
                CountMode::Fractional => {
                    for author in &byline {
                        let affiliations = author_affiliations(corpus, p, author, level);
                        let share = 1.0 / (n as f64 * affiliations.len() as f64);
                        for entity in affiliations {
                            *scores.entry(entity).or_insert(0.0) += share;
                        }
                    }
                }
            },
        }
    }
    scores
}
