//! Seeded synthetic-corpus generator.
//!
//! Produces a tagged export with planted regional blocks, collaboration
//! groups, and known first/corresponding credit, together with the ground
//! truth needed to check a full analysis run against construction. The
//! generator always serializes to tagged text and parses that text back, so
//! every synthetic corpus exercises the same reader as a real export.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{apply_exclusions, disambiguate_authors, Corpus, FilterConfig};
use crate::diag::Diagnostic;
use crate::wos::{
    parse_export, record_to_publication, serialize_export, RawField, RawRecord, SourceSpan,
};
use crate::yindex::Credit;
use crate::{Error, Result};

/// Attempts to fill one co-author slot before leaving it empty (a smaller
/// team than drawn, never a duplicate byline entry).
const MAX_PICK_ATTEMPTS: usize = 32;

/// One block of authors that shares a label and a country pool. Countries
/// are assigned round-robin within the block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub label: String,
    pub n_authors: usize,
    pub countries: Vec<String>,
}

/// Planted collaboration groups. Group sizes partition the author
/// population in index order and may cut across region blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityStructure {
    /// Sizes of the planted groups; must sum to the total author count.
    pub group_sizes: Vec<usize>,
    /// Relative propensity of drawing a co-author from the home group.
    pub p_in: f64,
    /// Relative propensity of drawing a co-author from outside it.
    pub p_out: f64,
}

/// How the corresponding author of each publication is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrespondingPolicy {
    /// The byline leader is always corresponding.
    FirstAuthor,
    /// A uniform draw over the byline.
    RandomCoauthor,
}

/// Complete description of a synthetic corpus. Serializable so specs can
/// live in JSON files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_pubs: usize,
    pub regions: Vec<RegionSpec>,
    pub community_structure: CommunityStructure,
    /// Inclusive citation-count range.
    pub citation_range: (u32, u32),
    pub corresponding_policy: CorrespondingPolicy,
    /// Inclusive publication-year range.
    #[serde(default = "default_year_range")]
    pub year_range: (i32, i32),
    /// Inclusive byline-size range; slots that cannot be filled without
    /// duplicates are dropped.
    #[serde(default = "default_team_size_range")]
    pub team_size_range: (usize, usize),
}

fn default_year_range() -> (i32, i32) {
    (1991, 2017)
}

fn default_team_size_range() -> (usize, usize) {
    (1, 4)
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_pubs == 0 {
            return Err(Error::InvalidConfig(
                "synthetic spec needs n_pubs >= 1".into(),
            ));
        }
        if self.regions.is_empty() {
            return Err(Error::InvalidConfig(
                "synthetic spec needs at least one region block".into(),
            ));
        }
        for region in &self.regions {
            if region.n_authors == 0 {
                return Err(Error::InvalidConfig(format!(
                    "region '{}' has no authors",
                    region.label
                )));
            }
            if region.countries.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "region '{}' has an empty country pool",
                    region.label
                )));
            }
        }
        let total_authors: usize = self.regions.iter().map(|r| r.n_authors).sum();
        let structure = &self.community_structure;
        if structure.group_sizes.is_empty() || structure.group_sizes.contains(&0) {
            return Err(Error::InvalidConfig(
                "group sizes must be non-empty and positive".into(),
            ));
        }
        let grouped: usize = structure.group_sizes.iter().sum();
        if grouped != total_authors {
            return Err(Error::InvalidConfig(format!(
                "group sizes sum to {grouped} but the regions define {total_authors} authors"
            )));
        }
        for (name, p) in [("p_in", structure.p_in), ("p_out", structure.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {p} is outside [0, 1]"
                )));
            }
        }
        if self.citation_range.0 > self.citation_range.1 {
            return Err(Error::InvalidConfig(format!(
                "citation range {:?} is reversed",
                self.citation_range
            )));
        }
        if self.year_range.0 > self.year_range.1 {
            return Err(Error::InvalidConfig(format!(
                "year range {:?} is reversed",
                self.year_range
            )));
        }
        if self.team_size_range.0 == 0 || self.team_size_range.0 > self.team_size_range.1 {
            return Err(Error::InvalidConfig(format!(
                "team size range {:?} must satisfy 1 <= min <= max",
                self.team_size_range
            )));
        }
        Ok(())
    }
}

/// What the generator actually planted, keyed by canonical entity names so
/// the maps compare directly against analysis output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Canonical author key → planted region label.
    pub author_region: BTreeMap<String, String>,
    /// Canonical author key → planted group index.
    pub author_community: BTreeMap<String, usize>,
    /// Canonical author key → canonical country.
    pub author_country: BTreeMap<String, String>,
    /// Unordered byline pairs whose authors sit in different region blocks.
    pub cross_region_pairs: u64,
    /// All unordered byline pairs across the corpus.
    pub total_pairs: u64,
    /// `cross_region_pairs / total_pairs` (0 when there are no pairs).
    pub realized_cross_fraction: f64,
    /// True first/corresponding credit per canonical author key.
    pub author_credits: BTreeMap<String, Credit>,
    /// True credit per canonical institution.
    pub institution_credits: BTreeMap<String, Credit>,
    /// True credit per canonical country.
    pub country_credits: BTreeMap<String, Credit>,
}

/// A generated corpus with its tagged source text and construction record.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    /// The tagged export exactly as written (and re-parsed).
    pub export_text: String,
    /// The corpus built by parsing `export_text` back with no citation floor.
    pub corpus: Corpus,
    pub ground_truth: GroundTruth,
    pub diagnostics: Vec<Diagnostic>,
}

/// One synthetic author with every raw string derived from the index.
struct SynthAuthor {
    region: usize,
    group: usize,
    country: String,
    last_name: String,
    initials: (char, char),
}

impl SynthAuthor {
    fn short_name(&self) -> String {
        format!("{}, {}{}", self.last_name, self.initials.0, self.initials.1)
    }

    fn full_name(&self) -> String {
        format!(
            "{}, {}. {}.",
            self.last_name, self.initials.0, self.initials.1
        )
    }

    fn institution(&self) -> String {
        format!("{} Univ", self.last_name)
    }

    fn address(&self) -> String {
        format!(
            "[{}] {}, Metropolis, {}.",
            self.full_name(),
            self.institution(),
            self.country
        )
    }
}

fn build_authors(spec: &SynthSpec) -> Vec<SynthAuthor> {
    let mut authors = Vec::new();
    for (region_idx, region) in spec.regions.iter().enumerate() {
        for within in 0..region.n_authors {
            let idx = authors.len();
            authors.push(SynthAuthor {
                region: region_idx,
                group: 0, // assigned below once all indices exist
                country: region.countries[within % region.countries.len()].clone(),
                last_name: format!("Author{idx:04}"),
                initials: (letter(idx % 26), letter((idx / 26) % 26)),
            });
        }
    }
    let mut next = 0usize;
    for (group_idx, &size) in spec.community_structure.group_sizes.iter().enumerate() {
        for author in authors.iter_mut().skip(next).take(size) {
            author.group = group_idx;
        }
        next += size;
    }
    authors
}

fn letter(i: usize) -> char {
    (b'A' + i as u8) as char
}

/// Byline plan for one publication, in byline order.
struct PubPlan {
    byline: Vec<usize>,
    corresponding: usize,
}

/// Generate the corpus described by `spec`.
///
/// The same seed always yields byte-identical export text. The returned
/// corpus keeps every generated publication (no citation floor), and the
/// ground truth records planted structure plus the realized cross-region
/// collaboration fraction traced during generation.
pub fn generate_corpus(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let authors = build_authors(spec);
    let n_groups = spec.community_structure.group_sizes.len();

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
    let mut outsiders: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
    for (idx, author) in authors.iter().enumerate() {
        members[author.group].push(idx);
        for (group, pool) in outsiders.iter_mut().enumerate() {
            if group != author.group {
                pool.push(idx);
            }
        }
    }

    let propensity = spec.community_structure.p_in + spec.community_structure.p_out;
    let cross_prob = if propensity > 0.0 {
        spec.community_structure.p_out / propensity
    } else {
        0.0
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut plans = Vec::with_capacity(spec.n_pubs);
    let mut records = Vec::with_capacity(spec.n_pubs);
    let mut cross_region_pairs = 0u64;
    let mut total_pairs = 0u64;

    for pub_idx in 0..spec.n_pubs {
        let team_size = rng.gen_range(spec.team_size_range.0..=spec.team_size_range.1);
        let home = rng.gen_range(0..n_groups);
        let first = members[home][rng.gen_range(0..members[home].len())];

        let mut chosen: BTreeSet<usize> = BTreeSet::new();
        chosen.insert(first);
        let mut rest = Vec::new();
        for _slot in 1..team_size {
            for _attempt in 0..MAX_PICK_ATTEMPTS {
                let pool = if rng.gen_bool(cross_prob) {
                    &outsiders[home]
                } else {
                    &members[home]
                };
                if pool.is_empty() {
                    continue;
                }
                let candidate = pool[rng.gen_range(0..pool.len())];
                if chosen.insert(candidate) {
                    rest.push(candidate);
                    break;
                }
            }
        }
        rest.sort_unstable();

        let mut byline = Vec::with_capacity(1 + rest.len());
        byline.push(first);
        byline.extend(rest);

        let corresponding = match spec.corresponding_policy {
            CorrespondingPolicy::FirstAuthor => first,
            CorrespondingPolicy::RandomCoauthor => byline[rng.gen_range(0..byline.len())],
        };
        let year = rng.gen_range(spec.year_range.0..=spec.year_range.1);
        let citations = rng.gen_range(spec.citation_range.0..=spec.citation_range.1);

        for i in 0..byline.len() {
            for j in i + 1..byline.len() {
                total_pairs += 1;
                if authors[byline[i]].region != authors[byline[j]].region {
                    cross_region_pairs += 1;
                }
            }
        }

        records.push(build_record(
            &authors,
            pub_idx,
            &byline,
            corresponding,
            year,
            citations,
        ));
        plans.push(PubPlan {
            byline,
            corresponding,
        });
    }

    let export_text = serialize_export(&records);

    let (parsed, mut diagnostics) = parse_export(&export_text, "synthetic")?;
    let publications: Vec<_> = parsed
        .iter()
        .map(|record| record_to_publication(record, &mut diagnostics))
        .collect();
    let keep_all = FilterConfig {
        min_citations: 0,
        exclude_anonymous: true,
        year_range: None,
    };
    let (mut corpus, filter_diags) = apply_exclusions(publications, &keep_all)?;
    diagnostics.extend(filter_diags);
    let (author_map, disamb_diags) = disambiguate_authors(&corpus, &[])?;
    diagnostics.extend(disamb_diags);
    corpus.apply_author_map(&author_map);

    let ground_truth = build_ground_truth(
        spec,
        &corpus,
        &authors,
        &plans,
        cross_region_pairs,
        total_pairs,
    );

    Ok(SynthOutput {
        export_text,
        corpus,
        ground_truth,
        diagnostics,
    })
}

fn build_record(
    authors: &[SynthAuthor],
    pub_idx: usize,
    byline: &[usize],
    corresponding: usize,
    year: i32,
    citations: u32,
) -> RawRecord {
    let mut fields = Vec::new();
    if pub_idx == 0 {
        fields.push(field("FN", vec!["Synthetic Tagged Export".into()]));
        fields.push(field("VR", vec!["1.0".into()]));
    }
    fields.push(field("PT", vec!["J".into()]));
    fields.push(field(
        "AU",
        byline.iter().map(|&i| authors[i].short_name()).collect(),
    ));
    fields.push(field(
        "AF",
        byline.iter().map(|&i| authors[i].full_name()).collect(),
    ));
    fields.push(field(
        "TI",
        vec![format!(
            "Collaborative dynamics in synthetic corpora, study {pub_idx:04}"
        )],
    ));
    fields.push(field("SO", vec!["JOURNAL OF SYNTHETIC RESEARCH".into()]));
    fields.push(field("LA", vec!["English".into()]));
    fields.push(field("DT", vec!["Article".into()]));
    fields.push(field(
        "C1",
        byline.iter().map(|&i| authors[i].address()).collect(),
    ));
    let reprint = &authors[corresponding];
    fields.push(field(
        "RP",
        vec![format!(
            "{} (corresponding author), {}, Metropolis, {}.",
            reprint.short_name(),
            reprint.institution(),
            reprint.country
        )],
    ));
    fields.push(field("TC", vec![citations.to_string()]));
    fields.push(field("PY", vec![year.to_string()]));
    fields.push(field("UT", vec![format!("WOS:SYN{pub_idx:010}")]));
    RawRecord {
        fields,
        source_file: "synthetic".into(),
        source_span: SourceSpan {
            first_line: 0,
            last_line: 0,
        },
    }
}

fn field(tag: &str, lines: Vec<String>) -> RawField {
    RawField {
        tag: tag.into(),
        lines,
    }
}

fn build_ground_truth(
    spec: &SynthSpec,
    corpus: &Corpus,
    authors: &[SynthAuthor],
    plans: &[PubPlan],
    cross_region_pairs: u64,
    total_pairs: u64,
) -> GroundTruth {
    let keys: Vec<String> = authors
        .iter()
        .map(|a| corpus.canonical_author(&a.short_name()))
        .collect();
    let institutions: Vec<String> = authors
        .iter()
        .map(|a| corpus.canonical_institution(&a.institution()))
        .collect();
    let countries: Vec<String> = authors
        .iter()
        .map(|a| corpus.canonical_country(&a.country))
        .collect();

    let mut author_region = BTreeMap::new();
    let mut author_community = BTreeMap::new();
    let mut author_country = BTreeMap::new();
    for (idx, author) in authors.iter().enumerate() {
        author_region.insert(keys[idx].clone(), spec.regions[author.region].label.clone());
        author_community.insert(keys[idx].clone(), author.group);
        author_country.insert(keys[idx].clone(), countries[idx].clone());
    }

    let mut author_credits: BTreeMap<String, Credit> = BTreeMap::new();
    let mut institution_credits: BTreeMap<String, Credit> = BTreeMap::new();
    let mut country_credits: BTreeMap<String, Credit> = BTreeMap::new();
    for plan in plans {
        let first = plan.byline[0];
        author_credits.entry(keys[first].clone()).or_default().fp += 1;
        author_credits
            .entry(keys[plan.corresponding].clone())
            .or_default()
            .rp += 1;
        institution_credits
            .entry(institutions[first].clone())
            .or_default()
            .fp += 1;
        institution_credits
            .entry(institutions[plan.corresponding].clone())
            .or_default()
            .rp += 1;
        country_credits
            .entry(countries[first].clone())
            .or_default()
            .fp += 1;
        country_credits
            .entry(countries[plan.corresponding].clone())
            .or_default()
            .rp += 1;
    }

    let realized_cross_fraction = if total_pairs == 0 {
        0.0
    } else {
        cross_region_pairs as f64 / total_pairs as f64
    };

    GroundTruth {
        author_region,
        author_community,
        author_country,
        cross_region_pairs,
        total_pairs,
        realized_cross_fraction,
        author_credits,
        institution_credits,
        country_credits,
    }
}
