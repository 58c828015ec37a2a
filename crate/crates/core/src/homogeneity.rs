//! Regional concentration report: dominance of the leading region among
//! top-ranked entities and tolerance (cross-region linkage) inside the
//! collaboration networks, combined into a three-way verdict.
//!
//! Countries are classified into regions by a [`RegionMap`]; authors and
//! institutions inherit the region of the majority country across their
//! credited publications (tie-break: earliest publication year, then
//! lexicographic country). The verdict thresholds are artifact parameters,
//! not constants from any reference dataset, and are echoed in the report
//! so they cannot be mistaken for one.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conetwork::{publication_entities, CoNetwork};
use crate::corpus::{Corpus, FilterConfig};
use crate::diag::Diagnostic;
use crate::tables::{parse_two_column, DEFAULT_REGIONS};
use crate::wos::Publication;
use crate::yindex::{first_author_affiliations, publication_credits, YIndex, UNKNOWN_ENTITY};
use crate::{Error, Level, Result};

/// Region assigned to entities with no usable country evidence, and the
/// default for countries missing from a map without a `*` row.
pub const UNCLASSIFIED_REGION: &str = "unclassified";

/// Entities in this region (supranational bodies modeled as
/// pseudo-countries) are excluded from both sides of the cross-region
/// link fraction and counted separately.
pub const INTERNATIONAL_REGION: &str = "international";

/// Country → region classification. Total via `default_region`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionMap {
    pub mapping: BTreeMap<String, String>,
    pub default_region: String,
}

impl RegionMap {
    /// The built-in map: "Western" covers North America, Europe, Australia
    /// and New Zealand; every other country falls to "non-Western".
    pub fn builtin() -> &'static RegionMap {
        static BUILTIN: std::sync::OnceLock<RegionMap> = std::sync::OnceLock::new();
        BUILTIN.get_or_init(|| {
            RegionMap::from_text(DEFAULT_REGIONS, "builtin")
                .expect("built-in region table must parse")
        })
    }

    /// Parse `country<TAB>region` lines. A `*` country sets the default
    /// region; without one, unmapped countries are "unclassified".
    pub fn from_text(text: &str, label: &str) -> Result<RegionMap> {
        let mut mapping = BTreeMap::new();
        let mut default_region = UNCLASSIFIED_REGION.to_string();
        for (country, region) in parse_two_column(text, label)? {
            if country == "*" {
                default_region = region;
            } else {
                mapping.insert(country, region);
            }
        }
        Ok(RegionMap {
            mapping,
            default_region,
        })
    }

    pub fn from_file(path: &Path) -> Result<RegionMap> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        RegionMap::from_text(&text, &path.display().to_string())
    }

    pub fn classify<'a>(&'a self, country: &str) -> &'a str {
        self.mapping
            .get(country)
            .map_or(self.default_region.as_str(), String::as_str)
    }

    /// Hex SHA-256 over the canonicalized table (sorted rows plus the
    /// default row), independent of input row order and comments.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for (country, region) in &self.mapping {
            hasher.update(country.as_bytes());
            hasher.update(b"\t");
            hasher.update(region.as_bytes());
            hasher.update(b"\n");
        }
        hasher.update(b"*\t");
        hasher.update(self.default_region.as_bytes());
        hasher.update(b"\n");
        hex::encode(hasher.finalize())
    }
}

/// Classify a canonical country into its region.
pub fn classify_region(country: &str, region_map: &RegionMap) -> String {
    region_map.classify(country).to_string()
}

/// Country evidence one publication offers for an entity: the first
/// author's affiliation countries (author level) or the countries of the
/// addresses naming the institution (institution level), with unknowns
/// dropped.
fn evidence_countries(
    corpus: &Corpus,
    publication: &Publication,
    level: Level,
    entity: &str,
) -> BTreeSet<String> {
    let mut countries: BTreeSet<String> = match level {
        Level::Author => match corpus.canonical_byline(publication).first() {
            Some(first) => first_author_affiliations(corpus, publication, first, Level::Country)
                .into_iter()
                .collect(),
            None => BTreeSet::new(),
        },
        Level::Institution => {
            let from_addresses: BTreeSet<String> = publication
                .addresses
                .iter()
                .filter(|a| corpus.canonical_institution(&a.institution_raw) == entity)
                .map(|a| corpus.canonical_country(&a.country_raw))
                .collect();
            if from_addresses.is_empty() {
                publication
                    .reprint_entries
                    .iter()
                    .filter(|r| corpus.canonical_institution(&r.institution_raw) == entity)
                    .map(|r| corpus.canonical_country(&r.country_raw))
                    .collect()
            } else {
                from_addresses
            }
        }
        Level::Country => BTreeSet::from([entity.to_string()]),
    };
    countries.remove("");
    countries.remove(UNKNOWN_ENTITY);
    countries
}

#[derive(Default)]
struct CountryEvidence {
    /// country → number of supporting publications.
    counts: BTreeMap<String, usize>,
    /// country → earliest supporting publication year.
    earliest: BTreeMap<String, i32>,
}

impl CountryEvidence {
    fn add(&mut self, country: String, year: i32) {
        *self.counts.entry(country.clone()).or_insert(0) += 1;
        self.earliest
            .entry(country)
            .and_modify(|y| *y = (*y).min(year))
            .or_insert(year);
    }

    /// Majority country; ties broken by earliest supporting year, then
    /// lexicographically.
    fn winner(&self) -> Option<&str> {
        self.counts
            .iter()
            .map(|(country, &count)| (country, count, self.earliest[country]))
            .min_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)).then(a.0.cmp(b.0)))
            .map(|(country, _, _)| country.as_str())
    }
}

/// Assign a region to every entity appearing at the level.
///
/// Countries classify directly. Authors and institutions take the majority
/// country over their *credited* publications (first-author or
/// corresponding); entities with no credits fall back to all publications
/// they appear on; entities with no country evidence at all are
/// "unclassified".
pub fn entity_regions(
    corpus: &Corpus,
    level: Level,
    region_map: &RegionMap,
) -> BTreeMap<String, String> {
    if level == Level::Country {
        let mut regions = BTreeMap::new();
        for p in &corpus.publications {
            let mut countries: BTreeSet<String> = publication_entities(corpus, p, level);
            countries.extend(
                p.reprint_entries
                    .iter()
                    .map(|r| corpus.canonical_country(&r.country_raw)),
            );
            countries.remove("");
            countries.remove(UNKNOWN_ENTITY);
            for country in countries {
                let region = classify_region(&country, region_map);
                regions.insert(country, region);
            }
        }
        return regions;
    }

    let mut credited: BTreeMap<String, CountryEvidence> = BTreeMap::new();
    let mut appearing: BTreeMap<String, CountryEvidence> = BTreeMap::new();
    for p in &corpus.publications {
        // Missing years lose every earliest-year tie-break.
        let year = p.year.unwrap_or(i32::MAX);
        let (fp, rp) = publication_credits(corpus, p, level);
        let credited_here: BTreeSet<String> = fp.union(&rp).cloned().collect();
        for entity in credited_here {
            if entity == UNKNOWN_ENTITY {
                continue;
            }
            let evidence = credited.entry(entity.clone()).or_default();
            for country in evidence_countries(corpus, p, level, &entity) {
                evidence.add(country, year);
            }
        }
        for entity in publication_entities(corpus, p, level) {
            let evidence = appearing.entry(entity.clone()).or_default();
            for country in evidence_countries(corpus, p, level, &entity) {
                evidence.add(country, year);
            }
        }
    }

    let entities: BTreeSet<String> = credited.keys().chain(appearing.keys()).cloned().collect();
    entities
        .into_iter()
        .map(|entity| {
            let winner = credited
                .get(&entity)
                .and_then(CountryEvidence::winner)
                .or_else(|| appearing.get(&entity).and_then(CountryEvidence::winner));
            let region = match winner {
                Some(country) => classify_region(country, region_map),
                None => UNCLASSIFIED_REGION.to_string(),
            };
            (entity, region)
        })
        .collect()
}

/// One of the leading ranked entities, with its region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopEntity {
    pub entity: String,
    pub region: String,
    pub j: u32,
}

/// Concentration of ranked j-mass by region at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceStats {
    pub level: Level,
    /// region → its share of Σj over all ranked entities; sums to 1.
    pub shares: BTreeMap<String, f64>,
    /// region → number of entities among the top 5 / 10 / 20 ranked.
    pub top5: BTreeMap<String, usize>,
    pub top10: BTreeMap<String, usize>,
    pub top20: BTreeMap<String, usize>,
    /// The first (up to) 20 ranked entities with their regions.
    pub top_entities: Vec<TopEntity>,
    pub total_j_mass: u64,
    pub ranked_count: usize,
}

impl DominanceStats {
    /// The largest regional share; 0 when nothing is ranked.
    pub fn max_share(&self) -> f64 {
        self.shares.values().copied().fold(0.0, f64::max)
    }
}

fn region_of<'a>(entity_regions: &'a BTreeMap<String, String>, entity: &str) -> &'a str {
    entity_regions
        .get(entity)
        .map_or(UNCLASSIFIED_REGION, String::as_str)
}

/// Measure regional dominance over a ranked entity list (from
/// `rank_entities`, already sorted by j descending).
pub fn dominance(
    level: Level,
    ranked: &[YIndex],
    entity_regions: &BTreeMap<String, String>,
) -> DominanceStats {
    let mut j_mass: BTreeMap<String, u64> = BTreeMap::new();
    for entry in ranked {
        *j_mass
            .entry(region_of(entity_regions, &entry.entity).to_string())
            .or_insert(0) += u64::from(entry.j);
    }
    let total_j_mass: u64 = j_mass.values().sum();
    let shares: BTreeMap<String, f64> = if total_j_mass == 0 {
        BTreeMap::new()
    } else {
        j_mass
            .iter()
            .map(|(region, &mass)| (region.clone(), mass as f64 / total_j_mass as f64))
            .collect()
    };

    let top_counts = |k: usize| -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for entry in ranked.iter().take(k) {
            *counts
                .entry(region_of(entity_regions, &entry.entity).to_string())
                .or_insert(0) += 1;
        }
        counts
    };

    let top_entities: Vec<TopEntity> = ranked
        .iter()
        .take(20)
        .map(|entry| TopEntity {
            entity: entry.entity.clone(),
            region: region_of(entity_regions, &entry.entity).to_string(),
            j: entry.j,
        })
        .collect();

    DominanceStats {
        level,
        shares,
        top5: top_counts(5),
        top10: top_counts(10),
        top20: top_counts(20),
        top_entities,
        total_j_mass,
        ranked_count: ranked.len(),
    }
}

/// One edge joining entities of different regions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossEdge {
    pub a: String,
    pub region_a: String,
    pub b: String,
    pub region_b: String,
    pub weight: u32,
}

/// Cross-region linkage inside one collaboration network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceStats {
    pub level: Level,
    pub cross_region_edge_weight: u64,
    /// Total edge weight, excluding edges touching the international
    /// region.
    pub total_edge_weight: u64,
    /// cross/total; 0 when the network has no (non-international) edges.
    pub tolerance_fraction: f64,
    pub cross_link_count: usize,
    pub cross_edges: Vec<CrossEdge>,
    /// Weight and count of edges touching the international region,
    /// excluded from the fraction on both sides.
    pub international_edge_weight: u64,
    pub international_edge_count: usize,
}

/// Measure the cross-region share of a network's edge weight.
pub fn tolerance(network: &CoNetwork, entity_regions: &BTreeMap<String, String>) -> ToleranceStats {
    let mut cross_weight = 0u64;
    let mut total_weight = 0u64;
    let mut cross_edges = Vec::new();
    let mut international_weight = 0u64;
    let mut international_count = 0usize;
    for &(u, v, w) in &network.edges {
        let (a, b) = (network.nodes[u].as_str(), network.nodes[v].as_str());
        let (ra, rb) = (region_of(entity_regions, a), region_of(entity_regions, b));
        if ra == INTERNATIONAL_REGION || rb == INTERNATIONAL_REGION {
            international_weight += u64::from(w);
            international_count += 1;
            continue;
        }
        total_weight += u64::from(w);
        if ra != rb {
            cross_weight += u64::from(w);
            cross_edges.push(CrossEdge {
                a: a.to_string(),
                region_a: ra.to_string(),
                b: b.to_string(),
                region_b: rb.to_string(),
                weight: w,
            });
        }
    }
    ToleranceStats {
        level: network.level,
        cross_region_edge_weight: cross_weight,
        total_edge_weight: total_weight,
        tolerance_fraction: if total_weight == 0 {
            0.0
        } else {
            cross_weight as f64 / total_weight as f64
        },
        cross_link_count: cross_edges.len(),
        cross_edges,
        international_edge_weight: international_weight,
        international_edge_count: international_count,
    }
}

/// Verdict thresholds. These are artifact parameters — deliberately
/// surfaced in the CLI and echoed in the report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// A level counts as dominated when its max regional share is at least
    /// this.
    pub dominance_min: f64,
    /// A level counts as intolerant when its cross-region fraction is at
    /// most this.
    pub tolerance_max: f64,
}

impl Default for Thresholds {
    fn default() -> Thresholds {
        Thresholds {
            dominance_min: 0.8,
            tolerance_max: 0.1,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.dominance_min > 0.0 && self.dominance_min <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "dominance-min must be in (0, 1], got {}",
                self.dominance_min
            )));
        }
        if !(self.tolerance_max >= 0.0 && self.tolerance_max < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance-max must be in [0, 1), got {}",
                self.tolerance_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Homogeneous,
    Mixed,
    Heterogeneous,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Homogeneous => "homogeneous",
            Verdict::Mixed => "mixed",
            Verdict::Heterogeneous => "heterogeneous",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Pure verdict rule over the levels present in both stat sets:
/// homogeneous iff every level is dominated (max share ≥ dominance_min)
/// AND intolerant (fraction ≤ tolerance_max); heterogeneous iff every
/// level fails both; anything else is mixed.
pub fn verdict_from_stats(
    dominance: &[DominanceStats],
    tolerance: &[ToleranceStats],
    thresholds: Thresholds,
) -> Verdict {
    let tolerance_by_level: BTreeMap<Level, &ToleranceStats> =
        tolerance.iter().map(|t| (t.level, t)).collect();
    let pairs: Vec<(&DominanceStats, &ToleranceStats)> = dominance
        .iter()
        .filter_map(|d| tolerance_by_level.get(&d.level).map(|t| (d, *t)))
        .collect();
    if pairs.is_empty() {
        return Verdict::Mixed;
    }
    let all_homogeneous = pairs.iter().all(|(d, t)| {
        d.max_share() >= thresholds.dominance_min
            && t.tolerance_fraction <= thresholds.tolerance_max
    });
    let all_heterogeneous = pairs.iter().all(|(d, t)| {
        d.max_share() < thresholds.dominance_min && t.tolerance_fraction > thresholds.tolerance_max
    });
    if all_homogeneous {
        Verdict::Homogeneous
    } else if all_heterogeneous {
        Verdict::Heterogeneous
    } else {
        Verdict::Mixed
    }
}

/// Full configuration echoed into the report so a reader can reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub filter: FilterConfig,
    /// level name → ranking cutoff min-j.
    pub min_j: BTreeMap<String, u32>,
    /// level name → network edge-weight floor.
    pub min_edge_weight: BTreeMap<String, u32>,
    pub seed: u64,
    pub region_map_source: String,
    pub region_map_digest: String,
    pub region_map: BTreeMap<String, String>,
    pub default_region: String,
    pub thresholds: Thresholds,
}

impl ConfigEcho {
    pub fn new(
        filter: FilterConfig,
        min_j: BTreeMap<String, u32>,
        min_edge_weight: BTreeMap<String, u32>,
        seed: u64,
        region_map_source: impl Into<String>,
        region_map: &RegionMap,
        thresholds: Thresholds,
    ) -> ConfigEcho {
        ConfigEcho {
            filter,
            min_j,
            min_edge_weight,
            seed,
            region_map_source: region_map_source.into(),
            region_map_digest: region_map.digest(),
            region_map: region_map.mapping.clone(),
            default_region: region_map.default_region.clone(),
            thresholds,
        }
    }
}

/// The final report: per-level stats, configuration echo and verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub dominance: Vec<DominanceStats>,
    pub tolerance: Vec<ToleranceStats>,
    pub verdict: Verdict,
    pub config: ConfigEcho,
}

/// Assemble the report. Warns when a level is missing from either stat
/// set (the verdict then covers only the available levels) and when a
/// level has no ranked entities.
pub fn homogeneity_report(
    dominance: Vec<DominanceStats>,
    tolerance: Vec<ToleranceStats>,
    config: ConfigEcho,
) -> (HomogeneityReport, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    for level in Level::ALL {
        let in_dominance = dominance.iter().any(|d| d.level == level);
        let in_tolerance = tolerance.iter().any(|t| t.level == level);
        if !in_dominance || !in_tolerance {
            diags.push(Diagnostic::warning(
                "report",
                format!("verdict computed without the {level} level"),
            ));
        }
    }
    for d in &dominance {
        if d.ranked_count == 0 {
            diags.push(Diagnostic::warning(
                "report",
                format!(
                    "no entities pass the {} ranking cutoff; its shares are empty",
                    d.level
                ),
            ));
        }
    }
    let verdict = verdict_from_stats(&dominance, &tolerance, config.thresholds);
    (
        HomogeneityReport {
            dominance,
            tolerance,
            verdict,
            config,
        },
        diags,
    )
}

/// Human-readable summary of the report, deterministic for equal input.
pub fn report_text(report: &HomogeneityReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "verdict: {}", report.verdict);
    let _ = writeln!(
        out,
        "thresholds: dominance-min {:.4}, tolerance-max {:.4} (artifact parameters)",
        report.config.thresholds.dominance_min, report.config.thresholds.tolerance_max
    );
    let _ = writeln!(
        out,
        "region map: {} (digest {}, default region {})",
        report.config.region_map_source,
        &report.config.region_map_digest[..16.min(report.config.region_map_digest.len())],
        report.config.default_region
    );
    let min_edges: Vec<String> = report
        .config
        .min_edge_weight
        .iter()
        .map(|(level, w)| format!("{level} {w}"))
        .collect();
    let _ = writeln!(
        out,
        "filter: min citations {}, seed {}, min edge weight {}",
        report.config.filter.min_citations,
        report.config.seed,
        min_edges.join(", ")
    );
    for d in &report.dominance {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "[{}] ranked entities: {} (j mass {})",
            d.level, d.ranked_count, d.total_j_mass
        );
        for (region, share) in &d.shares {
            let _ = writeln!(out, "  share {region}: {share:.4}");
        }
        for (label, counts) in [("top5", &d.top5), ("top10", &d.top10), ("top20", &d.top20)] {
            let rendered: Vec<String> = counts.iter().map(|(r, c)| format!("{r} {c}")).collect();
            let _ = writeln!(out, "  {label}: {}", rendered.join(", "));
        }
        let leaders: Vec<String> = d
            .top_entities
            .iter()
            .take(5)
            .map(|t| format!("{} ({}, j {})", t.entity, t.region, t.j))
            .collect();
        if !leaders.is_empty() {
            let _ = writeln!(out, "  leaders: {}", leaders.join("; "));
        }
    }
    for t in &report.tolerance {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "[{}] tolerance: {:.4} (cross weight {} of {}, {} cross link(s))",
            t.level,
            t.tolerance_fraction,
            t.cross_region_edge_weight,
            t.total_edge_weight,
            t.cross_link_count
        );
        for edge in t.cross_edges.iter().take(10) {
            let _ = writeln!(
                out,
                "  cross: {} ({}) -- {} ({}) weight {}",
                edge.a, edge.region_a, edge.b, edge.region_b, edge.weight
            );
        }
        if t.international_edge_count > 0 {
            let _ = writeln!(
                out,
                "  international links excluded from the fraction: {} edge(s), weight {}",
                t.international_edge_count, t.international_edge_weight
            );
        }
    }
    out
}
