//! Stage orchestration. Each subcommand chains exactly the library stages
//! it needs; `run` executes all of them into one artifact directory. Every
//! file goes through `emit`, so a subcommand given the same configuration
//! as `run` reproduces the corresponding artifact byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use bibnet_core::conetwork::{
    build_network, kamada_kawai, louvain, network_degrees, CoNetwork, Layout, Partition,
};
use bibnet_core::corpus::{
    apply_exclusions, corpus_stats, disambiguate_authors, summarize_timeline,
};
use bibnet_core::diag::has_warnings;
use bibnet_core::homogeneity::{
    dominance, entity_regions, homogeneity_report, report_text, tolerance, ConfigEcho,
};
use bibnet_core::render::{render_network, render_polar, render_timeline, PlotSpec};
use bibnet_core::synth::{generate_corpus, SynthSpec};
use bibnet_core::tables::load_two_column;
use bibnet_core::wos::{parse_export, record_to_publication};
use bibnet_core::yindex::{rank_entities, tally_credits, YIndex};
use bibnet_core::{Corpus, Diagnostic, FilterConfig, Level, Publication, RegionMap, Thresholds};

use crate::args::{AnalysisArgs, Command, FilterArgs, InputArgs};
use crate::emit;

/// Timeline bin edges: five-year windows from 1991, closing at 2018.
const TIMELINE_BREAKPOINTS: [i32; 6] = [1991, 1996, 2001, 2006, 2011, 2018];

/// Layout convergence parameters used by every network stage.
const LAYOUT_TOLERANCE: f64 = 1e-7;
const LAYOUT_MAX_ITER: usize = 500;

pub fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Parse { inputs, out } => cmd_parse(&inputs, out.as_deref()),
        Command::Filter {
            inputs,
            filter,
            out,
        } => cmd_filter(&inputs, &filter, out.as_deref()),
        Command::Yindex {
            inputs,
            filter,
            level,
            min_j,
            exclusive,
            out,
        } => cmd_yindex(&inputs, &filter, level, min_j, exclusive, out.as_deref()),
        Command::Network {
            inputs,
            filter,
            level,
            min_edge_weight,
            seed,
            out,
        } => cmd_network(
            &inputs,
            &filter,
            level,
            min_edge_weight,
            seed,
            out.as_deref(),
        ),
        Command::Report {
            inputs,
            filter,
            analysis,
            out,
        } => cmd_report(&inputs, &filter, &analysis, out.as_deref()),
        Command::Render {
            inputs,
            filter,
            analysis,
            out,
        } => cmd_render(&inputs, &filter, &analysis, &out),
        Command::Synth { spec, out } => cmd_synth(&spec, out.as_deref()),
        Command::Run {
            inputs,
            filter,
            analysis,
            out,
        } => cmd_run(&inputs, &filter, &analysis, &out),
    }
}

// ---------------------------------------------------------------------------
// shared stages

fn ensure_exists(paths: &[&Path]) -> Result<()> {
    for path in paths {
        if !path.exists() {
            bail!("input path does not exist: {}", path.display());
        }
    }
    Ok(())
}

fn referenced_paths<'a>(
    inputs: &'a InputArgs,
    filter: Option<&'a FilterArgs>,
    analysis: Option<&'a AnalysisArgs>,
) -> Vec<&'a Path> {
    let mut paths: Vec<&Path> = inputs.inputs.iter().map(PathBuf::as_path).collect();
    if let Some(f) = filter {
        if let Some(p) = &f.author_overrides {
            paths.push(p);
        }
    }
    if let Some(a) = analysis {
        if let Some(p) = &a.region_map {
            paths.push(p);
        }
    }
    paths
}

fn load_publications(inputs: &[PathBuf], diags: &mut Vec<Diagnostic>) -> Result<Vec<Publication>> {
    let mut publications = Vec::new();
    for path in inputs {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let (records, mut file_diags) = parse_export(&text, &path.display().to_string())?;
        publications.extend(
            records
                .iter()
                .map(|record| record_to_publication(record, &mut file_diags)),
        );
        diags.append(&mut file_diags);
    }
    Ok(publications)
}

fn filter_config(args: &FilterArgs) -> FilterConfig {
    FilterConfig {
        min_citations: args.min_citations,
        exclude_anonymous: true,
        year_range: match (args.year_from, args.year_to) {
            (None, None) => None,
            (from, to) => Some((from.unwrap_or(i32::MIN), to.unwrap_or(i32::MAX))),
        },
    }
}

fn build_corpus(
    publications: Vec<Publication>,
    filter: &FilterConfig,
    overrides_path: Option<&Path>,
    diags: &mut Vec<Diagnostic>,
) -> Result<Corpus> {
    let (mut corpus, mut filter_diags) = apply_exclusions(publications, filter)?;
    diags.append(&mut filter_diags);
    let overrides = match overrides_path {
        Some(path) => load_two_column(path)?,
        None => Vec::new(),
    };
    let (author_map, mut merge_diags) = disambiguate_authors(&corpus, &overrides)?;
    diags.append(&mut merge_diags);
    corpus.apply_author_map(&author_map);
    Ok(corpus)
}

fn load_corpus(
    inputs: &InputArgs,
    filter: &FilterArgs,
    diags: &mut Vec<Diagnostic>,
) -> Result<Corpus> {
    let publications = load_publications(&inputs.inputs, diags)?;
    build_corpus(
        publications,
        &filter_config(filter),
        filter.author_overrides.as_deref(),
        diags,
    )
}

fn default_min_j(level: Level) -> u32 {
    match level {
        Level::Author => 5,
        Level::Institution | Level::Country => 7,
    }
}

/// Analysis parameters with defaults resolved and the region map loaded.
struct AnalysisConfig {
    seed: u64,
    region_map: RegionMap,
    region_map_source: String,
    min_edge_weight: u32,
    min_j_author: u32,
    min_j_institution: u32,
    min_j_country: u32,
    inclusive: bool,
    thresholds: Thresholds,
}

impl AnalysisConfig {
    fn resolve(args: &AnalysisArgs) -> Result<AnalysisConfig> {
        let (region_map, region_map_source) = match &args.region_map {
            Some(path) => (
                RegionMap::from_file(path)
                    .with_context(|| format!("loading region map {}", path.display()))?,
                path.display().to_string(),
            ),
            None => (RegionMap::builtin().clone(), "builtin".to_string()),
        };
        let thresholds = Thresholds {
            dominance_min: args.dominance_min,
            tolerance_max: args.tolerance_max,
        };
        thresholds.validate()?;
        Ok(AnalysisConfig {
            seed: args.seed,
            region_map,
            region_map_source,
            min_edge_weight: args.min_edge_weight,
            min_j_author: args
                .min_j_author
                .unwrap_or_else(|| default_min_j(Level::Author)),
            min_j_institution: args
                .min_j_institution
                .unwrap_or_else(|| default_min_j(Level::Institution)),
            min_j_country: args
                .min_j_country
                .unwrap_or_else(|| default_min_j(Level::Country)),
            inclusive: !args.exclusive,
            thresholds,
        })
    }

    fn min_j(&self, level: Level) -> u32 {
        match level {
            Level::Author => self.min_j_author,
            Level::Institution => self.min_j_institution,
            Level::Country => self.min_j_country,
        }
    }

    fn min_j_echo(&self) -> BTreeMap<String, u32> {
        Level::ALL
            .iter()
            .map(|&level| (level.to_string(), self.min_j(level)))
            .collect()
    }

    fn min_edge_weight_echo(&self) -> BTreeMap<String, u32> {
        Level::ALL
            .iter()
            .map(|&level| (level.to_string(), self.min_edge_weight))
            .collect()
    }

    fn config_echo(&self, filter: FilterConfig) -> ConfigEcho {
        ConfigEcho::new(
            filter,
            self.min_j_echo(),
            self.min_edge_weight_echo(),
            self.seed,
            self.region_map_source.clone(),
            &self.region_map,
            self.thresholds,
        )
    }
}

/// Everything one level's analysis produces.
struct LevelAnalysis {
    ranked: Vec<YIndex>,
    network: CoNetwork,
    partition: Partition,
    layout: Layout,
    degrees: BTreeMap<String, u64>,
}

fn analyze_level(
    corpus: &Corpus,
    level: Level,
    min_j: u32,
    inclusive: bool,
    min_edge_weight: u32,
    seed: u64,
    diags: &mut Vec<Diagnostic>,
) -> LevelAnalysis {
    let (ledger, mut tally_diags) = tally_credits(corpus, level);
    diags.append(&mut tally_diags);
    let ranked = rank_entities(&ledger, min_j, inclusive);
    let (network, mut network_diags) = build_network(corpus, level, min_edge_weight);
    diags.append(&mut network_diags);
    let partition = louvain(&network, seed);
    let layout = kamada_kawai(&network, seed, LAYOUT_TOLERANCE, LAYOUT_MAX_ITER);
    let degrees = network_degrees(&network);
    LevelAnalysis {
        ranked,
        network,
        partition,
        layout,
        degrees,
    }
}

// ---------------------------------------------------------------------------
// output plumbing

fn write_artifact(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, content).with_context(|| format!("writing {}", path.display()))
}

/// Write into the artifact directory, or to stdout when none is given.
fn deliver(out: Option<&Path>, name: &str, content: &str) -> Result<()> {
    match out {
        Some(dir) => write_artifact(dir, name, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn print_diagnostics(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{d}");
    }
}

// ---------------------------------------------------------------------------
// subcommands

fn cmd_parse(inputs: &InputArgs, out: Option<&Path>) -> Result<bool> {
    ensure_exists(&referenced_paths(inputs, None, None))?;
    let mut diags = Vec::new();
    let publications = load_publications(&inputs.inputs, &mut diags)?;
    deliver(out, "records.json", &emit::publications_json(&publications))?;
    print_diagnostics(&diags);
    Ok(has_warnings(&diags))
}

fn cmd_filter(inputs: &InputArgs, filter: &FilterArgs, out: Option<&Path>) -> Result<bool> {
    ensure_exists(&referenced_paths(inputs, Some(filter), None))?;
    let mut diags = Vec::new();
    let corpus = load_corpus(inputs, filter, &mut diags)?;
    let stats = corpus_stats(&corpus);
    let (timeline, mut timeline_diags) = summarize_timeline(&corpus, &TIMELINE_BREAKPOINTS)?;
    diags.append(&mut timeline_diags);
    let summary = emit::corpus_summary_json(&stats, &timeline);
    match out {
        Some(dir) => {
            write_artifact(
                dir,
                "publications.json",
                &emit::publications_json(&corpus.publications),
            )?;
            write_artifact(dir, "corpus_summary.json", &summary)?;
        }
        None => print!("{summary}"),
    }
    print_diagnostics(&diags);
    Ok(has_warnings(&diags))
}

fn cmd_yindex(
    inputs: &InputArgs,
    filter: &FilterArgs,
    level: Level,
    min_j: Option<u32>,
    exclusive: bool,
    out: Option<&Path>,
) -> Result<bool> {
    ensure_exists(&referenced_paths(inputs, Some(filter), None))?;
    let mut diags = Vec::new();
    let corpus = load_corpus(inputs, filter, &mut diags)?;
    let (ledger, mut tally_diags) = tally_credits(&corpus, level);
    diags.append(&mut tally_diags);
    let ranked = rank_entities(
        &ledger,
        min_j.unwrap_or_else(|| default_min_j(level)),
        !exclusive,
    );
    deliver(
        out,
        &format!("yindex_{level}.csv"),
        &emit::yindex_csv(level, &ranked),
    )?;
    print_diagnostics(&diags);
    Ok(has_warnings(&diags))
}

fn cmd_network(
    inputs: &InputArgs,
    filter: &FilterArgs,
    level: Level,
    min_edge_weight: u32,
    seed: u64,
    out: Option<&Path>,
) -> Result<bool> {
    ensure_exists(&referenced_paths(inputs, Some(filter), None))?;
    let mut diags = Vec::new();
    let corpus = load_corpus(inputs, filter, &mut diags)?;
    let (network, mut network_diags) = build_network(&corpus, level, min_edge_weight);
    diags.append(&mut network_diags);
    let partition = louvain(&network, seed);
    let layout = kamada_kawai(&network, seed, LAYOUT_TOLERANCE, LAYOUT_MAX_ITER);
    match out {
        Some(dir) => {
            write_artifact(
                dir,
                &format!("{level}_edges.csv"),
                &emit::edges_csv(&network),
            )?;
            write_artifact(
                dir,
                &format!("{level}_partition.csv"),
                &emit::partition_csv(&partition),
            )?;
            write_artifact(
                dir,
                &format!("{level}_layout.csv"),
                &emit::layout_csv(&layout),
            )?;
            write_artifact(
                dir,
                &format!("{level}_network_summary.json"),
                &emit::network_summary_json(level, &network, &partition, &layout),
            )?;
        }
        None => print!("{}", emit::edges_csv(&network)),
    }
    print_diagnostics(&diags);
    Ok(has_warnings(&diags))
}

fn cmd_report(
    inputs: &InputArgs,
    filter: &FilterArgs,
    analysis: &AnalysisArgs,
    out: Option<&Path>,
) -> Result<bool> {
    ensure_exists(&referenced_paths(inputs, Some(filter), Some(analysis)))?;
    let config = AnalysisConfig::resolve(analysis)?;
    let mut diags = Vec::new();
    let corpus = load_corpus(inputs, filter, &mut diags)?;

    let mut dominance_stats = Vec::new();
    let mut tolerance_stats = Vec::new();
    for level in Level::ALL {
        let result = analyze_level(
            &corpus,
            level,
            config.min_j(level),
            config.inclusive,
            config.min_edge_weight,
            config.seed,
            &mut diags,
        );
        let regions = entity_regions(&corpus, level, &config.region_map);
        dominance_stats.push(dominance(level, &result.ranked, &regions));
        tolerance_stats.push(tolerance(&result.network, &regions));
    }

    let (report, mut report_diags) = homogeneity_report(
        dominance_stats,
        tolerance_stats,
        config.config_echo(filter_config(filter)),
    );
    diags.append(&mut report_diags);
    let text = report_text(&report);
    match out {
        Some(dir) => {
            write_artifact(dir, "report.json", &emit::pretty_json(&report))?;
            write_artifact(dir, "report.txt", &text)?;
        }
        None => print!("{text}"),
    }
    print_diagnostics(&diags);
    Ok(has_warnings(&diags))
}

fn cmd_render(
    inputs: &InputArgs,
    filter: &FilterArgs,
    analysis: &AnalysisArgs,
    out: &Path,
) -> Result<bool> {
    ensure_exists(&referenced_paths(inputs, Some(filter), Some(analysis)))?;
    let config = AnalysisConfig::resolve(analysis)?;
    let mut diags = Vec::new();
    let corpus = load_corpus(inputs, filter, &mut diags)?;
    let plot = PlotSpec::default();

    for level in Level::ALL {
        let result = analyze_level(
            &corpus,
            level,
            config.min_j(level),
            config.inclusive,
            config.min_edge_weight,
            config.seed,
            &mut diags,
        );
        write_artifact(
            out,
            &format!("{level}_polar.svg"),
            &render_polar(&result.ranked, &plot),
        )?;
        write_artifact(
            out,
            &format!("{level}_network.svg"),
            &render_network(
                &result.network,
                &result.partition,
                &result.layout,
                &result.degrees,
                &plot,
            ),
        )?;
    }

    let (timeline, mut timeline_diags) = summarize_timeline(&corpus, &TIMELINE_BREAKPOINTS)?;
    diags.append(&mut timeline_diags);
    write_artifact(
        out,
        "timeline.svg",
        &render_timeline(&timeline.periods, &plot),
    )?;
    print_diagnostics(&diags);
    Ok(has_warnings(&diags))
}

fn cmd_synth(spec_path: &Path, out: Option<&Path>) -> Result<bool> {
    ensure_exists(&[spec_path])?;
    let text = fs::read_to_string(spec_path)
        .with_context(|| format!("reading {}", spec_path.display()))?;
    let spec: SynthSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing synth spec {}", spec_path.display()))?;
    let output = generate_corpus(&spec)?;
    match out {
        Some(dir) => {
            write_artifact(dir, "synthetic_export.txt", &output.export_text)?;
            write_artifact(
                dir,
                "ground_truth.json",
                &emit::pretty_json(&output.ground_truth),
            )?;
        }
        None => print!("{}", output.export_text),
    }
    print_diagnostics(&output.diagnostics);
    Ok(has_warnings(&output.diagnostics))
}

fn cmd_run(
    inputs: &InputArgs,
    filter: &FilterArgs,
    analysis: &AnalysisArgs,
    out: &Path,
) -> Result<bool> {
    ensure_exists(&referenced_paths(inputs, Some(filter), Some(analysis)))?;
    let config = AnalysisConfig::resolve(analysis)?;
    let plot = PlotSpec::default();
    let mut diags = Vec::new();

    let publications = load_publications(&inputs.inputs, &mut diags)?;
    write_artifact(out, "records.json", &emit::publications_json(&publications))?;

    let corpus = build_corpus(
        publications,
        &filter_config(filter),
        filter.author_overrides.as_deref(),
        &mut diags,
    )?;
    write_artifact(
        out,
        "publications.json",
        &emit::publications_json(&corpus.publications),
    )?;
    let stats = corpus_stats(&corpus);
    let (timeline, mut timeline_diags) = summarize_timeline(&corpus, &TIMELINE_BREAKPOINTS)?;
    diags.append(&mut timeline_diags);
    write_artifact(
        out,
        "corpus_summary.json",
        &emit::corpus_summary_json(&stats, &timeline),
    )?;

    let mut dominance_stats = Vec::new();
    let mut tolerance_stats = Vec::new();
    for level in Level::ALL {
        let result = analyze_level(
            &corpus,
            level,
            config.min_j(level),
            config.inclusive,
            config.min_edge_weight,
            config.seed,
            &mut diags,
        );
        write_artifact(
            out,
            &format!("yindex_{level}.csv"),
            &emit::yindex_csv(level, &result.ranked),
        )?;
        write_artifact(
            out,
            &format!("{level}_edges.csv"),
            &emit::edges_csv(&result.network),
        )?;
        write_artifact(
            out,
            &format!("{level}_partition.csv"),
            &emit::partition_csv(&result.partition),
        )?;
        write_artifact(
            out,
            &format!("{level}_layout.csv"),
            &emit::layout_csv(&result.layout),
        )?;
        write_artifact(
            out,
            &format!("{level}_network_summary.json"),
            &emit::network_summary_json(level, &result.network, &result.partition, &result.layout),
        )?;
        write_artifact(
            out,
            &format!("{level}_polar.svg"),
            &render_polar(&result.ranked, &plot),
        )?;
        write_artifact(
            out,
            &format!("{level}_network.svg"),
            &render_network(
                &result.network,
                &result.partition,
                &result.layout,
                &result.degrees,
                &plot,
            ),
        )?;

        let regions = entity_regions(&corpus, level, &config.region_map);
        dominance_stats.push(dominance(level, &result.ranked, &regions));
        tolerance_stats.push(tolerance(&result.network, &regions));
    }

    write_artifact(
        out,
        "timeline.svg",
        &render_timeline(&timeline.periods, &plot),
    )?;

    let (report, mut report_diags) = homogeneity_report(
        dominance_stats,
        tolerance_stats,
        config.config_echo(filter_config(filter)),
    );
    diags.append(&mut report_diags);
    write_artifact(out, "report.json", &emit::pretty_json(&report))?;
    write_artifact(out, "report.txt", &report_text(&report))?;

    write_artifact(out, "diagnostics.log", &emit::diagnostics_log(&diags))?;
    Ok(has_warnings(&diags))
}
