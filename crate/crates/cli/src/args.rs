//! Command-line surface: subcommands mirror the pipeline stages, shared
//! flag groups keep `run` and the stage subcommands configured identically.

use std::path::PathBuf;

use bibnet_core::Level;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "bibnet",
    version,
    about = "Bibliometric corpus analysis: credit indices, co-authorship networks, regional-concentration reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Input export files.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// Tagged export files to analyze.
    #[arg(required = true, value_name = "FILE")]
    pub inputs: Vec<PathBuf>,
}

/// Corpus exclusion criteria and author-merge overrides.
#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Citation floor: keep publications cited at least this many times.
    #[arg(long, default_value_t = 100, value_name = "N")]
    pub min_citations: u32,

    /// Keep only publications from this year onward.
    #[arg(long, value_name = "YEAR")]
    pub year_from: Option<i32>,

    /// Keep only publications up to and including this year.
    #[arg(long, value_name = "YEAR")]
    pub year_to: Option<i32>,

    /// Two-column author-merge file: raw name<TAB>name to merge into.
    #[arg(long, value_name = "PATH")]
    pub author_overrides: Option<PathBuf>,
}

/// Network, ranking, and verdict parameters shared by the analysis stages.
#[derive(Debug, Args)]
pub struct AnalysisArgs {
    /// Seed for community detection and layout.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Two-column country→region file (optional `*` row sets the default
    /// region); the built-in Western/non-Western map when omitted.
    #[arg(long, value_name = "PATH")]
    pub region_map: Option<PathBuf>,

    /// Drop co-authorship edges below this joint-publication count.
    #[arg(long, default_value_t = 2, value_name = "N")]
    pub min_edge_weight: u32,

    /// Ranking cutoff for authors [default: 5].
    #[arg(long, value_name = "N")]
    pub min_j_author: Option<u32>,

    /// Ranking cutoff for institutions [default: 7].
    #[arg(long, value_name = "N")]
    pub min_j_institution: Option<u32>,

    /// Ranking cutoff for countries [default: 7].
    #[arg(long, value_name = "N")]
    pub min_j_country: Option<u32>,

    /// Apply the ranking cutoff strictly (j > N instead of j >= N).
    #[arg(long)]
    pub exclusive: bool,

    /// Verdict: minimum leading-region credit share for a homogeneous call.
    #[arg(long, default_value_t = 0.8, value_name = "X")]
    pub dominance_min: f64,

    /// Verdict: maximum cross-region collaboration fraction.
    #[arg(long, default_value_t = 0.1, value_name = "X")]
    pub tolerance_max: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate tagged exports and dump the normalized records.
    Parse {
        #[command(flatten)]
        inputs: InputArgs,
        /// Write records.json into this directory instead of stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },

    /// Apply the exclusion criteria and summarize the retained corpus.
    Filter {
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        filter: FilterArgs,
        /// Write publications.json and corpus_summary.json into this
        /// directory instead of printing the summary to stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },

    /// Rank entities at one level by first/corresponding credit.
    Yindex {
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        filter: FilterArgs,
        /// Analysis level: author, institution, or country.
        #[arg(long)]
        level: Level,
        /// Ranking cutoff [defaults: author 5, institution 7, country 7].
        #[arg(long, value_name = "N")]
        min_j: Option<u32>,
        /// Apply the cutoff strictly (j > N instead of j >= N).
        #[arg(long)]
        exclusive: bool,
        /// Write the ranking CSV into this directory instead of stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },

    /// Build the co-authorship network at one level: edges, communities,
    /// layout, and a summary.
    Network {
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        filter: FilterArgs,
        /// Analysis level: author, institution, or country.
        #[arg(long)]
        level: Level,
        /// Drop edges below this joint-publication count.
        #[arg(long, default_value_t = 2, value_name = "N")]
        min_edge_weight: u32,
        /// Seed for community detection and layout.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the network artifact files into this directory instead of
        /// printing the edge list to stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },

    /// Produce the regional-concentration report with its verdict.
    Report {
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        filter: FilterArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Write report.json and report.txt into this directory instead of
        /// printing the text report to stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },

    /// Draw the credit charts, network diagrams, and timeline as SVG.
    Render {
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        filter: FilterArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Directory for the SVG files.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },

    /// Generate a seeded synthetic corpus from a JSON description.
    Synth {
        /// JSON file describing the corpus to generate.
        #[arg(long, value_name = "PATH")]
        spec: PathBuf,
        /// Write synthetic_export.txt and ground_truth.json into this
        /// directory instead of printing the export to stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },

    /// Run the full pipeline and write every artifact.
    Run {
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        filter: FilterArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Directory for the artifact files.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}
