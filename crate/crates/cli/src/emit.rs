//! Artifact serialization. `run` and the stage subcommands both go through
//! these functions, so the same configuration yields byte-identical files
//! whichever path produced them.

use bibnet_core::conetwork::{CoNetwork, Layout, Partition};
use bibnet_core::corpus::{Stats, Timeline};
use bibnet_core::wos::Publication;
use bibnet_core::yindex::YIndex;
use bibnet_core::{Diagnostic, Level};
use serde::Serialize;

/// Pretty JSON with a trailing newline.
pub fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serialization");
    text.push('\n');
    text
}

pub fn publications_json(publications: &[Publication]) -> String {
    pretty_json(&publications)
}

pub fn corpus_summary_json(stats: &Stats, timeline: &Timeline) -> String {
    #[derive(Serialize)]
    struct Summary<'a> {
        stats: &'a Stats,
        timeline: &'a Timeline,
    }
    pretty_json(&Summary { stats, timeline })
}

fn csv_text(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    build(&mut writer).expect("artifact serialization");
    String::from_utf8(writer.into_inner().expect("artifact serialization"))
        .expect("csv output is UTF-8")
}

/// Ranked entities with their credit splits and chart coordinates.
/// Angles carry three decimals, coordinates four.
pub fn yindex_csv(level: Level, ranked: &[YIndex]) -> String {
    csv_text(|w| {
        w.write_record(["entity", "level", "fp", "rp", "j", "h", "x", "y"])?;
        for y in ranked {
            w.write_record([
                y.entity.as_str(),
                level.as_str(),
                &y.fp.to_string(),
                &y.rp.to_string(),
                &y.j.to_string(),
                &format!("{:.3}", y.h),
                &format!("{:.4}", y.x),
                &format!("{:.4}", y.y),
            ])?;
        }
        Ok(())
    })
}

/// Edge list in canonical order (each edge once, endpoints sorted).
pub fn edges_csv(network: &CoNetwork) -> String {
    csv_text(|w| {
        w.write_record(["source", "target", "weight"])?;
        for &(u, v, weight) in &network.edges {
            w.write_record([
                network.nodes[u].as_str(),
                network.nodes[v].as_str(),
                &weight.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn partition_csv(partition: &Partition) -> String {
    csv_text(|w| {
        w.write_record(["entity", "community"])?;
        for (entity, community) in &partition.assignment {
            w.write_record([entity.as_str(), &community.to_string()])?;
        }
        Ok(())
    })
}

/// Node coordinates at six decimals (layout space, not pixels).
pub fn layout_csv(layout: &Layout) -> String {
    csv_text(|w| {
        w.write_record(["entity", "x", "y"])?;
        for (entity, (x, y)) in &layout.positions {
            w.write_record([entity.as_str(), &format!("{x:.6}"), &format!("{y:.6}")])?;
        }
        Ok(())
    })
}

pub fn network_summary_json(
    level: Level,
    network: &CoNetwork,
    partition: &Partition,
    layout: &Layout,
) -> String {
    #[derive(Serialize)]
    struct NetworkSummary<'a> {
        level: &'a str,
        node_count: usize,
        edge_count: usize,
        total_edge_weight: u64,
        community_count: usize,
        modularity: f64,
        layout_stress: f64,
    }
    let communities: std::collections::BTreeSet<usize> =
        partition.assignment.values().copied().collect();
    pretty_json(&NetworkSummary {
        level: level.as_str(),
        node_count: network.nodes.len(),
        edge_count: network.edges.len(),
        total_edge_weight: network.edges.iter().map(|&(_, _, w)| u64::from(w)).sum(),
        community_count: communities.len(),
        modularity: partition.modularity,
        layout_stress: layout.stress,
    })
}

/// One line per diagnostic: `LEVEL<TAB>location<TAB>message`.
pub fn diagnostics_log(diagnostics: &[Diagnostic]) -> String {
    let mut out = String::new();
    for d in diagnostics {
        out.push_str(&d.to_string());
        out.push('\n');
    }
    out
}
