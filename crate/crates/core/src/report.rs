//! CSV and Markdown rendering of benchmark records.

use std::fmt::Write;

use crate::bench::{size_label, BenchRecord};
use crate::pipeline::Strategy;

pub const CSV_HEADER: &str =
    "size,pipeline,strategy,ms_median,ms_min,ms_max,conv_mul,conv_add,filt_mul,filt_add,M,speedup";

/// Ordered benchmark records with derived speedups and rankings.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    records: Vec<BenchRecord>,
}

impl BenchReport {
    pub fn new(records: Vec<BenchRecord>) -> Self {
        Self { records }
    }

    pub fn records(&self) -> &[BenchRecord] {
        &self.records
    }

    /// Sizes in first-seen order.
    pub fn sizes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in &self.records {
            if !out.contains(&r.size) {
                out.push(r.size);
            }
        }
        out
    }

    /// Pipeline labels in first-seen order.
    pub fn pipelines(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.pipeline.as_str()) {
                out.push(&r.pipeline);
            }
        }
        out
    }

    pub fn find(
        &self,
        size: (usize, usize),
        pipeline: &str,
        strategy: Strategy,
    ) -> Option<&BenchRecord> {
        self.records
            .iter()
            .find(|r| r.size == size && r.pipeline == pipeline && r.strategy == strategy)
    }

    /// Convert-first median over downsample-first median, when both are timed.
    pub fn speedup(&self, size: (usize, usize), pipeline: &str) -> Option<f64> {
        let cf = self
            .find(size, pipeline, Strategy::ConvertFirst)?
            .timing
            .median_ms;
        let df = self
            .find(size, pipeline, Strategy::DownsampleFirst)?
            .timing
            .median_ms;
        (cf > 0.0 && df > 0.0).then(|| cf / df)
    }

    /// Pipelines fastest first for one size and strategy. Pipelines with equal
    /// medians share a group, in configured order.
    pub fn ranking(&self, size: (usize, usize), strategy: Strategy) -> Vec<Vec<String>> {
        let mut rows: Vec<&BenchRecord> = self
            .records
            .iter()
            .filter(|r| r.size == size && r.strategy == strategy)
            .collect();
        rows.sort_by(|a, b| a.timing.median_ms.total_cmp(&b.timing.median_ms));
        let mut groups: Vec<(f64, Vec<String>)> = Vec::new();
        for r in rows {
            match groups.last_mut() {
                Some((ms, names)) if *ms == r.timing.median_ms => names.push(r.pipeline.clone()),
                _ => groups.push((r.timing.median_ms, vec![r.pipeline.clone()])),
            }
        }
        groups.into_iter().map(|(_, names)| names).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let speedup = self
                .speedup(r.size, &r.pipeline)
                .map(|s| format!("{s:.4}"))
                .unwrap_or_default();
            let c = &r.counters;
            writeln!(
                out,
                "{},{},{},{:.3},{:.3},{:.3},{},{},{},{},{},{}",
                size_label(r.size),
                r.pipeline,
                r.strategy,
                r.timing.median_ms,
                r.timing.min_ms,
                r.timing.max_ms,
                c.conversion.multiplies,
                c.conversion.adds,
                c.filtering.multiplies,
                c.filtering.adds,
                r.factor,
                speedup
            )
            .unwrap();
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let sizes = self.sizes();
        let pipelines = self.pipelines();
        let mut out = String::new();

        out.push_str("## Run time (ms, median)\n\n");
        out.push_str("Faster strategy per size marked with `*`.\n\n| Pipeline |");
        for &s in &sizes {
            write!(
                out,
                " {} convert-first | {} downsample-first |",
                size_label(s),
                size_label(s)
            )
            .unwrap();
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(2 * sizes.len()));
        out.push('\n');
        for &p in &pipelines {
            write!(out, "| {p} |").unwrap();
            for &s in &sizes {
                let cf = self
                    .find(s, p, Strategy::ConvertFirst)
                    .map(|r| r.timing.median_ms);
                let df = self
                    .find(s, p, Strategy::DownsampleFirst)
                    .map(|r| r.timing.median_ms);
                for (mine, other) in [(cf, df), (df, cf)] {
                    match mine {
                        Some(ms) => {
                            let star = if other.is_some_and(|o| ms < o) {
                                "*"
                            } else {
                                ""
                            };
                            write!(out, " {ms:.2}{star} |").unwrap();
                        }
                        None => out.push_str(" - |"),
                    }
                }
            }
            out.push('\n');
        }

        out.push_str("\n## Operation counts (one image)\n\n");
        out.push_str("| Size | Pipeline | M | conv mul (CF) | conv mul (DF) | conv ratio | filt add (CF) | filt add (DF) | speedup |\n");
        out.push_str("|---|---|---:|---:|---:|---:|---:|---:|---:|\n");
        for &s in &sizes {
            for &p in &pipelines {
                let (Some(cf), Some(df)) = (
                    self.find(s, p, Strategy::ConvertFirst),
                    self.find(s, p, Strategy::DownsampleFirst),
                ) else {
                    continue;
                };
                let (a, b) = (
                    cf.counters.conversion.multiplies,
                    df.counters.conversion.multiplies,
                );
                let ratio = format_ratio(a, b);
                let speedup = self
                    .speedup(s, p)
                    .map(|x| format!("{x:.2}x"))
                    .unwrap_or_else(|| "-".into());
                writeln!(
                    out,
                    "| {} | {p} | {} | {a} | {b} | {ratio} | {} | {} | {speedup} |",
                    size_label(s),
                    cf.factor,
                    cf.counters.filtering.adds,
                    df.counters.filtering.adds,
                )
                .unwrap();
            }
        }

        out.push_str("\n## Ranking (fastest first, convert-first => downsample-first)\n\n");
        for (i, &s) in sizes.iter().enumerate() {
            let before = format_ranking(&self.ranking(s, Strategy::ConvertFirst));
            let after = format_ranking(&self.ranking(s, Strategy::DownsampleFirst));
            if before == after {
                writeln!(out, "{}. {}: {before} (no change)", i + 1, size_label(s)).unwrap();
            } else {
                writeln!(out, "{}. {}: {before} ⇒ {after}", i + 1, size_label(s)).unwrap();
            }
        }
        out
    }
}

fn format_ranking(groups: &[Vec<String>]) -> String {
    groups
        .iter()
        .map(|g| g.join("/"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn format_ratio(a: u64, b: u64) -> String {
    if b == 0 {
        "-".into()
    } else if a.is_multiple_of(b) {
        (a / b).to_string()
    } else {
        format!("{:.3}", a as f64 / b as f64)
    }
}
