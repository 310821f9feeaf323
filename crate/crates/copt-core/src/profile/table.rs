//! Hotspot table derivation and rendering.

use std::collections::HashMap;

use super::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableGroupBy {
    Function,
    Location,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventCell {
    pub samples: u64,
    pub percent: f64,
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HotspotRow {
    pub scope: String,
    pub cells: Vec<EventCell>,
    pub cpi: Option<f64>,
    pub process_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HotspotTable {
    pub events: Vec<EventSpec>,
    pub rows: Vec<HotspotRow>,
}

/// Aggregate a run into ranked rows. Percentages always refer to the full
/// per-event totals; `top` truncates afterwards. Rows are ordered by clock
/// samples, descending, ties broken by scope name.
pub fn hotspot_table(
    run: &SamplingRun,
    group_by: TableGroupBy,
    top: Option<usize>,
) -> HotspotTable {
    let scope_of = |r: &SampleRecord| match group_by {
        TableGroupBy::Function => r.function.clone(),
        TableGroupBy::Location => r.location.clone(),
    };

    let mut scopes: Vec<String> = Vec::new();
    let mut samples: HashMap<(String, String), u64> = HashMap::new();
    let mut totals: HashMap<&str, u64> = HashMap::new();
    for r in &run.records {
        let scope = scope_of(r);
        if !scopes.contains(&scope) {
            scopes.push(scope.clone());
        }
        *samples.entry((scope, r.event.clone())).or_insert(0) += r.samples;
        let spec = run
            .events
            .iter()
            .find(|e| e.name == r.event)
            .expect("validated by parse");
        *totals.entry(spec.name.as_str()).or_insert(0) += r.samples;
    }

    let clock = run.events.iter().find(|e| e.role == EventRole::Clock);
    let instr = run.events.iter().find(|e| e.role == EventRole::Instruction);
    let clock_total_events: u64 = clock
        .map(|c| {
            event_count(
                totals.get(c.name.as_str()).copied().unwrap_or(0),
                c.sample_after_value,
            )
        })
        .unwrap_or(0);

    let mut rows: Vec<HotspotRow> = scopes
        .into_iter()
        .map(|scope| {
            let cells: Vec<EventCell> = run
                .events
                .iter()
                .map(|e| {
                    let s = samples
                        .get(&(scope.clone(), e.name.clone()))
                        .copied()
                        .unwrap_or(0);
                    let total = totals.get(e.name.as_str()).copied().unwrap_or(0);
                    let percent = if total == 0 {
                        0.0
                    } else {
                        event_percent(s, total).unwrap()
                    };
                    EventCell {
                        samples: s,
                        percent,
                        events: event_count(s, e.sample_after_value),
                    }
                })
                .collect();
            let row_events = |spec: Option<&EventSpec>| -> Option<u64> {
                spec.map(|e| {
                    let idx = run.events.iter().position(|x| x.name == e.name).unwrap();
                    cells[idx].events
                })
            };
            let cpi_val = match (row_events(clock), row_events(instr)) {
                (Some(c), Some(i)) if i > 0 => Some(cpi(c, i).unwrap().ratio),
                _ => None,
            };
            let process_share = match row_events(clock) {
                Some(c) if clock_total_events > 0 => {
                    Some(round_to(c as f64 * 100.0 / clock_total_events as f64, 2))
                }
                _ => None,
            };
            HotspotRow {
                scope,
                cells,
                cpi: cpi_val,
                process_share,
            }
        })
        .collect();

    let rank_index = clock
        .and_then(|c| run.events.iter().position(|e| e.name == c.name))
        .unwrap_or(0);
    rows.sort_by(|a, b| {
        let sa = a.cells.get(rank_index).map(|c| c.samples).unwrap_or(0);
        let sb = b.cells.get(rank_index).map(|c| c.samples).unwrap_or(0);
        sb.cmp(&sa).then_with(|| a.scope.cmp(&b.scope))
    });
    if let Some(n) = top {
        rows.truncate(n);
    }
    HotspotTable {
        events: run.events.clone(),
        rows,
    }
}

impl HotspotTable {
    fn header(&self) -> Vec<String> {
        let mut cols = vec!["scope".to_string()];
        for e in &self.events {
            cols.push(format!("{} samples", e.name));
            cols.push(format!("{} %", e.name));
            cols.push(format!("{} events", e.name));
        }
        cols.push("CPI".to_string());
        cols.push("process %".to_string());
        cols
    }

    fn data_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut cols = vec![r.scope.clone()];
                for c in &r.cells {
                    cols.push(c.samples.to_string());
                    cols.push(format!("{:.2}", c.percent));
                    cols.push(c.events.to_string());
                }
                cols.push(
                    r.cpi
                        .map(|v| format!("{:.3}", v))
                        .unwrap_or_else(|| "-".to_string()),
                );
                cols.push(
                    r.process_share
                        .map(|v| format!("{:.2}", v))
                        .unwrap_or_else(|| "-".to_string()),
                );
                cols
            })
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = self.header().join("\t");
        out.push('\n');
        for row in self.data_rows() {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let header = self.header();
        let rows = self.data_rows();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let fmt_row = |cols: &[String]| -> String {
            cols.iter()
                .enumerate()
                .map(|(i, c)| format!("{:<width$}", c, width = widths[i]))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = fmt_row(&header);
        out.push('\n');
        for row in &rows {
            out.push_str(&fmt_row(row));
            out.push('\n');
        }
        out
    }

    pub fn row(&self, scope: &str) -> Option<&HotspotRow> {
        self.rows.iter().find(|r| r.scope == scope)
    }
}
