//! Sampling-log parsing and hotspot arithmetic: expected sample counts,
//! per-event percentages, event totals and CPI, rendered as ranked tables.

mod parse;
mod table;

use std::fmt;

pub use parse::{parse_samples_file, render_samples_file};
pub use table::{hotspot_table, EventCell, HotspotRow, HotspotTable, TableGroupBy};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMeta {
    pub duration_s: f64,
    pub interval_s: f64,
    pub n_processors: u32,
}

impl SamplingMeta {
    pub fn new(
        duration_s: f64,
        interval_s: f64,
        n_processors: u32,
    ) -> Result<SamplingMeta, MetricsError> {
        if duration_s <= 0.0 || interval_s <= 0.0 || n_processors < 1 {
            return Err(MetricsError::InvalidMeta);
        }
        Ok(SamplingMeta {
            duration_s,
            interval_s,
            n_processors,
        })
    }
}

/// Whether an event counts clock cycles, retired instructions, or something
/// else; CPI and process share need to know which columns to combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventRole {
    Clock,
    Instruction,
    Other,
}

impl EventRole {
    pub fn name(self) -> &'static str {
        match self {
            EventRole::Clock => "clock",
            EventRole::Instruction => "instruction",
            EventRole::Other => "other",
        }
    }

    pub fn from_name(s: &str) -> Option<EventRole> {
        match s {
            "clock" => Some(EventRole::Clock),
            "instruction" => Some(EventRole::Instruction),
            "other" => Some(EventRole::Other),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventSpec {
    pub name: String,
    pub sample_after_value: u64,
    pub role: EventRole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub event: String,
    pub function: String,
    /// `file:line`
    pub location: String,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingRun {
    pub meta: SamplingMeta,
    pub events: Vec<EventSpec>,
    pub records: Vec<SampleRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    InvalidMeta,
    ZeroTotal,
    ZeroInstructions,
    MalformedLine { line: u32, message: String },
    UnknownEvent { name: String, line: u32 },
    MissingMeta,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::InvalidMeta => write!(f, "invalid sampling metadata"),
            MetricsError::ZeroTotal => write!(f, "total sample count is zero"),
            MetricsError::ZeroInstructions => write!(f, "instruction event count is zero"),
            MetricsError::MalformedLine { line, message } => {
                write!(f, "line {}: {}", line, message)
            }
            MetricsError::UnknownEvent { name, line } => {
                write!(
                    f,
                    "line {}: record references undeclared event `{}`",
                    line, name
                )
            }
            MetricsError::MissingMeta => write!(f, "missing #meta line"),
        }
    }
}

impl std::error::Error for MetricsError {}

/// Target number of samples for a run:
/// duration × processors / interval, rounded to the nearest integer.
pub fn expected_samples(meta: &SamplingMeta) -> u64 {
    (meta.duration_s * meta.n_processors as f64 / meta.interval_s).round() as u64
}

/// Share of samples collected for one scope, as a percentage rounded
/// half-up to two decimals.
pub fn event_percent(samples_for_event: u64, total_samples: u64) -> Result<f64, MetricsError> {
    if total_samples == 0 {
        return Err(MetricsError::ZeroTotal);
    }
    Ok(round_to(
        samples_for_event as f64 * 100.0 / total_samples as f64,
        2,
    ))
}

/// Estimated raw event count: samples × Sample_After_Value, exact.
pub fn event_count(samples: u64, sample_after_value: u64) -> u64 {
    samples * sample_after_value
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpiRating {
    /// within the expected 1–5 band, at or below 1
    Normal,
    /// above 1
    Suspect,
    /// above 5: instructions are taking many clocks
    High,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cpi {
    /// clock events / instruction events, rounded to three decimals
    pub ratio: f64,
    pub rating: CpiRating,
}

/// Cycles per instruction from event totals.
pub fn cpi(clock_events: u64, instruction_events: u64) -> Result<Cpi, MetricsError> {
    if instruction_events == 0 {
        return Err(MetricsError::ZeroInstructions);
    }
    let ratio = round_to(clock_events as f64 / instruction_events as f64, 3);
    let rating = if ratio > 5.0 {
        CpiRating::High
    } else if ratio > 1.0 {
        CpiRating::Suspect
    } else {
        CpiRating::Normal
    };
    Ok(Cpi { ratio, rating })
}

pub(crate) fn round_to(x: f64, decimals: u32) -> f64 {
    let m = 10f64.powi(decimals as i32);
    (x * m + 0.5).floor() / m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expected_samples_matches_formula() {
        let m = SamplingMeta::new(20.0, 0.001, 1).unwrap();
        assert_eq!(expected_samples(&m), 20000);
        let m = SamplingMeta::new(1.0, 1.0, 1).unwrap();
        assert_eq!(expected_samples(&m), 1);
        let m = SamplingMeta::new(10.0, 0.002, 4).unwrap();
        assert_eq!(expected_samples(&m), 20000);
    }

    #[test]
    fn meta_invariants_are_enforced() {
        assert!(SamplingMeta::new(0.0, 1.0, 1).is_err());
        assert!(SamplingMeta::new(1.0, 0.0, 1).is_err());
        assert!(SamplingMeta::new(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn percent_rounds_half_up_to_two_decimals() {
        assert_eq!(event_percent(31, 39).unwrap(), 79.49);
        assert_eq!(event_percent(27, 32).unwrap(), 84.38);
        assert_eq!(event_percent(0, 7).unwrap(), 0.00);
        assert_eq!(event_percent(0, 0), Err(MetricsError::ZeroTotal));
    }

    #[test]
    fn event_count_is_exact_product() {
        assert_eq!(event_count(31, 2_000_000), 62_000_000);
        assert_eq!(event_count(4, 2_000_000), 8_000_000);
        assert_eq!(event_count(0, 123456), 0);
    }

    #[test]
    fn cpi_rounds_to_three_decimals_and_rates() {
        let c = cpi(139_200_000, 67_200_000).unwrap();
        assert_eq!(c.ratio, 2.071);
        assert_eq!(c.rating, CpiRating::Suspect);
        let c = cpi(7, 7).unwrap();
        assert_eq!(c.ratio, 1.000);
        assert_eq!(c.rating, CpiRating::Normal);
        let c = cpi(26_400_000, 14_400_000).unwrap();
        assert_eq!(c.ratio, 1.833);
        let c = cpi(60, 10).unwrap();
        assert_eq!(c.rating, CpiRating::High);
        assert_eq!(cpi(5, 0), Err(MetricsError::ZeroInstructions));
    }
}
