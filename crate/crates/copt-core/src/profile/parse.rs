//! Sampling-log TSV grammar:
//!
//! ```text
//! #meta<TAB>duration_s=<float><TAB>interval_s=<float><TAB>processors=<int>
//! #event<TAB><name><TAB>sav=<int><TAB>role=<clock|instruction|other>
//! <event><TAB><function><TAB><file>:<line><TAB><samples>
//! ```
//!
//! Blank lines and `//` comments are ignored.

use super::*;

pub fn parse_samples_file(text: &str) -> Result<SamplingRun, MetricsError> {
    let mut meta: Option<SamplingMeta> = None;
    let mut events: Vec<EventSpec> = Vec::new();
    let mut records: Vec<SampleRecord> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx as u32 + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with("//") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields[0] {
            "#meta" => {
                if fields.len() != 4 {
                    return Err(malformed(lineno, "expected #meta with 3 key=value fields"));
                }
                let duration = parse_kv(fields[1], "duration_s", lineno)?;
                let interval = parse_kv(fields[2], "interval_s", lineno)?;
                let procs: f64 = parse_kv(fields[3], "processors", lineno)?;
                let m = SamplingMeta::new(duration, interval, procs as u32)
                    .map_err(|_| malformed(lineno, "meta values out of range"))?;
                meta = Some(m);
            }
            "#event" => {
                if fields.len() != 4 {
                    return Err(malformed(
                        lineno,
                        "expected #event<TAB>name<TAB>sav=N<TAB>role=R",
                    ));
                }
                let name = fields[1].to_string();
                let sav = parse_kv::<u64>(fields[2], "sav", lineno)?;
                if sav < 1 {
                    return Err(malformed(lineno, "sav must be at least 1"));
                }
                let role_str = fields[3]
                    .strip_prefix("role=")
                    .ok_or_else(|| malformed(lineno, "expected role=<clock|instruction|other>"))?;
                let role = EventRole::from_name(role_str)
                    .ok_or_else(|| malformed(lineno, "role must be clock, instruction or other"))?;
                events.push(EventSpec {
                    name,
                    sample_after_value: sav,
                    role,
                });
            }
            first if first.starts_with('#') => {
                return Err(malformed(lineno, &format!("unknown directive `{}`", first)));
            }
            _ => {
                if fields.len() != 4 {
                    return Err(malformed(
                        lineno,
                        "expected event<TAB>function<TAB>file:line<TAB>samples",
                    ));
                }
                let event = fields[0].to_string();
                if !events.iter().any(|e| e.name == event) {
                    return Err(MetricsError::UnknownEvent {
                        name: event,
                        line: lineno,
                    });
                }
                if !fields[2].contains(':') {
                    return Err(malformed(lineno, "location must be file:line"));
                }
                let samples: u64 = fields[3]
                    .parse()
                    .map_err(|_| malformed(lineno, "samples must be a non-negative integer"))?;
                records.push(SampleRecord {
                    event,
                    function: fields[1].to_string(),
                    location: fields[2].to_string(),
                    samples,
                });
            }
        }
    }

    let meta = meta.ok_or(MetricsError::MissingMeta)?;
    Ok(SamplingRun {
        meta,
        events,
        records,
    })
}

fn parse_kv<T: std::str::FromStr>(field: &str, key: &str, lineno: u32) -> Result<T, MetricsError> {
    field
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| malformed(lineno, &format!("expected {}=<value>", key)))
}

fn malformed(line: u32, message: &str) -> MetricsError {
    MetricsError::MalformedLine {
        line,
        message: message.to_string(),
    }
}

/// Inverse of [`parse_samples_file`]; parsing the output yields an equal run.
pub fn render_samples_file(run: &SamplingRun) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "#meta\tduration_s={}\tinterval_s={}\tprocessors={}\n",
        run.meta.duration_s, run.meta.interval_s, run.meta.n_processors
    ));
    for e in &run.events {
        out.push_str(&format!(
            "#event\t{}\tsav={}\trole={}\n",
            e.name,
            e.sample_after_value,
            e.role.name()
        ));
    }
    for r in &run.records {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            r.event, r.function, r.location, r.samples
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
// comment
#meta\tduration_s=20\tinterval_s=0.001\tprocessors=1
#event\tCPU_CLK\tsav=2000000\trole=clock

CPU_CLK\tadjust\theap.c:44\t31
";

    #[test]
    fn parses_meta_events_and_records() {
        let run = parse_samples_file(SMALL).unwrap();
        assert_eq!(run.meta.duration_s, 20.0);
        assert_eq!(run.events.len(), 1);
        assert_eq!(run.events[0].role, EventRole::Clock);
        assert_eq!(run.records.len(), 1);
        assert_eq!(run.records[0].samples, 31);
    }

    #[test]
    fn header_only_run_has_no_records() {
        let run = parse_samples_file(
            "#meta\tduration_s=1\tinterval_s=1\tprocessors=1\n#event\tE\tsav=1\trole=other\n",
        )
        .unwrap();
        assert!(run.records.is_empty());
    }

    #[test]
    fn undeclared_event_is_rejected() {
        let bad = "#meta\tduration_s=1\tinterval_s=1\tprocessors=1\nE\tf\tx.c:1\t3\n";
        assert_eq!(
            parse_samples_file(bad),
            Err(MetricsError::UnknownEvent {
                name: "E".to_string(),
                line: 2
            })
        );
    }

    #[test]
    fn missing_meta_is_rejected() {
        assert_eq!(
            parse_samples_file("// nothing\n"),
            Err(MetricsError::MissingMeta)
        );
    }

    #[test]
    fn unknown_directive_is_rejected() {
        let bad = "#meta\tduration_s=1\tinterval_s=1\tprocessors=1\n#sav\t12\n";
        assert!(matches!(
            parse_samples_file(bad),
            Err(MetricsError::MalformedLine { line: 2, .. })
        ));
    }

    #[test]
    fn render_parse_round_trip() {
        let run = parse_samples_file(SMALL).unwrap();
        let again = parse_samples_file(&render_samples_file(&run)).unwrap();
        assert_eq!(run, again);
    }
}
