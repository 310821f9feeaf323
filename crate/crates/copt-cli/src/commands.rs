//! Command implementations. Each returns an [`Outcome`] with the text for
//! stdout/stderr and the process exit code, so tests can drive commands
//! without spawning the binary.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 parse error, 3 usage error,
//! 4 semantic divergence (bench).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use copt_core::analysis::{
    detect, findings_to_text_marked, findings_to_tsv, Finding, RuleId, Safety, ALL_RULES,
    REWRITABLE_RULES,
};
use copt_core::frontend::{load_source, pretty_print, TranslationUnit};
use copt_core::interp::{cost_attribution, run, CostModel, ExecResult, GroupBy, RunConfig};
use copt_core::profile::{hotspot_table, parse_samples_file, TableGroupBy};
use copt_core::rewrite::{apply_plan, render_change_report, sort_findings_for_plan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub exit: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome {
            stdout,
            stderr: String::new(),
            exit: 0,
        }
    }

    fn fail(exit: i32, message: impl Into<String>) -> Outcome {
        Outcome {
            stdout: String::new(),
            stderr: message.into(),
            exit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Tsv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<OutputFormat, String> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "tsv" => Ok(OutputFormat::Tsv),
            other => Err(format!("unknown format `{}` (expected text or tsv)", other)),
        }
    }
}

fn read_file(path: &Path) -> Result<String, Outcome> {
    fs::read_to_string(path)
        .map_err(|e| Outcome::fail(2, format!("cannot read {}: {}", path.display(), e)))
}

fn parse_program(path: &Path, defines: &[String]) -> Result<TranslationUnit, Outcome> {
    let src = read_file(path)?;
    let name = path
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("input.c");
    let defs: Vec<&str> = defines.iter().map(|s| s.as_str()).collect();
    load_source(&src, name, &defs)
        .map_err(|e| Outcome::fail(2, format!("{}: {}", path.display(), e)))
}

/// `all`, `all-safe`, or a comma-separated list of rule names.
fn parse_rules(spec: &str) -> Result<Vec<RuleId>, String> {
    match spec {
        "all" => Ok(ALL_RULES.to_vec()),
        "all-safe" => Ok(REWRITABLE_RULES.to_vec()),
        list => list
            .split(',')
            .map(|s| s.trim().parse::<RuleId>())
            .collect(),
    }
}

// ---- analyze -----------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct AnalyzeOpts {
    pub file: PathBuf,
    pub rules: String,
    pub format: OutputFormat,
    pub hotspots: Option<PathBuf>,
    pub top: Option<usize>,
    pub defines: Vec<String>,
}

pub fn cmd_analyze(opts: &AnalyzeOpts) -> Outcome {
    let rules = match parse_rules(&opts.rules) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(3, e),
    };
    let tu = match parse_program(&opts.file, &opts.defines) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let mut findings = detect(&tu, &rules);
    let mut cold: Vec<String> = Vec::new();

    if let Some(hotspot_path) = &opts.hotspots {
        let text = match read_file(hotspot_path) {
            Ok(t) => t,
            Err(o) => return o,
        };
        let sampling = match parse_samples_file(&text) {
            Ok(r) => r,
            Err(e) => return Outcome::fail(2, format!("{}: {}", hotspot_path.display(), e)),
        };
        let table = hotspot_table(&sampling, TableGroupBy::Function, None);
        let ranked: Vec<String> = table.rows.iter().map(|r| r.scope.clone()).collect();
        let hot_count = opts.top.unwrap_or(ranked.len()).min(ranked.len());
        let hot = &ranked[..hot_count];
        let rank_of = |f: &Finding| hot.iter().position(|n| n == &f.function);
        findings.sort_by(|a, b| {
            let (ra, rb) = (rank_of(a), rank_of(b));
            match (ra, rb) {
                (Some(x), Some(y)) => x
                    .cmp(&y)
                    .then_with(|| a.span.line_start.cmp(&b.span.line_start)),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => (a.span.file.as_ref(), a.span.line_start)
                    .cmp(&(b.span.file.as_ref(), b.span.line_start)),
            }
        });
        cold = findings
            .iter()
            .filter(|f| rank_of(f).is_none())
            .map(|f| f.function.clone())
            .collect();
    }

    let rendered = match opts.format {
        OutputFormat::Tsv => findings_to_tsv(&findings),
        OutputFormat::Text => findings_to_text_marked(&findings, &cold),
    };
    Outcome::ok(rendered)
}

// ---- rewrite -----------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RewriteOpts {
    pub file: PathBuf,
    pub rules: String,
    pub allow_unsafe: bool,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub defines: Vec<String>,
}

pub fn cmd_rewrite(opts: &RewriteOpts) -> Outcome {
    let rules = match parse_rules(&opts.rules) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(3, e),
    };
    if let Some(adv) = rules.iter().find(|r| r.is_advisory()) {
        return Outcome::fail(
            3,
            format!("rule {} is advisory-only and has no rewrite", adv),
        );
    }
    let tu = match parse_program(&opts.file, &opts.defines) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let mut findings = detect(&tu, &rules);
    sort_findings_for_plan(&mut findings);
    let (transformed, report) = match apply_plan(&tu, &findings, opts.allow_unsafe) {
        Ok(x) => x,
        Err(e) => return Outcome::fail(1, format!("rewrite failed: {}", e)),
    };

    let before_src = pretty_print(&tu);
    let after_src = pretty_print(&transformed);
    let report_text = render_change_report(&report, &before_src, &after_src);

    let mut out = Outcome::ok(String::new());
    match &opts.output {
        Some(path) => {
            if let Err(e) = fs::write(path, &after_src) {
                return Outcome::fail(1, format!("cannot write {}: {}", path.display(), e));
            }
        }
        None => out.stdout.push_str(&after_src),
    }
    match &opts.report {
        Some(path) => {
            if let Err(e) = fs::write(path, &report_text) {
                return Outcome::fail(1, format!("cannot write {}: {}", path.display(), e));
            }
        }
        None => out.stderr.push_str(&report_text),
    }
    out
}

// ---- run ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RunOpts {
    pub file: PathBuf,
    pub entry: String,
    pub seed: u32,
    pub time_value: Option<i64>,
    pub cost: bool,
    pub cost_by: GroupBy,
    pub step_limit: Option<u64>,
    pub trace: bool,
    pub defines: Vec<String>,
}

impl RunOpts {
    pub fn new(file: PathBuf) -> RunOpts {
        RunOpts {
            file,
            entry: "main".to_string(),
            seed: 1,
            time_value: None,
            cost: false,
            cost_by: GroupBy::Function,
            step_limit: None,
            trace: false,
            defines: Vec::new(),
        }
    }
}

fn config_for(
    seed: u32,
    time_value: Option<i64>,
    step_limit: Option<u64>,
    trace: bool,
) -> RunConfig {
    let mut config = RunConfig::with_seed(seed);
    if let Some(t) = time_value {
        config.time_value = t;
    }
    if let Some(l) = step_limit {
        config.step_limit = l;
    }
    config.trace = trace;
    config
}

pub fn cmd_run(opts: &RunOpts) -> Outcome {
    let tu = match parse_program(&opts.file, &opts.defines) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let config = config_for(opts.seed, opts.time_value, opts.step_limit, opts.trace);
    let result = match run(&tu, &opts.entry, &config) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(1, format!("runtime error: {}", e)),
    };

    let mut stdout = String::from_utf8_lossy(&result.stdout).into_owned();
    if opts.cost {
        stdout.push_str(&render_cost(&result, opts.cost_by));
    }
    let mut stderr = String::new();
    if opts.trace {
        for line in &result.trace {
            stderr.push_str(line);
            stderr.push('\n');
        }
    }
    stderr.push_str(&format!(
        "exit code {} after {} steps\n",
        result.exit_code, result.steps
    ));
    Outcome {
        stdout,
        stderr,
        exit: 0,
    }
}

fn render_cost(result: &ExecResult, group_by: GroupBy) -> String {
    let rows = cost_attribution(&result.cost, group_by);
    let scope_header = match group_by {
        GroupBy::Function => "function",
        GroupBy::Location => "location",
    };
    let mut out = String::from("\n--- cost attribution ---\n");
    out.push_str(&format!(
        "{:<24} {:>14} {:>8}\n",
        scope_header, "cost", "share"
    ));
    for r in &rows {
        out.push_str(&format!(
            "{:<24} {:>14} {:>7.2}%\n",
            r.scope, r.cost, r.share_percent
        ));
    }
    out.push_str(&format!("total cost: {}\n", result.cost.total));
    out
}

// ---- report ------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ReportOpts {
    pub file: PathBuf,
    pub by: TableGroupBy,
    pub top: Option<usize>,
    pub format: OutputFormat,
}

pub fn cmd_report(opts: &ReportOpts) -> Outcome {
    let text = match read_file(&opts.file) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let sampling = match parse_samples_file(&text) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(2, format!("{}: {}", opts.file.display(), e)),
    };
    let table = hotspot_table(&sampling, opts.by, opts.top);
    let rendered = match opts.format {
        OutputFormat::Text => table.to_text(),
        OutputFormat::Tsv => table.to_tsv(),
    };
    Outcome::ok(rendered)
}

// ---- bench -------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BenchOpts {
    pub original: PathBuf,
    pub optimized: PathBuf,
    pub entry: String,
    pub seeds: Vec<u32>,
    pub cost_model: Option<PathBuf>,
    pub defines: Vec<String>,
}

impl BenchOpts {
    pub fn new(original: PathBuf, optimized: PathBuf) -> BenchOpts {
        BenchOpts {
            original,
            optimized,
            entry: "main".to_string(),
            seeds: vec![1, 42, 20071],
            cost_model: None,
            defines: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    pub equivalent: bool,
    pub cost_before: u64,
    pub cost_after: u64,
    pub reduction_percent: f64,
    pub per_rule_breakdown: BTreeMap<RuleId, i64>,
    /// first divergence, if any: (seed, byte offset or exit-code note)
    pub divergence: Option<(u32, String)>,
}

pub fn cmd_bench(opts: &BenchOpts) -> Outcome {
    match bench(opts) {
        Ok(outcome) => {
            let rendered = render_bench(&outcome);
            if outcome.equivalent {
                Outcome::ok(rendered)
            } else {
                Outcome {
                    stdout: rendered,
                    stderr: String::new(),
                    exit: 4,
                }
            }
        }
        Err(o) => o,
    }
}

/// Run both programs across the seed set and compare observable behavior;
/// also measure what each rule would save when applied alone to the
/// original (the per-technique breakdown).
pub fn bench(opts: &BenchOpts) -> Result<BenchOutcome, Outcome> {
    let original = parse_program(&opts.original, &opts.defines)?;
    let optimized = parse_program(&opts.optimized, &opts.defines)?;

    let cost_model = match &opts.cost_model {
        None => CostModel::default(),
        Some(path) => {
            let text = read_file(path)?;
            let map: BTreeMap<String, u64> = serde_json::from_str(&text)
                .map_err(|e| Outcome::fail(3, format!("{}: {}", path.display(), e)))?;
            CostModel::from_pairs(map.iter().map(|(k, v)| (k.as_str(), *v)))
                .map_err(|e| Outcome::fail(3, e))?
        }
    };

    let run_with = |tu: &TranslationUnit, seed: u32| -> Result<ExecResult, Outcome> {
        let mut config = RunConfig::with_seed(seed);
        config.cost_model = cost_model.clone();
        run(tu, &opts.entry, &config)
            .map_err(|e| Outcome::fail(4, format!("seed {}: runtime error: {}", seed, e)))
    };

    let mut cost_before = 0u64;
    let mut cost_after = 0u64;
    let mut equivalent = true;
    let mut divergence = None;

    for &seed in &opts.seeds {
        let a = run_with(&original, seed)?;
        let b = run_with(&optimized, seed)?;
        cost_before += a.cost.total;
        cost_after += b.cost.total;
        if a.stdout != b.stdout && divergence.is_none() {
            let off = first_divergence(&a.stdout, &b.stdout);
            equivalent = false;
            divergence = Some((
                seed,
                format!(
                    "stdout diverges at byte {} ({} vs {})",
                    off,
                    byte_repr(a.stdout.get(off)),
                    byte_repr(b.stdout.get(off)),
                ),
            ));
        } else if a.exit_code != b.exit_code && divergence.is_none() {
            equivalent = false;
            divergence = Some((
                seed,
                format!("exit codes differ: {} vs {}", a.exit_code, b.exit_code),
            ));
        }
    }

    // per-rule breakdown: cost saved by each rule's SAFE findings alone
    let mut per_rule_breakdown = BTreeMap::new();
    for rule in REWRITABLE_RULES {
        let mut findings: Vec<Finding> = detect(&original, &[rule])
            .into_iter()
            .filter(|f| f.safety == Safety::Safe)
            .collect();
        if findings.is_empty() {
            continue;
        }
        sort_findings_for_plan(&mut findings);
        let Ok((variant, report)) = apply_plan(&original, &findings, false) else {
            continue;
        };
        if report.applied.is_empty() {
            continue;
        }
        let mut variant_cost = 0u64;
        let mut ok = true;
        for &seed in &opts.seeds {
            match run_with(&variant, seed) {
                Ok(r) => variant_cost += r.cost.total,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            per_rule_breakdown.insert(rule, cost_before as i64 - variant_cost as i64);
        }
    }

    let reduction_percent = if cost_before == 0 {
        0.0
    } else {
        (cost_before as f64 - cost_after as f64) * 100.0 / cost_before as f64
    };
    Ok(BenchOutcome {
        equivalent,
        cost_before,
        cost_after,
        reduction_percent,
        per_rule_breakdown,
        divergence,
    })
}

fn first_divergence(a: &[u8], b: &[u8]) -> usize {
    a.iter()
        .zip(b.iter())
        .position(|(x, y)| x != y)
        .unwrap_or(a.len().min(b.len()))
}

fn byte_repr(b: Option<&u8>) -> String {
    match b {
        Some(&b) if b.is_ascii_graphic() || b == b' ' => format!("{:?}", b as char),
        Some(&b) => format!("0x{:02x}", b),
        None => "end-of-output".to_string(),
    }
}

fn render_bench(outcome: &BenchOutcome) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "equivalent: {}\n",
        if outcome.equivalent { "yes" } else { "no" }
    ));
    if let Some((seed, detail)) = &outcome.divergence {
        out.push_str(&format!("divergence: seed {}: {}\n", seed, detail));
    }
    out.push_str(&format!("cost before: {}\n", outcome.cost_before));
    out.push_str(&format!("cost after:  {}\n", outcome.cost_after));
    out.push_str(&format!("reduction:   {:.2}%\n", outcome.reduction_percent));
    if !outcome.per_rule_breakdown.is_empty() {
        out.push_str("cost saved per rule, applied alone to the original:\n");
        for (rule, delta) in &outcome.per_rule_breakdown {
            out.push_str(&format!("  {:<18} {}\n", rule.to_string(), delta));
        }
    }
    out
}
