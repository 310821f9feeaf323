//! Command-level behavior: exit-code contract, output formats, hotspot
//! ordering, and the pipeline-closure property (rewritten output re-parses).

use std::path::{Path, PathBuf};
use std::process::Command;

use copt_cli::commands::*;
use copt_core::profile::TableGroupBy;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn write_temp(dir: &tempfile::TempDir, name: &str, content: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, content).unwrap();
    p
}

fn analyze_defaults(file: PathBuf) -> AnalyzeOpts {
    AnalyzeOpts {
        file,
        rules: "all".to_string(),
        format: OutputFormat::Text,
        hotspots: None,
        top: None,
        defines: vec![],
    }
}

// ---- analyze -------------------------------------------------------------

#[test]
fn analyze_finds_the_swap_inline_site() {
    let out = cmd_analyze(&AnalyzeOpts {
        rules: "FN_INLINE".to_string(),
        ..analyze_defaults(fixture("heap.c"))
    });
    assert_eq!(out.exit, 0, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 1, "{}", out.stdout);
    assert!(lines[0].contains("FN_INLINE"));
    assert!(lines[0].contains("hsort"));
    assert!(lines[0].contains("SAFE"));
}

#[test]
fn analyze_empty_file_exits_zero_with_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_temp(&dir, "empty.c", "");
    let out = cmd_analyze(&analyze_defaults(empty));
    assert_eq!(out.exit, 0);
    assert!(out.stdout.is_empty());
}

#[test]
fn analyze_parse_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.c", "int main() { switch (x) {} }");
    let out = cmd_analyze(&analyze_defaults(bad));
    assert_eq!(out.exit, 2);
    assert!(
        out.stderr.contains("unsupported construct"),
        "{}",
        out.stderr
    );
}

#[test]
fn analyze_unknown_rule_exits_3() {
    let out = cmd_analyze(&AnalyzeOpts {
        rules: "NOT_A_RULE".to_string(),
        ..analyze_defaults(fixture("heap.c"))
    });
    assert_eq!(out.exit, 3);
}

#[test]
fn analyze_hotspot_ordering_puts_adjust_first() {
    let out = cmd_analyze(&AnalyzeOpts {
        hotspots: Some(fixture("table1.samples")),
        top: Some(1),
        ..analyze_defaults(fixture("heap.c"))
    });
    assert_eq!(out.exit, 0, "{}", out.stderr);
    let first = out.stdout.lines().next().unwrap();
    assert!(
        first.contains("adjust"),
        "adjust findings lead: {}",
        out.stdout
    );
    // functions outside the top K are marked cold
    assert!(out.stdout.contains("[cold]"), "{}", out.stdout);
    let adjust_lines: Vec<&str> = out
        .stdout
        .lines()
        .filter(|l| l.contains(" adjust "))
        .collect();
    for l in adjust_lines {
        assert!(!l.contains("[cold]"), "adjust is hot: {}", l);
    }
}

#[test]
fn analyze_tsv_has_five_columns() {
    let out = cmd_analyze(&AnalyzeOpts {
        rules: "FN_INLINE".to_string(),
        format: OutputFormat::Tsv,
        ..analyze_defaults(fixture("heap.c"))
    });
    let cols: Vec<&str> = out.stdout.lines().next().unwrap().split('\t').collect();
    assert_eq!(cols.len(), 5);
    assert_eq!(cols[0], "FN_INLINE");
}

// ---- rewrite -------------------------------------------------------------

#[test]
fn rewrite_output_reparses_and_findings_disappear() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("heap_opt.c");
    let out = cmd_rewrite(&RewriteOpts {
        file: fixture("heap.c"),
        rules: "LOOP_COUNTDOWN,FN_INLINE".to_string(),
        allow_unsafe: false,
        output: Some(out_path.clone()),
        report: None,
        defines: vec!["SMALL".to_string(), "DEBUG".to_string()],
    });
    assert_eq!(out.exit, 0, "{}", out.stderr);
    assert!(out.stderr.contains("applied"), "{}", out.stderr);

    // pipeline closure: the emitted file parses and has no leftover findings
    let re = cmd_analyze(&AnalyzeOpts {
        rules: "LOOP_COUNTDOWN,FN_INLINE".to_string(),
        ..analyze_defaults(out_path)
    });
    assert_eq!(re.exit, 0, "{}", re.stderr);
    assert!(
        re.stdout.is_empty(),
        "findings gone after rewrite:\n{}",
        re.stdout
    );
}

#[test]
fn rewrite_advisory_rule_exits_3() {
    let out = cmd_rewrite(&RewriteOpts {
        file: fixture("heap.c"),
        rules: "ADV_RECURSION".to_string(),
        allow_unsafe: false,
        output: None,
        report: None,
        defines: vec![],
    });
    assert_eq!(out.exit, 3);
    assert!(out.stderr.contains("advisory"), "{}", out.stderr);
}

#[test]
fn rewrite_with_nothing_to_do_still_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let plain = write_temp(&dir, "plain.c", "int main() { return 0; }\n");
    let out = cmd_rewrite(&RewriteOpts {
        file: plain,
        rules: "all-safe".to_string(),
        allow_unsafe: false,
        output: None,
        report: None,
        defines: vec![],
    });
    assert_eq!(out.exit, 0);
    assert!(out.stderr.contains("nothing applied"), "{}", out.stderr);
    assert!(out.stdout.contains("int main()"), "source still emitted");
}

#[test]
fn rewrite_memset_replaces_the_fill_loop() {
    let out = cmd_rewrite(&RewriteOpts {
        file: fixture("fact.c"),
        rules: "MEMSET_INIT".to_string(),
        allow_unsafe: false,
        output: None,
        report: None,
        defines: vec!["SMALL".to_string()],
    });
    assert_eq!(out.exit, 0);
    assert!(
        out.stdout
            .contains("memset(fa + 1, 0, (10000 - 1) * sizeof(int));"),
        "{}",
        out.stdout
    );
}

// ---- run -----------------------------------------------------------------

#[test]
fn run_factorial_small_prints_the_oracle_value() {
    let mut opts = RunOpts::new(fixture("fact.c"));
    opts.defines = vec!["SMALL".to_string(), "DEBUG".to_string()];
    let out = cmd_run(&opts);
    assert_eq!(out.exit, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "3628800\n");
}

#[test]
fn run_heap_small_sorts() {
    let mut opts = RunOpts::new(fixture("heap.c"));
    opts.defines = vec!["SMALL".to_string(), "DEBUG".to_string()];
    opts.seed = 42;
    let out = cmd_run(&opts);
    assert_eq!(out.exit, 0, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    let before: Vec<i64> = lines[0]
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    let after: Vec<i64> = lines[1]
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(before.len(), 100);
    let mut sorted = before.clone();
    sorted.sort();
    assert_eq!(after, sorted, "second line is the first line sorted");
    assert!(
        out.stderr.contains("exit code 1"),
        "heap main returns 1: {}",
        out.stderr
    );
}

#[test]
fn run_cost_table_ranks_adjust_first() {
    let mut opts = RunOpts::new(fixture("heap.c"));
    opts.defines = vec!["MEDIUM".to_string()];
    opts.cost = true;
    let out = cmd_run(&opts);
    assert_eq!(out.exit, 0, "{}", out.stderr);
    let table_start = out.stdout.find("cost attribution").unwrap();
    let first_row = out.stdout[table_start..].lines().nth(2).unwrap();
    assert!(
        first_row.starts_with("adjust"),
        "{}",
        &out.stdout[table_start..]
    );
}

#[test]
fn run_runtime_error_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let crash = write_temp(&dir, "crash.c", "int a[2]; int main() { return a[5]; }\n");
    let out = cmd_run(&RunOpts::new(crash));
    assert_eq!(out.exit, 1);
    assert!(out.stderr.contains("out-of-bounds"), "{}", out.stderr);
}

// ---- report ----------------------------------------------------------------

#[test]
fn report_renders_the_bundled_session() {
    let out = cmd_report(&ReportOpts {
        file: fixture("table1.samples"),
        by: TableGroupBy::Function,
        top: None,
        format: OutputFormat::Text,
    });
    assert_eq!(out.exit, 0, "{}", out.stderr);
    let adjust = out
        .stdout
        .lines()
        .find(|l| l.starts_with("adjust"))
        .unwrap();
    assert!(
        adjust.contains("31") && adjust.contains("79.49") && adjust.contains("62000000"),
        "{}",
        adjust
    );
}

#[test]
fn report_by_location_groups_rows() {
    let out = cmd_report(&ReportOpts {
        file: fixture("table1.samples"),
        by: TableGroupBy::Location,
        top: None,
        format: OutputFormat::Tsv,
    });
    assert_eq!(out.exit, 0);
    assert!(out.stdout.contains("heap.c:75"), "{}", out.stdout);
}

#[test]
fn report_header_only_run_is_fine() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_temp(
        &dir,
        "empty.samples",
        "#meta\tduration_s=1\tinterval_s=1\tprocessors=1\n#event\tE\tsav=1\trole=clock\n",
    );
    let out = cmd_report(&ReportOpts {
        file: empty,
        by: TableGroupBy::Function,
        top: None,
        format: OutputFormat::Text,
    });
    assert_eq!(out.exit, 0, "{}", out.stderr);
    assert_eq!(out.stdout.lines().count(), 1, "header only: {}", out.stdout);
}

#[test]
fn report_malformed_file_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.samples", "#meta\tduration_s=1\n");
    let out = cmd_report(&ReportOpts {
        file: bad,
        by: TableGroupBy::Function,
        top: None,
        format: OutputFormat::Text,
    });
    assert_eq!(out.exit, 2);
    assert!(out.stderr.contains("line 1"), "{}", out.stderr);
}

// ---- bench -----------------------------------------------------------------

#[test]
fn bench_self_comparison_is_equivalent_with_zero_reduction() {
    let opts = BenchOpts {
        defines: vec!["SMALL".to_string(), "DEBUG".to_string()],
        ..BenchOpts::new(fixture("heap.c"), fixture("heap.c"))
    };
    let outcome = bench(&opts).unwrap();
    assert!(outcome.equivalent);
    assert_eq!(outcome.cost_before, outcome.cost_after);
    assert_eq!(outcome.reduction_percent, 0.0);
    let rendered = cmd_bench(&opts);
    assert_eq!(rendered.exit, 0);
    assert!(
        rendered.stdout.contains("reduction:   0.00%"),
        "{}",
        rendered.stdout
    );
}

#[test]
fn bench_detects_divergence_with_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_temp(&dir, "a.c", "int main() { printf(\"abc\"); return 0; }\n");
    let b = write_temp(&dir, "b.c", "int main() { printf(\"abd\"); return 0; }\n");
    let out = cmd_bench(&BenchOpts::new(a, b));
    assert_eq!(out.exit, 4);
    assert!(out.stdout.contains("equivalent: no"), "{}", out.stdout);
    assert!(
        out.stdout.contains("byte 2"),
        "first divergent byte offset: {}",
        out.stdout
    );
}

#[test]
fn bench_parse_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.c", "int main( {");
    let out = cmd_bench(&BenchOpts::new(bad, fixture("heap.c")));
    assert_eq!(out.exit, 2);
}

#[test]
fn bench_honors_a_custom_cost_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_temp(
        &dir,
        "model.json",
        "{\"call_overhead\": 0, \"builtin_call\": 0}",
    );
    let plain = write_temp(&dir, "p.c", "int main() { rand(); return 0; }\n");
    let opts = BenchOpts {
        cost_model: Some(model),
        seeds: vec![1],
        ..BenchOpts::new(plain.clone(), plain)
    };
    let outcome = bench(&opts).unwrap();
    // only the call and builtin categories were charged in this program
    assert_eq!(outcome.cost_before, 0);
}

// ---- the real binary ---------------------------------------------------------

#[test]
fn binary_exit_codes_match_the_contract() {
    let bin = env!("CARGO_BIN_EXE_copt");

    let ok = Command::new(bin)
        .args(["report", fixture("table1.samples").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("adjust"));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.c", "int main() { goto x; }");
    let parse = Command::new(bin)
        .args(["analyze", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(parse.status.code(), Some(2));

    let misuse = Command::new(bin)
        .args([
            "rewrite",
            fixture("heap.c").to_str().unwrap(),
            "--rules",
            "ADV_RECURSION",
        ])
        .output()
        .unwrap();
    assert_eq!(misuse.status.code(), Some(3));

    let a = write_temp(&dir, "a.c", "int main() { return 1; }");
    let b = write_temp(&dir, "b.c", "int main() { return 2; }");
    let diverge = Command::new(bin)
        .args(["bench", a.to_str().unwrap(), b.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(diverge.status.code(), Some(4));
}
