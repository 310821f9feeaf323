//! Semantic preservation and cost behavior of the rewrites over the bundled
//! fixtures: every applicable SAFE rule, applied alone, must leave stdout
//! and exit codes byte-identical across seeds, and the four cost-saving
//! rules must strictly reduce the abstract cost.

use std::path::{Path, PathBuf};

use copt_core::analysis::{detect, Finding, RuleId, Safety, REWRITABLE_RULES};
use copt_core::frontend::{load_source, pretty_print, TranslationUnit};
use copt_core::interp::{run, RunConfig};
use copt_core::rewrite::{apply_plan, sort_findings_for_plan};

const SEEDS: [u32; 3] = [1, 42, 20071];

fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn load_fixture(name: &str, defines: &[&str]) -> TranslationUnit {
    let src = std::fs::read_to_string(fixture_path(name)).unwrap();
    load_source(&src, name, defines).unwrap_or_else(|e| panic!("{} does not parse: {}", name, e))
}

fn safe_findings(tu: &TranslationUnit, rule: RuleId) -> Vec<Finding> {
    let mut findings: Vec<Finding> = detect(tu, &[rule])
        .into_iter()
        .filter(|f| f.safety == Safety::Safe)
        .collect();
    sort_findings_for_plan(&mut findings);
    findings
}

fn observe(tu: &TranslationUnit, seed: u32) -> (Vec<u8>, i32, u64) {
    let r = run(tu, "main", &RunConfig::with_seed(seed))
        .unwrap_or_else(|e| panic!("fixture run failed: {}", e));
    (r.stdout, r.exit_code, r.cost.total)
}

/// fixtures x applicable SAFE rules x seeds: outputs identical.
#[test]
fn every_safe_rule_preserves_fixture_behavior() {
    let defines = ["SMALL", "DEBUG"];
    for name in ["heap.c", "fact.c"] {
        let tu = load_fixture(name, &defines);
        for rule in REWRITABLE_RULES {
            let findings = safe_findings(&tu, rule);
            if findings.is_empty() {
                continue;
            }
            let (rewritten, report) = apply_plan(&tu, &findings, false).unwrap();
            assert!(
                !report.applied.is_empty(),
                "{}: {} produced findings but applied nothing",
                name,
                rule
            );
            for seed in SEEDS {
                let before = observe(&tu, seed);
                let after = observe(&rewritten, seed);
                assert_eq!(
                    before.0, after.0,
                    "{}: {} changed stdout under seed {}",
                    name, rule, seed
                );
                assert_eq!(
                    before.1, after.1,
                    "{}: {} changed the exit code under seed {}",
                    name, rule, seed
                );
            }
        }
    }
}

/// The loop, inline, alias and memset rewrites must strictly reduce total
/// abstract cost on the fixtures they apply to. (The bitwise and unsigned
/// rules are exempt: converting `&&` trades branching for an unconditional
/// evaluation and can go either way; promotion changes no cost category.)
#[test]
fn cost_strictly_decreases_for_the_saving_rules() {
    let must_save = [
        RuleId::LoopCountdown,
        RuleId::FnInline,
        RuleId::GlobalRegAlias,
        RuleId::MemsetInit,
    ];
    let defines = ["SMALL", "DEBUG"];
    let mut seen_applicable = 0;
    for name in ["heap.c", "fact.c"] {
        let tu = load_fixture(name, &defines);
        for rule in must_save {
            let findings = safe_findings(&tu, rule);
            if findings.is_empty() {
                continue;
            }
            seen_applicable += 1;
            let (rewritten, _) = apply_plan(&tu, &findings, false).unwrap();
            for seed in SEEDS {
                let before = observe(&tu, seed);
                let after = observe(&rewritten, seed);
                assert!(
                    after.2 < before.2,
                    "{}: {} did not reduce cost under seed {} ({} -> {})",
                    name,
                    rule,
                    seed,
                    before.2,
                    after.2
                );
            }
        }
    }
    // heap: countdown + inline; fact: countdown + alias + memset
    assert_eq!(seen_applicable, 5, "expected applicability matrix changed");
}

/// Re-detecting on a transformed tree never reports a SAFE finding of the
/// same rule at a site that was already rewritten.
#[test]
fn fixture_rewrites_are_idempotent() {
    let defines = ["SMALL", "DEBUG"];
    for name in ["heap.c", "fact.c"] {
        let tu = load_fixture(name, &defines);
        let mut findings: Vec<Finding> = detect(&tu, &REWRITABLE_RULES)
            .into_iter()
            .filter(|f| f.safety == Safety::Safe)
            .collect();
        sort_findings_for_plan(&mut findings);
        let (rewritten, report) = apply_plan(&tu, &findings, false).unwrap();
        let applied: Vec<(RuleId, _)> = report
            .applied
            .iter()
            .map(|c| (c.finding.rule, c.finding.span.clone()))
            .collect();
        for f in detect(&rewritten, &REWRITABLE_RULES) {
            if f.safety != Safety::Safe {
                continue;
            }
            assert!(
                !applied.contains(&(f.rule, f.span.clone())),
                "{}: finding came back after rewriting: {:?}",
                name,
                f
            );
        }
    }
}

/// The full auto-plan output still parses, still behaves identically, and
/// is cheaper (the executable form of "test the modified code").
#[test]
fn full_auto_plan_round_trips_and_saves() {
    let defines = ["SMALL", "DEBUG"];
    for name in ["heap.c", "fact.c"] {
        let tu = load_fixture(name, &defines);
        let mut findings = detect(&tu, &REWRITABLE_RULES);
        sort_findings_for_plan(&mut findings);
        let (rewritten, _) = apply_plan(&tu, &findings, false).unwrap();

        let printed = pretty_print(&rewritten);
        let reparsed = copt_core::frontend::parse_text(&printed, name).unwrap();
        assert_eq!(
            reparsed.normalized(),
            rewritten.normalized(),
            "{}: print/parse closure",
            name
        );

        for seed in SEEDS {
            let before = observe(&tu, seed);
            let after = observe(&reparsed, seed);
            assert_eq!(before.0, after.0, "{} seed {}", name, seed);
            assert_eq!(before.1, after.1, "{} seed {}", name, seed);
            assert!(
                after.2 < before.2,
                "{} seed {}: {} -> {}",
                name,
                seed,
                before.2,
                after.2
            );
        }
    }
}

/// The unsafe findings on the heap fixture are unsafe for a reason: forcing
/// the nested-if merge evaluates `a[j] < a[j+1]` when `j == n`, which reads
/// one element past the heap — the interpreter traps instead of returning
/// garbage.
#[test]
fn forced_unsafe_merge_faults_on_the_heap_fixture() {
    let tu = load_fixture("heap.c", &["SMALL", "DEBUG"]);
    let unsafe_merge: Vec<Finding> = detect(&tu, &[RuleId::NestedIfMerge])
        .into_iter()
        .filter(|f| f.safety == Safety::UnsafeNeedsOverride)
        .collect();
    assert_eq!(unsafe_merge.len(), 1, "the adjust() nested if");
    let (rewritten, report) = apply_plan(&tu, &unsafe_merge, true).unwrap();
    assert_eq!(report.applied.len(), 1);
    let err = run(&rewritten, "main", &RunConfig::with_seed(42)).unwrap_err();
    assert!(
        matches!(
            err.kind,
            copt_core::interp::RuntimeErrorKind::OutOfBounds { .. }
        ),
        "expected the out-of-bounds read, got {}",
        err
    );
}

/// Without the override the same findings are skipped and the tree is
/// untouched.
#[test]
fn unsafe_findings_are_skipped_without_override() {
    let tu = load_fixture("heap.c", &["SMALL", "DEBUG"]);
    let unsafe_findings: Vec<Finding> = detect(&tu, &REWRITABLE_RULES)
        .into_iter()
        .filter(|f| f.safety == Safety::UnsafeNeedsOverride)
        .collect();
    assert!(!unsafe_findings.is_empty());
    let (rewritten, report) = apply_plan(&tu, &unsafe_findings, false).unwrap();
    assert!(report.applied.is_empty());
    assert_eq!(rewritten.normalized(), tu.normalized());
}

/// Paper-scale smoke run: the default (unscaled) factorial fixture computes
/// its full result under the step limit.
#[test]
fn factorial_paper_scale_completes_under_the_step_limit() {
    let tu = load_fixture("fact.c", &["DEBUG"]);
    let r = run(&tu, "main", &RunConfig::with_seed(1)).unwrap();
    let digits = r.stdout.iter().filter(|b| b.is_ascii_digit()).count();
    assert_eq!(digits, 5736, "2000! has 5736 decimal digits");
    assert!(r.steps < 50_000_000);
}
