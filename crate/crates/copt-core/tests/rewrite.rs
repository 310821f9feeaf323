//! Rewrite correctness: frozen output shapes for each transformation plus
//! interpreter-checked equivalence on miniature programs.

use copt_core::analysis::{detect, Finding, RuleId, Safety};
use copt_core::frontend::{parse_text, pretty_print};
use copt_core::interp::{run, RunConfig};
use copt_core::rewrite::{apply_plan, sort_findings_for_plan, RewriteError, SkipReason};

fn exec(src: &str, seed: u32) -> (String, i32) {
    let tu = parse_text(src, "t.c").unwrap();
    let r = run(&tu, "main", &RunConfig::with_seed(seed)).unwrap();
    (String::from_utf8(r.stdout).unwrap(), r.exit_code)
}

fn rewrite_with(
    src: &str,
    rules: &[RuleId],
    allow_unsafe: bool,
) -> (String, Vec<(Finding, SkipReason)>) {
    let tu = parse_text(src, "t.c").unwrap();
    let mut findings = detect(&tu, rules);
    sort_findings_for_plan(&mut findings);
    let (out, report) = apply_plan(&tu, &findings, allow_unsafe).unwrap();
    (pretty_print(&out), report.skipped)
}

// ---- count-down conversion -------------------------------------------------

#[test]
fn countdown_emits_the_remapped_form() {
    let src = "
int a[10];
void f(int n) {
    int i;
    for (i = 1; i <= n; i++) printf(\"%d \", a[i]);
}
int main() { f(9); return 0; }
";
    let (out, _) = rewrite_with(src, &[RuleId::LoopCountdown], false);
    assert!(out.contains("for (i = n; i != 0; i--)"), "{}", out);
    assert!(out.contains("a[n - i + 1]"), "{}", out);
}

#[test]
fn countdown_folds_literal_bounds() {
    let src = "
int a[101];
int main() {
    int i;
    for (i = 1; i <= 100; i++) a[i] = i;
    return a[100];
}
";
    let (out, _) = rewrite_with(src, &[RuleId::LoopCountdown], false);
    assert!(out.contains("for (i = 100; i != 0; i--)"), "{}", out);
    assert!(out.contains("a[101 - i] = 101 - i;"), "{}", out);
}

#[test]
fn countdown_normalizes_exclusive_bounds() {
    let src = "
void g(int **a, int n) {
    int i;
    for (i = 1; i < n; i++) (*a)[i] = rand();
}
int main() { int *p; g(&p, 5); return 0; }
";
    let (out, _) = rewrite_with(src, &[RuleId::LoopCountdown], false);
    assert!(out.contains("for (i = n - 1; i != 0; i--)"), "{}", out);
    assert!(out.contains("(*a)[n - i] = rand();"), "{}", out);
}

#[test]
fn countdown_preserves_sums_and_output() {
    // sum 1..7 = 28, checked against the closed form before freezing
    let src = "
int a[8];
int main() {
    int i;
    int s;
    for (i = 1; i <= 7; i++) a[i] = i;
    s = 0;
    for (i = 1; i <= 7; i++) s += a[i];
    printf(\"%d\", s);
    return 0;
}
";
    let before = exec(src, 1);
    assert_eq!(before.0, "28");
    let (out, _) = rewrite_with(src, &[RuleId::LoopCountdown], false);
    let after = exec(&out, 1);
    assert_eq!(before, after);
}

#[test]
fn countdown_single_iteration_loop() {
    let src = "
int main() {
    int i;
    for (i = 1; i <= 1; i++) printf(\"%d\", i);
    return 0;
}
";
    let (out, _) = rewrite_with(src, &[RuleId::LoopCountdown], false);
    assert_eq!(exec(&out, 1).0, "1");
}

#[test]
fn countdown_with_nonunit_start_keeps_the_sequence() {
    let src = "
int main() {
    int i;
    for (i = 2; i <= 6; i++) printf(\"%d \", i);
    return 0;
}
";
    let before = exec(src, 1);
    let (out, _) = rewrite_with(src, &[RuleId::LoopCountdown], false);
    assert!(
        out.contains("i != 1"),
        "exit test compares against start-1: {}",
        out
    );
    assert_eq!(exec(&out, 1), before);
}

// ---- inlining ----------------------------------------------------------------

#[test]
fn inline_splices_body_with_fresh_temporaries() {
    let src = "
void swap(int *a, int *b);
void swap(int *a, int *b) { int t; t = *a; *a = *b; *b = t; }
void hsort(int *a, int n) {
    int i;
    for (i = n - 1; i >= 1; i--) {
        swap(&a[1], &a[i + 1]);
    }
}
int main() { int *p; p = (int *) malloc(40); hsort(p, 9); return 0; }
";
    let (out, _) = rewrite_with(src, &[RuleId::FnInline], false);
    assert!(out.contains("int *__t0 = &a[1];"), "{}", out);
    assert!(out.contains("int *__t1 = &a[i + 1];"), "{}", out);
    assert!(out.contains("t = *__t0;"), "{}", out);
    assert!(out.contains("*__t0 = *__t1;"), "{}", out);
    assert!(out.contains("*__t1 = t;"), "{}", out);
    // the definition itself is untouched
    assert!(out.contains("void swap(int *a, int *b) {"), "{}", out);
}

#[test]
fn inline_with_literal_args_keeps_single_evaluation() {
    let src = "
int g;
void f(int x) { g = x; }
int main() { int i; for (i = 0; i < 2; i++) { f(3); } return g; }
";
    let (out, _) = rewrite_with(src, &[RuleId::FnInline], false);
    assert!(out.contains("int __t0 = 3;"), "{}", out);
    assert!(out.contains("g = __t0;"), "{}", out);
    assert_eq!(exec(&out, 1).1, 3);
}

#[test]
fn inline_preserves_behavior_on_a_sort_like_loop() {
    let src = "
int a[6];
void swap(int *x, int *y) { int t; t = *x; *x = *y; *y = t; }
int main() {
    int i;
    for (i = 0; i < 6; i++) a[i] = 6 - i;
    for (i = 0; i < 5; i++) {
        swap(&a[i], &a[i + 1]);
    }
    for (i = 0; i < 6; i++) printf(\"%d \", a[i]);
    return 0;
}
";
    let before = exec(src, 1);
    let (out, _) = rewrite_with(src, &[RuleId::FnInline], false);
    assert_eq!(exec(&out, 1), before);
}

#[test]
fn fresh_names_avoid_collisions() {
    let src = "
int __t0;
void f(int x) { __t0 = x; }
int main() { int i; for (i = 0; i < 2; i++) { f(7); } return __t0; }
";
    let (out, _) = rewrite_with(src, &[RuleId::FnInline], false);
    assert!(
        out.contains("int __t1 = 7;"),
        "temp skips the taken name: {}",
        out
    );
    assert_eq!(exec(&out, 1).1, 7);
}

// ---- global register aliasing ---------------------------------------------

#[test]
fn alias_rewrites_uses_and_writes_back() {
    let src = "
int count;
void bump() {
    count++;
    count++;
    count++;
}
int main() { count = 5; bump(); return count; }
";
    let (out, _) = rewrite_with(src, &[RuleId::GlobalRegAlias], false);
    assert!(
        out.contains("register int __local_count = count;"),
        "{}",
        out
    );
    assert!(out.contains("__local_count++;"), "{}", out);
    assert!(
        out.contains("count = __local_count;"),
        "write-back at exit: {}",
        out
    );
    assert_eq!(exec(&out, 1).1, 8);
}

#[test]
fn read_only_alias_has_no_write_back() {
    let src = "
int limit;
int clamp(int x) {
    if (x > limit) { return limit; }
    return x;
}
int main() { limit = 4; return clamp(9); }
";
    let (out, _) = rewrite_with(src, &[RuleId::GlobalRegAlias], false);
    assert!(
        out.contains("register int __local_limit = limit;"),
        "{}",
        out
    );
    assert!(
        !out.contains("limit = __local_limit;"),
        "no write-back for reads: {}",
        out
    );
    assert_eq!(exec(&out, 1).1, 4);
}

#[test]
fn alias_of_array_base_uses_a_pointer() {
    let src = "
int fa[10];
void fill(int k) {
    fa[0] = k;
    fa[1] = fa[0] + k;
}
int main() { fill(3); return fa[1]; }
";
    let (out, _) = rewrite_with(src, &[RuleId::GlobalRegAlias], false);
    assert!(out.contains("register int *__local_fa = fa;"), "{}", out);
    assert!(out.contains("__local_fa[0] = k;"), "{}", out);
    assert_eq!(exec(&out, 1).1, 6);
}

#[test]
fn alias_write_back_lands_before_every_return() {
    let src = "
int g;
int f(int x) {
    g = g + 1;
    if (x > 0) { return 1; }
    g = g + 1;
    return 0;
}
int main() { f(1); f(0); return g; }
";
    let (out, _) = rewrite_with(src, &[RuleId::GlobalRegAlias], false);
    let f_body = out.split("int f(int x)").last().unwrap();
    let write_backs = f_body.matches("g = __local_g;").count();
    assert_eq!(write_backs, 2, "one per return: {}", out);
    assert_eq!(exec(&out, 1).1, 3);
}

// ---- bitwise conversion ------------------------------------------------------

#[test]
fn logical_ops_become_bitwise_with_booleanization() {
    let src = "
int main() {
    int j; int n; int done; int carry; int flag; int c; int i;
    j = 1; n = 5; done = 0; carry = 2; flag = 0; c = 3; i = 1;
    printf(\"%d\", (j <= n) && !done);
    printf(\"%d\", (i <= c) || (carry > 0));
    printf(\"%d\", carry || flag);
    return 0;
}
";
    let (out, _) = rewrite_with(src, &[RuleId::BitwiseConv], false);
    assert!(out.contains("(j <= n) & !done"), "{}", out);
    assert!(out.contains("(i <= c) | (carry > 0)"), "{}", out);
    assert!(out.contains("(carry != 0) | (flag != 0)"), "{}", out);
    assert_eq!(exec(&out, 1).0, exec(src, 1).0);
}

#[test]
fn bitwise_equivalence_exhaustive_over_small_domain() {
    // carry || flag vs (carry != 0) | (flag != 0) over {-1,0,1,2}^2
    for carry in [-1i64, 0, 1, 2] {
        for flag in [-1i64, 0, 1, 2] {
            let logical = format!(
                "int main() {{ int carry; int flag; carry = {}; flag = {}; return carry || flag; }}",
                carry, flag
            );
            let (lout, lcode) = exec(&logical, 1);
            let (out, _) = rewrite_with(&logical, &[RuleId::BitwiseConv], false);
            assert!(out.contains("(carry != 0) | (flag != 0)"), "{}", out);
            let (bout, bcode) = exec(&out, 1);
            assert_eq!(
                (lout, lcode),
                (bout, bcode),
                "carry={} flag={}",
                carry,
                flag
            );
        }
    }
}

#[test]
fn unsafe_bitwise_needs_override() {
    let src = "
int a[4];
int main() {
    int j;
    j = 4;
    if (j < 4 && a[j] > 0) { return 1; }
    return 0;
}
";
    let (out, skipped) = rewrite_with(src, &[RuleId::BitwiseConv], false);
    assert!(
        out.contains("&&"),
        "unsafe finding untouched without --unsafe: {}",
        out
    );
    assert_eq!(skipped.len(), 1);
    assert_eq!(skipped[0].1, SkipReason::NeedsOverride);
    // re-detection still sees the logical operator
    let tu = parse_text(&out, "t.c").unwrap();
    assert_eq!(detect(&tu, &[RuleId::BitwiseConv]).len(), 1);

    // with the override the conversion applies and the guarded read faults
    let (out, _) = rewrite_with(src, &[RuleId::BitwiseConv], true);
    assert!(out.contains('&') && !out.contains("&&"), "{}", out);
    let tu = parse_text(&out, "t.c").unwrap();
    let err = run(&tu, "main", &RunConfig::default()).unwrap_err();
    assert!(matches!(
        err.kind,
        copt_core::interp::RuntimeErrorKind::OutOfBounds { .. }
    ));
}

// ---- nested if merge ---------------------------------------------------------

#[test]
fn nested_if_merges_into_bitwise_and() {
    let src = "
void f(int j, int n, int m) {
    if (j < n) if (j < m) printf(\"x\");
}
int main() { f(1, 2, 3); return 0; }
";
    let (out, _) = rewrite_with(src, &[RuleId::NestedIfMerge], false);
    assert!(out.contains("if ((j < n) & (j < m))"), "{}", out);
    assert_eq!(exec(&out, 1).0, "x");
}

// ---- memset ------------------------------------------------------------------

#[test]
fn memset_form_is_element_size_correct() {
    let src = "
int fa[10000];
void init_fa() {
    int i;
    for (i = 1; i < 10000; i++) fa[i] = 0;
    fa[0] = 1;
}
int main() { init_fa(); return fa[0]; }
";
    let (out, _) = rewrite_with(src, &[RuleId::MemsetInit], false);
    assert!(
        out.contains("memset(fa + 1, 0, (10000 - 1) * sizeof(int));"),
        "{}",
        out
    );
}

#[test]
fn memset_char_variant() {
    let src = "
int main() {
    char c[8];
    int i;
    for (i = 0; i < 8; i++) c[i] = 0;
    return c[3];
}
";
    let (out, _) = rewrite_with(src, &[RuleId::MemsetInit], false);
    assert!(
        out.contains("memset(c + 0, 0, (8 - 0) * sizeof(char));"),
        "{}",
        out
    );
}

#[test]
fn memset_rewrite_leaves_identical_array_contents() {
    let src = "
int fa[50];
int main() {
    int i;
    int sum;
    for (i = 0; i < 50; i++) fa[i] = 7;
    for (i = 1; i < 50; i++) fa[i] = 0;
    sum = 0;
    for (i = 0; i < 50; i++) sum += fa[i];
    printf(\"%d\", sum);
    return 0;
}
";
    // only the zero-fill loop matches the pattern; i is reused later so the
    // candidate is gated on liveness — use a dedicated function instead
    let src_fn = "
int fa[50];
void zero() {
    int i;
    for (i = 1; i < 50; i++) fa[i] = 0;
}
int main() {
    int i;
    int sum;
    for (i = 0; i < 50; i++) fa[i] = 7;
    zero();
    sum = 0;
    for (i = 0; i < 50; i++) sum += fa[i];
    printf(\"%d\", sum);
    return 0;
}
";
    let before = exec(src_fn, 1);
    assert_eq!(before.0, "7");
    let (out, _) = rewrite_with(src_fn, &[RuleId::MemsetInit], false);
    assert!(out.contains("memset"), "{}", out);
    assert_eq!(exec(&out, 1), before);
    let _ = src;
}

// ---- unsigned promotion --------------------------------------------------------

#[test]
fn unsigned_promotion_changes_only_the_declaration() {
    let src = "
int main() {
    int i;
    int s;
    s = 0;
    for (i = 0; i < 5; i++) s += i;
    printf(\"%d\", s);
    return 0;
}
";
    let before = exec(src, 1);
    let (out, _) = rewrite_with(src, &[RuleId::UnsignedPromote], false);
    assert!(out.contains("unsigned int i;"), "{}", out);
    assert!(out.contains("unsigned int s;"), "{}", out);
    assert_eq!(exec(&out, 1), before);
}

#[test]
fn negative_assignment_blocks_promotion() {
    let src = "int main() { int x; x = -1; return x + 1; }";
    let (out, _) = rewrite_with(src, &[RuleId::UnsignedPromote], false);
    assert!(
        out.contains("int x;") && !out.contains("unsigned"),
        "{}",
        out
    );
}

// ---- apply_plan mechanics ------------------------------------------------------

#[test]
fn empty_plan_is_identity() {
    let tu = parse_text("int main() { return 1; }", "t.c").unwrap();
    let (out, report) = apply_plan(&tu, &[], false).unwrap();
    assert_eq!(out, tu);
    assert!(report.applied.is_empty() && report.skipped.is_empty());
}

#[test]
fn advisory_findings_are_skipped_not_applied() {
    let src = "
int fib(int n);
int fib(int n) { if (n < 2) { return n; } return fib(n - 1) + fib(n - 2); }
int main() { return fib(4); }
";
    let tu = parse_text(src, "t.c").unwrap();
    let findings = detect(&tu, &[RuleId::AdvRecursion]);
    assert_eq!(findings.len(), 1);
    let (out, report) = apply_plan(&tu, &findings, true).unwrap();
    assert_eq!(out, tu);
    assert_eq!(report.skipped[0].1, SkipReason::Advisory);
}

#[test]
fn stale_spans_are_skipped() {
    // two findings target the same loop: memset first consumes it, the
    // count-down conversion then finds nothing
    let src = "
int fa[100];
void zero() {
    int i;
    for (i = 1; i < 100; i++) fa[i] = 0;
}
int main() { zero(); return 0; }
";
    let tu = parse_text(src, "t.c").unwrap();
    let mut findings = detect(&tu, &[RuleId::MemsetInit, RuleId::LoopCountdown]);
    sort_findings_for_plan(&mut findings);
    assert_eq!(findings.len(), 2);
    assert_eq!(
        findings[0].rule,
        RuleId::MemsetInit,
        "plan order puts memset first"
    );
    let (out, report) = apply_plan(&tu, &findings, false).unwrap();
    assert_eq!(report.applied.len(), 1);
    assert_eq!(report.skipped.len(), 1);
    assert_eq!(report.skipped[0].1, SkipReason::StaleSpan);
    assert!(pretty_print(&out).contains("memset"));
}

#[test]
fn foreign_spans_are_a_caller_error() {
    let tu = parse_text("int main() { return 1; }", "t.c").unwrap();
    let other = parse_text(
        "int main() { int i; for (i = 1; i <= 3; i++) rand(); return 1; }",
        "other.c",
    )
    .unwrap();
    let findings = detect(&other, &[RuleId::LoopCountdown]);
    assert_eq!(findings.len(), 1);
    let err = apply_plan(&tu, &findings, false).unwrap_err();
    assert!(matches!(err, RewriteError::SpanMismatch(_)));
}

#[test]
fn rewrites_are_idempotent_under_redetection() {
    let src = "
int a[10];
int fa[100];
void swap(int *x, int *y) { int t; t = *x; *x = *y; *y = t; }
void zero() {
    int i;
    for (i = 1; i < 100; i++) fa[i] = 0;
}
int main() {
    int i;
    for (i = 1; i <= 9; i++) a[i - 1] = rand();
    for (i = 0; i < 5; i++) {
        swap(&a[i], &a[i + 1]);
    }
    zero();
    return 0;
}
";
    let tu = parse_text(src, "t.c").unwrap();
    let rules = [
        RuleId::FnInline,
        RuleId::MemsetInit,
        RuleId::LoopCountdown,
        RuleId::UnsignedPromote,
    ];
    let mut findings = detect(&tu, &rules);
    sort_findings_for_plan(&mut findings);
    let applied_sites: Vec<_> = findings.iter().map(|f| (f.rule, f.span.clone())).collect();
    let (out, _) = apply_plan(&tu, &findings, false).unwrap();
    // no SAFE finding of the same rule at the same site survives
    let again = detect(&out, &rules);
    for f in &again {
        assert!(
            !applied_sites.contains(&(f.rule, f.span.clone())),
            "finding reappeared: {:?}",
            f
        );
    }
}

#[test]
fn plan_report_renders_applied_and_skipped() {
    let src = "
int count;
void bump() { count++; count++; }
int main() { bump(); return count; }
";
    let tu = parse_text(src, "t.c").unwrap();
    let findings = detect(&tu, &[RuleId::GlobalRegAlias]);
    let (out, report) = apply_plan(&tu, &findings, false).unwrap();
    let text =
        copt_core::rewrite::render_change_report(&report, &pretty_print(&tu), &pretty_print(&out));
    assert!(text.contains("GLOBAL_REG_ALIAS"), "{}", text);
    assert!(text.contains("functions touched: bump"), "{}", text);
    assert!(text.contains("+++ after"), "{}", text);
}

// ---- safety: unsafe alias really is unsafe ------------------------------------

#[test]
fn overriding_an_unsafe_alias_changes_behavior() {
    // the gate exists because the callee reads the global mid-function
    let src = "
int g;
int leaf() { return g; }
int main() {
    int seen;
    g = 1;
    g = g + 1;
    seen = leaf();
    g = g + 1;
    printf(\"%d\", seen);
    return g;
}
";
    let tu = parse_text(src, "t.c").unwrap();
    let findings = detect(&tu, &[RuleId::GlobalRegAlias]);
    let main_finding: Vec<Finding> = findings
        .into_iter()
        .filter(|f| f.function == "main")
        .collect();
    assert_eq!(main_finding[0].safety, Safety::UnsafeNeedsOverride);
    let before = exec(src, 1);
    let (out, _) = apply_plan(&tu, &main_finding, true).unwrap();
    let after = exec(&pretty_print(&out), 1);
    assert_ne!(
        before.0, after.0,
        "the forced alias desynchronizes the global"
    );
}
