//! Property tests: lexer totality, preprocessor robustness, and
//! order-independence of the hotspot aggregation.

use proptest::prelude::*;

use copt_core::frontend::{preprocess, tokenize};
use copt_core::profile::{
    event_count, event_percent, hotspot_table, parse_samples_file, render_samples_file,
    TableGroupBy,
};

proptest! {
    /// Every ASCII input either tokenizes or raises exactly one positioned
    /// error — no panics, no silent truncation.
    #[test]
    fn lexer_is_total_over_ascii(input in "[ -~\n\t]{0,80}") {
        match tokenize(&input) {
            Ok(tokens) => {
                for t in tokens {
                    prop_assert!(!t.text.is_empty());
                    prop_assert!(t.span.line_start >= 1 && t.span.col_start >= 1);
                }
            }
            Err(e) => {
                prop_assert!(e.span.line_start >= 1);
            }
        }
    }

    /// The preprocessor never panics on arbitrary directive-looking input.
    #[test]
    fn preprocessor_is_total(input in "[ -~\n]{0,120}") {
        let _ = preprocess(&input, &["X"]);
    }

    /// Integer-literal tokens always re-parse as non-negative decimals.
    #[test]
    fn integer_literals_are_nonnegative_decimal(input in "[0-9a-z +*]{0,40}") {
        if let Ok(tokens) = tokenize(&input) {
            for t in tokens {
                if t.kind == copt_core::frontend::TokenKind::IntLiteral {
                    prop_assert!(t.text.parse::<u64>().is_ok());
                }
            }
        }
    }

    /// Shuffling the record lines of a sampling log never changes the table.
    #[test]
    fn hotspot_table_is_permutation_invariant(order in proptest::sample::select(
        (0..24usize).collect::<Vec<_>>()
    )) {
        let base = "\
#meta\tduration_s=20\tinterval_s=0.001\tprocessors=1
#event\tCPU_CLK\tsav=2000000\trole=clock
#event\tINST\tsav=2000000\trole=instruction
CPU_CLK\ta\tx.c:1\t31
CPU_CLK\tb\tx.c:2\t4
CPU_CLK\tc\tx.c:3\t2
INST\ta\tx.c:1\t27
";
        let mut run = parse_samples_file(base).unwrap();
        let reference = hotspot_table(&run, TableGroupBy::Function, None);
        // rotate deterministically by the sampled amount
        let len = run.records.len().max(1);
        run.records.rotate_left(order % len);
        let rotated = hotspot_table(&run, TableGroupBy::Function, None);
        prop_assert_eq!(reference, rotated);
    }

    /// render -> parse is the identity on sampling runs built from valid
    /// component values.
    #[test]
    fn samples_render_parse_round_trip(
        samples in proptest::collection::vec(0u64..10_000, 1..6),
        sav in 1u64..5_000_000,
    ) {
        let mut text = String::from(
            "#meta\tduration_s=20\tinterval_s=0.001\tprocessors=1\n",
        );
        text.push_str(&format!("#event\tE\tsav={}\trole=clock\n", sav));
        for (i, s) in samples.iter().enumerate() {
            text.push_str(&format!("E\tf{}\tx.c:{}\t{}\n", i, i + 1, s));
        }
        let run = parse_samples_file(&text).unwrap();
        let again = parse_samples_file(&render_samples_file(&run)).unwrap();
        prop_assert_eq!(run, again);
    }

    /// events = samples x SAV exactly, and percentages stay within [0, 100].
    #[test]
    fn event_arithmetic_invariants(samples in 0u64..1_000_000, sav in 1u64..10_000_000) {
        prop_assert_eq!(event_count(samples, sav), samples * sav);
        let pct = event_percent(samples, samples.max(1)).unwrap();
        prop_assert!((0.0..=100.0).contains(&pct));
    }
}
