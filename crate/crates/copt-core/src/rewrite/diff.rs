//! Minimal line-based unified diff (LCS over lines), enough for change
//! reports on translation-unit-sized inputs.

pub fn unified_diff(before: &str, after: &str) -> String {
    let a: Vec<&str> = before.lines().collect();
    let b: Vec<&str> = after.lines().collect();
    if a == b {
        return String::new();
    }

    // LCS table
    let n = a.len();
    let m = b.len();
    let mut lcs = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }

    #[derive(PartialEq)]
    enum Op {
        Keep,
        Del,
        Add,
    }
    let mut script: Vec<(Op, String)> = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < n && j < m {
        if a[i] == b[j] {
            script.push((Op::Keep, a[i].to_string()));
            i += 1;
            j += 1;
        } else if lcs[i + 1][j] >= lcs[i][j + 1] {
            script.push((Op::Del, a[i].to_string()));
            i += 1;
        } else {
            script.push((Op::Add, b[j].to_string()));
            j += 1;
        }
    }
    while i < n {
        script.push((Op::Del, a[i].to_string()));
        i += 1;
    }
    while j < m {
        script.push((Op::Add, b[j].to_string()));
        j += 1;
    }

    // emit hunks with up to 2 lines of context
    const CTX: usize = 2;
    let mut out = String::from("--- before\n+++ after\n");
    let mut idx = 0;
    while idx < script.len() {
        if script[idx].0 == Op::Keep {
            idx += 1;
            continue;
        }
        let start = idx.saturating_sub(CTX);
        let mut end = idx;
        let mut quiet = 0;
        while end < script.len() && quiet <= CTX {
            if script[end].0 == Op::Keep {
                quiet += 1;
            } else {
                quiet = 0;
            }
            end += 1;
        }
        out.push_str("@@\n");
        for (op, line) in &script[start..end] {
            let prefix = match op {
                Op::Keep => ' ',
                Op::Del => '-',
                Op::Add => '+',
            };
            out.push(prefix);
            out.push_str(line);
            out.push('\n');
        }
        idx = end;
    }
    out
}
