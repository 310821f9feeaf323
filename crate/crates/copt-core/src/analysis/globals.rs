//! Global-variable usage counting and the call-graph facts behind the
//! register-alias legality check and the recursion advisory.

use std::collections::{HashMap, HashSet};

use crate::frontend::ast::*;

/// For each global used by `f`: its name, the number of uses inside `f`,
/// and whether `f` (transitively) calls a user function that itself touches
/// the global. A store through an index (`g[i] = x`) counts as two uses —
/// the base address read and the element write.
pub fn global_hot_uses(tu: &TranslationUnit, f: &FunctionDef) -> Vec<(String, u32, bool)> {
    let global_names: HashSet<&str> = tu.globals.iter().map(|g| g.name.as_str()).collect();
    let mut counts: HashMap<&str, u32> = HashMap::new();

    f.walk_exprs(&mut |e| match e {
        Expr::Var { name, .. } if global_names.contains(name.as_str()) => {
            *counts
                .entry(tu.global(name).unwrap().name.as_str())
                .or_insert(0) += 1;
        }
        Expr::Assign { target, .. } | Expr::IncDec { target, .. } => {
            if let Expr::Index { base, .. } = target.as_ref() {
                if let Expr::Var { name, .. } = base.as_ref() {
                    if global_names.contains(name.as_str()) {
                        *counts
                            .entry(tu.global(name).unwrap().name.as_str())
                            .or_insert(0) += 1;
                    }
                }
            }
        }
        _ => {}
    });

    let reachable = reachable_user_callees(tu, &f.name);
    tu.globals
        .iter()
        .filter_map(|g| {
            let uses = counts.get(g.name.as_str()).copied()?;
            let touched_by_callee = reachable.iter().any(|callee| {
                tu.function(callee)
                    .is_some_and(|cf| references_global(cf, &g.name))
            });
            Some((g.name.clone(), uses, touched_by_callee))
        })
        .collect()
}

fn references_global(f: &FunctionDef, global: &str) -> bool {
    let mut found = false;
    f.walk_exprs(&mut |e| {
        if let Expr::Var { name, .. } = e {
            if name == global {
                found = true;
            }
        }
    });
    found
}

/// User functions reachable through calls from `f` (excluding `f` itself
/// unless it is reachable through a cycle).
pub fn reachable_user_callees(tu: &TranslationUnit, from: &str) -> HashSet<String> {
    let edges = call_graph(tu);
    let mut seen: HashSet<String> = HashSet::new();
    let mut stack: Vec<String> = edges
        .get(from)
        .cloned()
        .unwrap_or_default()
        .into_iter()
        .collect();
    while let Some(n) = stack.pop() {
        if seen.insert(n.clone()) {
            if let Some(next) = edges.get(n.as_str()) {
                stack.extend(next.iter().cloned());
            }
        }
    }
    seen
}

/// Direct user-function call edges.
pub fn call_graph(tu: &TranslationUnit) -> HashMap<String, HashSet<String>> {
    let mut edges: HashMap<String, HashSet<String>> = HashMap::new();
    for f in &tu.functions {
        let mut callees = HashSet::new();
        f.walk_exprs(&mut |e| {
            if let Expr::Call { name, .. } = e {
                if tu.function(name).is_some() {
                    callees.insert(name.clone());
                }
            }
        });
        edges.insert(f.name.clone(), callees);
    }
    edges
}

/// True iff `name` can call itself, directly or through a cycle.
pub fn is_recursive(tu: &TranslationUnit, name: &str) -> bool {
    reachable_user_callees(tu, name).contains(name)
}
