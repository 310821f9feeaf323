//! Abstract cost model. Weights are applied to a fixed set of operation
//! categories; the charging rules live in the interpreter and are documented
//! on [`CostModel`].

use std::collections::BTreeMap;

/// Bump when weights or charging rules change.
pub const COST_MODEL_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CostCategory {
    Arith,
    Compare,
    LogicalBranching,
    Bitwise,
    Load,
    Store,
    CallOverhead,
    Branch,
    DivMod,
    BuiltinCall,
    LoopBackEdge,
}

pub const COST_CATEGORIES: [CostCategory; 11] = [
    CostCategory::Arith,
    CostCategory::Compare,
    CostCategory::LogicalBranching,
    CostCategory::Bitwise,
    CostCategory::Load,
    CostCategory::Store,
    CostCategory::CallOverhead,
    CostCategory::Branch,
    CostCategory::DivMod,
    CostCategory::BuiltinCall,
    CostCategory::LoopBackEdge,
];

impl CostCategory {
    pub fn name(self) -> &'static str {
        match self {
            CostCategory::Arith => "arith",
            CostCategory::Compare => "compare",
            CostCategory::LogicalBranching => "logical_branching",
            CostCategory::Bitwise => "bitwise",
            CostCategory::Load => "load",
            CostCategory::Store => "store",
            CostCategory::CallOverhead => "call_overhead",
            CostCategory::Branch => "branch",
            CostCategory::DivMod => "div_mod",
            CostCategory::BuiltinCall => "builtin_call",
            CostCategory::LoopBackEdge => "loop_back_edge",
        }
    }

    pub fn from_name(name: &str) -> Option<CostCategory> {
        COST_CATEGORIES.iter().copied().find(|c| c.name() == name)
    }

    fn index(self) -> usize {
        COST_CATEGORIES.iter().position(|c| *c == self).unwrap()
    }
}

/// Weight table over the cost categories.
///
/// Charging rules (version 1):
/// * every variable read/write charges one load/store, except
///   `register`-hinted locals which are free — globals therefore cost the
///   same as plain locals per access, and the payoff of register aliasing is
///   the hint on the introduced local;
/// * referencing an array charges one load for materializing its base, and
///   each element access charges one more load/store;
/// * a comparison charges one `compare` plus one `arith` (the subtraction
///   that produces the flags), unless one operand is the literal `0`, in
///   which case the whole test is free: it folds into the flag update of the
///   preceding arithmetic, which is what makes count-down loops cheap;
/// * `&&`/`||` charge `logical_branching` each evaluation, `& | << >>`
///   charge `bitwise`, `+ - *` and unary operators charge `arith`,
///   `/ %` charge `div_mod`;
/// * `if`/`while`/`for`/`do` charge one `branch` per condition evaluation
///   and one `loop_back_edge` per completed iteration;
/// * a user call charges `call_overhead`, attributed to the callee (its
///   prologue); builtins charge a flat `builtin_call` in the caller, no
///   matter how much work the library routine does — `memset` is the point
///   of that rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostModel {
    weights: [u64; COST_CATEGORIES.len()],
}

impl Default for CostModel {
    fn default() -> Self {
        let mut m = CostModel {
            weights: [0; COST_CATEGORIES.len()],
        };
        m.set_weight(CostCategory::Arith, 1);
        m.set_weight(CostCategory::Compare, 1);
        m.set_weight(CostCategory::Bitwise, 1);
        m.set_weight(CostCategory::LogicalBranching, 2);
        m.set_weight(CostCategory::Load, 1);
        m.set_weight(CostCategory::Store, 1);
        m.set_weight(CostCategory::Branch, 1);
        m.set_weight(CostCategory::DivMod, 4);
        m.set_weight(CostCategory::CallOverhead, 8);
        m.set_weight(CostCategory::BuiltinCall, 2);
        m.set_weight(CostCategory::LoopBackEdge, 1);
        m
    }
}

impl CostModel {
    pub fn weight(&self, cat: CostCategory) -> u64 {
        self.weights[cat.index()]
    }

    pub fn set_weight(&mut self, cat: CostCategory, weight: u64) {
        self.weights[cat.index()] = weight;
    }

    /// Build from `(name, weight)` pairs over the default table; unknown
    /// names are reported back.
    pub fn from_pairs<'a>(
        pairs: impl IntoIterator<Item = (&'a str, u64)>,
    ) -> Result<CostModel, String> {
        let mut m = CostModel::default();
        for (name, w) in pairs {
            match CostCategory::from_name(name) {
                Some(cat) => m.set_weight(cat, w),
                None => return Err(format!("unknown cost category `{}`", name)),
            }
        }
        Ok(m)
    }
}

/// Execution cost tally: per-category counts plus weighted attribution by
/// function and by source line.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CostReport {
    pub counts: BTreeMap<CostCategory, u64>,
    pub per_function: BTreeMap<String, u64>,
    pub per_location: BTreeMap<String, u64>,
    pub total: u64,
}

impl CostReport {
    pub fn from_tallies(
        counts: [u64; COST_CATEGORIES.len()],
        per_function: BTreeMap<String, u64>,
        per_location: BTreeMap<String, u64>,
        model: &CostModel,
    ) -> CostReport {
        let mut map = BTreeMap::new();
        let mut total = 0u64;
        for cat in COST_CATEGORIES {
            let n = counts[cat.index()];
            map.insert(cat, n);
            total += n * model.weight(cat);
        }
        CostReport {
            counts: map,
            per_function,
            per_location,
            total,
        }
    }

    /// Recompute the weighted total from the per-category counts.
    pub fn recount(&self, model: &CostModel) -> u64 {
        self.counts.iter().map(|(c, n)| n * model.weight(*c)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Function,
    Location,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributionRow {
    pub scope: String,
    pub cost: u64,
    pub share_percent: f64,
}

/// Rank scopes by cost, descending; shares are rounded half-up to two
/// decimals and always refer to the full total.
pub fn cost_attribution(report: &CostReport, group_by: GroupBy) -> Vec<AttributionRow> {
    let map = match group_by {
        GroupBy::Function => &report.per_function,
        GroupBy::Location => &report.per_location,
    };
    let total: u64 = map.values().sum();
    let mut rows: Vec<AttributionRow> = map
        .iter()
        .map(|(scope, &cost)| AttributionRow {
            scope: scope.clone(),
            cost,
            share_percent: if total == 0 {
                0.0
            } else {
                round2(cost as f64 * 100.0 / total as f64)
            },
        })
        .collect();
    rows.sort_by(|a, b| b.cost.cmp(&a.cost).then_with(|| a.scope.cmp(&b.scope)));
    rows
}

pub(crate) fn round2(x: f64) -> f64 {
    (x * 100.0 + 0.5).floor() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_weights_match_documented_table() {
        let m = CostModel::default();
        assert_eq!(m.weight(CostCategory::Arith), 1);
        assert_eq!(m.weight(CostCategory::Compare), 1);
        assert_eq!(m.weight(CostCategory::Bitwise), 1);
        assert_eq!(m.weight(CostCategory::LogicalBranching), 2);
        assert_eq!(m.weight(CostCategory::Load), 1);
        assert_eq!(m.weight(CostCategory::Store), 1);
        assert_eq!(m.weight(CostCategory::Branch), 1);
        assert_eq!(m.weight(CostCategory::DivMod), 4);
        assert_eq!(m.weight(CostCategory::CallOverhead), 8);
        assert_eq!(m.weight(CostCategory::BuiltinCall), 2);
        assert_eq!(m.weight(CostCategory::LoopBackEdge), 1);
    }

    #[test]
    fn from_pairs_rejects_unknown_names() {
        assert!(CostModel::from_pairs([("arith", 3)]).is_ok());
        assert!(CostModel::from_pairs([("cache_miss", 3)]).is_err());
    }

    #[test]
    fn attribution_shares_sum_to_100() {
        let mut per_fn = BTreeMap::new();
        per_fn.insert("a".to_string(), 3u64);
        per_fn.insert("b".to_string(), 1u64);
        per_fn.insert("c".to_string(), 1u64);
        let report = CostReport {
            per_function: per_fn,
            total: 5,
            ..Default::default()
        };
        let rows = cost_attribution(&report, GroupBy::Function);
        let sum: f64 = rows.iter().map(|r| r.share_percent).sum();
        assert!((sum - 100.0).abs() <= 0.01, "shares sum to {}", sum);
        assert_eq!(rows[0].scope, "a");
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round2(79.48717), 79.49);
        assert_eq!(round2(84.375), 84.38);
        assert_eq!(round2(0.005), 0.01);
    }
}
