use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetLimits {
    pub min_files: usize,
    pub max_wall_seconds: f64,
}

impl Default for BudgetLimits {
    fn default() -> Self {
        Self {
            min_files: 250,
            max_wall_seconds: 86_400.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetCheck {
    pub file_count: usize,
    pub wall_seconds: f64,
    pub limits: BudgetLimits,
    pub passed: bool,
}

/// Passes iff `file_count ≥ min_files` and `wall_seconds ≤ max_wall_seconds`; both bounds inclusive.
pub fn check_generation_budget(file_count: usize, wall_seconds: f64, limits: &BudgetLimits) -> BudgetCheck {
    BudgetCheck {
        file_count,
        wall_seconds,
        limits: *limits,
        passed: file_count >= limits.min_files && wall_seconds <= limits.max_wall_seconds,
    }
}
