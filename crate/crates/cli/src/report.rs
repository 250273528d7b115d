use std::fmt::Write as _;

use fairclust::checks::LemmaCheck;
use fairclust::lp::FeasibilityReport;
use serde::{Deserialize, Serialize};

/// Either a fixed budget or the marker `"guessed"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BudgetField {
    Fixed(f64),
    Guessed(String),
}

impl BudgetField {
    pub fn guessed() -> Self {
        BudgetField::Guessed("guessed".to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub gamma: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub z_g: Option<BudgetField>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub k: usize,
    pub t: usize,
    pub lp_objective: f64,
    pub basic_lp_objective: f64,
    pub opt: f64,
    pub ratio: f64,
}

/// Machine-readable result of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: String,
    /// SHA-256 of the canonical instance JSON.
    pub instance_sha256: String,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub groups: usize,
    pub params: ReportParams,
    /// Budget the reported solution came from, when one was used.
    pub budget: Option<f64>,
    pub lp_objective: Option<f64>,
    pub support_size: Option<usize>,
    pub trials: Option<usize>,
    pub feasible_trials: Option<usize>,
    pub num_centers: Option<usize>,
    pub centers: Option<Vec<usize>>,
    pub cost_wprime: Option<f64>,
    pub cost_w: Option<f64>,
    pub opt: Option<f64>,
    /// True when rounding failed and the report carries `C = P'`.
    pub fallback: bool,
    pub feasibility: Option<FeasibilityReport>,
    pub gap: Option<GapSummary>,
    pub checks: Vec<LemmaCheck>,
}

impl RunReport {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Plain-text table for humans.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let mut row = |key: &str, value: String| {
            let _ = writeln!(s, "{key:<18} {value}");
        };
        let opt_f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
        let opt_u = |v: Option<usize>| v.map_or("-".to_string(), |x| x.to_string());
        row("mode", self.mode.clone());
        row("instance", format!("n={} k={} p={} groups={}", self.n, self.k, self.p, self.groups));
        row("sha256", self.instance_sha256.clone());
        row("budget", opt_f(self.budget));
        row("lp objective", opt_f(self.lp_objective));
        row("support size", opt_u(self.support_size));
        row(
            "trials",
            match (self.trials, self.feasible_trials) {
                (Some(t), Some(f)) => format!("{f}/{t} feasible"),
                _ => "-".to_string(),
            },
        );
        row(
            "centers",
            self.centers
                .as_ref()
                .map_or("-".to_string(), |c| format!("{c:?} ({})", c.len())),
        );
        row("cost (w')", opt_f(self.cost_wprime));
        row("cost (w)", opt_f(self.cost_w));
        row("optimum", opt_f(self.opt));
        if self.fallback {
            row("fallback", "C = P'".to_string());
        }
        if let Some(f) = &self.feasibility {
            row("lp violations", f.violations.len().to_string());
        }
        if let Some(g) = &self.gap {
            row("gap", format!("opt {:.6} / lp {:.6} = {:.4}", g.opt, g.lp_objective, g.ratio));
        }
        if !self.checks.is_empty() {
            let _ = writeln!(s, "\n{:<28} {:>14} {:>14} {:>6}", "check", "lhs", "rhs", "pass");
            for c in &self.checks {
                let _ = writeln!(s, "{:<28} {:>14.6e} {:>14.6e} {:>6}", c.name, c.lhs, c.rhs, c.pass);
            }
        }
        s
    }
}
