//! Machine-readable report documents.

use serde::Serialize;

use flatfactor_core::embedding::{EmbeddingReport, ScopeVerdict};
use flatfactor_core::verdict::CheckOutcome;

pub const REPORT_SCHEMA: &str = "flatfactor/report/v1";

/// The report document emitted by `embed` and `verify`.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub schema: String,
    pub space: String,
    pub dim_a: usize,
    pub gram: Vec<Vec<f64>>,
    pub verdicts: Vec<VerdictEntry>,
    pub quotient: QuotientEntry,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictEntry {
    pub name: String,
    pub pass: bool,
    pub worst_slack: f64,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientEntry {
    pub classes: usize,
    pub sample_size: usize,
}

impl From<&CheckOutcome> for VerdictEntry {
    fn from(c: &CheckOutcome) -> Self {
        Self {
            name: c.name.clone(),
            pass: c.pass,
            worst_slack: c.worst_slack,
            witness: c.witness.clone(),
        }
    }
}

impl ReportDocument {
    pub fn from_embedding(report: &EmbeddingReport) -> Self {
        let mut verdicts: Vec<VerdictEntry> = vec![VerdictEntry {
            name: "theorem_scope".into(),
            pass: matches!(report.scope, ScopeVerdict::InScope),
            worst_slack: 0.0,
            witness: match &report.scope {
                ScopeVerdict::InScope => None,
                ScopeVerdict::NotInTheoremScope(w) => Some(w.clone()),
            },
        }];
        verdicts.extend(report.checks.iter().map(VerdictEntry::from));
        Self {
            schema: REPORT_SCHEMA.into(),
            space: report.space.clone(),
            dim_a: report.dim,
            gram: report.gram.clone(),
            verdicts,
            quotient: QuotientEntry {
                classes: report.quotient.classes,
                sample_size: report.quotient.sample_size,
            },
        }
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned human-readable verdict table.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("space      {}\n", self.space));
        out.push_str(&format!("dim A      {}\n", self.dim_a));
        out.push_str(&format!(
            "quotient   {} classes / {} samples\n",
            self.quotient.classes, self.quotient.sample_size
        ));
        out.push_str(&format!(
            "{:<24} {:>6}  {:>13}\n",
            "verdict", "pass", "worst slack"
        ));
        for v in &self.verdicts {
            out.push_str(&format!(
                "{:<24} {:>6}  {:>13.3e}\n",
                v.name,
                if v.pass { "yes" } else { "NO" },
                v.worst_slack
            ));
        }
        out
    }
}
