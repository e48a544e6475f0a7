//! Report rendering: machine-readable JSON and an aligned text table.

use serde::Serialize;
use serde_json::Value;

use pw_core::report::VerificationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Serialize)]
pub struct RunOutput {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
    pub options: OptionsEcho,
    pub report: VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
}

#[derive(Debug, Serialize)]
pub struct OptionsEcho {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
}

pub fn render_json(out: &RunOutput) -> String {
    let mut s = serde_json::to_string_pretty(out).expect("report serializes");
    s.push('\n');
    s
}

pub fn render_text(out: &RunOutput) -> String {
    let mut s = String::new();
    s.push_str(&format!("command: {}", out.command));
    if let Some(m) = &out.manifest {
        s.push_str(&format!("  ({m})"));
    }
    s.push('\n');
    s.push_str(&format!(
        "points={} seed={} tol={:e}\n",
        out.options.points, out.options.seed, out.options.tol
    ));

    if !out.report.checks.is_empty() {
        let name_w = out
            .report
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(5)
            .max(5);
        s.push('\n');
        s.push_str(&format!(
            "{:<name_w$}  {:>13}  {:>10}  {:<6}\n",
            "check", "max residual", "tolerance", "result"
        ));
        for c in &out.report.checks {
            s.push_str(&format!(
                "{:<name_w$}  {:>13.6e}  {:>10.1e}  {:<6}\n",
                c.name,
                c.max_residual,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" }
            ));
            if let Some(note) = &c.note {
                s.push_str(&format!("{:<name_w$}    note: {note}\n", ""));
            }
        }
        s.push_str(&format!(
            "\nsummary: {}/{} checks passed\n",
            out.report.summary.passed, out.report.summary.total
        ));
    }

    if let Some(payload) = &out.payload {
        s.push_str("\npayload:\n");
        s.push_str(&serde_json::to_string_pretty(payload).expect("payload serializes"));
        s.push('\n');
    }
    s
}

/// Structured error record for nonzero exits.
pub fn render_error(command: &str, err: &anyhow::Error, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let v = serde_json::json!({
                "command": command,
                "error": { "message": format!("{err:#}") },
            });
            let mut s = serde_json::to_string_pretty(&v).expect("error serializes");
            s.push('\n');
            s
        }
        OutputFormat::Text => format!("error ({command}): {err:#}\n"),
    }
}
