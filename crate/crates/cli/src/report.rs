//! Experiment reports: the single result object every subcommand
//! produces, rendered as deterministic text or JSON.
//!
//! Reports carry no timestamps, hostnames, or absolute paths, so repeated
//! runs with the same config and seed are bit-identical.

use serde::Serialize;

/// How the run obtained its numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    /// Seeded Poissonian counting simulation.
    Simulation,
    /// Exact quantum expectations (infinite statistics).
    Exact,
    /// Pure arithmetic on a measured-data fixture file.
    Fixture,
}

impl RunMode {
    fn label(self) -> &'static str {
        match self {
            RunMode::Simulation => "simulation",
            RunMode::Exact => "exact",
            RunMode::Fixture => "fixture",
        }
    }
}

/// A headline number. `uncertainty = None` marks an exact value.
#[derive(Debug, Clone, Serialize)]
pub struct Headline {
    pub label: String,
    pub value: f64,
    pub uncertainty: Option<f64>,
}

impl Headline {
    pub fn measured(label: impl Into<String>, value: f64, uncertainty: f64) -> Self {
        Headline {
            label: label.into(),
            value,
            uncertainty: Some(uncertainty),
        }
    }

    pub fn exact(label: impl Into<String>, value: f64) -> Self {
        Headline {
            label: label.into(),
            value,
            uncertainty: None,
        }
    }
}

/// A named table with string cells (pre-formatted numbers).
#[derive(Debug, Clone, Serialize)]
pub struct ReportTable {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// How a check compares its value against the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckRelation {
    /// `|value − target| ≤ tolerance`.
    Within,
    /// `value > target`.
    Above,
    /// `value ≤ target + tolerance`.
    Below,
}

/// A pass/fail comparison of a computed value against a reference.
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceCheck {
    pub label: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub relation: CheckRelation,
    pub pass: bool,
}

impl ReferenceCheck {
    pub fn within(label: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        ReferenceCheck {
            label: label.into(),
            value,
            target,
            tolerance,
            relation: CheckRelation::Within,
            pass: (value - target).abs() <= tolerance,
        }
    }

    /// A one-sided check: `value` must exceed `target`.
    pub fn above(label: impl Into<String>, value: f64, target: f64) -> Self {
        ReferenceCheck {
            label: label.into(),
            value,
            target,
            tolerance: 0.0,
            relation: CheckRelation::Above,
            pass: value > target,
        }
    }

    /// A one-sided ceiling: `value` must not exceed `target + tolerance`.
    pub fn below(label: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        ReferenceCheck {
            label: label.into(),
            value,
            target,
            tolerance,
            relation: CheckRelation::Below,
            pass: value <= target + tolerance,
        }
    }
}

/// The result object of one experiment run.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub mode: RunMode,
    /// Echo of the inputs that shaped the run, as key/value strings.
    pub inputs: Vec<(String, String)>,
    pub headlines: Vec<Headline>,
    pub tables: Vec<ReportTable>,
    /// Comparisons against reference values; informational in simulation
    /// and exact modes, decisive (exit code 3) in fixture mode.
    pub checks: Vec<ReferenceCheck>,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, mode: RunMode) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            mode,
            inputs: Vec::new(),
            headlines: Vec::new(),
            tables: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn input(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.inputs.push((key.into(), value.into()));
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Deterministic plain-text rendering.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let title = format!("{} [{}]", self.experiment, self.mode.label());
        out.push_str(&title);
        out.push('\n');
        out.push_str(&"=".repeat(title.len()));
        out.push('\n');

        if !self.inputs.is_empty() {
            out.push_str("\ninputs:\n");
            for (k, v) in &self.inputs {
                out.push_str(&format!("  {k} = {v}\n"));
            }
        }

        if !self.headlines.is_empty() {
            out.push('\n');
            for h in &self.headlines {
                match h.uncertainty {
                    Some(u) => out.push_str(&format!("{} = {:.6} +- {:.6}\n", h.label, h.value, u)),
                    None => out.push_str(&format!("{} = {:.6} (exact)\n", h.label, h.value)),
                }
            }
        }

        for table in &self.tables {
            out.push('\n');
            out.push_str(&render_table(table));
        }

        if !self.checks.is_empty() {
            out.push_str("\nreference checks:\n");
            for c in &self.checks {
                let status = if c.pass { "PASS" } else { "FAIL" };
                match c.relation {
                    CheckRelation::Within => out.push_str(&format!(
                        "  [{status}] {}: {:.6} vs {:.6} +- {:.6}\n",
                        c.label, c.value, c.target, c.tolerance
                    )),
                    CheckRelation::Above => out.push_str(&format!(
                        "  [{status}] {}: {:.6} > {:.6}\n",
                        c.label, c.value, c.target
                    )),
                    CheckRelation::Below if c.tolerance > 0.0 => out.push_str(&format!(
                        "  [{status}] {}: {:.6} <= {:.6} + {:.6}\n",
                        c.label, c.value, c.target, c.tolerance
                    )),
                    CheckRelation::Below => out.push_str(&format!(
                        "  [{status}] {}: {:.6} <= {:.6}\n",
                        c.label, c.value, c.target
                    )),
                }
            }
        }
        out
    }

    /// Deterministic pretty-printed JSON rendering.
    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn render_table(table: &ReportTable) -> String {
    let mut widths: Vec<usize> = table.columns.iter().map(|c| c.len()).collect();
    for row in &table.rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = format!("{}:\n", table.title);
    let header: Vec<String> = table
        .columns
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{:>w$}", c, w = widths[i]))
        .collect();
    out.push_str(&format!("  {}\n", header.join("  ")));
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:>w$}", c, w = widths[i]))
            .collect();
        out.push_str(&format!("  {}\n", cells.join("  ")));
    }
    out
}
