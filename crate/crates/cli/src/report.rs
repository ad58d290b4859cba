//! Structured run reports: one human-readable text rendering and one
//! machine-readable JSON document (stable key order = field order),
//! written side by side.

use hamkit_core::certificate::{Certificate, CorollaryReport, Thresholds};
use hamkit_core::hypotheses::HypothesisReport;
use hamkit_core::solver::{ConeMappingReport, SolutionResult, SolutionValidation};
use hamkit_core::split::SplitReport;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct HypothesesOut {
    pub reports: Vec<HypothesisReport>,
    /// Hypotheses the requested variant relies on.
    pub required: Vec<String>,
    pub required_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionOut {
    pub converged: bool,
    pub diverged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub grid_points: usize,
}

impl SolutionOut {
    pub fn from_result(result: &SolutionResult) -> Self {
        Self {
            converged: result.converged,
            diverged: result.diverged,
            iterations: result.iterations,
            residual: result.residual,
            grid_points: result.x.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PinnedCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct ReproduceOut {
    pub checks: Vec<PinnedCheck>,
    pub passed: bool,
}

impl ReproduceOut {
    pub fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(PinnedCheck {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn finish(&mut self) {
        self.passed = self.checks.iter().all(|c| c.passed);
    }
}

/// Self-contained record of one command run; embeds the config text that
/// produced it.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: String,
    pub hypotheses: Option<HypothesesOut>,
    pub split_check: Option<SplitReport>,
    pub thresholds: Option<Thresholds>,
    pub certificate: Option<Certificate>,
    pub corollary: Option<CorollaryReport>,
    pub solution: Option<SolutionOut>,
    pub validation: Option<SolutionValidation>,
    pub cone_mapping: Option<ConeMappingReport>,
    pub reproduce: Option<ReproduceOut>,
    /// Whether the command's primary assertion holds; drives the exit code.
    pub assertion_holds: bool,
}

impl RunReport {
    pub fn new(command: &str, config: String) -> Self {
        Self {
            tool: "hamkit",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            hypotheses: None,
            split_check: None,
            thresholds: None,
            certificate: None,
            corollary: None,
            solution: None,
            validation: None,
            cone_mapping: None,
            reproduce: None,
            assertion_holds: false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn fmt_witness(witness: &Option<Vec<f64>>) -> String {
    match witness {
        None => "-".to_string(),
        Some(coords) => {
            let parts: Vec<String> = coords.iter().map(|c| format!("{c:.6}")).collect();
            format!("({})", parts.join(", "))
        }
    }
}

pub fn render_text(report: &RunReport) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(format!(
        "hamkit {} — {}",
        report.version, report.command
    ));
    line("=".repeat(60));

    if let Some(h) = &report.hypotheses {
        line("kernel hypotheses".to_string());
        for r in &h.reports {
            line(format!(
                "  {:6} {}  worst margin {:+.3e}  witness {}  (grid {})",
                r.hypothesis.to_string(),
                flag(r.passed),
                r.worst_margin,
                fmt_witness(&r.witness),
                r.grid_size,
            ));
        }
        line(format!(
            "  required for this variant [{}]: {}",
            h.required.join(", "),
            flag(h.required_pass),
        ));
        line(String::new());
    }

    if let Some(s) = &report.split_check {
        line(format!(
            "monotone split {} (worst violation {:.3e} over {} samples on [0, {:.3}])",
            flag(s.passed),
            s.worst_violation,
            s.samples,
            s.x_max,
        ));
        if let Some(w) = &s.worst_witness {
            line(format!(
                "  worst: {:?} near x in [{:.6}, {:.6}]",
                w.clause, w.x_lo, w.x_hi
            ));
        }
        line(String::new());
    }

    if let Some(t) = &report.thresholds {
        line(format!("thresholds ({})", t.variant));
        line(format!("  I1 = {:.12e}  (exact {})", t.i1, t.exact.i1));
        line(format!("  I2 = {:.12e}  (exact {})", t.i2, t.exact.i2));
        line(format!("  I3 = {:.12e}  (exact {})", t.i3, t.exact.i3));
        if t.i3 != t.i3_literal {
            line(format!(
                "  I3 (literal full-interval) = {:.12e}  (exact {}) — differs from the \
                 half-interval convention; margins use the larger",
                t.i3_literal, t.exact.i3_literal
            ));
        }
        line(format!("  I4 = {:.12e}  (exact {})", t.i4, t.exact.i4));
        line(String::new());
    }

    if let Some(c) = &report.certificate {
        line(format!(
            "certificate ({}) {}",
            c.variant,
            if c.satisfied { "SATISFIED" } else { "NOT SATISFIED" }
        ));
        line(format!(
            "  params a={} b={} c={} d={}",
            c.params.a, c.params.b, c.params.c, c.params.d
        ));
        let labels = ["(1)", "(2)", "(3)", "(4)"];
        for (label, (margin, bound)) in labels
            .iter()
            .zip(c.margins.iter().zip(c.exact_bounds.iter()))
        {
            line(format!(
                "  condition {label}: margin {:+.6e}  bound {}",
                margin, bound
            ));
        }
        for note in c.notes.lines() {
            line(format!("  note: {note}"));
        }
        line(String::new());
    }

    if let Some(c) = &report.corollary {
        line(format!("corollary relations {}", flag(c.passed)));
        line(format!(
            "  (1) d < bound: d = {}, bound = {:.6e}, slack {:+.6e} {}",
            c.relation1.value,
            c.relation1.bound,
            c.relation1.slack,
            flag(c.relation1.passed)
        ));
        line(format!(
            "  (2) a < bound (when applicable: {}): a = {}, bound = {:.6e} {}",
            c.relation2.applicable,
            c.relation2.value,
            c.relation2.bound,
            flag(c.relation2.passed)
        ));
        line(String::new());
    }

    if let Some(s) = &report.solution {
        line(format!(
            "solve: {} after {} iterations, residual {:.3e} on {} nodes{}",
            if s.converged { "converged" } else { "did not converge" },
            s.iterations,
            s.residual,
            s.grid_points,
            if s.diverged { " (diverged)" } else { "" },
        ));
        line(String::new());
    }

    if let Some(v) = &report.validation {
        line("solution validation".to_string());
        line(format!(
            "  refined-quadrature residual {:.3e}",
            v.refined_residual
        ));
        if v.trivial {
            line("  trivial solution (identically zero)".to_string());
        } else {
            line(format!(
                "  positivity on the open interval: {} (min interior {:.6e})",
                flag(v.positive_interior),
                v.min_interior
            ));
        }
        line(format!("  cone membership: {}", flag(v.membership.passed)));
        for clause in &v.membership.clauses {
            line(format!(
                "    {} {}  worst margin {:+.3e}",
                clause.clause,
                flag(clause.passed),
                clause.worst_margin
            ));
        }
        if let Some(defect) = v.symmetry_defect {
            line(format!("  symmetry defect {:.3e}", defect));
        }
        line(format!(
            "  functionals: alpha {:.6e}  beta {:.6e}  theta {:.6e}  psi {:.6e}",
            v.functionals.alpha, v.functionals.beta, v.functionals.theta, v.functionals.psi
        ));
        line(String::new());
    }

    if let Some(m) = &report.cone_mapping {
        line(format!("cone mapping spot check {}", flag(m.passed)));
        line(String::new());
    }

    if let Some(r) = &report.reproduce {
        line("pinned reproduction checks".to_string());
        for check in &r.checks {
            line(format!("  {} {} — {}", flag(check.passed), check.name, check.detail));
        }
        line(format!("reproduction {}", flag(r.passed)));
        line(String::new());
    }

    line(format!(
        "primary assertion: {}",
        flag(report.assertion_holds)
    ));
    out
}

/// Two-column table `node<TAB>value` with 17 significant digits.
pub fn solution_table(result: &SolutionResult) -> String {
    let mut out = String::from("# node\tvalue\n");
    for (t, v) in result.x.nodes().iter().zip(result.x.values()) {
        out.push_str(&format!("{t:.16e}\t{v:.16e}\n"));
    }
    out
}

/// Two-column table `iteration<TAB>residual`.
pub fn residual_table(result: &SolutionResult) -> String {
    let mut out = String::from("# iteration\tresidual\n");
    for (i, r) in result.history.iter().enumerate() {
        out.push_str(&format!("{}\t{r:.16e}\n", i + 1));
    }
    out
}
