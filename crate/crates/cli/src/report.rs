//! Report assembly: JSON (schema 1), plain text and LaTeX.

use recipro::expr::{to_latex, Expression};
use recipro::system::{PDESystem, Report};
use serde::Serialize;

pub const SCHEMA: u32 = 1;

/// Residuals longer than this are elided in text output.
const TEXT_RESIDUAL_LIMIT: usize = 240;

#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub name: String,
    pub text: String,
    pub latex: String,
}

/// Something a command produced besides verdicts, e.g. a transformed system.
#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub title: String,
    pub entries: Vec<Entry>,
}

impl Artifact {
    pub fn system(title: &str, sys: &PDESystem) -> Artifact {
        let entries = sys
            .equations
            .iter()
            .map(|eq| Entry {
                name: eq.name.clone(),
                text: format!("{} = {}", eq.lhs, eq.rhs),
                latex: format!("{} = {}", to_latex(&eq.lhs), to_latex(&eq.rhs)),
            })
            .collect();
        Artifact { title: title.to_string(), entries }
    }

    pub fn pairs(title: &str, items: &[(String, String, String)]) -> Artifact {
        let entries = items.iter().map(|(n, t, l)| Entry { name: n.clone(), text: t.clone(), latex: l.clone() }).collect();
        Artifact { title: title.to_string(), entries }
    }

    pub fn expr(name: &str, e: &Expression) -> Entry {
        Entry { name: name.to_string(), text: e.to_string(), latex: to_latex(e) }
    }
}

#[derive(Debug, Serialize)]
struct CheckJson<'a> {
    name: &'a str,
    holds: bool,
    residual: String,
    rewrite_count: usize,
}

#[derive(Debug, Serialize)]
struct ReportJson<'a> {
    name: &'a str,
    holds: bool,
    checks: Vec<CheckJson<'a>>,
}

#[derive(Debug, Serialize)]
struct OutcomeJson<'a> {
    schema: u32,
    command: &'a str,
    target: &'a str,
    holds: bool,
    reports: Vec<ReportJson<'a>>,
    artifacts: &'a [Artifact],
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub command: String,
    pub target: String,
    pub reports: Vec<Report>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn new(command: &str, target: &str) -> Outcome {
        Outcome { command: command.to_string(), target: target.to_string(), ..Outcome::default() }
    }

    pub fn holds(&self) -> bool {
        self.reports.iter().all(|r| r.holds())
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.reports {
            for c in r.checks.iter().filter(|c| !c.holds) {
                out.push(format!("{}/{}", r.name, c.name));
            }
        }
        out
    }

    pub fn json(&self) -> serde_json::Value {
        let reports = self
            .reports
            .iter()
            .map(|r| ReportJson {
                name: &r.name,
                holds: r.holds(),
                checks: r
                    .checks
                    .iter()
                    .map(|c| CheckJson { name: &c.name, holds: c.holds, residual: c.residual.to_string(), rewrite_count: c.rewrite_count })
                    .collect(),
            })
            .collect();
        let o = OutcomeJson {
            schema: SCHEMA,
            command: &self.command,
            target: &self.target,
            holds: self.holds(),
            reports,
            artifacts: &self.artifacts,
        };
        serde_json::to_value(o).expect("report serializes")
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for a in &self.artifacts {
            out.push_str(&format!("{}\n", a.title));
            for e in &a.entries {
                out.push_str(&format!("  {}: {}\n", e.name, e.text));
            }
        }
        for r in &self.reports {
            let n = r.checks.len();
            let ok = r.checks.iter().filter(|c| c.holds).count();
            out.push_str(&format!("{}: {} ({}/{} checks)\n", r.name, if r.holds() { "HOLDS" } else { "FAILS" }, ok, n));
            for c in &r.checks {
                if c.holds {
                    out.push_str(&format!("  ok    {}\n", c.name));
                } else {
                    let mut res = c.residual.to_string();
                    if res.len() > TEXT_RESIDUAL_LIMIT {
                        let cut = (0..=TEXT_RESIDUAL_LIMIT).rev().find(|&i| res.is_char_boundary(i)).unwrap_or(0);
                        res.truncate(cut);
                        res.push_str(" ...");
                    }
                    out.push_str(&format!("  FAIL  {}\n        residual: {}\n", c.name, res));
                }
            }
        }
        out.push_str(&format!("{} {}: {}\n", self.command, self.target, if self.holds() { "all checks hold" } else { "some checks fail" }));
        out
    }

    pub fn latex(&self) -> String {
        let mut out = format!("% recipro {} {}\n", self.command, self.target);
        for a in &self.artifacts {
            out.push_str(&format!("\\paragraph{{{}}}\n\\begin{{align*}}\n", escape(&a.title)));
            let lines: Vec<String> = a.entries.iter().map(|e| format!("  &{} && \\text{{({})}}", e.latex, escape(&e.name))).collect();
            out.push_str(&lines.join(" \\\\\n"));
            out.push_str("\n\\end{align*}\n");
        }
        for r in &self.reports {
            out.push_str(&format!("\\paragraph{{{}}} {}\n\\begin{{itemize}}\n", escape(&r.name), if r.holds() { "holds" } else { "fails" }));
            for c in &r.checks {
                out.push_str(&format!("  \\item {}: ${}$\n", escape(&c.name), c.residual_latex()));
            }
            out.push_str("\\end{itemize}\n");
        }
        out
    }
}

fn escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '_' | '&' | '%' | '#' | '$' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            '^' => out.push_str("\\^{}"),
            '~' => out.push_str("\\~{}"),
            '\\' => out.push_str("\\textbackslash{}"),
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use recipro::system::Check;

    #[test]
    fn json_shape() {
        let mut rep = Report::new("r");
        rep.push(Check::new("zero", Expression::zero(), 3));
        rep.push(Check::new("one", Expression::one(), 0));
        let mut o = Outcome::new("verify-conserved", "chh");
        o.reports.push(rep);
        let v = o.json();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["holds"], false);
        assert_eq!(v["reports"][0]["checks"][1]["residual"], "1");
        assert_eq!(o.failures(), vec!["r/one".to_string()]);
    }

    #[test]
    fn latex_escapes_names() {
        assert_eq!(escape("a_b^c"), "a\\_b\\^{}c");
    }
}
