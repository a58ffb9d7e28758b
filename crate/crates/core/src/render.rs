//! Text output: system files that parse back to the same system, rewrite
//! traces and verdict reports.

use std::fmt::Write;

use itertools::Itertools;

use crate::error::Result;
use crate::lm::{LmReport, Verdict};
use crate::rewrite::{Trace, Trs};

/// A system file accepted by [`crate::parse::parse_trs`]. Labels are always
/// written, so parsing the output gives back an equal system.
pub fn render_trs(trs: &Trs) -> String {
    let mut out = String::new();
    let sig = trs
        .signature()
        .symbols()
        .map(|s| format!("{}/{}", s.name, s.arity))
        .join(" ");
    writeln!(out, "sig: {sig}").unwrap();
    writeln!(out, "vars: {}", trs.variables().iter().join(" ")).unwrap();
    if let Some(p) = &trs.precedence {
        writeln!(out, "precedence: {}", p.iter().join(" > ")).unwrap();
    }
    writeln!(out, "rules:").unwrap();
    for r in trs.rules() {
        writeln!(out, "  [{}] {}", r.label, r).unwrap();
    }
    out
}

/// One line per step, `[label] at p: t -> t'`, followed by the result.
pub fn render_trace(trs: &Trs, trace: &Trace) -> Result<String> {
    let terms = trace.terms(trs)?;
    let mut out = String::new();
    for (step, w) in trace.steps.iter().zip(terms.windows(2)) {
        writeln!(out, "[{}] at {}: {} -> {}", step.label, step.position, w[0], w[1]).unwrap();
    }
    let n = trace.steps.len();
    writeln!(
        out,
        "normal form: {} ({n} step{})",
        trace.result,
        if n == 1 { "" } else { "s" }
    )
    .unwrap();
    Ok(out)
}

/// Summary line of a verdict, e.g. `LM-system: PASS (collapse bounded at depth 5)`.
pub fn verdict_line(report: &LmReport) -> String {
    let names = |v: Verdict| {
        report
            .conditions
            .iter()
            .filter(|c| c.verdict == v)
            .map(|c| c.name)
            .join(", ")
    };
    match report.overall {
        Verdict::Pass => match report.collapse_depth {
            Some(d) => format!("LM-system: PASS (collapse bounded at depth {d})"),
            None => "LM-system: PASS".to_string(),
        },
        Verdict::Fail => format!("LM-system: FAIL ({})", names(Verdict::Fail)),
        Verdict::Unknown => format!("LM-system: UNKNOWN ({})", names(Verdict::Unknown)),
    }
}

pub fn render_lm_report(report: &LmReport) -> String {
    let mut out = String::new();
    for c in &report.conditions {
        writeln!(out, "{}: {}  {}", c.name, c.verdict, c.detail).unwrap();
        if let Some(b) = &c.bound {
            writeln!(out, "    bound: {b}").unwrap();
        }
        for w in &c.witnesses {
            writeln!(out, "    - {w}").unwrap();
        }
    }
    if report.variable_preserving {
        writeln!(out, "variable-preserving: yes").unwrap();
    } else {
        writeln!(
            out,
            "variable-preserving: no ({})",
            report.variable_preservation_witnesses.join("; ")
        )
        .unwrap();
    }
    if let Some(cons) = &report.consequences {
        let held = cons.checks.iter().filter(|c| c.holds).count();
        writeln!(
            out,
            "consequences: {held} of {} hold (depth {}, {} terms{})",
            cons.checks.len(),
            cons.depth,
            cons.terms_examined,
            if cons.enumeration_complete { "" } else { ", truncated" }
        )
        .unwrap();
        for c in cons.checks.iter().filter(|c| !c.holds) {
            writeln!(
                out,
                "INTERNAL-INCONSISTENCY: {}: {}",
                c.name,
                c.witness.as_deref().unwrap_or("violated")
            )
            .unwrap();
        }
    }
    writeln!(out, "{}", verdict_line(report)).unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_trs;

    #[test]
    fn rendered_system_parses_back() {
        let src = "sig: f/2 i/1 g/1 b/0 c/0\nvars: x\nprecedence: f g i b c\nrules:\n f(x,i(x)) -> g(x)\n g(b) -> c\n";
        let trs = parse_trs(src).unwrap();
        let text = render_trs(&trs);
        assert_eq!(parse_trs(&text).unwrap(), trs);
        assert!(text.contains("[r2] g(b) -> c"));
    }

    #[test]
    fn trace_lines() {
        let trs = parse_trs("sig: f/2 i/1 g/1 b/0 c/0\nvars: x\nrules:\n f(x,i(x)) -> g(x)\n g(b) -> c\n").unwrap();
        let t = crate::parse::parse_term("f(b,i(b))", &trs).unwrap();
        let trace = trs.normalize(&t, 10).unwrap();
        let text = render_trace(&trs, &trace).unwrap();
        assert_eq!(
            text,
            "[r1] at e: f(b,i(b)) -> g(b)\n[r2] at e: g(b) -> c\nnormal form: c (2 steps)\n"
        );
    }
}
