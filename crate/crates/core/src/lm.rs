//! The LM-system decision pipeline and the normalizing transformations.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::closure::{forward_closure_witness, innermost_one_step_check, DEFAULT_FC_DEPTH, REDUNDANCY_NOTION};
use crate::consequences::{consequence_checks, ConsequenceReport};
use crate::enumerate::{subterm_collapse_search, DEFAULT_MAX_TERMS};
use crate::error::{Error, Result};
use crate::lpo::{check_termination, Precedence};
use crate::overlap::{critical_pairs, rhs_closure, CriticalPair, Equation, RootPair};
use crate::rewrite::{Rule, Trs, DEFAULT_FUEL};
use crate::term::{Name, Position, Term};

/// Default depth of the collapse search.
pub const DEFAULT_COLLAPSE_DEPTH: usize = 5;
/// Default depth of the consequence checks.
pub const DEFAULT_CONSEQUENCE_DEPTH: usize = 3;
/// Step budget per normalization in [`lm_verdict`] when termination was not
/// proved.
pub const UNPROVED_FUEL: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

/// Rules whose two sides have different variable sets; empty when the system
/// is variable-preserving.
pub fn variable_preservation_witnesses(trs: &Trs) -> Vec<(String, Name)> {
    trs.rules()
        .iter()
        .flat_map(|r| r.erased_vars().into_iter().map(|x| (r.label.clone(), x)))
        .collect()
}

pub fn is_variable_preserving(trs: &Trs) -> bool {
    variable_preservation_witnesses(trs).is_empty()
}

/// Violations of quasi-determinism, one list per condition.
#[derive(Debug, Clone, Default, Serialize)]
pub struct QuasiDeterminism {
    pub variable_sides: Vec<Equation>,
    pub root_stable: Vec<Equation>,
    pub repetitions: Vec<(Equation, Equation)>,
}

impl QuasiDeterminism {
    pub fn holds(&self) -> bool {
        self.variable_sides.is_empty() && self.root_stable.is_empty() && self.repetitions.is_empty()
    }
}

/// No variable side, no root-stable equation, and no unordered root pair
/// shared by two distinct equations.
pub fn quasi_determinism(eqs: &[Equation]) -> QuasiDeterminism {
    let mut out = QuasiDeterminism::default();
    let mut first_with: BTreeMap<RootPair, usize> = BTreeMap::new();
    for (i, e) in eqs.iter().enumerate() {
        if e.lhs.is_var() || e.rhs.is_var() {
            out.variable_sides.push(e.clone());
            continue;
        }
        if e.is_root_stable() {
            out.root_stable.push(e.clone());
        }
        let rp = e.root_pair().expect("non-variable sides");
        match first_with.get(&rp) {
            Some(&j) => out.repetitions.push((eqs[j].clone(), e.clone())),
            None => {
                first_with.insert(rp, i);
            }
        }
    }
    out
}

pub fn is_quasi_deterministic(eqs: &[Equation]) -> bool {
    quasi_determinism(eqs).holds()
}

/// Outcome of the confluence check.
#[derive(Debug, Clone, Serialize)]
pub struct Confluence {
    pub verdict: Verdict,
    pub critical_pairs: usize,
    /// Critical pairs with distinct normal forms.
    pub failures: Vec<(CriticalPair, Term, Term)>,
}

/// Normalizes both sides of every critical pair. Distinct normal forms
/// refute confluence outright; joinability of all pairs proves it only for
/// terminating systems.
pub fn check_confluence(trs: &Trs, terminating: bool, fuel: usize) -> Result<Confluence> {
    let cps = critical_pairs(trs);
    let mut failures = Vec::new();
    for cp in &cps {
        let a = trs.normal_form(&cp.left, fuel)?;
        let b = trs.normal_form(&cp.right, fuel)?;
        if a != b {
            failures.push((cp.clone(), a, b));
        }
    }
    let verdict = if !failures.is_empty() {
        Verdict::Fail
    } else if terminating {
        Verdict::Pass
    } else {
        Verdict::Unknown
    };
    Ok(Confluence {
        verdict,
        critical_pairs: cps.len(),
        failures,
    })
}

/// Every rhs replaced by its normal form.
pub fn right_reduce(trs: &Trs, fuel: usize) -> Result<Trs> {
    let rules = trs
        .rules()
        .iter()
        .map(|r| {
            Ok(Rule::new(
                r.label.clone(),
                r.lhs.clone(),
                trs.normal_form(&r.rhs, fuel)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    trs.with_rules(rules)
}

/// A rule removed by [`almost_left_reduce`].
#[derive(Debug, Clone, Serialize)]
pub struct Deletion {
    pub rule: String,
    pub lhs: Term,
    pub position: Position,
    pub matched: String,
}

/// First rule (file order) whose lhs has, strictly below the root, an
/// instance of another rule's lhs.
pub fn left_reducible_rule(rules: &[Rule]) -> Option<Deletion> {
    for (i, r) in rules.iter().enumerate() {
        for p in r.lhs.fpos().into_iter().skip(1) {
            let sub = r.lhs.get(&p).expect("own position");
            for (j, other) in rules.iter().enumerate() {
                if i != j && crate::subst::match_term(&other.lhs, sub).is_some() {
                    return Some(Deletion {
                        rule: r.label.clone(),
                        lhs: r.lhs.clone(),
                        position: p,
                        matched: other.label.clone(),
                    });
                }
            }
        }
    }
    None
}

/// Deletes rules whose lhs contains a proper instance of another remaining
/// lhs until none is left. Root overlaps are kept.
pub fn almost_left_reduce(trs: &Trs) -> Result<(Trs, Vec<Deletion>)> {
    let mut rules = trs.rules().to_vec();
    let mut log = Vec::new();
    while let Some(d) = left_reducible_rule(&rules) {
        rules.retain(|r| r.label != d.rule);
        log.push(d);
    }
    Ok((trs.with_rules(rules)?, log))
}

/// Bounds and switches for [`lm_verdict`].
#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub fuel: usize,
    pub collapse_depth: usize,
    pub max_terms: usize,
    pub precedence: Option<Precedence>,
    pub fc_depth: usize,
    pub consequence_depth: usize,
    pub run_consequences: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            fuel: DEFAULT_FUEL,
            collapse_depth: DEFAULT_COLLAPSE_DEPTH,
            max_terms: DEFAULT_MAX_TERMS,
            precedence: None,
            fc_depth: DEFAULT_FC_DEPTH,
            consequence_depth: DEFAULT_CONSEQUENCE_DEPTH,
            run_consequences: true,
        }
    }
}

/// One condition of the pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub name: &'static str,
    pub verdict: Verdict,
    /// Bound under which a pass holds, when the check is bounded.
    pub bound: Option<String>,
    pub detail: String,
    pub witnesses: Vec<String>,
}

impl ConditionReport {
    fn new(name: &'static str, verdict: Verdict, detail: impl Into<String>) -> Self {
        ConditionReport {
            name,
            verdict,
            bound: None,
            detail: detail.into(),
            witnesses: Vec::new(),
        }
    }
}

pub const CONDITION_NAMES: [&str; 7] = [
    "terminating",
    "confluent",
    "right-reduced",
    "almost-left-reduced",
    "non-subterm-collapsing",
    "forward-closed",
    "quasi-deterministic RHS closure",
];

/// Full verdict with per-condition evidence.
#[derive(Debug, Clone, Serialize)]
pub struct LmReport {
    pub overall: Verdict,
    pub conditions: Vec<ConditionReport>,
    pub variable_preserving: bool,
    pub variable_preservation_witnesses: Vec<String>,
    pub rhs_closure: Vec<Equation>,
    pub quasi_determinism: QuasiDeterminism,
    pub termination_precedence: Option<Precedence>,
    /// Depth up to which the collapse search was exhaustive.
    pub collapse_depth: Option<usize>,
    pub consequences: Option<ConsequenceReport>,
    pub internal_inconsistency: bool,
}

impl LmReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Bounds of the conditions that passed under a bound.
    pub fn bounds(&self) -> Vec<String> {
        self.conditions
            .iter()
            .filter(|c| c.verdict == Verdict::Pass)
            .filter_map(|c| c.bound.clone())
            .collect()
    }
}

/// A rule whose rhs contains an instance of its own lhs, which gives an
/// infinite rewrite sequence.
pub fn self_embedding_rule(trs: &Trs) -> Option<(&Rule, Position)> {
    trs.rules().iter().find_map(|r| {
        r.rhs
            .fpos()
            .into_iter()
            .find(|p| crate::subst::match_term(&r.lhs, r.rhs.get(p).expect("own position")).is_some())
            .map(|p| (r, p))
    })
}

fn fuel_or<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::FuelExhausted { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs the seven conditions in order. Every condition is evaluated so that
/// all failures are reported. Conditions whose proof relies on convergence
/// are `Unknown` unless convergence was established.
pub fn lm_verdict(trs: &Trs, opts: &CheckOptions) -> LmReport {
    let mut conditions = Vec::new();

    // termination
    let file_prec = match &trs.precedence {
        Some(order) => Precedence::new(order.clone()).ok(),
        None => None,
    };
    let prec = opts.precedence.as_ref().or(file_prec.as_ref());
    let (terminating, termination_precedence) = match check_termination(trs, prec) {
        Ok(t) if t.proved => {
            let p = t.precedence.clone().expect("certificate");
            let how = if t.searched { "found" } else { "given" };
            conditions.push(ConditionReport::new(
                CONDITION_NAMES[0],
                Verdict::Pass,
                format!("LPO with {how} precedence {p}"),
            ));
            (true, Some(p))
        }
        Ok(t) => {
            let detail = match &t.failing_rule {
                Some(l) => format!("rule {l} is not decreasing under the given precedence"),
                None => "no precedence orients all rules under LPO".to_string(),
            };
            let mut rep = ConditionReport::new(CONDITION_NAMES[0], Verdict::Unknown, detail);
            if let Some((r, p)) = self_embedding_rule(trs) {
                rep.verdict = Verdict::Fail;
                rep.detail = format!(
                    "rule {} rewrites its lhs to a term containing an instance of it at {}",
                    r.label, p
                );
                rep.witnesses.push(r.to_string());
            }
            conditions.push(rep);
            (false, None)
        }
        Err(e) => {
            conditions.push(ConditionReport::new(
                CONDITION_NAMES[0],
                Verdict::Unknown,
                format!("{e}"),
            ));
            (false, None)
        }
    };

    // Without a termination proof a normalization may diverge while its term
    // keeps growing, so the searches below get a smaller step budget.
    let fuel = if terminating {
        opts.fuel
    } else {
        opts.fuel.min(UNPROVED_FUEL)
    };

    // confluence
    let confluent = match fuel_or(check_confluence(trs, terminating, fuel)) {
        Ok(Some(c)) => {
            let mut rep = ConditionReport::new(
                CONDITION_NAMES[1],
                c.verdict,
                format!("{} critical pairs, {} not joinable", c.critical_pairs, c.failures.len()),
            );
            if c.verdict == Verdict::Unknown {
                rep.detail
                    .push_str("; joinability proves confluence only with termination");
            }
            rep.witnesses = c
                .failures
                .iter()
                .map(|(cp, a, b)| format!("{cp}: normal forms {a} and {b}"))
                .collect();
            conditions.push(rep);
            c.verdict == Verdict::Pass
        }
        Ok(None) => {
            conditions.push(ConditionReport::new(
                CONDITION_NAMES[1],
                Verdict::Unknown,
                format!("normalization exceeded {fuel} steps"),
            ));
            false
        }
        Err(e) => {
            conditions.push(ConditionReport::new(
                CONDITION_NAMES[1],
                Verdict::Unknown,
                e.to_string(),
            ));
            false
        }
    };
    let convergent = terminating && confluent;

    // right-reduced: every rhs irreducible
    let reducible: Vec<&Rule> = trs.rules().iter().filter(|r| !trs.is_irreducible(&r.rhs)).collect();
    let mut rep = ConditionReport::new(
        CONDITION_NAMES[2],
        if reducible.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        if reducible.is_empty() {
            "every right-hand side is irreducible".to_string()
        } else {
            format!("{} right-hand sides are reducible", reducible.len())
        },
    );
    rep.witnesses = reducible.iter().map(|r| format!("[{}] {}", r.label, r)).collect();
    conditions.push(rep);

    // almost-left-reduced
    let rep = match left_reducible_rule(trs.rules()) {
        None => ConditionReport::new(
            CONDITION_NAMES[3],
            Verdict::Pass,
            "no lhs contains a proper instance of another lhs",
        ),
        Some(d) => {
            let mut rep = ConditionReport::new(
                CONDITION_NAMES[3],
                Verdict::Fail,
                format!("lhs of {} contains an instance of the lhs of {}", d.rule, d.matched),
            );
            rep.witnesses.push(format!("{} at {}", d.lhs, d.position));
            rep
        }
    };
    conditions.push(rep);

    // non-subterm-collapsing, bounded
    let mut collapse_depth = None;
    match subterm_collapse_search(trs, opts.collapse_depth, opts.max_terms, fuel) {
        Ok(search) => {
            collapse_depth = Some(search.depth_complete);
            let bound = format!(
                "depth {} complete (requested {}), {} terms, variables {}",
                search.depth_complete,
                search.depth_requested,
                search.terms_examined,
                search.variables.join(",")
            );
            let mut rep = match &search.witness {
                Some(w) => {
                    let mut rep = ConditionReport::new(
                        CONDITION_NAMES[4],
                        Verdict::Fail,
                        "a term equals one of its proper subterms",
                    );
                    rep.witnesses.push(format!(
                        "{} and its subterm at {} both normalize to {}",
                        w.term, w.position, w.normal_form
                    ));
                    rep
                }
                None if convergent => ConditionReport::new(
                    CONDITION_NAMES[4],
                    Verdict::Pass,
                    "no collapse among the enumerated terms",
                ),
                None => ConditionReport::new(
                    CONDITION_NAMES[4],
                    Verdict::Unknown,
                    "no collapse found, but normal forms need not be unique",
                ),
            };
            rep.bound = Some(bound);
            conditions.push(rep);
        }
        Err(e) => conditions.push(ConditionReport::new(
            CONDITION_NAMES[4],
            Verdict::Unknown,
            format!("{e}"),
        )),
    }

    // forward-closed
    match forward_closure_witness(trs) {
        None => conditions.push(ConditionReport::new(
            CONDITION_NAMES[5],
            Verdict::Pass,
            format!("every composition is redundant ({REDUNDANCY_NOTION})"),
        )),
        Some(cand) => {
            let mut rep = ConditionReport::new(
                CONDITION_NAMES[5],
                Verdict::Unknown,
                format!("composition not subsumed: {cand}"),
            );
            rep.witnesses.push(cand.rule.to_string());
            if convergent {
                match innermost_one_step_check(trs, opts.fc_depth, opts.fuel) {
                    Ok(chk) if !chk.holds => {
                        rep.verdict = Verdict::Fail;
                        let w = chk.witness.expect("failing redex");
                        rep.detail = format!(
                            "innermost redex {} does not reach its normal form {} in one step",
                            w,
                            chk.normal_form.expect("normal form")
                        );
                        rep.witnesses.push(w.to_string());
                    }
                    Ok(chk) => {
                        rep.bound = Some(format!("one-step check depth {}", chk.depth));
                        rep.detail.push_str("; no one-step failure found");
                    }
                    Err(e) => rep.detail.push_str(&format!("; {e}")),
                }
            }
            conditions.push(rep);
        }
    }

    // quasi-determinism of the RHS closure
    let closure = rhs_closure(trs);
    let qd = quasi_determinism(&closure);
    let mut rep = ConditionReport::new(
        CONDITION_NAMES[6],
        if qd.holds() { Verdict::Pass } else { Verdict::Fail },
        format!("{} equations", closure.len()),
    );
    for e in &qd.variable_sides {
        rep.witnesses.push(format!("variable side: {e}"));
    }
    for e in &qd.root_stable {
        rep.witnesses.push(format!("root-stable: {e}"));
    }
    for (a, b) in &qd.repetitions {
        rep.witnesses.push(format!(
            "root pair {} repeated: {} and {}",
            a.root_pair().expect("non-variable"),
            a,
            b
        ));
    }
    conditions.push(rep);

    let overall = if conditions.iter().any(|c| c.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if conditions.iter().any(|c| c.verdict == Verdict::Unknown) {
        Verdict::Unknown
    } else {
        Verdict::Pass
    };

    let consequences = (overall == Verdict::Pass && opts.run_consequences)
        .then(|| consequence_checks(trs, &closure, opts.consequence_depth, opts.max_terms, opts.fuel));
    let internal_inconsistency = consequences.as_ref().is_some_and(|c| !c.all_hold());
    let witnesses = variable_preservation_witnesses(trs);

    LmReport {
        overall,
        conditions,
        variable_preserving: witnesses.is_empty(),
        variable_preservation_witnesses: witnesses.iter().map(|(l, x)| format!("rule {l} drops {x}")).collect(),
        rhs_closure: closure,
        quasi_determinism: qd,
        termination_precedence,
        collapse_depth,
        consequences,
        internal_inconsistency,
    }
}
