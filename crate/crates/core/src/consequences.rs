//! Structural properties every LM system has, checked on a certified
//! system. Exact checks cover overlaps; the remaining ones run over an
//! enumeration of terms and state their bound.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::closure::fc_candidates;
use crate::enumerate::{enumerate_bounded, search_variables, NormalForms};
use crate::error::Result;
use crate::overlap::{
    critical_pairs, equation_is_redundant, nosup, paramodulation_candidates, root_pairs, Equation, RootPair,
};
use crate::rewrite::{odp, RewriteStep, Trs};
use crate::subst::{match_all, mgu, variant_key};
use crate::term::{Name, Position, Term};

/// Outcome of one property.
#[derive(Debug, Clone, Serialize)]
pub struct ConsequenceCheck {
    pub name: &'static str,
    pub holds: bool,
    pub cases: usize,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsequenceReport {
    pub checks: Vec<ConsequenceCheck>,
    pub depth: usize,
    pub terms_examined: usize,
    pub enumeration_complete: bool,
}

impl ConsequenceReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&ConsequenceCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const LHS_NOT_UNIFIABLE: &str = "distinct left-hand sides not unifiable";
pub const RHS_LHS_NOT_UNIFIABLE: &str = "rhs not unifiable with a distinct lhs";
pub const NO_SUPERPOSITIONS: &str = "no non-overlay superpositions";
pub const NO_COMPOSITIONS: &str = "no forward compositions";
pub const PARAMODULATION_SATURATED: &str = "paramodulation conclusions redundant";
pub const NON_OVERLAPPING: &str = "no critical pairs";
pub const FREENESS: &str = "free over the signature";
pub const UNIQUE_JOIN_EQUATION: &str = "unique joining equation";
pub const EXACTLY_ONE_JOIN_CASE: &str = "exactly one join case";
pub const NORMAL_FORM_ROOT_PAIRS: &str = "normal-form root change is a root pair";
pub const NO_ROOT_REVERSAL: &str = "no reversed root pairs";
pub const COMPONENTWISE: &str = "root-preserving reductions are componentwise";
pub const ODP_JOINABLE: &str = "distinguishing positions joinable";

struct Tally {
    name: &'static str,
    cases: usize,
    witness: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            cases: 0,
            witness: None,
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn finish(self) -> ConsequenceCheck {
        ConsequenceCheck {
            name: self.name,
            holds: self.witness.is_none(),
            cases: self.cases,
            witness: self.witness,
        }
    }
}

fn exact_checks(trs: &Trs) -> Vec<ConsequenceCheck> {
    let rules = trs.rules();
    let mut lhs = Tally::new(LHS_NOT_UNIFIABLE);
    let mut rhs = Tally::new(RHS_LHS_NOT_UNIFIABLE);
    for (i, a) in rules.iter().enumerate() {
        for (j, b0) in rules.iter().enumerate() {
            if i == j {
                continue;
            }
            let b = b0.rename_apart(&a.var_set());
            if i < j {
                lhs.record(mgu(&a.lhs, &b.lhs).is_none(), || format!("{} and {}", a.label, b.label));
            }
            rhs.record(mgu(&a.rhs, &b.lhs).is_none(), || {
                format!("rhs of {} and lhs of {}", a.label, b.label)
            });
        }
    }
    let mut out = vec![lhs.finish(), rhs.finish()];

    let sups = nosup(trs);
    out.push(ConsequenceCheck {
        name: NO_SUPERPOSITIONS,
        holds: sups.is_empty(),
        cases: sups.len(),
        witness: sups.first().map(|s| s.term.to_string()),
    });
    let comps = fc_candidates(rules, rules);
    out.push(ConsequenceCheck {
        name: NO_COMPOSITIONS,
        holds: comps.is_empty(),
        cases: comps.len(),
        witness: comps.first().map(|c| c.to_string()),
    });
    let mut para = Tally::new(PARAMODULATION_SATURATED);
    for p in paramodulation_candidates(trs) {
        para.record(equation_is_redundant(trs, &p.conclusion_lhs, &p.conclusion_rhs), || {
            p.to_string()
        });
    }
    out.push(para.finish());
    let cps = critical_pairs(trs);
    out.push(ConsequenceCheck {
        name: NON_OVERLAPPING,
        holds: cps.is_empty(),
        cases: cps.len(),
        witness: cps.first().map(|c| c.to_string()),
    });
    out
}

struct Sample {
    term: Term,
    nf: Term,
    eps_irreducible: bool,
    innermost_redex: bool,
}

/// The system as a set: later rules that are variants of an earlier one are
/// dropped.
fn without_duplicate_rules(trs: &Trs) -> Trs {
    let mut seen = HashSet::new();
    let rules = trs
        .rules()
        .iter()
        .filter(|r| seen.insert(variant_key(&[&r.lhs, &r.rhs])))
        .cloned()
        .collect();
    trs.with_rules(rules).expect("subset of a valid system")
}

/// Runs every property. `closure` is the RHS closure of `trs`. Rules are
/// compared up to renaming, so repeated copies of a rule count once.
pub fn consequence_checks(
    trs: &Trs,
    closure: &[Equation],
    depth: usize,
    max_terms: usize,
    fuel: usize,
) -> ConsequenceReport {
    let trs = &without_duplicate_rules(trs);
    let mut checks = exact_checks(trs);
    let vars = search_variables(trs, 2);
    let en = enumerate_bounded(trs.signature(), &vars, depth, false, max_terms);
    match bounded_checks(trs, closure, &en.terms, fuel) {
        Ok(mut more) => checks.append(&mut more),
        Err(e) => checks.push(ConsequenceCheck {
            name: "normalization within fuel",
            holds: false,
            cases: 0,
            witness: Some(e.to_string()),
        }),
    }
    ConsequenceReport {
        checks,
        depth,
        terms_examined: en.terms.len(),
        enumeration_complete: en.complete,
    }
}

fn bounded_checks(trs: &Trs, closure: &[Equation], terms: &[Term], fuel: usize) -> Result<Vec<ConsequenceCheck>> {
    let mut nfs = NormalForms::new(trs, fuel);
    let mut samples = Vec::with_capacity(terms.len());
    for t in terms.iter().filter(|t| !t.is_var()) {
        let eps = trs.is_eps_irreducible(t);
        samples.push(Sample {
            term: t.clone(),
            nf: nfs.get(t)?,
            eps_irreducible: eps,
            innermost_redex: eps && trs.is_root_redex(t),
        });
    }
    let pairs = root_pairs(trs);

    // groups of ε̄-irreducible samples sharing a normal form
    let mut groups: BTreeMap<&Term, Vec<&Sample>> = BTreeMap::new();
    for s in samples.iter().filter(|s| s.eps_irreducible) {
        groups.entry(&s.nf).or_default().push(s);
    }

    let mut free = Tally::new(FREENESS);
    let mut unique_eq = Tally::new(UNIQUE_JOIN_EQUATION);
    let mut one_case = Tally::new(EXACTLY_ONE_JOIN_CASE);
    for group in groups.values() {
        for (i, s) in group.iter().enumerate() {
            for t in &group[i + 1..] {
                let (f, g) = (root(&s.term), root(&t.term));
                if f == g {
                    free.record(false, || {
                        format!("{} and {} both normalize to {}", s.term, t.term, s.nf)
                    });
                    continue;
                }
                let rp = RootPair::new(f.clone(), g.clone());
                let n = closure
                    .iter()
                    .filter(|e| e.root_pair().as_ref() == Some(&rp) && e.rewrites_at_root(&s.term, &t.term))
                    .count();
                unique_eq.record(n == 1, || {
                    format!(
                        "{} and {} are joined by {n} equations of the RHS closure",
                        s.term, t.term
                    )
                });
                for (a, b) in [(s, t), (t, s)] {
                    if a.innermost_redex {
                        let k = join_cases(trs, &a.term, &b.term);
                        one_case.record(k == 1, || format!("{} and {} satisfy {k} join cases", a.term, b.term));
                    }
                }
            }
        }
        free.cases += group.len();
    }

    let mut nf_pairs = Tally::new(NORMAL_FORM_ROOT_PAIRS);
    let mut reversal = Tally::new(NO_ROOT_REVERSAL);
    let mut componentwise = Tally::new(COMPONENTWISE);
    let mut odp_join = Tally::new(ODP_JOINABLE);
    for s in &samples {
        let f = root(&s.term);
        if let Some(g) = s.nf.root() {
            if g != f {
                nf_pairs.record(pairs.contains(&(f.clone(), g.clone())), || {
                    format!("{} normalizes to {} but ({f},{g}) is not a root pair", s.term, s.nf)
                });
            }
            reversal.record(!pairs.contains(&(g.clone(), f.clone())) || g == f, || {
                format!("{} normalizes to {} against root pair ({g},{f})", s.term, s.nf)
            });
        }
        let trace = trs.normalize(&s.term, fuel)?;
        let visited = trace.terms(trs)?;
        let mut root_step_seen = false;
        for (k, u) in visited.iter().enumerate().skip(1) {
            root_step_seen |= trace.steps[k - 1].position.is_root();
            if u.root() == Some(f) {
                let ok = !root_step_seen && decomposes(trs, &s.term, u, &trace.steps[..k]);
                componentwise.record(ok, || format!("{} reaches {}", s.term, u));
            }
            for p in odp(&s.term, u) {
                let (a, b) = (s.term.get(&p), u.get(&p));
                let ok = match (a, b) {
                    (Some(a), Some(b)) => nfs.get(a)? == nfs.get(b)?,
                    _ => false,
                };
                odp_join.record(ok, || format!("{} and {} differ at {p} without joining", s.term, u));
            }
        }
    }

    let mut out = vec![free.finish(), unique_eq.finish(), one_case.finish()];
    out.extend([
        nf_pairs.finish(),
        reversal.finish(),
        componentwise.finish(),
        odp_join.finish(),
    ]);
    Ok(out)
}

fn root(t: &Term) -> &Name {
    t.root().expect("non-variable sample")
}

// The steps contain no root step; replaying the steps below argument i on
// the i-th argument of `s` must give the i-th argument of `u`.
fn decomposes(trs: &Trs, s: &Term, u: &Term, steps: &[RewriteStep]) -> bool {
    s.args().iter().zip(u.args()).enumerate().all(|(i, (si, ui))| {
        let prefix = Position(vec![i + 1]);
        let mut cur = si.clone();
        for st in steps {
            if let Some(rest) = st.position.strip_prefix(&prefix) {
                let local = RewriteStep {
                    label: st.label.clone(),
                    position: rest,
                    substitution: st.substitution.clone(),
                };
                match trs.replay(&cur, &local) {
                    Ok(next) => cur = next,
                    Err(_) => return false,
                }
            }
        }
        cur == *ui
    })
}

// Number of ways an innermost redex `s` joins an ε̄-irreducible `t` with a
// different root: one rule rewriting s to t, or two rules rewriting both to
// a common term, each at the root.
fn join_cases(trs: &Trs, s: &Term, t: &Term) -> usize {
    let direct = trs
        .rules()
        .iter()
        .filter(|r| match_all(&[(&r.lhs, s), (&r.rhs, t)]).is_some())
        .count();
    let from_s = trs.root_reducts(s);
    let from_t = trs.root_reducts(t);
    let mut via = BTreeSet::new();
    for (a, r1) in &from_s {
        for (b, r2) in &from_t {
            if a == b {
                via.insert((r1.label.clone(), r2.label.clone()));
            }
        }
    }
    direct + via.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlap::rhs_closure;
    use crate::rewrite::Rule;

    #[test]
    fn lemma_system_has_all_properties() {
        let x = Term::var("x");
        let f = |t| Term::app("f", vec![t]);
        let g = |t| Term::app("g", vec![t]);
        let h = |t| Term::app("h", vec![t]);
        let trs = Trs::from_rules(vec![Rule::new("r", f(g(h(x.clone()))), g(x))]).unwrap();
        let rep = consequence_checks(&trs, &rhs_closure(&trs), 4, 10_000, 1000);
        assert!(
            rep.all_hold(),
            "{:?}",
            rep.checks.iter().filter(|c| !c.holds).collect::<Vec<_>>()
        );
        assert!(rep.get(UNIQUE_JOIN_EQUATION).unwrap().cases > 0);
    }

    #[test]
    fn overlapping_system_is_caught() {
        let c = Term::constant;
        let trs = Trs::from_rules(vec![
            Rule::new("1", Term::app("f", vec![Term::var("x")]), c("a")),
            Rule::new("2", Term::app("f", vec![c("b")]), c("a")),
        ])
        .unwrap();
        let rep = consequence_checks(&trs, &rhs_closure(&trs), 2, 1000, 100);
        assert!(!rep.get(LHS_NOT_UNIFIABLE).unwrap().holds);
        assert!(!rep.get(NON_OVERLAPPING).unwrap().holds);
    }

    #[test]
    fn repeated_rules_count_once() {
        let trs = crate::parse::parse_trs("sig: h/0 k/0 a/2\nvars: x\nrules:\n h -> k\n h -> k\n").unwrap();
        let report = consequence_checks(&trs, &rhs_closure(&trs), 3, 1_000, 100);
        assert!(report.all_hold(), "{:?}", report.checks);
    }
}
