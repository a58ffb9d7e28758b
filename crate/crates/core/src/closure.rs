//! Forward closure: composing a rule's rhs with another rule's lhs.

use std::fmt;

use serde::Serialize;

use crate::enumerate::{advance, enumerate_bounded, DEFAULT_MAX_TERMS};
use crate::error::{Error, Result};
use crate::rewrite::{Rule, Trs};
use crate::subst::{match_all, mgu, Substitution};
use crate::term::{Name, Position, Term};

/// Default generation bound for [`fc_iterate`].
pub const DEFAULT_FC_GENERATIONS: usize = 16;
/// Default instantiation depth for [`innermost_one_step_check`].
pub const DEFAULT_FC_DEPTH: usize = 3;
/// Upper bound on instances examined per rule by the one-step check.
pub const MAX_INSTANCES_PER_RULE: usize = 10_000;

/// A composed rule `σ(l1 → r1[r2]p)` with `σ = mgu(r1|p, l2)`.
#[derive(Debug, Clone, Serialize)]
pub struct FcCandidate {
    pub rule: Rule,
    pub first: String,
    pub second: String,
    pub position: Position,
    pub mgu: Substitution,
    pub generation: usize,
}

impl fmt::Display for FcCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}  ([{}] then [{}] at {})",
            self.rule, self.first, self.second, self.position
        )
    }
}

/// `r1 ⇝p r2`. `r2` is renamed apart from `r1` first. Fails when `p` is not
/// a non-variable position of `r1`'s rhs.
pub fn fc_step(r1: &Rule, r2: &Rule, p: &Position) -> Result<Option<FcCandidate>> {
    let sub = r1.rhs.subterm_at(p)?;
    if sub.is_var() {
        return Err(Error::InvalidPosition {
            position: p.to_string(),
            term: r1.rhs.to_string(),
        });
    }
    let r2 = r2.rename_apart(&r1.var_set());
    let Some(sigma) = mgu(sub, &r2.lhs) else {
        return Ok(None);
    };
    let rhs = sigma.apply(&r1.rhs.replace_at(p, r2.rhs.clone())?);
    let lhs = sigma.apply(&r1.lhs);
    debug_assert!(rhs.var_set().is_subset(&lhs.var_set()));
    Ok(Some(FcCandidate {
        rule: Rule::new(format!("{}.{}.{}", r1.label, p, r2.label), lhs, rhs),
        first: r1.label.clone(),
        second: r2.label.clone(),
        position: p.clone(),
        mgu: sigma,
        generation: 0,
    }))
}

/// Every `r1 ⇝p r2` with `r1` from `left`, `r2` from `right`.
pub fn fc_candidates(left: &[Rule], right: &[Rule]) -> Vec<FcCandidate> {
    let mut out = Vec::new();
    for r1 in left {
        for p in r1.rhs.fpos() {
            for r2 in right {
                if let Some(c) = fc_step(r1, r2, &p).expect("non-variable position") {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Sound approximation of redundancy: the sides are equal, or one
/// substitution maps some existing rule onto the candidate.
pub fn is_redundant_approx(candidate: &Rule, existing: &[Rule]) -> bool {
    candidate.lhs == candidate.rhs
        || existing
            .iter()
            .any(|r| match_all(&[(&r.lhs, &candidate.lhs), (&r.rhs, &candidate.rhs)]).is_some())
}

/// Generations of the forward closure.
#[derive(Debug, Clone, Serialize)]
pub struct FcTrace {
    /// `generations[k]` is `NR_{k+1}`.
    pub generations: Vec<Vec<FcCandidate>>,
    /// True when a generation added nothing.
    pub converged: bool,
    pub max_generations: usize,
    /// `FC_k` for the last computed `k`.
    pub closure: Vec<Rule>,
    pub redundancy: &'static str,
}

impl FcTrace {
    /// Generation index at which the fixpoint was reached.
    pub fn fixpoint_generation(&self) -> Option<usize> {
        self.converged.then(|| self.generations.len().saturating_sub(1))
    }
}

pub const REDUNDANCY_NOTION: &str = "subsumption or trivial equation";

/// `FC_{k+1} = FC_k ∪ (FC_k ⇝ R)` filtered by [`is_redundant_approx`],
/// until a generation is empty or `max_generations` generations were run.
/// Only rules new in `FC_k` are composed: older compositions were already
/// considered and the filter only grows.
pub fn fc_iterate(trs: &Trs, max_generations: usize) -> FcTrace {
    let base = trs.rules().to_vec();
    let mut closure = base.clone();
    let mut frontier = base.clone();
    let mut generations = Vec::new();
    let mut converged = false;
    for k in 1..=max_generations {
        let mut added: Vec<FcCandidate> = Vec::new();
        for mut cand in fc_candidates(&frontier, &base) {
            if is_redundant_approx(&cand.rule, &closure) {
                continue;
            }
            cand.generation = k;
            cand.rule.label = format!("fc{}_{}", k, added.len() + 1);
            closure.push(cand.rule.clone());
            added.push(cand);
        }
        let empty = added.is_empty();
        frontier = added.iter().map(|c| c.rule.clone()).collect();
        generations.push(added);
        if empty {
            converged = true;
            break;
        }
    }
    FcTrace {
        generations,
        converged,
        max_generations,
        closure,
        redundancy: REDUNDANCY_NOTION,
    }
}

/// The first non-redundant candidate of `R ⇝ R`, if any.
pub fn forward_closure_witness(trs: &Trs) -> Option<FcCandidate> {
    fc_candidates(trs.rules(), trs.rules())
        .into_iter()
        .find(|c| !is_redundant_approx(&c.rule, trs.rules()))
}

/// Forward-closed with respect to the subsumption approximation.
pub fn is_forward_closed(trs: &Trs) -> bool {
    forward_closure_witness(trs).is_none()
}

/// Result of the bounded innermost one-step check.
#[derive(Debug, Clone, Serialize)]
pub struct OneStepCheck {
    pub holds: bool,
    pub witness: Option<Term>,
    pub normal_form: Option<Term>,
    pub depth: usize,
    pub redexes_examined: usize,
    /// False when some instantiation set was truncated.
    pub exhaustive: bool,
}

/// Checks that every innermost redex obtained by instantiating a lhs with
/// irreducible ground terms of depth ≤ `depth` (and every lhs that is itself
/// ε̄-irreducible) rewrites to its normal form in a single root step.
pub fn innermost_one_step_check(trs: &Trs, depth: usize, fuel: usize) -> Result<OneStepCheck> {
    let en = enumerate_bounded(trs.signature(), &[], depth, true, DEFAULT_MAX_TERMS);
    let mut exhaustive = en.complete;
    let ground: Vec<Term> = en.terms.into_iter().filter(|t| trs.is_irreducible(t)).collect();
    let mut examined = 0;
    for rule in trs.rules() {
        let vars: Vec<Name> = rule.lhs.vars();
        let mut instances = vec![rule.lhs.clone()];
        if !vars.is_empty() && !ground.is_empty() {
            let mut idx = vec![0usize; vars.len()];
            let mut count = 0;
            loop {
                let sigma: Substitution = vars
                    .iter()
                    .zip(&idx)
                    .map(|(x, &i)| (x.clone(), ground[i].clone()))
                    .collect();
                instances.push(sigma.apply(&rule.lhs));
                count += 1;
                if count >= MAX_INSTANCES_PER_RULE {
                    exhaustive = false;
                    break;
                }
                if !advance_diagonal(&mut idx, ground.len()) {
                    break;
                }
            }
        }
        for t in instances {
            if !trs.is_innermost_redex(&t) {
                continue;
            }
            examined += 1;
            let nf = trs.normal_form(&t, fuel)?;
            if !trs.root_reducts(&t).iter().any(|(u, _)| *u == nf) {
                return Ok(OneStepCheck {
                    holds: false,
                    witness: Some(t),
                    normal_form: Some(nf),
                    depth,
                    redexes_examined: examined,
                    exhaustive,
                });
            }
        }
    }
    Ok(OneStepCheck {
        holds: true,
        witness: None,
        normal_form: None,
        depth,
        redexes_examined: examined,
        exhaustive,
    })
}

// Tuples over [0, base)^n ordered by their largest component, so truncation
// keeps the small instances of every variable.
fn advance_diagonal(idx: &mut [usize], base: usize) -> bool {
    let max = idx.iter().copied().max().unwrap_or(0);
    while advance(idx, max + 1) {
        if idx.contains(&max) {
            return true;
        }
    }
    if max + 1 >= base {
        return false;
    }
    idx.fill(0);
    *idx.last_mut().expect("non-empty") = max + 1;
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Term {
        Term::var(x)
    }
    fn c(x: &str) -> Term {
        Term::constant(x)
    }
    fn app(f: &str, a: Vec<Term>) -> Term {
        Term::app(f, a)
    }

    fn r1() -> Rule {
        Rule::new(
            "r1",
            app("f", vec![v("x"), app("i", vec![v("x")])]),
            app("g", vec![v("x")]),
        )
    }
    fn r2() -> Rule {
        Rule::new("r2", app("g", vec![c("b")]), c("c"))
    }
    fn r3() -> Rule {
        Rule::new("r3", app("f", vec![c("b"), app("i", vec![c("b")])]), c("c"))
    }

    #[test]
    fn composition_example() {
        let cand = fc_step(&r1(), &r2(), &Position::root()).unwrap().unwrap();
        assert_eq!(cand.rule.to_string(), "f(b,i(b)) -> c");
        let a = Rule::new("a", c("a"), c("b"));
        let b = Rule::new("b", c("c"), c("d"));
        assert!(fc_step(&a, &b, &Position::root()).unwrap().is_none());
        assert!(fc_step(&r1(), &r2(), &Position(vec![1])).is_err());
    }

    #[test]
    fn redundancy_examples() {
        let cand = r3();
        assert!(is_redundant_approx(&cand, &[r3()]));
        assert!(!is_redundant_approx(&cand, &[r1(), r2()]));
        assert!(is_redundant_approx(&Rule::new("t", c("a"), c("a")), &[]));
    }

    #[test]
    fn three_rule_system() {
        let full = Trs::from_rules(vec![r1(), r2(), r3()]).unwrap();
        assert!(is_forward_closed(&full));
        let tr = fc_iterate(&full, 16);
        assert!(tr.converged && tr.generations[0].is_empty());
        assert!(innermost_one_step_check(&full, 3, 100).unwrap().holds);

        let partial = Trs::from_rules(vec![r1(), r2()]).unwrap();
        assert_eq!(
            forward_closure_witness(&partial).unwrap().rule.to_string(),
            "f(b,i(b)) -> c"
        );
        let tr = fc_iterate(&partial, 16);
        assert!(tr.converged);
        assert_eq!(tr.generations[0].len(), 1);
        assert_eq!(tr.generations[0][0].rule.to_string(), "f(b,i(b)) -> c");
        assert_eq!(tr.fixpoint_generation(), Some(1));
        let chk = innermost_one_step_check(&partial, 3, 100).unwrap();
        assert!(!chk.holds);
        assert_eq!(chk.witness.unwrap().to_string(), "f(b,i(b))");
    }

    #[test]
    fn single_constant_rule() {
        let ab = Trs::from_rules(vec![Rule::new("r", c("a"), c("b"))]).unwrap();
        assert!(innermost_one_step_check(&ab, 3, 10).unwrap().holds);
    }

    #[test]
    fn diagonal_order_covers_all_tuples_once() {
        let mut idx = vec![0usize; 2];
        let mut seen = vec![idx.clone()];
        while advance_diagonal(&mut idx, 3) {
            seen.push(idx.clone());
        }
        assert_eq!(seen.len(), 9);
        let distinct: std::collections::BTreeSet<_> = seen.iter().collect();
        assert_eq!(distinct.len(), 9);
        assert!(seen.windows(2).all(|w| w[0].iter().max() <= w[1].iter().max()));
    }
}
