//! Bounded, deterministic term enumeration and the subterm-collapse search.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::Result;
use crate::rewrite::Trs;
use crate::subst::fresh_name;
use crate::term::{Name, Position, Signature, Term};

/// Default cap on the number of enumerated terms.
pub const DEFAULT_MAX_TERMS: usize = 20_000;

/// Output of a bounded enumeration.
#[derive(Debug, Clone)]
pub struct Enumeration {
    /// Terms in depth-increasing order.
    pub terms: Vec<Term>,
    /// Largest depth whose terms were all produced.
    pub complete_depth: usize,
    /// True when every term up to the requested depth was produced.
    pub complete: bool,
}

/// All terms up to `max_depth`, constants (signature order) then variables at
/// depth 1, and at each deeper level the applications of each non-constant
/// symbol whose deepest argument has depth exactly one less.
pub fn enumerate_terms(sig: &Signature, vars: &[Name], max_depth: usize, ground_only: bool) -> Vec<Term> {
    enumerate_bounded(sig, vars, max_depth, ground_only, usize::MAX).terms
}

/// Like [`enumerate_terms`] but stops after `max_terms` terms.
pub fn enumerate_bounded(
    sig: &Signature,
    vars: &[Name],
    max_depth: usize,
    ground_only: bool,
    max_terms: usize,
) -> Enumeration {
    let mut terms: Vec<Term> = Vec::new();
    // terms[level_start[d-1]..level_start[d]] have depth exactly d
    let mut level_start = vec![0usize];
    let mut complete_depth = 0;
    let functions: Vec<(Name, usize)> = sig
        .symbols()
        .filter(|s| s.arity > 0)
        .map(|s| (s.name, s.arity))
        .collect();
    'depths: for depth in 1..=max_depth {
        if depth == 1 {
            let leaves = sig
                .constants()
                .map(|c| Term::App(c.clone(), Vec::new()))
                .chain(vars.iter().filter(|_| !ground_only).map(|x| Term::Var(x.clone())));
            for t in leaves {
                if terms.len() >= max_terms {
                    break 'depths;
                }
                terms.push(t);
            }
        } else {
            let below = terms.len();
            let prev_start = level_start[depth - 2];
            if prev_start == below {
                // nothing of depth d-1, so nothing deeper either
                complete_depth = max_depth;
                break;
            }
            for (f, arity) in &functions {
                let mut idx = vec![0usize; *arity];
                loop {
                    if idx.iter().any(|&i| i >= prev_start) {
                        if terms.len() >= max_terms {
                            break 'depths;
                        }
                        let args = idx.iter().map(|&i| terms[i].clone()).collect();
                        terms.push(Term::App(f.clone(), args));
                    }
                    if !advance(&mut idx, below) {
                        break;
                    }
                }
            }
        }
        level_start.push(terms.len());
        complete_depth = depth;
    }
    Enumeration {
        complete: complete_depth >= max_depth,
        complete_depth,
        terms,
    }
}

/// Odometer step over `[0, base)^n`, rightmost digit fastest. Returns false
/// after the last tuple.
pub(crate) fn advance(idx: &mut [usize], base: usize) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < base {
            return true;
        }
        idx[k] = 0;
    }
    false
}

/// Up to two variable names for enumeration: the system's declared variables
/// first, fresh names otherwise.
pub fn search_variables(trs: &Trs, count: usize) -> Vec<Name> {
    let mut out: Vec<Name> = trs.variables().iter().take(count).cloned().collect();
    let mut taken: BTreeSet<Name> = trs.signature().names().cloned().collect();
    taken.extend(out.iter().cloned());
    while out.len() < count {
        let x = fresh_name("x", &taken);
        taken.insert(x.clone());
        out.push(x);
    }
    out
}

/// Memoized normal forms.
pub struct NormalForms<'a> {
    trs: &'a Trs,
    fuel: usize,
    cache: HashMap<Term, Term>,
}

impl<'a> NormalForms<'a> {
    pub fn new(trs: &'a Trs, fuel: usize) -> Self {
        NormalForms {
            trs,
            fuel,
            cache: HashMap::new(),
        }
    }

    pub fn get(&mut self, t: &Term) -> Result<Term> {
        if let Some(n) = self.cache.get(t) {
            return Ok(n.clone());
        }
        let n = self.trs.normal_form(t, self.fuel)?;
        self.cache.insert(t.clone(), n.clone());
        Ok(n)
    }
}

/// A term equal modulo the system to one of its proper subterms.
#[derive(Debug, Clone, Serialize)]
pub struct CollapseWitness {
    pub term: Term,
    pub position: Position,
    pub normal_form: Term,
}

/// Result of the bounded collapse search.
#[derive(Debug, Clone, Serialize)]
pub struct CollapseSearch {
    pub witness: Option<CollapseWitness>,
    pub depth_requested: usize,
    /// Depth up to which every term was examined.
    pub depth_complete: usize,
    pub terms_examined: usize,
    pub variables: Vec<String>,
}

/// Looks for a term `u` and a position `p ≠ ε` with `u ↓ = u|p ↓`, over
/// terms with at most two variables up to `max_depth`.
pub fn subterm_collapse_search(trs: &Trs, max_depth: usize, max_terms: usize, fuel: usize) -> Result<CollapseSearch> {
    let vars = search_variables(trs, 2);
    let en = enumerate_bounded(trs.signature(), &vars, max_depth, false, max_terms);
    let mut nf = NormalForms::new(trs, fuel);
    let mut witness = None;
    'outer: for u in &en.terms {
        if u.is_var() {
            continue;
        }
        let top = nf.get(u)?;
        for p in u.positions(false).into_iter().skip(1) {
            let sub = u.get(&p).expect("own position");
            if nf.get(sub)? == top {
                witness = Some(CollapseWitness {
                    term: u.clone(),
                    position: p,
                    normal_form: top,
                });
                break 'outer;
            }
        }
    }
    Ok(CollapseSearch {
        witness,
        depth_requested: max_depth,
        depth_complete: en.complete_depth,
        terms_examined: en.terms.len(),
        variables: vars.iter().map(|x| x.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::Rule;

    fn sig(decls: &[(&str, usize)]) -> Signature {
        let mut s = Signature::new();
        for (n, a) in decls {
            s.declare(n, *a).unwrap();
        }
        s
    }

    fn show(ts: &[Term]) -> Vec<String> {
        ts.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn small_enumerations() {
        let s = sig(&[("0", 0), ("s", 1)]);
        assert_eq!(show(&enumerate_terms(&s, &[], 2, true)), ["0", "s(0)"]);
        let s = sig(&[("a", 0)]);
        assert_eq!(show(&enumerate_terms(&s, &[Name::from("x")], 1, false)), ["a", "x"]);
        let s = sig(&[("0", 0), ("s", 1), ("f", 2)]);
        assert_eq!(show(&enumerate_terms(&s, &[], 2, true)), ["0", "s(0)", "f(0,0)"]);
    }

    #[test]
    fn level_counts_match_recurrence() {
        // N(d) = number of terms of depth <= d; N(1) = 2, N(d) = 2 + N(d-1) + N(d-1)^2
        let s = sig(&[("a", 0), ("b", 0), ("h", 1), ("f", 2)]);
        let mut n = 2usize;
        for d in 1..=3 {
            assert_eq!(enumerate_terms(&s, &[], d, true).len(), n);
            n = 2 + n + n * n;
        }
        let ts = enumerate_terms(&s, &[], 3, true);
        let distinct: BTreeSet<_> = ts.iter().collect();
        assert_eq!(distinct.len(), ts.len());
        assert!(ts.windows(2).all(|w| w[0].depth() <= w[1].depth()));
    }

    #[test]
    fn budget_reports_partial_depth() {
        let s = sig(&[("a", 0), ("f", 2)]);
        let en = enumerate_bounded(&s, &[], 4, true, 10);
        assert_eq!(en.terms.len(), 10);
        assert!(!en.complete);
        assert_eq!(en.complete_depth, 3);
    }

    #[test]
    fn collapse_search_examples() {
        let f = |t| Term::app("f", vec![t]);
        let g = |t| Term::app("g", vec![t]);
        let h = |t| Term::app("h", vec![t]);
        let x = Term::var("x");
        let collapsing = Trs::from_rules(vec![Rule::new("r", f(g(x.clone())), x.clone())]).unwrap();
        let res = subterm_collapse_search(&collapsing, 3, 10_000, 1000).unwrap();
        let w = res.witness.unwrap();
        assert_eq!(w.term.to_string(), "f(g(x))");
        assert_eq!(w.position.to_string(), "1.1");

        let lemma = Trs::from_rules(vec![Rule::new("r", f(g(h(x.clone()))), g(x))]).unwrap();
        let res = subterm_collapse_search(&lemma, 5, 100_000, 1000).unwrap();
        assert!(res.witness.is_none());
        assert_eq!(res.depth_complete, 5);

        let empty = Trs::from_rules(vec![]).unwrap();
        assert!(subterm_collapse_search(&empty, 4, 1000, 10).unwrap().witness.is_none());
    }
}
